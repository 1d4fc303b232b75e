import pytest

from sandwich_lab.atlas import NormalFormCoefficients, ProductNormalForm
from sandwich_lab.classifier import (
    BudgetExceededError,
    CanonicalForm,
    Obstruction,
    P2NormalForm,
    ReductionError,
    canonical_to_fan,
    classify_surface,
    compose_trace,
    enumerate_normal_forms,
    gfr_verdict,
    reduce,
    replay,
)
from sandwich_lab.derivation import parse_derivation
from sandwich_lab.toric import Fan, fan_isomorphic, sigma_di


def NF(d, p, a2, a1, a0, F, b):
    return NormalFormCoefficients(d, p, a2, a1, a0, tuple(F), b)


@pytest.mark.parametrize("p", [3, 5])
def test_already_diagonal(p):
    for i in range(1, p):
        rep = reduce(NF(1, p, 0, 1, 0, [0, 0], i))
        assert rep.canonical == CanonicalForm("Diagonal", i)
        assert all(s.new is None for s in rep.trace)
        assert replay(rep)


def test_additive_case_uses_antiderivative_and_ends_diagonal_zero():
    # F = 2 + x on H_2 at p = 3: F'' = 0 and deg F < d
    rep = reduce(NF(2, 3, 0, 0, 1, [2, 1, 0], 0))
    steps = [s.step for s in rep.trace]
    assert "step (1)" in steps
    assert any("antiderivative" in s.description for s in rep.trace)
    assert rep.canonical == CanonicalForm("Diagonal", 0)
    assert replay(rep)


def test_additive_full_degree_is_contradiction():
    # x^2 d/dx: the double zero moves to infinity and F picks up degree d
    with pytest.raises(ReductionError) as info:
        reduce(NF(2, 2, 1, 0, 0, [1, 0, 0], 0))
    assert info.value.obstruction is Obstruction.NILPOTENT


def test_series_shift():
    rep = reduce(NF(1, 3, 0, 1, 0, [1, 0], 1))
    assert [s.step for s in rep.trace][0] == "step (2)"
    assert rep.canonical == CanonicalForm("Diagonal", 1)
    assert replay(rep)


def test_irrational_zeros_go_through_fp2():
    rep = reduce(NF(1, 3, 1, 0, 1, [0, 0], 0))  # (x^2 + 1) d/dx + ...
    assert rep.field_degree == 2
    assert replay(rep)


def test_not_p_closed():
    with pytest.raises(ReductionError) as info:
        reduce(NF(2, 2, 1, 1, 1, [0, 1, 1], 0))
    assert info.value.obstruction is Obstruction.NOT_P_CLOSED


def test_vertical():
    rep = reduce(NF(1, 5, 0, 0, 0, [0, 0], 1))
    assert rep.canonical == CanonicalForm("Vertical")
    assert replay(rep)


def test_product_forms():
    rep = reduce(ProductNormalForm(3, (0, 1, 0), (0, 2, 0)))
    assert rep.canonical == CanonicalForm("Diagonal", 2)
    rep = reduce(ProductNormalForm(3, (1, 0, 1), (1, 1, 2)))
    assert rep.field_degree == 2 and replay(rep)
    with pytest.raises(ReductionError) as info:
        reduce(ProductNormalForm(3, (1, 0, 0), (0, 0, 1)))
    assert info.value.obstruction is Obstruction.NILPOTENT


def test_p2_matrix_forms():
    # diag(0, 1, 3) at p = 5: x dx + 3 y dy
    rep = reduce(P2NormalForm(5, ((0, 0, 0), (0, 1, 0), (0, 0, 3))))
    assert rep.canonical.kind == "Diagonal" and replay(rep)
    # companion matrix of t^3 - 2t: eigenvalues 0 and +-sqrt(2) in F_9
    rep = reduce(P2NormalForm(3, ((0, 0, 0), (1, 0, 2), (0, 1, 0))))
    assert rep.field_degree == 2 and replay(rep)


def test_canonical_fans():
    assert canonical_to_fan(CanonicalForm("Diagonal", 0), 1, 2) == Fan(((0, 1), (1, 0), (0, -1), (-2, 1)))
    assert canonical_to_fan(CanonicalForm("Vertical"), 1, 2) == Fan(((0, 1), (1, 0), (0, -1), (-1, 2)))
    assert canonical_to_fan(CanonicalForm("Diagonal", 1), 1, 2) == Fan(((0, 1), (2, -1), (0, -1), (-1, 1)))
    assert canonical_to_fan(CanonicalForm("Diagonal", 2), 3, 5) == sigma_di(5, 3, 2)


def test_vertical_and_diagonal_zero_differ():
    for d in (1, 2, 3):
        for p in (2, 3, 5):
            assert fan_isomorphic(sigma_di(p, d, 0), sigma_di(p, d, p)) is None


def test_canonical_json():
    c = CanonicalForm("Diagonal", 3, "U0")
    assert CanonicalForm.from_json(c.to_json()) == c
    with pytest.raises(ValueError):
        CanonicalForm("Vertical", 1)


def test_compose_trace_identity_for_empty_trace():
    from sandwich_lab.gf import field

    phi = compose_trace([], field(3, 1))
    assert [str(r.format(("x", "y"))) for r in phi] == ["x", "y"]


@pytest.mark.parametrize(
    "text,surface,p,gfr,obstruction",
    [
        ("x dx + y dy", "p2", 3, True, Obstruction.NONE),
        ("x^2 dx + y^2 dy", "p2", 2, False, Obstruction.NILPOTENT),
        ("x*y^2 dx + (x^2 + y^3) dy", "p2", 2, False, Obstruction.NO_GLOBAL_SECTION),
        ("x^2 dx + y dy", "p2", 3, False, Obstruction.NOT_P_CLOSED),
        ("x dx + 2*y dy", "hirzebruch:2", 3, True, Obstruction.NONE),
        ("dy", "hirzebruch:1", 2, True, Obstruction.NONE),
    ],
)
def test_verdicts(text, surface, p, gfr, obstruction):
    chart = "U0" if surface == "p2" else "U1"
    v = gfr_verdict(parse_derivation(text, ("x", "y"), p, chart), surface)
    assert v.gfr is gfr and v.obstruction is obstruction
    if gfr:
        assert v.fan is not None


def test_verdict_splitting_when_multiplicative():
    v = gfr_verdict(parse_derivation("x dx + y dy", ("x", "y"), 5, "U0"), "p2")
    assert v.splitting_verified is True


def test_example3_lists_both_obstructions():
    v = gfr_verdict(parse_derivation("x^2 dx + y^2 dy", ("x", "y"), 2, "U0"), "p2")
    assert v.obstructions == [Obstruction.NILPOTENT, Obstruction.NO_GLOBAL_SECTION]


def test_enumeration_covers_exhaustive_labels():
    proj = classify_surface("hirzebruch:1", 2)
    full = classify_surface("hirzebruch:1", 2, exhaustive=True)
    assert [c.canonical for c in proj.canonical_classes] == [c.canonical for c in full.canonical_classes]
    assert full.enumerated == 2 ** 6 - 1


def test_budget():
    with pytest.raises(BudgetExceededError, match="p = 17"):
        classify_surface("p2", 17)
    with pytest.raises(BudgetExceededError, match="d = 7"):
        classify_surface("hirzebruch:7", 2)


def test_threads_are_deterministic():
    a = classify_surface("hirzebruch:2", 3, threads=1).to_json()
    b = classify_surface("hirzebruch:2", 3, threads=4).to_json()
    assert a == b


def test_enumerated_forms_are_nonzero():
    for nf in enumerate_normal_forms("hirzebruch:2", 3):
        f, g = nf.polys()
        assert not (f.is_zero() and g.is_zero())
    assert sum(1 for _ in enumerate_normal_forms("p2", 3)) == 27 + 9


def test_no_unknown_obstructions_on_grid():
    for p in (2, 3):
        for s in ("p2", "hirzebruch:0", "hirzebruch:1", "hirzebruch:2"):
            res = classify_surface(s, p, check_replay=True)
            assert "Unknown" not in res.obstructed
            assert res.replay_failures == 0
