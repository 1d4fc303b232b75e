import pytest

from sandwich_lab.derivation import (
    Derivation,
    NotPClosedError,
    ProjectorUndefinedError,
    apply,
    is_multiplicative,
    is_nilpotent,
    is_p_closed,
    normalize,
    p_closed_witness,
    parse_derivation,
    power_p,
    splitting_projector,
)
from sandwich_lab.field_poly import Poly, RatFunc

V = ("x", "y")


def D(text, p, variables=V, chart="U"):
    return parse_derivation(text, variables, p, chart)


def R(text, p, variables=V):
    return RatFunc.parse(text, variables, p)


def test_apply_euler_field():
    assert apply(D("x dx + y dy", 3), Poly.parse("x^2*y", V, 3)).is_zero()
    assert apply(D("x dx + y dy", 5), R("y/x", 5)).is_zero()
    assert apply(D("x*y^2 dx + (x^2 + y^3) dy", 2), Poly.parse("x^2", V, 2)).is_zero()


def test_normalize_examples():
    nd = normalize(D("-z dz", 3, ("z", "w")))
    assert str(nd.f) == "1" and nd.g.is_zero() and nd.content == R("-z", 3, ("z", "w"))
    nd = normalize(Derivation("U1", R("w^2/z", 2, ("z", "w")), R("1/z", 2, ("z", "w"))))
    assert str(nd.f) == "w^2" and str(nd.g) == "1" and nd.content == R("1/z", 2, ("z", "w"))
    nd = normalize(D("x dx + y dy", 7))
    assert (str(nd.f), str(nd.g)) == ("x", "y")


@pytest.mark.parametrize("p", [2, 3, 5])
def test_power_p(p):
    assert power_p(D("dx", p)) is None
    for i in range(p):
        delta = D(f"x dx + {i}*y dy", p)
        assert power_p(delta) == delta
    assert power_p(D("x^2 dx + y^2 dy", 2)) is None


def test_p_closed_witness_examples():
    assert p_closed_witness(D("x dx + y dy", 3)) == R("1", 3)
    assert p_closed_witness(D("x*y^2 dx + (x^2 + y^3) dy", 2)) == R("y^2", 2)
    assert p_closed_witness(D("dx + x*y^2 dy", 2)) is None


def test_nilpotency():
    assert is_nilpotent(D("dx", 3))
    assert not is_nilpotent(D("x dx + y dy", 3))
    assert is_nilpotent(D("x^2 dx + y^2 dy", 2))
    with pytest.raises(NotPClosedError):
        is_nilpotent(D("dx + x*y^2 dy", 2))


def test_splitting_projector():
    delta = D("x dx + y dy", 3)
    assert splitting_projector(delta, Poly.parse("x", V, 3)).is_zero()
    r = Poly.parse("x^2*y", V, 3)
    assert splitting_projector(delta, r) == r
    assert splitting_projector(delta, Poly.const(1, V, 3)) == Poly.const(1, V, 3)
    with pytest.raises(ProjectorUndefinedError):
        splitting_projector(D("dx", 3), r)


def test_multiplicative_and_p_closed():
    assert is_multiplicative(D("x dx + 2*y dy", 5))
    assert is_p_closed(D("dx", 5)) and not is_multiplicative(D("dx", 5))


def test_parse_chart_suffix_and_json():
    delta = parse_derivation("z dz + w dw @ U1", ("z", "w"), 3)
    assert delta.chart_id == "U1"
    assert Derivation.from_json(delta.to_json()) == delta
