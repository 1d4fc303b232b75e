import pytest

from sandwich_lab.toric import (
    Cone2D,
    Fan,
    FanError,
    build_fan,
    cyclic_type,
    cyclic_type_fast,
    fan_isomorphic,
    frobenius_refine,
    hirzebruch_fan,
    iso_classes,
    p2_fan,
    refine,
    semigroup_algebra_gens,
    sigma_di,
    sigma_i,
)


def test_fan_builders():
    assert hirzebruch_fan(2) == Fan(((0, 1), (1, 0), (0, -1), (-1, 2)))
    assert sigma_di(3, 1, 1) == Fan(((0, 1), (3, -1), (0, -1), (-3, 2)))
    assert sigma_di(2, 2, 0) == hirzebruch_fan(1)
    assert sigma_di(2, 2, 0).is_smooth()


def test_incomplete_fan_rejected():
    with pytest.raises(FanError):
        Fan(((1, 0), (0, 1)))


@pytest.mark.parametrize("p", [2, 3, 5, 7])
def test_refinements(p):
    for d in range(4):
        assert refine(hirzebruch_fan(d), (1, 0), p) == sigma_di(p, d, 0)
        assert refine(hirzebruch_fan(d), (0, 1), p) == sigma_di(p, d, p)
        assert frobenius_refine(hirzebruch_fan(d), p) == hirzebruch_fan(d)
    for i in range(1, p):
        assert refine(p2_fan(), (1, i), p) == sigma_i(p, i)
        assert build_fan("Sigma_i", p, i) == sigma_i(p, i)


def test_cyclic_types():
    for p in (2, 3, 5, 7):
        assert cyclic_type(Cone2D((0, 1), (p, -1))).label == f"1/{p}(1,1)"
    assert cyclic_type(Cone2D((0, 1), (1, 0))).smooth
    assert cyclic_type(Cone2D((0, 1), (5, -2))).label == "1/5(1,2)"
    assert cyclic_type(Cone2D((0, 1), (5, -3))).label == "1/5(1,2)"  # a ~ a^-1


def test_fast_type_matches_oracle():
    for a in range(-6, 7):
        for b in range(-6, 7):
            for c in range(-6, 7):
                for e in range(-6, 7):
                    if a * e - b * c == 0 or abs(a * e - b * c) > 12:
                        continue
                    cone = Cone2D((a, b), (c, e))
                    assert cyclic_type(cone) == cyclic_type_fast(cone)


def test_semigroup_generators():
    assert semigroup_algebra_gens(Cone2D((0, 1), (1, 0))) == [(0, 1), (1, 0)]
    a1 = Cone2D((0, 1), (2, -1))
    assert semigroup_algebra_gens(a1) == [(1, 0), (1, 1), (1, 2)]
    # in exponents of the coordinates dual to the two rays: x^2, xy, y^2
    assert semigroup_algebra_gens(a1, ((0, 1), (2, -1))) == [(0, 2), (1, 1), (2, 0)]
    for p in (2, 3, 5):
        gens = semigroup_algebra_gens(Cone2D((p, -1), (0, 1)), ((p, -1), (0, 1)))
        assert gens == sorted((a, p - a) for a in range(p + 1))


def test_fan_isomorphism():
    f = sigma_di(5, 2, 3)
    assert fan_isomorphic(f, f) == ((1, 0), (0, 1))
    assert fan_isomorphic(sigma_di(3, 1, 1), sigma_di(3, 1, 2)) is None
    assert fan_isomorphic(hirzebruch_fan(0), refine(hirzebruch_fan(0), (1, 0), 3)) is not None
    assert fan_isomorphic(sigma_di(3, 1, 0), sigma_di(3, 1, 3)) is None


def test_iso_classes_symmetry():
    fans = [sigma_di(5, 1, i) for i in range(6)]
    groups = iso_classes(fans)
    assert sorted(i for g in groups for i in g) == list(range(6))
    # x -> 1/x on H_d: Sigma_{d,i} ~ Sigma_{d,-d-i}
    assert any({0, 4} <= set(g) for g in groups)


def test_fan_json_roundtrip():
    f = sigma_di(3, 2, 1)
    assert Fan.from_json(f.to_json()) == f
