from sandwich_lab.field_poly import Poly
from sandwich_lab.gf import field
from sandwich_lab.qpoly import Frac, QPoly, apply_field, coordinate_fracs

F = field(3, 2)
x, y = QPoly.var(F, 2, 0), QPoly.var(F, 2, 1)
one = QPoly.const(F, 2, 1)


def test_lift_roundtrip_arithmetic():
    a = Poly.parse("x^2*y + 2*y", ("x", "y"), 3)
    A = QPoly.lift(a, F)
    assert A * one == A and (A - A).is_zero()


def test_divexact():
    a = (x + one) * (x - y) ** 2
    assert a.divexact(x - y) == (x + one) * (x - y)


def test_moebius_compose_is_identity():
    alpha = F.roots([1, 0, 1])[0]  # sqrt(-1) in F_9
    A = QPoly.const(F, 2, alpha)
    B = QPoly.const(F, 2, F.neg(alpha))
    new = [Frac(x - A, x - B), Frac.of(y)]
    inv = [Frac(B * x - A, x - one), Frac.of(y)]
    assert new[0].compose(inv).equals(Frac.of(x))
    assert inv[0].compose(new).equals(Frac.of(x))


def test_apply_field_quotient_rule():
    r = Frac(x, y + one)
    got = apply_field(y, x, r)
    # y * 1/(y+1) + x * (-x/(y+1)^2)
    want = Frac(y * (y + one) - x * x, (y + one) * (y + one))
    assert got.equals(want)


def test_coordinate_fracs():
    cx, cy = coordinate_fracs(F)
    assert cx.num == x and cy.num == y
