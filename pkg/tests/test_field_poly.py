import pytest

from sandwich_lab.field_poly import ParseError, Poly, RatFunc, divexact, is_prime, poly_gcd

V = ("x", "y")


def P(text, p=3):
    return Poly.parse(text, V, p)


def test_is_prime():
    assert [n for n in range(20) if is_prime(n)] == [2, 3, 5, 7, 11, 13, 17, 19]


def test_coefficients_reduce_mod_p():
    assert P("4*x + 3*y") == P("x")
    assert P("3").is_zero()


def test_frobenius_on_sums():
    for p in (2, 3, 5):
        assert Poly.parse("(x + y)", V, p) ** p == Poly.parse(f"x^{p} + y^{p}", V, p)


def test_diff_kills_pth_powers():
    assert P("x^3*y + x*y^2").diff("x") == P("y^2")
    assert P("x^3").diff(0).is_zero()


def test_leibniz_example():
    a, b = P("x^2*y + 1"), P("x*y^2 + y")
    assert (a * b).diff("y") == a.diff("y") * b + a * b.diff("y")


def test_gcd_and_divexact():
    a, b = P("x^2 - y^2"), P("x*y + y^2")
    g = poly_gcd(a, b)
    assert divexact(a, g) * g == a
    assert g.total_degree() == 1
    with pytest.raises(Exception):
        divexact(P("x^2 + 1"), P("y"))


def test_parse_error_has_position():
    with pytest.raises(ParseError) as info:
        P("x^2 + * y")
    assert info.value.position >= 0


def test_ratfunc_arithmetic():
    x = RatFunc.parse("x", V, 5)
    r = RatFunc.parse("1/x", V, 5)
    assert (x * r) == RatFunc.parse("1", V, 5)
    assert (r + r) == RatFunc.parse("2/x", V, 5)
    assert not r.is_poly() and x.is_poly()


def test_json_roundtrip():
    a = P("2*x^2*y + y + 1")
    assert Poly.from_json(a.to_json()) == a
