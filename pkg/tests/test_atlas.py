import pytest

from sandwich_lab.atlas import (
    NormalFormCoefficients,
    boundary_orders,
    foliation_degree_p2,
    hirzebruch,
    normal_form_check,
    projective_plane,
    singular_locus,
    transport,
)
from sandwich_lab.derivation import Derivation, parse_derivation
from sandwich_lab.field_poly import RatFunc


def D(text, p, chart="U0"):
    return parse_derivation(text, ("x", "y"), p, chart)


def test_p2_transport_examples():
    t = transport(D("x dx + y dy", 3), projective_plane(3), "U1")
    assert t == parse_derivation("-z dz @ U1", ("z", "w"), 3)
    t = transport(D("x^2 dx + y^2 dy", 2), projective_plane(2), "U1")
    want = Derivation(
        "U1",
        RatFunc.parse("1", ("z", "w"), 2),
        RatFunc.parse("(w^2 + w)/z", ("z", "w"), 2),
    )
    assert t == want


@pytest.mark.parametrize("d", [0, 1, 2, 3])
def test_hirzebruch_transport(d):
    p = 5
    t = transport(D("x dx", p, "U1"), hirzebruch(d, p), "U2")
    assert t == parse_derivation(f"{d}*z dz - w dw @ U2", ("z", "w"), p)


@pytest.mark.parametrize("chart", ["U2", "U3", "U4"])
def test_transport_round_trip(chart):
    atlas = hirzebruch(2, 3)
    delta = D("(x^2 + 1) dx + (x*y^2 - 2*x*y) dy", 3, "U1")
    assert transport(transport(delta, atlas, chart), atlas, "U1") == delta


def test_boundary_orders():
    assert boundary_orders(D("x dx + y dy", 3), projective_plane(3)) == {"X0=0": 1, "X1=0": 0, "X2=0": 0}
    assert boundary_orders(D("x^2 dx + y^2 dy", 2), projective_plane(2))["X0=0"] == -1
    atlas = hirzebruch(2, 5)
    for i in (1, 2, 4):
        assert set(boundary_orders(D(f"x dx + {i}*y dy", 5, "U1"), atlas).values()) == {0}
    # i = 0 and i = -d: the field is x dx (resp. s ds) up to a unit in some chart
    assert boundary_orders(D("x dx", 5, "U1"), atlas)["D2"] == 1
    assert boundary_orders(D("x dx + 3*y dy", 5, "U1"), atlas)["D4"] == 1


def test_foliation_degree():
    assert foliation_degree_p2(D("x dx + y dy", 5)) == 1
    assert foliation_degree_p2(D("x dx + 3*y dy", 5)) == 0
    assert foliation_degree_p2(D("x^2 dx + y^2 dy", 2)) == -1
    assert foliation_degree_p2(D("x*y^2 dx + (x^2 + y^3) dy", 2)) == -1


def test_normal_form_check():
    nf = normal_form_check(D("x dx + 2*y dy", 3, "U1"), hirzebruch(1, 3))
    assert nf == NormalFormCoefficients(1, 3, 0, 1, 0, (0, 0), 2)
    nf = normal_form_check(D("dx - x*y^2 dy", 5, "U1"), hirzebruch(2, 5))
    assert nf == NormalFormCoefficients(2, 5, 0, 0, 1, (0, 4, 0), 0)
    assert normal_form_check(D("x*y^2 dx + (x^2 + y^3) dy", 2, "U1"), hirzebruch(1, 2)) is None


def test_normal_form_polys_roundtrip():
    nf = NormalFormCoefficients(2, 3, 1, 2, 0, (1, 0, 2), 1)
    back = normal_form_check(nf.derivation(), hirzebruch(2, 3))
    assert back == nf


def _points(delta, atlas):
    return sorted((pt.chart, pt.coords) for pt in singular_locus(delta, atlas).distinct_points())


def test_singular_locus_examples():
    assert _points(D("x dx + y dy", 3), projective_plane(3)) == [("U0", (0, 0))]
    assert _points(D("x dx + 2*y dy", 5), projective_plane(5)) == [("U0", (0, 0)), ("U1", (0, 0)), ("U2", (0, 0))]
    pts = _points(D("x^2 dx + y^2 dy", 2), projective_plane(2))
    assert pts == [("U0", (0, 0)), ("U1", (0, 0)), ("U1", (0, 1)), ("U2", (0, 0))]


def test_singular_locus_over_extension():
    # (x^2 + 1) dx + y dy at p = 3 vanishes at x = +-sqrt(-1), y = 0
    loc = singular_locus(D("(x^2 + 1) dx + y dy", 3, "U1"), hirzebruch(1, 3))
    ks = sorted(pt.k for pt in loc.charts["U1"].points)
    assert ks == [2, 2]
