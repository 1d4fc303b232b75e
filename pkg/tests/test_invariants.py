import pytest

from sandwich_lab.derivation import parse_derivation
from sandwich_lab.field_poly import Poly
from sandwich_lab.invariants import (
    BoundTooSmallError,
    algebra_generators,
    kernel_basis,
    local_type,
    match_presentation,
    presentation,
    relation_search,
)

V = ("x", "y")


def D(text, p):
    return parse_derivation(text, V, p, "U0")


def polys(texts, p, variables=V):
    return [Poly.parse(t, variables, p) for t in texts]


def test_degree_slice_of_euler_field():
    basis = kernel_basis(D("x dx + y dy", 3), 3)
    assert sorted(map(str, basis.by_degree[3])) == sorted(["x^3", "x^2*y", "x*y^2", "y^3"])


def test_kernel_of_dx():
    p = 5
    basis = kernel_basis(D("dx", p), p)
    assert [str(q) for q in algebra_generators(basis)] == ["y", "x^5"]


def test_example3_kernel_contains_generators():
    basis = kernel_basis(D("x^2 dx + y^2 dy", 2), 3)
    span = [q for qs in basis.by_degree.values() for q in qs]
    for q in polys(["x^2", "y^2", "x^2*y + x*y^2"], 2):
        assert q in span


def test_generators():
    assert [str(q) for q in algebra_generators(kernel_basis(D("x dx + y dy", 2), 4))] == ["x^2", "x*y", "y^2"]
    gens = algebra_generators(kernel_basis(D("x*y^2 dx + (x^2 + y^3) dy", 2), 6))
    assert sorted(gens, key=str) == sorted(polys(["x^2", "y^2", "x^3 + x*y^3"], 2), key=str)
    assert sorted(map(str, algebra_generators(kernel_basis(D("dy", 3), 6)))) == ["x", "y^3"]


def test_bound_too_small():
    with pytest.raises(BoundTooSmallError):
        kernel_basis(D("x dx + y dy", 5), 4)


def test_relations():
    XYZ = ("X", "Y", "Z")
    rels = relation_search(polys(["x^2", "y^2", "x^2*y + x*y^2"], 2))
    assert rels == polys(["Z^2 + X^2*Y + X*Y^2"], 2, XYZ)
    rels = relation_search(polys(["x^2", "y^2", "x^3 + x*y^3"], 2))
    assert rels == polys(["Z^2 + X^3 + X*Y^3"], 2, XYZ)
    assert relation_search(polys(["x^3", "y"], 3), 12) == []


def test_catalog_matching():
    XYZ = ("X", "Y", "Z")
    assert match_presentation(Poly.parse("Z^2 + X^2*Y + X*Y^2", XYZ, 2)).label == "D_4^0"
    assert match_presentation(Poly.parse("Z^2 + X^3 + X*Y^3", XYZ, 2)).label == "E_7^0"
    assert match_presentation(Poly.parse("Z^2 + X*Y", XYZ, 2)).label == "A_1"
    # scaled and permuted
    assert match_presentation(Poly.parse("X^2 + 2*Y*Z", XYZ, 3)).label == "A_1"
    assert match_presentation(Poly.parse("Z^3 + X*Y", XYZ, 2)).label == "Unrecognized"


def test_presentation_labels():
    assert presentation(D("x^2 dx + y^2 dy", 2)).label == "D_4^0"
    assert presentation(D("x*y^2 dx + (x^2 + y^3) dy", 2)).label == "E_7^0"


def test_local_types():
    # the U_1 chart of x^2 dx + y^2 dy is z dz + w(w+1) dw after clearing 1/z
    f, g = polys(["x", "y^2 + y"], 2)
    assert local_type(f, g, (0, 0)).aliases == ["A_1"]
    assert local_type(f, g, (0, 1)).label == "1/2(1,1)"
    f, g = polys(["x", "2*y"], 5)
    assert local_type(f, g).label == "1/5(1,2)"
    f, g = polys(["x^2", "y^2"], 2)
    assert local_type(f, g).label == "D_4^0"
    f, g = polys(["1", "x"], 3)
    assert local_type(f, g).label == "smooth"
