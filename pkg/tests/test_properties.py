"""Seeded property suites (500 examples each)."""

from hypothesis import given, settings
from hypothesis import strategies as st

from sandwich_lab.atlas import hirzebruch, projective_plane, transport
from sandwich_lab.derivation import Derivation, apply_poly, iterate_poly
from sandwich_lab.field_poly import Poly
from sandwich_lab.invariants import kernel_basis
from sandwich_lab.toric import Cone2D, Fan, apply_matrix, cyclic_type, fan_isomorphic, matmul, sigma_di

V = ("x", "y")
N = 500
many = settings(max_examples=N, derandomize=True, deadline=None)

primes = st.sampled_from([2, 3, 5])


@st.composite
def polys(draw, p, max_deg=3, max_terms=4):
    terms = draw(
        st.dictionaries(
            st.tuples(st.integers(0, max_deg), st.integers(0, max_deg)),
            st.integers(1, p - 1),
            max_size=max_terms,
        )
    )
    return Poly(V, p, terms)


@st.composite
def field_and_polys(draw, k=2, max_deg=3):
    p = draw(primes)
    return p, [draw(polys(p, max_deg)) for _ in range(k)]


@many
@given(field_and_polys(k=4))
def test_leibniz_apply(data):
    p, (f, g, a, b) = data
    assert apply_poly(f, g, a * b) == a * apply_poly(f, g, b) + b * apply_poly(f, g, a)


@many
@given(field_and_polys(k=4, max_deg=2))
def test_leibniz_power_p(data):
    # in characteristic p the p-th iterate of a derivation is again a derivation
    p, (f, g, a, b) = data
    lhs = iterate_poly(f, g, a * b, p)
    rhs = a * iterate_poly(f, g, b, p) + b * iterate_poly(f, g, a, p)
    assert lhs == rhs


@st.composite
def multiplicative(draw):
    # delta^p = delta: x dx + i y dy
    p = draw(primes)
    i = draw(st.integers(0, p - 1))
    r = draw(polys(p, 4, 5))
    return p, i, r


@many
@given(multiplicative())
def test_projector_laws(data):
    p, i, r = data
    f, g = Poly.var("x", V, p), Poly.var("y", V, p).scale(i)
    pr = r - iterate_poly(f, g, r, p - 1)
    assert apply_poly(f, g, pr).is_zero()
    assert pr - iterate_poly(f, g, pr, p - 1) == pr
    # the projector keeps exactly the invariant monomials x^a y^b, a + i b = 0 mod p
    kernel_part = Poly(V, p, {e: c for e, c in r.terms.items() if (e[0] + i * e[1]) % p == 0})
    assert pr == kernel_part


@st.composite
def charted(draw):
    p = draw(primes)
    d = draw(st.integers(0, 3))
    f, g = draw(polys(p, 3)), draw(polys(p, 3))
    if f.is_zero() and g.is_zero():
        f = Poly.const(1, V, p)
    surface = draw(st.sampled_from(["p2", "h"]))
    if surface == "p2":
        atlas, base, target = projective_plane(p), "U0", draw(st.sampled_from(["U1", "U2"]))
    else:
        atlas, base, target = hirzebruch(d, p), "U1", draw(st.sampled_from(["U2", "U3", "U4"]))
    return atlas, Derivation.from_polys(base, f, g), target


@many
@given(charted())
def test_transport_round_trip(data):
    atlas, delta, target = data
    there = transport(delta, atlas, target)
    assert transport(there, atlas, delta.chart_id) == delta


@many
@given(field_and_polys(k=3, max_deg=2))
def test_kernel_invariant_under_rescaling(data):
    p, (f, g, beta) = data
    if (f.is_zero() and g.is_zero()) or beta.is_zero():
        return
    base = kernel_basis(Derivation.from_polys("U", f, g), p)
    scaled = kernel_basis(Derivation.from_polys("U", beta * f, beta * g), p)
    assert _span(base) == _span(scaled)
    for q in (q for qs in scaled.by_degree.values() for q in qs):
        assert apply_poly(beta * f, beta * g, q).is_zero()


def _span(basis):
    return sorted(str(q) for qs in basis.by_degree.values() for q in qs)


unimodular_gens = [((0, 1), (1, 0)), ((1, 1), (0, 1)), ((1, 0), (1, 1)), ((-1, 0), (0, 1)), ((0, -1), (1, 0))]


@st.composite
def unimodular(draw):
    M = ((1, 0), (0, 1))
    for g in draw(st.lists(st.sampled_from(unimodular_gens), max_size=6)):
        M = matmul(g, M)
    return M


vecs = st.tuples(st.integers(-8, 8), st.integers(-8, 8))
cones = st.tuples(vecs, vecs).filter(lambda uv: uv[0][0] * uv[1][1] != uv[0][1] * uv[1][0]).map(
    lambda uv: Cone2D(*uv)
)


@many
@given(cones, unimodular())
def test_cyclic_type_gl2z_invariant(cone, M):
    moved = Cone2D(apply_matrix(M, cone.u1), apply_matrix(M, cone.u2))
    assert cyclic_type(moved) == cyclic_type(cone)


@st.composite
def sigma_family(draw):
    p = draw(primes)
    d = draw(st.integers(0, 3))
    return [sigma_di(p, d, draw(st.integers(0, p))) for _ in range(3)]


@many
@given(sigma_family())
def test_fan_isomorphic_symmetric_and_transitive(fans):
    a, b, c = fans
    assert (fan_isomorphic(a, b) is None) == (fan_isomorphic(b, a) is None)
    if fan_isomorphic(a, b) is not None and fan_isomorphic(b, c) is not None:
        assert fan_isomorphic(a, c) is not None
    M = fan_isomorphic(a, b)
    if M is not None:
        assert Fan(tuple(apply_matrix(M, r) for r in a.rays)) == b
