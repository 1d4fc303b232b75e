import pytest

from sandwich_lab.gf import field


@pytest.mark.parametrize("p,k", [(2, 1), (2, 2), (3, 2), (2, 3), (5, 2)])
def test_field_axioms(p, k):
    F = field(p, k)
    els = list(F.elements())
    assert len(els) == p**k
    for a in els:
        assert F.add(a, F.neg(a)) == 0
        if a:
            assert F.mul(a, F.inv(a)) == 1
        assert F.pow(a, p**k) == a


@pytest.mark.parametrize("p", [2, 3, 5, 7])
def test_irreducible_quadratics_split_over_fp2(p):
    F = field(p, 2)
    for c0 in range(p):
        for c1 in range(p):
            if not any((t * t + c1 * t + c0) % p == 0 for t in range(p)):
                roots = F.roots([c0, c1, 1])
                assert len(roots) == 2
                assert all(F.degree_of(r) == 2 for r in roots)


def test_prime_subfield_is_identity_embedding():
    F = field(3, 2)
    assert [F.from_int(c) for c in range(3)] == [0, 1, 2]
