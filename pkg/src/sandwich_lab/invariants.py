"""Degree-truncated invariant rings ker(delta) of chart polynomial rings.

Everything here is exact linear algebra over F_p on the space of polynomials
of total degree <= D.  Results are relative to D: a generator list or a
relation list is complete up to that bound, not beyond.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import permutations, product
from typing import Mapping, Sequence

from .derivation import Derivation, apply_poly, normalize
from .field_poly import Poly
from .linalg import SpanTracker, nullspace
from .toric import normalize_type


class BoundTooSmallError(ValueError):
    pass


class UnsupportedPresentationError(ValueError):
    pass


def monomials_upto(nvars: int, D: int) -> list[tuple[int, ...]]:
    """All exponent vectors of total degree <= D, grlex descending."""
    out = []

    def rec(prefix, left, k):
        if k == nvars - 1:
            out.append(prefix + (left,))
            return
        for a in range(left, -1, -1):
            rec(prefix + (a,), left - a, k + 1)

    for deg in range(D, -1, -1):
        if nvars == 0:
            out.append(())
            break
        rec((), deg, 0)
    return out


@dataclass
class GradedKernelBasis:
    bound: int
    vars: tuple[str, ...]
    p: int
    by_degree: dict[int, list[Poly]]
    f: Poly | None = None
    g: Poly | None = None

    def all(self) -> list[Poly]:
        return [q for n in sorted(self.by_degree) for q in self.by_degree[n]]

    def dimension(self, n: int) -> int:
        return len(self.by_degree.get(n, []))


def _coords(a: Poly, index: Mapping[tuple, int], n: int) -> list[int]:
    v = [0] * n
    for e, c in a.terms.items():
        v[index[e]] = c
    return v


def kernel_basis(delta: Derivation | tuple[Poly, Poly], D: int | None = None, d: int = 0) -> GradedKernelBasis:
    """Reduced echelon basis of ker(delta) on polynomials of degree <= D.

    Rows of the echelon form are keyed by their grlex-leading monomial and
    grouped by its total degree.  Rational coefficients are cleared first by
    passing to the coprime polynomial representative (same kernel).
    """
    if isinstance(delta, Derivation):
        nd = normalize(delta)
        f, g = nd.f, nd.g
    else:
        f, g = delta
    p = f.p
    if D is None:
        D = 2 * p + d
    if D < p:
        raise BoundTooSmallError(f"degree bound {D} < p = {p} misses the Frobenius generators")
    nv = len(f.vars)
    src = monomials_upto(nv, D)
    images = [apply_poly(f, g, Poly.monomial(e, f.vars, p)) for e in src]
    tgt_deg = max((im.total_degree() for im in images), default=0)
    tgt = monomials_upto(nv, max(tgt_deg, 0))
    tindex = {e: i for i, e in enumerate(tgt)}
    # matrix rows = target monomials, columns = source monomials (grlex descending)
    cols = [_coords(im, tindex, len(tgt)) for im in images]
    rows = [[cols[j][i] for j in range(len(src))] for i in range(len(tgt))]
    rows = [r for r in rows if any(r)]
    null = nullspace(rows, len(src), p)
    # nullspace() returns one vector per free column with a 1 there; make the
    # free column the leading (grlex-largest) entry: columns are descending,
    # so the leading entry is the first nonzero, and we re-reduce.
    tracker = SpanTracker(p)
    for v in null:
        tracker.add(v)
    by_degree: dict[int, list[Poly]] = {}
    for c in sorted(tracker.rows):
        v = tracker.rows[c]
        poly = Poly(f.vars, p, {src[i]: x for i, x in enumerate(v) if x})
        by_degree.setdefault(sum(src[c]), []).append(poly)
    for n in by_degree:
        by_degree[n].sort(key=lambda q: q.leading_term()[0], reverse=True)
    return GradedKernelBasis(D, f.vars, p, by_degree, f, g)


def _products_upto(gens: Sequence[Poly], D: int) -> list[Poly]:
    one = gens[0].one() if gens else None
    out = [one]
    frontier = [(one, 0)]
    degs = [q.total_degree() for q in gens]
    # products with non-decreasing generator index to avoid repeats
    stack = [(one, 0, 0)]
    out = []
    while stack:
        cur, deg, start = stack.pop()
        out.append(cur)
        for i in range(start, len(gens)):
            nd = deg + degs[i]
            if nd <= D:
                stack.append((cur * gens[i], nd, i))
    del frontier
    return out


def algebra_generators(basis: GradedKernelBasis) -> list[Poly]:
    """Greedy minimal generators of the truncated kernel, by increasing degree."""
    D, p = basis.bound, basis.p
    mons = monomials_upto(len(basis.vars), D)
    index = {e: i for i, e in enumerate(mons)}
    n = len(mons)
    gens: list[Poly] = []
    span = SpanTracker(p)
    span.add(_coords(Poly.const(1, basis.vars, p), index, n))
    for q in basis.all():
        if q.is_constant():
            continue
        if span.contains(_coords(q, index, n)):
            continue
        gens.append(q)
        span = SpanTracker(p)
        for prod_ in _products_upto(gens, D):
            if prod_.total_degree() <= D:
                span.add(_coords(prod_, index, n))
    return gens


FORMAL_NAMES = ("X", "Y", "Z", "W")


def relation_search(gens: Sequence[Poly], D: int | None = None) -> list[Poly]:
    """Minimal polynomial relations among the generators, up to weighted degree D.

    Relations live in F_p[X, Y, Z, W][:len(gens)] with X weighted by deg gens[0], etc.
    """
    if len(gens) > 4:
        raise UnsupportedPresentationError(f"relation search supports at most 4 generators, got {len(gens)}")
    if not gens:
        return []
    p = gens[0].p
    weights = [q.total_degree() for q in gens]
    if D is None:
        D = 2 * max(weights) + 2
    names = FORMAL_NAMES[: len(gens)]
    # formal monomials by weighted degree ascending
    formal = []
    for exps in product(*(range(D // w + 1) for w in weights)):
        wd = sum(e * w for e, w in zip(exps, weights))
        if wd <= D:
            formal.append((wd, exps))
    formal.sort(key=lambda t: (t[0], sum(t[1]), t[1]))
    powers: dict = {}

    def gpow(i, k):
        if (i, k) not in powers:
            powers[(i, k)] = gens[i] ** k
        return powers[(i, k)]

    values = []
    for _, exps in formal:
        v = gens[0].one()
        for i, k in enumerate(exps):
            if k:
                v = v * gpow(i, k)
        values.append(v)
    tmons = sorted({e for v in values for e in v.terms}, key=lambda e: (sum(e), e), reverse=True)
    tindex = {e: i for i, e in enumerate(tmons)}
    cols = [_coords(v, tindex, len(tmons)) for v in values]
    rows = [[cols[j][i] for j in range(len(formal))] for i in range(len(tmons))]
    # reverse the column order so the echelon pivots are the heaviest monomials
    nf = len(formal)
    rev_rows = [list(reversed(r)) for r in rows]
    null = nullspace(rev_rows, nf, p) if rows else [[1 if i == j else 0 for i in range(nf)] for j in range(nf)]
    tracker = SpanTracker(p)
    for v in null:
        tracker.add(v)
    candidates = []
    for c in sorted(tracker.rows, reverse=True):
        v = list(reversed(tracker.rows[c]))
        rel = Poly(names, p, {formal[i][1]: x for i, x in enumerate(v) if x})
        candidates.append(rel)
    candidates.sort(key=lambda r: (_weighted_degree(r, weights), r.leading_term()[0]))
    # keep relations not generated by earlier ones
    fidx = {exps: i for i, (_, exps) in enumerate(formal)}
    kept: list[Poly] = []
    ideal = SpanTracker(p)
    for rel in candidates:
        vec = [0] * nf
        for e, c in rel.terms.items():
            vec[fidx[e]] = c
        if ideal.contains(vec):
            continue
        kept.append(rel.monic())
        for _, exps in formal:
            m = Poly.monomial(exps, names, p)
            shifted = m * rel
            if _weighted_degree(shifted, weights) <= D:
                sv = [0] * nf
                for e, c in shifted.terms.items():
                    sv[fidx[e]] = c
                ideal.add(sv)
    return kept


def _weighted_degree(a: Poly, weights: Sequence[int]) -> int:
    return max(sum(k * w for k, w in zip(e, weights)) for e in a.terms)


def substitute_generators(rel: Poly, gens: Sequence[Poly]) -> Poly:
    total = gens[0].zero()
    for e, c in rel.terms.items():
        t = gens[0].constant(c)
        for q, k in zip(gens, e):
            if k:
                t = t * q**k
        total = total + t
    return total


@dataclass
class AlgebraPresentation:
    generators: list[Poly]
    relations: list[Poly]
    bound: int
    label: str | None = None

    def to_json(self) -> dict:
        return {
            "generators": [str(q) for q in self.generators],
            "degrees": [q.total_degree() for q in self.generators],
            "relations": [str(r) for r in self.relations],
            "bound": self.bound,
            "label": self.label,
        }


def presentation(delta: Derivation | tuple[Poly, Poly], D: int | None = None, d: int = 0) -> AlgebraPresentation:
    basis = kernel_basis(delta, D, d)
    gens = algebra_generators(basis)
    rels: list[Poly] = []
    label = None
    if 0 < len(gens) <= 4:
        rels = relation_search(gens, max(basis.bound, 2 * max(q.total_degree() for q in gens) + 2))
        if len(gens) == 2 and not rels:
            label = "smooth"
        elif len(gens) == 3 and len(rels) == 1:
            label = match_presentation(rels[0]).label
    return AlgebraPresentation(gens, rels, basis.bound, label)


# --- singularity catalog ----------------------------------------------------


@dataclass(frozen=True)
class SingularityLabel:
    label: str
    relation: Poly | None = None

    @property
    def recognized(self) -> bool:
        return self.label != "Unrecognized"


CATALOG: dict[str, tuple[int | None, str]] = {
    # name: (characteristic restriction, relation in X, Y, Z)
    "A_1": (None, "Z^2 + X*Y"),
    "D_4^0": (2, "Z^2 + X^2*Y + X*Y^2"),
    "E_7^0": (2, "Z^2 + X^3 + X*Y^3"),
}


def match_presentation(rel: Poly, catalog: Mapping[str, tuple[int | None, str]] | None = None) -> SingularityLabel:
    """Match a hypersurface relation against the catalog up to variable permutation and scaling."""
    catalog = CATALOG if catalog is None else catalog
    if len(rel.vars) != 3:
        return SingularityLabel("Unrecognized", rel)
    p = rel.p
    rel = rel.change_ring(rel.vars) if rel.vars == FORMAL_NAMES[:3] else Poly(FORMAL_NAMES[:3], p, rel.terms)
    units = range(1, p)
    for name, (char, text) in catalog.items():
        if char is not None and char != p:
            continue
        target = Poly.parse(text, FORMAL_NAMES[:3], p)
        if target.total_degree() != rel.total_degree() or len(target.terms) != len(rel.terms):
            continue
        for perm in permutations(range(3)):
            for scales in product(units, repeat=3):
                moved = _permute_scale(rel, perm, scales)
                c = moved.leading_coefficient()
                if moved.scale(pow(c, -1, p)) == target.scale(pow(target.leading_coefficient(), -1, p)):
                    return SingularityLabel(name, rel)
    return SingularityLabel("Unrecognized", rel)


def _permute_scale(a: Poly, perm, scales) -> Poly:
    p = a.p
    out = {}
    for e, c in a.terms.items():
        ne = [0, 0, 0]
        coef = c
        for i, k in enumerate(e):
            ne[perm[i]] = k
            coef = coef * pow(scales[i], k, p)
        out[tuple(ne)] = coef % p
    return Poly(a.vars, p, out)


# --- local type at a rational point ----------------------------------------


def normalize_cyclic(m: int, a: int) -> int:
    """Representative of 1/m(1,a) under a ~ a^{-1} mod m."""
    return normalize_type(m, a)


def cyclic_label(m: int, a: int) -> str:
    return f"1/{m}(1,{normalize_cyclic(m, a)})"


def translate(f: Poly, g: Poly, point: Sequence[int]) -> tuple[Poly, Poly]:
    """(f, g) in coordinates centred at a rational point."""
    from .field_poly import RatFunc

    V = f.vars
    imgs = {
        v: RatFunc.from_poly(Poly.var(v, V, f.p) + c) for v, c in zip(V, point)
    }
    return f.substitute(imgs).num, g.substitute(imgs).num


@dataclass
class LocalType:
    kind: str  # "cyclic", "catalog", "smooth", "unrecognized"
    label: str
    eigenvalues: tuple[int, int] | None = None
    presentation: AlgebraPresentation | None = None
    aliases: list[str] = field(default_factory=list)

    def to_json(self) -> dict:
        out = {"kind": self.kind, "label": self.label, "aliases": self.aliases}
        if self.eigenvalues:
            out["eigenvalues"] = list(self.eigenvalues)
        if self.presentation:
            out["presentation"] = self.presentation.to_json()
        return out


def local_type(f: Poly, g: Poly, point: Sequence[int] = (0, 0), D: int | None = None) -> LocalType:
    """Singularity of the quotient at a rational singular point of f d/dx + g d/dy."""
    p = f.p
    if any(point):
        f, g = translate(f, g, point)
    if f.constant_value() or g.constant_value():
        return LocalType("smooth", "smooth")
    J = [
        [f.terms.get((1, 0), 0), f.terms.get((0, 1), 0)],
        [g.terms.get((1, 0), 0), g.terms.get((0, 1), 0)],
    ]
    eig = _diagonal_eigenvalues(J, p)
    if eig is not None and eig[0] and eig[1]:
        a = eig[1] * pow(eig[0], -1, p) % p
        label = cyclic_label(p, a)
        aliases = ["A_1"] if p == 2 else []
        if p == 3 and normalize_cyclic(3, a) == 2:
            aliases = ["A_2"]
        return LocalType("cyclic", label, eig, aliases=aliases)
    pres = presentation((f, g), D)
    if pres.label and pres.label not in ("smooth",):
        kind = "catalog" if pres.label != "Unrecognized" else "unrecognized"
        return LocalType(kind, pres.label, presentation=pres)
    if pres.label == "smooth":
        return LocalType("smooth", "smooth", presentation=pres)
    return LocalType("unrecognized", "Unrecognized", presentation=pres)


def _diagonal_eigenvalues(J, p: int):
    """Eigenvalues if J is diagonalizable over F_p, else None."""
    (a, b), (c, d) = J
    if b % p == 0 and c % p == 0:
        return (a % p, d % p)
    tr, det = (a + d) % p, (a * d - b * c) % p
    roots = [t for t in range(p) if (t * t - tr * t + det) % p == 0]
    # a repeated root of a non-scalar matrix is a Jordan block
    if len(roots) == 2:
        return (roots[0], roots[1])
    return None
