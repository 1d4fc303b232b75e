"""Rank-2 fans, overlattice refinement, cyclic quotient types and Hilbert bases."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import cmp_to_key
from math import gcd
from typing import Iterable, Sequence

Vec = tuple[int, int]
Matrix = tuple[tuple[int, int], tuple[int, int]]


class FanError(ValueError):
    pass


class OutOfRangeError(ValueError):
    pass


def det(u: Vec, v: Vec) -> int:
    return u[0] * v[1] - u[1] * v[0]


def primitive(v: Sequence[int]) -> Vec:
    a, b = int(v[0]), int(v[1])
    g = gcd(a, b)
    if g == 0:
        raise FanError("zero vector has no primitive generator")
    return (a // g, b // g)


def _half(v: Vec) -> int:
    # 0 for angles in [0, pi), 1 for [pi, 2pi)
    return 0 if (v[1] > 0 or (v[1] == 0 and v[0] > 0)) else 1


def _ccw_cmp(u: Vec, v: Vec) -> int:
    hu, hv = _half(u), _half(v)
    if hu != hv:
        return hu - hv
    return -det(u, v)


def _ccw_sorted(rays: Iterable[Vec]) -> list[Vec]:
    return sorted(rays, key=cmp_to_key(_ccw_cmp))


@dataclass(frozen=True)
class Cone2D:
    """cone(u1, u2) with primitive generators and det(u1, u2) > 0.

    Generators given clockwise are swapped on construction.
    """

    u1: Vec
    u2: Vec

    def __post_init__(self):
        u1, u2 = primitive(self.u1), primitive(self.u2)
        D = det(u1, u2)
        if D == 0:
            raise FanError(f"degenerate cone {u1}, {u2}")
        if D < 0:
            u1, u2 = u2, u1
        object.__setattr__(self, "u1", u1)
        object.__setattr__(self, "u2", u2)

    @property
    def index(self) -> int:
        return det(self.u1, self.u2)

    def transform(self, M: Matrix) -> "Cone2D":
        return Cone2D(apply_matrix(M, self.u1), apply_matrix(M, self.u2))

    def dual_rays(self) -> tuple[Vec, Vec]:
        """Primitive inward normals (w1 _|_ u1, w2 _|_ u2) spanning the dual cone."""
        (a, b), (c, e) = self.u1, self.u2
        return primitive((-b, a)), primitive((e, -c))


@dataclass(frozen=True)
class Fan:
    """Complete 2D fan: primitive rays in counterclockwise order, smallest ray first."""

    rays: tuple[Vec, ...]

    def __post_init__(self):
        rays = [primitive(r) for r in self.rays]
        if len(set(rays)) != len(rays):
            raise FanError(f"repeated ray in {rays}")
        if len(rays) < 3:
            raise FanError("a complete fan needs at least three rays")
        rays = _ccw_sorted(rays)
        n = len(rays)
        for k in range(n):
            if det(rays[k], rays[(k + 1) % n]) <= 0:
                raise FanError(f"rays {rays} do not form a complete fan")
        start = rays.index(min(rays))
        object.__setattr__(self, "rays", tuple(rays[start:] + rays[:start]))

    def cones(self) -> list[Cone2D]:
        n = len(self.rays)
        return [Cone2D(self.rays[k], self.rays[(k + 1) % n]) for k in range(n)]

    def is_smooth(self) -> bool:
        return all(c.index == 1 for c in self.cones())

    def to_json(self) -> dict:
        return {
            "rays": [list(r) for r in self.rays],
            "cones": [
                {"rays": [list(c.u1), list(c.u2)], "type": cyclic_type(c).label} for c in self.cones()
            ],
        }

    @classmethod
    def from_json(cls, data) -> "Fan":
        return cls(tuple(tuple(r) for r in data["rays"]))


def apply_matrix(M: Matrix, v: Vec) -> Vec:
    return (M[0][0] * v[0] + M[0][1] * v[1], M[1][0] * v[0] + M[1][1] * v[1])


def matmul(A: Matrix, B: Matrix) -> Matrix:
    return tuple(
        tuple(sum(A[i][k] * B[k][j] for k in range(2)) for j in range(2)) for i in range(2)
    )  # type: ignore[return-value]


def mat_inverse_unimodular(M: Matrix) -> Matrix:
    D = M[0][0] * M[1][1] - M[0][1] * M[1][0]
    if D not in (1, -1):
        raise ValueError("matrix is not unimodular")
    return ((M[1][1] * D, -M[0][1] * D), (-M[1][0] * D, M[0][0] * D))


# the refined fan families


def p2_fan() -> Fan:
    return Fan(((1, 0), (0, 1), (-1, -1)))


def hirzebruch_fan(d: int) -> Fan:
    if d < 0:
        raise OutOfRangeError(f"Hirzebruch index must be >= 0, got {d}")
    return Fan(((0, 1), (1, 0), (0, -1), (-1, d)))


def _check_p(p: int):
    from .field_poly import is_prime

    if not is_prime(p):
        raise OutOfRangeError(f"p = {p} is not prime")


def sigma_i(p: int, i: int) -> Fan:
    """Rays e2, p e1 - i e2, -p e1 + (i - 1) e2 for 1 <= i <= p - 1."""
    _check_p(p)
    if not 1 <= i <= p - 1:
        raise OutOfRangeError(f"Sigma_i needs 1 <= i <= p-1, got i={i}, p={p}")
    return Fan(((0, 1), (p, -i), (-p, i - 1)))


def sigma_di(p: int, d: int, i: int) -> Fan:
    """Sigma_{d,i} for 0 <= i <= p; i = 0 and i = p are the special ray lists."""
    _check_p(p)
    if d < 0 or not 0 <= i <= p:
        raise OutOfRangeError(f"Sigma_di needs d >= 0 and 0 <= i <= p, got d={d}, i={i}, p={p}")
    if i == 0:
        return Fan(((0, 1), (1, 0), (0, -1), (-p, d)))
    if i == p:
        return Fan(((0, 1), (1, 0), (0, -1), (-1, d * p)))
    return Fan(((0, 1), (p, -i), (0, -1), (-p, i + d)))


def build_fan(kind: str, *args: int) -> Fan:
    """build_fan("P2"), build_fan("H", d), build_fan("Sigma_i", p, i), build_fan("Sigma_di", p, d, i)."""
    table = {"P2": p2_fan, "H": hirzebruch_fan, "Sigma_i": sigma_i, "Sigma_di": sigma_di}
    if kind not in table:
        raise OutOfRangeError(f"unknown fan kind {kind!r}; expected one of {sorted(table)}")
    return table[kind](*args)


# overlattice refinement


@dataclass(frozen=True)
class OverlatticeRefinement:
    """N' = N + Z (a, b)/p with the chosen basis f1, f2 of N'.

    ``to_new`` maps N-coordinates to N'-coordinates (integer matrix of det p).
    """

    base: Fan
    vector: Vec
    p: int
    to_new: Matrix

    def new_coords(self, v: Vec) -> Vec:
        return apply_matrix(self.to_new, v)

    @property
    def fan(self) -> Fan:
        return Fan(tuple(self.new_coords(r) for r in self.base.rays))


def overlattice(fan: Fan, vector: Vec, p: int) -> OverlatticeRefinement:
    a, b = vector
    if gcd(gcd(a, b), p) != 1:
        raise ValueError(f"gcd({a}, {b}, {p}) != 1: (a,b)/p does not generate an index-p overlattice")
    if a % p:
        # f1 = (1, i)/p, f2 = e2 with i = b/a mod p; then e1 = p f1 - i f2
        i = b * pow(a, -1, p) % p
        M = ((p, 0), (-i, 1))
    else:
        # N' = N + Z e2/p: f1 = e1, f2 = e2/p
        M = ((1, 0), (0, p))
    return OverlatticeRefinement(fan, (a, b), p, M)


def refine(fan: Fan, vector: Vec, p: int) -> Fan:
    return overlattice(fan, vector, p).fan


def frobenius_refine(fan: Fan, p: int) -> Fan:
    """The fan on N + (1/p) N: every ray is scaled by p, then primitivized."""
    return Fan(tuple((p * r[0], p * r[1]) for r in fan.rays))


# dual semigroups and cyclic types


def _in_dual(cone: Cone2D, m: Vec) -> bool:
    return m[0] * cone.u1[0] + m[1] * cone.u1[1] >= 0 and m[0] * cone.u2[0] + m[1] * cone.u2[1] >= 0


def semigroup_algebra_gens(cone: Cone2D, to_exponents: Matrix | None = None) -> list[Vec]:
    """Hilbert basis of (dual cone) ∩ M, sorted.

    Candidates come from the box spanned by 0, w1, w2, w1 + w2 (the closed
    fundamental parallelogram of the dual rays), which contains the basis.
    ``to_exponents`` optionally maps M-coordinates to another coordinate system
    (e.g. monomial exponents in a chart) before sorting.
    """
    w1, w2 = cone.dual_rays()
    corners = [(0, 0), w1, w2, (w1[0] + w2[0], w1[1] + w2[1])]
    xs = [c[0] for c in corners]
    ys = [c[1] for c in corners]
    pts = [
        (a, b)
        for a in range(min(xs), max(xs) + 1)
        for b in range(min(ys), max(ys) + 1)
        if (a, b) != (0, 0) and _in_dual(cone, (a, b))
    ]
    # irreducible: not a sum of two nonzero semigroup elements
    basis = [m for m in pts if not any(_in_dual(cone, (m[0] - q[0], m[1] - q[1])) for q in pts if q != m)]
    if to_exponents is not None:
        basis = [apply_matrix(to_exponents, m) for m in basis]
    return sorted(basis)


def normalize_type(m: int, a: int) -> int:
    """Representative of 1/m(1,a) under a ~ a^{-1} mod m (the coordinate swap)."""
    a %= m
    if gcd(a, m) != 1:
        return a
    return min(a, pow(a, -1, m))


@dataclass(frozen=True)
class CyclicType:
    m: int
    a: int = 0

    @property
    def smooth(self) -> bool:
        return self.m == 1

    @property
    def label(self) -> str:
        return "Smooth" if self.smooth else f"1/{self.m}(1,{self.a})"


def _reference_in(m: int, n: int, pt: Vec) -> bool:
    return pt[0] >= 0 and pt[1] >= 0 and (pt[0] + n * pt[1]) % m == 0


def _candidate_map(cone: Cone2D, m: int, swap: bool) -> tuple[tuple[Fraction, Fraction], tuple[Fraction, Fraction]]:
    # linear map M_R -> R^2 sending the dual rays to (m,0), (0,m) (or swapped)
    w1, w2 = cone.dual_rays()
    if swap:
        w1, w2 = w2, w1
    D = det(w1, w2)
    # T = [[m,0],[0,m]] * inv([w1 w2]) with w1, w2 as columns
    inv = ((Fraction(w2[1], D), Fraction(-w2[0], D)), (Fraction(-w1[1], D), Fraction(w1[0], D)))
    return ((m * inv[0][0], m * inv[0][1]), (m * inv[1][0], m * inv[1][1]))


def _semigroup_match(cone: Cone2D, m: int, n: int, swap: bool) -> bool:
    """Brute-force oracle: T((dual cone) ∩ M) equals the reference semigroup on a box."""
    T = _candidate_map(cone, m, swap)
    images = []
    for e in ((1, 0), (0, 1)):
        img = (T[0][0] * e[0] + T[0][1] * e[1], T[1][0] * e[0] + T[1][1] * e[1])
        if img[0].denominator != 1 or img[1].denominator != 1:
            return False
        images.append((int(img[0]), int(img[1])))
    if abs(det(images[0], images[1])) != m:
        return False
    if not all((x + n * y) % m == 0 for x, y in images):
        return False
    # box check: every semigroup element with small coordinates maps into the
    # reference semigroup and every reference element has a preimage
    w1, w2 = cone.dual_rays()
    R = 2 * (abs(w1[0]) + abs(w1[1]) + abs(w2[0]) + abs(w2[1])) + 2
    seen = set()
    for a in range(-R, R + 1):
        for b in range(-R, R + 1):
            if not _in_dual(cone, (a, b)):
                continue
            img = (images[0][0] * a + images[1][0] * b, images[0][1] * a + images[1][1] * b)
            if not _reference_in(m, n, img):
                return False
            seen.add(img)
    # reference points inside the image of the box
    for x in range(0, m + 1):
        for y in range(0, m + 1):
            if _reference_in(m, n, (x, y)) and (x, y) not in seen:
                return False
    return True


def cyclic_type(cone: Cone2D) -> CyclicType:
    m = cone.index
    if m == 1:
        return CyclicType(1)
    for n in range(m):
        for swap in (False, True):
            if _semigroup_match(cone, m, n, swap):
                return CyclicType(m, normalize_type(m, n))
    raise AssertionError(f"no reference semigroup matches {cone}")  # pragma: no cover


def cyclic_type_fast(cone: Cone2D) -> CyclicType:
    """Closed form: with u1 = (0,1) after a unimodular change, u2 = (m, -k) gives 1/m(1,k)."""
    m = cone.index
    if m == 1:
        return CyclicType(1)
    # find unimodular U with U u1 = (0, 1); then k = -(U u2)_2 mod m
    a, b = cone.u1
    # extended gcd: s*a + t*b = 1
    g, s, t = _egcd(a, b)
    U = ((b, -a), (s, t))  # row 1 pairs u1 to 0, row 2 pairs u1 to 1
    v = apply_matrix(U, cone.u2)
    # v = (m', *) with m' = +-m; orientation fixed by det U = 1
    k = (-v[1]) % m
    return CyclicType(m, normalize_type(m, k))


def _egcd(a: int, b: int) -> tuple[int, int, int]:
    if b == 0:
        return (abs(a), 1 if a >= 0 else -1, 0)
    g, s, t = _egcd(b, a % b)
    return (g, t, s - (a // b) * t)


def fan_isomorphic(f1: Fan, f2: Fan) -> Matrix | None:
    """A unimodular M with M(rays of f1) = rays of f2, or None."""
    if len(f1.rays) != len(f2.rays):
        return None
    a0, a1 = f1.rays[0], f1.rays[1]
    A = det(a0, a1)
    target = set(f2.rays)
    n = len(f2.rays)
    for k in range(n):
        for step in (1, -1):
            b0, b1 = f2.rays[k], f2.rays[(k + step) % n]
            # M [a0 a1] = [b0 b1]  =>  M = [b0 b1] adj([a0 a1]) / A
            num = (
                (b0[0] * a1[1] - b1[0] * a0[1], -b0[0] * a1[0] + b1[0] * a0[0]),
                (b0[1] * a1[1] - b1[1] * a0[1], -b0[1] * a1[0] + b1[1] * a0[0]),
            )
            if any(x % A for row in num for x in row):
                continue
            M = tuple(tuple(x // A for x in row) for row in num)
            if M[0][0] * M[1][1] - M[0][1] * M[1][0] not in (1, -1):
                continue
            if {apply_matrix(M, r) for r in f1.rays} == target:
                return M  # type: ignore[return-value]
    return None


def iso_classes(fans: Sequence[Fan]) -> list[list[int]]:
    """Partition indices of ``fans`` into fan-isomorphism classes (first-seen order)."""
    classes: list[list[int]] = []
    for k, F in enumerate(fans):
        for cls in classes:
            if fan_isomorphic(fans[cls[0]], F) is not None:
                cls.append(k)
                break
        else:
            classes.append([k])
    return classes
