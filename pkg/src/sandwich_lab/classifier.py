"""Reduction of p-closed global-section normal forms to toric canonical forms.

The reduction runs on U1 of H_d (or U0 of P^2) and records every coordinate
change it applies.  All coordinate changes are automorphisms of the surface:
lifts of Moebius maps of the base, fibrewise shifts u -> u + G(v) with
deg G <= d, and projective linear maps of P^2.  When the zeros of the base
part are not F_p-rational, the changes are carried out over F_{p^2} (or
F_{p^3} for P^2); ``replay`` re-checks every trace exactly over that field.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from enum import Enum
from itertools import permutations, product
from typing import Iterable, Sequence

from .atlas import (
    NormalFormCoefficients,
    ProductNormalForm,
    SurfaceAtlas,
    atlas_for,
    foliation_degree_p2,
    normal_form_check,
    projective_plane,
    singular_locus,
    transport,
)
from .derivation import (
    Derivation,
    is_multiplicative,
    is_p_closed,
    is_p_closed_poly,
    iterate_poly,
    normalize,
    p_closed_witness_poly,
)
from .field_poly import Poly
from .gf import GF, field as gf_field
from .qpoly import Frac, QPoly, apply_field, coordinate_fracs
from .toric import Fan, hirzebruch_fan, iso_classes, p2_fan, refine


class Obstruction(str, Enum):
    NONE = "None"
    NOT_P_CLOSED = "NotPClosed"
    NO_GLOBAL_SECTION = "NoGlobalSection"
    NILPOTENT = "NilpotentAtSingularPoint"
    UNKNOWN = "Unknown"


class BudgetExceededError(ValueError):
    pass


# --- canonical forms -----------------------------------------------------------


@dataclass(frozen=True)
class CanonicalForm:
    """Diagonal(i): x d/dx + i y d/dy.  Vertical: d/dy."""

    kind: str
    i: int | None = None
    chart: str = "U1"

    def __post_init__(self):
        if self.kind not in ("Diagonal", "Vertical"):
            raise ValueError(f"unknown canonical form {self.kind!r}")
        if (self.kind == "Diagonal") != (self.i is not None):
            raise ValueError("Diagonal needs i, Vertical takes none")

    @property
    def label(self) -> str:
        return f"Diagonal({self.i})" if self.kind == "Diagonal" else "Vertical"

    def polys(self, p: int) -> tuple[Poly, Poly]:
        V = ("x", "y")
        x, y = Poly.var("x", V, p), Poly.var("y", V, p)
        if self.kind == "Vertical":
            return Poly.const(0, V, p), Poly.const(1, V, p)
        return x, y * self.i

    def derivation(self, p: int) -> Derivation:
        return Derivation.from_polys(self.chart, *self.polys(p))

    def refinement_vector(self) -> tuple[int, int]:
        return (0, 1) if self.kind == "Vertical" else (1, self.i)

    def sort_key(self):
        return (self.kind != "Diagonal", self.i or 0)

    def to_json(self) -> dict:
        return {"kind": self.kind, "i": self.i, "chart": self.chart, "label": self.label}

    @classmethod
    def from_json(cls, data) -> "CanonicalForm":
        return cls(data["kind"], data.get("i"), data.get("chart", "U1"))


def canonical_to_fan(c: CanonicalForm, d: int | None, p: int) -> Fan:
    """Fan of the quotient; ``d=None`` means P^2."""
    base = p2_fan() if d is None else hirzebruch_fan(d)
    return refine(base, c.refinement_vector(), p)


# --- P^2 normal forms ------------------------------------------------------------


@dataclass(frozen=True)
class P2NormalForm:
    """The global vector field X -> M X of P^2, written on U0 (X = (1, x, y))."""

    p: int
    matrix: tuple[tuple[int, int, int], tuple[int, int, int], tuple[int, int, int]]

    def polys(self) -> tuple[Poly, Poly]:
        V, p = ("x", "y"), self.p
        X = [Poly.const(1, V, p), Poly.var("x", V, p), Poly.var("y", V, p)]
        MX = [sum((X[j] * self.matrix[i][j] for j in range(3)), Poly.const(0, V, p)) for i in range(3)]
        return MX[1] - X[1] * MX[0], MX[2] - X[2] * MX[0]

    def derivation(self) -> Derivation:
        return Derivation.from_polys("U0", *self.polys())

    def to_json(self) -> dict:
        return {"p": self.p, "matrix": [list(r) for r in self.matrix]}


NormalForm = NormalFormCoefficients | ProductNormalForm | P2NormalForm


# --- trace -------------------------------------------------------------------------


@dataclass
class TraceStep:
    """One move of the reduction.

    ``new`` holds the new coordinates as fractions of the previous ones; steps
    without ``new`` only rescale delta by a function (a move inside its class).
    """

    step: str
    description: str
    new: tuple[Frac, Frac] | None = None

    def to_json(self) -> dict:
        out = {"step": self.step, "description": self.description}
        if self.new is not None:
            out["x"] = self.new[0].format(("x", "y"))
            out["y"] = self.new[1].format(("x", "y"))
        return out


class ReductionError(ValueError):
    def __init__(self, obstruction: Obstruction, message: str, trace: list[TraceStep] | None = None):
        super().__init__(f"{obstruction.value}: {message}")
        self.obstruction = obstruction
        self.message = message
        self.trace = trace or []


@dataclass
class ClassificationReport:
    surface: str
    p: int
    input: dict
    f: Poly
    g: Poly
    field_degree: int = 1
    trace: list[TraceStep] = field(default_factory=list)
    canonical: CanonicalForm | None = None
    fan: Fan | None = None
    obstruction: Obstruction = Obstruction.NONE
    message: str = ""

    @property
    def reduced(self) -> bool:
        return self.canonical is not None

    def to_json(self) -> dict:
        return {
            "surface": self.surface,
            "p": self.p,
            "input": self.input,
            "normalized": {"f": str(self.f), "g": str(self.g)},
            "field_degree": self.field_degree,
            "trace": [s.to_json() for s in self.trace],
            "canonical": self.canonical.to_json() if self.canonical else None,
            "fan": self.fan.to_json() if self.fan else None,
            "obstruction": self.obstruction.value,
            "message": self.message,
        }


# --- the working state ---------------------------------------------------------------


class _State:
    def __init__(self, F: GF, f: Poly, g: Poly):
        self.F = F
        self.fx = QPoly.lift(f, F)
        self.gy = QPoly.lift(g, F)
        self.trace: list[TraceStep] = []

    def var(self, i: int) -> QPoly:
        return QPoly.var(self.F, 2, i)

    def const(self, c: int) -> QPoly:
        return QPoly.const(self.F, 2, c)

    def change(self, step: str, description: str, new: Sequence[Frac], inverse: Sequence[Frac]):
        """Push delta forward along the coordinate change ``new`` (with inverse ``inverse``)."""
        cx = apply_field(self.fx, self.gy, new[0]).compose(inverse)
        cy = apply_field(self.fx, self.gy, new[1]).compose(inverse)
        try:
            self.fx = cx.num.divexact(cx.den)
            self.gy = cy.num.divexact(cy.den)
        except ArithmeticError:
            raise ReductionError(
                Obstruction.UNKNOWN, f"{step}: pushed-forward field is not polynomial on the new chart", self.trace
            ) from None
        self.trace.append(TraceStep(step, description, (new[0], new[1])))

    def rescale(self, c: int):
        inv = self.F.inv(c)
        self.fx, self.gy = self.fx.scale(inv), self.gy.scale(inv)


def _frac(P: QPoly) -> Frac:
    return Frac.of(P)


@dataclass
class _BaseZeros:
    kind: str  # "additive" | "multiplicative"
    A: int | None  # element of F
    B: int | None  # None means the point at infinity
    k: int


def _base_zeros(coeffs: Sequence[int], p: int) -> _BaseZeros:
    """Zeros on P^1 of (c0 + c1 t + c2 t^2) d/dt, with the field they need."""
    c0, c1, c2 = (list(coeffs) + [0, 0, 0])[:3]
    c0, c1, c2 = c0 % p, c1 % p, c2 % p
    if c2 == 0 and c1 == 0:
        return _BaseZeros("additive", None, None, 1)
    if c2 == 0:
        return _BaseZeros("multiplicative", (-c0 * pow(c1, -1, p)) % p, None, 1)
    roots = [t for t in range(p) if (c2 * t * t + c1 * t + c0) % p == 0]
    disc_zero = (c1 * c1 - 4 * c2 * c0) % p == 0 if p != 2 else c1 == 0
    if disc_zero:
        if p == 2:
            # t^2 + c0 = (t + sqrt c0)^2 and sqrt is c0 itself on F_2
            return _BaseZeros("additive", c0 % 2, None, 1)
        return _BaseZeros("additive", roots[0], None, 1)
    if roots:
        A = 0 if 0 in roots else roots[0]
        B = next(r for r in roots if r != A)
        return _BaseZeros("multiplicative", A, B, 1)
    F = gf_field(p, 2)
    qroots = F.roots([c0, c1, c2])
    A = min(qroots)
    B = next(r for r in qroots if r != A)
    return _BaseZeros("multiplicative", A, B, 2)


def _fibre_shape(gy: QPoly, d: int, F: GF) -> tuple[list[int], int]:
    """Read y (F1(x) y + b1) from the y-coefficient; returns ([c_0..c_d], b1)."""
    F1 = [0] * (d + 1)
    b1 = 0
    for (i, j), c in gy.terms.items():
        if j == 2 and i <= d:
            F1[i] = c
        elif j == 1 and i == 0:
            b1 = c
        else:
            raise ReductionError(
                Obstruction.UNKNOWN, f"y-coefficient {gy.format(('x', 'y'))} left the normal-form shape"
            )
    return F1, b1


def _in_prime_field(F: GF, c: int) -> bool:
    return c < F.p


def _moebius(st: _State, z: _BaseZeros, d: int, which: int = 0, lift: bool = True) -> tuple[list[Frac], list[Frac]]:
    """Coordinates sending the zeros A -> 0, B -> oo of the base in variable ``which``.

    For the Hirzebruch lift the fibre coordinate picks up (x - B)^d.
    Returns (new, inverse) as fraction lists in the two chart variables.
    """
    F = st.F
    t = st.var(which)
    new = coordinate_fracs(F)
    inv = coordinate_fracs(F)
    A, B = z.A, z.B
    if z.kind == "additive":
        # double zero at A: t1 = 1 / (t - A) moves it to infinity
        new[which] = Frac(st.const(1), t - st.const(A))
        inv[which] = Frac(st.const(A) * t + st.const(1), t)
        if lift and d:
            other = 1 - which
            new[other] = _frac(st.var(other) * (t - st.const(A)) ** d)
            inv[other] = _frac(st.var(other) * t**d)
        return new, inv
    if B is None:
        new[which] = _frac(t - st.const(A))
        inv[which] = _frac(t + st.const(A))
        return new, inv
    new[which] = Frac(t - st.const(A), t - st.const(B))
    inv[which] = Frac(st.const(B) * t - st.const(A), t - st.const(1))
    if lift and d:
        other = 1 - which
        BA = F.sub(B, A)
        new[other] = _frac(st.var(other) * (t - st.const(B)) ** d)
        inv[other] = _frac((st.var(other) * (t - st.const(1)) ** d).scale(F.inv(F.pow(BA, d))))
    return new, inv


def _start(nf: NormalForm, chart: str) -> tuple[Poly, Poly, list[TraceStep]]:
    f0, g0 = nf.polys()
    if f0.is_zero() and g0.is_zero():
        raise ValueError("the zero derivation has no quotient")
    nd = normalize(Derivation.from_polys(chart, f0, g0))
    trace = []
    if not (nd.content.is_poly() and nd.content.num.is_constant()):
        trace.append(TraceStep("normalize", f"divide by the common factor {nd.content}"))
    if not is_p_closed_poly(nd.f, nd.g):
        raise ReductionError(Obstruction.NOT_P_CLOSED, "delta^p is not a multiple of delta", trace)
    return nd.f, nd.g, trace


def _report(nf: NormalForm, surface: str, f: Poly, g: Poly) -> ClassificationReport:
    return ClassificationReport(surface, nf.p, nf.to_json(), f, g)


# --- Hirzebruch surfaces, d >= 1 --------------------------------------------------------


def _reduce_hirzebruch(nf: NormalFormCoefficients) -> ClassificationReport:
    d, p = nf.d, nf.p
    f, g, trace = _start(nf, "U1")
    rep = _report(nf, f"hirzebruch:{d}", f, g)
    rep.trace = trace
    if f.is_zero():
        rep.trace.append(TraceStep("shape", "no d/dx part: delta ~ d/dy"))
        rep.canonical = CanonicalForm("Vertical")
        return rep
    if not all(e[1] == 0 for e in f.terms) or f.total_degree() > 2:
        raise ReductionError(Obstruction.UNKNOWN, f"d/dx coefficient {f} is not a quadratic in x", trace)
    z = _base_zeros([f.terms.get((k, 0), 0) for k in range(3)], p)
    F = gf_field(p, z.k)
    st = _State(F, f, g)
    st.trace = trace
    rep.field_degree = z.k
    if z.kind == "multiplicative":
        if z.B is None:
            if z.A:
                new, inv = _moebius(st, z, d)
                st.change(
                    "arrangement",
                    f"translate x -> x - {F.format(z.A)} so the singular point on D1 sits at the origin of U1",
                    new,
                    inv,
                )
        else:
            new, inv = _moebius(st, z, d)
            st.change(
                "step (3)",
                f"move the zeros x = {F.format(z.A)}, {F.format(z.B)} of the base field to 0 and infinity",
                new,
                inv,
            )
        lam = st.fx.terms.get((1, 0), 0)
        if set(st.fx.terms) != {(1, 0)}:
            raise ReductionError(Obstruction.UNKNOWN, "base part is not proportional to x d/dx", st.trace)
        st.rescale(lam)
        F1, b1 = _fibre_shape(st.gy, d, F)
        if not _in_prime_field(F, b1):
            raise ReductionError(Obstruction.UNKNOWN, "eigenvalue ratio outside F_p", st.trace)
        ip = F.neg(b1)
        shift = QPoly(F, 2)
        for j, c in enumerate(F1):
            cj = F.neg(c)
            if not cj:
                continue
            denom = F.sub(F.from_int(j), ip)
            if denom == 0:
                raise ReductionError(
                    Obstruction.UNKNOWN, f"coefficient of v^{j} with j = i mod p survives p-closedness", st.trace
                )
            shift = shift + QPoly(F, 2, {(j, 0): F.mul(cj, F.inv(denom))})
        if not shift.is_zero():
            x, y = st.var(0), st.var(1)
            st.change(
                "step (2)",
                f"series shift u - S(v) -> u with S = {shift.format(('v', 'u'))}, u = 1/y",
                [_frac(x), Frac(y, st.const(1) - shift * y)],
                [_frac(x), Frac(y, st.const(1) + shift * y)],
            )
        rep.canonical = CanonicalForm("Diagonal", b1)
        if b1:
            st.trace.append(TraceStep("step (2)", f"delta = x d/dx - ({(-b1) % p}) y d/dy, stored as Diagonal({b1})"))
    else:
        if z.A is not None:
            new, inv = _moebius(st, z, d)
            st.change("step (3)", f"move the double zero x = {F.format(z.A)} of the base field to infinity", new, inv)
        if set(st.fx.terms) != {(0, 0)}:
            raise ReductionError(Obstruction.UNKNOWN, "base part is not constant after the move", st.trace)
        st.rescale(st.fx.constant_value())
        F1, b1 = _fibre_shape(st.gy, d, F)
        if b1:
            raise ReductionError(Obstruction.UNKNOWN, "p-closed additive case with b != 0", st.trace)
        if any(c for j, c in enumerate(F1) if j % p == p - 1):
            raise ReductionError(Obstruction.UNKNOWN, "F^(p-1) != 0 in a p-closed additive case", st.trace)
        if F1[d]:
            raise ReductionError(
                Obstruction.NILPOTENT,
                "step (1) with deg F = d: the quotient is singular at the origin of U2 while smooth "
                "at the origin of U1, so no arrangement of singularities exists",
                st.trace,
            )
        G = QPoly(F, 2)
        for j, c in enumerate(F1):
            if c:
                G = G + QPoly(F, 2, {(j + 1, 0): F.mul(c, F.inv(F.from_int(j + 1)))})
        if not G.is_zero():
            x, y = st.var(0), st.var(1)
            st.change(
                "step (1)",
                f"antiderivative shift u + G(v) -> u with G = {G.format(('v', 'u'))}, u = 1/y",
                [_frac(x), Frac(y, st.const(1) + G * y)],
                [_frac(x), Frac(y, st.const(1) - G * y)],
            )
        st.trace.append(TraceStep("step (1)", "delta = d/dx, and d/dx = (1/x) * x d/dx"))
        rep.canonical = CanonicalForm("Diagonal", 0)
    rep.trace = st.trace
    return rep


# --- H_0 ---------------------------------------------------------------------------------


def _reduce_product(nf: ProductNormalForm) -> ClassificationReport:
    p = nf.p
    f, g, trace = _start(nf, "U1")
    rep = _report(nf, "hirzebruch:0", f, g)
    rep.trace = trace
    if f.is_zero():
        rep.trace.append(TraceStep("shape", "no d/dx part: delta ~ d/dy"))
        rep.canonical = CanonicalForm("Vertical")
        return rep
    if g.is_zero():
        rep.trace.append(TraceStep("shape", "no d/dy part: delta ~ d/dx = (1/x) * x d/dx"))
        rep.canonical = CanonicalForm("Diagonal", 0)
        return rep
    zx = _base_zeros([f.terms.get((k, 0), 0) for k in range(3)], p)
    zy = _base_zeros([g.terms.get((0, k), 0) for k in range(3)], p)
    if zx.kind != zy.kind:
        raise ReductionError(Obstruction.UNKNOWN, "p-closed product field of mixed type", trace)
    if zx.kind == "additive":
        raise ReductionError(
            Obstruction.NILPOTENT,
            "both factors are additive: delta is nilpotent at its unique singular point",
            trace,
        )
    k = max(zx.k, zy.k)
    F = gf_field(p, k)
    rep.field_degree = k
    if zx.k < k:
        zx = _BaseZeros(zx.kind, _embed(zx.A, F), _embed(zx.B, F), k)
    if zy.k < k:
        zy = _BaseZeros(zy.kind, _embed(zy.A, F), _embed(zy.B, F), k)
    st = _State(F, f, g)
    st.trace = trace
    nx, ix = _moebius(st, zx, 0, which=0, lift=False)
    ny, iy = _moebius(st, zy, 0, which=1, lift=False)
    new = [nx[0], ny[1]]
    inv = [ix[0], iy[1]]
    if any(not _is_identity(new[i], i) for i in range(2)):
        st.change("arrangement", "move the zeros of both rulings to 0 and infinity", new, inv)
    lam = st.fx.terms.get((1, 0), 0)
    mu = st.gy.terms.get((0, 1), 0)
    if set(st.fx.terms) != {(1, 0)} or set(st.gy.terms) != {(0, 1)}:
        raise ReductionError(Obstruction.UNKNOWN, "product field did not diagonalize", st.trace)
    i = F.mul(mu, F.inv(lam))
    if not _in_prime_field(F, i):
        raise ReductionError(Obstruction.UNKNOWN, "eigenvalue ratio outside F_p", st.trace)
    rep.canonical = CanonicalForm("Diagonal", i)
    rep.trace = st.trace
    return rep


def _embed(c: int | None, F: GF) -> int | None:
    return None if c is None else F.from_int(c)


def _is_identity(r: Frac, i: int) -> bool:
    return r.den.is_constant() and r.num == QPoly.var(r.num.F, 2, i).scale(r.den.constant_value())


# --- P^2 -------------------------------------------------------------------------------------


def _matrix_of(f: Poly, g: Poly) -> list[list[int]] | None:
    """M with (f, g) the U0 field of X -> M X, or None if (f, g) is not of that form."""
    t = lambda P, e: P.terms.get(e, 0)  # noqa: E731
    if any(sum(e) > 2 for e in list(f.terms) + list(g.terms)):
        return None
    # quadratic parts must be -(m01 x + m02 y) * (x, y)
    m01, m02 = (-t(f, (2, 0))) % f.p, (-t(f, (1, 1))) % f.p
    if t(f, (0, 2)) or t(g, (2, 0)) or (-t(g, (1, 1))) % f.p != m01 or (-t(g, (0, 2))) % f.p != m02:
        return None
    return [
        [0, m01, m02],
        [t(f, (0, 0)), t(f, (1, 0)), t(f, (0, 1))],
        [t(g, (0, 0)), t(g, (1, 0)), t(g, (0, 1))],
    ]


def _charpoly(M: Sequence[Sequence[int]], p: int) -> list[int]:
    """Coefficients (low degree first) of det(t I - M)."""
    tr = sum(M[i][i] for i in range(3))
    minors = sum(M[i][i] * M[j][j] - M[i][j] * M[j][i] for i in range(3) for j in range(i + 1, 3))
    det = (
        M[0][0] * (M[1][1] * M[2][2] - M[1][2] * M[2][1])
        - M[0][1] * (M[1][0] * M[2][2] - M[1][2] * M[2][0])
        + M[0][2] * (M[1][0] * M[2][1] - M[1][1] * M[2][0])
    )
    return [(-det) % p, minors % p, (-tr) % p, 1]


def _nullspace_F(rows: list[list[int]], F: GF) -> list[list[int]]:
    m = [list(r) for r in rows]
    n = len(m[0])
    pivots = []
    r = 0
    for c in range(n):
        piv = next((i for i in range(r, len(m)) if m[i][c]), None)
        if piv is None:
            continue
        m[r], m[piv] = m[piv], m[r]
        inv = F.inv(m[r][c])
        m[r] = [F.mul(v, inv) for v in m[r]]
        for i in range(len(m)):
            if i != r and m[i][c]:
                fac = m[i][c]
                m[i] = [F.sub(a, F.mul(fac, b)) for a, b in zip(m[i], m[r])]
        pivots.append(c)
        r += 1
    basis = []
    for free in range(n):
        if free in pivots:
            continue
        v = [0] * n
        v[free] = 1
        for row, pc in zip(m, pivots):
            v[pc] = F.neg(row[free])
        basis.append(v)
    return basis


def _inverse_F(P: list[list[int]], F: GF) -> list[list[int]]:
    n = len(P)
    aug = [list(P[i]) + [1 if i == j else 0 for j in range(n)] for i in range(n)]
    for c in range(n):
        piv = next(i for i in range(c, n) if aug[i][c])
        aug[c], aug[piv] = aug[piv], aug[c]
        inv = F.inv(aug[c][c])
        aug[c] = [F.mul(v, inv) for v in aug[c]]
        for i in range(n):
            if i != c and aug[i][c]:
                fac = aug[i][c]
                aug[i] = [F.sub(a, F.mul(fac, b)) for a, b in zip(aug[i], aug[c])]
    return [row[n:] for row in aug]


def _projective_change(st: _State, P: list[list[int]]) -> tuple[list[Frac], list[Frac]]:
    """New affine coordinates X' = P^{-1} X (X = (1, x, y)) and their inverse."""
    F = st.F
    Q = _inverse_F(P, F)
    X = [st.const(1), st.var(0), st.var(1)]

    def lin(R, i):
        return sum((X[j].scale(R[i][j]) for j in range(3)), QPoly(F, 2))

    new = [Frac(lin(Q, 1), lin(Q, 0)), Frac(lin(Q, 2), lin(Q, 0))]
    inv = [Frac(lin(P, 1), lin(P, 0)), Frac(lin(P, 2), lin(P, 0))]
    return new, inv


def _reduce_p2_field(f: Poly, g: Poly, trace: list[TraceStep], rep: ClassificationReport) -> ClassificationReport:
    p = f.p
    n = foliation_degree_p2(Derivation.from_polys("U0", f, g))
    if n < 0:
        raise ReductionError(Obstruction.NO_GLOBAL_SECTION, f"O(div delta) = O({n}) has no nonzero section", trace)
    if n == 1:
        return _reduce_radial(f, g, trace, rep)
    M = _matrix_of(f, g)
    if M is None:
        raise ReductionError(Obstruction.UNKNOWN, "degree-0 foliation is not a global vector field", trace)
    cp = _charpoly(M, p)
    k = next(k for k in (1, 2, 3) if len(gf_field(p, k).roots(cp)) > 0 and _splits(cp, gf_field(p, k)))
    F = gf_field(p, k)
    eig = []
    for lam in F.roots(cp):
        rows = [[F.sub(F.from_int(M[i][j]), lam if i == j else 0) for j in range(3)] for i in range(3)]
        eig.append((lam, _nullspace_F(rows, F)))
    if sum(len(v) for _, v in eig) < 3:
        raise ReductionError(_local_obstruction(f, g), "the vector field is not semisimple", trace)
    # order: the simple eigenvalue (if any) is lambda_0; then pick the smallest i in [1, p-1]
    vecs = [(lam, v) for lam, vs in eig for v in vs]
    best = None
    for order in permutations(range(len(vecs))):
        l0, l1, l2 = (vecs[j][0] for j in order)
        if l1 == l0:
            continue
        i = F.mul(F.sub(l2, l0), F.inv(F.sub(l1, l0)))
        if not _in_prime_field(F, i):
            raise ReductionError(Obstruction.UNKNOWN, "eigenvalue ratio outside F_p", trace)
        key = (i == 0, i)
        if best is None or key < best[0]:
            best = (key, order, i)
    _, order, i = best
    P = [[vecs[j][1][r] for j in order] for r in range(3)]
    st = _State(F, f, g)
    st.trace = trace
    rep.field_degree = k
    new, inv = _projective_change(st, P)
    st.change("eigenbasis", "projective change of coordinates to an eigenbasis of the vector field", new, inv)
    rep.canonical = CanonicalForm("Diagonal", i, chart="U0")
    rep.trace = st.trace
    return rep


def _splits(cp: list[int], F: GF) -> bool:
    # cubic splits over F iff it has 3 roots counted with multiplicity
    roots = F.roots(cp)
    rem = list(cp)
    count = 0
    for r in roots:
        while True:
            q, ok = _divide_linear(rem, r, F)
            if not ok:
                break
            rem = q
            count += 1
    return count == 3


def _divide_linear(a: list[int], r: int, F: GF) -> tuple[list[int], bool]:
    # synthetic division by (t - r); ok when the remainder vanishes
    a = F.ptrim(a)
    if len(a) < 2:
        return a, False
    out = [0] * (len(a) - 1)
    acc = 0
    for k in range(len(a) - 1, 0, -1):
        acc = F.add(F.mul(acc, r), a[k])
        out[k - 1] = acc
    rem = F.add(F.mul(acc, r), a[0])
    return out, rem == 0


def _reduce_radial(f: Poly, g: Poly, trace, rep) -> ClassificationReport:
    p = f.p
    if f.total_degree() > 1 or g.total_degree() > 1:
        raise ReductionError(Obstruction.UNKNOWN, "degree-1 foliation with a non-linear representative", trace)
    fx, fy, f0 = f.terms.get((1, 0), 0), f.terms.get((0, 1), 0), f.constant_value()
    gx, gy, g0 = g.terms.get((1, 0), 0), g.terms.get((0, 1), 0), g.constant_value()
    if fx == 0 and fy == 0 and gx == 0 and gy == 0:
        center = [0, f0, g0]  # lines of direction (f0, g0)
    elif fy == 0 and gx == 0 and fx == gy:
        c = pow(fx, -1, p)
        center = [1, (-f0 * c) % p, (-g0 * c) % p]
    else:
        raise ReductionError(Obstruction.UNKNOWN, "degree-1 foliation that is not a pencil of lines", trace)
    # complete the centre to a basis with standard vectors
    P = None
    for a, b in ((1, 2), (0, 2), (0, 1)):
        cols = [center, [int(r == a) for r in range(3)], [int(r == b) for r in range(3)]]
        cand = [[cols[j][r] for j in range(3)] for r in range(3)]
        if _det3(cand, p):
            P = cand
            break
    F = gf_field(p, 1)
    st = _State(F, f, g)
    st.trace = trace
    identity = [[int(i == j) for j in range(3)] for i in range(3)]
    if P != identity:
        new, inv = _projective_change(st, P)
        st.change("arrangement", f"move the centre [{center[0]}:{center[1]}:{center[2]}] of the pencil to [1:0:0]", new, inv)
    rep.canonical = CanonicalForm("Diagonal", 1, chart="U0")
    rep.trace = st.trace
    return rep


def _det3(M, p) -> int:
    return (
        M[0][0] * (M[1][1] * M[2][2] - M[1][2] * M[2][1])
        - M[0][1] * (M[1][0] * M[2][2] - M[1][2] * M[2][0])
        + M[0][2] * (M[1][0] * M[2][1] - M[1][1] * M[2][0])
    ) % p


def _reduce_p2(nf: P2NormalForm) -> ClassificationReport:
    f, g, trace = _start(nf, "U0")
    rep = _report(nf, "p2", f, g)
    return _reduce_p2_field(f, g, trace, rep)


def reduce(nf: NormalForm) -> ClassificationReport:
    """Run the reduction; raises ReductionError carrying the obstruction."""
    if isinstance(nf, P2NormalForm):
        rep = _reduce_p2(nf)
        rep.fan = canonical_to_fan(rep.canonical, None, nf.p)
        return rep
    if isinstance(nf, ProductNormalForm):
        rep = _reduce_product(nf)
    else:
        rep = _reduce_hirzebruch(nf)
    rep.fan = canonical_to_fan(rep.canonical, nf.d, nf.p)
    return rep


# --- replay oracle -----------------------------------------------------------------------------


def compose_trace(trace: Sequence[TraceStep], F: GF) -> list[Frac]:
    """The composite coordinate change as fractions of the original coordinates."""
    phi = coordinate_fracs(F)
    for s in trace:
        if s.new is not None:
            phi = [_refield(s.new[0], F).compose(phi), _refield(s.new[1], F).compose(phi)]
    return phi


def _refield(r: Frac, F: GF) -> Frac:
    if r.num.F is F:
        return r
    return Frac(QPoly(F, 2, r.num.terms), QPoly(F, 2, r.den.terms))


def replay(rep: ClassificationReport) -> bool:
    """Check that the traced coordinate changes carry delta to the canonical form, up to ~.

    With phi the composite change and C the canonical field, the pushforward of
    delta is proportional to C iff delta(phi_x) C_y(phi) - delta(phi_y) C_x(phi) = 0.
    """
    if rep.canonical is None:
        raise ValueError("report has no canonical form")
    F = gf_field(rep.p, rep.field_degree)
    f, g = QPoly.lift(rep.f, F), QPoly.lift(rep.g, F)
    phi = compose_trace(rep.trace, F)
    cx, cy = rep.canonical.polys(rep.p)
    Cx = QPoly.lift(cx, F).compose(phi)
    Cy = QPoly.lift(cy, F).compose(phi)
    dx = apply_field(f, g, phi[0])
    dy = apply_field(f, g, phi[1])
    return (dx * Cy - dy * Cx).is_zero()


# --- GFR verdict ---------------------------------------------------------------------------------


@dataclass
class Verdict:
    gfr: bool | None
    obstruction: Obstruction
    obstructions: list[Obstruction] = field(default_factory=list)
    canonical: CanonicalForm | None = None
    fan: Fan | None = None
    splitting_verified: bool | None = None
    report: ClassificationReport | None = None
    details: list[str] = field(default_factory=list)

    def to_json(self) -> dict:
        return {
            "gfr": self.gfr,
            "obstruction": self.obstruction.value,
            "obstructions": [o.value for o in self.obstructions],
            "canonical": self.canonical.to_json() if self.canonical else None,
            "fan": self.fan.to_json() if self.fan else None,
            "splitting_verified": self.splitting_verified,
            "details": self.details,
        }


def nilpotent_singular_points(delta: Derivation, atlas: SurfaceAtlas, k_max: int = 4) -> list[tuple[str, tuple]]:
    """Singular points whose normalized local generator (in some chart through them) is nilpotent."""
    loc = singular_locus(delta, atlas, k_max)
    nil_chart = {}
    for cid, cl in loc.charts.items():
        h = p_closed_witness_poly(cl.f, cl.g)
        nil_chart[cid] = h is not None and h.is_zero()
    out = []
    for cid, cl in loc.charts.items():
        for pt in cl.points:
            if nil_chart[cid]:
                out.append((pt.duplicate_of or cid, pt.coords))
    return sorted(set(out))


def _local_obstruction(f: Poly, g: Poly) -> Obstruction:
    delta = Derivation.from_polys("U0", f, g)
    if nilpotent_singular_points(delta, projective_plane(f.p)):
        return Obstruction.NILPOTENT
    return Obstruction.UNKNOWN


def verify_splitting(f: Poly, g: Poly, degree: int | None = None) -> bool:
    """Projector laws for pi = 1 - delta^(p-1) on all monomials up to ``degree``."""
    p = f.p
    degree = degree if degree is not None else 2 * p
    V = f.vars
    for a in range(degree + 1):
        for b in range(degree + 1 - a):
            r = Poly.monomial((a, b), V, p)
            pr = r - iterate_poly(f, g, r, p - 1)
            if not (f * pr.diff(0) + g * pr.diff(1)).is_zero():
                return False
            if pr - iterate_poly(f, g, pr, p - 1) != pr:
                return False
            if a % p == 0 and b % p == 0 and pr != r:
                return False
    return True


def _normal_form_for(delta: Derivation, atlas: SurfaceAtlas):
    if atlas.kind == "H":
        return normal_form_check(delta, atlas)
    base = transport(delta, atlas, "U0")
    nd = normalize(base)
    return _P2Field(delta.p, nd.f, nd.g)


@dataclass(frozen=True)
class _P2Field:
    # a P^2 input given by its normalized U0 field rather than by a matrix
    p: int
    f: Poly
    g: Poly

    def polys(self):
        return self.f, self.g

    def to_json(self):
        return {"p": self.p, "f": str(self.f), "g": str(self.g)}


def gfr_verdict(delta: Derivation, surface: str | SurfaceAtlas, k_max: int = 4) -> Verdict:
    atlas = surface if isinstance(surface, SurfaceAtlas) else atlas_for(surface, delta.p)
    obstructions: list[Obstruction] = []
    details: list[str] = []
    if not is_p_closed(delta):
        return Verdict(False, Obstruction.NOT_P_CLOSED, [Obstruction.NOT_P_CLOSED], details=["delta^p is not a multiple of delta"])
    nil = nilpotent_singular_points(delta, atlas, k_max)
    if nil:
        obstructions.append(Obstruction.NILPOTENT)
        details.append(f"nilpotent local generator at {len(nil)} singular point(s): {nil}")
    if atlas.kind == "H":
        nf = normal_form_check(delta, atlas)
        has_section = nf is not None
    else:
        n = foliation_degree_p2(delta, atlas)
        has_section = n >= 0
        details.append(f"foliation degree {n}")
        nf = _normal_form_for(delta, atlas) if has_section else None
    if not has_section:
        obstructions.append(Obstruction.NO_GLOBAL_SECTION)
        details.append("O(div delta) has no nonzero global section")
    if obstructions:
        return Verdict(False, obstructions[0], obstructions, details=details)
    try:
        if atlas.kind == "H":
            rep = reduce(nf)
        else:
            f, g, trace = _start(nf, "U0")
            rep = _report(nf, "p2", f, g)
            rep = _reduce_p2_field(f, g, trace, rep)
            rep.fan = canonical_to_fan(rep.canonical, None, delta.p)
    except ReductionError as err:
        gfr = False if err.obstruction != Obstruction.UNKNOWN else None
        return Verdict(gfr, err.obstruction, [err.obstruction], details=details + [err.message])
    splitting = None
    base = transport(delta, atlas, rep.canonical.chart if atlas.kind == "P2" else "U1")
    if base.is_polynomial() and is_multiplicative(base):
        splitting = verify_splitting(*base.poly_coeffs())
        details.append("delta^p = delta: splitting 1 - delta^(p-1) checked on the input")
    elif rep.canonical.kind == "Diagonal":
        splitting = verify_splitting(*rep.canonical.polys(delta.p))
        details.append("splitting 1 - delta^(p-1) checked on the canonical representative")
    return Verdict(True, Obstruction.NONE, [], rep.canonical, rep.fan, splitting, rep, details)


# --- enumeration -----------------------------------------------------------------------------------


MAX_P = 13
MAX_D = 6


def _projective(n: int, p: int, with_zero: bool = False) -> Iterable[tuple[int, ...]]:
    """Tuples in F_p^n whose first nonzero entry is 1 (and optionally the zero tuple)."""
    if with_zero:
        yield (0,) * n
    for lead in range(n):
        for tail in product(range(p), repeat=n - lead - 1):
            yield (0,) * lead + (1,) + tail


def enumerate_normal_forms(surface: str, p: int, exhaustive: bool = False) -> Iterable[NormalForm]:
    """Normal forms covering every class.

    By default (a2, a1, a0, b) and F are each taken up to a scalar: an overall
    scalar is a move inside the class of delta, and y -> c y rescales F alone.
    ``exhaustive`` walks every coefficient tuple instead.
    """
    kind, d = _parse_surface(surface)
    if kind == "P2":
        yield from _p2_forms(p)
        return
    if d == 0:
        tuples = product(range(p), repeat=6) if exhaustive else _projective(6, p)
        for t in tuples:
            if any(t):
                yield ProductNormalForm(p, t[:3], t[3:])
        return
    if exhaustive:
        for t in product(range(p), repeat=4 + d + 1):
            a2, a1, a0, b, *F = t
            if any(t):
                yield NormalFormCoefficients(d, p, a2, a1, a0, tuple(F), b)
        return
    for a2, a1, a0, b in _projective(4, p, with_zero=True):
        for F in _projective(d + 1, p, with_zero=True):
            if (a2, a1, a0, b) == (0, 0, 0, 0) and not any(F):
                continue
            yield NormalFormCoefficients(d, p, a2, a1, a0, F, b)


def _p2_forms(p: int) -> Iterable[P2NormalForm]:
    # rational canonical forms: companion matrices of monic cubics, and
    # diag(l) + companion((t - l)(t - m)); scalar matrices give the zero field
    for c0, c1, c2 in product(range(p), repeat=3):
        yield P2NormalForm(p, ((0, 0, -c0 % p), (1, 0, -c1 % p), (0, 1, -c2 % p)))
    for lam, mu in product(range(p), repeat=2):
        s, q = (lam + mu) % p, (lam * mu) % p
        yield P2NormalForm(p, ((lam, 0, 0), (0, 0, -q % p), (0, 1, s)))


def _parse_surface(surface: str) -> tuple[str, int | None]:
    atlas = atlas_for(surface, 2)
    return atlas.kind, atlas.d


@dataclass
class CanonicalClass:
    canonical: CanonicalForm
    fan: Fan
    count: int

    def to_json(self) -> dict:
        return {"canonical": self.canonical.to_json(), "fan": self.fan.to_json(), "count": self.count}


@dataclass
class SurfaceClassification:
    surface: str
    p: int
    enumerated: int
    p_closed: int
    obstructed: dict[str, int]
    canonical_classes: list[CanonicalClass]
    iso_classes: list[list[str]]
    replay_failures: int = 0
    exhaustive: bool = False

    @property
    def class_count(self) -> int:
        return len(self.iso_classes)

    @property
    def label_count(self) -> int:
        return len(self.canonical_classes)

    def to_json(self) -> dict:
        return {
            "surface": self.surface,
            "p": self.p,
            "enumerated": self.enumerated,
            "p_closed": self.p_closed,
            "obstructed": self.obstructed,
            "canonical_forms": [c.to_json() for c in self.canonical_classes],
            "iso_classes": self.iso_classes,
            "class_count": self.class_count,
            "label_count": self.label_count,
            "replay_failures": self.replay_failures,
            "exhaustive": self.exhaustive,
        }


def _job(nf: NormalForm, check_replay: bool):
    try:
        rep = reduce(nf)
    except ReductionError as err:
        return ("obstructed", err.obstruction.value, None, True)
    ok = replay(rep) if check_replay else True
    return ("reduced", rep.canonical, rep.fan, ok)


def classify_surface(
    surface: str,
    p: int,
    exhaustive: bool = False,
    check_replay: bool = False,
    threads: int | None = None,
) -> SurfaceClassification:
    if p > MAX_P:
        raise BudgetExceededError(f"p = {p} exceeds the enumeration budget p <= {MAX_P}")
    kind, d = _parse_surface(surface)
    if d is not None and d > MAX_D:
        raise BudgetExceededError(f"d = {d} exceeds the enumeration budget d <= {MAX_D}")
    atlas = atlas_for(surface, p)
    forms = list(enumerate_normal_forms(surface, p, exhaustive))
    closed = [nf for nf in forms if is_p_closed_poly(*nf.polys())]
    threads = threads or int(os.environ.get("SANDWICH_LAB_THREADS", "1") or 1)
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(lambda nf: _job(nf, check_replay), closed))
    else:
        results = [_job(nf, check_replay) for nf in closed]
    obstructed: dict[str, int] = {}
    found: dict[CanonicalForm, CanonicalClass] = {}
    failures = 0
    for status, payload, fan, ok in results:
        if not ok:
            failures += 1
        if status == "obstructed":
            obstructed[payload] = obstructed.get(payload, 0) + 1
            continue
        key = CanonicalForm(payload.kind, payload.i)
        if key not in found:
            found[key] = CanonicalClass(payload, fan, 0)
        found[key].count += 1
    classes = sorted(found.values(), key=lambda c: c.canonical.sort_key())
    groups = iso_classes([c.fan for c in classes])
    return SurfaceClassification(
        atlas.name,
        p,
        len(forms),
        len(closed),
        dict(sorted(obstructed.items())),
        classes,
        [[classes[k].canonical.label for k in grp] for grp in groups],
        failures,
        exhaustive,
    )


# --- full sandwich report ------------------------------------------------------------------------


@dataclass
class SandwichReport:
    surface: str
    p: int
    delta: str
    charts: dict[str, str]
    boundary_orders: dict[str, int]
    foliation_degree: int | None
    normal_form: dict | None
    singular_points: list[dict]
    verdict: Verdict

    def to_json(self) -> dict:
        return {
            "surface": self.surface,
            "p": self.p,
            "delta": self.delta,
            "charts": self.charts,
            "boundary_orders": self.boundary_orders,
            "foliation_degree": self.foliation_degree,
            "normal_form": self.normal_form,
            "singular_points": self.singular_points,
            "verdict": self.verdict.to_json(),
        }


def sandwich_report(delta: Derivation, surface: str | SurfaceAtlas, k_max: int = 4, bound: int | None = None) -> SandwichReport:
    from .atlas import all_charts, boundary_orders
    from .invariants import local_type

    atlas = surface if isinstance(surface, SurfaceAtlas) else atlas_for(surface, delta.p)
    charts = {cid: str(d) for cid, d in all_charts(delta, atlas).items()}
    orders = boundary_orders(delta, atlas)
    degree = foliation_degree_p2(delta, atlas) if atlas.kind == "P2" else None
    nf = normal_form_check(delta, atlas) if atlas.kind == "H" else None
    loc = singular_locus(delta, atlas, k_max)
    points = []
    for cid, cl in loc.charts.items():
        for pt in cl.points:
            if pt.duplicate_of is not None:
                continue
            entry = {"chart": cid, "coords": pt.formatted(delta.p), "field_degree": pt.k}
            if pt.k == 1:
                lt = local_type(cl.f, cl.g, pt.coords, bound)
                entry.update(type=lt.label, kind=lt.kind, aliases=lt.aliases)
            else:
                entry.update(type=None, kind="non-rational", aliases=[])
            points.append(entry)
    return SandwichReport(
        atlas.name,
        delta.p,
        str(delta),
        charts,
        orders,
        degree,
        nf.to_json() if nf is not None else None,
        points,
        gfr_verdict(delta, atlas, k_max),
    )
