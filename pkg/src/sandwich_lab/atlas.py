"""P^2 and Hirzebruch surfaces as glued affine charts.

Chart conventions::

    P^2   U0 (x, y)   U1 (z, w) = (1/x, y/x)        U2 (u, v) = (1/y, x/y)
    H_d   U1 (x, y)   U2 (z, w) = (x^d y, 1/x)      U3 (s, t) = (1/x, 1/(x^d y))
          U4 (u, v) = (1/y, x)

Toric boundary divisors of H_d follow the ray labels rho_1 = e2, rho_2 = e1,
rho_3 = -e2, rho_4 = -e1 + d e2; D1 is the negative section {y = 0} = {z = 0}.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field
from functools import cached_property
from math import lcm
from typing import Mapping

from .derivation import Derivation, apply, normalize
from .field_poly import Poly, RatFunc, divexact, poly_gcd, ratfunc_ring
from .gf import MAX_ORDER, field


class TransitionError(ValueError):
    pass


class NonIsolatedSingularitiesError(ValueError):
    pass


@dataclass(frozen=True)
class Chart:
    id: str
    vars: tuple[str, str]


@dataclass(frozen=True)
class BoundaryDivisor:
    name: str
    # (chart id, local equation variable) for each chart meeting the divisor
    equations: tuple[tuple[str, str], ...]


class SurfaceAtlas:
    """An atlas with explicit transition maps through a base chart."""

    def __init__(self, kind: str, d: int | None, p: int, charts, to_base, divisors):
        self.kind = kind
        self.d = d
        self.p = p
        self.charts = tuple(charts)
        self._chart_by_id = {c.id: c for c in self.charts}
        self.base = self.charts[0]
        # to_base[c][v]: text of chart-c coordinate v in base coordinates
        self._to_base_text = to_base
        self.divisors = tuple(divisors)

    @property
    def name(self) -> str:
        return "p2" if self.kind == "P2" else f"hirzebruch:{self.d}"

    def chart(self, chart_id: str) -> Chart:
        try:
            return self._chart_by_id[chart_id]
        except KeyError:
            raise KeyError(f"chart {chart_id!r} not in atlas {self.name} ({list(self._chart_by_id)})") from None

    def chart_ids(self) -> list[str]:
        return [c.id for c in self.charts]

    @cached_property
    def _to_base(self) -> dict[str, dict[str, RatFunc]]:
        out = {}
        for c in self.charts:
            out[c.id] = {
                v: RatFunc.parse(txt, self.base.vars, self.p) for v, txt in self._to_base_text[c.id].items()
            }
        return out

    @cached_property
    def _from_base(self) -> dict[str, dict[str, RatFunc]]:
        # base coordinates expressed in chart coordinates
        inv = _INVERSES[self.kind](self.d or 0)
        out = {}
        for c in self.charts:
            out[c.id] = {v: RatFunc.parse(txt, c.vars, self.p) for v, txt in inv[c.id].items()}
        return out

    def transition(self, source: str, target: str) -> dict[str, RatFunc]:
        """Target-chart coordinates as rational functions of source-chart coordinates."""
        self.chart(source), self.chart(target)
        if source == target:
            return dict(zip(self.chart(source).vars, ratfunc_ring(self.chart(source).vars, self.p)))
        return _cached_transition(self, source, target)

    def pullback(self, r: RatFunc, source: str, target: str) -> RatFunc:
        """Re-express a function written in ``source`` coordinates in ``target`` coordinates."""
        return r.substitute(self.transition(target, source))

    def __repr__(self):
        return f"SurfaceAtlas({self.name}, p={self.p})"


_TRANSITIONS: dict = {}


def _cached_transition(atlas: SurfaceAtlas, source: str, target: str):
    key = (atlas.kind, atlas.d, atlas.p, source, target)
    if key not in _TRANSITIONS:
        imgs = atlas._from_base[source]
        _TRANSITIONS[key] = {v: r.substitute(imgs) for v, r in atlas._to_base[target].items()}
    return _TRANSITIONS[key]


def _p2_inverses(_d):
    return {
        "U0": {"x": "x", "y": "y"},
        "U1": {"x": "1/z", "y": "w/z"},
        "U2": {"x": "v/u", "y": "1/u"},
    }


def _hirzebruch_inverses(d):
    return {
        "U1": {"x": "x", "y": "y"},
        "U2": {"x": "1/w", "y": f"z*w^{d}"},
        "U3": {"x": "1/s", "y": f"s^{d}/t"},
        "U4": {"x": "v", "y": "1/u"},
    }


_INVERSES = {"P2": _p2_inverses, "H": _hirzebruch_inverses}
_ATLASES: dict = {}


def projective_plane(p: int) -> SurfaceAtlas:
    key = ("P2", None, p)
    if key not in _ATLASES:
        charts = [Chart("U0", ("x", "y")), Chart("U1", ("z", "w")), Chart("U2", ("u", "v"))]
        to_base = {
            "U0": {"x": "x", "y": "y"},
            "U1": {"z": "1/x", "w": "y/x"},
            "U2": {"u": "1/y", "v": "x/y"},
        }
        divisors = [
            BoundaryDivisor("X0=0", (("U1", "z"), ("U2", "u"))),
            BoundaryDivisor("X1=0", (("U0", "x"), ("U2", "v"))),
            BoundaryDivisor("X2=0", (("U0", "y"), ("U1", "w"))),
        ]
        _ATLASES[key] = SurfaceAtlas("P2", None, p, charts, to_base, divisors)
    return _ATLASES[key]


def hirzebruch(d: int, p: int) -> SurfaceAtlas:
    if d < 0:
        raise ValueError(f"Hirzebruch index must be >= 0, got {d}")
    key = ("H", d, p)
    if key not in _ATLASES:
        charts = [
            Chart("U1", ("x", "y")),
            Chart("U2", ("z", "w")),
            Chart("U3", ("s", "t")),
            Chart("U4", ("u", "v")),
        ]
        to_base = {
            "U1": {"x": "x", "y": "y"},
            "U2": {"z": f"x^{d}*y", "w": "1/x"},
            "U3": {"s": "1/x", "t": f"1/(x^{d}*y)"},
            "U4": {"u": "1/y", "v": "x"},
        }
        divisors = [
            BoundaryDivisor("D1", (("U1", "y"), ("U2", "z"))),
            BoundaryDivisor("D2", (("U1", "x"), ("U4", "v"))),
            BoundaryDivisor("D3", (("U3", "t"), ("U4", "u"))),
            BoundaryDivisor("D4", (("U2", "w"), ("U3", "s"))),
        ]
        _ATLASES[key] = SurfaceAtlas("H", d, p, charts, to_base, divisors)
    return _ATLASES[key]


def atlas_for(surface: str, p: int) -> SurfaceAtlas:
    """``p2`` or ``hirzebruch:d``."""
    s = surface.strip().lower()
    if s in ("p2", "p^2", "projective_plane"):
        return projective_plane(p)
    if s.startswith("hirzebruch:") or s.startswith("h:"):
        return hirzebruch(int(s.split(":", 1)[1]), p)
    raise ValueError(f"unknown surface {surface!r}; use p2 or hirzebruch:d")


# --- transport --------------------------------------------------------------


def transport(delta: Derivation, atlas: SurfaceAtlas, to_chart: str) -> Derivation:
    """Express delta in the coordinates of ``to_chart``."""
    src = atlas.chart(delta.chart_id)
    dst = atlas.chart(to_chart)
    if src.vars != delta.vars:
        raise TransitionError(f"derivation variables {delta.vars} do not match chart {src.id} {src.vars}")
    if src.id == dst.id:
        return delta
    forward = atlas.transition(src.id, dst.id)
    back = atlas.transition(dst.id, src.id)
    try:
        coeffs = [apply(delta, forward[c]).substitute(back) for c in dst.vars]
    except (ZeroDivisionError, ValueError) as err:
        raise TransitionError(f"cannot transport from {src.id} to {dst.id}: {err}") from err
    return Derivation(dst.id, coeffs[0], coeffs[1])


def all_charts(delta: Derivation, atlas: SurfaceAtlas) -> dict[str, Derivation]:
    return {c.id: transport(delta, atlas, c.id) for c in atlas.charts}


# --- divisor of delta -------------------------------------------------------


def _order(a: Poly, var: str) -> int:
    i = a.vars.index(var)
    return min(e[i] for e in a.terms)


def order_along(r: RatFunc, var: str) -> int:
    if r.is_zero():
        raise ValueError("order of the zero function")
    return _order(r.num, var) - _order(r.den, var)


class InconsistentOrdersError(AssertionError):
    pass


def boundary_orders(delta: Derivation, atlas: SurfaceAtlas, check: bool = True) -> dict[str, int]:
    """ord_D div(delta) for each toric boundary divisor D."""
    charts = all_charts(delta, atlas)
    contents = {cid: normalize(dl).content for cid, dl in charts.items()}
    out = {}
    for div in atlas.divisors:
        orders = [order_along(contents[cid], var) for cid, var in div.equations]
        if check and len(set(orders)) > 1:
            raise InconsistentOrdersError(f"{div.name}: orders {orders} differ across charts")
        out[div.name] = orders[0]
    return out


def foliation_degree_p2(delta: Derivation, atlas: SurfaceAtlas | None = None) -> int:
    """n with O(div delta) = O(n) on P^2."""
    atlas = atlas or projective_plane(delta.p)
    if atlas.kind != "P2":
        raise ValueError("foliation degree is only defined here for P^2")
    base = transport(delta, atlas, "U0")
    alpha = normalize(base).content
    affine = alpha.num.total_degree() - alpha.den.total_degree()
    return affine + boundary_orders(delta, atlas)["X0=0"]


# --- normal form of global sections ------------------------------------------


@dataclass(frozen=True)
class NormalFormCoefficients:
    """(a2 x^2 + a1 x + a0) d/dx + (F(x) y - d a2 x + b) y d/dy on U1 of H_d, d >= 1."""

    d: int
    p: int
    a2: int
    a1: int
    a0: int
    F: tuple[int, ...]  # c_0, ..., c_d
    b: int

    def __post_init__(self):
        if len(self.F) > self.d + 1:
            raise ValueError(f"deg F must be <= d = {self.d}")

    def polys(self) -> tuple[Poly, Poly]:
        p, V = self.p, ("x", "y")
        x, y = Poly.var("x", V, p), Poly.var("y", V, p)
        f = x * x * self.a2 + x * self.a1 + self.a0
        Fx = sum((x**j * c for j, c in enumerate(self.F)), Poly.const(0, V, p))
        g = (Fx * y - x * (self.d * self.a2) + self.b) * y
        return f, g

    def F_poly(self) -> Poly:
        V = ("x", "y")
        return Poly(V, self.p, {(j, 0): c for j, c in enumerate(self.F)})

    def derivation(self) -> Derivation:
        f, g = self.polys()
        return Derivation.from_polys("U1", f, g)

    def to_json(self) -> dict:
        return {"d": self.d, "p": self.p, "a2": self.a2, "a1": self.a1, "a0": self.a0, "F": list(self.F), "b": self.b}


@dataclass(frozen=True)
class ProductNormalForm:
    """(a2 x^2 + a1 x + a0) d/dx + (b2 y^2 + b1 y + b0) d/dy on U1 of H_0."""

    p: int
    a: tuple[int, int, int]  # a2, a1, a0
    b: tuple[int, int, int]  # b2, b1, b0
    d: int = 0

    def polys(self) -> tuple[Poly, Poly]:
        V = ("x", "y")
        f = Poly(V, self.p, {(2, 0): self.a[0], (1, 0): self.a[1], (0, 0): self.a[2]})
        g = Poly(V, self.p, {(0, 2): self.b[0], (0, 1): self.b[1], (0, 0): self.b[2]})
        return f, g

    def derivation(self) -> Derivation:
        f, g = self.polys()
        return Derivation.from_polys("U1", f, g)

    def to_json(self) -> dict:
        return {"d": 0, "p": self.p, "a": list(self.a), "b": list(self.b)}


def _only_x(a: Poly) -> bool:
    return all(e[1] == 0 for e in a.terms)


def normal_form_check(delta: Derivation, atlas: SurfaceAtlas):
    """Read off the global-section normal form of delta on H_d, or None.

    ``None`` certifies that O(div delta) has no nonzero global section.
    """
    if atlas.kind != "H":
        raise ValueError("normal_form_check applies to Hirzebruch surfaces")
    d, p = atlas.d, atlas.p
    nd = normalize(transport(delta, atlas, "U1"))
    f, g = nd.f, nd.g
    if d == 0:
        if not (_only_x(f) and f.total_degree() <= 2):
            return None
        if not (all(e[0] == 0 for e in g.terms) and g.degree(1) <= 2):
            return None
        return ProductNormalForm(
            p,
            (f.terms.get((2, 0), 0), f.terms.get((1, 0), 0), f.terms.get((0, 0), 0)),
            (g.terms.get((0, 2), 0), g.terms.get((0, 1), 0), g.terms.get((0, 0), 0)),
        )
    if f.is_zero():
        # d/dy ~ y d/dy
        return NormalFormCoefficients(d, p, 0, 0, 0, (0,), 1)
    if not (_only_x(f) and f.total_degree() <= 2):
        return None
    a2, a1, a0 = (f.terms.get((k, 0), 0) for k in (2, 1, 0))
    F = [0] * (d + 1)
    b = 0
    for (i, j), c in g.terms.items():
        if j == 2:
            if i > d:
                return None
            F[i] = c
        elif j == 1:
            if i == 0:
                b = c
            elif i == 1:
                if c != (-d * a2) % p:
                    return None
            else:
                return None
        else:
            return None
    if g.terms.get((1, 1), 0) == 0 and (d * a2) % p:
        return None
    return NormalFormCoefficients(d, p, a2, a1, a0, tuple(F), b)


# --- singular locus ---------------------------------------------------------


@dataclass
class SingularPoint:
    chart: str
    coords: tuple[int, int]  # element indices of field(p, k)
    k: int
    duplicate_of: str | None = None  # earlier chart that already contains this point
    label: str | None = None

    def formatted(self, p: int) -> list[str]:
        F = field(p, self.k)
        return [F.format(c) for c in self.coords]


@dataclass
class ChartLocus:
    chart: str
    f: Poly
    g: Poly
    points: list[SingularPoint]
    residual_degree: int  # distinct x-roots of the resultant outside F_{p^k}, k <= k_max
    searched_degrees: list[int]


@dataclass
class SingularLocusReport:
    charts: dict[str, ChartLocus] = dc_field(default_factory=dict)
    zero_dimensional: bool = True

    def distinct_points(self) -> list[SingularPoint]:
        """Points deduplicated across charts (each reported in the first chart containing it)."""
        return [pt for loc in self.charts.values() for pt in loc.points if pt.duplicate_of is None]

    def all_points(self) -> list[SingularPoint]:
        return [pt for loc in self.charts.values() for pt in loc.points]


def eval_gf(a: Poly, point, F) -> int:
    acc = 0
    for e, c in a.terms.items():
        t = F.from_int(c)
        for x, k in zip(point, e):
            if k:
                t = F.mul(t, F.pow(x, k))
        acc = F.add(acc, t)
    return acc


def resultant(f: Poly, g: Poly, var: int = 1) -> Poly:
    """Res_var(f, g) via a fraction-free (Bareiss) Sylvester determinant."""
    m, n = f.degree(var), g.degree(var)
    if m < 0 or n < 0:
        raise ValueError("resultant with the zero polynomial")
    if m == 0 and n == 0:
        return f.one()
    cf, cg = f.coefficients_in(var), g.coefficients_in(var)
    zero = f.zero()
    size = m + n
    rows = []
    for i in range(n):
        row = [zero] * size
        for k in range(m + 1):
            row[i + m - k] = cf.get(k, zero)
        rows.append(row)
    for i in range(m):
        row = [zero] * size
        for k in range(n + 1):
            row[i + n - k] = cg.get(k, zero)
        rows.append(row)
    return _bareiss(rows)


def _bareiss(M: list[list[Poly]]) -> Poly:
    n = len(M)
    M = [list(r) for r in M]
    sign = 1
    prev = M[0][0].one()
    for k in range(n - 1):
        if M[k][k].is_zero():
            swap = next((r for r in range(k + 1, n) if not M[r][k].is_zero()), None)
            if swap is None:
                return M[0][0].zero()
            M[k], M[swap] = M[swap], M[k]
            sign = -sign
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                M[i][j] = divexact(M[i][j] * M[k][k] - M[i][k] * M[k][j], prev)
        prev = M[k][k]
    det = M[n - 1][n - 1]
    return det if sign == 1 else -det


def radical(a: Poly, var: int = 0) -> Poly:
    """Product of the distinct irreducible factors of a univariate polynomial."""
    if a.degree(var) <= 0:
        return a.one()
    da = a.diff(var)
    if da.is_zero():
        p = a.p
        root = Poly(a.vars, p, {tuple(k // p for k in e): c for e, c in a.terms.items()})
        return radical(root, var)
    g = poly_gcd(a, da)
    sq = divexact(a, g)
    rg = radical(g, var)
    return divexact(sq * rg, poly_gcd(sq, rg)).monic()


def common_zeros(f: Poly, g: Poly, k_max: int = 4):
    """Common zeros of coprime f, g with coordinates in F_{p^k}, k <= k_max.

    Returns (points, residual_degree, searched) with points as (coords, k).
    """
    if poly_gcd(f, g) != f.one():
        raise NonIsolatedSingularitiesError(f"gcd({f}, {g}) is not a unit")
    p = f.p
    if f.is_zero() or g.is_zero():
        return [], 0, []
    res = resultant(f, g, 1)
    rad = radical(res, 0)
    points = []
    x_roots_found = 0
    searched = []
    for k in range(1, k_max + 1):
        if p**k > MAX_ORDER:
            break
        F = field(p, k)
        searched.append(k)
        rcoeffs = _univariate(rad, F)
        cf, cg = f.coefficients_in(1), g.coefficients_in(1)
        for x0 in F.roots(rcoeffs):
            if F.degree_of(x0) != k:
                continue
            x_roots_found += 1
        for x0 in F.roots(rcoeffs):
            fy = _specialize(cf, x0, F)
            gy = _specialize(cg, x0, F)
            h = F.pgcd(fy, gy)
            if not h:
                raise NonIsolatedSingularitiesError("f and g vanish on a whole fibre")
            if len(h) <= 1:
                continue
            for y0 in F.roots(h):
                kk = lcm(F.degree_of(x0), F.degree_of(y0))
                if kk == k:
                    points.append(((x0, y0), k))
    residual = rad.degree(0) - x_roots_found if rad.degree(0) > 0 else 0
    return points, residual, searched


def _univariate(a: Poly, F) -> list[int]:
    n = max(a.degree(0), 0)
    out = [0] * (n + 1)
    for e, c in a.terms.items():
        out[e[0]] = F.from_int(c)
    return out


def _specialize(coeffs: Mapping[int, Poly], x0: int, F) -> list[int]:
    n = max(coeffs) if coeffs else 0
    out = [0] * (n + 1)
    for k, c in coeffs.items():
        out[k] = eval_gf(c, (x0, 0), F)
    return F.ptrim(out)


def _in_chart(atlas: SurfaceAtlas, point, k: int, here: str, other: str) -> bool:
    F = field(atlas.p, k)
    for r in atlas.transition(here, other).values():
        if eval_gf(r.den, point, F) == 0:
            return False
    return True


def singular_locus(delta: Derivation, atlas: SurfaceAtlas, k_max: int = 4) -> SingularLocusReport:
    report = SingularLocusReport()
    seen_charts: list[str] = []
    for c in atlas.charts:
        nd = normalize(transport(delta, atlas, c.id))
        pts, residual, searched = common_zeros(nd.f, nd.g, k_max)
        found = []
        for coords, k in pts:
            dup = next((prev for prev in seen_charts if _in_chart(atlas, coords, k, c.id, prev)), None)
            found.append(SingularPoint(c.id, coords, k, dup))
        report.charts[c.id] = ChartLocus(c.id, nd.f, nd.g, found, residual, searched)
        seen_charts.append(c.id)
    return report
