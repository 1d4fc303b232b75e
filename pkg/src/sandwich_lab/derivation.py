"""Rational vector fields f d/dx + g d/dy on a two-dimensional chart."""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Mapping

from .field_poly import (
    ParseError,
    Poly,
    RatFunc,
    divexact,
    poly_gcd,
)


class ChartMismatchError(ValueError):
    pass


class NotPClosedError(ValueError):
    pass


class ProjectorUndefinedError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class Derivation:
    """delta = coeff_x * d/d(vars[0]) + coeff_y * d/d(vars[1]) on chart ``chart_id``."""

    chart_id: str
    coeff_x: RatFunc
    coeff_y: RatFunc

    def __post_init__(self):
        self.coeff_x.num._compat(self.coeff_y.num)
        if len(self.coeff_x.vars) != 2:
            raise ValueError("derivations live on two-dimensional charts")
        if self.coeff_x.is_zero() and self.coeff_y.is_zero():
            raise ValueError("the zero derivation does not define a sandwich")

    @classmethod
    def from_polys(cls, chart_id: str, f: Poly, g: Poly) -> "Derivation":
        return cls(chart_id, RatFunc.from_poly(f), RatFunc.from_poly(g))

    @classmethod
    def parse(cls, text: str, variables=("x", "y"), p: int = 2, chart_id: str | None = None) -> "Derivation":
        return parse_derivation(text, variables, p, chart_id)

    @property
    def vars(self) -> tuple[str, str]:
        return self.coeff_x.vars

    @property
    def p(self) -> int:
        return self.coeff_x.p

    def coeffs(self) -> tuple[RatFunc, RatFunc]:
        return self.coeff_x, self.coeff_y

    def is_polynomial(self) -> bool:
        return self.coeff_x.is_poly() and self.coeff_y.is_poly()

    def poly_coeffs(self) -> tuple[Poly, Poly]:
        if not self.is_polynomial():
            raise ValueError("derivation has non-polynomial coefficients")
        return _as_poly(self.coeff_x), _as_poly(self.coeff_y)

    def scale(self, beta: RatFunc) -> "Derivation":
        return Derivation(self.chart_id, beta * self.coeff_x, beta * self.coeff_y)

    def __eq__(self, other):
        if not isinstance(other, Derivation):
            return NotImplemented
        return (self.chart_id, self.coeff_x, self.coeff_y) == (other.chart_id, other.coeff_x, other.coeff_y)

    def __hash__(self):
        return hash((self.chart_id, self.coeff_x, self.coeff_y))

    def __call__(self, r):
        return apply(self, r)

    def __str__(self):
        x, y = self.vars
        parts = []
        for c, v in ((self.coeff_x, x), (self.coeff_y, y)):
            if c.is_zero():
                continue
            s = str(c)
            if c == 1:
                parts.append(f"d{v}")
            else:
                parts.append(f"({s}) d{v}" if (" " in s) else f"{s} d{v}")
        return " + ".join(parts) + f" @ {self.chart_id}"

    def to_json(self) -> dict:
        return {
            "chart": self.chart_id,
            "vars": list(self.vars),
            "p": self.p,
            "coeff_x": self.coeff_x.to_json(),
            "coeff_y": self.coeff_y.to_json(),
            "text": str(self),
        }

    @classmethod
    def from_json(cls, data: Mapping) -> "Derivation":
        return cls(data["chart"], RatFunc.from_json(data["coeff_x"]), RatFunc.from_json(data["coeff_y"]))


@dataclass(frozen=True)
class NormalizedDerivation:
    """delta = content * (f d/dx + g d/dy) with gcd(f, g) = 1 and a monic leading coefficient."""

    content: RatFunc
    f: Poly
    g: Poly

    def derivation(self, chart_id: str) -> Derivation:
        return Derivation.from_polys(chart_id, self.f, self.g)

    def pair(self) -> tuple[Poly, Poly]:
        return self.f, self.g


def _as_poly(r: RatFunc) -> Poly:
    c = r.den.constant_value()
    return r.num if c == 1 else r.num.scale(pow(c, -1, r.p))


def _check_ring(delta: Derivation, r):
    if r.vars != delta.vars or r.p != delta.p:
        raise ChartMismatchError(
            f"function in {r.vars}/F_{r.p} applied to derivation on chart {delta.chart_id} {delta.vars}"
        )


def apply_poly(f: Poly, g: Poly, r: Poly) -> Poly:
    """(f d/dx + g d/dy)(r) for polynomial data."""
    return f * r.diff(0) + g * r.diff(1)


def apply(delta: Derivation, r):
    if isinstance(r, int):
        return RatFunc.from_poly(delta.coeff_x.num.zero())
    _check_ring(delta, r)
    if isinstance(r, Poly):
        if delta.is_polynomial():
            f, g = delta.poly_coeffs()
            return apply_poly(f, g, r)
        r = RatFunc.from_poly(r)
    x, y = delta.vars
    return delta.coeff_x * r.diff(x) + delta.coeff_y * r.diff(y)


def iterate(delta: Derivation, r, n: int):
    for _ in range(n):
        r = apply(delta, r)
    return r


def normalize(delta: Derivation) -> NormalizedDerivation:
    cx, cy = delta.coeff_x, delta.coeff_y
    lcm = _lcm(cx.den, cy.den)
    f0 = cx.num * divexact(lcm, cx.den)
    g0 = cy.num * divexact(lcm, cy.den)
    common = poly_gcd(f0, g0)
    f, g = divexact(f0, common), divexact(g0, common)
    lead = (f if not f.is_zero() else g).leading_coefficient()
    inv = pow(lead, -1, delta.p)
    f, g = f.scale(inv), g.scale(inv)
    content = RatFunc(common.scale(lead), lcm)
    return NormalizedDerivation(content, f, g)


def _lcm(a: Poly, b: Poly) -> Poly:
    if a.is_constant():
        return b
    if b.is_constant():
        return a
    return divexact(a * b, poly_gcd(a, b))


def normalized_derivation(delta: Derivation) -> Derivation:
    """The coprime polynomial representative f d/dx + g d/dy of the class of delta."""
    return normalize(delta).derivation(delta.chart_id)


def power_p_values(delta: Derivation):
    """(delta^p(x), delta^p(y)) computed by p-fold application to the coordinates."""
    p = delta.p
    if delta.is_polynomial():
        f, g = delta.poly_coeffs()
        return (iterate_poly(f, g, f, p - 1), iterate_poly(f, g, g, p - 1))
    return (iterate(delta, delta.coeff_x, p - 1), iterate(delta, delta.coeff_y, p - 1))


def iterate_poly(f: Poly, g: Poly, r: Poly, n: int) -> Poly:
    for _ in range(n):
        if r.is_zero():
            break
        r = apply_poly(f, g, r)
    return r


def power_p(delta: Derivation) -> Derivation | None:
    """delta^p as a derivation, or None when delta^p = 0."""
    vx, vy = power_p_values(delta)
    vx = vx if isinstance(vx, RatFunc) else RatFunc.from_poly(vx)
    vy = vy if isinstance(vy, RatFunc) else RatFunc.from_poly(vy)
    if vx.is_zero() and vy.is_zero():
        return None
    return Derivation(delta.chart_id, vx, vy)


def p_closed_witness_poly(f: Poly, g: Poly) -> RatFunc | None:
    """h with (f d/dx + g d/dy)^p = h (f d/dx + g d/dy), or None if no such h exists."""
    p = f.p
    px = iterate_poly(f, g, f, p - 1)
    py = iterate_poly(f, g, g, p - 1)
    if px * g != py * f:
        return None
    if not f.is_zero():
        return RatFunc(px, f)
    return RatFunc(py, g)


def is_p_closed_poly(f: Poly, g: Poly) -> bool:
    p = f.p
    px = iterate_poly(f, g, f, p - 1)
    py = iterate_poly(f, g, g, p - 1)
    return px * g == py * f


def p_closed_witness(delta: Derivation) -> RatFunc | None:
    """Return h with delta^p = h * delta, or None when delta is not p-closed.

    The proportionality test is done on the coprime form f, g by cross
    multiplication; h itself is then read off the original coefficients.
    """
    nd = normalize(delta)
    vx, vy = power_p_values(delta)
    if isinstance(vx, Poly):
        vx, vy = RatFunc.from_poly(vx), RatFunc.from_poly(vy)
    if vx * nd.g != vy * nd.f:
        return None
    if not delta.coeff_x.is_zero():
        return vx / delta.coeff_x
    return vy / delta.coeff_y


def is_p_closed(delta: Derivation) -> bool:
    return p_closed_witness(delta) is not None


def is_nilpotent(delta: Derivation) -> bool:
    h = p_closed_witness(delta)
    if h is None:
        raise NotPClosedError(f"{delta} is not p-closed")
    return h.is_zero()


def is_multiplicative(delta: Derivation) -> bool:
    """True when delta^p = delta exactly."""
    vx, vy = power_p_values(delta)
    if isinstance(vx, Poly):
        vx, vy = RatFunc.from_poly(vx), RatFunc.from_poly(vy)
    return vx == delta.coeff_x and vy == delta.coeff_y


def splitting_projector(delta: Derivation, r: Poly) -> Poly:
    """r - delta^(p-1)(r): the projection of the chart ring onto ker delta when delta^p = delta."""
    if not delta.is_polynomial():
        raise ProjectorUndefinedError("projector needs polynomial coefficients on the chart")
    if not is_multiplicative(delta):
        raise ProjectorUndefinedError(f"{delta} does not satisfy delta^p = delta")
    _check_ring(delta, r)
    f, g = delta.poly_coeffs()
    return r - iterate_poly(f, g, r, delta.p - 1)


_DTOKEN = re.compile(r"\bd([A-Za-z_][A-Za-z_0-9]*)\b")


def parse_derivation(text: str, variables=("x", "y"), p: int = 2, chart_id: str | None = None) -> Derivation:
    """Parse ``f dx + g dy [@ chart]``.

    Each ``d<var>`` token multiplies the text since the previous ``d``-token
    (at parenthesis depth 0), so sums inside a coefficient need parentheses
    unless they are the whole coefficient of that term.
    """
    body, _, chart = text.partition("@")
    chart = chart.strip() or chart_id or "U"
    variables = tuple(variables)
    coeffs = {v: RatFunc.from_poly(Poly.const(0, variables, p)) for v in variables}
    start = 0
    found = False
    for m in _DTOKEN.finditer(body):
        if body[: m.start()].count("(") != body[: m.start()].count(")"):
            continue
        v = m.group(1)
        if v not in variables:
            raise ParseError(f"unknown differential d{v}", m.start())
        seg = body[start:m.start()].strip()
        if seg.endswith("*"):
            seg = seg[:-1].strip()
            if seg.lstrip("+-").strip() == "":
                raise ParseError("'*' with no left operand", start + len(body[start:m.start()]) - 1)
        if seg in ("", "+"):
            c = RatFunc.from_poly(Poly.const(1, variables, p))
        elif seg == "-":
            c = RatFunc.from_poly(Poly.const(-1, variables, p))
        else:
            try:
                c = RatFunc.parse(seg, variables, p)
            except ParseError as err:
                raise ParseError(str(err).rsplit(" at position", 1)[0], start + err.position) from None
        coeffs[v] = coeffs[v] + c
        start = m.end()
        found = True
    if not found:
        raise ParseError("no d<var> token found", 0)
    if body[start:].strip():
        raise ParseError("trailing text after last differential", start)
    return Derivation(chart, coeffs[variables[0]], coeffs[variables[1]])
