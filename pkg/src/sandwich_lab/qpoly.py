"""Polynomials and unreduced fractions over GF(p^k).

Used where coordinate changes need roots outside F_p.  Fractions are never
reduced by a gcd; equality questions are settled by cross-multiplication.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from .field_poly import Poly
from .gf import GF, field


class QPoly:
    __slots__ = ("F", "n", "terms")

    def __init__(self, F: GF, n: int, terms: dict | None = None):
        self.F, self.n = F, n
        self.terms = {e: c for e, c in (terms or {}).items() if c}

    @classmethod
    def const(cls, F: GF, n: int, c: int) -> "QPoly":
        return cls(F, n, {(0,) * n: c})

    @classmethod
    def var(cls, F: GF, n: int, i: int) -> "QPoly":
        e = [0] * n
        e[i] = 1
        return cls(F, n, {tuple(e): 1})

    @classmethod
    def lift(cls, P: Poly, F: GF | None = None) -> "QPoly":
        F = F or field(P.p, 1)
        return cls(F, len(P.vars), {e: F.from_int(c) for e, c in P.terms.items()})

    def is_zero(self) -> bool:
        return not self.terms

    def is_constant(self) -> bool:
        return all(not any(e) for e in self.terms)

    def constant_value(self) -> int:
        return self.terms.get((0,) * self.n, 0)

    def __add__(self, other: "QPoly") -> "QPoly":
        out = dict(self.terms)
        for e, c in other.terms.items():
            out[e] = self.F.add(out.get(e, 0), c)
        return QPoly(self.F, self.n, out)

    def __neg__(self) -> "QPoly":
        return QPoly(self.F, self.n, {e: self.F.neg(c) for e, c in self.terms.items()})

    def __sub__(self, other: "QPoly") -> "QPoly":
        return self + (-other)

    def __mul__(self, other: "QPoly") -> "QPoly":
        F = self.F
        out: dict = {}
        for e1, c1 in self.terms.items():
            for e2, c2 in other.terms.items():
                e = tuple(a + b for a, b in zip(e1, e2))
                out[e] = F.add(out.get(e, 0), F.mul(c1, c2))
        return QPoly(F, self.n, out)

    def scale(self, c: int) -> "QPoly":
        return QPoly(self.F, self.n, {e: self.F.mul(v, c) for e, v in self.terms.items()})

    def __pow__(self, k: int) -> "QPoly":
        out = QPoly.const(self.F, self.n, 1)
        base = self
        while k:
            if k & 1:
                out = out * base
            base = base * base
            k >>= 1
        return out

    def __eq__(self, other) -> bool:
        return isinstance(other, QPoly) and self.terms == other.terms

    def __hash__(self):
        return hash(frozenset(self.terms.items()))

    def diff(self, i: int) -> "QPoly":
        F = self.F
        out = {}
        for e, c in self.terms.items():
            if e[i]:
                ne = list(e)
                ne[i] -= 1
                out[tuple(ne)] = F.add(out.get(tuple(ne), 0), F.mul(c, F.from_int(e[i])))
        return QPoly(F, self.n, out)

    def degree(self, i: int) -> int:
        return max((e[i] for e in self.terms), default=-1)

    def total_degree(self) -> int:
        return max((sum(e) for e in self.terms), default=-1)

    def leading(self) -> tuple[tuple[int, ...], int]:
        e = max(self.terms, key=lambda t: (sum(t), t))
        return e, self.terms[e]

    def coefficients_in(self, i: int) -> dict[int, "QPoly"]:
        out: dict[int, dict] = {}
        for e, c in self.terms.items():
            ne = list(e)
            ne[i] = 0
            out.setdefault(e[i], {})[tuple(ne)] = c
        return {k: QPoly(self.F, self.n, t) for k, t in out.items()}

    def divexact(self, other: "QPoly") -> "QPoly":
        """Exact quotient; raises ArithmeticError when other does not divide self."""
        if other.is_zero():
            raise ZeroDivisionError("division by the zero polynomial")
        F = self.F
        le, lc = other.leading()
        inv = F.inv(lc)
        rem, quo = self, QPoly(F, self.n)
        while not rem.is_zero():
            e, c = rem.leading()
            if any(a < b for a, b in zip(e, le)):
                raise ArithmeticError("inexact polynomial division")
            t = QPoly(F, self.n, {tuple(a - b for a, b in zip(e, le)): F.mul(c, inv)})
            quo = quo + t
            rem = rem - t * other
        return quo

    def compose(self, subs: Sequence["Frac"]) -> "Frac":
        """Substitute fractions for the variables."""
        n = self.n
        tops = [max((e[i] for e in self.terms), default=0) for i in range(n)]
        cache: dict = {}

        def pw(which: str, i: int, k: int) -> QPoly:
            key = (which, i, k)
            if key not in cache:
                base = subs[i].num if which == "n" else subs[i].den
                cache[key] = base**k
            return cache[key]

        num = QPoly(self.F, subs[0].num.n)
        for e, c in self.terms.items():
            t = QPoly.const(self.F, subs[0].num.n, c)
            for i in range(n):
                t = t * pw("n", i, e[i]) * pw("d", i, tops[i] - e[i])
            num = num + t
        den = QPoly.const(self.F, subs[0].num.n, 1)
        for i in range(n):
            den = den * pw("d", i, tops[i])
        return Frac(num, den)

    def format(self, names: Sequence[str]) -> str:
        if not self.terms:
            return "0"
        parts = []
        for e in sorted(self.terms, key=lambda t: (sum(t), t), reverse=True):
            c = self.terms[e]
            mono = "*".join(
                (v if k == 1 else f"{v}^{k}") for v, k in zip(names, e) if k
            )
            cs = self.F.format(c)
            if " " in cs and mono:
                cs = f"({cs})"
            if not mono:
                parts.append(cs)
            elif c == 1:
                parts.append(mono)
            else:
                parts.append(f"{cs}*{mono}")
        return " + ".join(parts)


@dataclass(frozen=True, eq=False)
class Frac:
    num: QPoly
    den: QPoly

    def __post_init__(self):
        if self.den.is_zero():
            raise ZeroDivisionError("fraction with zero denominator")
        # absorb constant denominators
        if self.den.is_constant() and self.den.constant_value() != 1:
            inv = self.den.F.inv(self.den.constant_value())
            object.__setattr__(self, "num", self.num.scale(inv))
            object.__setattr__(self, "den", QPoly.const(self.den.F, self.den.n, 1))

    @classmethod
    def of(cls, P: QPoly) -> "Frac":
        return cls(P, QPoly.const(P.F, P.n, 1))

    def __add__(self, o: "Frac") -> "Frac":
        if self.den == o.den:
            return Frac(self.num + o.num, self.den)
        return Frac(self.num * o.den + o.num * self.den, self.den * o.den)

    def __neg__(self) -> "Frac":
        return Frac(-self.num, self.den)

    def __sub__(self, o: "Frac") -> "Frac":
        return self + (-o)

    def __mul__(self, o: "Frac") -> "Frac":
        return Frac(self.num * o.num, self.den * o.den)

    def __truediv__(self, o: "Frac") -> "Frac":
        if o.num.is_zero():
            raise ZeroDivisionError("division by a zero fraction")
        return Frac(self.num * o.den, self.den * o.num)

    def is_zero(self) -> bool:
        return self.num.is_zero()

    def diff(self, i: int) -> "Frac":
        return Frac(self.num.diff(i) * self.den - self.num * self.den.diff(i), self.den * self.den)

    def compose(self, subs: Sequence["Frac"]) -> "Frac":
        return self.num.compose(subs) / self.den.compose(subs)

    def equals(self, o: "Frac") -> bool:
        return (self.num * o.den - o.num * self.den).is_zero()

    def format(self, names: Sequence[str]) -> str:
        n = self.num.format(names)
        if self.den.is_constant():
            return n
        return f"({n})/({self.den.format(names)})"


def coordinate_fracs(F: GF, n: int = 2) -> list[Frac]:
    return [Frac.of(QPoly.var(F, n, i)) for i in range(n)]


def apply_field(fx: QPoly, gy: QPoly, r: Frac) -> Frac:
    """(fx d/dx + gy d/dy)(r) for a fraction r in the same two variables."""
    return Frac.of(fx) * r.diff(0) + Frac.of(gy) * r.diff(1)
