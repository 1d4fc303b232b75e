"""Exact arithmetic over F_p: sparse multivariate polynomials and rational functions.

Polynomials are immutable maps from exponent tuples to nonzero residues in
``[0, p)``.  Terms are ordered graded-lexicographically with respect to the
declared variable order, which fixes printing, serialization and the notion
of leading coefficient used for normalizing gcds and denominators.

Text grammar (``Poly.parse`` / ``RatFunc.parse``)::

    expr   := term (('+' | '-') term)*
    term   := factor (('*' | '/') factor)*        # implicit '*' between adjacent factors
    factor := ('-' | '+') factor | atom ('^' INT)?
    atom   := INT | NAME | '(' expr ')'

``/`` is only accepted by ``RatFunc.parse``.  Canonical output looks like
``x^2*y + 2*y^3``: terms in descending grlex order, coefficients as least
non-negative residues, a coefficient of 1 omitted unless the term is constant.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from functools import reduce
from typing import Iterable, Mapping, Sequence

MAX_EXPONENT = 2**31 - 1


class DegenerateInputError(ValueError):
    pass


class InvalidSubstitutionError(ValueError):
    pass


class ParseError(ValueError):
    def __init__(self, message: str, position: int):
        super().__init__(f"{message} at position {position}")
        self.position = position


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    if n % 2 == 0:
        return n == 2
    f = 3
    while f * f <= n:
        if n % f == 0:
            return False
        f += 2
    return True


@dataclass(frozen=True)
class PrimeField:
    """The prime field F_p with elements represented in ``[0, p)``."""

    p: int

    def __post_init__(self):
        if not (2 <= self.p <= 2**31) or not is_prime(self.p):
            raise ValueError(f"characteristic must be a prime in [2, 2^31], got {self.p}")

    def __call__(self, a: int) -> int:
        return a % self.p

    def inv(self, a: int) -> int:
        a %= self.p
        if a == 0:
            raise ZeroDivisionError("0 has no inverse in F_p")
        return pow(a, -1, self.p)

    def elements(self) -> range:
        return range(self.p)


def _grlex_key(e: tuple[int, ...]) -> tuple:
    return (sum(e), e)


def _check_exponent(e: int) -> int:
    if e > MAX_EXPONENT:
        raise OverflowError(f"exponent {e} exceeds {MAX_EXPONENT}")
    return e


class Poly:
    """Sparse polynomial over F_p in a fixed, ordered tuple of variables."""

    __slots__ = ("vars", "p", "terms", "_hash")

    def __init__(self, variables: Sequence[str], p: int, terms: Mapping[tuple, int] | None = None):
        self.vars = tuple(variables)
        self.p = p
        clean = {}
        n = len(self.vars)
        for e, c in (terms or {}).items():
            c %= p
            if c:
                if len(e) != n:
                    raise ValueError(f"exponent {e} does not match variables {self.vars}")
                clean[tuple(e)] = c
        self.terms = clean
        self._hash = None

    @classmethod
    def _raw(cls, variables: tuple, p: int, terms: dict) -> "Poly":
        # terms already reduced and free of zeros
        obj = cls.__new__(cls)
        obj.vars = variables
        obj.p = p
        obj.terms = terms
        obj._hash = None
        return obj

    # construction helpers

    @classmethod
    def const(cls, c: int, variables: Sequence[str], p: int) -> "Poly":
        return cls(variables, p, {(0,) * len(variables): c})

    @classmethod
    def var(cls, name: str, variables: Sequence[str], p: int) -> "Poly":
        variables = tuple(variables)
        e = [0] * len(variables)
        e[variables.index(name)] = 1
        return cls(variables, p, {tuple(e): 1})

    @classmethod
    def monomial(cls, exps: Sequence[int], variables: Sequence[str], p: int, c: int = 1) -> "Poly":
        return cls(variables, p, {tuple(exps): c})

    @classmethod
    def parse(cls, text: str, variables: Sequence[str], p: int) -> "Poly":
        r = _Parser(text, tuple(variables), p, allow_division=False).parse()
        return r.num

    def zero(self) -> "Poly":
        return Poly._raw(self.vars, self.p, {})

    def one(self) -> "Poly":
        return Poly._raw(self.vars, self.p, {(0,) * len(self.vars): 1})

    def constant(self, c: int) -> "Poly":
        return Poly.const(c, self.vars, self.p)

    # basic queries

    def is_zero(self) -> bool:
        return not self.terms

    def is_constant(self) -> bool:
        return all(not any(e) for e in self.terms)

    def constant_value(self) -> int:
        return self.terms.get((0,) * len(self.vars), 0)

    def total_degree(self) -> int:
        return max((sum(e) for e in self.terms), default=-1)

    def degree(self, v: str | int) -> int:
        i = v if isinstance(v, int) else self.vars.index(v)
        return max((e[i] for e in self.terms), default=-1)

    def sorted_terms(self) -> list[tuple[tuple, int]]:
        return sorted(self.terms.items(), key=lambda t: _grlex_key(t[0]), reverse=True)

    def leading_term(self) -> tuple[tuple, int]:
        if not self.terms:
            raise DegenerateInputError("zero polynomial has no leading term")
        e = max(self.terms, key=_grlex_key)
        return e, self.terms[e]

    def leading_coefficient(self) -> int:
        return self.leading_term()[1]

    def monic(self) -> "Poly":
        if not self.terms:
            return self
        inv = pow(self.leading_coefficient(), -1, self.p)
        return self.scale(inv)

    def _compat(self, other: "Poly"):
        if self.vars != other.vars or self.p != other.p:
            raise ValueError(f"incompatible rings: {self.vars}/F_{self.p} vs {other.vars}/F_{other.p}")

    def _coerce(self, other) -> "Poly":
        if isinstance(other, Poly):
            self._compat(other)
            return other
        if isinstance(other, int):
            return self.constant(other)
        return NotImplemented

    # arithmetic

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        p = self.p
        out = dict(self.terms)
        for e, c in other.terms.items():
            s = (out.get(e, 0) + c) % p
            if s:
                out[e] = s
            else:
                out.pop(e, None)
        return Poly._raw(self.vars, p, out)

    __radd__ = __add__

    def __neg__(self):
        p = self.p
        return Poly._raw(self.vars, p, {e: p - c for e, c in self.terms.items()})

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def scale(self, c: int) -> "Poly":
        p = self.p
        c %= p
        if c == 0:
            return self.zero()
        return Poly._raw(self.vars, p, {e: (v * c) % p for e, v in self.terms.items()})

    def __mul__(self, other):
        if isinstance(other, int):
            return self.scale(other)
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        p = self.p
        out: dict = {}
        get = out.get
        for e1, c1 in self.terms.items():
            for e2, c2 in other.terms.items():
                e = tuple(a + b for a, b in zip(e1, e2))
                out[e] = (get(e, 0) + c1 * c2) % p
        return Poly._raw(self.vars, p, {e: c for e, c in out.items() if c})

    __rmul__ = __mul__

    def __pow__(self, n: int):
        if n < 0:
            raise ValueError("negative power of a polynomial")
        result = self.one()
        base = self
        while n:
            if n & 1:
                result = result * base
            n >>= 1
            if n:
                base = base * base
        return result

    def __eq__(self, other):
        if isinstance(other, int):
            return self == self.constant(other)
        if not isinstance(other, Poly):
            return NotImplemented
        return self.vars == other.vars and self.p == other.p and self.terms == other.terms

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.vars, self.p, frozenset(self.terms.items())))
        return self._hash

    def __bool__(self):
        return bool(self.terms)

    # calculus and evaluation

    def diff(self, v: str | int) -> "Poly":
        i = v if isinstance(v, int) else self._index(v)
        p = self.p
        out = {}
        for e, c in self.terms.items():
            k = e[i]
            if k % p:
                ne = e[:i] + (k - 1,) + e[i + 1:]
                out[ne] = (c * k) % p
        return Poly._raw(self.vars, p, out)

    def _index(self, v: str) -> int:
        try:
            return self.vars.index(v)
        except ValueError:
            raise KeyError(f"unknown variable {v!r} (ring variables {self.vars})") from None

    def evaluate(self, values: Sequence, one=1, zero=0):
        """Evaluate at a point whose coordinates support + and * (ints mod p or extension elements)."""
        total = zero
        for e, c in self.terms.items():
            t = one * c
            for x, k in zip(values, e):
                if k:
                    t = t * (x ** k)
            total = total + t
        return total

    def change_ring(self, variables: Sequence[str]) -> "Poly":
        """Re-embed in a ring whose variables contain all variables actually used."""
        variables = tuple(variables)
        idx = []
        for i, v in enumerate(self.vars):
            if v in variables:
                idx.append(variables.index(v))
            else:
                idx.append(None)
        out = {}
        for e, c in self.terms.items():
            ne = [0] * len(variables)
            for i, k in enumerate(e):
                if k:
                    if idx[i] is None:
                        raise ValueError(f"variable {self.vars[i]!r} is not in {variables}")
                    ne[idx[i]] = k
            out[tuple(ne)] = c
        return Poly._raw(variables, self.p, out)

    def used_vars(self) -> set[str]:
        return {v for i, v in enumerate(self.vars) if any(e[i] for e in self.terms)}

    def coefficients_in(self, i: int) -> dict[int, "Poly"]:
        """Coefficients as a polynomial in variable index ``i`` (same ring, x_i eliminated)."""
        out: dict[int, dict] = {}
        for e, c in self.terms.items():
            k = e[i]
            out.setdefault(k, {})[e[:i] + (0,) + e[i + 1:]] = c
        return {k: Poly._raw(self.vars, self.p, t) for k, t in out.items()}

    def substitute(self, images: Mapping[str, "RatFunc"]) -> "RatFunc":
        return RatFunc.from_poly(self).substitute(images)

    # text / json

    def __str__(self):
        return format_poly(self)

    def __repr__(self):
        return f"Poly({str(self)!r}, vars={self.vars}, p={self.p})"

    def to_json(self) -> dict:
        return {
            "p": self.p,
            "vars": list(self.vars),
            "terms": [[list(e), c] for e, c in self.sorted_terms()],
        }

    @classmethod
    def from_json(cls, data: Mapping) -> "Poly":
        return cls(data["vars"], data["p"], {tuple(e): c for e, c in data["terms"]})


def format_poly(a: Poly) -> str:
    if a.is_zero():
        return "0"
    parts = []
    for e, c in a.sorted_terms():
        mono = "*".join(
            v if k == 1 else f"{v}^{k}" for v, k in zip(a.vars, e) if k
        )
        if not mono:
            parts.append(str(c))
        elif c == 1:
            parts.append(mono)
        else:
            parts.append(f"{c}*{mono}")
    return " + ".join(parts)


# --- exact division and gcd -------------------------------------------------


def divexact(a: Poly, b: Poly) -> Poly:
    """Quotient a/b, raising ArithmeticError if b does not divide a."""
    a._compat(b)
    if b.is_zero():
        raise ZeroDivisionError("division by the zero polynomial")
    p = a.p
    eb, cb = b.leading_term()
    inv = pow(cb, -1, p)
    bterms = list(b.terms.items())
    rem = dict(a.terms)
    q = {}
    while rem:
        er = max(rem, key=_grlex_key)
        cr = rem[er]
        de = tuple(x - y for x, y in zip(er, eb))
        if any(k < 0 for k in de):
            raise ArithmeticError("inexact polynomial division")
        cq = (cr * inv) % p
        q[de] = cq
        for e2, c2 in bterms:
            e = tuple(x + y for x, y in zip(de, e2))
            s = (rem.get(e, 0) - cq * c2) % p
            if s:
                rem[e] = s
            else:
                rem.pop(e, None)
    return Poly._raw(a.vars, p, q)


def divides(b: Poly, a: Poly) -> bool:
    try:
        divexact(a, b)
    except ArithmeticError:
        return False
    return True


def _prem(a: Poly, b: Poly, i: int) -> Poly:
    """A nonzero-subring-multiple of the remainder of a by b as polynomials in x_i."""
    db = b.degree(i)
    cb = b.coefficients_in(i)
    lcb = cb[db]
    r = a
    while not r.is_zero() and r.degree(i) >= db:
        dr = r.degree(i)
        lcr = r.coefficients_in(i)[dr]
        shift = [0] * len(a.vars)
        shift[i] = dr - db
        mono = Poly._raw(a.vars, a.p, {tuple(shift): 1})
        r = lcb * r - lcr * mono * b
    return r


def _content(a: Poly, i: int) -> Poly:
    return reduce(lambda u, v: _gcd(u, v, i - 1), a.coefficients_in(i).values())


def _primitive(a: Poly, i: int) -> Poly:
    if a.is_zero():
        return a
    return divexact(a, _content(a, i))


def _gcd(a: Poly, b: Poly, i: int) -> Poly:
    # gcd of polynomials involving only variables 0..i, up to a unit
    if a.is_zero():
        return b
    if b.is_zero():
        return a
    if i < 0 or a.is_constant() or b.is_constant():
        return a.one()
    if a.degree(i) <= 0 and b.degree(i) <= 0:
        return _gcd(a, b, i - 1)
    ca, cb = _content(a, i), _content(b, i)
    c = _gcd(ca, cb, i - 1)
    A, B = divexact(a, ca), divexact(b, cb)
    if A.degree(i) < B.degree(i):
        A, B = B, A
    while not B.is_zero() and B.degree(i) > 0:
        R = _prem(A, B, i)
        A, B = B, _primitive(R, i)
    g = A if B.is_zero() else a.one()
    return c * _primitive(g, i)


def poly_gcd(a: Poly, b: Poly) -> Poly:
    """Monic gcd by content / primitive-part recursion on the last variable."""
    a._compat(b)
    if a.is_zero() and b.is_zero():
        raise DegenerateInputError("gcd of two zero polynomials")
    return _gcd(a, b, len(a.vars) - 1).monic()


def poly_gcd_many(polys: Iterable[Poly]) -> Poly:
    polys = [q for q in polys if not q.is_zero()]
    if not polys:
        raise DegenerateInputError("gcd of zero polynomials")
    return reduce(poly_gcd, polys, polys[0]).monic()


# --- rational functions -----------------------------------------------------


class RatFunc:
    """Reduced fraction num/den with monic (grlex) denominator."""

    __slots__ = ("num", "den")

    def __init__(self, num: Poly, den: Poly | None = None, *, reduced: bool = False):
        if den is None:
            den = num.one()
        num._compat(den)
        if den.is_zero():
            raise ZeroDivisionError("rational function with zero denominator")
        if num.is_zero():
            self.num, self.den = num, num.one()
            return
        if not reduced and not den.is_constant():
            g = poly_gcd(num, den)
            if not g.is_constant():
                num, den = divexact(num, g), divexact(den, g)
        lc = den.leading_coefficient()
        if lc != 1:
            inv = pow(lc, -1, num.p)
            num, den = num.scale(inv), den.scale(inv)
        self.num, self.den = num, den

    @classmethod
    def from_poly(cls, a: Poly) -> "RatFunc":
        return cls(a, a.one(), reduced=True)

    @classmethod
    def parse(cls, text: str, variables: Sequence[str], p: int) -> "RatFunc":
        return _Parser(text, tuple(variables), p, allow_division=True).parse()

    @property
    def vars(self):
        return self.num.vars

    @property
    def p(self):
        return self.num.p

    def is_zero(self) -> bool:
        return self.num.is_zero()

    def is_poly(self) -> bool:
        return self.den.is_constant()

    def _coerce(self, other):
        if isinstance(other, RatFunc):
            self.num._compat(other.num)
            return other
        if isinstance(other, Poly):
            return RatFunc.from_poly(other)
        if isinstance(other, int):
            return RatFunc.from_poly(self.num.constant(other))
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        if self.den == other.den:
            return RatFunc(self.num + other.num, self.den)
        return RatFunc(self.num * other.den + other.num * self.den, self.den * other.den)

    __radd__ = __add__

    def __neg__(self):
        return RatFunc(-self.num, self.den, reduced=True)

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return RatFunc(self.num * other.num, self.den * other.den)

    __rmul__ = __mul__

    def inverse(self) -> "RatFunc":
        if self.is_zero():
            raise ZeroDivisionError("inverse of zero rational function")
        return RatFunc(self.den, self.num, reduced=True)

    def __truediv__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return self * other.inverse()

    def __rtruediv__(self, other):
        return self._coerce(other) * self.inverse()

    def __pow__(self, n: int):
        if n < 0:
            return self.inverse() ** (-n)
        return RatFunc(self.num ** n, self.den ** n, reduced=True)

    def __eq__(self, other):
        if isinstance(other, (int, Poly)):
            other = self._coerce(other)
        if not isinstance(other, RatFunc):
            return NotImplemented
        return self.num == other.num and self.den == other.den

    def __hash__(self):
        return hash((self.num, self.den))

    def diff(self, v: str) -> "RatFunc":
        n, d = self.num, self.den
        if d.is_constant():
            return RatFunc(n.diff(v), d, reduced=True)
        return RatFunc(n.diff(v) * d - n * d.diff(v), d * d)

    def substitute(self, images: Mapping[str, "RatFunc"]) -> "RatFunc":
        """Ring homomorphism sending each variable to the given rational function.

        Both numerator and denominator are cleared against a shared denominator
        built from the images' denominators, so only one gcd is taken.
        """
        missing = self.num.used_vars() | self.den.used_vars()
        missing -= set(images)
        if missing:
            raise InvalidSubstitutionError(f"no image for variables {sorted(missing)}")
        imgs = [images.get(v) for v in self.vars]
        target = next(iter(images.values()))
        degs = [max(self.num.degree(i), self.den.degree(i), 0) for i in range(len(self.vars))]
        num = _clear(self.num, imgs, degs, target)
        den = _clear(self.den, imgs, degs, target)
        if den.is_zero():
            raise InvalidSubstitutionError("denominator vanishes identically under substitution")
        return RatFunc(num, den)

    def __str__(self):
        if self.den.is_constant():
            return str(self.num)
        n = str(self.num)
        if len(self.num.terms) > 1:
            n = f"({n})"
        return f"{n}/({self.den})"

    def __repr__(self):
        return f"RatFunc({str(self)!r}, vars={self.vars}, p={self.p})"

    def to_json(self) -> dict:
        return {"num": self.num.to_json(), "den": self.den.to_json()}

    @classmethod
    def from_json(cls, data: Mapping) -> "RatFunc":
        return cls(Poly.from_json(data["num"]), Poly.from_json(data["den"]))


def _clear(a: Poly, imgs: list, degs: list[int], target: RatFunc) -> Poly:
    # a(n_1/d_1, ...) * prod d_i^degs[i], as a polynomial in the target ring
    tnum = target.num
    result = tnum.zero()
    if a.is_zero():
        return result
    cache: dict = {}

    def power(kind, i, k):
        key = (kind, i, k)
        if key not in cache:
            base = imgs[i].num if kind == 0 else imgs[i].den
            cache[key] = base ** k
        return cache[key]

    for e, c in a.terms.items():
        t = tnum.constant(c)
        for i, k in enumerate(e):
            if degs[i] <= 0:
                continue
            if k:
                t = t * power(0, i, k)
            if degs[i] - k:
                t = t * power(1, i, degs[i] - k)
        result = result + t
    return result


def ratfunc_ring(variables: Sequence[str], p: int):
    """Return the generators of F_p(variables) as RatFuncs, in order."""
    return tuple(RatFunc.from_poly(Poly.var(v, variables, p)) for v in variables)


# --- parser -----------------------------------------------------------------

_TOKEN = re.compile(r"\s*(?:(\d+)|([A-Za-z_][A-Za-z_0-9]*)|(\S))")


class _Parser:
    def __init__(self, text: str, variables: tuple, p: int, allow_division: bool):
        self.text = text
        self.vars = variables
        self.p = p
        self.allow_division = allow_division
        self.tokens = []
        pos = 0
        while pos < len(text):
            m = _TOKEN.match(text, pos)
            if not m or m.end() == pos:
                break
            if m.group(0).strip():
                start = m.start(m.lastindex)
                kind = ("int", "name", "op")[m.lastindex - 1]
                self.tokens.append((kind, m.group(m.lastindex), start))
            pos = m.end()
        self.i = 0

    def peek(self):
        return self.tokens[self.i] if self.i < len(self.tokens) else ("end", "", len(self.text))

    def take(self):
        t = self.peek()
        self.i += 1
        return t

    def parse(self) -> RatFunc:
        if not self.tokens:
            raise ParseError("empty expression", 0)
        r = self.expr()
        kind, val, pos = self.peek()
        if kind != "end":
            raise ParseError(f"unexpected token {val!r}", pos)
        return r

    def expr(self) -> RatFunc:
        r = self.term()
        while self.peek()[1] in ("+", "-") and self.peek()[0] == "op":
            op = self.take()[1]
            t = self.term()
            r = r + t if op == "+" else r - t
        return r

    def term(self) -> RatFunc:
        r = self.factor()
        while True:
            kind, val, pos = self.peek()
            if kind == "op" and val in ("*", "/"):
                self.take()
                f = self.factor()
                if val == "/":
                    if not self.allow_division:
                        raise ParseError("division is not allowed in a polynomial", pos)
                    if f.is_zero():
                        raise ParseError("division by zero", pos)
                    r = r / f
                else:
                    r = r * f
            elif kind in ("int", "name") or (kind == "op" and val == "("):
                r = r * self.factor()
            else:
                return r

    def factor(self) -> RatFunc:
        kind, val, pos = self.peek()
        if kind == "op" and val in ("-", "+"):
            self.take()
            f = self.factor()
            return -f if val == "-" else f
        a = self.atom()
        if self.peek()[1] == "^" and self.peek()[0] == "op":
            self.take()
            kind, val, pos = self.take()
            if kind != "int":
                raise ParseError("expected integer exponent", pos)
            a = a ** _check_exponent(int(val))
        return a

    def atom(self) -> RatFunc:
        kind, val, pos = self.take()
        if kind == "int":
            return RatFunc.from_poly(Poly.const(int(val), self.vars, self.p))
        if kind == "name":
            if val not in self.vars:
                raise ParseError(f"unknown variable {val!r}", pos)
            return RatFunc.from_poly(Poly.var(val, self.vars, self.p))
        if kind == "op" and val == "(":
            r = self.expr()
            k2, v2, p2 = self.take()
            if v2 != ")":
                raise ParseError("expected ')'", p2)
            return r
        raise ParseError(f"unexpected token {val!r}" if kind != "end" else "unexpected end of input", pos)
