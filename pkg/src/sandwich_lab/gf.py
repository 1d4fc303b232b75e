"""Small extension fields F_{p^k} with table-driven multiplication.

Elements are ints in ``[0, p^k)`` read as base-p digit vectors, i.e. the
coefficients of a polynomial in the generator ``a`` reduced modulo a fixed
irreducible polynomial.  Intended for root search with ``p^k`` up to ~1e5.
"""

from __future__ import annotations

from functools import lru_cache
from itertools import product

MAX_ORDER = 200_000


def _polymulmod(a: list[int], b: list[int], mod: list[int], p: int) -> list[int]:
    # a, b: coefficient lists (low degree first) of length k; mod monic of degree k
    k = len(mod) - 1
    prod_ = [0] * (2 * k - 1)
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(b):
                prod_[i + j] = (prod_[i + j] + x * y) % p
    for d in range(len(prod_) - 1, k - 1, -1):
        c = prod_[d]
        if c:
            for j in range(k + 1):
                prod_[d - k + j] = (prod_[d - k + j] - c * mod[j]) % p
    return prod_[:k]


def _is_irreducible(mod: list[int], p: int) -> bool:
    # brute force: no monic factor of degree <= k/2 (k <= 4 in practice)
    k = len(mod) - 1
    if k == 1:
        return True
    for deg in range(1, k // 2 + 1):
        for tail in product(range(p), repeat=deg):
            div = list(tail) + [1]
            rem = list(mod)
            for d in range(k, deg - 1, -1):
                c = rem[d]
                if c:
                    for j in range(deg + 1):
                        rem[d - deg + j] = (rem[d - deg + j] - c * div[j]) % p
            if not any(rem[:deg]):
                return False
    return True


class GF:
    """The field with p^k elements."""

    def __init__(self, p: int, k: int):
        order = p**k
        if order > MAX_ORDER:
            raise ValueError(f"F_{p}^{k} has {order} elements, beyond the table limit {MAX_ORDER}")
        self.p, self.k, self.order = p, k, order
        self.modulus = self._find_modulus()
        self._build_tables()

    def _find_modulus(self) -> list[int]:
        p, k = self.p, self.k
        if k == 1:
            return [0, 1]
        for tail in product(range(p), repeat=k):
            mod = list(tail) + [1]
            if mod[0] and _is_irreducible(mod, p):
                # prefer a primitive modulus so that 'a' generates the unit group
                if self._generator_order(mod) == self.order - 1:
                    return mod
        raise RuntimeError("no primitive modulus found")

    def _generator_order(self, mod: list[int]) -> int:
        p, k = self.p, self.k
        one = [1] + [0] * (k - 1)
        gen = [0, 1] + [0] * (k - 2)
        cur = list(gen)
        n = 1
        while cur != one:
            cur = _polymulmod(cur, gen, mod, p)
            n += 1
            if n > self.order:
                return -1
        return n

    def _digits(self, n: int) -> list[int]:
        out = []
        for _ in range(self.k):
            n, r = divmod(n, self.p)
            out.append(r)
        return out

    def _undigits(self, ds: list[int]) -> int:
        n = 0
        for d in reversed(ds):
            n = n * self.p + d
        return n

    def _build_tables(self):
        p, k, q = self.p, self.k, self.order
        self.exp = [0] * (2 * (q - 1))
        self.log = [None] * q
        if k == 1:
            g = next(g for g in range(1, p) if _mult_order(g, p) == p - 1) if p > 2 else 1
            cur = 1
            for i in range(q - 1):
                self.exp[i] = cur
                self.log[cur] = i
                cur = cur * g % p
        else:
            gen = [0, 1] + [0] * (k - 2)
            cur = [1] + [0] * (k - 1)
            for i in range(q - 1):
                n = self._undigits(cur)
                self.exp[i] = n
                self.log[n] = i
                cur = _polymulmod(cur, gen, self.modulus, p)
        for i in range(q - 1, 2 * (q - 1)):
            self.exp[i] = self.exp[i - (q - 1)]
        self._digit_cache = [self._digits(n) for n in range(q)]

    # arithmetic on element indices

    def add(self, a: int, b: int) -> int:
        if self.k == 1:
            return (a + b) % self.p
        da, db = self._digit_cache[a], self._digit_cache[b]
        return self._undigits([(x + y) % self.p for x, y in zip(da, db)])

    def neg(self, a: int) -> int:
        if self.k == 1:
            return (-a) % self.p
        return self._undigits([(-x) % self.p for x in self._digit_cache[a]])

    def sub(self, a: int, b: int) -> int:
        return self.add(a, self.neg(b))

    def mul(self, a: int, b: int) -> int:
        if a == 0 or b == 0:
            return 0
        return self.exp[self.log[a] + self.log[b]]

    def inv(self, a: int) -> int:
        if a == 0:
            raise ZeroDivisionError("0 has no inverse")
        return self.exp[(self.order - 1 - self.log[a]) % (self.order - 1)]

    def pow(self, a: int, n: int) -> int:
        if a == 0:
            return 0 if n else 1
        return self.exp[(self.log[a] * n) % (self.order - 1)]

    def from_int(self, c: int) -> int:
        # embed the prime field: the constant digit
        return c % self.p

    def frobenius(self, a: int) -> int:
        return self.pow(a, self.p)

    def degree_of(self, a: int) -> int:
        """Degree over F_p of the smallest subfield containing a."""
        for j in range(1, self.k + 1):
            if self.k % j == 0 and self.pow(a, self.p**j) == a:
                return j
        return self.k

    def elements(self):
        return range(self.order)

    def format(self, a: int) -> str:
        if self.k == 1:
            return str(a)
        ds = self._digit_cache[a]
        parts = []
        for i in range(self.k - 1, -1, -1):
            c = ds[i]
            if not c:
                continue
            mono = "" if i == 0 else ("a" if i == 1 else f"a^{i}")
            if not mono:
                parts.append(str(c))
            else:
                parts.append(mono if c == 1 else f"{c}*{mono}")
        return " + ".join(parts) or "0"

    # univariate polynomials over the field: lists of elements, low degree first

    def peval(self, coeffs: list[int], x: int) -> int:
        acc = 0
        for c in reversed(coeffs):
            acc = self.add(self.mul(acc, x), c)
        return acc

    def ptrim(self, a: list[int]) -> list[int]:
        a = list(a)
        while a and a[-1] == 0:
            a.pop()
        return a

    def pmod(self, a: list[int], b: list[int]) -> list[int]:
        a, b = self.ptrim(a), self.ptrim(b)
        if not b:
            raise ZeroDivisionError("polynomial division by zero")
        inv = self.inv(b[-1])
        while len(a) >= len(b):
            c = self.mul(a[-1], inv)
            shift = len(a) - len(b)
            for j, bj in enumerate(b):
                a[shift + j] = self.sub(a[shift + j], self.mul(c, bj))
            a = self.ptrim(a)
        return a

    def pgcd(self, a: list[int], b: list[int]) -> list[int]:
        a, b = self.ptrim(a), self.ptrim(b)
        while b:
            a, b = b, self.pmod(a, b)
        if a:
            inv = self.inv(a[-1])
            a = [self.mul(c, inv) for c in a]
        return a

    def roots(self, coeffs: list[int]) -> list[int]:
        coeffs = self.ptrim(coeffs)
        if not coeffs:
            raise ValueError("zero polynomial has every element as a root")
        return [x for x in self.elements() if self.peval(coeffs, x) == 0]


def _mult_order(g: int, p: int) -> int:
    n, cur = 1, g % p
    while cur != 1:
        cur = cur * g % p
        n += 1
    return n


@lru_cache(maxsize=None)
def field(p: int, k: int) -> GF:
    return GF(p, k)
