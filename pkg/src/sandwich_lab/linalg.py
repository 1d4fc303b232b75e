"""Dense row reduction over F_p on plain integer lists."""

from __future__ import annotations


def rref(rows: list[list[int]], p: int) -> tuple[list[list[int]], list[int]]:
    """Reduced row echelon form; returns (nonzero rows, pivot columns)."""
    m = [[v % p for v in r] for r in rows]
    if not m:
        return [], []
    ncols = len(m[0])
    pivots = []
    r = 0
    for c in range(ncols):
        piv = next((i for i in range(r, len(m)) if m[i][c]), None)
        if piv is None:
            continue
        m[r], m[piv] = m[piv], m[r]
        inv = pow(m[r][c], -1, p)
        row = [(v * inv) % p for v in m[r]]
        m[r] = row
        for i in range(len(m)):
            if i != r and m[i][c]:
                f = m[i][c]
                m[i] = [(a - f * b) % p for a, b in zip(m[i], row)]
        pivots.append(c)
        r += 1
        if r == len(m):
            break
    return m[:r], pivots


def nullspace(rows: list[list[int]], ncols: int, p: int) -> list[list[int]]:
    """Basis of {v : A v = 0}, one vector per free column, in column order."""
    red, pivots = rref(rows, p) if rows else ([], [])
    pivot_set = set(pivots)
    basis = []
    for free in range(ncols):
        if free in pivot_set:
            continue
        v = [0] * ncols
        v[free] = 1
        for row, pc in zip(red, pivots):
            if row[free]:
                v[pc] = (-row[free]) % p
        basis.append(v)
    return basis


def rank(rows: list[list[int]], p: int) -> int:
    return len(rref(rows, p)[1])


class SpanTracker:
    """Incremental membership test for the F_p-span of vectors."""

    def __init__(self, p: int):
        self.p = p
        self.rows: dict[int, list[int]] = {}  # pivot column -> normalized row

    def reduce(self, v: list[int]) -> list[int]:
        p = self.p
        v = [x % p for x in v]
        for c, row in self.rows.items():
            if v[c]:
                f = v[c]
                v = [(a - f * b) % p for a, b in zip(v, row)]
        return v

    def contains(self, v: list[int]) -> bool:
        return not any(self.reduce(v))

    def add(self, v: list[int]) -> bool:
        """Add v; return False if it was already in the span."""
        v = self.reduce(v)
        c = next((i for i, x in enumerate(v) if x), None)
        if c is None:
            return False
        inv = pow(v[c], -1, self.p)
        v = [(x * inv) % self.p for x in v]
        for k, row in self.rows.items():
            if row[c]:
                f = row[c]
                self.rows[k] = [(a - f * b) % self.p for a, b in zip(row, v)]
        self.rows[c] = v
        return True
