"""Exact rank of sparse integer matrices.

Rows are dicts column -> nonzero int.  The default route is fraction-free
elimination over Z (rows divided by their content to keep entries small); the
modular route is a fast cross-check that never replaces the exact answer.
"""

from __future__ import annotations

from math import gcd

Row = dict[int, int]


def _content(row: Row) -> int:
    g = 0
    for x in row.values():
        g = gcd(g, x)
        if g == 1:
            break
    return g


def _primitive(row: Row) -> Row:
    g = _content(row)
    lead = row[min(row)]
    if lead < 0:
        g = -g
    if g in (1, 0):
        return row
    return {c: x // g for c, x in row.items()}


def rank_exact(rows: list[Row]) -> int:
    """Rank over Q of the matrix with these rows."""
    pivots: dict[int, Row] = {}
    for raw in rows:
        row = {c: x for c, x in raw.items() if x}
        while row:
            c = min(row)
            piv = pivots.get(c)
            if piv is None:
                pivots[c] = _primitive(row)
                break
            a, b = row[c], piv[c]
            new = {k: b * x for k, x in row.items()}
            for k, x in piv.items():
                y = new.get(k, 0) - a * x
                if y:
                    new[k] = y
                else:
                    new.pop(k, None)
            row = _primitive(new) if new else new
    return len(pivots)


def rank_mod_p(rows: list[Row], p: int) -> int:
    pivots: dict[int, Row] = {}
    for raw in rows:
        row = {c: x % p for c, x in raw.items() if x % p}
        while row:
            c = min(row)
            piv = pivots.get(c)
            if piv is None:
                inv = pow(row[c], -1, p)
                pivots[c] = {k: x * inv % p for k, x in row.items()}
                break
            a = row[c]
            for k, x in piv.items():
                y = (row.get(k, 0) - a * x) % p
                if y:
                    row[k] = y
                else:
                    row.pop(k, None)
    return len(pivots)


PRIMES = (2_147_483_647, 1_000_000_007)


def rank_modular(rows: list[Row], primes=PRIMES) -> int:
    """Rank agreed by several primes; a disagreement falls back to the exact route."""
    ranks = {rank_mod_p(rows, p) for p in primes}
    if len(ranks) == 1:
        return ranks.pop()
    return rank_exact(rows)


def kernel_basis(rows: list[Row]) -> list[dict[int, int]]:
    """Integer basis of {x : sum_j x_j * row_j = 0} (a left kernel), for small inputs."""
    from fractions import Fraction

    m = len(rows)
    # work on the transpose: columns of the system are the rows
    cols = sorted({c for r in rows for c in r})
    mat = [[Fraction(rows[i].get(c, 0)) for i in range(m)] for c in cols]
    pivcols = []
    r = 0
    for j in range(m):
        k = next((i for i in range(r, len(mat)) if mat[i][j] != 0), None)
        if k is None:
            continue
        mat[r], mat[k] = mat[k], mat[r]
        inv = 1 / mat[r][j]
        mat[r] = [x * inv for x in mat[r]]
        for i in range(len(mat)):
            if i != r and mat[i][j] != 0:
                f = mat[i][j]
                mat[i] = [x - f * y for x, y in zip(mat[i], mat[r])]
        pivcols.append(j)
        r += 1
    free = [j for j in range(m) if j not in pivcols]
    out = []
    for f in free:
        vec = [Fraction(0)] * m
        vec[f] = Fraction(1)
        for i, j in enumerate(pivcols):
            vec[j] = -mat[i][f]
        den = 1
        for x in vec:
            den = den * x.denominator // gcd(den, x.denominator)
        ints = [int(x * den) for x in vec]
        out.append({i: x for i, x in enumerate(ints) if x})
    return out
