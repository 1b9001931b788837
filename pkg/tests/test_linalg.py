import random

from hypothesis import given, settings
from hypothesis import strategies as st

from covers.linalg import kernel_basis, rank_exact, rank_mod_p, rank_modular


def dense_rank(rows, ncols):
    from fractions import Fraction

    m = [[Fraction(r.get(c, 0)) for c in range(ncols)] for r in rows]
    rank = 0
    for c in range(ncols):
        p = next((i for i in range(rank, len(m)) if m[i][c]), None)
        if p is None:
            continue
        m[rank], m[p] = m[p], m[rank]
        for i in range(len(m)):
            if i != rank and m[i][c]:
                f = m[i][c] / m[rank][c]
                m[i] = [x - f * y for x, y in zip(m[i], m[rank])]
        rank += 1
    return rank


@st.composite
def sparse_matrices(draw):
    nrows = draw(st.integers(0, 8))
    ncols = draw(st.integers(1, 8))
    rows = []
    for _ in range(nrows):
        cols = draw(st.sets(st.integers(0, ncols - 1), max_size=ncols))
        rows.append({c: draw(st.integers(-3, 3).filter(bool)) for c in cols})
    return rows, ncols


@settings(max_examples=200, deadline=None)
@given(sparse_matrices())
def test_rank_routes_agree(m):
    rows, ncols = m
    r = dense_rank(rows, ncols)
    assert rank_exact(rows) == r
    assert rank_modular(rows) == r


@settings(max_examples=100, deadline=None)
@given(sparse_matrices())
def test_kernel(m):
    rows, ncols = m
    ker = kernel_basis(rows)
    assert len(ker) == len(rows) - dense_rank(rows, ncols)
    for vec in ker:
        for c in range(ncols):
            assert sum(x * rows[i].get(c, 0) for i, x in vec.items()) == 0


def test_small_prime_can_disagree():
    rows = [{0: 2, 1: 4}, {0: 1, 1: 1}]
    assert rank_mod_p(rows, 2) == 1
    assert rank_exact(rows) == 2
    assert rank_modular(rows, primes=(2, 3)) == 2


def test_large_entries_stay_exact():
    rng = random.Random(7)
    rows = [{c: rng.randint(-10**12, 10**12) for c in range(6)} for _ in range(5)]
    rows.append({c: sum(r[c] for r in rows) for c in range(6)})
    assert rank_exact(rows) == 5
