import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from covers.errors import InputError
from covers.graphs import (
    HalfEdgeGraph,
    automorphism_count,
    brute_force_automorphism_count,
    build_tree,
    canonical_code,
    contract_edge,
    decode_code,
    has_odd_edge_automorphism,
    path_tree,
    permutation_sign,
    star_tree,
    tree_automorphisms,
)
from covers.trees import enumerate_stable_trees


@st.composite
def random_trees(draw):
    n = draw(st.integers(1, 7))
    edges = [(draw(st.integers(0, v - 1)), v) for v in range(1, n)]
    weights = [draw(st.integers(0, 3)) for _ in range(n)]
    legs = []
    for i in range(draw(st.integers(0, 3))):
        legs.append((draw(st.integers(0, n - 1)), str(i + 1), None))
    return build_tree(weights, edges, legs)


def shuffled(g, seed):
    rng = random.Random(seed)
    vperm = list(range(g.n_vertices))
    hperm = list(range(g.n_half_edges))
    rng.shuffle(vperm)
    rng.shuffle(hperm)
    return g.permuted(vperm, hperm)


@settings(max_examples=200, deadline=None)
@given(random_trees(), st.integers(0, 10**6))
def test_code_invariant_under_relabelling(g, seed):
    assert canonical_code(shuffled(g, seed)) == canonical_code(g)


@settings(max_examples=100, deadline=None)
@given(random_trees())
def test_decode_round_trip(g):
    assert canonical_code(decode_code(canonical_code(g))) == canonical_code(g)


@settings(max_examples=100, deadline=None)
@given(random_trees())
def test_json_round_trip(g):
    assert HalfEdgeGraph.from_json(g.to_json()) == g


@settings(max_examples=150, deadline=None)
@given(random_trees())
def test_automorphisms_against_brute_force(g):
    n = brute_force_automorphism_count(g)
    auts = tree_automorphisms(g)
    assert len(auts) == automorphism_count(g) == n
    assert len({a.vertices for a in auts}) == n
    odd = any(a.edge_sign(g) == -1 for a in auts)
    assert has_odd_edge_automorphism(g) == odd


def test_codes_separate_classes():
    assert canonical_code(path_tree([2, 2, 2])) == canonical_code(star_tree(2, [2, 2]))
    assert canonical_code(path_tree([0, 2, 2, 2])) != canonical_code(star_tree(0, [2, 2, 2]))
    assert canonical_code(path_tree([2, 0, 2])) != canonical_code(path_tree([0, 2, 2]))
    assert canonical_code(path_tree([2, 1, 2])) == canonical_code(path_tree([2, 1, 2]).permuted([2, 1, 0], [3, 2, 1, 0]))


@pytest.mark.parametrize("weights,count", [([2, 2, 2], 2), ([2, 1, 1, 2], 2), ([2, 2, 1], 1)])
def test_path_automorphisms(weights, count):
    assert automorphism_count(path_tree(weights)) == count


def test_star_automorphisms():
    assert automorphism_count(star_tree(0, [2, 2, 2])) == 6
    assert has_odd_edge_automorphism(star_tree(0, [2, 2, 2]))
    # flipping a path with k edges is a product of k // 2 transpositions
    assert has_odd_edge_automorphism(path_tree([2, 2, 2]))
    assert has_odd_edge_automorphism(path_tree([2, 1, 1, 2]))
    assert not has_odd_edge_automorphism(path_tree([2, 1, 1, 1, 2]))
    assert not has_odd_edge_automorphism(path_tree([2, 1, 2]).replace(weight=(2, 1, 3)))


def test_contraction():
    g = path_tree([2, 2, 2])
    h = contract_edge(g, 0)
    assert h.n_vertices == 2 and sorted(h.weight) == [2, 4]
    with pytest.raises(InputError):
        contract_edge(build_tree([3], [], [(0, "1", None)]), 0)


def test_permutation_sign():
    assert permutation_sign([0, 1, 2]) == 1
    assert permutation_sign([1, 0, 2]) == -1
    assert permutation_sign([1, 2, 0]) == 1


def test_partner_must_be_involution():
    with pytest.raises(InputError):
        HalfEdgeGraph((0, 0), (1, 1), (3,))


def test_enumerated_trees_have_distinct_codes_after_shuffle():
    trees = enumerate_stable_trees(10, (), 2)
    codes = {canonical_code(shuffled(t, i)) for i, t in enumerate(trees)}
    assert len(codes) == len(trees) == 51
