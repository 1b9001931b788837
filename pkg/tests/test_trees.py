import time

import pytest

from covers.abelian import AbelianGroup
from covers.errors import CacheMismatch, InputError
from covers.graphs import canonical_code_str
from covers.trees import (
    TreeFamilySpec,
    brute_force_weighted_trees,
    cached_enumerate_trees,
    enumerate_stable_trees,
    enumerate_trees,
)

Z2 = AbelianGroup.cyclic(2)

# counts of stable trees with 2g + 2 weight, at most 2 per vertex
TREE_COUNTS = {2: 3, 3: 11, 4: 51, 5: 288, 6: 1841, 7: 12838}


@pytest.mark.parametrize("g", [2, 3, 4])
def test_against_brute_force(g):
    fast = {canonical_code_str(t) for t in enumerate_trees(TreeFamilySpec("hyperelliptic", genus=g))}
    assert fast == brute_force_weighted_trees(2 * g + 2, 2)


@pytest.mark.parametrize("g", [2, 3, 4, 5, 6])
def test_counts(g):
    assert len(enumerate_trees(TreeFamilySpec("hyperelliptic", genus=g))) == TREE_COUNTS[g]


def test_uncapped_against_brute_force():
    fast = {canonical_code_str(t) for t in enumerate_stable_trees(9, (), None)}
    assert fast == brute_force_weighted_trees(9, 9)


@pytest.mark.parametrize("n,count", [(3, 1), (4, 4), (5, 26), (6, 236), (7, 2752)])
def test_leaf_labelled_trees(n, count):
    # trees with n labelled leaves and no vertex of valence 2
    labels = tuple(f"w{i}" for i in range(1, n + 1))
    assert len(enumerate_stable_trees(0, labels, 0)) == count


def test_genus_five_is_fast():
    t = time.perf_counter()
    enumerate_trees(TreeFamilySpec("hyperelliptic", genus=5))
    assert time.perf_counter() - t < 10


def test_vertex_range():
    for g in (2, 3, 4, 5):
        for t in enumerate_trees(TreeFamilySpec("hyperelliptic", genus=g)):
            assert g + 1 <= t.n_vertices <= 2 * g
            assert all(w <= 2 for w in t.weight)
            assert t.is_stable()


def test_monodromy_family():
    spec = TreeFamilySpec("monodromy", group=Z2, labels=("w1", "w2", "w3", "w4"), leg_mu=((1,),) * 4)
    trees = enumerate_trees(spec)
    assert len(trees) == 4
    for t in trees:
        assert all(t.mu[h] == (1,) for h in t.legs)


@pytest.mark.parametrize(
    "spec",
    [
        TreeFamilySpec("hyperelliptic", genus=1),
        TreeFamilySpec("monodromy", group=Z2, labels=("a", "b", "c"), leg_mu=((1,), (1,), (1,))),
        TreeFamilySpec("monodromy", group=Z2, labels=("a", "b"), leg_mu=((1,), (1,))),
        TreeFamilySpec("monodromy", group=Z2, labels=("a", "b", "c"), leg_mu=((0,), (0,), (0,))),
        TreeFamilySpec("other"),
    ],
)
def test_infeasible_families(spec):
    with pytest.raises(InputError):
        enumerate_trees(spec)


def test_cache_round_trip(tmp_path):
    spec = TreeFamilySpec("hyperelliptic", genus=3)
    first = cached_enumerate_trees(spec, tmp_path)
    files = list(tmp_path.iterdir())
    assert len(files) == 1
    again = cached_enumerate_trees(spec, tmp_path)
    assert [canonical_code_str(t) for t in again] == [canonical_code_str(t) for t in first]


def test_cache_mismatch(tmp_path):
    spec = TreeFamilySpec("hyperelliptic", genus=2)
    cached_enumerate_trees(spec, tmp_path)
    path = next(tmp_path.iterdir())
    path.write_text("treecache v1 0000\n" + "\n".join(path.read_text().splitlines()[1:]) + "\n")
    with pytest.raises(CacheMismatch):
        cached_enumerate_trees(spec, tmp_path)
    assert len(cached_enumerate_trees(spec, tmp_path, refresh=True)) == 3


def test_monodromy_cache_restores_mu(tmp_path):
    spec = TreeFamilySpec("monodromy", group=Z2, labels=("w1", "w2", "w3", "w4"), leg_mu=((1,),) * 4)
    cached_enumerate_trees(spec, tmp_path)
    trees = cached_enumerate_trees(spec, tmp_path)
    assert all(t.mu[h] == (1,) for t in trees for h in t.legs)
