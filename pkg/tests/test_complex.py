import pytest

from conftest import gamma, hg
from covers.complex import (
    betti,
    betti_table,
    chain_dims,
    chi_c_from_dims,
    enumerate_gamma,
    expansion_poset,
    has_repeated_marking,
    has_weight_three,
    is_forbidden,
    k_ends,
    labelled_dims_by_orbits,
    lift_choices,
    make_object,
    maximal_expansions,
    normalize_lifts,
    supporting_edges,
    target_trees,
    top_cycle,
)
from covers.cover import Z2, build_cover, derive_edge_monodromy, hyperelliptic_genus_check, lift_markings
from covers.errors import InputError
from covers.graphs import build_tree
from covers.symfunc import egf_values, specialize_egf

DIMS = {
    (2, 0): [1, 2, 1, 0],
    (2, 2): [1, 8, 28, 49, 41, 14],
    (2, 3): [1, 23, 147, 441, 682, 535, 169],
    (3, 2): [1, 12, 68, 218, 409, 447, 265, 67],
}

PAIRS = [(2, 0), (2, 1), (2, 2), (2, 3), (3, 0), (3, 1), (3, 2)]


def chi_from_hg(g, n):
    return egf_values(specialize_egf(hg(g)), n)[n]


@pytest.mark.parametrize("gn", sorted(DIMS))
def test_chain_dimensions(gn):
    assert gamma(*gn).dims() == DIMS[gn]


@pytest.mark.parametrize("gn", PAIRS)
def test_euler_characteristic_matches_sum_over_trees(gn):
    cx = gamma(*gn)
    assert -cx.reduced_euler() == chi_from_hg(*gn)
    assert chi_c_from_dims(chain_dims(enumerate_gamma(*gn))) == chi_from_hg(*gn)


@pytest.mark.parametrize("gn", PAIRS)
def test_betti_numbers(gn):
    b = betti(gamma(*gn))
    if gn in ((2, 2), (3, 2)):
        top = 2 * gn[0]
        assert b == [1 if p == top else 0 for p in gamma(*gn).degrees]
    else:
        assert not any(b)


@pytest.mark.parametrize("gn", [(2, 2), (3, 2)])
def test_modular_ranks_agree(gn):
    assert betti(gamma(*gn), "modular") == betti(gamma(*gn), "exact")


@pytest.mark.parametrize("sub", ["rep", "w3", "repw3"])
@pytest.mark.parametrize("gn", [(2, 2), (2, 3), (3, 2)])
def test_subcomplexes_acyclic(gn, sub):
    cx = gamma(*gn, subcomplex=sub)
    assert sum(cx.dims()) > 1
    assert not any(betti(cx))


def test_subcomplex_membership():
    full = enumerate_gamma(2, 2)
    rep = {o.code for o in enumerate_gamma(2, 2, subcomplex="rep")}
    w3 = {o.code for o in enumerate_gamma(2, 2, subcomplex="w3")}
    both = {o.code for o in enumerate_gamma(2, 2, subcomplex="repw3")}
    assert rep == {o.code for o in full if o.rep}
    assert w3 == {o.code for o in full if o.w3}
    assert both == rep & w3


@pytest.mark.parametrize("g,sign", [(2, 1), (3, -1)])
def test_top_cycle(g, sign):
    cyc = top_cycle(g, gamma(g, 2))
    assert cyc.coefficients == [1, -1]
    assert cyc.boundaries_nonzero == [True, True]
    assert cyc.transposition_sign == sign
    a, b = cyc.generators
    assert a.code != b.code


def test_betti_table_fields():
    t = betti_table(gamma(2, 0))
    assert t["degrees"] == [-1, 0, 1, 2]
    assert t["dims"] == DIMS[(2, 0)]
    assert t["betti"] == [0, 0, 0, 0]


# ---------------------------------------------------------------- predicates


def marked(weights, edges, legs):
    return build_tree(weights, edges, [(v, lab, None) for v, lab in legs])


def test_forbidden_types():
    # one marking and one Weierstrass leg cut off by an edge
    assert is_forbidden(normalize_lifts(marked([1, 2, 3], [(0, 1), (1, 2)], [(0, "1")])))
    # two markings on different sheets cut off without Weierstrass legs
    t = build_tree([0, 3, 3, 0], [(0, 1), (1, 2), (0, 3)], [(3, "1.0", None), (3, "2.1", None)])
    assert is_forbidden(t)
    same = build_tree([0, 3, 3, 0], [(0, 1), (1, 2), (0, 3)], [(3, "1.0", None), (3, "2.0", None)])
    assert not is_forbidden(same)
    assert has_repeated_marking(same)
    assert not has_repeated_marking(t)


def test_repeated_marking_at_ramified_vertex():
    t = marked([2, 4], [(0, 1)], [(0, "1"), (0, "2")])
    assert has_repeated_marking(t)
    assert has_weight_three(t)
    assert not has_weight_three(marked([2, 2, 2], [(0, 1), (1, 2)], []))


def test_k_ends_and_supports():
    t = build_tree([2, 0, 2, 2, 0], [(0, 1), (1, 2), (1, 3), (1, 4)], [(4, "1.0", None), (4, "2.0", None)])
    assert len(k_ends(t, 2)) == 3
    assert k_ends(t, 3) == []
    sup = supporting_edges(t)
    assert [s for _, s in sup] == [frozenset({1, 2})]


def test_lift_normalization():
    t = build_tree([2, 0, 2, 2], [(0, 1), (1, 2), (1, 3)], [(1, "1.1", None), (1, "2.0", None)])
    n = normalize_lifts(t)
    assert sorted(lab for lab in n.label if lab) == ["1.0", "2.1"]
    ram = build_tree([2, 4], [(0, 1)], [(0, "1.1", None)])
    assert normalize_lifts(ram).label[-1] == "1"


@pytest.mark.parametrize("gn", [(2, 2), (2, 3), (3, 2)])
def test_lift_counts_match_cover_module(gn):
    g, n = gn
    for tree in target_trees(g, n):
        mu = tuple((0,) if tree.partner[h] == h else None for h in range(tree.n_half_edges))
        cov = build_cover(derive_edge_monodromy(tree.replace(mu=mu), Z2, (1,)), Z2, (1,))
        legs = {tree.label[h]: h for h in tree.legs}
        assert len(lift_choices(tree)) == len(lift_markings(cov, legs))


@pytest.mark.parametrize("gn", [(2, 2), (3, 1)])
def test_objects_are_genus_g_covers(gn):
    g, n = gn
    for o in enumerate_gamma(g, n):
        cov = o.cover()
        hyperelliptic_genus_check(cov, g)
        assert len(cov.marking) == n
        assert o.to_json()["edges"] == o.n_edges


def test_no_duplicate_objects_after_relabelling():
    objs = enumerate_gamma(2, 2)
    assert len({make_object(o.graph).code for o in objs}) == len(objs)


def test_bad_arguments():
    with pytest.raises(InputError):
        enumerate_gamma(1, 0)
    with pytest.raises(InputError):
        enumerate_gamma(2, 0, variant="other")
    with pytest.raises(InputError):
        enumerate_gamma(2, 0, subcomplex="other")


# ------------------------------------------------------- labelled variant


@pytest.mark.parametrize("n", [0, 1])
def test_labelled_dims_two_routes(n):
    direct = chain_dims(enumerate_gamma(2, n, "labelled"))
    assert direct == labelled_dims_by_orbits(2, n)


# ---------------------------------------------------------- end expansions


@pytest.mark.parametrize("gn", [(2, 0), (2, 1), (3, 0), (3, 1)])
def test_two_end_expansions_unique_for_few_markings(gn):
    objs = enumerate_gamma(*gn)
    up = expansion_poset(objs, 2)
    assert all(len(maximal_expansions(up, o.code)) == 1 for o in objs)


def test_two_end_expansions_not_unique_with_two_markings():
    objs = enumerate_gamma(2, 2)
    up = expansion_poset(objs, 2)
    assert sum(len(maximal_expansions(up, o.code)) > 1 for o in objs) == 35


@pytest.mark.parametrize("gn", [(2, 0), (2, 1), (2, 2), (2, 3), (3, 0), (3, 1), (3, 2)])
def test_three_end_expansions_unique_in_weight_three_locus(gn):
    objs = enumerate_gamma(*gn, subcomplex="w3")
    up = expansion_poset(objs, 3)
    assert all(len(maximal_expansions(up, o.code)) == 1 for o in objs)
