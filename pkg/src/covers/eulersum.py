"""Sum-over-trees drivers for the generating functions h_g and h^G_N(mu).

Each tree contributes ((-1)^|E_C| / |Aut(P_C)|) * sum over tau of
sgn(tau on E_C) * prod_k P_k^{f_k(tau)}.  Two routes compute it:

* explicit: build P_C, list every cover automorphism, apply the cellwise rule;
* fast (Z/2 only): cover automorphisms are pairs (psi, t) with t a vector of
  independent sheet swaps, one per "region" (maximal connected set of unramified
  vertices) and one per "free pair" (a doubled edge between ramified vertices).
  For fixed psi the exponents depend on t only through the sums of t over the
  psi-orbits of those variables, and additively so, which turns the sum over t
  into a product of binomials.
"""

from __future__ import annotations

import logging
import os
from collections import defaultdict
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction

from .abelian import AbelianGroup, Element, subgroup_generated
from .cover import (
    Z2,
    build_cover,
    cover_automorphisms,
    derive_edge_monodromy,
    hyperelliptic_cover,
    lift_markings,
    orbit_exponents,
)
from .errors import InputError
from .graphs import HalfEdgeGraph, canonical_code, tree_automorphisms
from .symfunc import Monomial, SymLaurent, sum_laurent
from .trees import TreeFamilySpec, enumerate_stable_trees, enumerate_trees

log = logging.getLogger(__name__)


@dataclass
class ContributionReport:
    code: str
    n_edges: int
    aut_order: int
    records: list[tuple[int, dict[int, int]]] = field(default_factory=list)  # (sgn, f) per tau
    value: SymLaurent = field(default_factory=SymLaurent)

    def check(self) -> None:
        total = defaultdict(Fraction)
        for sgn, f in self.records:
            total[tuple(sorted(f.items()))] += sgn
        expect = SymLaurent({m: c * Fraction((-1) ** self.n_edges, self.aut_order) for m, c in total.items()})
        if self.records and expect != self.value:
            raise AssertionError("contribution does not match its per-automorphism records")


def _mono(f: dict[int, int]) -> Monomial:
    return tuple(sorted((k, e) for k, e in f.items() if e))


# ------------------------------------------------------------- explicit route


def explicit_contribution(cover, tree: HalfEdgeGraph) -> ContributionReport:
    auts = cover_automorphisms(cover)
    acc: dict[Monomial, Fraction] = defaultdict(Fraction)
    records = []
    for tau in auts:
        f = orbit_exponents(cover, tau)
        s = tau.psi.edge_sign(cover.target)
        records.append((s, f))
        acc[_mono(f)] += s
    scale = Fraction((-1) ** tree.n_edges, len(auts))
    value = SymLaurent({m: c * scale for m, c in acc.items()})
    return ContributionReport(canonical_code(tree).hex(), tree.n_edges, len(auts), records, value)


# ----------------------------------------------------------------- fast route


def _z2_structure(tree: HalfEdgeGraph):
    """Ramification flags, and the swap variable (or None) of each vertex and edge."""
    mt = derive_edge_monodromy(tree, Z2, (1,))
    n = tree.n_vertices
    edges = tree.edges
    emu = [mt.mu[a][0] for a, _ in edges]
    ram = [tree.weight[v] > 0 for v in range(n)]
    for i, (a, b) in enumerate(edges):
        if emu[i]:
            ram[tree.root[a]] = ram[tree.root[b]] = True
    var_v: list[int | None] = [None] * n
    nvars = 0
    for v in range(n):
        if ram[v] or var_v[v] is not None:
            continue
        stack = [v]
        var_v[v] = nvars
        while stack:
            x = stack.pop()
            for y in tree.neighbours(x):
                if not ram[y] and var_v[y] is None:
                    var_v[y] = nvars
                    stack.append(y)
        nvars += 1
    var_e: list[int | None] = []
    for i, (a, b) in enumerate(edges):
        u, w = tree.root[a], tree.root[b]
        if emu[i]:
            var_e.append(None)
        elif not ram[u]:
            var_e.append(var_v[u])
        elif not ram[w]:
            var_e.append(var_v[w])
        else:
            var_e.append(nvars)
            nvars += 1
    return ram, emu, var_v, var_e, nvars


def _orbits(perm) -> list[list[int]]:
    seen = [False] * len(perm)
    out = []
    for i in range(len(perm)):
        if not seen[i]:
            cyc = []
            j = i
            while not seen[j]:
                seen[j] = True
                cyc.append(j)
                j = perm[j]
            out.append(cyc)
    return out


def _add(f: dict[int, int], k: int, x: int) -> None:
    f[k] = f.get(k, 0) + x


def fast_z2_contribution(tree: HalfEdgeGraph, auts=None) -> ContributionReport:
    ram, emu, var_v, var_e, nvars = _z2_structure(tree)
    edges = tree.edges
    eindex = {}
    for i, (a, b) in enumerate(edges):
        eindex[a] = (i, False)
        eindex[b] = (i, True)
    auts = tree_automorphisms(tree) if auts is None else auts
    acc: dict[Monomial, Fraction] = defaultdict(Fraction)
    # vertex/edge of each variable, to transport variables along psi
    var_rep: list[tuple[str, int]] = [("", -1)] * nvars
    for v in range(tree.n_vertices):
        if var_v[v] is not None and var_rep[var_v[v]][1] < 0:
            var_rep[var_v[v]] = ("v", v)
    for i in range(len(edges)):
        if var_e[i] is not None and var_rep[var_e[i]][1] < 0:
            var_rep[var_e[i]] = ("e", i)
    for psi in auts:
        eperm = [0] * len(edges)
        flip = [False] * len(edges)
        for i, (a, b) in enumerate(edges):
            j, rev = eindex[psi.half_edges[a]]
            eperm[i] = j
            flip[i] = rev
        vperm = psi.vertices
        # permutation of variables
        vp = [0] * nvars
        for x, (kind, c) in enumerate(var_rep):
            vp[x] = var_v[vperm[c]] if kind == "v" else var_e[eperm[c]]
        vorb = _orbits(vp)
        orbit_of = [0] * nvars
        for oi, o in enumerate(vorb):
            for x in o:
                orbit_of[x] = oi
        fixed: dict[int, int] = {}
        per = [({}, {}) for _ in vorb]  # exponents for orbit sum 0 and 1
        for cyc in _orbits(vperm):
            ell = len(cyc)
            x = var_v[cyc[0]]
            if x is None:
                _add(fixed, ell, 1)
                continue
            o = orbit_of[x]
            mult = ell // len(vorb[o])
            _add(per[o][0], ell, 2)
            if mult % 2:
                _add(per[o][1], 2 * ell, 1)
            else:
                _add(per[o][1], ell, 2)
        for cyc in _orbits(eperm):
            ell = len(cyc)
            reversed_ = False
            for i in cyc:
                reversed_ ^= flip[i]
            x = var_e[cyc[0]]
            targets = [fixed] if x is None else [per[orbit_of[x]][0], per[orbit_of[x]][1]]
            for s, f in enumerate(targets):
                size = 1 if x is None else 2
                d = 1
                if x is not None and s == 1 and (ell // len(vorb[orbit_of[x]])) % 2:
                    d = 2
                count = size // d
                if not reversed_:
                    _add(f, ell * d, -count)
                elif d % 2:
                    _add(f, ell * d, count)
                    _add(f, 2 * ell * d, -count)
                else:
                    _add(f, ell * d, -count)
        sgn = 1
        for cyc in _orbits(eperm):
            if len(cyc) % 2 == 0:
                sgn = -sgn
        terms = {_mono(fixed): Fraction(sgn, 2 ** len(vorb))}
        for a, b in per:
            nxt: dict[Monomial, Fraction] = defaultdict(Fraction)
            for m, c in terms.items():
                for extra in (a, b):
                    d = dict(m)
                    for k, e in extra.items():
                        d[k] = d.get(k, 0) + e
                    nxt[_mono(d)] += c
            terms = nxt
        for m, c in terms.items():
            acc[m] += c
    scale = Fraction((-1) ** len(edges), len(auts))
    value = SymLaurent({m: c * scale for m, c in acc.items()})
    return ContributionReport(canonical_code(tree).hex(), len(edges), len(auts) * 2 ** nvars, [], value)


def tree_contribution(tree: HalfEdgeGraph, mode: str = "hyperelliptic", route: str = "fast", group: AbelianGroup | None = None) -> ContributionReport:
    if mode == "hyperelliptic":
        if route == "fast":
            return fast_z2_contribution(tree)
        return explicit_contribution(hyperelliptic_cover(tree), tree)
    if mode == "monodromy":
        if group is None:
            raise InputError("monodromy mode needs a group")
        cover = build_cover(derive_edge_monodromy(tree, group, None), group, None)
        return monodromy_contribution(cover, tree)
    raise InputError(f"unknown mode {mode!r}")


# ------------------------------------------------------------------ drivers


def _hg_worker(args) -> tuple[int, dict]:
    idx, code_hex, route = args
    from .graphs import decode_code

    tree = decode_code(bytes.fromhex(code_hex))
    rep = tree_contribution(tree, "hyperelliptic", route)
    return idx, rep.value.terms


def default_jobs() -> int:
    try:
        return len(os.sched_getaffinity(0))
    except AttributeError:  # pragma: no cover
        return os.cpu_count() or 1


def compute_hg(g: int, jobs: int = 1, route: str = "fast", trees: list[HalfEdgeGraph] | None = None) -> SymLaurent:
    """Sum over the trees with 2g + 2 Weierstrass legs, at most two per vertex.

    For g = 0, 1 the same sum is evaluated formally (h_0 = 0; h_1 comes from the
    single tree (2)-(2)); these values are only used as extra interpolation points.
    """
    if g < 0:
        raise InputError("genus must be nonnegative")
    if trees is None:
        if g < 2:
            trees = enumerate_stable_trees(2 * g + 2, (), 2)
        else:
            trees = enumerate_trees(TreeFamilySpec("hyperelliptic", genus=g))
    tasks = [(i, canonical_code(t).hex(), route) for i, t in enumerate(trees)]
    parts: list = [None] * len(tasks)
    if jobs <= 1 or len(tasks) < 2:
        for t in tasks:
            i, terms = _hg_worker(t)
            parts[i] = terms
    else:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            for i, terms in pool.map(_hg_worker, tasks, chunksize=max(1, len(tasks) // (8 * jobs))):
                parts[i] = terms
    # reduce in canonical-code order; exact arithmetic makes the order immaterial anyway
    return sum_laurent(SymLaurent(p) for p in parts)


# ---------------------------------------------------------- labelled version


def monodromy_contribution(cover, tree: HalfEdgeGraph) -> ContributionReport:
    """Automorphisms over the identity of a fully leg-labelled base, preserving the marking lift."""
    from .cover import CoverAutomorphism, _phi, translations
    from .graphs import TreeAutomorphism

    ident = TreeAutomorphism(tuple(range(tree.n_vertices)), tuple(range(tree.n_half_edges)))
    acc: dict[Monomial, Fraction] = defaultdict(Fraction)
    records = []
    n = 0
    for t in translations(cover, include_legs=True):
        pv, ph = _phi(cover, ident, t)
        if cover.marking and any(ph[y] != y for y in cover.marking.values()):
            continue
        tau = CoverAutomorphism(ident, t, pv, ph)
        f = orbit_exponents(cover, tau)
        records.append((1, f))
        acc[_mono(f)] += 1
        n += 1
    scale = Fraction((-1) ** tree.n_edges, n)
    value = SymLaurent({m: c * scale for m, c in acc.items()})
    return ContributionReport(canonical_code(tree).hex(), tree.n_edges, n, records, value)


def gamma_objects(group: AbelianGroup, labels: tuple[str, ...], mu: tuple[Element, ...]):
    """Isomorphism classes of labelled covers: each stable tree with each inequivalent lift of its leg marking."""
    spec = TreeFamilySpec("monodromy", group=group, labels=labels, leg_mu=mu)
    for tree in enumerate_trees(spec):
        mt = derive_edge_monodromy(tree, group, None)
        cover = build_cover(mt, group, None)
        legs = {mt.label[h]: h for h in mt.legs}
        for lifted in lift_markings(cover, legs):
            yield tree, lifted


def compute_hG(group: AbelianGroup, N: int, mu: list[Element] | tuple[Element, ...], labels: tuple[str, ...] | None = None) -> SymLaurent:
    mu = tuple(group.element(m) for m in mu)
    if len(mu) != N:
        raise InputError(f"expected {N} leg monodromies, got {len(mu)}")
    if group.sum(mu) != group.zero:
        raise InputError("leg monodromies must sum to zero")
    if subgroup_generated(group, mu).order != group.order:
        raise InputError("the leg monodromies must generate the group")
    labels = labels or tuple(f"w{i + 1}" for i in range(N))
    parts = []
    for tree, cover in gamma_objects(group, labels, mu):
        parts.append(monodromy_contribution(cover, tree).value)
    return sum_laurent(parts)
