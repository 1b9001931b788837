"""Admissible G-covers of trees, their automorphisms and orbit-length exponents.

The source graph P is built fiber by fiber: over a vertex v sits the coset space
G/H_v with H_v generated by the monodromies at v, over a half-edge h sits
G/<mu(h)>.  Because the base is a tree, every automorphism of the cover has the
form (c, [x]) -> (psi(c), [x + t_{psi(c)}]) for an automorphism psi of the
decorated base and a compatible family of translations t (one coset per cell,
constant along edges and reducing to the vertex coset at each half-edge).
"""

from __future__ import annotations

import itertools
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property

from .abelian import AbelianGroup, CosetSpace, Element, coset_space, subgroup_generated
from .errors import InputError, InvariantViolation
from .graphs import HalfEdgeGraph, TreeAutomorphism, tree_automorphisms

Z2 = AbelianGroup.cyclic(2)


# ------------------------------------------------------------ monodromy data


def derive_edge_monodromy(tree: HalfEdgeGraph, group: AbelianGroup = Z2, branch_mu: Element | None = (1,)) -> HalfEdgeGraph:
    """Fill in mu on every edge half-edge: mu(h) is the total leg monodromy beyond h.

    Legs without a mu value are treated as marked legs (monodromy zero); each unit
    of vertex weight is an implicit leg carrying ``branch_mu``.
    """
    if any(tree.weight) and branch_mu is None:
        raise InputError("vertex weights need a branch monodromy value")
    local = []
    for v in range(tree.n_vertices):
        s = group.scale(tree.weight[v], branch_mu) if tree.weight[v] else group.zero
        for h in tree.legs_at(v):
            if tree.mu[h] is not None:
                s = group.add(s, group.element(tree.mu[h]))
        local.append(s)
    if group.sum(local) != group.zero:
        raise InvariantViolation("leg monodromies do not sum to zero")
    # far-side sums by one pass from an arbitrary root
    n = tree.n_vertices
    parent = [-1] * n
    up = [-1] * n
    order = [0]
    seen = {0}
    for v in order:
        for h in tree.edge_halves_at(v):
            w = tree.root[tree.partner[h]]
            if w not in seen:
                seen.add(w)
                parent[w] = v
                up[w] = tree.partner[h]
                order.append(w)
    if len(order) != n:
        raise InputError("monodromy derivation needs a connected tree")
    below = list(local)
    for v in reversed(order[1:]):
        below[parent[v]] = group.add(below[parent[v]], below[v])
    mu = list(tree.mu)
    for h in tree.legs:
        mu[h] = group.element(mu[h]) if mu[h] is not None else group.zero
    for v in order[1:]:
        h = up[v]  # half at v pointing to the parent; the far side is everything above
        mu[h] = group.neg(below[v])
        mu[tree.partner[h]] = below[v]
    return tree.replace(mu=tuple(mu))


# -------------------------------------------------------------------- covers


@dataclass
class AdmissibleCover:
    target: HalfEdgeGraph
    group: AbelianGroup
    branch_mu: Element | None
    source: HalfEdgeGraph
    genus: tuple[int, ...]
    vertex_cosets: tuple[CosetSpace, ...]
    half_cosets: tuple[CosetSpace, ...]
    vfib: tuple[tuple[int, ...], ...]  # base vertex -> P vertices in coset order
    hfib: tuple[tuple[int, ...], ...]  # base half-edge -> P half-edges in coset order
    proj_v: tuple[int, ...]
    proj_h: tuple[int, ...]
    marking: dict[str, int] = field(default_factory=dict)  # label -> P leg

    @property
    def chi_c(self) -> int:
        return self.source.n_vertices - self.source.n_edges

    def betti1(self) -> int:
        return self.source.n_edges - self.source.n_vertices + 1

    def is_ramified(self, v: int) -> bool:
        return len(self.vertex_cosets[v]) == 1

    def act_vertex(self, g: Element, x: int) -> int:
        v = self.proj_v[x]
        i = self.vfib[v].index(x)
        return self.vfib[v][self.vertex_cosets[v].act(g, i)]

    def act_half(self, g: Element, y: int) -> int:
        h = self.proj_h[y]
        j = self.hfib[h].index(y)
        return self.hfib[h][self.half_cosets[h].act(g, j)]

    def with_marking(self, marking: dict[str, int]) -> AdmissibleCover:
        return AdmissibleCover(
            self.target, self.group, self.branch_mu, self.source, self.genus, self.vertex_cosets,
            self.half_cosets, self.vfib, self.hfib, self.proj_v, self.proj_h, dict(marking),
        )

    @cached_property
    def translation_group(self) -> list[Translation]:
        return translations(self, include_legs=True)

    def to_json(self) -> dict:
        data = self.source.to_json()
        data["projection"] = {"vertices": list(self.proj_v), "half_edges": list(self.proj_h)}
        data["genus"] = list(self.genus)
        if self.marking:
            data["marking"] = dict(self.marking)
        return data


def _vertex_generators(tree: HalfEdgeGraph, v: int, branch_mu: Element | None) -> list[Element]:
    gens = [tree.mu[h] for h in tree.star[v]]
    if tree.weight[v]:
        gens.append(branch_mu)
    return gens


def build_cover(tree: HalfEdgeGraph, group: AbelianGroup = Z2, branch_mu: Element | None = (1,)) -> AdmissibleCover:
    if any(m is None for m in tree.mu):
        raise InputError("build_cover needs mu on every half-edge; run derive_edge_monodromy first")
    for h, p in tree.edges:
        if group.add(tree.mu[h], tree.mu[p]) != group.zero:
            raise InvariantViolation("mu is not inverted across an edge")
    vcos = []
    for v in range(tree.n_vertices):
        gens = _vertex_generators(tree, v, branch_mu)
        total = group.sum(tree.mu[h] for h in tree.star[v])
        if tree.weight[v]:
            total = group.add(total, group.scale(tree.weight[v], branch_mu))
        if total != group.zero:
            raise InvariantViolation(f"monodromy is unbalanced at vertex {v}")
        vcos.append(coset_space(group, subgroup_generated(group, gens)))
    hcos = [coset_space(group, subgroup_generated(group, [tree.mu[h]])) for h in range(tree.n_half_edges)]

    vfib, proj_v = [], []
    for v, cs in enumerate(vcos):
        vfib.append(tuple(range(len(proj_v), len(proj_v) + len(cs))))
        proj_v += [v] * len(cs)
    hfib, proj_h = [], []
    for h, cs in enumerate(hcos):
        hfib.append(tuple(range(len(proj_h), len(proj_h) + len(cs))))
        proj_h += [h] * len(cs)
    root = [0] * len(proj_h)
    partner = [0] * len(proj_h)
    label: list = [None] * len(proj_h)
    for h, cs in enumerate(hcos):
        v = tree.root[h]
        p = tree.partner[h]
        for j, rep in enumerate(cs.reps):
            y = hfib[h][j]
            root[y] = vfib[v][vcos[v].coset_of(rep)]
            # the equivariant bijection matching base representatives: same coset index
            partner[y] = hfib[p][j]
            if p == h:
                label[y] = tree.label[h]
    genus = []
    for v in range(tree.n_vertices):
        order = vcos[v].subgroup.order
        s = Fraction(0)
        for h in tree.star[v]:
            k = group.element_order(tree.mu[h])
            s += Fraction(k - 1, k)
        if tree.weight[v]:
            k = group.element_order(branch_mu)
            s += tree.weight[v] * Fraction(k - 1, k)
        chi = order * (2 - s)
        two_g = 2 - chi
        if two_g.denominator != 1 or two_g.numerator % 2 or two_g < 0:
            raise InvariantViolation(f"local Riemann-Hurwitz gives genus {two_g / 2} at vertex {v}")
        genus += [int(two_g) // 2] * len(vcos[v])
    P = HalfEdgeGraph(tuple(root), tuple(partner), (0,) * len(proj_v), tuple(genus), tuple(label))
    for a, b in P.edges:
        if P.root[a] == P.root[b]:
            raise InvariantViolation("cover construction produced a self-loop")
    cover = AdmissibleCover(tree, group, branch_mu, P, tuple(genus), tuple(vcos), tuple(hcos), tuple(vfib), tuple(hfib), tuple(proj_v), tuple(proj_h))
    _check_cover(cover)
    return cover


def _check_cover(cover: AdmissibleCover) -> None:
    G = cover.group
    for x in range(cover.source.n_vertices):
        for g in G.elements():
            if cover.proj_v[cover.act_vertex(g, x)] != cover.proj_v[x]:
                raise InvariantViolation("G-action does not commute with projection")
    for y in range(cover.source.n_half_edges):
        for g in G.elements():
            gy = cover.act_half(g, y)
            if cover.source.root[gy] != cover.act_vertex(g, cover.source.root[y]):
                raise InvariantViolation("G-action is not a graph morphism")
            if cover.source.partner[gy] != cover.act_half(g, cover.source.partner[y]):
                raise InvariantViolation("G-action does not respect the edge involution")


def hyperelliptic_cover(tree: HalfEdgeGraph) -> AdmissibleCover:
    """The Z/2 cover of a weighted tree whose weights count Weierstrass legs."""
    return build_cover(derive_edge_monodromy(tree, Z2, (1,)), Z2, (1,))


# ------------------------------------------------------------ automorphisms


@dataclass(frozen=True)
class Translation:
    """A compatible family of translations: coset indices per base vertex and half-edge."""

    vertex: tuple[int, ...]
    half: tuple[int | None, ...]  # None on legs when legs are not included


def translations(cover: AdmissibleCover, include_legs: bool = True) -> list[Translation]:
    """All compatible translation families, i.e. the cover automorphisms over the identity."""
    C = cover.target
    G = cover.group
    vcos, hcos = cover.vertex_cosets, cover.half_cosets
    n = C.n_vertices
    order = [0]
    via = {0: None}
    for v in order:
        for h in C.edge_halves_at(v):
            w = C.root[C.partner[h]]
            if w not in via:
                via[w] = h
                order.append(w)

    def reduce(cs_from: CosetSpace, i: int, cs_to: CosetSpace) -> int:
        return cs_to.coset_of(cs_from.reps[i])

    results: list[Translation] = []
    tv = [0] * n
    th: list[int | None] = [None] * C.n_half_edges

    def leg_choices(k: int):
        if k == n:
            yield
            return
        v = order[k]
        h = via[v]
        if h is None:
            options = range(len(vcos[v]))
        else:
            # edge half at the parent is fixed already; vertex coset is its reduction
            options = [reduce(hcos[h], th[h], vcos[v])]
        for i in options:
            tv[v] = i
            yield from child_edges(k, v, C.edge_halves_at(v))

    def child_edges(k: int, v: int, halves):
        todo = [h for h in halves if via.get(C.root[C.partner[h]]) == h]
        legs = C.legs_at(v) if include_legs else ()

        def rec(idx: int):
            if idx == len(todo) + len(legs):
                yield from leg_choices(k + 1)
                return
            if idx < len(todo):
                h = todo[idx]
                for j in range(len(hcos[h])):
                    if reduce(hcos[h], j, vcos[v]) == tv[v]:
                        th[h] = j
                        th[C.partner[h]] = j
                        yield from rec(idx + 1)
                th[h] = th[C.partner[h]] = None
            else:
                h = legs[idx - len(todo)]
                for j in range(len(hcos[h])):
                    if reduce(hcos[h], j, vcos[v]) == tv[v]:
                        th[h] = j
                        yield from rec(idx + 1)
                th[h] = None

        yield from rec(0)

    for _ in leg_choices(0):
        results.append(Translation(tuple(tv), tuple(th)))
    if not results:
        raise InvariantViolation("translation group is empty")
    return results


@dataclass(frozen=True)
class CoverAutomorphism:
    psi: TreeAutomorphism
    t: Translation
    phi_vertices: tuple[int, ...]
    phi_halves: tuple[int, ...]

    def compose(self, other: CoverAutomorphism) -> tuple[tuple[int, ...], tuple[int, ...]]:
        """Permutations of self after other."""
        return (
            tuple(self.phi_vertices[x] for x in other.phi_vertices),
            tuple(self.phi_halves[y] for y in other.phi_halves),
        )


def _phi(cover: AdmissibleCover, psi: TreeAutomorphism, t: Translation) -> tuple[tuple[int, ...], tuple[int, ...]]:
    vcos, hcos = cover.vertex_cosets, cover.half_cosets
    G = cover.group
    pv = [0] * cover.source.n_vertices
    for v, fib in enumerate(cover.vfib):
        w = psi.vertices[v]
        shift = vcos[w].reps[t.vertex[w]]
        for i, x in enumerate(fib):
            pv[x] = cover.vfib[w][vcos[w].coset_of(G.add(vcos[v].reps[i], shift))]
    ph = [0] * cover.source.n_half_edges
    for h, fib in enumerate(cover.hfib):
        k = psi.half_edges[h]
        tk = t.half[k]
        shift = hcos[k].reps[tk] if tk is not None else vcos[cover.target.root[k]].reps[t.vertex[cover.target.root[k]]]
        for j, y in enumerate(fib):
            ph[y] = cover.hfib[k][hcos[k].coset_of(G.add(hcos[h].reps[j], shift))]
    return tuple(pv), tuple(ph)


def _check_phi(cover: AdmissibleCover, pv, ph) -> bool:
    P = cover.source
    return all(P.root[ph[y]] == pv[P.root[y]] and P.partner[ph[y]] == ph[P.partner[y]] for y in range(P.n_half_edges))


def cover_automorphisms(cover: AdmissibleCover, include_legs: bool | None = None) -> list[CoverAutomorphism]:
    """All (phi, psi) pairs; psi runs over automorphisms of the decorated base.

    With a marking set, only automorphisms fixing the marked legs (and hence psi
    fixing every marked base leg) are kept.  Leg translations are included when
    the base has explicit legs unless ``include_legs`` is False.
    """
    C = cover.target
    if include_legs is None:
        include_legs = bool(C.legs)
    ts = translations(cover, include_legs)
    out = []
    for psi in tree_automorphisms(C):
        for t in ts:
            pv, ph = _phi(cover, psi, t)
            if not _check_phi(cover, pv, ph):
                raise InvariantViolation("translation family does not define a graph automorphism")
            if cover.marking and any(ph[y] != y for y in cover.marking.values()):
                continue
            out.append(CoverAutomorphism(psi, t, pv, ph))
    return out


def brute_force_cover_automorphisms(cover: AdmissibleCover) -> set[tuple[tuple[int, ...], tuple[int, ...]]]:
    """Every G-equivariant graph automorphism of P covering some automorphism of C (test oracle).

    Tries every fiber-to-fiber bijection; only usable for tiny covers.
    """
    out = set()
    C, P, G = cover.target, cover.source, cover.group
    for psi in tree_automorphisms(C):
        vchoices = [list(itertools.permutations(cover.vfib[psi.vertices[v]])) for v in range(C.n_vertices)]
        hchoices = [list(itertools.permutations(cover.hfib[psi.half_edges[h]])) for h in range(C.n_half_edges)]
        for vsel in itertools.product(*vchoices):
            pv = [0] * P.n_vertices
            for v, img in enumerate(vsel):
                for x, y in zip(cover.vfib[v], img):
                    pv[x] = y
            if any(pv[cover.act_vertex(g, x)] != cover.act_vertex(g, pv[x]) for g in G.elements() for x in range(P.n_vertices)):
                continue
            for hsel in itertools.product(*hchoices):
                ph = [0] * P.n_half_edges
                for h, img in enumerate(hsel):
                    for x, y in zip(cover.hfib[h], img):
                        ph[x] = y
                if not _check_phi(cover, pv, ph):
                    continue
                if any(ph[cover.act_half(g, y)] != cover.act_half(g, ph[y]) for g in G.elements() for y in range(P.n_half_edges)):
                    continue
                if cover.marking and any(ph[y] != y for y in cover.marking.values()):
                    continue
                out.add((tuple(pv), tuple(ph)))
    return out


# ----------------------------------------------------------- orbit exponents


def _cycles(perm) -> list[list[int]]:
    seen = set()
    out = []
    for i in range(len(perm)):
        if i in seen:
            continue
        cyc = []
        j = i
        while j not in seen:
            seen.add(j)
            cyc.append(j)
            j = perm[j]
        out.append(cyc)
    return out


def _finish(chi: Counter) -> dict[int, int]:
    f = {}
    for k, x in sorted(chi.items()):
        if x % k:
            raise InvariantViolation(f"chi_c of the orbit-length-{k} locus is {x}, not divisible by {k}")
        if x:
            f[k] = x // k
    return f


def orbit_exponents_perm(P: HalfEdgeGraph, pv, ph) -> dict[int, int]:
    """Cellwise rule on a graph automorphism given by vertex and half-edge permutations."""
    chi: Counter = Counter()
    for cyc in _cycles(pv):
        chi[len(cyc)] += len(cyc)
    edge_of = {}
    for i, (a, b) in enumerate(P.edges):
        edge_of[a] = i
        edge_of[b] = i
    done = set()
    for a, b in P.edges:
        if a in done:
            continue
        m = 0
        x = a
        while True:
            done.add(x)
            done.add(P.partner[x])
            x = ph[x]
            m += 1
            if edge_of[x] == edge_of[a]:
                break
        if x == a:
            chi[m] -= m
        else:  # tau^m swaps the two halves
            chi[m] += m
            chi[2 * m] -= 2 * m
    return _finish(chi)


def orbit_exponents(cover: AdmissibleCover, tau: CoverAutomorphism) -> dict[int, int]:
    f = orbit_exponents_perm(cover.source, tau.phi_vertices, tau.phi_halves)
    if sum(k * x for k, x in f.items()) != cover.chi_c:
        raise InvariantViolation("orbit exponents do not partition chi_c(P)")
    return f


def orbit_exponents_subdivision_oracle(cover: AdmissibleCover, tau: CoverAutomorphism) -> dict[int, int]:
    """Subdivide each edge into four pieces and count cell orbits.

    0-cells: vertices, a point q_h inside every half-edge, edge midpoints.
    1-cells: (root(h), q_h) and (q_h, midpoint) for each half-edge h.
    No cell is mapped to itself nontrivially, so orbit lengths of cells are
    orbit lengths of their points.
    """
    P = cover.source
    pv, ph = tau.phi_vertices, tau.phi_halves
    edge_of = {}
    for i, (a, b) in enumerate(P.edges):
        edge_of[a] = i
        edge_of[b] = i
    cells0: dict = {}
    cells1: dict = {}
    for x in range(P.n_vertices):
        cells0[("v", x)] = ("v", pv[x])
    for a, b in P.edges:
        cells0[("m", edge_of[a])] = ("m", edge_of[ph[a]])
        for h in (a, b):
            cells0[("q", h)] = ("q", ph[h])
            cells1[("s", h)] = ("s", ph[h])
            cells1[("t", h)] = ("t", ph[h])
    chi: Counter = Counter()
    for cells, sign in ((cells0, 1), (cells1, -1)):
        seen = set()
        for c in cells:
            if c in seen:
                continue
            k = 0
            d = c
            while d not in seen:
                seen.add(d)
                d = cells[d]
                k += 1
            chi[k] += sign * k
    return _finish(chi)


def edge_sign(tree: HalfEdgeGraph, psi: TreeAutomorphism) -> int:
    return psi.edge_sign(tree)


# --------------------------------------------------------------- marking lifts


def lift_markings(cover: AdmissibleCover, assignment: dict[str, int]) -> list[AdmissibleCover]:
    """Inequivalent marking lifts: label -> base leg, lifted to a point of the leg's fiber.

    Two lifts are identified when a cover automorphism over the identity of the
    base carries one to the other.  Representatives are the lexicographically
    least choices in their orbits.
    """
    labels = sorted(assignment)
    legs = [assignment[lab] for lab in labels]
    for h in legs:
        if not cover.target.is_leg(h):
            raise InputError(f"base half-edge {h} is not a leg")
    ts = translations(cover, include_legs=True)
    hcos = cover.half_cosets
    G = cover.group
    choices = list(itertools.product(*(range(len(hcos[h])) for h in legs)))
    seen = set()
    reps = []
    for ch in choices:
        if ch in seen:
            continue
        orbit = set()
        for t in ts:
            img = tuple(hcos[h].coset_of(G.add(hcos[h].reps[j], hcos[h].reps[t.half[h]])) for h, j in zip(legs, ch))
            orbit.add(img)
        seen |= orbit
        reps.append(min(orbit))
    out = []
    for rep in sorted(reps):
        marking = {lab: cover.hfib[h][j] for lab, h, j in zip(labels, legs, rep)}
        out.append(cover.with_marking(marking))
    return out


def hyperelliptic_genus_check(cover: AdmissibleCover, genus: int) -> None:
    if not cover.source.is_connected():
        raise InvariantViolation("hyperelliptic cover is disconnected")
    if cover.betti1() + sum(cover.genus) != genus:
        raise InvariantViolation("b1(P) + sum of vertex genera differs from g")


def deck_translation(cover: AdmissibleCover, g: Element) -> Translation:
    vt = tuple(cs.coset_of(g) for cs in cover.vertex_cosets)
    ht = tuple(cs.coset_of(g) for cs in cover.half_cosets)
    return Translation(vt, ht)


def group_order_check(auts: list[CoverAutomorphism]) -> bool:
    """Closure and inverses of a list of automorphisms given by their permutations."""
    elems = {(a.phi_vertices, a.phi_halves) for a in auts}
    for a in auts:
        for b in auts:
            if a.compose(b) not in elems:
                return False
    ident_v = tuple(range(len(auts[0].phi_vertices)))
    ident_h = tuple(range(len(auts[0].phi_halves)))
    return (ident_v, ident_h) in elems
