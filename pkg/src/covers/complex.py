"""The graph complex of pointed hyperelliptic double covers of trees.

An object is stored as its target tree: vertex weights count the unlabelled
Weierstrass legs (explicit legs "w1", "w2", ... in the labelled variant) and the
n marked legs carry labels "i" or "i.s".  The suffix s is the sheet of the lift
of marking i; it is present exactly when the marked leg sits at an unramified
vertex.  The two sheets over a maximal connected set of unramified vertices (a
region) can be swapped independently, so sheets are normalized per region with
the smallest marking on sheet 0.  Markings at ramified vertices carry no data.

Automorphisms of the target fixing the markings preserve the same-sheet relation,
so two objects are isomorphic exactly when these decorated trees are.
"""

from __future__ import annotations

import json
import logging
import math
from collections import defaultdict
from dataclasses import dataclass, field

from .cover import AdmissibleCover, Z2, build_cover, derive_edge_monodromy
from .errors import InputError, InvariantViolation
from .graphs import (
    HalfEdgeGraph,
    automorphism_count,
    canonical_form,
    contract_edge_with_maps,
    has_odd_edge_automorphism,
    permutation_sign,
)
from .linalg import kernel_basis, rank_exact, rank_modular
from .trees import enumerate_stable_trees

log = logging.getLogger(__name__)

VARIANTS = ("quotient", "labelled")
SUBCOMPLEXES = ("full", "rep", "w3", "repw3")


# ------------------------------------------------------------ leg decorations


def is_branch_label(lab: str | None) -> bool:
    return lab is not None and lab.startswith("w")


def mark_of(lab: str | None) -> tuple[int, int | None] | None:
    """(marking, sheet or None) for a marked leg label, None for other legs."""
    if lab is None or is_branch_label(lab):
        return None
    i, _, s = lab.partition(".")
    return int(i), (int(s) if s else None)


def branch_count(tree: HalfEdgeGraph, v: int) -> int:
    return tree.weight[v] + sum(1 for h in tree.legs_at(v) if is_branch_label(tree.label[h]))


@dataclass(frozen=True)
class Structure:
    """Ramification data of the double cover of a target tree."""

    odd: tuple[bool, ...]  # per half-edge: the far side of the edge has an odd number of branch legs
    ramified: tuple[bool, ...]
    region: tuple[int | None, ...]  # region index of unramified vertices


def structure(tree: HalfEdgeGraph) -> Structure:
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
    below = [branch_count(tree, v) % 2 for v in range(n)]
    for v in reversed(order[1:]):
        below[parent[v]] ^= below[v]
    total = below[0]
    if total:
        raise InvariantViolation("odd number of branch legs")
    odd = [False] * tree.n_half_edges
    for v in order[1:]:
        h = up[v]
        # both sides of an edge have the same parity since the total is even
        odd[h] = odd[tree.partner[h]] = bool(below[v])
    ramified = tuple(branch_count(tree, v) > 0 or any(odd[h] for h in tree.edge_halves_at(v)) for v in range(n))
    region: list[int | None] = [None] * n
    k = 0
    for v in range(n):
        if ramified[v] or region[v] is not None:
            continue
        region[v] = k
        todo = [v]
        while todo:
            x = todo.pop()
            for y in tree.neighbours(x):
                if not ramified[y] and region[y] is None:
                    region[y] = k
                    todo.append(y)
        k += 1
    return Structure(tuple(odd), ramified, tuple(region))


def marked_legs(tree: HalfEdgeGraph) -> dict[int, int]:
    out = {}
    for h in tree.legs:
        m = mark_of(tree.label[h])
        if m is not None:
            out[m[0]] = h
    return out


def normalize_lifts(tree: HalfEdgeGraph, st: Structure | None = None) -> HalfEdgeGraph:
    """Drop sheet data at ramified vertices and put each region's smallest marking on sheet 0."""
    st = st or structure(tree)
    label = list(tree.label)
    flip: dict[int, int] = {}
    for i, h in sorted(marked_legs(tree).items()):
        r = st.region[tree.root[h]]
        if r is None:
            label[h] = str(i)
            continue
        s = mark_of(tree.label[h])[1]
        if s is None:
            raise InvariantViolation(f"marking {i} at an unramified vertex has no sheet")
        if r not in flip:
            flip[r] = s
        label[h] = f"{i}.{s ^ flip[r]}"
    return tree.replace(label=tuple(label))


def lift_choices(tree: HalfEdgeGraph, st: Structure | None = None) -> list[HalfEdgeGraph]:
    """All inequivalent marking lifts of a tree whose marked legs are labelled "i"."""
    st = st or structure(tree)
    by_region: dict[int, list[tuple[int, int]]] = defaultdict(list)
    for i, h in sorted(marked_legs(tree).items()):
        r = st.region[tree.root[h]]
        if r is not None:
            by_region[r].append((i, h))
    free = [h for r in sorted(by_region) for _, h in by_region[r][1:]]
    fixed = [by_region[r][0] for r in sorted(by_region)]
    out = []
    for bits in range(2 ** len(free)):
        label = list(tree.label)
        for i, h in fixed:
            label[h] = f"{i}.0"
        for k, h in enumerate(free):
            label[h] = f"{mark_of(tree.label[h])[0]}.{(bits >> k) & 1}"
        out.append(tree.replace(label=tuple(label)))
    return out


# ------------------------------------------------------------------ predicates


def _side_contents(tree: HalfEdgeGraph, h: int) -> tuple[int, list[tuple[int, int | None]]]:
    """Branch legs and markings on the far side of half-edge h (the side containing partner(h))."""
    start = tree.root[tree.partner[h]]
    seen = {start, tree.root[h]}
    todo = [start]
    branches = 0
    marks = []
    while todo:
        v = todo.pop()
        branches += branch_count(tree, v)
        for x in tree.legs_at(v):
            m = mark_of(tree.label[x])
            if m is not None:
                marks.append(m)
        for w in tree.neighbours(v):
            if w not in seen:
                seen.add(w)
                todo.append(w)
    return branches, marks


def _edge_sides(tree: HalfEdgeGraph, e: tuple[int, int]):
    a, b = e
    return _side_contents(tree, a), _side_contents(tree, b)


def is_forbidden(tree: HalfEdgeGraph) -> bool:
    """Whether some edge contracts onto a type (1) or type (2) cover.

    Type (2): one side carries exactly one marking and one Weierstrass leg.
    Type (1): one side carries exactly two markings, no Weierstrass legs, and the
    markings sit on different sheets.
    """
    for e in tree.edges:
        for branches, marks in _edge_sides(tree, e):
            if branches == 1 and len(marks) == 1:
                return True
            if branches == 0 and len(marks) == 2 and marks[0][1] != marks[1][1]:
                return True
    return False


def has_repeated_marking(tree: HalfEdgeGraph, st: Structure | None = None) -> bool:
    """Some vertex of the source graph carries two or more markings."""
    st = st or structure(tree)
    for v in range(tree.n_vertices):
        ms = [mark_of(tree.label[h]) for h in tree.legs_at(v)]
        ms = [m for m in ms if m is not None]
        if len(ms) < 2:
            continue
        if st.ramified[v]:
            return True
        sheets = [s for _, s in ms]
        if len(set(sheets)) < len(sheets):
            return True
    return False


def has_weight_three(tree: HalfEdgeGraph) -> bool:
    return any(branch_count(tree, v) >= 3 for v in range(tree.n_vertices))


def k_ends(tree: HalfEdgeGraph, k: int) -> list[int]:
    """Half-edges h pointing at a leaf vertex with exactly k Weierstrass legs and no markings.

    Contracting every other edge turns such an edge into the one-edge cover with
    a weight-k, unmarked vertex.  Only leaf vertices are taken as the far side:
    for k = 2 nothing else is possible, and for k = 3 this is the reading under
    which maximal expansions are unique.
    """
    out = []
    for a, b in tree.edges:
        for h in (a, b):
            v = tree.root[tree.partner[h]]
            if len(tree.edge_halves_at(v)) != 1 or branch_count(tree, v) != k:
                continue
            if all(mark_of(tree.label[x]) is None for x in tree.legs_at(v)):
                out.append(h)
    return out


def supporting_edges(tree: HalfEdgeGraph) -> list[tuple[int, frozenset[int]]]:
    """(half-edge, support S): the far side holds only the markings S, |S| >= 2, all on one sheet."""
    out = []
    for e in tree.edges:
        for h, (branches, marks) in zip(e, _edge_sides(tree, e)):
            if branches == 0 and len(marks) >= 2 and len({s for _, s in marks}) == 1:
                out.append((h, frozenset(i for i, _ in marks)))
    return out


# --------------------------------------------------------------------- objects


@dataclass(frozen=True)
class GammaObject:
    graph: HalfEdgeGraph
    code: bytes
    n_edges: int
    rep: bool
    w3: bool
    odd: bool  # an automorphism permutes the edges oddly: the generator vanishes

    @property
    def degree(self) -> int:
        return self.n_edges - 1

    def cover(self) -> AdmissibleCover:
        """The double cover with the marking lifted to the recorded sheets."""
        t = self.graph
        mu = [((1,) if is_branch_label(lab) else (0,)) if t.partner[h] == h else None for h, lab in enumerate(t.label)]
        cov = build_cover(derive_edge_monodromy(t.replace(mu=tuple(mu)), Z2, (1,)), Z2, (1,))
        marking = {}
        for i, h in marked_legs(t).items():
            s = mark_of(t.label[h])[1]
            marking[str(i)] = cov.hfib[h][s or 0]
        return cov.with_marking(marking)

    def to_json(self) -> dict:
        return {"code": self.code.decode(), "edges": self.n_edges, "rep": self.rep, "w3": self.w3, "zero": self.odd}


def make_object(tree: HalfEdgeGraph) -> GammaObject:
    st = structure(tree)
    form = canonical_form(tree)
    return GammaObject(
        graph=tree,
        code=form.code.encode("ascii"),
        n_edges=tree.n_edges,
        rep=has_repeated_marking(tree, st),
        w3=has_weight_three(tree),
        odd=has_odd_edge_automorphism(tree),
    )


def _keep(obj: GammaObject, subcomplex: str) -> bool:
    if subcomplex == "full":
        return True
    if subcomplex == "rep":
        return obj.rep
    if subcomplex == "w3":
        return obj.w3
    return obj.rep and obj.w3


def target_trees(g: int, n: int, variant: str = "quotient") -> list[HalfEdgeGraph]:
    if g < 2 or n < 0:
        raise InputError("need g >= 2 and n >= 0")
    marks = tuple(str(i) for i in range(1, n + 1))
    if variant == "quotient":
        return enumerate_stable_trees(2 * g + 2, marks)
    if variant == "labelled":
        ws = tuple(f"w{k}" for k in range(1, 2 * g + 3))
        return enumerate_stable_trees(0, marks + ws, cap=0)
    raise InputError(f"unknown variant {variant!r}")


def enumerate_gamma(g: int, n: int, variant: str = "quotient", subcomplex: str = "full") -> list[GammaObject]:
    """Isomorphism classes of objects (zero generators included, flagged ``odd``), sorted by (edges, code)."""
    if subcomplex not in SUBCOMPLEXES:
        raise InputError(f"unknown subcomplex {subcomplex!r}")
    out: dict[bytes, GammaObject] = {}
    for tree in target_trees(g, n, variant):
        st = structure(tree)
        for lifted in lift_choices(tree, st):
            if is_forbidden(lifted):
                continue
            obj = make_object(lifted)
            if not _keep(obj, subcomplex):
                continue
            if obj.code in out:
                raise InvariantViolation("two lift choices gave isomorphic objects")
            out[obj.code] = obj
    return sorted(out.values(), key=lambda o: (o.n_edges, o.code))


# ------------------------------------------------------------------- the complex


def edge_order(tree: HalfEdgeGraph, form=None) -> list[frozenset[int]]:
    """The canonical edge order: edges to parents in the canonical preorder."""
    form = form or canonical_form(tree)
    return [frozenset((form.up[v], tree.partner[form.up[v]])) for v in form.order[1:]]


def contract(tree: HalfEdgeGraph, h: int) -> tuple[HalfEdgeGraph, list[int | None]]:
    new, hmap, _ = contract_edge_with_maps(tree, h)
    return normalize_lifts(new), hmap


def face(tree: HalfEdgeGraph, order: list[frozenset[int]], i: int) -> tuple[bytes, int]:
    """Contract the i-th edge of an ordered object: (code of the result, sign against its canonical order)."""
    h = min(order[i])
    new, hmap = contract(tree, h)
    induced = [frozenset(hmap[x] for x in e) for k, e in enumerate(order) if k != i]
    form = canonical_form(new)
    canon = edge_order(new, form)
    pos = {e: k for k, e in enumerate(canon)}
    perm = [pos[e] for e in induced]
    return form.code.encode("ascii"), permutation_sign(perm)


def _parity(p: int) -> int:
    return -1 if p % 2 else 1


@dataclass
class ChainComplexQ:
    """Degree p holds generators with p + 1 edges, from p = -1 upward."""

    g: int
    n: int
    variant: str
    subcomplex: str
    basis: dict[int, list[GammaObject]]
    boundary: dict[int, list[dict[int, int]]]  # degree p: one row per basis element of degree p
    index: dict[bytes, tuple[int, int]] = field(default_factory=dict)

    @property
    def degrees(self) -> list[int]:
        return sorted(self.basis)

    def dims(self) -> list[int]:
        return [len(self.basis[p]) for p in self.degrees]

    def reduced_euler(self) -> int:
        return sum(_parity(p) * len(self.basis[p]) for p in self.degrees)

    def boundary_of(self, p: int, chain: dict[int, int]) -> dict[int, int]:
        out: dict[int, int] = defaultdict(int)
        for j, c in chain.items():
            for k, x in self.boundary[p][j].items():
                out[k] += c * x
        return {k: x for k, x in out.items() if x}


def build_complex(objects: list[GammaObject], g: int = 0, n: int = 0, variant: str = "quotient", subcomplex: str = "full") -> ChainComplexQ:
    gens = [o for o in objects if not o.odd]
    top = max((o.n_edges for o in objects), default=0)
    basis: dict[int, list[GammaObject]] = {p: [] for p in range(-1, top)}
    for o in gens:
        basis[o.degree].append(o)
    index = {}
    for p, objs in basis.items():
        for j, o in enumerate(objs):
            index[o.code] = (p, j)
    known = {o.code for o in objects}
    boundary: dict[int, list[dict[int, int]]] = {p: [] for p in basis}
    for p in basis:
        for o in basis[p]:
            order = edge_order(o.graph)
            row: dict[int, int] = defaultdict(int)
            for i in range(len(order)):
                code, sign = face(o.graph, order, i)
                if code not in known:
                    raise InvariantViolation("a face of an object lies outside the enumerated family")
                if code not in index:
                    continue  # zero generator
                q, k = index[code]
                if q != p - 1:
                    raise InvariantViolation("face in the wrong degree")
                row[k] += _parity(i) * sign
            boundary[p].append({k: x for k, x in row.items() if x})
    cx = ChainComplexQ(g, n, variant, subcomplex, basis, boundary, index)
    check_d_squared(cx)
    return cx


def check_d_squared(cx: ChainComplexQ) -> None:
    for p in cx.degrees:
        if p - 1 not in cx.basis:
            continue
        for j, row in enumerate(cx.boundary[p]):
            if cx.boundary_of(p - 1, row):
                raise InvariantViolation(f"boundary squared is nonzero on generator {j} of degree {p}")


def gamma_complex(g: int, n: int, variant: str = "quotient", subcomplex: str = "full") -> ChainComplexQ:
    objs = enumerate_gamma(g, n, variant, subcomplex)
    return build_complex(objs, g, n, variant, subcomplex)


def betti(cx: ChainComplexQ, method: str = "exact") -> list[int]:
    """Reduced Betti numbers, one per degree starting at -1."""
    rank = rank_exact if method == "exact" else rank_modular
    ranks = {p: rank(cx.boundary[p]) if p - 1 in cx.basis else 0 for p in cx.degrees}
    out = []
    for p in cx.degrees:
        b = len(cx.basis[p]) - ranks[p] - ranks.get(p + 1, 0)
        if b < 0:
            raise InvariantViolation("negative Betti number")
        out.append(b)
    return out


def betti_table(cx: ChainComplexQ, method: str = "exact") -> dict:
    return {
        "g": cx.g,
        "n": cx.n,
        "variant": cx.variant,
        "subcomplex": cx.subcomplex,
        "degrees": cx.degrees,
        "dims": cx.dims(),
        "betti": betti(cx, method),
    }


def betti_json(cx: ChainComplexQ, method: str = "exact") -> str:
    return json.dumps(betti_table(cx, method), sort_keys=True)


# ---------------------------------------------------- Euler characteristics


def chain_dims(objects: list[GammaObject]) -> dict[int, int]:
    out: dict[int, int] = defaultdict(int)
    for o in objects:
        if not o.odd:
            out[o.degree] += 1
    return dict(out)


def chi_c_from_dims(dims: dict[int, int]) -> int:
    """Weight-zero compactly supported Euler characteristic: minus the reduced Euler characteristic."""
    return -sum(_parity(p) * d for p, d in dims.items())


def labelled_dims_by_orbits(g: int, n: int, objects: list[GammaObject] | None = None) -> dict[int, int]:
    """Chain dimensions of the labelled variant, counted as S_{2g+2}-orbits over quotient objects.

    Each quotient object has (2g+2)! / (prod_v w_v! * |Aut|) Weierstrass labellings;
    a stable tree automorphism fixing every leg is trivial, so the action is free.
    """
    objects = objects if objects is not None else enumerate_gamma(g, n, "quotient")
    total = math.factorial(2 * g + 2)
    out: dict[int, int] = defaultdict(int)
    for o in objects:
        stab = automorphism_count(o.graph)
        for w in o.graph.weight:
            stab *= math.factorial(w)
        q, r = divmod(total, stab)
        if r:
            raise InvariantViolation("stabilizer order does not divide (2g+2)!")
        out[o.degree] += q
    return dict(out)


# ------------------------------------------------------------- the top cycle


@dataclass
class TopCycle:
    g: int
    generators: list[GammaObject]
    coefficients: list[int]  # against the edge order of the first generator carried to the second
    boundaries_nonzero: list[bool]
    transposition_sign: int


def _relabel_marks(tree: HalfEdgeGraph, perm: dict[int, int]) -> HalfEdgeGraph:
    label = list(tree.label)
    for h in tree.legs:
        m = mark_of(label[h])
        if m is not None:
            i, s = m
            label[h] = str(perm.get(i, i)) + ("" if s is None else f".{s}")
    return normalize_lifts(tree.replace(label=tuple(label)))


def _sign_against_canonical(tree: HalfEdgeGraph, order: list[frozenset[int]]) -> tuple[bytes, int]:
    form = canonical_form(tree)
    pos = {e: k for k, e in enumerate(edge_order(tree, form))}
    return form.code.encode("ascii"), permutation_sign([pos[e] for e in order])


def top_cycle(g: int, cx: ChainComplexQ | None = None) -> TopCycle:
    """The cycle spanning the top homology of the n = 2 complex.

    Top-degree cycles are computed as the kernel of the boundary on all
    generators with 2g + 1 edges.  The kernel must be a line spanned by the two
    lifts of a single trivalent tree; presenting both with the same edge order
    of that tree, the cycle is their difference.
    """
    cx = cx or gamma_complex(g, 2)
    top = 2 * g
    gens = cx.basis.get(top, [])
    rows = cx.boundary.get(top, [])
    ker = kernel_basis(rows)
    if len(ker) != 1:
        raise InvariantViolation(f"top-degree cycles span dimension {len(ker)}, expected 1")
    vec = ker[0]
    if len(vec) != 2:
        raise InvariantViolation("the top cycle is not supported on two generators")
    i, j = sorted(vec)
    a, b = gens[i], gens[j]
    fa = canonical_form(_strip_sheets(a.graph))
    fb = canonical_form(_strip_sheets(b.graph))
    if fa.code != fb.code:
        raise InvariantViolation("the top cycle involves two different target trees")
    # carry a's canonical edge order to b through an isomorphism of the underlying trees
    vmap = dict(zip(fa.order, fb.order))
    order_a = edge_order(a.graph)
    order_b = [frozenset(_edge_halves(b.graph, [vmap[a.graph.root[x]] for x in e])) for e in order_a]
    _, sb = _sign_against_canonical(b.graph, order_b)
    coeffs = [vec[i], vec[j] * sb]
    if coeffs[0] < 0:
        coeffs = [-c for c in coeffs]
    nonzero = [bool(rows[i]), bool(rows[j])]
    # the transposition of the two markings, applied to the cycle in canonical coordinates
    image: dict[int, int] = defaultdict(int)
    for k in (i, j):
        o = gens[k]
        img = _relabel_marks(o.graph, {1: 2, 2: 1})
        code, s = _sign_against_canonical(img, edge_order(o.graph))  # relabelling keeps half-edge indices
        q, idx = cx.index[code]
        image[idx] += vec[k] * s
    image = {k: x for k, x in image.items() if x}
    if image == vec:
        act = 1
    elif image == {k: -x for k, x in vec.items()}:
        act = -1
    else:
        raise InvariantViolation("the transposition does not preserve the top cycle line")
    return TopCycle(g, [a, b], coeffs, nonzero, act)


def _strip_sheets(tree: HalfEdgeGraph) -> HalfEdgeGraph:
    return tree.replace(label=tuple(None if lab is None else lab.split(".")[0] for lab in tree.label))


def _edge_halves(tree: HalfEdgeGraph, ends) -> set[int]:
    u, v = list(ends)
    for h, p in tree.edges:
        if {tree.root[h], tree.root[p]} == {u, v}:
            return {h, p}
    raise InvariantViolation("vertex map does not carry edges to edges")


# -------------------------------------------------------- end expansions


def end_contractions(objects: list[GammaObject], k: int) -> dict[bytes, set[bytes]]:
    """For each object, the objects reached by contracting one k-end."""
    out = {}
    for o in objects:
        found = set()
        for h in k_ends(o.graph, k):
            new, _ = contract(o.graph, h)
            found.add(canonical_form(new).code.encode("ascii"))
        out[o.code] = found
    return out


def expansion_poset(objects: list[GammaObject], k: int) -> dict[bytes, set[bytes]]:
    """Object -> the objects it is obtained from by contracting one k-end."""
    up: dict[bytes, set[bytes]] = defaultdict(set)
    for x, ys in end_contractions(objects, k).items():
        for y in ys:
            up[y].add(x)
    return dict(up)


def maximal_expansions(up: dict[bytes, set[bytes]], code: bytes) -> set[bytes]:
    """Maximal elements of the poset of expansions of one object."""
    seen = {code}
    todo = [code]
    while todo:
        y = todo.pop()
        for x in up.get(y, ()):
            if x not in seen:
                seen.add(x)
                todo.append(x)
    return {x for x in seen if not up.get(x)}
