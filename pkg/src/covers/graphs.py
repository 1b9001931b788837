"""Half-edge graphs, edge contraction, and canonical forms of decorated trees.

A graph is stored positionally: half-edge ``h`` sits at vertex ``root[h]`` and is
glued to ``partner[h]``; legs are the fixed points of ``partner``.  Trees carry
their decorations (vertex weights, leg labels, half-edge monodromies) inside the
same record, and every notion of isomorphism used downstream goes through the
canonical code computed here.
"""

from __future__ import annotations

import itertools
import json
import math
import re
from collections import deque
from dataclasses import dataclass, field
from functools import cached_property

from .errors import InputError

Element = tuple[int, ...]

_LABEL = re.compile(r"[A-Za-z0-9_.+\-]*")


def mu_str(mu: Element | None) -> str:
    return "" if mu is None else ".".join(str(x) for x in mu)


def parse_mu(text: str) -> Element | None:
    return None if text == "" else tuple(int(x) for x in text.split("."))


@dataclass(frozen=True)
class HalfEdgeGraph:
    root: tuple[int, ...]
    partner: tuple[int, ...]
    weight: tuple[int, ...]
    genus: tuple[int, ...] = ()
    label: tuple[str | None, ...] = ()
    mu: tuple[Element | None, ...] = ()

    def __post_init__(self) -> None:
        nv, nh = len(self.weight), len(self.root)
        if not self.genus:
            object.__setattr__(self, "genus", (0,) * nv)
        if not self.label:
            object.__setattr__(self, "label", (None,) * nh)
        if not self.mu:
            object.__setattr__(self, "mu", (None,) * nh)
        if len(self.partner) != nh or len(self.label) != nh or len(self.mu) != nh or len(self.genus) != nv:
            raise InputError("inconsistent array lengths in half-edge graph")
        for h, p in enumerate(self.partner):
            if not 0 <= p < nh or self.partner[p] != h:
                raise InputError(f"partner map is not an involution at half-edge {h}")
            if not 0 <= self.root[h] < nv:
                raise InputError(f"half-edge {h} rooted at missing vertex {self.root[h]}")
        for lab in self.label:
            if lab is not None and not _LABEL.fullmatch(lab):
                raise InputError(f"illegal leg label {lab!r}")
        if any(w < 0 for w in self.weight) or any(x < 0 for x in self.genus):
            raise InputError("weights and genera must be nonnegative")

    @property
    def n_vertices(self) -> int:
        return len(self.weight)

    @property
    def n_half_edges(self) -> int:
        return len(self.root)

    def is_leg(self, h: int) -> bool:
        return self.partner[h] == h

    @cached_property
    def star(self) -> tuple[tuple[int, ...], ...]:
        out: list[list[int]] = [[] for _ in range(self.n_vertices)]
        for h, v in enumerate(self.root):
            out[v].append(h)
        return tuple(tuple(x) for x in out)

    @cached_property
    def legs(self) -> tuple[int, ...]:
        return tuple(h for h, p in enumerate(self.partner) if h == p)

    @cached_property
    def edges(self) -> tuple[tuple[int, int], ...]:
        """Edges as (h, partner(h)) with h < partner(h), in half-edge order."""
        return tuple((h, p) for h, p in enumerate(self.partner) if h < p)

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    def legs_at(self, v: int) -> tuple[int, ...]:
        return tuple(h for h in self.star[v] if self.partner[h] == h)

    def edge_halves_at(self, v: int) -> tuple[int, ...]:
        return tuple(h for h in self.star[v] if self.partner[h] != h)

    def valence(self, v: int) -> int:
        """Half-edges at v, counting unlabelled weight legs."""
        return len(self.star[v]) + self.weight[v]

    def neighbours(self, v: int) -> list[int]:
        return [self.root[self.partner[h]] for h in self.star[v] if self.partner[h] != h]

    def is_connected(self) -> bool:
        if self.n_vertices == 0:
            return False
        seen = {0}
        todo = [0]
        while todo:
            v = todo.pop()
            for w in self.neighbours(v):
                if w not in seen:
                    seen.add(w)
                    todo.append(w)
        return len(seen) == self.n_vertices

    def is_tree(self) -> bool:
        return self.is_connected() and self.n_edges == self.n_vertices - 1

    def is_stable(self) -> bool:
        return all(self.valence(v) >= 3 for v in range(self.n_vertices))

    def replace(self, **kw) -> HalfEdgeGraph:
        data = dict(root=self.root, partner=self.partner, weight=self.weight, genus=self.genus, label=self.label, mu=self.mu)
        data.update(kw)
        return HalfEdgeGraph(**data)

    def permuted(self, vperm: list[int], hperm: list[int]) -> HalfEdgeGraph:
        """The same graph with vertex v stored at vperm[v] and half-edge h at hperm[h]."""
        nv, nh = self.n_vertices, self.n_half_edges
        root = [0] * nh
        partner = [0] * nh
        label: list = [None] * nh
        mu: list = [None] * nh
        weight = [0] * nv
        genus = [0] * nv
        for h in range(nh):
            root[hperm[h]] = vperm[self.root[h]]
            partner[hperm[h]] = hperm[self.partner[h]]
            label[hperm[h]] = self.label[h]
            mu[hperm[h]] = self.mu[h]
        for v in range(nv):
            weight[vperm[v]] = self.weight[v]
            genus[vperm[v]] = self.genus[v]
        return HalfEdgeGraph(tuple(root), tuple(partner), tuple(weight), tuple(genus), tuple(label), tuple(mu))

    def to_json(self) -> dict:
        verts = [{"weight": w, "genus": g} for w, g in zip(self.weight, self.genus)]
        halves = []
        for h in range(self.n_half_edges):
            d: dict = {"root": self.root[h], "partner": self.partner[h]}
            if self.label[h] is not None:
                d["label"] = self.label[h]
            if self.mu[h] is not None:
                d["mu"] = list(self.mu[h])
            halves.append(d)
        return {"vertices": verts, "half_edges": halves}

    @classmethod
    def from_json(cls, data: dict | str) -> HalfEdgeGraph:
        if isinstance(data, str):
            data = json.loads(data)
        verts = data["vertices"]
        halves = data["half_edges"]
        return cls(
            root=tuple(h["root"] for h in halves),
            partner=tuple(h["partner"] for h in halves),
            weight=tuple(v.get("weight", 0) for v in verts),
            genus=tuple(v.get("genus", 0) for v in verts),
            label=tuple(h.get("label") for h in halves),
            mu=tuple(tuple(h["mu"]) if h.get("mu") is not None else None for h in halves),
        )


def build_tree(
    weights: list[int] | tuple[int, ...],
    edges: list[tuple[int, int]],
    legs: list[tuple[int, str | None, Element | None]] = (),
    edge_mu: dict[tuple[int, int], Element] | None = None,
) -> HalfEdgeGraph:
    """Assemble a graph from vertex weights, an edge list and explicit legs.

    ``edge_mu[(u, v)]`` is the monodromy of the half-edge of edge (u, v) rooted at u.
    """
    root: list[int] = []
    partner: list[int] = []
    label: list = []
    mu: list = []
    for u, v in edges:
        a, b = len(root), len(root) + 1
        root += [u, v]
        partner += [b, a]
        label += [None, None]
        if edge_mu is not None:
            mu += [edge_mu.get((u, v)), edge_mu.get((v, u))]
        else:
            mu += [None, None]
    for v, lab, m in legs:
        h = len(root)
        root.append(v)
        partner.append(h)
        label.append(lab)
        mu.append(m)
    return HalfEdgeGraph(tuple(root), tuple(partner), tuple(weights), (), tuple(label), tuple(mu))


def path_tree(weights: list[int]) -> HalfEdgeGraph:
    return build_tree(weights, [(i, i + 1) for i in range(len(weights) - 1)])


def star_tree(centre: int, arms: list[int]) -> HalfEdgeGraph:
    return build_tree([centre, *arms], [(0, i + 1) for i in range(len(arms))])


# ---------------------------------------------------------------- contraction


def contract_edge_with_maps(graph: HalfEdgeGraph, h: int) -> tuple[HalfEdgeGraph, list[int | None], list[int]]:
    """Contract the edge containing half-edge h.

    Returns the new graph, the map old half-edge -> new half-edge (None for the
    two removed halves) and the map old vertex -> new vertex.  Weights add and
    genera add; callers that need another genus rule post-process.
    """
    p = graph.partner[h]
    if p == h:
        raise InputError(f"half-edge {h} is a leg, not an edge")
    u, v = graph.root[h], graph.root[p]
    if u == v:
        raise InputError("contracting a self-loop is not supported")
    keep, gone = min(u, v), max(u, v)
    vmap = []
    for x in range(graph.n_vertices):
        y = keep if x == gone else x
        vmap.append(y - (1 if y > gone else 0))
    hmap: list[int | None] = []
    k = 0
    for x in range(graph.n_half_edges):
        if x in (h, p):
            hmap.append(None)
        else:
            hmap.append(k)
            k += 1
    root, partner, label, mu = [], [], [], []
    for x in range(graph.n_half_edges):
        if hmap[x] is None:
            continue
        root.append(vmap[graph.root[x]])
        partner.append(hmap[graph.partner[x]])
        label.append(graph.label[x])
        mu.append(graph.mu[x])
    weight = [0] * (graph.n_vertices - 1)
    genus = [0] * (graph.n_vertices - 1)
    for x in range(graph.n_vertices):
        weight[vmap[x]] += graph.weight[x]
        genus[vmap[x]] += graph.genus[x]
    new = HalfEdgeGraph(tuple(root), tuple(partner), tuple(weight), tuple(genus), tuple(label), tuple(mu))
    return new, hmap, vmap


def contract_edge(graph: HalfEdgeGraph, h: int) -> HalfEdgeGraph:
    return contract_edge_with_maps(graph, h)[0]


# ------------------------------------------------------------ canonical forms


def leg_token(graph: HalfEdgeGraph, h: int) -> str:
    lab = graph.label[h]
    return f"{'' if lab is None else lab}/{mu_str(graph.mu[h])}"


def vertex_token(graph: HalfEdgeGraph, v: int) -> str:
    legs = sorted(leg_token(graph, h) for h in graph.star[v] if graph.partner[h] == h)
    g = graph.genus[v]
    return f"{graph.weight[v]}{'g' + str(g) if g else ''}:{','.join(legs)}"


def centres(graph: HalfEdgeGraph) -> list[int]:
    n = graph.n_vertices
    if n <= 2:
        return list(range(n))
    deg = [len(graph.neighbours(v)) for v in range(n)]
    layer = [v for v in range(n) if deg[v] <= 1]
    remaining = n
    removed = set()
    while remaining > 2:
        remaining -= len(layer)
        nxt = []
        for v in layer:
            removed.add(v)
            for w in graph.neighbours(v):
                if w in removed:
                    continue
                deg[w] -= 1
                if deg[w] == 1:
                    nxt.append(w)
        layer = nxt
    return sorted(v for v in range(n) if v not in removed)


@dataclass
class RootedForm:
    """Center-rooted canonical structure of a tree."""

    graph: HalfEdgeGraph
    root: int
    code: str
    parent: dict[int, int]
    up: dict[int, int]  # vertex -> its half-edge pointing to the parent
    children: dict[int, list[int]]  # children sorted by child token
    token: dict[int, str]  # vertex -> "<mu>" + subtree code (for non-root vertices)
    subcode: dict[int, str]
    order: list[int] = field(default_factory=list)  # preorder

    def preorder(self, v: int) -> list[int]:
        out = []
        stack = [v]
        while stack:
            x = stack.pop()
            out.append(x)
            stack.extend(reversed(self.children[x]))
        return out


def rooted_form(graph: HalfEdgeGraph, root: int, avoid: int | None = None) -> RootedForm:
    """Canonical structure of the subtree at ``root``, excluding the branch through ``avoid``."""
    parent: dict[int, int] = {root: -1}
    up: dict[int, int] = {}
    seq = [root]
    i = 0
    while i < len(seq):
        v = seq[i]
        i += 1
        for h in graph.star[v]:
            p = graph.partner[h]
            if p == h:
                continue
            w = graph.root[p]
            if w == parent[v] or w == avoid:
                continue
            if w in parent:
                raise InputError("graph is not a tree")
            parent[w] = v
            up[w] = p
            seq.append(w)
    subcode: dict[int, str] = {}
    token: dict[int, str] = {}
    children: dict[int, list[int]] = {v: [] for v in seq}
    for v in seq[1:]:
        children[parent[v]].append(v)
    for v in reversed(seq):
        kids = sorted(children[v], key=token.__getitem__)
        children[v] = kids
        code = "(" + vertex_token(graph, v) + "".join(token[c] for c in kids) + ")"
        subcode[v] = code
        if v != root:
            token[v] = "<" + mu_str(graph.mu[up[v]]) + ">" + code
    form = RootedForm(graph, root, subcode[root], parent, up, children, token, subcode)
    form.order = form.preorder(root)
    return form


def canonical_form(graph: HalfEdgeGraph) -> RootedForm:
    if graph.n_vertices == 0 or not graph.is_tree():
        raise InputError("canonical forms are defined for nonempty trees only")
    cs = centres(graph)
    forms = [rooted_form(graph, c) for c in cs]
    return min(forms, key=lambda f: f.code)


def canonical_code_str(graph: HalfEdgeGraph) -> str:
    return canonical_form(graph).code


def canonical_code(graph: HalfEdgeGraph) -> bytes:
    return canonical_code_str(graph).encode("ascii")


def decode_code(code: bytes | str) -> HalfEdgeGraph:
    """Rebuild a tree from its canonical code."""
    if isinstance(code, bytes):
        code = code.decode("ascii")
    weights: list[int] = []
    genera: list[int] = []
    edges: list[tuple[int, int]] = []
    edge_mu: dict[tuple[int, int], Element] = {}
    legs: list[tuple[int, str | None, Element | None]] = []
    pos = 0

    def expect(ch: str) -> None:
        nonlocal pos
        if pos >= len(code) or code[pos] != ch:
            raise InputError(f"malformed canonical code at offset {pos}")
        pos += 1

    def read_until(stops: str) -> str:
        nonlocal pos
        start = pos
        while pos < len(code) and code[pos] not in stops:
            pos += 1
        return code[start:pos]

    def node() -> int:
        nonlocal pos
        expect("(")
        head = read_until(":")
        expect(":")
        if "g" in head:
            w, g = head.split("g")
        else:
            w, g = head, "0"
        v = len(weights)
        weights.append(int(w))
        genera.append(int(g))
        legtext = read_until("<)")
        if legtext:
            for tok in legtext.split(","):
                lab, m = tok.split("/")
                legs.append((v, lab if lab else None, parse_mu(m)))
        while code[pos] == "<":
            pos += 1
            m = parse_mu(read_until(">"))
            expect(">")
            c = node()
            edges.append((c, v))
            if m is not None:
                edge_mu[(c, v)] = m
        expect(")")
        return v

    node()
    if pos != len(code):
        raise InputError("trailing characters in canonical code")
    has_mu = bool(edge_mu)
    if has_mu:
        # the parent-side half carries the negated value; recovered by caller-specific rules
        pass
    g = build_tree(weights, edges, legs, edge_mu if has_mu else None)
    return g.replace(genus=tuple(genera))


# --------------------------------------------------------------- isomorphisms


def _match_legs(graph_a: HalfEdgeGraph, va: int, graph_b: HalfEdgeGraph, vb: int) -> list[tuple[int, int]]:
    la = sorted(graph_a.legs_at(va), key=lambda h: (leg_token(graph_a, h), h))
    lb = sorted(graph_b.legs_at(vb), key=lambda h: (leg_token(graph_b, h), h))
    return list(zip(la, lb))


def half_edge_map(graph_a: HalfEdgeGraph, graph_b: HalfEdgeGraph, vmap: dict[int, int] | list[int]) -> list[int]:
    """Extend a vertex isomorphism of trees to half-edges (legs matched by token)."""
    out = [0] * graph_a.n_half_edges
    for v in range(graph_a.n_vertices):
        w = vmap[v]
        targets = {graph_b.root[graph_b.partner[h]]: h for h in graph_b.edge_halves_at(w)}
        for h in graph_a.edge_halves_at(v):
            out[h] = targets[vmap[graph_a.root[graph_a.partner[h]]]]
        for a, b in _match_legs(graph_a, v, graph_b, w):
            out[a] = b
    return out


def isomorphism(graph_a: HalfEdgeGraph, graph_b: HalfEdgeGraph, form_a: RootedForm | None = None, form_b: RootedForm | None = None):
    """A decoration-preserving isomorphism a -> b as (vertex map, half-edge map), or None."""
    fa = form_a or canonical_form(graph_a)
    fb = form_b or canonical_form(graph_b)
    if fa.code != fb.code:
        return None
    vmap = [0] * graph_a.n_vertices
    for x, y in zip(fa.order, fb.order):
        vmap[x] = y
    return vmap, half_edge_map(graph_a, graph_b, vmap)


# --------------------------------------------------------------- automorphisms


@dataclass(frozen=True)
class TreeAutomorphism:
    vertices: tuple[int, ...]
    half_edges: tuple[int, ...]

    def edge_permutation(self, graph: HalfEdgeGraph) -> tuple[list[int], list[bool]]:
        """Permutation of graph.edges and, per edge, whether its halves are swapped."""
        index = {}
        for i, (a, b) in enumerate(graph.edges):
            index[a] = i
            index[b] = i
        perm, flipped = [], []
        for a, b in graph.edges:
            ia = self.half_edges[a]
            perm.append(index[ia])
            flipped.append(ia != graph.edges[index[ia]][0])
        return perm, flipped

    def edge_sign(self, graph: HalfEdgeGraph) -> int:
        return permutation_sign(self.edge_permutation(graph)[0])


def permutation_sign(perm: list[int] | tuple[int, ...]) -> int:
    seen = [False] * len(perm)
    sign = 1
    for i in range(len(perm)):
        if seen[i]:
            continue
        j, length = i, 0
        while not seen[j]:
            seen[j] = True
            j = perm[j]
            length += 1
        if length % 2 == 0:
            sign = -sign
    return sign


def _rooted_automorphisms(form: RootedForm, v: int) -> list[dict[int, int]]:
    results: list[dict[int, int]] = [{v: v}]
    kids = form.children[v]
    groups = [list(g) for _, g in itertools.groupby(kids, key=form.token.__getitem__)]
    pre = {c: form.preorder(c) for c in kids}
    for group in groups:
        sub = [_rooted_automorphisms(form, c) for c in group]
        options: list[dict[int, int]] = []
        for perm in itertools.permutations(range(len(group))):
            for choice in itertools.product(*sub):
                part: dict[int, int] = {}
                for i, a in enumerate(choice):
                    src, dst = pre[group[i]], pre[group[perm[i]]]
                    pos = {x: k for k, x in enumerate(src)}
                    for x, y in a.items():
                        part[x] = dst[pos[y]]
                options.append(part)
        results = [{**r, **o} for r in results for o in options]
    return results


def tree_automorphisms(graph: HalfEdgeGraph) -> list[TreeAutomorphism]:
    """All automorphisms preserving decorations, up to permuting interchangeable legs at a vertex."""
    if not graph.is_tree():
        raise InputError("tree_automorphisms needs a tree")
    cs = centres(graph)
    if len(cs) == 1:
        form = rooted_form(graph, cs[0])
        maps = _rooted_automorphisms(form, cs[0])
    else:
        a, b = cs
        fa = rooted_form(graph, a, avoid=b)
        fb = rooted_form(graph, b, avoid=a)
        ma = _rooted_automorphisms(fa, a)
        mb = _rooted_automorphisms(fb, b)
        maps = [{**x, **y} for x in ma for y in mb]
        ha = next(h for h in graph.star[a] if graph.partner[h] != h and graph.root[graph.partner[h]] == b)
        if fa.code == fb.code and graph.mu[ha] == graph.mu[graph.partner[ha]]:
            swap = {}
            for x, y in zip(fa.order, fb.order):
                swap[x] = y
                swap[y] = x
            maps += [{k: swap[m[k]] for k in m} for m in maps]
    out = []
    for m in maps:
        vperm = tuple(m[v] for v in range(graph.n_vertices))
        out.append(TreeAutomorphism(vperm, tuple(half_edge_map(graph, graph, vperm))))
    out.sort(key=lambda t: (t.vertices, t.half_edges))
    return out


def _rooted_count(form: RootedForm, v: int) -> int:
    total = 1
    kids = form.children[v]
    for _, g in itertools.groupby(kids, key=form.token.__getitem__):
        g = list(g)
        total *= math.factorial(len(g))
        for c in g:
            total *= _rooted_count(form, c)
    return total


def automorphism_count(graph: HalfEdgeGraph) -> int:
    cs = centres(graph)
    if len(cs) == 1:
        return _rooted_count(rooted_form(graph, cs[0]), cs[0])
    a, b = cs
    fa = rooted_form(graph, a, avoid=b)
    fb = rooted_form(graph, b, avoid=a)
    n = _rooted_count(fa, a) * _rooted_count(fb, b)
    ha = next(h for h in graph.star[a] if graph.partner[h] != h and graph.root[graph.partner[h]] == b)
    if fa.code == fb.code and graph.mu[ha] == graph.mu[graph.partner[ha]]:
        n *= 2
    return n


def _has_odd_rooted(form: RootedForm, v: int) -> bool:
    kids = form.children[v]
    for _, g in itertools.groupby(kids, key=form.token.__getitem__):
        g = list(g)
        if len(g) >= 2 and len(form.preorder(g[0])) % 2 == 1:
            return True
    return any(_has_odd_rooted(form, c) for c in kids)


def has_odd_edge_automorphism(graph: HalfEdgeGraph) -> bool:
    """Whether some automorphism permutes the edge set by an odd permutation."""
    cs = centres(graph)
    if len(cs) == 1:
        return _has_odd_rooted(rooted_form(graph, cs[0]), cs[0])
    a, b = cs
    fa = rooted_form(graph, a, avoid=b)
    fb = rooted_form(graph, b, avoid=a)
    if _has_odd_rooted(fa, a) or _has_odd_rooted(fb, b):
        return True
    ha = next(h for h in graph.star[a] if graph.partner[h] != h and graph.root[graph.partner[h]] == b)
    if fa.code == fb.code and graph.mu[ha] == graph.mu[graph.partner[ha]]:
        return (len(fa.order) - 1) % 2 == 1
    return False


def brute_force_automorphism_count(graph: HalfEdgeGraph) -> int:
    """Count vertex bijections preserving adjacency, vertex tokens and edge monodromy (test oracle)."""
    n = graph.n_vertices
    adj = {}
    for a, b in graph.edges:
        u, v = graph.root[a], graph.root[b]
        adj[(u, v)] = graph.mu[a]
        adj[(v, u)] = graph.mu[b]
    toks = [vertex_token(graph, v) for v in range(n)]
    count = 0
    for perm in itertools.permutations(range(n)):
        if any(toks[v] != toks[perm[v]] for v in range(n)):
            continue
        if all((perm[u], perm[v]) in adj and adj[(perm[u], perm[v])] == m for (u, v), m in adj.items()):
            count += 1
    return count


def bfs_order(graph: HalfEdgeGraph, start: int = 0) -> list[int]:
    seen = {start}
    order = [start]
    q = deque([start])
    while q:
        v = q.popleft()
        for w in graph.neighbours(v):
            if w not in seen:
                seen.add(w)
                order.append(w)
                q.append(w)
    return order
