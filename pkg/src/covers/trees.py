"""Isomorphism classes of stable weighted / leg-labelled trees.

Trees are generated from planted pieces (a vertex hanging from a parent edge)
whose children are listed in nondecreasing code order, so each rooted shape is
produced once.  Rooting at the center (or the central edge) then makes every
unrooted class appear exactly once; the final dedupe by canonical code is only a
guard.
"""

from __future__ import annotations

import hashlib
import itertools
import logging
import os
from dataclasses import dataclass, field
from functools import lru_cache
from pathlib import Path

from .abelian import AbelianGroup, Element
from .errors import CacheMismatch, InputError, InvariantViolation
from .graphs import HalfEdgeGraph, build_tree, canonical_code, canonical_code_str, decode_code

log = logging.getLogger(__name__)

CODE_VERSION = "1"


@dataclass(frozen=True)
class _Planted:
    code: str
    height: int
    weight: int
    marks: tuple[str, ...]
    children: tuple[_Planted, ...]


def _node_code(weight: int, marks: tuple[str, ...], children) -> str:
    legs = ",".join(sorted(f"{m}/" for m in marks))
    return f"({weight}:{legs}" + "".join("<>" + c.code for c in children) + ")"


def _subsets(items: tuple[str, ...]):
    for r in range(len(items) + 1):
        yield from itertools.combinations(items, r)


class _Generator:
    def __init__(self, cap: int):
        self.cap = cap
        self.planted = lru_cache(maxsize=None)(self._planted)
        self.multisets = lru_cache(maxsize=None)(self._multisets)

    def _planted(self, weight: int, marks: tuple[str, ...]) -> tuple[_Planted, ...]:
        out = []
        for w in range(min(self.cap, weight) + 1):
            for here in _subsets(marks):
                rest = tuple(m for m in marks if m not in here)
                # a bare vertex needs two children, so no child may take everything
                proper = w == 0 and not here
                for kids in self.multisets(weight - w, rest, "", proper):
                    if len(kids) + 1 + w + len(here) < 3:
                        continue
                    h = 1 + max(k.height for k in kids) if kids else 0
                    out.append(_Planted(_node_code(w, here, kids), h, w, here, kids))
        out.sort(key=lambda p: p.code)
        return tuple(out)

    def _multisets(
        self, weight: int, marks: tuple[str, ...], lower: str, proper: bool = False
    ) -> tuple[tuple[_Planted, ...], ...]:
        """Nondecreasing sequences of planted trees using exactly these resources, all codes >= lower.

        With ``proper`` no single part may use all of the resources.
        """
        if weight == 0 and not marks:
            return ((),)
        out = []
        for w1 in range(weight + 1):
            for m1 in _subsets(marks):
                if w1 + len(m1) < 2:
                    continue
                if proper and w1 == weight and len(m1) == len(marks):
                    continue
                rest = tuple(m for m in marks if m not in m1)
                firsts = [p for p in self.planted(w1, m1) if p.code >= lower]
                if not firsts:
                    continue
                for p in firsts:
                    for tail in self.multisets(weight - w1, rest, p.code):
                        out.append((p, *tail))
        return tuple(out)

    def unrooted(self, weight: int, marks: tuple[str, ...]) -> list[_Planted | tuple[_Planted, _Planted]]:
        found: list = []
        # unicentral
        for w in range(min(self.cap, weight) + 1):
            for here in _subsets(marks):
                rest = tuple(m for m in marks if m not in here)
                for kids in self.multisets(weight - w, rest, "", True):
                    if len(kids) + w + len(here) < 3:
                        continue
                    if kids:
                        if len(kids) < 2:
                            continue
                        hs = sorted((k.height for k in kids), reverse=True)
                        if hs[0] != hs[1]:
                            continue
                    found.append(_Planted(_node_code(w, here, kids), 0, w, here, kids))
        # bicentral
        for w1 in range(weight + 1):
            for m1 in _subsets(marks):
                rest = tuple(m for m in marks if m not in m1)
                for a in self.planted(w1, m1):
                    for b in self.planted(weight - w1, rest):
                        if a.height == b.height and a.code <= b.code:
                            found.append((a, b))
        return found


def _to_graph(obj, label_mu: dict[str, Element] | None = None) -> HalfEdgeGraph:
    weights: list[int] = []
    edges: list[tuple[int, int]] = []
    legs: list = []

    def place(p: _Planted) -> int:
        v = len(weights)
        weights.append(p.weight)
        for m in p.marks:
            legs.append((v, m, None if label_mu is None else label_mu[m]))
        for c in p.children:
            edges.append((v, place(c)))
        return v

    if isinstance(obj, tuple):
        a = place(obj[0])
        b = place(obj[1])
        edges.append((a, b))
    else:
        place(obj)
    return build_tree(weights, edges, legs)


def enumerate_stable_trees(
    total_weight: int,
    marks: tuple[str, ...] = (),
    cap: int | None = None,
    label_mu: dict[str, Element] | None = None,
) -> list[HalfEdgeGraph]:
    """All stable trees with the given total vertex weight and one leg per mark label.

    Each vertex v satisfies (#edges at v) + w(v) + (#marks at v) >= 3 and w(v) <= cap.
    Sorted by canonical code.
    """
    if total_weight < 0:
        raise InputError("total weight must be nonnegative")
    if len(set(marks)) != len(marks):
        raise InputError("mark labels must be distinct")
    cap = total_weight if cap is None else cap
    gen = _Generator(cap)
    raw = gen.unrooted(total_weight, tuple(sorted(marks)))
    seen: dict[bytes, HalfEdgeGraph] = {}
    for obj in raw:
        g = _to_graph(obj, label_mu)
        code = canonical_code(g)
        if code in seen:
            raise InvariantViolation("orderly generation produced a duplicate class")
        seen[code] = g
    return [seen[c] for c in sorted(seen)]


@dataclass(frozen=True)
class TreeFamilySpec:
    mode: str  # "hyperelliptic" or "monodromy"
    genus: int = 0
    cap: int = 2
    group: AbelianGroup | None = None
    labels: tuple[str, ...] = ()
    leg_mu: tuple[Element, ...] = ()
    extra: dict = field(default_factory=dict, compare=False, hash=False)

    def validate(self) -> None:
        if self.mode == "hyperelliptic":
            if self.genus < 2:
                raise InputError("hyperelliptic families need g >= 2")
            if self.cap < 0:
                raise InputError("weight cap must be nonnegative")
        elif self.mode == "monodromy":
            if self.group is None or len(self.labels) != len(self.leg_mu):
                raise InputError("monodromy family needs a group and one value per leg")
            G = self.group
            if G.sum(self.leg_mu) != G.zero:
                raise InputError("leg monodromies must sum to zero")
            from .abelian import subgroup_generated

            if subgroup_generated(G, self.leg_mu).order != G.order:
                raise InputError("leg monodromies must generate the group")
            if len(self.labels) < 3:
                raise InputError("a stable tree needs at least three legs")
        else:
            raise InputError(f"unknown tree family mode {self.mode!r}")

    def key(self) -> str:
        parts = [self.mode, str(self.genus), str(self.cap)]
        if self.group is not None:
            parts.append(str(self.group))
        parts += [f"{lab}={'.'.join(map(str, m))}" for lab, m in zip(self.labels, self.leg_mu)]
        return "|".join(parts)

    def digest(self) -> str:
        return hashlib.sha256(f"{self.key()}|{CODE_VERSION}".encode()).hexdigest()[:16]


def enumerate_trees(spec: TreeFamilySpec) -> list[HalfEdgeGraph]:
    spec.validate()
    if spec.mode == "hyperelliptic":
        trees = enumerate_stable_trees(2 * spec.genus + 2, (), spec.cap)
        for t in trees:
            if not spec.genus + 1 <= t.n_vertices <= 2 * spec.genus and spec.cap == 2:
                raise InvariantViolation(f"tree with {t.n_vertices} vertices outside the expected range")
        return trees
    label_mu = dict(zip(spec.labels, spec.leg_mu))
    return enumerate_stable_trees(0, tuple(spec.labels), None, label_mu)


def brute_force_weighted_trees(total_weight: int, cap: int) -> set[str]:
    """Canonical codes of stable weighted trees, by trying every labelled tree shape (test oracle)."""
    codes = set()
    # leaves carry >= 2 weight and inner vertices have degree >= 3, so |V| <= W - 2
    max_vertices = max(1, total_weight - 2)
    for n in range(1, max_vertices + 1):
        shapes = {}
        for edges in _labelled_trees(n):
            deg = [0] * n
            for a, b in edges:
                deg[a] += 1
                deg[b] += 1
            if sum(max(0, 3 - d) for d in deg) > total_weight:
                continue
            shapes.setdefault(canonical_code_str(build_tree([0] * n, edges)), (edges, deg))
        for edges, deg in shapes.values():
            ranges = [range(max(0, 3 - deg[v]), cap + 1) for v in range(n)]
            for ws in itertools.product(*ranges):
                if sum(ws) == total_weight:
                    codes.add(canonical_code_str(build_tree(list(ws), edges)))
    return codes


def _labelled_trees(n: int) -> list[list[tuple[int, int]]]:
    """All labelled trees on n vertices via Pruefer sequences."""
    if n == 1:
        return [[]]
    if n == 2:
        return [[(0, 1)]]
    out = []
    for seq in itertools.product(range(n), repeat=n - 2):
        degree = [1] * n
        for x in seq:
            degree[x] += 1
        edges = []
        for x in seq:
            leaf = min(v for v in range(n) if degree[v] == 1)
            edges.append((leaf, x))
            degree[leaf] -= 1
            degree[x] -= 1
        u, v = [x for x in range(n) if degree[x] == 1]
        edges.append((u, v))
        out.append(edges)
    return out


# ------------------------------------------------------------------- caching


def cache_dir(explicit: str | os.PathLike | None = None) -> Path:
    if explicit is not None:
        return Path(explicit)
    return Path(os.environ.get("COVERS_CACHE", ".covers-cache"))


def write_cache(path: Path, spec: TreeFamilySpec, trees: list[HalfEdgeGraph]) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    lines = [f"treecache v1 {spec.digest()}"] + [canonical_code(t).hex() for t in trees]
    tmp = path.with_suffix(".tmp")
    tmp.write_text("\n".join(lines) + "\n")
    tmp.replace(path)


def read_cache(path: Path, spec: TreeFamilySpec) -> list[HalfEdgeGraph]:
    lines = path.read_text().splitlines()
    if not lines or lines[0] != f"treecache v1 {spec.digest()}":
        raise CacheMismatch(f"cache file {path} does not match this code version and family; pass --refresh")
    trees = []
    for line in lines[1:]:
        g = decode_code(bytes.fromhex(line))
        if spec.mode == "monodromy":
            mu = dict(zip(spec.labels, spec.leg_mu))
            g = g.replace(mu=tuple(mu[lab] if lab is not None else None for lab in g.label))
        trees.append(g)
    return trees


def cached_enumerate_trees(spec: TreeFamilySpec, directory: str | os.PathLike | None = None, refresh: bool = False) -> list[HalfEdgeGraph]:
    spec.validate()
    name = hashlib.sha256(spec.key().encode()).hexdigest()[:16]
    path = cache_dir(directory) / f"trees-{spec.mode}-{name}.txt"
    if path.exists() and not refresh:
        log.info("reading tree cache %s", path)
        return read_cache(path, spec)
    trees = enumerate_trees(spec)
    write_cache(path, spec, trees)
    return trees
