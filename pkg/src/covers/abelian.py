"""Finite abelian groups in invariant-factor form, subgroups and coset spaces."""

from __future__ import annotations

import itertools
import math
import re
from dataclasses import dataclass
from functools import cached_property

from .errors import InputError

Element = tuple[int, ...]

_TERM = re.compile(r"Z(\d+)")


def _prime_powers(m: int) -> dict[int, int]:
    """Factor m as {p: p**k}."""
    out: dict[int, int] = {}
    p = 2
    while p * p <= m:
        while m % p == 0:
            out[p] = out.get(p, 1) * p
            m //= p
        p += 1
    if m > 1:
        out[m] = out.get(m, 1) * m
    return out


def _crt(residues: list[tuple[int, int]]) -> int:
    """Combine (value, modulus) pairs with pairwise coprime moduli."""
    x, mod = 0, 1
    for a, m in residues:
        # solve x + mod*k = a (mod m)
        k = ((a - x) * pow(mod, -1, m)) % m if m > 1 else 0
        x, mod = x + mod * k, mod * m
    return x % mod


@dataclass(frozen=True)
class AbelianGroup:
    invariant_factors: tuple[int, ...]

    def __post_init__(self) -> None:
        fs = self.invariant_factors
        if not fs or any((not isinstance(m, int)) or m < 1 for m in fs):
            raise InputError(f"bad invariant factors {fs!r}")
        for a, b in zip(fs, fs[1:]):
            if b % a:
                raise InputError(f"invariant factors must form a divisor chain: {fs!r}")

    @classmethod
    def cyclic(cls, m: int) -> AbelianGroup:
        return cls((m,))

    @classmethod
    def from_moduli(cls, moduli: list[int] | tuple[int, ...]) -> AbelianGroup:
        return GroupPresentation(tuple(moduli)).group

    @classmethod
    def parse(cls, spec: str) -> AbelianGroup:
        return GroupPresentation.parse(spec).group

    @cached_property
    def order(self) -> int:
        return math.prod(self.invariant_factors)

    @property
    def rank(self) -> int:
        return len(self.invariant_factors)

    @property
    def zero(self) -> Element:
        return (0,) * self.rank

    def elements(self) -> list[Element]:
        """All elements in lexicographic order of residue tuples."""
        return [tuple(e) for e in itertools.product(*(range(m) for m in self.invariant_factors))]

    def element(self, residues) -> Element:
        if isinstance(residues, int):
            residues = (residues,)
        residues = tuple(residues)
        if len(residues) != self.rank or not all(isinstance(a, int) for a in residues):
            raise InputError(f"{residues!r} is not an element of {self}")
        return tuple(a % m for a, m in zip(residues, self.invariant_factors))

    def add(self, a: Element, b: Element) -> Element:
        return tuple((x + y) % m for x, y, m in zip(a, b, self.invariant_factors))

    def neg(self, a: Element) -> Element:
        return tuple((-x) % m for x, m in zip(a, self.invariant_factors))

    def sub(self, a: Element, b: Element) -> Element:
        return tuple((x - y) % m for x, y, m in zip(a, b, self.invariant_factors))

    def scale(self, k: int, a: Element) -> Element:
        return tuple((k * x) % m for x, m in zip(a, self.invariant_factors))

    def sum(self, elems) -> Element:
        out = self.zero
        for e in elems:
            out = self.add(out, e)
        return out

    def element_order(self, a: Element) -> int:
        o = 1
        for x, m in zip(a, self.invariant_factors):
            o = math.lcm(o, m // math.gcd(x, m))
        return o

    def __str__(self) -> str:
        return "x".join(f"Z{m}" for m in self.invariant_factors)


@dataclass(frozen=True)
class GroupPresentation:
    """A product of cyclic groups as typed by a user, with its map to invariant-factor form."""

    moduli: tuple[int, ...]

    def __post_init__(self) -> None:
        if not self.moduli or any(m < 1 for m in self.moduli):
            raise InputError(f"bad moduli {self.moduli!r}")

    @classmethod
    def parse(cls, spec: str) -> GroupPresentation:
        parts = spec.strip().split("x")
        moduli = []
        for part in parts:
            m = _TERM.fullmatch(part.strip())
            if not m or int(m.group(1)) < 1:
                raise InputError(f"cannot parse group term {part!r} in {spec!r}")
            moduli.append(int(m.group(1)))
        return cls(tuple(moduli))

    @cached_property
    def _layout(self):
        # p-primary cyclic pieces of each input factor, distributed over invariant factors
        pieces = []  # (p, q=p^k, input index)
        for j, m in enumerate(self.moduli):
            for p, q in _prime_powers(m).items():
                pieces.append((p, q, j))
        by_prime: dict[int, list[tuple[int, int]]] = {}
        for p, q, j in pieces:
            by_prime.setdefault(p, []).append((q, j))
        r = max((len(v) for v in by_prime.values()), default=0)
        r = max(r, 1)
        slots: list[list[tuple[int, int, int]]] = [[] for _ in range(r)]  # (p, q, j)
        for p, lst in by_prime.items():
            lst = sorted(lst, key=lambda t: (t[0], t[1]))
            # largest prime power goes to the last invariant factor
            for offset, (q, j) in enumerate(reversed(lst)):
                slots[r - 1 - offset].append((p, q, j))
        factors = tuple(math.prod(q for _, q, _ in s) for s in slots)
        return factors, slots

    @cached_property
    def group(self) -> AbelianGroup:
        return AbelianGroup(self._layout[0])

    def to_canonical(self, residues) -> Element:
        """Map an element given in the typed presentation into the invariant-factor group."""
        if isinstance(residues, int):
            residues = (residues,)
        residues = tuple(residues)
        if len(residues) != len(self.moduli):
            raise InputError(f"{residues!r} has the wrong length for {self}")
        factors, slots = self._layout
        out = []
        for s in slots:
            out.append(_crt([(residues[j] % q, q) for _, q, j in s]))
        return tuple(out)

    def __str__(self) -> str:
        return "x".join(f"Z{m}" for m in self.moduli)


def parse_element(text: str, presentation: GroupPresentation) -> Element:
    """Parse '1' or '1.0' style residues typed against a presentation."""
    try:
        residues = tuple(int(x) for x in text.strip().split("."))
    except ValueError as exc:
        raise InputError(f"cannot parse group element {text!r}") from exc
    return presentation.to_canonical(residues)


@dataclass(frozen=True)
class Subgroup:
    group: AbelianGroup
    elements: frozenset[Element]

    def __post_init__(self) -> None:
        g = self.group
        if g.zero not in self.elements:
            raise InputError("subgroup must contain the identity")
        for a in self.elements:
            if g.neg(a) not in self.elements:
                raise InputError("subgroup not closed under negation")
            for b in self.elements:
                if g.add(a, b) not in self.elements:
                    raise InputError("subgroup not closed under addition")

    @property
    def order(self) -> int:
        return len(self.elements)

    def __contains__(self, a: Element) -> bool:
        return a in self.elements


_SUBGROUP_CACHE: dict[tuple[AbelianGroup, frozenset[Element]], Subgroup] = {}


def subgroup_generated(group: AbelianGroup, gens) -> Subgroup:
    gens = frozenset(group.element(g) if not isinstance(g, tuple) else _checked(group, g) for g in gens)
    key = (group, gens)
    hit = _SUBGROUP_CACHE.get(key)
    if hit is not None:
        return hit
    seen = {group.zero}
    frontier = [group.zero]
    while frontier:
        nxt = []
        for a in frontier:
            for g in gens:
                b = group.add(a, g)
                if b not in seen:
                    seen.add(b)
                    nxt.append(b)
        frontier = nxt
    sub = Subgroup(group, frozenset(seen))
    _SUBGROUP_CACHE[key] = sub
    return sub


def _checked(group: AbelianGroup, g: Element) -> Element:
    if len(g) != group.rank or any(not isinstance(x, int) or not 0 <= x < m for x, m in zip(g, group.invariant_factors)):
        raise InputError(f"{g!r} is not a reduced element of {group}")
    return g


@dataclass(frozen=True)
class CosetSpace:
    group: AbelianGroup
    subgroup: Subgroup
    reps: tuple[Element, ...]
    index: dict  # element -> coset index

    def __len__(self) -> int:
        return len(self.reps)

    def coset_of(self, a: Element) -> int:
        return self.index[a]

    def act(self, g: Element, i: int) -> int:
        return self.index[self.group.add(g, self.reps[i])]

    def action_table(self) -> dict[tuple[Element, int], int]:
        return {(g, i): self.act(g, i) for g in self.group.elements() for i in range(len(self))}

    def __hash__(self) -> int:
        return hash((self.group, self.subgroup.elements))

    def __eq__(self, other) -> bool:
        return isinstance(other, CosetSpace) and (self.group, self.subgroup.elements) == (
            other.group,
            other.subgroup.elements,
        )


_COSET_CACHE: dict[tuple[AbelianGroup, frozenset[Element]], CosetSpace] = {}


def coset_space(group: AbelianGroup, sub: Subgroup) -> CosetSpace:
    key = (group, sub.elements)
    hit = _COSET_CACHE.get(key)
    if hit is not None:
        return hit
    if sub.group != group:
        raise InputError("subgroup belongs to a different group")
    reps: list[Element] = []
    index: dict[Element, int] = {}
    for a in group.elements():  # lexicographic, so the first member seen is the least
        if a in index:
            continue
        k = len(reps)
        reps.append(a)
        for h in sub.elements:
            index[group.add(a, h)] = k
    cs = CosetSpace(group, sub, tuple(reps), index)
    _COSET_CACHE[key] = cs
    return cs
