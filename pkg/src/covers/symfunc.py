"""Exact arithmetic in the inhomogeneous power sums P_k = 1 + p_k.

SymLaurent holds finite sums c * prod P_k^{e_k} with integer (possibly negative)
exponents.  Expansion to the p-basis, the numerical specialization P_1 -> 1 + t,
P_k -> 1 (k >= 2), Taylor coefficients and polynomial interpolation all stay in
Fractions.
"""

from __future__ import annotations

import json
import math
import re
from collections import defaultdict
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

from .errors import InputError, InvariantViolation

Monomial = tuple[tuple[int, int], ...]  # ((k, e_k), ...) sorted by k, e_k != 0


def _mono(exps: dict[int, int]) -> Monomial:
    return tuple(sorted((k, e) for k, e in exps.items() if e))


def _mono_mul(a: Monomial, b: Monomial) -> Monomial:
    d = dict(a)
    for k, e in b:
        d[k] = d.get(k, 0) + e
    return _mono(d)


def _sort_key(m: Monomial, width: int):
    """Descending exponent of P_1, then of P_2, and so on."""
    d = dict(m)
    return tuple(-d.get(k, 0) for k in range(1, width + 1))


class SymLaurent:
    __slots__ = ("terms",)

    def __init__(self, terms: dict[Monomial, Fraction] | None = None):
        acc: dict[Monomial, Fraction] = {}
        for m, c in (terms or {}).items():
            key = _mono(dict(m))
            acc[key] = acc.get(key, Fraction(0)) + Fraction(c)
        self.terms = {m: c for m, c in acc.items() if c}

    @classmethod
    def one(cls) -> SymLaurent:
        return cls({(): Fraction(1)})

    @classmethod
    def monomial(cls, exps: dict[int, int], coeff=1) -> SymLaurent:
        return cls({_mono(exps): Fraction(coeff)})

    def __add__(self, other: SymLaurent) -> SymLaurent:
        out = dict(self.terms)
        for m, c in other.terms.items():
            out[m] = out.get(m, Fraction(0)) + c
        return SymLaurent({m: c for m, c in out.items() if c})

    def __neg__(self) -> SymLaurent:
        return SymLaurent({m: -c for m, c in self.terms.items()})

    def __sub__(self, other: SymLaurent) -> SymLaurent:
        return self + (-other)

    def __mul__(self, other) -> SymLaurent:
        if not isinstance(other, SymLaurent):
            return SymLaurent({m: c * Fraction(other) for m, c in self.terms.items()})
        out: dict[Monomial, Fraction] = defaultdict(Fraction)
        for m1, c1 in self.terms.items():
            for m2, c2 in other.terms.items():
                out[_mono_mul(m1, m2)] += c1 * c2
        return SymLaurent({m: c for m, c in out.items() if c})

    __rmul__ = __mul__

    def __eq__(self, other) -> bool:
        return isinstance(other, SymLaurent) and self.terms == other.terms

    def __hash__(self) -> int:
        return hash(frozenset(self.terms.items()))

    def __bool__(self) -> bool:
        return bool(self.terms)

    def sorted_terms(self) -> list[tuple[Monomial, Fraction]]:
        width = max((k for m in self.terms for k, _ in m), default=0)
        return sorted(self.terms.items(), key=lambda mc: _sort_key(mc[0], width))

    def __repr__(self) -> str:
        return f"SymLaurent({to_text(self)})"

    def __str__(self) -> str:
        return to_text(self)


def laurent_term(exponents: dict[int, int]) -> SymLaurent:
    return SymLaurent.monomial(exponents)


def sum_laurent(items) -> SymLaurent:
    """Sum many Laurent polynomials without rebuilding intermediate objects."""
    acc: dict[Monomial, Fraction] = defaultdict(Fraction)
    for x in items:
        for m, c in x.terms.items():
            acc[m] += c
    return SymLaurent({m: c for m, c in acc.items() if c})


# ------------------------------------------------------------- text formats


def _factor_text(k: int, e: int) -> str:
    return f"P{k}" if e == 1 else f"P{k}^{e}"


def to_text(x: SymLaurent) -> str:
    if not x.terms:
        return "0"
    parts = []
    for m, c in x.sorted_terms():
        num = [_factor_text(k, e) for k, e in m if e > 0]
        den = [_factor_text(k, -e) for k, e in m if e < 0]
        sign = "-" if c < 0 else "+"
        a = abs(c)
        top = " ".join(([str(a.numerator)] if a.numerator != 1 or not num else []) + num)
        bottom = " ".join(([str(a.denominator)] if a.denominator != 1 else []) + den)
        if " " in bottom:
            bottom = f"({bottom})"
        parts.append(f"{sign} {top}" + (f"/{bottom}" if bottom else ""))
    s = " ".join(parts)
    return s[2:] if s.startswith("+ ") else "-" + s[2:]


def _latex_factor(k: int, e: int) -> str:
    base = f"P_{{{k}}}" if k >= 10 else f"P_{k}"
    return base if e == 1 else f"{base}^{{{e}}}" if e >= 10 else f"{base}^{e}"


def to_latex(x: SymLaurent) -> str:
    if not x.terms:
        return "0"
    out = []
    for i, (m, c) in enumerate(x.sorted_terms()):
        num = " ".join(_latex_factor(k, e) for k, e in m if e > 0)
        den = " ".join(_latex_factor(k, -e) for k, e in m if e < 0)
        a = abs(c)
        top = (str(a.numerator) + (" " + num if num else "")) if a.numerator != 1 or not num else num
        bottom = (str(a.denominator) + (" " + den if den else "")) if a.denominator != 1 else den
        body = f"\\frac{{{top}}}{{{bottom}}}" if bottom else top
        sign = "-" if c < 0 else ("+" if i else "")
        out.append(sign + body)
    return "".join(out)


def to_json(x: SymLaurent) -> str:
    arr = []
    for m, c in x.sorted_terms():
        arr.append({"coeff": f"{c.numerator}/{c.denominator}", "exps": {str(k): e for k, e in m}})
    return json.dumps(arr)


def from_json(text: str) -> SymLaurent:
    data = json.loads(text)
    terms = {}
    for item in data:
        m = _mono({int(k): int(e) for k, e in item["exps"].items()})
        terms[m] = terms.get(m, Fraction(0)) + Fraction(item["coeff"])
    return SymLaurent(terms)


_FACTOR = re.compile(r"\{?P_(?:\{(\d+)\}|(\d))\}?(?:\^(?:\{(\d+)\}|(\d)))?")


def _parse_product(text: str) -> tuple[Fraction, dict[int, int]]:
    text = text.strip()
    m = re.match(r"\d+", text)
    coeff = Fraction(1)
    if m:
        coeff = Fraction(int(m.group()))
        text = text[m.end():]
    exps: dict[int, int] = defaultdict(int)
    pos = 0
    text = text.replace(" ", "").replace("\n", "")
    while pos < len(text):
        f = _FACTOR.match(text, pos)
        if not f:
            raise InputError(f"cannot parse factor in {text[pos:]!r}")
        k = int(f.group(1) or f.group(2))
        e = int(f.group(3) or f.group(4) or 1)
        exps[k] += e
        pos = f.end()
    return coeff, exps


def _brace(text: str, pos: int) -> tuple[str, int]:
    """Contents of the balanced {...} starting at text[pos]."""
    if text[pos] != "{":
        raise InputError(f"expected '{{' at {text[pos:pos + 20]!r}")
    depth = 0
    for i in range(pos, len(text)):
        if text[i] == "{":
            depth += 1
        elif text[i] == "}":
            depth -= 1
            if depth == 0:
                return text[pos + 1:i], i + 1
    raise InputError("unbalanced braces")


def parse_latex(text: str) -> SymLaurent:
    """Parse a sum of terms like -\\frac{3 P_1^2}{16 P_2 P_4}, optionally wrapped in \\frac{a}{b}\\left(...\\right)."""
    s = " ".join(text.split())
    outer = Fraction(1)
    m = re.match(r"\s*\\frac\{(\d+)\}\{(\d+)\}\s*\\left\((.*)\\right\)\s*$", s)
    if m:
        outer = Fraction(int(m.group(1)), int(m.group(2)))
        s = m.group(3)
    terms: dict[Monomial, Fraction] = defaultdict(Fraction)
    pos = 0
    s = s.strip()
    while pos < len(s):
        while pos < len(s) and s[pos] == " ":
            pos += 1
        if pos >= len(s):
            break
        sign = 1
        if s[pos] in "+-":
            sign = -1 if s[pos] == "-" else 1
            pos += 1
        while s[pos] == " ":
            pos += 1
        if s.startswith("\\frac", pos):
            num, pos = _brace(s, pos + 5)
            den, pos = _brace(s, pos)
            cn, en = _parse_product(num)
            cd, ed = _parse_product(den)
            exps = dict(en)
            for k, e in ed.items():
                exps[k] = exps.get(k, 0) - e
            terms[_mono(exps)] += sign * outer * cn / cd
        else:
            end = pos
            while end < len(s) and s[end] not in "+-":
                end += 1
            c, e = _parse_product(s[pos:end])
            terms[_mono(e)] += sign * outer * c
            pos = end
    return SymLaurent({k: v for k, v in terms.items() if v})


# ------------------------------------------------------------ p-expansion


Partition = tuple[int, ...]  # parts in nonincreasing order


@dataclass(frozen=True)
class TruncatedSymSeries:
    degree: int
    terms: dict  # Partition -> Fraction

    def part(self, n: int) -> dict[Partition, Fraction]:
        return {lam: c for lam, c in self.terms.items() if sum(lam) == n}

    def __eq__(self, other) -> bool:
        return isinstance(other, TruncatedSymSeries) and self.degree == other.degree and self.terms == other.terms

    def numeric(self, n: int) -> Fraction:
        """n! times the coefficient of p_1^n: the value at p_1 = 1, p_k = 0, scaled as an EGF."""
        return math.factorial(n) * self.terms.get((1,) * n, Fraction(0))


def _binom(e: int, j: int) -> Fraction:
    """Generalized binomial coefficient C(e, j) for any integer e."""
    out = Fraction(1)
    for i in range(j):
        out = out * (e - i) / (i + 1)
    return out


@lru_cache(maxsize=None)
def _power_series(k: int, e: int, N: int) -> tuple[tuple[Partition, Fraction], ...]:
    return tuple(((k,) * j, _binom(e, j)) for j in range(N // k + 1) if _binom(e, j))


def _merge(a: Partition, b: Partition) -> Partition:
    return tuple(sorted(a + b, reverse=True))


def _truncated_product(x: dict, y, N: int) -> dict:
    out: dict = defaultdict(Fraction)
    for la, ca in x.items():
        da = sum(la)
        for lb, cb in y:
            if da + sum(lb) <= N:
                out[_merge(la, lb)] += ca * cb
    return {k: v for k, v in out.items() if v}


def expand_to_degree(x: SymLaurent, N: int) -> TruncatedSymSeries:
    if N < 0:
        raise InputError("truncation degree must be nonnegative")
    total: dict = defaultdict(Fraction)
    for m, c in x.terms.items():
        acc = {(): c}
        for k, e in m:
            acc = _truncated_product(acc, _power_series(k, e, N), N)
        for lam, v in acc.items():
            total[lam] += v
    return TruncatedSymSeries(N, {k: v for k, v in total.items() if v})


def truncated_multiply(a: TruncatedSymSeries, b: TruncatedSymSeries) -> TruncatedSymSeries:
    N = min(a.degree, b.degree)
    out = _truncated_product({k: v for k, v in a.terms.items() if sum(k) <= N}, list(b.terms.items()), N)
    return TruncatedSymSeries(N, out)


def partition_text(lam: Partition) -> str:
    if not lam:
        return "1"
    counts: dict[int, int] = defaultdict(int)
    for k in lam:
        counts[k] += 1
    return " ".join(f"p{k}" + (f"^{c}" if c > 1 else "") for k, c in sorted(counts.items()))


# --------------------------------------------------------------- polynomials


class PolynomialQ:
    """Dense polynomial in one variable, coefficients in increasing degree."""

    __slots__ = ("coeffs",)

    def __init__(self, coeffs=()):
        cs = [Fraction(c) for c in coeffs]
        while cs and cs[-1] == 0:
            cs.pop()
        self.coeffs: tuple[Fraction, ...] = tuple(cs)

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def __call__(self, x) -> Fraction:
        acc = Fraction(0)
        for c in reversed(self.coeffs):
            acc = acc * x + c
        return acc

    def __add__(self, other: PolynomialQ) -> PolynomialQ:
        n = max(len(self.coeffs), len(other.coeffs))
        a = self.coeffs + (Fraction(0),) * (n - len(self.coeffs))
        b = other.coeffs + (Fraction(0),) * (n - len(other.coeffs))
        return PolynomialQ(x + y for x, y in zip(a, b))

    def __neg__(self) -> PolynomialQ:
        return PolynomialQ(-c for c in self.coeffs)

    def __sub__(self, other: PolynomialQ) -> PolynomialQ:
        return self + (-other)

    def __mul__(self, other) -> PolynomialQ:
        if not isinstance(other, PolynomialQ):
            return PolynomialQ(c * Fraction(other) for c in self.coeffs)
        if not self.coeffs or not other.coeffs:
            return PolynomialQ()
        out = [Fraction(0)] * (len(self.coeffs) + len(other.coeffs) - 1)
        for i, a in enumerate(self.coeffs):
            if a:
                for j, b in enumerate(other.coeffs):
                    out[i + j] += a * b
        return PolynomialQ(out)

    __rmul__ = __mul__

    def __pow__(self, e: int) -> PolynomialQ:
        out = PolynomialQ([1])
        for _ in range(e):
            out = out * self
        return out

    def __eq__(self, other) -> bool:
        return isinstance(other, PolynomialQ) and self.coeffs == other.coeffs

    def __hash__(self) -> int:
        return hash(self.coeffs)

    def divmod(self, other: PolynomialQ) -> tuple[PolynomialQ, PolynomialQ]:
        if not other.coeffs:
            raise ZeroDivisionError("polynomial division by zero")
        r = list(self.coeffs)
        q = [Fraction(0)] * max(len(r) - len(other.coeffs) + 1, 1)
        lead = other.coeffs[-1]
        while len(r) >= len(other.coeffs) and any(r):
            shift = len(r) - len(other.coeffs)
            c = r[-1] / lead
            q[shift] = c
            for i, b in enumerate(other.coeffs):
                r[shift + i] -= c * b
            while r and r[-1] == 0:
                r.pop()
        return PolynomialQ(q), PolynomialQ(r)

    def monic(self) -> PolynomialQ:
        return self * (1 / self.coeffs[-1]) if self.coeffs else self

    def __repr__(self) -> str:
        return f"PolynomialQ({self.text()})"

    def text(self, var: str = "t") -> str:
        if not self.coeffs:
            return "0"
        parts = []
        for i, c in reversed(list(enumerate(self.coeffs))):
            if not c:
                continue
            mag = abs(c)
            cs = "" if mag == 1 and i else str(mag)
            v = "" if i == 0 else (var if i == 1 else f"{var}^{i}")
            body = cs + ("*" if cs and v else "") + v
            parts.append(("-" if c < 0 else "+") + " " + body)
        s = " ".join(parts)
        return s[2:] if s.startswith("+ ") else "-" + s[2:]


def poly_gcd(a: PolynomialQ, b: PolynomialQ) -> PolynomialQ:
    while b.coeffs:
        a, b = b, a.divmod(b)[1]
    return a.monic()


T = PolynomialQ([0, 1])
ONE_PLUS_T = PolynomialQ([1, 1])


@dataclass(frozen=True)
class RationalFunction1V:
    num: PolynomialQ
    den: PolynomialQ

    @classmethod
    def make(cls, num: PolynomialQ, den: PolynomialQ) -> RationalFunction1V:
        if not den.coeffs:
            raise InputError("zero denominator")
        g = poly_gcd(num, den) if num.coeffs else den.monic()
        num = num.divmod(g)[0]
        den = den.divmod(g)[0]
        lead = den.coeffs[-1]
        return cls(num * (1 / lead), den * (1 / lead))

    def __eq__(self, other) -> bool:
        return isinstance(other, RationalFunction1V) and self.num == other.num and self.den == other.den

    def __hash__(self) -> int:
        return hash((self.num, self.den))

    def text(self) -> str:
        return f"({self.num.text()}) / ({self.den.text()})"

    def factored_text(self) -> str:
        """Display as  sign t^a (integer polynomial) / (D (1 + t)^k)  when the denominator allows it."""
        if not self.num.coeffs:
            return "0"
        k = 0
        den = self.den
        while den.coeffs and len(den.coeffs) > 1:
            q, r = den.divmod(ONE_PLUS_T)
            if r.coeffs:
                return self.text()
            den, k = q, k + 1
        coeffs = list(self.num.coeffs)
        a = 0
        while coeffs[a] == 0:
            a += 1
        coeffs = coeffs[a:]
        scale = Fraction(1) / den.coeffs[0]
        common = 1
        for c in coeffs:
            common = common * c.denominator // math.gcd(common, c.denominator)
        ints = [int(c * common) for c in coeffs]
        content = 0
        for x in ints:
            content = math.gcd(content, x)
        lead = Fraction(content, common) * scale
        ints = [x // content for x in ints]
        if ints[0] < 0:
            lead, ints = -lead, [-x for x in ints]
        terms = []
        for i, c in enumerate(ints):
            if not c:
                continue
            v = "" if i == 0 else ("t" if i == 1 else f"t^{i}")
            mag = abs(c)
            body = (str(mag) if mag != 1 or not v else "") + (" " if mag != 1 and v else "") + v
            terms.append(("- " if c < 0 else "+ ") + body)
        inner = " ".join(terms)
        inner = inner[2:] if inner.startswith("+ ") else "-" + inner[2:]
        tpart = "" if a == 0 else ("t" if a == 1 else f"t^{a}")
        sign = "-" if lead < 0 else ""
        lead = abs(lead)
        top = " ".join(x for x in [str(lead.numerator) if lead.numerator != 1 else "", tpart] if x) or "1"
        bottom = [str(lead.denominator)] if lead.denominator != 1 else []
        if k:
            bottom.append("(1 + t)" + (f"^{k}" if k > 1 else ""))
        frac = top + ("/(" + " ".join(bottom) + ")" if len(bottom) > 1 else "/" + bottom[0] if bottom else "")
        if len(ints) == 1 and ints[0] == 1:
            return sign + frac
        return f"{sign}{frac} ({inner})"

    def taylor(self, N: int) -> list[Fraction]:
        d0 = self.den.coeffs[0] if self.den.coeffs else Fraction(0)
        if d0 == 0:
            raise InputError("rational function has a pole at t = 0")
        num = list(self.num.coeffs) + [Fraction(0)] * (N + 1)
        den = self.den.coeffs
        out = []
        for n in range(N + 1):
            c = num[n]
            for j in range(1, min(n, len(den) - 1) + 1):
                c -= den[j] * out[n - j]
            out.append(c / d0)
        return out


def specialize_egf(x: SymLaurent) -> RationalFunction1V:
    """P_1 -> 1 + t and P_k -> 1 for k >= 2."""
    if not x.terms:
        return RationalFunction1V(PolynomialQ(), PolynomialQ([1]))
    by_e: dict[int, Fraction] = defaultdict(Fraction)
    for m, c in x.terms.items():
        by_e[dict(m).get(1, 0)] += c
    low = min(min(by_e), 0)
    num = PolynomialQ()
    for e, c in by_e.items():
        if c:
            num = num + ONE_PLUS_T ** (e - low) * c
    return RationalFunction1V.make(num, ONE_PLUS_T ** (-low))


def egf_values(f: RationalFunction1V, N: int) -> list[Fraction]:
    return [math.factorial(n) * c for n, c in enumerate(f.taylor(N))]


def interpolate_Fn(points: list[tuple[int, Fraction]], degree_bound: int) -> PolynomialQ:
    """Lagrange interpolation through the first degree_bound + 1 points; the rest must lie on it."""
    xs = [x for x, _ in points]
    if len(set(xs)) != len(xs):
        raise InputError("interpolation abscissae must be distinct")
    if len(points) < degree_bound + 1:
        raise InputError(f"need at least {degree_bound + 1} points, got {len(points)}")
    base = points[: degree_bound + 1]
    poly = PolynomialQ()
    for i, (xi, yi) in enumerate(base):
        term = PolynomialQ([Fraction(yi)])
        for j, (xj, _) in enumerate(base):
            if j != i:
                term = term * PolynomialQ([Fraction(-xj, xi - xj), Fraction(1, xi - xj)])
        poly = poly + term
    for x, y in points[degree_bound + 1:]:
        if poly(x) != Fraction(y):
            raise InvariantViolation(f"point ({x}, {y}) is off the interpolating polynomial (value {poly(x)})")
    return poly


# ------------------------------------------------------------- table parsing


def parse_egf_latex(text: str) -> RationalFunction1V:
    """Parse '- \\frac{t^2}{D (1 + t)^k}\\left(c_0 + c_1 t + ...\\right)'."""
    s = re.sub(r"\\begin\{aligned\}|\\end\{aligned\}|\\\\|&", " ", text)
    s = " ".join(s.split())
    m = re.match(r"(-?)\s*\\frac\{t\^(\d+)\}\{(\d+)\s*\(1 \+ t\)(?:\^(\d+))?\}\s*\\left\((.*)\\right\)\s*$", s)
    if not m:
        raise InputError(f"cannot parse generating function {text!r}")
    sign = -1 if m.group(1) else 1
    tpow = int(m.group(2))
    denom = int(m.group(3))
    k = int(m.group(4) or 1)
    poly: dict[int, Fraction] = defaultdict(Fraction)
    for coeff, var, exp in re.findall(r"([+-]?\s*\d*)\s*(t?)(?:\^\{?(\d+)\}?)?", m.group(5).replace(" ", "")):
        if not coeff and not var:
            continue
        c = coeff.replace(" ", "")
        c = int(c) if c not in ("", "+", "-") else (-1 if c == "-" else 1)
        d = int(exp) if exp else (1 if var else 0)
        poly[d] += c
    inner = PolynomialQ([poly.get(i, 0) for i in range(max(poly) + 1)])
    num = inner * (T ** tpow) * Fraction(sign, denom)
    return RationalFunction1V.make(num, ONE_PLUS_T ** k)


def check_consistency(x: SymLaurent, N: int) -> None:
    """Both numerical routes (through the p-expansion and through the EGF) must agree."""
    series = expand_to_degree(x, N)
    vals = egf_values(specialize_egf(x), N)
    for n in range(N + 1):
        if series.numeric(n) != vals[n]:
            raise InvariantViolation(f"numerical specializations disagree at n = {n}")
