"""Command-line interface.

Exit codes: 0 success, 2 usage, 3 infeasible input, 4 internal invariant violation.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import logging
import math
import sys
import time
from dataclasses import asdict, dataclass
from fractions import Fraction
from pathlib import Path

from . import __version__
from .abelian import GroupPresentation, parse_element
from .errors import CoversError, InputError
from .eulersum import compute_hG, compute_hg, default_jobs
from .symfunc import (
    PolynomialQ,
    SymLaurent,
    egf_values,
    expand_to_degree,
    from_json,
    interpolate_Fn,
    partition_text,
    specialize_egf,
    to_json,
    to_latex,
    to_text,
)
from .trees import CODE_VERSION, TreeFamilySpec, cache_dir, cached_enumerate_trees

log = logging.getLogger("covers")

MAX_GENUS = 7
INTERP_GENERA = tuple(range(0, MAX_GENUS + 1))


@dataclass
class RunManifest:
    command: str
    parameters: dict
    code_version: str
    wall_time: float
    workers: int
    output_digest: str


def _digest(text: str) -> str:
    return hashlib.sha256(text.encode()).hexdigest()


# ------------------------------------------------------------------- helpers


def _hg(g: int, jobs: int, cache: str | None, refresh: bool) -> SymLaurent:
    """h_g, reusing a cached result keyed by genus and code version."""
    if g < 2:
        return compute_hg(g)
    path = cache_dir(cache) / f"hg-{g}-{_digest(f'hg|{g}|{CODE_VERSION}')[:16]}.json"
    if path.exists() and not refresh:
        log.info("reading %s", path)
        return from_json(path.read_text())
    trees = cached_enumerate_trees(TreeFamilySpec("hyperelliptic", genus=g), cache, refresh)
    h = compute_hg(g, jobs=jobs, trees=trees)
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_suffix(".tmp")
    tmp.write_text(to_json(h))
    tmp.replace(path)
    return h


def _format(x: SymLaurent, fmt: str) -> str:
    if fmt == "latex":
        return to_latex(x)
    if fmt == "json":
        return to_json(x)
    return to_text(x)


def _expansion_lines(x: SymLaurent, N: int, fmt: str) -> list[str]:
    series = expand_to_degree(x, N)
    if fmt == "json":
        out = {}
        for n in range(N + 1):
            part = series.part(n)
            out[str(n)] = [{"partition": list(lam), "coeff": f"{c.numerator}/{c.denominator}"} for lam, c in sorted(part.items())]
        return [json.dumps(out, sort_keys=True)]
    lines = []
    for n in range(N + 1):
        part = series.part(n)
        text = ""
        for lam, c in sorted(part.items(), reverse=True):
            mag = "" if abs(c) == 1 else _frac(abs(c)) + " "
            text += (" - " if c < 0 else " + ") + mag + partition_text(lam)
        text = text[3:] if text.startswith(" + ") else "-" + text[3:] if text else "0"
        lines.append(f"n = {n}: {text}")
    return lines


def _frac(c: Fraction) -> str:
    return str(c.numerator) if c.denominator == 1 else f"{c.numerator}/{c.denominator}"


def _poly_text(p: PolynomialQ, var: str = "g") -> str:
    """c * var^a * (primitive integer polynomial in ascending powers)."""
    if not p.coeffs:
        return "0"
    coeffs = list(p.coeffs)
    a = next(i for i, c in enumerate(coeffs) if c)
    coeffs = coeffs[a:]
    common = 1
    for c in coeffs:
        common = common * c.denominator // math.gcd(common, c.denominator)
    ints = [int(c * common) for c in coeffs]
    content = 0
    for x in ints:
        content = math.gcd(content, x)
    ints = [x // content for x in ints]
    lead = Fraction(content, common)
    if ints[0] < 0:
        lead, ints = -lead, [-x for x in ints]
    terms = []
    for i, c in enumerate(ints):
        if not c:
            continue
        v = "" if i == 0 else (var if i == 1 else f"{var}^{i}")
        mag = abs(c)
        body = (str(mag) if mag != 1 or not v else "") + (" " if mag != 1 and v else "") + v
        terms.append(("- " if c < 0 else "+ ") + body)
    inner = " ".join(terms)
    inner = inner[2:] if inner.startswith("+ ") else "-" + inner[2:]
    head = []
    if lead != 1:
        head.append(f"({_frac(lead)})" if lead.denominator != 1 else _frac(lead))
    if a:
        head.append(var if a == 1 else f"{var}^{a}")
    if len(ints) == 1:
        if ints[0] == 1:
            return " ".join(head) or "1"
        return " ".join(head + [inner])
    return " ".join(head + [f"({inner})"])


def degree_bound(n: int) -> int:
    return max(0, n - 2 if n % 2 == 0 else n - 3)


def _parse_monodromy(text: str, pres: GroupPresentation) -> tuple:
    return tuple(parse_element(x, pres) for x in text.split(","))


# ------------------------------------------------------------------ commands


def cmd_hg(args) -> str:
    if not 2 <= args.genus <= MAX_GENUS:
        args.parser.error(f"--genus must lie in 2..{MAX_GENUS}")
    h = _hg(args.genus, args.jobs, args.cache_dir, args.refresh)
    lines = [_format(h, args.format)]
    if args.expand_n is not None:
        if args.expand_n < 0:
            args.parser.error("--expand-n must be nonnegative")
        lines += _expansion_lines(h, args.expand_n, args.format)
    return "\n".join(lines)


def cmd_egf(args) -> str:
    if not 2 <= args.genus <= MAX_GENUS:
        args.parser.error(f"--genus must lie in 2..{MAX_GENUS}")
    if args.max_n < 0:
        args.parser.error("--max-n must be nonnegative")
    f = specialize_egf(_hg(args.genus, args.jobs, args.cache_dir, args.refresh))
    vals = egf_values(f, args.max_n)
    if args.format == "json":
        return json.dumps({"genus": args.genus, "egf": f.factored_text(), "values": [_frac(v) for v in vals]})
    lines = [f.factored_text()]
    lines += [f"n = {n}: {_frac(v)}" for n, v in enumerate(vals)]
    return "\n".join(lines)


def interpolation_points(n: int, genera, jobs: int, cache: str | None, refresh: bool) -> list[tuple[int, Fraction]]:
    pts = []
    for g in genera:
        vals = egf_values(specialize_egf(_hg(g, jobs, cache, refresh)), n)
        pts.append((g, vals[n]))
    return pts


def cmd_interp(args) -> str:
    if args.n < 0:
        args.parser.error("--n must be nonnegative")
    # the formal values at g = 0, 1 agree with F_n only from n = 4 on
    genera = [g for g in INTERP_GENERA if g >= 2 or args.n >= 4]
    if args.max_genus is not None:
        genera = [g for g in genera if g <= args.max_genus]
    bound = degree_bound(args.n)
    pts = interpolation_points(args.n, genera, args.jobs, args.cache_dir, args.refresh)
    # points from the genuine range g >= 2 first, then the formal ones as checks
    pts.sort(key=lambda p: (p[0] < 2, p[0]))
    if len(pts) < bound + 1:
        pts = sorted(pts)
    F = interpolate_Fn(pts, bound)
    spare = len(pts) - (bound + 1)
    if args.format == "json":
        return json.dumps({"n": args.n, "degree_bound": bound, "coeffs": [_frac(c) for c in F.coeffs], "checks": spare})
    return f"F_{args.n}(g) = {_poly_text(F)}\n(degree bound {bound}, {len(pts)} points, {spare} consistency checks)"


def cmd_trees(args) -> str:
    if args.genus is not None:
        if not 2 <= args.genus <= MAX_GENUS:
            args.parser.error(f"--genus must lie in 2..{MAX_GENUS}")
        spec = TreeFamilySpec("hyperelliptic", genus=args.genus, cap=args.cap)
    else:
        if args.group is None or args.monodromy is None:
            args.parser.error("give --genus, or --group with --monodromy")
        pres = GroupPresentation.parse(args.group)
        mu = _parse_monodromy(args.monodromy, pres)
        labels = tuple(f"w{i + 1}" for i in range(len(mu)))
        spec = TreeFamilySpec("monodromy", group=pres.group, labels=labels, leg_mu=mu)
    trees = cached_enumerate_trees(spec, args.cache_dir, args.refresh)
    from .graphs import canonical_code_str

    if args.format == "json":
        data = {"count": len(trees)}
        if args.list:
            data["codes"] = [canonical_code_str(t) for t in trees]
        return json.dumps(data)
    lines = [str(len(trees))]
    if args.list:
        lines += [canonical_code_str(t) for t in trees]
    return "\n".join(lines)


def cmd_homology(args) -> str:
    from .complex import betti_json, gamma_complex

    if args.genus < 2 or args.marks < 0:
        args.parser.error("need --genus >= 2 and --marks >= 0")
    cx = gamma_complex(args.genus, args.marks, args.variant, args.subcomplex)
    return betti_json(cx, args.method)


def cmd_hcover(args) -> str:
    pres = GroupPresentation.parse(args.group)
    mu = _parse_monodromy(args.monodromy, pres)
    if len(mu) != args.legs:
        raise InputError(f"--legs {args.legs} but {len(mu)} monodromy values")
    h = compute_hG(pres.group, args.legs, mu)
    lines = [_format(h, args.format)]
    if args.expand_n is not None:
        lines += _expansion_lines(h, args.expand_n, args.format)
    return "\n".join(lines)


# -------------------------------------------------------------------- parser


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--jobs", type=int, default=None, help="worker processes (default: available CPUs)")
    common.add_argument("--cache-dir", default=None, help="cache directory (default $COVERS_CACHE or ./.covers-cache)")
    common.add_argument("--refresh", action="store_true", help="ignore and rewrite cached results")
    common.add_argument("--manifest", default=None, help="write a run manifest JSON here")
    common.add_argument("--format", choices=("text", "latex", "json"), default="text")
    common.add_argument("-v", "--verbose", action="count", default=0)

    parser = argparse.ArgumentParser(prog="covers", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"covers {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("hg", parents=[common], help="the generating function h_g")
    p.add_argument("--genus", type=int, required=True)
    p.add_argument("--expand-n", type=int, default=None, help="also print the degree <= N power-sum expansion")
    p.set_defaults(func=cmd_hg, parser=p)

    p = sub.add_parser("egf", parents=[common], help="numerical specialization and Euler characteristics")
    p.add_argument("--genus", type=int, required=True)
    p.add_argument("--max-n", type=int, default=10)
    p.set_defaults(func=cmd_egf, parser=p)

    p = sub.add_parser("interp", parents=[common], help="the polynomial F_n(g)")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--max-genus", type=int, default=None, help="use genera up to this value only")
    p.set_defaults(func=cmd_interp, parser=p)

    p = sub.add_parser("trees", parents=[common], help="enumerate target trees")
    p.add_argument("--genus", type=int, default=None)
    p.add_argument("--cap", type=int, default=2, help="maximal vertex weight (default 2)")
    p.add_argument("--group", default=None, help="e.g. Z2 or Z2xZ4")
    p.add_argument("--monodromy", default=None, help="comma-separated leg monodromies, e.g. 1,1,1,1")
    p.add_argument("--list", action="store_true", help="print the canonical codes")
    p.set_defaults(func=cmd_trees, parser=p)

    p = sub.add_parser("homology", parents=[common], help="Betti numbers of the graph complex")
    p.add_argument("--genus", type=int, required=True)
    p.add_argument("--marks", type=int, required=True)
    p.add_argument("--variant", choices=("quotient", "labelled"), default="quotient")
    p.add_argument("--subcomplex", choices=("full", "rep", "w3", "repw3"), default="full")
    p.add_argument("--method", choices=("exact", "modular"), default="exact")
    p.set_defaults(func=cmd_homology, parser=p)

    p = sub.add_parser("hcover", parents=[common], help="the generating function for labelled G-covers")
    p.add_argument("--group", required=True)
    p.add_argument("--legs", type=int, required=True)
    p.add_argument("--monodromy", required=True)
    p.add_argument("--expand-n", type=int, default=None)
    p.set_defaults(func=cmd_hcover, parser=p)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.WARNING - 10 * min(args.verbose, 2), format="%(levelname)s %(name)s: %(message)s")
    if args.jobs is None:
        args.jobs = default_jobs()
    elif args.jobs < 1:
        parser.error("--jobs must be positive")
    start = time.perf_counter()
    try:
        out = args.func(args)
    except CoversError as exc:
        print(f"covers: {exc}", file=sys.stderr)
        return exc.exit_code
    elapsed = time.perf_counter() - start
    print(out)
    if args.manifest:
        params = {k: v for k, v in vars(args).items() if k not in ("func", "parser", "manifest", "verbose")}
        manifest = RunManifest(args.command, params, f"{__version__}+{CODE_VERSION}", round(elapsed, 3), args.jobs, _digest(out))
        Path(args.manifest).write_text(json.dumps(asdict(manifest), indent=2, sort_keys=True) + "\n")
    return 0


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
