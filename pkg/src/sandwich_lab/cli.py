"""Command-line front end: ``sandwich-lab <command> ...``.

Exit codes: 0 success, 1 a check or verdict failed to hold, 2 usage error.
"""

from __future__ import annotations

import argparse
import json
import os
import random
import sys
import time
from dataclasses import dataclass, field
from typing import Sequence

from . import __version__
from .atlas import NormalFormCoefficients, ProductNormalForm, atlas_for
from .classifier import (
    BudgetExceededError,
    ReductionError,
    classify_surface,
    gfr_verdict,
    reduce,
    replay,
    sandwich_report,
)
from .derivation import is_p_closed_poly, parse_derivation
from .field_poly import is_prime

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class UsageError(ValueError):
    pass


@dataclass
class ReportEnvelope:
    version: str
    command: str
    input: dict
    payload: dict
    timing: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return {
            "version": self.version,
            "command": self.command,
            "input": self.input,
            "payload": self.payload,
            "timing": self.timing,
        }

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=2, sort_keys=True)

    @classmethod
    def from_json(cls, data: dict) -> "ReportEnvelope":
        return cls(data["version"], data["command"], data["input"], data["payload"], data.get("timing", {}))

    @classmethod
    def loads(cls, text: str) -> "ReportEnvelope":
        return cls.from_json(json.loads(text))


# --- argument helpers ---------------------------------------------------------------


def _prime(text: str) -> int:
    try:
        p = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"p must be an integer, got {text!r}") from None
    if not is_prime(p):
        raise argparse.ArgumentTypeError(f"p must be prime, got {p}")
    return p


def _int_list(text: str) -> list[int]:
    text = text.strip()
    if not text:
        return []
    try:
        return [int(t) for t in text.split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _surface(text: str) -> str:
    try:
        return atlas_for(text, 2).name
    except ValueError as err:
        raise argparse.ArgumentTypeError(str(err)) from None


def _default_chart(surface: str) -> str:
    return "U0" if surface == "p2" else "U1"


def _parse_delta(args) -> object:
    chart = _default_chart(args.surface)
    atlas = atlas_for(args.surface, args.p)
    try:
        delta = parse_derivation(args.delta, p=args.p, chart_id=chart)
        if delta.chart_id != chart:
            delta = parse_derivation(args.delta, atlas.chart(delta.chart_id).vars, args.p)
    except (ValueError, KeyError) as err:
        raise UsageError(f"cannot parse derivation {args.delta!r}: {err}") from None
    return delta


# --- commands ---------------------------------------------------------------------------


def cmd_classify(args) -> tuple[dict, int, list[str]]:
    res = classify_surface(args.surface, args.p, exhaustive=args.exhaustive, check_replay=args.replay,
                           threads=args.threads)
    lines = [f"{res.surface}, p = {res.p}: {res.enumerated} normal forms, {res.p_closed} p-closed"]
    for o, n in res.obstructed.items():
        lines.append(f"  obstructed ({o}): {n}")
    for c in res.canonical_classes:
        lines.append(f"  {c.canonical.label:<12} x{c.count:<5} fan rays {list(c.fan.rays)}")
    lines.append(f"fan-isomorphism classes: {res.class_count}  {res.iso_classes}")
    lines.append(f"distinct canonical labels: {res.label_count}")
    if args.replay:
        lines.append(f"replay failures: {res.replay_failures}")
    code = EXIT_FAIL if res.replay_failures else EXIT_OK
    return res.to_json(), code, lines


def cmd_verdict(args) -> tuple[dict, int, list[str]]:
    delta = _parse_delta(args)
    v = gfr_verdict(delta, args.surface, args.ext_bound)
    lines = [f"delta = {delta}", f"GFR: {v.gfr}", f"obstruction: {v.obstruction.value}"]
    if len(v.obstructions) > 1:
        lines.append("all obstructions: " + ", ".join(o.value for o in v.obstructions))
    if v.canonical:
        lines.append(f"canonical form: {v.canonical.label}, fan rays {list(v.fan.rays)}")
    if v.splitting_verified is not None:
        lines.append(f"splitting 1 - delta^(p-1) verified: {v.splitting_verified}")
    lines += [f"  {d}" for d in v.details]
    payload = v.to_json()
    if v.report is not None:
        payload["trace"] = [s.to_json() for s in v.report.trace]
    code = EXIT_FAIL if (v.gfr and v.splitting_verified is False) else EXIT_OK
    return payload, code, lines


def _normal_form_from_args(args):
    atlas = atlas_for(args.surface, args.p)
    if atlas.kind != "H":
        raise UsageError("reduce --coeffs applies to hirzebruch:d; use --delta for p2")
    c = [x % args.p for x in args.coeffs]
    if atlas.d == 0:
        if len(c) != 6:
            raise UsageError("hirzebruch:0 takes --coeffs a2,a1,a0,b2,b1,b0")
        return ProductNormalForm(args.p, tuple(c[:3]), tuple(c[3:]))
    if len(c) != 4:
        raise UsageError("--coeffs takes a2,a1,a0,b")
    F = [x % args.p for x in (args.F or [0])]
    if len(F) > atlas.d + 1:
        raise UsageError(f"deg F must be <= d = {atlas.d}")
    F += [0] * (atlas.d + 1 - len(F))
    return NormalFormCoefficients(atlas.d, args.p, c[0], c[1], c[2], tuple(F), c[3])


def cmd_reduce(args) -> tuple[dict, int, list[str]]:
    if (args.coeffs is None) == (args.delta is None):
        raise UsageError("give exactly one of --coeffs or --delta")
    if args.delta is not None:
        delta = _parse_delta(args)
        v = gfr_verdict(delta, args.surface, args.ext_bound)
        if v.report is None:
            lines = [f"no canonical form: {v.obstruction.value}"] + [f"  {d}" for d in v.details]
            return {"obstruction": v.obstruction.value, "details": v.details}, EXIT_FAIL, lines
        rep = v.report
    else:
        nf = _normal_form_from_args(args)
        try:
            rep = reduce(nf)
        except ReductionError as err:
            lines = [f"no canonical form: {err.obstruction.value}", f"  {err.message}"]
            lines += [f"  {s.step}: {s.description}" for s in err.trace]
            payload = {"obstruction": err.obstruction.value, "message": err.message,
                       "trace": [s.to_json() for s in err.trace]}
            return payload, EXIT_FAIL, lines
    ok = replay(rep)
    lines = [f"{rep.surface}, p = {rep.p}: delta = ({rep.f}) d/dx + ({rep.g}) d/dy"]
    if rep.field_degree > 1:
        lines.append(f"coordinate changes over F_{rep.p}^{rep.field_degree}")
    for s in rep.trace:
        lines.append(f"  {s.step}: {s.description}")
        if s.new is not None:
            lines.append(f"      x <- {s.new[0].format(('x', 'y'))},  y <- {s.new[1].format(('x', 'y'))}")
    lines.append(f"canonical form: {rep.canonical.label}")
    lines.append(f"fan rays: {list(rep.fan.rays)}")
    lines.append(f"replay: {'ok' if ok else 'FAILED'}")
    payload = rep.to_json()
    payload["replay"] = ok
    return payload, EXIT_OK if ok else EXIT_FAIL, lines


def cmd_sandwich(args) -> tuple[dict, int, list[str]]:
    delta = _parse_delta(args)
    rep = sandwich_report(delta, args.surface, args.ext_bound, args.degree_bound)
    lines = [f"{rep.surface}, p = {rep.p}"]
    lines += [f"  {cid}: {expr}" for cid, expr in rep.charts.items()]
    lines.append("boundary orders: " + ", ".join(f"{k}: {v}" for k, v in rep.boundary_orders.items()))
    if rep.foliation_degree is not None:
        lines.append(f"foliation degree: {rep.foliation_degree}")
    if rep.normal_form is not None or rep.surface != "p2":
        lines.append(f"normal form: {rep.normal_form if rep.normal_form is not None else 'none (no global section)'}")
    lines.append(f"singular points: {len(rep.singular_points)}")
    for pt in rep.singular_points:
        alias = f" ({', '.join(pt['aliases'])})" if pt["aliases"] else ""
        where = f"{pt['chart']} ({', '.join(pt['coords'])})"
        lines.append(f"  {where}: {pt['type'] or 'over F_' + str(rep.p) + '^' + str(pt['field_degree'])}{alias}")
    v = rep.verdict
    if v.fan is not None:
        lines.append(f"canonical form: {v.canonical.label}, fan rays {list(v.fan.rays)}")
    lines.append(f"GFR: {v.gfr} ({v.obstruction.value})")
    return rep.to_json(), EXIT_OK, lines


def _load_catalog(path: str | None):
    if path is None:
        return None
    with open(path) as fh:
        data = json.load(fh)
    return {name: (entry[0], entry[1]) for name, entry in data.items()}


def _random_replay(seed: int, samples: int = 200):
    from .checks import CheckResult

    rng = random.Random(seed)
    failures = []
    for _ in range(samples):
        p = rng.choice((2, 3, 5))
        d = rng.randint(1, 3)
        F = tuple(rng.randrange(p) for _ in range(d + 1))
        nf = NormalFormCoefficients(d, p, *(rng.randrange(p) for _ in range(3)), F, rng.randrange(p))
        if not any((nf.a2, nf.a1, nf.a0, nf.b, *F)) or not is_p_closed_poly(*nf.polys()):
            continue
        try:
            rep = reduce(nf)
        except ReductionError:
            continue
        if not replay(rep):
            failures.append(nf.to_json())
    return CheckResult(f"random-replay[seed={seed}]", "replay of random p-closed normal forms", not failures, [], failures)


def cmd_verify_paper(args) -> tuple[dict, int, list[str]]:
    from .checks import _timed, run_checks

    only = [o.strip() for o in args.only.split(",")] if args.only else None
    want_random = only is None or "random-replay" in only
    rest = None if only is None else [o for o in only if o != "random-replay"]
    try:
        results = run_checks(rest, tuple(args.primes), tuple(args.degrees), _load_catalog(args.catalog)) \
            if rest is None or rest else []
    except KeyError as err:
        raise UsageError(str(err.args[0])) from None
    if want_random:
        results.append(_timed(lambda: _random_replay(args.seed)))
    lines = []
    for r in results:
        lines.append(f"{'PASS' if r.passed else 'FAIL'}  {r.name:<40} {r.seconds:7.2f}s  {r.description}")
        if not r.passed:
            lines.append(r.diff())
        lines += [f"      {n}" for n in r.notes if not r.passed]
    failed = sum(not r.passed for r in results)
    lines.append(f"{len(results) - failed}/{len(results)} checks passed")
    payload = {"checks": [r.to_json() for r in results], "failed": failed}
    return payload, EXIT_FAIL if failed else EXIT_OK, lines


# --- parser -------------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--p", type=_prime, default=2, help="characteristic (prime)")
    common.add_argument("--surface", type=_surface, default="p2", help="p2 or hirzebruch:d")
    common.add_argument("--json", action="store_true", help="emit a JSON report envelope")
    common.add_argument("--degree-bound", type=int, default=None, help="degree bound for invariant rings")
    common.add_argument("--ext-bound", type=int, default=4, help="largest k searched for F_{p^k}-points")
    common.add_argument("--seed", type=int, default=0, help="seed for randomized checks")

    parser = argparse.ArgumentParser(prog="sandwich-lab", description="Frobenius sandwiches of toric surfaces")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    c = sub.add_parser("classify", parents=[common], help="enumerate normal forms and count quotient classes")
    c.add_argument("--exhaustive", action="store_true", help="walk every coefficient tuple")
    c.add_argument("--replay", action="store_true", help="replay every reduction trace")
    c.add_argument("--threads", type=int, default=None, help="worker threads (default: SANDWICH_LAB_THREADS)")
    c.set_defaults(func=cmd_classify)

    v = sub.add_parser("verdict", parents=[common], help="GFR verdict for one derivation")
    v.add_argument("--delta", required=True, help='e.g. "x dx + y dy"')
    v.set_defaults(func=cmd_verdict)

    r = sub.add_parser("reduce", parents=[common], help="reduce a normal form to its canonical form")
    r.add_argument("--coeffs", type=_int_list, default=None, help="a2,a1,a0,b (hirzebruch:0: a2,a1,a0,b2,b1,b0)")
    r.add_argument("--F", type=_int_list, default=None, help="c0,c1,...,cd")
    r.add_argument("--delta", default=None)
    r.set_defaults(func=cmd_reduce)

    s = sub.add_parser("sandwich", parents=[common], help="full report for one derivation")
    s.add_argument("--delta", required=True)
    s.set_defaults(func=cmd_sandwich)

    vp = sub.add_parser("verify-paper", parents=[common], help="run the reproduction checks")
    vp.add_argument("--only", default=None, help="comma-separated check groups, e.g. example3")
    vp.add_argument("--primes", type=_int_list, default=[2, 3, 5])
    vp.add_argument("--degrees", type=_int_list, default=[0, 1, 2, 3])
    vp.add_argument("--catalog", default=None, help="JSON file replacing the singularity catalog")
    vp.set_defaults(func=cmd_verify_paper)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    if getattr(args, "threads", None) is None and "SANDWICH_LAB_THREADS" in os.environ:
        try:
            args.threads = int(os.environ["SANDWICH_LAB_THREADS"])
        except ValueError:
            print("SANDWICH_LAB_THREADS must be an integer", file=sys.stderr)
            return EXIT_USAGE
    echo = {k: v for k, v in vars(args).items() if k not in ("func", "json")}
    t0 = time.perf_counter()
    try:
        payload, code, lines = args.func(args)
    except (UsageError, BudgetExceededError, OSError, json.JSONDecodeError) as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_USAGE
    elapsed = time.perf_counter() - t0
    if args.json:
        env = ReportEnvelope(__version__, args.command, echo, payload, {"seconds": round(elapsed, 3)})
        print(env.dumps())
    else:
        print("\n".join(line for line in lines if line != ""))
    return code


if __name__ == "__main__":
    sys.exit(main())
