"""``pgcl``: build groups, run check suites, run the corpus, replay certificates.

Exit status: 0 pass, 1 any FAIL, 2 usage or parse error, 3 nothing verified
(every check SKIPPED or REJECTED).
"""

from __future__ import annotations

import argparse
import dataclasses
import hashlib
import json
import logging
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

from . import __version__
from .commutators import WitnessCertificate, replay_certificate
from .config import Gates, gates, using_gates
from .constructions import FAMILIES, GroupRecipe, ParseError, emit_presentation
from .errors import HypothesisError, PresentationError
from .suites import (
    FAIL,
    PASS,
    REJECTED,
    SKIPPED,
    SUITES,
    CheckResult,
    check_group,
    default_corpus,
    overall_verdict,
    resolve_group,
)

log = logging.getLogger("pgcl")

EXIT = {PASS: 0, FAIL: 1, SKIPPED: 3, REJECTED: 3}
USAGE = 2


def _json_dump(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True)


def _report_digest(report: dict) -> str:
    body = {k: v for k, v in report.items() if k not in ("digest", "timing")}
    return hashlib.sha256(json.dumps(body, sort_keys=True).encode()).hexdigest()


def _config_echo(args) -> dict:
    return {"gates": dataclasses.asdict(gates()), "seed": args.seed, "jobs": args.jobs}


def group_report(spec: str, results: list[CheckResult], handle, timing: bool) -> dict:
    group = {"spec": spec}
    if handle is not None:
        group.update({"label": handle.label, "digest": handle.digest, "p": handle.pres.p,
                      "log_order": handle.pres.n})
    rep = {
        "group": group,
        "checks": [r.to_dict() for r in results],
        "overall": overall_verdict([r.verdict for r in results]),
    }
    if timing:
        rep["timing"] = {r.name: round(r.seconds, 3) for r in results}
    return rep


def _finish(report: dict, args) -> int:
    report["digest"] = _report_digest(report)
    if args.json:
        Path(args.json).write_text(_json_dump(report) + "\n", encoding="utf-8")
    return EXIT[report["overall"]]


def _print_checks(spec: str, results: list[CheckResult], quiet: bool) -> None:
    if quiet:
        return
    for r in results:
        brief = {k: v for k, v in r.details.items() if k != "certificate"}
        text = json.dumps(brief, sort_keys=True)
        if len(text) > 160:
            text = text[:157] + "..."
        print(f"{spec}  {r.name:<14} {r.verdict:<8} {text}")


# -- subcommands ---------------------------------------------------------------------


def cmd_build(args) -> int:
    params = {"p": args.p}
    for key in ("d", "n", "e", "a", "b", "r", "k"):
        val = getattr(args, key, None)
        if val is not None:
            params[key] = val
    recipe = GroupRecipe(args.family, tuple(sorted(params.items())))
    if args.family not in FAMILIES:
        print(f"unknown family {args.family!r}; known: {', '.join(sorted(FAMILIES))}", file=sys.stderr)
        return USAGE
    try:
        pres = recipe.build()
    except (ValueError, PresentationError) as exc:
        print(f"rejected: {exc}", file=sys.stderr)
        return USAGE
    text = emit_presentation(pres)
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
        if not args.quiet:
            print(f"wrote {args.out}: {recipe}, order {pres.p}^{pres.n}")
    else:
        sys.stdout.write(text)
    return 0


def cmd_check(args) -> int:
    for s in args.suites:
        if s not in SUITES:
            print(f"unknown suite {s!r}; known: {', '.join(SUITES)}", file=sys.stderr)
            return USAGE
    try:
        handle, results = check_group(args.group, args.suites, args.seed, args.jobs, args.p, args.d)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return USAGE
    if handle is None:
        print(f"error: {results[0].details['error']}", file=sys.stderr)
        return USAGE
    _print_checks(handle.label, results, args.quiet)
    report = {"schema": 1, "tool": "pgcl", "version": __version__, "config": _config_echo(args)}
    report.update(group_report(args.group, results, handle, args.timing))
    if args.cert:
        for r in results:
            if "certificate" in r.details:
                Path(args.cert).write_text(_json_dump(r.details["certificate"]) + "\n", encoding="utf-8")
            elif r.name == "theorem-b":
                log.warning("no certificate written: theorem-b verdict %s", r.verdict)
    if not args.quiet:
        print(f"overall: {report['overall']}")
    return _finish(report, args)


def _corpus_entry(spec: str, suites: list[str], seed: int, gate_values: dict, timing: bool) -> dict:
    with using_gates(**gate_values):
        handle, results = check_group(spec, suites, seed)
    return group_report(spec, results, handle, timing)


def load_corpus_config(path: str | None, p: int) -> list[tuple[str, list[str]]]:
    if path is None:
        return [(spec, list(suites)) for spec, suites in default_corpus(p)]
    data = json.loads(Path(path).read_text(encoding="utf-8"))
    entries = data.get("entries", []) if isinstance(data, dict) else data
    base = Path(path).parent
    out = []
    for e in entries:
        spec = e.get("group") or e.get("file")
        if "file" in e and not Path(spec).is_absolute():
            spec = str(base / spec)
        out.append((spec, list(e.get("suites", ["consistency"]))))
    return out


def cmd_corpus(args) -> int:
    try:
        entries = load_corpus_config(args.config, args.p)
    except (OSError, json.JSONDecodeError) as exc:
        print(f"error: cannot read corpus config: {exc}", file=sys.stderr)
        return USAGE
    gate_values = dataclasses.asdict(gates())
    reports = []
    if args.jobs > 1 and len(entries) > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as ex:
            futs = [ex.submit(_corpus_entry, s, su, args.seed, gate_values, args.timing) for s, su in entries]
            reports = [f.result() for f in futs]
    else:
        for s, su in entries:
            reports.append(_corpus_entry(s, su, args.seed, gate_values, args.timing))
            if not args.quiet:
                rep = reports[-1]
                for c in rep["checks"]:
                    print(f"{s}  {c['name']:<14} {c['verdict']}")
    reports.sort(key=lambda r: r["group"]["spec"])
    verdicts = [r["overall"] for r in reports]
    failing = [r["group"]["spec"] for r in reports if r["overall"] == FAIL]
    report = {"schema": 1, "tool": "pgcl", "version": __version__, "config": _config_echo(args),
              "entries": reports, "failing": failing, "overall": overall_verdict(verdicts)}
    if not args.quiet:
        for name in failing:
            print(f"FAIL: {name}")
        print(f"overall: {report['overall']} ({len(reports)} groups)")
    return _finish(report, args)


def cmd_certify_replay(args) -> int:
    try:
        handle = resolve_group(args.group, args.p, args.d)
        data = json.loads(Path(args.certificate).read_text(encoding="utf-8"))
    except (ValueError, PresentationError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return USAGE
    if data.get("presentation_digest") != handle.digest:
        print("rejected: certificate digest does not match the presentation", file=sys.stderr)
        return USAGE
    try:
        cert = WitnessCertificate.from_dict(data, handle.pres)
        res = replay_certificate(cert, handle.pres)
    except (HypothesisError, KeyError, TypeError, ValueError) as exc:
        print(f"rejected: {exc}", file=sys.stderr)
        return USAGE
    verdict = PASS if res.passed else FAIL
    details = {"failures": res.failures, "failed_rung": res.failed_rung, "transcript": res.transcript}
    report = {"schema": 1, "tool": "pgcl", "version": __version__, "config": _config_echo(args),
              "group": {"spec": args.group, "digest": handle.digest},
              "checks": [{"name": "certify-replay", "verdict": verdict, "details": details}],
              "overall": verdict}
    if not args.quiet:
        for f in res.failures:
            print(f"  {f}")
        print(f"certify-replay: {verdict}")
    return _finish(report, args)


# -- argument parsing ------------------------------------------------------------------


def _common(sp: argparse.ArgumentParser) -> None:
    sp.add_argument("--p", type=int, default=None, help="prime (default 5 where needed)")
    sp.add_argument("--d", type=int, default=None, help="generator count for free-class2")
    sp.add_argument("--gate", type=int, default=None, help="maximum order for brute-force enumeration")
    sp.add_argument("--jobs", type=int, default=1)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--json", default=None, help="write the JSON report here")
    sp.add_argument("--quiet", action="store_true")
    sp.add_argument("--timing", action="store_true", help="include wall times in the report")
    sp.add_argument("-v", "--verbose", action="store_true")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="pgcl", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=f"pgcl {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    b = sub.add_parser("build", help="write a presentation file for a group family")
    b.add_argument("family", help=", ".join(sorted(FAMILIES)))
    b.add_argument("-o", "--out", default=None)
    for key in ("n", "e", "a", "b", "r", "k"):
        b.add_argument(f"--{key}", type=int, default=None)
    _common(b)
    b.set_defaults(func=cmd_build)

    c = sub.add_parser("check", help="run check suites on a recipe or presentation file")
    c.add_argument("group", help="recipe like 'huppert(p=5)' or a presentation file")
    c.add_argument("suites", nargs="+", help=", ".join(SUITES))
    c.add_argument("--cert", default=None, help="write the theorem-b certificate here")
    _common(c)
    c.set_defaults(func=cmd_check)

    co = sub.add_parser("corpus", help="run a corpus of groups and suites")
    co.add_argument("--config", default=None, help="JSON corpus file (default: built-in corpus)")
    _common(co)
    co.set_defaults(func=cmd_corpus)

    r = sub.add_parser("certify-replay", help="re-verify a theorem-b certificate")
    r.add_argument("certificate")
    r.add_argument("group", help="presentation file or recipe the certificate was issued for")
    _common(r)
    r.set_defaults(func=cmd_certify_replay)
    return ap


def main(argv: list[str] | None = None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return USAGE if exc.code else 0
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    if args.command in ("build", "corpus") and args.p is None:
        args.p = 5
    overrides = {}
    if args.gate is not None:
        overrides["enumerate"] = args.gate
    with using_gates(**overrides):
        return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
