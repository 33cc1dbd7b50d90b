"""Command-line entry point: census, classify, verify, expected.

SPINBETHE_THREADS caps the BLAS thread pool; it must be read before numpy
loads, so the heavy imports live inside the subcommands.
"""
from __future__ import annotations

import argparse
import json
import logging
import os
import sys

EXIT_OK = 0
EXIT_VIOLATION = 3
EXIT_ERROR = 2


def _apply_threads():
    n = os.environ.get("SPINBETHE_THREADS")
    if n:
        for var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS"):
            os.environ.setdefault(var, n)


def _range(text: str) -> tuple[int, int]:
    if ".." in text:
        a, b = text.split("..", 1)
        return int(a), int(b)
    return int(text), int(text)


def parse_roots(text: str) -> list[complex]:
    """'0.5+0.2i, -1i, 3' -> complex list."""
    out = []
    for tok in text.split(","):
        tok = tok.strip().replace(" ", "")
        if not tok:
            continue
        tok = tok.replace("I", "i").replace("i", "j")
        if tok in ("j", "+j", "-j"):
            tok = tok.replace("j", "1j")
        out.append(complex(tok))
    return out


def _cmd_census(args) -> int:
    from .census import RunConfig, emit_report, run_census
    from .reptheory import ledger

    cfg = RunConfig(
        s=args.spin,
        N_range=_range(args.sites),
        M_range=_range(args.magnons) if args.magnons else None,
        path_budget=args.budget,
        seed=args.seed,
        oracle_enabled=not args.no_oracle,
        out_dir=args.out,
    )
    rows, _ = run_census(cfg)
    rep = ledger(rows)
    if args.out:
        os.makedirs(args.out, exist_ok=True)
        for fmt, ext in (("json", "json"), ("csv", "csv"), ("text", "txt")):
            emit_report(rows, fmt, os.path.join(args.out, f"report.{ext}"))
    print(emit_report(rows, "text"), end="")
    print(f"ledger: {rep.verdict} {rep.counts()}")
    for r in rows:
        if r.note:
            print(f"  N={r.N} M={r.M}: {r.note}")
    if rep.violations:
        for r in rep.violations:
            print(
                f"FALSIFICATION: s={r.s} N={r.N} M={r.M} distinct-singular+physical = {r.lower_side} > {r.expected}",
                file=sys.stderr,
            )
        return EXIT_VIOLATION
    return EXIT_OK


def _cmd_classify(args) -> int:
    from .census import read_archive, reclassify
    from .oracle import Oracle

    arch = read_archive(args.archive)
    oracle = None
    if not args.no_oracle:
        oracle = Oracle(arch.header["s"], arch.header["N"])
    row = reclassify(arch, oracle)
    for rec in arch.records:
        roots = ", ".join(f"{z.real:.6g}{z.imag:+.6g}i" for z in rec.roots.canonical())
        pattern = rec.condition_residuals.get("pattern", "")
        print(f"{{{roots}}}  {pattern}  oracle={rec.oracle_verdict}")
    a, b, c, d, e = row.tuple5()
    print(f"s={row.s} N={row.N} M={row.M}: ({a},{b},{c},{d}; {e}) expected {row.expected} -> {row.status}")
    return EXIT_VIOLATION if not row.inequality_holds else EXIT_OK


def _cmd_verify(args) -> int:
    from .classify import classify
    from .oracle import verify_solution

    roots = parse_roots(args.roots)
    N = int(args.sites)
    cls = classify(roots, args.spin, N)
    v = verify_solution(roots, args.spin, N)
    out = {
        "pattern": cls.pattern,
        "distinct": cls.distinct,
        "singular": cls.singular,
        "singular_physical": cls.singular_physical,
        "strange_candidate": cls.strange_candidate,
        "verdict": v.verdict,
        "energy": v.energy,
        "eigen_residual": v.eigen_residual,
        "hw_residual": v.hw_residual,
        "level_match": v.level_match,
        "note": v.note,
    }
    print(json.dumps(out, indent=1))
    return EXIT_OK


def _cmd_expected(args) -> int:
    from .reptheory import expected_count

    print(expected_count(int(args.sites), int(args.magnons), args.spin))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="spinbethe", description="Bethe-ansatz completeness census for spin-s chains")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="cmd", required=True)

    c = sub.add_parser("census", help="solve, classify and count a grid of cells")
    c.add_argument("--spin", required=True, help="spin label, e.g. 1 or 3/2")
    c.add_argument("--sites", required=True, help="N or A..B")
    c.add_argument("--magnons", help="M or A..B (default 1..floor(sN))")
    c.add_argument("--no-oracle", action="store_true")
    c.add_argument("--budget", type=int, default=2_000_000, help="maximum number of homotopy paths per cell")
    c.add_argument("--seed", type=int, default=0)
    c.add_argument("--out", help="directory for archives and reports")
    c.set_defaults(func=_cmd_census)

    k = sub.add_parser("classify", help="re-classify a stored archive")
    k.add_argument("--archive", required=True)
    k.add_argument("--no-oracle", action="store_true")
    k.set_defaults(func=_cmd_classify)

    v = sub.add_parser("verify", help="classify and verify one root set")
    v.add_argument("--spin", required=True)
    v.add_argument("--sites", required=True)
    v.add_argument("--roots", required=True, help='comma-separated, e.g. "1i,0,-1i"')
    v.set_defaults(func=_cmd_verify)

    e = sub.add_parser("expected", help="Clebsch-Gordan multiplicity n(N, sN-M)")
    e.add_argument("--spin", required=True)
    e.add_argument("--sites", required=True)
    e.add_argument("--magnons", required=True)
    e.set_defaults(func=_cmd_expected)
    return p


def main(argv=None) -> int:
    _apply_threads()
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    from .errors import BetheError

    try:
        return args.func(args)
    except (BetheError, ValueError, OSError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
