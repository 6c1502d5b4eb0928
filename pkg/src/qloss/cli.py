"""Command-line entry point: ``qloss run``, ``qloss demo`` and ``qloss sweep``.

Exit codes: 0 when every relation holds and every identity residual is
within tolerance, 1 when some check fails, 2 on parse or validation errors.
"""

from __future__ import annotations

import argparse
import sys

from .core import ValidationError
from .demos import DEMOS, demo
from .scenario import dumps, load_scenario, relations_csv, run_scenario
from .sweep import RELATIONS, sweep


def _dims(text: str) -> tuple:
    try:
        dims = tuple(int(x) for x in text.split(",") if x.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"dimensions must be comma-separated integers, got {text!r}") from None
    if not dims or any(d < 1 or d > 6 for d in dims):
        raise argparse.ArgumentTypeError("dimensions must lie between 1 and 6")
    return dims


def _positive(text: str) -> int:
    n = int(text)
    if n < 1:
        raise argparse.ArgumentTypeError("count must be at least 1")
    return n


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="qloss", description="Error/disturbance losses and uncertainty relations.")
    sub = p.add_subparsers(dest="command", required=True)

    r = sub.add_parser("run", help="evaluate a scenario file")
    r.add_argument("file")
    r.add_argument("--tol", type=float, help="slack and residual tolerance (default 1e-9)")
    r.add_argument("--out", help="write the JSON report here instead of stdout")
    r.add_argument("--csv", help="also write the relation table as CSV")

    d = sub.add_parser("demo", help="run a built-in scenario")
    d.add_argument("name", choices=DEMOS)
    d.add_argument("--out")
    d.add_argument("--csv")

    s = sub.add_parser("sweep", help="randomized verification of every relation")
    s.add_argument("--dims", type=_dims, default=(2, 3, 4))
    s.add_argument("--count", type=_positive, default=100, help="scenarios per relation")
    s.add_argument("--seed", type=int, default=1)
    s.add_argument("--relations", help=f"comma-separated subset of {','.join(RELATIONS)}")
    s.add_argument("--out")
    return p


def _emit(text: str, path: str | None) -> None:
    if path:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "sweep":
            rels = RELATIONS
            if args.relations:
                rels = tuple(x.strip() for x in args.relations.split(","))
                unknown = set(rels) - set(RELATIONS)
                if unknown:
                    raise ValidationError(f"unknown relation(s): {', '.join(sorted(unknown))}")
            report = sweep(args.dims, args.count, args.seed, rels).to_json()
        else:
            if args.command == "run":
                sc = load_scenario(args.file)
                if args.tol is not None:
                    sc.tol = sc.tol.replace(holds=args.tol)
                rep = run_scenario(sc)
            else:
                rep = demo(args.name)
            report = rep.to_json()
            if args.csv:
                with open(args.csv, "w", encoding="utf-8", newline="") as fh:
                    fh.write(relations_csv(report))
    except (ValidationError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    _emit(dumps(report), args.out)
    return 0 if report["ok"] else 1


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
