"""Batch command-line interface.

Subcommands:
    power-curve   compute a power curve from a session file (CSV/JSON out)
    pairwise      compute pairwise-difference frames (CSV/JSON out)
    trial-table   export the counterbalanced trial table as CSV
    serve         start the local HTTP service

Exit codes: 0 success, 2 validation error, 3 computation error. Errors are
printed as a single JSON line on stderr.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys

from .design import generate_trial_table
from .errors import InvalidMetadata, InvalidUpdate, PowerforgeError
from .session import Session, load_session
from .stats import Axis, LevelPair, all_pairs, min_power_pair, pairwise_frames, power_curve

DEFAULT_PORT = 8710


def _parse_range(text: str) -> tuple[int, int]:
    try:
        lo, hi = text.split("..")
        lo_i, hi_i = int(lo), int(hi)
    except ValueError:
        raise InvalidUpdate(f"bad range {text!r}, expected LO..HI") from None
    if not 2 <= lo_i <= hi_i:
        raise InvalidUpdate("need 2 <= LO <= HI")
    return lo_i, hi_i


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--session", required=True, help="session JSON file")
    parser.add_argument("--seed", type=int, default=None, help="override the session seed")
    parser.add_argument("--out", default=None, help="output file (default: stdout)")
    parser.add_argument("--format", choices=["csv", "json"], default="csv")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="powerforge")
    sub = parser.add_subparsers(dest="command", required=True)

    curve = sub.add_parser("power-curve", help="power vs. sample size or replications")
    _add_common(curve)
    curve.add_argument("--k", type=int, default=1000, help="datasets per point")
    curve.add_argument("--alpha", type=float, default=0.05)
    curve.add_argument("--n", default="6..50", help="x range LO..HI")
    curve.add_argument("--pair", default=None, help='pair spec "IV:levelA-levelB"')
    curve.add_argument("--min-power", action="store_true", help="use the minimum-power pair")
    curve.add_argument(
        "--axis", choices=["participants", "replications"], default="participants"
    )
    curve.add_argument("--tier", choices=["analytic", "both"], default="both")

    pairwise = sub.add_parser("pairwise", help="pairwise-difference frames")
    _add_common(pairwise)
    pairwise.add_argument("--k", type=int, default=1000)
    pairwise.add_argument("--alpha", type=float, default=0.05)
    pairwise.add_argument("--frames", type=int, default=30)
    pairwise.add_argument("--pair", action="append", default=None)

    table = sub.add_parser("trial-table", help="export the trial table")
    _add_common(table)

    serve = sub.add_parser("serve", help="start the HTTP service")
    serve.add_argument("--port", type=int, default=None)
    serve.add_argument("--host", default="127.0.0.1")

    return parser


def _resolve_seed(args, session: Session) -> int:
    if args.seed is not None:
        if args.seed < 0:
            raise InvalidUpdate("seed must be >= 0")
        return args.seed
    return session.settings.seed


def _resolve_pair(args, session: Session) -> LevelPair:
    if getattr(args, "min_power", False):
        model = session.population_model()
        return min_power_pair(
            model, all_pairs(session.design), session.design.participants, args.alpha
        ).pair
    if args.pair:
        return LevelPair.parse(args.pair, session.design)
    return session.tradeoff_pair()


def _write_out(text: str, out_path: str | None) -> None:
    if out_path is None:
        sys.stdout.write(text)
    else:
        with open(out_path, "w", newline="") as fh:
            fh.write(text)


def _cmd_power_curve(args) -> int:
    session = load_session(args.session)
    seed = _resolve_seed(args, session)
    pair = _resolve_pair(args, session)
    lo, hi = _parse_range(args.n)
    model = session.population_model()
    curve = power_curve(
        model,
        pair,
        Axis(args.axis),
        range(lo, hi + 1),
        args.k,
        args.alpha,
        seed,
        tier=args.tier,
    )
    if args.format == "json":
        payload = {
            "pair": pair.label(),
            "axis": curve.axis.value,
            "alpha": curve.alpha,
            "points": [
                {"x": p.x, "power": p.power, "mc_stderr": p.mc_stderr, "tier": p.tier.value}
                for p in curve.points
            ],
        }
        _write_out(json.dumps(payload, sort_keys=True) + "\n", args.out)
    else:
        buf = io.StringIO()
        writer = csv.writer(buf)
        writer.writerow(["x", "power", "mc_stderr", "tier"])
        for p in curve.points:
            writer.writerow([p.x, repr(p.power), repr(p.mc_stderr), p.tier.value])
        _write_out(buf.getvalue(), args.out)
    return 0


def _cmd_pairwise(args) -> int:
    session = load_session(args.session)
    seed = _resolve_seed(args, session)
    if args.pair:
        pairs = [LevelPair.parse(text, session.design) for text in args.pair]
    else:
        pairs = list(session.pairwise_pairs)
    model = session.population_model()
    frame_lists = pairwise_frames(
        model, pairs, session.design.participants, args.frames, args.alpha, seed
    )
    if args.format == "json":
        payload = [
            [
                {
                    "frame": i,
                    "pair": f.pair.label(),
                    "mean_diff": f.mean_diff,
                    "ci_lo": f.ci_lo,
                    "ci_hi": f.ci_hi,
                    "cohens_d": None if f.degenerate else f.cohens_d,
                }
                for f in frame
            ]
            for i, frame in enumerate(frame_lists)
        ]
        _write_out(json.dumps(payload, sort_keys=True) + "\n", args.out)
    else:
        buf = io.StringIO()
        writer = csv.writer(buf)
        writer.writerow(["frame", "pair", "mean_diff", "ci_lo", "ci_hi", "cohens_d"])
        for i, frame in enumerate(frame_lists):
            for f in frame:
                writer.writerow(
                    [i, f.pair.label(), repr(f.mean_diff), repr(f.ci_lo), repr(f.ci_hi),
                     repr(f.cohens_d)]
                )
        _write_out(buf.getvalue(), args.out)
    return 0


def _cmd_trial_table(args) -> int:
    session = load_session(args.session)
    seed = _resolve_seed(args, session)
    table = generate_trial_table(session.design, seed)
    buf = io.StringIO()
    table.write_csv(buf)
    _write_out(buf.getvalue(), args.out)
    return 0


def _cmd_serve(args) -> int:
    import uvicorn

    from .service import create_app

    port = args.port
    if port is None:
        port = int(os.environ.get("POWERFORGE_PORT", DEFAULT_PORT))
    # repo layout: the built browser client sits next to src/ in frontend/
    frontend = os.path.join(
        os.path.dirname(os.path.dirname(os.path.dirname(os.path.abspath(__file__)))), "frontend"
    )
    uvicorn.run(create_app(frontend_dir=frontend), host=args.host, port=port)
    return 0


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    handlers = {
        "power-curve": _cmd_power_curve,
        "pairwise": _cmd_pairwise,
        "trial-table": _cmd_trial_table,
        "serve": _cmd_serve,
    }
    try:
        return handlers[args.command](args)
    except (InvalidMetadata, InvalidUpdate) as exc:
        print(json.dumps({"error": exc.code, "message": str(exc)}), file=sys.stderr)
        return 2
    except PowerforgeError as exc:
        print(json.dumps({"error": exc.code, "message": str(exc)}), file=sys.stderr)
        return 3
    except Exception as exc:  # computation failures map to exit 3
        print(json.dumps({"error": "INTERNAL", "message": str(exc)}), file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
