"""Command-line interface.

Subcommands: ``score`` (evaluate a scenario file), ``certify`` (turn a
score or an experimental distribution into certification verdicts),
``sweep`` (visibility sweeps to CSV), ``verify`` (self-check suites) and
``optimize`` (seesaw search).  Exit codes are a stable contract:
0 success, 1 verification failure, 2 parse error, 3 invariant violation,
4 bad distribution, 5 size guard.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from pathlib import Path

import numpy as np

from . import catalog
from .certify import biseparable_bound, certify
from .errors import DistributionError, ScenarioError, SizeLimitError, StrategyError
from .game import GameParams, score, score_from_distribution
from .linalg import proj
from .optimize import SeesawConfig, seesaw
from .scenario_io import load_scenario, load_sweep, strategy_to_dict, sweep_strategy
from .verify import SUITES, run_suite

MAX_TOTAL_DIM = 81  # d^n cap; keeps every documented command interactive


def _guard(params: GameParams):
    if params.d ** params.n > MAX_TOTAL_DIM:
        raise SizeLimitError(
            f"d^n = {params.d ** params.n} exceeds the supported limit {MAX_TOTAL_DIM}"
        )


def _emit(doc) -> None:
    print(json.dumps(doc, indent=2, sort_keys=True))


def _cmd_score(args) -> int:
    strategy = load_scenario(args.scenario)
    _guard(strategy.params)
    report = score(strategy)
    doc = {
        "score": report.score,
        "params": {"n": strategy.params.n, "d": strategy.params.d},
    }
    if args.per_input:
        doc["per_input"] = [
            {"x": list(x), "y": list(y), "p": p}
            for (x, y), p in report.per_input.items()
        ]
    _emit(doc)
    return 0


def _read_distribution_csv(path, params: GameParams) -> dict:
    n = params.n
    cols_x = [f"x{k + 1}" for k in range(n)]
    cols_y = [f"y{k + 1}" for k in range(n)]
    cols_b = [f"b{k + 1}" for k in range(n)]
    try:
        with open(path, "r", encoding="utf-8", newline="") as fh:
            reader = csv.DictReader(fh)
            if reader.fieldnames is None:
                raise ScenarioError(f"{path}: empty CSV")
            names = {name.replace("_", "").strip(): name for name in reader.fieldnames}
            missing = [c for c in cols_x + cols_y + cols_b + ["p"] if c not in names]
            if missing:
                raise ScenarioError(f"{path}: missing columns {missing}")
            dist = {}
            for ln, row in enumerate(reader, start=2):
                try:
                    x = tuple(int(row[names[c]]) for c in cols_x)
                    y = tuple(int(row[names[c]]) for c in cols_y)
                    b = tuple(int(row[names[c]]) for c in cols_b)
                    p = float(row[names["p"]])
                except (TypeError, ValueError) as exc:
                    raise ScenarioError(f"{path}:{ln}: malformed row ({exc})") from exc
                key = (b, x, y)
                if key in dist:
                    raise ScenarioError(f"{path}:{ln}: duplicate entry for b={b}, x={x}, y={y}")
                dist[key] = p
    except OSError as exc:
        raise ScenarioError(f"cannot read distribution file {path}: {exc}") from exc
    return dist


def _cmd_certify(args) -> int:
    params = GameParams(args.n, args.d)
    _guard(params)
    if args.score is not None:
        value = args.score
        if not 0.0 <= value <= 1.0:
            raise ScenarioError(f"--score must lie in [0, 1], got {value}")
    else:
        dist = _read_distribution_csv(args.distribution, params)
        value = score_from_distribution(dist, params).score
    report = certify(value, params, margin=args.margin)
    _emit({
        "score": report.score,
        "params": {"n": params.n, "d": params.d},
        "margin": report.margin,
        "gme_certified": report.gme_certified,
        "certified_entangled_ops": report.certified_entangled_ops,
        "biseparable_bound": biseparable_bound(params),
        "thresholds": [[k, bound] for k, bound in report.thresholds],
    })
    return 0


def _cmd_sweep(args) -> int:
    spec = load_sweep(args.spec)
    out = Path(args.out)
    if out.exists() and not args.force:
        raise ScenarioError(f"refusing to overwrite {out} without --force")
    rows = []
    for v in spec["values"]:
        strategy = sweep_strategy(spec["template"], v)
        _guard(strategy.params)
        rep = score(strategy)
        cert = certify(rep.score, strategy.params)
        rows.append([
            repr(float(v)),
            repr(rep.score),
            "true" if cert.gme_certified else "false",
            str(cert.certified_entangled_ops),
            repr(biseparable_bound(strategy.params)),
        ])
    with open(out, "w", encoding="utf-8", newline="") as fh:
        fh.write("v,score,gme_certified,certified_entangled_ops,bound_1_over_d\n")
        for row in rows:
            fh.write(",".join(row) + "\n")
    print(f"wrote {len(rows)} rows to {out}")
    return 0


def _cmd_verify(args) -> int:
    lines, ok = run_suite(args.suite, seed=args.seed)
    for line in lines:
        print(line)
    return 0 if ok else 1


def _parse_state_ref(ref: str):
    """Catalog state reference, e.g. ghz:3:2, noisy_ghz:2:2:0.5, w, dicke."""
    parts = ref.split(":")
    kind = parts[0]
    try:
        if kind == "w" and len(parts) == 1:
            return GameParams(3, 2), proj(catalog.w_state())
        if kind == "dicke" and len(parts) == 1:
            return GameParams(4, 2), proj(catalog.dicke_state())
        if kind == "ghz" and len(parts) == 3:
            n, d = int(parts[1]), int(parts[2])
            return GameParams(n, d), proj(catalog.ghz_state(n, d))
        if kind == "maximally_mixed" and len(parts) == 3:
            n, d = int(parts[1]), int(parts[2])
            return GameParams(n, d), catalog.noisy_ghz(n, d, 0.0)
        if kind == "noisy_ghz" and len(parts) == 4:
            n, d = int(parts[1]), int(parts[2])
            return GameParams(n, d), catalog.noisy_ghz(n, d, float(parts[3]))
        if kind == "max_entangled" and len(parts) == 2:
            d = int(parts[1])
            return GameParams(2, d), proj(catalog.max_entangled_state(d))
    except ValueError as exc:
        raise ScenarioError(f"bad state reference {ref!r}: {exc}") from exc
    raise ScenarioError(
        f"bad state reference {ref!r}; expected w | dicke | ghz:n:d | "
        "noisy_ghz:n:d:v | maximally_mixed:n:d | max_entangled:d"
    )


def _cmd_optimize(args) -> int:
    if (args.scenario is None) == (args.state is None):
        raise ScenarioError("provide exactly one of a scenario file or --state")
    if args.scenario is not None:
        initial = load_scenario(args.scenario)
        params = initial.params
    else:
        params, state = _parse_state_ref(args.state)
        # Warm start from the clock/shift + GHZ-basis strategy; the
        # remaining restarts are fully random.
        initial = catalog.ghz_game_strategy(params.n, params.d, state=state)
    _guard(params)
    config = SeesawConfig(
        restarts=args.restarts,
        max_iter=args.max_iter,
        tol=args.tol,
        kraus_rank=args.kraus_rank,
        seed=args.seed,
        mode=args.mode,
    )
    result = seesaw(initial, config)
    doc = {
        "best_score": result.best_score,
        "converged": result.converged,
        "iterations": len(result.trace),
        "restart_scores": list(result.restart_scores),
        "params": {"n": params.n, "d": params.d},
        "mode": config.mode,
        "seed": config.seed,
    }
    if args.include_strategy:
        doc["strategy"] = strategy_to_dict(result.best_strategy)
    text = json.dumps(doc, indent=2, sort_keys=True)
    if args.out:
        Path(args.out).write_text(text + "\n", encoding="utf-8")
        print(f"wrote result to {args.out}")
    else:
        print(text)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sdicert",
        description="Semi-device-independent certification of multipartite "
                    "entangled states and joint measurements.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("score", help="evaluate the average score of a scenario file")
    p.add_argument("scenario", help="path to a scenario JSON file")
    p.add_argument("--per-input", action="store_true", help="include per-input win probabilities")
    p.set_defaults(func=_cmd_score)

    p = sub.add_parser("certify", help="certification verdicts from a score or distribution")
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument("--score", type=float, help="observed average score")
    group.add_argument("--distribution", help="CSV with columns x1..xn, y1..yn, b1..bn, p")
    p.add_argument("--n", type=int, required=True, help="number of sending parties")
    p.add_argument("--d", type=int, required=True, help="local dimension")
    p.add_argument("--margin", type=float, default=0.0,
                   help="decision margin added to every bound (default 0)")
    p.set_defaults(func=_cmd_certify)

    p = sub.add_parser("sweep", help="visibility sweep to CSV")
    p.add_argument("spec", help="path to a sweep JSON file")
    p.add_argument("--out", required=True, help="output CSV path")
    p.add_argument("--force", action="store_true", help="overwrite an existing output file")
    p.set_defaults(func=_cmd_sweep)

    p = sub.add_parser("verify", help="run a self-check suite")
    p.add_argument("--suite", choices=SUITES, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=_cmd_verify)

    p = sub.add_parser("optimize", help="seesaw optimization of the score")
    p.add_argument("scenario", nargs="?", help="scenario JSON providing the initial strategy")
    p.add_argument("--state", help="catalog state reference, e.g. ghz:3:2 or noisy_ghz:2:2:0.5")
    p.add_argument("--mode", choices=("unitary", "channel"), default="unitary")
    p.add_argument("--restarts", type=int, default=50)
    p.add_argument("--max-iter", type=int, default=150)
    p.add_argument("--tol", type=float, default=1e-8)
    p.add_argument("--kraus-rank", type=int, default=None)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", help="write the JSON result to this path instead of stdout")
    p.add_argument("--include-strategy", action="store_true",
                   help="embed the optimized strategy matrices in the output")
    p.set_defaults(func=_cmd_optimize)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ScenarioError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except StrategyError as exc:
        print(f"invariant violation: {exc}", file=sys.stderr)
        return 3
    except DistributionError as exc:
        print(f"bad distribution: {exc}", file=sys.stderr)
        return 4
    except SizeLimitError as exc:
        print(f"size guard: {exc}", file=sys.stderr)
        return 5


if __name__ == "__main__":
    raise SystemExit(main())
