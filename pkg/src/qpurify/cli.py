"""Command-line entry point.

    qpurify verify-nogo --gamma 0.3
    qpurify verify-3slot --gamma-range 0.1:0.9:0.1 --samples 100 --format csv
    qpurify experiment-causal-order --gamma-range 0:1:0.05 --output sweep.csv
    qpurify export-constants --output constants.txt

Exit codes: 0 all checks pass, 1 a verification check fails, 2 usage error,
3 solver failure.
"""
from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .circuits.constants import export_text
from .strategies import KINDS
from .theorems import (
    baseline_fidelity,
    circuit_fidelities,
    gate_set_experiment,
    optimal_fidelity_3slot,
    verify_3slot,
    verify_nogo,
)

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_SOLVER = 0, 1, 2, 3


class UsageError(ValueError):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


@dataclass(frozen=True)
class RunConfig:
    command: str
    gammas: tuple
    tol: float
    samples: int
    seed: int
    output: str | None
    fmt: str


def parse_range(text: str) -> list[float]:
    """Inclusive grid "start:stop:step", computed in exact decimal arithmetic."""
    parts = text.split(":")
    if len(parts) != 3:
        raise UsageError(f"malformed range {text!r}, expected start:stop:step")
    try:
        start, stop, step = (Fraction(p.strip()) for p in parts)
    except (ValueError, ZeroDivisionError):
        raise UsageError(f"malformed range {text!r}, expected start:stop:step") from None
    if step <= 0:
        raise UsageError("range step must be positive")
    if stop < start:
        raise UsageError("range stop must not precede start")
    count = int((stop - start) / step)
    return [float(start + k * step) for k in range(count + 1)]


def fmt_value(v) -> str:
    if isinstance(v, bool):
        return "1" if v else "0"
    if isinstance(v, (float, np.floating, int, np.integer)):
        return f"{float(v):.12g}"
    return str(v)


def render(rows: list[dict], columns: list[str], fmt: str) -> str:
    if fmt == "csv":
        lines = [",".join(columns)]
        lines += [",".join(fmt_value(r[c]) for c in columns) for r in rows]
        return "\n".join(lines) + "\n"
    if fmt == "jsonl":
        return "".join(json.dumps({c: _jsonable(r[c]) for c in columns}, sort_keys=False) + "\n" for r in rows)
    blocks = []
    for r in rows:
        blocks.append("\n".join(f"{c}: {fmt_value(r[c])}" for c in columns))
    return "\n\n".join(blocks) + "\n"


def _jsonable(v):
    if isinstance(v, (np.floating, np.integer)):
        return v.item()
    if isinstance(v, np.bool_):
        return bool(v)
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    return v


def _emit(text: str, cfg: RunConfig) -> None:
    if cfg.output:
        with open(cfg.output, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _config(args) -> RunConfig:
    if args.gamma is not None and args.gamma_range is not None:
        raise UsageError("use either --gamma or --gamma-range")
    if args.gamma_range is not None:
        gammas = tuple(parse_range(args.gamma_range))
    elif args.gamma is not None:
        gammas = (args.gamma,)
    else:
        gammas = tuple(parse_range(args.default_range))
    if any(not 0 <= g <= 1 for g in gammas):
        raise UsageError("gamma values must lie in [0, 1]")
    if args.tol <= 0:
        raise UsageError("--tol must be positive")
    if args.samples <= 0:
        raise UsageError("--samples must be positive")
    return RunConfig(args.command, gammas, args.tol, args.samples, args.seed, args.output, args.format)


def _worse(a: int, b: int) -> int:
    """Solver failure outranks verification failure, which outranks success."""
    rank = {EXIT_OK: 0, EXIT_FAIL: 1, EXIT_SOLVER: 2}
    return a if rank[a] >= rank[b] else b


def cmd_verify_nogo(cfg: RunConfig) -> int:
    rows, code = [], EXIT_OK
    for g in cfg.gammas:
        if not 0 < g < 1:
            raise UsageError("verify-nogo needs gamma in (0, 1)")
        rep = verify_nogo(g, cfg.tol)
        rows.append(rep.record())
        code = _worse(code, EXIT_SOLVER if rep.failures else EXIT_OK if rep.ok else EXIT_FAIL)
    columns = ["gamma", "full_ico", "baseline", "improvement", "chain_spread", "m_lambda_max",
               "stage_reduced", "stage_sdp_first", "stage_sdp_7+", "stage_sdp_7", "stage_sdp_6",
               "stage_sdp_4", "stage_sdp_2", "stage_sdp_3", "pass"]
    for r in rows:
        for c in columns:
            r.setdefault(c, float("nan"))
    _emit(render(rows, columns, cfg.fmt), cfg)
    return code


def cmd_verify_three_slot(cfg: RunConfig) -> int:
    rows, code = [], EXIT_OK
    for g in cfg.gammas:
        if g in (0.0, 1.0):
            # endpoints: the closed form is exact and the circuit reproduces it
            f = optimal_fidelity_3slot(g)
            circ = float(circuit_fidelities(g, cfg.samples, cfg.seed).mean())
            ok = abs(circ - f) <= 1e-9
            rows.append({"gamma": g, "primal": f, "dual": f, "formula": f, "circuit": circ,
                         "baseline": baseline_fidelity(g), "delta": f - baseline_fidelity(g), "pass": ok})
            code = _worse(code, EXIT_OK if ok else EXIT_FAIL)
            continue
        rep = verify_3slot(g, cfg.tol, cfg.samples, cfg.seed)
        rows.append(rep.record())
        code = _worse(code, EXIT_SOLVER if rep.failures else EXIT_OK if rep.ok else EXIT_FAIL)
    columns = ["gamma", "primal", "dual", "formula", "circuit", "baseline", "delta"]
    if cfg.fmt != "csv":
        columns = columns + ["pass"]
    _emit(render(rows, columns, cfg.fmt), cfg)
    return code


def cmd_experiment_causal_order(cfg: RunConfig) -> int:
    table = gate_set_experiment(cfg.gammas, kinds=KINDS)
    rows, code = [], EXIT_OK
    for r in table:
        row = {"gamma": r.gamma, "baseline": r.baseline}
        row.update(r.values)
        row["status"] = "ok" if r.ok else ";".join(f"{k}={s}" for k, s in r.statuses.items() if s != "optimal")
        rows.append(row)
        valid = r.monotone(cfg.tol) and min(r.values.values()) >= r.baseline - cfg.tol
        code = _worse(code, EXIT_SOLVER if not r.ok else EXIT_OK if valid else EXIT_FAIL)
    columns = ["gamma", "parallel", "sequential", "ico", "baseline"]
    if code == EXIT_SOLVER:
        columns.append("status")
    _emit(render(rows, columns, cfg.fmt), cfg)
    return code


def cmd_export_constants(cfg: RunConfig) -> int:
    _emit(export_text(), cfg)
    return EXIT_OK


COMMANDS = {
    "verify-nogo": (cmd_verify_nogo, "0.1:0.9:0.1", "text"),
    "verify-3slot": (cmd_verify_three_slot, "0.1:0.9:0.1", "text"),
    "experiment-causal-order": (cmd_experiment_causal_order, "0:1:0.05", "csv"),
    "export-constants": (cmd_export_constants, "0:0:1", "text"),
}


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="qpurify", description="Purification bounds for noisy unitary channels.")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)
    helps = {
        "verify-nogo": "two-slot ICO no-go check",
        "verify-3slot": "three-slot optimum: primal, dual, closed form and circuit",
        "experiment-causal-order": "gate-set sweep over parallel, sequential and ICO strategies",
        "export-constants": "print the circuit isometries",
    }
    for name, (_, default_range, default_fmt) in COMMANDS.items():
        p = sub.add_parser(name, help=helps[name])
        p.add_argument("--gamma", type=float)
        p.add_argument("--gamma-range", help="inclusive start:stop:step")
        p.add_argument("--tol", type=float, default=1e-6)
        p.add_argument("--samples", type=int, default=100)
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--output")
        p.add_argument("--format", choices=("csv", "jsonl", "text"), default=default_fmt)
        p.set_defaults(default_range=default_range)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command is None:
            raise UsageError("a command is required")
        cfg = _config(args)
        return COMMANDS[cfg.command][0](cfg)
    except UsageError as exc:
        sys.stderr.write(f"usage error: {exc}\n")
        sys.stderr.write(parser.format_usage())
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
