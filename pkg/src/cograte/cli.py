"""Command line entry point: ``cograte <command> --config FILE``.

Exit codes: 0 success, 1 validation failure or numerical error, 2 bad
configuration or parameters.
"""

from __future__ import annotations

import argparse
import math
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import __version__, kernels
from .config import ExperimentConfig, echo, load_config
from .errors import ConfigError, DomainError
from .estimation import EstimatorKind
from .optimizer import optimize_operating_point, optimize_powers, snr_from_budget
from .sensing import SensingConfig, gaussian_approx_probs, operating_point, roc_curve
from .tables import Table, to_csv, to_json
from .validation import run_checks

EXIT_OK, EXIT_FAIL, EXIT_CONFIG = 0, 1, 2
NAN = float("nan")


class GridPointError(RuntimeError):
    """Wraps a failure with the sweep point that triggered it."""

    def __init__(self, where: str, exc: Exception):
        super().__init__(f"{where}: {exc}")
        self.cause = exc


def _ordered_map(fn, items, workers):
    if workers > 1 and len(items) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(fn, items))
    return [fn(item) for item in items]


def _at(where, fn, *args):
    try:
        return fn(*args)
    except (DomainError, ArithmeticError) as exc:
        raise GridPointError(where, exc) from exc


def _scale(bits: bool):
    return 1.0 / math.log(2.0) if bits else 1.0


def _power_source(results):
    """Powers reported in sweep tables: noncausal optimum when available."""
    return results.get(EstimatorKind.NONCAUSAL) or results.get(EstimatorKind.CAUSAL)


def sweep_snr(cfg: ExperimentConfig, bits=False, workers=1) -> Table:
    table = Table(["snr_db", "rate_causal", "rate_noncausal", "gap", "P_t", "P_1", "P_2", "slack"])
    k = _scale(bits)
    points = cfg.budgets()

    def run(point):
        snr_db, budget = point
        return {kind: _at(f"snr_db={snr_db:g}", optimize_powers, cfg.params, cfg.detector,
                          budget, kind, cfg.grid_resolution) for kind in cfg.estimators}

    for (snr_db, _), res in zip(points, _ordered_map(run, points, workers)):
        rc = res[EstimatorKind.CAUSAL].best_rate * k if EstimatorKind.CAUSAL in res else NAN
        rn = res[EstimatorKind.NONCAUSAL].best_rate * k if EstimatorKind.NONCAUSAL in res else NAN
        src = _power_source(res)
        a = src.best_alloc
        table.add(snr_db, rc, rn, rn - rc, a.pilot, a.busy_data, a.idle_data, src.constraint_slack)
    return table


def sweep_pd(cfg: ExperimentConfig, bits=False, workers=1) -> Table:
    if cfg.threshold_sweep is None:
        raise ConfigError("sweep-pd needs a sweep.threshold range")
    table = Table(["lambda", "P_d", "P_f", "rate_causal", "rate_noncausal", "P_t", "P_1", "P_2"])
    k = _scale(bits)
    sens = SensingConfig.from_params(cfg.params)
    lams = [float(x) for x in cfg.threshold_sweep.values()]

    def run(lam):
        op = operating_point(sens, lam)
        return op, {kind: _at(f"lambda={lam:g}", optimize_powers, cfg.params, op,
                              cfg.params.budget, kind, cfg.grid_resolution)
                    for kind in cfg.estimators}

    for lam, (op, res) in zip(lams, _ordered_map(run, lams, workers)):
        rc = res[EstimatorKind.CAUSAL].best_rate * k if EstimatorKind.CAUSAL in res else NAN
        rn = res[EstimatorKind.NONCAUSAL].best_rate * k if EstimatorKind.NONCAUSAL in res else NAN
        a = _power_source(res).best_alloc
        table.add(lam, op.p_d, op.p_f, rc, rn, a.pilot, a.busy_data, a.idle_data)
    return table


def optimize(cfg: ExperimentConfig, bits=False, workers=1) -> Table:
    table = Table(["estimator", "snr_db", "lambda", "P_d", "P_f", "rate", "P_t", "P_1", "P_2",
                   "slack"])
    k = _scale(bits)
    p = cfg.params
    snr_db = snr_from_budget(p.budget, p.geom.bandwidth, p.noise_var)[1]
    for kind in cfg.estimators:
        if cfg.optimize_threshold:
            if cfg.threshold_sweep is None:
                raise ConfigError("optimizer.optimize_threshold needs a sweep.threshold range")
            res = _at(f"estimator={kind.value}", optimize_operating_point, p, p.budget, kind,
                      cfg.threshold_sweep.values(), cfg.grid_resolution, workers)
        else:
            res = _at(f"estimator={kind.value}", optimize_powers, p, cfg.detector, p.budget, kind,
                      cfg.grid_resolution)
        op, a = res.best_op, res.best_alloc
        lam = NAN if op.threshold is None else op.threshold
        table.add(kind.value, snr_db, lam, op.p_d, op.p_f, res.best_rate * k,
                  a.pilot, a.busy_data, a.idle_data, res.constraint_slack)
    return table


def roc(cfg: ExperimentConfig, bits=False, workers=1) -> Table:
    if cfg.threshold_sweep is None:
        raise ConfigError("roc needs a sweep.threshold range")
    sens = SensingConfig.from_params(cfg.params)
    lams = cfg.threshold_sweep.values()
    pts = roc_curve(sens, lams)
    pf_g, pd_g = gaussian_approx_probs(sens, lams)
    table = Table(["lambda", "P_f", "P_d", "P_f_gauss", "P_d_gauss"])
    for lam, op, a, b in zip(lams, pts, np.atleast_1d(pf_g), np.atleast_1d(pd_g)):
        table.add(float(lam), op.p_f, op.p_d, float(a), float(b))
    return table


def validate_cmd(cfg: ExperimentConfig, bits=False, workers=1) -> Table:
    table = Table(["check", "measured", "tolerance", "passed"])
    for res in run_checks(cfg, workers):
        table.add(*res)
    return table


COMMANDS = {
    "sweep-snr": sweep_snr,
    "sweep-pd": sweep_pd,
    "optimize": optimize,
    "roc": roc,
    "validate": validate_cmd,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cograte",
        description="Achievable-rate sweeps for a pilot-assisted secondary link under imperfect "
                    "spectrum sensing.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("command", choices=sorted(COMMANDS))
    parser.add_argument("--config", required=True, help="YAML experiment configuration")
    parser.add_argument("--out", help="output file (default: output.path or stdout)")
    parser.add_argument("--format", choices=("csv", "json"), help="override output.format")
    parser.add_argument("--bits", action="store_true", help="report rates in bits/s")
    parser.add_argument("--workers", type=int, default=1, help="worker threads (default 1)")
    return parser


def render(command: str, cfg: ExperimentConfig, table: Table, fmt: str, bits: bool) -> str:
    table.meta = {
        "tool": f"cograte {__version__}",
        "command": command,
        "seed": cfg.mc.seed,
        "rate_unit": "bits/s" if bits else "nats/s",
        "kernel_backend": kernels.BACKEND_NAME,
    }
    if fmt == "json":
        return to_json(table, cfg.raw)
    return to_csv(table, echo(cfg))


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.workers < 1:
        print("error: --workers must be >= 1", file=sys.stderr)
        return EXIT_CONFIG
    try:
        cfg = load_config(args.config)
        table = COMMANDS[args.command](cfg, args.bits, args.workers)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except GridPointError as exc:
        print(f"error at {exc}", file=sys.stderr)
        return EXIT_CONFIG if isinstance(exc.cause, DomainError) else EXIT_FAIL
    except DomainError as exc:
        print(f"parameter error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    fmt = args.format or cfg.output_format
    text = render(args.command, cfg, table, fmt, args.bits)
    out = args.out or cfg.output_path
    if out:
        Path(out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)

    if args.command == "validate":
        failed = [row[0] for row in table.rows if not row[3]]
        if failed:
            print(f"validation failed: {', '.join(failed)}", file=sys.stderr)
            return EXIT_FAIL
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
