"""Experiment configuration files (YAML, units spelled out in the key names)."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import yaml

from .errors import ConfigError, DomainError
from .estimation import EstimatorKind
from .frame import SystemParams, validate
from .optimizer import budget_from_snr
from .sensing import OperatingPoint, SensingConfig, operating_point

_SYSTEM_KEYS = {
    "bandwidth_hz": "bandwidth",
    "block_sec": "block_len",
    "sensing_sec": "sensing_len",
    "fading_coeff": "alpha",
    "fading_power": "fading_var",
    "noise_power": "noise_var",
    "interference_power": "interference_var",
    "activity_prob": "activity_prob",
    "interference_cap": "i_avg",
    "busy_cap": "busy_cap",
    "idle_cap": "idle_cap",
}
_TOP_KEYS = {"system", "detector", "estimators", "sweep", "optimizer", "mc", "validate", "output"}


@dataclass(frozen=True)
class Range:
    start: float
    stop: float
    steps: int

    def values(self) -> np.ndarray:
        return np.linspace(self.start, self.stop, self.steps)


@dataclass(frozen=True)
class McSettings:
    seed: int = 20240601
    trials: int = 1_000_000


@dataclass(frozen=True)
class ValidateSettings:
    tolerance_scale: float = 1.0
    fir_taps: int = 501
    pilot_powers: tuple[float, ...] = (1.0, 10.0, 100.0)


@dataclass(frozen=True)
class ExperimentConfig:
    params: SystemParams
    estimators: tuple[EstimatorKind, ...]
    detector: OperatingPoint
    snr_sweep: Range | None = None
    cap_sweep: Range | None = None
    threshold_sweep: Range | None = None
    grid_resolution: int = 16
    optimize_threshold: bool = False
    mc: McSettings = McSettings()
    validate: ValidateSettings = ValidateSettings()
    output_format: str = "csv"
    output_path: str | None = None
    raw: dict = field(default_factory=dict, repr=False, compare=False)

    def budgets(self):
        """(snr_db, InterferenceBudget) pairs of the SNR sweep."""
        from .frame import InterferenceBudget
        from .optimizer import snr_from_budget

        p = self.params
        if self.snr_sweep is not None:
            return [(float(db), budget_from_snr(db, p.geom.bandwidth, p.noise_var))
                    for db in self.snr_sweep.values()]
        if self.cap_sweep is not None:
            out = []
            for cap in self.cap_sweep.values():
                if not cap > 0:
                    raise ConfigError(f"interference cap sweep contains a nonpositive value {cap}")
                b = InterferenceBudget(float(cap))
                out.append((snr_from_budget(b, p.geom.bandwidth, p.noise_var)[1], b))
            return out
        raise ConfigError("no sweep.snr_db or sweep.interference_cap range configured")


def _section(raw, name, required=False):
    value = raw.get(name)
    if value is None:
        if required:
            raise ConfigError(f"missing section '{name}'")
        return {}
    if not isinstance(value, dict):
        raise ConfigError(f"section '{name}' must be a mapping")
    return value


def _number(value, where):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{where} must be a number, got {value!r}")
    if not math.isfinite(value):
        raise ConfigError(f"{where} must be finite")
    return float(value)


def _range(spec, where) -> Range:
    if not isinstance(spec, dict) or set(spec) != {"start", "stop", "steps"}:
        raise ConfigError(f"{where} must have exactly the keys start, stop, steps")
    start = _number(spec["start"], f"{where}.start")
    stop = _number(spec["stop"], f"{where}.stop")
    steps = spec["steps"]
    if isinstance(steps, bool) or not isinstance(steps, int) or steps < 1:
        raise ConfigError(f"{where}.steps must be a positive integer")
    if stop < start or (steps > 1 and stop == start):
        raise ConfigError(f"{where} must be ordered with start < stop")
    return Range(start, stop, steps)


def _unknown(section, allowed, where):
    extra = set(section) - set(allowed)
    if extra:
        raise ConfigError(f"unknown key(s) in {where}: {', '.join(sorted(extra))}")


def parse_config(raw: dict) -> ExperimentConfig:
    """Build an :class:`ExperimentConfig` from an already-parsed mapping."""
    if not isinstance(raw, dict):
        raise ConfigError("configuration root must be a mapping")
    _unknown(raw, _TOP_KEYS, "configuration")

    system = _section(raw, "system", required=True)
    _unknown(system, set(_SYSTEM_KEYS) | {"snr_db"}, "system")
    flat = {}
    for key, target in _SYSTEM_KEYS.items():
        if key in system and system[key] is not None:
            flat[target] = _number(system[key], f"system.{key}")
    if "snr_db" in system:
        if "i_avg" in flat:
            raise ConfigError("give either system.snr_db or system.interference_cap, not both")
        snr_db = _number(system["snr_db"], "system.snr_db")
        bandwidth = flat.get("bandwidth", 1.0)
        noise = flat.get("noise_var", 1.0)
        try:
            flat["i_avg"] = budget_from_snr(snr_db, bandwidth, noise).i_avg
        except DomainError as exc:
            raise ConfigError(str(exc)) from exc
    try:
        params = validate(flat)
    except DomainError as exc:
        raise ConfigError(f"system: {exc}") from exc

    est_raw = raw.get("estimators", ["noncausal", "causal"])
    if isinstance(est_raw, str):
        est_raw = [est_raw]
    try:
        kinds = tuple(sorted({EstimatorKind.parse(k) for k in est_raw}, key=lambda k: k.value))
    except DomainError as exc:
        raise ConfigError(str(exc)) from exc
    if not kinds:
        raise ConfigError("estimators must name at least one of noncausal, causal")

    det = _section(raw, "detector")
    _unknown(det, {"p_d", "p_f", "threshold"}, "detector")
    try:
        if "threshold" in det:
            if "p_d" in det or "p_f" in det:
                raise ConfigError("detector: give either threshold or (p_d, p_f)")
            detector = operating_point(SensingConfig.from_params(params),
                                       _number(det["threshold"], "detector.threshold"))
        else:
            detector = OperatingPoint.fixed(_number(det.get("p_d", 0.91), "detector.p_d"),
                                            _number(det.get("p_f", 0.23), "detector.p_f"))
    except DomainError as exc:
        raise ConfigError(f"detector: {exc}") from exc

    sweep = _section(raw, "sweep")
    _unknown(sweep, {"snr_db", "interference_cap", "threshold"}, "sweep")
    if "snr_db" in sweep and "interference_cap" in sweep:
        raise ConfigError("sweep: give either snr_db or interference_cap, not both")
    snr_sweep = _range(sweep["snr_db"], "sweep.snr_db") if "snr_db" in sweep else None
    cap_sweep = None
    if "interference_cap" in sweep:
        cap_sweep = _range(sweep["interference_cap"], "sweep.interference_cap")
        if cap_sweep.stop <= 0:
            raise ConfigError("sweep.interference_cap must contain positive budgets")
    thr_sweep = _range(sweep["threshold"], "sweep.threshold") if "threshold" in sweep else None
    if thr_sweep is not None and thr_sweep.start < 0:
        raise ConfigError("sweep.threshold must be nonnegative")

    opt = _section(raw, "optimizer")
    _unknown(opt, {"grid_resolution", "optimize_threshold"}, "optimizer")
    grid_resolution = opt.get("grid_resolution", 16)
    if isinstance(grid_resolution, bool) or not isinstance(grid_resolution, int) or grid_resolution < 8:
        raise ConfigError("optimizer.grid_resolution must be an integer >= 8")
    optimize_threshold = bool(opt.get("optimize_threshold", False))

    mc_raw = _section(raw, "mc")
    _unknown(mc_raw, {"seed", "trials"}, "mc")
    seed = mc_raw.get("seed", McSettings.seed)
    trials = mc_raw.get("trials", McSettings.trials)
    if isinstance(seed, bool) or not isinstance(seed, int) or seed < 0:
        raise ConfigError("mc.seed must be a nonnegative integer")
    if isinstance(trials, bool) or not isinstance(trials, int) or trials < 1:
        raise ConfigError("mc.trials must be a positive integer")

    val_raw = _section(raw, "validate")
    _unknown(val_raw, {"tolerance_scale", "fir_taps", "pilot_powers"}, "validate")
    scale = _number(val_raw.get("tolerance_scale", 1.0), "validate.tolerance_scale")
    if scale < 0:
        raise ConfigError("validate.tolerance_scale must be >= 0")
    taps = val_raw.get("fir_taps", 501)
    if isinstance(taps, bool) or not isinstance(taps, int) or taps < 1:
        raise ConfigError("validate.fir_taps must be a positive integer")
    pilots = tuple(_number(p, "validate.pilot_powers") for p in
                   val_raw.get("pilot_powers", ValidateSettings.pilot_powers))
    if not pilots or min(pilots) <= 0:
        raise ConfigError("validate.pilot_powers must be a nonempty list of positive powers")

    out = _section(raw, "output")
    _unknown(out, {"format", "path"}, "output")
    fmt = out.get("format", "csv")
    if fmt not in ("csv", "json"):
        raise ConfigError("output.format must be csv or json")

    return ExperimentConfig(
        params=params, estimators=kinds, detector=detector, snr_sweep=snr_sweep,
        cap_sweep=cap_sweep, threshold_sweep=thr_sweep, grid_resolution=grid_resolution,
        optimize_threshold=optimize_threshold, mc=McSettings(seed, trials),
        validate=ValidateSettings(scale, taps, pilots), output_format=fmt,
        output_path=out.get("path"), raw=raw)


def load_config(path) -> ExperimentConfig:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror or exc}") from exc
    try:
        raw = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigError(f"invalid YAML in {path}: {exc}") from exc
    return parse_config(raw if raw is not None else {})


def echo(cfg: ExperimentConfig) -> str:
    """Canonical YAML rendering of the raw configuration, for output headers."""
    return yaml.safe_dump(cfg.raw, sort_keys=True, default_flow_style=False).rstrip("\n")
