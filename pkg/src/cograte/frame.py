"""System parameter bundle shared by every stage of the analysis."""

from __future__ import annotations

import dataclasses
import math
from collections.abc import Mapping
from dataclasses import dataclass

from .channel import FrameGeometry, GaussMarkov
from .errors import DomainError


@dataclass(frozen=True)
class InterferenceBudget:
    """Average transmit-power cap I_avg protecting the primary users."""

    i_avg: float

    def __post_init__(self):
        if not (self.i_avg > 0 and math.isfinite(self.i_avg)):
            raise DomainError(f"interference cap I_avg must be positive and finite, got {self.i_avg}")


@dataclass(frozen=True)
class SystemParams:
    """Physical and link constants of one secondary link.

    ``busy_cap`` / ``idle_cap`` optionally bound the per-symbol data power in
    each sensed state; they only matter when the interference constraint does
    not bound that state (detection probability 1 or 0).
    """

    geom: FrameGeometry
    gm: GaussMarkov
    noise_var: float = 1.0
    interference_var: float = 1.0
    activity_prob: float = 0.1
    budget: InterferenceBudget = InterferenceBudget(100.0)
    busy_cap: float | None = None
    idle_cap: float | None = None

    def __post_init__(self):
        if not (self.noise_var > 0 and math.isfinite(self.noise_var)):
            raise DomainError(f"noise_var must be positive, got {self.noise_var}")
        if not (self.interference_var >= 0 and math.isfinite(self.interference_var)):
            raise DomainError(f"interference_var must be >= 0, got {self.interference_var}")
        if not (0.0 <= self.activity_prob <= 1.0):
            raise DomainError(f"activity_prob must lie in [0, 1], got {self.activity_prob}")
        if self.geom.nb < 1:
            raise DomainError("N*B must be >= 1: the channel has to be sensed")
        if self.geom.data_count < 1:
            raise DomainError("(T-N)*B - 1 must be >= 1 data symbol per block")
        for name in ("busy_cap", "idle_cap"):
            cap = getattr(self, name)
            if cap is not None and not (cap >= 0 and math.isfinite(cap)):
                raise DomainError(f"{name} must be a nonnegative number, got {cap}")

    @property
    def nb(self) -> int:
        return self.geom.nb

    @property
    def tb(self) -> int:
        return self.geom.tb

    @property
    def data_count(self) -> int:
        return self.geom.data_count

    @property
    def training_noise(self) -> float:
        """Activity-averaged pilot noise variance sigma_n^2 + rho sigma_sp^2."""
        return self.noise_var + self.activity_prob * self.interference_var

    @property
    def overhead(self) -> float:
        """Data symbols per second, ((T - N) B - 1) / T."""
        return self.data_count / self.geom.block_len

    def with_budget(self, i_avg: float) -> SystemParams:
        return dataclasses.replace(self, budget=InterferenceBudget(i_avg))


_FLAT_KEYS = {
    "bandwidth": ("geom", "bandwidth"),
    "block_len": ("geom", "block_len"),
    "sensing_len": ("geom", "sensing_len"),
    "alpha": ("gm", "alpha"),
    "fading_var": ("gm", "fading_var"),
}


def validate(params: SystemParams | Mapping) -> SystemParams:
    """Check every invariant and return the canonical ``SystemParams``.

    Accepts an existing instance (rebuilt from its fields, so this is
    idempotent) or a flat mapping with keys ``bandwidth, block_len,
    sensing_len, alpha, fading_var, noise_var, interference_var,
    activity_prob, i_avg`` and optional ``busy_cap, idle_cap``.
    """
    if isinstance(params, SystemParams):
        geom = FrameGeometry(params.geom.bandwidth, params.geom.block_len,
                             params.geom.sensing_len)
        gm = GaussMarkov(params.gm.alpha, params.gm.fading_var)
        return dataclasses.replace(params, geom=geom, gm=gm,
                                   budget=InterferenceBudget(params.budget.i_avg))
    if not isinstance(params, Mapping):
        raise DomainError(f"cannot validate object of type {type(params).__name__}")
    known = set(_FLAT_KEYS) | {"noise_var", "interference_var", "activity_prob",
                               "i_avg", "busy_cap", "idle_cap"}
    unknown = set(params) - known
    if unknown:
        raise DomainError(f"unknown parameter(s): {', '.join(sorted(unknown))}")
    required = set(_FLAT_KEYS) - {"fading_var"} | {"i_avg"}
    missing = required - set(params)
    if missing:
        raise DomainError(f"missing parameter(s): {', '.join(sorted(missing))}")
    geom = FrameGeometry(float(params["bandwidth"]), float(params["block_len"]),
                         float(params["sensing_len"]))
    gm = GaussMarkov(float(params["alpha"]), float(params.get("fading_var", 1.0)))
    return SystemParams(
        geom=geom,
        gm=gm,
        noise_var=float(params.get("noise_var", 1.0)),
        interference_var=float(params.get("interference_var", 1.0)),
        activity_prob=float(params.get("activity_prob", 0.1)),
        budget=InterferenceBudget(float(params["i_avg"])),
        busy_cap=params.get("busy_cap"),
        idle_cap=params.get("idle_cap"),
    )


def reference_params(i_avg: float = 100.0, **overrides) -> SystemParams:
    """B = 100 Hz, T = 0.5 s, N = 0.1 s, alpha = 0.99 with the default link constants."""
    flat = dict(bandwidth=100.0, block_len=0.5, sensing_len=0.1, alpha=0.99,
                fading_var=1.0, noise_var=1.0, interference_var=1.0,
                activity_prob=0.1, i_avg=i_avg)
    flat.update(overrides)
    return validate(flat)
