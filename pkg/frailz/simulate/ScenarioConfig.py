from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass, field
from typing import Literal, Optional, Tuple, Union

from frailz.constants import CONTAMINATION_PATTERN, DESK_CLUSTER_SIZES, DESK_REPLICATES
from frailz.errors import ConfigError
from frailz.model.FrailtyFit import ThetaMode
from frailz.residuals.ResidualSet import Regime
from frailz.utils.Defaults import load_config

Scenario = Literal["nonlinear", "outlier"]

DEFAULT_MODELS = {
    "nonlinear": ("true_form", "wrong_form"),
    "outlier": ("clean", "contaminated"),
}


@dataclass(frozen=True)
class Contamination:
    """Which event times get jittered: none, a fixed count, or a fraction of events."""

    kind: Literal["none", "count", "fraction"] = "none"
    value: float = 0.0

    def __post_init__(self) -> None:
        if self.kind == "none":
            object.__setattr__(self, "value", 0.0)
        elif self.kind == "count":
            if self.value < 1 or int(self.value) != self.value:
                raise ConfigError("contamination count must be a positive integer")
        elif self.kind == "fraction":
            if not 0 < self.value <= 1:
                raise ConfigError("contamination fraction must lie in (0, 1]")
        else:
            raise ConfigError(f"unknown contamination kind {self.kind!r}")

    @classmethod
    def parse(cls, text: Union[str, "Contamination"]) -> "Contamination":
        if isinstance(text, Contamination):
            return text
        s = str(text).strip().lower()
        if not CONTAMINATION_PATTERN.fullmatch(s):
            raise ConfigError(
                f"invalid contamination {text!r}; expected 'none', 'count:N' or 'fraction:F'"
            )
        if s == "none":
            return cls()
        kind, value = s.split(":", 1)
        return cls(kind, float(value))  # type: ignore[arg-type]

    @property
    def active(self) -> bool:
        return self.kind != "none"

    def n_targets(self, n_events: int) -> int:
        if self.kind == "count":
            return int(self.value)
        if self.kind == "fraction":
            return int(math.floor(self.value * n_events + 0.5))
        return 0

    def __str__(self) -> str:
        if self.kind == "count":
            return f"count:{int(self.value)}"
        return f"fraction:{self.value:g}" if self.kind == "fraction" else "none"


@dataclass(frozen=True)
class ScenarioConfig:
    """
    One simulation design point.

    ``beta`` holds the coefficients of x1 and x3; ``beta2`` multiplies log(x2) in
    the non-linear scenario and x2 in the outlier scenario. ``censoring_rate``
    overrides calibration when set.
    """

    scenario: Scenario = "nonlinear"
    g: int = 10
    m: int = 50
    alpha: float = 3.0
    lam: float = 0.007
    beta: Tuple[float, float] = (1.0, 0.5)
    beta2: float = -2.0
    frailty_var: float = 0.5
    target_censoring: float = 0.5
    contamination: Contamination = field(default_factory=Contamination)
    jitter_floor: float = 4.0
    replicates: int = DESK_REPLICATES
    seed: int = 1
    censoring_rate: Optional[float] = None

    def __post_init__(self) -> None:
        if self.scenario not in ("nonlinear", "outlier"):
            raise ConfigError(f"unknown scenario {self.scenario!r}")
        for name in ("g", "m", "replicates"):
            if int(getattr(self, name)) < 1:
                raise ConfigError(f"{name} must be >= 1")
            object.__setattr__(self, name, int(getattr(self, name)))
        if not (self.alpha > 0 and self.lam > 0):
            raise ConfigError("alpha and lambda must be > 0")
        if not 0 < self.target_censoring < 1:
            raise ConfigError("target_censoring must lie in (0, 1)")
        if self.frailty_var < 0:
            raise ConfigError("frailty_var must be >= 0")
        if self.jitter_floor <= 0:
            raise ConfigError("jitter_floor must be > 0")
        if self.seed < 0:
            raise ConfigError("seed must be >= 0")
        if self.censoring_rate is not None and not self.censoring_rate > 0:
            raise ConfigError("censoring_rate must be > 0")
        beta = tuple(float(b) for b in self.beta)
        if len(beta) != 2:
            raise ConfigError("beta must hold the two coefficients of x1 and x3")
        object.__setattr__(self, "beta", beta)
        object.__setattr__(self, "contamination", Contamination.parse(self.contamination))
        if self.scenario == "outlier" and not self.contamination.active:
            raise ConfigError("the outlier scenario needs a contamination setting")

    @property
    def n(self) -> int:
        return self.g * self.m

    def with_(self, **changes) -> "ScenarioConfig":
        return dataclasses.replace(self, **changes)

    def to_dict(self) -> dict:
        out = dataclasses.asdict(self)
        out["lambda"] = out.pop("lam")
        out["beta"] = list(self.beta)
        out["contamination"] = str(self.contamination)
        return out


@dataclass(frozen=True)
class SimulationPlan:
    """A config file's worth of work: one design per cluster size, shared regimes and models."""

    base: ScenarioConfig
    cluster_sizes: Tuple[int, ...] = DESK_CLUSTER_SIZES
    regimes: Tuple[Regime, ...] = (Regime("nocv"), Regime("kfold", 10), Regime("loocv"))
    models: Tuple[str, ...] = ()
    theta_mode: ThetaMode = field(default_factory=ThetaMode.profile)
    method: str = "newton"

    def __post_init__(self) -> None:
        if not self.cluster_sizes or any(int(m) < 1 for m in self.cluster_sizes):
            raise ConfigError("cluster_sizes must be a non-empty list of positive integers")
        if not self.regimes:
            raise ConfigError("at least one regime is required")
        models = tuple(self.models) or DEFAULT_MODELS[self.base.scenario]
        unknown = set(models) - set(DEFAULT_MODELS[self.base.scenario])
        if unknown:
            raise ConfigError(
                f"models {sorted(unknown)} do not apply to the {self.base.scenario} scenario"
            )
        object.__setattr__(self, "models", models)
        object.__setattr__(self, "cluster_sizes", tuple(int(m) for m in self.cluster_sizes))

    def configs(self) -> Tuple[ScenarioConfig, ...]:
        return tuple(self.base.with_(m=m) for m in self.cluster_sizes)

    def to_dict(self) -> dict:
        return {
            **self.base.to_dict(),
            "cluster_sizes": list(self.cluster_sizes),
            "regimes": [str(r) for r in self.regimes],
            "models": list(self.models),
            "theta": str(self.theta_mode),
            "method": self.method,
        }


_SCENARIO_KEYS = {
    "scenario", "g", "m", "alpha", "lambda", "beta", "beta2", "frailty_var",
    "target_censoring", "contamination", "jitter_floor", "replicates", "seed",
    "censoring_rate",
}
_PLAN_KEYS = {"cluster_sizes", "regimes", "models", "theta", "method"}
# Run settings a shared config file may carry for other commands.
AMBIENT_KEYS = {"threads", "threshold"}


def simulation_plan_from_dict(raw: dict) -> SimulationPlan:
    unknown = set(raw) - _SCENARIO_KEYS - _PLAN_KEYS
    if unknown:
        raise ConfigError(f"unknown configuration keys: {sorted(unknown)}")
    scenario_args = {k: v for k, v in raw.items() if k in _SCENARIO_KEYS}
    if "lambda" in scenario_args:
        scenario_args["lam"] = scenario_args.pop("lambda")
    if "beta" in scenario_args:
        scenario_args["beta"] = tuple(scenario_args["beta"])
    try:
        base = ScenarioConfig(**scenario_args)
        sizes = raw.get("cluster_sizes", [base.m] if "m" in raw else list(DESK_CLUSTER_SIZES))
        regimes = tuple(Regime.parse(r) for r in raw.get("regimes", ["nocv", "kfold:10", "loocv"]))
        theta = ThetaMode.parse(raw.get("theta", "profile"))
    except (TypeError, ValueError) as e:
        raise ConfigError(str(e)) from e
    return SimulationPlan(
        base=base,
        cluster_sizes=tuple(sizes),
        regimes=regimes,
        models=tuple(raw.get("models", ())),
        theta_mode=theta,
        method=str(raw.get("method", "newton")),
    )


def load_simulation_config(path: str) -> SimulationPlan:
    """Read a TOML simulation config."""
    raw = load_config(path)
    return simulation_plan_from_dict({k: v for k, v in raw.items() if k not in AMBIENT_KEYS})
