from __future__ import annotations

import logging
from dataclasses import dataclass
from functools import lru_cache
from typing import Any, Dict, NamedTuple, Optional, Sequence

import numpy as np
from scipy.optimize import bisect

from frailz.constants import PILOT_DRAWS
from frailz.data.CovariateSchema import CovariateSchema, CovariateSpec
from frailz.data.SurvivalDataset import SurvivalDataset
from frailz.errors import CalibrationError, ValidationError
from frailz.simulate.ScenarioConfig import ScenarioConfig

logger = logging.getLogger("frailz.simulate")

SIM_SCHEMA = CovariateSchema(
    (CovariateSpec.numeric("x1"), CovariateSpec.numeric("x2"), CovariateSpec.numeric("x3"))
)

# Stream tag separating the calibration pilot from replicate draws.
_PILOT_STREAM = 2**31 - 1
_TINY = np.finfo(float).tiny


@dataclass(frozen=True, eq=False)
class SimulatedDataset:
    """
    A generated dataset together with the quantities that produced it.

    ``true_sp`` is the generating model's survival probability at each observed
    time, given the observation's true frailty. ``outlier_truth`` marks the rows
    whose event times were jittered; ``clean`` is the same draw before jittering.
    """

    data: SurvivalDataset
    true_params: Dict[str, Any]
    true_sp: np.ndarray
    outlier_truth: np.ndarray
    clean: Optional["SimulatedDataset"] = None


class _Draw(NamedTuple):
    x1: np.ndarray
    x2: np.ndarray
    x3: np.ndarray
    eta: np.ndarray
    hazard_scale: np.ndarray
    uniforms: np.ndarray
    failure: np.ndarray


def _frailties(config: ScenarioConfig, rng: np.random.Generator, size: int) -> np.ndarray:
    theta = config.frailty_var
    if theta == 0:
        return np.ones(size)
    return rng.gamma(shape=1.0 / theta, scale=theta, size=size)


def _draw(config: ScenarioConfig, rng: np.random.Generator, z: np.ndarray) -> _Draw:
    """Covariates and Weibull failure times for one frailty value per observation."""
    n = z.shape[0]
    b1, b3 = config.beta
    x1 = rng.uniform(0.0, 1.0, n)
    x2 = rng.standard_normal(n)
    x3 = (rng.uniform(0.0, 1.0, n) < 0.25).astype(float)
    if config.scenario == "nonlinear":
        x2 = np.maximum(np.abs(x2), _TINY)
        eta = b1 * x1 + config.beta2 * np.log(x2) + b3 * x3
    else:
        eta = b1 * x1 + config.beta2 * x2 + b3 * x3
    hazard_scale = config.lam * z * np.exp(eta)
    v = rng.uniform(_TINY, 1.0, n)
    failure = (-np.log(v) / hazard_scale) ** (1.0 / config.alpha)
    return _Draw(x1, x2, x3, eta, hazard_scale, v, failure)


def _true_survival(config: ScenarioConfig, hazard_scale: np.ndarray, y: np.ndarray) -> np.ndarray:
    return np.exp(-hazard_scale * y**config.alpha)


def calibrate_censoring(
    config: ScenarioConfig, pilot_times: Optional[Sequence[float]] = None
) -> float:
    """
    Exponential censoring rate whose expected censoring fraction matches the target.

    The expected fraction mean(1 - exp(-rate * t)) is taken over pilot failure
    times (by default PILOT_DRAWS draws from the generating model) and solved by
    bisection.

    Raises:
        CalibrationError: If no bracket for the target can be found.
    """
    if config.censoring_rate is not None:
        return float(config.censoring_rate)
    if pilot_times is None:
        t = _pilot_times(config)
    else:
        t = np.asarray(pilot_times, dtype=float).reshape(-1)
        if t.size == 0 or np.any(~np.isfinite(t)) or np.any(t <= 0):
            raise CalibrationError("pilot times must be finite and > 0")
    target = config.target_censoring

    def excess(rate: float) -> float:
        return float(np.mean(-np.expm1(-rate * t))) - target

    lo, hi = 1e-12, 1.0
    while excess(hi) < 0:
        hi *= 10.0
        if hi > 1e12:
            raise CalibrationError(f"cannot reach censoring fraction {target}")
    if excess(lo) > 0:
        raise CalibrationError(f"censoring fraction {target} is below the reachable range")
    try:
        rate = bisect(excess, lo, hi, xtol=1e-14, rtol=1e-12, maxiter=500)
    except (RuntimeError, ValueError) as e:
        raise CalibrationError(f"censoring calibration failed: {e}") from e
    logger.debug("Calibrated censoring rate %.6g for target %.3f", rate, target)
    return float(rate)


def _pilot_times(config: ScenarioConfig) -> np.ndarray:
    return _cached_pilot(config.with_(g=1, m=1, replicates=1, censoring_rate=None))


@lru_cache(maxsize=32)
def _cached_pilot(config: ScenarioConfig) -> np.ndarray:
    rng = np.random.default_rng([config.seed, _PILOT_STREAM])
    z = _frailties(config, rng, PILOT_DRAWS)
    t = _draw(config, rng, z).failure
    t.setflags(write=False)
    return t


def _simulate(
    config: ScenarioConfig, rng: np.random.Generator, rate: float
) -> tuple[SimulatedDataset, _Draw, np.ndarray]:
    g, m = config.g, config.m
    codes = np.repeat(np.arange(g), m)
    z = _frailties(config, rng, g)
    draw = _draw(config, rng, z[codes])
    censor = np.maximum(rng.exponential(1.0 / rate, codes.size), _TINY)
    y = np.minimum(draw.failure, censor)
    status = (draw.failure < censor).astype(np.int8)
    data = SurvivalDataset(
        time=y,
        status=status,
        cluster=np.array([str(c + 1) for c in codes], dtype=object),
        covariates={"x1": draw.x1, "x2": draw.x2, "x3": draw.x3},
        schema=SIM_SCHEMA,
    )
    params = {
        "scenario": config.scenario,
        "alpha": config.alpha,
        "lambda": config.lam,
        "beta": [config.beta[0], config.beta2, config.beta[1]],
        "theta": config.frailty_var,
        "censoring_rate": rate,
        "frailties": z,
        "linear_predictor": draw.eta,
        "uniforms": draw.uniforms,
        "failure_times": draw.failure,
        "censoring_times": censor,
    }
    sim = SimulatedDataset(
        data=data,
        true_params=params,
        true_sp=_true_survival(config, draw.hazard_scale, y),
        outlier_truth=np.zeros(codes.size, dtype=bool),
    )
    return sim, draw, censor


def _replicate_rng(config: ScenarioConfig, replicate: int) -> np.random.Generator:
    if replicate < 0:
        raise ValidationError("replicate index must be >= 0")
    return np.random.default_rng([config.seed, replicate])


def gen_nonlinear(config: ScenarioConfig, replicate: int = 0) -> SimulatedDataset:
    """
    Clustered Weibull data whose hazard is log-linear in log(x2).

    The same (config, replicate) pair always yields the same dataset.
    """
    if config.contamination.active:
        raise ValidationError("the non-linear scenario takes no contamination")
    rate = calibrate_censoring(config)
    sim, _, _ = _simulate(config, _replicate_rng(config, replicate), rate)
    return sim


def gen_outlier_scenario(config: ScenarioConfig, replicate: int = 0) -> SimulatedDataset:
    """
    Clustered Weibull data with a share of event times pushed later.

    Each chosen event time grows by max(jitter_floor, E) with E ~ Exp(1); a
    shifted time that passes its censoring time becomes censored. The returned
    dataset's ``clean`` field holds the draw before jittering.

    Raises:
        ValidationError: If the contamination asks for more events than exist.
    """
    if not config.contamination.active:
        raise ValidationError("the outlier scenario needs a contamination setting")
    rng = _replicate_rng(config, replicate)
    rate = calibrate_censoring(config)
    clean, draw, censor = _simulate(config, rng, rate)

    events = np.flatnonzero(clean.data.status == 1)
    n_targets = config.contamination.n_targets(events.size)
    if n_targets > events.size:
        raise ValidationError(
            f"contamination asks for {n_targets} outliers but only {events.size} events exist"
        )
    targets = np.sort(rng.choice(events, size=n_targets, replace=False))
    jitter = np.maximum(config.jitter_floor, rng.exponential(1.0, n_targets))

    shifted = draw.failure.copy()
    shifted[targets] += jitter
    y = np.minimum(shifted, censor)
    status = (shifted < censor).astype(np.int8)
    truth = np.zeros(y.size, dtype=bool)
    truth[targets] = True
    logger.debug(
        "Replicate %d: jittered %d event times, %d became censored",
        replicate, n_targets, int(np.sum(status[targets] == 0)),
    )

    base = clean.data
    data = SurvivalDataset(
        time=y,
        status=status,
        cluster=base.cluster,
        covariates=dict(base.covariates),
        schema=base.schema,
        row_ids=base.row_ids,
    )
    return SimulatedDataset(
        data=data,
        true_params={
            **clean.true_params,
            "contamination": str(config.contamination),
            "failure_times": shifted,
        },
        true_sp=_true_survival(config, draw.hazard_scale, y),
        outlier_truth=truth,
        clean=clean,
    )


def generate(config: ScenarioConfig, replicate: int = 0) -> SimulatedDataset:
    if config.scenario == "outlier":
        return gen_outlier_scenario(config, replicate)
    return gen_nonlinear(config, replicate)
