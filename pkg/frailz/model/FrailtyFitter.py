from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Dict, Literal, Optional, Tuple

import numpy as np
from scipy.linalg import LinAlgError, solve
from scipy.optimize import minimize_scalar
from scipy.special import gammaln

from frailz.constants import (
    GRADIENT_TOL,
    MAX_NEWTON_ITER,
    MAX_OUTER_ITER,
    MAX_STEP_HALVINGS,
    NEWTON_TOL,
    THETA_BOUNDS,
    THETA_XATOL,
)
from frailz.data.SurvivalDataset import SurvivalDataset
from frailz.errors import RankDeficientError, ValidationError
from frailz.model.FrailtyFit import FrailtyFit, ThetaMode
from frailz.model.breslow import breslow_from_weights

logger = logging.getLogger("frailz.fit")

Method = Literal["newton", "em"]
MAX_EM_SWEEPS = 5000
EM_TOL = 1e-10


def _tail_sums(a: np.ndarray, first: np.ndarray) -> np.ndarray:
    """Sums over ``a[i:]`` along axis 0, taken at each index in ``first``."""
    return np.cumsum(a[::-1], axis=0)[::-1][first]


class _Problem:
    """Risk-set bookkeeping for one dataset, shared by every evaluation."""

    __slots__ = (
        "x", "time", "status", "codes", "g", "p", "n", "order", "first", "d",
        "event_mask", "x_event_sum", "cluster_events", "onehot_sorted",
    )

    def __init__(self, data: SurvivalDataset) -> None:
        self.x = np.asarray(data.design, dtype=float)
        self.time = data.time
        self.status = data.status.astype(float)
        self.codes = data.cluster_codes
        self.n, self.p = self.x.shape
        self.g = data.g
        self.order = np.argsort(self.time, kind="stable")
        self.event_mask = data.status == 1
        event_times, d = np.unique(self.time[self.event_mask], return_counts=True)
        self.first = np.searchsorted(self.time[self.order], event_times, side="left")
        self.d = d.astype(float)
        self.x_event_sum = self.x[self.event_mask].sum(axis=0)
        self.cluster_events = np.asarray(data.cluster_events, dtype=float)
        onehot = np.zeros((self.n, self.g))
        onehot[np.arange(self.n), self.codes[self.order]] = 1.0
        self.onehot_sorted = onehot


@dataclass
class _Evaluation:
    loglik: float
    partial: float
    grad: np.ndarray
    info: np.ndarray


@dataclass
class _State:
    beta: np.ndarray
    u: np.ndarray
    theta: float
    loglik: float
    partial: float
    grad: np.ndarray
    info: np.ndarray
    iterations: int
    converged: bool
    marginal: float = float("nan")


def _evaluate(
    prob: _Problem, beta: np.ndarray, u: np.ndarray, nu: float, joint: bool
) -> _Evaluation:
    """
    Penalized partial log-likelihood with Breslow ties, its gradient and information.

    With ``joint`` the parameters are (beta, u) and the gamma penalty
    -nu * sum(exp(u) - u) is included; otherwise ``u`` enters only as fixed
    per-cluster offsets and derivatives are taken in beta alone.
    """
    eta = prob.x @ beta + u[prob.codes]
    shift = float(eta.max())
    w = np.exp(eta - shift)[prob.order]
    xs = prob.x[prob.order]
    d = prob.d

    s0 = _tail_sums(w, prob.first)
    s1x = _tail_sums(w[:, None] * xs, prob.first)
    sxx = _tail_sums(w[:, None, None] * xs[:, :, None] * xs[:, None, :], prob.first)

    partial = float(eta[prob.event_mask].sum() - np.sum(d * (np.log(s0) + shift)))
    ax = s1x / s0[:, None]
    grad_b = prob.x_event_sum - (d[:, None] * ax).sum(axis=0)
    info_bb = np.einsum("k,kij->ij", d / s0, sxx) - np.einsum("k,ki,kj->ij", d, ax, ax)
    if not joint:
        return _Evaluation(partial, partial, grad_b, info_bb)

    wu = w[:, None] * prob.onehot_sorted
    s1u = _tail_sums(wu, prob.first)
    sxu = _tail_sums(xs[:, :, None] * wu[:, None, :], prob.first)
    au = s1u / s0[:, None]
    ez = np.exp(u)
    grad_u = prob.cluster_events - (d[:, None] * au).sum(axis=0) + nu * (1.0 - ez)
    info_uu = (
        np.diag((d / s0) @ s1u + nu * ez) - np.einsum("k,ki,kj->ij", d, au, au)
    )
    info_bu = np.einsum("k,kij->ij", d / s0, sxu) - np.einsum("k,ki,kj->ij", d, ax, au)
    info = np.block([[info_bb, info_bu], [info_bu.T, info_uu]])
    loglik = partial - nu * float(np.sum(ez - u))
    return _Evaluation(loglik, partial, np.concatenate([grad_b, grad_u]), info)


def _newton_step(info: np.ndarray, grad: np.ndarray) -> np.ndarray:
    try:
        return solve(info, grad, assume_a="pos", check_finite=False)
    except (LinAlgError, ValueError):
        return np.linalg.lstsq(info, grad, rcond=None)[0]


def marginal_loglik(
    prob: _Problem, beta: np.ndarray, u: np.ndarray, theta: float
) -> float:
    """
    Gamma-frailty log-likelihood with the frailties integrated out and the
    Breslow baseline plugged in; theta = 0 gives the ordinary Cox full likelihood.
    """
    eta_x = prob.x @ beta
    weights = np.exp(eta_x + u[prob.codes])
    chf = breslow_from_weights(prob.time, prob.status, weights)
    jumps = chf.increments()
    event_jump = jumps[np.searchsorted(chf.times, prob.time[prob.event_mask])]
    events_term = float(np.sum(np.log(event_jump) + eta_x[prob.event_mask]))
    at_risk = np.bincount(prob.codes, weights=np.exp(eta_x) * chf(prob.time), minlength=prob.g)
    if theta <= 0:
        return events_term - float(at_risk.sum())
    nu = 1.0 / theta
    D = prob.cluster_events
    cluster_term = (
        -nu * np.log1p(at_risk / nu)
        - D * np.log(nu + at_risk)
        + gammaln(nu + D)
        - gammaln(nu)
    )
    return events_term + float(cluster_term.sum())


class FrailtyFitter:
    """
    Shared gamma frailty Cox model fitter.

    For a fixed theta the penalized partial likelihood
    PL(beta, u) - (1/theta) * sum(exp(u_i) - u_i) is maximized, either jointly by
    Newton–Raphson (``method="newton"``) or by alternating Newton–Raphson on beta
    with log-frailty offsets and the gamma EM update
    z_i <- (D_i + 1/theta) / (sum_j exp(x_ij beta) H0(y_ij) + 1/theta)
    (``method="em"``). Both stop at the same fixed point. With
    ``ThetaMode.profile()`` theta maximizes the integrated marginal likelihood over
    log theta within ``theta_bounds``.

    Args:
        theta_mode: profile, fixed or none.
        method: "newton" or "em".
        tol: Relative change in log-likelihood that ends the inner loop.
        grad_tol: Gradient sup-norm required for convergence.
    """

    def __init__(
        self,
        theta_mode: ThetaMode | str = "profile",
        method: Method = "newton",
        max_iter: int = MAX_NEWTON_ITER,
        tol: float = NEWTON_TOL,
        grad_tol: float = GRADIENT_TOL,
        theta_bounds: Tuple[float, float] = THETA_BOUNDS,
        theta_xatol: float = THETA_XATOL,
        max_outer_iter: int = MAX_OUTER_ITER,
    ) -> None:
        if method not in ("newton", "em"):
            raise ValidationError(f"unknown fitting method {method!r}")
        lo, hi = theta_bounds
        if not 0 < lo < hi:
            raise ValidationError("theta_bounds must satisfy 0 < low < high")
        self.theta_mode = ThetaMode.parse(theta_mode)
        self.method = method
        self.max_iter = max_iter
        self.tol = tol
        self.grad_tol = grad_tol
        self.theta_bounds = (float(lo), float(hi))
        self.theta_xatol = theta_xatol
        self.max_outer_iter = max_outer_iter

    # ——— Public ———

    def fit(self, data: SurvivalDataset, init: Optional[FrailtyFit] = None) -> FrailtyFit:
        """
        Fit the model to ``data``.

        Args:
            data: Dataset with at least two observations and one event.
            init: Optional earlier fit whose beta and matching cluster frailties
                seed the iterations.

        Returns:
            FrailtyFit; ``converged`` is False when an iteration limit was hit.

        Raises:
            NoEventsError: If every observation is censored.
            RankDeficientError: If the design columns are collinear.
        """
        if data.n < 2:
            raise ValidationError("fitting needs at least two observations")
        data.require_events()
        self._check_rank(data)
        prob = _Problem(data)
        beta0, u0 = self._initial(prob, data, init)

        trace: Tuple[Tuple[float, float], ...] = ()
        mode = self.theta_mode
        if mode.kind == "none":
            state = self._fit_fixed(prob, 0.0, beta0, np.zeros(prob.g))
            outer_ok = True
        elif mode.kind == "fixed":
            state = self._fit_fixed(prob, float(mode.value), beta0, u0)
            outer_ok = True
        else:
            state, trace, outer_ok = self._profile(prob, beta0, u0)

        converged = bool(state.converged and outer_ok)
        if not converged:
            logger.warning(
                "Fit did not converge (theta=%.4g, iterations=%d, |grad|=%.2e)",
                state.theta, state.iterations, float(np.max(np.abs(state.grad), initial=0.0)),
            )
        return self._assemble(data, prob, state, converged, trace)

    # ——— Inner solvers ———

    def _newton(
        self, prob: _Problem, beta: np.ndarray, u: np.ndarray, nu: float, joint: bool
    ) -> Tuple[np.ndarray, np.ndarray, _Evaluation, int, bool]:
        p = prob.p
        params = np.concatenate([beta, u]) if joint else beta.copy()

        def split(vec: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
            return (vec[:p], vec[p:]) if joint else (vec, u)

        ev = _evaluate(prob, *split(params), nu, joint)
        if params.size == 0:
            return beta, u, ev, 0, True
        for iteration in range(1, self.max_iter + 1):
            step = _newton_step(ev.info, ev.grad)
            scale = 1.0
            for _ in range(MAX_STEP_HALVINGS):
                candidate = params + scale * step
                cand_ev = _evaluate(prob, *split(candidate), nu, joint)
                if math.isfinite(cand_ev.loglik) and cand_ev.loglik >= ev.loglik - 1e-12 * (
                    1.0 + abs(ev.loglik)
                ):
                    break
                scale *= 0.5
            else:
                ok = float(np.max(np.abs(ev.grad))) < self.grad_tol
                return (*split(params), ev, iteration, ok)
            change = abs(cand_ev.loglik - ev.loglik)
            params, ev = candidate, cand_ev
            if change <= self.tol * max(abs(ev.loglik), 1e-12) and float(
                np.max(np.abs(ev.grad))
            ) < self.grad_tol:
                return (*split(params), ev, iteration, True)
        return (*split(params), ev, self.max_iter, False)

    def _fit_fixed(
        self, prob: _Problem, theta: float, beta: np.ndarray, u: np.ndarray
    ) -> _State:
        if theta <= 0:
            beta, _, ev, iterations, ok = self._newton(prob, beta, np.zeros(prob.g), 0.0, False)
            u = np.zeros(prob.g)
        elif self.method == "newton":
            beta, u, ev, iterations, ok = self._newton(prob, beta, u, 1.0 / theta, True)
        else:
            beta, u, ev, iterations, ok = self._em(prob, theta, beta, u)
        state = _State(
            beta=beta, u=u, theta=theta, loglik=ev.loglik, partial=ev.partial,
            grad=ev.grad, info=ev.info, iterations=iterations, converged=ok,
        )
        state.marginal = marginal_loglik(prob, beta, u, theta)
        return state

    def _em(
        self, prob: _Problem, theta: float, beta: np.ndarray, u: np.ndarray
    ) -> Tuple[np.ndarray, np.ndarray, _Evaluation, int, bool]:
        nu = 1.0 / theta
        D = prob.cluster_events
        sweeps = 0
        for sweeps in range(1, MAX_EM_SWEEPS + 1):
            beta, _, _, _, _ = self._newton(prob, beta, u, nu, False)
            eta_x = prob.x @ beta
            chf = breslow_from_weights(prob.time, prob.status, np.exp(eta_x + u[prob.codes]))
            at_risk = np.bincount(
                prob.codes, weights=np.exp(eta_x) * chf(prob.time), minlength=prob.g
            )
            u_new = np.log((D + nu) / (at_risk + nu))
            delta = float(np.max(np.abs(u_new - u)))
            u = u_new
            if delta < EM_TOL:
                break
        ev = _evaluate(prob, beta, u, nu, True)
        ok = float(np.max(np.abs(ev.grad))) < self.grad_tol
        return beta, u, ev, sweeps, ok

    # ——— Outer search ———

    def _profile(
        self, prob: _Problem, beta0: np.ndarray, u0: np.ndarray
    ) -> Tuple[_State, Tuple[Tuple[float, float], ...], bool]:
        lo, hi = (math.log(b) for b in self.theta_bounds)
        states: Dict[float, _State] = {}
        warm = {"beta": beta0, "u": u0}

        def objective(log_theta: float) -> float:
            log_theta = float(log_theta)
            if log_theta not in states:
                state = self._fit_fixed(prob, math.exp(log_theta), warm["beta"], warm["u"])
                states[log_theta] = state
                warm["beta"], warm["u"] = state.beta, state.u
                logger.debug(
                    "theta=%.6g marginal=%.6f inner=%d%s",
                    state.theta, state.marginal, state.iterations,
                    "" if state.converged else " (not converged)",
                )
            value = states[log_theta].marginal
            return -value if math.isfinite(value) else math.inf

        result = minimize_scalar(
            objective,
            bounds=(lo, hi),
            method="bounded",
            options={"xatol": self.theta_xatol, "maxiter": self.max_outer_iter},
        )
        for edge in (lo, hi):
            objective(edge)
        objective(float(result.x))
        best = min(states, key=lambda k: (-states[k].marginal, k))
        trace = tuple(
            (states[k].theta, states[k].marginal) for k in sorted(states)
        )
        if not result.success:
            logger.warning("theta profile search stopped early: %s", result.message)
        return states[best], trace, bool(result.success)

    # ——— Helpers ———

    def _check_rank(self, data: SurvivalDataset) -> None:
        x = data.design
        if x.shape[1] == 0:
            return
        centered = x - x.mean(axis=0)
        rank = np.linalg.matrix_rank(centered)
        if rank < x.shape[1]:
            constant = [c for c, col in zip(data.columns, centered.T) if not np.any(col)]
            detail = f" (constant columns: {constant})" if constant else ""
            raise RankDeficientError(
                f"design matrix has rank {rank} < {x.shape[1]} columns{detail}"
            )

    def _initial(
        self, prob: _Problem, data: SurvivalDataset, init: Optional[FrailtyFit]
    ) -> Tuple[np.ndarray, np.ndarray]:
        beta = np.zeros(prob.p)
        u = np.zeros(prob.g)
        if init is None:
            return beta, u
        if tuple(init.columns) == tuple(data.columns) and np.all(np.isfinite(init.beta)):
            beta = np.array(init.beta, dtype=float)
        for i, cluster in enumerate(data.clusters):
            if init.has_cluster(cluster):
                u[i] = math.log(init.frailty_of(cluster))
        return beta, u

    def _assemble(
        self,
        data: SurvivalDataset,
        prob: _Problem,
        state: _State,
        converged: bool,
        trace: Tuple[Tuple[float, float], ...],
    ) -> FrailtyFit:
        frailty_on = state.theta > 0
        u = state.u if frailty_on else np.zeros(prob.g)
        chf = breslow_from_weights(
            prob.time, prob.status, np.exp(prob.x @ state.beta + u[prob.codes])
        )
        info = state.info
        if frailty_on and info.shape[0] == prob.p:
            info = _evaluate(prob, state.beta, u, 1.0 / state.theta, True).info
        try:
            cov = np.linalg.inv(info)
            se = np.sqrt(np.clip(np.diag(cov)[: prob.p], 0.0, None))
        except np.linalg.LinAlgError:
            se = np.full(prob.p, np.nan)
        return FrailtyFit(
            beta=state.beta,
            columns=data.columns,
            clusters=data.clusters,
            frailties=np.exp(u) if frailty_on else np.ones(prob.g),
            theta=float(state.theta),
            baseline_chf=chf,
            loglik=float(state.loglik),
            iterations=int(state.iterations),
            converged=converged,
            std_errors=se,
            marginal_loglik=float(state.marginal),
            theta_mode=self.theta_mode,
            method=self.method,
            n=data.n,
            n_events=data.n_events,
            data_fingerprint=data.fingerprint(),
            profile_trace=trace,
        )


def fit(
    data: SurvivalDataset,
    theta_mode: ThetaMode | str = "profile",
    init: Optional[FrailtyFit] = None,
    **options,
) -> FrailtyFit:
    """Fit a shared gamma frailty Cox model; ``options`` go to FrailtyFitter."""
    return FrailtyFitter(theta_mode, **options).fit(data, init=init)
