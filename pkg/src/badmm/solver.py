"""The alternating-direction iteration engine.

One transition updates y, then x, then the multiplier p:

    y_new = argmin_y  L(x, y, p) (+ generator distance to y, strategy-dependent)
    x_new = argmin_x  L(x, y_new, p) + dist_phi(x, x_k)
    p_new = p + alpha * (A x_new - B y_new)

The x-side generator is a scaled squared norm, so the x-step is an SPD solve
against ``2 D^T D + alpha A^T A + mu I`` whose factorization is computed once
per solve and reused. Three y-step strategies are provided: the two
closed-form shrinkage updates for B = identity (soft shrinkage at weight/alpha
for the l1 penalty, half shrinkage at 2*weight/alpha for the l1/2 penalty, the
updates the experiment reproduces verbatim) and a prox-linearized step that
handles a general B through the linearizing generator.

The update order y -> x -> p is fixed: the descent diagnostics rely on the
x-step seeing the fresh y.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

from .bregman import BregmanGenerator
from .errors import (
    ConvexityViolation,
    DimensionMismatch,
    InvalidParameter,
    NotSpd,
    StrategyMismatch,
    SubproblemFailure,
)
from .lagrangian import (
    AnalysisConstants,
    StationarityResidual,
    alpha_lower_bound,
    analysis_constants,
)
from .numerics import SpdFactorization, spd_factor
from .problems import (
    CompositeProblem,
    GroundTruth,
    RegKind,
    regularizer_prox,
    regularizer_subdiff_dist,
    regularizer_value,
)


class Strategy(enum.Enum):
    CLOSED_FORM_SOFT = "closed_form_soft"
    CLOSED_FORM_HALF = "closed_form_half"
    PROX_LINEAR_Y = "prox_linear_y"


_CLOSED_FORM = (Strategy.CLOSED_FORM_SOFT, Strategy.CLOSED_FORM_HALF)


@dataclass
class SolverState:
    """Iterate triple (x, y, p) plus the lagged x and the iteration counter."""

    x: np.ndarray
    y: np.ndarray
    p: np.ndarray
    x_prev: np.ndarray
    k: int = 0


@dataclass(frozen=True)
class SolverConfig:
    """Parameters of one solve.

    ``phi`` must be a squared-norm (or zero) generator: the x-step exploits
    its quadratic form. ``psi`` is optional metadata for the y side; the
    closed-form strategies apply the displayed shrinkage updates, which carry
    no y-side distance term. ``prox_mu`` is the prox-linear y-step weight and
    must strictly exceed alpha*||B||^2 when that strategy is selected.
    """

    alpha: float
    phi: BregmanGenerator
    strategy: Strategy
    psi: Optional[BregmanGenerator] = None
    max_iters: int = 5000
    tol: float = 1e-8
    record_diagnostics: bool = True
    prox_mu: Optional[float] = None

    def __post_init__(self) -> None:
        if not (math.isfinite(self.alpha) and self.alpha > 0.0):
            raise InvalidParameter(f"alpha must be > 0, got {self.alpha}")
        if self.max_iters < 1:
            raise InvalidParameter(f"max_iters must be >= 1, got {self.max_iters}")
        if not (math.isfinite(self.tol) and self.tol >= 0.0):
            raise InvalidParameter(f"tol must be >= 0, got {self.tol}")


@dataclass(frozen=True)
class IterationRecord:
    """One row of the diagnostic trace, produced after each transition.

    Margins and the stationarity residual are None when diagnostics are off;
    mse_x/mse_y are None when no ground truth was supplied.
    """

    k: int
    L_alpha: float
    L_hat: float
    primal_residual: float
    dx: float
    dy: float
    dp: float
    mse_x: Optional[float] = None
    mse_y: Optional[float] = None
    m10: Optional[float] = None
    m11: Optional[float] = None
    m_aux: Optional[float] = None
    stationarity: Optional[StationarityResidual] = None

    @property
    def dz(self) -> float:
        return math.sqrt(self.dx**2 + self.dy**2 + self.dp**2)


@dataclass(frozen=True)
class SolveResult:
    """Final state plus the per-iteration trace and run-level constants."""

    state: SolverState
    trace: list[IterationRecord] = field(default_factory=list)
    reason: str = "max_iters"
    constants: Optional[AnalysisConstants] = None
    alpha_bound: float = math.nan
    alpha_bound_ok: bool = False


def initial_state(problem: CompositeProblem) -> SolverState:
    """All-zeros start: x = 0, y = 0 (= A x), p = 0, lagged x = x."""
    x = np.zeros(problem.n1)
    return SolverState(x=x, y=np.zeros(problem.n2), p=np.zeros(problem.coupling_dim), x_prev=x)


def _check_state(problem: CompositeProblem, state: SolverState) -> None:
    if (
        state.x.shape[0] != problem.n1
        or state.x_prev.shape[0] != problem.n1
        or state.y.shape[0] != problem.n2
        or state.p.shape[0] != problem.coupling_dim
    ):
        raise DimensionMismatch("solver state dimensions do not match the problem")


def _phi_scale(phi: BregmanGenerator) -> float:
    if phi.kind not in ("squared_norm", "zero"):
        raise StrategyMismatch(
            f"the closed-form x-step needs a squared-norm (or zero) generator, got {phi.kind!r}"
        )
    return phi.strong_convexity


def x_update_matrix(problem: CompositeProblem, config: SolverConfig) -> np.ndarray:
    """Iteration-independent x-step matrix 2 D^T D + alpha A^T A + mu I."""
    mu = _phi_scale(config.phi)
    D, A = problem.loss.D, problem.A
    return 2.0 * (D.T @ D) + config.alpha * (A.T @ A) + mu * np.eye(problem.n1)


def closed_form_y_step(state: SolverState, problem: CompositeProblem, config: SolverConfig) -> np.ndarray:
    """Shrink A x + p/alpha; valid only for B = identity."""
    if config.strategy not in _CLOSED_FORM:
        raise StrategyMismatch(f"closed-form y-step invoked under strategy {config.strategy}")
    if not problem.b_is_identity:
        raise StrategyMismatch("closed-form y-step requires B to be the identity")
    expected = RegKind.L1 if config.strategy is Strategy.CLOSED_FORM_SOFT else RegKind.LHALF
    if problem.reg.kind is not expected:
        raise StrategyMismatch(
            f"strategy {config.strategy} does not match penalty kind {problem.reg.kind}"
        )
    v = problem.A @ state.x + state.p / config.alpha
    return regularizer_prox(problem.reg, v, config.alpha)


def proxlinear_y_step(
    state: SolverState, problem: CompositeProblem, config: SolverConfig, mu: float
) -> np.ndarray:
    """Prox step on the linearized y-subproblem; handles a general B.

    Moves y against the gradient of the coupling term and then applies the
    penalty prox at weight ``mu``; requires mu > alpha*||B||^2 strictly.
    """
    if mu is None or not (math.isfinite(mu) and mu > 0.0):
        raise InvalidParameter(f"prox-linear weight must be a positive number, got {mu}")
    alpha = config.alpha
    if not mu > alpha * problem.norm_B**2:
        raise ConvexityViolation(
            f"need mu > alpha*||B||^2 = {alpha * problem.norm_B ** 2:.6g}, got mu = {mu}"
        )
    A, B = problem.A, problem.B
    c = A @ state.x + state.p / alpha
    v = state.y - (alpha / mu) * (B.T @ (B @ state.y - c))
    return regularizer_prox(problem.reg, v, mu)


def closed_form_x_step(
    state: SolverState,
    problem: CompositeProblem,
    config: SolverConfig,
    cached: SpdFactorization,
    dtb2: Optional[np.ndarray] = None,
) -> np.ndarray:
    """Solve the quadratic x-subproblem; ``state.y`` must be the fresh y.

    Returns the unique minimizer of
    f(x) + <p, Ax> + (alpha/2)*||Ax - By|| ^2 + (mu/2)*||x - x_k||^2
    via the cached factorization of the iteration-independent matrix.
    """
    mu = _phi_scale(config.phi)
    loss, A, B = problem.loss, problem.A, problem.B
    if dtb2 is None:
        dtb2 = 2.0 * (loss.D.T @ loss.b)
    w = mu * state.x + A.T @ (config.alpha * (B @ state.y) - state.p) + dtb2
    return cached.solve(w)


def _transition(state, problem, config, factor, dtb2):
    """One y -> x -> p update; returns (new_state, Ax_new, By_new)."""
    if config.strategy is Strategy.PROX_LINEAR_Y:
        try:
            y_new = proxlinear_y_step(state, problem, config, config.prox_mu)
        except (ConvexityViolation, InvalidParameter) as exc:
            raise SubproblemFailure(f"prox-linear y-step cannot produce a minimizer: {exc}") from exc
    else:
        y_new = closed_form_y_step(state, problem, config)
    mid = replace(state, y=y_new)
    try:
        x_new = closed_form_x_step(mid, problem, config, factor, dtb2)
    except NotSpd as exc:
        raise SubproblemFailure(f"x-subproblem factorization failed: {exc}") from exc
    Ax_new = problem.A @ x_new
    By_new = problem.B @ y_new
    p_new = state.p + config.alpha * (Ax_new - By_new)
    new = SolverState(x=x_new, y=y_new, p=p_new, x_prev=state.x, k=state.k + 1)
    return new, Ax_new, By_new


def badmm_iterate(
    state: SolverState,
    problem: CompositeProblem,
    config: SolverConfig,
    factor: Optional[SpdFactorization] = None,
) -> SolverState:
    """Apply exactly one transition to ``state``.

    Builds the x-step factorization on the fly when none is supplied; pass a
    cached one (from :func:`x_update_matrix` + ``spd_factor``) in loops.
    """
    _check_state(problem, state)
    if factor is None:
        factor = spd_factor(x_update_matrix(problem, config))
    new, _, _ = _transition(state, problem, config, factor, None)
    return new


def solve(
    problem: CompositeProblem,
    config: SolverConfig,
    init: Optional[SolverState] = None,
    ground_truth: Optional[GroundTruth] = None,
) -> SolveResult:
    """Iterate until the combined step norm is small or max_iters is hit.

    Stops when ||z_new - z|| <= tol * (1 + ||z||) with z the concatenated
    (x, y, p). The trace holds one record per transition; error metrics
    against the ground truth (scaled norms ||x* - x|| / n1, ||y* - y|| / n2)
    are filled only when a ground truth is supplied and never influence the
    iteration itself.
    """
    state = init if init is not None else initial_state(problem)
    _check_state(problem, state)
    if ground_truth is not None:
        if (
            ground_truth.x_star.shape[0] != problem.n1
            or ground_truth.y_star.shape[0] != problem.n2
        ):
            raise DimensionMismatch("ground truth dimensions do not match the problem")

    consts = analysis_constants(problem, config.alpha, config.phi, config.psi)
    bound, bound_ok = alpha_lower_bound(consts)
    try:
        factor = spd_factor(x_update_matrix(problem, config))
    except NotSpd as exc:
        raise SubproblemFailure(f"x-subproblem matrix is not SPD: {exc}") from exc
    loss = problem.loss
    dtb2 = 2.0 * (loss.D.T @ loss.b)
    alpha = config.alpha
    diagnostics = config.record_diagnostics

    # Quantities carried across iterations so each transition costs a fixed
    # small number of matrix-vector products.
    f_prev = loss.value(state.x)
    Ax_prev = problem.A @ state.x
    gap_prev = Ax_prev - problem.B @ state.y
    l_prev = (
        f_prev
        + regularizer_value(problem.reg, state.y)
        + float(np.dot(state.p, gap_prev))
        + 0.5 * alpha * float(np.dot(gap_prev, gap_prev))
    )
    dxp = state.x - state.x_prev
    l_hat_prev = l_prev + 0.5 * consts.sigma0 * float(np.dot(dxp, dxp))

    trace: list[IterationRecord] = []
    reason = "max_iters"
    for _ in range(config.max_iters):
        z_norm = math.sqrt(
            float(np.dot(state.x, state.x))
            + float(np.dot(state.y, state.y))
            + float(np.dot(state.p, state.p))
        )
        new, Ax_new, By_new = _transition(state, problem, config, factor, dtb2)

        dx = float(np.linalg.norm(new.x - state.x))
        dy = float(np.linalg.norm(new.y - state.y))
        dp = float(np.linalg.norm(new.p - state.p))
        gap_new = Ax_new - By_new
        primal = float(np.linalg.norm(gap_new))

        resid_new = loss.D @ new.x - loss.b
        f_new = float(np.dot(resid_new, resid_new))
        g_new = regularizer_value(problem.reg, new.y)
        l_new = f_new + g_new + float(np.dot(new.p, gap_new)) + 0.5 * alpha * float(np.dot(gap_new, gap_new))
        l_hat_new = l_new + 0.5 * consts.sigma0 * dx**2

        m10 = m11 = m_aux = None
        stationarity = None
        if diagnostics:
            gap_mixed = Ax_prev - By_new
            l_before_x = (
                f_prev
                + g_new
                + float(np.dot(state.p, gap_mixed))
                + 0.5 * alpha * float(np.dot(gap_mixed, gap_mixed))
            )
            l_after_x = f_new + g_new + float(np.dot(state.p, gap_new)) + 0.5 * alpha * float(np.dot(gap_new, gap_new))
            m10 = l_before_x - l_after_x - 0.5 * consts.mu1 * dx**2
            dx_lag = float(np.linalg.norm(state.x - state.x_prev))
            with np.errstate(divide="ignore", invalid="ignore"):
                rhs = (2.0 * (consts.ell_f + consts.ell_phi) ** 2 / consts.mu0) * dx**2 + (
                    2.0 * consts.ell_phi**2 / consts.mu0
                ) * dx_lag**2
            m11 = float(rhs) - dp**2
            m_aux = l_hat_prev - l_hat_new - consts.sigma1 * dx**2
            grad_x = float(np.linalg.norm(2.0 * (loss.D.T @ resid_new) + problem.A.T @ new.p))
            subdiff_y = regularizer_subdiff_dist(problem.reg, problem.B.T @ new.p, new.y)
            stationarity = StationarityResidual(grad_x=grad_x, subdiff_y=subdiff_y, primal=primal)

        mse_x = mse_y = None
        if ground_truth is not None:
            mse_x = float(np.linalg.norm(ground_truth.x_star - new.x)) / problem.n1
            mse_y = float(np.linalg.norm(ground_truth.y_star - new.y)) / problem.n2

        trace.append(
            IterationRecord(
                k=new.k,
                L_alpha=l_new,
                L_hat=l_hat_new,
                primal_residual=primal,
                dx=dx,
                dy=dy,
                dp=dp,
                mse_x=mse_x,
                mse_y=mse_y,
                m10=m10,
                m11=m11,
                m_aux=m_aux,
                stationarity=stationarity,
            )
        )

        f_prev = f_new
        Ax_prev = Ax_new
        l_hat_prev = l_hat_new
        state = new

        if math.sqrt(dx**2 + dy**2 + dp**2) <= config.tol * (1.0 + z_norm):
            reason = "tol"
            break

    return SolveResult(
        state=state,
        trace=trace,
        reason=reason,
        constants=consts,
        alpha_bound=bound,
        alpha_bound_ok=bound_ok,
    )
