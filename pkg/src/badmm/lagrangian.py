"""Augmented-Lagrangian evaluation and the descent diagnostics layer.

Everything here is a pure evaluator: the solver produces iterates, and these
functions measure them. The measured quantities are

* the augmented Lagrangian ``L(x, y, p)`` and the auxiliary objective
  ``L_hat = L + (sigma0/2)*||x - x_prev||^2`` whose monotone decrease is the
  solver's certifiable descent property,
* closed-form analysis constants (sigma0, sigma1, kappa1, kappa2, the lower
  bound on the penalty alpha) derived from measured curvature data,
* per-transition inequality margins (nonnegative margin == inequality holds),
* the stationarity residual of a triple (x, y, p).

Diagnostics never abort a solve; they only annotate its trace.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .bregman import BregmanGenerator
from .errors import DimensionMismatch, InvalidParameter
from .problems import CompositeProblem, regularizer_subdiff_dist, regularizer_value

# mu_B below this fraction of ||B||^2 is treated as "B not injective".
_INJECTIVITY_RTOL = 1e-12


class Assumption(enum.Enum):
    """Which curvature regime the constants are derived under.

    ONE requires B injective (mu_B > 0); TWO instead requires the y-side
    generator to be strongly convex (mu2 > 0).
    """

    ONE = "one"
    TWO = "two"


@dataclass(frozen=True)
class AnalysisConstants:
    """Measured and derived constants of one solver configuration.

    sigma0/sigma1/kappa1/kappa2 are exactly the closed forms computed by
    :func:`sigma_constants` and :func:`kappa_constants` from the other
    fields; kappa2 is NaN when mu_B = 0 (it is undefined without an
    injective B).
    """

    ell_f: float
    ell_phi: float
    ell_psi: float
    mu0: float
    mu1: float
    mu2: float
    mu_B: float
    alpha: float
    sigma0: float
    sigma1: float
    kappa1: float
    kappa2: float
    assumption: Assumption


def _sigma_closed_form(
    assumption: Assumption,
    ell_f: float,
    ell_phi: float,
    mu0: float,
    mu1: float,
    mu2: float,
    alpha: float,
) -> tuple[float, float]:
    with np.errstate(divide="ignore", invalid="ignore"):
        penalty = 2.0 * (ell_f + ell_phi) ** 2 / (alpha * mu0)
        slack = 2.0 * ell_phi**2 / (alpha * mu0)
    base = mu1 / 2.0 - penalty - slack
    if assumption is Assumption.ONE:
        return slack, base
    return 2.0 * slack, min(mu2 / 2.0, base)


def sigma_constants(c: AnalysisConstants) -> tuple[float, float]:
    """Closed-form (sigma0, sigma1) of the auxiliary descent estimate.

    Under Assumption.ONE: sigma0 = 2*ell_phi^2/(alpha*mu0) and
    sigma1 = mu1/2 - 2*(ell_f+ell_phi)^2/(alpha*mu0) - 2*ell_phi^2/(alpha*mu0).
    Under Assumption.TWO sigma0 doubles and sigma1 is capped by mu2/2.
    sigma1 <= 0 is reported, not an error.
    """
    return _sigma_closed_form(c.assumption, c.ell_f, c.ell_phi, c.mu0, c.mu1, c.mu2, c.alpha)


def alpha_lower_bound(c: AnalysisConstants) -> tuple[float, bool]:
    """Penalty bound 4*((ell_f+ell_phi)^2 + ell_phi^2)/(mu1*mu0).

    Returns (bound, flag); the flag is True when c.alpha strictly exceeds the
    bound. sigma1 > 0 is algebraically equivalent to that flag under
    Assumption.ONE.
    """
    with np.errstate(divide="ignore", invalid="ignore"):
        bound = 4.0 * ((c.ell_f + c.ell_phi) ** 2 + c.ell_phi**2) / (c.mu1 * c.mu0)
    return float(bound), bool(c.alpha > bound)


def kappa_constants(c: AnalysisConstants, norm_A: float) -> tuple[float, float]:
    """Closed-form (kappa1, kappa2) step-transfer constants.

    kappa1 = sqrt(2)*(ell_f+ell_phi)/sqrt(mu0) bounds dual steps by primal
    x-steps; kappa2 = sqrt(2)*(2*kappa1 + alpha*||A||)/(alpha*sqrt(mu_B))
    bounds y-steps and needs mu_B > 0.
    """
    if c.mu0 <= 0.0:
        raise InvalidParameter(f"kappa constants need mu0 > 0, got {c.mu0}")
    kappa1 = math.sqrt(2.0) * (c.ell_f + c.ell_phi) / math.sqrt(c.mu0)
    if c.mu_B <= 0.0:
        raise InvalidParameter("kappa2 is undefined when B is not injective (mu_B = 0)")
    kappa2 = math.sqrt(2.0) * (2.0 * kappa1 + c.alpha * norm_A) / (c.alpha * math.sqrt(c.mu_B))
    return kappa1, kappa2


def derive_constants(
    ell_f: float,
    ell_phi: float,
    mu0: float,
    mu1: float,
    alpha: float,
    mu2: float = 0.0,
    mu_B: float = 0.0,
    ell_psi: float = 0.0,
    norm_A: float = 0.0,
    assumption: Assumption = Assumption.ONE,
) -> AnalysisConstants:
    """Build a consistent constants record from raw curvature numbers.

    The derived fields (sigma0, sigma1, kappa1, kappa2) are filled with their
    closed forms; kappa2 is NaN when mu_B = 0.
    """
    sigma0, sigma1 = _sigma_closed_form(assumption, ell_f, ell_phi, mu0, mu1, mu2, alpha)
    kappa1 = math.sqrt(2.0) * (ell_f + ell_phi) / math.sqrt(mu0) if mu0 > 0.0 else math.inf
    if mu_B > 0.0 and alpha > 0.0:
        kappa2 = math.sqrt(2.0) * (2.0 * kappa1 + alpha * norm_A) / (alpha * math.sqrt(mu_B))
    else:
        kappa2 = math.nan
    return AnalysisConstants(
        ell_f=ell_f,
        ell_phi=ell_phi,
        ell_psi=ell_psi,
        mu0=mu0,
        mu1=mu1,
        mu2=mu2,
        mu_B=mu_B,
        alpha=alpha,
        sigma0=sigma0,
        sigma1=sigma1,
        kappa1=kappa1,
        kappa2=kappa2,
        assumption=assumption,
    )


def analysis_constants(
    problem: CompositeProblem,
    alpha: float,
    phi: BregmanGenerator,
    psi: Optional[BregmanGenerator] = None,
    assumption: Optional[Assumption] = None,
) -> AnalysisConstants:
    """Assemble constants from a problem's cached spectra and the generators.

    mu1 is the strong-convexity modulus of phi (the x-side generator used by
    the solver's exact quadratic step). When ``assumption`` is omitted it is
    picked automatically: ONE if B is injective, else TWO.
    """
    if alpha <= 0.0:
        raise InvalidParameter(f"alpha must be > 0, got {alpha}")
    mu_B = problem.mu_B
    if assumption is None:
        injective = mu_B > _INJECTIVITY_RTOL * max(1.0, problem.norm_B**2)
        assumption = Assumption.ONE if injective else Assumption.TWO
    return derive_constants(
        ell_f=problem.loss.ell_f,
        ell_phi=phi.grad_lipschitz,
        mu0=problem.mu0,
        mu1=phi.strong_convexity,
        alpha=float(alpha),
        mu2=psi.strong_convexity if psi is not None else 0.0,
        mu_B=mu_B,
        ell_psi=psi.grad_lipschitz if psi is not None else 0.0,
        norm_A=problem.norm_A,
        assumption=assumption,
    )


def _check_dims(problem: CompositeProblem, x: np.ndarray, y: np.ndarray, p: np.ndarray) -> None:
    if x.shape[0] != problem.n1:
        raise DimensionMismatch(f"x has length {x.shape[0]}, expected {problem.n1}")
    if y.shape[0] != problem.n2:
        raise DimensionMismatch(f"y has length {y.shape[0]}, expected {problem.n2}")
    if p.shape[0] != problem.coupling_dim:
        raise DimensionMismatch(f"p has length {p.shape[0]}, expected {problem.coupling_dim}")


def aug_lagrangian(problem: CompositeProblem, alpha: float, x, y, p) -> float:
    """f(x) + g(y) + <p, Ax - By> + (alpha/2)*||Ax - By||^2."""
    xv = np.asarray(x, dtype=float)
    yv = np.asarray(y, dtype=float)
    pv = np.asarray(p, dtype=float)
    _check_dims(problem, xv, yv, pv)
    gap = problem.A @ xv - problem.B @ yv
    return (
        problem.loss.value(xv)
        + regularizer_value(problem.reg, yv)
        + float(np.dot(pv, gap))
        + 0.5 * alpha * float(np.dot(gap, gap))
    )


def aux_function(problem: CompositeProblem, alpha: float, x, y, p, x_prev, sigma0: float) -> float:
    """Augmented Lagrangian plus the lagged proximal term (sigma0/2)*||x - x_prev||^2."""
    xv = np.asarray(x, dtype=float)
    xp = np.asarray(x_prev, dtype=float)
    if xv.shape != xp.shape:
        raise DimensionMismatch(f"x has length {xv.shape[0]}, x_prev has length {xp.shape[0]}")
    d = xv - xp
    return aug_lagrangian(problem, alpha, xv, y, p) + 0.5 * sigma0 * float(np.dot(d, d))


@dataclass(frozen=True)
class StationarityResidual:
    """How far a triple (x, y, p) is from the first-order optimality system."""

    grad_x: float  # ||grad f(x) + A^T p||
    subdiff_y: float  # distance from B^T p to the penalty subdifferential at y
    primal: float  # ||Ax - By||

    def max(self) -> float:
        return max(self.grad_x, self.subdiff_y, self.primal)


def stationarity_residual(problem: CompositeProblem, x, y, p) -> StationarityResidual:
    xv = np.asarray(x, dtype=float)
    yv = np.asarray(y, dtype=float)
    pv = np.asarray(p, dtype=float)
    _check_dims(problem, xv, yv, pv)
    grad_x = float(np.linalg.norm(problem.loss.gradient(xv) + problem.A.T @ pv))
    subdiff_y = regularizer_subdiff_dist(problem.reg, problem.B.T @ pv, yv)
    primal = float(np.linalg.norm(problem.A @ xv - problem.B @ yv))
    return StationarityResidual(grad_x=grad_x, subdiff_y=subdiff_y, primal=primal)


@dataclass(frozen=True)
class DescentMargins:
    """Signed slack of the per-transition descent inequalities.

    Nonnegative means the inequality held. ``m10`` is the x-step sufficient
    descent margin (the x-update must beat the previous x by at least
    (mu1/2)*||dx||^2 in the Lagrangian); ``m11`` is the dual-step bound margin
    (||dp||^2 must be controlled by the last two x-steps); ``m_aux`` is the
    auxiliary-objective descent margin (guaranteed only when alpha clears its
    lower bound).
    """

    m10: float
    m11: float
    m_aux: float


def descent_check(prev, cur, problem: CompositeProblem, c: AnalysisConstants) -> DescentMargins:
    """Margins for the transition from state ``prev`` to state ``cur``.

    ``prev``/``cur`` are consecutive solver states (anything exposing x, y, p
    and the lagged x_prev). ``cur.x_prev`` must equal ``prev.x``.
    """
    if prev.x.shape != cur.x.shape or prev.y.shape != cur.y.shape or prev.p.shape != cur.p.shape:
        raise DimensionMismatch("previous and current states have mismatched shapes")
    dx = float(np.linalg.norm(cur.x - prev.x))
    dx_lag = float(np.linalg.norm(prev.x - prev.x_prev))
    dp = float(np.linalg.norm(cur.p - prev.p))

    l_before_x = aug_lagrangian(problem, c.alpha, prev.x, cur.y, prev.p)
    l_after_x = aug_lagrangian(problem, c.alpha, cur.x, cur.y, prev.p)
    m10 = l_before_x - l_after_x - 0.5 * c.mu1 * dx**2

    with np.errstate(divide="ignore", invalid="ignore"):
        rhs = (2.0 * (c.ell_f + c.ell_phi) ** 2 / c.mu0) * dx**2 + (
            2.0 * c.ell_phi**2 / c.mu0
        ) * dx_lag**2
    m11 = float(rhs) - dp**2

    l_hat_prev = aux_function(problem, c.alpha, prev.x, prev.y, prev.p, prev.x_prev, c.sigma0)
    l_hat_cur = aux_function(problem, c.alpha, cur.x, cur.y, cur.p, cur.x_prev, c.sigma0)
    m_aux = l_hat_prev - l_hat_cur - c.sigma1 * dx**2

    return DescentMargins(m10=m10, m11=m11, m_aux=m_aux)
