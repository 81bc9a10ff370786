"""Bregman-distance generators and the associated distance functional.

A generator bundles a convex differentiable function with its gradient and
two pieces of curvature metadata (strong-convexity modulus and gradient
Lipschitz constant) that the descent diagnostics consume. The distance is

    dist(x, y) = value(x) - value(y) - <gradient(y), x - y>.

``linearizing_generator`` builds the quadratic generator that cancels the
coupling term of the y-subproblem, turning it into a plain prox step.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import ConvexityViolation, DimensionMismatch, DomainViolation, InvalidParameter, NotSpd
from .numerics import as_matrix, as_vector, max_eig_symmetric, min_eig_symmetric, spectral_norm


class Domain(enum.Enum):
    ALL_REALS = "all_reals"
    POSITIVE_ORTHANT = "positive_orthant"


@dataclass(frozen=True)
class BregmanGenerator:
    """Convex differentiable generator with curvature metadata.

    ``strong_convexity`` is a valid lower curvature modulus (0 when the
    generator is not globally strongly convex); ``grad_lipschitz`` is a valid
    upper bound on the gradient's Lipschitz constant (``inf`` when no finite
    global constant exists, e.g. Itakura-Saito / Kullback-Leibler).
    """

    value: Callable[[np.ndarray], float]
    gradient: Callable[[np.ndarray], np.ndarray]
    strong_convexity: float
    grad_lipschitz: float
    domain: Domain = Domain.ALL_REALS
    kind: str = "custom"


def _check_domain(gen: BregmanGenerator, point: np.ndarray, name: str) -> None:
    if gen.domain is Domain.POSITIVE_ORTHANT and not np.all(point > 0.0):
        raise DomainViolation(f"{name} must have strictly positive entries for {gen.kind}")


def bregman_distance(gen: BregmanGenerator, x, y) -> float:
    """Evaluate value(x) - value(y) - <gradient(y), x - y>."""
    xv = as_vector(x, "x")
    yv = as_vector(y, "y")
    if xv.shape != yv.shape:
        raise DimensionMismatch(f"x has length {xv.shape[0]}, y has length {yv.shape[0]}")
    _check_domain(gen, xv, "x")
    _check_domain(gen, yv, "y")
    return float(gen.value(xv) - gen.value(yv) - np.dot(gen.gradient(yv), xv - yv))


def squared_norm_generator(scale: float) -> BregmanGenerator:
    """Generator (scale/2)*||x||^2; its distance is (scale/2)*||x - y||^2."""
    scale = float(scale)
    if not math.isfinite(scale) or scale < 0.0:
        raise InvalidParameter(f"scale must be finite and >= 0, got {scale}")
    return BregmanGenerator(
        value=lambda x: 0.5 * scale * float(np.dot(x, x)),
        gradient=lambda x: scale * x,
        strong_convexity=scale,
        grad_lipschitz=scale,
        kind="squared_norm",
    )


def mahalanobis_generator(Q) -> BregmanGenerator:
    """Generator <Qx, x> for SPD Q; its distance is ||x - y||_Q^2.

    The unscaled quadratic form is used so the distance matches the usual
    Q-weighted squared norm; the curvature metadata is therefore
    2*lambda_min(Q) / 2*lambda_max(Q).
    """
    Qm = as_matrix(Q, "Q")
    lo = min_eig_symmetric(Qm)
    if lo <= 0.0:
        raise NotSpd(f"Q must be positive definite, smallest eigenvalue {lo}")
    hi = max_eig_symmetric(Qm)
    return BregmanGenerator(
        value=lambda x: float(x @ Qm @ x),
        gradient=lambda x: 2.0 * (Qm @ x),
        strong_convexity=2.0 * lo,
        grad_lipschitz=2.0 * hi,
        kind="mahalanobis",
    )


def itakura_saito_generator() -> BregmanGenerator:
    """Burg-entropy generator; distance sum(x/y - log(x/y) - 1) on x, y > 0."""
    return BregmanGenerator(
        value=lambda x: float(-np.sum(np.log(x))),
        gradient=lambda x: -1.0 / x,
        strong_convexity=0.0,
        grad_lipschitz=math.inf,
        domain=Domain.POSITIVE_ORTHANT,
        kind="itakura_saito",
    )


def kullback_leibler_generator() -> BregmanGenerator:
    """Negative-entropy generator; distance sum(x*log(x/y)) - sum(x - y)."""
    return BregmanGenerator(
        value=lambda x: float(np.sum(x * np.log(x))),
        gradient=lambda x: np.log(x) + 1.0,
        strong_convexity=0.0,
        grad_lipschitz=math.inf,
        domain=Domain.POSITIVE_ORTHANT,
        kind="kullback_leibler",
    )


def zero_generator() -> BregmanGenerator:
    """Identically-zero generator: distance 0 everywhere."""
    return BregmanGenerator(
        value=lambda x: 0.0,
        gradient=np.zeros_like,
        strong_convexity=0.0,
        grad_lipschitz=0.0,
        kind="zero",
    )


def linearizing_generator(B, alpha: float, mu: float, c) -> BregmanGenerator:
    """Quadratic generator (mu/2)*||y||^2 - (alpha/2)*||By - c||^2.

    Requires ``mu > alpha*||B||^2`` (strictly) so the generator is convex.
    Adding its distance to the coupled y-subproblem cancels the ||By - c||^2
    term: the subproblem becomes, up to an additive constant,

        g(y) + (mu/2)*||y - v||^2,  v = y_k - (alpha/mu) * B^T (B y_k - c),

    i.e. a single prox step at weight ``mu``.
    """
    Bm = as_matrix(B, "B")
    cv = as_vector(c, "c")
    if Bm.shape[0] != cv.shape[0]:
        raise DimensionMismatch(f"B has {Bm.shape[0]} rows but c has length {cv.shape[0]}")
    alpha = float(alpha)
    mu = float(mu)
    if alpha <= 0.0:
        raise InvalidParameter(f"alpha must be > 0, got {alpha}")
    norm_b_sq = spectral_norm(Bm) ** 2
    if not mu > alpha * norm_b_sq:
        raise ConvexityViolation(
            f"need mu > alpha*||B||^2 = {alpha * norm_b_sq:.6g}, got mu = {mu}"
        )

    def value(y: np.ndarray) -> float:
        r = Bm @ y - cv
        return 0.5 * mu * float(np.dot(y, y)) - 0.5 * alpha * float(np.dot(r, r))

    def gradient(y: np.ndarray) -> np.ndarray:
        return mu * y - alpha * (Bm.T @ (Bm @ y - cv))

    return BregmanGenerator(
        value=value,
        gradient=gradient,
        strong_convexity=mu - alpha * norm_b_sq,
        grad_lipschitz=mu,
        kind="linearized_quadratic",
    )
