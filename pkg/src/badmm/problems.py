"""Composite problem instances and the experiment data generators.

A problem couples a quadratic data fit ``||Dx - b||^2`` with a sparsity
regularizer on ``y`` through the constraint ``Ax = By``. The generators here
build the 1-d total-variation benchmark: first-order difference operator,
Gaussian sensing matrix with row-scaled variance, and a piecewise-constant
ground-truth signal. All generation is a pure function of (parameters, seed),
using numpy's seeded PCG64 generator.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, replace

import numpy as np

from .errors import DimensionMismatch, InvalidParameter
from .numerics import as_matrix, as_vector, min_eig_symmetric, spectral_norm
from .proximal import ShrinkageKind, shrink_vector


class RegKind(enum.Enum):
    L1 = "l1"
    LHALF = "lhalf"


@dataclass(frozen=True)
class Regularizer:
    """Sparsity penalty: weight * ||y||_1 or weight * sum(|y_i|^(1/2))."""

    kind: RegKind
    weight: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.weight) and self.weight > 0.0):
            raise InvalidParameter(f"regularizer weight must be > 0, got {self.weight}")


def regularizer_value(reg: Regularizer, y) -> float:
    yv = as_vector(y, "y")
    if reg.kind is RegKind.L1:
        return reg.weight * float(np.sum(np.abs(yv)))
    return reg.weight * float(np.sum(np.sqrt(np.abs(yv))))


def regularizer_prox(reg: Regularizer, v, alpha: float) -> np.ndarray:
    """argmin over y of reg_value(y) + (alpha/2)*||y - v||^2.

    Soft shrinkage at weight/alpha for the l1 penalty; half shrinkage at
    2*weight/alpha for the l1/2 penalty (the factor 2 absorbs the different
    quadratic coupling of the half operator).
    """
    alpha = float(alpha)
    if not (math.isfinite(alpha) and alpha > 0.0):
        raise InvalidParameter(f"prox weight must be > 0, got {alpha}")
    if reg.kind is RegKind.L1:
        return shrink_vector(v, reg.weight / alpha, ShrinkageKind.SOFT)
    return shrink_vector(v, 2.0 * reg.weight / alpha, ShrinkageKind.HALF)


def regularizer_subdiff_dist(reg: Regularizer, u, y) -> float:
    """Euclidean distance from u to the subdifferential of the penalty at y.

    Componentwise sets: for the l1 penalty, {w*sign(y_i)} when y_i != 0 and
    the interval [-w, w] at 0; for the l1/2 penalty, {w*sign(y_i)/(2*sqrt(|y_i|))}
    when y_i != 0 and the whole real line at 0 (distance 0).
    """
    uv = as_vector(u, "u")
    yv = as_vector(y, "y")
    if uv.shape != yv.shape:
        raise DimensionMismatch(f"u has length {uv.shape[0]}, y has length {yv.shape[0]}")
    w = reg.weight
    nonzero = yv != 0.0
    if reg.kind is RegKind.L1:
        d = np.where(
            nonzero,
            uv - w * np.sign(yv),
            np.maximum(np.abs(uv) - w, 0.0),
        )
    else:
        with np.errstate(divide="ignore", invalid="ignore"):
            slope = w * np.sign(yv) / (2.0 * np.sqrt(np.abs(yv)))
        d = np.where(nonzero, uv - slope, 0.0)
    return float(np.linalg.norm(d))


def _lock(arr: np.ndarray) -> np.ndarray:
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True)
class QuadraticLoss:
    """Data-fit term ||Dx - b||^2 with cached gradient Lipschitz constant."""

    D: np.ndarray
    b: np.ndarray
    ell_f: float = 0.0  # 2*lambda_max(D^T D), filled in __post_init__

    def __post_init__(self) -> None:
        D = _lock(as_matrix(self.D, "D").copy())
        b = _lock(as_vector(self.b, "b").copy())
        if D.shape[0] != b.shape[0]:
            raise DimensionMismatch(f"D has {D.shape[0]} rows but b has length {b.shape[0]}")
        object.__setattr__(self, "D", D)
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "ell_f", 2.0 * spectral_norm(D) ** 2)

    @property
    def dim(self) -> int:
        return self.D.shape[1]

    def value(self, x) -> float:
        r = self.D @ x - self.b
        return float(np.dot(r, r))

    def gradient(self, x) -> np.ndarray:
        return 2.0 * (self.D.T @ (self.D @ x - self.b))


@dataclass(frozen=True)
class CompositeProblem:
    """Problem data (loss, regularizer, A, B) with cached spectral constants.

    ``mu0 = lambda_min(A A^T)`` and ``mu_B = lambda_min(B^T B)`` are computed
    once at construction; both may be near zero and are reported as-is.
    """

    loss: QuadraticLoss
    reg: Regularizer
    A: np.ndarray
    B: np.ndarray
    mu0: float = 0.0
    mu_B: float = 0.0
    norm_A: float = 0.0
    norm_B: float = 0.0
    b_is_identity: bool = False

    def __post_init__(self) -> None:
        A = _lock(as_matrix(self.A, "A").copy())
        B = _lock(as_matrix(self.B, "B").copy())
        if A.shape[0] != B.shape[0]:
            raise DimensionMismatch(f"A has {A.shape[0]} rows but B has {B.shape[0]}")
        if A.shape[1] != self.loss.dim:
            raise DimensionMismatch(
                f"A has {A.shape[1]} columns but the loss acts on dimension {self.loss.dim}"
            )
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "B", B)
        object.__setattr__(self, "mu0", min_eig_symmetric(A @ A.T))
        object.__setattr__(self, "mu_B", min_eig_symmetric(B.T @ B))
        object.__setattr__(self, "norm_A", spectral_norm(A))
        object.__setattr__(self, "norm_B", spectral_norm(B))
        is_id = B.shape[0] == B.shape[1] and bool(np.array_equal(B, np.eye(B.shape[0])))
        object.__setattr__(self, "b_is_identity", is_id)

    @property
    def n1(self) -> int:
        return self.A.shape[1]

    @property
    def n2(self) -> int:
        return self.B.shape[1]

    @property
    def coupling_dim(self) -> int:
        return self.A.shape[0]

    def with_regularizer(self, reg: Regularizer) -> "CompositeProblem":
        """Same data with a different penalty; cached constants are reused."""
        return replace(self, reg=reg)


@dataclass(frozen=True)
class GroundTruth:
    """Reference pair (x_star, y_star) used only for error reporting."""

    x_star: np.ndarray
    y_star: np.ndarray

    def __post_init__(self) -> None:
        object.__setattr__(self, "x_star", _lock(as_vector(self.x_star, "x_star").copy()))
        object.__setattr__(self, "y_star", _lock(as_vector(self.y_star, "y_star").copy()))


def difference_matrix(n: int) -> np.ndarray:
    """(n-1) x n first-order difference operator: row i is x[i+1] - x[i]."""
    if n < 2:
        raise InvalidParameter(f"difference matrix needs n >= 2, got {n}")
    A = np.zeros((n - 1, n))
    idx = np.arange(n - 1)
    A[idx, idx] = -1.0
    A[idx, idx + 1] = 1.0
    return A


def gaussian_matrix(m: int, n: int, seed: int) -> np.ndarray:
    """m x n sensing matrix with i.i.d. N(0, 1/m) entries, seeded."""
    if m < 1 or n < 1:
        raise InvalidParameter(f"matrix shape must be positive, got {m}x{n}")
    rng = np.random.default_rng(seed)
    return rng.normal(0.0, 1.0 / math.sqrt(m), size=(m, n))


def piecewise_constant_signal(n: int, jump_count: int, amplitude: float, seed: int) -> np.ndarray:
    """Piecewise-constant signal with exactly ``jump_count`` change points.

    Change-point positions are drawn without replacement from 1..n-1; segment
    values are i.i.d. uniform on [-amplitude, amplitude], redrawn on the
    (measure-zero) event that adjacent segments coincide.
    """
    if not 1 <= jump_count < n:
        raise InvalidParameter(f"need 1 <= jump_count < n, got jump_count={jump_count}, n={n}")
    if not (math.isfinite(amplitude) and amplitude > 0.0):
        raise InvalidParameter(f"amplitude must be > 0, got {amplitude}")
    rng = np.random.default_rng(seed)
    positions = np.sort(rng.choice(np.arange(1, n), size=jump_count, replace=False))
    values = rng.uniform(-amplitude, amplitude, size=jump_count + 1)
    for i in range(1, len(values)):
        while values[i] == values[i - 1]:
            values[i] = rng.uniform(-amplitude, amplitude)
    signal = np.empty(n)
    bounds = [0, *positions.tolist(), n]
    for i in range(len(values)):
        signal[bounds[i] : bounds[i + 1]] = values[i]
    return signal


def make_tv_problem(
    n: int,
    m: int,
    weight: float,
    reg_kind: RegKind,
    seed: int,
    noise_sigma: float = 0.0,
    jump_count: int = 20,
    amplitude: float = 1.0,
) -> tuple[CompositeProblem, GroundTruth]:
    """Assemble the 1-d total-variation recovery benchmark.

    A is the difference operator, B the identity, D a Gaussian sensing matrix
    (seed), the ground truth a piecewise-constant signal (seed+1), and
    b = D x_star plus optional N(0, sigma^2) noise (seed+2).
    """
    if noise_sigma < 0.0:
        raise InvalidParameter(f"noise_sigma must be >= 0, got {noise_sigma}")
    A = difference_matrix(n)
    B = np.eye(n - 1)
    D = gaussian_matrix(m, n, seed)
    x_star = piecewise_constant_signal(n, jump_count, amplitude, seed + 1)
    b = D @ x_star
    if noise_sigma > 0.0:
        b = b + noise_sigma * np.random.default_rng(seed + 2).standard_normal(m)
    y_star = A @ x_star
    problem = CompositeProblem(QuadraticLoss(D, b), Regularizer(reg_kind, weight), A, B)
    return problem, GroundTruth(x_star, y_star)
