"""Finite distributions, divergences and Gaussian special functions.

All information quantities are in nats. The conventions ``0 log 0 = 0``
and ``KL = +inf`` under an absolute-continuity failure are applied
throughout.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy import special

from selcover.errors import (
    DomainError,
    LabelMismatchError,
    NotPositiveSemidefiniteError,
    ValidationError,
)

SUM_TOL = 1e-12
SYMMETRY_RTOL = 1e-10
_SQRT2 = math.sqrt(2.0)
_LOG_SQRT_2PI = 0.5 * math.log(2.0 * math.pi)


@dataclass(frozen=True)
class FiniteDistribution:
    """Probability vector over an ordered set of labelled atoms.

    Probabilities are checked on construction and renormalized once so that
    they sum to one in floating point; they are never touched again.
    """

    labels: tuple[str, ...]
    probs: tuple[float, ...]

    def __post_init__(self):
        labels = tuple(str(label) for label in self.labels)
        probs = np.asarray(self.probs, dtype=float)
        if probs.ndim != 1 or len(labels) != probs.size:
            raise ValidationError(
                f"need one probability per label, got {len(labels)} labels "
                f"and shape {probs.shape}"
            )
        if probs.size == 0:
            raise ValidationError("distribution has no atoms")
        if len(set(labels)) != len(labels):
            raise ValidationError("labels are not unique")
        if not np.all(np.isfinite(probs)) or np.any(probs < 0):
            raise ValidationError("probabilities must be finite and nonnegative")
        total = math.fsum(probs)
        if abs(total - 1.0) > SUM_TOL:
            raise ValidationError(f"probabilities sum to {total!r}, not 1")
        if total != 1.0:
            probs = probs / total
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "probs", tuple(float(x) for x in probs))

    @classmethod
    def from_probs(cls, probs: Sequence[float], labels: Sequence[str] | None = None):
        """Build a distribution, labelling atoms ``0..k-1`` when no labels are given."""
        if labels is None:
            labels = [str(i) for i in range(len(probs))]
        return cls(tuple(labels), tuple(probs))

    @classmethod
    def uniform(cls, k: int) -> "FiniteDistribution":
        if k < 1:
            raise DomainError("uniform distribution needs at least one atom")
        return cls.from_probs([1.0 / k] * k)

    def __len__(self) -> int:
        return len(self.labels)

    def as_array(self) -> np.ndarray:
        return np.array(self.probs)

    def permuted(self, order: Sequence[int]) -> "FiniteDistribution":
        return FiniteDistribution(
            tuple(self.labels[i] for i in order), tuple(self.probs[i] for i in order)
        )


def _check_same_labels(p: FiniteDistribution, q: FiniteDistribution) -> None:
    if p.labels != q.labels:
        raise LabelMismatchError(
            f"label sets differ: {list(p.labels)} vs {list(q.labels)}"
        )


def tv_distance(p: FiniteDistribution, q: FiniteDistribution) -> float:
    """Total variation distance, half the l1 distance between the vectors."""
    _check_same_labels(p, q)
    value = 0.5 * math.fsum(abs(a - b) for a, b in zip(p.probs, q.probs))
    return min(1.0, value)


def kl_divergence(p: FiniteDistribution, q: FiniteDistribution) -> float:
    """Kullback-Leibler divergence ``KL(p || q)`` in nats.

    Returns ``math.inf`` when ``p`` puts mass where ``q`` does not.
    """
    _check_same_labels(p, q)
    terms = []
    for a, b in zip(p.probs, q.probs):
        if a == 0.0:
            continue
        if b == 0.0:
            return math.inf
        terms.append(a * math.log(a / b))
    return max(0.0, math.fsum(terms))


def entropy(p: FiniteDistribution) -> float:
    """Shannon entropy in nats."""
    value = math.fsum(a * math.log(1.0 / a) for a in p.probs if a > 0.0)
    return min(max(0.0, value), math.log(len(p)))


def normal_cdf(x):
    """Standard normal distribution function.

    Evaluated as ``erfc(-x / sqrt 2) / 2`` so both tails keep full relative
    precision. Accepts scalars or arrays.
    """
    arr = np.asarray(x, dtype=float)
    out = 0.5 * special.erfc(-arr / _SQRT2)
    return float(out) if out.ndim == 0 else out


def _normal_pdf(x: np.ndarray) -> np.ndarray:
    return np.exp(-0.5 * x * x - _LOG_SQRT_2PI)


def _lower_tail_guess(p: np.ndarray) -> np.ndarray:
    # Hastings rational approximation, |error| < 4.5e-4 for p in (0, 0.5].
    t = np.sqrt(-2.0 * np.log(p))
    num = 2.515517 + t * (0.802853 + t * 0.010328)
    den = 1.0 + t * (1.432788 + t * (0.189269 + t * 0.001308))
    return -(t - num / den)


def _solve_lower_tail(p: np.ndarray) -> np.ndarray:
    """Solve ``normal_cdf(x) = p`` for ``p`` in (0, 0.5] by safeguarded Newton.

    Every element iterates independently of the others, so a value does not
    depend on what else shares its array.
    """
    x = _lower_tail_guess(p)
    width = np.full_like(x, 1e-3)
    lo = x - width
    hi = np.minimum(x + width, 0.0)
    # widen until the bracket holds the root
    for _ in range(64):
        bad = (normal_cdf(lo) > p) | (normal_cdf(hi) < p)
        if not bad.any():
            break
        width[bad] *= 2.0
        lo[bad] = x[bad] - width[bad]
        hi[bad] = np.minimum(x[bad] + width[bad], 0.0)

    active = np.ones(x.shape, dtype=bool)
    for _ in range(100):
        idx = np.flatnonzero(active)
        if idx.size == 0:
            break
        xa, pa = x[idx], p[idx]
        f = normal_cdf(xa) - pa
        below = f < 0
        lo[idx] = np.where(below, xa, lo[idx])
        hi[idx] = np.where(below, hi[idx], xa)
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            x_new = xa - f / _normal_pdf(xa)
        outside = ~((x_new >= lo[idx]) & (x_new <= hi[idx]))
        x_new = np.where(outside, 0.5 * (lo[idx] + hi[idx]), x_new)
        x_new = np.where(f == 0.0, xa, x_new)
        settled = np.abs(x_new - xa) <= 2.0 * np.spacing(np.maximum(np.abs(xa), 1.0))
        x[idx] = x_new
        active[idx[settled]] = False
    return x


def normal_quantile(u):
    """Inverse of :func:`normal_cdf` on the open unit interval.

    The root of ``normal_cdf(x) = u`` is located by Newton iteration kept
    inside a verified bracket, so the round trip through the distribution
    function is accurate to a few ulps. Accepts scalars or arrays.

    Raises
    ------
    DomainError
        If any input lies outside (0, 1).
    """
    arr = np.asarray(u, dtype=float)
    if np.any(~((arr > 0.0) & (arr < 1.0))):
        raise DomainError("normal_quantile is defined on the open interval (0, 1)")
    upper = arr > 0.5
    # 1 - u is exact for u in [0.5, 1)
    tail = np.where(upper, 1.0 - arr, arr)
    x = _solve_lower_tail(tail.ravel()).reshape(arr.shape)
    out = np.where(upper, -x, x)
    out = np.where(arr == 0.5, 0.0, out)
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class SymmetricMatrix:
    """Square real matrix, symmetric to a relative tolerance of 1e-10."""

    entries: np.ndarray

    def __post_init__(self):
        a = np.array(self.entries, dtype=float)
        if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] == 0:
            raise ValidationError(f"expected a nonempty square matrix, got shape {a.shape}")
        if not np.all(np.isfinite(a)):
            raise ValidationError("matrix entries must be finite")
        scale = max(1.0, float(np.max(np.abs(a))))
        if np.max(np.abs(a - a.T)) > SYMMETRY_RTOL * scale:
            raise ValidationError("matrix is not symmetric")
        a = 0.5 * (a + a.T)
        a.setflags(write=False)
        object.__setattr__(self, "entries", a)

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    @property
    def trace(self) -> float:
        return float(np.trace(self.entries))

    def to_dict(self) -> dict:
        return {"dim": self.dim, "entries": self.entries.tolist()}

    @classmethod
    def from_dict(cls, payload: dict) -> "SymmetricMatrix":
        try:
            dim = int(payload["dim"])
            entries = payload["entries"]
        except (KeyError, TypeError, ValueError) as exc:
            raise ValidationError(f"matrix object needs 'dim' and 'entries': {exc}") from None
        out = cls(np.asarray(entries, dtype=float))
        if out.dim != dim:
            raise ValidationError(f"declared dim {dim} but entries are {out.dim}x{out.dim}")
        return out


def _as_symmetric(sigma) -> SymmetricMatrix:
    return sigma if isinstance(sigma, SymmetricMatrix) else SymmetricMatrix(sigma)


def _cholesky(a: np.ndarray, what: str) -> np.ndarray:
    try:
        return np.linalg.cholesky(a)
    except np.linalg.LinAlgError:
        raise NotPositiveSemidefiniteError(f"{what} is not positive semidefinite") from None


def log_det_scaled(sigma, tau: float) -> float:
    """Return ``log det(I + sigma / tau**2)`` for a PSD ``sigma``.

    Parameters
    ----------
    sigma : SymmetricMatrix or array_like
        Positive semidefinite q x q matrix.
    tau : float
        Positive scale.

    Returns
    -------
    float
        Twice the sum of the log-diagonal of the Cholesky factor of the
        shifted matrix; never negative.
    """
    if not (tau > 0 and math.isfinite(tau)):
        raise DomainError(f"tau must be positive and finite, got {tau!r}")
    s = _as_symmetric(sigma).entries
    q = s.shape[0]
    # PSD check on sigma itself; the shifted matrix alone would accept
    # eigenvalues down to -tau**2
    jitter = 1e-10 * max(1.0, float(np.max(np.abs(np.diag(s)))))
    _cholesky(s + jitter * np.eye(q), "sigma")
    chol = _cholesky(np.eye(q) + s / (tau * tau), "I + sigma / tau^2")
    return max(0.0, 2.0 * math.fsum(np.log(np.diag(chol))))
