"""Closed-form coverage bounds for designed screening channels.

A selector that sees the data only through ``W = T(D) + xi`` with
``xi ~ N(0, tau^2 I_q)`` leaks at most ``(1/2) log det(I + Sigma_T / tau^2)``
nats, and one that sees a finite message leaks at most its entropy. Both
convert to a coverage penalty ``sqrt(I / 2)`` on top of the fixed-target
level. Covariance inputs are design quantities declared by the user;
nothing here estimates them from data.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Any, Sequence, Union

from scipy import optimize

from selcover.errors import DomainError
from selcover.probkit import SymmetricMatrix, log_det_scaled

CALIBRATION_RTOL = 1e-10


class Provenance(str, enum.Enum):
    TV = "TV"
    PINSKER = "Pinsker"
    GAUSSIAN_FULL = "GaussianFull"
    GAUSSIAN_TRACE = "GaussianTrace"
    FINITE_MESSAGE_ENTROPY = "FiniteMessageEntropy"
    FINITE_MESSAGE_ALPHABET = "FiniteMessageAlphabet"
    ASYMPTOTIC_TRANSFER = "AsymptoticTransfer"


@dataclass(frozen=True)
class BoundReport:
    """Upper bound on selected-target noncoverage.

    ``raw`` is ``alpha + leakage_term``; ``value`` caps it at one.
    """

    raw: float
    leakage_term: float
    provenance: Provenance
    inputs: dict[str, Any] = field(default_factory=dict)

    @property
    def value(self) -> float:
        return min(1.0, self.raw)

    @classmethod
    def from_terms(cls, alpha: float, leakage_term: float, provenance: Provenance, **inputs):
        return cls(alpha + leakage_term, leakage_term, provenance, {"alpha": alpha, **inputs})

    def to_dict(self) -> dict:
        return {
            "value": self.value,
            "raw": self.raw,
            "leakage_term": self.leakage_term,
            "provenance": self.provenance.value,
            "inputs": self.inputs,
        }


@dataclass(frozen=True)
class FullCovariance:
    """Declared covariance matrix of the screening summary ``T(D)``."""

    sigma: SymmetricMatrix

    def __post_init__(self):
        if not isinstance(self.sigma, SymmetricMatrix):
            object.__setattr__(self, "sigma", SymmetricMatrix(self.sigma))

    @property
    def q(self) -> int:
        return self.sigma.dim


@dataclass(frozen=True)
class TraceBound:
    """Dimension ``q`` and a cap ``v`` on the trace of the summary covariance."""

    q: int
    v: float

    def __post_init__(self):
        if int(self.q) != self.q or self.q < 1:
            raise DomainError(f"q must be a positive integer, got {self.q!r}")
        if not (self.v >= 0 and math.isfinite(self.v)):
            raise DomainError(f"trace cap must be finite and nonnegative, got {self.v!r}")


CovarianceSpec = Union[FullCovariance, TraceBound]


def _check_alpha(alpha: float) -> None:
    if not (0.0 <= alpha <= 1.0):
        raise DomainError(f"alpha must lie in [0, 1], got {alpha!r}")


def _check_tau(tau: float) -> None:
    if not (tau > 0 and math.isfinite(tau)):
        raise DomainError(f"tau must be positive and finite, got {tau!r}")


def gaussian_leakage(spec: CovarianceSpec, tau: float) -> float:
    """Coverage penalty ``sqrt(I/2)`` for a Gaussian noisy-screening channel.

    For a full covariance this is ``sqrt(log det(I + Sigma/tau^2) / 4)``;
    for a trace cap it is ``sqrt((q/4) log(1 + v/(q tau^2)))``, which
    dominates the former whenever ``tr(Sigma) <= v``.
    """
    _check_tau(tau)
    if isinstance(spec, FullCovariance):
        return math.sqrt(0.25 * log_det_scaled(spec.sigma, tau))
    if isinstance(spec, TraceBound):
        return math.sqrt(0.25 * spec.q * math.log1p(spec.v / (spec.q * tau * tau)))
    raise TypeError(f"unsupported covariance spec {type(spec).__name__}")


def gaussian_noncoverage_bound(alpha: float, spec: CovarianceSpec, tau: float) -> BoundReport:
    _check_alpha(alpha)
    leak = gaussian_leakage(spec, tau)
    if isinstance(spec, FullCovariance):
        return BoundReport.from_terms(
            alpha, leak, Provenance.GAUSSIAN_FULL, tau=tau, sigma=spec.sigma.to_dict()
        )
    return BoundReport.from_terms(alpha, leak, Provenance.GAUSSIAN_TRACE, tau=tau, q=spec.q, v=spec.v)


def calibrate_tau(q: int, v: float, epsilon: float) -> float:
    """Smallest noise scale whose trace-cap leakage term equals ``epsilon``.

    Inverts ``epsilon = sqrt((q/4) log(1 + v/(q tau^2)))`` in closed form.
    """
    if int(q) != q or q < 1:
        raise DomainError(f"q must be a positive integer, got {q!r}")
    if not (v > 0 and math.isfinite(v)):
        raise DomainError(f"trace cap must be positive, got {v!r}")
    if not (epsilon > 0 and math.isfinite(epsilon)):
        raise DomainError(f"epsilon must be positive, got {epsilon!r}")
    return math.sqrt(v / (q * math.expm1(4.0 * epsilon * epsilon / q)))


def calibrate_tau_full(sigma, epsilon: float) -> float:
    """Noise scale making the full-covariance leakage term equal ``epsilon``.

    No closed form exists for a general spectrum, so the monotone map
    ``tau -> gaussian_leakage(FullCovariance(sigma), tau)`` is inverted by
    bracketed root finding to a relative tolerance of 1e-10.
    """
    if not (epsilon > 0 and math.isfinite(epsilon)):
        raise DomainError(f"epsilon must be positive, got {epsilon!r}")
    spec = FullCovariance(sigma)
    if spec.sigma.trace <= 0.0:
        raise DomainError("sigma is zero; every tau gives zero leakage")
    # the trace-cap tau is an upper bracket; the full leakage there is <= epsilon
    hi = calibrate_tau(spec.q, spec.sigma.trace, epsilon)
    lo = hi
    while gaussian_leakage(spec, lo) < epsilon:
        lo *= 0.5
    if lo == hi:
        return hi

    def gap(log_tau: float) -> float:
        return gaussian_leakage(spec, math.exp(log_tau)) - epsilon

    log_tau = optimize.brentq(gap, math.log(lo), math.log(hi), xtol=1e-14, rtol=1e-13)
    return math.exp(log_tau)


def finite_message_bound(alpha: float, entropy_nats: float) -> BoundReport:
    """``alpha + sqrt(H(W)/2)`` for a selector reading a finite message ``W``."""
    _check_alpha(alpha)
    if not (entropy_nats >= 0 and math.isfinite(entropy_nats)):
        raise DomainError(f"entropy must be finite and nonnegative, got {entropy_nats!r}")
    return BoundReport.from_terms(
        alpha, math.sqrt(entropy_nats / 2.0), Provenance.FINITE_MESSAGE_ENTROPY,
        entropy_nats=entropy_nats,
    )


def finite_message_alphabet_bound(alpha: float, alphabet_size: int) -> BoundReport:
    if int(alphabet_size) != alphabet_size or alphabet_size < 1:
        raise DomainError(f"alphabet size must be a positive integer, got {alphabet_size!r}")
    base = finite_message_bound(alpha, math.log(alphabet_size))
    return BoundReport(
        base.raw, base.leakage_term, Provenance.FINITE_MESSAGE_ALPHABET,
        {"alpha": alpha, "alphabet_size": int(alphabet_size)},
    )


def asymptotic_transfer(alpha: float, r_m: float, eta_m: float) -> BoundReport:
    """Bound for a sequence of problems with fixed-target slack ``r_m``
    and a mutual-information cap ``eta_m``."""
    _check_alpha(alpha)
    for name, x in (("r_m", r_m), ("eta_m", eta_m)):
        if not (x >= 0 and math.isfinite(x)):
            raise DomainError(f"{name} must be finite and nonnegative, got {x!r}")
    return BoundReport(
        alpha + r_m + math.sqrt(eta_m / 2.0),
        r_m + math.sqrt(eta_m / 2.0),
        Provenance.ASYMPTOTIC_TRANSFER,
        {"alpha": alpha, "r_m": r_m, "eta_m": eta_m},
    )


def interval_trace_cap(lengths: Sequence[float]) -> float:
    """Trace cap ``sum(B_j^2)/4`` for summary components confined to
    intervals of lengths ``B_j``."""
    lengths = list(lengths)
    if not lengths:
        raise DomainError("need at least one interval length")
    if any(not (b > 0 and math.isfinite(b)) for b in lengths):
        raise DomainError("interval lengths must be positive and finite")
    return 0.25 * math.fsum(b * b for b in lengths)
