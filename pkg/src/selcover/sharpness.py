"""Three-point construction on which the leakage bound holds with equality.

Data take values in ``{a0, a1, b}``. Given selection ``j`` (each with
probability 1/2), the data law shifts mass ``delta`` from the other ``a``
atom onto ``a_j``, and the interval for object ``j`` misses exactly when
``D = a_j``. Each fixed interval then has noncoverage ``alpha``, the
leakage is ``delta``, and the selected interval misses with probability
``alpha + delta``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from selcover import jointlab
from selcover.errors import DomainError
from selcover.jointlab import JointModel
from selcover.probkit import tv_distance

RESIDUAL_TOL = 1e-12
DATA_LABELS = ("a0", "a1", "b")
SELECTION_LABELS = ("0", "1")


@dataclass(frozen=True)
class SharpnessInstance:
    alpha: float
    delta: float
    model: JointModel

    def __post_init__(self):
        _check_params(self.alpha, self.delta)


def _check_params(alpha: float, delta: float) -> None:
    if not (0.0 < alpha <= 0.5):
        raise DomainError(f"alpha must lie in (0, 1/2], got {alpha!r}")
    if not (0.0 <= delta <= alpha):
        raise DomainError(f"delta must lie in [0, alpha], got {delta!r}")


def build_sharpness_instance(alpha: float, delta: float) -> SharpnessInstance:
    _check_params(alpha, delta)
    mu0 = [alpha + delta, alpha - delta, 1.0 - 2.0 * alpha]
    mu1 = [alpha - delta, alpha + delta, 1.0 - 2.0 * alpha]
    joint = 0.5 * np.array([mu0, mu1])
    noncoverage = np.array([[True, False, False], [False, True, False]])
    model = JointModel(SELECTION_LABELS, DATA_LABELS, joint, noncoverage)
    return SharpnessInstance(alpha, delta, model)


@dataclass(frozen=True)
class Certification:
    quantities: dict[str, float]
    residuals: dict[str, float]
    tolerance: float = RESIDUAL_TOL

    @property
    def passed(self) -> bool:
        return all(r <= self.tolerance for r in self.residuals.values())

    def to_dict(self) -> dict:
        return {
            "quantities": self.quantities,
            "residuals": self.residuals,
            "tolerance": self.tolerance,
            "pass": self.passed,
        }


def certify_sharpness(instance: SharpnessInstance) -> Certification:
    """Recompute the instance's quantities from its joint model and compare
    them against the closed-form values.

    Failure is reported in the returned record, never raised.
    """
    a, d, m = instance.alpha, instance.delta, instance.model
    mu = jointlab.marginal_data(m)
    leak = jointlab.tv_leakage(m)
    fixed = jointlab.fixed_target_alpha(m)
    selected = jointlab.selected_noncoverage(m)
    bound = jointlab.theorem1_bound(m).tv.raw

    tv_per_row = [
        tv_distance(jointlab.conditional_data(m, s), mu)
        for s, w in zip(m.selection_labels, m.selection_probs) if w > 0
    ]
    expected_mu = np.array([a, a, 1.0 - 2.0 * a])
    residuals = {
        "marginal": float(np.max(np.abs(mu.as_array() - expected_mu))),
        "tv_leakage": abs(leak - d),
        "tv_per_selection": max(abs(t - d) for t in tv_per_row),
        "fixed_target_alpha": abs(fixed - a),
        "selected_noncoverage": abs(selected - (a + d)),
        "bound_gap": abs(selected - bound),
    }
    quantities = {
        "alpha": a,
        "delta": d,
        "marginal_a0": mu.probs[0],
        "marginal_a1": mu.probs[1],
        "marginal_b": mu.probs[2],
        "tv_leakage": leak,
        "fixed_target_alpha": fixed,
        "selected_noncoverage": selected,
        "tv_bound_raw": bound,
    }
    return Certification(quantities, residuals)
