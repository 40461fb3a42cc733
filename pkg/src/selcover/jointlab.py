"""Exact leakage arithmetic on finite joint laws of (selection, data).

A :class:`JointModel` stores the joint probabilities ``pi(s, d)`` of the
selected object and the inferential data, together with the noncoverage
table ``E[s, d]``, true when the confidence set for object ``s`` computed
from data ``d`` misses its target. Targets and confidence sets enter the
coverage bound only through these events, so nothing else is stored.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np

from selcover.bounds import BoundReport, Provenance
from selcover.errors import DomainError, UndefinedConditionalError, ValidationError
from selcover.probkit import SUM_TOL, FiniteDistribution, tv_distance


@dataclass(frozen=True, eq=False)
class JointModel:
    selection_labels: tuple[str, ...]
    data_labels: tuple[str, ...]
    joint: np.ndarray
    noncoverage: np.ndarray

    def __post_init__(self):
        sel = tuple(str(s) for s in self.selection_labels)
        dat = tuple(str(d) for d in self.data_labels)
        if len(set(sel)) != len(sel) or len(set(dat)) != len(dat):
            raise ValidationError("selection and data labels must be unique")
        joint = np.array(self.joint, dtype=float)
        if joint.shape != (len(sel), len(dat)) or joint.size == 0:
            raise ValidationError(
                f"joint has shape {joint.shape}, expected ({len(sel)}, {len(dat)})"
            )
        if not np.all(np.isfinite(joint)) or np.any(joint < 0):
            raise ValidationError("joint entries must be finite and nonnegative")
        total = math.fsum(joint.ravel())
        if abs(total - 1.0) > SUM_TOL:
            raise ValidationError(f"joint sums to {total!r}, not 1")
        if total != 1.0:
            joint = joint / total
        raw_nc = np.asarray(self.noncoverage)
        if raw_nc.shape != joint.shape:
            raise ValidationError(
                f"noncoverage has shape {raw_nc.shape}, expected {joint.shape}"
            )
        if raw_nc.dtype != bool and not np.all(np.isin(raw_nc, (0, 1))):
            raise ValidationError("noncoverage entries must be booleans")
        nc = raw_nc.astype(bool)
        joint.setflags(write=False)
        nc.setflags(write=False)
        object.__setattr__(self, "selection_labels", sel)
        object.__setattr__(self, "data_labels", dat)
        object.__setattr__(self, "joint", joint)
        object.__setattr__(self, "noncoverage", nc)

    @classmethod
    def from_arrays(cls, joint, noncoverage, selection_labels=None, data_labels=None):
        joint = np.asarray(joint, dtype=float)
        if joint.ndim != 2:
            raise ValidationError("joint must be a two-dimensional array")
        if selection_labels is None:
            selection_labels = [f"s{i}" for i in range(joint.shape[0])]
        if data_labels is None:
            data_labels = [f"d{i}" for i in range(joint.shape[1])]
        return cls(tuple(selection_labels), tuple(data_labels), joint, noncoverage)

    @classmethod
    def from_dict(cls, payload: dict) -> "JointModel":
        missing = [k for k in ("selection_labels", "data_labels", "joint", "noncoverage")
                   if k not in payload]
        if missing:
            raise ValidationError(f"joint model is missing field(s): {', '.join(missing)}")
        try:
            joint = np.array(payload["joint"], dtype=float)
        except (TypeError, ValueError):
            raise ValidationError("joint must be a rectangular array of numbers") from None
        noncoverage = payload["noncoverage"]
        flat = np.array(noncoverage, dtype=object).ravel()
        if not all(isinstance(x, bool) for x in flat):
            raise ValidationError("noncoverage must be an array of booleans")
        return cls(
            tuple(payload["selection_labels"]),
            tuple(payload["data_labels"]),
            joint,
            np.array(noncoverage, dtype=bool),
        )

    def to_dict(self) -> dict:
        return {
            "selection_labels": list(self.selection_labels),
            "data_labels": list(self.data_labels),
            "joint": self.joint.tolist(),
            "noncoverage": self.noncoverage.tolist(),
        }

    @property
    def selection_probs(self) -> np.ndarray:
        return self.joint.sum(axis=1)

    def permuted(self, sel_order: Sequence[int], data_order: Sequence[int]) -> "JointModel":
        sel_order = list(sel_order)
        data_order = list(data_order)
        return JointModel(
            tuple(self.selection_labels[i] for i in sel_order),
            tuple(self.data_labels[i] for i in data_order),
            self.joint[np.ix_(sel_order, data_order)],
            self.noncoverage[np.ix_(sel_order, data_order)],
        )


def random_model(rng: np.random.Generator, n_sel: int | None = None,
                 n_data: int | None = None) -> JointModel:
    """Random full-support model: uniform joint entries normalized, fair-coin
    noncoverage entries."""
    n_sel = n_sel or int(rng.integers(1, 6))
    n_data = n_data or int(rng.integers(1, 9))
    joint = rng.uniform(size=(n_sel, n_data))
    joint /= joint.sum()
    noncoverage = rng.integers(0, 2, size=(n_sel, n_data)).astype(bool)
    return JointModel.from_arrays(joint, noncoverage)


def marginal_data(j: JointModel) -> FiniteDistribution:
    return FiniteDistribution(j.data_labels, tuple(j.joint.sum(axis=0)))


def conditional_data(j: JointModel, s: str) -> FiniteDistribution:
    """Law of the data given that object ``s`` was selected."""
    try:
        i = j.selection_labels.index(str(s))
    except ValueError:
        raise ValidationError(f"unknown selection label {s!r}") from None
    row = j.joint[i]
    mass = math.fsum(row)
    if mass <= 0.0:
        raise UndefinedConditionalError(f"selection {s!r} has probability zero")
    return FiniteDistribution(j.data_labels, tuple(row / mass))


def tv_leakage(j: JointModel) -> float:
    """Average over the selection of the TV distance between the conditional
    and marginal laws of the data."""
    mu = marginal_data(j)
    terms = []
    for s, w in zip(j.selection_labels, j.selection_probs):
        if w > 0.0:
            terms.append(w * tv_distance(conditional_data(j, s), mu))
    return min(1.0, math.fsum(terms))


def mutual_information(j: JointModel) -> float:
    """KL divergence of the joint law from the product of its marginals, in nats."""
    row = j.joint.sum(axis=1)
    col = j.joint.sum(axis=0)
    terms = []
    for i, k in zip(*np.nonzero(j.joint > 0.0)):
        pi = j.joint[i, k]
        terms.append(pi * math.log(pi / (row[i] * col[k])))
    return max(0.0, math.fsum(terms))


def pinsker_bound(j: JointModel) -> float:
    return math.sqrt(mutual_information(j) / 2.0)


def fixed_target_alpha(j: JointModel) -> float:
    """Largest marginal noncoverage probability over all fixed objects.

    This is the smallest level at which the fixed-target guarantee holds
    for every selectable object.
    """
    mu = j.joint.sum(axis=0)
    return max(math.fsum(mu[row]) for row in j.noncoverage)


def selected_noncoverage(j: JointModel) -> float:
    """Exact probability that the interval for the selected object misses."""
    return math.fsum(j.joint[j.noncoverage])


class Theorem1Bounds(NamedTuple):
    tv: BoundReport
    pinsker: BoundReport


def theorem1_bound(j: JointModel, alpha: float | None = None) -> Theorem1Bounds:
    """Selected-target noncoverage bounds ``alpha + leakage`` and
    ``alpha + sqrt(I/2)``.

    ``alpha`` defaults to :func:`fixed_target_alpha`; a supplied level must
    not be below it, since the fixed-target premise would then fail.
    """
    floor = fixed_target_alpha(j)
    if alpha is None:
        alpha = floor
    elif not (0.0 <= alpha <= 1.0):
        raise DomainError(f"alpha must lie in [0, 1], got {alpha!r}")
    elif alpha < floor - 1e-12:
        raise ValidationError(
            f"alpha={alpha!r} is below the model's fixed-target noncoverage {floor!r}"
        )
    return Theorem1Bounds(
        tv=BoundReport.from_terms(alpha, tv_leakage(j), Provenance.TV),
        pinsker=BoundReport.from_terms(alpha, pinsker_bound(j), Provenance.PINSKER),
    )
