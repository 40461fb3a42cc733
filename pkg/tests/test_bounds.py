import math

import numpy as np
import pytest

from selcover.bounds import (
    FullCovariance,
    Provenance,
    TraceBound,
    asymptotic_transfer,
    calibrate_tau,
    calibrate_tau_full,
    finite_message_alphabet_bound,
    finite_message_bound,
    gaussian_leakage,
    gaussian_noncoverage_bound,
    interval_trace_cap,
)
from selcover.errors import DomainError, NotPositiveSemidefiniteError
from selcover.probkit import FiniteDistribution, entropy

# high-precision reference values (mpmath, 50 digits)
SQRT_LOG2_OVER_2 = 0.58870501125773734551
SQRT_LOG2_OVER_4 = 0.41627730557884887818
TAU_Q1_V1_EPS01 = 4.9500841653903048108
TAU_Q1_V1_EPS05 = 0.76287397836689017871


def random_psd(rng, q):
    a = rng.normal(size=(q, int(rng.integers(1, q + 1))))
    return a @ a.T


class TestGaussianLeakage:
    def test_no_signal(self):
        assert gaussian_leakage(FullCovariance(np.zeros((3, 3))), 0.3) == 0.0
        assert gaussian_leakage(TraceBound(4, 0.0), 0.3) == 0.0

    def test_identity(self):
        assert gaussian_leakage(FullCovariance(np.eye(2)), 1.0) == pytest.approx(SQRT_LOG2_OVER_2, abs=1e-15)

    def test_trace_scalar(self):
        assert gaussian_leakage(TraceBound(1, 1.0), 1.0) == pytest.approx(SQRT_LOG2_OVER_4, abs=1e-15)

    def test_trace_dominates_full(self):
        rng = np.random.default_rng(21)
        for _ in range(200):
            q = int(rng.integers(1, 9))
            s = random_psd(rng, q)
            tau = float(rng.uniform(0.05, 5.0))
            full = gaussian_leakage(FullCovariance(s), tau)
            capped = gaussian_leakage(TraceBound(q, float(np.trace(s))), tau)
            assert capped - full >= -1e-12

    @pytest.mark.parametrize("q", [1, 2, 5, 20])
    @pytest.mark.parametrize("v", [0.1, 1.0, 10.0])
    def test_equal_eigenvalues(self, q, v):
        for tau in (0.1, 0.5, 2.0):
            full = gaussian_leakage(FullCovariance(v / q * np.eye(q)), tau)
            assert full == pytest.approx(gaussian_leakage(TraceBound(q, v), tau), abs=1e-12)

    def test_strictly_decreasing_in_tau(self):
        taus = np.geomspace(1e-3, 1e4, 60)
        vals = [gaussian_leakage(TraceBound(3, 2.0), t) for t in taus]
        assert all(b < a for a, b in zip(vals, vals[1:]))
        assert vals[-1] < 1e-4

    def test_non_psd_propagates(self):
        with pytest.raises(NotPositiveSemidefiniteError):
            gaussian_leakage(FullCovariance(np.diag([1.0, -0.3])), 1.0)

    @pytest.mark.parametrize("q,v", [(0, 1.0), (1.5, 1.0), (2, -1.0)])
    def test_bad_trace_spec(self, q, v):
        with pytest.raises(DomainError):
            TraceBound(q, v)


class TestNoncoverageBound:
    def test_zero_trace(self):
        r = gaussian_noncoverage_bound(0.05, TraceBound(3, 0.0), 1.0)
        assert r.value == 0.05

    def test_trace_example(self):
        r = gaussian_noncoverage_bound(0.05, TraceBound(1, 1.0), 1.0)
        assert r.value == pytest.approx(0.05 + SQRT_LOG2_OVER_4, abs=1e-15)
        assert r.provenance is Provenance.GAUSSIAN_TRACE
        assert r.raw == r.inputs["alpha"] + r.leakage_term

    def test_clamped(self):
        r = gaussian_noncoverage_bound(0.9, FullCovariance(np.eye(2)), 0.1)
        assert r.leakage_term > 0.1
        assert r.value == 1.0
        assert r.raw > 1.0
        assert r.provenance is Provenance.GAUSSIAN_FULL

    def test_report_dict(self):
        d = gaussian_noncoverage_bound(0.05, FullCovariance(np.eye(2)), 1.0).to_dict()
        assert set(d) == {"value", "raw", "leakage_term", "provenance", "inputs"}
        assert d["inputs"]["sigma"]["dim"] == 2

    def test_alpha_range(self):
        with pytest.raises(DomainError):
            gaussian_noncoverage_bound(1.5, TraceBound(1, 1.0), 1.0)


class TestCalibrate:
    def test_small_epsilon(self):
        assert calibrate_tau(1, 1.0, 0.1) == pytest.approx(TAU_Q1_V1_EPS01, rel=1e-13)

    def test_closed_form_e(self):
        tau = calibrate_tau(1, 1.0, 0.5)
        assert tau == pytest.approx(1 / math.sqrt(math.e - 1), rel=1e-14)
        assert tau == pytest.approx(TAU_Q1_V1_EPS05, rel=1e-14)

    def test_monotone_in_epsilon(self):
        taus = [calibrate_tau(4, 2.0, e) for e in np.linspace(0.01, 5.0, 50)]
        assert all(b < a for a, b in zip(taus, taus[1:]))
        assert taus[-1] < 1e-3

    @pytest.mark.parametrize("q", [1, 2, 5, 50])
    @pytest.mark.parametrize("v", [0.1, 1.0, 10.0])
    @pytest.mark.parametrize("eps", [0.01, 0.05, 0.1, 0.3])
    def test_round_trip(self, q, v, eps):
        tau = calibrate_tau(q, v, eps)
        assert abs(gaussian_leakage(TraceBound(q, v), tau) - eps) <= 1e-10 * eps

    @pytest.mark.parametrize("args", [(0, 1.0, 0.1), (1, 0.0, 0.1), (1, 1.0, 0.0), (1, 1.0, -1.0)])
    def test_domain(self, args):
        with pytest.raises(DomainError):
            calibrate_tau(*args)

    def test_full_matches_trace_for_isotropic(self):
        q, v = 5, 2.0
        tau = calibrate_tau_full(v / q * np.eye(q), 0.1)
        assert tau == pytest.approx(calibrate_tau(q, v, 0.1), rel=1e-10)

    def test_full_round_trip(self):
        rng = np.random.default_rng(31)
        for _ in range(30):
            q = int(rng.integers(1, 7))
            s = random_psd(rng, q)
            eps = float(rng.uniform(0.01, 0.5))
            tau = calibrate_tau_full(s, eps)
            assert gaussian_leakage(FullCovariance(s), tau) == pytest.approx(eps, rel=1e-10)
            # the trace cap asks for at least as much noise
            assert tau <= calibrate_tau(q, float(np.trace(s)), eps) * (1 + 1e-12)


class TestFiniteMessage:
    def test_constant_message(self):
        assert finite_message_bound(0.05, 0.0).value == 0.05

    def test_binary(self):
        r = finite_message_bound(0.05, math.log(2))
        assert r.value == pytest.approx(0.6387050112577373, abs=1e-15)
        assert r.provenance is Provenance.FINITE_MESSAGE_ENTROPY

    def test_alphabet_one(self):
        r = finite_message_alphabet_bound(0.05, 1)
        assert r.value == 0.05
        assert r.provenance is Provenance.FINITE_MESSAGE_ALPHABET

    @pytest.mark.parametrize("k", [1, 2, 10, 1000])
    def test_uniform_entropy_matches_alphabet(self, k):
        h = entropy(FiniteDistribution.uniform(k))
        assert finite_message_bound(0.05, h).value == finite_message_alphabet_bound(0.05, k).value

    @pytest.mark.parametrize("k", [3, 7, 12345])
    def test_uniform_entropy_matches_alphabet_to_rounding(self, k):
        # 1/k is inexact here, so agreement is only to a few ulps
        h = entropy(FiniteDistribution.uniform(k))
        assert finite_message_bound(0.05, h).value == pytest.approx(
            finite_message_alphabet_bound(0.05, k).value, abs=1e-15)

    def test_negative_entropy(self):
        with pytest.raises(DomainError):
            finite_message_bound(0.05, -0.1)


class TestTransfer:
    def test_sample_splitting(self):
        assert asymptotic_transfer(0.05, 0.0, 0.0).value == 0.05

    def test_example(self):
        assert asymptotic_transfer(0.05, 0.01, 0.02).value == pytest.approx(0.16, abs=1e-15)

    def test_clamped(self):
        r = asymptotic_transfer(0.05, 0.01, 2.0)
        assert r.raw == pytest.approx(1.06)
        assert r.value == 1.0
        assert r.provenance is Provenance.ASYMPTOTIC_TRANSFER

    def test_negative(self):
        with pytest.raises(DomainError):
            asymptotic_transfer(0.05, -0.01, 0.0)


class TestIntervalCap:
    def test_single(self):
        assert interval_trace_cap([2.0]) == 1.0

    def test_four_unit(self):
        assert interval_trace_cap([1, 1, 1, 1]) == 1.0

    def test_shrinks(self):
        assert interval_trace_cap([1e-8] * 3) < 1e-15

    @pytest.mark.parametrize("bad", [[], [0.0], [1.0, -2.0]])
    def test_domain(self, bad):
        with pytest.raises(DomainError):
            interval_trace_cap(bad)
