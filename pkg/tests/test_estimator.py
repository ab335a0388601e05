"""Unit tests for the smoothing and wait-approximation arithmetic.

Exactness claims (contraction, geometric convergence, linearity) are tested
over Fraction arithmetic so float rounding cannot blur them; the float code
path is identical.
"""

from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from mpsched.core import SERVICE_ESTIMATE_FLOOR_S, SubflowState
from mpsched.estimator import (
    DEFAULT_EWMA,
    EwmaConfig,
    derive_service_from_rtt,
    estimate_wait,
    ewma,
    update_service_estimate,
    update_srtt,
    update_wait_estimate,
)

ALPHA = Fraction(4, 5)
EXACT_CFG = EwmaConfig(alpha=ALPHA)

fractions_pos = st.fractions(min_value=0, max_value=1000)


def flow(**kwargs) -> SubflowState:
    return SubflowState(id=1, **kwargs)


class TestServiceEstimate:
    def test_blends_toward_sample(self):
        s = flow(service_estimate=0.010)
        update_service_estimate(s, 0.020)
        assert s.service_estimate == pytest.approx(0.012)

    def test_fixed_point(self):
        s = flow(service_estimate=0.037)
        update_service_estimate(s, 0.037)
        assert s.service_estimate == pytest.approx(0.037)

    def test_zero_sample(self):
        s = flow(service_estimate=0.100)
        update_service_estimate(s, 0.0)
        assert s.service_estimate == pytest.approx(0.080)

    def test_negative_sample_asserts(self):
        with pytest.raises(AssertionError):
            update_service_estimate(flow(), -0.001)

    @given(old=fractions_pos, x=fractions_pos)
    def test_contraction_exact(self, old, x):
        s = flow(service_estimate=old)
        update_service_estimate(s, x, EXACT_CFG)
        assert abs(s.service_estimate - x) == ALPHA * abs(old - x)

    @given(old=fractions_pos, x=fractions_pos, n=st.integers(min_value=1, max_value=40))
    def test_geometric_convergence_exact(self, old, x, n):
        s = flow(service_estimate=old)
        for _ in range(n):
            update_service_estimate(s, x, EXACT_CFG)
        assert abs(s.service_estimate - x) == ALPHA**n * abs(old - x)


class TestWaitEstimate:
    def test_blends(self):
        s = flow(wait_estimate=0.008)
        update_wait_estimate(s, 0.012)
        assert s.wait_estimate == pytest.approx(0.0088)

    def test_zero_fixed_point(self):
        s = flow(wait_estimate=0.0)
        update_wait_estimate(s, 0.0)
        assert s.wait_estimate == 0.0

    def test_decay_toward_zero(self):
        s = flow(wait_estimate=0.010)
        update_wait_estimate(s, 0.0)
        assert s.wait_estimate == pytest.approx(0.008)


class TestSrtt:
    def test_first_sample_sets_directly(self):
        s = flow()
        update_srtt(s, 0.030)
        assert s.srtt == 0.030

    def test_blends_after_first(self):
        s = flow(srtt=0.040)
        update_srtt(s, 0.060)
        assert s.srtt == pytest.approx(0.044)

    def test_fixed_point(self):
        s = flow(srtt=0.025)
        update_srtt(s, 0.025)
        assert s.srtt == pytest.approx(0.025)


class TestEstimateWait:
    def test_rate_based(self):
        s = flow(dequeue_rate_sample=(10, 0.020))
        s.counters.num_queued = 5
        assert estimate_wait(s) == pytest.approx(0.010)

    def test_empty_queue_no_wait(self):
        s = flow(dequeue_rate_sample=(10, 0.020))
        assert estimate_wait(s) == 0.0

    def test_stalled_window_falls_back(self):
        s = flow(dequeue_rate_sample=(0, 0.020), service_estimate=0.004)
        s.counters.num_queued = 3
        assert estimate_wait(s) == pytest.approx(0.012)

    @given(
        n1=st.integers(min_value=0, max_value=100),
        n2=st.integers(min_value=0, max_value=100),
        dp=st.integers(min_value=1, max_value=50),
        dt=st.fractions(min_value=Fraction(1, 1000), max_value=1),
    )
    def test_monotone_in_occupancy(self, n1, n2, dp, dt):
        lo, hi = sorted((n1, n2))
        s_lo = flow(dequeue_rate_sample=(dp, dt))
        s_lo.counters.num_queued = lo
        s_hi = flow(dequeue_rate_sample=(dp, dt))
        s_hi.counters.num_queued = hi
        assert estimate_wait(s_lo) <= estimate_wait(s_hi)


class TestDeriveServiceFromRtt:
    def test_subtracts_wait(self):
        s = flow(srtt=0.050, wait_estimate=0.010)
        assert derive_service_from_rtt(s) == pytest.approx(0.040)

    def test_no_queueing_gives_rtt(self):
        s = flow(srtt=0.050, wait_estimate=0.0)
        assert derive_service_from_rtt(s) == pytest.approx(0.050)

    def test_floor_when_wait_exceeds_rtt(self):
        s = flow(srtt=0.010, wait_estimate=0.020)
        assert derive_service_from_rtt(s) == SERVICE_ESTIMATE_FLOOR_S


class TestTwoPathAgreement:
    @given(
        rtts=st.lists(fractions_pos, min_size=1, max_size=30),
        waits=st.lists(fractions_pos, min_size=1, max_size=30),
        srtt0=fractions_pos,
        wait0=fractions_pos,
    )
    def test_direct_equals_decomposed(self, rtts, waits, srtt0, wait0):
        # Smoothing rtt - wait directly, or smoothing rtt and wait
        # separately and subtracting, must agree exactly when seeded
        # identically: the smoothing is linear.
        n = min(len(rtts), len(waits))
        samples = [(r, w) for r, w in zip(rtts[:n], waits[:n]) if r >= w]
        direct = flow(service_estimate=srtt0 - wait0)
        decomposed = flow(srtt=srtt0, wait_estimate=wait0)
        for rtt, wait in samples:
            update_service_estimate(direct, rtt - wait, EXACT_CFG)
            update_srtt(decomposed, rtt, EXACT_CFG)
            update_wait_estimate(decomposed, wait, EXACT_CFG)
        assert (
            decomposed.srtt - decomposed.wait_estimate == direct.service_estimate
        )


class TestEwmaConfig:
    def test_rejects_out_of_range(self):
        with pytest.raises(ValueError):
            EwmaConfig(alpha=0.0)
        with pytest.raises(ValueError):
            EwmaConfig(alpha=1.0)

    def test_default_alpha(self):
        assert DEFAULT_EWMA.alpha == 0.8

    @given(old=fractions_pos, sample=fractions_pos)
    def test_ewma_between_operands(self, old, sample):
        out = ewma(old, sample, ALPHA)
        lo, hi = sorted((old, sample))
        assert lo <= out <= hi
