"""Per-subflow SRTT, service-time, and wait-time estimation.

All update functions mutate the passed state in place and return it. The
arithmetic is plain `a*old + b*new`, so exact number types (fractions) can
be passed through for exactness tests.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

from .core import SERVICE_ESTIMATE_FLOOR_S, SubflowState

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class EwmaConfig:
    """Smoothing coefficient for all exponentially weighted averages."""

    alpha: float = 0.8

    def __post_init__(self) -> None:
        if not 0 < self.alpha < 1:
            raise ValueError(f"alpha must be in (0, 1), got {self.alpha}")


DEFAULT_EWMA = EwmaConfig()


def ewma(old, sample, alpha):
    return alpha * old + (1 - alpha) * sample


def _check_nonnegative(value, what: str):
    assert value >= 0, f"{what} must be non-negative, got {value}"
    if value < 0:  # reachable only with assertions disabled
        logger.warning("clamping negative %s sample %r to 0", what, value)
        return value * 0
    return value


def update_service_estimate(
    s: SubflowState, x, cfg: EwmaConfig = DEFAULT_EWMA
) -> SubflowState:
    """Fold one measured service time into the smoothed estimate."""
    x = _check_nonnegative(x, "service time")
    s.service_estimate = ewma(s.service_estimate, x, cfg.alpha)
    return s


def update_wait_estimate(
    s: SubflowState, w, cfg: EwmaConfig = DEFAULT_EWMA
) -> SubflowState:
    """Fold one wait-time observation into the smoothed wait estimate."""
    w = _check_nonnegative(w, "wait time")
    s.wait_estimate = ewma(s.wait_estimate, w, cfg.alpha)
    return s


def update_srtt(s: SubflowState, rtt_sample, cfg: EwmaConfig = DEFAULT_EWMA) -> SubflowState:
    """Fold one RTT sample into the smoothed RTT; the first sample sets it."""
    rtt_sample = _check_nonnegative(rtt_sample, "rtt")
    if s.srtt is None:
        s.srtt = rtt_sample
    else:
        s.srtt = ewma(s.srtt, rtt_sample, cfg.alpha)
    return s


def estimate_wait(s: SubflowState):
    """Expected wait of a newly queued packet from the dequeue-rate sample.

    With an empty queue there is no wait. With a stalled sampling window
    (no dequeues observed) the dequeue rate is unknown, so fall back to
    occupancy times the service estimate.
    """
    n = s.occupancy
    if n == 0:
        return 0.0
    delta_packets, delta_t = s.dequeue_rate_sample
    if delta_packets <= 0 or delta_t <= 0:
        logger.debug(
            "subflow %d: no dequeues in sampling window, using n*S fallback", s.id
        )
        return n * s.service_estimate
    return n * delta_t / delta_packets


def derive_service_from_rtt(s: SubflowState, floor=SERVICE_ESTIMATE_FLOOR_S):
    """Service estimate as smoothed RTT minus smoothed wait, floored positive."""
    srtt = s.srtt if s.srtt is not None else floor
    value = srtt - s.wait_estimate
    return value if value > floor else floor
