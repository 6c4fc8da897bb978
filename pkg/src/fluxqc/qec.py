"""Steane-code failure probabilities and error thresholds for two architectures.

The error model has four independent per-step probabilities: storage, gate,
data-during-measurement and outcome errors.  A register with direct
multi-qubit parity measurements ("ramm") measures each syndrome in one shot;
the reference architecture encodes syndromes through 24 ancillas with one- and
two-qubit gates.  Failure bookkeeping follows second-order combinatorics: two
errors on different qubits always fail, one outcome error plus any qubit
error fails, two outcome errors fail, except that a pair of errors confined
to the current syndrome-recovery window is attributed to the next period.

All analytic expressions here are polynomial truncations; the Monte Carlo
oracle samples the same event model so the two agree to the sampling noise at
small rates.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .braid import wilson_interval

N_CODE_QUBITS = 7
QUBIT_PAIRS = N_CODE_QUBITS * (N_CODE_QUBITS - 1) // 2


@dataclass(frozen=True)
class ErrorRates:
    """Per-time-step error probabilities; all channels independent."""

    storage: float
    gate: float
    data_measure: float
    outcome: float

    def __post_init__(self):
        for name, val in (("storage", self.storage), ("gate", self.gate),
                          ("data_measure", self.data_measure),
                          ("outcome", self.outcome)):
            if not 0.0 <= val <= 0.5:
                raise ValueError(f"{name} rate must lie in [0, 0.5], got {val}")

    @staticmethod
    def from_ratios(eps_st: float, ratio_g: float, ratio_dm: float,
                    ratio_om: float) -> "ErrorRates":
        return ErrorRates(storage=eps_st, gate=ratio_g * eps_st,
                          data_measure=ratio_dm * eps_st,
                          outcome=ratio_om * eps_st)


@dataclass(frozen=True)
class FailureComponents:
    """Ingredients of the single-period failure probability.

    ``om_channels``/``om_rate`` record the outcome-error decomposition used by
    the Monte Carlo oracle; ``rates`` is kept because the waiting-time and
    gate-propagation terms need the raw storage and gate rates.
    """

    p_om_1: float
    p_om_2: float
    p_sr: float
    n0: int
    rates: ErrorRates
    om_channels: int
    om_rate: float
    n_qubits: int = N_CODE_QUBITS


def ramm_components(rates: ErrorRates) -> FailureComponents:
    """Direct-measurement architecture: 6 syndrome measurements, 24/7 per qubit.

    Syndromes take 6 time steps plus one recovery step (n0 = 7).
    """
    p_sr = (24.0 / 7.0) * rates.data_measure + (24.0 / 7.0) * rates.storage \
        + rates.gate / 7.0
    return FailureComponents(
        p_om_1=6.0 * rates.outcome,
        p_om_2=15.0 * rates.outcome ** 2,
        p_sr=p_sr, n0=7, rates=rates, om_channels=6, om_rate=rates.outcome)


def reference_components(rates: ErrorRates) -> FailureComponents:
    """Single/two-qubit architecture: 24 ancillas encode the six syndromes.

    Ancilla errors act like outcome errors; initialization uses 13/4 gates per
    ancilla, the syndrome block 9 time steps with 38/7 gates per data qubit,
    recovery one gate (n0 = 10).
    """
    p_init = rates.outcome + rates.data_measure
    p_synd = (13.0 / 4.0) * rates.gate + (15.0 / 4.0) * rates.storage \
        + rates.gate + rates.outcome + 3.0 * rates.storage
    channel = p_init + p_synd
    p_sr = (38.0 / 7.0) * rates.gate + (25.0 / 7.0) * rates.storage \
        + rates.gate / 7.0 + (6.0 / 7.0) * rates.storage
    return FailureComponents(
        p_om_1=24.0 * channel,
        p_om_2=(24.0 * 23.0 / 2.0) * channel ** 2,
        p_sr=p_sr, n0=10, rates=rates, om_channels=24, om_rate=channel)


COMPONENT_MAKERS = {"ramm": ramm_components, "reference": reference_components}


def memory_failure(components: FailureComponents, n_wait: int) -> float:
    """Failure probability of one quantum-memory period with N waiting steps."""
    if n_wait < 1:
        raise ValueError("the waiting interval has at least one step")
    c = components
    per_qubit = 2.0 * c.p_sr + n_wait * c.rates.storage
    pairs = QUBIT_PAIRS * (per_qubit ** 2 - c.p_sr ** 2)
    return c.p_om_2 + c.p_om_1 * N_CODE_QUBITS * per_qubit + pairs


def computation_failure(components: FailureComponents, m_period: int) -> float:
    """Failure probability of one computation period of M steps.

    Each period ends in a two-qubit gate whose syndrome-block errors propagate
    to the partner qubit, hence three syndrome-recovery windows and the extra
    gate error per qubit.  Requires M - n0 - 1 >= 0.
    """
    c = components
    free_steps = m_period - c.n0 - 1
    if free_steps < 0:
        raise ValueError(f"period must satisfy M - N0 - 1 >= 0 (N0 = {c.n0})")
    per_qubit = 3.0 * c.p_sr + c.rates.gate + free_steps * c.rates.storage
    pairs = QUBIT_PAIRS * (per_qubit ** 2 - 2.0 * c.p_sr ** 2)
    return c.p_om_2 + c.p_om_1 * N_CODE_QUBITS * per_qubit + pairs


def optimize_waiting(components: FailureComponents, rates: ErrorRates | None = None,
                     n_start: int = 1) -> tuple:
    """Minimize the failure probability per time step over the waiting interval.

    Returns ``(n_star, p_f)`` with ``p_f = min_N P(failure, N)/(N + N0)``; the
    scan extends itself until the minimum is interior.
    """
    c = components if rates is None else FailureComponents(
        p_om_1=components.p_om_1, p_om_2=components.p_om_2,
        p_sr=components.p_sr, n0=components.n0, rates=rates,
        om_channels=components.om_channels, om_rate=components.om_rate)
    best, best_n = math.inf, None
    n = n_start
    while True:
        value = memory_failure(c, n) / (n + c.n0)
        if value < best:
            best, best_n = value, n
        elif n > best_n + 64:
            return best_n, best
        n += 1
        if n > 10 ** 7:
            raise RuntimeError("waiting-time scan failed to find a minimum")


@dataclass(frozen=True)
class ThresholdResult:
    """A solved threshold: the rate, the optimal waiting, the p_f(N) curve."""

    threshold: float
    n_star: int | None
    curve: tuple              # (N, p_f) samples at the threshold rate
    architecture: str
    saturated: bool = False


def _pf_memory(eps_st: float, ratios: tuple, architecture: str) -> tuple:
    rates = ErrorRates.from_ratios(eps_st, *ratios)
    comp = COMPONENT_MAKERS[architecture](rates)
    return optimize_waiting(comp), comp


def memory_threshold(ratio_g: float, ratio_dm: float, ratio_om: float,
                     architecture: str = "ramm",
                     bracket: tuple = (1e-12, 0.1)) -> ThresholdResult:
    """Solve p_f(eps_st) = eps_st by bisection at fixed rate ratios.

    Because p_f grows quadratically in eps_st, p_f/eps_st is increasing and
    the fixed point is unique.  A threshold beyond the bracket top (0.1,
    nonphysical for this model) is reported as saturated.
    """
    if architecture not in COMPONENT_MAKERS:
        raise ValueError(f"unknown architecture {architecture!r}")
    ratios = (ratio_g, ratio_dm, ratio_om)
    if any(r < 0 for r in ratios):
        raise ValueError("rate ratios must be nonnegative")
    lo, hi = bracket
    hi = min(hi, 0.5 / max(1.0, *ratios))  # keep every channel rate physical

    def excess(eps):
        (n_star, pf), _ = _pf_memory(eps, ratios, architecture)
        return pf - eps

    if excess(hi) < 0:
        return ThresholdResult(threshold=hi, n_star=None, curve=(),
                               architecture=architecture, saturated=True)
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if excess(mid) > 0:
            hi = mid
        else:
            lo = mid
        if hi - lo <= 1e-14 * hi:
            break
    eps_th = 0.5 * (lo + hi)
    (n_star, _), comp = _pf_memory(eps_th, ratios, architecture)
    curve = tuple((n, memory_failure(comp, n) / (n + comp.n0))
                  for n in range(1, max(2 * n_star, 16) + 1))
    return ThresholdResult(threshold=eps_th, n_star=n_star, curve=curve,
                           architecture=architecture)


def computation_threshold(ratio_g: float, ratio_dm: float, ratio_om: float,
                          m_period: int, architecture: str = "ramm",
                          bracket: tuple = (1e-12, 0.1)) -> ThresholdResult:
    """Threshold for computation: p_f = P(failure, M)/M against the bare rate.

    The unencoded comparison rate is eps_st + eps_g/M (storage every step and
    one gate per period).  Requires M >= N0 + 1.
    """
    if architecture not in COMPONENT_MAKERS:
        raise ValueError(f"unknown architecture {architecture!r}")
    ratios = (ratio_g, ratio_dm, ratio_om)

    def excess(eps):
        rates = ErrorRates.from_ratios(eps, *ratios)
        comp = COMPONENT_MAKERS[architecture](rates)
        bare = eps + rates.gate / m_period
        return computation_failure(comp, m_period) / m_period - bare

    lo, hi = bracket
    hi = min(hi, 0.5 / max(1.0, *ratios))
    if excess(hi) < 0:
        return ThresholdResult(threshold=hi, n_star=None, curve=(),
                               architecture=architecture, saturated=True)
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if excess(mid) > 0:
            hi = mid
        else:
            lo = mid
        if hi - lo <= 1e-14 * hi:
            break
    return ThresholdResult(threshold=0.5 * (lo + hi), n_star=None, curve=(),
                           architecture=architecture)


def concatenation_curve(eps: float, eps_th: float, k_max: int) -> tuple:
    """Failure per level of concatenation and the 7^k qubit cost.

    Level k fails with eps_th (eps/eps_th)^(2^k); requires eps < eps_th.
    """
    if eps >= eps_th and eps > 0:
        raise ValueError("concatenation suppresses errors only below threshold")
    if k_max < 0:
        raise ValueError("k_max must be nonnegative")
    out = []
    for k in range(k_max + 1):
        out.append((k, eps_th * (eps / eps_th) ** (2 ** k), N_CODE_QUBITS ** k))
    return tuple(out)


@dataclass(frozen=True)
class MonteCarloEstimate:
    estimate: float
    ci_low: float
    ci_high: float
    failures: int
    trials: int

    def within(self, value: float, z_widths: float = 1.0) -> bool:
        half = (self.ci_high - self.ci_low) / 2.0
        return abs(self.estimate - value) <= z_widths * max(half, 1e-12)


def monte_carlo_failure(components: FailureComponents, period: int, trials: int,
                        rng, mode: str = "memory") -> MonteCarloEstimate:
    """Sample the failure event model the analytic formulas truncate.

    Outcome errors are binomial over the architecture's channels; each qubit
    draws its window errors independently; the pair rule exempts pairs whose
    errors sit only in the excluded syndrome-recovery windows.  The interval
    is a 3-sigma Wilson interval.
    """
    if trials < 10 ** 4:
        raise ValueError("need at least 1e4 trials for a meaningful estimate")
    if mode not in ("memory", "computation"):
        raise ValueError("mode is 'memory' or 'computation'")
    c = components
    n_q = c.n_qubits
    if mode == "memory":
        if period < 1:
            raise ValueError("waiting interval must be positive")
        wait_steps = period
    else:
        wait_steps = period - c.n0 - 1
        if wait_steps < 0:
            raise ValueError("period must satisfy M - N0 - 1 >= 0")

    m_om = rng.binomial(c.om_channels, min(c.om_rate, 1.0), size=trials)
    p_sr = min(c.p_sr, 1.0)
    sr_a = rng.random((trials, n_q)) < p_sr        # previous syndrome block
    sr_c = rng.random((trials, n_q)) < p_sr        # current syndrome block
    wait = rng.binomial(wait_steps, c.rates.storage, size=(trials, n_q)) > 0
    if mode == "computation":
        sr_b = rng.random((trials, n_q)) < p_sr    # propagated partner block
        gate = rng.random((trials, n_q)) < min(c.rates.gate, 1.0)
        err = sr_a | sr_b | sr_c | gate | wait
        only_b = sr_b & ~(sr_a | sr_c | gate | wait)
        only_c = sr_c & ~(sr_a | sr_b | gate | wait)
        exempt_pairs = _pair_count(only_b) + _pair_count(only_c)
    else:
        err = sr_a | sr_c | wait
        only_c = sr_c & ~(sr_a | wait)
        exempt_pairs = _pair_count(only_c)

    n_err = err.sum(axis=1)
    pair_fail = _pair_count_vec(n_err) > exempt_pairs
    fail = (m_om >= 2) | ((m_om == 1) & (n_err >= 1)) | pair_fail
    failures = int(fail.sum())
    lo, hi = wilson_interval(failures, trials, z=3.0)
    return MonteCarloEstimate(estimate=failures / trials, ci_low=lo, ci_high=hi,
                              failures=failures, trials=trials)


def _pair_count(mask: np.ndarray) -> np.ndarray:
    n = mask.sum(axis=1)
    return n * (n - 1) // 2


def _pair_count_vec(n: np.ndarray) -> np.ndarray:
    return n * (n - 1) // 2
