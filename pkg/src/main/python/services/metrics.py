"""Outage, interference, SINR and error-rate metrics over trial records."""

import logging
from dataclasses import dataclass
from typing import Dict, List, Sequence, Tuple

import numpy as np
from scipy.stats import binomtest

from ..core.exceptions import ConfigurationError, ContractViolation
from ..models import DelayProfile, Estimate, TrialRecord

logger = logging.getLogger(__name__)

Z_95 = 1.959963984540054


def wilson_estimate(successes: int, n: int) -> Estimate:
    """Proportion with its 95% Wilson score interval."""
    if n < 1:
        raise ContractViolation("cannot estimate a proportion from zero samples")
    ci = binomtest(int(successes), int(n)).proportion_ci(confidence_level=0.95, method="wilson")
    return Estimate(estimate=successes / n, ci_lo=float(ci.low), ci_hi=float(ci.high), n=int(n))


def mean_estimate(values) -> Estimate:
    """Sample mean with a normal-approximation 95% interval."""
    values = np.asarray(values, dtype=float).ravel()
    if values.size < 1:
        raise ContractViolation("cannot average zero samples")
    mean = float(np.mean(values))
    half = Z_95 * float(np.std(values, ddof=1)) / np.sqrt(values.size) if values.size > 1 else 0.0
    return Estimate(estimate=mean, ci_lo=mean - half, ci_hi=mean + half, n=int(values.size))


def _require(records: Sequence[TrialRecord]) -> None:
    if not records:
        raise ContractViolation("at least one trial record is required")


def link_outage_probability(records: Sequence[TrialRecord], threshold_db: float = 0.0) -> Estimate:
    """
    Fraction of (trial, link) pairs whose post-processing SINR is below the threshold.

    Args:
        records: Trial records
        threshold_db: Outage threshold in dB

    Returns:
        Estimate with Wilson interval
    """
    _require(records)
    sinr = np.concatenate([r.sinr_db for r in records])
    return wilson_estimate(int(np.count_nonzero(sinr < threshold_db)), sinr.size)


def delay_moments(profile: DelayProfile, symbol_period: float = 1.0) -> Tuple[float, float]:
    """
    Mean delay and mean-squared delay of a power-delay profile.

    Returns:
        (mean / T_s, second moment / T_s^2); (0, 0) for an empty profile
    """
    total = profile.total_power
    if total <= 0:
        return 0.0, 0.0
    delays = np.asarray(profile.delays, dtype=float) / symbol_period
    powers = np.asarray(profile.tap_powers, dtype=float)
    return float(powers @ delays / total), float(powers @ delays ** 2 / total)


def interference_linear(interferers: Sequence[DelayProfile], symbol_period: float = 1.0) -> float:
    """Sum over interferers of received power times (mean delay + mean-squared delay)."""
    total = 0.0
    for profile in interferers:
        mean, second = delay_moments(profile, symbol_period)
        total += profile.total_power * (mean + second)
    return total


def interference_power(interferers: Sequence[DelayProfile], symbol_period: float = 1.0) -> float:
    """
    Delay-spread weighted interference power in dB.

    Args:
        interferers: Received power-delay profiles of the interfering links
        symbol_period: Normalization delay (one symbol period)

    Returns:
        dB value, -inf when there is nothing to add up
    """
    total = interference_linear(interferers, symbol_period)
    if total <= 0:
        return float("-inf")
    return float(10.0 * np.log10(total))


def output_sinr(record: TrialRecord) -> np.ndarray:
    """Per-link serving / (interference + noise) in dB after receive combining."""
    if record.noise_power <= 0:
        raise ConfigurationError(f"noise power must be positive, got {record.noise_power}")
    with np.errstate(divide="ignore"):
        return 10.0 * np.log10(record.serving / (record.interference + record.noise_power))


@dataclass(frozen=True)
class ErrorRates:
    ber: Estimate
    ser: Estimate
    ver: Estimate


def error_rates(records: Sequence[TrialRecord]) -> ErrorRates:
    """Bit, symbol and vector-index error rates with Wilson intervals."""
    _require(records)
    bit_errors = sum(int(np.count_nonzero(r.bits_true != r.bits_decoded)) for r in records)
    n_bits = sum(int(r.bits_true.size) for r in records)
    sym_errors = sum(int(np.count_nonzero(r.symbols_true != r.symbols_decoded)) for r in records)
    vec_errors = sum(int(np.count_nonzero(r.vectors_true != r.vectors_decoded)) for r in records)
    n_links = sum(r.n_links for r in records)
    ber = wilson_estimate(bit_errors, n_bits) if n_bits else Estimate(0.0, 0.0, 0.0, 0)
    return ErrorRates(
        ber=ber,
        ser=wilson_estimate(sym_errors, n_links),
        ver=wilson_estimate(vec_errors, n_links),
    )


def _to_db(value: float) -> float:
    return float(10.0 * np.log10(value)) if value > 0 else float("-inf")


def interference_estimate(records: Sequence[TrialRecord]) -> Estimate:
    """Mean per-trial interference metric, mapped to dB (interval bounds included)."""
    _require(records)
    linear = mean_estimate([r.interference_metric for r in records])
    return Estimate(_to_db(linear.estimate), _to_db(linear.ci_lo), _to_db(linear.ci_hi), linear.n)


def summarize(records: Sequence[TrialRecord], threshold_db: float = 0.0) -> Dict[str, Estimate]:
    """All per-point metrics, keyed by metric name, in emission order."""
    _require(records)
    rates = error_rates(records)
    return {
        "outage_probability": link_outage_probability(records, threshold_db),
        "output_sinr_db": mean_estimate(np.concatenate([r.sinr_db for r in records])),
        "interference_power_db": interference_estimate(records),
        "interference_mean_delay": mean_estimate([r.delay_mean for r in records]),
        "interference_mean_square_delay": mean_estimate([r.delay_second_moment for r in records]),
        "ber": rates.ber,
        "ser": rates.ser,
        "ver": rates.ver,
    }


def outage_vs_sinr(
    records: Sequence[TrialRecord], bin_width_db: float = 2.0, threshold_db: float = 0.0
) -> List[Tuple[float, Estimate]]:
    """
    Outage conditioned on realized-SINR bins.

    Links are binned by the mean realized SINR of their trial; each bin reports
    the fraction of its links below the threshold.
    """
    _require(records)
    if bin_width_db <= 0:
        raise ConfigurationError(f"bin width must be positive, got {bin_width_db}")
    trial_sinr, link_sinr = [], []
    for r in records:
        finite = r.sinr_db[np.isfinite(r.sinr_db)]
        trial_sinr.append(np.full(r.n_links, finite.mean() if finite.size else -np.inf))
        link_sinr.append(r.sinr_db)
    trial_sinr, link_sinr = np.concatenate(trial_sinr), np.concatenate(link_sinr)
    finite = np.isfinite(trial_sinr)
    bins = np.floor(trial_sinr[finite] / bin_width_db).astype(int)
    out = []
    for b in np.unique(bins):
        members = link_sinr[finite][bins == b]
        centre = (b + 0.5) * bin_width_db
        out.append((float(centre), wilson_estimate(int(np.count_nonzero(members < threshold_db)), members.size)))
    return out
