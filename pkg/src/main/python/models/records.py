"""Per-trial records and metric estimates."""

from dataclasses import dataclass, field

import numpy as np

from ..core.exceptions import ContractViolation


@dataclass(frozen=True)
class Estimate:
    """Point estimate with a 95% confidence interval."""

    estimate: float
    ci_lo: float
    ci_hi: float
    n: int


@dataclass(frozen=True)
class DelayProfile:
    """Received power-delay profile of one interferer as seen by a victim block."""

    tap_powers: np.ndarray  # linear
    delays: np.ndarray  # in symbol periods

    @property
    def total_power(self) -> float:
        return float(np.sum(self.tap_powers))


@dataclass
class TrialRecord:
    """Outputs of one simulated frame."""

    trial: int
    serving: np.ndarray  # per link, linear
    interference: np.ndarray  # per link, linear, after combining
    noise_power: float
    bits_true: np.ndarray  # (M, bits)
    bits_decoded: np.ndarray
    symbols_true: np.ndarray  # (M,) symbol labels
    symbols_decoded: np.ndarray
    vectors_true: np.ndarray  # (M,)
    vectors_decoded: np.ndarray
    interference_metric: float = 0.0  # linear, mean over victim links
    delay_mean: float = 0.0
    delay_second_moment: float = 0.0
    sinr_db: np.ndarray = field(init=False)

    def __post_init__(self):
        if np.any(self.serving < 0) or np.any(self.interference < 0) or self.noise_power < 0:
            raise ContractViolation("linear powers must be non-negative")
        if self.interference_metric < 0:
            raise ContractViolation("interference metric must be non-negative")
        with np.errstate(divide="ignore", invalid="ignore"):
            self.sinr_db = 10.0 * np.log10(self.serving / (self.interference + self.noise_power))

    @property
    def n_links(self) -> int:
        return int(self.serving.size)
