"""Decibel conversions and thermal noise."""

import numpy as np

BOLTZMANN_DBM_HZ = -174.0  # kT at 290 K


def db_to_linear(value_db):
    return 10.0 ** (np.asarray(value_db, dtype=float) / 10.0)


def linear_to_db(value):
    """Power ratio to dB; zero maps to -inf without a warning."""
    value = np.asarray(value, dtype=float)
    with np.errstate(divide="ignore"):
        return 10.0 * np.log10(value)


def dbm_to_mw(value_dbm):
    return db_to_linear(value_dbm)


def thermal_noise_dbm(bandwidth_hz: float, noise_figure_db: float) -> float:
    """Noise power at 290 K over the bandwidth, plus the receiver noise figure."""
    return BOLTZMANN_DBM_HZ + 10.0 * np.log10(bandwidth_hz) + noise_figure_db
