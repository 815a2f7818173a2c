"""Shared helpers: random streams and unit conversions."""

from .rng import stream, link_stream, trial_stream
from .units import db_to_linear, linear_to_db, dbm_to_mw, thermal_noise_dbm

__all__ = [
    "stream",
    "link_stream",
    "trial_stream",
    "db_to_linear",
    "linear_to_db",
    "dbm_to_mw",
    "thermal_noise_dbm",
]
