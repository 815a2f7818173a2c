"""Named experiment configurations for the standard outage, interference and array-size sweeps."""

from typing import Dict

import numpy as np

from .config import SystemConfig
from .exceptions import ConfigurationError

PRESET_SEED = 20190521
ALL_MODES = ["none", "ST", "SF", "STF"]
BOTH_SCENARIOS = ["indoor", "outdoor"]

# Residual leakage used by the interference and array sweeps: a guard shorter
# than the channel memory and Doppler spill between adjacent subbands.
LEAKY_GRID = {"guard_samples": 1, "subband_leakage": "doppler"}

# The interference sweeps count the serving link's own delayed multipath too.
INTERFERENCE_METRIC = {"interference_includes_serving": True}


def _power_sweep(start: float, stop: float, step: float) -> list:
    return [float(v) for v in np.arange(start, stop + step / 2, step)]


def sweep_presets() -> Dict[str, SystemConfig]:
    """
    The five figure sweeps as complete configs.

    Returns:
        Mapping of preset name to SystemConfig; every preset passes validation
    """
    return {
        # Outage against SINR, moderate network
        "fig3": SystemConfig(
            M=8, N=64, L=8, T=8, Q=8,
            mode=list(ALL_MODES), scenario=list(BOTH_SCENARIOS),
            master_seed=PRESET_SEED,
            sweep_param="tx_power_dbm", sweep_values=_power_sweep(-30, 20, 5),
        ),
        # Outage against SINR, larger network and array
        "fig4": SystemConfig(
            M=16, N=100, L=20, T=20, Q=20,
            mode=list(ALL_MODES), scenario=list(BOTH_SCENARIOS),
            master_seed=PRESET_SEED,
            sweep_param="tx_power_dbm", sweep_values=_power_sweep(-30, 20, 5),
        ),
        # Interference against the number of active devices on one 40-block grid
        "fig5": SystemConfig(
            N=64, L=40, T=40, Q=40,
            mode=list(ALL_MODES), scenario="indoor",
            tx_power_dbm=30.0, doppler_norm=0.001,
            master_seed=PRESET_SEED,
            sweep_param="M", sweep_values=[4, 8, 12, 16, 20, 24, 28, 32, 36, 40],
            sweep_scales_grid=False,
            **LEAKY_GRID, **INTERFERENCE_METRIC,
        ),
        # Interference against transmit power
        "fig6": SystemConfig(
            M=8, N=64, L=8, T=8, Q=8,
            mode=list(ALL_MODES), scenario="indoor",
            master_seed=PRESET_SEED,
            doppler_norm=0.03,
            sweep_param="tx_power_dbm", sweep_values=_power_sweep(-10, 30, 5),
            **LEAKY_GRID, **INTERFERENCE_METRIC,
        ),
        # Output SINR against the gateway array size
        "fig7": SystemConfig(
            M=8, N=64, L=8, T=8, Q=8,
            mode=list(ALL_MODES), scenario="indoor",
            tx_power_dbm=30.0,
            master_seed=PRESET_SEED,
            sweep_param="N", sweep_values=[8, 16, 32, 48, 64, 80, 96, 112, 128],
            **LEAKY_GRID,
        ),
    }


def get_preset(name: str) -> SystemConfig:
    presets = sweep_presets()
    if name not in presets:
        raise ConfigurationError(f"unknown preset {name!r} (expected one of {sorted(presets)})")
    return presets[name]
