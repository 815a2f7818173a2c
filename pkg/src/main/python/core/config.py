"""Configuration management for the spreading simulator."""

import os
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path
from typing import Any, List, Optional, Tuple, Union, get_args, get_origin, get_type_hints

import yaml
from dotenv import load_dotenv

from .exceptions import ConfigurationError, OutputError

MODES = ("none", "ST", "SF", "STF")
SCENARIOS = ("indoor", "outdoor")
DECODER_NAMES = ("ml", "zf", "mmse", "mf")
PATHLOSS_NAMES = ("umi_nlos", "umi_los", "inh_nlos", "inh_los")
SWEEP_PARAMS = ("tx_power_dbm", "M", "N")

# Names read from the environment after load_dotenv()
ENV_MASTER_SEED = "STFSIM_MASTER_SEED"
ENV_WORKERS = "STFSIM_WORKERS"
ENV_OUTPUT_DIR = "STFSIM_OUTPUT_DIR"


def _is_power_of_two(n: int) -> bool:
    return n >= 1 and not n & (n - 1)


@dataclass
class SystemConfig:
    """Simulation configuration; one flat mapping of every knob."""

    # Network dimensions
    M: int = 8
    N: int = 64
    L: int = 8
    T: int = 8
    Q: int = 8
    mode: Union[str, List[str]] = "STF"
    scenario: Union[str, List[str]] = "indoor"

    # Modulation and receiver
    psk_kind: str = "psk"
    psk_order: int = 4
    fsk_order: int = 4
    decoder: str = "ml"
    estimator: str = "ls"
    perfect_csi: bool = False

    # Codebook
    codebook_construction: str = "random"
    codebook_source: str = "dft"
    codebook_criterion: str = "max_min_distance"
    codebook_budget: int = 64
    codebook_sinr_db: float = 10.0
    codebook_file: Optional[str] = None

    # Link budget
    tx_power_dbm: float = 10.0
    noise_figure_db: float = 7.0
    bandwidth_hz: float = 1e6
    carrier_ghz: float = 2.0

    # Geometry and large-scale fading
    r_min_m: float = 100.0
    r_max_m: float = 1000.0
    shadowing_mean_db: float = 4.0
    shadowing_variance_db2: float = 2.0
    outdoor_pathloss_model: str = "umi_nlos"
    indoor_pathloss_model: str = "inh_nlos"

    # Small-scale fading
    n_taps: int = 4
    power_delay_profile: str = "exponential"
    pdp_decay_db: float = 3.0
    doppler_norm: float = 0.01
    n_oscillators: int = 16

    # Block grid
    guard_samples: Optional[int] = None  # None -> n_taps - 1
    subband_leakage: str = "none"
    stf_subbands: Optional[int] = None
    assignment_policy: str = "random"
    reassign_per_frame: bool = True

    # Metrics
    outage_threshold_db: float = 0.0
    sinr_bin_width_db: float = 2.0
    st_block_duration_s: float = 1e-5
    sf_guard_band_hz: float = 10.0
    interference_includes_serving: bool = False  # count the serving link's own multipath

    # Run control
    n_trials: int = 1000
    master_seed: Optional[int] = None
    workers: int = 1
    output_dir: str = "results"
    sweep_param: Optional[str] = None
    sweep_values: List[float] = field(default_factory=list)
    sweep_scales_grid: bool = True

    @classmethod
    def from_dict(cls, values: dict) -> "SystemConfig":
        """
        Build a config from a flat mapping of field names.

        Raises:
            ConfigurationError: on keys that are not config fields or values of the wrong type
        """
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(values) - known)
        if unknown:
            raise ConfigurationError([f"unknown config key: {key}" for key in unknown])

        hints = get_type_hints(cls)
        errors = [
            f"{key} must be {_describe(hints[key])}, got {type(value).__name__} {value!r}"
            for key, value in values.items()
            if not _matches(value, hints[key])
        ]
        if errors:
            raise ConfigurationError(errors)
        return cls(**values)

    @classmethod
    def load(
        cls,
        config_path: Optional[str] = None,
        env_path: Optional[str] = None,
        base: Optional["SystemConfig"] = None,
    ) -> "SystemConfig":
        """
        Load configuration from a flat YAML file and environment variables.

        Args:
            config_path: Path to settings.yaml file; must exist when given
            env_path: Path to .env file
            base: Config whose values the file overrides (defaults otherwise)

        Returns:
            Loaded SystemConfig object

        Raises:
            OutputError: config_path is given but cannot be read
            ConfigurationError: the file is not a flat mapping of valid keys
        """
        if env_path:
            load_dotenv(env_path)
        else:
            load_dotenv()

        values: dict = {}
        if config_path:
            path = Path(config_path)
            if not path.is_file():
                raise OutputError(path, "no such config file", action="read")
            try:
                with open(path, "r") as f:
                    values = yaml.safe_load(f) or {}
            except OSError as e:
                raise OutputError(path, e.strerror or str(e), action="read") from e
            except yaml.YAMLError as e:
                raise ConfigurationError(f"{config_path} is not valid YAML: {e}") from e
            if not isinstance(values, dict):
                raise ConfigurationError(f"{config_path} must hold a flat key-value mapping")

        if base is not None:
            values = {**base.to_dict(), **values}
        config = cls.from_dict(values)
        config.apply_env()
        return config

    def apply_env(self) -> None:
        """Override seed, workers and output directory from the environment."""
        try:
            if os.getenv(ENV_MASTER_SEED):
                self.master_seed = int(os.environ[ENV_MASTER_SEED])
            if os.getenv(ENV_WORKERS):
                self.workers = int(os.environ[ENV_WORKERS])
        except ValueError as e:
            raise ConfigurationError(f"invalid integer in environment: {e}") from e
        if os.getenv(ENV_OUTPUT_DIR):
            self.output_dir = os.environ[ENV_OUTPUT_DIR]

    @property
    def modes(self) -> Tuple[str, ...]:
        return _as_tuple(self.mode)

    @property
    def scenarios(self) -> Tuple[str, ...]:
        return _as_tuple(self.scenario)

    @property
    def guard(self) -> int:
        """Guard samples per block; defaults to the channel memory."""
        return self.n_taps - 1 if self.guard_samples is None else int(self.guard_samples)

    def with_value(self, param: Optional[str], value: Any) -> "SystemConfig":
        """
        Copy of this config at one sweep point.

        Sweeping M with sweep_scales_grid raises L, T and Q to at least M so the
        feasibility gate still holds.
        """
        if param is None or value is None:
            return replace(self, sweep_param=None, sweep_values=[])
        if param in ("M", "N"):
            value = int(value)
        point = replace(self, **{param: value}, sweep_param=None, sweep_values=[])
        if param == "M" and self.sweep_scales_grid:
            point = replace(point, L=max(point.L, value), T=max(point.T, value), Q=max(point.Q, value))
        return point

    def points(self) -> List[Tuple[Optional[float], "SystemConfig"]]:
        """(sweep value, config) for every sweep point; a single point when nothing is swept."""
        if not self.sweep_param:
            return [(None, self.with_value(None, None))]
        return [(value, self.with_value(self.sweep_param, value)) for value in self.sweep_values]

    def validate(self) -> list[str]:
        """
        Validate the configuration.

        Returns:
            List of validation error messages (empty if valid)
        """
        errors = []

        for name in ("M", "N", "L", "T", "Q"):
            if getattr(self, name) < 1:
                errors.append(f"{name} >= 1 violated: {name}={getattr(self, name)}")

        if self.sweep_param:
            if self.sweep_param not in SWEEP_PARAMS:
                errors.append(f"sweep_param must be one of {SWEEP_PARAMS}, got {self.sweep_param!r}")
            elif not self.sweep_values:
                errors.append(f"sweep_values must not be empty when sweeping {self.sweep_param}")
            else:
                for _, point in self.points():
                    errors.extend(e for e in point._dimension_errors() if e not in errors)
        else:
            errors.extend(self._dimension_errors())

        for mode in self.modes:
            if mode.lower() not in (m.lower() for m in MODES):
                errors.append(f"unknown mode {mode!r} (expected one of {MODES})")
        for scenario in self.scenarios:
            if scenario not in SCENARIOS:
                errors.append(f"unknown scenario {scenario!r} (expected one of {SCENARIOS})")
        if not self.modes or not self.scenarios:
            errors.append("at least one mode and one scenario are required")

        if self.psk_kind not in ("psk", "qam"):
            errors.append(f"psk_kind must be psk or qam, got {self.psk_kind!r}")
        if not _is_power_of_two(self.psk_order) or self.psk_order < 2:
            errors.append(f"psk_order must be a power of 2 >= 2, got {self.psk_order}")
        elif self.psk_kind == "qam" and int(round(self.psk_order ** 0.5)) ** 2 != self.psk_order:
            errors.append(f"qam needs a power-of-4 order, got {self.psk_order}")
        if not _is_power_of_two(self.fsk_order) or self.fsk_order < 2:
            errors.append(f"fsk_order must be a power of 2 >= 2, got {self.fsk_order}")
        if self.decoder not in DECODER_NAMES:
            errors.append(f"decoder must be one of {DECODER_NAMES}, got {self.decoder!r}")
        if self.estimator not in ("ls", "mmse"):
            errors.append(f"estimator must be ls or mmse, got {self.estimator!r}")

        if self.codebook_construction not in ("random", "unitary"):
            errors.append(f"codebook_construction must be random or unitary, got {self.codebook_construction!r}")
        if self.codebook_source not in ("dft", "haar", "identity"):
            errors.append(f"codebook_source must be dft, haar or identity, got {self.codebook_source!r}")
        if self.codebook_criterion not in ("max_min_distance", "min_error_prob", "max_capacity"):
            errors.append(f"unknown codebook_criterion {self.codebook_criterion!r}")
        if self.codebook_budget < 1:
            errors.append(f"codebook_budget >= 1 violated: codebook_budget={self.codebook_budget}")
        if self.codebook_file and not Path(self.codebook_file).exists():
            errors.append(f"codebook_file not found: {self.codebook_file}")

        if self.bandwidth_hz <= 0:
            errors.append(f"bandwidth_hz must be positive, got {self.bandwidth_hz}")
        if self.carrier_ghz <= 0:
            errors.append(f"carrier_ghz must be positive, got {self.carrier_ghz}")
        if not 0 < self.r_min_m < self.r_max_m:
            errors.append(f"0 < r_min < r_max violated: r_min={self.r_min_m}, r_max={self.r_max_m}")
        if self.shadowing_variance_db2 < 0:
            errors.append(f"shadowing_variance_db2 must be >= 0, got {self.shadowing_variance_db2}")
        for name in ("outdoor_pathloss_model", "indoor_pathloss_model"):
            if getattr(self, name) not in PATHLOSS_NAMES:
                errors.append(f"{name} must be one of {PATHLOSS_NAMES}, got {getattr(self, name)!r}")

        if self.n_taps < 1:
            errors.append(f"n_taps >= 1 violated: n_taps={self.n_taps}")
        if self.power_delay_profile not in ("exponential", "uniform"):
            errors.append(f"power_delay_profile must be exponential or uniform, got {self.power_delay_profile!r}")
        if self.doppler_norm < 0:
            errors.append(f"doppler_norm must be >= 0, got {self.doppler_norm}")
        if self.n_oscillators < 1:
            errors.append(f"n_oscillators >= 1 violated: n_oscillators={self.n_oscillators}")

        if self.guard_samples is not None and self.guard_samples < 0:
            errors.append(f"guard_samples must be >= 0, got {self.guard_samples}")
        if self.subband_leakage not in ("none", "doppler"):
            errors.append(f"subband_leakage must be none or doppler, got {self.subband_leakage!r}")
        if self.stf_subbands is not None and (self.stf_subbands < 1 or self.L % self.stf_subbands):
            errors.append(f"stf_subbands must divide L: L={self.L}, stf_subbands={self.stf_subbands}")
        if self.assignment_policy not in ("random", "identity"):
            errors.append(f"assignment_policy must be random or identity, got {self.assignment_policy!r}")

        if self.sinr_bin_width_db <= 0:
            errors.append(f"sinr_bin_width_db must be positive, got {self.sinr_bin_width_db}")
        if self.n_trials < 1:
            errors.append(f"n_trials >= 1 violated: n_trials={self.n_trials}")
        if self.master_seed is None:
            errors.append(f"master_seed is required (set it in the config or {ENV_MASTER_SEED})")
        elif not 0 <= int(self.master_seed) < 2**64:
            errors.append(f"master_seed must be an unsigned 64-bit integer, got {self.master_seed}")
        if self.workers < 1:
            errors.append(f"workers >= 1 violated: workers={self.workers}")

        return errors

    def _dimension_errors(self) -> list[str]:
        errors = []
        for name in ("T", "L", "Q"):
            if getattr(self, name) < self.M:
                errors.append(f"{name} >= M violated: {name}={getattr(self, name)}, M={self.M}")
        if self.T < self.n_taps:
            errors.append(f"T >= n_taps violated: T={self.T}, n_taps={self.n_taps}")
        return errors

    def check(self) -> "SystemConfig":
        """Raise ConfigurationError listing every violated rule."""
        errors = self.validate()
        if errors:
            raise ConfigurationError(errors)
        return self

    def to_dict(self) -> dict:
        """Convert config to a plain dictionary."""
        return asdict(self)


def _matches(value, hint) -> bool:
    """isinstance() against a field annotation; bools are not numbers here."""
    origin = get_origin(hint)
    if origin is Union:
        return any(_matches(value, arg) for arg in get_args(hint))
    if origin is list:
        (item,) = get_args(hint)
        return isinstance(value, (list, tuple)) and all(_matches(v, item) for v in value)
    if hint is type(None):
        return value is None
    if hint is bool:
        return isinstance(value, bool)
    if isinstance(value, bool):
        return False
    if hint is float:
        return isinstance(value, (int, float))
    return isinstance(value, hint)


def _describe(hint) -> str:
    return hint.__name__ if isinstance(hint, type) else str(hint).replace("typing.", "")


def _as_tuple(value) -> Tuple[str, ...]:
    if isinstance(value, (list, tuple)):
        return tuple(str(v) for v in value)
    return (str(value),)


def get_default_config_path() -> str:
    """Get the default path to settings.yaml."""
    possible_paths = [
        Path(__file__).parent.parent.parent / "resources" / "config" / "settings.yaml",
        Path("src/main/resources/config/settings.yaml"),
        Path("settings.yaml"),
    ]

    for path in possible_paths:
        if path.exists():
            return str(path)

    return str(possible_paths[0])
