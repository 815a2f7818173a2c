"""Main entry point for the spreading simulator."""

import logging
import sys
from dataclasses import replace
from pathlib import Path
from typing import Optional

import click

from .config import SystemConfig, get_default_config_path
from .exceptions import ConfigurationError, OutputError
from .presets import get_preset, sweep_presets
from ..models import Mode
from ..services import emit_results, run_experiment
from ..services.codebook import gen_random_codebook, gen_unitary_codebook, optimize_codebook, save_codebook
from ..services.emitter import default_filename
from ..services.modem import make_constellation
from ..services.spreading_map import build_grid
from ..utils.rng import CODEBOOK_KEY, stream

# Configure logging
logging.basicConfig(
    level=logging.INFO,
    format="%(asctime)s - %(name)s - %(levelname)s - %(message)s",
    datefmt="%Y-%m-%d %H:%M:%S",
)
logger = logging.getLogger(__name__)

EXIT_CONFIG = 2
EXIT_IO = 3


def _load_config(config: Optional[str], preset: Optional[str] = None) -> SystemConfig:
    """Preset values first, then the config file on top of them."""
    base = get_preset(preset) if preset else None
    path = config
    if path is None and base is None and Path(get_default_config_path()).exists():
        path = get_default_config_path()
    return SystemConfig.load(path, base=base)


def _exit_config(error: ConfigurationError) -> None:
    for message in error.errors:
        logger.error(f"Configuration error: {message}")
    sys.exit(EXIT_CONFIG)


def _exit_io(error: OutputError) -> None:
    logger.error(str(error))
    sys.exit(EXIT_IO)


@click.group()
@click.version_option(version="1.0.0")
def cli():
    """stfsim - Monte-Carlo simulator for ST/SF/STF spreading in dense IoT uplinks."""
    pass


@cli.command()
@click.option("--config", "-c", default=None, help="Path to config file")
@click.option("--preset", "-p", type=click.Choice(sorted(sweep_presets())), default=None, help="Named figure sweep")
@click.option("--seed", "-s", type=int, default=None, help="Master seed (unsigned 64-bit)")
@click.option("--trials", "-n", type=int, default=None, help="Trials per sweep point")
@click.option("--out", "-o", default=None, help="Output directory")
@click.option("--format", "-f", "fmt", type=click.Choice(["csv", "json", "plotdata"]), default="csv",
              help="Output format")
@click.option("--workers", "-w", type=int, default=None, help="Worker processes")
@click.option("--verbose", "-v", is_flag=True, help="Debug logging")
def run(config: str, preset: str, seed: int, trials: int, out: str, fmt: str, workers: int, verbose: bool):
    """Run an experiment and write its result table."""
    if verbose:
        logging.getLogger().setLevel(logging.DEBUG)

    try:
        cfg = _load_config(config, preset)
    except ConfigurationError as e:
        _exit_config(e)
    except OutputError as e:
        _exit_io(e)

    # Override with CLI arguments
    if seed is not None:
        cfg.master_seed = seed
    if trials is not None:
        cfg.n_trials = trials
    if workers is not None:
        cfg.workers = workers

    errors = cfg.validate()
    if errors:
        _exit_config(ConfigurationError(errors))

    logger.info(f"Running {preset or config or 'default config'} with seed {cfg.master_seed}")
    try:
        table = run_experiment(cfg)
    except ConfigurationError as e:
        _exit_config(e)

    target = Path(out or cfg.output_dir) / default_filename(fmt, preset or "results")
    try:
        path = emit_results(table, fmt, target)
    except OutputError as e:
        _exit_io(e)
    click.echo(str(path))


@cli.command()
@click.option("--config", "-c", default=None, help="Path to config file")
def validate(config: str):
    """Check a config file against every parameter rule."""
    try:
        cfg = _load_config(config)
    except ConfigurationError as e:
        _exit_config(e)
    except OutputError as e:
        _exit_io(e)
    errors = cfg.validate()
    if errors:
        _exit_config(ConfigurationError(errors))
    click.echo("Configuration OK")


@cli.group()
def codebook():
    """Generate or optimize dispersion-vector codebooks."""
    pass


def _codebook_options(func):
    options = [
        click.option("--q", "q", type=int, required=True, help="Number of vectors"),
        click.option("--t", "t", type=int, required=True, help="Vector length"),
        click.option("--construction", type=click.Choice(["random", "unitary"]), default="random"),
        click.option("--source", type=click.Choice(["dft", "haar", "identity"]), default="dft",
                     help="Unitary source matrix"),
        click.option("--seed", "-s", type=int, required=True, help="Seed of the codebook stream"),
        click.option("--out", "-o", required=True, help="Output YAML file"),
    ]
    for option in reversed(options):
        func = option(func)
    return func


def _generator(construction: str, q: int, t: int, source: str):
    if construction == "unitary":
        return lambda rng: gen_unitary_codebook(q, t, source, rng)
    return lambda rng: gen_random_codebook(q, t, rng)


def _save(book, path: str) -> None:
    try:
        click.echo(str(save_codebook(book, path)))
    except OutputError as e:
        _exit_io(e)


@codebook.command()
@_codebook_options
def gen(q: int, t: int, construction: str, source: str, seed: int, out: str):
    """Draw one codebook."""
    try:
        book = _generator(construction, q, t, source)(stream(seed, CODEBOOK_KEY))
    except ConfigurationError as e:
        _exit_config(e)
    _save(replace(book, seed=seed), out)


@codebook.command()
@_codebook_options
@click.option("--criterion", type=click.Choice(["max_min_distance", "min_error_prob", "max_capacity"]),
              default="max_min_distance")
@click.option("--budget", type=int, default=64, help="Candidate codebooks to score")
@click.option("--psk-kind", type=click.Choice(["psk", "qam"]), default="psk")
@click.option("--psk-order", type=int, default=4)
@click.option("--sinr-db", type=float, default=10.0, help="Operating point for the scoring criteria")
def optimize(q: int, t: int, construction: str, source: str, seed: int, out: str,
             criterion: str, budget: int, psk_kind: str, psk_order: int, sinr_db: float):
    """Search candidate codebooks for the best criterion score."""
    try:
        book = optimize_codebook(
            _generator(construction, q, t, source),
            criterion,
            budget,
            stream(seed, CODEBOOK_KEY),
            make_constellation(psk_kind, psk_order),
            sinr_db,
        )
    except ConfigurationError as e:
        _exit_config(e)
    _save(replace(book, seed=seed), out)


@cli.command()
@click.option("--config", "-c", default=None, help="Path to config file")
@click.option("--preset", "-p", type=click.Choice(sorted(sweep_presets())), default=None, help="Named figure sweep")
def grid(config: str, preset: str):
    """Show the block grid, frame latency and guard spectrum of every mode."""
    try:
        cfg = _load_config(config, preset)
        cfg.check()
    except ConfigurationError as e:
        _exit_config(e)
    except OutputError as e:
        _exit_io(e)

    click.echo(f"\n{'='*60}")
    click.echo(f"BLOCK GRID  M={cfg.M} L={cfg.L} T={cfg.T} guard={cfg.guard}")
    click.echo(f"{'='*60}\n")
    for name in cfg.modes:
        mode = Mode.parse(name)
        g = build_grid(mode, cfg.L, cfg.M, cfg.T, cfg.guard,
                       cfg.fsk_order if mode.uses_fsk else 1, cfg.stf_subbands)
        click.echo(f"{mode.value}:")
        click.echo(f"   {g.n_slots} slots x {g.n_subbands} subbands x {g.tones_per_block} tones, "
                   f"frame {g.n_rows} x {g.frame_len} samples")
        click.echo(f"   Frame latency: {g.frame_latency_s(cfg.st_block_duration_s) * 1e3:.3f} ms")
        click.echo(f"   Guard spectrum: {g.guard_spectrum_hz(cfg.sf_guard_band_hz):.1f} Hz")
        click.echo("")
    click.echo("Pilot overhead: 50% (one pilot block ahead of every data block)")


@cli.command()
def presets():
    """List the named figure sweeps."""
    for name, cfg in sweep_presets().items():
        click.echo(f"{name}: M={cfg.M} N={cfg.N} L={cfg.L} T={cfg.T} Q={cfg.Q} "
                   f"modes={','.join(cfg.modes)} scenarios={','.join(cfg.scenarios)} "
                   f"sweep={cfg.sweep_param}[{len(cfg.sweep_values)}]")


@cli.command()
@click.option("--config", "-c", default=None, help="Path to config file")
def show_config(config: str):
    """Show current configuration."""
    config_path = config or get_default_config_path()
    try:
        cfg = _load_config(config)
    except ConfigurationError as e:
        _exit_config(e)
    except OutputError as e:
        _exit_io(e)

    click.echo(f"\n{'='*40}")
    click.echo("CONFIGURATION")
    click.echo(f"{'='*40}\n")

    for key, value in cfg.to_dict().items():
        click.echo(f"{key}: {value}")

    click.echo(f"\nConfig file: {config_path}")


def main():
    """Main entry point."""
    cli()


if __name__ == "__main__":
    main()
