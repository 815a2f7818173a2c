"""Monte-Carlo experiment engine: one frame per trial, swept over modes, scenarios and one parameter."""

import logging
from concurrent.futures import ProcessPoolExecutor
from contextlib import nullcontext
from dataclasses import dataclass, replace
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from ..core.config import SystemConfig
from ..core.exceptions import ConfigurationError
from ..models import (
    Assignment,
    BlockGrid,
    Codebook,
    Constellation,
    DelayProfile,
    Deployment,
    Estimate,
    LinkArray,
    Mode,
    ResultRow,
    ResultTable,
    TrialRecord,
    metric_key,
)
from ..utils import rng as streams
from ..utils.units import dbm_to_mw, thermal_noise_dbm
from .channel import (
    apply_row_leakage,
    doppler_leakage,
    gen_link_channels,
    mac_superpose,
    power_delay_profile,
    resolved_profile,
    resolved_shifts,
)
from .codebook import gen_random_codebook, gen_unitary_codebook, load_codebook, optimize_codebook
from .metrics import interference_linear, outage_vs_sinr, summarize
from .modem import bits_to_indices, indices_to_bits, make_constellation, merge_streams, split_stream, square_law_detect
from .receiver import estimate_csi, get_decoder, pilot_sequences, templates
from .scenario import deploy_nodes, large_scale_gain
from .spreading_map import assign_blocks, build_grid, demap, spread

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class PointSetup:
    """Everything shared by the trials of one (mode, scenario, sweep point)."""

    config: SystemConfig
    mode: Mode
    scenario: str
    grid: BlockGrid
    codebook: Codebook
    psk: Constellation
    fsk: Optional[Constellation]
    profile: np.ndarray  # wideband tap variances
    channel_profile: np.ndarray  # the same taps at the mode's block-sample rate
    noise_power: float  # mW per sample
    tx_amplitude: float  # sqrt(mW)
    leakage: float
    pilots: np.ndarray

    @property
    def pathloss_model(self) -> str:
        if self.scenario == "indoor":
            return self.config.indoor_pathloss_model
        return self.config.outdoor_pathloss_model

    @property
    def n_tones(self) -> int:
        return self.fsk.order if self.fsk else 1

    @property
    def bit_split(self) -> Tuple[int, int]:
        return self.psk.bits_per_symbol, self.fsk.bits_per_symbol if self.fsk else 0


@dataclass(frozen=True)
class Payload:
    """One device's draws for a frame."""

    bits: np.ndarray
    vector: int
    symbol: int  # PSK/QAM point index
    tone: int  # FSK tone, 0 without FSK


def build_codebook(config: SystemConfig) -> Codebook:
    """
    Codebook used by every trial of an experiment.

    Loaded from `codebook_file` when set, otherwise searched on the codebook
    stream of the master seed, so every mode and sweep point sees the same vectors.
    """
    if config.codebook_file:
        book = load_codebook(config.codebook_file)
        if (book.q, book.t) != (config.Q, config.T):
            raise ConfigurationError(
                f"codebook {config.codebook_file} is {book.q}x{book.t}, config needs Q={config.Q}, T={config.T}"
            )
        return book

    if config.codebook_construction == "unitary":
        def generator(rng):
            return gen_unitary_codebook(config.Q, config.T, config.codebook_source, rng)
    else:
        def generator(rng):
            return gen_random_codebook(config.Q, config.T, rng)

    book = optimize_codebook(
        generator,
        config.codebook_criterion,
        config.codebook_budget,
        streams.stream(config.master_seed, streams.CODEBOOK_KEY),
        make_constellation(config.psk_kind, config.psk_order),
        config.codebook_sinr_db,
    )
    return replace(book, seed=int(config.master_seed))


def build_setup(config: SystemConfig, mode, scenario: str, codebook: Codebook) -> PointSetup:
    mode = Mode.parse(mode)
    grid = build_grid(
        mode,
        config.L,
        config.M,
        config.T,
        guard=config.guard,
        tones_per_block=config.fsk_order if mode.uses_fsk else 1,
        stf_subbands=config.stf_subbands,
    )
    # Without PSK the symbol rides on an unmodulated carrier
    if mode.uses_psk:
        psk = make_constellation(config.psk_kind, config.psk_order)
    else:
        psk = make_constellation("psk", 1)
    fsk = make_constellation("fsk", config.fsk_order) if mode.uses_fsk else None
    leakage = doppler_leakage(config.doppler_norm, grid.block_len) if config.subband_leakage == "doppler" else 0.0
    profile = power_delay_profile(config.n_taps, config.power_delay_profile, config.pdp_decay_db)

    return PointSetup(
        config=config,
        mode=mode,
        scenario=scenario,
        grid=grid,
        codebook=codebook,
        psk=psk,
        fsk=fsk,
        profile=profile,
        channel_profile=resolved_profile(profile, grid.n_subbands),
        noise_power=float(dbm_to_mw(thermal_noise_dbm(config.bandwidth_hz, config.noise_figure_db))),
        tx_amplitude=float(np.sqrt(dbm_to_mw(config.tx_power_dbm))),
        leakage=leakage,
        pilots=pilot_sequences(config.M, config.T),
    )


def _deploy(config: SystemConfig, rngs: Sequence[np.random.Generator]) -> Deployment:
    # One draw per device stream keeps device m's position independent of M
    parts = [deploy_nodes(1, config.r_min_m, config.r_max_m, rng) for rng in rngs]
    return Deployment(
        radii=np.concatenate([p.radii for p in parts]),
        angles=np.concatenate([p.angles for p in parts]),
        r_min=config.r_min_m,
        r_max=config.r_max_m,
    )


def _assignment_rng(config: SystemConfig, trial: int) -> np.random.Generator:
    if config.reassign_per_frame:
        return streams.trial_stream(config.master_seed, trial, streams.ASSIGNMENT)
    return streams.stream(config.master_seed, streams.ASSIGNMENT_KEY)


def _draw_payload(setup: PointSetup, rng: np.random.Generator) -> Payload:
    vector = int(rng.integers(setup.codebook.q))
    bits = rng.integers(0, 2, sum(setup.bit_split))
    psk_bits, fsk_bits = split_stream(bits, setup.bit_split)
    symbol = int(bits_to_indices(psk_bits, setup.psk)[0])
    tone = int(bits_to_indices(fsk_bits, setup.fsk)[0]) if setup.fsk else 0
    return Payload(bits=bits, vector=vector, symbol=symbol, tone=tone)


def _true_taps(setup: PointSetup, channels: LinkArray, assignment: Assignment) -> np.ndarray:
    """Effective taps (transmit amplitude included) at the start of each device's data block, (M, N, K)."""
    times = [setup.grid.data_start(block) for block in assignment.blocks]
    return setup.tx_amplitude * channels.taps_per_device(times)


def arriving_share(received_power, noise_power: float):
    """Share x / (1 + x) of a delayed component that clears the noise floor, x its received SNR."""
    snr = np.asarray(received_power, dtype=float) / noise_power
    return snr / (1.0 + snr)


def _per_block(grid: BlockGrid, energy: np.ndarray) -> np.ndarray:
    """Sum a (rows, frame_len) energy map over every block cell, (n_subbands, n_slots)."""
    return energy.reshape(grid.n_subbands, grid.tones_per_block, grid.n_slots, grid.block_len).sum(axis=(1, 3))


def _interference_profiles(
    setup: PointSetup, unit_frames: np.ndarray, power_gains: np.ndarray, assignment: Assignment
) -> List[List[DelayProfile]]:
    """
    Received power-delay profile of every interferer inside every victim block.

    Tap k of interferer j contributes its mean received power times the share of
    j's transmit energy that lands on the victim's block once delayed by the
    tap's block-sample shift and leaked across rows. Energy spilled in time onto
    a block j does not share counts only as far as it clears the noise floor;
    Doppler leakage across rows always counts. Delays stay in wideband samples.
    """
    grid = setup.grid
    m_dev, n_taps = len(assignment), setup.profile.size
    received = setup.tx_amplitude ** 2 * np.outer(power_gains, setup.profile)  # (M, K)
    shifts = resolved_shifts(n_taps, grid.n_subbands)
    blocks = np.asarray(assignment.blocks)
    slots, subbands = np.asarray([grid.cell(block) for block in blocks]).T
    shared = blocks[:, None] == blocks[None, :]
    gate = np.where(shared[:, :, None], 1.0, arriving_share(received, setup.noise_power)[None, :, :])

    overlap = np.zeros((m_dev, m_dev, n_taps))  # victim, interferer, tap
    for j in range(m_dev):
        energy = np.sum(np.abs(unit_frames[j]) ** 2)
        if energy == 0:
            continue
        for k, shift in enumerate(shifts):
            if shift >= grid.frame_len:
                continue
            shifted = np.zeros_like(unit_frames[j])
            shifted[:, shift:] = unit_frames[j][:, : grid.frame_len - shift]
            spilled = np.abs(shifted) ** 2
            leaked = np.abs(apply_row_leakage(shifted, setup.leakage)) ** 2 - spilled
            on_spill = _per_block(grid, spilled)[subbands, slots]
            on_leak = _per_block(grid, leaked)[subbands, slots]
            overlap[:, j, k] = (gate[:, j, k] * on_spill + on_leak) / energy

    delays = np.arange(n_taps, dtype=float)
    profiles = []
    for m in range(m_dev):
        victim = [DelayProfile(tap_powers=received[j] * overlap[m, j], delays=delays) for j in range(m_dev) if j != m]
        if setup.config.interference_includes_serving:
            victim.append(DelayProfile(tap_powers=received[m].copy(), delays=delays))
        profiles.append(victim)
    return profiles


def simulate_trial(setup: PointSetup, trial: int) -> TrialRecord:
    """
    Simulate one frame: deploy, fade, assign, send pilots and data, estimate, decode, measure.

    Args:
        setup: Shared point setup
        trial: Trial index (selects the random streams)

    Returns:
        TrialRecord with one entry per device link
    """
    config, grid, book = setup.config, setup.grid, setup.codebook
    seed, m_dev = config.master_seed, config.M

    geometry = [streams.link_stream(seed, trial, m, streams.GEOMETRY) for m in range(m_dev)]
    deployment = _deploy(config, geometry)
    gains = [
        large_scale_gain(setup.scenario, radius, rng, config.carrier_ghz, config.shadowing_mean_db,
                         config.shadowing_variance_db2, setup.pathloss_model)
        for radius, rng in zip(deployment.radii, geometry)
    ]
    tap_rngs = [streams.link_stream(seed, trial, m, streams.TAPS) for m in range(m_dev)]
    channels = gen_link_channels(gains, config.N, setup.channel_profile, tap_rngs,
                                 config.doppler_norm, config.n_oscillators)
    assignment = assign_blocks(grid, m_dev, _assignment_rng(config, trial), config.assignment_policy)
    payload = [_draw_payload(setup, streams.link_stream(seed, trial, m, streams.DATA)) for m in range(m_dev)]

    power_gains = np.array([g.power_gain for g in gains])

    # Each slot sends its pilot block right ahead of its data block
    true_taps = _true_taps(setup, channels, assignment)
    if config.perfect_csi:
        est_taps = true_taps
    else:
        pilot_frames = np.stack([
            setup.tx_amplitude * spread(1.0, setup.pilots[m], assignment.block_of(m), grid, tone=0)
            for m in range(m_dev)
        ])
        pilot_rx = mac_superpose(
            pilot_frames, channels, setup.noise_power,
            streams.trial_stream(seed, trial, streams.NOISE_PILOT),
            sample_times=grid.pilot_times(), leakage=setup.leakage,
        )
        prior = setup.tx_amplitude ** 2 * power_gains[:, None] * setup.channel_profile[None, :]
        estimate = estimate_csi(
            [obs[:, 0, :] for obs in demap(pilot_rx, grid, assignment)],
            setup.pilots, config.estimator, setup.noise_power, config.n_taps, prior,
        )
        est_taps = estimate.taps

    unit_frames = np.stack([
        spread(setup.psk.points[p.symbol], book.vector(p.vector), assignment.block_of(m), grid, tone=p.tone)
        for m, p in enumerate(payload)
    ])
    received, components = mac_superpose(
        setup.tx_amplitude * unit_frames, channels, setup.noise_power,
        streams.trial_stream(seed, trial, streams.NOISE_DATA),
        sample_times=grid.data_times(), leakage=setup.leakage, return_components=True,
    )

    decoder = get_decoder(config.decoder)
    observations = demap(received, grid, assignment)
    component_blocks = demap(components, grid, assignment)
    serving, interference, decoded_bits, decoded_symbols, decoded_vectors = [], [], [], [], []
    for m, (obs, p) in enumerate(zip(observations, payload)):
        tone = square_law_detect(np.sum(np.abs(obs) ** 2, axis=-1)) if setup.fsk else 0
        decision = decoder(obs[:, tone, :], est_taps[m], book, setup.psk, setup.noise_power)
        fsk_bits = indices_to_bits([tone], setup.fsk) if setup.fsk else np.zeros(0, dtype=int)
        decoded_bits.append(merge_streams(decision.bits, fsk_bits, setup.bit_split))
        decoded_symbols.append(int(decision.symbol_indices[0]) * setup.n_tones + tone)
        decoded_vectors.append(decision.vector_index)

        # Receive combining with the normalized estimated template of the sent block
        template = setup.psk.points[p.symbol] * templates(est_taps[m], book, grid.block_len)[p.vector]
        norm = np.linalg.norm(template)
        wanted = component_blocks[m][m, :, p.tone, :]
        unwanted = component_blocks[m][:, :, p.tone, :].sum(axis=0) - wanted
        if norm > 0:
            serving.append(abs(np.vdot(template / norm, wanted)) ** 2)
            interference.append(abs(np.vdot(template / norm, unwanted)) ** 2)
        else:
            serving.append(0.0)
            interference.append(0.0)

    profiles = _interference_profiles(setup, unit_frames, power_gains, assignment)
    pooled = [profile for victim in profiles for profile in victim]
    total = sum(p.total_power for p in pooled)
    if total > 0:
        delay_mean = sum(float(p.tap_powers @ p.delays) for p in pooled) / total
        delay_second = sum(float(p.tap_powers @ p.delays ** 2) for p in pooled) / total
    else:
        delay_mean = delay_second = 0.0

    record = TrialRecord(
        trial=trial,
        serving=np.asarray(serving, dtype=float),
        interference=np.asarray(interference, dtype=float),
        noise_power=setup.noise_power,
        bits_true=np.asarray([p.bits for p in payload]),
        bits_decoded=np.asarray(decoded_bits),
        symbols_true=np.asarray([p.symbol * setup.n_tones + p.tone for p in payload]),
        symbols_decoded=np.asarray(decoded_symbols),
        vectors_true=np.asarray([p.vector for p in payload]),
        vectors_decoded=np.asarray(decoded_vectors),
        interference_metric=float(np.mean([interference_linear(v) for v in profiles])),
        delay_mean=delay_mean,
        delay_second_moment=delay_second,
    )
    logger.debug(f"Trial {trial} ({setup.mode.value}/{setup.scenario}): "
                 f"median SINR {np.median(record.sinr_db):.2f} dB")
    return record


def _run_chunk(setup: PointSetup, trials: Sequence[int]) -> List[TrialRecord]:
    return [simulate_trial(setup, trial) for trial in trials]


def _chunks(n_trials: int, n_chunks: int) -> List[range]:
    size = max(1, -(-n_trials // max(1, n_chunks)))
    return [range(start, min(start + size, n_trials)) for start in range(0, n_trials, size)]


def run_trials(setup: PointSetup, pool: Optional[ProcessPoolExecutor] = None, workers: int = 1) -> List[TrialRecord]:
    """
    Run every trial of one point, in trial order.

    With a pool the trials are cut into ordered chunks; map() yields them back in
    submission order, so the records match a serial run exactly.
    """
    n_trials = setup.config.n_trials
    if pool is None:
        return _run_chunk(setup, range(n_trials))
    chunks = _chunks(n_trials, 4 * workers)
    records: List[TrialRecord] = []
    for part in pool.map(_run_chunk, [setup] * len(chunks), chunks):
        records.extend(part)
    return records


def _rows(estimates: Dict[str, Estimate], x: float, mode: Mode, scenario: str, seed: int) -> List[ResultRow]:
    return [
        ResultRow(x, metric_key(name, mode.value, scenario), e.estimate, e.ci_lo, e.ci_hi, e.n, seed)
        for name, e in estimates.items()
    ]


def run_experiment(config: SystemConfig, workers: Optional[int] = None) -> ResultTable:
    """
    Run the full experiment described by a config.

    For every scenario and mode, each sweep point is simulated over n_trials
    frames and summarized into one row per metric. Outage against realized SINR
    is binned over all points of a series.

    Args:
        config: Validated or raw configuration (checked here)
        workers: Worker processes; defaults to config.workers

    Returns:
        ResultTable, identical for any worker count
    """
    config.check()
    workers = workers or config.workers
    seed = int(config.master_seed)
    table = ResultTable()
    codebooks: Dict[Tuple[int, int], Codebook] = {}
    points = config.points()

    logger.info(f"Starting experiment: modes={config.modes} scenarios={config.scenarios} "
                f"points={len(points)} trials={config.n_trials} workers={workers}")

    executor = ProcessPoolExecutor(max_workers=workers) if workers > 1 else nullcontext(None)
    with executor as pool:
        for scenario in config.scenarios:
            for mode in (Mode.parse(m) for m in config.modes):
                series: List[TrialRecord] = []
                for value, point in points:
                    key = (point.Q, point.T)
                    if key not in codebooks:
                        codebooks[key] = build_codebook(point)
                    setup = build_setup(point, mode, scenario, codebooks[key])
                    records = run_trials(setup, pool, workers)
                    estimates = summarize(records, config.outage_threshold_db)
                    x = float(point.tx_power_dbm if value is None else value)
                    table.extend(_rows(estimates, x, mode, scenario, seed))
                    series.extend(records)
                    logger.info(
                        f"{mode.value}/{scenario} {config.sweep_param or 'tx_power_dbm'}={x:g}: "
                        f"outage={estimates['outage_probability'].estimate:.4f} "
                        f"sinr={estimates['output_sinr_db'].estimate:.2f} dB"
                    )

                bins = outage_vs_sinr(series, config.sinr_bin_width_db, config.outage_threshold_db)
                for centre, estimate in bins:
                    table.append(ResultRow(centre, metric_key("outage_vs_sinr", mode.value, scenario),
                                           estimate.estimate, estimate.ci_lo, estimate.ci_hi, estimate.n, seed))

    logger.info(f"Experiment finished: {len(table)} result rows")
    return table
