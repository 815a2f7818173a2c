"""Block grid construction, exclusive assignment, spreading and demapping."""

import logging
from typing import List, Optional

import numpy as np

from ..core.exceptions import ConfigurationError, ContractViolation
from ..models import Assignment, BlockGrid, Mode

logger = logging.getLogger(__name__)


def lattice_subbands(l: int) -> int:
    """Most-square factorization of l: the largest divisor not above sqrt(l)."""
    return max(d for d in range(1, int(np.sqrt(l)) + 1) if l % d == 0)


def build_grid(
    mode,
    l: int,
    m: int,
    t: int,
    guard: int = 0,
    tones_per_block: int = 1,
    stf_subbands: Optional[int] = None,
) -> BlockGrid:
    """
    Build the indexed block grid for a spreading mode.

    ST puts L blocks one after another in time, SF puts them side by side in
    frequency, STF lays them out as a slots x subbands lattice. The baseline
    (mode none) has one block shared by every device.

    Args:
        mode: Mode or its name
        l: Number of blocks
        m: Number of devices
        t: Chips per block (dispersion vector length)
        guard: Guard samples appended to each block
        tones_per_block: FSK tones (rows) per frequency block; SF/STF only
        stf_subbands: Subbands of the STF lattice (default: most-square)

    Returns:
        BlockGrid
    """
    mode = Mode.parse(mode)
    if m < 1:
        raise ConfigurationError(f"m >= 1 violated: m={m}")
    if t < 1 or guard < 0:
        raise ConfigurationError(f"invalid block timing: t={t}, guard={guard}")

    if mode is Mode.NONE:
        slots, subbands, tones, l = 1, 1, 1, 1
    else:
        if l < m:
            raise ConfigurationError(f"L >= M violated: L={l}, M={m}")
        if mode is Mode.ST:
            slots, subbands, tones = l, 1, 1
        elif mode is Mode.SF:
            slots, subbands, tones = 1, l, tones_per_block
        else:
            subbands = stf_subbands or lattice_subbands(l)
            if l % subbands:
                raise ConfigurationError(f"STF lattice: L={l} not divisible into {subbands} subbands")
            slots, tones = l // subbands, tones_per_block

    index_map = tuple((b // subbands, b % subbands) for b in range(l))
    grid = BlockGrid(
        mode=mode,
        n_blocks=l,
        n_slots=slots,
        n_subbands=subbands,
        tones_per_block=tones,
        symbol_len=t,
        guard=guard,
        index_map=index_map,
    )
    logger.debug(f"Built {mode.value} grid: {slots} slots x {subbands} subbands x {tones} tones")
    return grid


def assign_blocks(grid: BlockGrid, m: int, rng: Optional[np.random.Generator], policy: str = "random") -> Assignment:
    """
    Map devices to blocks, one device per block.

    Args:
        grid: Block grid
        m: Number of devices
        rng: Random source for the random policy
        policy: "random" (uniform injective map) or "identity"

    Returns:
        Assignment
    """
    if grid.mode is Mode.NONE:
        return Assignment(blocks=(0,) * m, shared=True)
    if grid.n_blocks < m:
        raise ConfigurationError(f"L >= M violated: L={grid.n_blocks}, M={m}")
    if policy == "identity":
        blocks = tuple(range(m))
    elif policy == "random":
        blocks = tuple(int(b) for b in rng.permutation(grid.n_blocks)[:m])
    else:
        raise ConfigurationError(f"unknown assignment policy {policy!r}")
    return Assignment(blocks=blocks)


def spread(symbol, vector, block: int, grid: BlockGrid, tone: int = 0) -> np.ndarray:
    """
    Place symbol * vector on a block of an otherwise silent frame.

    Args:
        symbol: Modulated symbol
        vector: Dispersion vector of length T
        block: Block index
        grid: Block grid
        tone: FSK tone (row within the block)

    Returns:
        (rows, frame_len) complex frame
    """
    vector = np.asarray(vector, dtype=complex)
    if vector.shape != (grid.symbol_len,):
        raise ContractViolation(f"vector length {vector.shape} does not match T={grid.symbol_len}")
    if not 0 <= tone < grid.tones_per_block:
        raise ContractViolation(f"tone {tone} outside {grid.tones_per_block} tones per block")

    frame = np.zeros(grid.shape, dtype=complex)
    row = grid.rows(block).start + tone
    start = grid.times(block).start
    frame[row, start:start + grid.symbol_len] = symbol * vector
    return frame


def sf_demap(received: np.ndarray, grid: BlockGrid, subband: int) -> np.ndarray:
    """Rows of one frequency block, all time slots."""
    start = subband * grid.tones_per_block
    return received[..., start:start + grid.tones_per_block, :]


def st_demap(received: np.ndarray, grid: BlockGrid, slot: int) -> np.ndarray:
    """Samples of one time slot."""
    return received[..., slot * grid.block_len:(slot + 1) * grid.block_len]


def demap(received: np.ndarray, grid: BlockGrid, assignment: Assignment) -> List[np.ndarray]:
    """
    Extract every device's block from the gateway frame.

    Frequency demapping runs before time demapping.

    Args:
        received: (..., rows, frame_len) gateway frame, typically (N, rows, frame_len)
        grid: Block grid
        assignment: Device to block map

    Returns:
        Per-device observations of shape (..., tones_per_block, block_len)
    """
    if received.shape[-2:] != grid.shape:
        raise ContractViolation(f"frame shape {received.shape[-2:]} does not match grid {grid.shape}")
    observations = []
    for block in assignment.blocks:
        slot, subband = grid.cell(block)
        observations.append(st_demap(sf_demap(received, grid, subband), grid, slot))
    return observations
