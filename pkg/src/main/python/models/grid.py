"""Indexed block grid and device-to-block assignment."""

from dataclasses import dataclass
from enum import Enum
from typing import Tuple

import numpy as np

from ..core.exceptions import ConfigurationError, ContractViolation


class Mode(str, Enum):
    """Spreading mode; NONE is the overlapping no-spreading baseline."""

    NONE = "none"
    ST = "ST"
    SF = "SF"
    STF = "STF"

    @classmethod
    def parse(cls, value) -> "Mode":
        if isinstance(value, Mode):
            return value
        for mode in cls:
            if str(value).lower() == mode.value.lower():
                return mode
        raise ConfigurationError(f"unknown mode {value!r} (expected none, ST, SF or STF)")

    @property
    def uses_fsk(self) -> bool:
        return self in (Mode.SF, Mode.STF)

    @property
    def uses_psk(self) -> bool:
        return self in (Mode.NONE, Mode.ST, Mode.STF)


@dataclass(frozen=True)
class BlockGrid:
    """
    Time x frequency lattice of indexed blocks.

    The frame is an array of (n_rows, frame_len) samples. A block occupies
    `tones_per_block` consecutive rows (its FSK tones) and `block_len` samples
    (T chips plus the guard interval) in one time slot.
    """

    mode: Mode
    n_blocks: int
    n_slots: int
    n_subbands: int
    tones_per_block: int
    symbol_len: int
    guard: int
    index_map: Tuple[Tuple[int, int], ...]  # block -> (slot, subband)

    @property
    def block_len(self) -> int:
        return self.symbol_len + self.guard

    @property
    def frame_len(self) -> int:
        return self.n_slots * self.block_len

    @property
    def n_rows(self) -> int:
        return self.n_subbands * self.tones_per_block

    @property
    def shape(self) -> Tuple[int, int]:
        return self.n_rows, self.frame_len

    def cell(self, block: int) -> Tuple[int, int]:
        if not 0 <= block < self.n_blocks:
            raise ContractViolation(f"block {block} outside grid of {self.n_blocks} blocks")
        return self.index_map[block]

    def rows(self, block: int) -> slice:
        _, subband = self.cell(block)
        start = subband * self.tones_per_block
        return slice(start, start + self.tones_per_block)

    def times(self, block: int) -> slice:
        slot, _ = self.cell(block)
        return slice(slot * self.block_len, (slot + 1) * self.block_len)

    def support_mask(self, block: int) -> np.ndarray:
        mask = np.zeros(self.shape, dtype=bool)
        mask[self.rows(block), self.times(block)] = True
        return mask

    def slot_start_times(self, offset: int = 0, stride: int = 1) -> np.ndarray:
        """Per-sample time of the start of the slot each sample belongs to.

        With stride 2 the slots are spaced two blocks apart, leaving room for
        the pilot block sent ahead of every data block.
        """
        slots = np.arange(self.frame_len) // self.block_len
        return offset + slots * stride * self.block_len

    def pilot_times(self) -> np.ndarray:
        """Slot start times of the pilot blocks; each sits right ahead of its data block."""
        return self.slot_start_times(0, stride=2)

    def data_times(self) -> np.ndarray:
        return self.slot_start_times(self.block_len, stride=2)

    def data_start(self, block: int) -> int:
        """Air time at which the data block `block` starts."""
        slot, _ = self.cell(block)
        return (2 * slot + 1) * self.block_len

    @property
    def pilot_lag(self) -> int:
        """Samples between a pilot block and the data block it serves."""
        return self.block_len

    def frame_latency_s(self, block_duration_s: float) -> float:
        """Time to serve every slot of the frame once."""
        return self.n_slots * block_duration_s

    def guard_spectrum_hz(self, guard_band_hz: float) -> float:
        """Spectrum spent on guard bands between frequency blocks."""
        if self.mode in (Mode.NONE, Mode.ST):
            return 0.0
        return self.n_subbands * guard_band_hz


@dataclass(frozen=True)
class Assignment:
    """Device to block map; injective unless the grid is the shared baseline block."""

    blocks: Tuple[int, ...]
    shared: bool = False

    def __post_init__(self):
        if not self.shared and len(set(self.blocks)) != len(self.blocks):
            raise ContractViolation("two devices assigned to the same block")

    def __len__(self) -> int:
        return len(self.blocks)

    @property
    def is_injective(self) -> bool:
        return len(set(self.blocks)) == len(self.blocks)

    def block_of(self, device: int) -> int:
        return self.blocks[device]
