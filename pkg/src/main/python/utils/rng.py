"""Counter-based random streams derived from a master seed.

Every draw in a trial comes from a stream keyed by (trial, link, purpose), so
results never depend on how trials are scheduled across workers.
"""

import numpy as np

# Link slot used for draws that belong to the whole trial rather than a device.
TRIAL_LINK = 2**31 - 1

# Purposes
GEOMETRY = 0
TAPS = 1
DATA = 2
ASSIGNMENT = 3
NOISE_PILOT = 4
NOISE_DATA = 5

CODEBOOK_KEY = 0xC0DE
ASSIGNMENT_KEY = 0xB10C


def stream(master_seed: int, *key: int) -> np.random.Generator:
    """
    Return an independent Philox generator for the given key path.

    Args:
        master_seed: Experiment master seed (unsigned 64-bit)
        *key: Spawn key, e.g. (trial, device, purpose)

    Returns:
        numpy Generator backed by the counter-based Philox bit generator
    """
    seq = np.random.SeedSequence(int(master_seed), spawn_key=tuple(int(k) for k in key))
    return np.random.Generator(np.random.Philox(seq))


def link_stream(master_seed: int, trial: int, link: int, purpose: int) -> np.random.Generator:
    """Stream for one device in one trial."""
    return stream(master_seed, trial, link, purpose)


def trial_stream(master_seed: int, trial: int, purpose: int) -> np.random.Generator:
    """Stream for trial-wide draws (assignment, noise)."""
    return stream(master_seed, trial, TRIAL_LINK, purpose)
