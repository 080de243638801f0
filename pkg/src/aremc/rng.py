"""Counter-based random streams keyed by (seed, work unit)."""

import zlib

import numpy as np


def block_generator(seed: int, index: int, stream: str = "") -> np.random.Generator:
    """Philox generator for work unit ``index`` of a named stream.

    Streams are independent of the order in which work units run, so
    parallel and serial execution give identical draws.
    """
    tag = zlib.crc32(stream.encode())
    ss = np.random.SeedSequence(entropy=int(seed), spawn_key=(tag, int(index)))
    return np.random.Generator(np.random.Philox(ss))
