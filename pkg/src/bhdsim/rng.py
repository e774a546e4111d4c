"""Counter-based Gaussian streams.

Every block of ``CHUNK`` samples is drawn from its own Philox generator keyed
by (seed, stream, chunk index), so any sample range can be produced on its
own and chunked synthesis matches monolithic synthesis bit for bit.
"""

from __future__ import annotations

import zlib

import numpy as np

CHUNK = 1 << 16


def stream_id(label: str) -> int:
    """Stable integer id for a named noise stream."""
    return zlib.crc32(label.encode("utf-8"))


def chunk_generator(seed: int, stream: int, chunk: int) -> np.random.Generator:
    ss = np.random.SeedSequence([int(seed), int(stream), int(chunk)])
    return np.random.Generator(np.random.Philox(ss))


def standard_normal(seed: int, stream: int, start: int, stop: int) -> np.ndarray:
    """Samples ``start:stop`` of the (seed, stream) standard-normal sequence."""
    if stop < start:
        raise ValueError("stop < start")
    out = np.empty(stop - start)
    first, last = start // CHUNK, (stop - 1) // CHUNK if stop > start else -1
    pos = 0
    for chunk in range(first, last + 1):
        block = chunk_generator(seed, stream, chunk).standard_normal(CHUNK)
        lo = max(start - chunk * CHUNK, 0)
        hi = min(stop - chunk * CHUNK, CHUNK)
        out[pos : pos + hi - lo] = block[lo:hi]
        pos += hi - lo
    return out
