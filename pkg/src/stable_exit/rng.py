"""Reproducible parallel random number streams.

Streams are keyed by a ``(seed, stream_id)`` pair fed to a counter-based
Philox generator, so any stream can be created independently on any worker
and always yields the same sequence.  Workers own disjoint ``stream_id``
values and never share generator state.
"""

from dataclasses import dataclass

import numpy as np

_UINT64_MASK = (1 << 64) - 1


@dataclass(frozen=True)
class RngStream:
    """Value identifying one reproducible random stream."""

    seed: int
    stream_id: int = 0

    def __post_init__(self):
        if not 0 <= self.seed <= _UINT64_MASK:
            raise ValueError("seed must fit in an unsigned 64-bit integer")
        if not 0 <= self.stream_id <= _UINT64_MASK:
            raise ValueError("stream_id must fit in an unsigned 64-bit integer")

    def bit_generator(self) -> np.random.BitGenerator:
        """Fresh Philox generator positioned at the start of the stream."""
        key = np.array([self.seed, self.stream_id], dtype=np.uint64)
        return np.random.Philox(key=key)


def as_bit_generator(rng) -> np.random.BitGenerator:
    """Accept an RngStream (fresh stream) or a BitGenerator (continues in place)."""
    if isinstance(rng, RngStream):
        return rng.bit_generator()
    if isinstance(rng, np.random.BitGenerator):
        return rng
    if isinstance(rng, np.random.Generator):
        return rng.bit_generator
    raise TypeError(f"expected RngStream or numpy BitGenerator, got {type(rng)!r}")
