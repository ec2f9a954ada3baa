"""Reproducible random streams keyed by ``(seed, stream_id)``."""
from dataclasses import dataclass

import numpy as np

_MASK64 = (1 << 64) - 1


@dataclass(frozen=True)
class RngStream:
    """A named, reproducible source of randomness.

    Every call to :meth:`generator` returns a fresh PCG64 generator positioned at
    the start of the stream, so identical ``(seed, stream_id)`` pairs always
    reproduce identical draws.
    """

    seed: int
    stream_id: int = 0

    def generator(self):
        ss = np.random.SeedSequence([self.seed & _MASK64, self.stream_id & _MASK64])
        return np.random.Generator(np.random.PCG64(ss))

    def child(self, *keys):
        """Derive an independent stream from this one and integer ``keys``."""
        ss = np.random.SeedSequence(
            [self.stream_id & _MASK64] + [int(k) & _MASK64 for k in keys]
        )
        return RngStream(self.seed, int(ss.generate_state(1, np.uint64)[0]))


def as_generator(rng):
    """Accept an RngStream, a numpy Generator, an int seed, or None."""
    if isinstance(rng, RngStream):
        return rng.generator()
    if isinstance(rng, np.random.Generator):
        return rng
    return np.random.default_rng(rng)
