"""Counter-based random number streams built on numpy's Philox generator.

A stream is identified by a (seed, stream) pair of 64-bit integers and a
draw inside a stream by its index, so any value can be regenerated from
(seed, stream, index) alone, on any platform and in any order. Monte Carlo
replications derive disjoint streams from (master seed, replication index)
with no shared mutable state.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

_MASK64 = (1 << 64) - 1


def _philox(seed: int, stream: int, counter: int = 0) -> np.random.Philox:
    key = np.array([seed & _MASK64, stream & _MASK64], dtype=np.uint64)
    return np.random.Philox(key=key, counter=counter)


def spawn(seed: int, stream: int = 0) -> np.random.Generator:
    """Generator positioned at the start of one stream.

    Equal (seed, stream) pairs yield identical sequences; distinct pairs
    yield statistically independent ones (distinct Philox keys). Batch
    draws and repeated scalar draws from the same stream produce the same
    sequence, which the engine relies on.
    """
    return np.random.Generator(_philox(seed, stream))


@dataclass(frozen=True)
class RngState:
    """Immutable position inside one random stream.

    Supports a functional draw style: operations take an RngState and
    return the drawn value together with the advanced state. Each index
    addresses its own disjoint Philox counter range (stride 2**64 blocks),
    so draws at different indices never overlap and may be evaluated in
    any order.
    """

    seed: int
    stream: int = 0
    index: int = 0

    def generator(self) -> np.random.Generator:
        """Fresh generator for this state's counter block."""
        return np.random.Generator(
            _philox(self.seed, self.stream, (self.index & _MASK64) << 64)
        )

    def split(self, stream: int) -> "RngState":
        """Sibling stream under the same seed, starting at index 0."""
        return RngState(self.seed, stream, 0)

    def advance(self) -> "RngState":
        """State pointing at the next draw index."""
        return replace(self, index=self.index + 1)


def uniform(rng: RngState) -> tuple[float, RngState]:
    """One uniform draw on [0, 1) and the advanced state."""
    return float(rng.generator().random()), rng.advance()
