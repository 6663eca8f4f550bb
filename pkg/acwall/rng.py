"""Counter-based noise streams.

Every Gaussian draw in acwall is addressed by ``(seed, stream, counter)``:
the seed and stream id form the Philox key, the counter selects the block
of the keystream. A draw therefore never depends on how many draws other
replicas, steps or workers made before it.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import IntEnum

import numpy as np
from numpy.typing import NDArray


_MASK64 = (1 << 64) - 1


class Stream(IntEnum):
    """Independent keystreams per consumer."""

    SPDE = 0
    BROWNIAN = 1
    ENSEMBLE = 2


def derive_seed(seed: int, index: int) -> int:
    """Replica seed ``seed + index`` folded into 64 bits."""
    if index < 0:
        raise ValueError('replica index must be >= 0')
    return (int(seed) + int(index)) & _MASK64


def philox_generator(seed: int, stream: int, counter: int = 0) -> np.random.Generator:
    """Generator positioned at ``counter`` of the keystream for ``(seed, stream)``.

    The counter occupies the second 64-bit word so that one addressed block may
    consume up to 2**64 words before touching the next counter value.
    """
    key = (int(stream) & _MASK64) << 64 | (int(seed) & _MASK64)
    return np.random.Generator(np.random.Philox(key=key, counter=(int(counter) & _MASK64) << 64))


@dataclass(frozen=True, slots=True)
class NoiseStream:
    """Addressable source of standard normal vectors."""

    seed: int
    stream: int = Stream.SPDE

    def normal(self, counter: int, size: int | tuple[int, ...]) -> NDArray[np.float64]:
        return philox_generator(self.seed, self.stream, counter).standard_normal(size)
