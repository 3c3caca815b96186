"""Counter-based random streams.

Every source of randomness in the pipeline is a Philox generator keyed on
(seed, stream index).  Streams keyed on distinct indices are independent and
reproducible in isolation, so tie-breaking per cell and sampling per
realization give identical results no matter in which order (or on how many
threads) the work is carried out.
"""

from __future__ import annotations

import numpy as np

_MASK64 = 0xFFFFFFFFFFFFFFFF


def philox_stream(seed: int, index: int) -> np.random.Generator:
    """Independent generator for stream `index` under the given seed."""
    key = np.array([int(seed) & _MASK64, int(index) & _MASK64], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


def stream_uniforms(seed: int, count: int, draws: int) -> np.ndarray:
    """(count, draws) uniforms; row r is the start of the (seed, r) stream.

    Bitwise-equivalent to ``philox_stream(seed, r).random(draws)`` for each
    row, but rekeys a single Philox in place instead of constructing one
    bit generator per stream, which is what makes large batches cheap.
    """
    bitgen = np.random.Philox(key=np.zeros(2, dtype=np.uint64))
    gen = np.random.Generator(bitgen)
    state = bitgen.state
    state["state"]["key"][0] = int(seed) & _MASK64
    out = np.empty((count, draws))
    for r in range(count):
        state["state"]["key"][1] = r
        state["state"]["counter"][:] = 0
        state["buffer_pos"] = 4
        bitgen.state = state
        out[r] = gen.random(draws)
    return out
