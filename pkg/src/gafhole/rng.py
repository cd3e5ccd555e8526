"""Counter-based random streams.

Every trial owns a fixed-size block of a Philox counter stream keyed by
``(seed, purpose)``. Trial ``t`` always reads the same uniforms whether it
is generated alone or inside a batch, so results do not depend on batching
or on how many workers share the trials.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Sequence, TypeVar

import numpy as np

__all__ = ["stream_key", "uniforms", "complex_normals", "chunked_map"]

# Philox4x64 emits 4 uint64 words per counter increment
_WORDS = 4

PURPOSES = {
    "coefficients": 1,
    "omega": 2,
    "vandermonde": 3,
    "volume": 4,
    "gaussian-law": 5,
}

T = TypeVar("T")


def stream_key(seed: int, purpose: str | int) -> np.ndarray:
    """128-bit Philox key derived from the user seed and a purpose tag."""
    tag = PURPOSES[purpose] if isinstance(purpose, str) else int(purpose)
    return np.random.SeedSequence([int(seed), tag]).generate_state(2, np.uint64)


def _stride(width: int) -> int:
    return -(-width // _WORDS) * _WORDS


def uniforms(seed: int, purpose: str | int, start: int, count: int, width: int) -> np.ndarray:
    """Uniforms in (0, 1] of shape ``(count, width)`` for streams start..start+count-1."""
    stride = _stride(width)
    counter = np.zeros(4, dtype=np.uint64)
    # a Philox seeded at counter c emits the same words as counter 0 from block c on
    counter[0] = np.uint64(start * (stride // _WORDS))
    bitgen = np.random.Philox(counter=counter, key=stream_key(seed, purpose))
    raw = np.random.Generator(bitgen).random((count, stride))
    # random() is in [0, 1); map to (0, 1] so logs stay finite
    return 1.0 - raw[:, :width]


def complex_normals(u: np.ndarray) -> np.ndarray:
    """Standard complex Gaussians (E|xi|^2 = 1) from pairs of uniforms.

    ``u`` has an even last axis; the first half sets ``|xi|^2 ~ Exp(1)`` by
    inversion and the second half the uniform phase.
    """
    k = u.shape[-1] // 2
    modulus = np.sqrt(-np.log(u[..., :k]))
    phase = 2.0 * np.pi * u[..., k:2 * k]
    return modulus * np.exp(1j * phase)


def chunked_map(fn: Callable[[int, int], T], total: int, chunk: int,
                workers: int = 1) -> list[T]:
    """Apply ``fn(start, count)`` over fixed chunks, returning results in order.

    Chunk boundaries depend only on ``total`` and ``chunk``, never on
    ``workers``, which keeps reductions over the results reproducible.
    """
    spans = [(s, min(chunk, total - s)) for s in range(0, total, chunk)]
    if workers <= 1 or len(spans) <= 1:
        return [fn(s, c) for s, c in spans]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(lambda sc: fn(*sc), spans))
