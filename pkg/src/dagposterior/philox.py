"""Vectorized Philox4x32-10 counter-based generator.

Every output block is a pure function of a 128-bit counter and a 64-bit key,
so a random stream can be addressed by coordinates (sample index, parent,
attempt, ...) instead of by position in a sequential stream. That is what
makes Monte-Carlo draws independent of chunking and thread count.

Reference: Salmon et al., "Parallel random numbers: as easy as 1, 2, 3" (SC11).
"""

import numpy as np

__all__ = ["philox4x32", "uniform_pair"]

_M0 = np.uint64(0xD2511F53)
_M1 = np.uint64(0xCD9E8D57)
_W0 = 0x9E3779B9
_W1 = 0xBB67AE85
_MASK = np.uint64(0xFFFFFFFF)
_SHIFT = np.uint64(32)


def philox4x32(counter, key, rounds=10):
    """Apply Philox4x32 to broadcastable counter words.

    Parameters
    ----------
    counter : sequence of 4 array_like
        Counter words ``c0..c3``; each must fit in 32 bits.
    key : sequence of 2 ints
        Key words ``k0, k1``.

    Returns
    -------
    list of 4 ndarray of uint64
        Output words, each in ``[0, 2**32)``.
    """
    c = np.broadcast_arrays(*(np.asarray(w, dtype=np.uint64) for w in counter))
    c0, c1, c2, c3 = (w & _MASK for w in c)
    k0, k1 = int(key[0]) & 0xFFFFFFFF, int(key[1]) & 0xFFFFFFFF
    for _ in range(rounds):
        p0 = _M0 * c0
        p1 = _M1 * c2
        c0, c1, c2, c3 = (
            (p1 >> _SHIFT) ^ c1 ^ np.uint64(k0),
            p1 & _MASK,
            (p0 >> _SHIFT) ^ c3 ^ np.uint64(k1),
            p0 & _MASK,
        )
        k0 = (k0 + _W0) & 0xFFFFFFFF
        k1 = (k1 + _W1) & 0xFFFFFFFF
    return [c0, c1, c2, c3]


def _to_open_unit(hi, lo):
    # 53 random bits, centred in their cell: strictly inside (0, 1)
    bits = ((hi >> np.uint64(5)) << np.uint64(26)) | (lo >> np.uint64(6))
    return (bits.astype(np.float64) + 0.5) * (1.0 / 9007199254740992.0)


def uniform_pair(counter, key):
    """Two independent doubles in the open interval (0, 1) per counter."""
    w = philox4x32(counter, key)
    return _to_open_unit(w[0], w[1]), _to_open_unit(w[2], w[3])
