"""Seeded pseudo-random streams for reproducible synthetic data.

All randomness in the package flows through Xoshiro256PP, a fixed,
documented 64-bit shift-register generator (xoshiro256++ by Blackman and
Vigna) seeded through the SplitMix64 scrambler.  Streams are therefore
reproducible bit-for-bit across platforms and numpy versions; numpy is
used only to post-process blocks of raw draws.

Consumption conventions (relied on by synth and tests):

* ``uniforms(m)`` consumes m raw 64-bit draws, mapping the top 53 bits
  into [0, 1).
* ``gaussians(m)`` consumes 2*ceil(m/2) raw draws: Box-Muller pairs,
  radius from the even draws (mapped into (0, 1]), angle from the odd
  draws, cos before sin within a pair.
* ``below(bound)`` consumes one draw plus rejections (unbiased modulo
  rejection sampling).
* ``shuffle(a)`` runs Fisher-Yates from the top index down, one
  ``below`` call per position.
"""

import numpy as np

_M64 = (1 << 64) - 1
_U53 = float(2.0 ** -53)


def _splitmix64(state: int):
    """One SplitMix64 step: returns (new_state, output)."""
    state = (state + 0x9E3779B97F4A7C15) & _M64
    z = state
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _M64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _M64
    return state, z ^ (z >> 31)


def mix_seed(*parts) -> int:
    """Fold integers into a single 64-bit seed, deterministically.

    Used to derive per-trial / per-restart child seeds from a master
    seed; any change to any part changes the result.
    """
    s = 0x243F6A8885A308D3
    for p in parts:
        s ^= int(p) & _M64
        s, out = _splitmix64(s)
        s ^= out
    return s & _M64


class Xoshiro256PP:
    """xoshiro256++ stream with SplitMix64 state initialisation."""

    def __init__(self, seed: int):
        state = int(seed) & _M64
        s = []
        for _ in range(4):
            state, out = _splitmix64(state)
            s.append(out)
        if not any(s):  # the all-zero state is a fixed point
            s[0] = 1
        self._s = s

    def next_u64(self) -> int:
        s0, s1, s2, s3 = self._s
        x = (s0 + s3) & _M64
        result = ((((x << 23) | (x >> 41)) & _M64) + s0) & _M64
        t = (s1 << 17) & _M64
        s2 ^= s0
        s3 ^= s1
        s1 ^= s2
        s0 ^= s3
        s2 ^= t
        s3 = ((s3 << 45) | (s3 >> 19)) & _M64
        self._s = [s0, s1, s2, s3]
        return result

    def _raw_block(self, m: int) -> np.ndarray:
        out = np.empty(m, dtype=np.uint64)
        s0, s1, s2, s3 = self._s
        for i in range(m):
            x = (s0 + s3) & _M64
            out[i] = ((((x << 23) | (x >> 41)) & _M64) + s0) & _M64
            t = (s1 << 17) & _M64
            s2 ^= s0
            s3 ^= s1
            s1 ^= s2
            s0 ^= s3
            s2 ^= t
            s3 = ((s3 << 45) | (s3 >> 19)) & _M64
        self._s = [s0, s1, s2, s3]
        return out

    def uniforms(self, m: int) -> np.ndarray:
        """m floats uniform on [0, 1)."""
        raw = self._raw_block(m)
        return (raw >> np.uint64(11)).astype(np.float64) * _U53

    def gaussians(self, m: int) -> np.ndarray:
        """m standard normal floats via Box-Muller pairs."""
        if m == 0:
            return np.empty(0)
        pairs = (m + 1) // 2
        raw = self._raw_block(2 * pairs)
        mant = (raw >> np.uint64(11)).astype(np.float64)
        u1 = (mant[0::2] + 1.0) * _U53  # in (0, 1], keeps the log finite
        u2 = mant[1::2] * _U53
        radius = np.sqrt(-2.0 * np.log(u1))
        angle = 2.0 * np.pi * u2
        z = np.empty(2 * pairs)
        z[0::2] = radius * np.cos(angle)
        z[1::2] = radius * np.sin(angle)
        return z[:m]

    def below(self, bound: int) -> int:
        """One integer uniform on [0, bound), rejection-sampled (no modulo bias)."""
        if bound <= 0:
            raise ValueError("bound must be positive")
        limit = (1 << 64) - ((1 << 64) % bound)
        while True:
            r = self.next_u64()
            if r < limit:
                return r % bound

    def shuffle(self, a: np.ndarray) -> None:
        """In-place Fisher-Yates shuffle."""
        for i in range(len(a) - 1, 0, -1):
            j = self.below(i + 1)
            a[i], a[j] = a[j], a[i]
