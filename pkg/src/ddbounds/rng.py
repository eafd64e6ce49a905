"""Portable seeded random numbers for reproducible dataset generation.

The generator is SplitMix64 (Steele, Lea & Flood 2014): state advances by
the 64-bit golden-gamma constant and each output is a fixed avalanche mix
of the state.  Because output ``i`` depends only on ``seed + (i+1)*GAMMA``,
the stream can be produced either one value at a time or as a vectorised
numpy block; both paths yield identical bits.

Derived quantities follow two fixed recipes:

* uniforms in [0, 1) take the top 53 bits: ``(x >> 11) * 2**-53``;
* Gaussians use the Marsaglia polar method, consuming uniforms in pairs
  and caching the spare deviate.

Substreams (per replicate, per member, ...) come from `child_seed`, which
hashes the parent seed with each path index.
"""

from __future__ import annotations

import numpy as np

_MASK = 0xFFFFFFFFFFFFFFFF
GAMMA = 0x9E3779B97F4A7C15
_MIX1 = 0xBF58476D1CE4E5B9
_MIX2 = 0x94D049BB133111EB

_U53 = 2.0 ** -53


def _mix(z: int) -> int:
    z = ((z ^ (z >> 30)) * _MIX1) & _MASK
    z = ((z ^ (z >> 27)) * _MIX2) & _MASK
    return z ^ (z >> 31)


def _mix_vec(z: np.ndarray) -> np.ndarray:
    z = (z ^ (z >> np.uint64(30))) * np.uint64(_MIX1)
    z = (z ^ (z >> np.uint64(27))) * np.uint64(_MIX2)
    return z ^ (z >> np.uint64(31))


def child_seed(seed: int, *path: int) -> int:
    """Derive a substream seed from `seed` and a tuple of path indices.

    The scheme is ``s <- mix(s ^ mix((index + 1) * GAMMA))`` applied per
    index, so (seed, 3) and (seed, 3, 0) are unrelated streams.
    """
    s = seed & _MASK
    for idx in path:
        s = _mix(s ^ _mix(((idx + 1) * GAMMA) & _MASK))
    return s


class PortableRng:
    """SplitMix64 stream with 53-bit uniforms and polar-method Gaussians."""

    def __init__(self, seed: int):
        self._seed = seed & _MASK
        self._count = 0  # raw 64-bit outputs consumed so far
        self._spare: float | None = None

    # -- raw stream ------------------------------------------------------

    def next_u64(self) -> int:
        self._count += 1
        return _mix((self._seed + self._count * GAMMA) & _MASK)

    def _u64_block(self, n: int) -> np.ndarray:
        idx = np.arange(self._count + 1, self._count + n + 1, dtype=np.uint64)
        self._count += n
        z = np.uint64(self._seed) + idx * np.uint64(GAMMA)
        return _mix_vec(z)

    # -- uniforms ----------------------------------------------------------

    def uniform(self) -> float:
        return (self.next_u64() >> 11) * _U53

    def uniforms(self, n: int) -> np.ndarray:
        return (self._u64_block(n) >> np.uint64(11)).astype(np.float64) * _U53

    def integer(self, n: int) -> int:
        """Integer in [0, n) via floor(u*n); bias is < n / 2**53."""
        if n <= 0:
            raise ValueError("integer() needs n >= 1")
        return min(int(self.uniform() * n), n - 1)

    # -- Gaussians ---------------------------------------------------------

    def gauss(self) -> float:
        if self._spare is not None:
            g, self._spare = self._spare, None
            return g
        while True:
            u = 2.0 * self.uniform() - 1.0
            v = 2.0 * self.uniform() - 1.0
            s = u * u + v * v
            if 0.0 < s < 1.0:
                f = np.sqrt(-2.0 * np.log(s) / s)
                self._spare = v * f
                return u * f

    def gaussians(self, n: int) -> np.ndarray:
        """Vectorised polar method; bit-identical to n calls of `gauss`."""
        out = np.empty(n)
        filled = 0
        if self._spare is not None and n > 0:
            out[0], self._spare = self._spare, None
            filled = 1
        while filled < n:
            want = n - filled
            m = max(64, int(1.35 * want) + 16)  # ~78.5% acceptance
            u = 2.0 * self.uniforms(2 * m) - 1.0
            uu, vv = u[0::2], u[1::2]
            s = uu * uu + vv * vv
            ok = (s > 0.0) & (s < 1.0)
            # keep only whole accepted pairs, in stream order
            n_ok = int(np.count_nonzero(ok))
            if n_ok == 0:
                continue
            take_pairs = min(n_ok, (want + 1) // 2)
            # index of the last pair attempt we actually consume
            last = int(np.nonzero(ok)[0][take_pairs - 1])
            # rewind uniforms drawn beyond that attempt
            self._count -= 2 * (m - last - 1)
            sel = ok[: last + 1]
            f = np.sqrt(-2.0 * np.log(s[: last + 1][sel]) / s[: last + 1][sel])
            g1 = uu[: last + 1][sel] * f
            g2 = vv[: last + 1][sel] * f
            pair_out = np.empty(2 * take_pairs)
            pair_out[0::2] = g1
            pair_out[1::2] = g2
            use = min(2 * take_pairs, want)
            out[filled : filled + use] = pair_out[:use]
            filled += use
            if use < 2 * take_pairs:
                self._spare = float(pair_out[use])
        return out

    def sample_without_replacement(self, n: int, k: int) -> np.ndarray:
        """k distinct indices from range(n), partial Fisher-Yates order."""
        if k > n:
            raise ValueError(f"cannot sample {k} distinct values from {n}")
        pool = np.arange(n)
        for i in range(k):
            j = i + self.integer(n - i)
            pool[i], pool[j] = pool[j], pool[i]
        return pool[:k].copy()
