"""Seeded column sampling with a fixed, self-contained generator.

Sampled indices are part of this package's reproducibility contract:
experiment outputs are compared byte for byte across reruns, so the
generator must be a pinned algorithm rather than whatever numpy or the
stdlib ships this year. We use SplitMix64 (Steele, Lea and Flood, 2014)
in counter mode: draw k is mix64(seed + k * GOLDEN), which makes block
generation vectorizable while staying bit-identical to the scalar path.

Sampling without replacement is a forward Fisher-Yates shuffle. After
step i the element at position i is final, so the first `size` positions
of the permutation are themselves a uniform ordered sample, and prefixes
of one permutation form a nested family of uniform samples.
"""

from dataclasses import dataclass

import numpy as np

from .linalg import as_dense

__all__ = [
    "RNG_NAME",
    "SplitMix64",
    "ColumnSample",
    "uniform_sample",
    "exclusion_sample",
    "nested_samples",
]

# Recorded in every experiment CSV row; bump only with a migration note.
RNG_NAME = "splitmix64"

_MASK64 = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15
_MIX1 = 0xBF58476D1CE4E5B9
_MIX2 = 0x94D049BB133111EB


def _mix64(x: int) -> int:
    x = (x ^ (x >> 30)) * _MIX1 & _MASK64
    x = (x ^ (x >> 27)) * _MIX2 & _MASK64
    return x ^ (x >> 31)


class SplitMix64:
    """Counter-based SplitMix64 stream seeded by a single integer.

    All draws, scalar or vectorized, consume the same counter, so any
    interleaving of calls is reproducible from (seed, call sequence).
    """

    def __init__(self, seed: int):
        self.seed = int(seed) & _MASK64
        self._counter = 0

    def next_uint64(self) -> int:
        self._counter += 1
        return _mix64((self.seed + self._counter * _GOLDEN) & _MASK64)

    def random(self) -> float:
        """Uniform float in [0, 1) with 53 random bits."""
        return (self.next_uint64() >> 11) * 2.0**-53

    def below(self, n: int) -> int:
        """Uniform integer in [0, n), unbiased via rejection."""
        if n <= 0:
            raise ValueError("bound must be positive")
        span = _MASK64 + 1
        limit = span - span % n
        while True:
            u = self.next_uint64()
            if u < limit:
                return u % n

    def _uint64_block(self, count: int) -> np.ndarray:
        ks = np.arange(self._counter + 1, self._counter + count + 1, dtype=np.uint64)
        self._counter += count
        x = (np.uint64(self.seed) + ks * np.uint64(_GOLDEN)) & np.uint64(_MASK64)
        x = (x ^ (x >> np.uint64(30))) * np.uint64(_MIX1)
        x = (x ^ (x >> np.uint64(27))) * np.uint64(_MIX2)
        return x ^ (x >> np.uint64(31))

    def normals(self, count: int) -> np.ndarray:
        """`count` standard normal deviates via Box-Muller on stream pairs.

        Consumes 2 * ceil(count / 2) draws; pair j yields
        (r cos t, r sin t) with r = sqrt(-2 ln u1) and t = 2 pi u2.
        """
        if count < 0:
            raise ValueError("count must be non-negative")
        if count == 0:
            return np.zeros(0)
        pairs = (count + 1) // 2
        block = self._uint64_block(2 * pairs)
        u1 = ((block[0::2] >> np.uint64(11)).astype(np.float64) + 1.0) * 2.0**-53
        u2 = (block[1::2] >> np.uint64(11)).astype(np.float64) * 2.0**-53
        radius = np.sqrt(-2.0 * np.log(u1))
        theta = 2.0 * np.pi * u2
        out = np.empty(2 * pairs)
        out[0::2] = radius * np.cos(theta)
        out[1::2] = radius * np.sin(theta)
        return out[:count]

    def normal_matrix(self, rows: int, cols: int) -> np.ndarray:
        """rows x cols standard normal matrix filled in row-major order."""
        return np.asfortranarray(self.normals(rows * cols).reshape(rows, cols))


@dataclass(frozen=True)
class ColumnSample:
    """An ordered sample of distinct column indices plus the extracted block.

    `submatrix` column j is a bit-identical copy of source column
    `indices[j]`; `seed` records the generator seed that produced it.
    """

    indices: tuple
    submatrix: np.ndarray
    seed: int

    def __post_init__(self):
        if len(set(self.indices)) != len(self.indices):
            raise ValueError("sampled indices must be distinct")
        if self.submatrix.shape[1] != len(self.indices):
            raise ValueError("submatrix width does not match index count")
        self.submatrix.setflags(write=False)

    @property
    def size(self) -> int:
        return len(self.indices)


def _fisher_yates_prefix(pool, size, rng) -> list:
    """First `size` entries of a seeded Fisher-Yates shuffle of `pool`."""
    a = list(pool)
    steps = min(size, len(a) - 1)
    for i in range(steps):
        j = i + rng.below(len(a) - i)
        a[i], a[j] = a[j], a[i]
    return a[:size]


def _extract(X, indices, seed) -> ColumnSample:
    return ColumnSample(
        indices=tuple(indices),
        submatrix=np.asfortranarray(X[:, list(indices)]),
        seed=seed,
    )


def uniform_sample(X, size: int, seed: int) -> ColumnSample:
    """Sample `size` distinct columns of X uniformly at random.

    Deterministic given (seed, column count, size): every size-subset is
    equally likely under the seeded generator.
    """
    X = as_dense(X)
    m = X.shape[1]
    if not 1 <= size <= m:
        raise ValueError(f"sample size {size} out of range [1, {m}]")
    rng = SplitMix64(seed)
    return _extract(X, _fisher_yates_prefix(range(m), size, rng), seed)


def exclusion_sample(X, size: int, seed: int, excluded) -> ColumnSample:
    """Uniform sample of `size` columns drawn only from non-excluded ones."""
    X = as_dense(X)
    m = X.shape[1]
    allowed = sorted(set(range(m)) - {int(j) for j in excluded})
    if not 1 <= size <= len(allowed):
        raise ValueError(
            f"sample size {size} infeasible with {len(allowed)} allowed columns"
        )
    rng = SplitMix64(seed)
    return _extract(X, _fisher_yates_prefix(allowed, size, rng), seed)


def nested_samples(X, max_size: int, seed: int, excluded=()) -> list:
    """Nested uniform samples of sizes 1..max_size from one permutation.

    The sample of size l extends the sample of size l-1 by exactly one
    new uniformly chosen column, and each prefix is distributed like an
    independent uniform sample of that size.
    """
    X = as_dense(X)
    m = X.shape[1]
    allowed = sorted(set(range(m)) - {int(j) for j in excluded})
    if not 1 <= max_size <= len(allowed):
        raise ValueError(
            f"max size {max_size} infeasible with {len(allowed)} allowed columns"
        )
    rng = SplitMix64(seed)
    perm = _fisher_yates_prefix(allowed, len(allowed), rng)
    return [_extract(X, perm[:l], seed) for l in range(1, max_size + 1)]
