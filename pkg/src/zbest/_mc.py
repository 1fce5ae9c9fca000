"""Deterministic parallel Monte Carlo: substreams, chunking, jitted kernels.

Work is cut into fixed-size chunks whose boundaries depend only on the total
sample count, never on the worker count. Chunk c draws from its own PCG64
stream seeded by a splitmix64 mix of the run seed and c, and chunk results
are merged in chunk order, so the merged statistics are bit-identical for
any number of workers. Within a sample, randomness is consumed in a fixed
documented order: configuration rows ascending (one Fisher-Yates draw per
toggle), then I, then J's rank, then the auxiliary stage S, then the swap
partner's rank when the mixed case needs one, then the interpolation
uniform U.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .errors import EmptyCandidateSet

MASK64 = (1 << 64) - 1

#: samples per work unit; fixed so results never depend on worker count
CHUNK_SAMPLES = 1 << 15


def splitmix64_mix(seed: int, index: int) -> int:
    """Substream seed for work unit ``index``: one splitmix64 step.

    z = seed + (index + 1) * 0x9E3779B97F4A7C15, then the standard
    splitmix64 finalizer (xor-shift / multiply twice, xor-shift).
    """
    z = (seed + (index + 1) * 0x9E3779B97F4A7C15) & MASK64
    z ^= z >> 30
    z = (z * 0xBF58476D1CE4E5B9) & MASK64
    z ^= z >> 27
    z = (z * 0x94D049BB133111EB) & MASK64
    z ^= z >> 31
    return z


def substream(seed: int, index: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(splitmix64_mix(seed, index)))


def chunk_sizes(samples: int) -> list[int]:
    full, rem = divmod(samples, CHUNK_SAMPLES)
    sizes = [CHUNK_SAMPLES] * full
    if rem:
        sizes.append(rem)
    return sizes


@dataclass
class CouplingStats:
    """Merged sufficient statistics of a coupled Monte Carlo run."""

    y_counts: np.ndarray
    sum_abs: float
    sum_sq: float
    max_abs: float
    moved: int
    samples: int

    @property
    def mean_abs(self) -> float:
        return self.sum_abs / self.samples

    @property
    def mean_abs_stderr(self) -> float:
        m = self.mean_abs
        var = max(self.sum_sq / self.samples - m * m, 0.0)
        return (var / self.samples) ** 0.5

    @property
    def fraction_moved(self) -> float:
        return self.moved / self.samples


def run_chunked(
    kernel: Callable[[np.random.Generator, int], tuple],
    seed: int,
    samples: int,
    workers: int,
    n_levels: int,
) -> CouplingStats:
    """Run ``kernel`` over every chunk and merge in chunk order.

    ``kernel(rng, m)`` must return (y_counts, sum_abs, sum_sq, max_abs,
    moved, stuck). A nonzero stuck count raises
    :class:`~zbest.errors.EmptyCandidateSet` after all chunks finish.
    """
    sizes = chunk_sizes(samples)

    def one(args: tuple[int, int]) -> tuple:
        index, m = args
        return kernel(substream(seed, index), m)

    if workers > 1 and len(sizes) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(one, enumerate(sizes)))
    else:
        results = [one(item) for item in enumerate(sizes)]

    y_counts = np.zeros(n_levels, dtype=np.int64)
    sum_abs = 0.0
    sum_sq = 0.0
    max_abs = 0.0
    moved = 0
    stuck = 0
    for counts, s_abs, s_sq, mx, mv, st in results:
        y_counts += counts
        sum_abs += float(s_abs)
        sum_sq += float(s_sq)
        max_abs = max(max_abs, float(mx))
        moved += int(mv)
        stuck += int(st)
    if stuck:
        raise EmptyCandidateSet(
            f"{stuck} of {samples} samples hit an empty swap-partner set; "
            "the published construction admits this event for n = 4"
        )
    return CouplingStats(
        y_counts=y_counts,
        sum_abs=sum_abs,
        sum_sq=sum_sq,
        max_abs=max_abs,
        moved=moved,
        samples=samples,
    )


# ---------------------------------------------------------------------------
# Lightbulb kernel
# ---------------------------------------------------------------------------

_lightbulb_jit = None


def _get_lightbulb_kernel():
    global _lightbulb_jit
    if _lightbulb_jit is not None:
        return _lightbulb_jit

    from numba import njit

    @njit(cache=True, nogil=True)
    def kernel(rng, n, m, stage_rows):  # pragma: no cover - jitted
        words = (n + 63) // 64
        rows = np.zeros((n, words), dtype=np.uint64)
        parity = np.zeros(words, dtype=np.uint64)
        perm = np.zeros(n, dtype=np.int64)
        y_counts = np.zeros(n + 1, dtype=np.int64)
        sum_abs = 0.0
        sum_sq = 0.0
        max_abs = 0.0
        moved = 0
        stuck = 0
        one = np.uint64(1)
        mid = n // 2 - 1
        half = n // 2
        for _ in range(m):
            for w in range(words):
                parity[w] = 0
            for i in range(n):
                perm[i] = i
            for r_idx in range(n):
                for w in range(words):
                    rows[r_idx, w] = 0
                for jj in range(r_idx + 1):
                    kk = rng.integers(jj, n)
                    tmp = perm[jj]
                    perm[jj] = perm[kk]
                    perm[kk] = tmp
                    b = perm[jj]
                    rows[r_idx, b >> 6] |= one << np.uint64(b & 63)
                for w in range(words):
                    parity[w] ^= rows[r_idx, w]
            y = 0
            for w in range(words):
                v = parity[w]
                v = v - ((v >> np.uint64(1)) & np.uint64(0x5555555555555555))
                v = (v & np.uint64(0x3333333333333333)) + (
                    (v >> np.uint64(2)) & np.uint64(0x3333333333333333)
                )
                v = (v + (v >> np.uint64(4))) & np.uint64(0x0F0F0F0F0F0F0F0F)
                y += int((v * np.uint64(0x0101010101010101)) >> np.uint64(56))
            y_counts[y] += 1

            i = rng.integers(0, n)
            b_i = (rows[mid, i >> 6] >> np.uint64(i & 63)) & one
            rank = rng.integers(0, half)
            j = -1
            seen = 0
            for c in range(n):
                bc = (rows[mid, c >> 6] >> np.uint64(c & 63)) & one
                if bc != b_i:
                    if seen == rank:
                        j = c
                        break
                    seen += 1
            a_i = (parity[i >> 6] >> np.uint64(i & 63)) & one
            a_j = (parity[j >> 6] >> np.uint64(j & 63)) & one
            if a_i == 0 and a_j == 0:
                moved += 1

            s = stage_rows[rng.integers(0, stage_rows.shape[0])]
            delta = 0
            if a_i == 0 and a_j == 0:
                delta = 0
            elif a_i == 1 and a_j == 1:
                delta = -2
            else:
                if a_i == 1:
                    ref = i
                    excl = j
                else:
                    ref = j
                    excl = i
                b_ref = (rows[s, ref >> 6] >> np.uint64(ref & 63)) & one
                ones = 0
                for w in range(words):
                    v = rows[s, w]
                    v = v - ((v >> np.uint64(1)) & np.uint64(0x5555555555555555))
                    v = (v & np.uint64(0x3333333333333333)) + (
                        (v >> np.uint64(2)) & np.uint64(0x3333333333333333)
                    )
                    v = (v + (v >> np.uint64(4))) & np.uint64(0x0F0F0F0F0F0F0F0F)
                    ones += int((v * np.uint64(0x0101010101010101)) >> np.uint64(56))
                if b_ref == one:
                    cnt = n - ones
                else:
                    cnt = ones
                b_ex = (rows[s, excl >> 6] >> np.uint64(excl & 63)) & one
                if b_ex != b_ref:
                    cnt -= 1
                if cnt == 0:
                    stuck += 1
                    continue
                pick = rng.integers(0, cnt)
                partner = -1
                seen2 = 0
                for c in range(n):
                    if c == excl:
                        continue
                    bc = (rows[s, c >> 6] >> np.uint64(c & 63)) & one
                    if bc != b_ref:
                        if seen2 == pick:
                            partner = c
                            break
                        seen2 += 1
                a_p = (parity[partner >> 6] >> np.uint64(partner & 63)) & one
                delta = -2 * int(a_p)
            u = rng.random()
            d = abs(delta + 2.0 * u)
            sum_abs += d
            sum_sq += d * d
            if d > max_abs:
                max_abs = d
        return y_counts, sum_abs, sum_sq, max_abs, moved, stuck

    _lightbulb_jit = kernel
    return kernel


def lightbulb_mc(
    n: int, samples: int, seed: int, workers: int
) -> CouplingStats:
    """Coupled lightbulb statistics over ``samples`` deterministic draws.

    Per sample: Y, the size-bias move indicator, and |Y* - Y| with
    Y* = Y_dagger + 2U from the dagger construction. The auxiliary stage is
    drawn from :func:`zbest.lightbulb.dagger_stage_rows`.
    """
    from .lightbulb import dagger_stage_rows

    stage_rows = np.array(dagger_stage_rows(n), dtype=np.int64)
    kernel = _get_lightbulb_kernel()

    def chunk(rng: np.random.Generator, m: int) -> tuple:
        return kernel(rng, n, m, stage_rows)

    return run_chunked(chunk, seed, samples, workers, n + 1)


# ---------------------------------------------------------------------------
# Bernoulli kernel (plain numpy)
# ---------------------------------------------------------------------------


def bernoulli_mc(
    p: Sequence[float], samples: int, seed: int, workers: int
) -> CouplingStats:
    """Coupled indicator-sum statistics: Y, X_I and |Y* - Y| = |U - X_I|.

    Per chunk the draw order is the indicator matrix (row-major), then the
    index vector I, then the uniforms U.
    """
    probs = np.array([float(v) for v in p])
    n = probs.size
    index_law = probs / probs.sum()

    def chunk(rng: np.random.Generator, m: int) -> tuple:
        x = rng.random((m, n)) < probs
        i = rng.choice(n, size=m, p=index_law)
        u = rng.random(m)
        y = x.sum(axis=1).astype(np.int64)
        x_i = x[np.arange(m), i].astype(np.int64)
        d = np.abs(u - x_i)
        counts = np.bincount(y, minlength=n + 1)
        return (
            counts,
            float(d.sum()),
            float((d * d).sum()),
            float(d.max()),
            int((x_i == 0).sum()),
            0,
        )

    return run_chunked(chunk, seed, samples, workers, n + 1)
