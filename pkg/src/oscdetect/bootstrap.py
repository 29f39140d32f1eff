"""Multiplier bootstrap engine for both detection stages.

Gaussian multipliers are deterministic, replicate-indexed streams from
a counter-based generator, so every statistic here is a pure function
of (series, bandwidths, seed, replicate). Replicate streams are indexed
by absolute sample position: shrinking a candidate set between
iterations reuses the same multipliers, the statistics change only
because the maximization set changes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ._kernels import cum_modulus_max, set_worker_threads
from .errors import InvalidSpecError
from .signals import as_series, philox_rng
from .spectral import FrequencyGrid, LocalContrastBlocks, _phase_prefix_chunk


def multipliers(seed: int, replicate: int, count: int) -> np.ndarray:
    """Standard-normal multipliers G_{1..count} for one replicate stream."""
    if count < 1:
        raise InvalidSpecError("count must be >= 1")
    return philox_rng(seed, replicate).standard_normal(int(count))


def multiplier_matrix(seed: int, n_replicates: int, count: int) -> np.ndarray:
    """Column l-1 holds the multipliers of replicate l, shape (count, K)."""
    out = np.empty((int(count), int(n_replicates)))
    for l in range(1, n_replicates + 1):
        out[:, l - 1] = multipliers(seed, l, count)
    return out


def empirical_quantile(values, level: float) -> float:
    """Nearest-rank quantile: the ceil(level*K)-th order statistic."""
    v = np.sort(np.asarray(values, dtype=np.float64).ravel())
    if v.size == 0:
        raise InvalidSpecError("empty sample has no quantile")
    if not (0.0 < level < 1.0):
        raise InvalidSpecError(f"level must lie in (0, 1), got {level}")
    rank = int(math.ceil(level * v.size - 1e-9))
    return float(v[max(rank, 1) - 1])


def stage1_bootstrap_stat(blocks, m: int, n: int, g) -> float:
    """One replicate of the frequency-stage bootstrap statistic.

    blocks is an iterable of per-frequency block-sum arrays E (length
    n-m each); the result is
    max_w max_k |sum_{j<=k} E_j(w) G_j| / sqrt(m (n-m)),
    evaluated per frequency as a running complex sum so the full
    (p, n-m) matrix is never materialized.
    """
    g = np.asarray(g, dtype=np.float64).ravel()
    nb = n - m
    if g.size < nb:
        raise InvalidSpecError(f"need >= {nb} multipliers, got {g.size}")
    gv = g[:nb]
    best = 0.0
    for e in blocks:
        if e.size != nb:
            raise InvalidSpecError("block sums inconsistent with (m, n)")
        running = np.cumsum(e * gv)
        best = max(best, float(np.max(np.abs(running))))
    return best / math.sqrt(m * nb)


def stage2_bootstrap_stat(blocks: LocalContrastBlocks, m_tilde: int,
                          b_indices, g) -> float:
    """One replicate of the change-point-stage bootstrap statistic.

    max_j |sum_{i=j-mt}^{j} D(i) G_i - sum_{i=j+1}^{j+mt+1} D(i) G_i|
    / sqrt(2 mt) over candidate anchors j. The anchored phase factor
    of the re-phased blocks has modulus one and cancels, so the
    statistic is evaluated directly from D. Multipliers are indexed by
    absolute sample position (g[i-1] multiplies D(i)).
    """
    mt = int(m_tilde)
    b = np.asarray(b_indices, dtype=np.int64).ravel()
    if b.size == 0:
        return 0.0
    lo_need, hi_need = int(b.min()) - mt, int(b.max()) + mt + 1
    if lo_need < blocks.i_lo or hi_need > blocks.i_hi:
        raise InvalidSpecError("candidate anchors need blocks outside the range")
    g = np.asarray(g, dtype=np.float64).ravel()
    if g.size < hi_need:
        raise InvalidSpecError(f"need multipliers up to position {hi_need}")
    y = blocks.d * g[blocks.i_lo - 1:blocks.i_hi]
    q = np.empty(y.size + 1, dtype=np.complex128)
    q[0] = 0.0
    np.cumsum(y, out=q[1:])
    pos = b - blocks.i_lo  # offset of anchor j in the block array
    val = 2.0 * q[pos + 1] - q[pos - mt] - q[pos + mt + 2]
    return float(np.max(np.abs(val))) / math.sqrt(2 * mt)


def contrast_bootstrap_matrix(blocks: LocalContrastBlocks, m_tilde: int,
                              b_indices, g_matrix: np.ndarray) -> np.ndarray:
    """All replicates at once: entry (l, t) is the anchored statistic of
    replicate l+1 at candidate b_indices[t] (before the max over j)."""
    mt = int(m_tilde)
    b = np.asarray(b_indices, dtype=np.int64).ravel()
    gm = g_matrix[blocks.i_lo - 1:blocks.i_hi]  # rows = positions i
    y = blocks.d[:, None] * gm
    q = np.zeros((y.shape[0] + 1, y.shape[1]), dtype=np.complex128)
    np.cumsum(y, axis=0, out=q[1:])
    pos = b - blocks.i_lo
    val = 2.0 * q[pos + 1] - q[pos - mt] - q[pos + mt + 2]
    return np.abs(val).T / math.sqrt(2 * mt)


@dataclass
class SweepResult:
    """Joint output of one streaming pass over the frequency grid."""

    profile: np.ndarray | None   # max_k |L(k,w)|/sqrt(n) per frequency
    rep_max: np.ndarray          # per-replicate max over swept frequencies
    freq_max: np.ndarray | None  # per-(frequency, replicate) maxima cache


def obmb_sweep(x, freqs, m: int, g_matrix: np.ndarray, *,
               mask: np.ndarray | None = None,
               want_profile: bool = True,
               collect_freq_max: bool = False,
               workers: int = 1,
               chunk: int = 128) -> SweepResult:
    """Stream the grid once, computing the periodogram profile and the
    per-replicate bootstrap maxima in the same pass.

    Frequencies excluded by ``mask`` contribute to neither output. With
    ``collect_freq_max`` the per-frequency maxima are kept so candidate
    subsets can be re-maximized later without re-streaming; otherwise the
    peak memory is O(chunk * (n + K)).
    """
    x = as_series(x)
    freqs = freqs.freqs if isinstance(freqs, FrequencyGrid) else np.asarray(freqs, float)
    n = x.size
    m = int(m)
    if not (1 <= m < n):
        raise InvalidSpecError(f"block width m must satisfy 1 <= m < n, got {m}")
    nb = n - m
    if g_matrix.shape[0] < nb:
        raise InvalidSpecError("multiplier matrix shorter than n - m")
    g = np.ascontiguousarray(g_matrix[:nb])
    K = g.shape[1]
    p = freqs.size
    norm = 1.0 / math.sqrt(m * nb)
    if mask is None:
        mask = np.ones(p, dtype=bool)

    parallel = set_worker_threads(workers) > 1
    profile = np.full(p, np.nan) if want_profile else None
    freq_max = np.zeros((p, K)) if collect_freq_max else None
    rep_max = np.zeros(K)
    sqrt_n = math.sqrt(n)

    for lo in range(0, p, chunk):
        sl = slice(lo, min(lo + chunk, p))
        live = np.flatnonzero(mask[sl]) + lo
        if live.size == 0:
            continue
        pref = _phase_prefix_chunk(x, freqs[live])
        if want_profile:
            profile[live] = np.max(np.abs(pref[:, 1:]), axis=1) / sqrt_n
        e = pref[:, m:n] - pref[:, 0:nb]
        block_max = cum_modulus_max(e, g, norm, parallel=parallel)
        if collect_freq_max:
            freq_max[live] = block_max
        np.maximum(rep_max, block_max.max(axis=0), out=rep_max)
    return SweepResult(profile=profile, rep_max=rep_max, freq_max=freq_max)
