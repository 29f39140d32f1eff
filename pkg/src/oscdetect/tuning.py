"""Minimum-volatility selection of the three bandwidths m, m_tilde, m_prime.

A covariance proxy V(bandwidth) is evaluated on an arithmetic sequence
of candidates plus three linearly extrapolated bandwidths on each side;
the chosen bandwidth minimizes the summed 7-point sample variance of V
across a sliding window of neighboring candidates. Proxies are
quadratic in the data, so the scan is scale-free: the argmin (and the
chosen bandwidth) is invariant under x -> c x.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidSpecError
from .signals import as_series
from .spectral import (
    FrequencyGrid,
    local_contrast_blocks,
    local_contrast_profile,
    sliding_block_sums,
)

WINDOW = 3  # candidates i-3 .. i+3 enter each variance


@dataclass(frozen=True)
class MvCurve:
    candidates: tuple       # arithmetic bandwidth sequence actually scanned
    volatility: tuple       # summed window variance per candidate
    chosen: int             # smallest minimizer


def _arithmetic_step(candidates: np.ndarray) -> int:
    if candidates.size < 2:
        raise InvalidSpecError("need at least 2 bandwidth candidates")
    steps = np.diff(candidates)
    if steps[0] <= 0 or np.any(steps != steps[0]):
        raise InvalidSpecError("candidates must be a strictly increasing "
                               "arithmetic sequence")
    return int(steps[0])


def extended_bandwidths(candidates, lo: int, hi: int) -> np.ndarray:
    """Candidates plus 3 linear extrapolations on each side, clamped to
    [lo, hi]; the proxy is re-evaluated at the extrapolated bandwidths."""
    cand = np.asarray(candidates, dtype=np.int64)
    step = _arithmetic_step(cand)
    ext = cand[0] + step * np.arange(-WINDOW, cand.size + WINDOW)
    return np.clip(ext, lo, hi)


def volatility_scan(candidates, values) -> MvCurve:
    """Reduce a proxy table to the minimum-volatility choice.

    ``values`` has one row per extended bandwidth (len(candidates) + 6
    rows) and one column per proxy cell; the volatility of candidate i
    sums the unbiased sample variance of rows i-3..i+3 over all cells.
    Ties go to the smallest candidate.
    """
    cand = np.asarray(candidates, dtype=np.int64)
    _arithmetic_step(cand)
    table = np.atleast_2d(np.asarray(values, dtype=np.float64))
    if table.shape[0] != cand.size + 2 * WINDOW:
        raise InvalidSpecError(
            f"proxy table needs {cand.size + 2 * WINDOW} rows, got {table.shape[0]}"
        )
    vol = np.empty(cand.size)
    for i in range(cand.size):
        window = table[i:i + 2 * WINDOW + 1]
        vol[i] = float(np.sum(np.var(window, axis=0, ddof=1)))
    best = int(np.argmin(vol))  # first occurrence = smallest candidate
    return MvCurve(candidates=tuple(int(c) for c in cand),
                   volatility=tuple(float(v) for v in vol),
                   chosen=int(cand[best]))


def _spread(lo: int, hi: int, count: int) -> np.ndarray:
    lo, hi = int(lo), int(hi)
    if hi < lo:
        hi = lo
    count = min(count, hi - lo + 1)
    if count < 2:
        count, hi = 2, lo + 1
    step = max(1, (hi - lo) // (count - 1))
    return lo + step * np.arange(count, dtype=np.int64)


def default_stage1_m_candidates(n: int) -> np.ndarray:
    """8 arithmetic steps spanning n^0.3 .. n^0.5."""
    return _spread(int(n ** 0.3), int(n ** 0.5), 8)


def default_m_tilde_candidates(n: int) -> np.ndarray:
    """8 arithmetic steps spanning n^0.55 .. min(n^0.75, n/4)."""
    return _spread(int(n ** 0.55), min(int(n ** 0.75), n // 4 - 1), 8)


def default_m_prime_candidates(m_tilde: int) -> np.ndarray:
    """6 arithmetic steps spanning 4 .. m_tilde^0.7."""
    lo = min(4, m_tilde - 2)
    return _spread(max(lo, 2), int(m_tilde ** 0.7), 6)


def grid_subset(grid, count: int = 50) -> np.ndarray:
    """Evenly spaced coarse frequency subset for the stage-1 proxy."""
    freqs = grid.freqs if isinstance(grid, FrequencyGrid) else np.asarray(grid, float)
    if freqs.size <= count:
        return np.asarray(freqs, dtype=np.float64)
    idx = np.unique(np.linspace(0, freqs.size - 1, count).astype(np.int64))
    return np.asarray(freqs[idx], dtype=np.float64)


def mv_select_stage1_m(x, grid_sub, candidates=None,
                       k_stride: int | None = None) -> MvCurve:
    """Choose the stage-1 block width m.

    The proxy V(k, w) accumulates normalized squared block sums
    sum_{j<=k} |E_j(w)|^2 / (m (n-m)); its stability across neighboring
    block widths indicates the usable bandwidth range. Time points k
    are subsampled on a stride (default n/50) and frequencies come from
    the coarse subset ``grid_sub``.
    """
    x = as_series(x)
    n = x.size
    grid_sub = np.asarray(grid_sub, dtype=np.float64).ravel()
    if grid_sub.size == 0:
        raise InvalidSpecError("grid_sub must be nonempty")
    cand = (default_stage1_m_candidates(n) if candidates is None
            else np.asarray(candidates, dtype=np.int64))
    if cand[-1] >= n / 2:
        raise InvalidSpecError(
            f"largest candidate {cand[-1]} must stay below n/2 = {n / 2}"
        )
    ext = extended_bandwidths(cand, 2, n - 2)
    stride = int(k_stride) if k_stride else max(1, n // 50)
    ks = np.arange(stride, n + 1, stride, dtype=np.int64)
    values = np.empty((ext.size, ks.size * grid_sub.size))
    for r, m in enumerate(ext):
        nb = n - int(m)
        norm = 1.0 / (int(m) * nb)
        cells = np.empty((grid_sub.size, ks.size))
        kk = np.minimum(ks, nb)  # prefix saturates when k exceeds n-m
        for c, w in enumerate(grid_sub):
            e2 = np.abs(sliding_block_sums(x, int(m), w)) ** 2
            cum = np.cumsum(e2)
            cells[c] = cum[kk - 1] * norm
        values[r] = cells.ravel()
    return volatility_scan(cand, values)


def mv_select_m_tilde(x, omega_hat: float, candidates=None) -> MvCurve:
    """Choose the local contrast window m_tilde.

    The proxy is the average of T^2(i) over all interior time points;
    with no change point it flattens once the window is in range.
    """
    x = as_series(x)
    n = x.size
    cand = (default_m_tilde_candidates(n) if candidates is None
            else np.asarray(candidates, dtype=np.int64))
    ext = extended_bandwidths(cand, 2, (n - 2) // 2)
    values = np.empty((ext.size, 1))
    for r, mt in enumerate(ext):
        idx = np.arange(int(mt) + 1, n - int(mt))
        t = local_contrast_profile(x, omega_hat, int(mt), idx)
        values[r, 0] = float(np.mean(t ** 2))
    return volatility_scan(cand, values)


def mv_select_m_prime(x, omega_hat: float, m_tilde: int,
                      candidates=None) -> MvCurve:
    """Choose the short block window m_prime (all candidates < m_tilde).

    The proxy averages the squared moduli of the short contrast blocks
    over every (anchor, block) pair entering the bootstrap.
    """
    x = as_series(x)
    n = x.size
    mt = int(m_tilde)
    cand = (default_m_prime_candidates(mt) if candidates is None
            else np.asarray(candidates, dtype=np.int64))
    if cand[-1] >= mt:
        raise InvalidSpecError(
            f"largest candidate {cand[-1]} must stay below m_tilde = {mt}"
        )
    ext = extended_bandwidths(cand, 2, mt - 1)
    anchors = np.arange(mt + 1, n - mt)
    norm = 1.0 / (2 * mt * anchors.size)
    values = np.empty((ext.size, 1))
    for r, mp in enumerate(ext):
        blocks = local_contrast_blocks(x, omega_hat, int(mp))
        s = np.abs(blocks.d) ** 2
        cum = np.zeros(s.size + 1)
        np.cumsum(s, out=cum[1:])
        # window [j - mt, j + mt + 1] clipped to the valid block range
        lo = np.clip(anchors - mt, blocks.i_lo, blocks.i_hi + 1) - blocks.i_lo
        hi = np.clip(anchors + mt + 1, blocks.i_lo - 1, blocks.i_hi) - blocks.i_lo + 1
        values[r, 0] = float(np.sum(cum[np.maximum(hi, 0)] - cum[np.maximum(lo, 0)]) * norm)
    return volatility_scan(cand, values)
