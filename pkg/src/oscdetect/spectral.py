"""Deterministic spectral statistics.

Everything here is built from one primitive: prefix sums of the
phase-rotated samples z_j = X_j e^{sqrt(-1) omega j}, j = 1..n. The
progressive periodogram, CUSUM field, overlapping block sums and the
left/right local contrast are all O(1)-per-index window differences of
those prefix sums, which keeps full-grid sweeps linear in n per
frequency and bit-reproducible regardless of how frequencies are
distributed over threads (accumulation is sequential per frequency).

Sample indices are 1-based in every public signature, matching the
phase convention omega * i of the signal model.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidSpecError
from .signals import as_series

# Frequencies per chunk in grid sweeps; bounds temporary memory at
# chunk * n complex values.
GRID_CHUNK = 128


@dataclass(frozen=True)
class FrequencyGrid:
    """Dense candidate frequencies delta0, delta0+mesh, ... <= pi.

    mesh = 1 / (factor * n^{3/2} * ln n); factor=1 is the reference
    mesh, factor < 1 coarsens the grid for desk-scale runs.
    """

    n: int
    delta0: float
    factor: float
    mesh: float
    freqs: np.ndarray

    @property
    def p(self) -> int:
        return self.freqs.size


def build_grid(n: int, delta0: float = 0.1, factor: float = 1.0) -> FrequencyGrid:
    """Construct the dense frequency grid for a length-n series."""
    n = int(n)
    if n < 4:
        raise InvalidSpecError(f"n must be >= 4, got {n}")
    if not (0.0 < delta0 < math.pi):
        raise InvalidSpecError(f"delta0 must lie in (0, pi), got {delta0}")
    if not (0.0 < factor <= 1.0):
        raise InvalidSpecError(f"factor must lie in (0, 1], got {factor}")
    scale = factor * n ** 1.5 * math.log(n)
    mesh = 1.0 / scale
    p = int(math.floor((math.pi - delta0) * scale)) + 1
    freqs = delta0 + mesh * np.arange(p)
    while freqs.size and freqs[-1] > math.pi:  # guard float spill past pi
        freqs = freqs[:-1]
    freqs.setflags(write=False)
    return FrequencyGrid(n=n, delta0=float(delta0), factor=float(factor),
                         mesh=mesh, freqs=freqs)


def _phase_prefix(x: np.ndarray, omega: float) -> np.ndarray:
    """Prefix sums P[k] = sum_{j<=k} X_j e^{i omega j}, with P[0] = 0."""
    n = x.size
    j = np.arange(1, n + 1, dtype=np.float64)
    z = x * np.exp(1j * omega * j)
    out = np.empty(n + 1, dtype=np.complex128)
    out[0] = 0.0
    np.cumsum(z, out=out[1:])
    return out


def _phase_prefix_chunk(x: np.ndarray, freqs: np.ndarray) -> np.ndarray:
    """Prefix sums for a chunk of frequencies, shape (len(freqs), n+1)."""
    n = x.size
    j = np.arange(1, n + 1, dtype=np.float64)
    z = x * np.exp(1j * np.outer(freqs, j))
    out = np.empty((freqs.size, n + 1), dtype=np.complex128)
    out[:, 0] = 0.0
    np.cumsum(z, axis=1, out=out[:, 1:])
    return out


def progressive_partial_sums(x, omega: float) -> np.ndarray:
    """Partial sums L(k) = sum_{j<=k} X_j e^{i omega j} for k = 1..n."""
    x = as_series(x)
    if not (0.0 <= omega <= math.pi):
        raise InvalidSpecError(f"omega must lie in [0, pi], got {omega}")
    return _phase_prefix(x, omega)[1:]


@dataclass(frozen=True)
class ProfileResult:
    """Per-frequency running-max periodogram with its global maximum."""

    freqs: np.ndarray
    values: np.ndarray  # max_k |L(k, omega)| / sqrt(n), per frequency
    stat: float         # max over frequencies
    omega_hat: float    # smallest frequency attaining the max


def progressive_profile(x, grid) -> ProfileResult:
    """Running-max modulus of the partial-sum transform over a grid.

    The per-frequency value max_k |L(k, omega)|/sqrt(n) peaks at
    oscillatory frequencies even when the oscillation flips phase
    mid-sample, where the end-point periodogram would cancel.
    """
    x = as_series(x)
    freqs = grid.freqs if isinstance(grid, FrequencyGrid) else np.asarray(grid, float)
    if freqs.size == 0:
        raise InvalidSpecError("frequency grid is empty")
    n = x.size
    values = np.empty(freqs.size)
    for lo in range(0, freqs.size, GRID_CHUNK):
        sl = slice(lo, min(lo + GRID_CHUNK, freqs.size))
        pref = _phase_prefix_chunk(x, freqs[sl])
        values[sl] = np.max(np.abs(pref[:, 1:]), axis=1) / math.sqrt(n)
    k = int(np.argmax(values))  # first occurrence = smallest frequency
    return ProfileResult(freqs=freqs, values=values, stat=float(values[k]),
                         omega_hat=float(freqs[k]))


@dataclass(frozen=True)
class CusumField:
    """|C_n(i, omega)| sampled on a time stride, rows = i, cols = omega."""

    indices: np.ndarray  # 1-based sample indices (stride, 2*stride, ...)
    freqs: np.ndarray
    values: np.ndarray   # shape (len(indices), len(freqs))


def cusum_field(x, freqs, stride: int = 1) -> CusumField:
    """Classical CUSUM contrast C_n(i,w) = [L(i,w) - (i/n) L(n,w)]/sqrt(n).

    Large off-frequency values near a strong oscillation are the
    spectral energy leak that motivates the local contrast statistic.
    """
    x = as_series(x)
    freqs = np.asarray(freqs, dtype=np.float64).ravel()
    if np.any((freqs < 0) | (freqs > math.pi)):
        raise InvalidSpecError("cusum frequencies must lie in [0, pi]")
    stride = int(stride)
    if stride < 1:
        raise InvalidSpecError("stride must be >= 1")
    n = x.size
    idx = np.arange(stride, n + 1, stride)
    values = np.empty((idx.size, freqs.size))
    for lo in range(0, freqs.size, GRID_CHUNK):
        sl = slice(lo, min(lo + GRID_CHUNK, freqs.size))
        pref = _phase_prefix_chunk(x, freqs[sl])
        centered = pref[:, idx] - (idx / n)[None, :] * pref[:, n][:, None]
        values[:, sl] = (np.abs(centered) / math.sqrt(n)).T
    return CusumField(indices=idx, freqs=freqs, values=values)


def sliding_block_sums(x, m: int, omega: float) -> np.ndarray:
    """Overlapping block sums E_j = sum_{i=j}^{j+m-1} X_i e^{i omega i}.

    Returned array has length n - m with entry j-1 holding E_j; real and
    imaginary parts are the cosine and sine block sums. Computed as
    prefix-sum differences, equivalent to the one-in/one-out recurrence.
    """
    x = as_series(x)
    n = x.size
    m = int(m)
    if not (1 <= m < n):
        raise InvalidSpecError(f"block width m must satisfy 1 <= m < n, got {m}")
    pref = _phase_prefix(x, omega)
    return pref[m:n] - pref[0:n - m]


def local_contrast_profile(x, omega: float, m_tilde: int, indices) -> np.ndarray:
    """Left/right phase-aligned contrast T(i) on the given sample indices.

    T(i) = | sum_{l=i-mt}^{i} e^{iw(l-i)} X_l
            - sum_{l=i+1}^{i+mt+1} e^{iw(l-i)} X_l | / sqrt(2 mt),
    a windowed discontinuity detector at frequency omega. Every index
    must satisfy i - mt >= 1 and i + mt + 1 <= n.
    """
    x = as_series(x)
    n = x.size
    mt = int(m_tilde)
    if mt < 1:
        raise InvalidSpecError("m_tilde must be >= 1")
    idx = np.asarray(indices, dtype=np.int64).ravel()
    if idx.size == 0:
        return np.empty(0)
    if idx.min() - mt < 1 or idx.max() + mt + 1 > n:
        raise InvalidSpecError(
            f"indices must satisfy i-m_tilde >= 1 and i+m_tilde+1 <= n={n}"
        )
    pref = _phase_prefix(x, omega)
    left = pref[idx] - pref[idx - mt - 1]
    right = pref[idx + mt + 1] - pref[idx]
    # the common factor e^{-i omega i} has modulus 1 and drops out
    return np.abs(left - right) / math.sqrt(2 * mt)


@dataclass(frozen=True)
class LocalContrastBlocks:
    """Short left/right contrast blocks D(i) shared by the stage-2 bootstrap.

    D(i) = (sum_{l=i-mp}^{i} e^{iwl} X_l - sum_{l=i+1}^{i+mp+1} e^{iwl} X_l)
           / sqrt(2 mp), for i = i_lo..i_hi. The anchored block pair
    (Phi_i(j,w), Psi_i(j,w)) is recovered as real/imag of
    e^{-iwj} D(i) for any anchor j.
    """

    omega: float
    m_prime: int
    i_lo: int
    d: np.ndarray  # complex, entry t holds D(i_lo + t)

    @property
    def i_hi(self) -> int:
        return self.i_lo + self.d.size - 1

    def at(self, i) -> np.ndarray:
        """D values at 1-based sample indices i."""
        i = np.asarray(i, dtype=np.int64)
        if np.any((i < self.i_lo) | (i > self.i_hi)):
            raise InvalidSpecError("contrast block index out of range")
        return self.d[i - self.i_lo]

    def upsilon(self, j: int) -> np.ndarray:
        """Blocks re-phased to anchor j: Phi + i Psi = e^{-iwj} D."""
        return np.exp(-1j * self.omega * j) * self.d


def local_contrast_blocks(x, omega: float, m_prime: int,
                          i_lo: int | None = None,
                          i_hi: int | None = None) -> LocalContrastBlocks:
    """Compute D(i) on [i_lo, i_hi] (defaults to the full valid range)."""
    x = as_series(x)
    n = x.size
    mp = int(m_prime)
    if mp < 1:
        raise InvalidSpecError("m_prime must be >= 1")
    lo = mp + 1 if i_lo is None else int(i_lo)
    hi = n - mp - 1 if i_hi is None else int(i_hi)
    if lo - mp < 1 or hi + mp + 1 > n or lo > hi:
        raise InvalidSpecError(
            f"block range [{lo}, {hi}] invalid for n={n}, m_prime={mp}"
        )
    pref = _phase_prefix(x, omega)
    i = np.arange(lo, hi + 1)
    left = pref[i] - pref[i - mp - 1]
    right = pref[i + mp + 1] - pref[i]
    d = (left - right) / math.sqrt(2 * mp)
    return LocalContrastBlocks(omega=float(omega), m_prime=mp, i_lo=lo, d=d)
