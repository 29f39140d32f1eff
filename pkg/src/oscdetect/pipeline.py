"""Two-stage detection: frequencies first, then their change points.

Stage 1 repeatedly tests the running-max periodogram against bootstrap
critical values, recording the maximizing frequency and excluding a
log(m)/(4 sqrt(m)) neighborhood around it before the next pass. Stage 2
repeats the same accept/exclude loop over candidate time points with
the left/right local contrast and its phase-adjusted bootstrap.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .bootstrap import (
    contrast_bootstrap_matrix,
    empirical_quantile,
    multiplier_matrix,
    obmb_sweep,
)
from .errors import InvalidSpecError, IterationCapError
from .signals import as_series
from .spectral import FrequencyGrid, local_contrast_blocks, local_contrast_profile
from . import tuning as _tuning

STAGE1_ITERATION_CAP = 20
STAGE2_ITERATION_CAP = 50

# Per-frequency bootstrap maxima are cached across iterations when the
# p x K table fits this budget; otherwise every iteration re-streams the
# grid (identical results, O(n + K) peak memory).
FREQ_MAX_CACHE_BYTES = 256 * 2**20


def exclusion_halfwidth(m: int) -> float:
    """Half-width log(m)/(4 sqrt(m)) removed around each detection."""
    return math.log(m) / (4.0 * math.sqrt(m))


@dataclass(frozen=True)
class Stage1Config:
    """Frequency-detection settings: block width m, replicates K, level
    alpha, the candidate grid, and the multiplier seed."""

    m: int
    K: int
    alpha: float
    grid: FrequencyGrid
    seed: int

    def validate(self, n: int) -> None:
        if not (1 <= self.m < n):
            raise InvalidSpecError(f"need 1 <= m < n, got m={self.m}, n={n}")
        if not (0.0 < self.alpha < 1.0):
            raise InvalidSpecError(f"alpha must lie in (0, 1), got {self.alpha}")
        if self.K < 100:
            raise InvalidSpecError(f"K must be >= 100, got {self.K}")
        if self.grid.n != n:
            raise InvalidSpecError(
                f"grid built for n={self.grid.n}, series has n={n}"
            )


@dataclass(frozen=True)
class Stage1Iteration:
    k: int
    stat: float
    crit: float
    omega_hat: float | None          # None on the accepting iteration
    excluded: tuple | None           # closed interval removed from the grid


@dataclass(frozen=True)
class Stage1Result:
    iterations: tuple
    omega_hat_set: tuple
    terminated_at: int
    status: str                       # "accepted_null" or "grid_exhausted"

    @property
    def detected(self):
        return tuple((it.omega_hat, it.stat, it.crit)
                     for it in self.iterations if it.omega_hat is not None)


def detect_frequencies(x, cfg: Stage1Config, *, workers: int = 1,
                       cache_bytes: int = FREQ_MAX_CACHE_BYTES) -> Stage1Result:
    """Iterative frequency estimation with bootstrap critical values.

    Each iteration rejects only on strict inequality stat > crit, so an
    all-zero series (stat and all bootstrap draws 0) never detects.
    """
    x = as_series(x)
    n = x.size
    cfg.validate(n)
    freqs = cfg.grid.freqs
    p = freqs.size
    g = multiplier_matrix(cfg.seed, cfg.K, n - cfg.m)
    collect = p * cfg.K * 8 <= cache_bytes
    sweep = obmb_sweep(x, freqs, cfg.m, g, want_profile=True,
                       collect_freq_max=collect, workers=workers)
    profile = sweep.profile
    halfwidth = exclusion_halfwidth(cfg.m)

    mask = np.ones(p, dtype=bool)
    iterations: list[Stage1Iteration] = []
    detected: list[float] = []
    status = None
    for k in range(1, STAGE1_ITERATION_CAP + 1):
        if not mask.any():
            status = "grid_exhausted"
            k -= 1
            break
        live = np.flatnonzero(mask)
        best_local = int(np.argmax(profile[live]))  # first max = smallest freq
        stat = float(profile[live[best_local]])
        if collect:
            draws = sweep.freq_max[live].max(axis=0)
        elif k == 1:
            draws = sweep.rep_max
        else:
            draws = obmb_sweep(x, freqs, cfg.m, g, mask=mask,
                               want_profile=False, workers=workers).rep_max
        crit = empirical_quantile(draws, 1.0 - cfg.alpha)
        if not stat > crit:
            iterations.append(Stage1Iteration(k, stat, crit, None, None))
            status = "accepted_null"
            break
        omega_hat = float(freqs[live[best_local]])
        excluded = (omega_hat - halfwidth, omega_hat + halfwidth)
        iterations.append(Stage1Iteration(k, stat, crit, omega_hat, excluded))
        detected.append(omega_hat)
        mask &= ~((freqs >= excluded[0]) & (freqs <= excluded[1]))
    else:
        raise IterationCapError(
            f"frequency detection exceeded {STAGE1_ITERATION_CAP} iterations"
        )
    return Stage1Result(iterations=tuple(iterations),
                        omega_hat_set=tuple(detected),
                        terminated_at=k, status=status)


@dataclass(frozen=True)
class Stage2Config:
    """Change-point settings: local window m_tilde, block window m_prime,
    replicates K0, level beta, multiplier seed."""

    m_tilde: int
    m_prime: int
    K0: int
    beta: float
    seed: int

    def validate(self, n: int) -> None:
        if not (1 <= self.m_prime < self.m_tilde):
            raise InvalidSpecError(
                f"need 1 <= m_prime < m_tilde, got {self.m_prime}, {self.m_tilde}"
            )
        if not self.m_tilde < n / 4:
            raise InvalidSpecError(
                f"need m_tilde < n/4, got m_tilde={self.m_tilde}, n={n}"
            )
        if not (0.0 < self.beta < 1.0):
            raise InvalidSpecError(f"beta must lie in (0, 1), got {self.beta}")
        if self.K0 < 100:
            raise InvalidSpecError(f"K0 must be >= 100, got {self.K0}")


@dataclass(frozen=True)
class Stage2Iteration:
    k: int
    stat: float
    crit: float
    b_hat: int | None
    excluded: tuple | None


@dataclass(frozen=True)
class Stage2Result:
    omega: float
    iterations: tuple
    change_points: tuple
    terminated_at: int
    status: str

    @property
    def detected(self):
        return tuple((it.b_hat, it.stat, it.crit)
                     for it in self.iterations if it.b_hat is not None)


def candidate_range(n: int, m_tilde: int, m_prime: int) -> np.ndarray:
    """Initial candidate change points, trimmed so every left/right
    window and every short block stays inside [1, n]."""
    lo = m_tilde + m_prime + 1
    hi = n - m_tilde - m_prime - 2
    return np.arange(lo, hi + 1, dtype=np.int64)


def locate_change_points(x, omega_hat: float, cfg: Stage2Config,
                         *, workers: int = 1) -> Stage2Result:
    """Iterative change-point estimation at one detected frequency."""
    x = as_series(x)
    n = x.size
    cfg.validate(n)
    if not (0.0 < omega_hat < math.pi):
        raise InvalidSpecError(f"omega_hat must lie in (0, pi), got {omega_hat}")
    mt, mp = cfg.m_tilde, cfg.m_prime
    b1 = candidate_range(n, mt, mp)
    if b1.size == 0:
        raise InvalidSpecError(
            f"no valid candidates for n={n}, m_tilde={mt}, m_prime={mp}"
        )
    t_profile = local_contrast_profile(x, omega_hat, mt, b1)
    blocks = local_contrast_blocks(x, omega_hat, mp,
                                   i_lo=int(b1[0]) - mt, i_hi=int(b1[-1]) + mt + 1)
    g = multiplier_matrix(cfg.seed, cfg.K0, n)
    stat_table = contrast_bootstrap_matrix(blocks, mt, b1, g)  # (K0, |B1|)

    mask = np.ones(b1.size, dtype=bool)
    iterations: list[Stage2Iteration] = []
    change_points: list[int] = []
    status = None
    for k in range(1, STAGE2_ITERATION_CAP + 1):
        if not mask.any():
            status = "candidates_exhausted"
            k -= 1
            break
        live = np.flatnonzero(mask)
        best_local = int(np.argmax(t_profile[live]))
        stat = float(t_profile[live[best_local]])
        draws = stat_table[:, live].max(axis=1)
        crit = empirical_quantile(draws, 1.0 - cfg.beta)
        if not stat > crit:
            iterations.append(Stage2Iteration(k, stat, crit, None, None))
            status = "accepted_null"
            break
        b_hat = int(b1[live[best_local]])
        excluded = (b_hat - mt, b_hat + mt)
        iterations.append(Stage2Iteration(k, stat, crit, b_hat, excluded))
        change_points.append(b_hat)
        mask &= ~((b1 >= excluded[0]) & (b1 <= excluded[1]))
    else:
        raise IterationCapError(
            f"change-point detection exceeded {STAGE2_ITERATION_CAP} iterations"
        )
    return Stage2Result(omega=float(omega_hat), iterations=tuple(iterations),
                        change_points=tuple(change_points),
                        terminated_at=k, status=status)


@dataclass(frozen=True)
class TuningInfo:
    m: int
    m_tilde: int
    m_prime: int
    source: str  # "auto" when any bandwidth came from the MV scan


@dataclass(frozen=True)
class PipelineResult:
    stage1: Stage1Result
    stage2: tuple          # one Stage2Result per detected frequency
    tuning: TuningInfo


def run_pipeline(x, cfg1: Stage1Config, cfg2: Stage2Config,
                 *, workers: int = 1,
                 cache_bytes: int = FREQ_MAX_CACHE_BYTES) -> PipelineResult:
    """Stage 1 followed by stage 2 at every detected frequency.

    Bandwidths set to None in either config are selected by the minimum
    volatility scan before the corresponding stage runs; the stage-2
    scan uses the first detected frequency and the chosen bandwidths
    are shared across frequencies.
    """
    x = as_series(x)
    n = x.size
    auto = False
    m = cfg1.m
    if m is None:
        auto = True
        m = _tuning.mv_select_stage1_m(
            x, _tuning.grid_subset(cfg1.grid)).chosen
        cfg1 = Stage1Config(m=m, K=cfg1.K, alpha=cfg1.alpha,
                            grid=cfg1.grid, seed=cfg1.seed)
    stage1 = detect_frequencies(x, cfg1, workers=workers, cache_bytes=cache_bytes)

    mt, mp = cfg2.m_tilde, cfg2.m_prime
    if stage1.omega_hat_set and (mt is None or mp is None):
        auto = True
        w0 = stage1.omega_hat_set[0]
        if mt is None:
            mt = _tuning.mv_select_m_tilde(x, w0).chosen
        if mp is None:
            mp = _tuning.mv_select_m_prime(x, w0, mt).chosen
    if mt is None or mp is None:  # nothing detected and nothing to tune on
        mt = mt if mt is not None else max(2, int(n ** 0.6))
        mp = mp if mp is not None else max(1, min(8, mt - 1))
    cfg2 = Stage2Config(m_tilde=int(mt), m_prime=int(mp), K0=cfg2.K0,
                        beta=cfg2.beta, seed=cfg2.seed)

    stage2 = tuple(
        locate_change_points(x, w, cfg2, workers=workers)
        for w in stage1.omega_hat_set
    )
    info = TuningInfo(m=int(cfg1.m), m_tilde=int(cfg2.m_tilde),
                      m_prime=int(cfg2.m_prime),
                      source="auto" if auto else "manual")
    return PipelineResult(stage1=stage1, stage2=stage2, tuning=info)
