"""Detection of oscillatory frequencies and their change points in
noisy, non-stationary time series.

Stage 1 profiles the running maximum of progressive Fourier partial
sums over a dense frequency grid and calibrates it with an
overlapping-block multiplier bootstrap; stage 2 locates change points
of each detected oscillation with a phase-adjusted local contrast and
its own bootstrap. Bandwidths can be chosen by a minimum-volatility
scan, and an experiment harness reproduces the benchmark Monte-Carlo
designs at desk scale.
"""

from .bootstrap import (
    empirical_quantile,
    multiplier_matrix,
    multipliers,
    obmb_sweep,
    stage1_bootstrap_stat,
    stage2_bootstrap_stat,
)
from .errors import (
    BudgetExceededError,
    InputError,
    InvalidSpecError,
    IterationCapError,
    UnstableModelError,
)
from .pipeline import (
    PipelineResult,
    Stage1Config,
    Stage1Result,
    Stage2Config,
    Stage2Result,
    detect_frequencies,
    exclusion_halfwidth,
    locate_change_points,
    run_pipeline,
)
from .signals import (
    MeanSpec,
    NoiseModel,
    OscillatoryComponent,
    Trend,
    eval_mean,
    simulate_noise,
    simulate_series,
)
from .spectral import (
    FrequencyGrid,
    LocalContrastBlocks,
    ProfileResult,
    build_grid,
    cusum_field,
    local_contrast_blocks,
    local_contrast_profile,
    progressive_partial_sums,
    progressive_profile,
    sliding_block_sums,
)
from .tuning import (
    MvCurve,
    mv_select_m_prime,
    mv_select_m_tilde,
    mv_select_stage1_m,
    volatility_scan,
)

__version__ = "0.1.0"
