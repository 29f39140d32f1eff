import numpy as np
import pytest

from oscdetect import (
    InvalidSpecError,
    MeanSpec,
    NoiseModel,
    OscillatoryComponent,
    Stage1Config,
    Stage2Config,
    build_grid,
    detect_frequencies,
    exclusion_halfwidth,
    locate_change_points,
    run_pipeline,
    simulate_series,
)
from oscdetect.pipeline import candidate_range


def tone_series(n, omega, amp):
    return amp * np.cos(omega * np.arange(1, n + 1))


class TestStage1:
    def test_zero_series_accepts_null(self):
        grid = build_grid(64, 0.1, 0.5)
        cfg = Stage1Config(m=8, K=100, alpha=0.05, grid=grid, seed=1)
        res = detect_frequencies(np.zeros(64), cfg)
        assert res.omega_hat_set == ()
        assert res.status == "accepted_null"
        assert res.terminated_at == 1
        # tie rule: stat 0 does not exceed crit 0
        assert res.iterations[0].stat == 0.0
        assert res.iterations[0].crit == 0.0

    def test_noiseless_tone_single_detection(self):
        n = 500
        grid = build_grid(n, 0.1, 0.05)
        w0 = float(grid.freqs[np.argmin(np.abs(grid.freqs - 0.2 * np.pi))])
        cfg = Stage1Config(m=14, K=150, alpha=0.05, grid=grid, seed=42)
        res = detect_frequencies(tone_series(n, w0, 3.0), cfg)
        assert len(res.omega_hat_set) == 1
        assert abs(res.omega_hat_set[0] - w0) <= grid.mesh
        assert res.status == "accepted_null"
        # the detection stat is the analytic tone level, far above crit
        first = res.iterations[0]
        assert first.stat == pytest.approx(3.0 * np.sqrt(n) / 2, rel=0.1)
        assert first.stat > first.crit

    def test_cache_and_streaming_paths_agree(self):
        n = 300
        grid = build_grid(n, 0.1, 0.03)
        w0 = float(grid.freqs[grid.p // 3])
        x = tone_series(n, w0, 2.5) + 0.1 * np.sin(np.arange(n))
        cfg = Stage1Config(m=10, K=120, alpha=0.1, grid=grid, seed=7)
        cached = detect_frequencies(x, cfg)
        streamed = detect_frequencies(x, cfg, cache_bytes=0)
        assert cached == streamed

    def test_candidate_set_strictly_shrinks_and_detections_separated(self):
        n = 400
        grid = build_grid(n, 0.1, 0.05)
        w1 = float(grid.freqs[np.argmin(np.abs(grid.freqs - 0.8))])
        w2 = float(grid.freqs[np.argmin(np.abs(grid.freqs - 2.2))])
        x = tone_series(n, w1, 3.0) + tone_series(n, w2, 2.0)
        cfg = Stage1Config(m=12, K=120, alpha=0.05, grid=grid, seed=3)
        res = detect_frequencies(x, cfg)
        assert len(res.omega_hat_set) == 2
        half = exclusion_halfwidth(12)
        ws = sorted(res.omega_hat_set)
        assert ws[1] - ws[0] > half
        # statistic monotone over iterations (candidate sets nest)
        stats = [it.stat for it in res.iterations]
        assert all(a >= b for a, b in zip(stats, stats[1:]))
        # excluded intervals are recorded per detection
        for it in res.iterations[:-1]:
            assert it.excluded[0] == pytest.approx(it.omega_hat - half)
            assert it.excluded[1] == pytest.approx(it.omega_hat + half)

    def test_detections_attain_the_masked_profile_max(self):
        # re-checkable from traces: each omega_hat attains F on its candidate set
        from oscdetect import progressive_profile

        n = 400
        grid = build_grid(n, 0.1, 0.05)
        w1 = float(grid.freqs[np.argmin(np.abs(grid.freqs - 1.1))])
        x = tone_series(n, w1, 2.0)
        cfg = Stage1Config(m=10, K=100, alpha=0.05, grid=grid, seed=5)
        res = detect_frequencies(x, cfg)
        prof = progressive_profile(x, grid)
        mask = np.ones(grid.p, dtype=bool)
        for it in res.iterations:
            if it.omega_hat is None:
                break
            live = np.flatnonzero(mask)
            assert it.stat == pytest.approx(prof.values[live].max(), rel=1e-12)
            sel = np.abs(grid.freqs - it.omega_hat) <= exclusion_halfwidth(cfg.m)
            mask &= ~sel

    def test_grid_mismatch_rejected(self):
        grid = build_grid(100, 0.1, 0.5)
        cfg = Stage1Config(m=8, K=100, alpha=0.05, grid=grid, seed=1)
        with pytest.raises(InvalidSpecError):
            detect_frequencies(np.zeros(64), cfg)

    def test_config_validation(self):
        grid = build_grid(64, 0.1, 0.5)
        for bad in (dict(m=0), dict(m=64), dict(alpha=0.0), dict(K=50)):
            kwargs = dict(m=8, K=100, alpha=0.05, grid=grid, seed=1)
            kwargs.update(bad)
            with pytest.raises(InvalidSpecError):
                Stage1Config(**kwargs).validate(64)


class TestStage2:
    def test_zero_series_no_change_points(self):
        cfg = Stage2Config(m_tilde=20, m_prime=5, K0=100, beta=0.05, seed=1)
        res = locate_change_points(np.zeros(300), 0.7, cfg)
        assert res.change_points == ()
        assert res.status == "accepted_null"

    def test_amplitude_jump_located(self):
        # burst onset at b = 0.25 n; tolerance ln(m_tilde) * 10
        n, b, mt = 1000, 250, 50
        i = np.arange(1, n + 1)
        w0 = 0.6 * np.pi
        x = np.where(i > b, 2 * np.cos(w0 * i), 0.0)
        cfg = Stage2Config(m_tilde=mt, m_prime=8, K0=150, beta=0.05, seed=4)
        res = locate_change_points(x, w0, cfg)
        assert len(res.change_points) == 1
        assert abs(res.change_points[0] - b) <= np.log(mt) * 10

    def test_exclusion_and_separation(self):
        n = 1200
        i = np.arange(1, n + 1)
        w0 = 0.9
        x = np.where((i > 300) & (i <= 700), 2.5 * np.cos(w0 * i), 0.0)
        cfg = Stage2Config(m_tilde=60, m_prime=8, K0=150, beta=0.05, seed=9)
        res = locate_change_points(x, w0, cfg)
        assert len(res.change_points) == 2
        bs = sorted(res.change_points)
        assert abs(bs[0] - 300) <= 40 and abs(bs[1] - 700) <= 40
        assert bs[1] - bs[0] > cfg.m_tilde
        stats = [it.stat for it in res.iterations]
        assert all(a >= b for a, b in zip(stats, stats[1:]))

    def test_candidate_range_boundaries(self):
        b = candidate_range(100, 20, 5)
        assert b[0] == 26 and b[-1] == 100 - 20 - 5 - 2

    def test_invalid_config(self):
        cfg = Stage2Config(m_tilde=10, m_prime=12, K0=100, beta=0.05, seed=1)
        with pytest.raises(InvalidSpecError):
            locate_change_points(np.zeros(300), 0.7, cfg)
        cfg = Stage2Config(m_tilde=80, m_prime=5, K0=100, beta=0.05, seed=1)
        with pytest.raises(InvalidSpecError):
            locate_change_points(np.zeros(300), 0.7, cfg)  # m_tilde >= n/4
        cfg = Stage2Config(m_tilde=20, m_prime=5, K0=100, beta=0.05, seed=1)
        with pytest.raises(InvalidSpecError):
            locate_change_points(np.zeros(300), 3.5, cfg)  # omega out of range


class TestPipeline:
    def test_zero_series_empty_everywhere(self):
        grid = build_grid(200, 0.1, 0.2)
        cfg1 = Stage1Config(m=10, K=100, alpha=0.05, grid=grid, seed=1)
        cfg2 = Stage2Config(m_tilde=20, m_prime=5, K0=100, beta=0.05, seed=2)
        res = run_pipeline(np.zeros(200), cfg1, cfg2)
        assert res.stage1.omega_hat_set == ()
        assert res.stage2 == ()
        assert res.tuning.source == "manual"

    def test_auto_tuning_populates_bandwidths(self):
        spec = MeanSpec(components=(OscillatoryComponent.tone(1.1, 3.0),))
        x = simulate_series(spec, NoiseModel.m1(), 400, 5)
        grid = build_grid(400, 0.1, 0.05)
        cfg1 = Stage1Config(m=None, K=120, alpha=0.05, grid=grid, seed=11)
        cfg2 = Stage2Config(m_tilde=None, m_prime=None, K0=120, beta=0.05, seed=12)
        res = run_pipeline(x, cfg1, cfg2)
        assert res.tuning.source == "auto"
        assert res.tuning.m >= 1
        assert 1 <= res.tuning.m_prime < res.tuning.m_tilde
        assert len(res.stage2) == len(res.stage1.omega_hat_set)

    def test_burst_pipeline_finds_frequency_and_edges(self):
        w0 = 0.9
        spec = MeanSpec(components=(OscillatoryComponent.burst(w0, 150, 450, 2.5),))
        x = simulate_series(spec, NoiseModel.m1(), 600, 21)
        grid = build_grid(600, 0.1, 0.05)
        cfg1 = Stage1Config(m=14, K=150, alpha=0.05, grid=grid, seed=31)
        cfg2 = Stage2Config(m_tilde=45, m_prime=8, K0=150, beta=0.05, seed=32)
        res = run_pipeline(x, cfg1, cfg2)
        assert len(res.stage1.omega_hat_set) == 1
        assert abs(res.stage1.omega_hat_set[0] - w0) <= 0.02
        bs = sorted(res.stage2[0].change_points)
        assert len(bs) == 2
        assert abs(bs[0] - 150) <= 30 and abs(bs[1] - 450) <= 30


class TestDegenerateTermination:
    def test_grid_exhausted_reports_detected_so_far(self):
        # a grid narrower than one exclusion window empties after one hit
        n = 200
        grid = build_grid(n, 3.0, 0.5)
        assert grid.p >= 2
        w0 = float(grid.freqs[grid.p // 2])
        x = tone_series(n, w0, 5.0)
        cfg = Stage1Config(m=8, K=100, alpha=0.05, grid=grid, seed=2)
        res = detect_frequencies(x, cfg)
        assert res.status == "grid_exhausted"
        assert res.omega_hat_set == (w0,)

    def test_candidates_exhausted_in_stage2(self):
        # candidate span shorter than one exclusion window
        n = 290
        mt, mp = 70, 5
        i = np.arange(1, n + 1)
        w0 = 0.9
        x = np.where(i <= n // 2, np.cos(w0 * i), -np.cos(w0 * i)) * 4.0
        cfg = Stage2Config(m_tilde=mt, m_prime=mp, K0=100, beta=0.05, seed=3)
        res = locate_change_points(x, w0, cfg)
        assert res.status in ("candidates_exhausted", "accepted_null")
        if res.status == "candidates_exhausted":
            assert len(res.change_points) >= 1
