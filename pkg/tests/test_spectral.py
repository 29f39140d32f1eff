import math

import numpy as np
import pytest

from oscdetect import (
    InvalidSpecError,
    build_grid,
    cusum_field,
    local_contrast_blocks,
    local_contrast_profile,
    progressive_partial_sums,
    progressive_profile,
    sliding_block_sums,
)


def brute_partial_sums(x, omega):
    n = len(x)
    return np.array([sum(x[j - 1] * np.exp(1j * omega * j) for j in range(1, k + 1))
                     for k in range(1, n + 1)])


def brute_block_sums(x, m, omega):
    n = len(x)
    return np.array([sum(x[i - 1] * np.exp(1j * omega * i) for i in range(j, j + m))
                     for j in range(1, n - m + 1)])


def brute_contrast(x, omega, mt, i):
    left = sum(np.exp(1j * omega * (l - i)) * x[l - 1] for l in range(i - mt, i + 1))
    right = sum(np.exp(1j * omega * (l - i)) * x[l - 1] for l in range(i + 1, i + mt + 2))
    return abs(left - right) / math.sqrt(2 * mt)


def brute_phi_psi(x, omega, mp, i, j):
    left = sum(np.cos(omega * (l - j)) * x[l - 1] for l in range(i - mp, i + 1))
    right = sum(np.cos(omega * (l - j)) * x[l - 1] for l in range(i + 1, i + mp + 2))
    phi = (left - right) / math.sqrt(2 * mp)
    left = sum(np.sin(omega * (l - j)) * x[l - 1] for l in range(i - mp, i + 1))
    right = sum(np.sin(omega * (l - j)) * x[l - 1] for l in range(i + 1, i + mp + 2))
    psi = (left - right) / math.sqrt(2 * mp)
    return phi, psi


class TestGrid:
    def test_reference_mesh_count(self):
        # scalar oracle: scale = 100^1.5 ln 100 = 4605.17, p = floor((pi-0.1)*scale)+1
        grid = build_grid(100, 0.1, 1.0)
        assert grid.p == 14008
        assert grid.mesh == pytest.approx(1.0 / 4605.17018598809, rel=1e-12)

    def test_first_freq_is_delta0(self):
        grid = build_grid(64, 0.25, 0.7)
        assert grid.freqs[0] == 0.25

    def test_last_freq_brackets_pi(self):
        for n, d0, f in ((64, 0.1, 1.0), (100, 0.5, 0.3), (257, 0.2, 0.05)):
            grid = build_grid(n, d0, f)
            assert grid.freqs[-1] <= math.pi
            assert grid.freqs[-1] + grid.mesh > math.pi

    def test_invalid_inputs(self):
        with pytest.raises(InvalidSpecError):
            build_grid(100, math.pi, 1.0)
        with pytest.raises(InvalidSpecError):
            build_grid(100, 0.1, 0.0)
        with pytest.raises(InvalidSpecError):
            build_grid(3, 0.1, 1.0)


class TestProgressive:
    def test_unit_impulse(self):
        x = np.zeros(16)
        x[0] = 1.0
        L = progressive_partial_sums(x, 0.7)
        assert np.allclose(L, np.exp(1j * 0.7) * np.ones(16))

    def test_zero_series(self):
        assert np.allclose(progressive_partial_sums(np.zeros(8), 1.0), 0.0)

    def test_tone_endpoint_magnitude(self):
        # direct-summation oracle: |L(n)| ~ n/2 for a unit tone at its own frequency
        n = 1000
        j = np.arange(1, n + 1)
        x = np.cos(0.6 * np.pi * j)
        L = progressive_partial_sums(x, 0.6 * np.pi)
        assert 15.3 <= abs(L[-1]) / math.sqrt(n) <= 16.3

    def test_matches_brute_force(self, rng):
        x = rng.standard_normal(96)
        for omega in (0.0, 0.31, 1.7, math.pi):
            fast = progressive_partial_sums(x, omega)
            slow = brute_partial_sums(x, omega)
            assert np.max(np.abs(fast - slow)) <= 1e-9 * 96 * np.max(np.abs(x))


class TestProfile:
    def test_zero_series(self):
        grid = build_grid(64, 0.1, 0.2)
        prof = progressive_profile(np.zeros(64), grid)
        assert prof.stat == 0.0
        assert np.all(prof.values == 0.0)

    def test_two_tone_peaks(self):
        # two steady tones: the two largest local maxima sit within one
        # mesh of the true frequencies
        n = 2000
        j = np.arange(1, n + 1)
        w1, w2 = 2 * np.pi * 0.07, 2 * np.pi * 0.3
        x = 2 * np.cos(w1 * j) + 1.5 * np.cos(w2 * j)
        grid = build_grid(n, 0.1, 0.02)
        prof = progressive_profile(x, grid)
        near1 = np.abs(grid.freqs - w1) <= 0.05
        near2 = np.abs(grid.freqs - w2) <= 0.05
        assert abs(grid.freqs[near1][np.argmax(prof.values[near1])] - w1) <= grid.mesh
        assert abs(grid.freqs[near2][np.argmax(prof.values[near2])] - w2) <= grid.mesh
        assert prof.omega_hat == pytest.approx(w1, abs=grid.mesh)

    def test_on_grid_tone_amplitude(self):
        n, amp = 500, 3.0
        grid = build_grid(n, 0.1, 0.05)
        w0 = grid.freqs[np.argmin(np.abs(grid.freqs - 0.2 * np.pi))]
        x = amp * np.cos(w0 * np.arange(1, n + 1))
        prof = progressive_profile(x, grid)
        peak = prof.values[np.argmin(np.abs(grid.freqs - w0))]
        assert 0.9 * amp * math.sqrt(n) / 2 <= peak <= 1.1 * amp * math.sqrt(n) / 2

    def test_tie_breaks_to_smallest_frequency(self):
        # symmetric two-tone input gives equal peaks; argmax must take the smaller
        n = 400
        j = np.arange(1, n + 1)
        freqs = np.array([0.5, 1.0, 2.0])
        x = np.zeros(n)
        prof = progressive_profile(x, freqs)
        assert prof.omega_hat == 0.5  # all-zero profile ties everywhere

    def test_grid_monotonicity(self, rng):
        x = rng.standard_normal(128)
        grid = build_grid(128, 0.1, 0.3)
        full = progressive_profile(x, grid)
        sub = progressive_profile(x, grid.freqs[::3])
        assert sub.stat <= full.stat + 1e-12


class TestCusum:
    def test_constant_series_zero_frequency(self):
        x = np.full(64, 3.7)
        field = cusum_field(x, [0.0])
        assert np.max(np.abs(field.values)) <= 1e-10

    def test_tone_small_at_own_frequency(self):
        # oracle: L(i, w0) = i/2 + O(1), so centering cancels to O(1)/sqrt(n)
        n = 1000
        x = np.cos(0.6 * np.pi * np.arange(1, n + 1))
        field = cusum_field(x, [0.6 * np.pi])
        assert field.values.max() <= 0.2

    def test_energy_leak_band(self):
        # oracle values: max |C| = 1.011 at offset 10pi/n, 0.508 at 20pi/n
        n = 1000
        x = np.cos(0.6 * np.pi * np.arange(1, n + 1))
        field = cusum_field(x, [0.6 * np.pi + 10 * np.pi / n, 0.6 * np.pi + 20 * np.pi / n])
        assert field.values[:, 0].max() == pytest.approx(1.0108860319625637, rel=1e-9)
        assert field.values[:, 1].max() == pytest.approx(0.5077428472148574, rel=1e-9)
        assert field.values[:, 0].max() >= 1.0

    def test_stride_subsamples_rows(self, rng):
        x = rng.standard_normal(100)
        field = cusum_field(x, [0.5, 1.5], stride=7)
        assert list(field.indices) == list(range(7, 101, 7))
        full = cusum_field(x, [0.5, 1.5], stride=1)
        assert np.allclose(field.values, full.values[field.indices - 1])

    def test_scaling_equivariance(self, rng):
        x = rng.standard_normal(80)
        a = cusum_field(x, [0.9]).values
        b = cusum_field(2.5 * x, [0.9]).values
        assert np.allclose(b, 2.5 * a, rtol=1e-12)


class TestBlockSums:
    def test_ones_omega_zero(self):
        e = sliding_block_sums(np.ones(4), 2, 0.0)
        assert np.allclose(e, 2.0)

    def test_ones_omega_pi(self):
        # cos(pi)+cos(2pi) = 0 and sin terms vanish
        e = sliding_block_sums(np.ones(4), 2, math.pi)
        assert abs(e[0]) <= 1e-12

    def test_matches_direct_sums(self, rng):
        x = rng.standard_normal(64)
        fast = sliding_block_sums(x, 7, 1.1)
        slow = brute_block_sums(x, 7, 1.1)
        assert np.max(np.abs(fast - slow) / np.abs(slow)) <= 1e-10

    def test_recurrence_identity(self, rng):
        # E(j+1) - E(j) equals the one-in/one-out update
        x = rng.standard_normal(48)
        m, omega = 6, 0.77
        e = sliding_block_sums(x, m, omega)
        j = np.arange(1, len(e))
        steps = (-x[j - 1] * np.exp(1j * omega * j)
                 + x[j + m - 1] * np.exp(1j * omega * (j + m)))
        assert np.max(np.abs(np.diff(e) - steps)) <= 1e-9

    def test_invalid_m(self):
        with pytest.raises(InvalidSpecError):
            sliding_block_sums(np.ones(8), 8, 0.5)


class TestLocalContrast:
    def test_zero_series(self):
        t = local_contrast_profile(np.zeros(200), 0.7, 20, np.arange(40, 160))
        assert np.all(t == 0.0)

    def test_pi_phase_jump_peak(self):
        # oracle value: T(b) = 5.1096 for a unit-amplitude pi flip, m_tilde=50
        n, b, mt = 1000, 500, 50
        i = np.arange(1, n + 1)
        w0 = 0.6 * np.pi
        x = np.where(i <= b, np.cos(w0 * i), -np.cos(w0 * i))
        t = local_contrast_profile(x, w0, mt, np.array([b]))
        assert 4.0 <= t[0] <= 6.0
        assert t[0] == pytest.approx(5.109633670616422, rel=1e-9)

    def test_pure_tone_stays_small(self):
        n, mt = 1000, 50
        w0 = 0.6 * np.pi
        x = np.cos(w0 * np.arange(1, n + 1))
        idx = np.arange(mt + 1, n - mt)
        assert local_contrast_profile(x, w0, mt, idx).max() <= 1.0

    def test_matches_brute_force(self, rng):
        x = rng.standard_normal(120)
        mt = 10
        idx = np.arange(mt + 1, 120 - mt)
        fast = local_contrast_profile(x, 0.9, mt, idx)
        slow = np.array([brute_contrast(x, 0.9, mt, i) for i in idx])
        assert np.max(np.abs(fast - slow)) <= 1e-9

    def test_out_of_range_rejected(self):
        with pytest.raises(InvalidSpecError):
            local_contrast_profile(np.zeros(100), 0.5, 10, np.array([10]))
        with pytest.raises(InvalidSpecError):
            local_contrast_profile(np.zeros(100), 0.5, 10, np.array([90]))


class TestContrastBlocks:
    def test_zero_series(self):
        blocks = local_contrast_blocks(np.zeros(64), 0.5, 5)
        assert np.all(blocks.d == 0.0)

    def test_phase_factoring_identity(self, rng):
        # real/imag of e^{-iwj} D(i) reproduce the anchored block sums
        x = rng.standard_normal(200)
        omega, mp, j = 0.7, 8, 100
        blocks = local_contrast_blocks(x, omega, mp)
        ups = blocks.upsilon(j)
        for i in (60, 99, 100, 131):
            phi, psi = brute_phi_psi(x, omega, mp, i, j)
            k = i - blocks.i_lo
            assert abs(ups[k].real - phi) <= 1e-10
            assert abs(ups[k].imag - psi) <= 1e-10

    def test_linearity_in_x(self, rng):
        x = rng.standard_normal(80)
        a = local_contrast_blocks(x, 1.2, 6).d
        b = local_contrast_blocks(3.0 * x, 1.2, 6).d
        assert np.allclose(b, 3.0 * a, rtol=1e-12)

    def test_modulus_invariance_under_anchor_phase(self, rng):
        # |sum_i Upsilon_i(j) c_i| does not depend on the anchor j
        x = rng.standard_normal(150)
        blocks = local_contrast_blocks(x, 0.9, 7)
        c = rng.standard_normal(blocks.d.size)
        ref = abs(np.sum(blocks.d * c))
        for j in (40, 75, 110):
            assert abs(abs(np.sum(blocks.upsilon(j) * c)) - ref) <= 1e-9

    def test_range_validation(self):
        with pytest.raises(InvalidSpecError):
            local_contrast_blocks(np.zeros(64), 0.5, 5, i_lo=5, i_hi=60)


class TestScalingEquivariance:
    def test_profile_and_contrast_scale(self, rng):
        x = rng.standard_normal(128)
        grid = build_grid(128, 0.1, 0.2)
        p1 = progressive_profile(x, grid)
        p2 = progressive_profile(-4.0 * x, grid)
        assert np.allclose(p2.values, 4.0 * p1.values, rtol=1e-12)
        idx = np.arange(20, 100)
        t1 = local_contrast_profile(x, 0.8, 12, idx)
        t2 = local_contrast_profile(-4.0 * x, 0.8, 12, idx)
        assert np.allclose(t2, 4.0 * t1, rtol=1e-12)
