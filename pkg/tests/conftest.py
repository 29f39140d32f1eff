"""Shared fixtures: deterministic signals with known structure."""

import numpy as np
import pytest

from oscdetect import MeanSpec, NoiseModel, OscillatoryComponent, eval_mean, simulate_noise

TWO_SPINDLE_W1 = 0.17007 * 2 * np.pi
TWO_SPINDLE_W2 = 0.38007 * 2 * np.pi


@pytest.fixture(scope="session")
def two_spindle_mean_2000():
    """Two short bursts: amp 2 at w1 on (200, 900], amp 2.5 at w2 on (1100, 1600]."""
    spec = MeanSpec(components=(
        OscillatoryComponent.burst(TWO_SPINDLE_W1, 200, 900, 2.0),
        OscillatoryComponent.burst(TWO_SPINDLE_W2, 1100, 1600, 2.5),
    ))
    return eval_mean(spec, 2000)


@pytest.fixture(scope="session")
def m1_noise_500():
    return simulate_noise(NoiseModel.m1(), 500, seed=2024)


@pytest.fixture
def rng():
    return np.random.default_rng(20240811)
