import numpy as np
import pytest

from oscdetect import (
    InvalidSpecError,
    MeanSpec,
    NoiseModel,
    OscillatoryComponent,
    Trend,
    UnstableModelError,
    eval_mean,
    simulate_noise,
    simulate_series,
)


def test_empty_spec_is_zero():
    assert np.array_equal(eval_mean(MeanSpec(), 10), np.zeros(10))


def test_two_spindle_gap_sample_is_zero(two_spindle_mean_2000):
    # sample 1000 falls between the two bursts
    assert two_spindle_mean_2000[999] == 0.0


def test_two_spindle_sample_inside_first_burst(two_spindle_mean_2000):
    # scalar oracle: 2*cos(0.17007*2*pi*400), evaluated directly
    assert two_spindle_mean_2000[399] == pytest.approx(1.9691286690584155, abs=1e-12)


def test_trend_catalog():
    n = 8
    i = np.arange(1, n + 1)
    lin = eval_mean(MeanSpec(trend=Trend.linear(2.0)), n)
    assert np.allclose(lin, 2.0 * i / n)
    poly = eval_mean(MeanSpec(trend=Trend.polynomial([1.0, 0.0, 3.0])), n)
    assert np.allclose(poly, 1.0 + 3.0 * (i / n) ** 2)


def test_segment_out_of_range_rejected():
    comp = OscillatoryComponent(1.0, ((0, 1.0, 0.0), (50, 0.0, 0.0)))
    with pytest.raises(InvalidSpecError):
        eval_mean(MeanSpec(components=(comp,)), 40)


def test_component_invariants():
    with pytest.raises(InvalidSpecError):
        OscillatoryComponent(0.0, ((0, 1.0, 0.0),))  # omega out of (0, pi)
    with pytest.raises(InvalidSpecError):
        OscillatoryComponent(1.0, ((5, 1.0, 0.0),))  # first start not 0
    with pytest.raises(InvalidSpecError):
        OscillatoryComponent(1.0, ((0, 1.0, 0.0), (4, 1.0, 0.0), (4, 0.0, 0.0)))
    with pytest.raises(InvalidSpecError):
        MeanSpec(components=(OscillatoryComponent.tone(1.0, 1.0),
                             OscillatoryComponent.tone(1.0, 2.0)))


def test_amplitude_scaling_linearity(rng):
    comps = (OscillatoryComponent.burst(0.9, 10, 60, 1.3, -0.4),
             OscillatoryComponent.tone(2.1, 0.7, 0.2))
    scaled = tuple(
        OscillatoryComponent(c.omega, tuple((b, 3.0 * a, 3.0 * s) for b, a, s in c.segments))
        for c in comps)
    base = eval_mean(MeanSpec(components=comps), 100)
    tripled = eval_mean(MeanSpec(components=scaled), 100)
    assert np.allclose(tripled, 3.0 * base, atol=1e-12)


def test_zero_innovations_give_zero_noise():
    for model in (NoiseModel.m1(), NoiseModel.m2(), NoiseModel.m3(), NoiseModel.m4()):
        out = simulate_noise(model, 50, seed=1, innovations=np.zeros(250))
        assert np.array_equal(out, np.zeros(50))


def test_noise_determinism():
    a = simulate_noise(NoiseModel.m1(), 400, seed=99)
    b = simulate_noise(NoiseModel.m1(), 400, seed=99)
    assert a.tobytes() == b.tobytes()
    c = simulate_noise(NoiseModel.m1(), 400, seed=100)
    assert not np.array_equal(a, c)


def test_noise_recursion_locality():
    # flipping one innovation changes the path only from that index on
    n, burn = 60, 200
    e = np.zeros(burn + n)
    e[burn + 30] = 1.0
    out = simulate_noise(NoiseModel.m1(), n, seed=0, innovations=e)
    assert np.array_equal(out[:30], np.zeros(30))
    assert out[30] == 1.0
    assert np.all(out[30:33] != 0)


def test_m1_frozen_coefficient_variance():
    # AR(1) with coefficient frozen near t=0 has variance 1/(1-0.25) = 4/3
    n = 100000
    eps = simulate_noise(NoiseModel.m1(), n, seed=5)
    window = eps[:2000]
    assert np.var(window) == pytest.approx(4.0 / 3.0, abs=0.1)


def test_m4_is_raw_student_t():
    # raw t5 innovations: variance of eps exceeds the normal-innovation case
    n = 60000
    m4 = simulate_noise(NoiseModel.m4(), n, seed=8)
    assert np.var(m4) > 1.5  # t5 variance 5/3 inflates the AR variance


def test_unstable_model_rejected():
    bad = NoiseModel.custom((), ("1.2",))
    with pytest.raises(UnstableModelError):
        simulate_noise(bad, 100, seed=1)


def test_custom_piecewise_coefficient():
    model = NoiseModel.custom((0.5,), ("0.5*cos(t)", "0.25"))
    t = np.array([0.1, 0.5, 0.51, 0.9])
    a = model.coefficient(t)
    assert a[0] == pytest.approx(0.5 * np.cos(0.1))
    assert a[1] == pytest.approx(0.5 * np.cos(0.5))
    assert a[2] == 0.25 and a[3] == 0.25


def test_custom_expression_name_guard():
    with pytest.raises(InvalidSpecError):
        NoiseModel.custom((), ("__import__('os')",)).coefficient(0.5)


def test_student_t_df_validation():
    with pytest.raises(InvalidSpecError):
        NoiseModel.custom((), ("0.3",), innovation="student_t", df=2.0)


def test_simulate_series_is_sum():
    mean = MeanSpec(components=(OscillatoryComponent.tone(1.1, 2.0),))
    n, burn = 64, 200
    zeros = np.zeros(burn + n)
    assert np.array_equal(
        simulate_series(mean, NoiseModel.m1(), n, 3, innovations=zeros),
        eval_mean(mean, n))
    combined = simulate_series(mean, NoiseModel.m1(), n, 3)
    assert np.allclose(combined,
                       eval_mean(mean, n) + simulate_noise(NoiseModel.m1(), n, 3))


def test_trend_plus_noise_mean_lln():
    # mu_k = k/n plus centered noise: sample mean near 1/2
    x = simulate_series(MeanSpec(trend=Trend.linear(1.0)), NoiseModel.m1(), 10000, 7)
    assert abs(x.mean() - 0.5) < 0.05
