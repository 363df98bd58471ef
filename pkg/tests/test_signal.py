import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import naive_dft
from rosar.geometry import RadarConfig, TargetPolar, target_range_angle
from rosar.signal import (
    DataMatrix,
    JitterModel,
    PointScene,
    bin_range,
    range_bin_of,
    range_fft,
    sample_error_vectors,
    sample_phase_errors,
    simulate_if,
    substream,
    valid_bins,
)

CFG = RadarConfig()


def point(phi=math.pi / 2, R=2.0, refl=1.0):
    return PointScene([(TargetPolar(phi, R), refl)])


def test_first_sample_phase_is_two_k_range():
    d = simulate_if(CFG, point())
    Rn, _ = target_range_angle(CFG, TargetPolar(math.pi / 2, 2.0), np.arange(CFG.N))
    visible = np.abs(d.data[0]) > 0
    expect = np.exp(2j * CFG.wavenumber * Rn[visible])
    got = d.data[0, visible] / np.abs(d.data[0, visible])
    np.testing.assert_allclose(got, expect, atol=1e-9)


def test_empty_scene_is_zero():
    d = simulate_if(CFG, PointScene())
    assert d.kind == "IF" and d.data.shape == (225, 800)
    assert not np.any(d.data)
    assert not np.any(range_fft(d, CFG).data)


def test_boresight_pulse_peaks_at_expected_bin():
    d = range_fft(simulate_if(CFG, point()), CFG)
    assert int(np.argmax(np.abs(d.data[:, 200]))) == 42


def test_profile_peak_follows_range():
    d = range_fft(simulate_if(CFG, point()), CFG)
    Rn, _ = target_range_angle(CFG, TargetPolar(math.pi / 2, 2.0), np.arange(CFG.N))
    for n in (50, 120, 200, 333):
        expect = range_bin_of(CFG, Rn[n])
        assert abs(int(np.argmax(np.abs(d.data[:, n]))) - expect) <= 1


def test_range_bin_of():
    assert range_bin_of(CFG, 0.0) == 0
    assert range_bin_of(CFG, 1.855) == 42
    assert range_bin_of(CFG, 2.0) == 45
    with pytest.raises(ValueError):
        range_bin_of(CFG, CFG.unambiguous_range)
    assert range_bin_of(CFG, bin_range(CFG, 77)) == 77


def test_valid_bins_are_observable():
    bins = valid_bins(CFG)
    assert bins[0] == 4 and bins[-1] == 112
    assert all(CFG.r < bin_range(CFG, b) < CFG.unambiguous_range for b in bins)


def test_parseval():
    rng = np.random.default_rng(1)
    x = rng.standard_normal((225, 8)) + 1j * rng.standard_normal((225, 8))
    y = range_fft(DataMatrix("IF", x, np.zeros(8)), CFG).data
    np.testing.assert_allclose(np.sum(np.abs(y) ** 2, 0), 225 * np.sum(np.abs(x) ** 2, 0))


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 2**31), st.integers(16, 40))
def test_range_fft_matches_naive_dft(seed, L):
    cfg = RadarConfig(M=16, L=L)
    rng = np.random.default_rng(seed)
    x = rng.standard_normal((16, 5)) + 1j * rng.standard_normal((16, 5))
    got = range_fft(DataMatrix("IF", x, np.zeros(5)), cfg).data
    ref = naive_dft(x, L)
    assert np.max(np.abs(got - ref)) <= 1e-9 * np.max(np.abs(ref))


def test_range_fft_rejects_compressed_and_short_L():
    d = simulate_if(CFG, point(), n_pulses=3)
    with pytest.raises(ValueError):
        range_fft(range_fft(d, CFG), CFG)
    with pytest.raises(ValueError):
        range_fft(d, RadarConfig(L=100))


def test_data_matrix_validation():
    with pytest.raises(ValueError):
        DataMatrix("IF", np.zeros((225, 3)), np.zeros(4))
    with pytest.raises(ValueError):
        DataMatrix("raw", np.zeros((225, 3)), np.zeros(3))
    with pytest.raises(ValueError):
        DataMatrix("IF", np.zeros((10, 3)), np.zeros(3)).check_rows(CFG)


def test_scene_validation():
    with pytest.raises(ValueError):
        PointScene(noise_power=-1)
    with pytest.raises(ValueError):
        PointScene([(TargetPolar(0, 2), complex(np.nan))])
    with pytest.raises(ValueError):
        JitterModel(sigma=-0.1)
    with pytest.raises(ValueError):
        simulate_if(CFG, point(R=0.1))


def test_replay_is_bit_identical():
    scene = PointScene([(TargetPolar(1.0, 3.0), 0.5 + 0.5j)], noise_power=0.01)
    j = JitterModel.from_degrees(0.086, seed=7)
    a = simulate_if(CFG, scene, j, n_pulses=50)
    b = simulate_if(CFG, scene, j, n_pulses=50)
    assert np.array_equal(a.data, b.data)
    assert np.array_equal(a.pulse_azimuths, b.pulse_azimuths)
    c = simulate_if(CFG, scene, JitterModel.from_degrees(0.086, seed=8), n_pulses=50)
    assert not np.array_equal(a.data, c.data)


def test_partial_pulse_run_is_prefix_of_full_run():
    # per-pulse substreams make the first P pulses independent of the total
    scene = PointScene([(TargetPolar(1.0, 3.0), 1.0)], noise_power=0.1)
    j = JitterModel.from_degrees(0.1, seed=3)
    full = simulate_if(CFG, scene, j)
    part = simulate_if(CFG, scene, j, n_pulses=40)
    assert np.array_equal(full.data[:, :40], part.data)


def test_noise_statistics():
    d = simulate_if(CFG, PointScene(noise_power=2.0), n_pulses=100)
    assert np.var(d.data) == pytest.approx(2.0, rel=0.02)
    assert abs(np.mean(d.data)) < 0.02


def test_substreams_are_independent():
    a = substream(1, 2, 3).standard_normal(4)
    assert np.array_equal(a, substream(1, 2, 3).standard_normal(4))
    assert not np.array_equal(a, substream(1, 2, 4).standard_normal(4))
    assert not np.array_equal(a, substream(1, 3, 3).standard_normal(4))


def test_phase_errors_zero_without_jitter():
    assert not np.any(sample_phase_errors(CFG, JitterModel(), 2.0, 10))
    with pytest.raises(ValueError):
        sample_error_vectors(CFG, JitterModel(0.01), 2.0, 0)


def test_phase_errors_deterministic_and_scale_with_sigma():
    j1 = JitterModel.from_degrees(0.05, seed=1)
    a = sample_phase_errors(CFG, j1, 2.0, 200)
    assert np.array_equal(a, sample_phase_errors(CFG, j1, 2.0, 200))
    b = sample_phase_errors(CFG, JitterModel.from_degrees(0.1, seed=1), 2.0, 200)
    assert np.median(b) > np.median(a)


def test_bounded_error_vectors_sit_on_the_ball():
    from rosar.signal import bounded_error_vectors

    e = bounded_error_vectors(CFG, JitterModel.from_degrees(0.086, seed=2), 2.0, 20, 0.035)
    np.testing.assert_allclose(np.linalg.norm(e, axis=1), 0.035, rtol=1e-12)
    assert e.shape == (20, 381)
    with pytest.raises(ValueError):
        bounded_error_vectors(CFG, JitterModel(), 2.0, 3, 0.035)
