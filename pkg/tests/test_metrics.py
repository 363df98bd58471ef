import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from rosar.geometry import RadarConfig, steering_matrix, visibility_window
from rosar.metrics import (
    MetricError,
    PatternTrace,
    array_pattern,
    design_pattern,
    grid_violations,
    half_mainlobe_width,
    image_entropy,
    peak_index,
    pisr,
)
from rosar.synthesis import LOOK, SynthesisParams

CFG = RadarConfig()
pixels = arrays(np.float64, st.integers(2, 40), elements=st.floats(0.01, 100.0))


def test_entropy_extremes():
    assert image_entropy(np.ones((7, 9))) == pytest.approx(math.log(63))
    delta = np.zeros((5, 5))
    delta[2, 3] = 4.0
    assert image_entropy(delta) == 0.0
    with pytest.raises(MetricError):
        image_entropy(np.zeros(4))


@given(pixels, st.floats(1e-3, 1e3), st.floats(0, 2 * math.pi))
def test_entropy_ignores_gain_and_phase(x, g, ph):
    assert image_entropy(g * np.exp(1j * ph) * x) == pytest.approx(image_entropy(x), rel=1e-9)


@given(pixels)
def test_entropy_bounded_by_log_count(x):
    assert -1e-12 <= image_entropy(x) <= math.log(x.size) + 1e-12


@given(pixels, st.floats(0.01, 0.49))
def test_entropy_rises_when_energy_moves_to_a_weaker_pixel(x, frac):
    e = x**2
    i, j = int(np.argmax(e)), int(np.argmin(e))
    if e[i] - e[j] < 1e-6 * e[i]:
        return
    moved = e.copy()
    t = frac * (e[i] - e[j])
    moved[i] -= t
    moved[j] += t
    assert image_entropy(np.sqrt(moved)) >= image_entropy(x) - 1e-12


def test_pisr_basics():
    ang = np.radians(np.arange(80, 101, 1.0))
    v = np.zeros(ang.size)
    v[10] = 1.0
    assert pisr(v, ang) == math.inf
    v[0] = 0.1
    assert pisr(v, ang) == pytest.approx(1 / 0.01)
    # samples within the main-lobe half-width do not count as sidelobes
    v[11] = 0.5
    assert pisr(v, ang) == pytest.approx(1 / 0.01)
    with pytest.raises(MetricError):
        pisr(np.ones(3), np.radians([90, 90.1, 90.2]))


@given(arrays(np.float64, 30, elements=st.floats(0.01, 10)), st.floats(1e-3, 1e3))
def test_pisr_scale_invariant(v, g):
    ang = np.radians(np.linspace(80, 100, 30))
    assert pisr(g * v, ang) == pytest.approx(pisr(v, ang), rel=1e-9)


def test_half_mainlobe_width():
    tr = PatternTrace(np.array([0.0, 1.0, 2.0]), np.array([1.0, 0.2, 1.0 + 1e-9]))
    assert half_mainlobe_width(tr) == 1.0
    with pytest.raises(MetricError):
        half_mainlobe_width(PatternTrace(np.arange(5.0), np.arange(5.0)))
    with pytest.raises(MetricError):
        half_mainlobe_width(PatternTrace(np.arange(3.0), np.array([1.0, 0.2, 1.0])))
    with pytest.raises(ValueError):
        PatternTrace(np.array([1.0, 0.0]), np.ones(2))


def test_uniform_weights_peak_at_look():
    R = 2.0
    win = visibility_window(CFG, R)
    a = steering_matrix(CFG, [LOOK], R, win)[0]
    w = a / np.linalg.norm(a)
    ang = LOOK + np.radians(np.linspace(-5, 5, 201))
    tr = array_pattern(w, CFG, R, ang)
    assert tr.angles[int(np.argmax(np.abs(tr.response)))] == pytest.approx(LOOK)
    assert tr.peak == pytest.approx(np.linalg.norm(a))
    assert tr.db().max() == 0.0
    assert 0 < half_mainlobe_width(tr) < math.radians(2)
    with pytest.raises(ValueError):
        array_pattern(w, CFG, R, [0.0])
    with pytest.raises(ValueError):
        array_pattern(w[1:], CFG, R, [LOOK])


def test_design_pattern_and_violations():
    R = 2.0
    win = visibility_window(CFG, R)
    a = steering_matrix(CFG, [LOOK], R, win)[0]
    params = SynthesisParams()
    tr = design_pattern(a, CFG, R, params)
    assert tr.angles.size == 341
    # matched filtering has -13 dB sidelobes, far above eta = -33 dB
    assert grid_violations(a, CFG, R, params) > 0
    loose = SynthesisParams(eta=0.99)
    assert grid_violations(a, CFG, R, loose) == 0


def test_peak_index():
    x = np.zeros((3, 4), complex)
    x[1, 2] = -2j
    assert peak_index(x) == (1, 2)
