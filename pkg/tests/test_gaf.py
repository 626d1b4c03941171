import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from bvpgaf.errors import DomainError, ParameterError
from bvpgaf.gaf import GafKind, encode_windows, gadf, gadf_matrix, gasf, gasf_matrix, paa, polar_angles
from bvpgaf.ingest import SyntheticConfig, generate_synthetic_corpus
from bvpgaf.windowing import RescaleMode, WindowSpec, rescale, segment

unit = arrays(np.float64, st.integers(1, 48), elements=st.floats(-1, 1))


def test_known_matrix():
    x = np.array([-1.0, 0.0, 1.0])
    phi = np.arccos(x)
    np.testing.assert_allclose(gadf_matrix(x), np.sin(phi[:, None] - phi[None, :]), atol=1e-15)
    np.testing.assert_allclose(gasf_matrix(x), np.cos(phi[:, None] + phi[None, :]), atol=1e-15)
    np.testing.assert_allclose(gasf_matrix(x), [[1, 0, -1], [0, -1, 0], [-1, 0, 1]], atol=1e-15)


@settings(max_examples=100, deadline=None)
@given(unit)
def test_fields_match_angle_form(x):
    phi = polar_angles(x)
    np.testing.assert_allclose(gadf_matrix(x), np.sin(phi[:, None] - phi[None, :]), atol=1e-12)
    np.testing.assert_allclose(gasf_matrix(x), np.cos(phi[:, None] + phi[None, :]), atol=1e-12)


@settings(max_examples=100, deadline=None)
@given(unit)
def test_field_symmetries(x):
    d, s = gadf_matrix(x), gasf_matrix(x)
    np.testing.assert_array_equal(d, -d.T)
    assert np.all(np.diag(d) == 0)
    np.testing.assert_allclose(s, s.T, atol=0)
    assert np.all(np.abs(d) <= 1 + 1e-15) and np.all(np.abs(s) <= 1 + 1e-15)


def test_gasf_diagonal_is_double_angle():
    x = np.linspace(-1, 1, 9)
    np.testing.assert_allclose(np.diag(gasf_matrix(x)), 2 * x * x - 1, atol=1e-15)


def test_clamp_tolerance():
    polar_angles([1 + 5e-10, -1 - 5e-10])
    with pytest.raises(DomainError):
        polar_angles([1.001])


def test_rejects_zero_one_window():
    with pytest.raises(DomainError):
        gadf(rescale([0, 1, 2], RescaleMode.ZERO_ONE))
    img = gasf(rescale([0, 1, 2]), paa_size=3)
    assert img.kind is GafKind.GASF and img.size == 3


def test_batched_equals_loop():
    rng = np.random.default_rng(0)
    x = rng.uniform(-1, 1, (5, 7))
    batch = gadf_matrix(x)
    for i in range(5):
        np.testing.assert_array_equal(batch[i], gadf_matrix(x[i]))


def _paa_oracle(v, s):
    # integrate the piecewise-constant series over [k p/s, (k+1) p/s)
    p = len(v)
    out = []
    for k in range(s):
        a, b = k * p / s, (k + 1) * p / s
        total = 0.0
        for i in range(p):
            total += v[i] * max(0.0, min(b, i + 1) - max(a, i))
        out.append(total / (b - a))
    return np.array(out)


@settings(max_examples=100, deadline=None)
@given(st.data())
def test_paa_matches_integral(data):
    p = data.draw(st.integers(1, 40))
    s = data.draw(st.integers(1, p))
    v = np.array(data.draw(st.lists(st.floats(-100, 100), min_size=p, max_size=p)))
    np.testing.assert_allclose(paa(v, s), _paa_oracle(v, s), atol=1e-9)


def test_paa_examples():
    np.testing.assert_allclose(paa([1, 2, 3, 4], 2), [1.5, 3.5])
    np.testing.assert_allclose(paa([0, 3, 6], 2), [1.0, 5.0])
    np.testing.assert_array_equal(paa([1, 2], 2), [1, 2])
    with pytest.raises(ParameterError):
        paa([1, 2], 3)


def test_encode_windows():
    ws = segment(generate_synthetic_corpus(SyntheticConfig(duration_s=20)), WindowSpec(200, 50))
    imgs = encode_windows(ws, GafKind.GADF, 32)
    assert imgs.images.shape == (len(ws), 32, 32)
    assert imgs.paa_size == 32 and not imgs.degenerate.any()
    full = encode_windows(ws, GafKind.GASF, None)
    assert full.images.shape[1:] == (200, 200)
    capped = encode_windows(ws, paa_size=500)
    assert capped.paa_size == 200
