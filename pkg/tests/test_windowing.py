import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bvpgaf.errors import EmptyWindowSetError, ParameterError
from bvpgaf.ingest import Condition, SyntheticConfig, TimeSeries, generate_synthetic_corpus
from bvpgaf.windowing import RescaleMode, WindowSpec, effective_length, rescale, rescale_set, segment, window_count


def _series(n, cond=Condition.A, pid="P1"):
    return TimeSeries(np.arange(n, dtype=float), 64.0, 0.0, cond, pid)


def test_spec_validation():
    with pytest.raises(ParameterError):
        WindowSpec(1, 1)
    with pytest.raises(ParameterError):
        WindowSpec(8, 0)
    assert WindowSpec(512, 128).tag == "p512_j128"


def test_small_example():
    ws = segment([_series(10)], WindowSpec(4, 3))
    np.testing.assert_array_equal(ws.windows, [[0, 1, 2, 3], [3, 4, 5, 6], [6, 7, 8, 9]])
    assert ws.labels == (Condition.A,) * 3


def test_windows_do_not_span_series():
    ws = segment([_series(6, Condition.A), _series(5, Condition.B, "P2")], WindowSpec(4, 2))
    assert len(ws) == 2 + 1
    assert ws.labels == (Condition.A, Condition.A, Condition.B)
    assert ws.sources.tolist() == [0, 0, 1] and ws.groups == ("P1", "P1", "P2")


def test_default_corpus_count():
    ws = segment(generate_synthetic_corpus(SyntheticConfig()), WindowSpec(512, 128))
    # floor((7680 - 512) / 128) + 1 = 57 per session
    assert len(ws) == 4 * 57 == 228


def test_short_series_skipped_with_warning():
    with pytest.warns(UserWarning, match="shorter"):
        ws = segment([_series(3), _series(8)], WindowSpec(4, 4))
    assert len(ws) == 2 and ws.warnings


def test_all_short_is_error():
    with pytest.raises(EmptyWindowSetError):
        with pytest.warns(UserWarning):
            segment([_series(3)], WindowSpec(4, 1))


def test_unlabelled_series_rejected():
    with pytest.raises(ParameterError):
        segment([TimeSeries(np.zeros(10), 1.0)], WindowSpec(4, 1))


@settings(max_examples=200, deadline=None)
@given(st.integers(2, 300), st.integers(1, 300), st.integers(2, 300))
def test_count_matches_segment(n, j, p):
    spec = WindowSpec(p, j)
    expected = sum(1 for s in range(0, n) if s % j == 0 and s + p <= n)
    assert window_count(n, spec) == expected
    if expected:
        ws = segment([_series(n)], spec)
        assert len(ws) == expected
        assert ws.windows[-1, 0] == (expected - 1) * j


def test_rescale_neg_one_one():
    r = rescale([2.0, 4.0, 3.0])
    np.testing.assert_allclose(r.values, [-1.0, 1.0, 0.0])
    assert not r.degenerate


def test_rescale_zero_one():
    r = rescale([2.0, 4.0, 3.0], RescaleMode.ZERO_ONE)
    np.testing.assert_allclose(r.values, [0.0, 1.0, 0.5])


def test_constant_window_is_degenerate():
    r = rescale([5.0] * 6)
    assert r.degenerate and np.all(r.values == 0.0)
    assert np.all(rescale([5.0] * 6, RescaleMode.ZERO_ONE).values == 0.5)


@settings(max_examples=100, deadline=None)
@given(st.lists(st.floats(-1e9, 1e9), min_size=2, max_size=64))
def test_rescale_bounds(values):
    v = rescale(values).values
    assert np.all(v >= -1) and np.all(v <= 1)
    if np.ptp(values) > 0:
        assert v.min() == -1.0 and v.max() == 1.0


def test_series_scope_uses_shared_extremes():
    ws = segment([_series(8)], WindowSpec(4, 4))
    per_series, _ = rescale_set(ws, scope="series")
    np.testing.assert_allclose(per_series[0], (np.arange(4) * 2 - 7) / 7)
    per_window, _ = rescale_set(ws)
    np.testing.assert_allclose(per_window[1], [-1, -1 / 3, 1 / 3, 1])
    with pytest.raises(ParameterError):
        rescale_set(ws, scope="global")


@pytest.mark.parametrize("p, j, e", [(512, 128, 0.25), (512, 200, 0.390625), (256, 128, 0.5)])
def test_effective_length(p, j, e):
    assert effective_length(WindowSpec(p, j)) == e
