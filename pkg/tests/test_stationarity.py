import numpy as np
import pytest

from bvpgaf.errors import DegenerateInputError, ParameterError
from oracles import REFERENCE, canonical

from bvpgaf.stationarity import (
    Stationarity,
    adf_critical_values,
    adf_test,
    classify_stationarity,
    default_adf_maxlag,
    default_kpss_lags,
    kpss_test,
    long_run_variance,
    stationarity_report,
)


@pytest.mark.parametrize("kind, n", list(REFERENCE))
def test_matches_reference(kind, n):
    x = canonical(kind, n)
    adf_stat, lag, kpss_c, kpss_ct = REFERENCE[(kind, n)]
    a = adf_test(x)
    assert a.lags == lag
    assert a.statistic == pytest.approx(adf_stat, abs=1e-9)
    assert kpss_test(x).statistic == pytest.approx(kpss_c, abs=1e-9)
    assert kpss_test(x, "ct").statistic == pytest.approx(kpss_ct, abs=1e-9)


def test_adf_critical_values_reference():
    # statsmodels' reported critical values for nobs = 199 and 999
    assert [cv for _, cv in adf_critical_values("c", 199)] == pytest.approx(
        [-3.4636447617687436, -2.8761761179270766, -2.57457158581854], abs=1e-12)
    assert [cv for _, cv in adf_critical_values("ct", 999)] == pytest.approx(
        [-3.967860781661831, -3.4148938944043334, -3.1296421434972537], abs=1e-12)


def test_kpss_pvalue_interpolation_reference():
    # statsmodels interpolates the same table: 0.018256560198993577
    assert kpss_test(canonical("walk", 200)).p_value == pytest.approx(0.018256560198993577, abs=1e-12)


def test_adf_fixed_lag_against_lstsq():
    x = canonical("walk", 300)
    k = 3
    dy = np.diff(x)
    rows = range(k, dy.size)
    X = np.array([[1.0, x[t], *[dy[t - i] for i in range(1, k + 1)]] for t in rows])
    y = dy[k:]
    beta, ssr, *_ = np.linalg.lstsq(X, y, rcond=None)
    sigma2 = ssr[0] / (len(y) - X.shape[1])
    se = np.sqrt(sigma2 * np.linalg.inv(X.T @ X)[1, 1])
    res = adf_test(x, max_lag=k, autolag=False)
    assert res.lags == k and res.nobs == len(y)
    assert res.statistic == pytest.approx(beta[1] / se, rel=1e-10)


def test_long_run_variance_lag_zero_is_mean_square():
    r = np.array([1.0, -2.0, 0.5, 0.5])
    assert long_run_variance(r, 0) == pytest.approx(np.mean(r * r))
    brute = (r @ r + 2 * 0.5 * (r[1:] @ r[:-1])) / 4
    assert long_run_variance(r, 1) == pytest.approx(brute)


def test_pvalue_bounds_flagged():
    a = adf_test(canonical("white", 1000))
    assert a.p_value == 0.01 and a.p_is_bound and a.rejected
    a = adf_test(canonical("trend", 1000))
    assert a.p_value == 0.10 and a.p_is_bound and not a.rejected
    k = kpss_test(canonical("trend", 1000))
    assert k.p_value == 0.01 and k.p_is_bound and k.rejected
    k = kpss_test(canonical("white", 1000))
    assert k.p_value == 0.10 and k.p_is_bound and not k.rejected


def test_defaults():
    assert default_adf_maxlag(100) == 12 and default_kpss_lags(100) == 4
    assert default_adf_maxlag(1000) == 21 and default_kpss_lags(1000) == 7


@pytest.mark.parametrize(
    "kind, expected",
    [("white", Stationarity.STATIONARY), ("walk", Stationarity.UNIT_ROOT), ("trend", Stationarity.TREND_STATIONARY)],
)
def test_classifier_on_canonical(kind, expected):
    assert stationarity_report(canonical(kind, 1000)).classification is expected


def test_classifier_cases():
    def r(rej, alpha=0.05):
        from bvpgaf.stationarity import Decision, HypothesisTestResult
        return HypothesisTestResult(0.0, 0.01 if rej else 0.5, Decision.REJECT if rej else Decision.FAIL_TO_REJECT, alpha)

    assert classify_stationarity(r(True), r(False)).classification is Stationarity.STATIONARY
    assert classify_stationarity(r(True), r(True)).classification is Stationarity.DIFFERENCE_STATIONARY
    assert classify_stationarity(r(False), r(True)).classification is Stationarity.UNIT_ROOT
    assert classify_stationarity(r(False), r(True), r(False)).classification is Stationarity.TREND_STATIONARY
    assert classify_stationarity(r(False), r(False)).classification is Stationarity.UNIT_ROOT
    with pytest.raises(ParameterError):
        classify_stationarity(r(True), r(False, alpha=0.01))


def test_input_validation():
    with pytest.raises(ParameterError):
        adf_test(np.arange(10.0))
    with pytest.raises(ParameterError):
        kpss_test(np.r_[np.zeros(30), np.nan])
    with pytest.raises(DegenerateInputError):
        kpss_test(np.full(50, 3.0))
    with pytest.raises(DegenerateInputError):
        adf_test(np.full(50, 3.0))
