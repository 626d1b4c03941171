"""Augmented Dickey-Fuller and KPSS tests and their joint reading.

P-values are interpolated linearly in the statistic between tabulated
critical values. Outside the table the nearest tabulated level is
returned with ``p_is_bound`` set: an ADF p-value of 0.10 flagged as a
bound means "0.10 or larger", not a probability of exactly 0.10.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import DegenerateInputError, ParameterError
from .ingest import TimeSeries

MIN_LENGTH = 20

# MacKinnon (2010), "Critical Values for Cointegration Tests", Queen's
# Economics Dept. Working Paper 1227, Table 2, N = 1 (tau statistic).
# Each row: level, then beta_inf, beta_1, beta_2, beta_3 of the response
# surface  cv(T) = b_inf + b_1/T + b_2/T^2 + b_3/T^3.
ADF_CRITICAL_SURFACE = {
    "c": (
        (0.01, -3.43035, -6.5393, -16.786, -79.433),
        (0.05, -2.86154, -2.8903, -4.234, -40.040),
        (0.10, -2.56677, -1.5384, -2.809, 0.0),
    ),
    "ct": (
        (0.01, -3.95877, -9.0531, -28.428, -134.155),
        (0.05, -3.41049, -4.3904, -9.036, -45.374),
        (0.10, -3.12705, -2.5856, -3.925, -22.380),
    ),
}

# Kwiatkowski, Phillips, Schmidt & Shin (1992), J. Econometrics 54,
# Table 1: upper-tail asymptotic critical values of eta_mu and eta_tau.
KPSS_CRITICAL_VALUES = {
    "c": ((0.10, 0.347), (0.05, 0.463), (0.025, 0.574), (0.01, 0.739)),
    "ct": ((0.10, 0.119), (0.05, 0.146), (0.025, 0.176), (0.01, 0.216)),
}


class Decision(str, Enum):
    REJECT = "reject"
    FAIL_TO_REJECT = "fail_to_reject"


class AdfRegression(str, Enum):
    CONSTANT = "c"
    CONSTANT_TREND = "ct"


class KpssRegression(str, Enum):
    LEVEL = "c"
    TREND = "ct"


class Stationarity(str, Enum):
    STATIONARY = "stationary"
    UNIT_ROOT = "unit_root"
    TREND_STATIONARY = "trend_stationary"
    DIFFERENCE_STATIONARY = "difference_stationary"


@dataclass(frozen=True)
class HypothesisTestResult:
    statistic: float
    p_value: float
    decision: Decision
    alpha: float = 0.05
    p_is_bound: bool = False
    df: tuple[float, ...] = ()
    lags: int | None = None
    nobs: int | None = None
    regression: str | None = None
    degenerate: bool = False

    @property
    def rejected(self) -> bool:
        return self.decision is Decision.REJECT


def _decide(p: float, alpha: float) -> Decision:
    return Decision.REJECT if p < alpha else Decision.FAIL_TO_REJECT


def _values(series) -> np.ndarray:
    y = series.samples if isinstance(series, TimeSeries) else np.asarray(series, dtype=np.float64).ravel()
    if y.size < MIN_LENGTH:
        raise ParameterError(f"series needs at least {MIN_LENGTH} samples, got {y.size}")
    if not np.all(np.isfinite(y)):
        raise ParameterError("series contains non-finite values")
    return y


def _deterministic(n: int, regression: str, start: int = 1) -> np.ndarray:
    cols = [np.ones(n)]
    if regression == "ct":
        cols.append(np.arange(start, start + n, dtype=np.float64))
    return np.column_stack(cols)


def _ols(y: np.ndarray, X: np.ndarray) -> tuple[np.ndarray, np.ndarray, float]:
    """Least squares fit returning ``(beta, (X'X)^-1, ssr)``."""
    q, r = np.linalg.qr(X)
    diag = np.abs(np.diag(r))
    if diag.size == 0 or diag.min() <= 1e-10 * max(diag.max(), 1.0):
        raise DegenerateInputError("regression matrix is singular (constant or collinear series?)")
    beta = np.linalg.solve(r, q.T @ y)
    resid = y - X @ beta
    rinv = np.linalg.solve(r, np.eye(r.shape[0]))
    return beta, rinv @ rinv.T, float(resid @ resid)


def adf_critical_values(regression: str, nobs: int) -> list[tuple[float, float]]:
    """Finite-sample critical values ``[(level, cv), ...]`` for ``nobs``."""
    rows = ADF_CRITICAL_SURFACE[AdfRegression(regression).value]
    return [(lvl, b0 + b1 / nobs + b2 / nobs**2 + b3 / nobs**3) for lvl, b0, b1, b2, b3 in rows]


def _interp_pvalue(stat: float, table: list[tuple[float, float]], lower_tail: bool) -> tuple[float, bool]:
    """Linear interpolation of a p-value between tabulated critical values.

    ``table`` holds (level, critical value) pairs in any order.
    """
    table = sorted(table, reverse=True)
    levels = np.array([lvl for lvl, _ in table])
    cvs = np.array([cv for _, cv in table])
    if lower_tail:
        stat, cvs = -stat, -cvs
    # now larger statistic => smaller p, cvs increasing
    if stat <= cvs[0]:
        return float(levels[0]), stat < cvs[0]
    if stat >= cvs[-1]:
        return float(levels[-1]), stat > cvs[-1]
    return float(np.interp(stat, cvs, levels)), False


def _adf_design(y: np.ndarray, lags: int, regression: str, nobs: int):
    """Regressors for the ADF equation over the last ``nobs`` differences."""
    dy = np.diff(y)
    n = dy.size
    target = dy[n - nobs:]
    level = y[n - nobs:n]  # y_{t-1}
    cols = [level]
    for i in range(1, lags + 1):
        cols.append(dy[n - nobs - i:n - i])
    X = np.column_stack([_deterministic(nobs, regression, start=n - nobs + 1), *[c[:, None] for c in cols]])
    return target, X


def default_adf_maxlag(n: int) -> int:
    return int(math.floor(12.0 * (n / 100.0) ** 0.25))


def default_kpss_lags(n: int) -> int:
    return int(math.floor(4.0 * (n / 100.0) ** 0.25))


def adf_test(series, regression: AdfRegression | str = AdfRegression.CONSTANT, max_lag: int | None = None,
             alpha: float = 0.05, autolag: bool = True) -> HypothesisTestResult:
    """Augmented Dickey-Fuller test; the null hypothesis is a unit root.

    The lag order is chosen by AIC over ``0..max_lag`` with every
    candidate fitted on the same sample, then the chosen model is refitted
    on all observations it can use. With ``autolag=False`` exactly
    ``max_lag`` lags are used.
    """
    y = _values(series)
    reg = AdfRegression(regression).value
    ndet = 1 if reg == "c" else 2
    n = y.size
    if max_lag is None:
        max_lag = default_adf_maxlag(n)
    max_lag = min(int(max_lag), n // 2 - ndet - 1)
    if max_lag < 0:
        raise ParameterError(f"series of length {n} too short for the ADF regression")
    if autolag:
        nobs = n - 1 - max_lag
        best_aic, best = math.inf, 0
        for k in range(max_lag + 1):
            target, X = _adf_design(y, k, reg, nobs)
            _, _, ssr = _ols(target, X)
            if ssr <= 0:
                raise DegenerateInputError("ADF regression fits perfectly; series is deterministic")
            aic = nobs * math.log(ssr / nobs) + 2 * X.shape[1]
            if aic < best_aic:
                best_aic, best = aic, k
        lags = best
    else:
        lags = max_lag
    nobs = n - 1 - lags
    target, X = _adf_design(y, lags, reg, nobs)
    beta, xtx_inv, ssr = _ols(target, X)
    dof = nobs - X.shape[1]
    if ssr <= 0 or dof <= 0:
        raise DegenerateInputError("ADF regression has no residual variance")
    sigma2 = ssr / dof
    stat = float(beta[ndet] / math.sqrt(sigma2 * xtx_inv[ndet, ndet]))
    p, bound = _interp_pvalue(stat, adf_critical_values(reg, nobs), lower_tail=True)
    return HypothesisTestResult(stat, p, _decide(p, alpha), alpha, bound, lags=lags, nobs=nobs, regression=reg)


def long_run_variance(resid: np.ndarray, lags: int) -> float:
    """Newey-West estimate with Bartlett weights ``1 - i/(lags+1)``."""
    n = resid.size
    s = float(resid @ resid)
    for i in range(1, lags + 1):
        s += 2.0 * (1.0 - i / (lags + 1.0)) * float(resid[i:] @ resid[:-i])
    return s / n


def kpss_test(series, regression: KpssRegression | str = KpssRegression.LEVEL, lags: int | None = None,
              alpha: float = 0.05) -> HypothesisTestResult:
    """KPSS test; the null hypothesis is level (or trend) stationarity."""
    y = _values(series)
    reg = KpssRegression(regression).value
    n = y.size
    if lags is None:
        lags = default_kpss_lags(n)
    if not 0 <= lags < n:
        raise ParameterError(f"KPSS lag {lags} invalid for {n} observations")
    X = _deterministic(n, reg)
    beta, _, _ = _ols(y, X)
    resid = y - X @ beta
    lrv = long_run_variance(resid, lags)
    # residuals at rounding level mean there is nothing left to test
    if lrv <= (1e-10 * max(1.0, float(np.max(np.abs(y))))) ** 2:
        raise DegenerateInputError("series has no variation around its deterministic component")
    partial = np.cumsum(resid)
    stat = float(partial @ partial) / (n * n) / lrv
    table = list(KPSS_CRITICAL_VALUES[reg])
    p, bound = _interp_pvalue(stat, table, lower_tail=False)
    return HypothesisTestResult(stat, p, _decide(p, alpha), alpha, bound, lags=lags, nobs=n, regression=reg)


@dataclass(frozen=True)
class StationarityReport:
    adf: HypothesisTestResult
    kpss: HypothesisTestResult
    classification: Stationarity
    kpss_trend: HypothesisTestResult | None = None


def classify_stationarity(adf: HypothesisTestResult, kpss: HypothesisTestResult,
                          kpss_trend: HypothesisTestResult | None = None) -> StationarityReport:
    """Combine an ADF and a KPSS result into one of four readings.

    ``kpss_trend`` (a KPSS test with trend regression) is consulted only
    when ADF fails to reject and level KPSS rejects; without it that case
    is read as a unit root.
    """
    if not math.isclose(adf.alpha, kpss.alpha) or (kpss_trend is not None and not math.isclose(adf.alpha, kpss_trend.alpha)):
        raise ParameterError("ADF and KPSS results use different significance levels")
    if adf.rejected and not kpss.rejected:
        label = Stationarity.STATIONARY
    elif adf.rejected and kpss.rejected:
        label = Stationarity.DIFFERENCE_STATIONARY
    elif kpss.rejected:
        if kpss_trend is not None and not kpss_trend.rejected:
            label = Stationarity.TREND_STATIONARY
        else:
            label = Stationarity.UNIT_ROOT
    else:
        label = Stationarity.UNIT_ROOT
    return StationarityReport(adf, kpss, label, kpss_trend)


def stationarity_report(series, alpha: float = 0.05, adf_regression="c", adf_max_lag=None,
                        kpss_lags=None) -> StationarityReport:
    """Run ADF, level KPSS and trend KPSS on ``series`` and classify."""
    a = adf_test(series, adf_regression, adf_max_lag, alpha)
    k = kpss_test(series, KpssRegression.LEVEL, kpss_lags, alpha)
    kt = kpss_test(series, KpssRegression.TREND, kpss_lags, alpha)
    return classify_stationarity(a, k, kt)
