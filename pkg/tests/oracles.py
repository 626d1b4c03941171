"""Independent reference values and brute-force formulas used as test oracles."""

import numpy as np


def canonical(kind, n, seed=7):
    rng = np.random.default_rng([seed, n])
    e = rng.standard_normal(n)
    if kind == "white":
        return e
    if kind == "walk":
        return np.cumsum(e)
    return 0.05 * np.arange(n) + e


# Frozen from statsmodels 0.14 (adfuller with autolag="AIC" and
# maxlag=floor(12 (n/100)^0.25); kpss with nlags=floor(4 (n/100)^0.25)).
# Columns: ADF statistic, ADF lag, level KPSS statistic, trend KPSS statistic.
REFERENCE = {
    ("white", 200): (-12.91483301188699, 0, 0.12319323616007613, 0.03597225315948978),
    ("white", 1000): (-29.872967858587575, 0, 0.042131057674984616, 0.042232404232388464),
    ("walk", 200): (-2.0526198398971585, 0, 0.6481778378110706, 0.6493055393726416),
    ("walk", 1000): (-1.5942326286680535, 1, 7.6347193771180955, 0.7465803125613009),
    ("trend", 200): (-0.3551915590885641, 14, 4.006471491976548, 0.03597225315948981),
    ("trend", 1000): (-0.15712558131259755, 14, 12.585746718041449, 0.042232404232387555),
}


FIXTURE = [
    [4.1, 5.0, 3.8, 4.6, 5.2, 4.4],
    [3.2, 2.9, 4.8, 3.5, 2.1, 3.9, 4.0],
    [5.9, 6.3, 5.1, 6.8, 5.5],
    [2.5, 4.9, 1.2, 3.3, 6.1, 2.0, 4.4, 3.0],
]


def _mean(v):
    return sum(v) / len(v)


def _var(v):
    m = _mean(v)
    return sum((x - m) ** 2 for x in v) / (len(v) - 1)


def brute_levene(groups):
    z = []
    for g in groups:
        s = sorted(g)
        n = len(s)
        med = s[n // 2] if n % 2 else (s[n // 2 - 1] + s[n // 2]) / 2
        z.append([abs(x - med) for x in g])
    return brute_classic(z)[0]


def brute_classic(groups):
    k = len(groups)
    n = sum(len(g) for g in groups)
    grand = sum(sum(g) for g in groups) / n
    ssb = sum(len(g) * (_mean(g) - grand) ** 2 for g in groups)
    ssw = sum(sum((x - _mean(g)) ** 2 for x in g) for g in groups)
    return (ssb / (k - 1)) / (ssw / (n - k)), k - 1, n - k


def brute_welch(groups):
    k = len(groups)
    w = [len(g) / _var(g) for g in groups]
    sw = sum(w)
    mw = sum(wi * _mean(g) for wi, g in zip(w, groups)) / sw
    num = sum(wi * (_mean(g) - mw) ** 2 for wi, g in zip(w, groups)) / (k - 1)
    lam = sum((1 - wi / sw) ** 2 / (len(g) - 1) for wi, g in zip(w, groups))
    den = 1 + 2 * (k - 2) / (k * k - 1) * lam
    return num / den, k - 1, (k * k - 1) / (3 * lam)
