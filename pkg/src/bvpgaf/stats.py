"""Questionnaire inference: variance tests, one-way ANOVA and main effects.

The workflow for one perceived feature is: test equality of group
variances (Brown-Forsythe variant of Levene's test), then run Welch's
ANOVA when that test rejects and the classic F test otherwise. Groups are
either the four robot conditions or, within one condition, the
prior-experience levels 0-3.
"""

from __future__ import annotations

import csv
import io
import math
import warnings
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Hashable, Sequence

import numpy as np
from scipy import special, stats as sps

from .errors import DataError, DegenerateInputError, ParameterError
from .ingest import CONDITIONS, Condition, parse_experience
from .stationarity import Decision, HypothesisTestResult


class Feature(str, Enum):
    """Perceived robot features rated after each condition."""

    PS = "PS"  # perceived safety
    AP = "AP"  # anthropomorphism
    AM = "AM"  # animacy
    LK = "LK"  # likeability
    PI = "PI"  # perceived intelligence

    @classmethod
    def parse(cls, text: str) -> "Feature":
        try:
            return cls(text.strip().upper())
        except ValueError:
            raise DataError(f"unknown perceived feature {text!r}") from None


FEATURES: tuple[Feature, ...] = tuple(Feature)


class AnovaMethod(str, Enum):
    CLASSIC = "classic"
    WELCH = "welch"


@dataclass(frozen=True)
class ScoreRow:
    participant: str
    condition: Condition
    experience: int
    feature: Feature
    score: float


@dataclass(frozen=True)
class ScoreTable:
    rows: tuple[ScoreRow, ...]

    def __post_init__(self):
        for r in self.rows:
            if not math.isfinite(r.score):
                raise DataError(f"non-finite score for participant {r.participant}")

    def __len__(self):
        return len(self.rows)

    def select(self, feature: Feature | None = None, condition: Condition | None = None) -> list[ScoreRow]:
        return [
            r for r in self.rows
            if (feature is None or r.feature is feature) and (condition is None or r.condition is condition)
        ]


SCORE_HEADER = ("participant", "condition", "experience", "feature", "score")


def load_score_table(raw_text: str) -> ScoreTable:
    """Parse a score CSV with header ``participant,condition,experience,feature,score``."""
    lines = [ln for ln in raw_text.splitlines() if not ln.startswith("#")]
    reader = csv.reader(lines)
    try:
        header = tuple(h.strip().lower() for h in next(reader))
    except StopIteration:
        raise DataError("score table is empty") from None
    if header != SCORE_HEADER:
        raise DataError(f"score table header must be {','.join(SCORE_HEADER)}")
    rows = []
    for rowno, row in enumerate(reader, start=2):
        if not row:
            continue
        if len(row) != 5:
            raise DataError(f"row {rowno}: expected 5 fields, got {len(row)}")
        pid, cond, exp, feat, score = (c.strip() for c in row)
        try:
            rows.append(ScoreRow(pid, Condition.parse(cond), parse_experience(exp), Feature.parse(feat), float(score)))
        except ValueError:
            raise DataError(f"row {rowno}: score {score!r} is not a number") from None
        except Exception as exc:
            raise DataError(f"row {rowno}: {exc}") from None
    return ScoreTable(tuple(rows))


def dump_score_table(table: ScoreTable) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(SCORE_HEADER)
    for r in table.rows:
        w.writerow([r.participant, r.condition.value, r.experience, r.feature.value, f"{r.score:.4f}"])
    return buf.getvalue()


def read_score_table(path: str | Path) -> ScoreTable:
    return load_score_table(Path(path).read_text(encoding="utf-8"))


@dataclass(frozen=True)
class GroupStats:
    key: Hashable
    n: int
    mean: float
    variance: float
    std_ci: tuple[float, float]
    degenerate: bool = False


@dataclass(frozen=True)
class VarianceTestResult:
    test: HypothesisTestResult
    groups: tuple[GroupStats, ...]


@dataclass(frozen=True)
class AnovaResult:
    method: AnovaMethod
    f_statistic: float
    df_between: float
    df_within: float
    p_value: float
    group_stats: tuple[GroupStats, ...]
    ordering: tuple[Hashable, ...]
    alpha: float = 0.05
    degenerate: bool = False
    variance_test: VarianceTestResult | None = None
    notes: tuple[str, ...] = ()

    @property
    def decision(self) -> Decision:
        return Decision.REJECT if self.p_value < self.alpha else Decision.FAIL_TO_REJECT

    @property
    def significant(self) -> bool:
        return self.decision is Decision.REJECT


def f_sf(f: float, d1: float, d2: float) -> float:
    """Upper tail of the F distribution via the regularized incomplete beta.

    ``P(F > f) = I_{d2 / (d2 + d1 f)}(d2 / 2, d1 / 2)``.
    """
    if math.isnan(f):
        return math.nan
    if f <= 0:
        return 1.0
    if math.isinf(f):
        return 0.0
    return float(special.betainc(d2 / 2.0, d1 / 2.0, d2 / (d2 + d1 * f)))


def _as_groups(groups: Sequence) -> list[np.ndarray]:
    arrays = [np.asarray(g, dtype=np.float64).ravel() for g in groups]
    if len(arrays) < 2:
        raise ParameterError(f"need at least 2 groups, got {len(arrays)}")
    for i, a in enumerate(arrays):
        if a.size < 2:
            raise ParameterError(f"group {i} has {a.size} observation(s); need at least 2")
        if not np.all(np.isfinite(a)):
            raise ParameterError(f"group {i} contains non-finite values")
    return arrays


def _result(stat, p, alpha, df, degenerate=False) -> HypothesisTestResult:
    decision = Decision.REJECT if p < alpha else Decision.FAIL_TO_REJECT
    return HypothesisTestResult(float(stat), float(p), decision, alpha, False, tuple(df), degenerate=degenerate)


def levene_median(groups: Sequence) -> tuple[float, float, float, float]:
    """Brown-Forsythe statistic ``W`` with its degrees of freedom and p-value.

    Absolute deviations from each group median are compared with a
    one-way ANOVA. When every deviation is zero the spreads are trivially
    equal and ``W = 0, p = 1`` is returned.
    """
    arrays = _as_groups(groups)
    z = [np.abs(a - np.median(a)) for a in arrays]
    k = len(z)
    n = sum(a.size for a in z)
    grand = np.concatenate(z).mean()
    between = sum(a.size * (a.mean() - grand) ** 2 for a in z)
    within = sum(float(((a - a.mean()) ** 2).sum()) for a in z)
    d1, d2 = k - 1, n - k
    if between <= 1e-24 * max(1.0, grand * grand) * n:
        between = 0.0
    if within == 0:
        if between == 0:
            return 0.0, d1, d2, 1.0
        return math.inf, d1, d2, 0.0
    w = (n - k) / (k - 1) * between / within
    return float(w), d1, d2, f_sf(w, d1, d2)


def std_confidence_interval(a: np.ndarray, level_alpha: float) -> tuple[float, float]:
    """Two-sided chi-square interval for the standard deviation at ``1 - level_alpha``."""
    n = a.size
    ss = float(((a - a.mean()) ** 2).sum())
    lo_q = sps.chi2.ppf(1 - level_alpha / 2, n - 1)
    hi_q = sps.chi2.ppf(level_alpha / 2, n - 1)
    return math.sqrt(ss / lo_q), math.sqrt(ss / hi_q)


def _group_stats(arrays, keys, alpha) -> tuple[GroupStats, ...]:
    k = len(arrays)
    out = []
    for key, a in zip(keys, arrays):
        var = float(a.var(ddof=1))
        ci = std_confidence_interval(a, alpha / k)
        out.append(GroupStats(key, a.size, float(a.mean()), var, ci, degenerate=var == 0))
    return tuple(out)


def variance_test(groups: Sequence, alpha: float = 0.05, keys: Sequence | None = None) -> VarianceTestResult:
    """Equal-variance test across groups plus Bonferroni SD intervals.

    The p-value is the Brown-Forsythe (median-centred Levene) test. Each
    group also gets a confidence interval for its standard deviation at
    level ``1 - alpha / k`` so the family holds jointly at ``1 - alpha``.
    A zero-variance group gets a point interval and ``degenerate=True``.
    """
    arrays = _as_groups(groups)
    keys = tuple(keys) if keys is not None else tuple(range(len(arrays)))
    w, d1, d2, p = levene_median(arrays)
    test = _result(w, p, alpha, (d1, d2), degenerate=all(a.var() == 0 for a in arrays))
    return VarianceTestResult(test, _group_stats(arrays, keys, alpha))


def _ordering(group_stats: Sequence[GroupStats]) -> tuple:
    # stable sort: ties keep input (enumeration) order
    return tuple(g.key for g in sorted(group_stats, key=lambda g: -g.mean))


def anova_classic(groups: Sequence, alpha: float = 0.05, keys: Sequence | None = None) -> AnovaResult:
    """Classic one-way ANOVA, ``F = MS_between / MS_within``."""
    arrays = _as_groups(groups)
    keys = tuple(keys) if keys is not None else tuple(range(len(arrays)))
    k = len(arrays)
    n = sum(a.size for a in arrays)
    grand = np.concatenate(arrays).mean()
    ss_between = sum(a.size * (a.mean() - grand) ** 2 for a in arrays)
    ss_within = sum(float(((a - a.mean()) ** 2).sum()) for a in arrays)
    d1, d2 = k - 1, n - k
    degenerate = False
    # relative tolerance: means of identical groups can differ in the last ulp
    if ss_between <= 1e-24 * max(1.0, grand * grand) * n:
        ss_between = 0.0
    if ss_within == 0:
        degenerate = True
        f, p = (0.0, 1.0) if ss_between == 0 else (math.inf, 0.0)
    else:
        f = (ss_between / d1) / (ss_within / d2)
        p = f_sf(f, d1, d2)
    gs = _group_stats(arrays, keys, alpha)
    return AnovaResult(AnovaMethod.CLASSIC, float(f), float(d1), float(d2), float(p), gs, _ordering(gs),
                       alpha, degenerate)


def anova_welch(groups: Sequence, alpha: float = 0.05, keys: Sequence | None = None) -> AnovaResult:
    """Welch's heteroscedastic one-way ANOVA.

    Weights are ``w_i = n_i / s_i^2``; the denominator degrees of freedom
    follow Welch-Satterthwaite and are generally fractional.
    """
    arrays = _as_groups(groups)
    keys = tuple(keys) if keys is not None else tuple(range(len(arrays)))
    k = len(arrays)
    n = np.array([a.size for a in arrays], dtype=np.float64)
    means = np.array([a.mean() for a in arrays])
    var = np.array([a.var(ddof=1) for a in arrays])
    if np.any(var == 0):
        bad = [keys[i] for i in np.flatnonzero(var == 0)]
        raise DegenerateInputError(f"Welch ANOVA undefined: zero variance in group(s) {bad}")
    w = n / var
    wsum = w.sum()
    mw = float((w * means).sum() / wsum)
    a_term = float((w * (means - mw) ** 2).sum()) / (k - 1)
    lam = float((((1 - w / wsum) ** 2) / (n - 1)).sum())
    b_term = 1 + 2 * (k - 2) / (k * k - 1) * lam
    f = a_term / b_term
    if f <= 1e-24 * max(1.0, mw * mw):
        f = 0.0
    d1 = k - 1
    d2 = (k * k - 1) / (3 * lam)
    gs = _group_stats(arrays, keys, alpha)
    return AnovaResult(AnovaMethod.WELCH, float(f), float(d1), float(d2), f_sf(f, d1, d2), gs, _ordering(gs), alpha)


def anova_auto(groups: Sequence, alpha: float = 0.05, keys: Sequence | None = None,
               method: AnovaMethod | str | None = None) -> AnovaResult:
    """Variance test first, then Welch if it rejects, classic otherwise.

    ``method`` forces one ANOVA regardless of the variance test.
    """
    vt = variance_test(groups, alpha, keys)
    if method is None:
        chosen = AnovaMethod.WELCH if vt.test.rejected else AnovaMethod.CLASSIC
    else:
        chosen = AnovaMethod(method)
    run = anova_welch if chosen is AnovaMethod.WELCH else anova_classic
    res = run(groups, alpha, keys)
    return AnovaResult(res.method, res.f_statistic, res.df_between, res.df_within, res.p_value, res.group_stats,
                       res.ordering, alpha, res.degenerate, vt)


def feature_condition_analysis(table: ScoreTable, feature: Feature | str, alpha: float = 0.05,
                               method: AnovaMethod | str | None = None) -> AnovaResult:
    """Do the four robot conditions differ on ``feature``?"""
    feature = Feature(feature)
    rows = table.select(feature)
    groups = []
    for c in CONDITIONS:
        vals = [r.score for r in rows if r.condition is c]
        if not vals:
            raise DataError(f"no {feature.value} scores for condition {c.value}")
        if len(vals) < 2:
            raise DataError(f"condition {c.value} has only {len(vals)} {feature.value} score(s); need 2")
        groups.append(vals)
    return anova_auto(groups, alpha, CONDITIONS, method)


def experience_analysis(table: ScoreTable, feature: Feature | str, condition: Condition | str,
                        alpha: float = 0.05, method: AnovaMethod | str | None = None) -> AnovaResult:
    """Does prior robot experience change ``feature`` within ``condition``?

    Levels with a single participant cannot carry a variance and are
    dropped with a note; at least two levels with two or more
    observations must remain.
    """
    feature = Feature(feature)
    condition = Condition(condition) if not isinstance(condition, Condition) else condition
    rows = table.select(feature, condition)
    by_level: dict[int, list[float]] = {}
    for r in rows:
        by_level.setdefault(r.experience, []).append(r.score)
    notes = []
    keys, groups = [], []
    for level in sorted(by_level):
        vals = by_level[level]
        if len(vals) < 2:
            notes.append(f"experience level {level} has 1 observation; excluded")
            continue
        keys.append(level)
        groups.append(vals)
    if len(groups) < 2:
        raise DataError(
            f"{feature.value} under condition {condition.value}: need 2 experience levels with >= 2 "
            f"observations, found {len(groups)}"
        )
    for n in notes:
        warnings.warn(n, stacklevel=2)
    res = anova_auto(groups, alpha, keys, method)
    return AnovaResult(res.method, res.f_statistic, res.df_between, res.df_within, res.p_value, res.group_stats,
                       res.ordering, alpha, res.degenerate, res.variance_test, tuple(notes))


def format_ordering(result: AnovaResult) -> str:
    """Main-effects ordering such as ``B>A>C>D``."""
    return ">".join(k.value if isinstance(k, Enum) else str(k) for k in result.ordering)


# Target main-effect structure of the demo table. Each condition entry is
# (mean, sd) on a 1-5 rating scale.
_DEMO_PATTERN = {
    Feature.PS: {Condition.A: (3.9, 0.35), Condition.B: (4.4, 0.25), Condition.C: (3.3, 0.7), Condition.D: (2.6, 0.9)},
    Feature.AP: {Condition.A: (3.4, 0.5), Condition.B: (3.0, 0.5), Condition.C: (2.3, 0.5), Condition.D: (2.6, 0.5)},
    Feature.LK: {Condition.A: (4.3, 0.3), Condition.B: (3.3, 0.75), Condition.C: (3.7, 0.45), Condition.D: (2.8, 0.9)},
    Feature.AM: {Condition.A: (3.6, 0.3), Condition.B: (3.1, 0.5), Condition.C: (2.6, 0.75), Condition.D: (2.2, 0.95)},
    Feature.PI: {Condition.A: (3.5, 0.55), Condition.B: (3.5, 0.55), Condition.C: (3.5, 0.55), Condition.D: (3.5, 0.55)},
}

# Experience-level shifts layered on top: (feature, condition) -> shift per level.
_DEMO_EXPERIENCE = {
    (Feature.AP, Condition.A): {0: -0.3, 1: -0.2, 2: 0.6, 3: -0.1},
    (Feature.LK, Condition.A): {0: -0.25, 1: -0.15, 2: 0.0, 3: 0.5},
    (Feature.LK, Condition.C): {0: -0.3, 1: -0.2, 2: 0.0, 3: 0.6},
    (Feature.LK, Condition.D): {0: -0.6, 1: -0.4, 2: 0.0, 3: 1.0},
}

DEMO_EXPERIENCE_LEVELS = (0,) * 8 + (1,) * 9 + (2,) * 8 + (3,) * 5


def demo_score_table(seed: int = 2003, participants: int = 30) -> ScoreTable:
    """Synthetic ratings engineered to show the published main-effect pattern.

    Means follow PS: B>A>C>D, AP: A>B>D>C, LK: A>C>B>D, AM: A>B>C>D with
    unequal spreads for PS, LK and AM, and no condition effect on PI.
    Experience shifts make AP under A peak at level 2 and LK under A, C and
    D peak at level 3. Draws are standardised within each group so the
    group means and SDs hit their targets exactly.
    """
    rng = np.random.default_rng(seed)
    levels = [DEMO_EXPERIENCE_LEVELS[i % len(DEMO_EXPERIENCE_LEVELS)] for i in range(participants)]
    pids = [f"P{i + 1:02d}" for i in range(participants)]
    rows = []
    for feature in FEATURES:
        for cond in CONDITIONS:
            mean, sd = _DEMO_PATTERN[feature][cond]
            z = rng.standard_normal(participants)
            z = (z - z.mean()) / z.std(ddof=1)
            shift = _DEMO_EXPERIENCE.get((feature, cond))
            noise_sd = sd
            if shift is not None:
                offs = np.array([shift[lv] for lv in levels])
                offs -= offs.mean()
                noise_sd = math.sqrt(max(sd * sd - offs.var(ddof=1), (0.3 * sd) ** 2))
                scores = mean + offs + noise_sd * z
            else:
                scores = mean + sd * z
            for pid, lv, s in zip(pids, levels, scores):
                rows.append(ScoreRow(pid, cond, lv, feature, round(float(s), 4)))
    return ScoreTable(tuple(rows))
