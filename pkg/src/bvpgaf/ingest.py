"""Loading of wrist-band BVP exports, session manifests and synthetic sessions.

The E4-style BVP export is a single-column CSV::

    1600000000.0      <- UTC start time (seconds)
    64.0              <- sample rate (Hz)
    -12.41            <- first sample
    ...

Synthetic sessions stand in for participant recordings that are not
available. Each condition gets its own cardiac frequency so that a
classifier has something real to learn.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Iterable, Mapping

import numpy as np

from .errors import (
    EmptySeriesError,
    FormatError,
    ManifestError,
    ParameterError,
    TruncationError,
)


class Condition(str, Enum):
    """Robot modality condition; declaration order is the iteration order."""

    A = "A"
    B = "B"
    C = "C"
    D = "D"

    @property
    def index(self) -> int:
        return _CONDITION_INDEX[self]

    @classmethod
    def parse(cls, text: str) -> "Condition":
        try:
            return cls(text.strip().upper())
        except ValueError:
            raise ManifestError(f"unknown condition {text!r}; expected one of A, B, C, D") from None

    @classmethod
    def from_index(cls, i: int) -> "Condition":
        return CONDITIONS[i]

    def __lt__(self, other):
        if not isinstance(other, Condition):
            return NotImplemented
        return self.index < other.index


CONDITIONS: tuple[Condition, ...] = tuple(Condition)
_CONDITION_INDEX = {c: i for i, c in enumerate(CONDITIONS)}


def parse_experience(value) -> int:
    """Validate a prior-robot-experience level (0 = none ... 3 = intermediate)."""
    try:
        level = int(str(value).strip())
    except ValueError:
        raise ManifestError(f"experience {value!r} is not an integer") from None
    if not 0 <= level <= 3:
        raise ManifestError(f"experience {level} outside 0-3")
    return level


@dataclass(frozen=True, eq=False)
class TimeSeries:
    """Uniformly sampled scalar BVP signal."""

    samples: np.ndarray
    sample_rate_hz: float
    start_time: float = 0.0
    condition: Condition | None = None
    participant: str | None = None

    def __post_init__(self):
        samples = np.array(self.samples, dtype=np.float64).ravel()
        if samples.size == 0:
            raise EmptySeriesError("time series has no samples")
        if not np.all(np.isfinite(samples)):
            raise ParameterError("time series contains NaN or Inf samples")
        if not (self.sample_rate_hz > 0 and math.isfinite(self.sample_rate_hz)):
            raise ParameterError(f"sample rate must be positive, got {self.sample_rate_hz}")
        samples.setflags(write=False)
        object.__setattr__(self, "samples", samples)
        object.__setattr__(self, "sample_rate_hz", float(self.sample_rate_hz))
        object.__setattr__(self, "start_time", float(self.start_time))

    def __len__(self):
        return self.samples.size

    @property
    def duration_s(self) -> float:
        return self.samples.size / self.sample_rate_hz

    def with_label(self, condition: Condition | None = None, participant: str | None = None) -> "TimeSeries":
        return TimeSeries(
            self.samples,
            self.sample_rate_hz,
            self.start_time,
            condition if condition is not None else self.condition,
            participant if participant is not None else self.participant,
        )


def _parse_float(text: str, line: int, what: str) -> float:
    try:
        value = float(text)
    except ValueError:
        raise FormatError(f"{what} {text!r} is not a number", line=line) from None
    if not math.isfinite(value):
        raise FormatError(f"{what} {text!r} is not finite", line=line)
    return value


def parse_e4_bvp(raw_text: str | Iterable[str], condition: Condition | None = None,
                 participant: str | None = None) -> TimeSeries:
    """Parse an E4-style BVP export.

    ``raw_text`` may be a whole string or an iterable of lines (an open
    file works). LF and CRLF line endings are both accepted. Blank lines
    after the header are ignored. Only the first comma-separated field of a
    line is read, matching the single-channel export.
    """
    lines = raw_text.splitlines() if isinstance(raw_text, str) else (ln.rstrip("\r\n") for ln in raw_text)
    header: list[float] = []
    samples: list[float] = []
    for lineno, line in enumerate(lines, start=1):
        text = line.strip().split(",")[0].strip()
        if len(header) < 2:
            what = "start timestamp" if lineno == 1 else "sample rate"
            header.append(_parse_float(text, lineno, f"header {what}"))
            continue
        if not text:
            continue
        samples.append(_parse_float(text, lineno, "sample"))
    if len(header) < 2:
        raise TruncationError(f"expected 2 header lines, found {len(header)}")
    start, rate = header
    if rate <= 0:
        raise FormatError(f"sample rate must be positive, got {rate}", line=2)
    if not samples:
        raise EmptySeriesError("BVP file contains a header but no samples")
    return TimeSeries(np.asarray(samples), rate, start, condition, participant)


def write_e4_bvp(series: TimeSeries) -> str:
    """Render ``series`` in the E4 layout; samples keep 9 significant digits."""
    out = [repr(series.start_time), repr(series.sample_rate_hz)]
    out.extend(f"{x:.9g}" for x in series.samples)
    return "\n".join(out) + "\n"


def read_e4_bvp(path: str | Path, condition: Condition | None = None,
                participant: str | None = None) -> TimeSeries:
    with open(path, encoding="utf-8", newline="") as fh:
        try:
            return parse_e4_bvp(fh.read(), condition, participant)
        except FormatError as exc:
            raise FormatError(f"{path}: {exc}") from exc


@dataclass(frozen=True)
class ManifestEntry:
    path: str
    participant: str
    condition: Condition
    experience: int


@dataclass(frozen=True)
class SessionManifest:
    entries: tuple[ManifestEntry, ...]

    def __post_init__(self):
        seen = set()
        for e in self.entries:
            if not e.participant:
                raise ManifestError("participant id must be non-empty")
            key = (e.participant, e.condition)
            if key in seen:
                raise ManifestError(f"duplicate entry for participant {e.participant} condition {e.condition.value}")
            seen.add(key)

    def __len__(self):
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries)


MANIFEST_HEADER = ("path", "participant", "condition", "experience")


def load_manifest(raw_text: str) -> SessionManifest:
    """Parse a manifest CSV with header ``path,participant,condition,experience``."""
    reader = csv.reader(io.StringIO(raw_text))
    try:
        header = [h.strip().lower() for h in next(reader)]
    except StopIteration:
        raise ManifestError("manifest is empty") from None
    if tuple(header) != MANIFEST_HEADER:
        raise ManifestError(f"manifest header must be {','.join(MANIFEST_HEADER)}, got {','.join(header)}")
    entries = []
    for rowno, row in enumerate(reader, start=2):
        if not row or all(not cell.strip() for cell in row):
            continue
        if len(row) != 4:
            raise ManifestError(f"row {rowno}: expected 4 fields, got {len(row)}")
        path, participant, cond, exp = (cell.strip() for cell in row)
        try:
            entries.append(ManifestEntry(path, participant, Condition.parse(cond), parse_experience(exp)))
        except ManifestError as exc:
            raise ManifestError(f"row {rowno}: {exc}") from None
    return SessionManifest(tuple(entries))


def load_sessions(manifest_path: str | Path) -> tuple[SessionManifest, list[TimeSeries]]:
    """Read a manifest file and every BVP file it references.

    Relative paths resolve against the manifest's directory.
    """
    manifest_path = Path(manifest_path)
    manifest = load_manifest(manifest_path.read_text(encoding="utf-8"))
    series = []
    for entry in manifest:
        p = Path(entry.path)
        if not p.is_absolute():
            p = manifest_path.parent / p
        series.append(read_e4_bvp(p, entry.condition, entry.participant))
    return manifest, series


@dataclass(frozen=True)
class ConditionParams:
    """Waveform parameters for one condition's synthetic sessions.

    ``baseline_wander`` is the per-sample step std of a random-walk
    baseline added on top of the pulse waveform (0 disables it).
    """

    cardiac_hz: float
    amplitude: float = 1.0
    harmonic_ratio: float = 0.3
    resp_depth: float = 0.2
    noise_std: float = 0.15
    baseline_wander: float = 0.0

    def __post_init__(self):
        if not 0.5 <= self.cardiac_hz <= 3.0:
            raise ParameterError(f"cardiac frequency {self.cardiac_hz} Hz outside [0.5, 3.0]")
        if self.noise_std < 0 or self.baseline_wander < 0:
            raise ParameterError("noise and wander standard deviations must be >= 0")


DEFAULT_CARDIAC_HZ = {Condition.A: 1.0, Condition.B: 1.2, Condition.C: 1.4, Condition.D: 1.6}


BVP_LIKE_WANDER = 0.1


def default_condition_params(baseline_wander: float = 0.0) -> dict[Condition, ConditionParams]:
    return {c: ConditionParams(f, baseline_wander=baseline_wander) for c, f in DEFAULT_CARDIAC_HZ.items()}


@dataclass(frozen=True)
class SyntheticConfig:
    seed: int = 0
    duration_s: float = 120.0
    sample_rate_hz: float = 64.0
    conditions: Mapping[Condition, ConditionParams] = field(default_factory=default_condition_params)

    def __post_init__(self):
        if self.seed < 0:
            raise ParameterError("seed must be non-negative")
        if not self.duration_s > 0 or not self.sample_rate_hz > 0:
            raise ParameterError("duration and sample rate must be positive")
        missing = [c.value for c in CONDITIONS if c not in self.conditions]
        if missing:
            raise ParameterError(f"synthetic config lacks parameters for conditions {missing}")


def bvp_like_config(seed: int = 0, duration_s: float = 120.0, sample_rate_hz: float = 64.0,
                    baseline_wander: float = BVP_LIKE_WANDER) -> SyntheticConfig:
    """Default waveforms plus a random-walk baseline.

    Wrist PPG drifts with posture and perfusion; the drift makes the series
    behave like an integrated process under ADF/KPSS, which the pure
    pulse waveform does not.
    """
    return SyntheticConfig(seed, duration_s, sample_rate_hz, default_condition_params(baseline_wander))


RESP_HZ = 0.25


def generate_synthetic_session(cfg: SyntheticConfig, condition: Condition, session: int = 0,
                               participant: str | None = None) -> TimeSeries:
    """Generate one labelled synthetic BVP session.

    The waveform is a cardiac fundamental plus a respiration-modulated
    second harmonic, Gaussian noise and an optional random-walk baseline.
    The random stream is keyed on ``(seed, condition, session)`` so each
    session is reproducible on its own.
    """
    p = cfg.conditions[condition]
    n = int(math.floor(cfg.duration_s * cfg.sample_rate_hz))
    if n < 1:
        raise ParameterError("duration x sample rate yields no samples")
    t = np.arange(n) / cfg.sample_rate_hz
    f, a = p.cardiac_hz, p.amplitude
    y = a * np.sin(2 * np.pi * f * t)
    y += a * p.harmonic_ratio * np.sin(4 * np.pi * f * t) * (1 + p.resp_depth * np.sin(2 * np.pi * RESP_HZ * t))
    rng = np.random.default_rng([cfg.seed, condition.index, session])
    noise = rng.standard_normal(n)
    wander = rng.standard_normal(n)
    if p.noise_std > 0:
        y += p.noise_std * noise
    if p.baseline_wander > 0:
        y += p.baseline_wander * np.cumsum(wander)
    pid = participant if participant is not None else f"SYN{session:02d}"
    return TimeSeries(y, cfg.sample_rate_hz, 0.0, condition, pid)


def generate_synthetic_corpus(cfg: SyntheticConfig, sessions_per_condition: int = 1) -> list[TimeSeries]:
    """One session per (participant, condition), conditions in A-D order."""
    return [
        generate_synthetic_session(cfg, c, s)
        for s in range(sessions_per_condition)
        for c in CONDITIONS
    ]
