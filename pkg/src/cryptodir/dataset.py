"""Supervised dataset construction: augmented frame, scaling, labels, windows, split."""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from . import indicators as ind
from .errors import (
    DirtySeries,
    EmptyStats,
    SeriesTooShort,
    TooFewSamples,
    WindowTooLarge,
)
from .market_data import CandleSeries, format_decimal, validate_series

COLUMNS = (
    "open",
    "high",
    "low",
    "close",
    "volume",
    "cci14",
    "cci30",
    "rsi14",
    "rsi30",
    "di_plus14",
    "di_minus14",
    "dx14",
    "macd",
    "ema12",
    "ema26",
    "boll_mid",
    "boll_upper",
    "boll_lower",
    "typical_price",
)
N_COLUMNS = len(COLUMNS)
WINDOW = 60
DEFAULT_THRESHOLD = 0.0015
DEFAULT_RATIO = 0.95
# returns this close to the threshold count as equal to it; 100 -> 100.15
# gives 0.0015000000000000568 in binary floating point
RETURN_EPS = 1e-12


def _indicator_columns(series: CandleSeries) -> dict[str, np.ndarray]:
    close = series.close
    dm = ind.dmi(series, 14)
    boll = ind.bollinger(series, 20, 2.0)
    return {
        "open": series.open,
        "high": series.high,
        "low": series.low,
        "close": close,
        "volume": series.volume,
        "cci14": ind.cci(series, 14).values,
        "cci30": ind.cci(series, 30).values,
        "rsi14": ind.rsi(close, 14).values,
        "rsi30": ind.rsi(close, 30).values,
        "di_plus14": dm.di_plus.values,
        "di_minus14": dm.di_minus.values,
        "dx14": dm.dx.values,
        "macd": ind.macd(close).values,
        "ema12": ind.ema(close, 12).values,
        "ema26": ind.ema(close, 26).values,
        "boll_mid": boll.mid.values,
        "boll_upper": boll.upper.values,
        "boll_lower": boll.lower.values,
        "typical_price": ind.typical_price(series),
    }


# first defined bar of each column; rsi30 is the longest at 30
WARMUP = {
    "cci14": 13, "cci30": 29, "rsi14": 14, "rsi30": 30,
    "di_plus14": 14, "di_minus14": 14, "dx14": 14,
    "macd": 25, "ema12": 11, "ema26": 25,
    "boll_mid": 19, "boll_upper": 19, "boll_lower": 19,
}
MAX_WARMUP = max(WARMUP.values())


@dataclass(frozen=True)
class FeatureFrame:
    timestamps: np.ndarray
    values: np.ndarray
    columns: tuple[str, ...] = COLUMNS

    def __post_init__(self):
        if self.values.ndim != 2 or self.values.shape[1] != len(self.columns):
            raise ValueError(f"values must be (rows, {len(self.columns)}), got {self.values.shape}")
        if len(self.timestamps) != len(self.values):
            raise ValueError("timestamps and values disagree on row count")

    def __len__(self):
        return len(self.timestamps)

    def column(self, name: str) -> np.ndarray:
        return self.values[:, self.columns.index(name)]

    def rows(self, mask_or_slice) -> FeatureFrame:
        return FeatureFrame(self.timestamps[mask_or_slice], self.values[mask_or_slice], self.columns)


def augment_frame(series: CandleSeries) -> FeatureFrame:
    """OHLCV plus 14 indicator columns, warm-up rows dropped."""
    report = validate_series(series)
    if not report.is_clean:
        raise DirtySeries(f"series is not clean: {report.summary()}")
    if len(series) <= MAX_WARMUP:
        raise SeriesTooShort(f"need more than {MAX_WARMUP} bars, got {len(series)}")
    cols = _indicator_columns(series)
    values = np.column_stack([cols[name] for name in COLUMNS])[MAX_WARMUP:]
    assert not np.isnan(values).any()
    return FeatureFrame(series.timestamps[MAX_WARMUP:].copy(), values)


@dataclass(frozen=True)
class ScalingStats:
    """Per-column divisors (max - min over the fitting rows); 0 marks a flat column."""

    columns: tuple[str, ...]
    divisors: tuple[float, ...]

    @classmethod
    def fit(cls, frame: FeatureFrame) -> ScalingStats:
        if len(frame) == 0:
            raise EmptyStats("cannot compute scaling statistics from zero rows")
        span = frame.values.max(axis=0) - frame.values.min(axis=0)
        return cls(frame.columns, tuple(float(s) for s in span))

    def apply(self, frame: FeatureFrame) -> FeatureFrame:
        if tuple(frame.columns) != tuple(self.columns):
            raise ValueError("frame columns do not match the scaling statistics")
        div = np.asarray(self.divisors)
        flat = div == 0
        scaled = frame.values / np.where(flat, 1.0, div)
        scaled[:, flat] = 0.0
        return FeatureFrame(frame.timestamps, scaled, frame.columns)

    def to_json(self) -> str:
        return json.dumps(dict(zip(self.columns, self.divisors)), indent=2) + "\n"

    @classmethod
    def from_json(cls, text: str) -> ScalingStats:
        obj = json.loads(text)
        return cls(tuple(obj), tuple(float(v) for v in obj.values()))


def scale_frame(frame: FeatureFrame, stats_source: FeatureFrame) -> tuple[FeatureFrame, ScalingStats]:
    """Divide each column by its range over ``stats_source``."""
    stats = ScalingStats.fit(stats_source)
    return stats.apply(frame), stats


@dataclass(frozen=True)
class LabelSpec:
    threshold: float = DEFAULT_THRESHOLD
    horizon_bars: int = 1

    def __post_init__(self):
        # zero is allowed: it gives plain up/down labels
        if not self.threshold >= 0:
            raise ValueError("threshold must be >= 0")
        if self.horizon_bars < 1:
            raise ValueError("horizon_bars must be >= 1")


def make_labels(series: CandleSeries, spec: LabelSpec = LabelSpec()) -> np.ndarray:
    """Per-bar label: 1 if the close ``horizon_bars`` ahead beats the threshold.

    The last ``horizon_bars`` bars have no label and hold -1.
    """
    h = spec.horizon_bars
    close = series.close
    if len(close) < h + 1:
        raise SeriesTooShort(f"need at least {h + 1} bars to label, got {len(close)}")
    labels = np.full(len(close), -1, dtype=np.int64)
    ret = close[h:] / close[:-h] - 1.0
    labels[:-h] = (ret > spec.threshold + RETURN_EPS).astype(np.int64)
    return labels


@dataclass(frozen=True)
class Sample:
    features: np.ndarray
    label: int
    anchor_ts: int


def window_samples(
    frame: FeatureFrame,
    labels,
    window: int = WINDOW,
    label_timestamps=None,
    strict: bool = False,
) -> list[Sample]:
    """One sample per labeled frame row with ``window - 1`` rows of history.

    ``labels`` is either aligned with the frame rows or, when
    ``label_timestamps`` is given, keyed by bar timestamp. Negative labels
    mark unlabeled rows. A frame shorter than the window yields no samples,
    or raises WindowTooLarge when ``strict`` is set.
    """
    if window < 1:
        raise ValueError("window must be >= 1")
    if strict and window > len(frame):
        raise WindowTooLarge(f"window {window} exceeds frame length {len(frame)}")
    labels = np.asarray(labels)
    if label_timestamps is not None:
        pos = {int(t): i for i, t in enumerate(label_timestamps)}
        try:
            labels = np.array([labels[pos[int(t)]] for t in frame.timestamps], dtype=np.int64)
        except KeyError as exc:
            raise ValueError(f"frame row {exc} has no label entry") from None
    elif len(labels) != len(frame):
        raise ValueError("labels must align with frame rows")

    out = []
    flat = frame.values
    for r in range(window - 1, len(frame)):
        if labels[r] < 0:
            continue
        feats = flat[r - window + 1:r + 1].reshape(-1).copy()
        feats.setflags(write=False)
        out.append(Sample(feats, int(labels[r]), int(frame.timestamps[r])))
    return out


@dataclass(frozen=True)
class DatasetSplit:
    train: list[Sample]
    test: list[Sample]
    ratio: float


def split_dataset(samples: list[Sample], ratio: float = DEFAULT_RATIO) -> DatasetSplit:
    """Chronological split: the first ``floor(ratio * N)`` samples train."""
    if not 0 < ratio < 1:
        raise ValueError("ratio must lie strictly between 0 and 1")
    n = len(samples)
    if n < 2:
        raise TooFewSamples(f"need at least 2 samples, got {n}")
    anchors = [s.anchor_ts for s in samples]
    if any(a >= b for a, b in zip(anchors, anchors[1:])):
        raise ValueError("samples must be sorted by anchor_ts")
    k = math.floor(ratio * n)
    return DatasetSplit(list(samples[:k]), list(samples[k:]), ratio)


def stack(samples: list[Sample]) -> tuple[np.ndarray, np.ndarray]:
    """Feature matrix and label vector for a list of samples."""
    if not samples:
        return np.empty((0, 0)), np.empty(0, dtype=np.int64)
    X = np.vstack([s.features for s in samples])
    y = np.array([s.label for s in samples], dtype=np.int64)
    return X, y


@dataclass
class BuiltDataset:
    """Everything the downstream stages need from one candle series."""

    split: DatasetSplit
    stats: ScalingStats
    frame: FeatureFrame
    closes: dict = field(repr=False)

    def close_at(self, ts: int) -> float:
        return self.closes[int(ts)]


def build_dataset(
    series: CandleSeries,
    label_spec: LabelSpec = LabelSpec(),
    window: int = WINDOW,
    ratio: float = DEFAULT_RATIO,
) -> BuiltDataset:
    """Run augmentation, labeling, training-region scaling, windowing and the split.

    Scaling divisors are computed from the frame rows up to the newest
    training anchor, so nothing from the test span leaks into them.
    """
    frame = augment_frame(series)
    labels = make_labels(series, label_spec)
    raw = window_samples(frame, labels, window, label_timestamps=series.timestamps)
    if len(raw) < 2:
        raise TooFewSamples(f"only {len(raw)} labeled windows; need at least 2")
    n_train = math.floor(ratio * len(raw))
    if n_train < 1:
        raise TooFewSamples("training split is empty")
    last_train_ts = raw[n_train - 1].anchor_ts
    stats = ScalingStats.fit(frame.rows(frame.timestamps <= last_train_ts))
    scaled = stats.apply(frame)
    samples = window_samples(scaled, labels, window, label_timestamps=series.timestamps)
    closes = {int(t): float(c) for t, c in zip(series.timestamps, series.close)}
    return BuiltDataset(split_dataset(samples, ratio), stats, scaled, closes)


# -- export ------------------------------------------------------------------


def samples_to_csv(samples: list[Sample]) -> str:
    width = len(samples[0].features) if samples else WINDOW * N_COLUMNS
    header = ["anchor_ts", "label"] + [f"f{i}" for i in range(width)]
    lines = [",".join(header)]
    for s in samples:
        lines.append(",".join([str(s.anchor_ts), str(s.label)] + [format_decimal(v) for v in s.features]))
    return "\n".join(lines) + "\n"


def samples_from_csv(text: str) -> list[Sample]:
    rows = text.strip("\n").split("\n")
    header = rows[0].split(",")
    if header[:2] != ["anchor_ts", "label"]:
        raise ValueError("dataset CSV must start with anchor_ts,label")
    out = []
    for line in rows[1:]:
        parts = line.split(",")
        feats = np.array(parts[2:], dtype=float)
        feats.setflags(write=False)
        out.append(Sample(feats, int(parts[1]), int(parts[0])))
    return out
