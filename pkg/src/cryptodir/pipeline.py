"""End-to-end helpers shared by the CLI and the demo scripts."""
from __future__ import annotations

import hashlib
import json
import os
import tempfile
from dataclasses import asdict, dataclass, field

import numpy as np

from .backtest import StrategyConfig, TradeLog, compute_report, days_between, run_strategy
from .classifiers import Hyperparams
from .dataset import DEFAULT_RATIO, DEFAULT_THRESHOLD, WINDOW, BuiltDataset, Sample, stack


@dataclass(frozen=True)
class PipelineConfig:
    symbol: str = "ETHUSDT"
    interval: str = "4h"
    candles_sha256: str = ""
    threshold: float = DEFAULT_THRESHOLD
    horizon_bars: int = 1
    window: int = WINDOW
    ratio: float = DEFAULT_RATIO
    endpoint: str | None = None
    hyperparams: Hyperparams = field(default_factory=Hyperparams)
    strategy: StrategyConfig = field(default_factory=StrategyConfig)

    # fields that decide the dataset; model and strategy settings may vary
    # across artifacts that share one dataset
    CHAIN_FIELDS = ("symbol", "interval", "candles_sha256", "threshold", "horizon_bars", "window", "ratio")

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d) -> PipelineConfig:
        d = dict(d)
        d["hyperparams"] = Hyperparams.from_dict(d.get("hyperparams", {}))
        d["strategy"] = StrategyConfig(**d.get("strategy", {}))
        return cls(**d)

    def chain_hash(self) -> str:
        """Digest of the dataset-defining fields, embedded in every artifact."""
        key = {name: getattr(self, name) for name in self.CHAIN_FIELDS}
        blob = json.dumps(key, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()[:16]


def sha256_text(text: str) -> str:
    return hashlib.sha256(text.encode()).hexdigest()


def atomic_write(path, text: str):
    """Write via a temp file in the same directory, then rename over ``path``."""
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def holdout_prices(built: BuiltDataset, samples: list[Sample], interval_seconds: int):
    """Closes at each test anchor plus the bar after the last one, and their timestamps."""
    ts = [s.anchor_ts for s in samples]
    ts.append(ts[-1] + interval_seconds)
    return np.array([built.close_at(t) for t in ts]), np.array(ts)


def backtest_predictions(prices, timestamps, preds, truth, cfg: StrategyConfig):
    log: TradeLog = run_strategy(prices, preds, cfg, timestamps)
    report = compute_report(log, preds, truth, days_between(int(timestamps[0]), int(timestamps[-1])))
    return log, report


def evaluate_model(model, built: BuiltDataset, interval_seconds: int, cfg: StrategyConfig):
    """Predict the test split and replay the predictions as trades."""
    X, y = stack(built.split.test)
    preds, _ = model.predict(X)
    prices, ts = holdout_prices(built, built.split.test, interval_seconds)
    log, report = backtest_predictions(prices, ts, preds, y, cfg)
    return preds, log, report
