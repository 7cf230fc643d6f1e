"""OHLCV candle series: CSV persistence, klines download and validation."""
from __future__ import annotations

import csv
import io
import logging
import math
import time
from dataclasses import dataclass, field
from functools import cached_property
from typing import NamedTuple

import numpy as np
import requests

from .errors import DecodeError, DuplicateTimestamp, EmptyRange, HttpError, MalformedRow

logger = logging.getLogger(__name__)

CSV_HEADER = ("timestamp", "open", "high", "low", "close", "volume")

INTERVAL_SECONDS = {
    "1m": 60,
    "3m": 180,
    "5m": 300,
    "15m": 900,
    "30m": 1800,
    "1h": 3600,
    "2h": 7200,
    "4h": 14400,
    "6h": 21600,
    "8h": 28800,
    "12h": 43200,
    "1d": 86400,
    "3d": 259200,
    "1w": 604800,
}


def interval_to_seconds(interval: str) -> int:
    try:
        return INTERVAL_SECONDS[interval]
    except KeyError:
        raise ValueError(f"unknown interval {interval!r}") from None


class Candle(NamedTuple):
    """One bar; ``timestamp`` is the bar-open time in UTC seconds."""

    timestamp: int
    open: float
    high: float
    low: float
    close: float
    volume: float


@dataclass(frozen=True)
class CandleSeries:
    symbol: str
    interval_seconds: int
    candles: tuple[Candle, ...] = field(default_factory=tuple)

    def __post_init__(self):
        object.__setattr__(self, "candles", tuple(Candle(*c) for c in self.candles))

    def __len__(self):
        return len(self.candles)

    def _column(self, i, dtype=float):
        arr = np.array([c[i] for c in self.candles], dtype=dtype)
        arr.setflags(write=False)
        return arr

    @cached_property
    def timestamps(self) -> np.ndarray:
        return self._column(0, np.int64)

    @cached_property
    def open(self) -> np.ndarray:
        return self._column(1)

    @cached_property
    def high(self) -> np.ndarray:
        return self._column(2)

    @cached_property
    def low(self) -> np.ndarray:
        return self._column(3)

    @cached_property
    def close(self) -> np.ndarray:
        return self._column(4)

    @cached_property
    def volume(self) -> np.ndarray:
        return self._column(5)

    def slice(self, start=None, stop=None) -> CandleSeries:
        return CandleSeries(self.symbol, self.interval_seconds, self.candles[start:stop])

    @classmethod
    def from_arrays(cls, symbol, interval_seconds, timestamps, open, high, low, close, volume):
        rows = zip(timestamps, open, high, low, close, volume)
        candles = tuple(
            Candle(int(t), float(o), float(h), float(lo), float(c), float(v))
            for t, o, h, lo, c, v in rows
        )
        return cls(symbol, interval_seconds, candles)


@dataclass(frozen=True)
class ValidationReport:
    gap_ranges: tuple[tuple[int, int], ...]
    violations: tuple[tuple[int, str], ...]

    @property
    def is_clean(self) -> bool:
        return not self.gap_ranges and not self.violations

    def summary(self) -> str:
        if self.is_clean:
            return "clean"
        return f"{len(self.gap_ranges)} gap(s), {len(self.violations)} violation(s)"


def candle_violations(c: Candle) -> list[str]:
    """Names of the invariants a single candle breaks (empty when valid)."""
    out = []
    prices = (c.open, c.high, c.low, c.close)
    if not all(math.isfinite(p) for p in prices) or not math.isfinite(c.volume):
        out.append("non_finite")
        return out
    if min(prices) <= 0:
        out.append("nonpositive_price")
    if c.low > c.high:
        out.append("low_above_high")
    if c.low > min(c.open, c.close):
        out.append("low_above_body")
    if c.high < max(c.open, c.close):
        out.append("high_below_body")
    if c.volume < 0:
        out.append("negative_volume")
    return out


def validate_series(series: CandleSeries) -> ValidationReport:
    gaps = []
    violations = []
    prev = None
    for i, c in enumerate(series.candles):
        if prev is not None:
            step = c.timestamp - prev
            if step <= 0:
                violations.append((i, "non_increasing_timestamp"))
            elif step != series.interval_seconds:
                gaps.append((prev, c.timestamp))
        prev = c.timestamp
        for rule in candle_violations(c):
            violations.append((i, rule))
    return ValidationReport(tuple(gaps), tuple(violations))


# -- CSV ---------------------------------------------------------------------


def format_decimal(x: float) -> str:
    """Shortest round-trip rendering of ``x`` with no exponent."""
    return np.format_float_positional(float(x), trim="-")


def _parse_float(text, lineno):
    try:
        value = float(text)
    except ValueError:
        raise MalformedRow(f"line {lineno}: non-numeric field {text!r}") from None
    if not math.isfinite(value):
        raise MalformedRow(f"line {lineno}: non-finite field {text!r}")
    return value


def parse_candles(csv_text: str, symbol: str, interval_seconds: int) -> CandleSeries:
    reader = csv.reader(io.StringIO(csv_text))
    header = next(reader, None)
    if header is None or tuple(h.strip() for h in header) != CSV_HEADER:
        raise MalformedRow(f"expected header {','.join(CSV_HEADER)!r}, got {header!r}")

    candles = []
    for lineno, row in enumerate(reader, start=2):
        if not row or all(not f.strip() for f in row):
            continue
        if len(row) != 6:
            raise MalformedRow(f"line {lineno}: expected 6 fields, got {len(row)}")
        try:
            ts = int(row[0])
        except ValueError:
            raise MalformedRow(f"line {lineno}: bad timestamp {row[0]!r}") from None
        o, h, lo, c, v = (_parse_float(f, lineno) for f in row[1:])
        if min(o, h, lo, c) <= 0:
            raise MalformedRow(f"line {lineno}: nonpositive price")
        if h < lo:
            raise MalformedRow(f"line {lineno}: high {h} < low {lo}")
        candles.append(Candle(ts, o, h, lo, c, v))

    candles.sort(key=lambda c: c.timestamp)
    for a, b in zip(candles, candles[1:]):
        if a.timestamp == b.timestamp:
            raise DuplicateTimestamp(f"timestamp {a.timestamp} appears more than once")
    return CandleSeries(symbol, interval_seconds, tuple(candles))


def write_candles(series: CandleSeries) -> str:
    lines = [",".join(CSV_HEADER)]
    for c in series.candles:
        fields = [str(int(c.timestamp))] + [format_decimal(x) for x in c[1:]]
        lines.append(",".join(fields))
    return "\n".join(lines) + "\n"


def read_candles_file(path, symbol: str, interval_seconds: int) -> CandleSeries:
    with open(path, encoding="utf-8", newline="") as fh:
        return parse_candles(fh.read(), symbol, interval_seconds)


# -- klines over HTTP ----------------------------------------------------------


def _decode_kline(row):
    if not isinstance(row, (list, tuple)) or len(row) < 6:
        raise DecodeError(f"kline row must be an array of >= 6 items, got {row!r}")
    try:
        open_ms = int(row[0])
        o, h, lo, c, v = (float(x) for x in row[1:6])
    except (TypeError, ValueError) as exc:
        raise DecodeError(f"bad kline row {row!r}: {exc}") from None
    return Candle(open_ms // 1000, o, h, lo, c, v)


def fetch_klines(
    endpoint: str,
    symbol: str,
    interval: str,
    start_ts: int,
    end_ts: int,
    page_limit: int = 1000,
    *,
    session=None,
    timeout: float = 30.0,
    max_retries: int = 3,
    retry_backoff: float = 1.0,
) -> CandleSeries:
    """Download every bar whose open time lies in ``[start_ts, end_ts)``.

    Pages are requested sequentially; the next page starts one interval after
    the last bar returned. A short page (fewer than ``page_limit`` rows) ends
    the download. HTTP 429 is retried ``max_retries`` times with a fixed
    ``retry_backoff`` sleep.
    """
    if page_limit < 1:
        raise ValueError("page_limit must be >= 1")
    step = interval_to_seconds(interval)
    http = session or requests.Session()

    bars: dict[int, Candle] = {}
    cursor = start_ts
    while cursor < end_ts:
        params = {
            "symbol": symbol,
            "interval": interval,
            "startTime": cursor * 1000,
            "endTime": end_ts * 1000 - 1,
            "limit": page_limit,
        }
        for attempt in range(max_retries + 1):
            try:
                resp = http.get(endpoint, params=params, timeout=timeout)
            except requests.RequestException as exc:
                raise HttpError(None, str(exc)) from exc
            if resp.status_code == 429 and attempt < max_retries:
                logger.warning("rate limited, retrying in %.1fs", retry_backoff)
                time.sleep(retry_backoff)
                continue
            break
        if not 200 <= resp.status_code < 300:
            raise HttpError(resp.status_code, resp.text[:200])
        try:
            payload = resp.json()
        except ValueError as exc:
            raise DecodeError(f"response is not JSON: {exc}") from None
        if not isinstance(payload, list):
            raise DecodeError("klines response must be a JSON array")

        page = [_decode_kline(row) for row in payload]
        for c in page:
            if start_ts <= c.timestamp < end_ts:
                bars[c.timestamp] = c
        if len(page) < page_limit:
            break
        nxt = max(c.timestamp for c in page) + step
        if nxt <= cursor:
            raise DecodeError("klines page did not advance past the requested start")
        cursor = nxt

    if not bars:
        raise EmptyRange(f"no {symbol} {interval} bars in [{start_ts}, {end_ts})")
    candles = tuple(bars[t] for t in sorted(bars))
    return CandleSeries(symbol, step, candles)
