"""Technical indicators over a candle series.

Every function returns columns as long as its input. Bars inside the warm-up
window hold NaN; from the warm-up index onward every value is defined.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from .errors import BadPeriod, SeriesTooShort
from .market_data import CandleSeries

CCI_CONSTANT = 0.015


@dataclass(frozen=True)
class IndicatorColumn:
    name: str
    period: int
    values: np.ndarray

    def __len__(self):
        return len(self.values)

    @property
    def warmup(self) -> int:
        """Index of the first defined value (``len(self)`` if none)."""
        defined = np.flatnonzero(~np.isnan(self.values))
        return int(defined[0]) if defined.size else len(self.values)

    def defined(self) -> np.ndarray:
        return self.values[self.warmup:]


@dataclass(frozen=True)
class DmiTriple:
    di_plus: IndicatorColumn
    di_minus: IndicatorColumn
    dx: IndicatorColumn


@dataclass(frozen=True)
class BollingerTriple:
    mid: IndicatorColumn
    upper: IndicatorColumn
    lower: IndicatorColumn


def _check_period(period):
    if int(period) != period or period < 1:
        raise BadPeriod(f"period must be a positive integer, got {period!r}")


def _column(name, period, values):
    values = np.asarray(values, dtype=float)
    values.setflags(write=False)
    return IndicatorColumn(name, period, values)


def _windows(x, period):
    """Trailing windows; row j covers x[j : j + period], i.e. ends at bar j + period - 1."""
    return sliding_window_view(x, period)


def sma(values, period: int) -> IndicatorColumn:
    _check_period(period)
    x = np.asarray(values, dtype=float)
    out = np.full(len(x), np.nan)
    if len(x) >= period:
        out[period - 1:] = _windows(x, period).mean(axis=1)
    return _column(f"sma{period}", period, out)


def ema(values, period: int) -> IndicatorColumn:
    """Exponential average seeded with the simple mean of the first ``period`` values."""
    _check_period(period)
    x = np.asarray(values, dtype=float)
    out = np.full(len(x), np.nan)
    if len(x) >= period:
        alpha = 2.0 / (period + 1)
        prev = x[:period].mean()
        out[period - 1] = prev
        for i in range(period, len(x)):
            prev = alpha * x[i] + (1.0 - alpha) * prev
            out[i] = prev
    return _column(f"ema{period}", period, out)


def typical_price(series: CandleSeries) -> np.ndarray:
    return (series.high + series.low + series.close) / 3.0


def _cci_values(tp, period):
    out = np.full(len(tp), np.nan)
    if len(tp) < period:
        return out
    win = _windows(tp, period)
    ma = win.mean(axis=1)
    md = np.abs(win - ma[:, None]).mean(axis=1)
    # a flat window has zero mean deviation; report 0 instead of 0/0
    flat = win.max(axis=1) == win.min(axis=1)
    res = np.zeros(len(win))
    ok = ~flat
    res[ok] = (tp[period - 1:][ok] - ma[ok]) / (CCI_CONSTANT * md[ok])
    out[period - 1:] = res
    return out


def cci(series: CandleSeries, period: int) -> IndicatorColumn:
    _check_period(period)
    return _column(f"cci{period}", period, _cci_values(typical_price(series), period))


def rsi(closes, period: int) -> IndicatorColumn:
    _check_period(period)
    x = np.asarray(closes, dtype=float)
    if len(x) < period + 1:
        raise SeriesTooShort(f"rsi{period} needs {period + 1} closes, got {len(x)}")
    change = np.diff(x)
    gain = np.where(change > 0, change, 0.0)
    loss = np.where(change < 0, -change, 0.0)

    def strength(avg_gain, avg_loss):
        if avg_loss == 0:
            return 100.0
        if avg_gain == 0:
            return 0.0
        return 100.0 - 100.0 / (1.0 + avg_gain / avg_loss)

    out = np.full(len(x), np.nan)
    avg_gain = gain[:period].mean()
    avg_loss = loss[:period].mean()
    out[period] = strength(avg_gain, avg_loss)
    for i in range(period + 1, len(x)):
        avg_gain = (avg_gain * (period - 1) + gain[i - 1]) / period
        avg_loss = (avg_loss * (period - 1) + loss[i - 1]) / period
        out[i] = strength(avg_gain, avg_loss)
    return _column(f"rsi{period}", period, out)


def wilder_smooth(x, period: int, start: int = 0) -> np.ndarray:
    """Running Wilder sum ``S_t = S_{t-1} - S_{t-1}/period + x_t``.

    Seeded at ``start + period - 1`` with the plain sum of the first
    ``period`` values from ``start``.
    """
    x = np.asarray(x, dtype=float)
    out = np.full(len(x), np.nan)
    first = start + period - 1
    if first >= len(x):
        return out
    s = x[start:first + 1].sum()
    out[first] = s
    for t in range(first + 1, len(x)):
        s = s - s / period + x[t]
        out[t] = s
    return out


def directional_movement(series: CandleSeries):
    """Raw +DM, -DM and true range per bar; entry 0 is NaN (no previous bar)."""
    h, lo, c = series.high, series.low, series.close
    n = len(h)
    plus = np.full(n, np.nan)
    minus = np.full(n, np.nan)
    tr = np.full(n, np.nan)
    if n < 2:
        return plus, minus, tr
    up = h[1:] - h[:-1]
    down = lo[:-1] - lo[1:]
    plus[1:] = np.where((up > down) & (up > 0), up, 0.0)
    minus[1:] = np.where((down > up) & (down > 0), down, 0.0)
    tr[1:] = np.maximum.reduce([h[1:] - lo[1:], np.abs(h[1:] - c[:-1]), np.abs(lo[1:] - c[:-1])])
    return plus, minus, tr


def dmi(series: CandleSeries, period: int) -> DmiTriple:
    _check_period(period)
    if len(series) < period + 1:
        raise SeriesTooShort(f"dmi{period} needs {period + 1} bars, got {len(series)}")
    plus, minus, tr = directional_movement(series)
    s_plus = wilder_smooth(plus, period, start=1)
    s_minus = wilder_smooth(minus, period, start=1)
    s_tr = wilder_smooth(tr, period, start=1)

    with np.errstate(invalid="ignore", divide="ignore"):
        di_plus = np.where(s_tr > 0, 100.0 * s_plus / s_tr, 0.0)
        di_minus = np.where(s_tr > 0, 100.0 * s_minus / s_tr, 0.0)
        total = di_plus + di_minus
        dx = np.where(total > 0, 100.0 * np.abs(di_plus - di_minus) / total, 0.0)
    undefined = np.isnan(s_tr)
    for arr in (di_plus, di_minus, dx):
        arr[undefined] = np.nan
    return DmiTriple(
        _column(f"di_plus{period}", period, di_plus),
        _column(f"di_minus{period}", period, di_minus),
        _column(f"dx{period}", period, dx),
    )


def macd(closes, fast: int = 12, slow: int = 26) -> IndicatorColumn:
    x = np.asarray(closes, dtype=float)
    if len(x) < slow:
        raise SeriesTooShort(f"macd needs {slow} closes, got {len(x)}")
    return _column("macd", slow, ema(x, fast).values - ema(x, slow).values)


def bollinger(series: CandleSeries, n: int = 20, m: float = 2.0) -> BollingerTriple:
    """Bands around the n-bar mean of typical price, population std dev."""
    _check_period(n)
    tp = typical_price(series)
    upper = np.full(len(tp), np.nan)
    lower = np.full(len(tp), np.nan)
    if len(tp) >= n:
        win = _windows(tp, n)
        ma = win.mean(axis=1)
        sd = win.std(axis=1)
        sd[win.max(axis=1) == win.min(axis=1)] = 0.0
        upper[n - 1:] = ma + m * sd
        lower[n - 1:] = ma - m * sd
    mid = (upper + lower) / 2.0
    return BollingerTriple(
        _column("boll_mid", n, mid),
        _column("boll_upper", n, upper),
        _column("boll_lower", n, lower),
    )
