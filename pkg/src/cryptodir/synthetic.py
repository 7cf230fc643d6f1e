"""Synthetic 4h candle series for tests and demos."""
from __future__ import annotations

import numpy as np

from .market_data import CandleSeries

FOUR_HOURS = 14400
START_TS = 1_500_004_800  # 2017-07-14 04:00 UTC, on a 4h boundary


def candles_from_closes(closes, rng, symbol="SYNUSDT", start_ts=START_TS, interval=FOUR_HOURS,
                        wick=0.002) -> CandleSeries:
    """Wrap a close path into valid OHLCV bars (open = previous close)."""
    closes = np.asarray(closes, dtype=float)
    n = len(closes)
    opens = np.empty(n)
    opens[0] = closes[0]
    opens[1:] = closes[:-1]
    body_hi = np.maximum(opens, closes)
    body_lo = np.minimum(opens, closes)
    highs = body_hi * (1 + np.abs(rng.normal(0, wick, n)))
    lows = body_lo * (1 - np.abs(rng.normal(0, wick, n)))
    volume = rng.lognormal(mean=8.0, sigma=0.5, size=n)
    ts = start_ts + interval * np.arange(n)
    return CandleSeries.from_arrays(symbol, interval, ts, opens, highs, lows, closes, volume)


def random_walk(n, seed=0, start=100.0, vol=0.01, drift=0.0, symbol="SYNUSDT") -> CandleSeries:
    """Geometric random walk; ``drift`` is the mean log return per bar."""
    rng = np.random.default_rng(seed)
    log_ret = rng.normal(drift, vol, n)
    log_ret[0] = 0.0
    return candles_from_closes(start * np.exp(np.cumsum(log_ret)), rng, symbol)


def ar_signal(n, seed=0, start=100.0, persistence=0.97, signal_vol=0.005, noise_vol=0.005,
              symbol="SYNUSDT") -> CandleSeries:
    """Returns carry a persistent AR(1) drift plus white noise.

    The drift ``m_t = persistence * m_{t-1} + e_t`` is scaled so its
    stationary standard deviation is ``signal_vol``; the bar return is
    ``m_t + noise``. Recent bars therefore tell the sign of the next return
    more often than chance.
    """
    rng = np.random.default_rng(seed)
    innov = signal_vol * np.sqrt(1 - persistence ** 2)
    m = np.empty(n)
    m[0] = rng.normal(0, signal_vol)
    shocks = rng.normal(0, innov, n)
    for t in range(1, n):
        m[t] = persistence * m[t - 1] + shocks[t]
    log_ret = m + rng.normal(0, noise_vol, n)
    log_ret[0] = 0.0
    # clamp the level into a band so the path neither explodes nor vanishes
    level = np.cumsum(log_ret)
    level = level - np.linspace(0, level[-1], n)
    return candles_from_closes(start * np.exp(level), rng, symbol)
