"""The fourteen indicator columns on a short random walk."""
import numpy as np

from cryptodir import indicators as ind
from cryptodir.synthetic import random_walk

series = random_walk(120, seed=2, start=200.0)
close = series.close

cols = {
    "cci14": ind.cci(series, 14),
    "rsi14": ind.rsi(close, 14),
    "rsi30": ind.rsi(close, 30),
    "macd": ind.macd(close),
    "ema12": ind.ema(close, 12),
}
dmi = ind.dmi(series, 14)
boll = ind.bollinger(series, 20, 2.0)
cols.update({"di+": dmi.di_plus, "di-": dmi.di_minus, "dx": dmi.dx,
             "boll_lo": boll.lower, "boll_mid": boll.mid, "boll_up": boll.upper})

print(f"{'column':<10}{'warm-up':>8}{'last value':>14}")
for name, col in cols.items():
    print(f"{name:<10}{col.warmup:>8}{col.values[-1]:>14.4f}")

# RSI and CCI do not care about the price level, MACD scales with it
scaled = random_walk(120, seed=2, start=2000.0)
print("rsi14 unchanged x10:", np.allclose(ind.rsi(scaled.close, 14).defined(), cols["rsi14"].defined()))
print("macd x10:", np.allclose(ind.macd(scaled.close).defined(), 10 * cols["macd"].defined()))
