"""Candle files: write, read back, validate, and spot a gap.

Pass an endpoint URL as the first argument to download a few days of 4h
klines instead of generating them.
"""
import sys

from cryptodir.market_data import CandleSeries, fetch_klines, parse_candles, validate_series, write_candles
from cryptodir.synthetic import random_walk

if len(sys.argv) > 1:
    start = 1_577_836_800  # 2020-01-01
    series = fetch_klines(sys.argv[1], "ETHUSDT", "4h", start, start + 30 * 14400)
else:
    series = random_walk(30, seed=1, start=130.0, symbol="ETHUSDT")

text = write_candles(series)
print(text.splitlines()[0])
print(text.splitlines()[1])

again = parse_candles(text, series.symbol, series.interval_seconds)
print("round trip identical:", again == series)
print("validation:", validate_series(series).summary())

# drop one bar and the validator reports the hole instead of patching it
holed = CandleSeries(series.symbol, series.interval_seconds, series.candles[:10] + series.candles[11:])
report = validate_series(holed)
print("after removing bar 10:", report.summary(), report.gap_ranges)
