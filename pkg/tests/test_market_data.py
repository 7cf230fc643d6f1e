import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cryptodir.errors import DecodeError, DuplicateTimestamp, EmptyRange, HttpError, MalformedRow
from cryptodir.market_data import (
    Candle,
    CandleSeries,
    fetch_klines,
    parse_candles,
    validate_series,
    write_candles,
)

from conftest import KlineSource

HEADER = "timestamp,open,high,low,close,volume\n"
H4 = 14400
T0 = 1_500_004_800


def test_parse_single_row():
    s = parse_candles(HEADER + "1500000000,100,110,90,105,7\n", "ETHUSDT", H4)
    assert len(s) == 1
    assert s.candles[0] == Candle(1500000000, 100.0, 110.0, 90.0, 105.0, 7.0)
    assert s.symbol == "ETHUSDT" and s.interval_seconds == H4


@pytest.mark.parametrize("row", [
    "1500000000,100,90,110,105,7",   # high < low
    "1500000000,abc,110,90,105,7",
    "1500000000,0,110,90,105,7",
    "1500000000,100,110,-90,105,7",
    "1500000000,100,110,90,105",
    "1500000000,100,110,90,nan,7",
])
def test_parse_rejects_malformed(row):
    with pytest.raises(MalformedRow):
        parse_candles(HEADER + row + "\n", "X", H4)


def test_parse_rejects_bad_header():
    with pytest.raises(MalformedRow):
        parse_candles("ts,o,h,l,c,v\n1,1,1,1,1,1\n", "X", H4)


def test_parse_sorts_and_rejects_duplicates():
    text = HEADER + f"{T0 + H4},2,2,2,2,1\n{T0},1,1,1,1,1\n"
    s = parse_candles(text, "X", H4)
    assert list(s.timestamps) == [T0, T0 + H4]
    with pytest.raises(DuplicateTimestamp):
        parse_candles(HEADER + f"{T0},1,1,1,1,1\n{T0},2,2,2,2,1\n", "X", H4)


def test_write_line_counts():
    one = CandleSeries("X", H4, (Candle(T0, 1, 2, 0.5, 1.5, 3),))
    assert write_candles(one).count("\n") == 2
    assert write_candles(CandleSeries("X", H4, ())) == HEADER


def test_write_has_no_exponent():
    s = CandleSeries("X", H4, (Candle(T0, 1e-5, 2e-5, 1e-6, 1.5e-5, 1e7),))
    text = write_candles(s)
    assert "e" not in text.split("\n", 1)[1].lower()
    assert text == HEADER + f"{T0},0.00001,0.00002,0.000001,0.000015,10000000\n"


def test_write_parse_is_canonical(fixture_500):
    text = write_candles(fixture_500)
    assert write_candles(parse_candles(text, "ETHUSDT", H4)) == text


prices = st.floats(min_value=1e-6, max_value=1e6, allow_nan=False, allow_infinity=False)


@st.composite
def candle_series(draw):
    n = draw(st.integers(0, 20))
    candles = []
    for i in range(n):
        o, c = draw(prices), draw(prices)
        h = max(o, c) * draw(st.floats(1.0, 1.5))
        lo = min(o, c) * draw(st.floats(0.5, 1.0))
        v = draw(st.floats(0, 1e9, allow_nan=False))
        candles.append(Candle(T0 + i * H4, o, h, lo, c, v))
    return CandleSeries("X", H4, tuple(candles))


@given(candle_series())
@settings(max_examples=100, deadline=None)
def test_roundtrip_identity(series):
    back = parse_candles(write_candles(series), "X", H4)
    assert back == series


def test_validate_clean():
    s = CandleSeries("X", H4, tuple(Candle(T0 + i * H4, 1, 1, 1, 1, 1) for i in range(3)))
    assert validate_series(s).is_clean


def test_validate_reports_gap():
    s = CandleSeries("X", H4, tuple(Candle(t, 1, 1, 1, 1, 1) for t in (T0, T0 + H4, T0 + 43200)))
    rep = validate_series(s)
    assert rep.gap_ranges == ((T0 + H4, T0 + 43200),)
    assert not rep.violations and not rep.is_clean


def test_validate_reports_negative_volume():
    candles = [Candle(T0 + i * H4, 1, 1, 1, 1, 1) for i in range(3)]
    candles[1] = candles[1]._replace(volume=-1.0)
    rep = validate_series(CandleSeries("X", H4, tuple(candles)))
    assert rep.violations == ((1, "negative_volume"),)


def test_validate_does_not_mutate(fixture_500):
    before = write_candles(fixture_500)
    validate_series(fixture_500)
    assert write_candles(fixture_500) == before


def test_fetch_two_klines(kline_server):
    url = kline_server(KlineSource(2))
    s = fetch_klines(url, "ETHUSDT", "4h", T0, T0 + 10 * H4, 1000)
    assert len(s) == 2
    assert s.candles[0] == Candle(T0, 10.0, 11.5, 9.5, 10.5, 123.4)
    assert s.interval_seconds == H4


@pytest.mark.parametrize("bars,limit", [(1500, 1000), (1000, 1000), (2000, 1000), (7, 3), (1, 5)])
def test_fetch_request_count(kline_server, bars, limit):
    src = KlineSource(bars)
    url = kline_server(src)
    s = fetch_klines(url, "ETHUSDT", "4h", T0, T0 + bars * H4, limit)
    assert len(s) == bars
    assert len(src.requests) == math.ceil(bars / limit)
    assert validate_series(s).is_clean
    assert src.requests[0]["startTime"] == str(T0 * 1000)
    assert src.requests[0]["symbol"] == "ETHUSDT" and src.requests[0]["interval"] == "4h"


def test_fetch_http_error(kline_server):
    url = kline_server(KlineSource(2, status=500))
    with pytest.raises(HttpError) as err:
        fetch_klines(url, "ETHUSDT", "4h", T0, T0 + H4, 10)
    assert err.value.status == 500


def test_fetch_retries_after_429(kline_server):
    src = KlineSource(3, throttle=2)
    url = kline_server(src)
    s = fetch_klines(url, "ETHUSDT", "4h", T0, T0 + 3 * H4, 10, retry_backoff=0)
    assert len(s) == 3 and len(src.requests) == 3


def test_fetch_decode_error(kline_server):
    url = kline_server(KlineSource(0, body=b'{"code": -1}'))
    with pytest.raises(DecodeError):
        fetch_klines(url, "ETHUSDT", "4h", T0, T0 + H4, 10)
    url = kline_server(KlineSource(0, body=b'[[1, "x"]]'))
    with pytest.raises(DecodeError):
        fetch_klines(url, "ETHUSDT", "4h", T0, T0 + H4, 10)


def test_fetch_empty_range(kline_server):
    url = kline_server(KlineSource(0))
    with pytest.raises(EmptyRange):
        fetch_klines(url, "ETHUSDT", "4h", T0, T0 + H4, 10)


def test_fetch_unreachable():
    with pytest.raises(HttpError):
        fetch_klines("http://127.0.0.1:9/klines", "ETHUSDT", "4h", T0, T0 + H4, 10, timeout=2)
