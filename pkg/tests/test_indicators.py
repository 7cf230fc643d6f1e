import math

import numpy as np
import pytest

from cryptodir import indicators as ind
from cryptodir.errors import BadPeriod, SeriesTooShort

import oracles
from conftest import flat_series, series_from_hlc


def random_hlc(rng, n):
    close = 100 * np.exp(np.cumsum(rng.normal(0, 0.02, n)))
    high = close * (1 + rng.uniform(0, 0.02, n))
    low = close * (1 - rng.uniform(0, 0.02, n))
    return high, low, close


def assert_matches(got, want, tol=1e-9):
    got = np.asarray(got, dtype=float)
    want = np.asarray(want, dtype=float)
    assert np.array_equal(np.isnan(got), np.isnan(want))
    ok = ~np.isnan(want)
    assert np.max(np.abs(got[ok] - want[ok]), initial=0.0) <= tol


# -- hand-worked values ---------------------------------------------------------


def test_sma_small():
    assert_matches(ind.sma([1, 2, 3, 4], 2).values, [math.nan, 1.5, 2.5, 3.5])


def test_sma_constant_and_full_length():
    assert np.all(ind.sma([7.0] * 10, 4).defined() == 7.0)
    col = ind.sma([1, 2, 3, 6], 4)
    assert col.warmup == 3 and col.defined().tolist() == [3.0]


def test_ema_examples():
    assert np.all(ind.ema([3.0] * 12, 5).defined() == 3.0)
    x = [1.0, 4.0, 2.0, 8.0]
    assert ind.ema(x, 1).values.tolist() == x
    assert_matches(ind.ema([1, 2, 3], 2).values, [math.nan, 1.5, 2.5], tol=1e-15)


def test_typical_price():
    s = series_from_hlc([3, 110, 5], [1, 90, 5], [2, 100, 5])
    assert ind.typical_price(s).tolist() == [2.0, 100.0, 5.0]


def test_cci_examples():
    assert np.all(ind.cci(flat_series(10.0, 40), 14).defined() == 0.0)
    s = series_from_hlc([1, 2, 3], [1, 2, 3], [1, 2, 3])
    assert ind.cci(s, 3).values[-1] == pytest.approx(100.0, abs=1e-9)


def test_rsi_examples():
    assert np.all(ind.rsi(np.arange(1.0, 40.0), 14).defined() == 100.0)
    assert np.all(ind.rsi(np.arange(40.0, 1.0, -1), 14).defined() == 0.0)
    col = ind.rsi([1, 2, 1, 2], 3)
    assert col.warmup == 3
    assert col.values[3] == pytest.approx(200 / 3, abs=1e-12)


def test_rsi_needs_period_plus_one():
    with pytest.raises(SeriesTooShort):
        ind.rsi([1, 2, 3], 3)


def test_dmi_one_sided():
    n = 30
    up = series_from_hlc(np.arange(n) + 11.0, np.arange(n) + 9.0, np.arange(n) + 10.0)
    d = ind.dmi(up, 14)
    assert np.all(d.di_minus.defined() == 0.0) and np.all(d.dx.defined() == 100.0)
    down = series_from_hlc(100 - np.arange(n) + 1.0, 100 - np.arange(n) - 1.0, 100 - np.arange(n) + 0.0)
    d = ind.dmi(down, 14)
    assert np.all(d.di_plus.defined() == 0.0) and np.all(d.dx.defined() == 100.0)


def test_dmi_twenty_bars_oracle():
    h, lo, c = random_hlc(np.random.default_rng(20), 20)
    d = ind.dmi(series_from_hlc(h, lo, c), 14)
    want = oracles.dmi(list(h), list(lo), list(c), 14)
    for got, exp in zip((d.di_plus, d.di_minus, d.dx), want):
        assert_matches(got.values, exp)


def test_macd_examples():
    assert np.all(ind.macd([5.0] * 40).defined() == 0.0)
    rng = np.random.default_rng(30)
    x = 100 + np.cumsum(rng.normal(0, 1, 30))
    want = np.array(oracles.ema(list(x), 12)) - np.array(oracles.ema(list(x), 26))
    assert_matches(ind.macd(x).values, want)
    assert_matches(ind.macd(3 * x).values, 3 * ind.macd(x).values)


def test_bollinger_examples():
    b = ind.bollinger(flat_series(5.0, 25), 20, 2)
    for col in (b.mid, b.upper, b.lower):
        assert np.all(col.defined() == 5.0)
    b = ind.bollinger(series_from_hlc([1, 3], [1, 3], [1, 3]), 2, 2)
    assert (b.upper.values[1], b.lower.values[1], b.mid.values[1]) == (4.0, 0.0, 2.0)


def test_bad_period():
    with pytest.raises(BadPeriod):
        ind.sma([1, 2], 0)
    with pytest.raises(BadPeriod):
        ind.ema([1, 2], 1.5)


# -- oracle agreement and properties over random series -------------------------


def compute_all(h, lo, c):
    s = series_from_hlc(h, lo, c)
    d = ind.dmi(s, 14)
    b = ind.bollinger(s, 20, 2.0)
    return {
        "typical": ind.typical_price(s),
        "sma": ind.sma(c, 10).values,
        "ema": ind.ema(c, 12).values,
        "cci14": ind.cci(s, 14).values,
        "cci30": ind.cci(s, 30).values,
        "rsi14": ind.rsi(c, 14).values,
        "rsi30": ind.rsi(c, 30).values,
        "di_plus": d.di_plus.values,
        "di_minus": d.di_minus.values,
        "dx": d.dx.values,
        "macd": ind.macd(c).values,
        "boll_mid": b.mid.values,
        "boll_upper": b.upper.values,
        "boll_lower": b.lower.values,
    }


def compute_oracles(h, lo, c):
    h, lo, c = list(h), list(lo), list(c)
    dp, dm, dx = oracles.dmi(h, lo, c, 14)
    mid, up, low = oracles.bollinger(h, lo, c, 20, 2.0)
    return {
        "typical": oracles.typical(h, lo, c),
        "sma": oracles.sma(c, 10),
        "ema": oracles.ema(c, 12),
        "cci14": oracles.cci(h, lo, c, 14),
        "cci30": oracles.cci(h, lo, c, 30),
        "rsi14": oracles.rsi(c, 14),
        "rsi30": oracles.rsi(c, 30),
        "di_plus": dp,
        "di_minus": dm,
        "dx": dx,
        "macd": [a - b for a, b in zip(oracles.ema(c, 12), oracles.ema(c, 26))],
        "boll_mid": mid,
        "boll_upper": up,
        "boll_lower": low,
    }


def max_oracle_error(seed, n=200):
    """Largest absolute gap between package and oracle over every indicator."""
    h, lo, c = random_hlc(np.random.default_rng(seed), n)
    got, want = compute_all(h, lo, c), compute_oracles(h, lo, c)
    worst = 0.0
    for name in want:
        g = np.asarray(got[name], dtype=float)
        w = np.asarray(want[name], dtype=float)
        if not np.array_equal(np.isnan(g), np.isnan(w)):
            return math.inf
        ok = ~np.isnan(w)
        worst = max(worst, float(np.max(np.abs(g[ok] - w[ok]), initial=0.0)))
    return worst


@pytest.mark.parametrize("seed", range(10))
def test_oracle_agreement(seed):
    assert max_oracle_error(seed, n=int(np.random.default_rng(seed).integers(40, 201))) <= 1e-9


@pytest.mark.parametrize("seed", range(10))
def test_ranges_and_warmup(seed):
    h, lo, c = random_hlc(np.random.default_rng(100 + seed), 120)
    cols = compute_all(h, lo, c)
    for name in ("rsi14", "rsi30", "dx"):
        v = cols[name][~np.isnan(cols[name])]
        assert np.all((v >= 0) & (v <= 100))
    for name in ("di_plus", "di_minus"):
        v = cols[name][~np.isnan(cols[name])]
        assert np.all(v >= 0)
    ok = ~np.isnan(cols["boll_mid"])
    assert np.all(cols["boll_lower"][ok] <= cols["boll_mid"][ok])
    assert np.all(cols["boll_mid"][ok] <= cols["boll_upper"][ok])
    assert np.allclose(cols["boll_upper"][ok] - cols["boll_mid"][ok],
                       cols["boll_mid"][ok] - cols["boll_lower"][ok], atol=1e-9)
    expected_start = {"sma": 9, "ema": 11, "cci14": 13, "cci30": 29, "rsi14": 14, "rsi30": 30,
                      "di_plus": 14, "di_minus": 14, "dx": 14, "macd": 25, "boll_mid": 19}
    for name, start in expected_start.items():
        defined = ~np.isnan(cols[name])
        assert not defined[:start].any() and defined[start:].all(), name


@pytest.mark.parametrize("factor", [0.001, 3.5, 1000.0])
def test_scale_invariance(factor):
    h, lo, c = random_hlc(np.random.default_rng(7), 150)
    base = compute_all(h, lo, c)
    scaled = compute_all(h * factor, lo * factor, c * factor)
    for name in ("rsi14", "rsi30", "cci14", "cci30", "dx", "di_plus", "di_minus"):
        assert_matches(scaled[name], base[name])
    for name in ("macd", "boll_mid", "boll_upper", "boll_lower"):
        # relative to the price level, so compare after undoing the scale
        assert_matches(np.asarray(scaled[name]) / factor, base[name])
