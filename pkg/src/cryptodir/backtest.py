"""Long-only trade replay with per-leg fees, and the summary metrics table."""
from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .errors import AlignmentError, SeriesTooShort
from .market_data import format_decimal

DEFAULT_FEE = 0.00075
SECONDS_PER_DAY = 86400

REPORT_FIELDS = (
    "testing_accuracy",
    "net_profit",
    "n_win",
    "n_lose",
    "total_days",
    "pct_profitable",
    "avg_win",
    "avg_lose",
    "largest_win",
    "largest_lose",
    "profit_factor",
)
REPORT_LABELS = (
    "Testing Accuracy",
    "Net Profit",
    "Number of Winning Trades",
    "Number of Losing Trades",
    "Total Days in Test",
    "Percent of Profitable Trades",
    "Avg Win Trade",
    "Avg Los Trade",
    "Largest Win Trade",
    "Largest Los Trade",
    "Profit Factor",
)
TRADE_FIELDS = ("entry_ts", "exit_ts", "entry_price", "exit_price", "gross_pnl", "fees", "net_pnl")


@dataclass(frozen=True)
class StrategyConfig:
    fee_rate_per_leg: float = DEFAULT_FEE
    position_qty: float = 1.0
    quote_currency: str = "USDT"

    def __post_init__(self):
        if self.fee_rate_per_leg < 0:
            raise ValueError("fee_rate_per_leg must be >= 0")
        if not self.position_qty > 0:
            raise ValueError("position_qty must be > 0")


@dataclass(frozen=True)
class Trade:
    entry_ts: int
    exit_ts: int
    entry_price: float
    exit_price: float
    gross_pnl: float
    fees: float
    net_pnl: float

    @classmethod
    def round_trip(cls, entry_ts, exit_ts, entry_price, exit_price, qty, fee_rate) -> Trade:
        gross = qty * (exit_price - entry_price)
        fees = fee_rate * qty * (entry_price + exit_price)
        return cls(int(entry_ts), int(exit_ts), float(entry_price), float(exit_price),
                   gross, fees, gross - fees)


@dataclass
class TradeLog:
    trades: list[Trade] = field(default_factory=list)
    equity_curve: list[float] = field(default_factory=list)
    timestamps: list[int] = field(default_factory=list)

    @property
    def net_pnls(self) -> list[float]:
        return [t.net_pnl for t in self.trades]

    @classmethod
    def from_net_pnls(cls, pnls) -> TradeLog:
        """Synthetic log of zero-fee, one-unit trades with the given net results."""
        trades = []
        equity = []
        total = 0.0
        for i, p in enumerate(pnls):
            trades.append(Trade(2 * i, 2 * i + 1, 1.0, 1.0 + float(p), float(p), 0.0, float(p)))
            total += float(p)
            equity += [total - float(p), total]
        return cls(trades, equity, list(range(2 * len(trades))))


def run_strategy(prices, preds, cfg: StrategyConfig = StrategyConfig(), timestamps=None) -> TradeLog:
    """Replay a prediction stream as long-only round trips.

    A prediction at bar ``t`` is acted on at that bar's close: flat and 1
    buys, long and 1 holds, long and 0 sells. Whatever is held after the
    last decision is sold at the final price. ``preds`` may be as long as
    ``prices`` or one shorter (the last price is then a liquidation-only
    bar). No position is opened on the final price since it could not be
    held for any time.
    """
    prices = np.asarray(prices, dtype=float)
    preds = np.asarray(preds)
    n = len(prices)
    if len(preds) not in (n, n - 1):
        raise AlignmentError(f"{len(preds)} predictions for {n} prices")
    if timestamps is None:
        timestamps = np.arange(n)
    timestamps = np.asarray(timestamps)
    if len(timestamps) != n:
        raise AlignmentError("timestamps and prices differ in length")
    if not np.all(np.isin(preds, (0, 1))):
        raise ValueError("predictions must be 0 or 1")

    qty, fee = cfg.position_qty, cfg.fee_rate_per_leg
    trades: list[Trade] = []
    equity: list[float] = []
    realized = 0.0
    entry = None

    def close_position(t):
        nonlocal realized, entry
        trade = Trade.round_trip(timestamps[entry], timestamps[t], prices[entry], prices[t], qty, fee)
        trades.append(trade)
        realized += trade.net_pnl
        entry = None

    for t in range(n):
        last = t == n - 1
        signal = preds[t] if t < len(preds) else 0
        if entry is None:
            if signal == 1 and not last:
                entry = t
        elif signal == 0 or last:
            close_position(t)
        equity.append(realized)
    return TradeLog(trades, equity, [int(x) for x in timestamps])


def buy_and_hold(prices, cfg: StrategyConfig = StrategyConfig()) -> float:
    """Result of buying at the first price and selling at the last."""
    prices = np.asarray(prices, dtype=float)
    if len(prices) < 2:
        raise SeriesTooShort("buy and hold needs at least 2 prices")
    first, last = float(prices[0]), float(prices[-1])
    return cfg.position_qty * (last - first) - cfg.fee_rate_per_leg * cfg.position_qty * (first + last)


@dataclass(frozen=True)
class BacktestReport:
    testing_accuracy: float | None
    net_profit: float | None
    n_win: int
    n_lose: int
    total_days: int
    pct_profitable: float | None
    avg_win: float | None
    avg_lose: float | None
    largest_win: float | None
    largest_lose: float | None
    profit_factor: float | None

    def to_dict(self) -> dict:
        return asdict(self)

    def to_json(self, **extra) -> str:
        doc = {**self.to_dict(), **extra}
        return json.dumps(doc, indent=2) + "\n"

    def table(self) -> str:
        """Two-column text table in the conventional field order."""
        rows = []
        for label, name in zip(REPORT_LABELS, REPORT_FIELDS):
            rows.append(f"{label:<30}{_render(name, getattr(self, name))}")
        return "\n".join(rows) + "\n"


def _render(name, v):
    if v is None:
        return "n/a"
    if name in ("n_win", "n_lose", "total_days"):
        return str(v)
    if name == "pct_profitable":
        return f"{100 * v:.2f}%"
    if name == "profit_factor":
        return f"{v:.2f}"
    if name == "testing_accuracy":
        return f"{v:.6f}"
    return f"{v:.6g}" if abs(v) < 0.01 else f"{v:.3f}"


def days_between(first_ts: int, last_ts: int) -> float:
    return (last_ts - first_ts) / SECONDS_PER_DAY


def compute_report(log: TradeLog, preds=None, truth=None, span_days: float = 0.0) -> BacktestReport:
    """Fill the metrics table from a trade log.

    Zero-result trades count as losses. Without trades the profit fields are
    None and only accuracy and the day count are filled.
    """
    acc = None
    if preds is not None and truth is not None:
        preds, truth = np.asarray(preds), np.asarray(truth)
        if preds.shape != truth.shape:
            raise AlignmentError("predictions and labels differ in length")
        if preds.size:
            acc = float(np.count_nonzero(preds == truth)) / preds.size
    days = int(round(span_days))

    pnls = log.net_pnls
    if not pnls:
        return BacktestReport(acc, None, 0, 0, days, None, None, None, None, None, None)

    net = 0.0
    for p in pnls:
        net += p
    wins = [p for p in pnls if p > 0]
    losses = [p for p in pnls if p <= 0]
    gross_profit = math.fsum(wins)
    gross_loss = -math.fsum(losses)
    return BacktestReport(
        testing_accuracy=acc,
        net_profit=net,
        n_win=len(wins),
        n_lose=len(losses),
        total_days=days,
        pct_profitable=len(wins) / len(pnls),
        avg_win=gross_profit / len(wins) if wins else None,
        avg_lose=-gross_loss / len(losses) if losses else None,
        largest_win=max(wins) if wins else None,
        largest_lose=min(losses) if losses else None,
        profit_factor=gross_profit / gross_loss if gross_loss > 0 else None,
    )


# -- exports -------------------------------------------------------------------


def trades_to_csv(log: TradeLog) -> str:
    lines = [",".join(TRADE_FIELDS)]
    for t in log.trades:
        lines.append(",".join([str(t.entry_ts), str(t.exit_ts)]
                              + [format_decimal(getattr(t, f)) for f in TRADE_FIELDS[2:]]))
    return "\n".join(lines) + "\n"


def equity_to_csv(log: TradeLog) -> str:
    lines = ["timestamp,equity"]
    lines += [f"{ts},{format_decimal(v)}" for ts, v in zip(log.timestamps, log.equity_curve)]
    return "\n".join(lines) + "\n"


def pnl_histogram(log: TradeLog, bins: int = 20) -> tuple[np.ndarray, np.ndarray]:
    pnls = np.asarray(log.net_pnls, dtype=float)
    if pnls.size == 0:
        return np.zeros(bins, dtype=int), np.zeros(bins + 1)
    return np.histogram(pnls, bins=bins)


def histogram_to_csv(log: TradeLog, bins: int = 20) -> str:
    counts, edges = pnl_histogram(log, bins)
    lines = ["bin_lo,bin_hi,count"]
    for c, lo, hi in zip(counts, edges[:-1], edges[1:]):
        lines.append(f"{format_decimal(lo)},{format_decimal(hi)},{int(c)}")
    return "\n".join(lines) + "\n"
