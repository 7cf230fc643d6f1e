"""Turning a prediction stream into trades and the metrics table."""
import numpy as np

from cryptodir.backtest import StrategyConfig, buy_and_hold, compute_report, run_strategy

rng = np.random.default_rng(5)
prices = 1577 * np.exp(np.cumsum(rng.normal(0.002, 0.02, 120)))
preds = (rng.random(120) < 0.6).astype(int)
cfg = StrategyConfig(fee_rate_per_leg=0.00075, position_qty=1.0)

log = run_strategy(prices, preds, cfg)
report = compute_report(log, preds, (np.diff(prices, append=prices[-1]) > 0).astype(int), span_days=20)
print(report.table())
print(f"buy and hold over the same bars: {buy_and_hold(prices, cfg):.3f}")

first = log.trades[0]
print(f"first trade: buy {first.entry_price:.2f} sell {first.exit_price:.2f} "
      f"fees {first.fees:.4f} net {first.net_pnl:.4f}")

# the same stream at rising fee rates
for fee in (0.0, 0.00075, 0.002, 0.005):
    net = compute_report(run_strategy(prices, preds, StrategyConfig(fee))).net_profit
    print(f"fee {fee:.5f}/leg -> net {net:9.3f}")
