"""Command-line front end: fetch, build, train, backtest, report."""
from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from datetime import datetime, timezone

import numpy as np

from . import market_data as md
from .backtest import (
    REPORT_FIELDS,
    BacktestReport,
    StrategyConfig,
    equity_to_csv,
    histogram_to_csv,
    trades_to_csv,
)
from .classifiers import Hyperparams, fit_model, load_model, model_to_json
from .dataset import (
    LabelSpec,
    build_dataset,
    samples_from_csv,
    samples_to_csv,
    split_dataset,
    stack,
)
from .errors import CryptoDirError
from .pipeline import PipelineConfig, atomic_write, backtest_predictions, sha256_text

logger = logging.getLogger("cryptodir")

ENDPOINT_ENV = "CRYPTODIR_ENDPOINT"
DEFAULT_ENDPOINT = "https://api.binance.com/api/v3/klines"

EXIT_OK, EXIT_ERROR, EXIT_DIRTY = 0, 1, 2


class StageError(Exception):
    pass


def _timestamp(text: str) -> int:
    if text.isdigit():
        return int(text)
    dt = datetime.fromisoformat(text)
    if dt.tzinfo is None:
        dt = dt.replace(tzinfo=timezone.utc)
    return int(dt.timestamp())


def _read(path):
    with open(path, encoding="utf-8") as fh:
        return fh.read()


def _load_build(data_dir):
    try:
        meta = json.loads(_read(os.path.join(data_dir, "build.json")))
    except FileNotFoundError:
        raise StageError(f"{data_dir} has no build.json; run `build` first") from None
    return meta, PipelineConfig.from_dict(meta["config"])


# -- fetch -------------------------------------------------------------------


def cmd_fetch(args) -> int:
    step = md.interval_to_seconds(args.interval)
    if args.input:
        series = md.read_candles_file(args.input, args.symbol, step)
    else:
        endpoint = args.endpoint or os.environ.get(ENDPOINT_ENV) or DEFAULT_ENDPOINT
        if args.start is None or args.end is None:
            raise StageError("--start and --end are required when fetching")
        series = md.fetch_klines(endpoint, args.symbol, args.interval, _timestamp(args.start),
                                 _timestamp(args.end), args.page_limit, retry_backoff=args.backoff)
    report = md.validate_series(series)
    print(f"{len(series)} bars, {report.summary()}")
    for start, end in report.gap_ranges[:10]:
        print(f"  gap {start} -> {end}")
    for idx, rule in report.violations[:10]:
        print(f"  bar {idx}: {rule}")
    if args.strict and not report.is_clean:
        print("series is not clean (--strict)", file=sys.stderr)
        return EXIT_DIRTY
    atomic_write(args.out, md.write_candles(series))
    return EXIT_OK


# -- build -------------------------------------------------------------------


def cmd_build(args) -> int:
    step = md.interval_to_seconds(args.interval)
    candles_text = md.write_candles(md.read_candles_file(args.input, args.symbol, step))
    series = md.parse_candles(candles_text, args.symbol, step)
    cfg = PipelineConfig(
        symbol=args.symbol,
        interval=args.interval,
        candles_sha256=sha256_text(candles_text),
        threshold=args.threshold,
        window=args.window,
        ratio=args.ratio,
    )
    built = build_dataset(series, LabelSpec(args.threshold), args.window, args.ratio)
    samples = built.split.train + built.split.test
    chain = cfg.chain_hash()
    out = args.out
    atomic_write(os.path.join(out, "candles.csv"), candles_text)
    atomic_write(os.path.join(out, "dataset.csv"), samples_to_csv(samples))
    scaling = {"config_hash": chain, "divisors": dict(zip(built.stats.columns, built.stats.divisors))}
    atomic_write(os.path.join(out, "scaling.json"), json.dumps(scaling, indent=2) + "\n")
    meta = {
        "config_hash": chain,
        "config": cfg.to_dict(),
        "n_samples": len(samples),
        "n_train": len(built.split.train),
        "n_test": len(built.split.test),
        "columns": list(built.frame.columns),
    }
    atomic_write(os.path.join(out, "build.json"), json.dumps(meta, indent=2) + "\n")
    print(f"{len(samples)} samples ({meta['n_train']} train / {meta['n_test']} test), "
          f"{len(samples[0].features)} features, config {chain}")
    return EXIT_OK


def _load_split(data_dir, cfg):
    samples = samples_from_csv(_read(os.path.join(data_dir, "dataset.csv")))
    return split_dataset(samples, cfg.ratio)


# -- train -------------------------------------------------------------------


def _hyperparams(args, symbol) -> Hyperparams:
    overrides = {"seed": args.seed}
    if args.k is not None:
        overrides["knn_k"] = args.k
    if args.trees is not None:
        overrides["rf_trees"] = args.trees
    if args.rounds is not None:
        overrides["gbt_rounds"] = args.rounds
    return Hyperparams.for_symbol(symbol, **overrides)


def cmd_train(args) -> int:
    meta, cfg = _load_build(args.data)
    split = _load_split(args.data, cfg)
    hp = _hyperparams(args, cfg.symbol)
    model = fit_model(args.model, split.train, hp)
    scaling = json.loads(_read(os.path.join(args.data, "scaling.json")))["divisors"]
    text = model_to_json(model, hp=hp, scaling=scaling, columns=meta["columns"],
                         config_hash=meta["config_hash"])
    atomic_write(args.out, text)
    print(f"trained {args.model} on {len(split.train)} samples -> {args.out}")
    return EXIT_OK


# -- backtest ----------------------------------------------------------------


def _read_preds(path):
    rows = _read(path).strip().split("\n")
    if rows[0].strip() != "anchor_ts,pred":
        raise StageError("prediction file must have header anchor_ts,pred")
    out = {}
    for line in rows[1:]:
        ts, p = line.split(",")
        out[int(ts)] = int(p)
    return out


def cmd_backtest(args) -> int:
    meta, cfg = _load_build(args.data)
    split = _load_split(args.data, cfg)
    test = split.test
    X, y = stack(test)
    source = {"config_hash": meta["config_hash"]}
    if args.model:
        model, doc = load_model(args.model)
        if doc.get("config_hash") != meta["config_hash"]:
            raise StageError("model was trained on a different dataset (config hash mismatch)")
        preds, _ = model.predict(X)
        source["model"] = doc["kind"]
    else:
        table = _read_preds(args.preds)
        try:
            preds = np.array([table[s.anchor_ts] for s in test], dtype=np.int64)
        except KeyError as exc:
            raise StageError(f"prediction file has no entry for anchor {exc}") from None
        source["model"] = "predictions-file"

    step = md.interval_to_seconds(cfg.interval)
    series = md.parse_candles(_read(os.path.join(args.data, "candles.csv")), cfg.symbol, step)
    closes = dict(zip(series.timestamps.tolist(), series.close.tolist()))
    ts = [s.anchor_ts for s in test] + [test[-1].anchor_ts + step]
    prices = np.array([closes[t] for t in ts])
    strategy = StrategyConfig(fee_rate_per_leg=args.fee, position_qty=args.qty)
    log, report = backtest_predictions(prices, np.array(ts), preds, y, strategy)

    out = args.out
    source["strategy"] = {"fee_rate_per_leg": args.fee, "position_qty": args.qty}
    atomic_write(os.path.join(out, "report.json"), report.to_json(**source))
    atomic_write(os.path.join(out, "trades.csv"), trades_to_csv(log))
    atomic_write(os.path.join(out, "equity.csv"), equity_to_csv(log))
    atomic_write(os.path.join(out, "pnl_hist.csv"), histogram_to_csv(log))
    print(report.table(), end="")
    return EXIT_OK


# -- report ------------------------------------------------------------------


def cmd_report(args) -> int:
    expected = None
    if args.data:
        expected = _load_build(args.data)[0]["config_hash"]
    for path in args.reports:
        doc = json.loads(_read(path))
        h = doc.get("config_hash")
        if expected is None:
            expected = h
        if h != expected:
            raise StageError(f"{path} belongs to a different artifact chain ({h} != {expected})")
        report = BacktestReport(**{k: doc[k] for k in REPORT_FIELDS})
        print(f"== {doc.get('model', '?')} ({path})")
        print(report.table(), end="")
    return EXIT_OK


# -- parser ------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="cryptodir", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    def market(p):
        p.add_argument("--symbol", default="ETHUSDT")
        p.add_argument("--interval", default="4h")

    p = sub.add_parser("fetch", help="download or import candles into a CSV file")
    market(p)
    p.add_argument("--endpoint", help=f"klines URL (default ${ENDPOINT_ENV} or Binance)")
    p.add_argument("--input", help="import an existing candle CSV instead of downloading")
    p.add_argument("--start", help="UTC start, epoch seconds or ISO date")
    p.add_argument("--end", help="UTC end (exclusive)")
    p.add_argument("--page-limit", type=int, default=1000)
    p.add_argument("--backoff", type=float, default=1.0, help="seconds to wait after HTTP 429")
    p.add_argument("--strict", action="store_true", help="exit 2 if the series has gaps or bad bars")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_fetch)

    p = sub.add_parser("build", help="indicators, labels, scaling, windows, split")
    market(p)
    p.add_argument("--input", required=True, help="candle CSV")
    p.add_argument("--threshold", type=float, default=LabelSpec().threshold)
    p.add_argument("--window", type=int, default=60)
    p.add_argument("--ratio", type=float, default=0.95)
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=cmd_build)

    p = sub.add_parser("train", help="fit one classifier on the training split")
    p.add_argument("--data", required=True, help="directory written by build")
    p.add_argument("--model", required=True, choices=("knn", "rf", "gbt"))
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--k", type=int, help="neighbours (default per symbol)")
    p.add_argument("--trees", type=int, help="forest size (default per symbol)")
    p.add_argument("--rounds", type=int, help="boosting rounds (default 100)")
    p.add_argument("--out", required=True, help="model JSON path")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("backtest", help="replay test-split predictions as trades")
    p.add_argument("--data", required=True)
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--model", help="model JSON from train")
    src.add_argument("--preds", help="CSV anchor_ts,pred to replay instead of a model")
    p.add_argument("--fee", type=float, default=0.00075, help="fee rate per leg")
    p.add_argument("--qty", type=float, default=1.0, help="position size in base units")
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=cmd_backtest)

    p = sub.add_parser("report", help="print metric tables for backtest reports")
    p.add_argument("reports", nargs="+")
    p.add_argument("--data", help="build directory the reports must belong to")
    p.set_defaults(func=cmd_report)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (CryptoDirError, StageError, OSError, ValueError) as exc:
        print(f"{args.command}: error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
