import json
import os
import sys
import threading
from http.server import BaseHTTPRequestHandler, HTTPServer
from urllib.parse import parse_qs, urlparse

import numpy as np
import pytest

from cryptodir.market_data import CandleSeries, read_candles_file
from cryptodir.synthetic import random_walk

DATA = os.path.join(os.path.dirname(__file__), "data")
FIXTURE_500 = os.path.join(DATA, "fixture_500.csv")


def series_from_hlc(high, low, close, symbol="TEST", interval=14400, start=1_500_004_800):
    """Candles with the given high/low/close; open = close, volume 1."""
    n = len(close)
    ts = start + interval * np.arange(n)
    return CandleSeries.from_arrays(symbol, interval, ts, close, high, low, close, np.ones(n))


def flat_series(price, n):
    return series_from_hlc([price] * n, [price] * n, [price] * n)


@pytest.fixture
def fixture_500():
    return read_candles_file(FIXTURE_500, "ETHUSDT", 14400)


@pytest.fixture
def walk_200():
    return random_walk(200, seed=7)


# -- klines over HTTP against an in-process mock server ------------------------


class KlineSource:
    def __init__(self, n_bars, start=1_500_004_800, step=14400, status=200, body=None, throttle=0):
        self.bars = [start + i * step for i in range(n_bars)]
        self.status = status
        self.body = body
        self.throttle = throttle
        self.requests = []


def _make_handler(source):
    class Handler(BaseHTTPRequestHandler):
        def do_GET(self):
            q = {k: v[0] for k, v in parse_qs(urlparse(self.path).query).items()}
            source.requests.append(q)
            if source.throttle:
                source.throttle -= 1
                self.send_response(429)
                self.end_headers()
                return
            if source.status != 200:
                self.send_response(source.status)
                self.end_headers()
                self.wfile.write(b"boom")
                return
            if source.body is not None:
                payload = source.body
            else:
                lo, hi, limit = int(q["startTime"]), int(q["endTime"]), int(q["limit"])
                rows = [t for t in source.bars if lo <= t * 1000 <= hi][:limit]
                payload = json.dumps([[t * 1000, "10.0", "11.5", "9.5", "10.5", "123.4",
                                       t * 1000 + 14400 * 1000 - 1] for t in rows]).encode()
            self.send_response(200)
            self.send_header("Content-Type", "application/json")
            self.end_headers()
            self.wfile.write(payload)

        def log_message(self, *args):
            pass

    return Handler


@pytest.fixture
def kline_server():
    servers = []

    def start(source):
        srv = HTTPServer(("127.0.0.1", 0), _make_handler(source))
        threading.Thread(target=srv.serve_forever, daemon=True).start()
        servers.append(srv)
        return f"http://127.0.0.1:{srv.server_port}/api/v3/klines"

    yield start
    for srv in servers:
        srv.shutdown()
        srv.server_close()


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    if mod is not None and mod.RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in mod.RESULTS:
            terminalreporter.write_line(line)
