"""From candles to labelled 1140-feature windows and a chronological split."""
import numpy as np

from cryptodir.dataset import LabelSpec, augment_frame, build_dataset, make_labels
from cryptodir.synthetic import ar_signal

series = ar_signal(1500, seed=4, start=300.0)

frame = augment_frame(series)
print(f"{len(series)} bars -> {len(frame)} frame rows x {len(frame.columns)} columns")

labels = make_labels(series, LabelSpec(0.0015))
print(f"share of bars labelled 1 (next close > +0.15%): {labels[labels >= 0].mean():.3f}")

built = build_dataset(series)
train, test = built.split.train, built.split.test
print(f"{len(train)} training / {len(test)} test samples, {train[0].features.size} features each")
print("train ends before test starts:", train[-1].anchor_ts < test[0].anchor_ts)

divisors = dict(zip(built.stats.columns, built.stats.divisors))
print("divisor for close:", round(divisors["close"], 3), " for rsi14:", round(divisors["rsi14"], 3))
print("scaled close range in training rows:",
      np.ptp(built.frame.rows(built.frame.timestamps <= train[-1].anchor_ts).column("close")))
