"""kNN, random forest and boosted trees on the same synthetic dataset.

Small model sizes keep the run under a minute.
"""
import time

from cryptodir.classifiers import Hyperparams, accuracy, fit_model, model_from_json, model_to_json
from cryptodir.dataset import build_dataset, stack
from cryptodir.synthetic import ar_signal

built = build_dataset(ar_signal(3000, seed=3))
X_test, y_test = stack(built.split.test)
print(f"{len(built.split.train)} training samples, {len(y_test)} test samples")
print(f"majority-class baseline: {max(y_test.mean(), 1 - y_test.mean()):.3f}")

hp = Hyperparams(knn_k=5, rf_trees=30, gbt_rounds=30, seed=0)
for kind in ("knn", "rf", "gbt"):
    t0 = time.perf_counter()
    model = fit_model(kind, built.split.train, hp)
    labels, scores = model.predict(X_test)
    print(f"{kind:>4}: accuracy {accuracy(labels, y_test):.3f}  ({time.perf_counter() - t0:.1f}s)")

# models serialize to JSON and come back with identical predictions
restored, doc = model_from_json(model_to_json(model, hp=hp))
print("gbt reloaded, same predictions:", (restored.predict(X_test)[0] == labels).all())
print("gbt training loss, first and last round:", round(model.train_loss[0], 4), round(model.train_loss[-1], 4))
