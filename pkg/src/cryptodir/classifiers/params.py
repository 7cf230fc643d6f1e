"""Model hyperparameters with per-market defaults."""
from __future__ import annotations

from dataclasses import asdict, dataclass, replace

KNN_K = {"ETHUSDT": 5, "LTCBTC": 20, "ZECBTC": 100}
RF_TREES = {"ETHUSDT": 700, "LTCBTC": 1000, "ZECBTC": 700}


@dataclass(frozen=True)
class Hyperparams:
    knn_k: int = 5
    knn_minkowski_p: float = 2.0
    knn_leaf_size: int = 30
    knn_algorithm: str = "auto"
    rf_trees: int = 700
    rf_criterion: str = "gini"
    rf_min_split: int = 2
    rf_max_depth: int | None = None
    rf_bootstrap: bool = True
    gbt_eta: float = 0.3
    gbt_max_depth: int = 6
    gbt_lambda: float = 1.0
    gbt_alpha: float = 0.0
    gbt_gamma: float = 0.0
    gbt_rounds: int = 100
    seed: int = 0

    def __post_init__(self):
        for name in ("knn_k", "knn_leaf_size", "rf_trees", "rf_min_split", "gbt_max_depth"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be >= 1")
        if self.gbt_rounds < 0:
            raise ValueError("gbt_rounds must be >= 0")
        if not 0 < self.gbt_eta <= 1:
            raise ValueError("gbt_eta must lie in (0, 1]")
        if min(self.gbt_lambda, self.gbt_alpha, self.gbt_gamma) < 0:
            raise ValueError("lambda, alpha and gamma must be >= 0")
        if self.rf_max_depth is not None and self.rf_max_depth < 1:
            raise ValueError("rf_max_depth must be >= 1 or None")

    @classmethod
    def for_symbol(cls, symbol: str, **overrides) -> Hyperparams:
        """Defaults tuned per market; unknown symbols get the ETHUSDT values."""
        key = symbol.upper().replace("-", "").replace("/", "")
        base = cls(knn_k=KNN_K.get(key, 5), rf_trees=RF_TREES.get(key, 700))
        return replace(base, **overrides)

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d) -> Hyperparams:
        return cls(**d)
