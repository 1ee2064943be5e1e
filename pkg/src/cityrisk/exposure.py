"""Exposure-risk estimation for a hidden current city.

The predictor is run over held-out city-exposing users (cities masked)
to collect, per user and error-distance horizon K, four features:

* user category: which of hometown / work-education / friends is visible;
* cluster confidence: probability mass inside the selected cluster;
* share of friends exposing at least one attribute;
* the horizon K itself;

and one binary outcome: was the masked city recovered within K km.
A bagged regression forest (bootstrap per tree, sqrt-feature subsampling
per split, variance-reduction splitting) maps features to an exposure
probability, which a five-level bucketing turns into a risk level.

The estimator answers what-if queries by hiding subsets of the visible
fields and re-estimating, so a user can see which disclosure drives
their risk.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateDataset, EmptyScores, OutOfRange
from .evaluation import acc_at_k, mask_users
from .geo import ClusterSet, haversine_km
from .graph import SocialDataset, User
from .pfli import ProfileView, user_view
from .predictor import COMBINED_SWITCH_KM, PfliModel, select_cluster, select_location

CATEGORIES = ("HT", "WE", "F", "HT+WE", "HT+F", "WE+F", "HT+WE+F")
NO_SIGNAL = "NoSignal"
CATEGORY_ORDER = CATEGORIES + (NO_SIGNAL,)

HOMETOWN_KIND = "hometown"
WORK_KIND = "work_education"

FEATURE_NAMES = (
    "user_category",
    "cluster_confidence",
    "pct_friends_with_attrs",
    "error_distance",
)

RISK_BOUNDARIES = ((0.9, 5), (0.75, 4), (0.5, 3), (0.25, 2), (0.0, 1))


def _category_from_flags(ht: bool, we: bool, f: bool) -> str:
    parts = [name for name, flag in (("HT", ht), ("WE", we), ("F", f)) if flag]
    return "+".join(parts) if parts else NO_SIGNAL


def user_category(u: User) -> str:
    """Category by visible fields; NoSignal when everything is hidden."""
    return _category_from_flags(
        u.attributes.get(HOMETOWN_KIND) is not None,
        u.attributes.get(WORK_KIND) is not None,
        bool(u.friends),
    )


def view_category(view: ProfileView) -> str:
    return _category_from_flags(
        view.attrs.get(HOMETOWN_KIND) is not None,
        view.attrs.get(WORK_KIND) is not None,
        view.friend_count > 0,
    )


def pct_friends_with_attrs(u: str, ds: SocialDataset) -> float:
    """Share of the user's friends exposing at least one attribute."""
    return user_view(ds, u).pct_friends_with_attrs


def cluster_confidence(scores, cluster_members: list[str]) -> float:
    """Share of normalized probability mass inside the selected cluster."""
    if scores.is_empty():
        raise EmptyScores(scores.user_id or "<anonymous>")
    members = set(cluster_members)
    return sum(p for loc, p in scores.scores.items() if loc in members)


def risk_level(p: float) -> int:
    """Five-bucket risk level; 0.25/0.5/0.75/0.9 open the next bucket up."""
    if not 0.0 <= p <= 1.0 or math.isnan(p):
        raise OutOfRange(f"exposure probability {p} outside [0, 1]")
    for lower, level in RISK_BOUNDARIES:
        if p >= lower:
            return level
    return 1


def ep_at_k(errors: list[float], n_abstained: int, k_km: float) -> float:
    """Exposure probability within K km over a user aggregate; identical in
    form to ACC@K."""
    return acc_at_k(errors, n_abstained, k_km)


# -----------------------------
# Feature rows
# -----------------------------


@dataclass(frozen=True)
class ExposureFeatures:
    user_category: str
    cluster_confidence: float
    pct_friends_with_attrs: float
    error_distance_km: float


def encode_features(f: ExposureFeatures) -> np.ndarray:
    onehot = [1.0 if f.user_category == c else 0.0 for c in CATEGORY_ORDER]
    return np.array(
        [*onehot, f.cluster_confidence, f.pct_friends_with_attrs, f.error_distance_km]
    )


# Column groups for leave-one-feature-out.
FEATURE_COLUMNS = {
    "user_category": list(range(len(CATEGORY_ORDER))),
    "cluster_confidence": [len(CATEGORY_ORDER)],
    "pct_friends_with_attrs": [len(CATEGORY_ORDER) + 1],
    "error_distance": [len(CATEGORY_ORDER) + 2],
}


def build_exposure_dataset(
    ds: SocialDataset,
    eval_ids: list[str],
    model: PfliModel,
    clusters: ClusterSet,
    k_grid: tuple[int, ...],
) -> list[tuple[ExposureFeatures, int]]:
    """One row per held-out LA-user per horizon K.

    Features are computed with the user's city masked; the outcome is 1
    iff the predictor (probability selector below 40 km, centroid above)
    recovered the city within K.  Abstentions yield outcome 0 with zero
    cluster confidence.
    """
    masked = mask_users(ds, set(eval_ids))
    coords = {loc.id: (loc.lat, loc.lon) for loc in ds.locations}
    rows: list[tuple[ExposureFeatures, int]] = []
    for uid in eval_ids:
        truth = ds.location(ds.users[uid].current_city)
        view = user_view(masked, uid)
        category = view_category(view)
        scores = model.score_profile(view, normalize=True)
        if scores.is_empty():
            cc = 0.0
            err = {"prob": math.inf, "centroid": math.inf}
        else:
            idx, cc = select_cluster(scores, clusters)
            members = clusters.clusters[idx]
            err = {
                m: haversine_km(
                    select_location(scores, members, m, coords), (truth.lat, truth.lon)
                )
                for m in ("prob", "centroid")
            }
        for k in k_grid:
            e = err["prob"] if k < COMBINED_SWITCH_KM else err["centroid"]
            rows.append(
                (
                    ExposureFeatures(
                        user_category=category,
                        cluster_confidence=cc,
                        pct_friends_with_attrs=view.pct_friends_with_attrs,
                        error_distance_km=float(k),
                    ),
                    int(e < k),
                )
            )
    return rows


def encode_dataset(rows: list[tuple[ExposureFeatures, int]]) -> tuple[np.ndarray, np.ndarray]:
    X = np.array([encode_features(f) for f, _ in rows])
    y = np.array([o for _, o in rows], dtype=float)
    return X, y


# -----------------------------
# Random decision forest (regression)
# -----------------------------


@dataclass
class ForestConfig:
    n_trees: int = 100
    max_depth: int = 8
    seed: int = 0


def _build_tree(X, y, idx, depth, rng, max_depth, n_sub) -> dict:
    node_y = y[idx]
    value = float(node_y.mean())
    if depth >= max_depth or len(idx) < 2:
        return {"value": value}
    parent_sse = float(((node_y - value) ** 2).sum())
    if parent_sse <= 1e-15:
        return {"value": value}

    feats = sorted(int(f) for f in rng.choice(X.shape[1], size=n_sub, replace=False))
    best = None  # (sse, feature, threshold)
    for f in feats:
        xs = X[idx, f]
        order = np.argsort(xs, kind="stable")
        xs_sorted = xs[order]
        ys = node_y[order]
        boundaries = np.flatnonzero(xs_sorted[:-1] < xs_sorted[1:])
        if boundaries.size == 0:
            continue
        cs = np.cumsum(ys)
        css = np.cumsum(ys * ys)
        n = len(ys)
        nl = boundaries + 1
        nr = n - nl
        sse_l = css[boundaries] - cs[boundaries] ** 2 / nl
        sse_r = (css[-1] - css[boundaries]) - (cs[-1] - cs[boundaries]) ** 2 / nr
        total = sse_l + sse_r
        j = int(np.argmin(total))  # first min: smallest threshold
        if best is None or total[j] < best[0]:
            thr = (xs_sorted[boundaries[j]] + xs_sorted[boundaries[j] + 1]) / 2.0
            best = (float(total[j]), f, float(thr))
    if best is None or best[0] >= parent_sse - 1e-12:
        return {"value": value}
    _, f, thr = best
    mask = X[idx, f] <= thr
    if not mask.any() or mask.all():  # midpoint collapsed onto a value
        return {"value": value}
    left = _build_tree(X, y, idx[mask], depth + 1, rng, max_depth, n_sub)
    right = _build_tree(X, y, idx[~mask], depth + 1, rng, max_depth, n_sub)
    return {"feature": f, "threshold": thr, "left": left, "right": right}


def _tree_predict(tree: dict, X: np.ndarray) -> np.ndarray:
    out = np.empty(len(X))
    for i, x in enumerate(X):
        node = tree
        while "value" not in node:
            node = node["left"] if x[node["feature"]] <= node["threshold"] else node["right"]
        out[i] = node["value"]
    return out


@dataclass
class ExposureForest:
    config: ForestConfig
    trees: list[dict] = field(default_factory=list)
    n_features: int = 0

    def fit(self, X: np.ndarray, y: np.ndarray) -> "ExposureForest":
        if len(y) == 0 or X.ndim != 2 or X.shape[1] == 0:
            raise DegenerateDataset("empty exposure dataset")
        # Canonical row order: predictions do not depend on input order.
        order = np.lexsort(tuple(X.T[::-1]) + (y,))
        X = X[order]
        y = y[order]
        self.n_features = X.shape[1]
        n_sub = max(1, int(math.sqrt(self.n_features)))
        seeds = np.random.SeedSequence(self.config.seed).spawn(self.config.n_trees)
        self.trees = []
        n = len(y)
        all_idx = np.arange(n)
        for ss in seeds:
            rng = np.random.default_rng(ss)
            boot = rng.integers(0, n, size=n)
            self.trees.append(
                _build_tree(X, y, all_idx[boot], 0, rng, self.config.max_depth, n_sub)
            )
        return self

    def predict(self, X: np.ndarray) -> np.ndarray:
        if not self.trees:
            raise DegenerateDataset("forest is not fitted")
        acc = np.zeros(len(X))
        for tree in self.trees:
            acc += _tree_predict(tree, np.asarray(X, dtype=float))
        return np.clip(acc / len(self.trees), 0.0, 1.0)

    def to_dict(self) -> dict:
        return {
            "config": {
                "n_trees": self.config.n_trees,
                "max_depth": self.config.max_depth,
                "seed": self.config.seed,
            },
            "n_features": self.n_features,
            "trees": self.trees,
        }

    @classmethod
    def from_dict(cls, obj: dict) -> "ExposureForest":
        forest = cls(config=ForestConfig(**obj["config"]))
        forest.trees = obj["trees"]
        forest.n_features = obj["n_features"]
        return forest


# -----------------------------
# Cross-validation and feature verification
# -----------------------------


def _fold_indices(n: int, n_folds: int, seed: int) -> list[np.ndarray]:
    rng = np.random.default_rng(np.random.SeedSequence((seed, 0x5EED)))
    perm = rng.permutation(n)
    return [perm[i::n_folds] for i in range(n_folds)]


def cross_validate(
    X: np.ndarray, y: np.ndarray, config: ForestConfig, n_folds: int = 10
) -> dict[str, float]:
    """K-fold MAE/RMSE of the forest and of the predict-the-mean baseline."""
    n_folds = min(n_folds, len(y))
    if n_folds < 2:
        raise DegenerateDataset("need at least 2 rows for cross-validation")
    abs_err: list[float] = []
    sq_err: list[float] = []
    base_abs: list[float] = []
    for fold, test_idx in enumerate(_fold_indices(len(y), n_folds, config.seed)):
        train_mask = np.ones(len(y), dtype=bool)
        train_mask[test_idx] = False
        forest = ExposureForest(
            ForestConfig(config.n_trees, config.max_depth, seed=config.seed + 1000 * (fold + 1))
        ).fit(X[train_mask], y[train_mask])
        pred = forest.predict(X[test_idx])
        err = pred - y[test_idx]
        abs_err.extend(np.abs(err))
        sq_err.extend(err**2)
        base_abs.extend(np.abs(float(y[train_mask].mean()) - y[test_idx]))
    return {
        "mae": float(np.mean(abs_err)),
        "rmse": float(math.sqrt(np.mean(sq_err))),
        "baseline_mae": float(np.mean(base_abs)),
    }


def cross_validate_linear(
    X: np.ndarray, y: np.ndarray, seed: int = 0, n_folds: int = 10
) -> dict[str, float]:
    """K-fold MAE/RMSE of a least-squares linear model (clipped to [0,1]).

    Comparison baseline only; the forest is the product model.
    """
    n_folds = min(n_folds, len(y))
    if n_folds < 2:
        raise DegenerateDataset("need at least 2 rows for cross-validation")
    abs_err: list[float] = []
    sq_err: list[float] = []
    for test_idx in _fold_indices(len(y), n_folds, seed):
        train_mask = np.ones(len(y), dtype=bool)
        train_mask[test_idx] = False
        A = np.hstack([X[train_mask], np.ones((int(train_mask.sum()), 1))])
        coef, *_ = np.linalg.lstsq(A, y[train_mask], rcond=None)
        pred = np.clip(np.hstack([X[test_idx], np.ones((len(test_idx), 1))]) @ coef, 0.0, 1.0)
        err = pred - y[test_idx]
        abs_err.extend(np.abs(err))
        sq_err.extend(err**2)
    return {"mae": float(np.mean(abs_err)), "rmse": float(math.sqrt(np.mean(sq_err)))}


def compare_exposure_models(
    rows: list[tuple[ExposureFeatures, int]],
    config: ForestConfig | None = None,
    cv_folds: int = 10,
) -> dict[str, dict[str, float]]:
    """CV comparison of the forest against the linear baseline."""
    config = config or ForestConfig()
    X, y = encode_dataset(rows)
    rdf = cross_validate(X, y, config, n_folds=cv_folds)
    linear = cross_validate_linear(X, y, seed=config.seed, n_folds=cv_folds)
    return {
        "random_decision_forest": {"mae": rdf["mae"], "rmse": rdf["rmse"]},
        "linear_regression": linear,
    }


def train_rdf(
    rows: list[tuple[ExposureFeatures, int]],
    config: ForestConfig | None = None,
    cv_folds: int = 10,
) -> tuple[ExposureForest, dict[str, float]]:
    """Fit the exposure forest on all rows and report k-fold CV metrics."""
    config = config or ForestConfig()
    X, y = encode_dataset(rows)
    cv = cross_validate(X, y, config, n_folds=cv_folds)
    forest = ExposureForest(config).fit(X, y)
    return forest, cv


def leave_one_feature_out(
    rows: list[tuple[ExposureFeatures, int]],
    config: ForestConfig | None = None,
    cv_folds: int = 10,
) -> dict[str, dict[str, float]]:
    """CV metrics after dropping each feature, with deltas vs the full model."""
    config = config or ForestConfig()
    X, y = encode_dataset(rows)
    full = cross_validate(X, y, config, n_folds=cv_folds)
    table: dict[str, dict[str, float]] = {"full": {"mae": full["mae"], "rmse": full["rmse"]}}
    for name in FEATURE_NAMES:
        keep = [c for c in range(X.shape[1]) if c not in FEATURE_COLUMNS[name]]
        sub = cross_validate(X[:, keep], y, config, n_folds=cv_folds)
        table[name] = {
            "mae": sub["mae"],
            "rmse": sub["rmse"],
            "mae_delta": sub["mae"] - full["mae"],
            "rmse_delta": sub["rmse"] - full["rmse"],
        }
    return table


# -----------------------------
# Single-profile estimation and what-if analysis
# -----------------------------


def hide_fields(view: ProfileView, hide: set[str]) -> ProfileView:
    """Copy of a view with the given fields ('HT', 'WE', 'F') hidden."""
    attrs = dict(view.attrs)
    if "HT" in hide:
        attrs[HOMETOWN_KIND] = None
    if "WE" in hide:
        attrs[WORK_KIND] = None
    if "F" in hide:
        return ProfileView(view.user_id, attrs, [], [], 0, 0.0)
    return ProfileView(
        view.user_id,
        attrs,
        [(dict(a), c) for a, c in view.la_friends],
        [dict(a) for a in view.ln_friends],
        view.friend_count,
        view.pct_friends_with_attrs,
    )


def profile_features(
    view: ProfileView, model: PfliModel, clusters: ClusterSet, k_km: float
) -> ExposureFeatures:
    """Features for one profile, mirroring ``build_exposure_dataset``."""
    category = view_category(view)
    scores = model.score_profile(view, normalize=True)
    if scores.is_empty():
        cc = 0.0
    else:
        _, cc = select_cluster(scores, clusters)
    return ExposureFeatures(
        user_category=category,
        cluster_confidence=cc,
        pct_friends_with_attrs=view.pct_friends_with_attrs,
        error_distance_km=float(k_km),
    )


def estimate_exposure(
    view: ProfileView,
    model: PfliModel,
    clusters: ClusterSet,
    forest: ExposureForest,
    k_km: float,
) -> tuple[ExposureFeatures, float, int]:
    """(features, probability, risk level) for one profile at horizon K.

    A profile with nothing visible cannot be attacked through this model:
    it bypasses the forest with probability 0 / level 1.
    """
    features = profile_features(view, model, clusters, k_km)
    if features.user_category == NO_SIGNAL:
        return features, 0.0, 1
    p = float(forest.predict(encode_features(features)[None, :])[0])
    return features, p, risk_level(p)


def what_if(
    view: ProfileView,
    model: PfliModel,
    clusters: ClusterSet,
    forest: ExposureForest,
    k_km: float,
) -> list[dict]:
    """Re-estimate under every non-empty hide-subset of the visible fields,
    sorted by resulting probability (safest configuration first)."""
    visible = [
        name
        for name, shown in (
            ("HT", view.attrs.get(HOMETOWN_KIND) is not None),
            ("WE", view.attrs.get(WORK_KIND) is not None),
            ("F", view.friend_count > 0),
        )
        if shown
    ]
    out = []
    for r in range(1, len(visible) + 1):
        for subset in itertools.combinations(visible, r):
            _, p, level = estimate_exposure(
                hide_fields(view, set(subset)), model, clusters, forest, k_km
            )
            out.append({"hide": list(subset), "probability": p, "risk_level": level})
    out.sort(key=lambda e: (e["probability"], e["hide"]))
    return out
