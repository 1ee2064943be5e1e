"""Metrics and the benchmark harness.

Error distance is the km gap between predicted and true coordinates.
AED@p% averages the p% smallest errors; this family of approaches
concentrates its large errors in a small user tail, so the mean grows
with p.  ACC@K is the share of users predicted strictly within K km;
abstentions count against ACC@K but are excluded from AED and reported
as coverage.

The harness splits city-exposing users into train/eval, masks the eval
users' cities, trains the full model on the masked dataset, and scores
every approach on two user sets: eval users with at least one LA-friend,
and all eval users.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import Abstained, DegenerateTrainingSet, EmptyInput
from .geo import ClusterSet, cut_tree, haversine_km, upgma_cluster
from .graph import Location, SocialDataset, User, build_dataset, partition_users
from .indication import build_matrices
from .pfli import PfliConfig, fit_pfli, user_view
from .predictor import (
    COMBINED_SWITCH_KM,
    PfliModel,
    Prediction,
    baseline_freq,
    baseline_freq_plus,
    baseline_knn,
    location_coords,
    predict_nocluster,
    predict_view,
    select_cluster,
    select_location,
)

DEFAULT_K_GRID = (1, 5, 10, 20, 40, 60, 80, 100, 200, 500, 1000)
AED_PERCENTS = (60, 80, 100)

PFLI_APPROACHES = ("pfli_prob", "pfli_cent", "pfli_dist", "pfli_noclst", "pfli_cmb")
BASELINES = ("base_freq", "base_freq_plus", "base_knn")
APPROACHES = PFLI_APPROACHES + BASELINES

USER_SET_LA_FRIENDS = "users_with_la_friends"
USER_SET_OVERALL = "overall_users"


def error_distance(pred: Prediction, truth: Location) -> float:
    """Km between the predicted coordinate and the true location."""
    if pred.abstained or pred.coordinate is None:
        raise Abstained(pred.user_id or "<anonymous>")
    return haversine_km(pred.coordinate, (truth.lat, truth.lon))


def aed_at_percent(errors: list[float], p: int) -> float:
    """Mean error over the p% of users with the smallest error distance."""
    if not errors:
        raise EmptyInput("aed_at_percent needs at least one error")
    if not 0 < p <= 100:
        raise ValueError(f"p must be in (0, 100], got {p}")
    ranked = sorted(errors)
    take = max(1, math.ceil(p / 100 * len(ranked)))
    return sum(ranked[:take]) / take


def acc_at_k(errors: list[float], n_abstained: int, k_km: float) -> float:
    """Share of users with error strictly below ``k_km``; abstentions count
    in the denominator as incorrect."""
    total = len(errors) + n_abstained
    if total == 0:
        return 0.0
    return sum(1 for e in errors if e < k_km) / total


# -----------------------------
# Benchmark
# -----------------------------


@dataclass
class BenchmarkConfig:
    seed: int = 0
    train_fraction: float = 0.8
    threshold_km: float = 100.0
    close_threshold_km: float = 20.0
    error_distance_km: float = 20.0
    k_grid: tuple[int, ...] = DEFAULT_K_GRID
    knn_k: int = 10
    l2: float = 1e-4
    max_epochs: int = 10_000
    regulator_scale: float = 0.1
    neg_ratio: float = 10.0

    def pfli_config(self) -> PfliConfig:
        return PfliConfig(
            close_threshold_km=self.close_threshold_km,
            l2=self.l2,
            max_epochs=self.max_epochs,
            neg_ratio=self.neg_ratio,
            regulator_scale=self.regulator_scale,
            seed=self.seed,
        )


@dataclass
class ApproachResult:
    n_users: int
    n_abstained: int
    aed: dict[int, float | None]
    acc: dict[int, float]

    @property
    def coverage(self) -> float:
        return 1.0 - self.n_abstained / self.n_users if self.n_users else 0.0

    def to_dict(self) -> dict:
        return {
            "n_users": self.n_users,
            "n_abstained": self.n_abstained,
            "coverage": self.coverage,
            "aed": {str(p): v for p, v in self.aed.items()},
            "acc": {str(k): v for k, v in self.acc.items()},
        }


@dataclass
class BenchmarkReport:
    seed: int
    n_train: int
    n_eval: int
    n_locations: int
    threshold_km: float
    k_grid: tuple[int, ...]
    user_sets: dict[str, dict[str, ApproachResult]] = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "seed": self.seed,
            "n_train": self.n_train,
            "n_eval": self.n_eval,
            "n_locations": self.n_locations,
            "threshold_km": self.threshold_km,
            "k_grid": list(self.k_grid),
            "user_sets": {
                us: {a: r.to_dict() for a, r in table.items()}
                for us, table in self.user_sets.items()
            },
        }


def split_la_users(
    ds: SocialDataset, seed: int, train_fraction: float
) -> tuple[list[str], list[str]]:
    """Deterministic shuffle-split of the LA-users into (train, eval)."""
    la, _ = partition_users(ds)
    ordered = sorted(la)
    if len(ordered) < 2:
        raise DegenerateTrainingSet("need at least 2 LA-users to split")
    rng = np.random.default_rng(seed)
    perm = rng.permutation(len(ordered))
    cut = max(1, min(len(ordered) - 1, int(round(train_fraction * len(ordered)))))
    train = [ordered[i] for i in perm[:cut]]
    evaluation = [ordered[i] for i in perm[cut:]]
    return sorted(train), sorted(evaluation)


def mask_users(ds: SocialDataset, hide_city: set[str]) -> SocialDataset:
    """Copy of the dataset with the given users' current city hidden."""
    users = [
        User(
            u.id,
            None if u.id in hide_city else u.current_city,
            dict(u.attributes),
            set(u.friends),
        )
        for u in ds.users.values()
    ]
    return build_dataset(list(ds.locations), users, ds.kinds)


def train_model(ds: SocialDataset, config: BenchmarkConfig) -> PfliModel:
    """Matrices plus fitted weights over the dataset's LA-users."""
    mats, sims = build_matrices(ds)
    weights = fit_pfli(ds, mats, sims, config.pfli_config())
    return PfliModel(kinds=ds.kinds, indication=mats, similarity=sims, weights=weights)


@dataclass
class EvalTrace:
    """Per-user per-approach outcome: error in km, or None for abstention."""

    user_ids: list[str]
    has_la_friend: dict[str, bool]
    errors: dict[str, dict[str, float | None]]  # approach -> user -> error


def evaluate_users(
    ds: SocialDataset,
    masked: SocialDataset,
    eval_ids: list[str],
    model: PfliModel,
    clusters: ClusterSet,
    config: BenchmarkConfig,
) -> EvalTrace:
    coords = location_coords(ds)
    trace = EvalTrace(
        user_ids=list(eval_ids),
        has_la_friend={},
        errors={a: {} for a in APPROACHES if a != "pfli_cmb"},
    )
    for uid in eval_ids:
        truth = ds.location(ds.users[uid].current_city)
        view = user_view(masked, uid)
        trace.has_la_friend[uid] = bool(view.la_friends)

        scores = model.score_profile(view, normalize=True)
        if scores.is_empty():
            for a in ("pfli_prob", "pfli_cent", "pfli_dist", "pfli_noclst"):
                trace.errors[a][uid] = None
        else:
            idx, _ = select_cluster(scores, clusters)
            members = clusters.clusters[idx]
            for a, method in (
                ("pfli_prob", "prob"),
                ("pfli_cent", "centroid"),
                ("pfli_dist", "mindist"),
            ):
                coord = select_location(scores, members, method, coords)
                trace.errors[a][uid] = haversine_km(coord, (truth.lat, truth.lon))
            nc = predict_nocluster(view, model, coords)
            trace.errors["pfli_noclst"][uid] = haversine_km(nc.coordinate, (truth.lat, truth.lon))

        for a, pred in (
            ("base_freq", baseline_freq(uid, masked)),
            ("base_freq_plus", baseline_freq_plus(uid, masked)),
            ("base_knn", baseline_knn(uid, masked, k=config.knn_k)),
        ):
            trace.errors[a][uid] = None if pred.abstained else error_distance(pred, truth)
    return trace


def _result_for(errors: dict[str, float | None], ids: list[str], k_grid) -> ApproachResult:
    observed = [errors[u] for u in ids if errors[u] is not None]
    n_abst = sum(1 for u in ids if errors[u] is None)
    aed = {
        p: (aed_at_percent(observed, p) if observed else None) for p in AED_PERCENTS
    }
    acc = {k: acc_at_k(observed, n_abst, k) for k in k_grid}
    return ApproachResult(n_users=len(ids), n_abstained=n_abst, aed=aed, acc=acc)


def _combined_result(
    prob: ApproachResult, cent: ApproachResult, config: BenchmarkConfig
) -> ApproachResult:
    """The combined strategy: probability selector below the 40 km switch,
    centroid at or above it.  AED is reported at the configured horizon."""
    primary = prob if config.error_distance_km < COMBINED_SWITCH_KM else cent
    acc = {
        k: (prob.acc[k] if k < COMBINED_SWITCH_KM else cent.acc[k]) for k in prob.acc
    }
    return ApproachResult(
        n_users=primary.n_users,
        n_abstained=primary.n_abstained,
        aed=dict(primary.aed),
        acc=acc,
    )


def run_benchmark(ds: SocialDataset, config: BenchmarkConfig | None = None) -> BenchmarkReport:
    """Train on a seeded LA-user split and score every approach on the
    masked eval users.  Deterministic given the config seed."""
    config = config or BenchmarkConfig()
    train_ids, eval_ids = split_la_users(ds, config.seed, config.train_fraction)
    masked = mask_users(ds, set(eval_ids))
    model = train_model(masked, config)
    clusters = cut_tree(upgma_cluster(ds.locations), config.threshold_km)
    trace = evaluate_users(ds, masked, eval_ids, model, clusters, config)

    report = BenchmarkReport(
        seed=config.seed,
        n_train=len(train_ids),
        n_eval=len(eval_ids),
        n_locations=len(ds.locations),
        threshold_km=config.threshold_km,
        k_grid=tuple(config.k_grid),
    )
    subsets = {
        USER_SET_LA_FRIENDS: [u for u in eval_ids if trace.has_la_friend[u]],
        USER_SET_OVERALL: list(eval_ids),
    }
    for set_name, ids in subsets.items():
        table = {}
        for a in APPROACHES:
            if a == "pfli_cmb":
                continue
            table[a] = _result_for(trace.errors[a], ids, config.k_grid)
        table["pfli_cmb"] = _combined_result(table["pfli_prob"], table["pfli_cent"], config)
        report.user_sets[set_name] = {a: table[a] for a in APPROACHES}
    return report
