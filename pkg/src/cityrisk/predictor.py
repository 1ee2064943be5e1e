"""Current-city prediction: cluster selection, location selection, baselines.

Prediction is two-step: pick the cluster holding the most probability
mass, then pick a coordinate inside it.  Three location selectors exist
(highest probability, probability-weighted centroid, center of minimum
distance); the combined strategy uses the probability selector below a
40 km error-distance horizon and the centroid at or above it.

All argmax ties break toward the lowest id for reproducibility.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import EmptyCluster, EmptyScores
from .geo import ClusterSet, haversine_km
from .graph import SocialDataset
from .indication import IndicationMatrix, SimilarityMatrix
from .pfli import LocationScores, PfliWeights, ProfileView, score_view, user_view

# The combined strategy switches selector at this pre-established error
# distance: strictly below it the probability selector wins.
COMBINED_SWITCH_KM = 40.0

SELECTOR_PROB = "prob"
SELECTOR_CENTROID = "centroid"
SELECTOR_MINDIST = "mindist"


@dataclass
class PfliModel:
    """Trained scoring state: matrices plus fitted weights."""

    kinds: tuple[str, ...]
    indication: dict[str, IndicationMatrix]
    similarity: dict[str, SimilarityMatrix]
    weights: PfliWeights

    def score_user(self, ds: SocialDataset, user_id: str, normalize: bool = True) -> LocationScores:
        return score_view(user_view(ds, user_id), self.indication, self.similarity, self.weights, normalize)

    def score_profile(self, view: ProfileView, normalize: bool = True) -> LocationScores:
        return score_view(view, self.indication, self.similarity, self.weights, normalize)


@dataclass
class Prediction:
    user_id: str | None
    abstained: bool
    coordinate: tuple[float, float] | None = None
    selected_cluster: int | None = None
    cluster_confidence: float | None = None
    selector: str | None = None

    def to_dict(self) -> dict:
        return {
            "user": self.user_id,
            "lat": None if self.coordinate is None else self.coordinate[0],
            "lon": None if self.coordinate is None else self.coordinate[1],
            "cluster": self.selected_cluster,
            "confidence": self.cluster_confidence,
            "selector": self.selector,
            "abstained": self.abstained,
        }


def select_cluster(scores: LocationScores, clusters: ClusterSet) -> tuple[int, float]:
    """Index and summed probability of the highest-probability cluster."""
    if scores.is_empty():
        raise EmptyScores(scores.user_id or "<anonymous>")
    index = clusters.index_of()
    sums = [0.0] * len(clusters.clusters)
    for loc, p in scores.scores.items():
        sums[index[loc]] += p
    best = max(range(len(sums)), key=sums.__getitem__)  # first max: lowest index
    return best, sums[best]


def select_location(
    scores: LocationScores,
    cluster: list[str],
    method: str,
    coords: dict[str, tuple[float, float]],
) -> tuple[float, float]:
    """Pick a coordinate inside ``cluster`` by the given selector.

    Scores are restricted to the cluster and renormalized; a cluster with
    no mass degrades to uniform weights (centroid/mindist) or the lowest
    id (prob).
    """
    if not cluster:
        raise EmptyCluster("cannot select from an empty cluster")
    members = sorted(cluster)
    mass = {m: scores.scores.get(m, 0.0) for m in members}
    total = sum(mass.values())
    if total > 0.0:
        weights = {m: v / total for m, v in mass.items()}
    else:
        weights = {m: 1.0 / len(members) for m in members}

    if method == SELECTOR_PROB:
        best = max(members, key=weights.__getitem__)  # first max: lowest id
        return coords[best]
    if method == SELECTOR_CENTROID:
        lat = sum(weights[m] * coords[m][0] for m in members)
        lon = sum(weights[m] * coords[m][1] for m in members)
        return (lat, lon)
    if method == SELECTOR_MINDIST:
        best = None
        for cand in members:
            cost = sum(weights[m] * haversine_km(coords[cand], coords[m]) for m in members)
            if best is None or cost < best[0] - 1e-12:
                best = (cost, cand)
        return coords[best[1]]
    raise ValueError(f"unknown selector {method!r}")


def predict_view(
    view: ProfileView,
    model: PfliModel,
    clusters: ClusterSet,
    coords: dict[str, tuple[float, float]],
    error_distance_km: float = 20.0,
    selector: str | None = None,
) -> Prediction:
    """Full prediction for a profile view; abstains on zero signal.

    ``selector`` overrides the combined strategy (used by the benchmark
    to evaluate each selector in isolation).
    """
    scores = model.score_profile(view, normalize=True)
    if scores.is_empty():
        return Prediction(user_id=view.user_id, abstained=True)
    idx, confidence = select_cluster(scores, clusters)
    if selector is None:
        selector = SELECTOR_PROB if error_distance_km < COMBINED_SWITCH_KM else SELECTOR_CENTROID
    coordinate = select_location(scores, clusters.clusters[idx], selector, coords)
    return Prediction(
        user_id=view.user_id,
        abstained=False,
        coordinate=coordinate,
        selected_cluster=idx,
        cluster_confidence=confidence,
        selector=selector,
    )


def predict(
    u: str,
    ds: SocialDataset,
    model: PfliModel,
    clusters: ClusterSet,
    error_distance_km: float = 20.0,
    selector: str | None = None,
) -> Prediction:
    coords = location_coords(ds)
    return predict_view(user_view(ds, u), model, clusters, coords, error_distance_km, selector)


def predict_nocluster(
    view: ProfileView, model: PfliModel, coords: dict[str, tuple[float, float]]
) -> Prediction:
    """Non-cluster variant: the highest-probability raw location."""
    scores = model.score_profile(view, normalize=True)
    if scores.is_empty():
        return Prediction(user_id=view.user_id, abstained=True)
    best = max(sorted(scores.scores), key=lambda lid: scores.scores[lid])
    return Prediction(
        user_id=view.user_id,
        abstained=False,
        coordinate=coords[best],
        selector="noclst",
    )


def location_coords(ds: SocialDataset) -> dict[str, tuple[float, float]]:
    return {loc.id: (loc.lat, loc.lon) for loc in ds.locations}


# -----------------------------
# Frequency-family baselines
# -----------------------------


def _la_friend_cities(ds: SocialDataset, user_id: str) -> list[str]:
    u = ds.user(user_id)
    return [
        ds.users[f].current_city
        for f in sorted(u.friends)
        if ds.users[f].current_city is not None
    ]


def _vote(counts: dict[str, float]) -> str:
    return max(sorted(counts), key=lambda c: counts[c])


def baseline_freq(u: str, ds: SocialDataset) -> Prediction:
    """Most frequent LA-friend city."""
    cities = _la_friend_cities(ds, u)
    if not cities:
        return Prediction(user_id=u, abstained=True, selector="freq")
    counts: dict[str, float] = {}
    for c in cities:
        counts[c] = counts.get(c, 0.0) + 1.0
    best = _vote(counts)
    loc = ds.location(best)
    return Prediction(user_id=u, abstained=False, coordinate=(loc.lat, loc.lon), selector="freq")


def baseline_freq_plus(u: str, ds: SocialDataset, neighborhood_km: float = 20.0) -> Prediction:
    """Frequency vote with neighborhood smoothing: a city also collects the
    votes of cities strictly closer than ``neighborhood_km``."""
    cities = _la_friend_cities(ds, u)
    if not cities:
        return Prediction(user_id=u, abstained=True, selector="freq+")
    counts: dict[str, float] = {}
    for c in cities:
        counts[c] = counts.get(c, 0.0) + 1.0
    coords = location_coords(ds)
    smoothed = {}
    for c in counts:
        smoothed[c] = sum(
            n for other, n in counts.items() if haversine_km(coords[c], coords[other]) < neighborhood_km
        )
    best = _vote(smoothed)
    loc = ds.location(best)
    return Prediction(user_id=u, abstained=False, coordinate=(loc.lat, loc.lon), selector="freq+")


def baseline_knn(u: str, ds: SocialDataset, k: int = 10) -> Prediction:
    """Frequency vote restricted to the k LA-friends sharing the most
    common friends with the user."""
    user = ds.user(u)
    ranked = sorted(
        (f for f in user.friends if ds.users[f].current_city is not None),
        key=lambda f: (-len(user.friends & ds.users[f].friends), f),
    )
    top = ranked[:k]
    if not top:
        return Prediction(user_id=u, abstained=True, selector="knn")
    counts: dict[str, float] = {}
    for f in top:
        c = ds.users[f].current_city
        counts[c] = counts.get(c, 0.0) + 1.0
    best = _vote(counts)
    loc = ds.location(best)
    return Prediction(user_id=u, abstained=False, coordinate=(loc.lat, loc.lon), selector="knn")
