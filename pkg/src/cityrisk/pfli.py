"""Probabilistic location-indication models and their parameter training.

A user's location evidence combines three additive channels:

* profile: indication-matrix columns of the user's own attribute tokens;
* LA-friends: mass at each city-exposing friend's stated city, weighted
  by the attribute-pair location similarity of the friendship;
* LN-friends: the profile channel of city-hiding friends, scaled down by
  a small regulator.

With per-kind weights mu (profile), nu (LA-friends) and alpha inside the
regulator term, the combined score of user u at location l is

    p(u, l) = sum_k [ mu_k sigma_k(u,l) + nu_k delta_k(u,l)
                      + lambda_alpha alpha_k eta_k(u,l) ]

where sigma is the user's own indication entry, delta the similarity-
weighted count of LA-friends stating l, and eta the summed indication of
LN-friends.  Scoring precomputes the profile + LN mass as one sparse
vector and then adds LA-friend mass only at LA-friend cities, which is
equivalent to the full double loop but touches only supported locations.

mu/nu are fitted jointly by logistic regression on (close, far) location
labels; alpha is fitted the same way on profile-only features.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateTrainingSet, NonConvergence
from .geo import haversine_km
from .graph import SocialDataset, User
from .indication import IndicationMatrix, SimilarityMatrix

log = logging.getLogger(__name__)


@dataclass
class PfliWeights:
    mu: dict[str, float]
    nu: dict[str, float]
    alpha: dict[str, float]
    lambda_alpha: float
    bias: float = 0.0  # intercept of the logistic fit; not used in scoring


@dataclass
class LocationScores:
    """Sparse non-negative scores over location ids for one user."""

    user_id: str | None
    scores: dict[str, float]
    normalized: bool = False

    def is_empty(self) -> bool:
        return not self.scores

    def normalize(self) -> "LocationScores":
        total = sum(self.scores.values())
        if total <= 0.0:
            return LocationScores(self.user_id, {}, normalized=True)
        return LocationScores(
            self.user_id, {k: v / total for k, v in self.scores.items()}, normalized=True
        )


@dataclass
class ProfileView:
    """The self-exposed information scoring needs, independent of where it
    came from (a dataset user or a submitted profile)."""

    user_id: str | None
    attrs: dict[str, str | None]
    la_friends: list[tuple[dict[str, str | None], str]]  # (attributes, stated city)
    ln_friends: list[dict[str, str | None]]
    friend_count: int = 0
    pct_friends_with_attrs: float = 0.0


def user_view(ds: SocialDataset, user_id: str) -> ProfileView:
    u = ds.user(user_id)
    la, ln = [], []
    with_attrs = 0
    for fid in sorted(u.friends):
        v = ds.users[fid]
        if any(tok is not None for tok in v.attributes.values()):
            with_attrs += 1
        if v.current_city is not None:
            la.append((v.attributes, v.current_city))
        else:
            ln.append(v.attributes)
    n = len(u.friends)
    return ProfileView(
        user_id=u.id,
        attrs=u.attributes,
        la_friends=la,
        ln_friends=ln,
        friend_count=n,
        pct_friends_with_attrs=with_attrs / n if n else 0.0,
    )


# -----------------------------
# Scoring channels and the combined model
# -----------------------------


def _add_column(acc: dict[str, float], column: dict[str, float], weight: float) -> None:
    if weight == 0.0:
        return
    for loc, p in column.items():
        acc[loc] = acc.get(loc, 0.0) + weight * p


def _profile_mass(
    attrs: dict[str, str | None],
    mats: dict[str, IndicationMatrix],
    weights: dict[str, float],
) -> dict[str, float]:
    acc: dict[str, float] = {}
    for kind, mat in mats.items():
        _add_column(acc, mat.lookup(attrs.get(kind)), weights.get(kind, 0.0))
    return acc


def pli_scores(
    u: User, mats: dict[str, IndicationMatrix], weights: dict[str, float]
) -> LocationScores:
    """Profile-only scores: weighted sum of the user's indication columns.

    Hidden and unseen tokens contribute nothing; an all-hidden profile
    yields empty scores.
    """
    return LocationScores(u.id, _profile_mass(u.attributes, mats, weights))


def la_fli_scores(
    u: User,
    ds: SocialDataset,
    sims: dict[str, SimilarityMatrix],
    weights: dict[str, float],
) -> LocationScores:
    """LA-friend scores: each city-exposing friend v adds
    sum_k weight_k * w_k(u, v) at v's stated city."""
    acc: dict[str, float] = {}
    for fid in sorted(u.friends):
        v = ds.users[fid]
        if v.current_city is None:
            continue
        w = sum(
            weights.get(kind, 0.0) * sims[kind].lookup(u.attributes.get(kind), v.attributes.get(kind))
            for kind in sims
        )
        if w != 0.0:
            acc[v.current_city] = acc.get(v.current_city, 0.0) + w
    return LocationScores(u.id, acc)


def ln_fli_scores(
    u: User,
    ds: SocialDataset,
    mats: dict[str, IndicationMatrix],
    alpha: dict[str, float],
) -> LocationScores:
    """LN-friend scores: sum of the profile-only scores of city-hiding friends."""
    acc: dict[str, float] = {}
    for fid in sorted(u.friends):
        v = ds.users[fid]
        if v.current_city is not None:
            continue
        for loc, p in _profile_mass(v.attributes, mats, alpha).items():
            acc[loc] = acc.get(loc, 0.0) + p
    return LocationScores(u.id, acc)


def score_view(
    view: ProfileView,
    mats: dict[str, IndicationMatrix],
    sims: dict[str, SimilarityMatrix],
    weights: PfliWeights,
    normalize: bool = True,
) -> LocationScores:
    """Combined profile + friends score for any profile view.

    Schedule: profile and LN-friend mass are accumulated first as one
    sparse vector, then LA-friend mass lands only at LA-friend cities.
    """
    acc = _profile_mass(view.attrs, mats, weights.mu)
    if view.ln_friends and weights.lambda_alpha != 0.0:
        for attrs in view.ln_friends:
            for loc, p in _profile_mass(attrs, mats, weights.alpha).items():
                acc[loc] = acc.get(loc, 0.0) + weights.lambda_alpha * p
    for attrs_v, city in view.la_friends:
        w = sum(
            weights.nu.get(kind, 0.0) * sims[kind].lookup(view.attrs.get(kind), attrs_v.get(kind))
            for kind in sims
        )
        if w != 0.0:
            acc[city] = acc.get(city, 0.0) + w
    acc = {loc: v for loc, v in acc.items() if v != 0.0}
    scores = LocationScores(view.user_id, acc)
    return scores.normalize() if normalize else scores


def pfli_scores(
    u: User,
    ds: SocialDataset,
    mats: dict[str, IndicationMatrix],
    sims: dict[str, SimilarityMatrix],
    weights: PfliWeights,
    normalize: bool = True,
) -> LocationScores:
    """Combined score of a dataset user (see module docstring for the form)."""
    return score_view(user_view(ds, u.id), mats, sims, weights, normalize=normalize)


# -----------------------------
# Training data (close/far location labels)
# -----------------------------


@dataclass
class TrainingExample:
    label: int
    features: tuple[float, ...]


def _delta_vector(
    view: ProfileView, sims: dict[str, SimilarityMatrix], kind: str
) -> dict[str, float]:
    """delta_k(u, l): similarity-weighted count of LA-friends stating l."""
    acc: dict[str, float] = {}
    for attrs_v, city in view.la_friends:
        w = sims[kind].lookup(view.attrs.get(kind), attrs_v.get(kind))
        if w != 0.0:
            acc[city] = acc.get(city, 0.0) + w
    return acc


def _make_examples(
    ds: SocialDataset,
    mats: dict[str, IndicationMatrix],
    sims: dict[str, SimilarityMatrix],
    close_threshold_km: float,
    include_delta: bool,
) -> list[TrainingExample]:
    kinds = list(ds.kinds)
    examples: list[TrainingExample] = []
    for uid in sorted(ds.users):
        u = ds.users[uid]
        if u.current_city is None:
            continue
        view = user_view(ds, uid)
        sigma = {k: mats[k].lookup(u.attributes.get(k)) for k in kinds}
        delta = {k: _delta_vector(view, sims, k) for k in kinds} if include_delta else {}
        support: set[str] = set()
        for k in kinds:
            support.update(sigma[k])
            if include_delta:
                support.update(delta[k])
        truth = ds.location(u.current_city)
        for loc_id in sorted(support):
            feats = [sigma[k].get(loc_id, 0.0) for k in kinds]
            if include_delta:
                feats += [delta[k].get(loc_id, 0.0) for k in kinds]
            if sum(feats) <= 0.0:
                continue
            loc = ds.location(loc_id)
            label = int(haversine_km((loc.lat, loc.lon), (truth.lat, truth.lon)) <= close_threshold_km)
            examples.append(TrainingExample(label=label, features=tuple(feats)))
    labels = {e.label for e in examples}
    if labels != {0, 1}:
        raise DegenerateTrainingSet(f"labels present: {sorted(labels)}")
    return examples


def make_training_examples(
    ds: SocialDataset,
    mats: dict[str, IndicationMatrix],
    sims: dict[str, SimilarityMatrix],
    close_threshold_km: float = 20.0,
) -> list[TrainingExample]:
    """One example per (LA-user, supported location) pair.

    Features are [sigma_1..sigma_m, delta_1..delta_m]; the label marks the
    location as close (within ``close_threshold_km`` of the user's stated
    city) or far.  Pairs with zero total feature mass are skipped.
    """
    return _make_examples(ds, mats, sims, close_threshold_km, include_delta=True)


def subsample_negatives(
    examples: list[TrainingExample], max_ratio: float, seed: int
) -> list[TrainingExample]:
    """Cap label-0 examples at ``max_ratio`` times the label-1 count."""
    pos = [e for e in examples if e.label == 1]
    neg = [e for e in examples if e.label == 0]
    cap = int(max_ratio * len(pos))
    if len(neg) <= cap:
        return examples
    rng = np.random.default_rng(seed)
    keep = rng.choice(len(neg), size=cap, replace=False)
    return pos + [neg[i] for i in sorted(keep)]


# -----------------------------
# Logistic regression (sum log-likelihood, L2 on weights)
# -----------------------------


def logistic_objective(X: np.ndarray, y: np.ndarray, w: np.ndarray, b: float, l2: float) -> float:
    z = X @ w + b
    return float(np.sum(y * z - np.logaddexp(0.0, z)) - 0.5 * l2 * np.dot(w, w))


def logistic_gradient(
    X: np.ndarray, y: np.ndarray, w: np.ndarray, b: float, l2: float
) -> tuple[np.ndarray, float]:
    p = 1.0 / (1.0 + np.exp(-(X @ w + b)))
    return X.T @ (y - p) - l2 * w, float(np.sum(y - p))


def train_logistic(
    examples: list[TrainingExample],
    l2: float = 1e-4,
    tol: float = 1e-6,
    max_epochs: int = 10_000,
    seed: int = 0,
    require_convergence: bool = False,
) -> tuple[np.ndarray, float]:
    """Maximize the penalized Bernoulli log-likelihood by gradient ascent
    with backtracking line search.

    Stops when the gradient infinity-norm drops below ``tol``, the line
    search can no longer improve the objective, or ``max_epochs`` passes.
    With ``require_convergence`` the tolerance is mandatory and missing it
    raises ``NonConvergence``.
    """
    labels = {e.label for e in examples}
    if labels != {0, 1}:
        raise DegenerateTrainingSet(f"labels present: {sorted(labels)}")
    X = np.array([e.features for e in examples], dtype=float)
    y = np.array([e.label for e in examples], dtype=float)
    w = np.zeros(X.shape[1])
    b = 0.0
    # Spectral bound on the Hessian (bias handled as an implicit 1-column):
    # steps of 1/L are monotone without any objective check.
    lipschitz = 0.25 * (float((X * X).sum()) + len(y)) + l2
    fixed_step = 1.0 / lipschitz
    step = fixed_step
    line_search = True
    obj = logistic_objective(X, y, w, b, l2)
    grad_norm = np.inf
    for _ in range(max_epochs):
        gw, gb = logistic_gradient(X, y, w, b, l2)
        grad_norm = max(float(np.abs(gw).max(initial=0.0)), abs(gb))
        if grad_norm < tol:
            return w, b
        if line_search:
            gsq = float(np.dot(gw, gw) + gb * gb)
            accepted = False
            while step > 1e-18:
                w2 = w + step * gw
                b2 = b + step * gb
                obj2 = logistic_objective(X, y, w2, b2, l2)
                # Strict improvement required: at float resolution the
                # Armijo term vanishes and equality would accept
                # zero-progress oscillation.
                if obj2 > obj and obj2 >= obj + 1e-4 * step * gsq:
                    w, b, obj = w2, b2, obj2
                    step *= 2.0
                    accepted = True
                    break
                step *= 0.5
            if accepted:
                continue
            # Objective improvements fell below float resolution; keep
            # polishing with plain 1/L gradient steps.
            line_search = False
        w = w + fixed_step * gw
        b = b + fixed_step * gb
    if require_convergence and grad_norm >= tol:
        raise NonConvergence(grad_norm)
    return w, b


# -----------------------------
# Full model fit
# -----------------------------


@dataclass
class PfliConfig:
    close_threshold_km: float = 20.0
    l2: float = 1e-4
    tol: float = 1e-6
    max_epochs: int = 10_000
    neg_ratio: float = 10.0
    regulator_scale: float = 0.1
    seed: int = 0


def _clamped(kinds, values, name: str) -> dict[str, float]:
    out = {}
    for kind, v in zip(kinds, values):
        if v < 0.0:
            log.warning("clamping negative %s[%s] = %.4g to 0", name, kind, v)
            v = 0.0
        out[kind] = float(v)
    return out


def fit_pfli(
    ds: SocialDataset,
    mats: dict[str, IndicationMatrix],
    sims: dict[str, SimilarityMatrix],
    config: PfliConfig | None = None,
) -> PfliWeights:
    """Train all model weights on the dataset's LA-users.

    alpha comes from a profile-only fit, mu/nu from a joint fit over
    profile and LA-friend features; the LN regulator is pinned to a small
    fraction of the weakest friend weight.  Learned weights are clamped
    non-negative (scores accumulate probability mass).
    """
    cfg = config or PfliConfig()
    kinds = list(ds.kinds)

    prof_examples = _make_examples(ds, mats, sims, cfg.close_threshold_km, include_delta=False)
    prof_examples = subsample_negatives(prof_examples, cfg.neg_ratio, cfg.seed)
    a_raw, _ = train_logistic(prof_examples, cfg.l2, cfg.tol, cfg.max_epochs, cfg.seed)
    alpha = _clamped(kinds, a_raw, "alpha")

    examples = make_training_examples(ds, mats, sims, cfg.close_threshold_km)
    examples = subsample_negatives(examples, cfg.neg_ratio, cfg.seed)
    mn_raw, bias = train_logistic(examples, cfg.l2, cfg.tol, cfg.max_epochs, cfg.seed)
    mu = _clamped(kinds, mn_raw[: len(kinds)], "mu")
    nu = _clamped(kinds, mn_raw[len(kinds) :], "nu")

    lambda_alpha = cfg.regulator_scale * min(nu.values())
    return PfliWeights(mu=mu, nu=nu, alpha=alpha, lambda_alpha=lambda_alpha, bias=float(bias))
