"""Synthetic social-world generator with ground-truth cities.

Cities are scattered around a few far-apart "continent" centers so the
location clustering is non-trivial.  Every user gets a true city, a
hometown token (usually their own city's town) and a work token drawn
from organizations with an office in their city; a configurable fraction
of organizations spans several cities, so one work token can indicate
multiple locations.  Friendships are sampled per city pair with
probability decaying exponentially in distance, plus a same-organization
boost under the same decay.

``generate_world`` returns the fully-visible truth dataset and a masked
twin where each field is hidden independently per user; hiding a friend
list removes the user's edges from both endpoints so the masked graph
stays symmetric.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError
from .geo import haversine_km
from .graph import Location, SocialDataset, User, build_dataset

DEFAULT_VISIBILITY = {
    "current_city": 0.55,
    "hometown": 0.65,
    "work_education": 0.6,
    "friends": 0.8,
}


@dataclass
class WorldConfig:
    n_cities: int = 40
    n_orgs: int = 60
    n_users: int = 2000
    multi_city_org_fraction: float = 0.2
    friendship_distance_decay: float = 0.01  # per km
    base_friend_rate: float = 0.15
    org_boost_rate: float = 0.3
    # Work pins the city tightly while hometowns often lag a move, so the
    # work attribute is the dominant single disclosure.
    hometown_stay_prob: float = 0.45
    work_local_prob: float = 0.95
    n_continents: int = 4
    visibility_rates: dict[str, float] = field(default_factory=lambda: dict(DEFAULT_VISIBILITY))
    seed: int = 0

    def validate(self) -> None:
        if min(self.n_cities, self.n_orgs, self.n_users, self.n_continents) < 1:
            raise ConfigError("counts must be >= 1")
        probs = {
            "multi_city_org_fraction": self.multi_city_org_fraction,
            "base_friend_rate": self.base_friend_rate,
            "org_boost_rate": self.org_boost_rate,
            "hometown_stay_prob": self.hometown_stay_prob,
            "work_local_prob": self.work_local_prob,
            **{f"visibility_rates[{k}]": v for k, v in self.visibility_rates.items()},
        }
        for name, v in probs.items():
            if not 0.0 <= v <= 1.0:
                raise ConfigError(f"{name} must be in [0, 1], got {v}")
        if self.friendship_distance_decay <= 0:
            raise ConfigError("friendship_distance_decay must be positive")
        unknown = set(self.visibility_rates) - set(DEFAULT_VISIBILITY)
        if unknown:
            raise ConfigError(f"unknown visibility fields: {sorted(unknown)}")

    @classmethod
    def ci_preset(cls, seed: int = 0) -> "WorldConfig":
        return cls(seed=seed)

    @classmethod
    def nightly_preset(cls, seed: int = 0) -> "WorldConfig":
        """Larger world for nightly runs (10k users)."""
        return cls(n_cities=120, n_orgs=200, n_users=10_000, seed=seed)


def _continent_centers(rng: np.random.Generator, n: int) -> list[tuple[float, float]]:
    centers: list[tuple[float, float]] = []
    attempts = 0
    while len(centers) < n and attempts < 10_000:
        attempts += 1
        cand = (float(rng.uniform(-45, 55)), float(rng.uniform(-150, 150)))
        if all(haversine_km(cand, c) >= 2500.0 for c in centers):
            centers.append(cand)
    while len(centers) < n:  # give up on separation for extreme n
        centers.append((float(rng.uniform(-45, 55)), float(rng.uniform(-150, 150))))
    return centers


def _sample_pairs(
    rng: np.random.Generator, n_pairs: int, prob: float, decode
) -> list[tuple[int, int]]:
    """Draw Binomial(n_pairs, prob) distinct pair indices and decode them."""
    if n_pairs <= 0 or prob <= 0.0:
        return []
    count = int(rng.binomial(n_pairs, min(prob, 1.0)))
    if count == 0:
        return []
    chosen = rng.choice(n_pairs, size=count, replace=False)
    return [decode(int(i)) for i in sorted(chosen)]


def _triangle_decode(idx: int, n: int) -> tuple[int, int]:
    """Index -> (i, j) with i < j over the n*(n-1)/2 unordered pairs."""
    i = 0
    remaining = idx
    row = n - 1
    while remaining >= row:
        remaining -= row
        i += 1
        row -= 1
    return i, i + 1 + remaining


def generate_world(cfg: WorldConfig) -> tuple[SocialDataset, SocialDataset]:
    """Build (truth dataset, visibility-masked dataset); deterministic per seed."""
    cfg.validate()
    rng = np.random.default_rng(cfg.seed)

    centers = _continent_centers(rng, cfg.n_continents)
    cities: list[Location] = []
    for i in range(cfg.n_cities):
        base = centers[i % len(centers)]
        lat = min(85.0, max(-85.0, base[0] + float(rng.normal(0, 2.0))))
        lon = min(179.0, max(-179.0, base[1] + float(rng.normal(0, 2.0))))
        cities.append(Location(f"c{i:03d}", lat, lon))
    popularity = rng.dirichlet(np.full(cfg.n_cities, 2.0))

    # Organizations and their office cities.
    offices: list[list[int]] = []
    for _ in range(cfg.n_orgs):
        if cfg.n_cities > 1 and rng.uniform() < cfg.multi_city_org_fraction:
            k = int(rng.integers(2, min(4, cfg.n_cities) + 1))
        else:
            k = 1
        offices.append(sorted(int(c) for c in rng.choice(cfg.n_cities, size=k, replace=False)))
    orgs_by_city: dict[int, list[int]] = {}
    for j, cits in enumerate(offices):
        for c in cits:
            orgs_by_city.setdefault(c, []).append(j)

    # Users: true city, hometown token, work token.
    city_of = [int(c) for c in rng.choice(cfg.n_cities, size=cfg.n_users, p=popularity)]
    hometown_of: list[str] = []
    work_of: list[str] = []
    for i in range(cfg.n_users):
        c = city_of[i]
        home_city = c if rng.uniform() < cfg.hometown_stay_prob else int(
            rng.choice(cfg.n_cities, p=popularity)
        )
        hometown_of.append(f"town_{home_city:03d}")
        local = orgs_by_city.get(c, [])
        if local and rng.uniform() < cfg.work_local_prob:
            org = int(local[rng.integers(0, len(local))])
        else:
            org = int(rng.integers(0, cfg.n_orgs))
        work_of.append(f"org_{org:03d}")

    users_by_city: dict[int, list[int]] = {}
    for i, c in enumerate(city_of):
        users_by_city.setdefault(c, []).append(i)

    city_km = {
        (a, b): haversine_km((cities[a].lat, cities[a].lon), (cities[b].lat, cities[b].lon))
        for a in range(cfg.n_cities)
        for b in range(a, cfg.n_cities)
    }

    def decayed(rate: float, a: int, b: int) -> float:
        d = city_km[(a, b) if a <= b else (b, a)]
        x = -cfg.friendship_distance_decay * d
        return rate * (math.exp(x) if x > -700 else 0.0)

    edges: set[tuple[int, int]] = set()

    def add_group_pairs(group_a: list[int], group_b: list[int] | None, prob: float) -> None:
        if group_b is None:  # pairs within one group
            n = len(group_a)
            for i, j in _sample_pairs(rng, n * (n - 1) // 2, prob, lambda x: _triangle_decode(x, n)):
                edges.add((group_a[i], group_a[j]) if group_a[i] < group_a[j] else (group_a[j], group_a[i]))
        else:
            nb = len(group_b)
            for i, j in _sample_pairs(rng, len(group_a) * nb, prob, lambda x: divmod(x, nb)):
                u, v = group_a[i], group_b[j]
                if u != v:
                    edges.add((u, v) if u < v else (v, u))

    for a in sorted(users_by_city):
        for b in sorted(users_by_city):
            if b < a:
                continue
            p = decayed(cfg.base_friend_rate, a, b)
            if a == b:
                add_group_pairs(users_by_city[a], None, p)
            else:
                add_group_pairs(users_by_city[a], users_by_city[b], p)

    # Same-organization boost, still distance-decayed.
    members_by_org: dict[int, list[int]] = {}
    for i in range(cfg.n_users):
        members_by_org.setdefault(int(work_of[i][4:]), []).append(i)
    for j in sorted(members_by_org):
        by_city: dict[int, list[int]] = {}
        for i in members_by_org[j]:
            by_city.setdefault(city_of[i], []).append(i)
        cits = sorted(by_city)
        for x, a in enumerate(cits):
            add_group_pairs(by_city[a], None, decayed(cfg.org_boost_rate, a, a))
            for b in cits[x + 1 :]:
                add_group_pairs(by_city[a], by_city[b], decayed(cfg.org_boost_rate, a, b))

    friends: dict[int, set[str]] = {i: set() for i in range(cfg.n_users)}
    width = max(5, len(str(cfg.n_users - 1)))
    uid = [f"u{i:0{width}d}" for i in range(cfg.n_users)]
    for a, b in edges:
        friends[a].add(uid[b])
        friends[b].add(uid[a])

    truth_users = [
        User(
            uid[i],
            cities[city_of[i]].id,
            {"hometown": hometown_of[i], "work_education": work_of[i]},
            set(friends[i]),
        )
        for i in range(cfg.n_users)
    ]
    truth = build_dataset(list(cities), truth_users)

    # Masked twin: independent per-user visibility draws in a fixed order.
    vis = cfg.visibility_rates
    hidden_friends: set[int] = set()
    masked_users = []
    for i in range(cfg.n_users):
        draws = rng.uniform(size=4)
        show_city = draws[0] < vis["current_city"]
        show_home = draws[1] < vis["hometown"]
        show_work = draws[2] < vis["work_education"]
        if draws[3] >= vis["friends"]:
            hidden_friends.add(i)
        masked_users.append(
            User(
                uid[i],
                cities[city_of[i]].id if show_city else None,
                {
                    "hometown": hometown_of[i] if show_home else None,
                    "work_education": work_of[i] if show_work else None,
                },
                set(),
            )
        )
    hidden_ids = {uid[i] for i in hidden_friends}
    for i in range(cfg.n_users):
        if i in hidden_friends:
            continue
        masked_users[i].friends = {f for f in friends[i] if f not in hidden_ids}
    masked = build_dataset(list(cities), masked_users)
    return truth, masked
