"""Geodesic distance and average-linkage (UPGMA) clustering of locations.

Candidate locations are merged bottom-up: at every step the two clusters
with the smallest mean pairwise distance are joined, recording the merge
height in km.  Cutting the resulting tree at a distance threshold yields
the location clusters used by the predictor.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from .errors import EmptyInput
from .graph import Location

EARTH_RADIUS_KM = 6371.0


def haversine_km(a: tuple[float, float], b: tuple[float, float]) -> float:
    """Great-circle distance in km between two (lat, lon) pairs in degrees."""
    lat1, lon1, lat2, lon2 = map(math.radians, (*a, *b))
    dlat = lat2 - lat1
    dlon = lon2 - lon1
    h = math.sin(dlat / 2) ** 2 + math.cos(lat1) * math.cos(lat2) * math.sin(dlon / 2) ** 2
    return 2 * EARTH_RADIUS_KM * math.asin(min(1.0, math.sqrt(h)))


def pairwise_km(locs: list[Location]) -> np.ndarray:
    """Dense symmetric matrix of haversine distances, diagonal 0."""
    lat = np.radians([l.lat for l in locs])
    lon = np.radians([l.lon for l in locs])
    dlat = lat[:, None] - lat[None, :]
    dlon = lon[:, None] - lon[None, :]
    h = np.sin(dlat / 2) ** 2 + np.cos(lat)[:, None] * np.cos(lat)[None, :] * np.sin(dlon / 2) ** 2
    return 2 * EARTH_RADIUS_KM * np.arcsin(np.minimum(1.0, np.sqrt(h)))


@dataclass
class ClusterTree:
    """UPGMA dendrogram: |leaves|-1 merges of (left ids, right ids, height km).

    Members inside each side are sorted; the left side holds the smaller
    minimum id.  Merge heights are non-decreasing (average linkage is
    monotone), so replaying merges below a threshold reconstructs a cut.
    """

    leaves: list[str]
    merges: list[tuple[tuple[str, ...], tuple[str, ...], float]]


@dataclass
class ClusterSet:
    """A partition of the candidate locations produced by cutting the tree."""

    clusters: list[list[str]]
    threshold_km: float

    def index_of(self) -> dict[str, int]:
        """Map location id -> cluster index."""
        return {loc: i for i, members in enumerate(self.clusters) for loc in members}

    def to_json(self) -> str:
        return json.dumps(
            {"threshold_km": self.threshold_km, "clusters": self.clusters}, sort_keys=True
        )

    @classmethod
    def from_json(cls, text: str) -> "ClusterSet":
        obj = json.loads(text)
        return cls(clusters=[list(c) for c in obj["clusters"]], threshold_km=obj["threshold_km"])


def upgma_cluster(locs: list[Location]) -> ClusterTree:
    """Build the UPGMA tree over ``locs``.

    Linkage between clusters is the arithmetic mean of pairwise haversine
    distances, maintained incrementally:

        d(A+B, C) = (|A| d(A,C) + |B| d(B,C)) / (|A| + |B|)

    Ties on the closest pair are broken by the lexicographically smallest
    (min-member-id, min-member-id) pair, so the result is independent of
    input order.
    """
    if not locs:
        raise EmptyInput("upgma_cluster needs at least one location")
    order = sorted(range(len(locs)), key=lambda i: locs[i].id)
    ids = [locs[i].id for i in order]
    if len(set(ids)) != len(ids):
        raise ValueError("duplicate location ids")
    n = len(ids)
    tree = ClusterTree(leaves=list(ids), merges=[])
    if n == 1:
        return tree

    dist = pairwise_km([locs[i] for i in order])
    np.fill_diagonal(dist, np.inf)
    sizes = np.ones(n)
    members: list[tuple[str, ...]] = [(ids[i],) for i in range(n)]
    active = np.ones(n, dtype=bool)
    # Cluster key for tie-breaks: the smallest member id (== ids[i] while
    # clusters keep the index of their smallest-id member, enforced below).
    keys = list(ids)

    for _ in range(n - 1):
        sub = dist[np.ix_(active, active)]
        best = sub.min()
        idx = np.flatnonzero(active)
        cand = np.argwhere(sub <= best)
        pairs = []
        for r, c in cand:
            i, j = idx[r], idx[c]
            if i < j:
                a, b = (i, j) if keys[i] < keys[j] else (j, i)
                pairs.append(((keys[a], keys[b]), a, b))
        _, a, b = min(pairs)
        height = float(dist[a, b])
        tree.merges.append((members[a], members[b], height))

        # Merge b into a; a keeps the smaller key by construction above.
        new_sizes = sizes[a] + sizes[b]
        upd = (sizes[a] * dist[a, :] + sizes[b] * dist[b, :]) / new_sizes
        dist[a, :] = upd
        dist[:, a] = upd
        dist[a, a] = np.inf
        active[b] = False
        dist[b, :] = np.inf
        dist[:, b] = np.inf
        sizes[a] = new_sizes
        members[a] = tuple(sorted(members[a] + members[b]))
        members[b] = ()
    return tree


def cut_tree(tree: ClusterTree, threshold_km: float) -> ClusterSet:
    """Cut the tree: clusters are maximal subtrees merged strictly below
    ``threshold_km``.  Clusters come out sorted by their smallest member id.
    """
    parent = {leaf: leaf for leaf in tree.leaves}

    def find(x: str) -> str:
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for left, right, height in tree.merges:
        if height < threshold_km:
            ra, rb = find(left[0]), find(right[0])
            root = min(ra, rb)
            parent[ra] = root
            parent[rb] = root

    groups: dict[str, list[str]] = {}
    for leaf in tree.leaves:
        groups.setdefault(find(leaf), []).append(leaf)
    clusters = sorted((sorted(g) for g in groups.values()), key=lambda c: c[0])
    return ClusterSet(clusters=clusters, threshold_km=threshold_km)
