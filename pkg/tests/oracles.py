"""Independent reference implementations used to pin expected values.

Everything here is deliberately slow and direct: averages recomputed from
the raw pairwise matrix, double loops over every candidate location, and
exhaustive scans.  Tests compare the package against these, so nothing in
this module may import the code paths it checks beyond basic data types.
"""

from __future__ import annotations

import math

from cityrisk.geo import haversine_km
from cityrisk.graph import Location, SocialDataset


def brute_upgma(locs: list[Location]) -> list[tuple[tuple[str, ...], tuple[str, ...], float]]:
    """Quadratic-memory UPGMA: recompute every cluster-pair mean from the
    raw distance matrix at each step (no incremental linkage updates)."""
    ids = sorted(l.id for l in locs)
    coord = {l.id: (l.lat, l.lon) for l in locs}
    raw = {
        (a, b): haversine_km(coord[a], coord[b])
        for a in ids
        for b in ids
    }
    clusters: list[tuple[str, ...]] = [(i,) for i in ids]
    merges = []
    while len(clusters) > 1:
        best = None
        for i in range(len(clusters)):
            for j in range(i + 1, len(clusters)):
                a, b = clusters[i], clusters[j]
                if a[0] > b[0]:
                    a, b = b, a
                mean = sum(raw[(x, y)] for x in a for y in b) / (len(a) * len(b))
                key = (mean, a[0], b[0])
                if best is None or key < best[0]:
                    best = (key, a, b)
        key, a, b = best  # type: ignore[misc]
        height = key[0]
        merges.append((tuple(sorted(a)), tuple(sorted(b)), height))
        clusters = [c for c in clusters if c not in (a, b)]
        clusters.append(tuple(sorted(a + b)))
    return merges


def count_indication(ds: SocialDataset, kind: str, token: str) -> dict[str, float]:
    """Direct count of P(city | token) over LA-users."""
    holders = [
        u
        for u in ds.users.values()
        if u.current_city is not None and u.attributes.get(kind) == token
    ]
    if not holders:
        return {}
    out: dict[str, float] = {}
    for u in holders:
        out[u.current_city] = out.get(u.current_city, 0.0) + 1.0
    return {c: v / len(holders) for c, v in out.items()}


def count_similarity(ds: SocialDataset, kind: str) -> tuple[dict[tuple, float], float]:
    """Pair counts over unordered LA-LA friend pairs: returns (cells, global rate)."""
    seen = set()
    num: dict[tuple, int] = {}
    den: dict[tuple, int] = {}
    total = co = 0
    for uid, u in ds.users.items():
        if u.current_city is None:
            continue
        for fid in u.friends:
            v = ds.users[fid]
            if v.current_city is None or (fid, uid) in seen:
                continue
            seen.add((uid, fid))
            pair = tuple(sorted([u.attributes.get(kind), v.attributes.get(kind)], key=lambda t: (t is not None, t)))
            den[pair] = den.get(pair, 0) + 1
            total += 1
            if u.current_city == v.current_city:
                num[pair] = num.get(pair, 0) + 1
                co += 1
    cells = {p: num.get(p, 0) / d for p, d in den.items()}
    rate = co / total if total else 0.0
    return cells, rate


def naive_pfli(
    ds: SocialDataset,
    user_id: str,
    indication: dict[str, dict[str, dict[str, float]]],
    similarity: dict[str, dict[tuple, float]],
    sim_fallback: dict[str, float],
    mu: dict[str, float],
    nu: dict[str, float],
    alpha: dict[str, float],
    lambda_alpha: float,
) -> dict[str, float]:
    """Literal double loop over every candidate location and kind:

        p(u, l) = sum_k [ mu_k sigma_k(u,l) + nu_k delta_k(u,l)
                          + lambda_alpha alpha_k eta_k(u,l) ]
    """
    u = ds.users[user_id]
    la = [ds.users[f] for f in u.friends if ds.users[f].current_city is not None]
    ln = [ds.users[f] for f in u.friends if ds.users[f].current_city is None]

    def sigma(user, kind, loc_id) -> float:
        tok = user.attributes.get(kind)
        if tok is None:
            return 0.0
        return indication[kind].get(tok, {}).get(loc_id, 0.0)

    def w(kind, a, b) -> float:
        pair = tuple(sorted([a, b], key=lambda t: (t is not None, t)))
        return similarity[kind].get(pair, sim_fallback[kind])

    out = {}
    for loc in ds.locations:
        total = 0.0
        for kind in ds.kinds:
            s = sigma(u, kind, loc.id)
            delta = sum(
                w(kind, u.attributes.get(kind), v.attributes.get(kind))
                for v in la
                if v.current_city == loc.id
            )
            eta = sum(sigma(v, kind, loc.id) for v in ln)
            total += mu[kind] * s + nu[kind] * delta + lambda_alpha * alpha[kind] * eta
        if total != 0.0:
            out[loc.id] = total
    return out


def mindist_scan(
    members: list[str],
    probs: dict[str, float],
    coords: dict[str, tuple[float, float]],
) -> str:
    """Exhaustive center-of-minimum-distance over all cluster members."""
    best = None
    for cand in sorted(members):
        cost = sum(probs.get(m, 0.0) * haversine_km(coords[cand], coords[m]) for m in members)
        if best is None or cost < best[0] - 1e-12:
            best = (cost, cand)
    return best[1]


def best_split_scan(xs, ys) -> tuple[float, float]:
    """Exhaustive scan over every midpoint between distinct sorted values:
    returns (child SSE, threshold) of the variance-minimizing split."""
    pairs = sorted(zip(xs, ys))
    best = None
    for i in range(len(pairs) - 1):
        if pairs[i][0] == pairs[i + 1][0]:
            continue
        thr = (pairs[i][0] + pairs[i + 1][0]) / 2.0
        left = [y for x, y in pairs if x <= thr]
        right = [y for x, y in pairs if x > thr]
        sse = 0.0
        for side in (left, right):
            mean = sum(side) / len(side)
            sse += sum((v - mean) ** 2 for v in side)
        if best is None or sse < best[0]:
            best = (sse, thr)
    return best


def logistic_loglik(X, y, w, b, l2) -> float:
    """Sum Bernoulli log-likelihood with L2 penalty on weights (not bias)."""
    total = 0.0
    for xi, yi in zip(X, y):
        z = sum(wj * xj for wj, xj in zip(w, xi)) + b
        p = 1.0 / (1.0 + math.exp(-z))
        p = min(max(p, 1e-15), 1 - 1e-15)
        total += yi * math.log(p) + (1 - yi) * math.log(1 - p)
    return total - 0.5 * l2 * sum(wj * wj for wj in w)
