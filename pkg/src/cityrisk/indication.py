"""Location-attribute indication and attribute-pair location similarity.

Both structures are estimated by counting over LA-users only:

* the indication matrix maps an attribute token to a probability
  distribution over candidate locations (share of the token's holders
  living in each city);
* the similarity matrix maps an unordered token pair to the probability
  that two friends carrying those tokens live in the same city.

Hidden values take part in the similarity matrix (``None`` is a token
there) but never in the indication matrix.  Storage is sparse and keyed
by token; the vocabulary is whatever the dataset contains.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .graph import SocialDataset

# Tokens sort with None first so unordered pairs have one canonical key.
def _pair_key(a: str | None, b: str | None) -> tuple:
    return tuple(sorted([a, b], key=lambda t: (t is not None, t)))


@dataclass
class IndicationMatrix:
    kind: str
    columns: dict[str, dict[str, float]] = field(default_factory=dict)
    support: dict[str, int] = field(default_factory=dict)

    def lookup(self, token: str | None) -> dict[str, float]:
        """Column for ``token``; empty for hidden or unseen tokens."""
        if token is None:
            return {}
        return self.columns.get(token, {})

    def flagged_tokens(self) -> set[str]:
        """Tokens whose estimate rests on fewer than 2 LA holders."""
        return {t for t, n in self.support.items() if n < 2}


@dataclass
class SimilarityMatrix:
    kind: str
    cells: dict[tuple, float] = field(default_factory=dict)
    fallback: float = 0.0

    def lookup(self, a: str | None, b: str | None) -> float:
        """Symmetric lookup; unobserved pairs fall back to the global
        co-location rate of LA friend pairs for this kind."""
        return self.cells.get(_pair_key(a, b), self.fallback)


def build_indication_matrix(
    ds: SocialDataset,
    kind: str,
    min_support: int = 1,
) -> IndicationMatrix:
    """Estimate P(current city | token) from LA-users.

    Columns backed by fewer than ``min_support`` holders are dropped;
    columns with a single holder are kept but flagged.
    """
    counts: dict[str, dict[str, int]] = {}
    totals: dict[str, int] = {}
    for u in ds.users.values():
        if u.current_city is None:
            continue
        token = u.attributes.get(kind)
        if token is None:
            continue
        totals[token] = totals.get(token, 0) + 1
        col = counts.setdefault(token, {})
        col[u.current_city] = col.get(u.current_city, 0) + 1

    mat = IndicationMatrix(kind=kind)
    for token in sorted(totals):
        n = totals[token]
        if n < min_support:
            continue
        mat.support[token] = n
        mat.columns[token] = {c: counts[token][c] / n for c in sorted(counts[token])}
    return mat


def lookup_indication(mat: IndicationMatrix, token: str | None) -> dict[str, float]:
    return mat.lookup(token)


def build_similarity_matrix(ds: SocialDataset, kind: str) -> SimilarityMatrix:
    """Estimate P(same city | token pair) over unordered LA-LA friend pairs."""
    num: dict[tuple, int] = {}
    den: dict[tuple, int] = {}
    pairs = colocated = 0
    for uid in sorted(ds.users):
        u = ds.users[uid]
        if u.current_city is None:
            continue
        for fid in sorted(u.friends):
            if fid <= uid:  # each unordered pair once
                continue
            v = ds.users[fid]
            if v.current_city is None:
                continue
            key = _pair_key(u.attributes.get(kind), v.attributes.get(kind))
            den[key] = den.get(key, 0) + 1
            pairs += 1
            if u.current_city == v.current_city:
                num[key] = num.get(key, 0) + 1
                colocated += 1

    mat = SimilarityMatrix(kind=kind)
    mat.fallback = colocated / pairs if pairs else 0.0
    mat.cells = {key: num.get(key, 0) / d for key, d in den.items()}
    return mat


def lookup_similarity(mat: SimilarityMatrix, a: str | None, b: str | None) -> float:
    return mat.lookup(a, b)


def build_matrices(
    ds: SocialDataset, min_support: int = 1
) -> tuple[dict[str, IndicationMatrix], dict[str, SimilarityMatrix]]:
    """Build both matrix families for every attribute kind of the dataset."""
    mats = {k: build_indication_matrix(ds, k, min_support) for k in ds.kinds}
    sims = {k: build_similarity_matrix(ds, k) for k in ds.kinds}
    return mats, sims
