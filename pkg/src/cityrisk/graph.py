"""Social-graph data model and dataset ingestion.

A dataset is an undirected friendship graph over users, a candidate
location list, and per-user location-sensitive attributes.  Users whose
current city is visible are "LA-users"; the rest are "LN-users".  The
same split applies to any user's friends (LA-friends / LN-friends).

Hidden attribute values are represented as ``None`` throughout.
"""

from __future__ import annotations

import csv
import json
import os
from dataclasses import dataclass, field

from .errors import ParseError, UnknownUser, ValidationError

# Attribute kinds used when a dataset does not declare its own.
DEFAULT_KINDS = ("hometown", "work_education")


@dataclass(frozen=True)
class Location:
    """A candidate location: stable id plus WGS84 coordinate in degrees."""

    id: str
    lat: float
    lon: float


@dataclass
class User:
    id: str
    current_city: str | None
    attributes: dict[str, str | None]
    friends: set[str] = field(default_factory=set)


@dataclass
class SocialDataset:
    """Validated, immutable-by-convention social graph.

    Friendship is symmetric after validation and every friend id resolves
    to a user record.  Safe to share read-only across workers.
    """

    locations: list[Location]
    users: dict[str, User]
    kinds: tuple[str, ...] = DEFAULT_KINDS

    def __post_init__(self) -> None:
        self._loc_by_id = {loc.id: loc for loc in self.locations}

    @property
    def m(self) -> int:
        return len(self.kinds)

    def location(self, loc_id: str) -> Location:
        return self._loc_by_id[loc_id]

    def has_location(self, loc_id: str) -> bool:
        return loc_id in self._loc_by_id

    def user(self, user_id: str) -> User:
        try:
            return self.users[user_id]
        except KeyError:
            raise UnknownUser(user_id) from None


def partition_users(ds: SocialDataset) -> tuple[set[str], set[str]]:
    """Split user ids into (LA-users, LN-users) by current-city visibility."""
    la = {uid for uid, u in ds.users.items() if u.current_city is not None}
    ln = set(ds.users) - la
    return la, ln


def friend_partition(ds: SocialDataset, user_id: str) -> tuple[set[str], set[str]]:
    """Split a user's friends into (LA-friends, LN-friends)."""
    u = ds.user(user_id)
    la = {f for f in u.friends if ds.users[f].current_city is not None}
    return la, u.friends - la


# -----------------------------
# Validation
# -----------------------------


def _validate_location(loc: Location, seen: set[str]) -> None:
    if loc.id in seen:
        raise ValidationError(f"duplicate location id {loc.id!r}")
    if not -90.0 <= loc.lat <= 90.0:
        raise ValidationError(f"location {loc.id!r}: latitude {loc.lat} out of [-90, 90]")
    if not -180.0 <= loc.lon <= 180.0:
        raise ValidationError(f"location {loc.id!r}: longitude {loc.lon} out of [-180, 180]")
    seen.add(loc.id)


def build_dataset(
    locations: list[Location],
    users: list[User],
    kinds: tuple[str, ...] = DEFAULT_KINDS,
) -> SocialDataset:
    """Validate records and assemble a dataset.

    Asymmetric friend lists are closed to symmetric (crawled lists are
    one-sided by nature); dangling friend ids and out-of-range values are
    rejected.  Self-edges are dropped.
    """
    seen_locs: set[str] = set()
    for loc in locations:
        _validate_location(loc, seen_locs)

    by_id: dict[str, User] = {}
    for u in users:
        if u.id in by_id:
            raise ValidationError(f"duplicate user id {u.id!r}")
        for kind in u.attributes:
            if kind not in kinds:
                raise ValidationError(f"user {u.id!r}: unknown attribute kind {kind!r}")
        u.attributes = {k: u.attributes.get(k) for k in kinds}
        if u.current_city is not None and u.current_city not in seen_locs:
            raise ValidationError(f"user {u.id!r}: unknown current_city {u.current_city!r}")
        by_id[u.id] = u

    for u in by_id.values():
        u.friends.discard(u.id)
        for f in u.friends:
            if f not in by_id:
                raise ValidationError(f"user {u.id!r}: dangling friend id {f!r}")
    # Symmetry closure: add any missing reciprocal edges.
    for u in by_id.values():
        for f in u.friends:
            by_id[f].friends.add(u.id)

    return SocialDataset(locations=list(locations), users=by_id, kinds=kinds)


# -----------------------------
# jsonl format
# -----------------------------


def _load_jsonl(path: str, kinds: tuple[str, ...]) -> SocialDataset:
    locations: list[Location] = []
    users: list[User] = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                rec = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ParseError(f"{path}:{lineno}: invalid JSON ({exc.msg})") from None
            if not isinstance(rec, dict) or "type" not in rec:
                raise ParseError(f"{path}:{lineno}: record must be an object with a 'type' field")
            try:
                if rec["type"] == "location":
                    locations.append(
                        Location(id=str(rec["id"]), lat=float(rec["lat"]), lon=float(rec["lon"]))
                    )
                elif rec["type"] == "user":
                    city = rec.get("current_city")
                    attrs = rec.get("attrs") or {}
                    users.append(
                        User(
                            id=str(rec["id"]),
                            current_city=None if city is None else str(city),
                            attributes={k: None if v is None else str(v) for k, v in attrs.items()},
                            friends={str(f) for f in rec.get("friends", [])},
                        )
                    )
                else:
                    raise ParseError(f"{path}:{lineno}: unknown record type {rec['type']!r}")
            except (KeyError, TypeError, ValueError) as exc:
                raise ParseError(f"{path}:{lineno}: malformed record ({exc})") from None
    return build_dataset(locations, users, kinds)


def _save_jsonl(ds: SocialDataset, path: str) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for loc in sorted(ds.locations, key=lambda l: l.id):
            fh.write(json.dumps({"type": "location", "id": loc.id, "lat": loc.lat, "lon": loc.lon}) + "\n")
        for uid in sorted(ds.users):
            u = ds.users[uid]
            rec = {
                "type": "user",
                "id": u.id,
                "current_city": u.current_city,
                "attrs": {k: u.attributes.get(k) for k in ds.kinds},
                "friends": sorted(u.friends),
            }
            fh.write(json.dumps(rec) + "\n")


# -----------------------------
# csv-bundle format (a directory of locations.csv / users.csv / edges.csv)
# -----------------------------


def _load_csv_bundle(path: str, kinds: tuple[str, ...]) -> SocialDataset:
    def rows(name: str):
        fpath = os.path.join(path, name)
        if not os.path.exists(fpath):
            raise ParseError(f"{fpath}: missing from csv bundle")
        with open(fpath, encoding="utf-8", newline="") as fh:
            reader = csv.DictReader(fh)
            for lineno, row in enumerate(reader, start=2):
                yield fpath, lineno, row

    locations = []
    for fpath, lineno, row in rows("locations.csv"):
        try:
            locations.append(Location(id=row["id"], lat=float(row["lat"]), lon=float(row["lon"])))
        except (KeyError, TypeError, ValueError) as exc:
            raise ParseError(f"{fpath}:{lineno}: malformed location ({exc})") from None

    users = []
    for fpath, lineno, row in rows("users.csv"):
        try:
            attrs = {k: (row[k] or None) for k in kinds}
            users.append(
                User(id=row["id"], current_city=row["current_city"] or None, attributes=attrs)
            )
        except (KeyError, TypeError) as exc:
            raise ParseError(f"{fpath}:{lineno}: malformed user ({exc})") from None
    by_id = {u.id: u for u in users}

    for fpath, lineno, row in rows("edges.csv"):
        try:
            src, dst = row["src"], row["dst"]
        except KeyError as exc:
            raise ParseError(f"{fpath}:{lineno}: malformed edge ({exc})") from None
        if src not in by_id:
            raise ValidationError(f"edge {src!r}->{dst!r}: dangling friend id {src!r}")
        by_id[src].friends.add(dst)

    return build_dataset(locations, users, kinds)


def _save_csv_bundle(ds: SocialDataset, path: str) -> None:
    os.makedirs(path, exist_ok=True)
    with open(os.path.join(path, "locations.csv"), "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["id", "lat", "lon"])
        for loc in sorted(ds.locations, key=lambda l: l.id):
            writer.writerow([loc.id, repr(loc.lat), repr(loc.lon)])
    with open(os.path.join(path, "users.csv"), "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["id", "current_city", *ds.kinds])
        for uid in sorted(ds.users):
            u = ds.users[uid]
            writer.writerow(
                [u.id, u.current_city or "", *[u.attributes.get(k) or "" for k in ds.kinds]]
            )
    with open(os.path.join(path, "edges.csv"), "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["src", "dst"])
        for uid in sorted(ds.users):
            for f in sorted(ds.users[uid].friends):
                if uid < f:  # one row per undirected edge
                    writer.writerow([uid, f])


# -----------------------------
# Public load/save entry points
# -----------------------------

FORMATS = ("jsonl", "csv-bundle")


def load_dataset(path: str, format: str = "jsonl", kinds: tuple[str, ...] = DEFAULT_KINDS) -> SocialDataset:
    """Load and validate a dataset from ``path`` in the given format."""
    if format == "jsonl":
        return _load_jsonl(path, kinds)
    if format == "csv-bundle":
        return _load_csv_bundle(path, kinds)
    raise ValueError(f"unknown format {format!r}; expected one of {FORMATS}")


def save_dataset(ds: SocialDataset, path: str, format: str = "jsonl") -> None:
    """Serialize a dataset; re-loading yields an equal dataset (order-free)."""
    if format == "jsonl":
        _save_jsonl(ds, path)
    elif format == "csv-bundle":
        _save_csv_bundle(ds, path)
    else:
        raise ValueError(f"unknown format {format!r}; expected one of {FORMATS}")


def datasets_equal(a: SocialDataset, b: SocialDataset) -> bool:
    """Equality up to record order (used by round-trip checks)."""
    if sorted(a.locations, key=lambda l: l.id) != sorted(b.locations, key=lambda l: l.id):
        return False
    if a.kinds != b.kinds or set(a.users) != set(b.users):
        return False
    for uid, u in a.users.items():
        v = b.users[uid]
        if (u.current_city, u.attributes, u.friends) != (v.current_city, v.attributes, v.friends):
            return False
    return True
