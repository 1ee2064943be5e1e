"""Versioned model bundle: everything the serving paths need in one file.

A bundle carries the candidate locations, the location clusters, both
matrix families, the fitted weights, the exposure forest with its CV
metrics, and the training configuration.  Serialization is canonical
JSON (sorted keys), so identical training runs produce byte-identical
bundles; the bundle version exposed to clients is the format version
plus a content fingerprint.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import asdict, dataclass, field

from .errors import BundleError, ValidationError
from .evaluation import BenchmarkConfig, mask_users, split_la_users, train_model
from .exposure import (
    ExposureForest,
    ForestConfig,
    build_exposure_dataset,
    estimate_exposure,
    train_rdf,
    what_if,
)
from .geo import ClusterSet, cut_tree, upgma_cluster
from .graph import Location, SocialDataset
from .indication import IndicationMatrix, SimilarityMatrix
from .pfli import PfliWeights, ProfileView
from .predictor import PfliModel, predict_view

BUNDLE_FORMAT_VERSION = 1


@dataclass
class TrainConfig(BenchmarkConfig):
    forest_trees: int = 100
    forest_depth: int = 8
    cv_folds: int = 10
    exposure_k_grid: tuple[int, ...] = (1, 5, 10, 20, 40, 60, 80, 100, 200, 500, 1000)


@dataclass
class ModelBundle:
    locations: list[Location]
    clusters: ClusterSet
    model: PfliModel
    forest: ExposureForest
    cv_metrics: dict[str, float]
    config: dict
    version: str = ""

    def coords(self) -> dict[str, tuple[float, float]]:
        return {loc.id: (loc.lat, loc.lon) for loc in self.locations}

    # -- serialization -------------------------------------------------

    def to_dict(self) -> dict:
        sims = self.model.similarity
        return {
            "format_version": BUNDLE_FORMAT_VERSION,
            "kinds": list(self.model.kinds),
            "locations": [[l.id, l.lat, l.lon] for l in sorted(self.locations, key=lambda l: l.id)],
            "clusters": {
                "threshold_km": self.clusters.threshold_km,
                "clusters": self.clusters.clusters,
            },
            "indication": {
                kind: {"columns": mat.columns, "support": mat.support}
                for kind, mat in self.model.indication.items()
            },
            "similarity": {
                kind: {
                    "cells": [[a, b, v] for (a, b), v in sorted(
                        sims[kind].cells.items(),
                        key=lambda kv: tuple((t is not None, t or "") for t in kv[0]),
                    )],
                    "fallback": sims[kind].fallback,
                }
                for kind in sims
            },
            "weights": asdict(self.model.weights),
            "forest": self.forest.to_dict(),
            "cv_metrics": self.cv_metrics,
            "config": self.config,
        }

    @classmethod
    def from_dict(cls, obj: dict) -> "ModelBundle":
        if obj.get("format_version") != BUNDLE_FORMAT_VERSION:
            raise BundleError(
                f"unsupported bundle format {obj.get('format_version')!r}; "
                f"this build reads version {BUNDLE_FORMAT_VERSION}"
            )
        kinds = tuple(obj["kinds"])
        locations = [Location(i, lat, lon) for i, lat, lon in obj["locations"]]
        clusters = ClusterSet(
            clusters=[list(c) for c in obj["clusters"]["clusters"]],
            threshold_km=obj["clusters"]["threshold_km"],
        )
        indication = {
            kind: IndicationMatrix(
                kind=kind,
                columns={t: dict(col) for t, col in spec["columns"].items()},
                support=dict(spec["support"]),
            )
            for kind, spec in obj["indication"].items()
        }
        similarity = {
            kind: SimilarityMatrix(
                kind=kind,
                cells={(a, b): v for a, b, v in spec["cells"]},
                fallback=spec["fallback"],
            )
            for kind, spec in obj["similarity"].items()
        }
        weights = PfliWeights(**obj["weights"])
        model = PfliModel(kinds=kinds, indication=indication, similarity=similarity, weights=weights)
        forest = ExposureForest.from_dict(obj["forest"])
        return cls(
            locations=locations,
            clusters=clusters,
            model=model,
            forest=forest,
            cv_metrics=dict(obj["cv_metrics"]),
            config=dict(obj["config"]),
        )

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    def save(self, path: str) -> None:
        text = self.to_json()
        self.version = _version_of(text.encode("utf-8"))
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)

    @classmethod
    def load(cls, path: str) -> "ModelBundle":
        try:
            with open(path, "rb") as fh:
                raw = fh.read()
        except OSError as exc:
            raise BundleError(f"cannot read bundle: {exc}") from None
        try:
            obj = json.loads(raw)
        except json.JSONDecodeError as exc:
            raise BundleError(f"malformed bundle JSON: {exc.msg}") from None
        bundle = cls.from_dict(obj)
        bundle.version = _version_of(raw)
        return bundle

    # -- profile ingestion ---------------------------------------------

    def profile_view(self, profile: dict) -> ProfileView:
        """Turn a submitted profile into a scoring view.

        A detailed ``friends`` list (entries with optional current_city and
        attribute tokens) feeds the friend channels; otherwise the scalar
        ``friend_count`` / ``pct_friends_with_attrs`` summary only informs
        the exposure features.
        """
        if not isinstance(profile, dict):
            raise ValidationError("profile must be a JSON object")
        kinds = self.model.kinds
        known = {loc.id for loc in self.locations}

        def token(obj: dict, kind: str):
            v = obj.get(kind)
            if v is None:
                return None
            if not isinstance(v, str):
                raise ValidationError(f"{kind} must be a string or null")
            return v

        attrs = {k: token(profile, k) for k in kinds}
        la, ln = [], []
        friends = profile.get("friends")
        if friends is not None:
            if not isinstance(friends, list):
                raise ValidationError("friends must be a list")
            with_attrs = 0
            for entry in friends:
                if not isinstance(entry, dict):
                    raise ValidationError("each friend must be an object")
                fattrs = {k: token(entry, k) for k in kinds}
                if any(v is not None for v in fattrs.values()):
                    with_attrs += 1
                city = entry.get("current_city")
                if city is not None:
                    if city not in known:
                        raise ValidationError(f"friend current_city {city!r} is not a known location")
                    la.append((fattrs, city))
                else:
                    ln.append(fattrs)
            count = len(friends)
            pct = with_attrs / count if count else 0.0
        else:
            count = int(profile.get("friend_count") or 0)
            if count < 0:
                raise ValidationError("friend_count must be >= 0")
            pct = float(profile.get("pct_friends_with_attrs") or 0.0)
            if not 0.0 <= pct <= 1.0:
                raise ValidationError("pct_friends_with_attrs must be in [0, 1]")
        return ProfileView(
            user_id=profile.get("id"),
            attrs=attrs,
            la_friends=la,
            ln_friends=ln,
            friend_count=count,
            pct_friends_with_attrs=pct,
        )


    # -- serving -------------------------------------------------------

    def estimate(self, profile: dict, k_km: float, include_what_if: bool = False) -> dict:
        """Exposure report for one profile at horizon K km."""
        view = self.profile_view(profile)
        features, p, level = estimate_exposure(view, self.model, self.clusters, self.forest, k_km)
        report = {
            "category": features.user_category,
            "confidence": features.cluster_confidence,
            "pct_friends_attrs": features.pct_friends_with_attrs,
            "K": k_km,
            "probability": p,
            "risk_level": level,
            "model_version": self.version,
        }
        if include_what_if:
            report["what_if"] = what_if(view, self.model, self.clusters, self.forest, k_km)
        return report

    def what_if_map(self, profile: dict, k_km: float) -> dict:
        view = self.profile_view(profile)
        return {
            "K": k_km,
            "what_if": what_if(view, self.model, self.clusters, self.forest, k_km),
            "model_version": self.version,
        }

    def predict_profile(self, profile: dict, error_distance_km: float = 20.0) -> dict:
        view = self.profile_view(profile)
        pred = predict_view(
            view, self.model, self.clusters, self.coords(), error_distance_km
        )
        out = pred.to_dict()
        out["model_version"] = self.version
        return out


def _version_of(raw: bytes) -> str:
    return f"{BUNDLE_FORMAT_VERSION}-{hashlib.sha256(raw).hexdigest()[:12]}"


def train_bundle(ds: SocialDataset, config: TrainConfig | None = None) -> ModelBundle:
    """Full training pass over a dataset.

    LA-users are split train/eval; matrices and weights are fitted on the
    train side (eval cities masked), the exposure forest is calibrated on
    the eval side, and the bundle keeps the split-trained model so the
    forest's features match what the serving model produces.
    """
    config = config or TrainConfig()
    train_ids, eval_ids = split_la_users(ds, config.seed, config.train_fraction)
    masked = mask_users(ds, set(eval_ids))
    model = train_model(masked, config)
    clusters = cut_tree(upgma_cluster(ds.locations), config.threshold_km)
    rows = build_exposure_dataset(ds, eval_ids, model, clusters, config.exposure_k_grid)
    forest, cv = train_rdf(
        rows,
        ForestConfig(n_trees=config.forest_trees, max_depth=config.forest_depth, seed=config.seed),
        cv_folds=config.cv_folds,
    )
    cfg_echo = {
        "seed": config.seed,
        "train_fraction": config.train_fraction,
        "threshold_km": config.threshold_km,
        "close_threshold_km": config.close_threshold_km,
        "error_distance_km": config.error_distance_km,
        "exposure_k_grid": list(config.exposure_k_grid),
        "l2": config.l2,
        "regulator_scale": config.regulator_scale,
        "neg_ratio": config.neg_ratio,
        "forest_trees": config.forest_trees,
        "forest_depth": config.forest_depth,
        "cv_folds": config.cv_folds,
        "n_train_users": len(train_ids),
        "n_eval_users": len(eval_ids),
    }
    return ModelBundle(
        locations=list(ds.locations),
        clusters=clusters,
        model=model,
        forest=forest,
        cv_metrics=cv,
        config=cfg_echo,
    )
