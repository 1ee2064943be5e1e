"""Command-line interface.

Subcommands cover the full pipeline:

  generate   synthesize a world (truth + masked twin)
  train      fit matrices, weights and the exposure forest into a bundle
  predict    score a dataset's city-hiding users with a bundle
  evaluate   run the benchmark and write report + figures
  estimate   exposure probability / risk level for one profile JSON
  serve      HTTP service backed by a bundle

Exit codes: 0 ok, 1 usage error, 2 data error, 3 model error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

from . import bundle as bundle_mod
from . import synth
from .errors import (
    BundleError,
    CityRiskError,
    ConfigError,
    DegenerateDataset,
    DegenerateTrainingSet,
    NonConvergence,
    OutOfRange,
    ParseError,
    ValidationError,
)
from .evaluation import run_benchmark
from .graph import load_dataset, save_dataset
from .report import write_report

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_MODEL = 3

MAX_K_KM = 1000.0


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # exit code 1, not argparse's 2
        raise UsageError(message)


def _load_config_file(path: str) -> dict:
    try:
        with open(path, "rb") as fh:
            raw = fh.read()
    except OSError as exc:
        raise UsageError(f"cannot read config file: {exc}") from None
    if path.endswith(".toml"):
        try:
            import tomllib  # py311+
        except ModuleNotFoundError:
            import tomli as tomllib
        try:
            return tomllib.loads(raw.decode("utf-8"))
        except Exception as exc:
            raise UsageError(f"malformed TOML config: {exc}") from None
    try:
        obj = json.loads(raw)
    except json.JSONDecodeError as exc:
        raise UsageError(f"malformed JSON config: {exc.msg}") from None
    if not isinstance(obj, dict):
        raise UsageError("config file must hold an object")
    return obj


def _merged(ns: argparse.Namespace) -> dict:
    """Explicit CLI flags > config-file values > coded defaults."""
    values = {k: v for k, v in vars(ns).items() if v is not None}
    config = values.pop("config", None)
    if config:
        from_file = _load_config_file(config)
        for key, val in from_file.items():
            values.setdefault(key.replace("-", "_"), val)
    return values


def build_parser() -> _Parser:
    parser = _Parser(prog="cityrisk", description=__doc__.splitlines()[0])
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=None)
    common.add_argument("--threshold-km", type=float, default=None, help="cluster cut distance")
    common.add_argument("--error-distance-km", type=float, default=None)
    common.add_argument("--config", default=None, help="JSON or TOML file of flag defaults")
    common.add_argument("--format", choices=("json", "text"), default=None, help="output format")

    sub = parser.add_subparsers(dest="command")

    g = sub.add_parser("generate", parents=[common], help="synthesize a world")
    g.add_argument("--out", required=True, help="output directory")
    g.add_argument("--data-format", choices=("jsonl", "csv-bundle"), default=None)
    g.add_argument("--users", type=int, default=None)
    g.add_argument("--cities", type=int, default=None)
    g.add_argument("--orgs", type=int, default=None)
    g.add_argument("--multi-city-org-fraction", type=float, default=None)
    g.add_argument("--decay", type=float, default=None, help="friendship distance decay per km")
    g.add_argument("--visibility", default=None, help="field=rate[,field=rate...]")
    g.add_argument("--preset", choices=("ci", "nightly"), default=None)

    t = sub.add_parser("train", parents=[common], help="train a model bundle")
    t.add_argument("--data", required=True)
    t.add_argument("--data-format", choices=("jsonl", "csv-bundle"), default=None)
    t.add_argument("--out", required=True, help="bundle file path")
    t.add_argument("--train-fraction", type=float, default=None)
    t.add_argument("--close-threshold-km", type=float, default=None)
    t.add_argument("--forest-trees", type=int, default=None)
    t.add_argument("--forest-depth", type=int, default=None)
    t.add_argument("--cv-folds", type=int, default=None)

    p = sub.add_parser("predict", parents=[common], help="predict hidden cities")
    p.add_argument("--data", required=True)
    p.add_argument("--data-format", choices=("jsonl", "csv-bundle"), default=None)
    p.add_argument("--bundle", required=True)
    p.add_argument("--out", required=True, help="predictions jsonl path")
    p.add_argument("--users", choices=("ln", "la", "all"), default=None)

    e = sub.add_parser("evaluate", parents=[common], help="benchmark all approaches")
    e.add_argument("--data", required=True)
    e.add_argument("--data-format", choices=("jsonl", "csv-bundle"), default=None)
    e.add_argument("--out", required=True, help="report directory")
    e.add_argument("--train-fraction", type=float, default=None)
    e.add_argument("--close-threshold-km", type=float, default=None)
    e.add_argument("--knn-k", type=int, default=None)
    e.add_argument("--no-figures", action="store_const", const=True, default=None)

    s = sub.add_parser("estimate", parents=[common], help="single-profile exposure")
    s.add_argument("--bundle", required=True)
    s.add_argument("--profile", required=True, help="profile JSON file, or - for stdin")
    s.add_argument("--k", type=float, default=None, help="error-distance horizon in km")
    s.add_argument("--what-if", action="store_const", const=True, default=None)

    v = sub.add_parser("serve", parents=[common], help="run the HTTP service")
    v.add_argument("--bundle", required=True)
    v.add_argument("--host", default=None)
    v.add_argument("--port", type=int, default=None)
    return parser


def _parse_visibility(text: str) -> dict[str, float]:
    rates = {}
    for part in text.split(","):
        if "=" not in part:
            raise UsageError(f"bad visibility entry {part!r}; expected field=rate")
        key, _, val = part.partition("=")
        try:
            rates[key.strip()] = float(val)
        except ValueError:
            raise UsageError(f"bad visibility rate {val!r}") from None
    return rates


# -----------------------------
# Subcommand bodies
# -----------------------------


def _cmd_generate(v: dict) -> int:
    preset = v.get("preset")
    if preset == "nightly":
        cfg = synth.WorldConfig.nightly_preset(seed=v.get("seed", 0))
    else:
        cfg = synth.WorldConfig.ci_preset(seed=v.get("seed", 0))
    if "users" in v:
        cfg.n_users = v["users"]
    if "cities" in v:
        cfg.n_cities = v["cities"]
    if "orgs" in v:
        cfg.n_orgs = v["orgs"]
    if "multi_city_org_fraction" in v:
        cfg.multi_city_org_fraction = v["multi_city_org_fraction"]
    if "decay" in v:
        cfg.friendship_distance_decay = v["decay"]
    if "visibility" in v:
        vis = v["visibility"]
        cfg.visibility_rates.update(
            vis if isinstance(vis, dict) else _parse_visibility(vis)
        )

    truth, masked = synth.generate_world(cfg)
    fmt = v.get("data_format", "jsonl")
    outdir = v["out"]
    os.makedirs(outdir, exist_ok=True)
    suffix = ".jsonl" if fmt == "jsonl" else ""
    truth_path = os.path.join(outdir, f"world_truth{suffix}")
    masked_path = os.path.join(outdir, f"world_masked{suffix}")
    save_dataset(truth, truth_path, fmt)
    save_dataset(masked, masked_path, fmt)
    print(
        json.dumps(
            {
                "truth": truth_path,
                "masked": masked_path,
                "users": cfg.n_users,
                "cities": cfg.n_cities,
                "seed": cfg.seed,
            },
            sort_keys=True,
        )
    )
    return EXIT_OK


def _train_config(v: dict) -> bundle_mod.TrainConfig:
    cfg = bundle_mod.TrainConfig()
    mapping = {
        "seed": "seed",
        "train_fraction": "train_fraction",
        "threshold_km": "threshold_km",
        "close_threshold_km": "close_threshold_km",
        "error_distance_km": "error_distance_km",
        "knn_k": "knn_k",
        "forest_trees": "forest_trees",
        "forest_depth": "forest_depth",
        "cv_folds": "cv_folds",
    }
    for key, attr in mapping.items():
        if key in v:
            setattr(cfg, attr, v[key])
    return cfg


def _cmd_train(v: dict) -> int:
    ds = load_dataset(v["data"], v.get("data_format", "jsonl"))
    cfg = _train_config(v)
    bundle = bundle_mod.train_bundle(ds, cfg)
    bundle.save(v["out"])
    print(
        json.dumps(
            {
                "bundle": v["out"],
                "version": bundle.version,
                "cv_mae": bundle.cv_metrics["mae"],
                "cv_rmse": bundle.cv_metrics["rmse"],
            },
            sort_keys=True,
        )
    )
    return EXIT_OK


def _cmd_predict(v: dict) -> int:
    from .graph import partition_users
    from .predictor import location_coords, predict_view
    from .pfli import user_view

    ds = load_dataset(v["data"], v.get("data_format", "jsonl"))
    bundle = bundle_mod.ModelBundle.load(v["bundle"])
    which = v.get("users", "ln")
    la, ln = partition_users(ds)
    targets = {"ln": ln, "la": la, "all": la | ln}[which]
    coords = bundle.coords()
    horizon = v.get("error_distance_km", 20.0)
    with open(v["out"], "w", encoding="utf-8", newline="\n") as fh:
        for uid in sorted(targets):
            pred = predict_view(
                user_view(ds, uid), bundle.model, bundle.clusters, coords, horizon
            )
            fh.write(json.dumps(pred.to_dict(), sort_keys=True) + "\n")
    print(json.dumps({"predictions": v["out"], "users": len(targets)}, sort_keys=True))
    return EXIT_OK


def _cmd_evaluate(v: dict) -> int:
    from .evaluation import BenchmarkConfig

    ds = load_dataset(v["data"], v.get("data_format", "jsonl"))
    cfg = BenchmarkConfig()
    for key in (
        "seed",
        "train_fraction",
        "threshold_km",
        "close_threshold_km",
        "error_distance_km",
        "knn_k",
    ):
        if key in v:
            setattr(cfg, key, v[key])
    report = run_benchmark(ds, cfg)
    files = write_report(report, v["out"], figures=not v.get("no_figures", False))
    if v.get("format") == "text":
        from .report import render_text

        print(render_text(report))
    else:
        print(json.dumps({k: files[k] for k in ("json", "text", "csv") if k in files}, sort_keys=True))
    return EXIT_OK


def _read_profile(path: str) -> dict:
    try:
        text = sys.stdin.read() if path == "-" else open(path, encoding="utf-8").read()
    except OSError as exc:
        raise ParseError(f"cannot read profile: {exc}") from None
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"malformed profile JSON: {exc.msg}") from None
    if not isinstance(obj, dict):
        raise ParseError("profile must be a JSON object")
    return obj


def _check_k(k: float) -> float:
    if not 0.0 < k <= MAX_K_KM:
        raise UsageError(f"--k must be in (0, {MAX_K_KM:g}] km")
    return k


def _cmd_estimate(v: dict) -> int:
    bundle = bundle_mod.ModelBundle.load(v["bundle"])
    profile = _read_profile(v["profile"])
    k = _check_k(v.get("k", v.get("error_distance_km", 100.0)))
    report = bundle.estimate(profile, k, include_what_if=v.get("what_if", False))
    if v.get("format") == "text":
        print(f"category:             {report['category']}")
        print(f"cluster confidence:   {report['confidence']:.3f}")
        print(f"% friends w/ attrs:   {report['pct_friends_attrs']:.3f}")
        print(f"exposure probability: {report['probability']:.3f} within {k:g} km")
        print(f"risk level:           {report['risk_level']}")
        for entry in report.get("what_if", []):
            print(
                f"  hide {'+'.join(entry['hide']):<8} -> {entry['probability']:.3f}"
                f" (level {entry['risk_level']})"
            )
    else:
        print(json.dumps(report, sort_keys=True))
    return EXIT_OK


def _cmd_serve(v: dict) -> int:
    import uvicorn

    from .service import create_app

    bundle = bundle_mod.ModelBundle.load(v["bundle"])
    app = create_app(bundle)
    uvicorn.run(app, host=v.get("host", "127.0.0.1"), port=v.get("port", 8000))
    return EXIT_OK


COMMANDS = {
    "generate": _cmd_generate,
    "train": _cmd_train,
    "predict": _cmd_predict,
    "evaluate": _cmd_evaluate,
    "estimate": _cmd_estimate,
    "serve": _cmd_serve,
}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        ns = parser.parse_args(argv)
        if ns.command is None:
            raise UsageError("a subcommand is required")
        values = _merged(ns)
        return COMMANDS[ns.command](values)
    except (UsageError, ConfigError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        print(parser.format_usage().rstrip(), file=sys.stderr)
        return EXIT_USAGE
    except (ParseError, ValidationError, FileNotFoundError) as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except (
        DegenerateTrainingSet,
        NonConvergence,
        DegenerateDataset,
        BundleError,
        OutOfRange,
    ) as exc:
        print(f"model error: {exc}", file=sys.stderr)
        return EXIT_MODEL
    except CityRiskError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
