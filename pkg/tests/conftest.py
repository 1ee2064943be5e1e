import os
import sys
from types import SimpleNamespace

import pytest

sys.path.insert(0, os.path.dirname(__file__))


def pytest_runtest_logreport(report):
    """One visible pass/fail line per acceptance criterion."""
    if report.when == "call" and "test_acceptance" in report.nodeid:
        name = report.nodeid.split("::")[-1]
        outcome = "PASS" if report.passed else "FAIL"
        print(f"\nACCEPTANCE {name}: {outcome}", flush=True)


@pytest.fixture(scope="session")
def trained(tmp_path_factory):
    """One small trained world shared by bundle/CLI/service tests."""
    from cityrisk.bundle import ModelBundle, TrainConfig, train_bundle
    from cityrisk.graph import save_dataset
    from cityrisk.synth import WorldConfig, generate_world

    root = tmp_path_factory.mktemp("trained")
    _, masked = generate_world(WorldConfig(n_cities=12, n_orgs=16, n_users=400, seed=11))
    data_path = os.path.join(root, "masked.jsonl")
    save_dataset(masked, data_path)
    cfg = TrainConfig(
        seed=11, forest_trees=25, forest_depth=6, cv_folds=5, exposure_k_grid=(20, 100)
    )
    bundle = train_bundle(masked, cfg)
    bundle_path = os.path.join(root, "bundle.json")
    bundle.save(bundle_path)
    work_user = next(
        u
        for uid, u in sorted(masked.users.items())
        if u.attributes["work_education"] is not None and u.attributes["hometown"] is not None
    )
    rich_profile = {
        "hometown": work_user.attributes["hometown"],
        "work_education": work_user.attributes["work_education"],
        "friend_count": 4,
        "pct_friends_with_attrs": 0.5,
    }
    return SimpleNamespace(
        dataset=masked,
        data_path=data_path,
        bundle=ModelBundle.load(bundle_path),
        bundle_path=bundle_path,
        rich_profile=rich_profile,
        hidden_profile={"hometown": None, "work_education": None},
    )
