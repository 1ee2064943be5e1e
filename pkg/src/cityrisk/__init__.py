"""cityrisk: predict a hidden current city from self-exposed profile
attributes and friend lists, and estimate the exposure risk of keeping
it hidden.

High-level entry points:

    load_dataset / save_dataset     dataset I/O (jsonl, csv-bundle)
    generate_world                  synthetic worlds with ground truth
    train_bundle / ModelBundle      full training into a serving bundle
    run_benchmark                   approach comparison harness
    create_app                      HTTP service over a bundle
"""

from .bundle import ModelBundle, TrainConfig, train_bundle
from .errors import CityRiskError
from .evaluation import BenchmarkConfig, run_benchmark
from .graph import SocialDataset, load_dataset, save_dataset
from .synth import WorldConfig, generate_world

__all__ = [
    "BenchmarkConfig",
    "CityRiskError",
    "ModelBundle",
    "SocialDataset",
    "TrainConfig",
    "WorldConfig",
    "generate_world",
    "load_dataset",
    "run_benchmark",
    "save_dataset",
    "train_bundle",
]

__version__ = "0.1.0"
