"""Datasets, experiment configuration and the seeded experiment runner."""
from .config import BoundsConfig, ExperimentConfig, FileDataset, SyntheticDataset, config_hash
from .datasets import (SyntheticBlobsSpec, accuracy, generate_blobs, load_dataset,
                       write_binary_dataset, write_csv_dataset)
from .experiment import ExperimentResult, aggregate_records, load_features, run_experiment

__all__ = [
    "BoundsConfig", "ExperimentConfig", "FileDataset", "SyntheticDataset", "config_hash",
    "SyntheticBlobsSpec", "accuracy", "generate_blobs", "load_dataset",
    "write_binary_dataset", "write_csv_dataset",
    "ExperimentResult", "aggregate_records", "load_features", "run_experiment",
]
