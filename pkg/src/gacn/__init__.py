"""Adversarial imputation with a jointly trained classifier, plus baselines and sweeps."""

from .baselines import fit_mean, impute_mean, load_external
from .dataset import Dataset, SplitSpec, inject_mar, load_csv, mask_labels, normalize, split, write_csv
from .experiment import run_sweep
from .model import TrainConfig, classify, impute, init_model, load_checkpoint, save_checkpoint, train
from .synthetic import make_benchmark

__all__ = [
    "Dataset",
    "SplitSpec",
    "TrainConfig",
    "classify",
    "fit_mean",
    "impute",
    "impute_mean",
    "init_model",
    "inject_mar",
    "load_checkpoint",
    "load_csv",
    "load_external",
    "make_benchmark",
    "mask_labels",
    "normalize",
    "run_sweep",
    "save_checkpoint",
    "split",
    "train",
    "write_csv",
]
