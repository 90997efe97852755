"""Lattice attacks on hidden subset sums leaked by federated K-means."""

from .attack import AttackParams, run_attack
from .hssp import AttackReport, HsspInstance, random_hssp
from .kmeans import Dataset, KMeansConfig, load_dataset, run_federated_kmeans, sample_kmeans_instance
from .lattice import bkz_reduce, lll_reduce, orthogonal_lattice, orthogonal_lattice_mod, svp_enumerate

__version__ = "0.1.0"

__all__ = [
    "AttackParams",
    "AttackReport",
    "Dataset",
    "HsspInstance",
    "KMeansConfig",
    "bkz_reduce",
    "lll_reduce",
    "load_dataset",
    "orthogonal_lattice",
    "orthogonal_lattice_mod",
    "random_hssp",
    "run_attack",
    "run_federated_kmeans",
    "sample_kmeans_instance",
    "svp_enumerate",
]
