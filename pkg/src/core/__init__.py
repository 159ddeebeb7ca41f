"""Núcleo de cálculo: F_q, haces de hipergrafos, formas de conteo, regularidad y retículo."""

from src.core.ff_core import FieldFunction, PrimeField, dft, idft, make_sphere, sphere_decay
from src.core.forms import (
    ConfigurationSpace,
    EdgeFunctionFamily,
    box_norm,
    eval_M,
    eval_N,
    fourier_count_d1,
)
from src.core.hypergraph import BaseEdge, BundleSpec, Edge, boundary, enumerate_bundle, remove_entry
from src.core.lattice import (
    GridCube,
    LatticeSet,
    ScaleSequence,
    SimplexSpec,
    count_asymptotic_scan,
    density_increment,
    enumerate_copies,
    eval_M1_lattice,
    eval_N1_lattice,
    isometry_check,
    kvn_grid_decompose,
    q_epsilon,
    sigma_normalized,
    u1_norm,
    uniformity_test,
)
from src.core.regularity import Partition, PartitionSystem, cond_exp, energy, weak_regularize, witness_search

__all__ = [
    # F_q
    "FieldFunction",
    "PrimeField",
    "dft",
    "idft",
    "make_sphere",
    "sphere_decay",
    # Haces
    "BaseEdge",
    "BundleSpec",
    "Edge",
    "boundary",
    "enumerate_bundle",
    "remove_entry",
    # Formas
    "ConfigurationSpace",
    "EdgeFunctionFamily",
    "box_norm",
    "eval_M",
    "eval_N",
    "fourier_count_d1",
    # Regularidad
    "Partition",
    "PartitionSystem",
    "cond_exp",
    "energy",
    "weak_regularize",
    "witness_search",
    # Retículo
    "GridCube",
    "LatticeSet",
    "ScaleSequence",
    "SimplexSpec",
    "count_asymptotic_scan",
    "density_increment",
    "enumerate_copies",
    "eval_M1_lattice",
    "eval_N1_lattice",
    "isometry_check",
    "kvn_grid_decompose",
    "q_epsilon",
    "sigma_normalized",
    "u1_norm",
    "uniformity_test",
]
