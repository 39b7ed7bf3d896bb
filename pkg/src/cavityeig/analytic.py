"""Closed-form top-eigenvalue results used as exact references.

Two solvable ensembles: the common-degree model with binary couplings, and
the large-degree limit with infinitesimal entries. Both split into a
mean-driven (ferromagnetic) branch and a variance-driven (paramagnetic)
branch of the detection condition.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "SingleDegreeModel",
    "DenseLimitModel",
    "a_star",
    "moment_map_coefficients",
    "single_degree_eigenvalue",
    "single_degree_critical_bias",
    "dense_limit_eigenvalue",
    "dense_limit_density",
    "dense_limit_mean",
]

FERROMAGNETIC = "ferromagnetic"
PARAMAGNETIC = "paramagnetic"
CRITICAL = "critical"


@dataclass(frozen=True)
class SingleDegreeModel:
    """Every node has degree k; couplings are +-j with bias delta."""

    k: int
    j: float = 1.0
    delta: float = 0.0

    def __post_init__(self):
        if self.k < 2:
            raise ValueError("common degree must be at least 2")
        if not self.j > 0:
            raise ValueError("coupling magnitude must be positive")
        if not 0.0 <= self.delta <= 1.0:
            raise ValueError("bias must lie in [0, 1]")


@dataclass(frozen=True)
class DenseLimitModel:
    """Large mean degree with entry mean mu*j/kbar and variance j^2/kbar."""

    mu: float
    j: float = 1.0

    def __post_init__(self):
        if not self.mu > 0:
            raise ValueError("scaled mean must be positive")
        if not self.j > 0:
            raise ValueError("scale must be positive")


def a_star(lam: float, c: float) -> float:
    """Positive root of a = lam - c/a, i.e. (lam + sqrt(lam^2 - 4c)) / 2."""
    disc = lam * lam - 4.0 * c
    if disc < 0:
        raise ValueError(f"below spectral edge: lam^2 = {lam * lam} < 4c = {4 * c}")
    return 0.5 * (lam + math.sqrt(disc))


def moment_map_coefficients(model: SingleDegreeModel, lam: float) -> tuple[float, float]:
    """Per-iteration growth coefficients of the mean and the variance of the
    first-order field: c1 = delta*(k-1)*j/a, c2 = (k-1)*j^2/a^2.

    The detection conditions are c1 = 1 (mean-driven) and c2 = 1
    (variance-driven).
    """
    c = (model.k - 1) * model.j ** 2
    a = a_star(lam, c)
    c1 = model.delta * (model.k - 1) * model.j / a
    c2 = c / (a * a)
    return c1, c2


def single_degree_critical_bias(k: int) -> float:
    """Bias separating the mean-driven and variance-driven branches."""
    if k < 2:
        raise ValueError("common degree must be at least 2")
    return 1.0 / math.sqrt(k - 1)


def single_degree_eigenvalue(model: SingleDegreeModel) -> tuple[float, str]:
    """Top eigenvalue of the common-degree ensemble and which branch applies.

    ((k-1)*delta + 1/delta)*j above the critical bias, 2*sqrt(k-1)*j below;
    the two branches agree at the critical bias.
    """
    delta_c = single_degree_critical_bias(model.k)
    if model.delta > delta_c:
        return ((model.k - 1) * model.delta + 1.0 / model.delta) * model.j, FERROMAGNETIC
    if model.delta < delta_c:
        return 2.0 * math.sqrt(model.k - 1) * model.j, PARAMAGNETIC
    return 2.0 * math.sqrt(model.k - 1) * model.j, CRITICAL


def dense_limit_eigenvalue(model: DenseLimitModel) -> tuple[float, str]:
    """(mu + 1/mu)*j for mu > 1, else 2*j; continuous at mu = 1."""
    if model.mu > 1.0:
        return (model.mu + 1.0 / model.mu) * model.j, FERROMAGNETIC
    if model.mu < 1.0:
        return 2.0 * model.j, PARAMAGNETIC
    return 2.0 * model.j, CRITICAL


def dense_limit_mean(model: DenseLimitModel, sign: int = +1) -> float:
    """Mean eigenvector component in the dense limit: +-sqrt(1 - 1/mu^2), 0 below mu = 1.

    The two signs are the mirror pair; positive is the reporting convention.
    """
    if model.mu <= 1.0:
        return 0.0
    return math.copysign(math.sqrt(1.0 - 1.0 / model.mu ** 2), sign)


def dense_limit_density(model: DenseLimitModel, v, sign: int = +1):
    """Gaussian density of eigenvector components at unit quadratic norm.

    Mean m = dense_limit_mean and variance 1 - m^2 above mu = 1; standard
    normal below.
    """
    m = dense_limit_mean(model, sign)
    var = 1.0 - m * m
    v = np.asarray(v, dtype=float)
    out = np.exp(-((v - m) ** 2) / (2.0 * var)) / math.sqrt(2.0 * math.pi * var)
    return out if out.ndim else float(out)
