"""Population-dynamics solver for the distributional cavity equations.

A population of (A, H) pairs represents the joint law of the curvature and
tilt fields on a random edge of the ensemble. One sweep rebuilds the whole
population: each replacement draws a degree k from the edge-end law, k-1
members uniformly with replacement, and k-1 couplings, then emits

    A = lam - sum_j J_j^2 / A_j,      H = sum_j J_j H_j / A_j.

The tilt update is linear, so only growth rates and the distribution shape
carry meaning; H is rescaled to unit second moment after every sweep and the
discarded factor is tracked. The top eigenvalue of the ensemble is the lam
at which the tilt growth stops decaying, located by bisection.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .ensemble import BinaryCoupling, CouplingLaw, DegreeDistribution, as_generator
from .hist import DEFAULT_BINS, Histogram, histogram_density

__all__ = [
    "Population",
    "SweepStats",
    "DetectionResult",
    "AMarginal",
    "MomentConditions",
    "DefectRegimeError",
    "make_population",
    "sweep_population",
    "h_growth_rate",
    "m1_growth_rate",
    "variance_growth_rate",
    "detect_eigenvalue",
    "full_distribution",
    "eigenvector_density",
    "marginal_a_fixed_point",
    "mixture_delta_of_lambda",
    "second_moment_condition",
    "lambda_for_delta",
    "FERROMAGNETIC",
    "PARAMAGNETIC",
    "CRITICAL",
]

FERROMAGNETIC = "ferromagnetic"
PARAMAGNETIC = "paramagnetic"
CRITICAL = "critical"

# members with |A| below this (times max(1, |lam|)) are redrawn as divisors
ZERO_DIVISOR_REL = 1e-12

# |m1| must exceed this many standard noise floors 1/sqrt(S) to count as signal
M1_SIGNAL_FLOOR = 10.0


class DefectRegimeError(RuntimeError):
    """Negative-curvature support at the detection point; carries diagnostics."""

    def __init__(self, message: str, diagnostics: dict):
        super().__init__(message)
        self.diagnostics = diagnostics


@dataclass
class SweepStats:
    rms_growth: float       # sqrt of the pre-normalization second moment of H
    m1_pre: float           # first moment before renormalization
    m1_post: float          # first moment after renormalization
    var_pre: float          # variance before renormalization
    var_post: float         # variance after renormalization
    frac_negative_a: float
    resampled: int


@dataclass
class Population:
    """Fixed-size sample of (A, H) pairs plus its sweep history."""

    a: np.ndarray
    h: np.ndarray
    lam: float
    sweep_count: int = 0
    log_h_scale: float = 0.0
    init_m1: float = 0.0
    history: list = field(default_factory=list)

    @property
    def size(self) -> int:
        return int(self.a.size)

    @property
    def h_scale(self) -> float:
        return math.exp(self.log_h_scale) if self.log_h_scale < 700 else math.inf

    def save(self, csv_path, json_path, seed=None) -> None:
        """Snapshot: `A,H` rows plus a JSON sidecar with run metadata."""
        with open(csv_path, "w") as fh:
            fh.write("A,H\n")
            for a, h in zip(self.a.tolist(), self.h.tolist()):
                fh.write(f"{a!r},{h!r}\n")
        with open(json_path, "w") as fh:
            json.dump(
                {
                    "lambda": self.lam,
                    "sweep": self.sweep_count,
                    "h_scale": None if math.isinf(self.h_scale) else self.h_scale,
                    "log_h_scale": self.log_h_scale,
                    "seed": seed,
                },
                fh,
                indent=2,
            )
            fh.write("\n")

    def save_rate_trace(self, path) -> None:
        """Per-sweep rates: first-moment ratio, second-moment growth, negative fraction."""
        with open(path, "w") as fh:
            fh.write("sweep,m1_rate,m2_rate,frac_neg_A\n")
            prev_m1 = self.init_m1
            for t, s in enumerate(self.history, start=1):
                m1_rate = s.m1_pre / prev_m1 if prev_m1 != 0 else math.nan
                fh.write(f"{t},{m1_rate!r},{s.rms_growth ** 2!r},{s.frac_negative_a!r}\n")
                prev_m1 = s.m1_post


def make_population(size: int, lam: float, h_init: str = "ones") -> Population:
    """Fresh population with A = lam and unit-second-moment tilts.

    The all-ones tilt start carries a first-moment signal, so a mean-driven
    instability is visible immediately instead of having to grow out of
    sampling noise.
    """
    if size < 1:
        raise ValueError("population size must be positive")
    if h_init == "ones":
        h = np.ones(size)
        init_m1 = 1.0
    elif h_init == "symmetric":
        h = np.where(np.arange(size) % 2 == 0, 1.0, -1.0)
        init_m1 = float(h.mean())
    else:
        raise ValueError(f"unknown h_init {h_init!r}")
    return Population(a=np.full(size, float(lam)), h=h, lam=float(lam), init_m1=init_m1)


def _draw_members(rng, a: np.ndarray, total: int, lam: float):
    """Uniform member indices, redrawing near-zero divisors."""
    idx = rng.integers(0, a.size, size=total)
    eps = ZERO_DIVISOR_REL * max(1.0, abs(lam))
    resampled = 0
    bad = np.abs(a[idx]) < eps
    for _ in range(100):
        n_bad = int(bad.sum())
        if n_bad == 0:
            break
        resampled += n_bad
        idx[bad] = rng.integers(0, a.size, size=n_bad)
        bad = np.abs(a[idx]) < eps
    else:
        raise RuntimeError("population support collapsed onto zero curvature")
    return idx, resampled


def sweep_population(
    pop: Population,
    r: DegreeDistribution,
    law: CouplingLaw,
    rng,
) -> Population:
    """One wholesale replacement sweep; mutates and returns the population."""
    if r.mass[0] != 0:
        raise ValueError("edge-end law must give zero weight to degree 0")
    rng = as_generator(rng)
    s = pop.size
    ks = r.sample(rng, s)
    km1 = ks - 1
    total = int(km1.sum())
    seg = np.repeat(np.arange(s), km1)
    idx, resampled = _draw_members(rng, pop.a, total, pop.lam)
    js = np.asarray(law.sample(rng, total), dtype=float)
    inv = 1.0 / pop.a[idx]
    a_new = pop.lam - np.bincount(seg, weights=js * js * inv, minlength=s)
    h_new = np.bincount(seg, weights=js * pop.h[idx] * inv, minlength=s)

    m1_pre = float(h_new.mean())
    m2_pre = float(np.mean(h_new ** 2))
    var_pre = max(m2_pre - m1_pre ** 2, 0.0)
    growth = math.sqrt(m2_pre)
    if growth > 0:
        h_new /= growth
        m1_post = m1_pre / growth
        var_post = var_pre / m2_pre
        pop.log_h_scale += math.log(growth)
    else:
        m1_post = 0.0
        var_post = 0.0
        pop.log_h_scale = -math.inf

    pop.a = a_new
    pop.h = h_new
    pop.sweep_count += 1
    pop.history.append(
        SweepStats(
            rms_growth=growth,
            m1_pre=m1_pre,
            m1_post=m1_post,
            var_pre=var_pre,
            var_post=var_post,
            frac_negative_a=float(np.mean(a_new <= 0)),
            resampled=resampled,
        )
    )
    return pop


def _window(pop: Population, window: int) -> list:
    if window < 1 or window > len(pop.history):
        raise ValueError(
            f"window {window} exceeds recorded history of {len(pop.history)} sweeps"
        )
    return pop.history[-window:]


def h_growth_rate(pop: Population, window: int) -> float:
    """Geometric mean of the per-sweep second-moment growth of the tilt."""
    stats = _window(pop, window)
    if any(s.rms_growth == 0 for s in stats):
        return 0.0
    return math.exp(2.0 * sum(math.log(s.rms_growth) for s in stats) / len(stats))


def _prev_m1(pop: Population, window: int) -> list[float]:
    start = len(pop.history) - window
    prev = [pop.init_m1 if start == 0 else pop.history[start - 1].m1_post]
    prev += [s.m1_post for s in pop.history[start:-1]]
    return prev


def m1_growth_rate(pop: Population, window: int) -> float:
    """Signed geometric mean of the per-sweep first-moment ratio.

    Ratios are used only while the first moment stands clear of the sampling
    noise floor; with no usable signal the rate is reported as 0 (the mean
    has died out).
    """
    stats = _window(pop, window)
    floor = M1_SIGNAL_FLOOR / math.sqrt(pop.size)
    logs = []
    signs = []
    for prev, s in zip(_prev_m1(pop, window), stats):
        if abs(prev) < floor or s.m1_pre == 0:
            continue
        ratio = s.m1_pre / prev
        logs.append(math.log(abs(ratio)))
        signs.append(math.copysign(1.0, ratio))
    if len(logs) < max(1, window // 4):
        return 0.0
    magnitude = math.exp(sum(logs) / len(logs))
    return magnitude if sum(signs) >= 0 else -magnitude


def variance_growth_rate(pop: Population, window: int) -> float:
    """Geometric mean of the per-sweep variance growth of the tilt."""
    stats = _window(pop, window)
    floor = 1.0 / pop.size
    logs = []
    for prev, s in zip([1.0] + [s.var_post for s in stats[:-1]], stats):
        prev_abs = prev if stats is pop.history[-window:] else prev  # placeholder
    # recompute with correct previous values
    start = len(pop.history) - window
    prev_vals = [1.0 - pop.init_m1 ** 2 if start == 0 else pop.history[start - 1].var_post]
    prev_vals += [s.var_post for s in pop.history[start:-1]]
    for prev, s in zip(prev_vals, stats):
        if prev < floor or s.var_pre <= 0:
            continue
        logs.append(math.log(s.var_pre / prev))
    if not logs:
        return 0.0
    return math.exp(sum(logs) / len(logs))
