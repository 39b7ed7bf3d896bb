"""Message passing for the top eigenpair of a fixed instance.

Each directed edge i->l carries a pair (A, H): the curvature and the linear
tilt of the effective single-site quadratic seen by i when l is removed.
One synchronous sweep updates

    A(i->l) = lam - sum_{j in ni\\l} w_ij^2 / A(j->i)
    H(i->l) = sum_{j in ni\\l} w_ij * H(j->i) / A(j->i)

and the per-site full fields sum over all neighbors. The top eigenvalue is
located by bisecting lam down to the point where strict positivity of the
curvatures (messages and full fields) is lost; the eigenvector follows from
v_i = H_i / A_i slightly above that threshold. Exact on trees, an
approximation when cycles exist.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .ensemble import SparseSymmetricInstance, as_generator

__all__ = [
    "MessageSet",
    "FullFields",
    "FixedPointStatus",
    "CavitySolution",
    "SingularMessageError",
    "TrivialFieldError",
    "sweep_messages",
    "full_fields",
    "positive_fixed_point",
    "bisect_eigenvalue",
    "recover_eigenvector",
    "cavity_solve",
]


class SingularMessageError(ZeroDivisionError):
    """A zero curvature message appeared in a divisor (lam at or below a pole)."""


class TrivialFieldError(RuntimeError):
    """The linear-field update collapsed to all zeros."""


class FixedPointStatus(enum.Enum):
    CONVERGED_POSITIVE = "converged-positive"
    ENCOUNTERED_NONPOSITIVE = "encountered-nonpositive"
    NO_CONVERGENCE = "no-convergence"


class _Directed:
    """Directed-edge view: undirected edge e becomes slots e (row->col) and
    e + m (col->row); rev maps a slot to its reversal."""

    def __init__(self, inst: SparseSymmetricInstance):
        m = inst.edge_count
        self.n = inst.n
        self.m2 = 2 * m
        self.src = np.concatenate([inst.row, inst.col])
        self.dst = np.concatenate([inst.col, inst.row])
        self.w = np.concatenate([inst.weight, inst.weight])
        self.rev = np.concatenate([np.arange(m, 2 * m), np.arange(m)])

    def incoming_sums(self, values: np.ndarray) -> np.ndarray:
        return np.bincount(self.dst, weights=values, minlength=self.n)


@dataclass
class MessageSet:
    """One (A, H) pair per directed edge, at a fixed multiplier."""

    lam: float
    a: np.ndarray
    h: np.ndarray
    converged: bool = False
    max_change: float = math.inf

    @classmethod
    def initial(cls, inst: SparseSymmetricInstance, lam: float) -> "MessageSet":
        m2 = 2 * inst.edge_count
        return cls(lam=float(lam), a=np.full(m2, float(lam)), h=np.zeros(m2))


@dataclass
class FullFields:
    """Per-site curvature and tilt after summing all incoming contributions."""

    a: np.ndarray
    h: np.ndarray

    def components(self) -> np.ndarray:
        return self.h / self.a


def _sweep_a(g: _Directed, lam: float, a: np.ndarray) -> np.ndarray:
    contrib = g.w ** 2 / a
    s = g.incoming_sums(contrib)
    return lam - s[g.src] + contrib[g.rev]


def _sweep_h(g: _Directed, a: np.ndarray, h: np.ndarray) -> np.ndarray:
    contrib = g.w * h / a
    t = g.incoming_sums(contrib)
    return t[g.src] - contrib[g.rev]


def sweep_messages(
    inst: SparseSymmetricInstance, lam: float, messages: MessageSet
) -> MessageSet:
    """One synchronous update of every directed message."""
    g = _Directed(inst)
    if np.any(messages.a == 0):
        raise SingularMessageError("singular message: zero curvature in a divisor")
    a_new = _sweep_a(g, lam, messages.a)
    h_new = _sweep_h(g, messages.a, messages.h)
    change = float(np.max(np.abs(a_new - messages.a), initial=0.0))
    change = max(change, float(np.max(np.abs(h_new - messages.h), initial=0.0)))
    return MessageSet(lam=float(lam), a=a_new, h=h_new, max_change=change)


def full_fields(inst: SparseSymmetricInstance, messages: MessageSet) -> FullFields:
    g = _Directed(inst)
    if np.any(messages.a == 0):
        raise SingularMessageError("singular message: zero curvature in a divisor")
    a_full = messages.lam - g.incoming_sums(g.w ** 2 / messages.a)
    h_full = g.incoming_sums(g.w * messages.h / messages.a)
    return FullFields(a=a_full, h=h_full)


def positive_fixed_point(
    inst: SparseSymmetricInstance,
    lam: float,
    tol: float = 1e-13,
    max_sweeps: int | None = None,
) -> FixedPointStatus:
    """Probe whether the curvature recursion settles strictly positive.

    Starts every message at lam, which bounds the fixed point from above, so
    any nonpositive value along the way certifies that no strictly positive
    fixed point exists at this lam.
    """
    if not math.isfinite(lam):
        raise ValueError("lam must be finite")
    if lam <= 0:
        return FixedPointStatus.ENCOUNTERED_NONPOSITIVE
    g = _Directed(inst)
    if max_sweeps is None:
        max_sweeps = max(1000, 2 * inst.n)
    a = np.full(g.m2, float(lam))
    threshold = tol * max(1.0, lam)
    for _ in range(max_sweeps):
        a_new = _sweep_a(g, lam, a)
        if np.any(a_new <= 0):
            return FixedPointStatus.ENCOUNTERED_NONPOSITIVE
        change = float(np.max(np.abs(a_new - a), initial=0.0))
        a = a_new
        if change <= threshold:
            full_a = lam - g.incoming_sums(g.w ** 2 / a)
            if np.any(full_a <= 0):
                return FixedPointStatus.ENCOUNTERED_NONPOSITIVE
            return FixedPointStatus.CONVERGED_POSITIVE
    return FixedPointStatus.NO_CONVERGENCE


def default_bracket(inst: SparseSymmetricInstance) -> tuple[float, float]:
    return 0.0, inst.max_degree * inst.max_abs_coupling + 1.0


def bisect_eigenvalue(
    inst: SparseSymmetricInstance,
    bracket: tuple[float, float] | None = None,
    tol: float = 1e-10,
    msg_tol: float = 1e-13,
    max_sweeps: int | None = None,
) -> float:
    """Positivity threshold of the curvature recursion; the top eigenvalue on trees."""
    if inst.edge_count == 0:
        raise ValueError("instance must have at least one edge")
    lo, hi = default_bracket(inst) if bracket is None else map(float, bracket)
    if not hi > lo:
        raise ValueError(f"invalid bracket ({lo}, {hi})")
    if positive_fixed_point(inst, hi, msg_tol, max_sweeps) is not FixedPointStatus.CONVERGED_POSITIVE:
        raise ValueError(f"invalid bracket: upper end {hi} is not strictly stable")
    if positive_fixed_point(inst, lo, msg_tol, max_sweeps) is FixedPointStatus.CONVERGED_POSITIVE:
        raise ValueError(f"invalid bracket: lower end {lo} is already stable")
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if positive_fixed_point(inst, mid, msg_tol, max_sweeps) is FixedPointStatus.CONVERGED_POSITIVE:
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)


def _converge_a(g: _Directed, lam: float, tol: float, max_sweeps: int) -> np.ndarray:
    a = np.full(g.m2, float(lam))
    for _ in range(max_sweeps):
        a_new = _sweep_a(g, lam, a)
        if np.any(a_new <= 0):
            raise SingularMessageError(
                f"curvature recursion not strictly positive at lam={lam}"
            )
        change = float(np.max(np.abs(a_new - a), initial=0.0))
        a = a_new
        if change <= tol * max(1.0, lam):
            return a
    return a


def recover_eigenvector(
    inst: SparseSymmetricInstance,
    lambda_near: float | None = None,
    rng_seed=None,
    tol: float = 1e-13,
    max_sweeps: int | None = None,
) -> tuple[FullFields, np.ndarray]:
    """Eigenvector estimate v_i = H_i / A_i slightly above the threshold.

    A persistent unit tilt is injected on one directed edge into the softest
    site (smallest full curvature); the linear-field equations are then
    iterated to their sourced fixed point. The injection is what keeps the
    tilt from decaying to the all-zero fixed point, which on a tree it
    otherwise reaches in diameter many sweeps.
    """
    if inst.edge_count == 0:
        raise ValueError("instance must have at least one edge")
    g = _Directed(inst)
    if max_sweeps is None:
        max_sweeps = max(2000, 4 * inst.n)
    if lambda_near is None:
        thr = bisect_eigenvalue(inst, tol=1e-12, max_sweeps=max_sweeps)
        lambda_near = thr + 1e-6 * inst.max_degree * inst.max_abs_coupling
    lam = float(lambda_near)

    a = _converge_a(g, lam, tol, max_sweeps)
    full_a = lam - g.incoming_sums(g.w ** 2 / a)
    if np.any(full_a <= 0):
        raise SingularMessageError(
            "full curvature nonpositive; move lambda_near further above the threshold"
        )

    rng = as_generator(rng_seed)
    soft = int(np.argmin(full_a))
    into_soft = np.nonzero(g.dst == soft)[0]
    source = int(rng.choice(into_soft))

    h = np.zeros(g.m2)
    h[source] = 1.0
    direction_prev = None
    for _ in range(max_sweeps):
        h = _sweep_h(g, a, h)
        h[source] += 1.0
        norm = float(np.linalg.norm(h))
        if norm == 0:
            raise TrivialFieldError("trivial field: tilt collapsed to zero")
        direction = h / norm
        if direction_prev is not None and np.max(np.abs(direction - direction_prev)) <= tol:
            break
        direction_prev = direction

    full_h = g.incoming_sums(g.w * h / a)
    if not np.any(full_h):
        raise TrivialFieldError("trivial field: all site tilts are zero")
    v = full_h / full_a
    v *= math.sqrt(inst.n) / np.linalg.norm(v)
    return FullFields(a=full_a, h=full_h), v


@dataclass
class CavitySolution:
    eigenvalue: float
    vector: np.ndarray
    exact: bool
    m: float

    def summary(self) -> dict:
        return {
            "lambda": self.eigenvalue,
            "m": self.m,
            "n": int(self.vector.size),
            "exact": self.exact,
        }


def cavity_solve(
    inst: SparseSymmetricInstance,
    bracket: tuple[float, float] | None = None,
    tol: float = 1e-10,
    rng_seed=None,
) -> CavitySolution:
    """Bisect the threshold, then recover the eigenvector just above it.

    The result is exact for forests and an approximation otherwise.
    """
    thr = bisect_eigenvalue(inst, bracket=bracket, tol=tol)
    eps = 1e-6 * inst.max_degree * inst.max_abs_coupling
    _, v = recover_eigenvector(inst, thr + eps, rng_seed=rng_seed)
    return CavitySolution(
        eigenvalue=thr,
        vector=v,
        exact=inst.is_forest(),
        m=float(abs(np.mean(v))),
    )


def dump_messages_csv(inst: SparseSymmetricInstance, messages: MessageSet, path) -> None:
    """Diagnostic dump: one `i,j,A,H` row per directed edge."""
    g = _Directed(inst)
    with open(path, "w") as fh:
        fh.write("i,j,A,H\n")
        for i, j, a, h in zip(g.src.tolist(), g.dst.tolist(),
                              messages.a.tolist(), messages.h.tolist()):
            fh.write(f"{i},{j},{a!r},{h!r}\n")
