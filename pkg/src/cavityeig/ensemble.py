"""Random symmetric sparse matrices with a prescribed bounded degree distribution.

Instances are simple undirected weighted graphs: zero diagonal, no duplicate
edges, an exactly realized degree sequence built by stub matching, and i.i.d.
edge couplings drawn after the topology is fixed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "GenerationError",
    "DegreeDistribution",
    "CouplingLaw",
    "BinaryCoupling",
    "DiscreteCoupling",
    "GaussianCoupling",
    "SparseSymmetricInstance",
    "edge_degree_law",
    "sample_degree_sequence",
    "generate_instance",
    "sample_coupling",
    "as_generator",
]


class GenerationError(RuntimeError):
    """Raised when an instance or degree sequence cannot be realized."""


def as_generator(seed) -> np.random.Generator:
    """Accept an int seed, a SeedSequence, a Generator, or None."""
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


# ---------------------------------------------------------------------------
# degree distributions
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class DegreeDistribution:
    """Probability mass on degrees k = 0..k_max (finite support)."""

    mass: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.mass, dtype=float)
        if m.ndim != 1 or m.size == 0:
            raise ValueError("degree mass must be a nonempty 1-d array")
        if np.any(m < 0):
            raise ValueError("degree mass entries must be nonnegative")
        if abs(m.sum() - 1.0) > 1e-12:
            raise ValueError(f"degree mass must sum to 1, got {m.sum()!r}")
        object.__setattr__(self, "mass", m)

    @classmethod
    def single_degree(cls, k: int) -> "DegreeDistribution":
        """All nodes share degree k."""
        m = np.zeros(int(k) + 1)
        m[int(k)] = 1.0
        return cls(m)

    @classmethod
    def from_weights(cls, weights: dict[int, float]) -> "DegreeDistribution":
        """Build from {degree: weight}; weights are normalized."""
        k_max = max(weights)
        m = np.zeros(int(k_max) + 1)
        for k, w in weights.items():
            if k < 0:
                raise ValueError("degrees must be nonnegative")
            m[int(k)] = float(w)
        total = m.sum()
        if total <= 0:
            raise ValueError("weights must have positive total")
        return cls(m / total)

    @classmethod
    def two_point(cls, k_low: int, k_high: int, frac_high: float) -> "DegreeDistribution":
        """Mixture (1-f) at k_low plus f at k_high."""
        return cls.from_weights({k_low: 1.0 - frac_high, k_high: frac_high})

    @property
    def k_max(self) -> int:
        nz = np.nonzero(self.mass)[0]
        return int(nz[-1]) if nz.size else 0

    @property
    def support(self) -> np.ndarray:
        return np.nonzero(self.mass)[0]

    def mean_degree(self) -> float:
        return float(np.arange(self.mass.size) @ self.mass)

    def second_moment(self) -> float:
        return float((np.arange(self.mass.size) ** 2) @ self.mass)

    def excess_mean(self) -> float:
        """Mean of (k - 1) under the edge-end law; sum_k r(k)(k-1)."""
        r = edge_degree_law(self).mass
        return float((np.arange(r.size) - 1.0) @ r)

    def sample(self, rng: np.random.Generator, size=None):
        return rng.choice(self.mass.size, size=size, p=self.mass)


def edge_degree_law(p: DegreeDistribution) -> DegreeDistribution:
    """Degree law of an endpoint of a uniformly chosen edge: r(k) = k p(k) / <k>."""
    mean = p.mean_degree()
    if mean <= 0:
        raise GenerationError("degenerate ensemble: mean degree is zero")
    k = np.arange(p.mass.size)
    return DegreeDistribution(k * p.mass / mean)


# ---------------------------------------------------------------------------
# coupling laws
# ---------------------------------------------------------------------------

class CouplingLaw:
    """Distribution of the i.i.d. weights assigned to edges."""

    def sample(self, rng: np.random.Generator, size=None):
        raise NotImplementedError

    def mean_coupling(self) -> float:
        raise NotImplementedError

    def second_moment(self) -> float:
        raise NotImplementedError

    def abs_bound(self) -> float | None:
        """Largest possible |coupling|, or None when unbounded."""
        return None


@dataclass(frozen=True)
class BinaryCoupling(CouplingLaw):
    """+j with probability (1+delta)/2, -j with probability (1-delta)/2."""

    delta: float
    j: float = 1.0

    def __post_init__(self):
        if not 0.0 <= self.delta <= 1.0:
            raise ValueError("bias must lie in [0, 1]")
        if not self.j > 0:
            raise ValueError("coupling magnitude must be positive")

    def sample(self, rng, size=None):
        signs = np.where(rng.random(size) < (1.0 + self.delta) / 2.0, 1.0, -1.0)
        return self.j * signs

    def mean_coupling(self):
        return self.delta * self.j

    def second_moment(self):
        return self.j ** 2

    def abs_bound(self):
        return self.j


@dataclass(frozen=True)
class DiscreteCoupling(CouplingLaw):
    """General finite-valued coupling law."""

    values: np.ndarray
    probabilities: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        p = np.asarray(self.probabilities, dtype=float)
        if v.shape != p.shape or v.ndim != 1 or v.size == 0:
            raise ValueError("values and probabilities must be matching 1-d arrays")
        if np.any(p < 0) or abs(p.sum() - 1.0) > 1e-12:
            raise ValueError("probabilities must be nonnegative and sum to 1")
        if not np.all(np.isfinite(v)):
            raise ValueError("coupling values must be finite")
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "probabilities", p)

    def sample(self, rng, size=None):
        return rng.choice(self.values, size=size, p=self.probabilities)

    def mean_coupling(self):
        return float(self.values @ self.probabilities)

    def second_moment(self):
        return float((self.values ** 2) @ self.probabilities)

    def abs_bound(self):
        return float(np.max(np.abs(self.values)))


@dataclass(frozen=True)
class GaussianCoupling(CouplingLaw):
    """Normal couplings; used for the large-degree / small-entry ensembles."""

    mean: float
    variance: float

    def __post_init__(self):
        if self.variance < 0:
            raise ValueError("variance must be nonnegative")

    @classmethod
    def scaled(cls, mu: float, j: float, mean_degree: float) -> "GaussianCoupling":
        """Mean mu*j/kbar and variance j^2/kbar for a degree-kbar ensemble."""
        return cls(mu * j / mean_degree, j ** 2 / mean_degree)

    def sample(self, rng, size=None):
        return rng.normal(self.mean, math.sqrt(self.variance), size=size)

    def mean_coupling(self):
        return self.mean

    def second_moment(self):
        return self.variance + self.mean ** 2


def sample_coupling(law: CouplingLaw, rng_seed) -> float:
    """Draw a single coupling value."""
    return float(law.sample(as_generator(rng_seed)))


# ---------------------------------------------------------------------------
# instances
# ---------------------------------------------------------------------------

@dataclass
class SparseSymmetricInstance:
    """An n-by-n symmetric weighted sparse matrix stored as an edge list.

    Each undirected edge appears once with row < col; the coupling is shared
    by both orientations and the diagonal is identically zero.
    """

    n: int
    row: np.ndarray
    col: np.ndarray
    weight: np.ndarray
    seed: int | None = None
    _adjacency: list | None = field(default=None, repr=False, compare=False)

    @property
    def edge_count(self) -> int:
        return int(self.row.size)

    def degrees(self) -> np.ndarray:
        d = np.bincount(self.row, minlength=self.n)
        d += np.bincount(self.col, minlength=self.n)
        return d

    @property
    def max_degree(self) -> int:
        return int(self.degrees().max(initial=0))

    @property
    def max_abs_coupling(self) -> float:
        return float(np.max(np.abs(self.weight))) if self.weight.size else 0.0

    def adjacency(self) -> list[list[tuple[int, float]]]:
        """Per-node list of (neighbor, coupling) pairs; built once and cached."""
        if self._adjacency is None:
            adj = [[] for _ in range(self.n)]
            for i, j, w in zip(self.row.tolist(), self.col.tolist(), self.weight.tolist()):
                adj[i].append((j, w))
                adj[j].append((i, w))
            self._adjacency = adj
        return self._adjacency

    def to_csr(self):
        from scipy.sparse import csr_matrix

        r = np.concatenate([self.row, self.col])
        c = np.concatenate([self.col, self.row])
        w = np.concatenate([self.weight, self.weight])
        return csr_matrix((w, (r, c)), shape=(self.n, self.n))

    def is_forest(self) -> bool:
        """True when the graph is cycle-free (union-find over the edges)."""
        parent = list(range(self.n))

        def find(x):
            while parent[x] != x:
                parent[x] = parent[parent[x]]
                x = parent[x]
            return x

        for i, j in zip(self.row.tolist(), self.col.tolist()):
            ri, rj = find(i), find(j)
            if ri == rj:
                return False
            parent[ri] = rj
        return True

    def is_connected(self) -> bool:
        if self.n == 0:
            return True
        adj = self.adjacency()
        seen = np.zeros(self.n, dtype=bool)
        stack = [0]
        seen[0] = True
        while stack:
            v = stack.pop()
            for u, _ in adj[v]:
                if not seen[u]:
                    seen[u] = True
                    stack.append(u)
        return bool(seen.all())

    def validate(self, expected_degrees=None) -> None:
        """Assert the structural invariants; raises GenerationError on violation."""
        if np.any(self.row == self.col):
            raise GenerationError("self-loop present")
        if np.any(self.row > self.col):
            raise GenerationError("edge list not stored with row < col")
        pairs = set(zip(self.row.tolist(), self.col.tolist()))
        if len(pairs) != self.edge_count:
            raise GenerationError("duplicate edge present")
        if self.row.size and (self.row.min() < 0 or self.col.max() >= self.n):
            raise GenerationError("edge endpoint out of range")
        if expected_degrees is not None:
            want = np.sort(np.asarray(expected_degrees, dtype=int))
            got = np.sort(self.degrees())
            if want.size != got.size or np.any(want != got):
                raise GenerationError("realized degree sequence does not match request")

    # --- edge-list text format -------------------------------------------

    def save(self, path) -> None:
        """Write header `n=<N> edges=<E> seed=<seed>` then `i j w` per edge."""
        seed_txt = "none" if self.seed is None else str(self.seed)
        with open(path, "w") as fh:
            fh.write(f"n={self.n} edges={self.edge_count} seed={seed_txt}\n")
            for i, j, w in zip(self.row.tolist(), self.col.tolist(), self.weight.tolist()):
                fh.write(f"{i} {j} {w!r}\n")

    @classmethod
    def load(cls, path) -> "SparseSymmetricInstance":
        with open(path) as fh:
            header = fh.readline().split()
            fields = dict(part.split("=", 1) for part in header)
            n = int(fields["n"])
            m = int(fields["edges"])
            seed = None if fields.get("seed", "none") == "none" else int(fields["seed"])
            row = np.empty(m, dtype=np.int64)
            col = np.empty(m, dtype=np.int64)
            weight = np.empty(m, dtype=float)
            for e in range(m):
                i_txt, j_txt, w_txt = fh.readline().split()
                row[e], col[e], weight[e] = int(i_txt), int(j_txt), float(w_txt)
        inst = cls(n=n, row=row, col=col, weight=weight, seed=seed)
        inst.validate()
        return inst


# ---------------------------------------------------------------------------
# generation
# ---------------------------------------------------------------------------

def sample_degree_sequence(p: DegreeDistribution, n: int, rng_seed) -> np.ndarray:
    """Deterministic largest-remainder rounding of n*p(k) into a degree multiset.

    The total degree is made even, when necessary, by moving one uniformly
    chosen index to the nearest support degree of opposite parity.
    """
    if n < 2:
        raise GenerationError("need at least two indices")
    ks = np.arange(p.mass.size)
    exact = n * p.mass
    counts = np.floor(exact).astype(int)
    residue = n - int(counts.sum())
    if residue:
        frac = exact - counts
        order = np.lexsort((ks, -frac))
        counts[order[:residue]] += 1
    degrees = np.repeat(ks, counts)
    if degrees.max(initial=0) >= n:
        raise GenerationError(f"infeasible sequence: degree {degrees.max()} >= n={n}")

    if degrees.sum() % 2:
        rng = as_generator(rng_seed)
        support = [int(k) for k in p.support if k < n]
        repairable = [
            idx for idx in range(n)
            if any((k - degrees[idx]) % 2 for k in support)
        ]
        if not repairable:
            raise GenerationError("no even-sum completion within the degree support")
        idx = repairable[int(rng.integers(len(repairable)))]
        candidates = [k for k in support if (k - degrees[idx]) % 2]
        degrees[idx] = min(candidates, key=lambda k: (abs(k - degrees[idx]), k))
    return degrees


def _deadlocked(stubs: list[int], edge_set: set) -> bool:
    distinct = sorted(set(stubs))
    if len(distinct) < 2:
        return True
    for a in range(len(distinct)):
        for b in range(a + 1, len(distinct)):
            if (distinct[a], distinct[b]) not in edge_set:
                return False
    return True


def _try_match(degrees: np.ndarray, rng: np.random.Generator):
    """One stub-matching pass; None signals a deadlock requiring a restart."""
    stubs = list(np.repeat(np.arange(degrees.size), degrees))
    edge_set: set[tuple[int, int]] = set()
    rejects = 0
    while stubs:
        a = int(rng.integers(len(stubs)))
        b = int(rng.integers(len(stubs) - 1))
        if b >= a:
            b += 1
        i, j = stubs[a], stubs[b]
        key = (i, j) if i < j else (j, i)
        if i != j and key not in edge_set:
            edge_set.add(key)
            for pos in sorted((a, b), reverse=True):
                stubs[pos] = stubs[-1]
                stubs.pop()
            rejects = 0
        else:
            rejects += 1
            if rejects > 64 + 4 * len(stubs):
                if _deadlocked(stubs, edge_set):
                    return None
                rejects = 0
    return sorted(edge_set)


def generate_instance(
    degrees,
    law: CouplingLaw,
    rng_seed,
    *,
    restart_cap: int = 100,
) -> SparseSymmetricInstance:
    """Stub matching with restart on deadlock; couplings assigned after topology."""
    degrees = np.asarray(degrees, dtype=int)
    n = int(degrees.size)
    if n < 2:
        raise GenerationError("need at least two indices")
    if degrees.sum() % 2:
        raise GenerationError("degree sum must be even")
    if degrees.max(initial=0) >= n:
        raise GenerationError(f"infeasible sequence: degree {degrees.max()} >= n={n}")

    rng = as_generator(rng_seed)
    seed_label = rng_seed if isinstance(rng_seed, (int, np.integer)) else None
    edges = None
    for _ in range(restart_cap + 1):
        edges = _try_match(degrees, rng)
        if edges is not None:
            break
    if edges is None:
        raise GenerationError(f"generation stalled after {restart_cap} restarts")

    row = np.array([e[0] for e in edges], dtype=np.int64)
    col = np.array([e[1] for e in edges], dtype=np.int64)
    weight = np.atleast_1d(np.asarray(law.sample(rng, row.size), dtype=float))
    inst = SparseSymmetricInstance(
        n=n, row=row, col=col, weight=weight,
        seed=int(seed_label) if seed_label is not None else None,
    )
    inst.validate(expected_degrees=degrees)
    return inst
