"""Shared density-histogram container for eigenvector component statistics."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = ["Histogram", "make_edges", "histogram_density"]

DEFAULT_BINS = (-4.0, 4.0, 61)


def make_edges(bins) -> np.ndarray:
    """Accept (lo, hi, n_bins) or an explicit edge array."""
    if isinstance(bins, tuple) and len(bins) == 3:
        lo, hi, n = bins
        if not hi > lo or int(n) < 1:
            raise ValueError("bad binning spec")
        return np.linspace(lo, hi, int(n) + 1)
    edges = np.asarray(bins, dtype=float)
    if edges.ndim != 1 or edges.size < 2 or np.any(np.diff(edges) <= 0):
        raise ValueError("edges must be strictly increasing")
    return edges


@dataclass
class Histogram:
    """Density normalized by the total sample count, including samples that
    fall outside the binned range (so the binned mass is the in-range
    fraction and the full density integrates to one)."""

    edges: np.ndarray
    density: np.ndarray
    total: int
    in_range: int
    excluded: int = 0

    @property
    def widths(self) -> np.ndarray:
        return np.diff(self.edges)

    def binned_mass(self) -> float:
        return float(self.density @ self.widths)

    def l1_distance(self, other: "Histogram") -> float:
        if not np.allclose(self.edges, other.edges):
            raise ValueError("histograms use different binnings")
        return float(np.abs(self.density - other.density) @ self.widths)

    def save_csv(self, path) -> None:
        with open(path, "w") as fh:
            fh.write("bin_left,bin_right,density\n")
            for left, right, d in zip(self.edges[:-1], self.edges[1:], self.density):
                fh.write(f"{left!r},{right!r},{d!r}\n")


def histogram_density(samples: np.ndarray, bins=DEFAULT_BINS, *, excluded: int = 0) -> Histogram:
    samples = np.asarray(samples, dtype=float).ravel()
    if samples.size == 0:
        raise ValueError("no samples to bin")
    edges = make_edges(bins)
    counts, _ = np.histogram(samples, bins=edges)
    density = counts / (samples.size * np.diff(edges))
    return Histogram(
        edges=edges,
        density=density,
        total=int(samples.size),
        in_range=int(counts.sum()),
        excluded=excluded,
    )
