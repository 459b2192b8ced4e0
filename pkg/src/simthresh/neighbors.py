"""Continuous expected-neighbor curves built from replica similarity spread.

Each (term, other) pair's similarity across the replica ensemble is fitted as
a normal distribution; the expected number of neighbors above a similarity s
is then the sum of the pairs' survival probabilities at s. Per-term curves are
averaged over a probe set, with a normal-approximation confidence band on the
mean.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import ndtr, ndtri

from .embeddings import ModelEnsemble

__all__ = [
    "PairSimilarityDistribution",
    "NeighborCurve",
    "default_grid",
    "fit_pair",
    "pair_statistics",
    "expected_neighbors",
    "aggregate_curves",
    "write_curve_csv",
    "read_curve_csv",
]

# Degenerate zero-variance pairs become near-step survival functions instead
# of divisions by zero.
STD_FLOOR = 1e-6


def default_grid(low: float = -0.2, high: float = 1.0, points: int = 2401) -> np.ndarray:
    """Uniform similarity grid; the default step (5e-4) keeps interpolation
    error below the 3-decimal reporting precision of derived thresholds."""
    if points < 2:
        raise ValueError("grid needs at least 2 points")
    return np.linspace(low, high, points)


@dataclass(frozen=True)
class PairSimilarityDistribution:
    """Normal fit to one term pair's similarities across R replicas."""

    term: str
    other: str
    mean: float
    std: float
    sample_count: int


@dataclass(eq=False)
class NeighborCurve:
    """Expected neighbor count over a similarity grid.

    Per-term curves carry ``term`` and no band; aggregated curves carry
    ``n_terms`` and a confidence band with band_low <= expected <= band_high.
    """

    grid: np.ndarray
    expected: np.ndarray
    band_low: np.ndarray | None = None
    band_high: np.ndarray | None = None
    term: str | None = None
    n_terms: int | None = None

    def __post_init__(self) -> None:
        if np.any(np.diff(self.grid) <= 0):
            raise ValueError("grid must be strictly increasing")
        if len(self.grid) != len(self.expected):
            raise ValueError("grid and expected lengths differ")

    @property
    def is_aggregated(self) -> bool:
        return self.n_terms is not None


def pair_statistics(ensemble: ModelEnsemble, term: str) -> tuple[list[str], np.ndarray, np.ndarray]:
    """Means and stds of cosine(term, u) across replicas, for every other
    shared-vocabulary term u.

    Accumulates per-replica sums and squared sums, so only two vocabulary-size
    arrays are alive at once regardless of replica count.
    """
    ensemble.require_shared(term)
    shared = ensemble.shared_vocabulary
    others = [t for t in shared if t != term]
    if not others:
        raise ValueError("shared vocabulary has no other terms")
    r = ensemble.replica_count
    acc = np.zeros(len(others), dtype=np.float64)
    acc_sq = np.zeros(len(others), dtype=np.float64)
    for model in ensemble.replicas:
        rows = np.array([model.row(t) for t in others], dtype=np.int64)
        sims = np.clip(model.vectors[rows] @ model.vector(term), -1.0, 1.0)
        acc += sims
        acc_sq += sims * sims
    means = acc / r
    # n-1 denominator; cancellation noise can push the numerator a hair
    # negative, which the floor absorbs.
    var = np.maximum(acc_sq - r * means * means, 0.0) / (r - 1)
    stds = np.maximum(np.sqrt(var), STD_FLOOR)
    return others, means, stds


def fit_pair(ensemble: ModelEnsemble, term: str, other: str) -> PairSimilarityDistribution:
    """Normal fit for a single pair (sample mean, n-1 std floored at 1e-6)."""
    if term == other:
        raise ValueError("a pair needs two distinct terms")
    ensemble.require_shared(term)
    ensemble.require_shared(other)
    sims = np.array([m.cosine(term, other) for m in ensemble.replicas])
    mean = float(sims.mean())
    std = max(float(sims.std(ddof=1)), STD_FLOOR)
    return PairSimilarityDistribution(
        term=term, other=other, mean=mean, std=std, sample_count=len(sims)
    )


def mixture_survival(grid: np.ndarray, means: np.ndarray, stds: np.ndarray) -> np.ndarray:
    """Sum over components of P(similarity > s), evaluated on the grid."""
    grid = np.asarray(grid, dtype=np.float64)
    total = np.zeros(len(grid), dtype=np.float64)
    chunk = max(1, int(4e6 // max(len(grid), 1)))
    for start in range(0, len(means), chunk):
        m = means[start : start + chunk]
        s = stds[start : start + chunk]
        z = (grid[:, None] - m[None, :]) / s[None, :]
        total += (1.0 - ndtr(z)).sum(axis=1)
    return total


def expected_neighbors(ensemble: ModelEnsemble, term: str, grid: np.ndarray | None = None) -> NeighborCurve:
    """Per-term expected-neighbor curve E(s) = sum of pair survivals at s."""
    if grid is None:
        grid = default_grid()
    _, means, stds = pair_statistics(ensemble, term)
    expected = mixture_survival(grid, means, stds)
    return NeighborCurve(grid=np.asarray(grid, dtype=np.float64), expected=expected, term=term)


def aggregate_curves(curves: list[NeighborCurve], confidence: float = 0.95) -> NeighborCurve:
    """Pointwise mean over per-term curves with a confidence band on the mean.

    The band is mean +/- z * (sample std / sqrt(n)); its lower edge is floored
    at zero since neighbor counts cannot be negative.
    """
    if len(curves) < 2:
        raise ValueError("aggregation needs at least 2 curves")
    if not 0.0 < confidence < 1.0:
        raise ValueError("confidence must be in (0, 1)")
    grid = curves[0].grid
    for c in curves[1:]:
        if len(c.grid) != len(grid) or not np.array_equal(c.grid, grid):
            raise ValueError("curves must share an identical grid")
    stack = np.vstack([c.expected for c in curves])
    mean = stack.mean(axis=0)
    std = stack.std(axis=0, ddof=1)
    z = float(ndtri(0.5 + confidence / 2.0))
    half = z * std / np.sqrt(len(curves))
    return NeighborCurve(
        grid=grid,
        expected=mean,
        band_low=np.maximum(mean - half, 0.0),
        band_high=mean + half,
        n_terms=len(curves),
    )


def _fmt(x: float) -> str:
    return repr(float(x))


def write_curve_csv(curve: NeighborCurve, path: str) -> None:
    """One row per grid point: grid_s, expected, band_low, band_high
    (band fields empty for per-term curves)."""
    label = f"term={curve.term}" if curve.term is not None else f"n_terms={curve.n_terms}"
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"# source {label}\n")
        fh.write("grid_s,expected,band_low,band_high\n")
        for i in range(len(curve.grid)):
            lo = "" if curve.band_low is None else _fmt(curve.band_low[i])
            hi = "" if curve.band_high is None else _fmt(curve.band_high[i])
            fh.write(f"{_fmt(curve.grid[i])},{_fmt(curve.expected[i])},{lo},{hi}\n")


def read_curve_csv(path: str) -> NeighborCurve:
    grid, expected, lows, highs = [], [], [], []
    term = None
    n_terms = None
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if line.startswith("# source term="):
                term = line.split("term=", 1)[1]
                continue
            if line.startswith("# source n_terms="):
                n_terms = int(line.split("n_terms=", 1)[1])
                continue
            if not line or line.startswith("grid_s") or line.startswith("#"):
                continue
            s, e, lo, hi = line.split(",")
            grid.append(float(s))
            expected.append(float(e))
            lows.append(float(lo) if lo else np.nan)
            highs.append(float(hi) if hi else np.nan)
    if not grid:
        raise ValueError(f"{path}: no grid points found")
    has_band = not all(np.isnan(lows))
    return NeighborCurve(
        grid=np.asarray(grid),
        expected=np.asarray(expected),
        band_low=np.asarray(lows) if has_band else None,
        band_high=np.asarray(highs) if has_band else None,
        term=term,
        n_terms=n_terms,
    )
