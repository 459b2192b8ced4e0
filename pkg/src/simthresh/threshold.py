"""Similarity thresholds: where the expected-neighbor curve meets a synonym target.

The main threshold is the similarity at which the aggregated expected-neighbor
curve equals the lexicon-derived mean synonym count; the lower/upper bounds
are where the confidence band's edges meet the same target.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.special import ndtr, ndtri

from .neighbors import NeighborCurve

__all__ = [
    "SynonymTarget",
    "ThresholdResult",
    "TargetUnreachableError",
    "solve_threshold",
    "synonym_statistics",
    "parse_synsets",
    "write_threshold_csv",
    "read_threshold_csv",
]

# Tolerated upward float wiggle when validating that a curve is non-increasing.
_MONOTONE_SLACK = 1e-9
# Bisection refinement stops once the bracket is this narrow (in similarity).
_BISECT_TOL = 1e-4


class TargetUnreachableError(ValueError):
    """The curve never crosses the requested neighbor count."""


@dataclass(frozen=True)
class SynonymTarget:
    """Average synonym count used as the expected-neighbor target."""

    mean_synonyms: float
    std_synonyms: float = 0.0
    term_count: int = 0
    source_label: str = ""

    def __post_init__(self) -> None:
        if self.mean_synonyms < 0:
            raise ValueError("mean_synonyms must be nonnegative")
        if self.std_synonyms < 0:
            raise ValueError("std_synonyms must be nonnegative")


@dataclass(frozen=True)
class ThresholdResult:
    """Derived similarity cut points for one dimensionality."""

    dimensionality: int
    main: float
    lower: float
    upper: float
    target: SynonymTarget

    def __post_init__(self) -> None:
        if not self.lower <= self.main <= self.upper:
            raise ValueError("threshold bounds out of order")


def _first_crossing(
    grid: np.ndarray,
    values: np.ndarray,
    target: float,
    label: str,
    refine: Callable[[float], float] | None = None,
) -> float:
    """Leftmost s where a descending curve passes through ``target``.

    Linear interpolation between the bracketing grid points; when ``refine``
    supplies the continuous curve, the bracket is narrowed by bisection
    instead.
    """
    if values[0] < target:
        raise TargetUnreachableError(
            f"{label}: target {target} above curve start {values[0]:.6g}"
        )
    hits = np.flatnonzero((values[:-1] >= target) & (values[1:] <= target))
    if len(hits) == 0:
        raise TargetUnreachableError(
            f"{label}: curve never descends to target {target} (ends at {values[-1]:.6g})"
        )
    i = int(hits[0])
    lo, hi = float(grid[i]), float(grid[i + 1])
    v_lo, v_hi = float(values[i]), float(values[i + 1])
    if refine is not None and refine(lo) >= target >= refine(hi):
        while hi - lo > _BISECT_TOL:
            mid = 0.5 * (lo + hi)
            if refine(mid) >= target:
                lo = mid
            else:
                hi = mid
        return 0.5 * (lo + hi)
    if v_lo == v_hi:
        return lo
    return lo + (hi - lo) * (v_lo - target) / (v_lo - v_hi)


def solve_threshold(
    curve: NeighborCurve,
    target: SynonymTarget | float,
    dimensionality: int = 0,
    expected_fn: Callable[[float], float] | None = None,
) -> ThresholdResult:
    """Solve expected(s) = target for the main threshold and band crossings.

    The band's lower edge sits below the mean curve and therefore meets the
    target at a smaller similarity, giving the lower bound; the upper edge
    gives the upper bound. Curves without a band yield lower == main == upper.
    ``expected_fn`` optionally supplies the continuous curve for bisection
    refinement of the main crossing; band crossings always interpolate the
    grid samples.
    """
    if isinstance(target, (int, float)):
        target = SynonymTarget(mean_synonyms=float(target), source_label="numeric")
    if target.mean_synonyms <= 0:
        raise TargetUnreachableError("target must be positive to cross a survival curve")
    expected = np.asarray(curve.expected, dtype=np.float64)
    slack = _MONOTONE_SLACK * max(1.0, abs(float(expected[0])))
    if np.any(np.diff(expected) > slack):
        raise ValueError("expected-neighbor curve is not non-increasing")
    goal = target.mean_synonyms
    main = _first_crossing(curve.grid, expected, goal, "expected", refine=expected_fn)
    if curve.band_low is not None and curve.band_high is not None:
        lower = _first_crossing(curve.grid, np.asarray(curve.band_low), goal, "band_low")
        upper = _first_crossing(curve.grid, np.asarray(curve.band_high), goal, "band_high")
    else:
        lower = upper = main
    # Guard against float jitter when the band is degenerate.
    lower = min(lower, main)
    upper = max(upper, main)
    return ThresholdResult(
        dimensionality=dimensionality, main=main, lower=lower, upper=upper, target=target
    )


def parse_synsets(path: str) -> list[list[str]]:
    """Synset file: one synset per line, lemmas space-separated, multiword
    lemmas joined with underscores; '#' lines are comments."""
    synsets: list[list[str]] = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            lemmas = [w.strip().lower() for w in line.split()]
            synsets.append([w for w in lemmas if w])
    if not synsets:
        raise ValueError(f"{path}: no synsets found")
    return synsets


def _single_word(lemma: str) -> bool:
    return "_" not in lemma and " " not in lemma


def synonym_statistics(synsets: list[list[str]] | str, source_label: str = "") -> SynonymTarget:
    """Mean/population-std of per-lemma synonym counts over a synset list.

    A lemma's synonyms are the distinct single-word lemmas sharing at least
    one synset with it (itself excluded); multiword lemmas are dropped both
    as headwords and as synonyms. Lemma matching is case-insensitive.
    """
    if isinstance(synsets, str):
        source_label = source_label or synsets
        synsets = parse_synsets(synsets)
    co_members: dict[str, set[str]] = {}
    for synset in synsets:
        members = {w.strip().lower() for w in synset if _single_word(w.strip())}
        members.discard("")
        for lemma in members:
            co_members.setdefault(lemma, set()).update(members)
    if not co_members:
        raise ValueError("no single-word lemmas in synset input")
    # Sorted so the statistics are bitwise independent of input order.
    counts = np.sort(np.array([len(v) - 1 for v in co_members.values()], dtype=np.float64))
    return SynonymTarget(
        mean_synonyms=float(counts.mean()),
        std_synonyms=float(counts.std(ddof=0)),
        term_count=len(counts),
        source_label=source_label,
    )


def write_threshold_csv(results: list[ThresholdResult], path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("dimensionality,lower,main,upper\n")
        for r in results:
            fh.write(f"{r.dimensionality},{r.lower!r},{r.main!r},{r.upper!r}\n")


def read_threshold_csv(path: str) -> list[tuple[int, float, float, float]]:
    rows = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line or line.startswith("dimensionality") or line.startswith("#"):
                continue
            dim, lower, main, upper = line.split(",")
            rows.append((int(dim), float(lower), float(main), float(upper)))
    return rows


def normal_quantile(p: float) -> float:
    """Standard normal inverse CDF (handy for closed-form threshold checks)."""
    if not 0 < p < 1:
        raise ValueError("p must be in (0, 1)")
    return float(ndtri(p))


def survival_curve_fn(means: np.ndarray, stds: np.ndarray) -> Callable[[float], float]:
    """Continuous mixture-survival evaluator, e.g. for bisection refinement."""
    means = np.asarray(means, dtype=np.float64)
    stds = np.asarray(stds, dtype=np.float64)

    def fn(s: float) -> float:
        return float((1.0 - ndtr((s - means) / stds)).sum())

    return fn
