"""Similarity disagreement between two embedding replicas, binned by similarity.

For a set of probe terms, every (probe, other-term) pair is placed in the bin
holding its similarity under the reference replica; the bin then averages the
absolute difference between the two replicas' similarities for its pairs. The
same binning machinery also produces plain similarity histograms.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .embeddings import EmbeddingModel

__all__ = [
    "HistogramConfig",
    "UncertaintyCurve",
    "SimilarityHistogram",
    "uncertainty_curve",
    "similarity_histogram",
    "write_uncertainty_csv",
    "read_uncertainty_csv",
    "write_histogram_csv",
    "read_histogram_csv",
]


@dataclass(frozen=True)
class HistogramConfig:
    """Uniform binning of the similarity axis.

    The default splits (-0.2, 1.0) into 500 equal bins. Bins are half-open
    [low, high) with the final bin closed so the domain is covered exactly
    once; similarities outside the domain are tallied separately, never
    clamped into edge bins.
    """

    domain_low: float = -0.2
    domain_high: float = 1.0
    bin_count: int = 500

    def __post_init__(self) -> None:
        if not self.domain_low < self.domain_high:
            raise ValueError("domain_low must be < domain_high")
        if self.bin_count < 1:
            raise ValueError("bin_count must be positive")

    @property
    def bin_width(self) -> float:
        return (self.domain_high - self.domain_low) / self.bin_count

    @property
    def edges(self) -> np.ndarray:
        return self.domain_low + self.bin_width * np.arange(self.bin_count + 1)

    def bin_indices(self, values: np.ndarray) -> np.ndarray:
        """Bin index per value; -1 marks out-of-domain values."""
        values = np.asarray(values, dtype=np.float64)
        idx = np.floor((values - self.domain_low) / self.bin_width).astype(np.int64)
        idx[values == self.domain_high] = self.bin_count - 1
        out = (values < self.domain_low) | (values > self.domain_high)
        idx[out] = -1
        return idx


@dataclass(eq=False)
class UncertaintyCurve:
    """Mean absolute replica disagreement per similarity bin."""

    config: HistogramConfig
    pair_counts: np.ndarray  # int64 per bin
    mean_abs_diff: np.ndarray  # float64 per bin, NaN where pair_counts == 0
    out_of_domain_count: int = 0

    def rows(self) -> list[tuple[float, float, int, float]]:
        """(bin_low, bin_high, pair_count, mean_abs_diff) per bin, in order."""
        edges = self.config.edges
        return [
            (float(edges[i]), float(edges[i + 1]), int(self.pair_counts[i]), float(self.mean_abs_diff[i]))
            for i in range(self.config.bin_count)
        ]


@dataclass(eq=False)
class SimilarityHistogram:
    """Counts of similarity values per bin."""

    config: HistogramConfig
    counts: np.ndarray  # int64 per bin
    out_of_domain_count: int = 0

    @property
    def total(self) -> int:
        return int(self.counts.sum()) + self.out_of_domain_count


def _pair_sims(model: EmbeddingModel, rows: np.ndarray, probe: str) -> np.ndarray:
    sims = model.vectors[rows] @ model.vector(probe)
    return np.clip(sims, -1.0, 1.0)


def uncertainty_curve(
    reference: EmbeddingModel,
    other: EmbeddingModel,
    probe_terms: list[str],
    config: HistogramConfig = HistogramConfig(),
) -> UncertaintyCurve:
    """Binned mean |sim_reference - sim_other| over probe/vocabulary pairs.

    Pairs run over each probe term against every other term of the shared
    vocabulary; each pair lands in the bin of its reference-model similarity.
    Probe terms must exist in both models.
    """
    if not probe_terms:
        raise ValueError("probe_terms must be nonempty")
    if reference.dimensionality != other.dimensionality:
        raise ValueError("models disagree on dimensionality")
    for t in probe_terms:
        if t not in reference:
            raise KeyError(f"probe term {t!r} missing from model {reference.model_id!r}")
        if t not in other:
            raise KeyError(f"probe term {t!r} missing from model {other.model_id!r}")

    shared = [t for t in reference.vocabulary if t in other]
    if not shared:
        raise ValueError("models share no vocabulary")
    ref_rows = np.array([reference.row(t) for t in shared], dtype=np.int64)
    oth_rows = np.array([other.row(t) for t in shared], dtype=np.int64)
    pos_in_shared = {t: i for i, t in enumerate(shared)}

    counts = np.zeros(config.bin_count, dtype=np.int64)
    diff_sums = np.zeros(config.bin_count, dtype=np.float64)
    out_of_domain = 0
    for probe in probe_terms:
        sims_ref = _pair_sims(reference, ref_rows, probe)
        sims_oth = _pair_sims(other, oth_rows, probe)
        keep = np.arange(len(shared)) != pos_in_shared[probe]
        sims_ref, sims_oth = sims_ref[keep], sims_oth[keep]
        idx = config.bin_indices(sims_ref)
        out_of_domain += int(np.count_nonzero(idx < 0))
        ok = idx >= 0
        counts += np.bincount(idx[ok], minlength=config.bin_count)
        diffs = np.abs(sims_ref - sims_oth)
        diff_sums += np.bincount(idx[ok], weights=diffs[ok], minlength=config.bin_count)

    with np.errstate(invalid="ignore"):
        mean = np.where(counts > 0, diff_sums / np.maximum(counts, 1), np.nan)
    return UncertaintyCurve(
        config=config, pair_counts=counts, mean_abs_diff=mean, out_of_domain_count=out_of_domain
    )


def similarity_histogram(
    model: EmbeddingModel,
    probe_terms: list[str],
    config: HistogramConfig = HistogramConfig(),
) -> SimilarityHistogram:
    """Histogram of cosine(probe, y) over every probe term and every y != probe."""
    if not probe_terms:
        raise ValueError("probe_terms must be nonempty")
    all_rows = np.arange(len(model), dtype=np.int64)
    counts = np.zeros(config.bin_count, dtype=np.int64)
    out_of_domain = 0
    for probe in probe_terms:
        sims = _pair_sims(model, all_rows, probe)
        sims = np.delete(sims, model.row(probe))
        idx = config.bin_indices(sims)
        out_of_domain += int(np.count_nonzero(idx < 0))
        counts += np.bincount(idx[idx >= 0], minlength=config.bin_count)
    return SimilarityHistogram(config=config, counts=counts, out_of_domain_count=out_of_domain)


def _fmt(x: float) -> str:
    return repr(float(x))


def write_uncertainty_csv(curve: UncertaintyCurve, path: str) -> None:
    """One row per bin: bin_low, bin_high, pair_count, mean_abs_diff.

    The mean field is empty for unpopulated bins. A leading comment line
    records the out-of-domain pair count.
    """
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"# out_of_domain_pairs={curve.out_of_domain_count}\n")
        fh.write("bin_low,bin_high,pair_count,mean_abs_diff\n")
        for low, high, count, mean in curve.rows():
            mean_s = "" if count == 0 else _fmt(mean)
            fh.write(f"{_fmt(low)},{_fmt(high)},{count},{mean_s}\n")


def read_uncertainty_csv(path: str) -> UncertaintyCurve:
    lows, counts, means, out_of_domain = [], [], [], 0
    highs: list[float] = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if line.startswith("# out_of_domain_pairs="):
                out_of_domain = int(line.split("=", 1)[1])
                continue
            if not line or line.startswith("bin_low") or line.startswith("#"):
                continue
            low, high, count, mean = line.split(",")
            lows.append(float(low))
            highs.append(float(high))
            counts.append(int(count))
            means.append(float(mean) if mean else np.nan)
    if not lows:
        raise ValueError(f"{path}: no bins found")
    config = HistogramConfig(domain_low=lows[0], domain_high=highs[-1], bin_count=len(lows))
    return UncertaintyCurve(
        config=config,
        pair_counts=np.asarray(counts, dtype=np.int64),
        mean_abs_diff=np.asarray(means, dtype=np.float64),
        out_of_domain_count=out_of_domain,
    )


def write_histogram_csv(hist: SimilarityHistogram, path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"# out_of_domain_count={hist.out_of_domain_count}\n")
        fh.write("bin_low,bin_high,count\n")
        edges = hist.config.edges
        for i in range(hist.config.bin_count):
            fh.write(f"{_fmt(edges[i])},{_fmt(edges[i + 1])},{int(hist.counts[i])}\n")


def read_histogram_csv(path: str) -> SimilarityHistogram:
    lows, counts, out_of_domain = [], [], 0
    highs: list[float] = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if line.startswith("# out_of_domain_count="):
                out_of_domain = int(line.split("=", 1)[1])
                continue
            if not line or line.startswith("bin_low") or line.startswith("#"):
                continue
            low, high, count = line.split(",")
            lows.append(float(low))
            highs.append(float(high))
            counts.append(int(count))
    if not lows:
        raise ValueError(f"{path}: no bins found")
    config = HistogramConfig(domain_low=lows[0], domain_high=highs[-1], bin_count=len(lows))
    return SimilarityHistogram(
        config=config, counts=np.asarray(counts, dtype=np.int64), out_of_domain_count=out_of_domain
    )
