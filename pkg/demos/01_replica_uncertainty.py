# %% [markdown]
# # How much do embedding replicas disagree?
#
# Two models trained identically except for their random seed assign slightly
# different similarity values to the same term pair. This script builds a base
# model, perturbs it into two synthetic "replicas", and measures the mean
# absolute similarity disagreement as a function of the similarity value
# itself. The disagreement is largest for weakly related pairs and shrinks as
# pairs become strongly related.

# %%
from pathlib import Path

import numpy as np

from simthresh.embeddings import EmbeddingModel
from simthresh.uncertainty import (
    HistogramConfig,
    similarity_histogram,
    uncertainty_curve,
    write_histogram_csv,
    write_uncertainty_csv,
)

OUT = Path(__file__).resolve().parent / "output"
OUT.mkdir(exist_ok=True)

rng = np.random.default_rng(7)

# %% A base model plus two noisy replicas of it. Half the probe terms get a
# planted near-duplicate partner so the high-similarity end of the curve is
# populated too.
n_tokens, dim, noise = 800, 64, 0.02
tokens = [f"term{i:04d}" for i in range(n_tokens)]
base = rng.standard_normal((n_tokens, dim))
base /= np.linalg.norm(base, axis=1, keepdims=True)
for i in range(0, 40, 2):  # term0000~term0001, term0002~term0003, ...
    partner = 0.97 * base[i] + np.sqrt(1 - 0.97**2) * base[i + 1]
    base[i + 1] = partner / np.linalg.norm(partner)
replica_m = EmbeddingModel.from_arrays(tokens, base + noise * rng.standard_normal(base.shape), "M")
replica_p = EmbeddingModel.from_arrays(tokens, base + noise * rng.standard_normal(base.shape), "P")

# %% A probe set stands in for "an arbitrary term".
probes = tokens[:40] + [tokens[int(i)] for i in rng.choice(range(40, n_tokens), size=20, replace=False)]

config = HistogramConfig(domain_low=-0.2, domain_high=1.0, bin_count=500)
curve = uncertainty_curve(replica_m, replica_p, probes, config)
hist = similarity_histogram(replica_m, probes, config)

write_uncertainty_csv(curve, str(OUT / "uncertainty_curve.csv"))
write_histogram_csv(hist, str(OUT / "similarity_histogram.csv"))

# %% Summarize: disagreement falls as similarity rises.
populated = curve.pair_counts > 0
edges = config.edges
print(f"pairs tallied: {int(curve.pair_counts.sum())} "
      f"(+{curve.out_of_domain_count} outside the domain)")
print(f"populated bins: {int(populated.sum())} of {config.bin_count}")
print()
print("similarity band    pairs    mean |sim_M - sim_P|")
for lo, hi in [(-0.1, 0.0), (0.0, 0.1), (0.1, 0.2), (0.2, 0.8), (0.8, 1.0)]:
    mask = populated & (edges[:-1] >= lo) & (edges[1:] <= hi)
    if not mask.any():
        continue
    weights = curve.pair_counts[mask]
    mean = float(np.sum(curve.mean_abs_diff[mask] * weights) / weights.sum())
    print(f"[{lo:+.1f}, {hi:+.1f})   {int(weights.sum()):8d}    {mean:.5f}")

print()
print(f"CSV data written to {OUT}/")
