import numpy as np
import pytest

from simthresh.embeddings import EmbeddingModel, ModelEnsemble


def hub_model(
    sims: dict[str, float], hub: str = "a", model_id: str = "toy", dim: int | None = None
) -> EmbeddingModel:
    """Model where cosine(hub, t) is exactly sims[t]; other tokens sit in
    their own coordinate plane so cross-similarities are sims[i]*sims[j]."""
    tokens = [hub, *sims]
    dim = len(tokens) if dim is None else dim
    vectors = np.zeros((len(tokens), dim))
    vectors[0, 0] = 1.0
    for i, (_, s) in enumerate(sims.items(), start=1):
        vectors[i, 0] = s
        vectors[i, i] = np.sqrt(1.0 - s * s)
    return EmbeddingModel.from_arrays(tokens, vectors, model_id=model_id)


def random_model(
    rng: np.random.Generator, n_tokens: int, dim: int, model_id: str = "rand"
) -> EmbeddingModel:
    tokens = [f"t{i:04d}" for i in range(n_tokens)]
    vectors = rng.standard_normal((n_tokens, dim))
    return EmbeddingModel.from_arrays(tokens, vectors, model_id=model_id)


def perturbed_replicas(
    base: EmbeddingModel, rng: np.random.Generator, count: int, sigma: float
) -> list[EmbeddingModel]:
    """Replicas built as base + iid Gaussian noise, re-normalized."""
    out = []
    for r in range(count):
        noisy = base.vectors + sigma * rng.standard_normal(base.vectors.shape)
        out.append(EmbeddingModel.from_arrays(base.vocabulary, noisy, model_id=f"{base.model_id}-r{r}"))
    return out


def pair_ensemble(sim_values: list[float]) -> ModelEnsemble:
    """Ensemble of two-token replicas whose pair similarity takes the given
    value in each replica."""
    replicas = []
    for r, s in enumerate(sim_values):
        vectors = np.array([[1.0, 0.0], [s, np.sqrt(1.0 - s * s)]])
        replicas.append(EmbeddingModel.from_arrays(["a", "b"], vectors, model_id=f"r{r}"))
    return ModelEnsemble(replicas)


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(42)
