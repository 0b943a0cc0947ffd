"""The four clustering algorithms of the ensemble."""

from ._labeling import FitError, Labeling
from .gmm import GMMConfig, GMMResult, fit_gmm
from .hierarchy import Dendrogram, HCAConfig, cut_dendrogram, fit_hca
from .kmeans import KMeansConfig, KMeansResult, fit_kmeans
from .spectral import SpectralConfig, build_affinity, fit_spectral, normalized_laplacian

ALGORITHMS = ("kmeans", "gmm", "hca", "spectral")
_CONFIGS = {"kmeans": KMeansConfig, "gmm": GMMConfig, "hca": HCAConfig, "spectral": SpectralConfig}


def make_config(algorithm: str, hyper: dict, **defaults):
    """Config object for ``algorithm`` from a hyperparameter mapping over ``defaults``."""
    try:
        cls = _CONFIGS[algorithm]
    except KeyError:
        raise ValueError(f"unknown algorithm {algorithm!r}") from None
    try:
        return cls(**{**defaults, **hyper})
    except TypeError as exc:
        raise ValueError(f"bad hyperparameters for {algorithm}: {exc}") from None


def fit_labels(algorithm: str, X, k: int, config, seed: int = 0) -> Labeling:
    """Labeling of ``X`` into ``k`` clusters with any of the four algorithms."""
    if algorithm == "kmeans":
        return fit_kmeans(X, k, config, seed).labeling
    if algorithm == "gmm":
        return fit_gmm(X, k, config, seed).labeling
    if algorithm == "hca":
        return cut_dendrogram(fit_hca(X, config), k)
    if algorithm == "spectral":
        return fit_spectral(X, k, config, seed)
    raise ValueError(f"unknown algorithm {algorithm!r}")


__all__ = [
    "ALGORITHMS",
    "Dendrogram",
    "FitError",
    "GMMConfig",
    "GMMResult",
    "HCAConfig",
    "KMeansConfig",
    "KMeansResult",
    "Labeling",
    "SpectralConfig",
    "build_affinity",
    "cut_dendrogram",
    "fit_gmm",
    "fit_hca",
    "fit_kmeans",
    "fit_labels",
    "fit_spectral",
    "make_config",
    "normalized_laplacian",
]
