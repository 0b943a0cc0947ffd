"""Gaussian mixture models fitted by expectation-maximization."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import linalg
from scipy.special import logsumexp

from ._labeling import FitError, Labeling, canonical_relabel, check_k
from .kmeans import KMeansConfig, fit_kmeans

COVARIANCE_TYPES = ("diag", "tied", "spherical")
_LOG_2PI = np.log(2.0 * np.pi)


@dataclass(frozen=True)
class GMMConfig:
    covariance_type: str = "diag"
    reg_covar: float = 1e-6
    n_init: int = 1
    max_iter: int = 100
    tol: float = 1e-3

    def __post_init__(self):
        if self.covariance_type not in COVARIANCE_TYPES:
            raise ValueError(
                f"covariance_type must be one of {COVARIANCE_TYPES}, got {self.covariance_type!r}"
            )
        if self.reg_covar < 0:
            raise ValueError(f"reg_covar must be >= 0, got {self.reg_covar}")
        if self.n_init < 1:
            raise ValueError(f"n_init must be >= 1, got {self.n_init}")
        if self.max_iter < 1:
            raise ValueError(f"max_iter must be >= 1, got {self.max_iter}")


@dataclass(frozen=True, eq=False)
class GMMResult:
    """A fitted mixture.

    ``covariances`` has shape ``(k, d)`` for diag, ``(d, d)`` for tied and
    ``(k,)`` for spherical.  ``log_likelihood`` is the total (not mean)
    log-likelihood of the training data; ``history`` holds the mean
    log-likelihood after every E-step.  Components that win no point under
    the argmax rule are dropped from ``labeling``, so ``labeling.k`` may be
    smaller than ``k``.
    """

    labeling: Labeling
    weights: np.ndarray
    means: np.ndarray
    covariances: np.ndarray
    covariance_type: str
    log_likelihood: float
    history: list = field(default_factory=list)
    converged: bool = False

    @property
    def k(self) -> int:
        return self.weights.size


def _m_step(X, resp, cov_type, reg):
    """Maximize the expected complete log-likelihood with every variance >= reg.

    The constrained optimum clips the unconstrained variances (for tied,
    the eigenvalues of the pooled scatter) at ``reg``, so each step is an
    exact maximization and the likelihood never decreases.
    """
    n, d = X.shape
    nk = resp.sum(axis=0) + 10 * np.finfo(float).eps
    means = resp.T @ X / nk[:, None]
    weights = nk / nk.sum()
    if cov_type == "tied":
        cov = np.zeros((d, d))
        for j in range(means.shape[0]):
            diff = X - means[j]
            cov += (resp[:, j, None] * diff).T @ diff
        cov /= n
        cov = 0.5 * (cov + cov.T)
        vals, vecs = np.linalg.eigh(cov)
        if vals.min() < reg:
            cov = (vecs * np.maximum(vals, reg)) @ vecs.T
            cov = 0.5 * (cov + cov.T)
        return weights, means, cov
    diag = np.empty_like(means)
    for j in range(means.shape[0]):
        diag[j] = resp[:, j] @ (X - means[j]) ** 2 / nk[j]
    if cov_type == "spherical":
        return weights, means, np.maximum(diag.mean(axis=1), reg)
    return weights, means, np.maximum(diag, reg)


def _log_gauss(X, means, covs, cov_type):
    n, d = X.shape
    k = means.shape[0]
    maha = np.empty((n, k))
    if cov_type == "diag":
        for j in range(k):
            maha[:, j] = ((X - means[j]) ** 2) @ (1.0 / covs[j])
        logdet = np.sum(np.log(covs), axis=1)
    elif cov_type == "spherical":
        for j in range(k):
            maha[:, j] = np.sum((X - means[j]) ** 2, axis=1) / covs[j]
        logdet = d * np.log(covs)
    else:
        try:
            chol = linalg.cholesky(covs, lower=True)
        except linalg.LinAlgError:
            raise FitError("tied covariance is not positive definite; increase reg_covar") from None
        logdet = np.full(k, 2.0 * np.sum(np.log(np.diag(chol))))
        for j, mu in enumerate(means):
            z = linalg.solve_triangular(chol, (X - mu).T, lower=True)
            maha[:, j] = np.sum(z * z, axis=0)
    return -0.5 * (d * _LOG_2PI + logdet[None, :] + maha)


def _e_step(X, weights, means, covs, cov_type):
    with np.errstate(divide="ignore", invalid="ignore"):
        weighted = _log_gauss(X, means, covs, cov_type) + np.log(weights)[None, :]
        norm = logsumexp(weighted, axis=1)
    return float(np.mean(norm)), weighted - norm[:, None]


def _em_run(X, k, config, seed):
    km = fit_kmeans(X, k, KMeansConfig(n_init=1), seed=seed)
    resp = np.zeros((X.shape[0], k))
    resp[np.arange(X.shape[0]), km.labeling.assignments] = 1.0
    params = _m_step(X, resp, config.covariance_type, config.reg_covar)

    history = []
    converged = False
    for it in range(1, config.max_iter + 1):
        mean_ll, log_resp = _e_step(X, *params, config.covariance_type)
        if not np.isfinite(mean_ll):
            raise FitError(f"non-finite log-likelihood at EM iteration {it}")
        history.append(mean_ll)
        if len(history) > 1 and abs(history[-1] - history[-2]) < config.tol:
            converged = True
            break
        if it == config.max_iter:
            break
        params = _m_step(X, np.exp(log_resp), config.covariance_type, config.reg_covar)
    return params, history, log_resp, converged


def fit_gmm(data, k: int, config: GMMConfig = GMMConfig(), seed: int = 0) -> GMMResult:
    """Fit a Gaussian mixture by EM, initialized from a k-means labeling.

    ``reg_covar`` is a lower bound on every variance (every eigenvalue of
    the tied covariance), enforced inside the M-step.  Iteration
    stops once the mean log-likelihood changes by less than ``tol``.  The
    returned parameters are the ones whose likelihood was last evaluated,
    so ``history[-1] * n == log_likelihood``.
    """
    X = np.asarray(getattr(data, "points", data), dtype=np.float64)
    n = X.shape[0]
    check_k(k, n)
    rng = np.random.default_rng(seed)
    best = None
    for _ in range(config.n_init):
        run_seed = int(rng.integers(2**63))
        params, history, log_resp, converged = _em_run(X, k, config, run_seed)
        if best is None or history[-1] > best[1][-1]:
            best = (params, history, log_resp, converged)

    (weights, means, covs), history, log_resp, converged = best
    raw = np.argmax(log_resp, axis=1)
    labels = canonical_relabel(raw)
    return GMMResult(
        labeling=Labeling(labels, int(labels.max()) + 1),
        weights=weights,
        means=means,
        covariances=covs,
        covariance_type=config.covariance_type,
        log_likelihood=history[-1] * n,
        history=history,
        converged=converged,
    )
