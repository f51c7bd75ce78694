"""Exact posterior for the conjugate normal-Wishart VAR: fit, marginals,
moments, joint mode, log marginal likelihood, and predictive t-density.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import cho_factor, cho_solve

from .mvdist import (
    MatricT,
    MultivariateT,
    NotPositiveDefiniteError,
    UndefinedMomentError,
    mv_log_gamma,
    spd_cholesky,
)
from .priors import ConjugatePrior
from .vardata import DesignData

__all__ = [
    "ConjugateExactPosterior",
    "fit_exact",
    "marginal_coefficients",
    "log_marginal_likelihood",
    "joint_mode",
    "predictive_exact",
]


@dataclass(frozen=True)
class ConjugateExactPosterior:
    """Gamma | Sigma, Y ~ MN(mean_G, Sigma, row_cov); Sigma^-1 | Y ~ W(scale^-1, dof)."""

    mean_G: np.ndarray
    row_cov: np.ndarray
    scale: np.ndarray
    dof: float
    n_obs: int
    prior_dof: float

    def __post_init__(self):
        for name in ("mean_G", "row_cov", "scale"):
            a = np.asarray(getattr(self, name), dtype=float)
            a.setflags(write=False)
            object.__setattr__(self, name, a)

    @property
    def n_vars(self) -> int:
        return self.mean_G.shape[1]

    @property
    def n_regressors(self) -> int:
        return self.mean_G.shape[0]


def _symmetrize(a):
    return (a + a.T) / 2.0


def fit_exact(prior: ConjugatePrior, data: DesignData) -> ConjugateExactPosterior:
    """Closed-form normal-Wishart posterior update.

    All inverses go through Cholesky solves; the prior precision is only
    applied as a solve against the prior row-covariance factor.
    """
    x, y = data.X, data.Y
    p, m = prior.mean_G.shape
    if x.shape[1] != p or y.shape[1] != m:
        raise ValueError("prior and data dimensions disagree")
    l0 = cho_factor(prior.row_cov, lower=True)
    v0_inv = cho_solve(l0, np.eye(p))
    try:
        post_prec = cho_factor(_symmetrize(v0_inv + x.T @ x), lower=True)
    except np.linalg.LinAlgError as exc:
        raise NotPositiveDefiniteError("posterior normal equations are singular") from exc
    mean_g = cho_solve(post_prec, v0_inv @ prior.mean_G + x.T @ y)
    row_cov = _symmetrize(cho_solve(post_prec, np.eye(p)))
    resid = y - x @ mean_g
    dg = mean_g - prior.mean_G
    scale = _symmetrize(resid.T @ resid + prior.scale + dg.T @ cho_solve(l0, dg))
    return ConjugateExactPosterior(
        mean_G=mean_g,
        row_cov=row_cov,
        scale=scale,
        dof=data.effective_T + prior.dof,
        n_obs=data.effective_T,
        prior_dof=prior.dof,
    )


def marginal_coefficients(post: ConjugateExactPosterior) -> MatricT:
    """Marginal posterior of the coefficient matrix: MT(mean_G, scale, row_cov, dof)."""
    return MatricT(post.mean_G, post.scale, post.row_cov, post.dof)


def log_marginal_likelihood(prior: ConjugatePrior, post: ConjugateExactPosterior) -> float:
    """Closed-form log marginal likelihood of the conjugate VAR."""
    m = post.n_vars
    t = post.n_obs
    ld = lambda a: 2.0 * np.sum(np.log(np.diag(spd_cholesky(a))))
    return (
        -m * t / 2.0 * np.log(np.pi)
        + m / 2.0 * (ld(post.row_cov) - ld(prior.row_cov))
        - post.dof / 2.0 * ld(post.scale)
        + prior.dof / 2.0 * ld(prior.scale)
        + mv_log_gamma(m, post.dof / 2.0)
        - mv_log_gamma(m, prior.dof / 2.0)
    )


def joint_mode(post: ConjugateExactPosterior) -> dict:
    """Joint posterior mode: coefficients at mean_G, precision at
    (T + p + prior_dof - M - 1) * scale^-1."""
    m, p = post.n_vars, post.n_regressors
    factor = post.n_obs + p + post.prior_dof - m - 1
    if factor <= 0:
        raise UndefinedMomentError("joint mode needs T + p + prior dof > M + 1")
    l = cho_factor(post.scale, lower=True)
    return {
        "coefficients": np.asarray(post.mean_G),
        "precision": factor * _symmetrize(cho_solve(l, np.eye(m))),
    }


def predictive_exact(post: ConjugateExactPosterior, x_next) -> MultivariateT:
    """One-step predictive density: t with mean (x Gb)' and
    Var = (1 + x V x') * scale / (dof - 2)."""
    x = np.asarray(x_next, dtype=float).reshape(-1)
    if x.size != post.n_regressors:
        raise ValueError(f"x_next must have p = {post.n_regressors} entries")
    if post.dof <= 2:
        raise UndefinedMomentError("predictive variance needs dof > 2")
    c = float(x @ post.row_cov @ x)
    mean = x @ post.mean_G
    # MultivariateT variance = dof * scale_param / (dof - 2)
    scale_param = (1.0 + c) * post.scale / post.dof
    return MultivariateT(mean, scale_param, post.dof)
