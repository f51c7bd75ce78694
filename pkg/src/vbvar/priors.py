"""Prior construction for conjugate and independent normal-Wishart VARs,
including Minnesota-style defaults.

The Minnesota rule implemented here: the prior variance of the coefficient
on lag l of variable j in equation m is

    lambda1^2 * (lambda2 if j != m else 1)^2 * (s_m^2 / s_j^2) / l^(2*lambda3)

with s_j^2 the residual variance of a univariate AR(d) least-squares fit.
Conjugacy forces a Kronecker structure, so the conjugate row covariance
drops the equation index: its diagonal uses 1/s_j^2 only (the s_m^2 factor
is supplied by the Wishart scale S = diag(s_1^2, ..., s_M^2)), and the
cross-variable lambda2 discount cannot be represented and is dropped.  The
independent prior carries the full rule per equation block.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .mvdist import spd_cholesky
from .vardata import DesignData, InsufficientObservationsError

__all__ = [
    "ConjugatePrior",
    "IndependentPrior",
    "MinnesotaConfig",
    "minnesota_conjugate",
    "minnesota_independent",
]


@dataclass(frozen=True)
class ConjugatePrior:
    """Normal-Wishart conjugate prior: Gamma | Sigma ~ MN(mean_G, Sigma, row_cov),
    Sigma^-1 ~ W(scale^-1, dof)."""

    mean_G: np.ndarray
    row_cov: np.ndarray
    scale: np.ndarray
    dof: float

    def __post_init__(self):
        g = np.asarray(self.mean_G, dtype=float)
        spd_cholesky(self.row_cov, "row_cov")
        spd_cholesky(self.scale, "scale")
        p, m = g.shape
        if np.asarray(self.row_cov).shape != (p, p) or np.asarray(self.scale).shape != (m, m):
            raise ValueError("prior block shapes are inconsistent with mean_G")
        if self.dof <= m - 1:
            raise ValueError(f"dof must exceed M-1 = {m - 1}, got {self.dof}")
        for name in ("mean_G", "row_cov", "scale"):
            a = np.asarray(getattr(self, name), dtype=float)
            a.setflags(write=False)
            object.__setattr__(self, name, a)
        object.__setattr__(self, "dof", float(self.dof))

    @property
    def n_vars(self) -> int:
        return self.mean_G.shape[1]

    @property
    def n_regressors(self) -> int:
        return self.mean_G.shape[0]


@dataclass(frozen=True)
class IndependentPrior:
    """Independent prior: beta ~ N(mean_b, cov), Sigma^-1 ~ W(scale^-1, dof).

    ``n_vars`` must be given because cov is a full Mp x Mp matrix and the
    (M, p) split is not recoverable from shapes alone.
    """

    mean_b: np.ndarray
    cov: np.ndarray
    scale: np.ndarray
    dof: float
    n_vars: int = field(default=0)

    def __post_init__(self):
        b = np.asarray(self.mean_b, dtype=float).reshape(-1)
        spd_cholesky(self.cov, "cov")
        spd_cholesky(self.scale, "scale")
        m = np.asarray(self.scale).shape[0]
        n_vars = int(self.n_vars) or m
        if b.size % n_vars != 0:
            raise ValueError(f"mean_b size {b.size} is not a multiple of M={n_vars}")
        if np.asarray(self.cov).shape != (b.size, b.size):
            raise ValueError("cov shape inconsistent with mean_b")
        if self.dof <= m - 1:
            raise ValueError(f"dof must exceed M-1 = {m - 1}, got {self.dof}")
        object.__setattr__(self, "n_vars", n_vars)
        for name in ("cov", "scale"):
            a = np.asarray(getattr(self, name), dtype=float)
            a.setflags(write=False)
            object.__setattr__(self, name, a)
        b.setflags(write=False)
        object.__setattr__(self, "mean_b", b)
        object.__setattr__(self, "dof", float(self.dof))

    @property
    def n_regressors(self) -> int:
        return self.mean_b.size // self.n_vars


@dataclass(frozen=True)
class MinnesotaConfig:
    """Minnesota shrinkage hyperparameters.

    own_lag_mean 0 suits growth-rate data; 1 suits levels (random walk).
    """

    overall_tightness: float = 0.2      # lambda1
    cross_tightness: float = 1.0        # lambda2 in (0, 1]
    lag_decay: float = 1.0              # lambda3
    intercept_scale: float = 100.0      # lambda4
    own_lag_mean: float = 0.0
    dof_offset: int = 2

    def __post_init__(self):
        if self.overall_tightness <= 0:
            raise ValueError("overall_tightness must be positive")
        if not 0 < self.cross_tightness <= 1:
            raise ValueError("cross_tightness must be in (0, 1]")
        if self.lag_decay < 0:
            raise ValueError("lag_decay must be nonnegative")
        if self.intercept_scale <= 0:
            raise ValueError("intercept_scale must be positive")
        if self.dof_offset < 1:
            raise ValueError("dof_offset must be >= 1")


def _ar_residual_variances(data: DesignData) -> np.ndarray:
    """Per-variable residual variance from univariate AR(d) least squares.

    Falls back to the sample variance when the fit is singular or leaves
    no residual degrees of freedom.
    """
    t, m = data.Y.shape
    d = data.lag_order
    out = np.empty(m)
    for j in range(m):
        # own lags of variable j: columns 1 + (l-1)*M + j of X, l = 1..d
        cols = [0] + [1 + (lag - 1) * m + j for lag in range(1, d + 1)]
        xj = data.X[:, cols]
        yj = data.Y[:, j]
        dof = t - len(cols)
        if dof < 1:
            out[j] = float(np.var(yj, ddof=1)) if t > 1 else 1.0
            continue
        coef, _, rank, _ = np.linalg.lstsq(xj, yj, rcond=None)
        if rank < len(cols):
            out[j] = float(np.var(yj, ddof=1))
        else:
            resid = yj - xj @ coef
            out[j] = float(resid @ resid / dof)
        if out[j] <= 0:
            out[j] = 1.0
    return out


def _check_prefit_sample(data: DesignData):
    # effective_T = T_raw - d, so this enforces T_raw >= 2d + 2
    if data.effective_T < data.lag_order + 2:
        raise InsufficientObservationsError(
            f"need T_raw >= 2d+2 for AR({data.lag_order}) pre-fits"
        )


def _mean_coefficients(m: int, d: int, own_lag_mean: float) -> np.ndarray:
    g = np.zeros((m * d + 1, m))
    for j in range(m):
        g[1 + j, j] = own_lag_mean
    return g


def minnesota_conjugate(data: DesignData, cfg: MinnesotaConfig) -> ConjugatePrior:
    """Minnesota-style conjugate prior: diagonal row covariance, AR-based scales."""
    _check_prefit_sample(data)
    m, d = data.n_vars, data.lag_order
    s2 = _ar_residual_variances(data)
    diag = np.empty(m * d + 1)
    diag[0] = cfg.intercept_scale**2
    for lag in range(1, d + 1):
        for j in range(m):
            diag[1 + (lag - 1) * m + j] = (
                cfg.overall_tightness**2 / (lag ** (2 * cfg.lag_decay) * s2[j])
            )
    return ConjugatePrior(
        mean_G=_mean_coefficients(m, d, cfg.own_lag_mean),
        row_cov=np.diag(diag),
        scale=np.diag(s2),
        dof=m + cfg.dof_offset,
    )


def minnesota_independent(data: DesignData, cfg: MinnesotaConfig) -> IndependentPrior:
    """Minnesota-style independent prior: block-diagonal coefficient covariance.

    Block m scales the conjugate diagonal by s_m^2 and applies the lambda2
    discount to cross-variable lag entries.
    """
    _check_prefit_sample(data)
    m, d = data.n_vars, data.lag_order
    p = m * d + 1
    s2 = _ar_residual_variances(data)
    blocks = np.zeros((m * p, m * p))
    for eq in range(m):
        diag = np.empty(p)
        diag[0] = cfg.intercept_scale**2 * s2[eq]
        for lag in range(1, d + 1):
            for j in range(m):
                cross = 1.0 if j == eq else cfg.cross_tightness
                diag[1 + (lag - 1) * m + j] = (
                    cfg.overall_tightness**2
                    * cross**2
                    * (s2[eq] / s2[j])
                    / lag ** (2 * cfg.lag_decay)
                )
        sl = slice(eq * p, (eq + 1) * p)
        blocks[sl, sl] = np.diag(diag)
    mean_g = _mean_coefficients(m, d, cfg.own_lag_mean)
    return IndependentPrior(
        mean_b=mean_g.flatten(order="F"),
        cov=blocks,
        scale=np.diag(s2),
        dof=m + cfg.dof_offset,
        n_vars=m,
    )
