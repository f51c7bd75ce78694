"""Matrix-variate distributions: matricvariate normal, Wishart, matricvariate t,
multivariate t.

All types are immutable value objects.  Vectorization is column-major
throughout, so the covariance of vec(X) for a matricvariate normal with
column covariance ``Sigma`` and row covariance ``V`` is ``Sigma kron V``.
SPD inputs are validated by Cholesky factorization at construction; a
failure raises :class:`NotPositiveDefiniteError` instead of silently
regularizing.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import cho_solve, cholesky, solve_triangular
from scipy.special import gammaln, psi

__all__ = [
    "NotPositiveDefiniteError",
    "UndefinedMomentError",
    "MatricNormal",
    "WishartDist",
    "MatricT",
    "MultivariateT",
    "mv_log_gamma",
    "wishart_stats",
    "wishart_sample",
    "matnorm_sample",
    "matnorm_logpdf",
    "matric_t_stats",
    "mvt_stats",
]

_SYM_RTOL = 1e-12


class NotPositiveDefiniteError(ValueError):
    """A matrix required to be symmetric positive definite is not."""


class UndefinedMomentError(ValueError):
    """A requested moment does not exist at the given degrees of freedom."""


def _as_matrix(x, name):
    a = np.atleast_2d(np.asarray(x, dtype=float))
    if a.ndim != 2:
        raise ValueError(f"{name} must be a matrix, got ndim={a.ndim}")
    return a


def spd_cholesky(a, name="matrix"):
    """Lower Cholesky factor of a symmetric positive-definite matrix.

    Symmetry is checked to relative tolerance 1e-12; factorization failure
    raises :class:`NotPositiveDefiniteError`.
    """
    a = _as_matrix(a, name)
    if a.shape[0] != a.shape[1]:
        raise NotPositiveDefiniteError(f"{name} must be square, got {a.shape}")
    scale = max(np.abs(a).max(), 1.0)
    if np.abs(a - a.T).max() > _SYM_RTOL * scale:
        raise NotPositiveDefiniteError(f"{name} is not symmetric")
    try:
        return cholesky(a, lower=True)
    except np.linalg.LinAlgError as exc:
        raise NotPositiveDefiniteError(f"{name} is not positive definite") from exc


def _logdet_from_chol(lower):
    return 2.0 * np.sum(np.log(np.diag(lower)))


def _freeze(a):
    a = np.asarray(a, dtype=float)
    a.setflags(write=False)
    return a


def mv_log_gamma(dim: int, a: float) -> float:
    """Log of the multivariate gamma function ln Gamma_M(a).

    ln Gamma_M(a) = (M(M-1)/4) ln pi + sum_{j=1..M} ln Gamma(a + (1-j)/2).
    Raises ValueError when a <= (M-1)/2 (outside the domain of the last
    univariate gamma factor).
    """
    dim = int(dim)
    if dim < 1:
        raise ValueError(f"dim must be >= 1, got {dim}")
    if a <= (dim - 1) / 2.0:
        raise ValueError(f"mv_log_gamma requires a > (M-1)/2 = {(dim - 1) / 2}, got {a}")
    j = np.arange(1, dim + 1)
    return dim * (dim - 1) / 4.0 * np.log(np.pi) + float(np.sum(gammaln(a + (1.0 - j) / 2.0)))


@dataclass(frozen=True)
class MatricNormal:
    """Matricvariate normal MN(mean, col_cov, row_cov).

    mean is p x M, col_cov (Sigma) is M x M SPD, row_cov (V) is p x p SPD;
    vec(X) ~ N(vec(mean), Sigma kron V).
    """

    mean: np.ndarray
    col_cov: np.ndarray
    row_cov: np.ndarray
    _chol_col: np.ndarray = field(init=False, repr=False, compare=False)
    _chol_row: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        mean = _as_matrix(self.mean, "mean")
        lc = spd_cholesky(self.col_cov, "col_cov")
        lr = spd_cholesky(self.row_cov, "row_cov")
        p, m = mean.shape
        if lc.shape[0] != m or lr.shape[0] != p:
            raise ValueError(
                f"shape mismatch: mean {mean.shape}, col_cov {lc.shape}, row_cov {lr.shape}"
            )
        object.__setattr__(self, "mean", _freeze(mean))
        object.__setattr__(self, "col_cov", _freeze(_as_matrix(self.col_cov, "col_cov")))
        object.__setattr__(self, "row_cov", _freeze(_as_matrix(self.row_cov, "row_cov")))
        object.__setattr__(self, "_chol_col", _freeze(lc))
        object.__setattr__(self, "_chol_row", _freeze(lr))

    @property
    def shape(self):
        return self.mean.shape

    def sample(self, rng: np.random.Generator) -> np.ndarray:
        """One draw: mean + L_V Z L_Sigma' with Z iid standard normal."""
        p, m = self.mean.shape
        z = rng.standard_normal((p, m))
        return self.mean + self._chol_row @ z @ self._chol_col.T

    def logpdf(self, x) -> float:
        """Log density at x, computed without the Mp x Mp Kronecker covariance."""
        x = _as_matrix(x, "x")
        p, m = self.mean.shape
        if x.shape != (p, m):
            raise ValueError(f"x has shape {x.shape}, expected {(p, m)}")
        d = x - self.mean
        # tr(Sigma^-1 D' V^-1 D) via triangular solves
        a = solve_triangular(self._chol_row, d, lower=True)
        b = solve_triangular(self._chol_col, a.T, lower=True)
        quad = float(np.sum(b * b))
        return (
            -0.5 * m * p * np.log(2.0 * np.pi)
            - 0.5 * m * _logdet_from_chol(self._chol_row)
            - 0.5 * p * _logdet_from_chol(self._chol_col)
            - 0.5 * quad
        )


@dataclass(frozen=True)
class WishartDist:
    """Wishart W(scale, dof) over M x M SPD matrices, with mean dof * scale."""

    scale: np.ndarray
    dof: float
    _chol: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        l = spd_cholesky(self.scale, "scale")
        m = l.shape[0]
        if self.dof <= m - 1:
            raise ValueError(f"dof must exceed M-1 = {m - 1}, got {self.dof}")
        object.__setattr__(self, "scale", _freeze(_as_matrix(self.scale, "scale")))
        object.__setattr__(self, "dof", float(self.dof))
        object.__setattr__(self, "_chol", _freeze(l))

    @property
    def dim(self) -> int:
        return self.scale.shape[0]

    def mean(self) -> np.ndarray:
        return self.dof * self.scale

    def var(self) -> np.ndarray:
        """Elementwise variance: var(w_ij) = dof * (s_ij^2 + s_ii s_jj)."""
        s = self.scale
        d = np.diag(s)
        return self.dof * (s**2 + np.outer(d, d))

    def mode(self) -> np.ndarray:
        """Mode (dof - M - 1) * scale, defined only when dof > M + 1."""
        m = self.dim
        if self.dof <= m + 1:
            raise UndefinedMomentError(f"Wishart mode needs dof > M+1 = {m + 1}, got {self.dof}")
        return (self.dof - m - 1) * self.scale

    def expected_logdet(self) -> float:
        """E[ln |W|] = sum_j psi((dof+1-j)/2) + M ln 2 + ln |scale|."""
        m = self.dim
        j = np.arange(1, m + 1)
        return (
            float(np.sum(psi((self.dof + 1.0 - j) / 2.0)))
            + m * np.log(2.0)
            + _logdet_from_chol(self._chol)
        )

    def entropy(self) -> float:
        """Differential entropy (closed form)."""
        m = self.dim
        nu = self.dof
        ln_norm = nu * m / 2.0 * np.log(2.0) + nu / 2.0 * _logdet_from_chol(
            self._chol
        ) + mv_log_gamma(m, nu / 2.0)
        return ln_norm - (nu - m - 1) / 2.0 * self.expected_logdet() + nu * m / 2.0

    def logpdf(self, w) -> float:
        w = _as_matrix(w, "w")
        m = self.dim
        lw = spd_cholesky(w, "w")
        nu = self.dof
        # tr(scale^-1 W) through the stored factor
        a = solve_triangular(self._chol, lw, lower=True)
        tr = float(np.sum(a * a))
        return (
            (nu - m - 1) / 2.0 * _logdet_from_chol(lw)
            - 0.5 * tr
            - nu * m / 2.0 * np.log(2.0)
            - nu / 2.0 * _logdet_from_chol(self._chol)
            - mv_log_gamma(m, nu / 2.0)
        )

    def sample(self, rng: np.random.Generator) -> np.ndarray:
        """One SPD draw via the Bartlett decomposition."""
        m = self.dim
        a = np.zeros((m, m))
        df = self.dof - np.arange(m)
        a[np.diag_indices(m)] = np.sqrt(rng.chisquare(df))
        if m > 1:
            a[np.tril_indices(m, -1)] = rng.standard_normal(m * (m - 1) // 2)
        la = self._chol @ a
        return la @ la.T


@dataclass(frozen=True)
class MatricT:
    """Matricvariate t MT(mean, col_scale, row_scale, dof).

    mean is p x q; Var[vec(X)] = (col_scale kron row_scale) / (dof - q - 1),
    defined for dof > q + 1.  Arises by compounding MN(mean, Sigma, row_scale)
    over Sigma with a Wishart law on Sigma^-1.
    """

    mean: np.ndarray
    col_scale: np.ndarray
    row_scale: np.ndarray
    dof: float

    def __post_init__(self):
        mean = _as_matrix(self.mean, "mean")
        lc = spd_cholesky(self.col_scale, "col_scale")
        lr = spd_cholesky(self.row_scale, "row_scale")
        p, q = mean.shape
        if lc.shape[0] != q or lr.shape[0] != p:
            raise ValueError("shape mismatch between mean, col_scale, row_scale")
        object.__setattr__(self, "mean", _freeze(mean))
        object.__setattr__(self, "col_scale", _freeze(_as_matrix(self.col_scale, "col_scale")))
        object.__setattr__(self, "row_scale", _freeze(_as_matrix(self.row_scale, "row_scale")))
        object.__setattr__(self, "dof", float(self.dof))

    def vec_variance(self) -> np.ndarray:
        q = self.mean.shape[1]
        if self.dof <= q + 1:
            raise UndefinedMomentError(
                f"matricvariate-t variance needs dof > q+1 = {q + 1}, got {self.dof}"
            )
        return np.kron(self.col_scale, self.row_scale) / (self.dof - q - 1)


@dataclass(frozen=True)
class MultivariateT:
    """Multivariate t T(mean, scale, dof) with Var = dof * scale / (dof - 2).

    Coincides with the standard Student-t whose shape matrix is ``scale``.
    """

    mean: np.ndarray
    scale: np.ndarray
    dof: float
    _chol: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        mean = np.asarray(self.mean, dtype=float).reshape(-1)
        l = spd_cholesky(self.scale, "scale")
        if l.shape[0] != mean.size:
            raise ValueError("mean and scale dimensions disagree")
        if self.dof <= 0:
            raise ValueError(f"dof must be positive, got {self.dof}")
        object.__setattr__(self, "mean", _freeze(mean))
        object.__setattr__(self, "scale", _freeze(_as_matrix(self.scale, "scale")))
        object.__setattr__(self, "dof", float(self.dof))
        object.__setattr__(self, "_chol", _freeze(l))

    @property
    def dim(self) -> int:
        return self.mean.size

    def variance(self) -> np.ndarray:
        if self.dof <= 2:
            raise UndefinedMomentError(f"t variance needs dof > 2, got {self.dof}")
        return self.dof * self.scale / (self.dof - 2.0)

    def logpdf(self, x) -> float:
        x = np.asarray(x, dtype=float).reshape(-1)
        q = self.dim
        nu = self.dof
        z = solve_triangular(self._chol, x - self.mean, lower=True)
        quad = float(z @ z)
        return (
            gammaln((nu + q) / 2.0)
            - gammaln(nu / 2.0)
            - q / 2.0 * np.log(nu * np.pi)
            - 0.5 * _logdet_from_chol(self._chol)
            - (nu + q) / 2.0 * np.log1p(quad / nu)
        )

    def sample(self, rng: np.random.Generator, size: int | None = None) -> np.ndarray:
        """Draws via normal/chi-square mixture; shape (size, q) or (q,)."""
        n = 1 if size is None else int(size)
        z = rng.standard_normal((n, self.dim)) @ self._chol.T
        g = rng.chisquare(self.dof, size=n) / self.dof
        out = self.mean + z / np.sqrt(g)[:, None]
        return out[0] if size is None else out


# Operation-style wrappers used by the fitting and report layers.

def wishart_stats(w: WishartDist) -> dict:
    """Mean, mode (None when undefined), elementwise variance and entropy."""
    try:
        mode = w.mode()
    except UndefinedMomentError:
        mode = None
    return {"mean": w.mean(), "mode": mode, "var": w.var(), "entropy": w.entropy()}


def wishart_sample(w: WishartDist, rng: np.random.Generator) -> np.ndarray:
    return w.sample(rng)


def matnorm_sample(d: MatricNormal, rng: np.random.Generator) -> np.ndarray:
    return d.sample(rng)


def matnorm_logpdf(d: MatricNormal, x) -> float:
    return d.logpdf(x)


def matric_t_stats(d: MatricT) -> dict:
    return {"mean": np.asarray(d.mean), "vec_variance": d.vec_variance()}


def mvt_stats(d: MultivariateT) -> dict:
    return {"mean": np.asarray(d.mean), "variance": d.variance()}
