"""Raw-series ingestion and VAR(d) design-matrix construction.

Builds the effective-sample response matrix Y (T x M) and regressor matrix
X (T x p), p = M*d + 1, with rows x_t = (1, y'_{t-1}, ..., y'_{t-d});
also the stacked block form Z_t used by the independent-prior machinery.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "CsvFormatError",
    "MissingValueError",
    "InsufficientObservationsError",
    "RawSeries",
    "DesignData",
    "load_csv",
    "build_design",
    "z_block",
]


class CsvFormatError(ValueError):
    """Malformed CSV input (empty, ragged, or non-numeric cell)."""


class MissingValueError(CsvFormatError):
    """A data cell is empty; names the offending row and column."""


class InsufficientObservationsError(ValueError):
    """Too few raw observations for the requested lag order."""


@dataclass(frozen=True)
class RawSeries:
    """Multivariate series: values (T_raw x M), variable names, optional timestamps."""

    values: np.ndarray
    names: tuple
    timestamps: tuple | None = None

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.ndim != 2:
            raise ValueError("values must be a 2-D array")
        if v.shape[1] < 1:
            raise ValueError("need at least one variable")
        if not np.all(np.isfinite(v)):
            raise MissingValueError("values contain non-finite entries")
        if len(self.names) != v.shape[1]:
            raise ValueError("names length must equal number of columns")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "names", tuple(self.names))
        if self.timestamps is not None:
            object.__setattr__(self, "timestamps", tuple(self.timestamps))

    @property
    def n_obs(self) -> int:
        return self.values.shape[0]

    @property
    def n_vars(self) -> int:
        return self.values.shape[1]


@dataclass(frozen=True)
class DesignData:
    """Effective-sample design: Y (T x M), X (T x p) with intercept first."""

    Y: np.ndarray
    X: np.ndarray
    lag_order: int
    names: tuple = field(default=())

    def __post_init__(self):
        y = np.asarray(self.Y, dtype=float)
        x = np.asarray(self.X, dtype=float)
        if y.ndim != 2 or x.ndim != 2 or y.shape[0] != x.shape[0]:
            raise ValueError("Y and X must be 2-D with equal row counts")
        m = y.shape[1]
        if x.shape[1] != m * self.lag_order + 1:
            raise ValueError(
                f"X has {x.shape[1]} columns, expected p = M*d+1 = {m * self.lag_order + 1}"
            )
        y.setflags(write=False)
        x.setflags(write=False)
        object.__setattr__(self, "Y", y)
        object.__setattr__(self, "X", x)
        object.__setattr__(self, "names", tuple(self.names))

    @property
    def effective_T(self) -> int:
        return self.Y.shape[0]

    @property
    def n_vars(self) -> int:
        return self.Y.shape[1]

    @property
    def n_regressors(self) -> int:
        return self.X.shape[1]


def load_csv(path, has_timestamps: bool = False) -> RawSeries:
    """Read a UTF-8 comma-delimited file with a header row into a RawSeries.

    When ``has_timestamps`` is set the first column is kept as string
    metadata and the remaining columns become variables.
    """
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise CsvFormatError(f"{path}: file is empty") from None
        rows = list(reader)
    if not rows:
        raise CsvFormatError(f"{path}: no data rows below the header")
    start = 1 if has_timestamps else 0
    names = [h.strip() for h in header[start:]]
    if not names:
        raise CsvFormatError(f"{path}: no variable columns")
    timestamps = [] if has_timestamps else None
    data = np.empty((len(rows), len(names)))
    for i, row in enumerate(rows):
        if len(row) != len(header):
            raise CsvFormatError(
                f"{path}: row {i + 2} has {len(row)} fields, expected {len(header)}"
            )
        if has_timestamps:
            timestamps.append(row[0].strip())
        for j, cell in enumerate(row[start:]):
            text = cell.strip()
            if not text:
                raise MissingValueError(
                    f"{path}: empty cell at row {i + 2}, column '{names[j]}'"
                )
            try:
                data[i, j] = float(text)
            except ValueError:
                raise CsvFormatError(
                    f"{path}: non-numeric value {text!r} at row {i + 2}, "
                    f"column '{names[j]}'"
                ) from None
    return RawSeries(values=data, names=tuple(names),
                     timestamps=tuple(timestamps) if timestamps is not None else None)


def build_design(series: RawSeries, lag_order: int) -> DesignData:
    """Assemble VAR(d) design matrices from a raw series.

    Row t of X is (1, y'_{t-1}, ..., y'_{t-d}); Y keeps rows d+1..T_raw,
    so the effective sample size is T_raw - d.
    """
    d = int(lag_order)
    if d < 1:
        raise ValueError(f"lag order must be >= 1, got {d}")
    t_raw, m = series.values.shape
    if t_raw <= d:
        raise InsufficientObservationsError(
            f"need more than d={d} observations, have {t_raw}"
        )
    t_eff = t_raw - d
    y = series.values[d:]
    x = np.empty((t_eff, m * d + 1))
    x[:, 0] = 1.0
    for lag in range(1, d + 1):
        x[:, 1 + (lag - 1) * m: 1 + lag * m] = series.values[d - lag: t_raw - lag]
    return DesignData(Y=y, X=x, lag_order=d, names=series.names)


def z_block(x_row, n_vars: int) -> np.ndarray:
    """Block-diagonal Z_t (M x Mp) with x_row repeated in each diagonal block.

    With beta stacking the columns of Gamma equation by equation,
    Z_t @ beta reproduces (x_t Gamma)'.
    """
    x = np.asarray(x_row, dtype=float).reshape(-1)
    return np.kron(np.eye(int(n_vars)), x)
