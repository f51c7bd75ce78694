"""Data ingestion and design-matrix construction."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from vbvar.vardata import (
    CsvFormatError,
    DesignData,
    InsufficientObservationsError,
    MissingValueError,
    RawSeries,
    build_design,
    load_csv,
    z_block,
)


def _write(tmp_path, text, name="data.csv"):
    path = tmp_path / name
    path.write_text(text, encoding="utf-8")
    return str(path)


class TestLoadCsv:
    def test_shapes(self, tmp_path):
        rows = "\n".join(f"{i},{i + 0.5},{i - 1}" for i in range(200))
        path = _write(tmp_path, "a,b,c\n" + rows + "\n")
        s = load_csv(path)
        assert s.n_vars == 3 and s.n_obs == 200
        assert s.names == ("a", "b", "c")

    def test_blank_cell_names_location(self, tmp_path):
        path = _write(tmp_path, "a,b\n1,2\n3,\n")
        with pytest.raises(MissingValueError, match=r"row 3, column 'b'"):
            load_csv(path)

    def test_header_only(self, tmp_path):
        path = _write(tmp_path, "a,b\n")
        with pytest.raises(CsvFormatError, match="no data rows"):
            load_csv(path)

    def test_empty_file(self, tmp_path):
        path = _write(tmp_path, "")
        with pytest.raises(CsvFormatError, match="empty"):
            load_csv(path)

    def test_non_numeric_names_location(self, tmp_path):
        path = _write(tmp_path, "a,b\n1,2\nx,4\n")
        with pytest.raises(CsvFormatError, match=r"row 3, column 'a'"):
            load_csv(path)

    def test_ragged_row(self, tmp_path):
        path = _write(tmp_path, "a,b\n1,2\n3\n")
        with pytest.raises(CsvFormatError, match="row 3"):
            load_csv(path)

    def test_timestamps(self, tmp_path):
        path = _write(tmp_path, "date,a,b\n2001Q1,1,2\n2001Q2,3,4\n")
        s = load_csv(path, has_timestamps=True)
        assert s.n_vars == 2
        assert s.timestamps == ("2001Q1", "2001Q2")
        np.testing.assert_allclose(s.values, [[1, 2], [3, 4]])


class TestRawSeries:
    def test_rejects_nan(self):
        with pytest.raises(MissingValueError):
            RawSeries(np.array([[1.0, np.nan]]), ("a", "b"))

    def test_name_length_check(self):
        with pytest.raises(ValueError):
            RawSeries(np.ones((3, 2)), ("a",))


class TestBuildDesign:
    def test_lag1_rows(self):
        raw = np.arange(8.0).reshape(4, 2)  # rows r1..r4
        s = RawSeries(raw, ("a", "b"))
        d = build_design(s, 1)
        np.testing.assert_allclose(d.Y, raw[1:])
        np.testing.assert_allclose(d.X[0], [1.0, raw[0, 0], raw[0, 1]])
        np.testing.assert_allclose(d.X[:, 0], 1.0)

    def test_reference_dimensions(self):
        s = RawSeries(np.random.default_rng(0).standard_normal((200, 3)),
                      ("a", "b", "c"))
        d = build_design(s, 4)
        assert d.effective_T == 196
        assert d.n_regressors == 13
        assert d.n_vars == 3

    def test_lag_ordering(self):
        raw = np.arange(10.0).reshape(5, 2)
        d = build_design(RawSeries(raw, ("a", "b")), 2)
        # row t: (1, y'_{t-1}, y'_{t-2})
        np.testing.assert_allclose(d.X[0], [1.0, *raw[1], *raw[0]])
        np.testing.assert_allclose(d.Y[0], raw[2])

    def test_insufficient_observations(self):
        s = RawSeries(np.ones((3, 1)), ("a",))
        with pytest.raises(InsufficientObservationsError):
            build_design(s, 3)

    def test_invalid_lag(self):
        s = RawSeries(np.ones((3, 1)), ("a",))
        with pytest.raises(ValueError):
            build_design(s, 0)

    def test_roundtrip_zero_noise(self):
        # data generated as Y = X Gamma reproduces zero residuals
        rng = np.random.default_rng(1)
        m, d, t_raw = 2, 2, 60
        gamma = 0.2 * rng.standard_normal((m * d + 1, m))
        values = np.zeros((t_raw, m))
        values[:d] = rng.standard_normal((d, m))
        for t in range(d, t_raw):
            x = np.concatenate([[1.0], values[t - 1], values[t - 2]])
            values[t] = x @ gamma
        dd = build_design(RawSeries(values, ("a", "b")), d)
        np.testing.assert_allclose(dd.Y - dd.X @ gamma, 0.0, atol=1e-12)


class TestZBlock:
    def test_single_equation(self):
        x = np.array([1.0, 2.0, 3.0])
        np.testing.assert_allclose(z_block(x, 1), x[None, :])

    def test_two_equations_layout(self):
        z = z_block(np.array([1.0, 2.0]), 2)
        np.testing.assert_allclose(
            z, [[1.0, 2.0, 0.0, 0.0], [0.0, 0.0, 1.0, 2.0]]
        )

    def test_consistency_with_matrix_form(self):
        rng = np.random.default_rng(2)
        m, p = 3, 4
        gamma = rng.standard_normal((p, m))
        beta = gamma.flatten(order="F")  # stack columns equation by equation
        x = rng.standard_normal(p)
        np.testing.assert_allclose(z_block(x, m) @ beta, x @ gamma, atol=1e-12)

    @given(
        m=st.integers(min_value=1, max_value=4),
        p=st.integers(min_value=1, max_value=4),
        seed=st.integers(min_value=0, max_value=10_000),
    )
    @settings(max_examples=40, deadline=None)
    def test_stacked_matrix_equivalence(self, m, p, seed):
        # sum_t Z_t' A Z_t == A kron X'X for block-diagonal Z_t
        rng = np.random.default_rng(seed)
        t = 6
        x = rng.standard_normal((t, p))
        a = rng.standard_normal((m, m))
        a = a @ a.T + np.eye(m)
        total = np.zeros((m * p, m * p))
        for row in x:
            z = z_block(row, m)
            total += z.T @ a @ z
        np.testing.assert_allclose(total, np.kron(a, x.T @ x), atol=1e-10)


class TestDesignData:
    def test_shape_validation(self):
        with pytest.raises(ValueError):
            DesignData(Y=np.ones((4, 2)), X=np.ones((4, 4)), lag_order=1)
        with pytest.raises(ValueError):
            DesignData(Y=np.ones((4, 2)), X=np.ones((3, 5)), lag_order=2)
