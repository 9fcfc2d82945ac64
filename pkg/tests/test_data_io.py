import warnings

import numpy as np
import pytest
from hypothesis import given, strategies as st

from stablecv.data_io import (CsvSchema, StandardizationParams, bundled, load_csv, split_indices,
                              split_train_test, standardize)
from stablecv.errors import DataError
from stablecv.learners import Dataset


def write(tmp_path, text, name="d.csv"):
    path = tmp_path / name
    path.write_text(text)
    return path


def test_three_row_regression(tmp_path):
    data = load_csv(write(tmp_path, "a,b,y\n1,2,3\n4,5,6\n7,8,9\n"))
    assert data.X.tolist() == [[1, 2], [4, 5], [7, 8]]
    assert data.y.tolist() == [3, 6, 9]


def test_target_by_name_and_index(tmp_path):
    path = write(tmp_path, "y,a\n1,2\n3,4\n")
    by_name = load_csv(path, CsvSchema(target_column="y"))
    by_index = load_csv(path, CsvSchema(target_column=0))
    assert by_name == by_index
    assert by_name.y.tolist() == [1, 3] and by_name.X.tolist() == [[2], [4]]


def test_headerless(tmp_path):
    data = load_csv(write(tmp_path, "1;2\n3;4\n"), CsvSchema(has_header=False, delimiter=";"))
    assert data.y.tolist() == [2, 4]


def test_classification_labels(tmp_path):
    path = write(tmp_path, "f,c\n0.5,yes\n1.5,no\n2.5,yes\n")
    data = load_csv(path, CsvSchema(task="classification", positive_label="yes"))
    assert data.y.tolist() == [1, -1, 1]


def test_unknown_label(tmp_path):
    path = write(tmp_path, "f,c\n0.5,yes\n1.5,no\n2.5,maybe\n")
    with pytest.raises(DataError) as err:
        load_csv(path, CsvSchema(task="classification", positive_label="yes"))
    assert err.value.row == 3 and "maybe" in str(err.value)


@pytest.mark.parametrize("cell", ["NaN", "inf", "abc", ""])
def test_bad_cell_names_row_and_column(tmp_path, cell):
    path = write(tmp_path, f"a,b,y\n1,2,3\n4,{cell},6\n")
    with pytest.raises(DataError) as err:
        load_csv(path)
    assert "row 2" in str(err.value)
    assert err.value.row == 2 and err.value.column == "b"


@pytest.mark.parametrize("text", ["", "a,y\n", "a,y\n1,2\n3\n", "y\n1\n"])
def test_malformed_files(tmp_path, text):
    with pytest.raises(DataError):
        load_csv(write(tmp_path, text))


def test_missing_target_name(tmp_path):
    with pytest.raises(DataError):
        load_csv(write(tmp_path, "a,y\n1,2\n"), CsvSchema(target_column="z"))


def test_schema_validation():
    with pytest.raises(ValueError):
        CsvSchema(task="clustering")
    with pytest.raises(ValueError):
        CsvSchema(task="classification")


def test_bundled_datasets():
    reg = load_csv(bundled("synthetic_regression.csv"))
    assert (reg.n, reg.d) == (300, 5)
    cls = load_csv(bundled("synthetic_classification.csv"),
                   CsvSchema(task="classification", positive_label="pos", negative_label="neg"))
    assert set(np.unique(cls.y)) == {-1.0, 1.0}
    with pytest.raises(FileNotFoundError):
        bundled("absent.csv")


@given(st.integers(3, 500), st.floats(0.05, 0.95), st.integers(0, 2 ** 64 - 1))
def test_split_sizes_and_partition(n, frac, seed):
    n_test = int(np.floor(n * frac + 0.5))
    if n_test < 1 or n - n_test < 2:
        with pytest.raises(ValueError):
            split_indices(n, frac, seed)
        return
    train, test = split_indices(n, frac, seed)
    assert len(test) == n_test
    assert sorted(np.concatenate([train, test]).tolist()) == list(range(n))
    assert np.array_equal(train, split_indices(n, frac, seed)[0])


def test_split_default_third():
    data = Dataset(np.arange(30.0).reshape(-1, 1), np.arange(30.0))
    train, test = split_train_test(data, seed=4)
    assert (train.n, test.n) == (20, 10)
    assert split_train_test(data, seed=5)[1] != test


def test_standardize_uses_train_only():
    rng = np.random.default_rng(0)
    train = Dataset(rng.normal(3, 2, (50, 3)), rng.normal(size=50))
    test = Dataset(rng.normal(100, 9, (20, 3)), rng.normal(size=20))
    ztr, zte, params = standardize(train, test)
    assert np.allclose(ztr.X.mean(axis=0), 0, atol=1e-12)
    assert np.allclose(ztr.X.std(axis=0), 1, atol=1e-12)
    assert np.allclose(zte.X, (test.X - train.X.mean(0)) / train.X.std(0))
    # changing the test set leaves the fitted parameters alone
    assert standardize(train, Dataset(test.X * 7, test.y))[2] == params


def test_standardize_constant_feature():
    X = np.column_stack([np.ones(5), np.arange(5.0)])
    with pytest.warns(UserWarning, match="zero-variance"):
        ztr, zte, params = standardize(Dataset(X, np.zeros(5)), Dataset(X + 1, np.zeros(5)))
    assert np.all(ztr.X[:, 0] == 0) and np.all(zte.X[:, 0] == 0)
    assert params.constant == (0,)


def test_standardize_idempotent():
    rng = np.random.default_rng(1)
    once, _, _ = standardize(Dataset(rng.normal(size=(40, 2)), np.zeros(40)))
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        twice, _, _ = standardize(once)
    assert np.allclose(once.X, twice.X, atol=1e-12)


def test_params_round_trip():
    params = StandardizationParams((1.0, 2.0), (3.0, 4.0), (1,))
    assert StandardizationParams.from_dict(params.to_dict()) == params
