import numpy as np
import pytest

from pqcsearch.data import (
    fit_minmax_and_scale,
    gen_quadratic_1d,
    gen_quadratic_2d,
    load_scale,
    load_table,
    save_scale,
    save_table,
    split_dataset,
)
from pqcsearch.errors import ConfigurationError, ParseError, ScalingError


def test_quadratic_1d_noise_free_is_exact():
    ds = gen_quadratic_1d(n=50, noise_sd=0.0, seed=1)
    assert ds.X.shape == (50, 4)
    assert np.allclose(ds.y, ds.X[:, 0] ** 2, atol=0)
    # redundant encoding: every column carries the same scalar
    assert np.array_equal(ds.X[:, 0], ds.X[:, 3])
    assert np.all((-2 < ds.X[:, 0]) & (ds.X[:, 0] < 2))


def test_quadratic_1d_is_seed_deterministic():
    a = gen_quadratic_1d(n=40, seed=9)
    b = gen_quadratic_1d(n=40, seed=9)
    assert np.array_equal(a.X, b.X) and np.array_equal(a.y, b.y)
    c = gen_quadratic_1d(n=40, seed=10)
    assert not np.array_equal(a.y, c.y)


def test_quadratic_1d_noise_variance_within_chi2_bounds():
    # chi-square 99% interval for the sample variance of 500 N(0, 0.25) draws
    ds = gen_quadratic_1d(n=500, noise_sd=0.5, seed=3)
    resid = ds.y - ds.X[:, 0] ** 2
    assert 0.18 <= resid.var() <= 0.33


def test_quadratic_1d_variance_mode():
    ds = gen_quadratic_1d(n=500, noise_sd=0.5, seed=3, noise_as_variance=True)
    resid = ds.y - ds.X[:, 0] ** 2
    assert 0.4 <= resid.var() <= 0.62  # sigma^2 = 0.5


def test_quadratic_1d_feature_width_is_configurable():
    assert gen_quadratic_1d(n=5, n_features=1).X.shape == (5, 1)


def test_quadratic_2d_basics():
    ds = gen_quadratic_2d(seed=2)
    assert ds.X.shape == (200, 2)
    noise_free = gen_quadratic_2d(n=100, noise_sd=0.0, seed=2)
    assert np.allclose(noise_free.y, noise_free.X[:, 0] ** 2 + noise_free.X[:, 1] ** 2)
    assert np.all(np.abs(noise_free.X) < 1)
    # boundary of the open square maps to target 2
    assert (0.999**2 + 0.999**2) == pytest.approx(2.0, abs=5e-3)


def test_gen_rejects_bad_n():
    with pytest.raises(ConfigurationError):
        gen_quadratic_1d(n=0)


def test_load_table(tmp_path):
    p = tmp_path / "t.csv"
    p.write_text("a,b,c,d,e,target\n1,2,3,4,5,6\n7,8,9,10,11,12\n0,0,1,1,2,2\n")
    ds = load_table(p, "target")
    assert ds.X.shape == (3, 5)
    assert ds.feature_names == ["a", "b", "c", "d", "e"]
    assert np.array_equal(ds.y, [6.0, 12.0, 2.0])


def test_load_table_target_not_last_column(tmp_path):
    p = tmp_path / "t.csv"
    p.write_text("a,target,b\n1,5,2\n3,6,4\n")
    ds = load_table(p, "target")
    assert np.array_equal(ds.X, [[1.0, 2.0], [3.0, 4.0]])
    assert np.array_equal(ds.y, [5.0, 6.0])


def test_load_table_missing_target(tmp_path):
    p = tmp_path / "t.csv"
    p.write_text("a,b\n1,2\n")
    with pytest.raises(ParseError):
        load_table(p, "target")


def test_load_table_non_numeric_reports_location(tmp_path):
    p = tmp_path / "t.csv"
    p.write_text("a,b\n1,2\n1,oops\n")
    with pytest.raises(ParseError) as err:
        load_table(p, "b")
    assert "row 3" in str(err.value) and "column b" in str(err.value)


def test_load_table_ragged_row(tmp_path):
    p = tmp_path / "t.csv"
    p.write_text("a,b\n1,2\n1,2,3\n")
    with pytest.raises(ParseError) as err:
        load_table(p, "b")
    assert "row 3" in str(err.value)


def test_save_then_load_round_trip(tmp_path):
    ds = gen_quadratic_2d(n=25, seed=5)
    p = tmp_path / "rt.csv"
    save_table(ds, p)
    back = load_table(p, "y")
    assert np.array_equal(back.X, ds.X)
    assert np.array_equal(back.y, ds.y)
    assert back.feature_names == ds.feature_names


def test_minmax_scaling_values():
    from pqcsearch.data import Dataset

    ds = Dataset(
        X=np.array([[0.0, -1.0], [10.0, 1.0]]),
        y=np.array([3.0, 7.0]),
        feature_names=["a", "b"],
    )
    scaled = fit_minmax_and_scale(ds)
    assert np.allclose(scaled.X[:, 0], [-1.0, 1.0])
    assert np.allclose(scaled.X[:, 1], [-1.0, 1.0])  # already [-1,1]: unchanged
    assert np.array_equal(scaled.X[:, 1], ds.X[:, 1])
    assert np.allclose(scaled.y, [-1.0, 1.0])


def test_scaling_record_inverts_target():
    ds = gen_quadratic_1d(n=64, seed=6)
    scaled = fit_minmax_and_scale(ds)
    assert np.all(scaled.X >= -1.0) and np.all(scaled.X <= 1.0)
    assert np.all(scaled.y >= -1.0) and np.all(scaled.y <= 1.0)
    assert np.abs(scaled.scale.unscale_y(scaled.y) - ds.y).max() < 1e-12


def test_scaling_constant_column_names_it():
    from pqcsearch.data import Dataset

    ds = Dataset(X=np.array([[1.0, 2.0], [1.0, 3.0]]), y=np.array([0.0, 1.0]), feature_names=["k", "v"])
    with pytest.raises(ScalingError) as err:
        fit_minmax_and_scale(ds)
    assert "'k'" in str(err.value)


def test_scaling_fit_on_train_rows_only():
    ds = gen_quadratic_1d(n=100, seed=7)
    split = split_dataset(ds, 0.8, seed=7)
    scaled = fit_minmax_and_scale(ds, fit_rows=split.train)
    # training rows stay inside [-1, 1]; validation rows may poke out
    assert np.all(np.abs(scaled.X[split.train]) <= 1.0)
    assert scaled.scale.features[0].lo == ds.X[split.train, 0].min()


def test_split_sizes_and_determinism():
    ds = gen_quadratic_1d(n=500, seed=8)
    s = split_dataset(ds, 0.8, seed=1)
    assert len(s.train) == 400 and len(s.val) == 100
    assert sorted(np.concatenate([s.train, s.val])) == list(range(500))
    s2 = split_dataset(ds, 0.8, seed=1)
    assert np.array_equal(s.train, s2.train)
    small = split_dataset(gen_quadratic_1d(n=10, seed=8), 0.8, seed=1)
    assert len(small.train) == 8 and len(small.val) == 2


def test_split_rejects_bad_fraction():
    ds = gen_quadratic_1d(n=10, seed=8)
    for f in (0.0, 1.0, -0.1, 1.5):
        with pytest.raises(ConfigurationError):
            split_dataset(ds, f, seed=1)


def test_scale_sidecar_round_trip(tmp_path):
    ds = gen_quadratic_2d(n=30, seed=9)
    scaled = fit_minmax_and_scale(ds)
    p = tmp_path / "scale.json"
    save_scale(scaled.scale, ds.feature_names, ds.target_name, p)
    back = load_scale(p, ds.feature_names)
    assert back == scaled.scale
