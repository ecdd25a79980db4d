import os

import numpy as np
import pytest

import xfield


def small_scene(seed=1):
    truth = np.ones((24, 24), dtype=np.uint8)
    truth[4:12, 5:14] = 2
    truth[14:20, 12:22] = 3
    rng = np.random.default_rng(seed)
    image = np.choose(truth - 1, [-10.0, 0.0, 10.0]) + rng.normal(0.0, 2.0, truth.shape)
    priors = [dict(name=n, m=m, phi2=25.0, nu=10.0, s2=4.0) for n, m in (("a", -10.0), ("b", 0.0), ("c", 10.0))]
    return truth, image, priors


def test_phantom_shapes():
    p = xfield.phantom(rotation=8.0, bias_amplitude=20.0, seed=3)
    assert p["truth"].shape == (128, 128)
    assert p["image"].dtype == np.float64
    assert set(np.unique(p["truth"])) == set(range(1, 10))
    assert not np.array_equal(p["truth"], p["reference"])


def test_distance_transform_matches_brute_force():
    mask = np.zeros((7, 9), dtype=np.uint8) + 1
    mask[2, 3] = 2
    mask[5, 7] = 2
    d = xfield.distance_transform(mask, 2, spacing=[2.0, 1.0])
    yy, xx = np.mgrid[0:7, 0:9]
    brute = np.minimum(np.hypot((yy - 2) * 2.0, xx - 3), np.hypot((yy - 5) * 2.0, xx - 7))
    assert np.allclose(d, brute, atol=1e-12)


def test_calibrate_grid_and_log_ratio():
    t = xfield.calibrate([4, 4], 2, sweeps=200, burnin=20, seed=2)
    assert len(t.beta) == 41
    assert np.all(np.diff(t.expected_stat) >= 0)
    assert t.log_ratio(0.0, 0.0) == 0.0
    assert t.log_ratio(0.0, 1.0) < 0.0


def test_segment_with_field_and_update(tmp_path):
    truth, image, priors = small_scene()
    table = xfield.calibrate(list(truth.shape), 3, sweeps=100, burnin=20)
    field = xfield.build_field_prior(truth, sigma_delta=3.0)
    assert field.log_density.shape == (3, 24, 24)
    assert field.mode == "exact"
    approx = xfield.build_field_prior(truth, sigma_delta=3.0, mode="approx")
    assert approx.argmax()[8, 9] == 2 and approx.argmax()[17, 17] == 3
    r = xfield.segment(image, table, field, priors=priors, iterations=150, burnin=30, seed=4, truth=truth)
    assert r.modal.shape == truth.shape
    assert xfield.score(r.modal, truth)["misclassification"] < 0.05
    assert r.counts.sum(axis=0).max() == r.retained
    assert len(r.beta_trace) == 150
    again = xfield.segment(image, table, field, priors=priors, iterations=150, burnin=30, seed=4, truth=truth, workers=2)
    assert np.array_equal(r.beta_trace, again.beta_trace)
    post = xfield.update_delta([r, again], truth)
    assert [d["label"] for d in post] == [1, 2, 3]
    assert all(d["n"] > 1.0 for d in post)
    r.save(str(tmp_path / "chain"))
    assert (tmp_path / "chain" / "traces.csv").exists()


def test_errors_surface_as_python_exceptions():
    _, image, priors = small_scene()
    with pytest.raises(xfield.Error):
        xfield.segment(image, None, priors=priors, iterations=10, burnin=2)
    with pytest.raises(xfield.Error):
        xfield.build_field_prior(np.ones((4, 4), dtype=np.uint8), mode="sideways")


def test_cli_in_process(tmp_path):
    out = str(tmp_path / "cal")
    assert xfield.run_cli(["calibrate", "--dims", "4,4", "--k", "2", "--sweeps", "20", "--burnin", "5", "--out", out]) == 0
    assert os.path.exists(os.path.join(out, "path_table.csv"))
    assert xfield.run_cli(["calibrate", "--k", "2"]) == 1
