"""Smoke tests for the Python bindings against the built extension."""

import math
import os
import subprocess

import numpy as np
import pytest

import _phaseid as ph


@pytest.fixture(scope="module")
def small_feeder():
    ds, truth = ph.generate_synthetic_feeder(
        meters_per_phase=6, transformers_per_phase=3, days=7, seed=31,
        missing_fraction=0.03,
    )
    ds, removed = ph.drop_sparse_meters(ds, 0.80)
    assert removed == []
    return ph.normalize_voltages(ds), truth


def test_version():
    assert ph.__version__


def test_generator_shape(small_feeder):
    ds, truth = small_feeder
    assert ds.n_meters == 18
    assert ds.n_samples == 7 * 96
    assert list(truth["meter_ids"]) == list(ds.meter_ids)
    p = ds.power(0)
    assert p.shape == (ds.n_samples,)
    assert np.nanmax(p) != np.nanmin(p)


def test_distance_matrix_contracts(small_feeder):
    ds, _ = small_feeder
    dm = ph.pairwise_distance_matrix(ds, 1.0, 1.0, min_pcc_samples=24, workers=2)
    d = dm.dist
    assert d.shape == (18, 18)
    assert np.allclose(d, d.T)
    assert np.allclose(np.diag(d), 0.0)
    assert d.min() >= 0.0 and d.max() <= 1.0


def test_identify_flow(small_feeder):
    ds, truth = small_feeder
    dm = ph.pairwise_distance_matrix(ds, 1.0, 1.0, min_pcc_samples=24)
    dg = ph.agglomerative_cluster(dm)
    labels = list(truth["phase"])
    best = 0.0
    for assignment in ph.cluster_sweep(dg, 4):
        pred = ph.majority_vote(assignment, labels)
        best = max(best, ph.score(pred, labels)["accuracy"])
    assert best >= 0.9


def test_ensemble_flow(small_feeder):
    ds, truth = small_feeder
    ens = ph.build_ensemble(ds, [0.8, 1.0], [1.0], target_clusters=6, workers=2)
    sim = ph.cts_similarity(ens, 0.8)
    assert sim.shape == (18, 18)
    assert np.allclose(np.diag(sim), 1.0)
    final = ph.final_partition(sim, 6)
    labels = list(truth["phase"])
    acc = ph.score(ph.majority_vote(final, labels), labels)["accuracy"]
    assert acc >= 0.8


def test_pcc_and_segments():
    x = np.array([1.0, 2.0, 3.0])
    assert ph.pcc(x, x) == 1.0
    assert ph.pcc(x, x[::-1].copy()) == -1.0
    assert ph.correlation_distance(0.25) == 0.75
    mask = ph.low_power_mask(np.array([0.3, 1.2, 0.5]), 1.0)
    assert mask == [True, False, True]


def test_solve_secondary_quadratic():
    s = ph.solve_secondary(1, 0.0, 0.05, 0.05, 120.0, 5.0, 5.0)
    root = (120.0 + math.sqrt(120.0**2 - 4 * 0.05 * 5000.0)) / 2.0
    assert abs(s.v_i - root) < 1e-8
    assert abs(s.v_i - s.v_j) < 1e-12


def test_monte_carlo_identical_loads():
    r = ph.monte_carlo_pcc(1, 0.0, 0.05, 0.05, [(1.0, 8.0)], band_volts=0.0,
                           n_per_bin=500, seed=3, identical_loads=True)
    assert r["pcc"][0] == pytest.approx(1.0)


def test_errors_map_to_python():
    with pytest.raises(ph.ConfigError):
        ph.generate_synthetic_feeder(meters_per_phase=2, transformers_per_phase=5)
    with pytest.raises(ph.InputError):
        ph.load_meter_csv("/nonexistent/file.csv")
    with pytest.raises(ph.ContractError):
        ph.pcc(np.array([1.0]), np.array([1.0]))


def test_csv_round_trip(tmp_path, small_feeder):
    ds, _ = small_feeder
    path = str(tmp_path / "rt.csv")
    ds.to_csv(path)
    again = ph.load_meter_csv(path)
    assert again.n_meters == ds.n_meters
    assert again.n_samples == ds.n_samples
    np.testing.assert_allclose(again.voltage(3), ds.voltage(3), rtol=0, atol=0)


def test_cli_round_trip(tmp_path):
    cli = os.environ.get("PHASEID_CLI")
    if not cli:
        pytest.skip("PHASEID_CLI not set")
    out = tmp_path / "sim"
    subprocess.run([cli, "simulate", "-o", str(out), "--days", "3",
                    "--meters-per-phase", "4", "--transformers-per-phase", "2",
                    "--no-mc", "--seed", "5"], check=True)
    result = subprocess.run(
        [cli, "identify", "-i", str(out / "data.csv"), "--c", "1.0", "--t-dur", "1.0",
         "--n-max", "4", "--min-pcc-samples", "24", "-o", str(tmp_path / "idout")],
        check=True, capture_output=True, text=True)
    assert "accuracy=" in result.stdout
    assert (tmp_path / "idout" / "report.json").exists()
