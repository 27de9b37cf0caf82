import os
from pathlib import Path

import numpy as np
import pytest

import legvio

SCENARIOS = Path(os.environ.get("LEGVIO_SOURCE_DIR", Path(__file__).resolve().parents[2])) / "scenarios"

SHORT = """
[run]
name = "py"
seeds = [4]
[[gait]]
kind = "stand"
duration = 1
[[gait]]
kind = "trot"
vx = 0.3
duration = 2
"""


@pytest.fixture(scope="module")
def run():
    cfg = legvio.parse_config(SHORT)
    return cfg, legvio.simulate(cfg, seed=4)


def test_variants():
    assert legvio.variants() == ["ekf_leg", "ekf_vicon", "ekf_vio+", "ekf_vio", "vio+", "vio"]


def test_config_roundtrip_and_errors():
    cfg = legvio.load_config(str(SCENARIOS / "trot.toml"))
    assert cfg.seeds == [1, 2, 3]
    cfg.set("contact.n_standing", "20")
    again = legvio.parse_config(cfg.dump())
    assert again.hash() == cfg.hash()
    with pytest.raises(legvio.ConfigError):
        cfg.set("contact.bogus", "1")
    with pytest.raises(ValueError):
        legvio.load_config("/nonexistent.toml")


def test_so3_roundtrip():
    phi = np.array([0.3, -0.2, 0.9])
    R = legvio.so3_exp(phi)
    assert np.allclose(R @ R.T, np.eye(3), atol=1e-14)
    assert np.allclose(legvio.so3_log(R), phi, atol=1e-12)


def test_preintegrate_matches_numpy_sum():
    rng = np.random.default_rng(0)
    acc = rng.normal(size=(200, 3))
    gyro = np.zeros((200, 3))
    dR, dv, dp = legvio.preintegrate(acc, gyro, 1e-3)
    assert np.allclose(dR, np.eye(3))
    assert np.allclose(dv, acc.sum(axis=0) * 1e-3, atol=1e-13)
    v_before = np.vstack([np.zeros(3), np.cumsum(acc, axis=0)[:-1] * 1e-3])
    assert np.allclose(dp, v_before.sum(axis=0) * 1e-3, atol=1e-13)


def test_jacobian_finite_difference():
    q = np.array([0.1, 0.7, -1.3])
    J = legvio.jac_foot(0, q)
    h = 1e-6
    num = np.column_stack(
        [(legvio.fk_foot(0, q + h * e) - legvio.fk_foot(0, q - h * e)) / (2 * h) for e in np.eye(3)]
    )
    assert np.abs(J - num).max() < 1e-8


def test_yaw_gravity():
    yaw, grav = legvio.yaw_gravity_decompose(legvio.so3_exp(np.array([0.0, 0.0, 0.2])))
    assert yaw == pytest.approx(np.degrees(0.2))
    assert grav == pytest.approx(0.0, abs=1e-12)


def test_simulate_estimate_rpe(run):
    cfg, sim = run
    truth = sim.truth
    assert truth.shape == (sim.num_imu, 11)
    assert sim.truth_contact.shape == (sim.num_imu, 4)
    est = legvio.estimate(sim, cfg, "ekf_vio+")
    traj = est.trajectory
    assert traj.shape == truth.shape
    assert est.b_dz.shape[0] == traj.shape[0]
    assert est.counters["vio_updates"] > 0
    rep = legvio.rpe(traj, truth, intervals=[0.1, 1.0])
    assert set(rep) == {0.1, 1.0, "all"}
    assert rep[1.0]["xy"]["count"] > 0
    assert rep["all"]["xy"]["mean"] < 0.05
    with pytest.raises(ValueError):
        legvio.estimate(sim, cfg, "ekf_gps")


def test_rpe_offset_invariance(run):
    _, sim = run
    truth = sim.truth.copy()
    shifted = truth.copy()
    shifted[:, 1:4] += np.array([1.0, -2.0, 0.5])
    rep = legvio.rpe(shifted, truth)
    assert rep["all"]["xy"]["max"] < 1e-12


def test_write_run(tmp_path, run):
    cfg, sim = run
    sim.write(str(tmp_path / "r"), cfg, 4)
    for name in ["imu.csv", "joints.csv", "vio.csv", "truth.csv", "config.toml", "manifest.txt"]:
        assert (tmp_path / "r" / name).exists()
