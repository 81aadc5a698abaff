import numpy as np
import pytest
from scipy.stats import ks_2samp, kstest

import graphonlearn as gl
from graphonlearn._validation import midpoints


@pytest.fixture(scope="module")
def constant_density():
    return gl.transition_density(gl.constant(0.5))


def test_pairs_basic():
    trajectory = gl.Trajectory(states=np.array([0.1, 0.2, 0.3]))
    paired = gl.pairs(trajectory)
    assert len(paired) == 2
    assert np.allclose(paired.x, [0.1, 0.2])
    assert np.allclose(paired.y, [0.2, 0.3])


def test_pairs_symmetrize_appends_reversed():
    trajectory = gl.Trajectory(states=np.array([0.1, 0.2, 0.3]))
    paired = gl.pairs(trajectory, symmetrize=True)
    assert np.allclose(paired.x, [0.1, 0.2, 0.2, 0.3])
    assert np.allclose(paired.y, [0.2, 0.3, 0.1, 0.2])


def test_walk_length_and_range(constant_density):
    trajectory = gl.walk(constant_density, 500, seed=0)
    assert len(trajectory.states) == 501
    assert trajectory.n_steps == 500
    assert trajectory.states.min() >= 0 and trajectory.states.max() <= 1
    assert len(gl.pairs(trajectory)) == 500


def test_walk_deterministic(constant_density):
    a = gl.walk(constant_density, 300, seed=42)
    b = gl.walk(constant_density, 300, seed=42)
    assert np.array_equal(a.states, b.states)
    c = gl.walk(constant_density, 300, seed=43)
    assert not np.array_equal(a.states, c.states)


def test_constant_kernel_walk_is_uniform(constant_density):
    trajectory = gl.walk(constant_density, 20000, seed=1)
    assert kstest(trajectory.states, "uniform").statistic < 0.02


def test_inverse_and_rejection_agree(constant_density):
    inv = gl.walk(constant_density, 20000, seed=1, method="inverse-transform")
    rej = gl.walk(constant_density, 20000, seed=2, method="rejection")
    assert ks_2samp(inv.states, rej.states).statistic < 0.02


def test_rejection_on_peaked_kernel_matches_inverse():
    density = gl.transition_density(gl.triple_peak())
    inv = gl.walk(density, 4000, seed=5, method="inverse-transform")
    rej = gl.walk(density, 4000, seed=5, method="rejection")
    bins = np.linspace(0, 1, 21)
    h_inv = np.histogram(inv.states, bins=bins, density=True)[0]
    h_rej = np.histogram(rej.states, bins=bins, density=True)[0]
    assert np.abs(h_inv - h_rej).mean() < 0.25


def test_triple_peak_walk_dwells_in_peaks(triple_setup):
    trajectory = gl.walk(triple_setup["density"], 2000, seed=3)
    labels = np.digitize(trajectory.states, [0.365, 0.635])
    occupancy = np.bincount(labels, minlength=3) / len(trajectory.states)
    assert occupancy.min() > 0.08
    crossings = np.mean(np.diff(labels) != 0)
    assert 0 < crossings < 0.2


def test_ergodic_average_triple_peak(triple_setup, triple_walk):
    stationary = triple_setup["stationary"]
    grid = midpoints(2000)
    target = float((grid * stationary(grid)).mean())
    empirical = float(triple_walk.states[:-1].mean())
    assert abs(empirical - target) < 0.02


def test_bipartite_walk_alternates():
    density = gl.transition_density(gl.bipartite())
    trajectory = gl.walk(density, 99, seed=3)
    halves = (trajectory.states > 0.5).astype(int)
    assert np.all(np.abs(np.diff(halves)) == 1)


def test_burn_in_discards_prefix(constant_density):
    full = gl.walk(constant_density, 150, seed=9, burn_in=0)
    trimmed = gl.walk(constant_density, 100, seed=9, burn_in=50)
    assert np.array_equal(trimmed.states, full.states[50:])


def test_trajectory_csv_round_trip(tmp_path, constant_density):
    trajectory = gl.walk(constant_density, 50, seed=11)
    path = trajectory.to_csv(tmp_path / "walk.csv")
    loaded = gl.Trajectory.from_csv(path)
    assert np.allclose(loaded.states, trajectory.states)
    assert loaded.seed == 11
    assert loaded.source["kind"] == "graphon-walk"
    assert not loaded.periodic


def test_trajectory_validation():
    with pytest.raises(gl.DomainError):
        gl.Trajectory(states=np.array([0.1, 1.2]))
    with pytest.raises(gl.DomainError):
        gl.Trajectory(states=np.array([0.5]))


# -- SDE ----------------------------------------------------------------------


def test_sde_config_validation():
    with pytest.raises(gl.ConfigError):
        gl.SdeConfig(rotation=np.array([[0.0, 1.0], [1.0, 0.0]]))
    with pytest.raises(gl.ConfigError):
        gl.SdeConfig(lag=0.1, dt=0.03)
    cfg = gl.SdeConfig(lag=0.1, dt=0.005)
    assert cfg.substeps == 20


def test_sde_walk_shape_and_flags():
    trajectory = gl.sde_walk(gl.lemon_slice_config(), 200, seed=0)
    assert len(trajectory.states) == 201
    assert trajectory.periodic
    assert trajectory.states.min() >= 0 and trajectory.states.max() < 1


def test_sde_walk_deterministic():
    cfg = gl.lemon_slice_config()
    a = gl.sde_walk(cfg, 100, seed=5)
    b = gl.sde_walk(cfg, 100, seed=5)
    assert np.array_equal(a.states, b.states)


def test_sde_low_noise_stays_in_well():
    angle = np.pi / 5
    cfg = gl.SdeConfig(
        wells=5,
        rotation=np.zeros((2, 2)),
        beta=200.0,
        origin=(np.cos(angle), np.sin(angle)),
    )
    trajectory = gl.sde_walk(cfg, 2000, seed=2)
    assert np.ptp(trajectory.states) < 0.2


def test_sde_without_rotation_matches_reversible_analysis():
    cfg = gl.SdeConfig(wells=5, rotation=np.zeros((2, 2)), beta=2.0)
    trajectory = gl.sde_walk(cfg, 20000, seed=7, burn_in=100)
    asym = gl.TransferOperatorEDMD(pipeline="asymmetric").fit(trajectory)
    sym = gl.TransferOperatorEDMD(pipeline="symmetric").fit(trajectory)
    sigma = asym.singular_values_[:6]
    magnitudes = np.abs(np.real(sym.eigenvalues_[:6]))
    assert np.abs(sigma - magnitudes).max() < 0.02
