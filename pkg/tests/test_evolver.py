import math

import numpy as np
import pytest

from landau_hall import evolver as ev
from landau_hall import operators as op
from landau_hall.errors import BoundaryError, ParameterError
from landau_hall.grid import GridSpec, SampledState, window_norm
from landau_hall.params import PhysicalParams
from landau_hall.states import AnalyticState, Family


def run_ground(params, grid, steps, n_steps):
    state = AnalyticState(Family.GROUND)
    init = op.sample(state, params, grid, 0.0)
    fin, traj = ev.evolve(init, ev.EvolverConfig(params.period / steps, n_steps, sample_every=n_steps // 4), params)
    exact = op.sample(state, params, grid, fin.t, ky_offset=fin.ky_offset, ensure=False).amplitudes
    err = window_norm(fin.amplitudes - exact, grid) / window_norm(exact, grid)
    return fin, traj, exact, err


def test_ground_state_tracks_oracle(crossed):
    grid = GridSpec.torus(crossed, 128)
    fin, traj, exact, err = run_ground(crossed, grid, 2000, 500)
    assert ev.overlap(fin.amplitudes, exact, grid) > 0.999
    norm = np.array(traj.norm)
    assert np.max(np.abs(norm - norm[0])) < 1e-12 * norm[0]
    _, _, _, err_half = run_ground(crossed, grid, 4000, 1000)
    assert 3.0 <= err / err_half <= 5.0


def test_ground_gauge_bookkeeping(crossed):
    grid = GridSpec.torus(crossed, 64)
    init = op.sample(AnalyticState(Family.GROUND), crossed, grid, 0.0)
    fin, _ = ev.evolve(init, ev.EvolverConfig(crossed.period / 1000, 100), crossed)
    assert fin.ky_offset == pytest.approx(crossed.charge * crossed.field_E * fin.t / crossed.hbar)


def test_lorentz_defects_small(crossed):
    grid = GridSpec.torus(crossed, 256, center=(0.0, 0.0))
    packet = ev.coherent_packet(crossed, grid, -1.5, 0.0)
    report, traj = ev.ehrenfest_lorentz_check(packet, ev.EvolverConfig(crossed.period / 1000, 500), crossed)
    assert report.max_defect < 1e-3
    assert report.pix_drift < 1e-6 and report.piy_drift < 1e-6
    assert set(report.to_dict()) >= {"defect_x", "defect_y", "max_defect"}


def test_zero_field_eigenstate_keeps_energy(natural):
    grid = GridSpec.torus(natural, 64)
    z = op.sample(AnalyticState(Family.ZETA_X, 1), natural, grid, 0.0)
    fin, traj = ev.evolve(z, ev.EvolverConfig(natural.period / 500, 500, sample_every=50), natural)
    e = np.array(traj.energy)
    assert np.max(np.abs(e - e[0])) < 1e-8 * abs(e[0])
    assert e[0] == pytest.approx(1.5, rel=1e-9)
    exact = op.sample(AnalyticState(Family.ZETA_X, 1), natural, grid, fin.t, ensure=False).amplitudes
    assert ev.overlap(fin.amplitudes, exact, grid) > 1 - 1e-10


def test_energy_drift_shrinks_quadratically(natural):
    grid = GridSpec.torus(natural, 256)
    drifts = []
    for steps in (1000, 2000):
        pk = ev.coherent_packet(natural, grid, 0.0, 0.0, kinetic_x=1.0)
        _, traj = ev.evolve(pk, ev.EvolverConfig(natural.period / steps, steps // 4, sample_every=steps // 40), natural)
        e = np.array(traj.energy)
        drifts.append(np.max(np.abs(e - e[0])) / e[0])
    assert 3.0 < drifts[0] / drifts[1] < 5.0


@pytest.mark.slow
def test_energy_drift_below_threshold_at_fine_step(natural):
    grid = GridSpec.torus(natural, 256)
    pk = ev.coherent_packet(natural, grid, 0.0, 0.0, kinetic_x=1.0)
    steps = 32000
    _, traj = ev.evolve(pk, ev.EvolverConfig(natural.period / steps, steps, sample_every=steps // 50), natural)
    e = np.array(traj.energy)
    assert np.max(np.abs(e - e[0])) / e[0] < 1e-8


def test_free_packet_spreads():
    # B so weak that the magnetic terms are negligible over the run
    p = PhysicalParams(field_B=1e-6)
    grid = GridSpec.centered(0.0, 0.0, 40.0, 40.0, 256, 256)
    X, Y = grid.mesh()
    w = 1.0
    psi = np.exp(-(X**2 + Y**2) / (2 * w * w)) + 0j
    dt, n = 0.005, 400
    fin, _ = ev.evolve(SampledState(grid, 0.0, psi, p), ev.EvolverConfig(dt, n), p)
    prob = fin.probability()
    px = prob.sum(axis=1) / prob.sum()
    var = float(np.sum(px * grid.x**2) - np.sum(px * grid.x) ** 2)
    t = dt * n
    expected = 0.5 * w * w * (1 + (p.hbar * t / (p.mass * w * w)) ** 2)
    assert var == pytest.approx(expected, rel=1e-2)


def test_boundary_abort(crossed):
    grid = GridSpec.torus(crossed, 128)
    packet = ev.coherent_packet(crossed, grid, 8.0, 0.0)
    with pytest.raises(BoundaryError):
        ev.evolve(packet, ev.EvolverConfig(crossed.period / 200, 400, sample_every=10), crossed)
    # disabling the guard lets the packet wrap around
    ev.evolve(packet, ev.EvolverConfig(crossed.period / 200, 400, sample_every=10, check_boundary=False), crossed)


def test_preconditions(crossed):
    grid = GridSpec.torus(crossed, 64)
    packet = ev.coherent_packet(crossed, grid, 0.0, 0.0)
    with pytest.raises(ParameterError):
        ev.evolve(packet, ev.EvolverConfig(crossed.period / 50, 1), crossed)
    ev.evolve(packet, ev.EvolverConfig(crossed.period / 50, 1, allow_large_dt=True), crossed)
    box = GridSpec.centered(0, 0, 20, 20, 64, 64, periodic_x=False)
    with pytest.raises(ParameterError):
        ev.evolve(ev.coherent_packet(crossed, box, 0, 0), ev.EvolverConfig(0.01, 1), crossed)
    with pytest.raises(ParameterError):
        ev.EvolverConfig(-1.0, 10)


def test_crank_nicolson_agrees_with_split_step(crossed):
    box = GridSpec.centered(0.0, 0.0, 16.0, 16.0, 80, 80, periodic_x=False, periodic_y=False)
    torus = GridSpec.torus(crossed, 256)
    dt, n = crossed.period / 400, 100
    cfg = ev.EvolverConfig(dt, n, ev.Scheme.CRANK_NICOLSON, sample_every=10)
    _, cn = ev.evolve(ev.coherent_packet(crossed, box, -2.0, 0.0), cfg, crossed)
    _, ss = ev.evolve(ev.coherent_packet(crossed, torus, -2.0, 0.0), ev.EvolverConfig(dt, n, sample_every=10), crossed)
    norm = np.array(cn.norm)
    assert np.max(np.abs(norm - norm[0])) < 1e-10
    assert np.allclose(cn.mean_x, ss.mean_x, atol=2e-2)
    assert np.allclose(cn.mean_y, ss.mean_y, atol=2e-2)


def test_trajectory_csv_roundtrip(tmp_path, crossed):
    grid = GridSpec.torus(crossed, 64)
    _, traj = ev.evolve(ev.coherent_packet(crossed, grid, 0, 0), ev.EvolverConfig(0.01, 20, sample_every=5), crossed)
    traj.to_csv(tmp_path / "t.csv")
    back = ev.Trajectory.read_csv(tmp_path / "t.csv")
    for key, values in traj.arrays().items():
        assert np.array_equal(back.arrays()[key], values)


def test_observables_of_packet(crossed):
    grid = GridSpec.torus(crossed, 128)
    pk = ev.coherent_packet(crossed, grid, 1.0, -0.5, kinetic_x=0.3, kinetic_y=-0.2)
    obs = ev.observe(pk.amplitudes, grid, crossed, 0.0, 0.0)
    assert obs["mean_x"] == pytest.approx(1.0) and obs["mean_y"] == pytest.approx(-0.5)
    # pi'_x = p_x = kinetic_x - m w y_c ; pi'_y = kinetic_y + m w x_c
    assert obs["pix"] == pytest.approx(0.3 + 0.5)
    assert obs["piy"] == pytest.approx(-0.2 + 1.0)
    assert obs["norm"] == pytest.approx(1.0)
    # <H> = mean kinetic energy + lowest-level zero point - q E <y>
    assert obs["energy"] == pytest.approx(0.5 * (0.3**2 + 0.2**2) + 0.5 + 0.5)


def test_coherent_packet_does_not_breathe(natural):
    grid = GridSpec.torus(natural, 128)
    pk = ev.coherent_packet(natural, grid, 0.0, 0.0)
    fin, _ = ev.evolve(pk, ev.EvolverConfig(natural.period / 400, 100), natural)
    # at rest in the lowest level the density is stationary up to the O(dt^2) splitting error
    peak = pk.probability().max()
    assert np.max(np.abs(fin.probability() - pk.probability())) < 1e-4 * peak
