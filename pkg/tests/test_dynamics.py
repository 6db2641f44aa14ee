import math

import numpy as np
import pytest

from chronos import energy_shift as es
from chronos.dynamics import ClassicalEnsemble, classical_arrival_oracle, evolve, expectation_series
from chronos.errors import ChronosError, NonHermitianError, ShapeError
from chronos.experiments import energy_suite
from chronos.lattice import Rep, SpinorState, StateVector, make_grid
from chronos.opalg import LinearOperator, coordinate_operator, identity, position_operator
from chronos.time_construct import (
    dirac_hamiltonian,
    free_hamiltonian,
    linear_potential_hamiltonian,
    t1_from_dynamical,
)

TIMES = np.linspace(0.0, 2.0, 21)


def test_evolve_zero_time_is_identity(grid, packet):
    assert evolve(packet, free_hamiltonian(grid, 1.0), 0.0) is packet


def test_stationary_basis_state():
    g = make_grid(4, 0.0, 1.0, Rep.ENERGY_HALF_LINE)
    h = LinearOperator(g, np.diag([0.0, 1.0, 2.0, 3.0]))
    out = evolve(StateVector(g, [0, 0, 1.0, 0]), h, 0.7)
    assert out.amplitudes[2] == np.exp(-2j * 0.7)
    assert np.count_nonzero(out.amplitudes) == 1


def test_ehrenfest_free_motion(grid, packet):
    h = free_hamiltonian(grid, 1.0)
    x = position_operator(grid)
    for t in TIMES:
        assert abs(x.expectation(evolve(packet, h, t)).real - (-10.0 + 2.0 * t)) <= 1e-4


@pytest.mark.parametrize("which", ["free", "linear", "dirac"])
def test_norm_conservation(grid, packet, which):
    if which == "dirac":
        h = dirac_hamiltonian(1.0, grid)
        state = SpinorState(grid, packet.vector, 0.5 * packet.vector).normalized()
    else:
        h = free_hamiltonian(grid, 1.0) if which == "free" else linear_potential_hamiltonian(grid, 1.0, 1.0)
        state = packet
    for t in (0.3, 1.0, 2.0):
        assert abs(evolve(state, h, t).norm() - 1.0) <= 1e-10


def test_evolve_input_checks(grid, packet):
    g2 = make_grid(2, 0.0, 1.0, Rep.POSITION)
    with pytest.raises(NonHermitianError):
        evolve(StateVector(g2, [1.0, 0]), LinearOperator(g2, np.array([[0.0, 1.0], [0.0, 0.0]])), 1.0)
    with pytest.raises(ShapeError):
        evolve(packet, LinearOperator(g2, np.eye(2)), 1.0)


def test_linear_potential_momentum_falls(grid, packet):
    # d<p>/dt = -m g
    h = linear_potential_hamiltonian(grid, 1.0, 0.5)
    series = expectation_series(coordinate_operator(grid), packet, h, np.linspace(0, 0.5, 6))
    assert abs(series.fitted_slope + 0.5) <= 1e-6


def test_series_energy_and_identity(grid, packet):
    h = free_hamiltonian(grid, 1.0)
    energy = expectation_series(h, packet, h, TIMES)
    assert abs(energy.fitted_slope) <= 1e-9
    assert np.ptp(energy.values) <= 1e-9
    ones = expectation_series(identity(grid), packet, h, TIMES)
    assert np.abs(ones.values - 1.0).max() <= 1e-12
    assert len(ones.times) == len(ones.values) == len(TIMES)


def test_drift_law_t1(grid, packet):
    t1 = t1_from_dynamical(position_operator(grid), free_hamiltonian(grid, 1.0), [packet])
    series = expectation_series(t1.operator, packet, t1.hamiltonian, TIMES)
    assert abs(series.fitted_slope - (-1.0)) <= 1e-3
    assert series.max_imag <= 1e-9
    fit = np.polyval(np.polyfit(TIMES, series.values, 1), TIMES)
    assert series.fit_residual == pytest.approx(math.sqrt(np.mean((series.values - fit) ** 2)), abs=1e-12)


def test_drift_law_restriction():
    lat = es.make_lattice(512, 0.01)
    bundle = es.restricted_generator(lat)
    series = expectation_series(bundle.operator, energy_suite(lat.half)[0], bundle.hamiltonian, TIMES)
    # [H, T] = -i gives slope +1
    assert abs(series.fitted_slope - 1.0) <= 1e-3


# --- classical oracle ---------------------------------------------------------


def test_oracle_single_sample():
    mean, err = classical_arrival_oracle(ClassicalEnsemble(np.array([[-10.0, 2.0]]), 1.0, 0))
    assert mean == 5.0 and err == 0.0


def test_oracle_mirrored_negates():
    ens = ClassicalEnsemble.from_gaussian_packet(1.0, 2.0, 0.05, -10.0, 1000, seed=3)
    mean, _ = classical_arrival_oracle(ens)
    mirrored, _ = classical_arrival_oracle(ens.mirrored())
    assert mirrored == -mean


def test_oracle_is_seeded():
    a = ClassicalEnsemble.from_gaussian_packet(1.0, 2.0, 0.05, -10.0, 500, seed=11)
    b = ClassicalEnsemble.from_gaussian_packet(1.0, 2.0, 0.05, -10.0, 500, seed=11)
    c = ClassicalEnsemble.from_gaussian_packet(1.0, 2.0, 0.05, -10.0, 500, seed=12)
    assert np.array_equal(a.samples, b.samples)
    assert not np.array_equal(a.samples, c.samples)


def test_oracle_rejects_bad_ensembles():
    with pytest.raises(ChronosError):
        classical_arrival_oracle(ClassicalEnsemble(np.array([[1.0, 0.0]]), 1.0, 0))
    with pytest.raises(ChronosError):
        classical_arrival_oracle(ClassicalEnsemble(np.empty((0, 2)), 1.0, 0))
    with pytest.raises(ChronosError):
        ClassicalEnsemble(np.array([[1.0, 1.0]]), 0.0, 0)


def test_oracle_mean_of_standard_packet():
    ens = ClassicalEnsemble.from_gaussian_packet(1.0, 2.0, 0.05, -10.0, 1_000_000, seed=0)
    mean, err = classical_arrival_oracle(ens)
    # E[1/p] = (1/p0)(1 + sigma^2/p0^2 + ...), so the mean sits near 5.003
    assert abs(mean - 5.003) <= 0.01
    # spread of -x/p is sqrt(sigma_x^2 / p0^2 + x0^2 sigma_p^2 / p0^4) to leading order
    spread = math.sqrt(10.0**2 / 4 + 100 * 0.05**2 / 16)
    assert err == pytest.approx(spread / 1000, rel=0.02)
    assert ens.x.std() == pytest.approx(10.0, rel=0.01)
    assert ens.p.std() == pytest.approx(0.05, rel=0.01)


def test_quantum_classical_agreement(grid, packet):
    t1 = t1_from_dynamical(position_operator(grid), free_hamiltonian(grid, 1.0), [packet])
    quantum = t1.operator.expectation(packet).real
    mean, err = classical_arrival_oracle(
        ClassicalEnsemble.from_gaussian_packet(1.0, 2.0, 0.05, -10.0, 1_000_000, seed=0)
    )
    assert abs(quantum - mean) <= 3 * (err + 0.03)
