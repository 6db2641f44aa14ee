import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from chronos import energy_shift as es
from chronos.errors import GridError, OffLatticeError, ShiftRangeError
from chronos.experiments import energy_suite
from chronos.lattice import StateVector
from chronos.time_construct import Kind, t_kg_energy_rep


@pytest.fixture(scope="module")
def lat():
    return es.make_lattice(256, 1.0)


def _basis(grid, k):
    amps = np.zeros(grid.n, dtype=complex)
    amps[k] = 1.0
    return StateVector(grid, amps)


def _gaussian(grid, e0, width):
    e = grid.points
    return StateVector(grid, np.exp(-((e - e0) ** 2) / (2 * width**2)) * np.exp(0.7j * e)).normalized()


def test_lattice_layout():
    lat = es.make_lattice(2, 1.0)
    assert lat.full.points.tolist() == [-2.0, -1.0, 0.0, 1.0, 2.0]
    assert lat.half.points.tolist() == [0.0, 1.0, 2.0]
    assert lat.zero_index == 2
    with pytest.raises(GridError):
        es.make_lattice(0)


def test_hamiltonian_examples():
    lat = es.make_lattice(3, 1.0)
    assert np.array_equal(es.hamiltonian_h0(lat.half).matrix, np.diag([0.0, 1, 2, 3]))
    lat2 = es.make_lattice(2, 1.0)
    h = es.hamiltonian_h0(lat2.full)
    assert np.array_equal(h.matrix, np.diag([-2.0, -1, 0, 1, 2]))
    assert h.hermiticity_defect == 0
    assert np.array_equal(es.hamiltonian_h0(lat2.full, 1.0).matrix, np.diag([-1.0, 0, 1, 2, 3]))


# --- generator ---------------------------------------------------------------


def test_generator_commutator():
    lat = es.make_lattice(400, 0.01)
    s = es.shift_generator_full(lat).matrix
    h = es.hamiltonian_h0(lat.full).matrix
    for psi in energy_suite(lat.full, count=4):
        v = psi.vector
        r = h @ (s @ v) - s @ (h @ v) + 1j * v
        assert np.linalg.norm(r) / np.linalg.norm(v) <= 1e-6


def test_generator_eigenaction():
    lat = es.make_lattice(400, 0.01)
    s = es.shift_generator_full(lat)
    e = lat.full.points
    assert np.abs((s @ np.ones(lat.full.n))[2:-2]).max() <= 1e-12
    for tau in (0.5, 1.0, 2.0):
        wave = np.exp(-1j * tau * e)
        # +i d/dE exp(-i tau E) = +tau exp(-i tau E)
        assert np.abs((s @ wave - tau * wave)[2:-2]).max() <= 1e-7


# --- full-line shifts --------------------------------------------------------


def test_shift_moves_eigenvalue(lat):
    h = es.hamiltonian_h0(lat.full).matrix
    start = _basis(lat.full, lat.zero_index + 2)
    out = es.v_shift_full(start, 3, lat)
    k = lat.zero_index + 5
    assert np.array_equal(out.amplitudes, _basis(lat.full, k).amplitudes)
    assert (h @ out.vector)[k] == 5.0


def test_shift_group_laws(lat, rng):
    amps = np.zeros(lat.full.n, dtype=complex)
    amps[20:-20] = rng.normal(size=lat.full.n - 40) + 1j * rng.normal(size=lat.full.n - 40)
    psi = StateVector(lat.full, amps)
    assert np.array_equal(es.v_shift_full(psi, 0, lat).amplitudes, psi.amplitudes)
    for j in (1, 7, 20):
        there = es.v_shift_full(psi, j, lat)
        back = es.v_shift_full(there, -j, lat)
        assert np.array_equal(back.amplitudes, psi.amplitudes)
        assert there.norm_squared() == psi.norm_squared()


def test_shift_range_and_lattice_checks(lat):
    psi = _basis(lat.full, lat.zero_index)
    with pytest.raises(ShiftRangeError):
        es.v_shift_full(psi, lat.M + 1, lat)
    with pytest.raises(OffLatticeError):
        es.v_shift_full(psi, 1.5, lat)
    with pytest.raises(OffLatticeError):
        es.shift_index(0.5, lat)
    assert es.shift_index(3.0, lat) == 3
    with pytest.raises(GridError):
        es.v_shift_full(_basis(lat.half, 0), 1, lat)


def test_edge_loss_is_flagged(lat):
    psi = _basis(lat.full, lat.full.n - 1)
    with pytest.warns(es.EdgeLossWarning):
        out = es.v_shift_full(psi, 1, lat)
    assert out.norm_squared() == 0
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        es.v_shift_full(psi, -1, lat)


# --- embed / restrict ----------------------------------------------------------


def test_embed_restrict(lat, rng):
    e0 = es.embed(_basis(lat.half, 0), lat)
    assert np.array_equal(e0.amplitudes, _basis(lat.full, lat.zero_index).amplitudes)
    neg = np.zeros(lat.full.n, dtype=complex)
    neg[: lat.zero_index] = 1.0
    assert es.restrict(StateVector(lat.full, neg), lat).norm_squared() == 0

    amps = rng.normal(size=lat.full.n) + 1j * rng.normal(size=lat.full.n)
    psi = StateVector(lat.full, amps)
    below = math.fsum(np.abs(amps[: lat.zero_index]) ** 2)
    assert es.restrict(psi, lat).norm_squared() == pytest.approx(psi.norm_squared() - below, rel=1e-14)

    half = StateVector(lat.half, amps[: lat.half.n])
    assert np.array_equal(es.restrict(es.embed(half, lat), lat).amplitudes, half.amplitudes)


# --- restricted shift ---------------------------------------------------------


def test_restricted_shift_examples(lat):
    e0 = _basis(lat.half, 0)
    up, rep = es.restricted_shift(e0, 1, lat)
    assert np.array_equal(up.amplitudes, _basis(lat.half, 1).amplitudes)
    assert rep.defect == 0 and rep.output_norm == 1.0

    down, rep = es.restricted_shift(e0, -1, lat)
    assert down.norm_squared() == 0
    assert rep.defect == 1.0

    amps = np.zeros(lat.half.n, dtype=complex)
    amps[:2] = 0.6, 0.8
    out, rep = es.restricted_shift(StateVector(lat.half, amps), -1, lat)
    assert out.amplitudes[0] == 0.8 and np.count_nonzero(out.amplitudes) == 1
    assert rep.defect == 0.6**2
    assert rep.defect == pytest.approx(0.36, abs=1e-15)


def test_restricted_shift_top_edge_loss(lat):
    top = _basis(lat.half, lat.M)
    out, rep = es.restricted_shift(top, 1, lat)
    assert rep.edge_loss == 1.0 and rep.defect == 1.0


def test_restriction_report_fields(lat, rng):
    amps = np.zeros(lat.half.n, dtype=complex)
    amps[:200] = rng.normal(size=200)
    psi = StateVector(lat.half, amps)
    for j in (-5, 0, 5):
        _, rep = es.restricted_shift(psi, j, lat)
        assert rep.j == j
        assert rep.defect >= -1e-14
        assert rep.defect == pytest.approx(rep.input_norm**2 - rep.output_norm**2, abs=1e-12)


@settings(max_examples=80, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), j=st.integers(-40, 40), top_gap=st.integers(0, 45))
def test_dilation_and_dichotomy(seed, j, top_gap):
    lat = es.make_lattice(64, 0.5)
    r = np.random.Generator(np.random.Philox(seed))
    amps = np.zeros(lat.half.n, dtype=complex)
    k = lat.half.n - top_gap
    amps[:k] = r.normal(size=k) + 1j * r.normal(size=k)
    psi = StateVector(lat.half, amps)
    out, rep = es.restricted_shift(psi, j, lat)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", es.EdgeLossWarning)
        dilated = es.restrict(es.v_shift_full(es.embed(psi, lat), j, lat), lat)
    assert np.array_equal(dilated.amplitudes, out.amplitudes)
    if j < 0:
        assert rep.defect == math.fsum(np.abs(amps[:-j]) ** 2) * lat.delta_e
    elif j <= top_gap:
        assert rep.defect == 0 and rep.output_norm == rep.input_norm


# --- restriction generator ----------------------------------------------------


def test_restricted_generator_conjugacy():
    lat = es.make_lattice(512, 0.01)
    bundle = es.restricted_generator(lat)
    assert bundle.kind is Kind.RESTRICTION and bundle.expected_commutator_sign == -1
    assert max(bundle.conjugacy_residual(s) for s in energy_suite(lat.half)) <= 1e-6


def test_restriction_is_minus_energy_rep_operator():
    lat = es.make_lattice(64, 0.1)
    t = es.restricted_generator(lat).operator.matrix
    kg = t_kg_energy_rep(lat.half).operator.matrix
    assert np.array_equal(t, -kg)


def test_boundary_state_breaks_conjugacy():
    # a state sitting on E = 0 sees the cut; reported, not part of the contract
    lat = es.make_lattice(64, 0.1)
    bundle = es.restricted_generator(lat)
    assert bundle.conjugacy_residual(_basis(lat.half, 0)) > 1e-6


# --- transitions and classification -----------------------------------------


def test_transition_examples(lat):
    c = es.transition_amplitude(2, 3, lat)
    assert c[5] == 1.0 and np.count_nonzero(c) == 1
    assert np.count_nonzero(es.transition_amplitude(2, -5, lat)) == 0
    with pytest.raises(ShiftRangeError):
        es.transition_amplitude(lat.M, 1, lat)
    with pytest.raises(OffLatticeError):
        es.transition_amplitude(2, 0.5, lat)


def test_transition_probability_is_zero_or_one():
    lat = es.make_lattice(24, 1.0)
    for e_idx in range(lat.M + 1):
        for j in range(-lat.M, lat.M - e_idx + 1):
            total = np.sum(np.abs(es.transition_amplitude(e_idx, j, lat)) ** 2)
            assert total == (1.0 if e_idx + j >= 0 else 0.0)


def test_classification(lat):
    assert es.classify_state(0, 0, lat) is es.Physicality.PHYSICAL
    assert es.classify_state(2, -5, lat) is es.Physicality.UNPHYSICAL
    assert es.classify_state(2, -2, lat) is es.Physicality.PHYSICAL
    with pytest.raises(ShiftRangeError):
        es.classify_state(lat.M + 1, 0, lat)


# --- picture equivalence, Heisenberg and Schrodinger forms --------------------


def test_picture_equivalence(lat, rng):
    worst = 0.0
    width = lat.M - 8
    for _ in range(20):
        pair = []
        for _ in range(2):
            amps = np.zeros(lat.full.n, dtype=complex)
            amps[8 : 8 + 2 * width + 1] = rng.normal(size=2 * width + 1) + 1j * rng.normal(size=2 * width + 1)
            pair.append(StateVector(lat.full, amps).normalized())
        for j in range(-8, 9):
            lhs, rhs = es.picture_elements(pair[0], pair[1], j, lat)
            worst = max(worst, abs(lhs - rhs))
    assert worst <= 1e-12


def test_picture_elements_against_dense_matrices(rng):
    lat = es.make_lattice(16, 0.5)
    a, b = (StateVector(lat.full, np.r_[0, 0, rng.normal(size=29), 0, 0]).normalized() for _ in range(2))
    h0 = es.hamiltonian_h0(lat.full)
    for j in (-2, 0, 2):
        heis, schr = es.picture_elements(a, b, j, lat)
        h_e = es.hamiltonian_h0(lat.full, j * lat.delta_e)
        assert abs(heis - a.inner(h_e.apply(b))) <= 1e-12
        sa, sb = es.v_shift_full(a, j, lat), es.v_shift_full(b, j, lat)
        assert abs(schr - sa.inner(h0.apply(sb))) <= 1e-12


def test_heisenberg_like_equation():
    # dF(e)/de = i [F(e), S] for F = diag(E), with the e-derivative taken by central difference
    lat = es.make_lattice(300, 0.01)
    f = es.hamiltonian_h0(lat.full)
    s = es.shift_generator_full(lat).matrix
    psi = _gaussian(lat.full, 0.0, 0.4).vector
    for j in (-3, 0, 4):
        ahead = es.shifted_operator(f, j + 1, lat).matrix
        behind = es.shifted_operator(f, j - 1, lat).matrix
        lhs = (ahead - behind) / (2 * lat.delta_e) @ psi
        fe = es.shifted_operator(f, j, lat).matrix
        rhs = 1j * (fe @ (s @ psi) - s @ (fe @ psi))
        assert np.linalg.norm(lhs - rhs) / np.linalg.norm(psi) <= lat.delta_e**2


def test_schrodinger_like_equation():
    # -i d/de |t, e> = S |t, e>, with |t, e> produced by exact shifts
    for de in (0.02, 0.01):
        lat = es.make_lattice(int(round(3.0 / de)), de)
        s = es.shift_generator_full(lat).matrix
        psi = _gaussian(lat.full, 0.0, 0.4)
        for j in (-5, 0, 5):
            ahead = es.v_shift_full(psi, j + 1, lat).vector
            behind = es.v_shift_full(psi, j - 1, lat).vector
            lhs = -1j * (ahead - behind) / (2 * de)
            rhs = s @ es.v_shift_full(psi, j, lat).vector
            # central difference in e dominates: O(dE^2 / width^2)
            assert np.linalg.norm(lhs - rhs) / np.linalg.norm(rhs) <= (de / 0.4) ** 2


def test_shifted_operator_is_translation(lat):
    f = es.hamiltonian_h0(lat.full)
    fe = es.shifted_operator(f, 3, lat).matrix
    inner = slice(0, lat.full.n - 3)
    assert np.array_equal(np.diagonal(fe)[inner], lat.full.points[inner] + 3.0)
