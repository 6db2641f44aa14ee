"""Named experiments: each takes validated parameters and returns judged checks."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from chronos import energy_shift as es
from chronos.dynamics import ClassicalEnsemble, classical_arrival_oracle, expectation_series
from chronos.lattice import (
    Rep,
    SpinorState,
    StateVector,
    gaussian_state,
    make_grid,
    momentum_grid,
    momentum_to_energy,
    positive_momentum_grid,
)
from chronos.opalg import (
    coordinate_operator,
    hermiticity_defect,
    position_operator,
)
from chronos.time_construct import (
    DiracAlgebra,
    dirac_hamiltonian,
    free_hamiltonian,
    kg_hamiltonian,
    linear_potential_hamiltonian,
    proper_time,
    t1_from_dynamical,
    t2_mandelstam,
    t_dirac,
    t_free_nonrel,
    t_kg_energy_rep,
    t_kg_momentum,
    t_relativistic_general,
)
from chronos.uncertainty import average_commutator, drift, mt_time_deviation


@dataclass(frozen=True)
class Check:
    metric: str
    value: float
    tolerance: float

    @property
    def passed(self) -> bool:
        return bool(self.value <= self.tolerance)


@dataclass
class Outcome:
    checks: list[Check] = field(default_factory=list)
    info: dict[str, float] = field(default_factory=dict)

    def check(self, metric: str, value: float, tolerance: float) -> None:
        self.checks.append(Check(metric, float(value), float(tolerance)))


@dataclass(frozen=True)
class Param:
    kind: type
    default: object
    minimum: float | None = None
    help: str = ""

    def parse(self, name: str, raw):
        from chronos.errors import ConfigError

        try:
            if self.kind is int:
                value = float(raw) if isinstance(raw, str) else raw
                if float(value) != int(value):
                    raise ValueError
                value = int(value)
            else:
                value = self.kind(raw)
        except (TypeError, ValueError):
            raise ConfigError(name, f"expected {self.kind.__name__}, got {raw!r}") from None
        if isinstance(value, float) and not math.isfinite(value):
            raise ConfigError(name, "must be finite")
        if self.minimum is not None and value < self.minimum:
            raise ConfigError(name, f"must be >= {self.minimum}, got {value}")
        return value


def _grid_params(n=512, step=0.02):
    return {
        "n": Param(int, n, 2, "number of momentum grid points"),
        "step": Param(float, step, 1e-12, "momentum grid spacing"),
    }


def _packet_params(p0=2.0, sigma_p=0.05, x0=-10.0):
    return {
        "p0": Param(float, p0, None, "packet mean momentum"),
        "sigma_p": Param(float, sigma_p, 1e-12, "packet momentum spread"),
        "x0": Param(float, x0, None, "packet mean position"),
    }


# --- test-state suites -----------------------------------------------------


def momentum_suite(grid, p0=2.0, sigma_p=0.05, x0=-10.0, count=10):
    """Interior Gaussian packets spread around (p0, sigma_p, x0)."""
    return [
        gaussian_state(grid, p0 * (0.8 + 0.04 * k), sigma_p * (1 + 0.08 * k), x0 + 3.0 * k)
        for k in range(count)
    ]


def spinor_suite(grid, p0=2.0, sigma_p=0.05, x0=-10.0, count=10):
    states = momentum_suite(grid, p0, sigma_p, x0, count)
    out = []
    for k, s in enumerate(states):
        partner = states[(k + 3) % count].vector
        out.append(SpinorState(grid, s.vector, (0.3 + 0.05 * k) * np.exp(1j * k) * partner).normalized())
    return out


def energy_suite(grid, count=10, width_bins=36.0):
    """Gaussians in E centred on the grid, width ``width_bins`` bins, with varied phase slopes."""
    e = grid.points
    center = 0.5 * (grid.first + grid.last)
    out = []
    for k in range(count):
        s = width_bins * grid.step * (1 + 0.02 * k)
        e0 = center + (k - (count - 1) / 2) * 2 * grid.step
        amps = np.exp(-((e - e0) ** 2) / (2 * s**2)) * np.exp(1j * (k - 4.5) * 0.4 * e)
        out.append(StateVector(grid, amps).normalized())
    return out


def random_state(grid, rng):
    amps = rng.normal(size=grid.n) + 1j * rng.normal(size=grid.n)
    return StateVector(grid, amps).normalized()


def _rng(seed):
    return np.random.Generator(np.random.Philox(seed))


def _max_residual(bundle, states, h=None):
    return max(bundle.conjugacy_residual(s, h) for s in states)


def _entrywise(a, b):
    """max |a - b| relative to max(1, max |a|)."""
    return float(np.abs(a - b).max() / max(1.0, np.abs(a).max()))


# --- experiments -----------------------------------------------------------


def run_commutators(p) -> Outcome:
    out = Outcome()
    grid = momentum_grid(p["n"], p["step"])
    m = p["m"]
    suite = momentum_suite(grid, p["p0"], p["sigma_p"], p["x0"])
    t1 = t1_from_dynamical(position_operator(grid), free_hamiltonian(grid, m), suite)
    out.check("t1_conjugacy_residual", _max_residual(t1, suite), 1e-6)
    out.check("t_non_conjugacy_residual", _max_residual(t_free_nonrel(m, grid), suite), 1e-6)

    kg_grid = positive_momentum_grid(p["n"], p["step"] / 2)
    kg_suite = momentum_suite(kg_grid, p["p0"], p["sigma_p"], p["x0"])
    out.check("t_kg_momentum_conjugacy_residual", _max_residual(t_kg_momentum(m, kg_grid), kg_suite), 1e-6)

    e_grid = make_grid(2 * p["n"], 0.0, p["step"] / 4, Rep.ENERGY_HALF_LINE)
    out.check("t_kg_energy_conjugacy_residual", _max_residual(t_kg_energy_rep(e_grid), energy_suite(e_grid)), 1e-6)

    dirac = t_dirac(m, grid)
    out.check("t_dirac_conjugacy_residual", _max_residual(dirac, spinor_suite(grid, p["p0"], p["sigma_p"], p["x0"])), 1e-6)

    lattice = es.make_lattice(p["M"], p["delta_e"])
    restriction = es.restricted_generator(lattice)
    out.check("restriction_conjugacy_residual", _max_residual(restriction, energy_suite(lattice.half)), 1e-6)
    out.info["restriction_sign"] = restriction.expected_commutator_sign
    out.info["arrival_time_sign"] = t1.expected_commutator_sign

    xp = average_commutator(position_operator(grid), coordinate_operator(grid), suite[0])
    out.check("xp_average_commutator_error", abs(xp - 1j), 1e-8)
    return out


def run_mt_bound(p) -> Outcome:
    out = Outcome()
    grid = momentum_grid(p["n"], p["step"])
    h = free_hamiltonian(grid, p["m"])
    a = position_operator(grid)
    rng = _rng(p["seed"])
    violations = 0
    lowest = math.inf
    for _ in range(p["n_states"]):
        report = mt_time_deviation(a, h, random_state(grid, rng))
        violations += not report.satisfied
        lowest = min(lowest, report.bound_lhs)
    out.check("bound_violations", violations, 0)
    out.info["min_delta_t2_delta_h"] = lowest
    return out


def run_t2_linear_potential(p) -> Outcome:
    out = Outcome()
    grid = momentum_grid(p["n"], p["step"])
    m, g = p["m"], p["g"]
    h = linear_potential_hamiltonian(grid, m, g)
    mom = coordinate_operator(grid)
    suite = momentum_suite(grid, p["p0"], p["sigma_p"], p["x0"])
    psi = suite[0]
    t2 = t2_mandelstam(mom, h, psi)
    out.check("t2_entrywise_error", _entrywise(t2.operator.matrix, np.diag(grid.points) / (m * g)), 1e-12)
    out.check("t2_full_commutator_residual", _max_residual(t2, suite), 1e-6)
    worst_drift = max(abs(drift(mom, h, s) + m * g) for s in suite + [random_state(grid, _rng(0))])
    out.check("drift_error", worst_drift / (m * g), 1e-12)
    out.check("t2_average_commutator_error", abs(average_commutator(h, t2.operator, psi) - 1j), 1e-8)
    out.check("t2_hermiticity_defect", hermiticity_defect(t2.operator), 1e-12)
    return out


def run_kg_equivalence(p) -> Outcome:
    out = Outcome()
    grid = positive_momentum_grid(p["n"], p["step"])
    m = p["m"]
    psi = gaussian_state(grid, p["p0"], p["sigma_p"], p["x0"])
    kg = t_kg_momentum(m, grid)
    general = t_relativistic_general(kg_hamiltonian(grid, m), grid)
    diff = general.matrix @ psi.vector - kg.operator.matrix @ psi.vector
    out.check("general_vs_kg_residual", np.linalg.norm(diff) / np.linalg.norm(psi.vector), 1e-6)

    e_step = p["step"] / 2
    lhs = momentum_to_energy(kg.operator.apply(psi), m, e_step)
    phi = momentum_to_energy(psi, m, e_step)
    rhs = t_kg_energy_rep(phi.grid).operator.apply(phi)
    out.check("energy_rep_chain_residual", np.linalg.norm(lhs.vector - rhs.vector) / np.linalg.norm(phi.vector), 1e-6)
    out.check("measure_norm_error", abs(phi.norm_squared() - psi.norm_squared()), 1e-6)
    out.check("kg_conjugacy_residual", kg.conjugacy_residual(psi), 1e-6)
    return out


def run_dirac_reduction(p) -> Outcome:
    out = Outcome()
    grid = momentum_grid(p["n"], p["step"])
    m = p["m"]
    algebra = DiracAlgebra.standard()
    suite = spinor_suite(grid, p["p0"], p["sigma_p"], p["x0"])
    dirac = t_dirac(m, grid, algebra)
    general = t_relativistic_general(dirac_hamiltonian(m, grid, algebra), grid)
    worst = max(
        np.linalg.norm(general.matrix @ s.vector - dirac.operator.matrix @ s.vector) / np.linalg.norm(s.vector)
        for s in suite
    )
    out.check("closed_form_residual", worst, 1e-6)
    h = dirac.hamiltonian.matrix
    target = np.kron(np.eye(2), np.diag(grid.points**2 + m**2))
    out.check("hamiltonian_square_error", np.abs(h @ h - target).max(), 0.0)
    out.check("dirac_conjugacy_residual", _max_residual(dirac, suite), 1e-6)
    a, b = algebra.alpha1, algebra.beta
    algebra_err = max(
        np.abs(a @ a - np.eye(2)).max(), np.abs(b @ b - np.eye(2)).max(), np.abs(a @ b + b @ a).max()
    )
    out.check("algebra_error", algebra_err, 1e-15)
    return out


def run_drift_law(p) -> Outcome:
    out = Outcome()
    grid = momentum_grid(p["n"], p["step"])
    psi = gaussian_state(grid, p["p0"], p["sigma_p"], p["x0"])
    times = np.linspace(0.0, p["t_max"], p["n_times"])
    t1 = t1_from_dynamical(position_operator(grid), free_hamiltonian(grid, p["m"]), [psi])
    series = expectation_series(t1.operator, psi, t1.hamiltonian, times)
    out.info["t1_fitted_slope"] = series.fitted_slope
    out.check("t1_slope_error", abs(series.fitted_slope - (-1.0)), 1e-3)

    lattice = es.make_lattice(p["M"], p["delta_e"])
    restriction = es.restricted_generator(lattice)
    state = energy_suite(lattice.half)[0]
    series5 = expectation_series(restriction.operator, state, restriction.hamiltonian, times)
    out.info["restriction_fitted_slope"] = series5.fitted_slope
    out.check("restriction_slope_error", abs(series5.fitted_slope - 1.0), 1e-3)
    return out


def _interior_half_state(lattice, rng, top_gap):
    amps = np.zeros(lattice.half.n, dtype=complex)
    k = lattice.half.n - top_gap
    amps[:k] = rng.normal(size=k) + 1j * rng.normal(size=k)
    return StateVector(lattice.half, amps).normalized()


def run_shift_dichotomy(p) -> Outcome:
    out = Outcome()
    lattice = es.make_lattice(p["M"], p["delta_e"])
    rng = _rng(p["seed"])
    span = min(40, lattice.M)
    iso_fail = defect_fail = dilation_fail = 0
    for _ in range(p["n_states"]):
        psi = _interior_half_state(lattice, rng, span)
        for j in range(-span, span + 1):
            shifted, report = es.restricted_shift(psi, j, lattice)
            dilated = es.restrict(es.v_shift_full(es.embed(psi, lattice), j, lattice), lattice)
            dilation_fail += not np.array_equal(dilated.amplitudes, shifted.amplitudes)
            if j >= 0:
                iso_fail += report.output_norm != report.input_norm or report.defect != 0.0
            else:
                lowest = math.fsum(np.abs(psi.amplitudes[:-j]) ** 2) * lattice.delta_e
                defect_fail += report.defect != lowest
    out.check("isometry_failures", iso_fail, 0)
    out.check("defect_mismatches", defect_fail, 0)
    out.check("dilation_mismatches", dilation_fail, 0)

    worst = 0.0
    width = lattice.M - 8
    for _ in range(p["n_pairs"]):
        pair = []
        for _ in range(2):
            amps = np.zeros(lattice.full.n, dtype=complex)
            amps[8 : 8 + 2 * width + 1] = rng.normal(size=2 * width + 1) + 1j * rng.normal(size=2 * width + 1)
            pair.append(StateVector(lattice.full, amps).normalized())
        for j in range(-8, 9):
            lhs, rhs = es.picture_elements(pair[0], pair[1], j, lattice)
            worst = max(worst, abs(lhs - rhs))
    out.check("picture_equivalence_error", worst, 1e-12)
    return out


def run_transition_matrix(p) -> Outcome:
    out = Outcome()
    lattice = es.make_lattice(p["M"], p["delta_e"])
    row = es.transition_amplitude(p["E_idx"], p["j"], lattice)
    physical = es.classify_state(p["E_idx"], p["j"], lattice) is es.Physicality.PHYSICAL
    expected = np.zeros(lattice.half.n, dtype=complex)
    if physical:
        expected[p["E_idx"] + p["j"]] = 1.0
    out.info["physical"] = float(physical)
    out.info["row_probability"] = float(np.sum(np.abs(row) ** 2))
    out.check("row_mismatch", float(np.abs(row - expected).max()), 0.0)

    bad = 0
    for e_idx in range(0, min(32, lattice.M) + 1):
        for j in range(-min(40, lattice.M), min(40, lattice.M - e_idx) + 1):
            c = es.transition_amplitude(e_idx, j, lattice)
            if e_idx + j >= 0:
                ok = c[e_idx + j] == 1.0 and np.count_nonzero(c) == 1
            else:
                ok = np.count_nonzero(c) == 0
            ok = ok and (es.classify_state(e_idx, j, lattice) is es.Physicality.PHYSICAL) == (e_idx + j >= 0)
            bad += not ok
    out.check("sweep_failures", bad, 0)
    return out


def run_classical_compare(p) -> Outcome:
    out = Outcome()
    grid = momentum_grid(p["n"], p["step"])
    m = p["m"]
    psi = gaussian_state(grid, p["p0"], p["sigma_p"], p["x0"])
    quantum = t_free_nonrel(m, grid).operator.expectation(psi).real
    tau = proper_time(m, grid).operator.expectation(psi).real
    ensemble = ClassicalEnsemble.from_gaussian_packet(m, p["p0"], p["sigma_p"], p["x0"], p["n_samples"], p["seed"])
    mean, stderr = classical_arrival_oracle(ensemble)
    out.info["quantum_mean"] = quantum
    out.info["classical_mean"] = mean
    out.info["classical_stderr"] = stderr
    out.check("quantum_classical_gap", abs(quantum - mean), 0.05)
    out.check("proper_time_gap", abs(tau + mean), 0.05)
    return out


EXPERIMENTS = {
    "commutators": (
        run_commutators,
        {**_grid_params(), **_packet_params(), "m": Param(float, 1.0, 1e-12, "particle mass"),
         "M": Param(int, 512, 8, "energy lattice half-size"), "delta_e": Param(float, 0.01, 1e-12, "energy lattice spacing")},
    ),
    "mt-bound": (
        run_mt_bound,
        {**_grid_params(), "m": Param(float, 1.0, 1e-12, "particle mass"),
         "seed": Param(int, 0, 0, "random seed"), "n_states": Param(int, 1000, 1, "random states to test")},
    ),
    "t2-linear-potential": (
        run_t2_linear_potential,
        {**_grid_params(), **_packet_params(), "m": Param(float, 1.0, 1e-12, "particle mass"),
         "g": Param(float, 1.0, 1e-12, "field strength")},
    ),
    "kg-equivalence": (
        run_kg_equivalence,
        {**_grid_params(512, 0.01), **_packet_params(2.5, 0.2, -1.0), "m": Param(float, 1.0, 0.0, "particle mass")},
    ),
    "dirac-reduction": (
        run_dirac_reduction,
        {**_grid_params(), **_packet_params(), "m": Param(float, 1.0, 1e-12, "particle mass")},
    ),
    "drift-law": (
        run_drift_law,
        {**_grid_params(), **_packet_params(), "m": Param(float, 1.0, 1e-12, "particle mass"),
         "t_max": Param(float, 2.0, 0.0, "final time"), "n_times": Param(int, 21, 2, "number of time samples"),
         "M": Param(int, 512, 8, "energy lattice half-size"), "delta_e": Param(float, 0.01, 1e-12, "energy lattice spacing")},
    ),
    "shift-dichotomy": (
        run_shift_dichotomy,
        {"M": Param(int, 256, 9, "energy lattice half-size"), "delta_e": Param(float, 1.0, 1e-12, "energy lattice spacing"),
         "seed": Param(int, 0, 0, "random seed"), "n_states": Param(int, 20, 1, "random half-line states"),
         "n_pairs": Param(int, 100, 1, "random full-line state pairs")},
    ),
    "transition-matrix": (
        run_transition_matrix,
        {"M": Param(int, 256, 1, "energy lattice half-size"), "delta_e": Param(float, 1.0, 1e-12, "energy lattice spacing"),
         "E_idx": Param(int, 2, 0, "initial energy index"), "j": Param(int, -5, None, "shift in lattice units")},
    ),
    "classical-compare": (
        run_classical_compare,
        {**_grid_params(), **_packet_params(), "m": Param(float, 1.0, 1e-12, "particle mass"),
         "seed": Param(int, 0, 0, "random seed"), "n_samples": Param(int, 1_000_000, 1, "classical samples")},
    ),
}
