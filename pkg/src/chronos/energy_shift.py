"""Energy-shift operator, its generator, and the half-line restriction.

Shifts by e = j * dE are exact index translations on the full lattice
{k dE : -M <= k <= M}. Restricting them to the half lattice {k dE : 0 <= k <= M}
gives a unilateral shift: isometric upward, losing the lowest bins downward.
"""

from __future__ import annotations

import enum
import math
import warnings
from dataclasses import dataclass

import numpy as np

from chronos.errors import GridError, OffLatticeError, ShiftRangeError
from chronos.lattice import Grid, Rep, StateVector, make_grid
from chronos.opalg import LinearOperator, Scheme, coordinate_operator, derivative_operator
from chronos.time_construct import Kind, TimeOperatorBundle

EDGE_MASS = 1e-12


class EdgeLossWarning(UserWarning):
    """A full-line shift pushed probability mass off the finite lattice."""


class Physicality(enum.Enum):
    PHYSICAL = "Physical"
    UNPHYSICAL = "Unphysical"


@dataclass(frozen=True)
class EnergyLatticePair:
    full: Grid
    half: Grid
    delta_e: float

    def __post_init__(self):
        if self.full.rep is not Rep.ENERGY_FULL_LINE or self.half.rep is not Rep.ENERGY_HALF_LINE:
            raise GridError("lattice pair needs a full-line and a half-line energy grid")
        if self.full.step != self.delta_e or self.half.step != self.delta_e:
            raise GridError("both lattices must share the spacing delta_e")
        if self.full.n != 2 * self.half.n - 1:
            raise GridError("half lattice must be the nonnegative block of the full lattice")

    @property
    def M(self) -> int:
        return self.half.n - 1

    @property
    def zero_index(self) -> int:
        """Index of E = 0 on the full lattice."""
        return self.M


def make_lattice(M: int, delta_e: float = 1.0) -> EnergyLatticePair:
    if int(M) != M or M < 1:
        raise GridError(f"M must be a positive integer, got {M}")
    M = int(M)
    full = make_grid(2 * M + 1, -M * delta_e, delta_e, Rep.ENERGY_FULL_LINE)
    half = make_grid(M + 1, 0.0, delta_e, Rep.ENERGY_HALF_LINE)
    return EnergyLatticePair(full, half, float(delta_e))


def _lattice_for(state: StateVector, lattice: EnergyLatticePair | None) -> EnergyLatticePair:
    if lattice is not None:
        return lattice
    grid = state.grid
    if grid.rep is Rep.ENERGY_HALF_LINE:
        return make_lattice(grid.n - 1, grid.step)
    if grid.rep is Rep.ENERGY_FULL_LINE and grid.n % 2 == 1:
        return make_lattice(grid.n // 2, grid.step)
    raise GridError("cannot infer an energy lattice from this state")


def hamiltonian_h0(grid: Grid, e: float = 0.0) -> LinearOperator:
    """H(e) = diag(E) + e."""
    if grid.rep not in (Rep.ENERGY_HALF_LINE, Rep.ENERGY_FULL_LINE):
        raise GridError("expected an energy grid")
    h0 = coordinate_operator(grid)
    return h0 + e if e else h0


def shift_generator_full(lattice: EnergyLatticePair) -> LinearOperator:
    """S = +i d/dE on the full lattice, so that [H(0), S] = -i."""
    return 1j * derivative_operator(lattice.full, Scheme.CD4)


def shift_index(e: float, lattice: EnergyLatticePair) -> int:
    """Lattice index j with e = j * dE; off-lattice shifts are rejected."""
    j = e / lattice.delta_e
    if not math.isclose(j, round(j), abs_tol=1e-9):
        raise OffLatticeError(f"shift e={e} is not a multiple of dE={lattice.delta_e}")
    return int(round(j))


def _check_j(j, lattice: EnergyLatticePair) -> int:
    if isinstance(j, (float, np.floating)):
        if not float(j).is_integer():
            raise OffLatticeError(f"shift index {j} is not an integer")
        j = int(j)
    if abs(j) > lattice.M:
        raise ShiftRangeError(f"|j| = {abs(j)} exceeds M = {lattice.M}")
    return int(j)


def _translate(vec: np.ndarray, j: int) -> np.ndarray:
    """out[k] = vec[k - j], zero-filled."""
    n = len(vec)
    out = np.zeros(n, dtype=complex)
    if j >= 0:
        out[j:] = vec[: n - j]
    else:
        out[: n + j] = vec[-j:]
    return out


def _lost_indices(n: int, j: int) -> slice:
    return slice(n - j, n) if j >= 0 else slice(0, -j)


def v_shift_full(state: StateVector, j: int, lattice: EnergyLatticePair | None = None) -> StateVector:
    """Apply V(e, 0) = exp(i e S), e = j dE, as the exact translation E -> E + e."""
    lattice = _lattice_for(state, lattice)
    if state.grid != lattice.full:
        raise GridError("v_shift_full expects a state on the full lattice")
    j = _check_j(j, lattice)
    lost = math.fsum(np.abs(state.amplitudes[_lost_indices(state.grid.n, j)]) ** 2) * state.grid.step
    if lost > EDGE_MASS:
        warnings.warn(f"shift by j={j} drops mass {lost:.3e} off the lattice edge", EdgeLossWarning, stacklevel=2)
    return StateVector(state.grid, _translate(state.amplitudes, j))


def embed(state: StateVector, lattice: EnergyLatticePair | None = None) -> StateVector:
    """Half-line state -> full-line state, zero on E < 0."""
    lattice = _lattice_for(state, lattice)
    if state.grid != lattice.half:
        raise GridError("embed expects a state on the half lattice")
    amps = np.zeros(lattice.full.n, dtype=complex)
    amps[lattice.zero_index :] = state.amplitudes
    return StateVector(lattice.full, amps)


def restrict(state: StateVector, lattice: EnergyLatticePair | None = None) -> StateVector:
    """Full-line state -> half-line state, discarding E < 0."""
    lattice = _lattice_for(state, lattice)
    if state.grid != lattice.full:
        raise GridError("restrict expects a state on the full lattice")
    return StateVector(lattice.half, state.amplitudes[lattice.zero_index :])


@dataclass(frozen=True)
class ShiftReport:
    j: int
    input_norm: float
    output_norm: float
    defect: float  # probability lost, input_norm**2 - output_norm**2
    edge_loss: float = 0.0  # part of the defect lost off the top of the finite lattice


def restricted_shift(
    state: StateVector, j: int, lattice: EnergyLatticePair | None = None
) -> tuple[StateVector, ShiftReport]:
    """exp(i e T) on the half line: restrict(v_shift_full(embed(psi), j))."""
    lattice = _lattice_for(state, lattice)
    if state.grid != lattice.half:
        raise GridError("restricted_shift expects a state on the half lattice")
    j = _check_j(j, lattice)
    n = state.grid.n
    out = StateVector(lattice.half, _translate(state.amplitudes, j))
    lost = math.fsum(np.abs(state.amplitudes[_lost_indices(n, j)]) ** 2) * state.grid.step
    report = ShiftReport(
        j=j,
        input_norm=state.norm(),
        output_norm=out.norm(),
        defect=lost,
        edge_loss=lost if j > 0 else 0.0,
    )
    return out, report


def restricted_generator(lattice: EnergyLatticePair) -> TimeOperatorBundle:
    """T = P S P: the shift generator compressed to the half lattice."""
    s = shift_generator_full(lattice).matrix
    k = lattice.zero_index
    t = LinearOperator(lattice.half, s[k:, k:])
    return TimeOperatorBundle(t, Kind.RESTRICTION, hamiltonian_h0(lattice.half))


def classify_state(e_idx: int, j: int, lattice: EnergyLatticePair) -> Physicality:
    """Physical iff E + e >= 0 (the ground E + e = 0 counts as physical)."""
    _check_index(e_idx, lattice)
    j = _check_j(j, lattice)
    return Physicality.PHYSICAL if e_idx + j >= 0 else Physicality.UNPHYSICAL


def _check_index(e_idx: int, lattice: EnergyLatticePair) -> None:
    if int(e_idx) != e_idx or not 0 <= e_idx <= lattice.M:
        raise ShiftRangeError(f"energy index {e_idx} is not on the half lattice [0, {lattice.M}]")


def transition_amplitude(e_idx: int, j: int, lattice: EnergyLatticePair) -> np.ndarray:
    """C(E', E, e) = <E', 0 | exp(i e T) | E, 0> for all E' on the half lattice.

    Basis vectors are Kronecker deltas, so the result is a delta at E' = E + e
    or, when E + e < 0, identically zero.
    """
    _check_index(e_idx, lattice)
    j = _check_j(j, lattice)
    if e_idx + j > lattice.M:
        raise ShiftRangeError(f"E + e lands at index {e_idx + j}, above the lattice top {lattice.M}")
    basis = np.zeros(lattice.half.n, dtype=complex)
    basis[int(e_idx)] = 1.0
    return _translate(basis, j)


def shift_matrix(n: int, j: int) -> np.ndarray:
    """Matrix of the zero-filled translation out[k] = in[k - j]."""
    return np.eye(n, k=-j)


def shifted_operator(f: LinearOperator, j: int, lattice: EnergyLatticePair) -> LinearOperator:
    """F(e) = V^dagger(e, 0) F(0) V(e, 0) on the full lattice."""
    j = _check_j(j, lattice)
    v = shift_matrix(lattice.full.n, j)
    return LinearOperator(lattice.full, v.T @ f.matrix @ v)


def picture_elements(
    psi1: StateVector, psi2: StateVector, j: int, lattice: EnergyLatticePair
) -> tuple[complex, complex]:
    """Both sides of <t1,0|H(e)|t2,0> = <t1,e|H(0)|t2,e> for full-line states."""
    e = j * lattice.delta_e
    energies = lattice.full.points
    heisenberg = psi1.inner(psi2.with_vector((energies + e) * psi2.amplitudes))
    s1 = v_shift_full(psi1, j, lattice)
    s2 = v_shift_full(psi2, j, lattice)
    schrodinger = s1.inner(s2.with_vector(energies * s2.amplitudes))
    return heisenberg, schrodinger
