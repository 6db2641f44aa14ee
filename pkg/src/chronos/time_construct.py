"""Constructors for time operators and the Hamiltonians they are conjugate to.

Position acts in momentum space as ``x = i d/dp``. Each constructor returns a
:class:`TimeOperatorBundle` recording which sign ``s`` of ``[H, T] = s i`` the
operator is expected to satisfy.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from chronos.errors import GridError, PreconditionError, ShapeError, SingularCommutatorError, ZeroDriftError
from chronos.lattice import Grid, Rep
from chronos.opalg import (
    LinearOperator,
    Scheme,
    canonical_commutator,
    commutator,
    coordinate_operator,
    derivative_operator,
    identity,
    inverse_momentum,
    multiplication_operator,
    position_operator,
    symmetrize,
)
from chronos.uncertainty import DRIFT_THRESHOLD, drift

SINGULAR_RATIO = 1e-10
PRECONDITION_TOL = 1e-8


class Kind(enum.Enum):
    T1 = "T1"
    T2 = "T2"
    NON_REL = "NonRel"
    KLEIN_GORDON = "KleinGordon"
    KLEIN_GORDON_ENERGY = "KleinGordonEnergyRep"
    DIRAC = "Dirac"
    PROPER_TIME = "ProperTime"
    RESTRICTION = "RestrictionT"


# [H, T] = sign * i. The energy-shift restriction uses the opposite convention
# to the arrival-time operators; both are kept as stated, not harmonized.
COMMUTATOR_SIGN = {
    Kind.T1: 1,
    Kind.T2: 1,
    Kind.NON_REL: 1,
    Kind.KLEIN_GORDON: 1,
    Kind.KLEIN_GORDON_ENERGY: 1,
    Kind.DIRAC: 1,
    Kind.PROPER_TIME: -1,
    Kind.RESTRICTION: -1,
}


@dataclass(frozen=True, eq=False)
class TimeOperatorBundle:
    operator: LinearOperator
    kind: Kind
    hamiltonian: LinearOperator | None = None
    state: object | None = None  # defining state, for the state-dependent T2

    @property
    def expected_commutator_sign(self) -> int:
        return COMMUTATOR_SIGN[self.kind]

    def conjugacy_residual(self, state, hamiltonian: LinearOperator | None = None) -> float:
        """||([H, T] - s i) psi|| / ||psi||, evaluated with matrix products."""
        h = hamiltonian if hamiltonian is not None else self.hamiltonian
        if h is None:
            raise ShapeError("no Hamiltonian attached to this bundle")
        psi = state.vector
        t, hm = self.operator.matrix, h.matrix
        r = hm @ (t @ psi) - t @ (hm @ psi) - self.expected_commutator_sign * 1j * psi
        return float(np.linalg.norm(r) / np.linalg.norm(psi))


@dataclass(frozen=True, eq=False)
class DiracAlgebra:
    alpha1: np.ndarray
    beta: np.ndarray

    def __post_init__(self):
        a = np.array(self.alpha1, dtype=complex)
        b = np.array(self.beta, dtype=complex)
        if a.shape != (2, 2) or b.shape != (2, 2):
            raise ShapeError("Dirac matrices must be 2x2")
        a.setflags(write=False)
        b.setflags(write=False)
        object.__setattr__(self, "alpha1", a)
        object.__setattr__(self, "beta", b)
        self.validate()

    def validate(self, tol: float = 1e-15) -> None:
        eye = np.eye(2)
        defects = {
            "alpha1^2 = 1": np.abs(self.alpha1 @ self.alpha1 - eye).max(),
            "beta^2 = 1": np.abs(self.beta @ self.beta - eye).max(),
            "{alpha1, beta} = 0": np.abs(self.alpha1 @ self.beta + self.beta @ self.alpha1).max(),
        }
        for relation, value in defects.items():
            if value > tol:
                raise PreconditionError(f"Dirac algebra violates {relation} by {value:.3e}", residual=value)

    @classmethod
    def standard(cls) -> DiracAlgebra:
        """alpha1 = sigma_x, beta = sigma_z."""
        return cls(np.array([[0, 1], [1, 0]]), np.array([[1, 0], [0, -1]]))


def _require_momentum(grid: Grid) -> None:
    if grid.rep is not Rep.MOMENTUM:
        raise GridError("expected a momentum grid")


def _require_right_movers(grid: Grid) -> None:
    _require_momentum(grid)
    if grid.first <= 0:
        raise GridError("Klein-Gordon momentum form needs a grid of strictly positive momenta")


def free_hamiltonian(grid: Grid, m: float) -> LinearOperator:
    """p^2 / 2m."""
    _require_momentum(grid)
    return multiplication_operator(grid, lambda p: p**2 / (2 * m), lambda p: p / m)


def linear_potential_hamiltonian(grid: Grid, m: float, g: float) -> LinearOperator:
    """p^2 / 2m + m g q with q = i d/dp."""
    return free_hamiltonian(grid, m) + (m * g) * position_operator(grid)


def kg_hamiltonian(grid: Grid, m: float) -> LinearOperator:
    """E(p) = sqrt(p^2 + m^2)."""
    _require_momentum(grid)
    return multiplication_operator(grid, lambda p: np.sqrt(p**2 + m**2), lambda p: p / np.sqrt(p**2 + m**2))


def energy_hamiltonian(grid: Grid) -> LinearOperator:
    """Multiplication by E on an energy grid."""
    return coordinate_operator(grid)


def dirac_hamiltonian(m: float, grid: Grid, algebra: DiracAlgebra | None = None) -> LinearOperator:
    """alpha1 p + beta m on two-component momentum states."""
    algebra = algebra or DiracAlgebra.standard()
    _require_momentum(grid)
    p = coordinate_operator(grid)
    return p.tensor_spin(algebra.alpha1) + (m * identity(grid)).tensor_spin(algebra.beta)


def _inverse(c: LinearOperator) -> LinearOperator:
    mat = c.matrix
    diag = np.diagonal(mat)
    if np.count_nonzero(mat - np.diag(diag)) == 0:
        return LinearOperator(c.grid, np.diag(1 / diag), c.spin_dim)
    return LinearOperator(c.grid, np.linalg.inv(mat), c.spin_dim)


def t1_from_dynamical(
    f: LinearOperator,
    h: LinearOperator,
    probe_states=(),
    tol: float = PRECONDITION_TOL,
) -> TimeOperatorBundle:
    """T1 = -i [F C^-1 + C^-1 F] / 2 with C = [F, H].

    ``probe_states`` are interior states on which [C^-1, H] = 0 is checked;
    without them the check uses the full matrix.
    """
    c = canonical_commutator(f, h)
    sv = np.linalg.svd(c.matrix, compute_uv=False)
    if sv[0] == 0 or sv[-1] <= SINGULAR_RATIO * sv[0]:
        raise SingularCommutatorError(
            f"[F, H] is singular (smallest/largest singular value {sv[-1] / sv[0] if sv[0] else 0:.3e})"
        )
    c_inv = _inverse(c)
    cm = commutator(c_inv, h).matrix
    if probe_states:
        residual = max(
            np.linalg.norm(cm @ s.vector) / np.linalg.norm(s.vector) for s in probe_states
        )
    else:
        residual = np.linalg.norm(cm) / max(1.0, np.linalg.norm(c_inv.matrix) * np.linalg.norm(h.matrix))
    if residual > tol:
        raise PreconditionError(f"[[F, H]^-1, H] != 0 (residual {residual:.3e})", residual=float(residual))
    return TimeOperatorBundle(-1j * symmetrize(f, c_inv), Kind.T1, h)


def _sym_inverse_momentum_position(grid: Grid) -> LinearOperator:
    """(p^-1 x + x p^-1) / 2."""
    return symmetrize(inverse_momentum(grid), position_operator(grid))


def t_free_nonrel(m: float, grid: Grid) -> TimeOperatorBundle:
    """-m (p^-1 x + x p^-1) / 2 = -(i m / 2)(p^-1 d/dp + d/dp p^-1)."""
    _require_momentum(grid)
    return TimeOperatorBundle(-m * _sym_inverse_momentum_position(grid), Kind.NON_REL, free_hamiltonian(grid, m))


def proper_time(m: float, grid: Grid) -> TimeOperatorBundle:
    """tau = m (p^-1 x + x p^-1) / 2, the negative of the nonrelativistic arrival time."""
    _require_momentum(grid)
    return TimeOperatorBundle(m * _sym_inverse_momentum_position(grid), Kind.PROPER_TIME, free_hamiltonian(grid, m))


def t2_mandelstam(a: LinearOperator, h: LinearOperator, state) -> TimeOperatorBundle:
    """T2 = -A / <dA/dt>, with the drift evaluated in ``state``."""
    d = drift(a, h, state)
    if abs(d) <= DRIFT_THRESHOLD:
        raise ZeroDriftError(f"|<dA/dt>| = {abs(d):.3e} is below {DRIFT_THRESHOLD:.0e}")
    if abs(d.imag) > DRIFT_THRESHOLD * max(1.0, abs(d)):
        raise PreconditionError("drift is not real", residual=abs(d.imag))
    return TimeOperatorBundle(a * (-1 / d.real), Kind.T2, h, state)


def t_relativistic_general(h: LinearOperator, grid: Grid) -> LinearOperator:
    """-(1/6)[H S + S H + p^-1 H x + x H p^-1] with S = p^-1 x + x p^-1."""
    _require_momentum(grid)
    if h.grid != grid:
        raise ShapeError("Hamiltonian is not bound to this grid")
    pinv = inverse_momentum(grid).matrix
    x = position_operator(grid).matrix
    if h.spin_dim == 2:
        pinv, x = np.kron(np.eye(2), pinv), np.kron(np.eye(2), x)
    hm = h.matrix
    s = pinv @ x + x @ pinv
    total = hm @ s + s @ hm + pinv @ hm @ x + x @ hm @ pinv
    return LinearOperator(grid, -total / 6, h.spin_dim)


def t_kg_momentum(m: float, grid: Grid) -> TimeOperatorBundle:
    """-i[d/dE - m^2 / (2E(E^2 - m^2))] in momentum variables.

    With g = dp/dE = E/p this equals the symmetric form -(i/2)(g d/dp + d/dp g).
    """
    if m < 0:
        raise GridError(f"mass must be nonnegative, got {m}")
    _require_right_movers(grid)
    p = grid.points
    g = np.sqrt(p**2 + m**2) / p
    d = derivative_operator(grid).matrix
    mat = -0.5j * (g[:, None] * d + d * g[None, :])
    return TimeOperatorBundle(LinearOperator(grid, mat), Kind.KLEIN_GORDON, kg_hamiltonian(grid, m))


def kg_correction(m: float, p) -> np.ndarray:
    """Diagonal term -m^2 / (2E(E^2 - m^2)) of the Klein-Gordon operator."""
    p = np.asarray(p, dtype=float)
    e = np.sqrt(p**2 + m**2)
    return -(m**2) / (2 * e * (e**2 - m**2))


def t_kg_energy_rep(grid: Grid, scheme: Scheme | str = Scheme.CD4) -> TimeOperatorBundle:
    """-i d/dE on a uniform energy grid."""
    if grid.rep not in (Rep.ENERGY_HALF_LINE, Rep.ENERGY_FULL_LINE):
        raise GridError("expected an energy grid")
    op = -1j * derivative_operator(grid, scheme)
    return TimeOperatorBundle(op, Kind.KLEIN_GORDON_ENERGY, energy_hamiltonian(grid))


def t_dirac(m: float, grid: Grid, algebra: DiracAlgebra | None = None) -> TimeOperatorBundle:
    """-alpha1 x - beta tau."""
    algebra = algebra or DiracAlgebra.standard()
    algebra.validate()
    _require_momentum(grid)
    x = position_operator(grid).tensor_spin(algebra.alpha1)
    tau = proper_time(m, grid).operator.tensor_spin(algebra.beta)
    return TimeOperatorBundle(-x - tau, Kind.DIRAC, dirac_hamiltonian(m, grid, algebra))
