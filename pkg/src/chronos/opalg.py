"""Dense operator algebra on grids.

Every operator is a dense complex matrix acting on sample vectors. Operators
built from multiplication and differentiation also carry a *symbol*: a sum of
terms ``c * f(q)`` and ``c * d/dq``. The symbol lets
:func:`canonical_commutator` apply the Leibniz rule ``[d/dq, f] = f'`` instead
of forming ``AB - BA`` from truncated matrices, whose trace is always zero and
therefore can never equal a nonzero multiple of the identity.
"""

from __future__ import annotations

import enum
from collections.abc import Callable
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from chronos.errors import GridError, NonHermitianError, ShapeError
from chronos.lattice import Grid, Rep, SpinorState, StateVector

_COMPLEX_STEP = 1e-30


class Scheme(enum.Enum):
    SPECTRAL = "spectral"
    CD4 = "cd4"


@dataclass(frozen=True, eq=False)
class Term:
    """One term of an operator symbol: ``coeff * func(q)``, or ``coeff * d/dq`` when func is None."""

    coeff: complex
    func: Callable | None = None
    dfunc: Callable | None = None

    @property
    def is_derivative(self) -> bool:
        return self.func is None


@dataclass(frozen=True, eq=False)
class LinearOperator:
    grid: Grid
    matrix: np.ndarray
    spin_dim: int = 1
    symbol: tuple[Term, ...] | None = None

    def __post_init__(self):
        mat = np.array(self.matrix, dtype=complex)
        side = self.grid.n * self.spin_dim
        if self.spin_dim not in (1, 2):
            raise ShapeError(f"spin_dim must be 1 or 2, got {self.spin_dim}")
        if mat.shape != (side, side):
            raise ShapeError(f"matrix shape {mat.shape} does not match grid side {side}")
        mat.setflags(write=False)
        object.__setattr__(self, "matrix", mat)
        if self.spin_dim != 1:
            object.__setattr__(self, "symbol", None)

    @property
    def rep(self) -> Rep:
        return self.grid.rep

    @cached_property
    def hermiticity_defect(self) -> float:
        mat = self.matrix
        return float(np.linalg.norm(mat - mat.conj().T) / max(1.0, np.linalg.norm(mat)))

    @property
    def side(self) -> int:
        return self.matrix.shape[0]

    def _check(self, other: LinearOperator) -> None:
        if not isinstance(other, LinearOperator):
            raise ShapeError(f"expected a LinearOperator, got {type(other).__name__}")
        if other.grid != self.grid or other.spin_dim != self.spin_dim:
            raise ShapeError("operators live on different grids or spin spaces")

    def _new(self, matrix, symbol=None) -> LinearOperator:
        return LinearOperator(self.grid, matrix, self.spin_dim, symbol)

    def __add__(self, other):
        if np.isscalar(other):
            return self + other * identity(self.grid, self.spin_dim)
        self._check(other)
        symbol = None
        if self.symbol is not None and other.symbol is not None:
            symbol = self.symbol + other.symbol
        return self._new(self.matrix + other.matrix, symbol)

    __radd__ = __add__

    def __neg__(self):
        return -1 * self

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, scalar):
        if not np.isscalar(scalar):
            return NotImplemented
        symbol = None
        if self.symbol is not None:
            symbol = tuple(Term(scalar * t.coeff, t.func, t.dfunc) for t in self.symbol)
        return self._new(scalar * self.matrix, symbol)

    __rmul__ = __mul__

    def __truediv__(self, scalar):
        return self * (1 / scalar)

    def __matmul__(self, other):
        if isinstance(other, (StateVector, SpinorState)):
            return self.apply(other)
        if isinstance(other, np.ndarray):
            return self.matrix @ other
        self._check(other)
        return self._new(self.matrix @ other.matrix, _product_symbol(self.symbol, other.symbol))

    def apply(self, state):
        if state.grid != self.grid or state.spin_dim != self.spin_dim:
            raise ShapeError("state does not live on this operator's grid")
        return state.with_vector(self.matrix @ state.vector)

    def adjoint(self) -> LinearOperator:
        return self._new(self.matrix.conj().T)

    def expectation(self, state) -> complex:
        """<state|A|state> with the grid measure."""
        return state.inner(self.apply(state))

    def interior_block(self, margin: int) -> np.ndarray:
        """Matrix with ``margin`` rows/columns stripped from each edge of every spin block."""
        n = self.grid.n
        keep = np.concatenate([s * n + np.arange(margin, n - margin) for s in range(self.spin_dim)])
        return self.matrix[np.ix_(keep, keep)]

    def tensor_spin(self, spin_matrix) -> LinearOperator:
        """Kronecker product ``spin_matrix (x) self`` on a two-component space."""
        if self.spin_dim != 1:
            raise ShapeError("operator already carries a spin index")
        spin_matrix = np.asarray(spin_matrix, dtype=complex)
        return LinearOperator(self.grid, np.kron(spin_matrix, self.matrix), 2)


def _product_symbol(a, b):
    if a is None or b is None or len(a) != 1 or len(b) != 1:
        return None
    s, t = a[0], b[0]
    if s.is_derivative or t.is_derivative:
        return None
    f, g, df, dg = s.func, t.func, s.dfunc, t.dfunc
    return (Term(s.coeff * t.coeff, lambda q: f(q) * g(q), lambda q: df(q) * g(q) + f(q) * dg(q)),)


def numeric_derivative(f: Callable) -> Callable:
    """Derivative of an analytic function, by complex step when f is real on the reals."""

    def df(q):
        q = np.asarray(q, dtype=float)
        base = np.asarray(f(q))
        if not np.iscomplexobj(base) or np.all(base.imag == 0):
            try:
                stepped = np.asarray(f(q + 1j * _COMPLEX_STEP))
            except (TypeError, ValueError):
                stepped = None
            if stepped is not None and np.iscomplexobj(stepped) and np.all(np.isfinite(stepped)):
                return stepped.imag / _COMPLEX_STEP
        # Complex-valued or non-analytic: fourth-order central difference.
        h = 1e-3 * np.maximum(1.0, np.abs(q))
        return (f(q - 2 * h) - 8 * f(q - h) + 8 * f(q + h) - f(q + 2 * h)) / (12 * h)

    return df


def identity(grid: Grid, spin_dim: int = 1) -> LinearOperator:
    symbol = (Term(1.0, lambda q: np.ones_like(q, dtype=float), lambda q: np.zeros_like(q, dtype=float)),)
    return LinearOperator(grid, np.eye(grid.n * spin_dim), spin_dim, symbol if spin_dim == 1 else None)


def spectral_derivative_matrix(n: int, step: float) -> np.ndarray:
    """Fourier (periodic sinc) differentiation matrix; real antisymmetric."""
    k = np.arange(n)
    diff = k[:, None] - k[None, :]
    sign = np.where(diff % 2 == 0, 1.0, -1.0)
    angle = np.pi * diff / n
    off = diff != 0
    mat = np.zeros((n, n))
    if n % 2 == 0:
        mat[off] = sign[off] / np.tan(angle[off])
    else:
        mat[off] = sign[off] / np.sin(angle[off])
    return mat * (np.pi / (n * step))


def cd4_derivative_matrix(n: int, step: float) -> np.ndarray:
    """Fourth-order central difference; stencil truncated at the edges, so exactly antisymmetric."""
    mat = np.zeros((n, n))
    for offset, c in ((1, 2 / 3), (2, -1 / 12)):
        mat += c * (np.eye(n, k=offset) - np.eye(n, k=-offset))
    return mat / step


def derivative_operator(grid: Grid, scheme: Scheme | str = Scheme.SPECTRAL) -> LinearOperator:
    scheme = Scheme(scheme)
    if scheme is Scheme.SPECTRAL:
        mat = spectral_derivative_matrix(grid.n, grid.step)
    else:
        if grid.n < 5:
            raise ShapeError(f"cd4 needs at least 5 points, grid has {grid.n}")
        mat = cd4_derivative_matrix(grid.n, grid.step)
    return LinearOperator(grid, mat, 1, (Term(1.0),))


def multiplication_operator(grid: Grid, f: Callable, df: Callable | None = None) -> LinearOperator:
    """Diagonal action of ``f`` on the grid coordinate.

    ``df`` is used only by :func:`canonical_commutator`; when omitted it is
    derived numerically from ``f``.
    """
    values = np.asarray(f(grid.points))
    if values.shape != (grid.n,):
        values = np.broadcast_to(values, (grid.n,))
    if not np.all(np.isfinite(values)):
        bad = grid.points[~np.isfinite(values)]
        raise GridError(f"multiplier is not finite at grid point(s) {bad[:5]}")
    return LinearOperator(grid, np.diag(values), 1, (Term(1.0, f, df or numeric_derivative(f)),))


def coordinate_operator(grid: Grid) -> LinearOperator:
    """Multiplication by the grid coordinate (x in position space, p in momentum space)."""
    return multiplication_operator(grid, lambda q: q, lambda q: np.ones_like(q))


def position_operator(grid: Grid, scheme: Scheme | str = Scheme.SPECTRAL) -> LinearOperator:
    """x = i d/dp on a momentum grid, so that [x, p] = i."""
    if grid.rep is not Rep.MOMENTUM:
        raise GridError("position operator in this form needs a momentum grid")
    return 1j * derivative_operator(grid, scheme)


def inverse_momentum(grid: Grid) -> LinearOperator:
    if grid.rep is not Rep.MOMENTUM:
        raise GridError("inverse momentum needs a momentum grid")
    if grid.has_zero_point():
        raise GridError("momentum grid samples p = 0; use a half-integer offset grid")
    return multiplication_operator(grid, lambda p: 1 / p, lambda p: -1 / p**2)


def commutator(a: LinearOperator, b: LinearOperator) -> LinearOperator:
    """Matrix commutator AB - BA."""
    a._check(b)
    return a._new(a.matrix @ b.matrix - b.matrix @ a.matrix)


def canonical_commutator(a: LinearOperator, b: LinearOperator) -> LinearOperator:
    """[A, B] via the Leibniz rule when both carry symbols, else the matrix commutator.

    Symbol terms commute among themselves except ``[c d/dq, f] = c f'``.
    """
    a._check(b)
    if a.symbol is None or b.symbol is None:
        return commutator(a, b)
    pieces = []
    for s in a.symbol:
        for t in b.symbol:
            if s.is_derivative and not t.is_derivative:
                pieces.append((s.coeff * t.coeff, t.dfunc))
            elif t.is_derivative and not s.is_derivative:
                pieces.append((-s.coeff * t.coeff, s.dfunc))
    q = a.grid.points
    values = np.zeros(a.grid.n, dtype=complex)
    for c, g in pieces:
        values += c * np.broadcast_to(g(q), q.shape)

    def f(x, _pieces=tuple(pieces)):
        return sum(c * g(x) for c, g in _pieces) if _pieces else np.zeros_like(x)

    return LinearOperator(a.grid, np.diag(values), 1, (Term(1.0, f, numeric_derivative(f)),))


def symmetrize(a: LinearOperator, b: LinearOperator) -> LinearOperator:
    """(AB + BA) / 2."""
    a._check(b)
    return a._new((a.matrix @ b.matrix + b.matrix @ a.matrix) / 2)


def hermiticity_defect(a) -> float:
    """||A - A^dagger||_F / max(1, ||A||_F)."""
    if isinstance(a, LinearOperator):
        return a.hermiticity_defect
    mat = np.asarray(a)
    return float(np.linalg.norm(mat - mat.conj().T) / max(1.0, np.linalg.norm(mat)))


def require_hermitian(a: LinearOperator, tol: float = 1e-10, name: str = "operator") -> None:
    defect = hermiticity_defect(a)
    if defect > tol:
        raise NonHermitianError(f"{name} is not self-adjoint: defect {defect:.3e} > {tol:.0e}")


def relative_residual(vec, ref) -> float:
    """||vec|| / ||ref|| for raw vectors or states."""
    v = vec.vector if hasattr(vec, "vector") else np.asarray(vec)
    r = ref.vector if hasattr(ref, "vector") else np.asarray(ref)
    return float(np.linalg.norm(v) / np.linalg.norm(r))

