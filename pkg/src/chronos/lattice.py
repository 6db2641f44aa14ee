"""Uniform 1-D grids, states on them, and maps between representations.

Natural units throughout (hbar = c = 1). A state's amplitudes are samples of
the wavefunction; the squared norm is ``sum(|psi_k|**2) * step``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np
from scipy.interpolate import CubicSpline

from chronos.errors import GridError, NormalizationError, SupportError

INTERIOR_SIGMAS = 5.0
TAIL_MASS = 1e-12


class Rep(enum.Enum):
    POSITION = "position"
    MOMENTUM = "momentum"
    ENERGY_HALF_LINE = "energy-half-line"
    ENERGY_FULL_LINE = "energy-full-line"


@dataclass(frozen=True)
class Grid:
    n: int
    origin: float
    step: float
    rep: Rep

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 2:
            raise GridError(f"grid needs n >= 2 points, got {self.n}")
        if not (self.step > 0 and math.isfinite(self.step)):
            raise GridError(f"grid step must be positive, got {self.step}")
        if not math.isfinite(self.origin):
            raise GridError(f"grid origin must be finite, got {self.origin}")
        if self.rep is Rep.ENERGY_HALF_LINE and self.origin != 0:
            raise GridError(f"half-line energy grid must start at 0, got origin {self.origin}")

    @property
    def points(self) -> np.ndarray:
        return self.origin + self.step * np.arange(self.n)

    @property
    def first(self) -> float:
        return self.origin

    @property
    def last(self) -> float:
        return self.origin + (self.n - 1) * self.step

    @property
    def length(self) -> float:
        """Period of the grid when treated as a ring (n * step)."""
        return self.n * self.step

    def has_zero_point(self) -> bool:
        """True when some point lies within step/2 of the origin of coordinates."""
        return bool(np.any(np.abs(self.points) < 0.5 * self.step * (1 - 1e-12)))

    def is_fourier_dual(self, other: Grid, rtol: float = 1e-12) -> bool:
        return self.n == other.n and math.isclose(
            self.step * other.step, 2 * math.pi / self.n, rel_tol=rtol
        )


def make_grid(n: int, origin: float, step: float, rep: Rep) -> Grid:
    return Grid(int(n) if float(n).is_integer() else n, float(origin), float(step), Rep(rep))


def momentum_grid(n: int = 512, step: float = 0.02) -> Grid:
    """Symmetric momentum grid with points (k + 1/2 - n/2) * step, so p = 0 is never sampled."""
    return make_grid(n, (0.5 - n / 2) * step, step, Rep.MOMENTUM)


def positive_momentum_grid(n: int = 512, step: float = 0.01) -> Grid:
    """Momentum grid of right-movers only, points (k + 1/2) * step."""
    return make_grid(n, 0.5 * step, step, Rep.MOMENTUM)


def _frozen(a) -> np.ndarray:
    arr = np.array(a, dtype=complex)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class StateVector:
    grid: Grid
    amplitudes: np.ndarray

    def __post_init__(self):
        amps = _frozen(self.amplitudes)
        if amps.shape != (self.grid.n,):
            raise GridError(f"expected {self.grid.n} amplitudes, got shape {amps.shape}")
        object.__setattr__(self, "amplitudes", amps)

    @property
    def vector(self) -> np.ndarray:
        return self.amplitudes

    @property
    def spin_dim(self) -> int:
        return 1

    def with_vector(self, vec) -> StateVector:
        return StateVector(self.grid, vec)

    def norm_squared(self) -> float:
        return math.fsum(np.abs(self.amplitudes) ** 2) * self.grid.step

    def norm(self) -> float:
        return math.sqrt(self.norm_squared())

    def normalized(self) -> StateVector:
        nrm = self.norm()
        if nrm == 0:
            raise NormalizationError("cannot normalize the zero state")
        return self.with_vector(self.amplitudes / nrm)

    def inner(self, other: StateVector) -> complex:
        """<self|other> with the grid measure."""
        if other.grid != self.grid:
            raise GridError("inner product of states on different grids")
        return complex(np.vdot(self.vector, other.vector) * self.grid.step)


@dataclass(frozen=True, eq=False)
class SpinorState:
    """Two-component state; the flattened vector is (upper, lower)."""

    grid: Grid
    upper: np.ndarray
    lower: np.ndarray

    def __post_init__(self):
        if self.grid.rep is not Rep.MOMENTUM:
            raise GridError("spinor states live on momentum grids")
        up, lo = _frozen(self.upper), _frozen(self.lower)
        if up.shape != (self.grid.n,) or lo.shape != (self.grid.n,):
            raise GridError("spinor components must match the grid size")
        object.__setattr__(self, "upper", up)
        object.__setattr__(self, "lower", lo)

    @property
    def vector(self) -> np.ndarray:
        return np.concatenate([self.upper, self.lower])

    @property
    def spin_dim(self) -> int:
        return 2

    def with_vector(self, vec) -> SpinorState:
        vec = np.asarray(vec)
        n = self.grid.n
        return SpinorState(self.grid, vec[:n], vec[n:])

    def norm_squared(self) -> float:
        return math.fsum(np.abs(self.vector) ** 2) * self.grid.step

    def norm(self) -> float:
        return math.sqrt(self.norm_squared())

    def normalized(self) -> SpinorState:
        nrm = self.norm()
        if nrm == 0:
            raise NormalizationError("cannot normalize the zero state")
        return self.with_vector(self.vector / nrm)

    def inner(self, other: SpinorState) -> complex:
        if other.grid != self.grid:
            raise GridError("inner product of states on different grids")
        return complex(np.vdot(self.vector, other.vector) * self.grid.step)


def _gaussian_tail_mass(lo: float, hi: float, center: float, sigma: float) -> float:
    """Mass of N(center, sigma^2) outside [lo, hi]."""
    z = 1 / (sigma * math.sqrt(2))
    return 0.5 * math.erfc((center - lo) * z) + 0.5 * math.erfc((hi - center) * z)


def gaussian_state(grid: Grid, p0: float, sigma_p: float, x0: float = 0.0) -> StateVector:
    """Normalized Gaussian packet in momentum space centred on (x0, p0).

    ``|psi(p)|**2`` has standard deviation ``sigma_p``; the phase ramp
    ``exp(-i p x0)`` places the position expectation at ``x0``.
    """
    if grid.rep is not Rep.MOMENTUM:
        raise GridError("gaussian_state needs a momentum grid")
    if not sigma_p > 0:
        raise SupportError(f"sigma_p must be positive, got {sigma_p}")
    margin = INTERIOR_SIGMAS * sigma_p
    # The packet may not straddle p = 0 and must keep 5 sigma clear of the edges.
    lo, hi = grid.first, grid.last
    if p0 > 0:
        lo = max(lo, 0.0)
    elif p0 < 0:
        hi = min(hi, 0.0)
    else:
        raise SupportError("packet centred on p=0 puts its mass where 1/p is undefined")
    if p0 - lo < margin or hi - p0 < margin:
        raise SupportError(
            f"packet p0={p0}, sigma_p={sigma_p} is within {INTERIOR_SIGMAS} sigma of an edge or of p=0"
        )
    outside = _gaussian_tail_mass(lo, hi, p0, sigma_p)
    if outside > TAIL_MASS:
        raise SupportError(f"packet leaks {outside:.3e} of its mass outside the interior window")
    p = grid.points
    amps = np.exp(-((p - p0) ** 2) / (4 * sigma_p**2)) * np.exp(-1j * p * x0)
    return StateVector(grid, amps).normalized()


def _dual_momentum_grid(grid: Grid) -> Grid:
    dp = 2 * math.pi / (grid.n * grid.step)
    return make_grid(grid.n, (0.5 - grid.n / 2) * dp, dp, Rep.MOMENTUM)


def position_to_momentum(state: StateVector, target: Grid | None = None) -> StateVector:
    """Discrete Fourier transform psi(x) -> psi(p), unitary for the grid measures.

    psi(p_k) = step_x / sqrt(2 pi) * sum_j exp(-i p_k x_j) psi(x_j)
    """
    src = state.grid
    if src.rep is not Rep.POSITION:
        raise GridError("position_to_momentum expects a position-space state")
    target = target or _dual_momentum_grid(src)
    if target.rep is not Rep.MOMENTUM or not src.is_fourier_dual(target):
        raise GridError("momentum grid is not Fourier-dual to the position grid")
    j = np.arange(src.n)
    shifted = state.amplitudes * np.exp(-1j * target.origin * j * src.step)
    amps = np.fft.fft(shifted) * np.exp(-1j * target.points * src.origin)
    return StateVector(target, amps * src.step / math.sqrt(2 * math.pi))


def momentum_to_position(state: StateVector, target: Grid | None = None) -> StateVector:
    src = state.grid
    if src.rep is not Rep.MOMENTUM:
        raise GridError("momentum_to_position expects a momentum-space state")
    if target is None:
        dx = 2 * math.pi / (src.n * src.step)
        target = make_grid(src.n, -(src.n // 2) * dx, dx, Rep.POSITION)
    if target.rep is not Rep.POSITION or not src.is_fourier_dual(target):
        raise GridError("position grid is not Fourier-dual to the momentum grid")
    j = np.arange(src.n)
    back = np.fft.ifft(state.amplitudes * np.exp(1j * src.points * target.origin)) * src.n
    amps = back * np.exp(1j * src.origin * j * target.step)
    return StateVector(target, amps * src.step / math.sqrt(2 * math.pi))


def measure_factor(p, m: float) -> np.ndarray:
    """Amplitude factor [E^2 / (E^2 - m^2)]^(1/4) = sqrt(dp/dE) for E = sqrt(p^2 + m^2)."""
    p = np.asarray(p, dtype=float)
    e2 = p**2 + m**2
    return (e2 / (e2 - m**2)) ** 0.25


def _require_right_movers(grid: Grid) -> None:
    if grid.rep is not Rep.MOMENTUM:
        raise GridError("expected a momentum grid")
    if grid.first <= 0:
        raise GridError("energy representation needs strictly positive momenta (right-movers only)")


def momentum_to_energy(state: StateVector, m: float, energy_step: float | None = None) -> StateVector:
    """Change of variable p -> E = sqrt(p^2 + m^2) onto a uniform half-line energy grid.

    Amplitudes pick up sqrt(dp/dE) so that sum |phi|^2 dE = sum |psi|^2 dp,
    then are resampled with a cubic spline. Energies below the first sampled
    E get zero amplitude, so the input must be interior-supported.
    """
    if m < 0:
        raise GridError(f"mass must be nonnegative, got {m}")
    _require_right_movers(state.grid)
    p = state.grid.points
    energies = np.sqrt(p**2 + m**2)
    values = state.amplitudes * measure_factor(p, m)
    step = energy_step or state.grid.step
    n = int(math.floor(energies[-1] / step)) + 1
    target = make_grid(n, 0.0, step, Rep.ENERGY_HALF_LINE)
    e = target.points
    inside = (e >= energies[0]) & (e <= energies[-1])
    amps = np.zeros(n, dtype=complex)
    amps[inside] = CubicSpline(energies, values)(e[inside])
    return StateVector(target, amps)


def energy_to_momentum(state: StateVector, m: float, target: Grid) -> StateVector:
    """Inverse of :func:`momentum_to_energy` onto the momentum grid ``target``."""
    if state.grid.rep is not Rep.ENERGY_HALF_LINE:
        raise GridError("energy_to_momentum expects a half-line energy state")
    _require_right_movers(target)
    e_grid = state.grid.points
    p = target.points
    energies = np.sqrt(p**2 + m**2)
    inside = (energies >= e_grid[0]) & (energies <= e_grid[-1])
    amps = np.zeros(target.n, dtype=complex)
    amps[inside] = CubicSpline(e_grid, state.amplitudes)(energies[inside])
    return StateVector(target, amps / measure_factor(p, m))
