"""Unitary evolution, expectation time series, and the classical arrival-time oracle."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from chronos.errors import ChronosError, ShapeError
from chronos.opalg import LinearOperator, require_hermitian

IMAG_TOL = 1e-9


def evolve(state, h: LinearOperator, t: float):
    """exp(-i H t) |state> by eigendecomposition of H."""
    require_hermitian(h, name="H")
    if h.grid != state.grid or h.spin_dim != state.spin_dim:
        raise ShapeError("Hamiltonian and state live on different spaces")
    if t == 0:
        return state
    mat = h.matrix
    diag = np.diagonal(mat)
    if np.count_nonzero(mat - np.diag(diag)) == 0:
        return state.with_vector(np.exp(-1j * diag.real * t) * state.vector)
    w, v = np.linalg.eigh(mat)
    return state.with_vector(v @ (np.exp(-1j * w * t) * (v.conj().T @ state.vector)))


@dataclass(frozen=True, eq=False)
class ExpectationSeries:
    times: np.ndarray
    values: np.ndarray
    fitted_slope: float
    fit_residual: float
    max_imag: float = 0.0


def expectation_series(op: LinearOperator, state0, h: LinearOperator, times) -> ExpectationSeries:
    """<psi(t)|op|psi(t)> on ``times`` with a least-squares line through the values."""
    require_hermitian(op, name="observable")
    require_hermitian(h, name="H")
    times = np.asarray(times, dtype=float)
    mat = h.matrix
    diag = np.diagonal(mat)
    if np.count_nonzero(mat - np.diag(diag)) == 0:
        w, v = diag.real, None
    else:
        w, v = np.linalg.eigh(mat)
    coeffs = state0.vector if v is None else v.conj().T @ state0.vector
    raw = []
    for t in times:
        psi = np.exp(-1j * w * t) * coeffs
        if v is not None:
            psi = v @ psi
        raw.append(np.vdot(psi, op.matrix @ psi) * state0.grid.step)
    raw = np.asarray(raw)
    values = raw.real
    if len(times) >= 2:
        slope, intercept = np.polyfit(times, values, 1)
        fit = slope * times + intercept
        residual = float(np.sqrt(np.mean((values - fit) ** 2)))
    else:
        slope, residual = 0.0, 0.0
    return ExpectationSeries(times, values, float(slope), residual, float(np.abs(raw.imag).max(initial=0.0)))


@dataclass(frozen=True, eq=False)
class ClassicalEnsemble:
    samples: np.ndarray  # shape (N, 2): columns x, p
    m: float
    seed: int

    def __post_init__(self):
        arr = np.array(self.samples, dtype=float).reshape(-1, 2)
        arr.setflags(write=False)
        object.__setattr__(self, "samples", arr)
        if not self.m > 0:
            raise ChronosError(f"mass must be positive, got {self.m}")

    @property
    def x(self) -> np.ndarray:
        return self.samples[:, 0]

    @property
    def p(self) -> np.ndarray:
        return self.samples[:, 1]

    @classmethod
    def from_gaussian_packet(
        cls, m: float, p0: float, sigma_p: float, x0: float, size: int, seed: int
    ) -> ClassicalEnsemble:
        """Independent draws from the packet's marginals: x ~ N(x0, (1/2 sigma_p)^2), p ~ N(p0, sigma_p^2)."""
        rng = np.random.Generator(np.random.Philox(seed))
        sigma_x = 1 / (2 * sigma_p)
        x = rng.normal(x0, sigma_x, size)
        p = rng.normal(p0, sigma_p, size)
        return cls(np.column_stack([x, p]), m, seed)

    def mirrored(self) -> ClassicalEnsemble:
        """x -> -x."""
        return ClassicalEnsemble(np.column_stack([-self.x, self.p]), self.m, self.seed)


def classical_arrival_oracle(ensemble: ClassicalEnsemble) -> tuple[float, float]:
    """Mean and standard error of the classical arrival time t = -m x / p."""
    if len(ensemble.samples) == 0:
        raise ChronosError("empty ensemble")
    p = ensemble.p
    if np.any(p == 0):
        raise ChronosError("ensemble contains a zero-momentum sample")
    t = -ensemble.m * ensemble.x / p
    mean = math.fsum(t) / len(t)
    if len(t) < 2:
        return mean, 0.0
    return mean, float(np.std(t, ddof=1) / math.sqrt(len(t)))
