"""Variances, Heisenberg drift, and the Mandelstam-Tamm time-energy bound."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from chronos.errors import NormalizationError, PreconditionError, ZeroDriftError
from chronos.opalg import LinearOperator, canonical_commutator, commutator, require_hermitian

DRIFT_THRESHOLD = 1e-10
NORM_TOL = 1e-9
BOUND_SLACK = 1e-9


def _require_normalized(state) -> None:
    err = abs(state.norm_squared() - 1.0)
    if err > NORM_TOL:
        raise NormalizationError(f"state is not normalized (|norm^2 - 1| = {err:.3e})")


def variance(a: LinearOperator, state) -> float:
    """Standard deviation sqrt(<A^2> - <A>^2) of A in ``state``.

    Evaluated as ||(A - <A>) psi|| so the result is never negative.
    """
    require_hermitian(a, name="A")
    _require_normalized(state)
    a_psi = a.matrix @ state.vector
    mean = np.vdot(state.vector, a_psi).real * state.grid.step
    spread = a_psi - mean * state.vector
    return math.sqrt(math.fsum(np.abs(spread) ** 2) * state.grid.step)


def drift(a: LinearOperator, h: LinearOperator, state) -> complex:
    """<dA/dt> = -i <[A, H]> from the Heisenberg equation of motion.

    Uses the canonical (Leibniz) commutator when both operators are built from
    multiplication and differentiation; otherwise the matrix commutator.
    """
    return -1j * canonical_commutator(a, h).expectation(state)


def average_commutator(a: LinearOperator, b: LinearOperator, state) -> complex:
    """<state|[A, B]|state> with the matrix commutator."""
    _require_normalized(state)
    return commutator(a, b).expectation(state)


@dataclass(frozen=True)
class UncertaintyReport:
    delta_A: float
    delta_H: float
    drift: float
    delta_T2: float
    bound_lhs: float
    satisfied: bool


def mt_time_deviation(a: LinearOperator, h: LinearOperator, state) -> UncertaintyReport:
    """Mandelstam-Tamm time deviation Delta T2 = Delta A / |<dA/dt>| and the bound Delta T2 Delta H >= 1/2."""
    d = drift(a, h, state)
    if abs(d) <= DRIFT_THRESHOLD:
        raise ZeroDriftError(f"|<dA/dt>| = {abs(d):.3e} is below {DRIFT_THRESHOLD:.0e}")
    if abs(d.imag) > DRIFT_THRESHOLD * max(1.0, abs(d)):
        raise PreconditionError("drift is not real; A or H is not self-adjoint", residual=abs(d.imag))
    delta_a = variance(a, state)
    delta_h = variance(h, state)
    delta_t2 = delta_a / abs(d.real)
    lhs = delta_t2 * delta_h
    return UncertaintyReport(
        delta_A=delta_a,
        delta_H=delta_h,
        drift=d.real,
        delta_T2=delta_t2,
        bound_lhs=lhs,
        satisfied=lhs >= 0.5 - BOUND_SLACK,
    )
