"""Finite-dimensional capacity approximation through projector compression.

Compressing every state of a set by rho -> P rho P / Tr(P rho) and solving
the capacity inside the range of P under-estimates the true capacity by at
most the factor eta = min_i Tr P rho_i; along a nested projector family the
compressed capacities converge to the full value once the ranges swallow all
supports.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .chicap import CapacityResult, solve_capacity
from .errors import OutOfDomain, ValidationFailed
from .qcore import DensityMatrix, _arr

_DOMAIN_EPS = 1e-12
_IDEMPOTENT_TOL = 1e-10


@dataclass(frozen=True)
class ProjectionReport:
    """Compressed capacity at one projector of a nested sweep."""

    projector_rank: int
    eta: float
    projected_capacity: CapacityResult
    in_domain: bool


def _check_projector(p) -> np.ndarray:
    m = np.asarray(p, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValidationFailed(f"projector must be square, got {m.shape}")
    if np.max(np.abs(m - m.conj().T)) > _IDEMPOTENT_TOL:
        raise ValidationFailed("projector is not Hermitian to 1e-10")
    if np.max(np.abs(m @ m - m)) > _IDEMPOTENT_TOL:
        raise ValidationFailed("projector is not idempotent to 1e-10")
    return m


def project_state(rho, p) -> DensityMatrix:
    """Normalized compression P rho P / Tr(P rho) of a state onto range(P)."""
    m = _check_projector(p)
    a = _arr(rho)
    if a.shape != m.shape:
        raise ValidationFailed(f"state dim {a.shape[0]} != projector dim {m.shape[0]}")
    weight = float(np.real(np.trace(m @ a)))
    if weight <= _DOMAIN_EPS:
        raise OutOfDomain(f"Tr(P rho) = {weight} is numerically zero")
    out = m @ a @ m / weight
    out = 0.5 * (out + out.conj().T)
    return DensityMatrix(out)


def truncated_capacity_sweep(states, projectors, tol: float = 1e-8) -> list[ProjectionReport]:
    """Compressed capacities along a nested increasing projector family.

    Projector n+1 must contain projector n as a subspace.  States with no
    overlap with a projector are dropped from that level with a warning.
    """
    states = [s if isinstance(s, DensityMatrix) else DensityMatrix(s) for s in states]
    ps = [_check_projector(p) for p in projectors]
    for a, b in zip(ps, ps[1:]):
        if np.max(np.abs(b @ a - a)) > _IDEMPOTENT_TOL:
            raise ValidationFailed("projector family is not nested")
    reports = []
    for p in ps:
        weights = [float(np.real(np.trace(p @ s.entries))) for s in states]
        eta = min(weights)
        kept = []
        for s, w in zip(states, weights):
            if w <= _DOMAIN_EPS:
                warnings.warn("state outside the compression domain was dropped")
                continue
            kept.append(project_state(s, p))
        result = solve_capacity(kept, tol=tol)
        reports.append(ProjectionReport(int(round(np.real(np.trace(p)))),
                                        eta, result, eta > _DOMAIN_EPS))
    return reports
