"""Finite-dimensional density matrices and entropic functionals.

All logarithms are natural (values in nats).  Relative entropy returns +inf
as a first-class value when the support condition fails.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, ValidationFailed

_HERM_TOL = 1e-12
_TRACE_TOL = 1e-12
_EIG_FLOOR = -1e-10
_KER_EIG = 1e-12     # sigma eigenvalues at or below this count as kernel
_KER_MASS = 1e-10    # rho mass on the kernel above this means +inf


class DensityMatrix:
    """Hermitian, positive semidefinite, unit-trace complex matrix."""

    __slots__ = ("entries", "dim")

    def __init__(self, entries):
        a = np.array(entries, dtype=complex)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise ValidationFailed(f"expected a square matrix, got shape {a.shape}")
        if np.max(np.abs(a - a.conj().T)) > _HERM_TOL:
            raise ValidationFailed("matrix is not Hermitian to 1e-12")
        tr = a.trace()
        if abs(tr - 1.0) > _TRACE_TOL:
            raise ValidationFailed(f"trace is {tr}, not 1 within 1e-12")
        if np.linalg.eigvalsh(a).min() < _EIG_FLOOR:
            raise ValidationFailed("matrix has an eigenvalue below -1e-10")
        a.setflags(write=False)
        self.entries = a
        self.dim = a.shape[0]

    @staticmethod
    def pure(vector) -> "DensityMatrix":
        v = np.asarray(vector, dtype=complex)
        v = v / np.linalg.norm(v)
        return DensityMatrix(np.outer(v, v.conj()))

    @staticmethod
    def diagonal(probs) -> "DensityMatrix":
        return DensityMatrix(np.diag(np.asarray(probs, dtype=complex)))

    @staticmethod
    def maximally_mixed(dim: int) -> "DensityMatrix":
        return DensityMatrix(np.eye(dim) / dim)

    def eigenvalues(self) -> np.ndarray:
        """Clipped nonnegative spectrum, descending."""
        w = np.linalg.eigvalsh(self.entries)
        return np.clip(w, 0.0, None)[::-1]

    def to_json(self) -> str:
        flat = self.entries.reshape(-1)
        return json.dumps({
            "dim": self.dim,
            "entries": [[float(z.real), float(z.imag)] for z in flat],
        })

    @staticmethod
    def from_dict(rec: dict) -> "DensityMatrix":
        d = int(rec["dim"])
        flat = np.array([complex(re, im) for re, im in rec["entries"]])
        if flat.size != d * d:
            raise ValidationFailed(f"expected {d * d} entries, got {flat.size}")
        return DensityMatrix(flat.reshape(d, d))

    @staticmethod
    def from_json(text: str) -> "DensityMatrix":
        return DensityMatrix.from_dict(json.loads(text))

    def __repr__(self):
        return f"DensityMatrix(dim={self.dim})"


@dataclass(frozen=True)
class Basis:
    """Orthonormal column set used for dephasing."""

    vectors: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.vectors, dtype=complex)
        gram = v.conj().T @ v
        if np.max(np.abs(gram - np.eye(v.shape[1]))) > 1e-10:
            raise ValidationFailed("basis columns are not orthonormal to 1e-10")
        object.__setattr__(self, "vectors", v)

    @property
    def dim(self) -> int:
        return self.vectors.shape[0]

    @staticmethod
    def standard(dim: int) -> "Basis":
        return Basis(np.eye(dim, dtype=complex))


def _arr(state) -> np.ndarray:
    return state.entries if isinstance(state, DensityMatrix) else DensityMatrix(state).entries


def _entropy_of_probs(p: np.ndarray) -> float:
    p = p[p > 0.0]
    return float(-(p * np.log(p)).sum())


def entropy(rho) -> float:
    """Von Neumann entropy -sum p log p in nats (0 log 0 = 0)."""
    w = np.clip(np.linalg.eigvalsh(_arr(rho)), 0.0, None)
    return _entropy_of_probs(w)


def relative_entropy(rho, sigma) -> float:
    """H(rho || sigma) = Tr rho (log rho - log sigma); +inf off-support.

    The kernel of sigma is the span of eigenvectors with eigenvalue <= 1e-12;
    the result is +inf iff rho puts more than 1e-10 mass there.
    """
    a, b = _arr(rho), _arr(sigma)
    if a.shape != b.shape:
        raise DimensionMismatch(f"dims {a.shape[0]} and {b.shape[0]} differ")
    s, v = np.linalg.eigh(b)
    diag = np.real(np.einsum("ij,jk,ki->i", v.conj().T, a, v))
    kernel = s <= _KER_EIG
    if diag[kernel].sum() > _KER_MASS:
        return math.inf
    s_sup = s[~kernel]
    tr_rho_log_sigma = float(np.log(s_sup) @ diag[~kernel])
    p = np.clip(np.linalg.eigvalsh(a), 0.0, None)
    tr_rho_log_rho = -_entropy_of_probs(p)
    return max(tr_rho_log_rho - tr_rho_log_sigma, 0.0)


def dephase(rho, basis: Basis | None = None) -> DensityMatrix:
    """Remove off-diagonal terms in the given (default standard) basis."""
    a = _arr(rho)
    if basis is None:
        return DensityMatrix(np.diag(np.diag(a)))
    if basis.dim != a.shape[0]:
        raise DimensionMismatch(f"basis dim {basis.dim} != state dim {a.shape[0]}")
    v = basis.vectors
    return DensityMatrix(v @ np.diag(np.diag(v.conj().T @ a @ v)) @ v.conj().T)


def trace_distance(rho, sigma) -> float:
    """Trace norm of rho - sigma, in [0, 2]."""
    a, b = _arr(rho), _arr(sigma)
    if a.shape != b.shape:
        raise DimensionMismatch(f"dims {a.shape[0]} and {b.shape[0]} differ")
    return float(np.abs(np.linalg.eigvalsh(a - b)).sum())


def partial_trace(omega, dims: tuple[int, int], side: str) -> DensityMatrix:
    """Reduced state of a bipartite matrix; ``side`` names the traced factor."""
    a = _arr(omega)
    d_a, d_b = dims
    if d_a * d_b != a.shape[0]:
        raise DimensionMismatch(f"{d_a}x{d_b} != total dim {a.shape[0]}")
    if side not in ("left", "right"):
        raise ValueError("side must be 'left' or 'right'")
    t = a.reshape(d_a, d_b, d_a, d_b)
    reduced = np.einsum("ijik->jk", t) if side == "left" else np.einsum("ijkj->ik", t)
    return DensityMatrix(reduced)
