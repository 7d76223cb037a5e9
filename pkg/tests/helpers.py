"""Shared generators and scalar oracles for the test suite."""

import numpy as np

from entrocap import DensityMatrix


def random_density(rng, dim, rank=None):
    """Wishart-style random state; full rank unless rank is given."""
    rank = dim if rank is None else rank
    g = rng.normal(size=(dim, rank)) + 1j * rng.normal(size=(dim, rank))
    m = g @ g.conj().T
    m = 0.5 * (m + m.conj().T)
    return DensityMatrix(m / np.real(np.trace(m)))


def random_pure(rng, dim):
    v = rng.normal(size=dim) + 1j * rng.normal(size=dim)
    return DensityMatrix.pure(v)


def random_probabilities(rng, n):
    w = rng.exponential(size=n)
    return w / w.sum()


def random_unitary(rng, dim):
    g = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    q, r = np.linalg.qr(g)
    return q * (np.diag(r) / np.abs(np.diag(r)))


def scalar_entropy(p):
    """-sum p log p for a plain probability vector."""
    p = np.asarray(p, dtype=float)
    p = p[p > 0]
    return float(-(p * np.log(p)).sum())


def scalar_kl(p, q):
    """Classical relative entropy of two probability vectors."""
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    mask = p > 0
    return float((p[mask] * (np.log(p[mask]) - np.log(q[mask]))).sum())
