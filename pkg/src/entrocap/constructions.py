"""Closed-form capacity constructions: converging two-level families,
layers, coupling sets with fixed marginals, and rotation orbits.

The converging family lives on basis levels 1, n (n >= 2): each member mixes
level 1 with weight 1 - q_n and level n with weight q_n, with an off-diagonal
coherence eta tuned so the member's entropy equals (1 - eps) h2(q_n).  When
its summability condition holds, the family's capacity and optimal weights
solve a one-dimensional root problem in the multiplier x: F(x) = 1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .chicap import Ensemble
from .errors import (Condition45Fails, Divergent, NotNormalized,
                     ValidationFailed)
from .qcore import DensityMatrix
from .series import N_MAX, adaptive_sum, capped_partial_sum, quad_tail
from .spectra import ProbabilitySpectrum, SpectralSequence

_Q_MODELS = ("inverse-log", "inverse-linear")


def binary_entropy(q: float) -> float:
    if q <= 0.0 or q >= 1.0:
        return 0.0
    return -(q * math.log(q) + (1 - q) * math.log(1 - q))


@dataclass(frozen=True)
class SeqExampleModel:
    """Two-level converging family with purity parameter eps in [0, 1]."""

    q_model: str
    eps: float
    n_hi: int = 12          # index window for explicit state construction

    def __post_init__(self):
        if self.q_model not in _Q_MODELS:
            raise ValidationFailed(f"unknown q model {self.q_model!r}")
        if not 0.0 <= self.eps <= 1.0:
            raise ValidationFailed("eps must lie in [0, 1]")
        if self.n_hi < 2:
            raise ValidationFailed("n_hi must be at least 2")

    def q(self, ns) -> np.ndarray:
        """q_n for n >= 2 (decreasing to zero)."""
        ns = np.asarray(ns, dtype=float)
        if self.q_model == "inverse-linear":
            return 1.0 / ns
        return 1.0 / (np.log(ns) + 3.0 * np.log(np.log(2.0 * ns + 1.0)))

    def sequence(self) -> SpectralSequence:
        """The spectral sequence h = 1/q that governs summability."""
        return SpectralSequence.reciprocal(self.q_model)


@dataclass(frozen=True)
class SeqExampleResult:
    """Capacity data of the converging family."""

    model: SeqExampleModel
    lam_star_seq: float
    cond45: bool
    cond46_lhs: float        # boundary series by direct summation at the cap
    cond46_lhs_limit: float  # tail-corrected limiting value
    has_optimal_ensemble: bool
    lam_eps: float | None = None
    pi_eps: float | None = None
    capacity: float | None = None
    omega_head: np.ndarray | None = None    # diagonal of the center, levels 1..n_hi
    weights_head: np.ndarray | None = None  # optimal weight of each +/- pair, n = 2..n_hi


def eta_solver(q: float, eps: float, tol: float = 1e-13) -> float:
    """Coherence eta in [0, 1] giving the 2x2 block entropy (1-eps) h2(q).

    The block eigenvalues are (1 +- r)/2 with
    r = sqrt((1-2q)^2 + 4 eta^2 q (1-q)); entropy decreases in eta, so the
    endpoints always bracket.
    """
    if not 0.0 < q < 1.0:
        raise ValidationFailed("q must be in (0, 1)")
    if eps <= 0.0:
        return 0.0
    if eps >= 1.0:
        return 1.0
    target = (1.0 - eps) * binary_entropy(q)

    def entropy_at(eta):
        r = math.sqrt((1 - 2 * q) ** 2 + 4 * eta * eta * q * (1 - q))
        return binary_entropy((1 + r) / 2)

    lo, hi = 0.0, 1.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if entropy_at(mid) > target:
            lo = mid
        else:
            hi = mid
        if hi - lo <= tol:
            break
    return 0.5 * (lo + hi)


def seq_example_states(model: SeqExampleModel) -> list[DensityMatrix]:
    """The +/- members for n = 2..n_hi as explicit density matrices."""
    dim = model.n_hi
    states = []
    for n in range(2, model.n_hi + 1):
        q = float(model.q(n))
        eta = eta_solver(q, model.eps)
        coupling = eta * math.sqrt((1 - q) * q)
        for sign in (+1.0, -1.0):
            m = np.zeros((dim, dim), dtype=complex)
            m[0, 0] = 1.0 - q
            m[n - 1, n - 1] = q
            m[0, n - 1] = sign * coupling
            m[n - 1, 0] = sign * coupling
            states.append(DensityMatrix(m))
    return states


def _weight_terms(model: SeqExampleModel, x: float, extra_power: float):
    """Terms of the F/G series at multiplier x, as a function of k = n - 1.

    extra_power 1.0 gives F (a factor (1-q) more than G's terms).
    """
    eps = model.eps

    def term(ks):
        ns = np.asarray(ks, dtype=float) + 1.0
        q = model.q(ns)
        log_term = (-eps * np.log(q)
                    + (extra_power + (1.0 - q) * (1.0 - eps) / q) * np.log1p(-q)
                    - x / q)
        return np.exp(log_term)

    return term


def _series_tail(model: SeqExampleModel, x: float, extra_power: float):
    eps = model.eps
    if model.q_model == "inverse-linear":
        # q(n) = 1/n decays exponentially in the summand; integrate directly
        def integrand(k):
            n = k + 1.0
            q = 1.0 / n
            return np.exp(-eps * np.log(q)
                          + (extra_power + (1 - q) * (1 - eps) / q) * np.log1p(-q)
                          - x * n)

        def tail(n):
            return quad_tail(integrand, n + 0.5)

        return tail

    def integrand_u(u):
        # u = log n; dx = e^u du, h = 1/q = u + 3 log log(2n+1)
        big_l = np.logaddexp(np.log(2.0) + u, 0.0)
        h = u + 3.0 * np.log(big_l)
        q = 1.0 / h
        return np.exp(eps * np.log(h)
                      + (extra_power + (1 - q) * (1 - eps) / q) * np.log1p(-q)
                      + (1.0 - x) * u - 3.0 * x * np.log(big_l))

    def tail(n):
        return quad_tail(integrand_u, math.log(n + 1.5))

    return tail


def _series_value(model: SeqExampleModel, x: float, extra_power: float,
                  rel_tol: float = 1e-10) -> float:
    term = _weight_terms(model, x, extra_power)
    tail = _series_tail(model, x, extra_power)
    return adaptive_sum(term, tail, rel_tol, n_start=1024).value


def seq_example_capacity(model: SeqExampleModel, tol: float = 1e-9) -> SeqExampleResult:
    """Capacity of the converging family via the one-dimensional reduction.

    When the boundary series (the optimal-ensemble condition) reaches 1, the
    multiplier lam_eps solves F(x) = 1; then pi_eps = 1/G(lam_eps) and the
    capacity is lam_eps - log pi_eps.  Otherwise only the boundary diagnostic
    is reported: cond46_lhs is the direct partial sum at the truncation cap
    (what a desk computation of the boundary series yields) and
    cond46_lhs_limit its tail-corrected limit.
    """
    seq = model.sequence()
    lam_star = float(seq.analytic_ic)
    cond45 = math.isfinite(lam_star)
    if not cond45:
        raise Condition45Fails("no multiplier makes the family summable")

    def f_at(x):
        try:
            return _series_value(model, x, 1.0)
        except Divergent:
            return math.inf

    # the limiting boundary value; +inf when even the corrected series diverges
    lhs_limit = f_at(lam_star if lam_star > 0 else 1e-12)
    if model.q_model == "inverse-linear":
        # terms do not vanish as x -> 0+, so the boundary series diverges
        lhs_limit = math.inf

    if math.isinf(lhs_limit):
        lhs_capped = math.inf
    else:
        term = _weight_terms(model, lam_star, 1.0)
        lhs_capped = capped_partial_sum(term, N_MAX)

    has_ensemble = lhs_limit >= 1.0
    if not has_ensemble:
        return SeqExampleResult(model, lam_star, cond45, lhs_capped, lhs_limit,
                                False)

    # F is continuous and strictly decreasing on (lam_star, inf) with
    # F(lam_star+) >= 1, so the root bracket expands until F < 1
    lo = lam_star + 1e-9
    hi = max(2.0 * max(lam_star, 0.5), 1.0)
    for _ in range(200):
        if f_at(hi) < 1.0:
            break
        hi *= 2.0
    else:
        raise ValidationFailed("F(x) never dropped below 1")
    if f_at(lo) < 1.0:
        hi = lo
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if f_at(mid) > 1.0:
            lo = mid
        else:
            hi = mid
        if hi - lo <= 1e-13 * max(1.0, lo):
            break
    lam_eps = 0.5 * (lo + hi)
    if abs(f_at(lam_eps) - 1.0) > max(tol, 1e-8):
        raise ValidationFailed("root residual for F(x) = 1 is too large")
    g_val = _series_value(model, lam_eps, 0.0)
    pi_eps = 1.0 / g_val
    capacity = lam_eps - math.log(pi_eps)

    ns = np.arange(2, model.n_hi + 1, dtype=float)
    q = model.q(ns)
    pair_weights = 0.5 * pi_eps * np.exp(
        -model.eps * np.log(q)
        + (1 - q) * (1 - model.eps) / q * np.log1p(-q)
        - lam_eps / q)
    omega_head = np.empty(model.n_hi)
    omega_head[0] = pi_eps
    omega_head[1:] = pi_eps * np.exp(
        (1 - model.eps) * (np.log(q) + (1 - q) / q * np.log1p(-q)) - lam_eps / q)
    return SeqExampleResult(model, lam_star, cond45, lhs_capped, lhs_limit, True,
                            lam_eps, pi_eps, capacity, omega_head, pair_weights)


def layer_optimal_ensemble(spec: ProbabilitySpectrum, d: int | None = None) -> Ensemble:
    """Equal-weight phase orbit of a purification vector within a layer.

    The d pure states diag(w^{jk}) |psi>, |psi> = sum sqrt(p_k)|k>, share the
    diagonal of the base state and average to it exactly, so their Holevo
    quantity equals the base state's entropy.
    """
    if not spec.is_finite:
        raise ValidationFailed("layer construction needs a finite spectrum")
    p = spec.entries
    if d is None:
        d = len(p)
    if d != len(p):
        raise ValidationFailed(f"spectrum length {len(p)} != requested dim {d}")
    psi = np.sqrt(p).astype(complex)
    states = []
    for j in range(d):
        phases = np.exp(2j * np.pi * j * np.arange(d) / d)
        states.append(DensityMatrix.pure(phases * psi))
    return Ensemble(np.full(d, 1.0 / d), states)


@dataclass(frozen=True)
class CouplingSetResult:
    """Capacities of the fixed-marginal set at uniform marginals I/d."""

    quantum: float
    classical: float
    entangled_ensemble: Ensemble
    classical_ensemble: Ensemble


def coupling_set_capacity(d: int) -> CouplingSetResult:
    """Capacity 2 log d of the set of states with both marginals I/d, and
    log d for its classical (diagonal) restriction.

    The quantum value is achieved by the d^2 shift/phase-twisted maximally
    entangled basis states; the classical one by the d cyclic permutation
    matrices as joint distributions.  Both ensembles average to the uniform
    state on the d^2-dimensional product space.
    """
    if d < 1:
        raise ValidationFailed("d must be a positive integer")
    if d == 1:
        triv = Ensemble(np.array([1.0]), [DensityMatrix.maximally_mixed(1)])
        return CouplingSetResult(0.0, 0.0, triv, triv)
    omega0 = np.zeros(d * d, dtype=complex)
    for k in range(d):
        omega0[k * d + k] = 1.0 / math.sqrt(d)
    shift = np.roll(np.eye(d, dtype=complex), 1, axis=0)
    phase = np.diag(np.exp(2j * np.pi * np.arange(d) / d))
    bell_states = []
    for a in range(d):
        for b in range(d):
            op = np.linalg.matrix_power(shift, a) @ np.linalg.matrix_power(phase, b)
            vec = np.kron(np.eye(d, dtype=complex), op) @ omega0
            bell_states.append(DensityMatrix.pure(vec))
    entangled = Ensemble(np.full(d * d, 1.0 / (d * d)), bell_states)

    classical_states = []
    for j in range(d):
        m = np.zeros((d * d, d * d), dtype=complex)
        for i in range(d):
            idx = i * d + (i + j) % d
            m[idx, idx] = 1.0 / d
        classical_states.append(DensityMatrix(m))
    classical = Ensemble(np.full(d, 1.0 / d), classical_states)

    uniform = np.eye(d * d) / (d * d)
    for ens in (entangled, classical):
        if np.max(np.abs(ens.average().entries - uniform)) > 1e-12:
            raise ValidationFailed("construction does not average to the uniform state")
    return CouplingSetResult(2.0 * math.log(d), math.log(d), entangled, classical)


@dataclass(frozen=True)
class RotationOrbitResult:
    """Capacity of a rotation orbit from the harmonic power spectrum."""

    capacity: float
    truncated_mass: float
    harmonic_powers: np.ndarray  # |c_n|^2 for n = -n_harmonics..n_harmonics


def rotation_orbit_capacity(phi, n_harmonics: int = 1024,
                            n_samples: int = 2**16) -> RotationOrbitResult:
    """Capacity of the orbit of |phi><phi| under all rotations of the circle.

    Equals the entropy of the orbit average, i.e. -sum |c_n|^2 log |c_n|^2
    over the Fourier powers of phi.  phi may be a callable on [-pi, pi) or an
    array of midpoint samples; composite-midpoint quadrature keeps jump
    discontinuities off the sample grid.
    """
    if n_harmonics >= n_samples // 2:
        raise ValidationFailed("n_harmonics must be below n_samples/2")
    grid = -np.pi + (np.arange(n_samples) + 0.5) * (2 * np.pi / n_samples)
    samples = np.asarray(phi(grid) if callable(phi) else phi, dtype=complex)
    if samples.shape != grid.shape:
        raise ValidationFailed(f"need {n_samples} samples, got {samples.shape}")
    norm = float(np.mean(np.abs(samples) ** 2))
    if abs(norm - 1.0) > 1e-8:
        raise NotNormalized(f"(1/2pi) * integral |phi|^2 = {norm}, not 1")
    spec = np.fft.fft(samples) / n_samples
    ns = np.arange(-n_harmonics, n_harmonics + 1)
    powers = np.abs(spec[np.mod(ns, n_samples)]) ** 2
    pos = powers[powers > 1e-300]
    capacity = max(float(-(pos * np.log(pos)).sum()), 0.0)
    return RotationOrbitResult(capacity, float(1.0 - powers.sum()), powers)
