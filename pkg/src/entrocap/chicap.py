"""Chi-capacity of finite state sets and of relative-entropy balls.

The capacity C = sup over ensembles of chi is computed by the multiplicative
fixed-point iteration  pi_i <- pi_i exp(H(rho_i || rho_bar)) / Z, whose fixed
points are exactly the stationary ensembles (equal divergence on the support,
no larger divergence off it).  Every iterate yields the certificate pair
chi <= C <= max_i H(rho_i || rho_bar), so the duality gap is a computable
stopping rule.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import (DimensionMismatch, EmptySet, InvalidTolerance,
                     MaxIterExceeded, NotAGroup, ValidationFailed)
from .maxent import VSetProfile
from .qcore import DensityMatrix, _arr, _entropy_of_probs, relative_entropy
from .spectra import (ProbabilitySpectrum, c_thresholds, decrease_coefficient)

_SUPPORT_EIG = 1e-12
_SUPPORT_MASS = 1e-10
_FREEZE = 1e-15


@dataclass(frozen=True)
class Ensemble:
    """Weighted finite collection of same-dimension states."""

    weights: np.ndarray
    states: list

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float)
        if len(self.states) == 0:
            raise EmptySet("ensemble needs at least one state")
        if len(w) != len(self.states):
            raise ValidationFailed("weights and states differ in length")
        if np.any(w < 0) or abs(w.sum() - 1.0) > 1e-12:
            raise ValidationFailed("weights must be nonnegative and sum to 1")
        dims = {s.dim if isinstance(s, DensityMatrix) else np.asarray(s).shape[0]
                for s in self.states}
        if len(dims) != 1:
            raise DimensionMismatch(f"mixed state dimensions {sorted(dims)}")
        object.__setattr__(self, "weights", w)

    def average(self) -> DensityMatrix:
        acc = sum(w * _arr(s) for w, s in zip(self.weights, self.states))
        return DensityMatrix(acc)


@dataclass
class CapacityResult:
    """Solver output: capacity with certificate gap and the divergence center."""

    capacity: float
    omega: DensityMatrix
    weights: np.ndarray
    gap: float
    iters: int
    support_violations: int = 0
    converged: bool = True
    chi_trace: list = field(default_factory=list)
    average_trace: list | None = None

    def to_json(self) -> str:
        return json.dumps({
            "capacity": self.capacity,
            "gap": self.gap,
            "weights": [float(w) for w in self.weights],
            "omega": json.loads(self.omega.to_json()),
            "iters": self.iters,
        }, sort_keys=True)


def chi_of_ensemble(mu: Ensemble) -> float:
    """Holevo quantity chi = sum_i pi_i H(rho_i || rho_bar).

    Zero-weight members contribute nothing; the mixing-entropy form
    H(rho_bar) - sum pi_i H(rho_i) agrees within numerical error and is
    exercised by the test suite.
    """
    avg = mu.average()
    total = 0.0
    for w, s in zip(mu.weights, mu.states):
        if w <= 0.0:
            continue
        d = relative_entropy(s, avg)
        if d == math.inf:
            return math.inf
        total += w * d
    return total


def _support_isometry(states) -> np.ndarray:
    acc = sum(_arr(s) for s in states) / len(states)
    w, v = np.linalg.eigh(acc)
    return v[:, w > _SUPPORT_EIG]


def _divergences(mats, eig_rho, avg):
    """H(rho_i || avg) for stacked states, +inf where support leaks."""
    s, v = np.linalg.eigh(avg)
    # projections <v_j| rho_i |v_j> for all states at once
    proj = np.real(np.einsum("jk,nkl,lj->nj", v.conj().T, mats, v))
    kernel = s <= _SUPPORT_EIG
    leak = proj[:, kernel].sum(axis=1)
    log_s = np.log(s[~kernel])
    tr_log_avg = proj[:, ~kernel] @ log_s
    out = eig_rho - tr_log_avg
    out[leak > _SUPPORT_MASS] = math.inf
    return out


def solve_capacity(states, tol: float = 1e-8, max_iter: int = 200_000,
                   allow_fast_paths: bool = True,
                   track_averages: bool = False) -> CapacityResult:
    """Capacity of a finite state set by the multiplicative fixed point.

    Stops when the duality gap max_i H(rho_i || rho_bar) - chi drops to tol;
    the capacity is reported as the midpoint chi + gap/2 (both ends of
    [chi, chi + gap] are rigorous bounds).  States are first compressed onto
    their joint support.  Raises MaxIterExceeded with the best iterate
    attached if the gap never reaches tol.
    """
    if len(states) == 0:
        raise EmptySet("need at least one state")
    if tol <= 0:
        raise InvalidTolerance("tol must be positive")
    states = [s if isinstance(s, DensityMatrix) else DensityMatrix(s) for s in states]
    dims = {s.dim for s in states}
    if len(dims) != 1:
        raise DimensionMismatch(f"mixed state dimensions {sorted(dims)}")
    n = len(states)
    if n == 1:
        return CapacityResult(0.0, states[0], np.array([1.0]), 0.0, 0,
                              chi_trace=[0.0])

    iso = _support_isometry(states)
    mats = np.stack([iso.conj().T @ _arr(s) @ iso for s in states])

    def embed(avg):
        return DensityMatrix(iso @ avg @ iso.conj().T)

    if allow_fast_paths:
        overlaps = np.einsum("nij,mji->nm", mats, mats).real
        off = overlaps - np.diag(np.diag(overlaps))
        if np.all(np.abs(off) <= 1e-12):
            # mutually orthogonal supports: uniform weights are exactly optimal
            weights = np.full(n, 1.0 / n)
            avg = np.tensordot(weights, mats, axes=1)
            return CapacityResult(math.log(n), embed(avg), weights, 0.0, 0,
                                  chi_trace=[math.log(n)])

    eig_rho = np.empty(n)
    for i in range(n):
        p = np.clip(np.linalg.eigvalsh(mats[i]), 0.0, None)
        eig_rho[i] = -_entropy_of_probs(p)

    weights = np.full(n, 1.0 / n)
    chi_trace: list[float] = []
    avg_trace: list[np.ndarray] = [] if track_averages else None
    support_violations = 0
    best = None
    for it in range(1, max_iter + 1):
        avg = np.tensordot(weights, mats, axes=1)
        div = _divergences(mats, eig_rho, avg)
        inf_mask = ~np.isfinite(div)
        support_violations += int(inf_mask.sum())
        active = weights > 0.0
        chi = float((weights[active] * div[active]).sum())
        gap = float(div.max() - chi)
        chi_trace.append(chi)
        if track_averages:
            avg_trace.append(avg.copy())
        best = (chi, gap, avg.copy(), weights.copy(), it)
        if gap <= tol and not inf_mask.any():
            break
        # multiplicative update; frozen members re-enter only when their
        # divergence beats the current value by more than tol
        finite_div = np.where(inf_mask, 0.0, div)
        shift = finite_div.max()
        new_w = weights * np.exp(finite_div - shift)
        revive = (weights <= 0.0) & (np.where(inf_mask, math.inf, div) > chi + tol)
        new_w[revive] = 1e-12 * max(new_w.max(), 1.0)
        new_w[new_w < _FREEZE * new_w.sum()] = 0.0
        weights = new_w / new_w.sum()
    else:
        chi, gap, avg, weights, it = best
        result = CapacityResult(chi + gap / 2.0, embed(avg), weights, gap, it,
                                support_violations, converged=False,
                                chi_trace=chi_trace, average_trace=avg_trace)
        raise MaxIterExceeded(
            f"gap {gap} above tol {tol} after {it} iterations", result)

    chi, gap, avg, weights, it = best
    return CapacityResult(chi + gap / 2.0, embed(avg), weights, gap, it,
                          support_violations, converged=True,
                          chi_trace=chi_trace, average_trace=avg_trace)


def capacity_certificate(states, sigma) -> float:
    """sup_i H(rho_i || sigma): an upper bound on the capacity for any sigma."""
    return max(relative_entropy(s, sigma) for s in states)


def union_bounds(parts: list[CapacityResult], grid: int = 2000,
                 samples: int = 2000) -> tuple[float, float]:
    """Capacity bounds for a union of sets from their individual solutions.

    lower: best value of sum_k lam_k C_k + chi({lam_k, Omega_k}) over a grid
    of probability vectors (always includes the vertices and the uniform
    point); upper: max_k C_k + log n.
    """
    n = len(parts)
    if n == 0:
        raise EmptySet("need at least one part")
    dims = {p.omega.dim for p in parts}
    if len(dims) != 1:
        raise DimensionMismatch(f"parts have mixed dimensions {sorted(dims)}")
    caps = np.array([p.capacity for p in parts])
    omegas = [p.omega for p in parts]
    upper = float(caps.max() + math.log(n))

    def value(lam):
        return float(lam @ caps) + chi_of_ensemble(Ensemble(lam, omegas))

    candidates = [np.eye(n)[k] for k in range(n)]
    candidates.append(np.full(n, 1.0 / n))
    if n == 2:
        ts = np.linspace(0.0, 1.0, grid + 1)
        candidates.extend(np.array([t, 1.0 - t]) for t in ts)
    elif n == 3:
        steps = 60
        for i in range(steps + 1):
            for j in range(steps + 1 - i):
                k = steps - i - j
                candidates.append(np.array([i, j, k], dtype=float) / steps)
    else:
        rng = np.random.default_rng(0)
        candidates.extend(rng.dirichlet(np.ones(n)) for _ in range(samples))
    lower = max(value(lam) for lam in candidates)
    return lower, min(upper, max(lower, upper))


def orbit_capacity(sigma, unitaries, tol: float = 1e-10) -> CapacityResult:
    """Capacity of the orbit {U sigma U*} of a finite unitary group.

    The group average is the unique invariant state of the orbit hull, so the
    capacity is H(sigma || average); all orbit members attain it.
    """
    sig = sigma if isinstance(sigma, DensityMatrix) else DensityMatrix(sigma)
    d = sig.dim
    us = [np.asarray(u, dtype=complex) for u in unitaries]
    if len(us) == 0:
        raise NotAGroup("empty unitary list")
    for u in us:
        if u.shape != (d, d):
            raise DimensionMismatch(f"unitary shape {u.shape} vs state dim {d}")
        if np.max(np.abs(u.conj().T @ u - np.eye(d))) > tol:
            raise NotAGroup("matrix is not unitary to 1e-10")

    def same_up_to_phase(a, b):
        return abs(abs(np.trace(a.conj().T @ b)) - d) <= tol * d

    if not any(same_up_to_phase(u, np.eye(d)) for u in us):
        raise NotAGroup("identity element missing")
    for a in us:
        for b in us:
            prod = a @ b
            if not any(same_up_to_phase(prod, u) for u in us):
                raise NotAGroup("set is not closed under multiplication")

    orbit = [u @ sig.entries @ u.conj().T for u in us]
    avg = DensityMatrix(sum(orbit) / len(orbit))
    divs = np.array([relative_entropy(DensityMatrix(o), avg) for o in orbit])
    if np.max(divs) - np.min(divs) > 1e-9:
        raise ValidationFailed("orbit divergences to the average are not equal")
    capacity = float(divs.mean())
    weights = np.full(len(us), 1.0 / len(us))
    gap = float(divs.max() - capacity)
    return CapacityResult(capacity, avg, weights, gap, 0, chi_trace=[capacity])


def chi_capacity_V(spec: ProbabilitySpectrum, c: float,
                   rel_tol: float = 1e-9) -> VSetProfile:
    """Capacity of the ball {rho : H(rho || sigma) <= c}, three branches.

    c at or below H(sigma) gives capacity c with center sigma; between
    H(sigma) and the upper critical radius the center is the normalized power
    state at the multiplier matching mean -log sigma to c; beyond it the
    profile is linear with slope dc(sigma).
    """
    if c < 0:
        raise ValueError("c must be nonnegative")
    if c == 0.0:
        return VSetProfile(spec, c, 1.0, chi_capacity=0.0, omega_spectrum=spec,
                           branch="vicinity")
    h_sigma = spec.entropy(rel_tol)
    if c <= h_sigma:
        return VSetProfile(spec, c, 1.0, chi_capacity=float(c),
                           omega_spectrum=spec, branch="vicinity")
    dc = decrease_coefficient(spec).value
    _, c_upper = c_thresholds(spec, rel_tol)
    if c <= c_upper:
        lo, hi = dc + 1e-9, 1.0
        for _ in range(200):
            mid = 0.5 * (lo + hi)
            if spec.mean_neglog(mid, rel_tol) - c > 0.0:
                lo = mid
            else:
                hi = mid
            if hi - lo <= 1e-12:
                break
        lam = 0.5 * (lo + hi)
        value = lam * c + math.log(spec.trace_power(lam, rel_tol))
        return VSetProfile(spec, c, lam, chi_capacity=value,
                           omega_spectrum=spec.power(lam), branch="gibbs")
    value = dc * c + math.log(spec.trace_power(dc, rel_tol))
    return VSetProfile(spec, c, dc, chi_capacity=value,
                       omega_spectrum=spec.power(dc), branch="linear")


def chi_capacity_V_infimum(spec: ProbabilitySpectrum, c: float,
                           rel_tol: float = 1e-9) -> float:
    """inf over lam in (dc, 1] of (lam c + log Tr sigma^lam): oracle form."""
    from scipy import optimize

    dc = decrease_coefficient(spec).value

    def objective(lam):
        try:
            return lam * c + math.log(spec.trace_power(lam, rel_tol))
        except Exception:
            return math.inf

    res = optimize.minimize_scalar(objective, bounds=(dc + 1e-9, 1.0),
                                   method="bounded", options={"xatol": 1e-12})
    return float(min(res.fun, objective(1.0)))
