"""Maximum entropy over energy shells and relative-entropy balls.

The two constraint sets analyzed here are the mean-energy shell
{rho : Tr rho H <= h} of a spectral sequence H and the relative-entropy ball
{rho : H(rho || sigma) <= c} of a diagonal state sigma.  Both admit a
Boltzmann/power Gibbs maximizer below a threshold constraint level and a
linear entropy profile above it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import optimize

from .errors import (DegenerateState, Divergent, OutOfBranch, UnboundedEntropy,
                     Unsolvable)
from .spectra import (CoefficientEstimate, HStarResult, ProbabilitySpectrum,
                      SpectralSequence, c_thresholds, decrease_coefficient,
                      h_star, increase_coefficient, partition_moments)

_RTOL = 1e-9
_LAMBDA_ATOL = 1e-10


@dataclass(frozen=True)
class KSetProfile:
    """Solved max-entropy profile of a mean-energy shell."""

    seq: SpectralSequence
    h: float
    lam_star: float          # multiplier; +inf on the minimal shell, ic on the linear branch
    sup_entropy: float
    gibbs_exists: bool
    gibbs_spectrum: ProbabilitySpectrum | None
    branch: str              # "minimal" | "gibbs" | "linear" | "finite-cap"


@dataclass(frozen=True)
class VSetProfile:
    """Entropy/capacity profile of a relative-entropy ball."""

    spec: ProbabilitySpectrum
    c: float
    lam_star: float
    sup_entropy: float | None = None
    chi_capacity: float | None = None
    omega_spectrum: ProbabilitySpectrum | None = None
    branch: str = ""


def _mean_energy(seq: SpectralSequence, lam: float, rel_tol: float) -> float:
    pm = partition_moments(seq, lam, rel_tol)
    return pm.e / pm.z


def lambda_star_K(seq: SpectralSequence, h: float, tol: float = 1e-10,
                  rel_tol: float = _RTOL) -> float:
    """Multiplier solving sum h_k exp(-lam h_k) = h sum exp(-lam h_k).

    The mean energy is strictly decreasing in lam, so plain bisection on an
    expanding bracket above the increase coefficient is safe.
    """
    h_m = seq.h_m
    if h <= h_m:
        raise OutOfBranch(f"h={h} does not exceed the minimal level {h_m}")
    if not seq.is_finite:
        hs = h_star(seq, rel_tol)
        if h > hs.value:
            raise OutOfBranch(f"h={h} exceeds h_star={hs.value}; no multiplier exists")
    else:
        mean_all = float(np.mean(seq.params["values"]))
        if h >= mean_all:
            raise OutOfBranch(f"h={h} is at or above the full mean {mean_all}")
    ic = increase_coefficient(seq).value
    lo = ic + 1e-6 * max(1.0, ic)
    f_lo = _mean_energy(seq, lo, rel_tol) - h
    if f_lo <= 0.0:
        # h is within tolerance of the threshold mean; the bracket collapses
        if abs(f_lo) <= tol * max(abs(h), 1.0):
            return lo
        raise OutOfBranch(f"h={h} is above the reachable mean at lam={lo}")
    hi = max(2.0 * lo, 1.0)
    for _ in range(200):
        if _mean_energy(seq, hi, rel_tol) - h < 0.0:
            break
        hi *= 2.0
    else:
        raise Unsolvable("mean energy never dropped below h while expanding the bracket")
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        resid = _mean_energy(seq, mid, rel_tol) - h
        if abs(resid) <= 0.25 * tol * max(abs(h), 1.0):
            return mid
        if resid > 0.0:
            lo = mid
        else:
            hi = mid
        if hi - lo <= 1e-13 * max(1.0, lo):
            break
    lam = 0.5 * (lo + hi)
    resid = _mean_energy(seq, lam, rel_tol) - h
    if abs(resid) > tol * max(abs(h), 1.0):
        raise Unsolvable(f"bisection stalled with residual {resid}")
    return lam


def sup_entropy_K(seq: SpectralSequence, h: float,
                  rel_tol: float = _RTOL) -> KSetProfile:
    """Entropy supremum over the shell {rho : Tr rho H <= h}, with branch.

    Below the threshold h_star the supremum lam* h + log z(lam*) is attained
    by the Boltzmann spectrum; above it the profile continues linearly with
    slope ic and no maximizer.  Finite lists cap at log(dim).
    """
    ic = increase_coefficient(seq)
    if ic.value == math.inf:
        raise UnboundedEntropy("increase coefficient is infinite")
    h_m = seq.h_m
    if h < h_m - 1e-12:
        raise OutOfBranch(f"h={h} is below the minimal level {h_m}: empty shell")
    if h <= h_m + 1e-12:
        d = seq.d_min
        spectrum = ProbabilitySpectrum.from_entries(np.full(d, 1.0 / d))
        return KSetProfile(seq, h, math.inf, math.log(d), True, spectrum, "minimal")
    if seq.is_finite:
        vals = np.asarray(seq.params["values"], dtype=float)
        if h >= float(vals.mean()):
            d = len(vals)
            spectrum = ProbabilitySpectrum.from_entries(np.full(d, 1.0 / d))
            return KSetProfile(seq, h, 0.0, math.log(d), True, spectrum, "finite-cap")
        lam = lambda_star_K(seq, h, rel_tol=rel_tol)
        pm = partition_moments(seq, lam, rel_tol)
        w = np.exp(-lam * vals)
        spectrum = ProbabilitySpectrum.from_entries(w / w.sum())
        return KSetProfile(seq, h, lam, lam * h + math.log(pm.z), True, spectrum, "gibbs")
    hs = h_star(seq, rel_tol)
    if h <= hs.value:
        lam = lambda_star_K(seq, h, rel_tol=rel_tol)
        pm = partition_moments(seq, lam, rel_tol)
        spectrum = ProbabilitySpectrum.from_sequence(seq, lam)
        return KSetProfile(seq, h, lam, lam * h + math.log(pm.z), True, spectrum, "gibbs")
    pm = partition_moments(seq, ic.value, rel_tol)
    value = ic.value * h + math.log(pm.z)
    return KSetProfile(seq, h, ic.value, value, False, None, "linear")


def sup_entropy_K_variational(seq: SpectralSequence, h: float,
                              rel_tol: float = 1e-9) -> float:
    """inf over lam > ic of (lam h + log z(lam)), by 1-D minimization.

    Independent of the branch formulas; used to cross-check sup_entropy_K.
    """
    ic = increase_coefficient(seq).value

    def objective(lam):
        try:
            pm = partition_moments(seq, lam, rel_tol)
        except Divergent:
            return math.inf
        return lam * h + math.log(pm.z)

    lo = ic + 1e-6 * max(1.0, ic)
    hi = max(4.0 * lo, 2.0)
    while objective(hi) < objective(hi / 1.5) and hi < 1e6:
        hi *= 2.0
    res = optimize.minimize_scalar(objective, bounds=(lo, hi), method="bounded",
                                   options={"xatol": 1e-12})
    return float(min(res.fun, objective(lo)))


def gibbs_state_K(seq: SpectralSequence, h: float, n_levels: int | None = None,
                  rel_tol: float = _RTOL) -> ProbabilitySpectrum:
    """Truncated Boltzmann spectrum p_k = exp(-lam* h_k)/z of the shell.

    n_levels defaults to the smallest power of two whose discarded tail mass
    is below 1e-10; an explicit n_levels that leaves more mass is rejected.
    """
    h_m = seq.h_m
    if h <= h_m + 1e-12:
        d = seq.d_min
        return ProbabilitySpectrum.from_entries(np.full(d, 1.0 / d))
    lam = lambda_star_K(seq, h, rel_tol=rel_tol)   # OutOfBranch above h_star
    if seq.is_finite:
        vals = np.asarray(seq.params["values"], dtype=float)
        w = np.exp(-lam * vals)
        return ProbabilitySpectrum.from_entries(w / w.sum())
    pm = partition_moments(seq, lam, rel_tol)

    def tail_mass(n):
        return seq.tail_integral(0, lam, n)[0] / pm.z

    if n_levels is None:
        n_levels = 64
        while tail_mass(n_levels) >= 1e-10:
            n_levels *= 2
            if n_levels > 2**24:
                raise Unsolvable("tail mass will not drop below 1e-10")
    elif tail_mass(n_levels) >= 1e-10:
        raise ValueError(f"n_levels={n_levels} leaves tail mass >= 1e-10")
    ks = np.arange(1, n_levels + 1, dtype=float)
    p = np.exp(-lam * seq.values(ks)) / pm.z
    return ProbabilitySpectrum.from_entries(p / p.sum())


def finite_level_multiplier(seq: SpectralSequence, h: float, n: int,
                            tol: float = 1e-12) -> float:
    """Multiplier of the n-level mean-energy equation; Unsolvable if none."""
    if n < 1:
        raise Unsolvable("need at least one level")
    hk = seq.values(np.arange(1, n + 1, dtype=float))
    if h <= seq.h_m:
        raise Unsolvable(f"h={h} does not exceed the minimal level")
    slack = float(hk.sum() - n * h)
    scale = max(1.0, float(np.abs(hk).max()), abs(h)) * n
    if slack < -1e-14 * scale:
        raise Unsolvable(f"sum of the first {n} levels is below n*h: no positive root")
    if slack <= 1e-14 * scale:
        return 0.0

    def f(lam):
        return float(np.sum((hk - h) * np.exp(-lam * (hk - h))))

    lo, hi = 0.0, 1.0
    for _ in range(200):
        if f(hi) < 0.0:
            break
        hi *= 2.0
    else:
        raise Unsolvable("finite-level residual never became negative")
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if f(mid) > 0.0:
            lo = mid
        else:
            hi = mid
        if hi - lo <= tol * max(1.0, lo):
            break
    return 0.5 * (lo + hi)


def finite_level_state(seq: SpectralSequence, h: float, n: int) -> ProbabilitySpectrum:
    """The n-level Boltzmann state matching mean energy h on its support."""
    lam = finite_level_multiplier(seq, h, n)
    hk = seq.values(np.arange(1, n + 1, dtype=float))
    w = np.exp(-lam * (hk - hk[0]))
    return ProbabilitySpectrum.from_entries(w / w.sum())


# ---------------------------------------------------------------------------
# Relative-entropy balls
# ---------------------------------------------------------------------------


def lambda_star_V(spec: ProbabilitySpectrum, c: float, tol: float = 1e-10,
                  rel_tol: float = _RTOL) -> float:
    """Multiplier with H(sigma_lam || sigma) = c, by bisection on (dc, 1).

    The residual is strictly decreasing in lam, from c_star at dc down to -c
    at lam = 1.
    """
    dc = decrease_coefficient(spec).value
    if dc >= 1.0:
        raise DegenerateState("decrease coefficient is 1: no power-state branch")
    if c < 0:
        raise ValueError("c must be nonnegative")
    if c == 0.0:
        return 1.0
    c_star, _ = c_thresholds(spec, rel_tol)
    if c > c_star:
        raise OutOfBranch(f"c={c} exceeds c_star={c_star}")
    lo = dc + 1e-9
    hi = 1.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if spec.rel_entropy_power(mid, rel_tol) - c > 0.0:
            lo = mid
        else:
            hi = mid
        if hi - lo <= _LAMBDA_ATOL:
            break
    lam = 0.5 * (lo + hi)
    resid = spec.rel_entropy_power(lam, rel_tol) - c
    if abs(resid) > max(tol, 1e-8 * max(c, 1.0)):
        raise Unsolvable(f"power-state bisection stalled with residual {resid}")
    return lam


def sup_entropy_V(spec: ProbabilitySpectrum, c: float,
                  rel_tol: float = _RTOL) -> VSetProfile:
    """Entropy supremum over the ball {rho : H(rho || sigma) <= c}."""
    dc = decrease_coefficient(spec).value
    if dc >= 1.0:
        raise UnboundedEntropy("decrease coefficient is 1: entropy unbounded on the ball")
    if c < 0:
        raise ValueError("c must be nonnegative")
    if c == 0.0:
        return VSetProfile(spec, c, 1.0, sup_entropy=spec.entropy(rel_tol),
                           omega_spectrum=spec, branch="point")
    c_star, _ = c_thresholds(spec, rel_tol)
    if c <= c_star:
        lam = lambda_star_V(spec, c, rel_tol=rel_tol)
        if 1.0 - lam > 1e-6:
            value = (lam * c + math.log(spec.trace_power(lam, rel_tol))) / (1.0 - lam)
        else:
            # entropy of the power state itself; stable as lam -> 1
            value = (lam * spec.mean_neglog(lam, rel_tol)
                     + math.log(spec.trace_power(lam, rel_tol)))
        return VSetProfile(spec, c, lam, sup_entropy=value,
                           omega_spectrum=spec.power(lam), branch="gibbs")
    value = (dc * c + math.log(spec.trace_power(dc, rel_tol))) / (1.0 - dc) \
        if dc > 0 else math.log(spec.trace_power(0.0, rel_tol))
    if spec.is_finite:
        value = min(value, math.log(len(spec.entries)))
    return VSetProfile(spec, c, dc, sup_entropy=value, branch="linear")


def sup_entropy_V_variational(spec: ProbabilitySpectrum, c: float,
                              rel_tol: float = 1e-9) -> float:
    """inf over lam in (dc, 1) of (lam c + log Tr sigma^lam)/(1 - lam)."""
    dc = decrease_coefficient(spec).value

    def objective(lam):
        try:
            return (lam * c + math.log(spec.trace_power(lam, rel_tol))) / (1.0 - lam)
        except Divergent:
            return math.inf

    res = optimize.minimize_scalar(objective, bounds=(dc + 1e-9, 1.0 - 1e-9),
                                   method="bounded", options={"xatol": 1e-12})
    return float(res.fun)
