"""Parametric spectral sequences, partition sums, and tail coefficients.

A spectral sequence models the eigenvalues h_1 <= h_2 <= ... of an unbounded
diagonal operator; a probability spectrum models the eigenvalues of a
diagonal state, possibly of infinite rank via the Boltzmann form
p_k = exp(-beta h_k) / Z.  Everything downstream (max-entropy profiles,
relative-entropy balls, chi-capacities of those balls) reduces to the three
partition moments z = sum exp(-lam h_k), e = sum h_k exp(-lam h_k) and
v = sum h_k^2 exp(-lam h_k), summed adaptively with tail corrections.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .errors import Divergent, InvalidTolerance, ValidationFailed
from .series import N_MAX, SeriesValue, adaptive_sum, quad_tail

KINDS = ("explicit-list", "affine", "power-log", "reciprocal")
Q_MODELS = ("inverse-log", "inverse-linear")

_DEFAULT_RTOL = 1e-9


def _loglog_2x1(u):
    # log(log(2x+1)) expressed through u = log x, overflow-safe
    return np.log(np.logaddexp(np.log(2.0) + u, 0.0))


@dataclass(frozen=True)
class SpectralSequence:
    """Nondecreasing eigenvalue family h_k, k = 1, 2, ...

    kind selects the parametric family:
      * ``explicit-list``: a finite sorted positive list (finite-dimensional);
      * ``affine``: h_k = a k + b, a > 0;
      * ``power-log``: h_k = log((k+1) log^p (k+1));
      * ``reciprocal``: h_k = 1/q_n with the q-model evaluated at n = k + 1
        (the q-sequences start at index 2).
    """

    kind: str
    params: dict = field(default_factory=dict)
    analytic_ic: float | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValidationFailed(f"unknown sequence kind {self.kind!r}")
        if self.kind == "explicit-list":
            vals = np.asarray(self.params["values"], dtype=float)
            if vals.ndim != 1 or len(vals) == 0:
                raise ValidationFailed("explicit list must be a nonempty vector")
            if np.any(np.diff(vals) < 0):
                raise ValidationFailed("explicit list must be sorted nondecreasing")
            if np.any(vals <= 0):
                raise ValidationFailed("explicit list entries must be positive")
        elif self.kind == "affine":
            if self.params["a"] <= 0:
                raise ValidationFailed("affine slope must be positive")
        elif self.kind == "power-log":
            if self.params["p"] < 0:
                raise ValidationFailed("power-log exponent must be nonnegative")
        elif self.kind == "reciprocal":
            if self.params["q_model"] not in Q_MODELS:
                raise ValidationFailed(f"unknown q-model {self.params['q_model']!r}")

    # -- constructors -------------------------------------------------------

    @staticmethod
    def explicit(values) -> "SpectralSequence":
        vals = sorted(float(v) for v in values)
        return SpectralSequence("explicit-list", {"values": vals}, analytic_ic=0.0)

    @staticmethod
    def affine(a: float, b: float) -> "SpectralSequence":
        return SpectralSequence("affine", {"a": float(a), "b": float(b)}, analytic_ic=0.0)

    @staticmethod
    def power_log(p: float) -> "SpectralSequence":
        # exp(-lam h_k) = ((k+1) log^p(k+1))^-lam: summable iff lam > 1
        return SpectralSequence("power-log", {"p": float(p)}, analytic_ic=1.0)

    @staticmethod
    def reciprocal(q_model: str) -> "SpectralSequence":
        ic = {"inverse-log": 1.0, "inverse-linear": 0.0}[q_model]
        return SpectralSequence("reciprocal", {"q_model": q_model}, analytic_ic=ic)

    # -- evaluation ---------------------------------------------------------

    @property
    def is_finite(self) -> bool:
        return self.kind == "explicit-list"

    def values(self, ks) -> np.ndarray:
        """h_k for a float array of indices k >= 1."""
        ks = np.asarray(ks, dtype=float)
        if self.kind == "explicit-list":
            vals = np.asarray(self.params["values"], dtype=float)
            return vals[np.round(ks).astype(int) - 1]
        if self.kind == "affine":
            return self.params["a"] * ks + self.params["b"]
        if self.kind == "power-log":
            p = self.params["p"]
            return np.log(ks + 1.0) + p * np.log(np.log(ks + 1.0))
        n = ks + 1.0  # reciprocal models index from n = 2
        if self.params["q_model"] == "inverse-linear":
            return n
        return np.log(n) + 3.0 * np.log(np.log(2.0 * n + 1.0))

    def q_values(self, ns) -> np.ndarray:
        """q_n for reciprocal families (h = 1/q), at the native index n >= 2."""
        if self.kind != "reciprocal":
            raise ValidationFailed("q_values is defined for reciprocal families only")
        return 1.0 / self.values(np.asarray(ns, dtype=float) - 1.0)

    @property
    def h_m(self) -> float:
        return float(self.values(np.array([1.0]))[0])

    @property
    def d_min(self) -> int:
        if self.kind != "explicit-list":
            return 1  # all parametric families are strictly increasing
        vals = np.asarray(self.params["values"], dtype=float)
        return int(np.sum(np.abs(vals - vals[0]) <= 1e-12 * max(1.0, abs(vals[0]))))

    @property
    def dim(self) -> int | None:
        if self.kind == "explicit-list":
            return len(self.params["values"])
        return None

    # -- tail integrals -----------------------------------------------------

    def tail_integral(self, m: int, lam: float, n: int) -> tuple[float, float]:
        """(integral of h(x)^m exp(-lam h(x)) over [n+1/2, inf), quad error)."""
        x0 = n + 0.5
        if self.kind == "explicit-list":
            return 0.0, 0.0
        if self.kind == "affine" or (
            self.kind == "reciprocal" and self.params["q_model"] == "inverse-linear"
        ):
            if self.kind == "affine":
                a, b = self.params["a"], self.params["b"]
            else:
                a, b = 1.0, 1.0  # h(x) = x + 1
            t0 = a * x0 + b
            w = math.exp(-lam * t0) / (a * lam)
            if m == 0:
                return w, 0.0
            if m == 1:
                return (t0 + 1.0 / lam) * w, 0.0
            return (t0 * t0 + 2.0 * t0 / lam + 2.0 / lam**2) * w, 0.0
        if self.kind == "power-log":
            p = self.params["p"]
            u0 = math.log(x0 + 1.0)

            def integrand(u):
                h = u + p * np.log(u)
                return h**m * np.exp((1.0 - lam) * u - lam * p * np.log(u))

            return quad_tail(integrand, u0)
        # reciprocal inverse-log: substitute u = log n, n = x + 1
        u0 = math.log(x0 + 1.0)

        def integrand(u):
            big_l = np.logaddexp(np.log(2.0) + u, 0.0)
            h = u + 3.0 * np.log(big_l)
            return h**m * np.exp((1.0 - lam) * u - 3.0 * lam * np.log(big_l))

        return quad_tail(integrand, u0)

    # -- serialization ------------------------------------------------------

    def to_json(self) -> str:
        return json.dumps(
            {"kind": self.kind, "params": self.params, "analytic_ic": self.analytic_ic},
            sort_keys=True,
        )

    @staticmethod
    def from_dict(rec: dict) -> "SpectralSequence":
        return SpectralSequence(
            rec["kind"], dict(rec["params"]), rec.get("analytic_ic")
        )

    @staticmethod
    def from_json(text: str) -> "SpectralSequence":
        return SpectralSequence.from_dict(json.loads(text))


class PartitionReport(NamedTuple):
    """Adaptively truncated partition moments at a fixed multiplier."""

    z: float
    e: float
    v: float
    n_used: int
    tail_bound: float


class CoefficientEstimate(NamedTuple):
    """A tail coefficient together with whether it is exact."""

    value: float
    exact: bool
    method: str


def _moment_sum(seq: SpectralSequence, m: int, lam: float, rel_tol: float,
                n_start: int) -> SeriesValue:
    def term(ks):
        h = seq.values(ks)
        return h**m * np.exp(-lam * h)

    def tail(n):
        return seq.tail_integral(m, lam, n)

    return adaptive_sum(term, tail, rel_tol, n_start=n_start)


_PM_CACHE: dict[tuple, PartitionReport] = {}
_PM_CACHE_MAX = 65536


def partition_moments(seq: SpectralSequence, lam: float,
                      rel_tol: float = _DEFAULT_RTOL) -> PartitionReport:
    """Partition sum z, energy sum e and second moment v at multiplier lam.

    The truncation index doubles until the corrected-tail error bound of each
    moment falls below rel_tol * z.  When z itself cannot be certified the
    series is declared Divergent (lam is at or below the increase
    coefficient); a divergent e or v with finite z is reported as +inf.
    """
    key = (seq.to_json(), float(lam), float(rel_tol))
    cached = _PM_CACHE.get(key)
    if cached is not None:
        return cached
    report = _partition_moments_uncached(seq, lam, rel_tol)
    if len(_PM_CACHE) >= _PM_CACHE_MAX:
        _PM_CACHE.clear()
    _PM_CACHE[key] = report
    return report


def _partition_moments_uncached(seq: SpectralSequence, lam: float,
                                rel_tol: float) -> PartitionReport:
    if lam <= 0:
        raise InvalidTolerance("lam must be positive")
    if not 0.0 < rel_tol <= 1e-2:
        raise InvalidTolerance(f"rel_tol must be in (0, 1e-2], got {rel_tol}")
    if seq.is_finite:
        h = np.asarray(seq.params["values"], dtype=float)
        w = np.exp(-lam * h)
        return PartitionReport(float(w.sum()), float((h * w).sum()),
                               float((h * h * w).sum()), len(h), 0.0)
    if seq.analytic_ic is not None and lam < seq.analytic_ic - 1e-12:
        raise Divergent(f"lam={lam} below the increase coefficient {seq.analytic_ic}")

    # start beyond the hump of h^2 exp(-lam h) so tail terms decrease convexly
    n0 = 1024
    while seq.values(np.array([float(n0)]))[0] < 4.0 / lam:
        n0 *= 2
        if n0 > N_MAX:
            raise Divergent("sequence grows too slowly to clear the summand hump")

    sv_z = _moment_sum(seq, 0, lam, rel_tol, n0)

    results = [sv_z]
    for m in (1, 2):
        def term(ks, m=m):
            h = seq.values(ks)
            return h**m * np.exp(-lam * h)

        def tail(n, m=m):
            return seq.tail_integral(m, lam, n)

        try:
            sv = adaptive_sum(term, tail, rel_tol, n_start=n0,
                              scale_fn=lambda total: sv_z.value)
        except Divergent:
            sv = None
        results.append(sv)

    e_val = results[1].value if results[1] is not None else math.inf
    v_val = results[2].value if results[2] is not None else math.inf
    n_used = max(sv.n_used for sv in results if sv is not None)
    bound = max(sv.error_bound for sv in results if sv is not None)
    return PartitionReport(sv_z.value, e_val, v_val, n_used, bound)


def increase_coefficient(seq: SpectralSequence, k_max: int = 10**6) -> CoefficientEstimate:
    """Increase coefficient ic = inf{lam > 0 : sum exp(-lam h_k) < inf}.

    Parametric families carry the exact value; otherwise the (slowly
    converging) limsup estimator sup_{k in [k_max/2, k_max]} log(k)/h_k is
    returned, flagged as inexact.
    """
    if seq.is_finite:
        return CoefficientEstimate(0.0, True, "finite")
    if seq.analytic_ic is not None:
        return CoefficientEstimate(float(seq.analytic_ic), True, "analytic")
    if k_max < 10**3:
        raise InvalidTolerance("k_max must be at least 1e3")
    ks = np.unique(np.round(np.geomspace(k_max // 2, k_max, 4096)).astype(float))
    h = seq.values(ks)
    ratios = np.log(ks[h > 0]) / h[h > 0]
    val = float(ratios.max()) if len(ratios) else math.inf
    return CoefficientEstimate(max(val, 0.0), False, "limsup")


def increase_coefficient_probe(seq: SpectralSequence, lam_hi: float = 64.0,
                               iters: int = 60) -> CoefficientEstimate:
    """Numerical ic estimate by bisecting the series-convergence predicate.

    Convergence at a trial multiplier is judged from the tail integral on
    [n0, inf); unlike the limsup estimator this locates log-type boundaries
    (where log(k)/h_k creeps toward its limit) to high accuracy.
    """
    if seq.is_finite:
        return CoefficientEstimate(0.0, True, "finite")

    def converges(lam: float) -> bool:
        val, err = seq.tail_integral(0, lam, 4096)
        return np.isfinite(val) and err <= max(1e-3 * val, 1e-9)

    if converges(1e-9):
        return CoefficientEstimate(0.0, False, "probe")
    if not converges(lam_hi):
        return CoefficientEstimate(math.inf, False, "probe")
    lo, hi = 1e-9, lam_hi
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        if converges(mid):
            hi = mid
        else:
            lo = mid
    return CoefficientEstimate(hi, False, "probe")


class HStarResult(NamedTuple):
    """Threshold mean energy h_* with the branch that produced it."""

    value: float
    branch: str  # "finite" | "divergent" | "finite-dimensional"


def h_star(seq: SpectralSequence, rel_tol: float = _DEFAULT_RTOL) -> HStarResult:
    """Mean energy of the boundary Boltzmann weight exp(-ic * H).

    Returns e(ic)/z(ic) when the partition sum converges at the increase
    coefficient itself, +inf when it does not.  Finite lists return +inf with
    a convention flag: their max-entropy profile is capped at log(dim) and
    has no linear branch.
    """
    if seq.is_finite:
        return HStarResult(math.inf, "finite-dimensional")
    ic = increase_coefficient(seq).value
    if ic == math.inf:
        return HStarResult(math.inf, "divergent")
    if ic <= 0.0:
        # z(0) = sum of ones diverges for any infinite sequence
        return HStarResult(math.inf, "divergent")
    try:
        pm = partition_moments(seq, ic, rel_tol)
    except Divergent:
        return HStarResult(math.inf, "divergent")
    if not np.isfinite(pm.e):
        return HStarResult(math.inf, "divergent")
    return HStarResult(pm.e / pm.z, "finite")


# ---------------------------------------------------------------------------
# Probability spectra
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ProbabilitySpectrum:
    """Nonincreasing eigenvalues of a diagonal state.

    Either a finite vector of entries summing to one, or an infinite-rank
    tail model p_k = exp(-beta h_k) / Z built on a spectral sequence, with
    log_norm = log Z cached at construction.
    """

    entries: np.ndarray | None = None
    seq: SpectralSequence | None = None
    beta: float = 1.0
    log_norm: float = 0.0
    analytic_dc: float | None = None
    dropped_rank: int = 0

    @staticmethod
    def from_entries(values, analytic_dc: float | None = None) -> "ProbabilitySpectrum":
        vals = np.asarray(values, dtype=float)
        dropped = int(np.sum(vals <= 0.0))
        vals = np.sort(vals[vals > 0.0])[::-1]
        if len(vals) == 0:
            raise ValidationFailed("spectrum has no positive entries")
        if abs(vals.sum() - 1.0) > 1e-12:
            raise ValidationFailed(f"entries sum to {vals.sum()!r}, not 1")
        return ProbabilitySpectrum(entries=vals, analytic_dc=analytic_dc,
                                   dropped_rank=dropped)

    @staticmethod
    def from_sequence(seq: SpectralSequence, beta: float = 1.0,
                      rel_tol: float = 1e-10) -> "ProbabilitySpectrum":
        if seq.is_finite:
            h = np.asarray(seq.params["values"], dtype=float)
            w = np.exp(-beta * h)
            return ProbabilitySpectrum.from_entries(w / w.sum())
        if beta <= 0:
            raise ValidationFailed("beta must be positive")
        pm = partition_moments(seq, beta, rel_tol)
        dc = None
        if seq.analytic_ic is not None:
            dc = min(seq.analytic_ic / beta, 1.0)
        return ProbabilitySpectrum(seq=seq, beta=beta, log_norm=math.log(pm.z),
                                   analytic_dc=dc)

    @property
    def is_finite(self) -> bool:
        return self.entries is not None

    @property
    def rank(self) -> float:
        return len(self.entries) if self.is_finite else math.inf

    def head(self, n: int) -> np.ndarray:
        """The n largest probabilities."""
        if self.is_finite:
            return self.entries[:n].copy()
        h = self.seq.values(np.arange(1, n + 1, dtype=float))
        return np.exp(-self.beta * h - self.log_norm)

    # -- moment machinery ---------------------------------------------------

    def trace_power(self, lam: float, rel_tol: float = _DEFAULT_RTOL) -> float:
        """Tr sigma^lam; raises Divergent below the decrease coefficient."""
        if self.is_finite:
            return float(np.sum(self.entries**lam))
        pm = partition_moments(self.seq, self.beta * lam, rel_tol)
        return pm.z * math.exp(-lam * self.log_norm)

    def mean_neglog(self, lam: float, rel_tol: float = _DEFAULT_RTOL) -> float:
        """Tr sigma^lam (-log sigma) / Tr sigma^lam (may be +inf)."""
        if self.is_finite:
            w = self.entries**lam
            return float(np.sum(w * (-np.log(self.entries))) / w.sum())
        pm = partition_moments(self.seq, self.beta * lam, rel_tol)
        if not np.isfinite(pm.e):
            return math.inf
        return self.beta * pm.e / pm.z + self.log_norm

    def entropy(self, rel_tol: float = _DEFAULT_RTOL) -> float:
        return self.mean_neglog(1.0, rel_tol)

    def rel_entropy_power(self, lam: float, rel_tol: float = _DEFAULT_RTOL) -> float:
        """H(sigma_lam || sigma) for sigma_lam = sigma^lam / Tr sigma^lam."""
        a = self.trace_power(lam, rel_tol)
        b_over_a = self.mean_neglog(lam, rel_tol)
        return (1.0 - lam) * b_over_a - math.log(a)

    def power(self, lam: float, rel_tol: float = 1e-10) -> "ProbabilitySpectrum":
        """The normalized power state sigma^lam / Tr sigma^lam."""
        if self.is_finite:
            w = self.entries**lam
            return ProbabilitySpectrum.from_entries(w / w.sum())
        return ProbabilitySpectrum.from_sequence(self.seq, self.beta * lam, rel_tol)

    # -- serialization ------------------------------------------------------

    def to_json(self) -> str:
        if self.is_finite:
            return json.dumps({"entries": self.entries.tolist()})
        return json.dumps(
            {"sequence": json.loads(self.seq.to_json()), "beta": self.beta},
            sort_keys=True,
        )

    @staticmethod
    def from_dict(rec: dict) -> "ProbabilitySpectrum":
        if "entries" in rec:
            return ProbabilitySpectrum.from_entries(rec["entries"])
        seq = SpectralSequence.from_dict(rec["sequence"])
        return ProbabilitySpectrum.from_sequence(seq, rec.get("beta", 1.0))

    @staticmethod
    def from_json(text: str) -> "ProbabilitySpectrum":
        return ProbabilitySpectrum.from_dict(json.loads(text))


def decrease_coefficient(spec: ProbabilitySpectrum, k_max: int = 10**6) -> CoefficientEstimate:
    """dc(sigma) = inf{lam > 0 : Tr sigma^lam < inf}, in [0, 1].

    Equals the increase coefficient of -log sigma; finite spectra have dc 0.
    """
    if spec.analytic_dc is not None:
        return CoefficientEstimate(float(spec.analytic_dc), True, "analytic")
    if spec.is_finite:
        return CoefficientEstimate(0.0, True, "finite")
    ic = increase_coefficient(spec.seq, k_max)
    if ic.exact:
        return CoefficientEstimate(min(ic.value / spec.beta, 1.0), True, ic.method)
    # -log p_k = beta h_k + log Z; the constant matters at finite k_max
    ks = np.unique(np.round(np.geomspace(max(k_max // 2, 2), k_max, 4096)).astype(float))
    neglog = spec.beta * spec.seq.values(ks) + spec.log_norm
    ratios = np.log(ks[neglog > 0]) / neglog[neglog > 0]
    val = float(ratios.max()) if len(ratios) else 1.0
    return CoefficientEstimate(float(np.clip(val, 0.0, 1.0)), False, "limsup")


def c_thresholds(spec: ProbabilitySpectrum,
                 rel_tol: float = _DEFAULT_RTOL) -> tuple[float, float]:
    """Critical radii of the relative-entropy ball analysis.

    c_star = H(sigma_dc || sigma) bounds the Gibbs branch; c_upper =
    Tr sigma^dc (-log sigma) / Tr sigma^dc bounds the chi-capacity Gibbs
    branch.  Both are +inf when Tr sigma^dc diverges; for dc < 1 they satisfy
    c_upper = (c_star + log Tr sigma^dc) / (1 - dc).
    """
    dc = decrease_coefficient(spec).value
    if spec.is_finite:
        d = len(spec.entries)
        neglog = -np.log(spec.entries)
        c_upper = float(neglog.mean())
        c_star = c_upper - math.log(d)
        return c_star, c_upper
    try:
        a = spec.trace_power(dc, rel_tol) if dc > 0 else math.inf
    except Divergent:
        return math.inf, math.inf
    if not np.isfinite(a):
        return math.inf, math.inf
    c_upper = spec.mean_neglog(dc, rel_tol)
    if not np.isfinite(c_upper):
        return math.inf, math.inf
    c_star = (1.0 - dc) * c_upper - math.log(a)
    return c_star, c_upper
