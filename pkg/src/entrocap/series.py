"""Adaptive summation of slowly convergent positive series.

Series with eventually decreasing convex terms are summed as a partial sum
plus a midpoint-rule tail integral.  For such terms the correction error is
bounded by the first-derivative envelope |f'(n+1/2)|/24, which itself is
bounded by the last observed term decrement, so very slow tails (e.g.
1/(k log^2 k)) are still summable to near machine precision at desk scale.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
from scipy import integrate

from .errors import Divergent, InvalidTolerance

N_MAX = 10_000_000
_ERR_SAFETY = 2.0
_HUGE = 1e200


@dataclass(frozen=True)
class SeriesValue:
    """Sum estimate with the truncation index and a bound on its error."""

    value: float
    n_used: int
    error_bound: float
    partial: float
    tail: float


def quad_tail(integrand, lo) -> tuple[float, float]:
    """Integrate a decaying tail on [lo, inf); (inf, inf) when it diverges."""
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        try:
            val, err = integrate.quad(integrand, lo, np.inf, limit=400,
                                      epsabs=1e-14, epsrel=1e-12)
        except Exception:
            return np.inf, np.inf
    # quad on a divergent integrand tends to return a finite value whose
    # reported error stalls far above the requested tolerance; treat any
    # integral it cannot certify to 1e-6 relative as unusable
    if not np.isfinite(val) or abs(val) > _HUGE or err > max(1e-6 * abs(val), 1e-13):
        return np.inf, np.inf
    return val, err


def adaptive_sum(
    term_fn,
    tail_fn,
    rel_tol: float,
    n_start: int = 1024,
    n_max: int = N_MAX,
    scale_fn=None,
) -> SeriesValue:
    """Sum ``term_fn(k)`` over k >= 1 with a midpoint tail correction.

    term_fn maps an integer array to term values; tail_fn(n) returns
    (integral of the term over [n + 1/2, inf), quadrature error).  The
    truncation index doubles until the corrected sum's error bound drops
    below rel_tol times the reporting scale (the sum itself by default).
    Raises Divergent when the bound cannot be met before ``n_max``.
    """
    if not 0.0 < rel_tol <= 1e-2:
        raise InvalidTolerance(f"rel_tol must be in (0, 1e-2], got {rel_tol}")
    n = min(n_start, n_max)
    partial = 0.0
    lo = 1
    last_two = (np.nan, np.nan)
    inf_tails = 0
    while True:
        ks = np.arange(lo, n + 1, dtype=float)
        vals = term_fn(ks)
        partial += float(vals.sum())
        if len(vals) >= 2:
            last_two = (float(vals[-2]), float(vals[-1]))
        elif len(vals) == 1:
            last_two = (last_two[1], float(vals[-1]))
        tail, quad_err = tail_fn(n)
        decrement = last_two[0] - last_two[1]
        if np.isfinite(tail) and decrement >= 0.0:
            inf_tails = 0
            bound = _ERR_SAFETY * decrement / 24.0 + quad_err
            total = partial + tail
            scale = abs(total) if scale_fn is None else scale_fn(total)
            if bound <= rel_tol * max(scale, 1e-300):
                return SeriesValue(total, n, bound, partial, tail)
        elif not np.isfinite(tail) and decrement >= 0.0:
            # terms already decrease, so an infinite minorant integral on
            # [n+1/2, inf) proves the series itself diverges
            inf_tails += 1
            if inf_tails >= 2:
                raise Divergent("tail integral is infinite in the monotone regime")
        if partial > _HUGE:
            raise Divergent("partial sums exceed any plausible magnitude")
        if n >= n_max:
            raise Divergent(
                f"series did not satisfy rel_tol={rel_tol} within {n_max} terms"
            )
        lo = n + 1
        n = min(2 * n, n_max)


def capped_partial_sum(term_fn, n_cap: int = N_MAX, block: int = 1_000_000) -> float:
    """Plain partial sum of term_fn(k) for k = 1..n_cap, no tail correction.

    Reproduces what a direct desk computation of a boundary series yields at
    the truncation cap.
    """
    total = 0.0
    lo = 1
    while lo <= n_cap:
        hi = min(lo + block - 1, n_cap)
        ks = np.arange(lo, hi + 1, dtype=float)
        total += float(term_fn(ks).sum())
        lo = hi + 1
    return total
