"""The renorming Orlicz function M and the Luxemburg norm it induces.

M is defined by M(t) = int_0^|t| phi(u) (|t| - u) du with curvature
profile phi(u) = 2 on [0, 1] and phi(u) = 8/(1+u)^2 beyond.  Closed
forms are used everywhere in production:

    M(t)  = t^2                                   for |t| <= 1
    M(t)  = 6|t| - 5 - 8 log((1 + |t|)/2)         for |t| >  1
    M'(t) = 2t on [-1, 1],  sign(t) (6 - 8/(1+|t|)) beyond
    M''(t) = phi(|t|)

The defining integral is retained as an adaptive-quadrature oracle
(`m_defining_integral`) and the closed form is validated against it
(`validate_closed_form`).  Since M(t)/|t| increases to 6, the Luxemburg
norm ||f|| = inf {lam > 0 : int M(f/lam) <= 1} satisfies

    ||f||_1 <= ||f|| <= 6 ||f||_1,

which gives the bisection bracket used by the solver.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad

__all__ = [
    "LIMIT_SLOPE",
    "OrliczEval",
    "NormSolution",
    "NormSolverError",
    "phi",
    "m_value",
    "m_prime",
    "m_second",
    "orlicz_m",
    "m_defining_integral",
    "validate_closed_form",
    "modular",
    "luxemburg_norm",
    "luxemburg_lambda_batch",
    "norm_equivalence_constants",
]

# lim M'(t) = int_0^inf phi = 2 + 4
LIMIT_SLOPE = 6.0


class NormSolverError(RuntimeError):
    """Internal failure of the Luxemburg bisection (invalid bracket)."""


@dataclass(frozen=True)
class OrliczEval:
    """Value and first two derivatives of M at a point."""

    t: float
    value: float
    first_derivative: float
    second_derivative: float


@dataclass(frozen=True)
class NormSolution:
    """Solution of the Luxemburg norm equation int M(f/lam) = 1.

    lam            -- the norm (0 for the zero function, by convention)
    modular_at_lambda -- int M(f/lam) at the returned lam
    iterations     -- bisection steps used
    tolerance      -- residual tolerance the solve was run at
    """

    lam: float
    modular_at_lambda: float
    iterations: int
    tolerance: float


def _as_float_or_array(out):
    return float(out) if np.ndim(out) == 0 else out


def phi(t):
    """Curvature profile: 2 on [0, 1], 8/(1+|t|)^2 beyond; even, continuous."""
    a = np.abs(np.asarray(t, dtype=float))
    out = np.where(a <= 1.0, 2.0, 8.0 / np.square(1.0 + a))
    return _as_float_or_array(out)


def m_value(t):
    """M(t), vectorized."""
    a = np.abs(np.asarray(t, dtype=float))
    out = np.where(a <= 1.0, a * a,
                   6.0 * a - 5.0 - 8.0 * np.log(0.5 * (1.0 + a)))
    return _as_float_or_array(out)


def m_prime(t):
    """M'(t), vectorized; odd function, nondecreasing, bounded by 6."""
    x = np.asarray(t, dtype=float)
    a = np.abs(x)
    mag = np.where(a <= 1.0, 2.0 * a, 6.0 - 8.0 / (1.0 + a))
    out = np.sign(x) * mag
    return _as_float_or_array(out)


def m_second(t):
    """M''(t) = phi(|t|)."""
    return phi(t)


def orlicz_m(t: float) -> OrliczEval:
    """Evaluate M and its derivatives at a single point."""
    t = float(t)
    return OrliczEval(t, m_value(t), m_prime(t), m_second(t))


def m_defining_integral(t: float, epsabs: float = 1e-13,
                        epsrel: float = 1e-13) -> float:
    """Adaptive quadrature of int_0^|t| phi(u)(|t|-u) du.

    Independent oracle for the closed form; the integrand kink at u = 1
    is handled by splitting the range there.
    """
    a = abs(float(t))
    if a == 0.0:
        return 0.0
    if a <= 1.0:
        val, _ = quad(lambda u: 2.0 * (a - u), 0.0, a,
                      epsabs=epsabs, epsrel=epsrel)
        return val
    v1, _ = quad(lambda u: 2.0 * (a - u), 0.0, 1.0,
                 epsabs=epsabs, epsrel=epsrel)
    v2, _ = quad(lambda u: 8.0 * (a - u) / (1.0 + u) ** 2, 1.0, a,
                 epsabs=epsabs, epsrel=epsrel)
    return v1 + v2


def validate_closed_form(t_grid) -> float:
    """Max of |closed - quadrature| / max(1, closed) over a grid."""
    worst = 0.0
    for t in np.asarray(t_grid, dtype=float):
        closed = m_value(t)
        ref = m_defining_integral(t)
        worst = max(worst, abs(closed - ref) / max(1.0, closed))
    return worst


def modular(f, lam: float) -> float:
    """int_0^1 M(f(x)/lam) dx; exact for step functions, quadrature for
    analytic weights (which raise if their tolerance is not met)."""
    if lam <= 0.0:
        raise ValueError("lam must be positive")
    return f.modular(float(lam))


def luxemburg_norm(f, tolerance: float = 1e-10,
                   max_iter: int = 200) -> NormSolution:
    """Solve the Luxemburg norm of f by bisection on [||f||_1, 6 ||f||_1].

    The modular is strictly decreasing in lam for f != 0 and equals 1
    exactly at the norm, so bisection on the modular residual is exact up
    to `tolerance`.  The zero function returns lam = 0 directly.
    """
    if tolerance <= 0.0:
        raise ValueError("tolerance must be positive")
    l1 = f.l1_norm()
    if l1 == 0.0:
        return NormSolution(0.0, 0.0, 0, tolerance)
    lo, hi = l1, LIMIT_SLOPE * l1
    mod_lo = f.modular(lo)
    if mod_lo <= 1.0 + tolerance:
        # Jensen gives modular(||f||_1) >= 1; equality means |f| is constant.
        return NormSolution(lo, mod_lo, 0, tolerance)
    mod_hi = f.modular(hi)
    if mod_hi >= 1.0 - tolerance:
        return NormSolution(hi, mod_hi, 0, tolerance)
    if not (mod_lo > 1.0 > mod_hi):
        raise NormSolverError(
            f"invalid bracket: modular({lo})={mod_lo}, modular({hi})={mod_hi}")
    mid, mod = lo, mod_lo
    for it in range(1, max_iter + 1):
        mid = 0.5 * (lo + hi)
        mod = f.modular(mid)
        if abs(mod - 1.0) <= tolerance:
            return NormSolution(mid, mod, it, tolerance)
        if mod > 1.0:
            lo = mid
        else:
            hi = mid
    raise NormSolverError("luxemburg bisection did not converge")


def luxemburg_lambda_batch(values: np.ndarray, tolerance: float = 1e-10,
                           max_iter: int = 200) -> np.ndarray:
    """Row-wise Luxemburg norms of step functions on equal-measure cells.

    `values[i, j]` is the value of function i on cell j.  Rows that are
    identically zero get norm 0.
    """
    V = np.abs(np.asarray(values, dtype=float))
    if V.ndim != 2:
        raise ValueError("values must be a 2-d matrix (rows = functions)")
    l1 = V.mean(axis=1)
    nz = l1 > 0.0
    safe = np.where(nz, l1, 1.0)

    def mod(lam):
        return m_value(V / lam[:, None]).mean(axis=1)

    lo = safe.copy()
    hi = LIMIT_SLOPE * safe
    lam = np.zeros_like(l1)
    flo = mod(lo)
    fhi = mod(hi)
    at_lo = nz & (flo <= 1.0 + tolerance)
    at_hi = nz & ~at_lo & (fhi >= 1.0 - tolerance)
    lam[at_lo] = lo[at_lo]
    lam[at_hi] = hi[at_hi]
    active = nz & ~at_lo & ~at_hi
    mid = np.ones_like(l1)
    for _ in range(max_iter):
        if not np.any(active):
            break
        mid = np.where(active, 0.5 * (lo + hi), 1.0)
        f = mod(mid)
        hit = active & (np.abs(f - 1.0) <= tolerance)
        lam[hit] = mid[hit]
        active &= ~hit
        go_lo = active & (f > 1.0)
        lo = np.where(go_lo, mid, lo)
        hi = np.where(active & ~go_lo, mid, hi)
    if np.any(active):
        raise NormSolverError("batched luxemburg bisection did not converge")
    return lam


_constants_certified = False


def norm_equivalence_constants(grid_points: int = 4096) -> tuple[float, float]:
    """Certified constants (k, C) = (1/6, 6).

    C = lim M'(t) = 6 bounds M(t) <= C|t|, hence ||f|| <= 6 ||f||_1 and
    k ||f|| <= ||f||_1 with k = 1/6.  Before the first return, the bound
    M(t) <= 6t and the monotone approach of M(t)/t to 6 are checked on a
    dense grid reaching t = 10^3.
    """
    global _constants_certified
    if not _constants_certified:
        t = np.concatenate([
            np.linspace(1e-9, 1.0, grid_points // 2),
            np.geomspace(1.0, 1e3, grid_points - grid_points // 2),
        ])
        vals = m_value(t)
        if not np.all(vals <= LIMIT_SLOPE * t):
            raise AssertionError("certification failed: M(t) <= 6t violated")
        ratios = vals / t
        if not np.all(np.diff(ratios) >= -1e-12):
            raise AssertionError("certification failed: M(t)/t not nondecreasing")
        if not (ratios[-1] <= LIMIT_SLOPE and ratios[-1] > LIMIT_SLOPE - 0.1):
            raise AssertionError("certification failed: M(t)/t does not approach 6")
        _constants_certified = True
    return 1.0 / LIMIT_SLOPE, LIMIT_SLOPE
