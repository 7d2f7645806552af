"""Concrete model of L^1([0,1], Lebesgue measure).

Three immutable function representations:

* `DyadicStepFunction` -- constant on the 2^m dyadic cells of level m;
  all integrals are exact finite sums.
* `AnalyticWeight` -- nonnegative with an exact closed-form
  antiderivative; integrals against it are antiderivative differences,
  never quadrature over the (possibly singular) graph.
* `ProductFunction` -- (step function) x (weight); per-cell exact.

Every representation implements `l1_norm`, `integral`, `distribution`,
`tail_integral` and `modular`, so the Luxemburg solver and the subspace
estimators are representation-agnostic.  `tail_integral(f, t)` computes
int max(|f|-t, 0), which equals the tail integral int_t^inf mu(|f|>u) du
of the distribution function.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy.integrate import quad

from . import orlicz
from ._solvers import bisect_batch, bisect_scalar

__all__ = [
    "DyadicStepFunction",
    "AnalyticWeight",
    "ProductFunction",
    "DistributionCurve",
    "NonIntegrableError",
    "rademacher",
    "conditional_expectation",
    "approximation_error",
    "combine_steps",
    "l1_norm",
    "distribution",
    "tail_integral",
    "distribution_curve",
    "log_weight",
]


class NonIntegrableError(RuntimeError):
    """Quadrature against a weight failed to reach the requested tolerance."""


# ---------------------------------------------------------------------------
# Dyadic step functions


@dataclass(frozen=True)
class DyadicStepFunction:
    """Real function on [0,1) constant on dyadic cells of one level.

    values[j] is the value on [j 2^-m, (j+1) 2^-m).
    """

    level: int
    values: np.ndarray

    def __post_init__(self):
        if self.level < 0:
            raise ValueError("level must be >= 0")
        v = np.array(self.values, dtype=float)
        if v.shape != (2 ** self.level,):
            raise ValueError(
                f"level {self.level} needs {2 ** self.level} values, got {v.shape}")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @property
    def cell_measure(self) -> float:
        return 2.0 ** -self.level

    def refine(self, level: int) -> "DyadicStepFunction":
        """Same function at a finer level (values duplicated)."""
        if level < self.level:
            raise ValueError("refinement cannot decrease the level")
        if level == self.level:
            return self
        return DyadicStepFunction(level, np.repeat(self.values, 2 ** (level - self.level)))

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        idx = np.clip((x * 2 ** self.level).astype(int), 0, 2 ** self.level - 1)
        out = self.values[idx]
        return float(out) if np.ndim(out) == 0 else out

    def l1_norm(self) -> float:
        return float(np.abs(self.values).mean())

    def integral(self) -> float:
        return float(self.values.mean())

    def distribution(self, t: float) -> float:
        """mu(|f| > t), strict inequality."""
        if t < 0:
            raise ValueError("t must be >= 0")
        return float(np.mean(np.abs(self.values) > t))

    def tail_integral(self, t: float) -> float:
        if t < 0:
            raise ValueError("t must be >= 0")
        return float(np.maximum(np.abs(self.values) - t, 0.0).mean())

    def modular(self, lam: float) -> float:
        return float(orlicz.m_value(self.values / lam).mean())

    def scaled(self, c: float) -> "DyadicStepFunction":
        return DyadicStepFunction(self.level, c * self.values)

    def __neg__(self):
        return self.scaled(-1.0)

    def __add__(self, other: "DyadicStepFunction") -> "DyadicStepFunction":
        lvl = max(self.level, other.level)
        return DyadicStepFunction(
            lvl, self.refine(lvl).values + other.refine(lvl).values)

    def __sub__(self, other):
        return self + (-other)


def combine_steps(basis: list[DyadicStepFunction], coeffs) -> DyadicStepFunction:
    """Linear combination sum_i coeffs[i] * basis[i]."""
    coeffs = np.asarray(coeffs, dtype=float)
    if len(basis) != coeffs.shape[0]:
        raise ValueError("coefficient count must match basis size")
    lvl = max(g.level for g in basis)
    mat = np.stack([g.refine(lvl).values for g in basis])
    return DyadicStepFunction(lvl, coeffs @ mat)


def rademacher(n: int) -> DyadicStepFunction:
    """Level-n sign function: +1 on even cells, -1 on odd cells.

    Matches sign(sin(2^n pi x)) off the null set of cell boundaries; the
    value on a cell is +1 or -1 according to the last binary digit of
    the cell index.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    vals = np.where(np.arange(2 ** n) % 2 == 0, 1.0, -1.0)
    return DyadicStepFunction(n, vals)


# ---------------------------------------------------------------------------
# Analytic weights


@dataclass(frozen=True)
class AnalyticWeight:
    """Nonnegative integrable function with an exact antiderivative.

    `antiderivative` is nondecreasing with antiderivative(0) = 0.  A
    weight may be singular at 0 (integrable singularity); integration
    near 0 then always goes through the antiderivative.

    The optional log-scale hooks evaluate quantities at x = e^u without
    forming x, which keeps x far below the float underflow threshold
    representable; they are required by the deep splitting construction.
    """

    kind: str                       # "log_singular" | "user_defined"
    evaluate: Callable
    antiderivative: Callable
    total_mass: float
    label: str = "weight"
    breakpoint: Optional[float] = None    # interior minimum of the graph
    singular_at_zero: bool = False
    antiderivative_inverse: Optional[Callable] = None
    # log-scale hooks (u = log x):
    mass_below_log: Optional[Callable] = None      # u -> antiderivative(e^u)
    # (u, d) -> antiderivative(e^(u+d)) - antiderivative(e^u), cancellation-free
    mass_between_log_delta: Optional[Callable] = None
    x_times_value_log: Optional[Callable] = None   # u -> e^u * f(e^u)
    log_value_at_log: Optional[Callable] = None    # u -> log f(e^u)
    log_value_of_inverse_mass: Optional[Callable] = None  # m -> log f(X(m))

    # -- basic integrals ----------------------------------------------------

    def l1_norm(self) -> float:
        return self.total_mass

    def integral(self) -> float:
        return self.total_mass

    def mass_between(self, a: float, b: float) -> float:
        return float(self.antiderivative(b) - self.antiderivative(a))

    @property
    def min_value(self) -> float:
        if self.breakpoint is not None:
            return float(self.evaluate(self.breakpoint))
        return float(min(self.evaluate(1.0), self.evaluate(1e-12)))

    @property
    def right_value(self) -> float:
        return float(self.evaluate(1.0))

    def _log_value(self, u):
        if self.log_value_at_log is not None:
            return self.log_value_at_log(u)
        return np.log(self.evaluate(np.exp(u)))

    # -- superlevel sets ----------------------------------------------------

    def inverse_decreasing_batch(self, theta: np.ndarray) -> np.ndarray:
        """Solve f(x) = theta on the decreasing branch (0, breakpoint].

        Requires theta >= min_value elementwise and a weight that is
        unbounded (or at least above theta) near 0.
        """
        theta = np.asarray(theta, dtype=float)
        if self.breakpoint is None:
            raise ValueError("weight has no decreasing branch description")
        log_theta = np.log(theta)
        u_hi = np.full(theta.shape, math.log(self.breakpoint))
        # push u_lo left until f(e^u) >= theta everywhere
        u_lo = u_hi - 2.0
        for _ in range(200):
            short = self._log_value(u_lo) < log_theta
            if not np.any(short):
                break
            u_lo = np.where(short, u_hi + 2.0 * (u_lo - u_hi), u_lo)
        else:
            raise ValueError("could not bracket the decreasing branch inverse")

        def h(u):
            return self._log_value(u) - log_theta

        u = bisect_batch(h, u_lo, u_hi, tol=1e-14, max_iter=200)
        return np.exp(u)

    def inverse_increasing_batch(self, theta: np.ndarray) -> np.ndarray:
        """Solve f(x) = theta on the increasing branch [breakpoint, 1]."""
        theta = np.asarray(theta, dtype=float)
        if self.breakpoint is None:
            raise ValueError("weight has no increasing branch description")
        log_theta = np.log(theta)
        u_lo = np.full(theta.shape, math.log(self.breakpoint))
        u_hi = np.zeros(theta.shape)

        def h(u):
            return self._log_value(u) - log_theta

        u = bisect_batch(h, u_lo, u_hi, tol=1e-14, max_iter=200)
        return np.exp(u)

    def superlevel_cuts(self, theta: float) -> tuple[float, float]:
        """The set {f > theta} as (x_left, y_right): (0, x_left) u (y_right, 1].

        x_left = 0 when the decreasing branch stays below theta;
        y_right = 1 when the increasing branch stays below theta.
        """
        fmin = self.min_value
        if theta < fmin:
            return 1.0, 1.0       # whole interval: (0,1) u empty
        x_left = 0.0
        if self.singular_at_zero:
            x_left = float(self.inverse_decreasing_batch(np.array([theta]))[0])
        elif self.breakpoint is not None and float(self.evaluate(1e-300)) > theta:
            x_left = float(self.inverse_decreasing_batch(np.array([theta]))[0])
        y_right = 1.0
        if self.breakpoint is not None and theta < self.right_value:
            y_right = float(self.inverse_increasing_batch(np.array([theta]))[0])
        return x_left, y_right

    # -- representation protocol --------------------------------------------

    def distribution(self, t: float) -> float:
        if t < 0:
            raise ValueError("t must be >= 0")
        if t < self.min_value:
            return 1.0
        x_left, y_right = self.superlevel_cuts(t)
        return x_left + (1.0 - y_right)

    def tail_integral(self, t: float) -> float:
        if t < 0:
            raise ValueError("t must be >= 0")
        if t < self.min_value:
            return self.total_mass - t
        x_left, y_right = self.superlevel_cuts(t)
        left = self.antiderivative(x_left) - t * x_left if x_left > 0 else 0.0
        right = 0.0
        if y_right < 1.0:
            right = (self.total_mass - self.antiderivative(y_right)
                     - t * (1.0 - y_right))
        return float(left + right)

    def modular(self, lam: float, tolerance: float = 1e-8) -> float:
        """int M(f/lam) by quadrature.

        With an antiderivative inverse the integral is transformed by
        u = antiderivative(x), making the integrand bounded with limit
        6/lam at the singular end.
        """
        if self.antiderivative_inverse is not None:
            def integrand(u):
                if u <= 0.0:
                    return orlicz.LIMIT_SLOPE / lam
                if self.log_value_of_inverse_mass is not None:
                    lf = self.log_value_of_inverse_mass(u)
                else:
                    x = self.antiderivative_inverse(u)
                    if x <= 0.0:
                        return orlicz.LIMIT_SLOPE / lam
                    lf = math.log(self.evaluate(x))
                return _m_over_f(lf, lam)

            val, err = quad(integrand, 0.0, self.total_mass,
                            epsabs=tolerance / 10, epsrel=tolerance / 10,
                            limit=200)
        else:
            points = [self.breakpoint] if self.breakpoint else None
            val, err = quad(lambda x: orlicz.m_value(self.evaluate(x) / lam),
                            0.0, 1.0, points=points,
                            epsabs=tolerance / 10, epsrel=tolerance / 10,
                            limit=200)
        if err > tolerance * max(1.0, abs(val)):
            raise NonIntegrableError(
                f"modular quadrature error {err:.3e} above tolerance {tolerance:.1e}")
        return float(val)


def _m_over_f(log_f: float, lam: float) -> float:
    """M(f/lam)/f from log f, stable for arbitrarily large f."""
    if log_f > 40.0:
        return orlicz.LIMIT_SLOPE / lam   # correction below 1e-15
    f = math.exp(log_f)
    r = f / lam
    if r <= 1.0:
        return r * r / f
    return (6.0 * r - 5.0 - 8.0 * math.log(0.5 * (1.0 + r))) / f


def log_weight() -> AnalyticWeight:
    """The unit-mass weight f(x) = 1/(x log^2(x/e)).

    Antiderivative -1/log(x/e); decreasing on (0, 1/e], increasing on
    [1/e, 1], minimum e/4 at 1/e, f(1) = 1, not in any L^p for p > 1.
    """
    def value(x):
        x = np.asarray(x, dtype=float)
        return 1.0 / (x * np.square(np.log(x) - 1.0))

    def anti(x):
        x = np.asarray(x, dtype=float)
        with np.errstate(divide="ignore"):
            out = np.where(x > 0.0, -1.0 / (np.log(x) - 1.0), 0.0)
        return float(out) if np.ndim(out) == 0 else out

    def anti_inv(u):
        u = np.asarray(u, dtype=float)
        with np.errstate(divide="ignore", over="ignore"):
            out = np.where(u > 0.0, np.exp(1.0 - 1.0 / u), 0.0)
        return float(out) if np.ndim(out) == 0 else out

    def mass_below_log(u):
        return 1.0 / (1.0 - np.asarray(u, dtype=float))

    def mass_between_log_delta(ua, dlog):
        ua = np.asarray(ua, dtype=float)
        dlog = np.asarray(dlog, dtype=float)
        # 1/(1-ua-dlog) - 1/(1-ua) without cancellation
        return dlog / ((1.0 - ua) * (1.0 - ua - dlog))

    def x_times_value_log(u):
        return 1.0 / np.square(1.0 - np.asarray(u, dtype=float))

    def log_value_at_log(u):
        u = np.asarray(u, dtype=float)
        out = -u - 2.0 * np.log(1.0 - u)
        return float(out) if np.ndim(out) == 0 else out

    def log_value_of_inverse_mass(m):
        # x = e^(1 - 1/m):  log f = 1/m - 1 + 2 log m
        return 1.0 / m - 1.0 + 2.0 * math.log(m)

    return AnalyticWeight(
        kind="log_singular",
        evaluate=value,
        antiderivative=anti,
        total_mass=1.0,
        label="logweight",
        breakpoint=1.0 / math.e,
        singular_at_zero=True,
        antiderivative_inverse=anti_inv,
        mass_below_log=mass_below_log,
        mass_between_log_delta=mass_between_log_delta,
        x_times_value_log=x_times_value_log,
        log_value_at_log=log_value_at_log,
        log_value_of_inverse_mass=log_value_of_inverse_mass,
    )


# ---------------------------------------------------------------------------
# Products (step function) x (weight)


@dataclass(frozen=True)
class ProductFunction:
    """s(x) * w(x) with s a dyadic step function and w >= 0 analytic.

    All integrals reduce to antiderivative differences per dyadic cell;
    superlevel sets intersect each cell in at most two subintervals cut
    by the weight's monotone-branch inverses.
    """

    step: DyadicStepFunction
    weight: AnalyticWeight

    @property
    def level(self) -> int:
        return self.step.level

    def _cell_masses(self) -> np.ndarray:
        h = self.step.cell_measure
        edges = np.arange(2 ** self.level + 1) * h
        anti = self.weight.antiderivative(edges)
        return np.diff(anti)

    def l1_norm(self) -> float:
        return float(np.abs(self.step.values) @ self._cell_masses())

    def integral(self) -> float:
        return float(self.step.values @ self._cell_masses())

    def _region_per_cell(self, t: float):
        """Per cell: measure and w-mass of {|s| w > t} within the cell."""
        c = np.abs(self.step.values)
        h = self.step.cell_measure
        n = c.shape[0]
        lo = np.arange(n) * h
        hi = lo + h
        length = np.zeros(n)
        mass = np.zeros(n)
        active = c > 0.0
        if t == 0.0:
            length[active] = h
            masses = self._cell_masses()
            mass[active] = masses[active]
            return length, mass
        if not np.any(active):
            return length, mass
        theta = np.full(n, np.inf)
        theta[active] = t / c[active]
        for x_lo, x_hi in self._superlevel_intervals_batch(theta):
            a = np.maximum(lo, x_lo)
            b = np.minimum(hi, x_hi)
            good = b > a
            if np.any(good):
                length[good] += b[good] - a[good]
                mass[good] += (self.weight.antiderivative(b[good])
                               - self.weight.antiderivative(a[good]))
        return length, mass

    def _superlevel_intervals_batch(self, theta: np.ndarray):
        """{w > theta_j} as up to two interval arrays (x_lo_j, x_hi_j)."""
        w = self.weight
        fmin = w.min_value
        n = theta.shape[0]
        left_hi = np.zeros(n)
        full = theta < fmin
        left_hi[full] = 1.0
        cut = np.isfinite(theta) & ~full
        if np.any(cut) and (w.singular_at_zero or w.breakpoint is not None):
            if w.singular_at_zero:
                left_hi[cut] = w.inverse_decreasing_batch(theta[cut])
        right_lo = np.ones(n)
        if w.breakpoint is not None:
            inc = cut & (theta < w.right_value)
            if np.any(inc):
                right_lo[inc] = w.inverse_increasing_batch(theta[inc])
        return [(np.zeros(n), left_hi), (right_lo, np.ones(n))]

    def distribution(self, t: float) -> float:
        if t < 0:
            raise ValueError("t must be >= 0")
        length, _ = self._region_per_cell(t)
        return float(length.sum())

    def tail_integral(self, t: float) -> float:
        if t < 0:
            raise ValueError("t must be >= 0")
        length, mass = self._region_per_cell(t)
        return float(np.abs(self.step.values) @ mass - t * length.sum())

    def modular(self, lam: float, tolerance: float = 1e-8) -> float:
        """Per-cell quadrature of M(|s| w / lam) via the mass substitution."""
        w = self.weight
        if w.antiderivative_inverse is None:
            raise NonIntegrableError("weight has no antiderivative inverse")
        total = 0.0
        total_err = 0.0
        h = self.step.cell_measure
        for j, cj in enumerate(np.abs(self.step.values)):
            if cj == 0.0:
                continue
            ua = float(w.antiderivative(j * h))
            ub = float(w.antiderivative((j + 1) * h))

            def integrand(u):
                if u <= 0.0:
                    return cj * orlicz.LIMIT_SLOPE / lam
                if w.log_value_of_inverse_mass is not None:
                    lf = w.log_value_of_inverse_mass(u)
                else:
                    x = w.antiderivative_inverse(u)
                    lf = math.log(w.evaluate(x))
                # M(c f / lam)/f = c * [M(r)/r] with r = c f / lam
                return cj * _m_over_f(lf + math.log(cj), lam)

            val, err = quad(integrand, ua, ub, epsabs=tolerance / 10,
                            epsrel=tolerance / 10, limit=200)
            total += val
            total_err += err
        if total_err > tolerance * max(1.0, abs(total)):
            raise NonIntegrableError(
                f"modular quadrature error {total_err:.3e} above {tolerance:.1e}")
        return float(total)


# ---------------------------------------------------------------------------
# Conditional expectations and free-function forms


def conditional_expectation(f, level: int) -> DyadicStepFunction:
    """Level-k dyadic averages of f: value 2^k int_cell f on each cell.

    Exact for all three representations; preserves the integral.  The
    L^1 distance to f is nonincreasing in the level.
    """
    if level < 0:
        raise ValueError("level must be >= 0")
    if isinstance(f, DyadicStepFunction):
        if level >= f.level:
            return f.refine(level)
        vals = f.values.reshape(2 ** level, -1).mean(axis=1)
        return DyadicStepFunction(level, vals)
    if isinstance(f, AnalyticWeight):
        edges = np.arange(2 ** level + 1) * 2.0 ** -level
        anti = f.antiderivative(edges)
        return DyadicStepFunction(level, np.diff(anti) * 2.0 ** level)
    if isinstance(f, ProductFunction):
        fine = max(level, f.step.level)
        step = f.step.refine(fine)
        edges = np.arange(2 ** fine + 1) * 2.0 ** -fine
        cell_mass = np.diff(f.weight.antiderivative(edges))
        integrals = step.values * cell_mass
        if fine > level:
            integrals = integrals.reshape(2 ** level, -1).sum(axis=1)
        return DyadicStepFunction(level, integrals * 2.0 ** level)
    raise TypeError(f"unsupported representation {type(f)!r}")


def approximation_error(f, level: int) -> float:
    """Exact L^1 distance between f and its level-k conditional expectation."""
    avg = conditional_expectation(f, level)
    if isinstance(f, DyadicStepFunction):
        lvl = max(level, f.level)
        diff = f.refine(lvl).values - avg.refine(lvl).values
        return float(np.abs(diff).mean())
    if isinstance(f, AnalyticWeight):
        return _weight_expectation_error(f, avg)
    raise TypeError(f"unsupported representation {type(f)!r}")


def _weight_expectation_error(w: AnalyticWeight, avg: DyadicStepFunction) -> float:
    """Sum over cells of int |w - avg| using monotone-branch crossings."""
    level = avg.level
    h = 2.0 ** -level
    total = 0.0
    for j, c in enumerate(avg.values):
        a, b = j * h, (j + 1) * h
        pieces = [(a, b)]
        if w.breakpoint is not None and a < w.breakpoint < b:
            pieces = [(a, w.breakpoint), (w.breakpoint, b)]
        acc = 0.0
        for (pa, pb) in pieces:
            acc += _monotone_abs_deviation(w, pa, pb, c)
        total += acc
    return total


def _monotone_abs_deviation(w: AnalyticWeight, a: float, b: float, c: float) -> float:
    """int_a^b |w - c| for w monotone on [a, b]."""
    fa = float(w.evaluate(a)) if a > 0 else math.inf
    fb = float(w.evaluate(b))
    seg_mass = w.mass_between(a, b)
    base = seg_mass - c * (b - a)   # int (w - c)
    lo_val, hi_val = min(fa, fb), max(fa, fb)
    if c <= lo_val:
        return abs(base)
    if c >= hi_val:
        return abs(base)
    x = bisect_scalar(lambda t: float(w.evaluate(t)) - c, a, b, tol=1e-15,
                      max_iter=200)
    first = w.mass_between(a, x) - c * (x - a)    # sign of (w - c) constant here
    second = base - first
    return abs(first) + abs(second)


def l1_norm(f) -> float:
    return f.l1_norm()


def distribution(f, t: float) -> float:
    return f.distribution(t)


def tail_integral(f, t: float) -> float:
    return f.tail_integral(t)


# ---------------------------------------------------------------------------
# Distribution curves


@dataclass(frozen=True)
class DistributionCurve:
    """Sampled distribution function t -> mu(|f| > t)."""

    t_grid: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        t = np.array(self.t_grid, dtype=float)
        v = np.array(self.values, dtype=float)
        if t.ndim != 1 or t.shape != v.shape:
            raise ValueError("t_grid and values must be 1-d of equal length")
        if np.any(np.diff(t) <= 0):
            raise ValueError("t_grid must be strictly increasing")
        if np.any(np.diff(v) > 1e-12):
            raise ValueError("distribution values must be nonincreasing")
        if np.any((v < -1e-12) | (v > 1.0 + 1e-12)):
            raise ValueError("distribution values must lie in [0, 1]")
        t.setflags(write=False)
        v.setflags(write=False)
        object.__setattr__(self, "t_grid", t)
        object.__setattr__(self, "values", v)


def distribution_curve(f, t_grid) -> DistributionCurve:
    t = np.asarray(t_grid, dtype=float)
    vals = np.array([f.distribution(ti) for ti in t])
    return DistributionCurve(t, vals)
