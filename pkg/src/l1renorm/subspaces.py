"""Finite-dimensional subspaces of L^1: sphere exploration, the indexes

    C_X(t) = inf { mu(|f| > t) : f in X, ||f||_1 = 1 }
    G_X(t) = sup { int max(|f|-t, 0) : f in X, ||f||_1 = 1 }

and sampled estimates of the moduli of convexity and smoothness of the
Luxemburg norm restricted to X, together with checks of the quantitative
bounds

    (convexity)   delta_X(eps) >= K_X eps^2,  K_X = (k/18)^2 sup t^2 C_X(t)^3
    (smoothness)  rho_X(tau)  <= K2 tau^2 int_0^{1/tau} G_X(t) dt,  K2 = 2*128*C.

Estimates carry one-sided semantics: C estimates are upper bounds of the
infimum (min over samples), G/rho estimates are lower bounds of the
supremum, and delta estimates are upper bounds of the infimum, so the
two bound checks above are valid necessary conditions exactly as run.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

from . import orlicz
from ._solvers import chunk_spans, golden_section, stable_seed
from .cylinders import BandCutTable
from .l1space import DyadicStepFunction, ProductFunction, combine_steps
from .reports import VerificationReport
from .trees import WeightedTree, leaf_sign_matrix

__all__ = [
    "DegenerateBasisError",
    "SeparationUnreachableError",
    "NonSmoothPointError",
    "SamplerConfig",
    "Subspace",
    "IndexCurve",
    "ModulusEstimate",
    "SmoothnessClassification",
    "KXConstant",
    "sphere_sample",
    "c_index",
    "g_index",
    "index_curve",
    "k_x_constant",
    "delta_estimate",
    "rho_estimate",
    "rho_figiel_estimate",
    "norm_derivative",
    "moduli_estimate",
    "verify_convexity_estimate",
    "verify_smoothness_estimate",
    "classify_smoothness",
    "upper_envelope_integral",
    "smoothness_t_grid",
]


class DegenerateBasisError(ValueError):
    """Basis failed the numeric linear-independence check."""


class SeparationUnreachableError(RuntimeError):
    """No sphere pair at the requested separation was found."""


class NonSmoothPointError(RuntimeError):
    """The directional derivative of the norm did not stabilize."""


# ---------------------------------------------------------------------------
# Backends


class _StepSpan:
    """Span of dyadic step functions; rows of coefficients map to value
    matrices over the common refinement cells."""

    def __init__(self, basis: list[DyadicStepFunction]):
        self.level = max(g.level for g in basis)
        self.matrix = np.stack([g.refine(self.level).values for g in basis])
        self.dim = len(basis)
        self.supports_luxemburg = True

    def values(self, coeffs: np.ndarray) -> np.ndarray:
        return np.atleast_2d(coeffs) @ self.matrix

    def l1_norms(self, coeffs) -> np.ndarray:
        return np.abs(self.values(coeffs)).mean(axis=1)

    def lux_norms(self, coeffs, tolerance: float = 1e-10) -> np.ndarray:
        return orlicz.luxemburg_lambda_batch(self.values(coeffs), tolerance)

    def distribution_batch(self, coeffs, t: float) -> np.ndarray:
        return (np.abs(self.values(coeffs)) > t).mean(axis=1)

    def tail_batch(self, coeffs, t: float) -> np.ndarray:
        return np.maximum(np.abs(self.values(coeffs)) - t, 0.0).mean(axis=1)


class _WeightedSpan:
    """Span of (weight x fine sign function) elements built from a tree.

    Combinations are constant on the tree's leaf sets, so L^1 data comes
    from the stored node integrals; superlevel cuts go through the band
    decomposition with a certified misassignment bound subtracted, which
    keeps tail estimates valid lower bounds.
    """

    def __init__(self, tree: WeightedTree, weight):
        if tree.explicit:
            raise ValueError("explicit trees span plain step functions")
        self.tree = tree
        self.weight = weight
        self.dim = tree.depth
        self.signs = leaf_sign_matrix(tree.depth)     # (2^K, K)
        leaves = [tree.nodes[p] for p in tree.leaf_paths()]
        self.node_integrals = np.array([n.integral for n in leaves])
        self.node_errors = np.array([n.integral_error for n in leaves])
        self.band = BandCutTable(weight, tree.indices)
        self.supports_luxemburg = False

    def leaf_values(self, coeffs) -> np.ndarray:
        return np.atleast_2d(coeffs) @ self.signs.T   # (n, 2^K)

    def l1_norms(self, coeffs) -> np.ndarray:
        return np.abs(self.leaf_values(coeffs)) @ self.node_integrals

    def lux_norms(self, coeffs, tolerance: float = 1e-10) -> np.ndarray:
        raise NotImplementedError(
            "Luxemburg normalization is not supported on weighted spans")

    def _cut_data(self, coeffs, t: float):
        """Per (row, node): measure and weight mass of {|c_s| f > t}."""
        c = np.abs(self.leaf_values(coeffs))
        n_rows, n_nodes = c.shape
        w = self.weight
        fmin = w.min_value
        theta = np.where(c > 0.0, t / np.where(c > 0.0, c, 1.0), np.inf)
        length = np.zeros_like(c)
        mass = np.zeros_like(c)
        whole = theta < fmin
        if np.any(whole):
            length[whole] = np.broadcast_to(2.0 ** -self.dim, c.shape)[whole]
            mass[whole] = np.broadcast_to(self.node_integrals, c.shape)[whole]
        cut = np.isfinite(theta) & ~whole
        if np.any(cut):
            x_dec = np.zeros_like(c)
            x_dec[cut] = w.inverse_decreasing_batch(theta[cut])
            u_dec = np.zeros_like(c)
            u_dec[cut] = w.antiderivative(x_dec[cut])
            m_dec = self.band.mass_cut(u_dec)
            l_dec = self.band.length_cut(x_dec)
            mass[cut] = m_dec[cut]
            length[cut] = l_dec[cut]
            inc = cut & (theta < w.right_value)
            if np.any(inc):
                y_inc = np.ones_like(c)
                y_inc[inc] = w.inverse_increasing_batch(theta[inc])
                u_inc = np.ones_like(c)
                u_inc[inc] = w.antiderivative(y_inc[inc])
                m_above = (np.broadcast_to(self.node_integrals, c.shape)
                           - self.band.mass_cut(u_inc))
                l_above = 2.0 ** -self.dim - self.band.length_cut(y_inc)
                mass[inc] += m_above[inc]
                length[inc] += l_above[inc]
        return c, length, mass

    def tail_batch(self, coeffs, t: float) -> np.ndarray:
        c, length, mass = self._cut_data(coeffs, t)
        raw = (c * mass).sum(axis=1) - t * length.sum(axis=1)
        # equal-coefficient rows are exact; others carry the band bound
        spread = c.max(axis=1) - c.min(axis=1)
        exact = spread <= 1e-13 * np.maximum(c.max(axis=1), 1e-300)
        wobble = np.where(exact, 0.0,
                          c.sum(axis=1) * (self.band.wobble + 2.0 * t * 2.0 ** -self.tree.indices[0]))
        return np.maximum(raw - wobble - self.node_errors.sum() * c.max(axis=1), 0.0)

    def distribution_batch(self, coeffs, t: float) -> np.ndarray:
        _, length, _ = self._cut_data(coeffs, t)
        return length.sum(axis=1)


# ---------------------------------------------------------------------------
# Subspace


class Subspace:
    """Ordered finite basis of L^1 elements with a sampling backend."""

    def __init__(self, basis: list, label: str = "", *,
                 independence_tol: float = 1e-8):
        if not basis:
            raise ValueError("basis must be nonempty")
        if all(isinstance(g, DyadicStepFunction) for g in basis):
            self._check_independence(basis, independence_tol)
            self.backend = _StepSpan(basis)
        else:
            raise TypeError("mixed or unsupported basis; use from_weighted_tree "
                            "for weighted sign systems")
        self.basis = list(basis)
        self.label = label or f"span{len(basis)}"

    @staticmethod
    def _check_independence(basis, tol: float) -> None:
        lvl = max(g.level for g in basis)
        rows = []
        for g in basis:
            norm = g.l1_norm()
            if norm == 0.0:
                raise DegenerateBasisError("basis contains the zero function")
            rows.append(g.refine(lvl).values / norm)
        mat = np.stack(rows)
        gram = mat @ mat.T * (2.0 ** -lvl)
        det = float(np.linalg.det(gram))
        if abs(det) <= tol:
            raise DegenerateBasisError(
                f"Gram determinant {det:.3e} below tolerance {tol:.1e}")

    @classmethod
    def from_weighted_tree(cls, tree: WeightedTree, weight,
                           label: str = "") -> "Subspace":
        # sign components of the basis are orthonormal, so independence
        # holds structurally for a positive weight
        if weight.min_value <= 0.0:
            raise DegenerateBasisError("weight must be strictly positive")
        obj = cls.__new__(cls)
        obj.backend = _WeightedSpan(tree, weight)
        obj.basis = None
        obj.label = label or f"weighted:{tree.weight_label}:{tree.eta}:{tree.depth}"
        return obj

    @property
    def dim(self) -> int:
        return self.backend.dim

    @property
    def supports_luxemburg(self) -> bool:
        return self.backend.supports_luxemburg


@dataclass(frozen=True)
class SamplerConfig:
    seed: int = 0
    sample_count: int = 4096
    refinement_steps: int = 16
    chunk: int = 16_384
    angular_points: int = 720


# ---------------------------------------------------------------------------
# Sphere sampling


def _normalize_rows(X: Subspace, coeffs: np.ndarray, norm_kind: str,
                    tolerance: float = 1e-10) -> np.ndarray:
    coeffs = np.atleast_2d(np.asarray(coeffs, dtype=float))
    if norm_kind == "l1":
        norms = X.backend.l1_norms(coeffs)
    elif norm_kind == "luxemburg":
        norms = X.backend.lux_norms(coeffs, tolerance)
    else:
        raise ValueError("norm_kind must be 'l1' or 'luxemburg'")
    if np.any(norms <= 1e-12):
        raise DegenerateBasisError("sampled a numerically zero combination")
    return coeffs / norms[:, None]


def sphere_sample(X: Subspace, norm_kind: str = "l1", seed: int = 0,
                  count: int = 1024, tolerance: float = 1e-10) -> np.ndarray:
    """Deterministic unit-sphere samples as coefficient rows.

    Gaussian directions are rescaled to unit norm; the first `count`
    rows for a given seed are a prefix of any longer run.  The norm
    sandwich ||f||_1 <= ||f|| <= 6 ||f||_1 is asserted on samples where
    both norms are available.
    """
    if count < 1:
        raise ValueError("count must be >= 1")
    rng = np.random.default_rng(stable_seed(seed, "sphere", norm_kind))
    dirs = rng.standard_normal((count, X.dim))
    out = _normalize_rows(X, dirs, norm_kind, tolerance)
    if norm_kind == "luxemburg":
        k, _ = orlicz.norm_equivalence_constants()
        l1 = X.backend.l1_norms(out)
        if np.any(l1 < k - 1e-9) or np.any(l1 > 1.0 + 1e-9):
            raise AssertionError("norm sandwich violated on a sphere sample")
    elif X.supports_luxemburg:
        probe = out[: min(count, 64)]
        lux = X.backend.lux_norms(probe, tolerance)
        if np.any(lux < 1.0 - 1e-9) or np.any(lux > 6.0 + 1e-9):
            raise AssertionError("norm sandwich violated on a sphere sample")
    return out


def _angular_grid(dim: int, points: int) -> np.ndarray:
    """Deterministic direction grid for dim <= 3 (>= `points` per angle)."""
    if dim == 1:
        return np.array([[1.0], [-1.0]])
    if dim == 2:
        theta = np.arange(points) * (2.0 * math.pi / points)
        return np.column_stack([np.cos(theta), np.sin(theta)])
    if dim == 3:
        theta = np.arange(points) * (2.0 * math.pi / points)
        phi = (np.arange(points) + 0.5) * (math.pi / points)
        tt, pp = np.meshgrid(theta, phi, indexing="ij")
        st = np.sin(pp).ravel()
        return np.column_stack([
            (st * np.cos(tt.ravel())),
            (st * np.sin(tt.ravel())),
            np.cos(pp).ravel(),
        ])
    raise ValueError("angular grids cover dim <= 3 only")


def _coordinate_refine(X: Subspace, start: np.ndarray, objective,
                       minimize: bool, steps: int) -> float:
    """Golden-section polish of one coefficient row, renormalizing probes.

    Returns the refined objective value; the caller keeps the better of
    the raw and refined values, so refinement never loosens a one-sided
    estimate.
    """
    sign = 1.0 if minimize else -1.0

    def value(row) -> float:
        norms = X.backend.l1_norms(row[None, :])
        if norms[0] <= 1e-12:
            return math.inf
        return sign * float(objective((row / norms[0])[None, :])[0])

    current = start.copy()
    best = value(current)
    span = 0.5
    for _ in range(max(steps, 0)):
        for i in range(X.dim):
            base = current[i]

            def fn(v):
                probe = current.copy()
                probe[i] = v
                return value(probe)

            v_star, f_star = golden_section(fn, base - span, base + span, iters=20)
            if f_star < best:
                best = f_star
                current[i] = v_star
        span *= 0.5
    return sign * best


# ---------------------------------------------------------------------------
# Indexes C and G


@dataclass(frozen=True)
class IndexCurve:
    index_kind: str                 # "C" | "G"
    t_grid: np.ndarray
    estimates: np.ndarray
    direction: str
    sampler_config: SamplerConfig
    subspace_label: str = ""

    def __post_init__(self):
        t = np.array(self.t_grid, dtype=float)
        v = np.array(self.estimates, dtype=float)
        if self.index_kind not in ("C", "G"):
            raise ValueError("index_kind must be 'C' or 'G'")
        want = ("upper_bound_of_inf" if self.index_kind == "C"
                else "lower_bound_of_sup")
        if self.direction != want:
            raise ValueError(f"direction for {self.index_kind} must be {want}")
        if np.any((v < -1e-12) | (v > 1.0 + 1e-9)):
            raise ValueError("index estimates must lie in [0, 1]")
        if self.index_kind == "G" and np.any(np.diff(v) > 1e-12):
            raise ValueError("G estimates must be nonincreasing")
        t.setflags(write=False)
        v.setflags(write=False)
        object.__setattr__(self, "t_grid", t)
        object.__setattr__(self, "estimates", v)


def _index_extremum(X: Subspace, t: float, sampler: SamplerConfig,
                    kind: str) -> float:
    minimize = kind == "C"
    if minimize and not 0.0 < t < 1.0:
        raise ValueError("the C index needs t in (0, 1)")
    if not minimize and t < 0.0:
        raise ValueError("the G index needs t >= 0")

    def objective(rows):
        if minimize:
            return X.backend.distribution_batch(rows, t)
        return X.backend.tail_batch(rows, t)

    best = math.inf if minimize else -math.inf
    best_row = None

    def consider(rows):
        nonlocal best, best_row
        vals = objective(rows)
        idx = int(np.argmin(vals) if minimize else np.argmax(vals))
        val = float(vals[idx])
        if (val < best) if minimize else (val > best):
            best = val
            best_row = rows[idx].copy()

    axes = np.vstack([np.eye(X.dim), -np.eye(X.dim)])
    consider(_normalize_rows(X, axes, "l1"))
    for lo, hi in chunk_spans(sampler.sample_count, sampler.chunk):
        rng = np.random.default_rng(stable_seed(sampler.seed, "index", kind, lo))
        rows = _normalize_rows(X, rng.standard_normal((hi - lo, X.dim)), "l1")
        consider(rows)
    if X.dim <= 3:
        grid = _angular_grid(X.dim, sampler.angular_points)
        for lo, hi in chunk_spans(grid.shape[0], sampler.chunk):
            consider(_normalize_rows(X, grid[lo:hi], "l1"))
    if sampler.refinement_steps > 0 and best_row is not None and X.dim > 1:
        refined = _coordinate_refine(X, best_row, objective, minimize,
                                     sampler.refinement_steps)
        best = min(best, refined) if minimize else max(best, refined)
    if not minimize:
        if best > 1.0 + 1e-9:
            raise AssertionError("G estimate exceeded the mass bound 1")
        best = min(best, 1.0)
    return max(best, 0.0)


def c_index(X: Subspace, t: float, sampler: SamplerConfig = SamplerConfig()) -> float:
    """Upper bound of inf mu(|f| > t) over the unit L^1 sphere of X."""
    return _index_extremum(X, t, sampler, "C")


def g_index(X: Subspace, t: float, sampler: SamplerConfig = SamplerConfig()) -> float:
    """Lower bound of sup int max(|f|-t, 0) over the unit L^1 sphere of X."""
    return _index_extremum(X, t, sampler, "G")


def index_curve(X: Subspace, kind: str, t_grid,
                sampler: SamplerConfig = SamplerConfig()) -> IndexCurve:
    """Index estimates over a grid, kept consistent with monotonicity.

    The same seed drives all grid points; the monotone envelope (suffix
    max for G, running min for C) preserves the one-sided semantics.
    """
    t = np.asarray(t_grid, dtype=float)
    vals = np.array([_index_extremum(X, ti, sampler, kind) for ti in t])
    if kind == "G":
        vals = np.maximum.accumulate(vals[::-1])[::-1]
        direction = "lower_bound_of_sup"
    else:
        vals = np.minimum.accumulate(vals)
        direction = "upper_bound_of_inf"
    return IndexCurve(kind, t, vals, direction, sampler, X.label)


@dataclass(frozen=True)
class KXConstant:
    """K_X = K1 * sup over the grid of t^2 C_X(t)^3, with the grid argmax."""

    value: float
    t_star: float
    k_one: float
    curve: IndexCurve


def k_x_constant(X: Subspace, t_grid=None,
                 sampler: SamplerConfig = SamplerConfig()) -> KXConstant:
    k, _ = orlicz.norm_equivalence_constants()
    k_one = (k / 18.0) ** 2
    if t_grid is None:
        t_grid = np.linspace(0.02, 0.98, 25)
    curve = index_curve(X, "C", t_grid, sampler)
    scores = curve.t_grid ** 2 * curve.estimates ** 3
    idx = int(np.argmax(scores))
    return KXConstant(k_one * float(scores[idx]), float(curve.t_grid[idx]),
                      k_one, curve)


# ---------------------------------------------------------------------------
# Moduli of convexity and smoothness


def _lux(X: Subspace, rows: np.ndarray, tolerance: float) -> np.ndarray:
    return X.backend.lux_norms(rows, tolerance)


def _pairs_at_separation(X: Subspace, epsilon: float, count: int, rng,
                         tolerance: float, constraint_tol: float = 1e-9,
                         max_rounds: int = 64):
    """Luxemburg-sphere pairs (x, y) with ||x - y|| = epsilon.

    y is found on the normalized segment path from x toward a second
    sample; the separation equation is solved by bisection in the path
    parameter.  Unreachable paths are resampled.
    """
    x = _normalize_rows(X, rng.standard_normal((count, X.dim)), "luxemburg",
                        tolerance)
    v = _normalize_rows(X, rng.standard_normal((count, X.dim)), "luxemburg",
                        tolerance)
    s_hi = np.zeros(count)
    have = np.zeros(count, dtype=bool)

    def separation(scale):
        m = x + scale[:, None] * (v - x)
        norms = _lux(X, m, tolerance)
        bad = norms <= 1e-9
        if np.any(bad):
            return np.where(bad, -1.0, 0.0) + np.where(
                bad, 0.0, _lux(X, x - m / np.maximum(norms, 1e-300)[:, None],
                               tolerance))
        w = m / norms[:, None]
        return _lux(X, x - w, tolerance)

    for _ in range(max_rounds):
        for probe in (1.0, 2.0, 4.0, 8.0, -1.0, -2.0, -4.0, -8.0):
            todo = ~have
            if not np.any(todo):
                break
            g = separation(np.where(todo, probe, 1.0))
            ok = todo & (g >= epsilon)
            s_hi[ok] = probe
            have |= ok
        if np.all(have):
            break
        refresh = ~have
        v[refresh] = _normalize_rows(
            X, rng.standard_normal((int(refresh.sum()), X.dim)), "luxemburg",
            tolerance)
    if not np.all(have):
        raise SeparationUnreachableError(
            f"separation {epsilon} unreachable for {int((~have).sum())} pairs")

    lo = np.zeros(count)
    hi = np.ones(count)
    sigma = 0.5 * np.ones(count)
    g_val = np.zeros(count)
    for _ in range(100):
        sigma = 0.5 * (lo + hi)
        g_val = separation(sigma * s_hi)
        done = np.abs(g_val - epsilon) <= constraint_tol
        if np.all(done):
            break
        below = ~done & (g_val < epsilon)
        lo = np.where(below, sigma, lo)
        hi = np.where(~done & ~below, sigma, hi)
    if not np.all(np.abs(g_val - epsilon) <= constraint_tol):
        raise SeparationUnreachableError(
            "path bisection failed to meet the separation constraint")
    m = x + (sigma * s_hi)[:, None] * (v - x)
    y = m / _lux(X, m, tolerance)[:, None]
    return x, y


def delta_estimate(X: Subspace, epsilon: float, pair_count: int = 10_000,
                   seed: int = 0, tolerance: float = 1e-10) -> float:
    """Upper bound of the convexity modulus delta_X(epsilon).

    Minimum of 1 - ||(x+y)/2|| over sampled Luxemburg-sphere pairs at
    separation epsilon (constraint met to 1e-9).  For epsilon = 2 the
    only pairs are antipodal and the value is exactly 1.
    """
    if not 0.0 < epsilon <= 2.0:
        raise ValueError("epsilon must lie in (0, 2]")
    if X.dim == 1:
        if abs(epsilon - 2.0) <= 1e-12:
            return 1.0
        raise SeparationUnreachableError(
            "a 1-dimensional sphere only admits separation 2")
    if abs(epsilon - 2.0) <= 1e-12:
        return 1.0
    best = math.inf
    for idx, (lo, hi) in enumerate(chunk_spans(pair_count, 8192)):
        rng = np.random.default_rng(
            stable_seed(seed, "delta", float(epsilon), idx))
        x, y = _pairs_at_separation(X, epsilon, hi - lo, rng, tolerance)
        mids = _lux(X, 0.5 * (x + y), tolerance)
        best = min(best, float((1.0 - mids).min()))
    return best


def rho_estimate(X: Subspace, tau: float, pair_count: int = 10_000,
                 seed: int = 0, tolerance: float = 1e-10) -> float:
    """Lower bound of the smoothness modulus rho_X(tau):
    max over sampled sphere pairs of (||x+tau y|| + ||x-tau y||)/2 - 1."""
    if tau <= 0.0:
        raise ValueError("tau must be positive")
    best = -math.inf
    for idx, (lo, hi) in enumerate(chunk_spans(pair_count, 16_384)):
        rng = np.random.default_rng(stable_seed(seed, "rho", float(tau), idx))
        x = _normalize_rows(X, rng.standard_normal((hi - lo, X.dim)),
                            "luxemburg", tolerance)
        y = _normalize_rows(X, rng.standard_normal((hi - lo, X.dim)),
                            "luxemburg", tolerance)
        vals = 0.5 * (_lux(X, x + tau * y, tolerance)
                      + _lux(X, x - tau * y, tolerance)) - 1.0
        best = max(best, float(vals.max()))
    return best


_DERIV_H = 1e-6
_DERIV_TOL = 1e-13


def _norm_derivative_rows(X: Subspace, x: np.ndarray, y: np.ndarray):
    """Richardson-extrapolated central difference of ||x + h y|| in h.

    Returns (derivative, oscillation) per row; oscillation is the
    difference between the two step sizes and flags non-smooth points.
    """
    def central(h):
        return (_lux(X, x + h * y, _DERIV_TOL)
                - _lux(X, x - h * y, _DERIV_TOL)) / (2.0 * h)

    d1 = central(_DERIV_H)
    d2 = central(0.5 * _DERIV_H)
    return (4.0 * d2 - d1) / 3.0, np.abs(d2 - d1)


def norm_derivative(X: Subspace, x_coeffs, y_coeffs) -> float:
    """Directional derivative of the Luxemburg norm at unit x toward y."""
    x = np.atleast_2d(np.asarray(x_coeffs, dtype=float))
    y = np.atleast_2d(np.asarray(y_coeffs, dtype=float))
    norm_x = float(_lux(X, x, _DERIV_TOL)[0])
    if abs(norm_x - 1.0) > 1e-8:
        raise ValueError("x must lie on the Luxemburg unit sphere")
    deriv, osc = _norm_derivative_rows(X, x, y)
    if float(osc[0]) > 1e-4:
        raise NonSmoothPointError(
            f"derivative quotient oscillation {float(osc[0]):.3e}")
    return float(deriv[0])


def rho_figiel_estimate(X: Subspace, tau: float, pair_count: int = 2048,
                        seed: int = 0, tolerance: float = 1e-10,
                        ortho_tol: float = 1e-6) -> float:
    """Smoothness estimate over numerically orthogonal sphere pairs.

    y is projected so the supporting functional at x annihilates it
    (residual <= 1e-6 after one Newton correction); the objective is the
    same two-sided quotient as `rho_estimate`.
    """
    if tau <= 0.0:
        raise ValueError("tau must be positive")
    best = -math.inf
    for idx, (lo, hi) in enumerate(chunk_spans(pair_count, 8192)):
        rng = np.random.default_rng(
            stable_seed(seed, "rho-figiel", float(tau), idx))
        m = hi - lo
        x = _normalize_rows(X, rng.standard_normal((m, X.dim)), "luxemburg",
                            tolerance)
        y0 = _normalize_rows(X, rng.standard_normal((m, X.dim)), "luxemburg",
                             tolerance)
        gamma, osc = _norm_derivative_rows(X, x, y0)
        if float(osc.max()) > 1e-4:
            raise NonSmoothPointError("derivative quotient failed to stabilize")
        y1 = y0 - gamma[:, None] * x
        n1 = _lux(X, y1, tolerance)
        keep = n1 > 1e-6
        if not np.any(keep):
            continue
        x, y0, y1, n1, gamma = (arr[keep] for arr in (x, y0, y1, n1, gamma))
        y = y1 / n1[:, None]
        resid, _ = _norm_derivative_rows(X, x, y)
        need = np.abs(resid) > ortho_tol
        if np.any(need):
            gamma = gamma + resid * n1
            y1 = y0 - gamma[:, None] * x
            n1 = _lux(X, y1, tolerance)
            y = y1 / n1[:, None]
            resid, _ = _norm_derivative_rows(X, x, y)
        if np.any(np.abs(resid) > ortho_tol):
            raise NonSmoothPointError(
                f"orthogonality residual {float(np.abs(resid).max()):.3e} "
                f"above {ortho_tol:.1e}")
        vals = 0.5 * (_lux(X, x + tau * y, tolerance)
                      + _lux(X, x - tau * y, tolerance)) - 1.0
        best = max(best, float(vals.max()))
    if best == -math.inf:
        raise SeparationUnreachableError("all orthogonal pairs degenerated")
    return best


@dataclass(frozen=True)
class ModulusEstimate:
    modulus_kind: str               # "delta" | "rho" | "rho_figiel"
    argument_grid: np.ndarray
    estimates: np.ndarray
    bounds: np.ndarray              # the theorem-side bound per argument
    constants: dict
    pair_count: int
    seed: int
    subspace_label: str = ""


def moduli_estimate(X: Subspace, kind: str, grid, pair_count: int = 10_000,
                    seed: int = 0,
                    sampler: SamplerConfig = SamplerConfig()) -> ModulusEstimate:
    """Modulus estimates over a grid plus the matching theorem bound."""
    grid = np.asarray(grid, dtype=float)
    k, big_c = orlicz.norm_equivalence_constants()
    constants = {"k": k, "K1": (k / 18.0) ** 2, "K2": 2.0 * 128.0 * big_c}
    if kind == "delta":
        kx = k_x_constant(X, sampler=sampler)
        constants["K_X"] = kx.value
        est = np.array([delta_estimate(X, e, pair_count, seed) for e in grid])
        bounds = kx.value * grid ** 2
    elif kind in ("rho", "rho_figiel"):
        fn = rho_estimate if kind == "rho" else rho_figiel_estimate
        est = np.array([fn(X, t, pair_count, seed) for t in grid])
        curve = index_curve(X, "G", smoothness_t_grid(grid), sampler)
        bounds = np.array([
            constants["K2"] * t * t * upper_envelope_integral(curve, 1.0 / t)
            for t in grid])
        constants["K_X"] = k_x_constant(X, sampler=sampler).value
    else:
        raise ValueError("kind must be delta, rho or rho_figiel")
    return ModulusEstimate(kind, grid, est, bounds, constants, pair_count,
                           seed, X.label)


# ---------------------------------------------------------------------------
# The two quantitative bounds


def smoothness_t_grid(tau_grid) -> np.ndarray:
    t_max = float(1.0 / np.min(tau_grid))
    inner = np.geomspace(1e-3, t_max, 160)
    return np.unique(np.concatenate([[0.0], inner, 1.0 / np.asarray(tau_grid)]))


def upper_envelope_integral(curve: IndexCurve, t_upper: float) -> float:
    """Trapezoid integral of the G curve on [0, t_upper].

    The curve's monotone envelope is integrable by trapezoid without
    under-shooting kinks badly; the grid is assumed to contain t_upper.
    """
    t = curve.t_grid
    v = curve.estimates
    if t_upper > t[-1] + 1e-12:
        raise ValueError("curve grid does not reach the integration end")
    idx = int(np.searchsorted(t, t_upper, side="right"))
    tt = t[:idx]
    vv = v[:idx]
    if tt.size == 0 or abs(tt[-1] - t_upper) > 1e-12:
        # interpolate the cut point on the envelope
        j = int(np.searchsorted(t, t_upper))
        frac = (t_upper - t[j - 1]) / (t[j] - t[j - 1])
        v_cut = v[j - 1] + frac * (v[j] - v[j - 1])
        tt = np.concatenate([tt, [t_upper]])
        vv = np.concatenate([vv, [v_cut]])
    return float(np.trapezoid(vv, tt))


def verify_convexity_estimate(X: Subspace, epsilon_grid, *,
                              pair_count: int = 10_000, seed: int = 0,
                              t_grid=None,
                              sampler: SamplerConfig = SamplerConfig()) -> VerificationReport:
    """Check delta estimates against K_X eps^2 on a grid of separations.

    Sampled minima upper-bound the true modulus, which the bound
    lower-bounds, so every check is a valid necessary condition.
    """
    k, big_c = orlicz.norm_equivalence_constants()
    kx = k_x_constant(X, t_grid, sampler)
    report = VerificationReport(
        suite="theorem-a",
        constants={"k": k, "K1": kx.k_one, "K2": 2.0 * 128.0 * big_c,
                   "K_X": kx.value},
        config_echo={"subspace": X.label, "pair_count": pair_count,
                     "seed": seed, "epsilon_grid": list(map(float, epsilon_grid))})
    if kx.value <= 0.0:
        report.add("convexity_bound", "delta_X(eps) >= K_X eps^2",
                   0.0, 0.0, ">=", note="bound vacuous: K_X = 0")
        return report
    for eps in np.asarray(epsilon_grid, dtype=float):
        est = delta_estimate(X, float(eps), pair_count, seed)
        bound = kx.value * float(eps) ** 2
        report.add(f"delta_eps_{eps:g}", "delta_X(eps) >= K_X eps^2",
                   est, bound, ">=", slack=1e-15,
                   note=f"t_star={kx.t_star:g}")
    return report


def verify_smoothness_estimate(X: Subspace, tau_grid, *,
                               pair_count: int = 4096, seed: int = 0,
                               sampler: SamplerConfig = SamplerConfig(),
                               figiel_pairs: int = 1024) -> VerificationReport:
    """Check rho estimates against K2 tau^2 int_0^{1/tau} G, plus the
    16x orthogonal-pair consistency bound."""
    k, big_c = orlicz.norm_equivalence_constants()
    k2 = 2.0 * 128.0 * big_c
    tau_grid = np.asarray(tau_grid, dtype=float)
    curve = index_curve(X, "G", smoothness_t_grid(tau_grid), sampler)
    report = VerificationReport(
        suite="theorem-b",
        constants={"k": k, "K1": (k / 18.0) ** 2, "K2": k2},
        config_echo={"subspace": X.label, "pair_count": pair_count,
                     "seed": seed, "tau_grid": list(map(float, tau_grid))})
    for tau in tau_grid:
        rho = rho_estimate(X, float(tau), pair_count, seed)
        bound = k2 * tau * tau * upper_envelope_integral(curve, 1.0 / tau)
        report.add(f"rho_tau_{tau:g}",
                   "rho_X(tau) <= K2 tau^2 int_0^(1/tau) G_X",
                   rho, bound, "<=", slack=1e-15)
        if X.supports_luxemburg and X.dim > 1:
            fig = rho_figiel_estimate(X, float(tau), figiel_pairs, seed)
            report.add(f"figiel_tau_{tau:g}",
                       "rho_X(tau) <= 16 sup_orth ((||x+ty||+||x-ty||)/2 - 1)",
                       rho, 16.0 * max(fig, 0.0), "<=", slack=1e-9)
    return report


# ---------------------------------------------------------------------------
# Tail-decay classification of G curves


@dataclass(frozen=True)
class SmoothnessClassification:
    regime: str             # "power_2" | "power_p" | "log_2" | "none"
    p_fit: float
    fit_quality: float
    diagnostic: str
    integrable: bool
    tail_integral_estimate: float


def classify_smoothness(curve: IndexCurve, *, band: float = 0.15,
                        quality_threshold: float = 0.9,
                        tail_fraction: float = 0.5) -> SmoothnessClassification:
    """Classify the decay of a G curve by a log-log tail fit.

    G = O(1/t^(p-1)) maps to: p > 2 quadratic smoothness (power_2),
    1 < p < 2 power-type p (power_p), p = 2 within the confidence band a
    logarithmic correction (log_2).  Sub-polynomial decay (p_fit near 1)
    or an unusable fit classify as none.
    """
    mask = (curve.t_grid > 0) & (curve.estimates > 0)
    t = curve.t_grid[mask]
    g = curve.estimates[mask]
    if t.size < 4:
        return SmoothnessClassification("none", math.nan, 0.0,
                                        "insufficient positive data", False, 0.0)
    start = int(t.size * (1.0 - tail_fraction))
    x = np.log(t[start:])
    y = np.log(g[start:])
    if np.ptp(x) <= 0:
        return SmoothnessClassification("none", math.nan, 0.0,
                                        "degenerate tail window", False, 0.0)
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    ss_tot = float(np.sum((y - np.mean(y)) ** 2))
    quality = 1.0 - float(np.sum(resid ** 2)) / ss_tot if ss_tot > 0 else 0.0
    p_fit = 1.0 - float(slope)
    base_integral = float(np.trapezoid(g, t))
    compact = bool(np.any(~mask[np.argmax(mask):]))  # zeros beyond the support
    if compact or p_fit > 2.0:
        extrapolated = 0.0 if compact or p_fit <= 2.0 else \
            float(g[-1] * t[-1] / (p_fit - 2.0))
        integrable = True
        tail_est = base_integral + extrapolated
    else:
        integrable = False
        tail_est = math.inf
    if p_fit <= 1.0 + band:
        return SmoothnessClassification(
            "none", p_fit, quality, "sub-polynomial decay", integrable,
            tail_est)
    if quality < quality_threshold:
        return SmoothnessClassification(
            "none", p_fit, quality, "tail fit quality below threshold",
            integrable, tail_est)
    if abs(p_fit - 2.0) <= band:
        return SmoothnessClassification(
            "log_2", p_fit, quality, "decay 1/t within the p=2 band",
            integrable, tail_est)
    if p_fit < 2.0:
        return SmoothnessClassification(
            "power_p", p_fit, quality, f"power-type p = {p_fit:.3f}",
            integrable, tail_est)
    return SmoothnessClassification(
        "power_2", p_fit, quality, "faster-than-quadratic tail decay",
        integrable, tail_est)
