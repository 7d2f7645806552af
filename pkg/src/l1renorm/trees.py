"""Balanced dyadic splitting against a weight and the weighted sign system.

`split_set` halves a dyadic set A into equal-measure parts carrying the
sign +1 / -1 of a single fine-level Rademacher function, with the weight
integral over each part within [lam/2, 1/(2 lam)] of the whole.  The
split level is chosen so that the level-k dyadic averages of the weight
approximate it within (1-lam)/4 of its integral over A, which forces
the balance.

`build_weighted_system` iterates the split into a depth-K tree whose
nodes A_s carry eta * 2^-k <= int_{A_s} f <= 2^-k / eta, giving the
two-sided comparison

    eta ||sum a_j r_j||_1  <=  ||sum a_j r_{n_j} f||_1  <=  (1/eta) ||sum a_j r_j||_1

checked exactly by `norm_equivalence_check`.

Step-function weights run on explicit cell masks.  Analytic weights with
a singular origin need split levels far beyond explicit enumeration and
run on digit-constraint sets with certified truncated sums (see
`cylinders`); integrals then carry explicit error bounds that every
invariant check honours.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from ._solvers import bisect_scalar, stable_seed
from .cylinders import (
    BitConstraints,
    SplitLevelCapError,
    WalshCache,
    find_min_split_level,
)
from .l1space import AnalyticWeight, DyadicStepFunction, log_weight, rademacher

__all__ = [
    "DyadicSet",
    "SplitResult",
    "SplitInvariantError",
    "TreeNode",
    "WeightedTree",
    "split_set",
    "build_weighted_system",
    "NormEquivalenceResult",
    "norm_equivalence_check",
    "verify_tree",
    "tree_to_jsonable",
    "log_weight",
    "log_weight_tail_check",
    "rademacher_tail_check",
]


class SplitInvariantError(RuntimeError):
    """A split or tree invariant failed its (certified) verification."""


# ---------------------------------------------------------------------------
# Dyadic sets: explicit cell masks or digit-constraint form


@dataclass(frozen=True)
class DyadicSet:
    """Union of level-n dyadic cells of [0,1).

    Either `mask` holds the sorted cell indices explicitly, or
    `constraints` describes the set as a digit cylinder (used when the
    level is far beyond explicit enumeration).
    """

    level: int
    mask: Optional[np.ndarray] = None
    constraints: Optional[BitConstraints] = None

    def __post_init__(self):
        if self.level < 0:
            raise ValueError("level must be >= 0")
        if (self.mask is None) == (self.constraints is None):
            raise ValueError("exactly one of mask/constraints must be given")
        if self.mask is not None:
            m = np.array(np.asarray(self.mask, dtype=np.int64))
            if m.ndim != 1 or np.any(np.diff(m) <= 0) and m.size > 1:
                m = np.unique(m)
            if m.size and (m[0] < 0 or m[-1] >= 2 ** self.level):
                raise ValueError("cell indices out of range")
            m.setflags(write=False)
            object.__setattr__(self, "mask", m)
        else:
            if self.constraints.resolution > self.level:
                raise ValueError("constraints finer than the set's level")

    @classmethod
    def full_interval(cls) -> "DyadicSet":
        return cls(0, mask=np.array([0], dtype=np.int64))

    @property
    def is_explicit(self) -> bool:
        return self.mask is not None

    @property
    def measure(self) -> float:
        if self.is_explicit:
            return self.mask.size * 2.0 ** -self.level
        return self.constraints.measure

    def refined_indices(self, level: int) -> np.ndarray:
        if not self.is_explicit:
            raise ValueError("refined_indices needs the explicit form")
        if level < self.level:
            raise ValueError("cannot refine to a coarser level")
        reps = 2 ** (level - self.level)
        return (self.mask[:, None] * reps
                + np.arange(reps, dtype=np.int64)).ravel()

    def refine(self, level: int) -> "DyadicSet":
        if self.is_explicit:
            return DyadicSet(level, mask=self.refined_indices(level))
        if level < self.level:
            raise ValueError("cannot refine to a coarser level")
        return DyadicSet(level, constraints=self.constraints)

    def to_constraints(self) -> BitConstraints:
        if not self.is_explicit:
            return self.constraints
        if self.mask.size == 2 ** self.level:
            return BitConstraints()
        raise ValueError("general explicit masks have no constraint form")

    def mask_hex(self) -> str:
        if not self.is_explicit:
            raise ValueError("mask_hex needs the explicit form")
        bits = 0
        for j in self.mask.tolist():
            bits |= 1 << j
        return hex(bits)

    def integral_of(self, g) -> float:
        """Exact integral of g (step function or weight) over the set."""
        if not self.is_explicit:
            raise ValueError("integral_of needs the explicit form")
        if isinstance(g, DyadicStepFunction):
            lvl = max(self.level, g.level)
            idx = self.refined_indices(lvl)
            return float(g.refine(lvl).values[idx].sum() * 2.0 ** -lvl)
        if isinstance(g, AnalyticWeight):
            h = 2.0 ** -self.level
            lo = self.mask * h
            return float(np.sum(g.antiderivative(lo + h) - g.antiderivative(lo)))
        raise TypeError(f"unsupported integrand {type(g)!r}")


@dataclass(frozen=True)
class SplitResult:
    """Outcome of one balanced split.

    chosen_n     -- level of the split (the Rademacher index used)
    A0, A1       -- the +1 / -1 parts; equal measure, partitioning A
    integral_A0/1 -- weight integrals over the parts
    lam          -- balance parameter; integrals lie in
                    [lam/2, 1/(2 lam)] times the parent integral
    approx_level -- dyadic-average level that certified the balance
    integral_error -- certified absolute error of the reported integrals
    """

    chosen_n: int
    A0: DyadicSet
    A1: DyadicSet
    integral_A0: float
    integral_A1: float
    lam: float
    approx_level: int
    integral_error: float = 0.0


# ---------------------------------------------------------------------------
# Explicit route (step-function weights)


def _min_expectation_level_step(A: DyadicSet, g: DyadicStepFunction,
                                delta_abs: float) -> int:
    """Smallest kappa >= level(A) with int_A |g - E_kappa g| < delta_abs."""
    m = A.level
    lvl = max(g.level, m)
    vals = g.refine(lvl).values[A.refined_indices(lvl)]
    for kappa in range(m, lvl + 1):
        block = 2 ** (lvl - kappa)
        v = vals.reshape(-1, block)
        err = float(np.abs(v - v.mean(axis=1, keepdims=True)).sum()) * 2.0 ** -lvl
        if err < delta_abs:
            return kappa
    raise AssertionError("unreachable: error is exactly 0 at the weight's level")


def _split_explicit_at(A: DyadicSet, g: DyadicStepFunction, n: int):
    idx = A.refined_indices(n)
    even = idx[idx % 2 == 0]
    odd = idx[idx % 2 == 1]
    a0 = DyadicSet(n, mask=even)
    a1 = DyadicSet(n, mask=odd)
    return a0, a1, a0.integral_of(g), a1.integral_of(g)


def _verify_split_bounds(parent: float, parent_err: float, i0: float, e0: float,
                         i1: float, e1: float, lam: float) -> None:
    lo = 0.5 * lam * (parent + parent_err)
    hi = 0.5 / lam * (parent - parent_err)
    for val, err, side in ((i0, e0, "A0"), (i1, e1, "A1")):
        if not (val - err >= lo - 1e-15 and val + err <= hi + 1e-15):
            raise SplitInvariantError(
                f"integral over {side} = {val:.12g} (+-{err:.2g}) outside "
                f"[{lo:.12g}, {hi:.12g}]")
    if abs((i0 + i1) - parent) > e0 + e1 + parent_err + 1e-12:
        raise SplitInvariantError("children integrals do not sum to the parent")


def split_set(A: DyadicSet, g, lam: float, n_min: int, *,
              level_cap: int = 1 << 21,
              head_cells: int = 1 << 20,
              _walsh: Optional[WalshCache] = None) -> SplitResult:
    """Split A into equal halves aligned with one fine Rademacher sign.

    Finds the smallest kappa >= level(A) whose dyadic averages of g are
    within delta = (1-lam)/4 of g in L^1 over A (scaled by int_A g),
    then splits the level-n cells of A by their last digit, with
    n = max(kappa + 1, n_min).  All three balance invariants are
    verified (with certified error bounds on the singular route) before
    returning.
    """
    if not 0.0 < lam < 1.0:
        raise ValueError("lam must lie in (0, 1)")
    if n_min <= A.level:
        raise ValueError("n_min must exceed the level of A")
    if isinstance(g, DyadicStepFunction):
        if np.any(g.values < 0):
            raise ValueError("the weight must be nonnegative")
        parent = A.integral_of(g)
        if parent <= 0.0:
            raise ValueError("the weight must have positive mass on A")
        delta_abs = 0.25 * (1.0 - lam) * parent
        kappa = _min_expectation_level_step(A, g, delta_abs)
        n = max(kappa + 1, n_min)
        if n > level_cap:
            raise SplitLevelCapError(f"required level {n} exceeds cap {level_cap}")
        a0, a1, i0, i1 = _split_explicit_at(A, g, n)
        _verify_split_bounds(parent, 0.0, i0, 0.0, i1, 0.0, lam)
        if a0.mask.size != a1.mask.size:
            raise SplitInvariantError("parts do not halve the measure")
        return SplitResult(n, a0, a1, i0, i1, lam, kappa, 0.0)
    if isinstance(g, AnalyticWeight):
        node = A.to_constraints()
        cache = _walsh if _walsh is not None else WalshCache(g, head_cells)
        parent, perr = cache.node_integral(node)
        if parent - perr <= 0.0:
            raise ValueError("the weight must have positive mass on A")
        delta_abs = 0.25 * (1.0 - lam) * (parent - perr)
        kappa = find_min_split_level(g, node, delta_abs,
                                     lo=max(A.level, node.resolution),
                                     cap=level_cap)
        n = max(kappa + 1, n_min)
        c0 = node.child(n, 0)
        c1 = node.child(n, 1)
        i0, e0 = cache.node_integral(c0)
        i1, e1 = cache.node_integral(c1)
        _verify_split_bounds(parent, perr, i0, e0, i1, e1, lam)
        return SplitResult(n, DyadicSet(n, constraints=c0),
                           DyadicSet(n, constraints=c1),
                           i0, i1, lam, kappa, max(e0, e1))
    raise TypeError(f"unsupported weight representation {type(g)!r}")


# ---------------------------------------------------------------------------
# The weighted tree


@dataclass(frozen=True)
class TreeNode:
    path: str
    cells: DyadicSet
    integral: float
    integral_error: float


@dataclass(frozen=True)
class WeightedTree:
    """Depth-K system of nested balanced splits against a weight."""

    depth: int
    eta: float
    lambdas: tuple[float, ...]
    indices: tuple[int, ...]
    nodes: dict[str, TreeNode]
    weight_label: str
    explicit: bool

    def level_nodes(self, k: int) -> list[TreeNode]:
        return [self.nodes[format(s, f"0{k}b")] for s in range(2 ** k)] if k else [self.nodes[""]]

    def leaf_paths(self) -> list[str]:
        return [format(s, f"0{self.depth}b") for s in range(2 ** self.depth)]


def default_lambdas(eta: float, depth: int) -> tuple[float, ...]:
    """lam_k = eta^(2^-k); the partial products stay >= eta at any depth."""
    return tuple(eta ** (2.0 ** -(k + 1)) for k in range(depth))


def build_weighted_system(f, eta: float, depth: int, *,
                          lambdas: Optional[tuple[float, ...]] = None,
                          level_cap: int = 1 << 21,
                          head_cells: int = 1 << 20) -> WeightedTree:
    """Iterate `split_set` into a depth-K tree with common per-level indices.

    Per level, every node reports the minimal admissible split level and
    the maximum is used for all of them, keeping a single Rademacher
    index per level.  The eta-sandwich
    eta 2^-k <= int_{A_s} f <= 2^-k / eta is verified on every node.
    """
    if not 0.0 < eta < 1.0:
        raise ValueError("eta must lie in (0, 1)")
    if depth < 1:
        raise ValueError("depth must be >= 1")
    lambdas = tuple(lambdas) if lambdas is not None else default_lambdas(eta, depth)
    if len(lambdas) != depth:
        raise ValueError("need one lambda per level")
    prod = float(np.prod(lambdas))
    if prod < eta - 1e-12:
        raise ValueError("the lambda sequence must keep its product >= eta")

    is_step = isinstance(f, DyadicStepFunction)
    if is_step:
        if np.any(f.values < 0):
            raise ValueError("the weight must be nonnegative")
        total = f.integral()
    elif isinstance(f, AnalyticWeight):
        total = f.total_mass
    else:
        raise TypeError(f"unsupported weight representation {type(f)!r}")
    if abs(total - 1.0) > 1e-9:
        raise ValueError("the weight must have unit mass")

    cache = None if is_step else WalshCache(f, head_cells)
    root = TreeNode("", DyadicSet.full_interval(), total, 0.0)
    nodes: dict[str, TreeNode] = {"": root}
    current = [root]
    indices: list[int] = []
    prev_n = 0
    for k in range(1, depth + 1):
        lam = lambdas[k - 1]
        # common split level: max over the per-node minimal levels
        min_levels = []
        for node in current:
            delta_abs = 0.25 * (1.0 - lam) * (node.integral - node.integral_error)
            if is_step:
                min_levels.append(
                    _min_expectation_level_step(node.cells, f, delta_abs))
            else:
                min_levels.append(find_min_split_level(
                    f, node.cells.to_constraints(), delta_abs,
                    lo=node.cells.level, cap=level_cap))
        n = max(max(min_levels) + 1, prev_n + 1)
        if n > level_cap:
            raise SplitLevelCapError(f"required level {n} exceeds cap {level_cap}")
        next_nodes: list[TreeNode] = []
        for node in current:
            if is_step:
                a0, a1, i0, i1 = _split_explicit_at(node.cells, f, n)
                e0 = e1 = 0.0
            else:
                base = node.cells.to_constraints()
                c0, c1 = base.child(n, 0), base.child(n, 1)
                i0, e0 = cache.node_integral(c0)
                i1, e1 = cache.node_integral(c1)
                a0 = DyadicSet(n, constraints=c0)
                a1 = DyadicSet(n, constraints=c1)
            _verify_split_bounds(node.integral, node.integral_error,
                                 i0, e0, i1, e1, lam)
            for digit, cells, ival, ierr in ((0, a0, i0, e0), (1, a1, i1, e1)):
                child = TreeNode(node.path + str(digit), cells, ival, ierr)
                lo = eta * 2.0 ** -k
                hi = 2.0 ** -k / eta
                if not (ival - ierr >= lo - 1e-15 and ival + ierr <= hi + 1e-15):
                    raise SplitInvariantError(
                        f"node {child.path}: integral {ival:.12g} outside the "
                        f"eta sandwich [{lo:.12g}, {hi:.12g}]")
                nodes[child.path] = child
                next_nodes.append(child)
        current = next_nodes
        indices.append(n)
        prev_n = n
    return WeightedTree(depth, eta, lambdas, tuple(indices), nodes,
                        getattr(f, "label", "step"), is_step)


# ---------------------------------------------------------------------------
# Norm equivalence on the weighted system


@dataclass(frozen=True)
class NormEquivalenceResult:
    lhs: float          # eta * ||sum a_j r_j||_1
    mid: float          # ||sum a_j r_{n_j} f||_1
    rhs: float          # (1/eta) * ||sum a_j r_j||_1
    ratio: float
    ratio_low: float    # certified bounds on mid / ||sum a_j r_j||_1
    ratio_high: float
    eta: float


def leaf_sign_matrix(depth: int) -> np.ndarray:
    """signs[s, j] = value of r_{n_{j+1}} on the leaf with path bits of s."""
    s = np.arange(2 ** depth, dtype=np.int64)
    out = np.empty((2 ** depth, depth))
    for j in range(depth):
        out[:, j] = 1.0 - 2.0 * ((s >> (depth - 1 - j)) & 1)
    return out


def norm_equivalence_check(tree: WeightedTree, f, coefficients) -> NormEquivalenceResult:
    """Exact two-sided comparison of the weighted and plain sign systems.

    ||sum a_j r_j||_1 is the mean of |c_s| over the 2^K sign patterns;
    ||sum a_j r_{n_j} f||_1 is sum_s |c_s| int_{A_s} f because the
    weighted combination is constant with value c_s on A_s.
    """
    a = np.asarray(coefficients, dtype=float)
    if a.shape != (tree.depth,):
        raise ValueError(f"need {tree.depth} coefficients")
    if not np.any(a != 0.0):
        raise ValueError("coefficients must not all vanish")
    signs = leaf_sign_matrix(tree.depth)
    c = signs @ a
    base = float(np.abs(c).mean())
    leaves = [tree.nodes[p] for p in tree.leaf_paths()]
    ints = np.array([n.integral for n in leaves])
    errs = np.array([n.integral_error for n in leaves])
    mid = float(np.abs(c) @ ints)
    err = float(np.abs(c) @ errs)
    res = NormEquivalenceResult(
        lhs=tree.eta * base, mid=mid, rhs=base / tree.eta,
        ratio=mid / base, ratio_low=(mid - err) / base,
        ratio_high=(mid + err) / base, eta=tree.eta)
    if not (res.ratio_low >= tree.eta - 1e-12
            and res.ratio_high <= 1.0 / tree.eta + 1e-12):
        raise SplitInvariantError(
            f"norm ratio [{res.ratio_low:.12g}, {res.ratio_high:.12g}] escapes "
            f"[{tree.eta}, {1.0 / tree.eta}]")
    return res


def verify_tree(tree: WeightedTree, f, *, recheck_head_cells: int = 1 << 19,
                rng_seed: int = 7) -> list[dict]:
    """Independent re-validation of every node invariant.

    Integrals are recomputed from scratch (for the singular route with a
    different truncation length), measures and sign constancy are checked
    structurally, and the value-transfer property is sampled on explicit
    trees.
    """
    rows: list[dict] = []
    cache = None
    if not tree.explicit:
        cache = WalshCache(f, recheck_head_cells)
    for path, node in sorted(tree.nodes.items()):
        k = len(path)
        if k == 0:
            continue
        ok_measure = abs(node.cells.measure - 2.0 ** -k) < 1e-15
        if tree.explicit:
            ival, ierr = node.cells.integral_of(f), 0.0
            idx = node.cells.mask
            want = 0 if path[-1] == "0" else 1
            ok_sign = bool(np.all(idx % 2 == want))
        else:
            ival, ierr = cache.node_integral(node.cells.to_constraints())
            cons = node.cells.to_constraints()
            ok_sign = cons.bits[-1] == tree.indices[k - 1] and \
                cons.signs[-1] == int(path[-1])
        lo = tree.eta * 2.0 ** -k
        hi = 2.0 ** -k / tree.eta
        tol = ierr + node.integral_error + 1e-12
        ok_int = (ival >= lo - tol) and (ival <= hi + tol)
        ok_match = abs(ival - node.integral) <= tol
        rows.append({
            "node": path,
            "measure_ok": ok_measure,
            "sign_ok": ok_sign,
            "sandwich_ok": bool(ok_int),
            "integral_recomputed_ok": bool(ok_match),
            "integral": node.integral,
        })
    if tree.explicit:
        rng = np.random.default_rng(stable_seed(rng_seed, "value-transfer"))
        coeffs = rng.standard_normal((8, tree.depth))
        signs = leaf_sign_matrix(tree.depth)
        lvl = tree.indices[-1]
        rad = np.stack([rademacher(n).refine(lvl).values for n in tree.indices])
        for a in coeffs:
            combo = a @ rad
            c = signs @ a
            for s, path in enumerate(tree.leaf_paths()):
                cells = tree.nodes[path].cells.refined_indices(lvl)
                vals = np.unique(combo[cells])
                if vals.size != 1 or vals[0] != c[s]:
                    rows.append({"node": path, "value_transfer_ok": False})
                    break
        rows.append({"node": "*", "value_transfer_ok": True})
    return rows


def tree_to_jsonable(tree: WeightedTree) -> dict:
    nodes = {}
    for path, node in sorted(tree.nodes.items()):
        entry = {
            "level": node.cells.level,
            "integral": node.integral,
            "integral_error": node.integral_error,
        }
        if node.cells.is_explicit:
            entry["mask_hex"] = node.cells.mask_hex()
        else:
            cons = node.cells.to_constraints()
            entry["bits"] = [[int(b), int(s)]
                             for b, s in zip(cons.bits, cons.signs)]
        nodes[path] = entry
    return {
        "depth": tree.depth,
        "eta": tree.eta,
        "lambdas": list(tree.lambdas),
        "indices": [int(n) for n in tree.indices],
        "weight": tree.weight_label,
        "explicit": tree.explicit,
        "nodes": nodes,
    }


# ---------------------------------------------------------------------------
# Tail checks for the singular weight and the plain sign span


@dataclass(frozen=True)
class LogWeightTailReport:
    x_zero: float        # solves x log^2(x/e) = 1 on (0, 1/e)
    t_zero: float        # f(x_zero^2 / e)
    t_grid: np.ndarray
    distribution: np.ndarray     # F(t) = f^{-1}(t)
    mass_above: np.ndarray       # int_{f > t} f
    tail: np.ndarray             # int_t^inf F(s) ds
    bound: np.ndarray            # 1 / (4 log(4 t))
    tail_ok: bool
    mass_ok: bool                # int_{f > t} f >= 1/(2 log 4t)
    product_ok: bool             # t F(t) <= 1/(4 log 4t)

    @property
    def passed(self) -> bool:
        return self.tail_ok and self.mass_ok and self.product_ok


def log_weight_tail_check(t_grid=None) -> LogWeightTailReport:
    """Exact tail bounds for the singular log weight.

    Uses the closed antiderivative and the decreasing-branch inverse:
    F(t) = f^{-1}(t) and int_t^inf F = int_{f>t} f - t F(t).
    """
    w = log_weight()
    x_zero = bisect_scalar(lambda x: x * (math.log(x) - 1.0) ** 2 - 1.0,
                           1e-12, 1.0 / math.e, tol=1e-16, max_iter=200)
    t_zero = float(w.evaluate(x_zero * x_zero / math.e))
    if t_grid is None:
        t_grid = np.geomspace(max(10.0, t_zero), 1e4, 50)
    t = np.asarray(t_grid, dtype=float)
    if np.any(t <= t_zero):
        raise ValueError(f"tail grid must stay above t_zero = {t_zero:.6g}")
    x_t = w.inverse_decreasing_batch(t)
    mass = w.antiderivative(x_t)
    tail = mass - t * x_t
    bound = 1.0 / (4.0 * np.log(4.0 * t))
    return LogWeightTailReport(
        x_zero=x_zero, t_zero=t_zero, t_grid=t,
        distribution=x_t, mass_above=mass, tail=tail, bound=bound,
        tail_ok=bool(np.all(tail >= bound)),
        mass_ok=bool(np.all(mass >= 2.0 * bound)),
        product_ok=bool(np.all(t * x_t <= bound)),
    )


@dataclass(frozen=True)
class RademacherTailReport:
    dim: int
    sample_count: int
    seed: int
    t_grid: np.ndarray
    estimates: np.ndarray        # lower estimates of the span's tail envelope
    slope: float                 # fitted slope of log G against t^2
    intercept: float
    r_squared: float
    c_one: float                 # G(t) <= c_two * exp(-c_one^2 t^2 / 2) on the grid
    c_two: float
    envelope_ok: bool

    @property
    def decays(self) -> bool:
        return self.slope < 0.0


def rademacher_tail_check(sample_count: int = 100_000, t_grid=None,
                          seed: int = 0, dim: int = 8,
                          chunk: int = 16_384) -> RademacherTailReport:
    """Gaussian-type decay of the tail envelope over the sign span.

    Estimates G(t) = sup over unit-L1 combinations of the first `dim`
    sign functions of the tail integral, fits log G against t^2, and
    reports constants realizing the fitted exponential envelope.
    """
    if t_grid is None:
        t_grid = np.linspace(0.8, 2.8, 21)
    t = np.asarray(t_grid, dtype=float)
    basis = np.stack([rademacher(n).refine(dim).values for n in range(1, dim + 1)])
    rng = np.random.default_rng(stable_seed(seed, "rademacher-tail", dim))
    best = np.zeros(t.shape)
    done = 0
    while done < sample_count:
        m = min(chunk, sample_count - done)
        coeffs = rng.standard_normal((m, dim))
        vals = np.abs(coeffs @ basis)
        vals /= vals.mean(axis=1)[:, None]
        for i, ti in enumerate(t):
            tails = np.maximum(vals - ti, 0.0).mean(axis=1)
            best[i] = max(best[i], float(tails.max()))
        done += m
    pos = best > 0.0
    x = t[pos] ** 2
    y = np.log(best[pos])
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 - float(np.sum(resid ** 2)) / ss_tot if ss_tot > 0 else 0.0
    c_one = math.sqrt(max(-2.0 * slope, 0.0))
    c_two = float(np.max(best * np.exp(0.5 * c_one ** 2 * t ** 2))) * (1.0 + 1e-12)
    envelope = c_two * np.exp(-0.5 * c_one ** 2 * t ** 2)
    return RademacherTailReport(
        dim=dim, sample_count=sample_count, seed=seed, t_grid=t,
        estimates=best, slope=float(slope), intercept=float(intercept),
        r_squared=float(r2), c_one=c_one, c_two=c_two,
        envelope_ok=bool(np.all(best <= envelope * (1.0 + 1e-9))),
    )
