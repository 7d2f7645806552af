"""Verification suites behind the `verify` command.

Each runner takes an ExperimentConfig and returns a VerificationReport
plus named CSV artifacts (header, rows).  Everything is seeded from the
config, so a rerun with the same configuration writes byte-identical
files.
"""

from __future__ import annotations

import math
import time

import numpy as np

from . import orlicz
from ._solvers import bisect_scalar, stable_seed
from .config import ExperimentConfig
from .l1space import DyadicStepFunction, combine_steps, log_weight, rademacher
from .reports import VerificationReport, fmt17
from .subspaces import (
    IndexCurve,
    SamplerConfig,
    Subspace,
    c_index,
    classify_smoothness,
    g_index,
    index_curve,
    smoothness_t_grid,
    upper_envelope_integral,
    verify_convexity_estimate,
    verify_smoothness_estimate,
)
from .trees import (
    build_weighted_system,
    log_weight_tail_check,
    norm_equivalence_check,
    rademacher_tail_check,
    tree_to_jsonable,
    verify_tree,
)

__all__ = ["SUITES", "run_suite", "random_step_functions"]

_ULP_SLACK = 4e-15   # comparator slack absorbing float rounding of equalities


def _sampler(cfg: ExperimentConfig, cap: int | None = None) -> SamplerConfig:
    count = cfg.sample_count if cap is None else min(cfg.sample_count, cap)
    return SamplerConfig(seed=cfg.seed, sample_count=count,
                         refinement_steps=cfg.refinement_steps)


def random_step_functions(count: int, seed: int, max_level: int = 8,
                          scale: float = 10.0) -> list[DyadicStepFunction]:
    """Deterministic nonzero random step functions at mixed levels."""
    rng = np.random.default_rng(stable_seed(seed, "step-functions"))
    out = []
    while len(out) < count:
        level = int(rng.integers(0, max_level + 1))
        vals = scale * rng.standard_normal(2 ** level)
        if np.any(vals != 0.0):
            out.append(DyadicStepFunction(level, vals))
    return out


# ---------------------------------------------------------------------------
# orlicz suite


def run_orlicz(cfg: ExperimentConfig):
    rep = VerificationReport("orlicz", _constants())
    rng = np.random.default_rng(stable_seed(cfg.seed, "orlicz-suite"))

    grid = np.concatenate([np.linspace(0.0, 2.0, 201),
                           np.geomspace(2.0, 100.0, 200)])
    worst = orlicz.validate_closed_form(grid)
    rep.add("closed_form_vs_quadrature",
            "M(t) = int_0^|t| phi(u)(|t|-u) du",
            worst, 1e-10, "<=", note=f"{grid.size} grid points")

    n = min(cfg.sample_count, 200_000)
    t = rng.uniform(0.0, 1e3, n)
    alpha = 1.0 + rng.exponential(2.0, n)
    lhs = alpha * alpha * orlicz.m_value(t)
    rhs = orlicz.m_value(alpha * t)
    bad = int(np.sum(rhs > lhs * (1.0 + _ULP_SLACK) + 1e-300))
    rep.add("scaling_violations", "alpha^2 M(t) >= M(alpha t)",
            bad, 0, "<=", note=f"{n} samples")
    bad = int(np.sum(orlicz.m_value(2.0 * t) > 4.0 * orlicz.m_value(t)
                     * (1.0 + _ULP_SLACK)))
    rep.add("doubling_violations", "4 M(t) >= M(2t)", bad, 0, "<=")
    bad = int(np.sum(t * t * orlicz.m_second(t) / 3.0
                     > orlicz.m_value(t) * (1.0 + _ULP_SLACK)))
    rep.add("curvature_violations", "M(t) >= t^2 M''(t) / 3", bad, 0, "<=")
    bad = int(np.sum(orlicz.m_value(t) > 6.0 * t * (1.0 + _ULP_SLACK)))
    rep.add("linear_cap_violations", "M(t) <= 6 |t|", bad, 0, "<=")

    k, big_c = orlicz.norm_equivalence_constants()
    rep.add("equivalence_k", "k ||.|| <= ||.||_1 <= ||.||", k, 1.0 / 6.0, ">=",
            slack=1e-15, note="certified on a dense grid")
    rep.add("equivalence_C", "M(t) <= C |t|", big_c, 6.0, "<=", slack=1e-15)

    funcs = random_step_functions(min(cfg.pair_count, 1000), cfg.seed)
    worst_resid = 0.0
    sandwich_bad = 0
    for f in funcs:
        sol = orlicz.luxemburg_norm(f, cfg.tolerance_scalar)
        worst_resid = max(worst_resid, abs(sol.modular_at_lambda - 1.0))
        l1 = f.l1_norm()
        if not (l1 <= sol.lam * (1 + 1e-12) and sol.lam <= 6.0 * l1 * (1 + 1e-12)):
            sandwich_bad += 1
    rep.add("solver_residual", "int M(f/||f||) = 1",
            worst_resid, cfg.tolerance_scalar, "<=",
            note=f"{len(funcs)} random step functions")
    rep.add("solver_sandwich_violations", "||f||_1 <= ||f|| <= 6 ||f||_1",
            sandwich_bad, 0, "<=")

    one = DyadicStepFunction(0, [1.0])
    rep.add("unit_norm_exact", "||1|| = 1 on a probability space",
            abs(orlicz.luxemburg_norm(one).lam - 1.0), 0.0, "<=", slack=0.0,
            note="exact equality required")
    indicator = DyadicStepFunction(1, [2.0, 0.0])
    lam = orlicz.luxemburg_norm(indicator, cfg.tolerance_scalar).lam
    oracle = 2.0 / bisect_scalar(lambda u: orlicz.m_defining_integral(u) - 2.0,
                                 1.0, 2.0, tol=1e-13)
    rep.add("indicator_vs_oracle", "||2 chi_[0,1/2)|| solves M(2/lam)/2 = 1",
            abs(lam - oracle), 1e-8, "<=", note=f"oracle={fmt17(oracle)}")
    return rep, {}


def _constants() -> dict:
    k, big_c = orlicz.norm_equivalence_constants()
    return {"k": k, "C": big_c, "K1": (k / 18.0) ** 2, "K2": 2.0 * 128.0 * big_c}


# ---------------------------------------------------------------------------
# lemma suite (two-sided midpoint convexity bounds)


def midpoint_gap_violations(a: np.ndarray, b: np.ndarray) -> tuple[int, int]:
    """Counts of lower/upper violations of the two-sided midpoint bound."""
    c = np.maximum(np.abs(a), np.abs(b))
    gap = orlicz.m_value(a) + orlicz.m_value(b) - 2.0 * orlicz.m_value(0.5 * (a + b))
    lower = 0.25 * orlicz.m_second(c) * (a - b) ** 2
    upper = 16.0 * orlicz.m_value(0.5 * (a - b))
    scale = np.maximum.reduce([np.abs(gap), lower, np.full_like(gap, 1e-300)])
    low_bad = int(np.sum(lower > gap + _ULP_SLACK * scale + 1e-300))
    up_scale = np.maximum(np.abs(gap), upper)
    up_bad = int(np.sum(gap > upper + _ULP_SLACK * up_scale + 1e-300))
    return low_bad, up_bad


def boundary_pair_families(count: int = 20_001) -> list[tuple[np.ndarray, np.ndarray]]:
    t = np.linspace(-1e3, 1e3, count)
    return [
        (np.array([1.0]), np.array([-1.0])),
        (np.array([-1.0]), np.array([1.0])),
        (t, 0.5 * t),
        (t, -t),
    ]


def run_lemma(cfg: ExperimentConfig):
    rep = VerificationReport("lemma", _constants())
    rng = np.random.default_rng(stable_seed(cfg.seed, "lemma-suite"))
    n = min(cfg.sample_count, 1_000_000)
    low_total = up_total = 0
    done = 0
    while done < n:
        m = min(200_000, n - done)
        a = rng.uniform(-1e3, 1e3, m)
        b = rng.uniform(-1e3, 1e3, m)
        lo, up = midpoint_gap_violations(a, b)
        low_total += lo
        up_total += up
        done += m
    for a, b in boundary_pair_families():
        lo, up = midpoint_gap_violations(a, b)
        low_total += lo
        up_total += up
    rep.add("lower_violations",
            "M''(c)(a-b)^2/4 <= M(a)+M(b)-2M((a+b)/2)", low_total, 0, "<=",
            note=f"{n} random pairs + boundary families")
    rep.add("upper_violations",
            "M(a)+M(b)-2M((a+b)/2) <= 16 M((a-b)/2)", up_total, 0, "<=")
    gap_at_corner = (orlicz.m_value(1.0) + orlicz.m_value(-1.0)
                     - 2.0 * orlicz.m_value(0.0))
    rep.add("sharpness_at_corner", "equality at a=1, b=-1",
            gap_at_corner, 0.25 * orlicz.m_second(1.0) * 4.0, "<=", slack=0.0,
            note="lower bound tight")
    return rep, {}


# ---------------------------------------------------------------------------
# theorem-a suite (convexity bound)


def rademacher_span(d: int) -> Subspace:
    return Subspace([rademacher(n) for n in range(1, d + 1)], f"rademacher:{d}")


def affine_span() -> Subspace:
    one = DyadicStepFunction(0, [1.0])
    return Subspace([one, rademacher(1)], "span{1,r1}")


def run_theorem_a(cfg: ExperimentConfig):
    rep = VerificationReport("theorem-a", _constants())
    sampler = _sampler(cfg, cap=4096)
    X = affine_span()
    for t in (0.1, 0.3, 0.5, 0.7, 0.9):
        est = c_index(X, t, sampler)
        rep.add(f"c_exact_t_{t:g}", "C(t) = 1/2 on span{1, r1}",
                abs(est - 0.5), 1e-3, "<=")
    eps_grid = cfg.epsilon_grid.build()
    artifacts = {}
    for d in (2, 3, 4):
        sub = verify_convexity_estimate(
            rademacher_span(d), eps_grid, pair_count=cfg.pair_count,
            seed=cfg.seed, sampler=sampler)
        for row in sub.checks:
            rep.checks.append(type(row)(
                f"rademacher{d}_{row.name}", row.paper_anchor, row.lhs,
                row.rhs, row.margin, row.passed, row.note))
        artifacts[f"delta_rademacher{d}"] = (
            ["argument", "estimate", "bound", "margin"],
            [[c.name.split("_")[-1], c.lhs, c.rhs, c.margin]
             for c in sub.checks])
        rep.constants[f"K_X_rademacher{d}"] = sub.constants["K_X"]
    return rep, artifacts


# ---------------------------------------------------------------------------
# theorem-b suite (smoothness bound)


def run_theorem_b(cfg: ExperimentConfig):
    rep = VerificationReport("theorem-b", _constants())
    sampler = _sampler(cfg, cap=4096)
    tau_grid = cfg.tau_grid.build()
    artifacts = {}

    X1 = Subspace([DyadicStepFunction(0, [1.0])], "span{1}")
    k2 = rep.constants["K2"]
    curve1 = index_curve(X1, "G", smoothness_t_grid(tau_grid), sampler)
    for tau in tau_grid[tau_grid <= 1.0]:
        b_pipe = k2 * tau * tau * upper_envelope_integral(curve1, 1.0 / tau)
        b_closed = 768.0 * tau * tau
        rel = abs(b_pipe - b_closed) / b_closed
        rep.add(f"span1_closed_form_tau_{tau:g}",
                "B(tau) = 768 tau^2 for the constant span (tau <= 1)",
                rel, 0.01, "<=", note=f"pipeline={fmt17(b_pipe)}")

    X2 = affine_span()
    for t in (0.1, 0.3, 0.5, 0.7, 0.9):
        est = g_index(X2, t, sampler)
        rep.add(f"g_exact_t_{t:g}", "G(t) = (2-t)/2 on span{1, r1}",
                abs(est - (2.0 - t) / 2.0), 1e-3, "<=")

    for X in (X2, rademacher_span(2), rademacher_span(3), rademacher_span(4)):
        sub = verify_smoothness_estimate(
            X, tau_grid, pair_count=min(cfg.pair_count, 4096), seed=cfg.seed,
            sampler=sampler, figiel_pairs=min(cfg.pair_count, 1024))
        tag = X.label.replace("{", "").replace("}", "").replace(",", "_")
        for row in sub.checks:
            rep.checks.append(type(row)(
                f"{tag}_{row.name}", row.paper_anchor, row.lhs, row.rhs,
                row.margin, row.passed, row.note))
        artifacts[f"rho_{tag}"] = (
            ["argument", "estimate", "bound", "margin"],
            [[c.name.split("_")[-1], c.lhs, c.rhs, c.margin]
             for c in sub.checks if c.name.startswith("rho")])
    return rep, artifacts


# ---------------------------------------------------------------------------
# tail suite (singular weight bounds + decay classification)


def run_tail(cfg: ExperimentConfig):
    rep = VerificationReport("tail", _constants())
    tail = log_weight_tail_check()
    worst_tail = float(np.min(tail.tail - tail.bound))
    rep.add("tail_lower_bound", "int_t^inf F_f >= 1/(4 log(4t))",
            worst_tail, 0.0, ">=",
            note=f"x0={fmt17(tail.x_zero)} t0={fmt17(tail.t_zero)}")
    rep.add("mass_lower_bound", "int_(f>t) f >= 1/(2 log(4t))",
            float(np.min(tail.mass_above - 2.0 * tail.bound)), 0.0, ">=")
    rep.add("product_upper_bound", "t F_f(t) <= 1/(4 log(4t))",
            float(np.max(tail.t_grid * tail.distribution - tail.bound)),
            0.0, "<=")

    rad = rademacher_tail_check(sample_count=cfg.sample_count, seed=cfg.seed,
                                dim=8)
    rep.add("rademacher_decay_slope", "log G linear in t^2 with slope < 0",
            rad.slope, 0.0, "<=")
    rep.add("rademacher_fit_quality", "R^2 of the Gaussian-form fit",
            rad.r_squared, 0.95, ">=")
    rep.add("rademacher_envelope", "G(t) <= c2 exp(-c1^2 t^2 / 2) on the grid",
            0 if rad.envelope_ok else 1, 0, "<=",
            note=f"c1={fmt17(rad.c_one)} c2={fmt17(rad.c_two)}")
    rad_curve = IndexCurve("G", rad.t_grid, np.minimum(rad.estimates, 1.0),
                           "lower_bound_of_sup", _sampler(cfg), "rademacher:8")
    cls = classify_smoothness(rad_curve)
    rep.add("rademacher_regime", "integrable G gives quadratic smoothness",
            1.0 if cls.regime == "power_2" else 0.0, 1.0, ">=",
            note=f"p_fit={cls.p_fit:.3f} quality={cls.fit_quality:.3f}")

    w = log_weight()
    tree = build_weighted_system(w, cfg.tree_eta, cfg.tree_depth)
    ef = Subspace.from_weighted_tree(tree, w)
    grid = np.geomspace(max(10.0, tail.t_zero * 1.01), 1e4, 25)
    ef_sampler = SamplerConfig(seed=cfg.seed, sample_count=512,
                               refinement_steps=0)
    ef_curve = index_curve(ef, "G", grid, ef_sampler)
    bound = 1.0 / (4.0 * np.log(4.0 * grid))
    rep.add("weighted_span_inherits_tail", "G_E(t) >= int_t^inf F_f",
            float(np.min(ef_curve.estimates - bound)), 0.0, ">=")
    cls_ef = classify_smoothness(ef_curve)
    rep.add("weighted_span_regime", "sub-polynomial decay escapes power types",
            1.0 if (cls_ef.regime == "none"
                    and "sub-polynomial" in cls_ef.diagnostic) else 0.0,
            1.0, ">=", note=cls_ef.diagnostic)

    artifacts = {
        "log_weight_tail": (
            ["t", "distribution", "mass_above", "tail", "bound"],
            [[t, F, m, ti, b] for t, F, m, ti, b in zip(
                tail.t_grid, tail.distribution, tail.mass_above, tail.tail,
                tail.bound)]),
        "rademacher_tail": (
            ["t", "estimate", "envelope", "margin"],
            [[t, g, rad.c_two * math.exp(-0.5 * rad.c_one ** 2 * t * t),
              rad.c_two * math.exp(-0.5 * rad.c_one ** 2 * t * t) - g]
             for t, g in zip(rad.t_grid, rad.estimates)]),
        "weighted_span_tail": (
            ["t", "estimate", "bound", "margin"],
            [[t, g, b, g - b] for t, g, b in zip(grid, ef_curve.estimates,
                                                 bound)]),
    }
    return rep, artifacts


# ---------------------------------------------------------------------------
# tree suite (splitting construction)


def run_tree(cfg: ExperimentConfig):
    rep = VerificationReport("tree", _constants())
    one = DyadicStepFunction(0, [1.0])
    control = build_weighted_system(one, cfg.tree_eta, cfg.tree_depth)
    plain_ok = control.indices == tuple(range(1, cfg.tree_depth + 1))
    for k in range(1, cfg.tree_depth + 1):
        for s in range(2 ** k):
            node = control.nodes[format(s, f"0{k}b")]
            plain_ok &= node.cells.level == k and node.cells.mask.tolist() == [s]
    rep.add("control_reproduces_plain_signs",
            "unit weight degenerates to the dyadic sign system",
            1.0 if plain_ok else 0.0, 1.0, ">=",
            note=f"indices={control.indices}")

    w = log_weight()
    tree = build_weighted_system(w, cfg.tree_eta, cfg.tree_depth)
    rows = verify_tree(tree, w)
    bad = sum(1 for r in rows if not all(
        v for k_, v in r.items() if k_.endswith("_ok")))
    rep.add("node_invariants", "eta 2^-k <= int_node f <= 2^-k / eta",
            bad, 0, "<=", note=f"{len(rows)} checks, indices={tree.indices}")

    rng = np.random.default_rng(stable_seed(cfg.seed, "tree-coefficients"))
    count = min(cfg.pair_count, 1000)
    worst_lo, worst_hi = math.inf, -math.inf
    for _ in range(count):
        res = norm_equivalence_check(tree, w, rng.standard_normal(tree.depth))
        worst_lo = min(worst_lo, res.ratio_low)
        worst_hi = max(worst_hi, res.ratio_high)
    rep.add("norm_ratio_lower", "eta ||sum a r||_1 <= ||sum a r_n f||_1",
            worst_lo, cfg.tree_eta, ">=", note=f"{count} coefficient vectors")
    rep.add("norm_ratio_upper", "||sum a r_n f||_1 <= ||sum a r||_1 / eta",
            worst_hi, 1.0 / cfg.tree_eta, "<=")
    artifacts = {"weighted_tree": tree_to_jsonable(tree),
                 "control_tree": tree_to_jsonable(control)}
    return rep, artifacts


SUITES = {
    "orlicz": run_orlicz,
    "lemma": run_lemma,
    "theorem-a": run_theorem_a,
    "theorem-b": run_theorem_b,
    "tail": run_tail,
    "tree": run_tree,
}


def run_suite(name: str, cfg: ExperimentConfig):
    """Run one suite; returns (report, artifacts) with timing recorded."""
    runner = SUITES[name]
    start = time.perf_counter()
    report, artifacts = runner(cfg)
    report.timing = time.perf_counter() - start
    report.config_echo = cfg.to_dict()
    return report, artifacts
