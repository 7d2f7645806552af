"""Command-line entry points.

Subcommands: norm, indexes, moduli, verify, tree, tail.  Exit codes:
0 = all checks passed, 1 = a verification check failed, 2 = usage or
configuration error.  All artifacts land under
<output-dir>/<suite>/<name>.{csv,json} and are byte-identical across
reruns with the same configuration; RENORM_THREADS caps worker count.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from . import orlicz
from .config import ExperimentConfig, GridSpec
from .l1space import DyadicStepFunction, log_weight, rademacher
from .reports import fmt17, write_csv, write_json
from .subspaces import (
    SamplerConfig,
    Subspace,
    index_curve,
    k_x_constant,
    moduli_estimate,
)
from .suites import SUITES, run_suite
from .trees import build_weighted_system, log_weight_tail_check, tree_to_jsonable


class UsageError(Exception):
    """Bad function/subspace/config specification (exit code 2)."""


# ---------------------------------------------------------------------------
# Specification parsers


def parse_function(spec: str):
    """Built-in function specs for `norm --fn`.

    constant c | indicator a b h | rademacher n | logweight | step-file path
    """
    parts = spec.split()
    if not parts:
        raise UsageError("empty function spec")
    kind = parts[0]
    try:
        if kind == "constant" and len(parts) == 2:
            return DyadicStepFunction(0, [float(parts[1])])
        if kind == "indicator" and len(parts) == 4:
            a, b, h = map(float, parts[1:])
            return _dyadic_indicator(a, b, h)
        if kind == "rademacher" and len(parts) == 2:
            return rademacher(int(parts[1]))
        if kind == "logweight" and len(parts) == 1:
            return log_weight()
        if kind == "step-file" and len(parts) == 2:
            return _load_step_file(parts[1])
    except UsageError:
        raise
    except (ValueError, OSError) as exc:
        raise UsageError(f"bad function spec {spec!r}: {exc}") from exc
    raise UsageError(f"unrecognized function spec {spec!r}")


def _dyadic_indicator(a: float, b: float, height: float) -> DyadicStepFunction:
    if not 0.0 <= a < b <= 1.0:
        raise UsageError("indicator needs 0 <= a < b <= 1")
    for level in range(25):
        scale = 2 ** level
        ja, jb = a * scale, b * scale
        if abs(ja - round(ja)) < 1e-9 and abs(jb - round(jb)) < 1e-9:
            vals = np.zeros(scale)
            vals[int(round(ja)):int(round(jb))] = height
            return DyadicStepFunction(level, vals)
    raise UsageError("indicator endpoints must be dyadic rationals (k / 2^m, m <= 24)")


def _load_step_file(path: str) -> DyadicStepFunction:
    with open(path, "r", encoding="utf-8") as handle:
        data = json.load(handle)
    return DyadicStepFunction(int(data["level"]), data["values"])


def parse_subspace(spec: str) -> Subspace:
    """Subspace specs: rademacher:d | constants | weighted:logweight:eta:depth
    | file:path (JSON list of step functions)."""
    try:
        if spec == "constants":
            return Subspace([DyadicStepFunction(0, [1.0])], "constants")
        if spec.startswith("rademacher:"):
            d = int(spec.split(":", 1)[1])
            if d < 1:
                raise UsageError("rademacher:d needs d >= 1")
            return Subspace([rademacher(n) for n in range(1, d + 1)], spec)
        if spec.startswith("weighted:logweight:"):
            _, _, eta_s, depth_s = spec.split(":")
            w = log_weight()
            tree = build_weighted_system(w, float(eta_s), int(depth_s))
            return Subspace.from_weighted_tree(tree, w, spec)
        if spec.startswith("file:"):
            path = spec.split(":", 1)[1]
            with open(path, "r", encoding="utf-8") as handle:
                data = json.load(handle)
            basis = [DyadicStepFunction(int(f["level"]), f["values"])
                     for f in data["functions"]]
            return Subspace(basis, spec)
    except UsageError:
        raise
    except (ValueError, OSError, KeyError) as exc:
        raise UsageError(f"bad subspace spec {spec!r}: {exc}") from exc
    raise UsageError(f"unrecognized subspace spec {spec!r}")


def load_config(args: argparse.Namespace) -> ExperimentConfig:
    cfg = (ExperimentConfig.from_file(args.config) if getattr(args, "config", None)
           else ExperimentConfig())
    overrides = {}
    for key in ("seed", "sample_count", "pair_count", "step_level",
                "refinement_steps", "output_dir", "tree_eta", "tree_depth",
                "t_grid", "epsilon_grid", "tau_grid"):
        val = getattr(args, key, None)
        if val is not None:
            overrides[key] = val
    try:
        return cfg.with_overrides(**overrides)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc


# ---------------------------------------------------------------------------
# Commands


def cmd_norm(args) -> int:
    f = parse_function(args.fn)
    sol = orlicz.luxemburg_norm(f, args.tolerance)
    l1 = f.l1_norm()
    print(f"luxemburg_norm {fmt17(sol.lam)}")
    print(f"l1_norm {fmt17(l1)}")
    print(f"modular_residual {fmt17(abs(sol.modular_at_lambda - 1.0) if sol.lam else 0.0)}")
    print(f"iterations {sol.iterations}")
    return 0


def cmd_indexes(args) -> int:
    cfg = load_config(args)
    X = parse_subspace(args.subspace)
    which = args.which.upper()
    if which not in ("C", "G"):
        raise UsageError("--which must be C or G")
    grid = (GridSpec.parse(args.grid).build() if args.grid
            else (cfg.t_grid.build() if which == "C"
                  else np.geomspace(0.05, 20.0, 40)))
    sampler = SamplerConfig(seed=cfg.seed, sample_count=min(cfg.sample_count, 8192),
                            refinement_steps=cfg.refinement_steps)
    curve = index_curve(X, which, grid, sampler)
    rows = [[t, v, 1.0, 1.0 - v] for t, v in zip(curve.t_grid, curve.estimates)]
    out = os.path.join(cfg.output_dir, "indexes",
                       f"{which}_{_slug(X.label)}.csv")
    write_csv(out, ["argument", "estimate", "bound", "margin"], rows)
    print(f"wrote {out}")
    return 0


def cmd_moduli(args) -> int:
    cfg = load_config(args)
    X = parse_subspace(args.subspace)
    if not X.supports_luxemburg:
        raise UsageError("moduli need Luxemburg norms; weighted spans "
                         "support indexes (C/G) only")
    kind = args.kind
    if kind not in ("delta", "rho", "rho_figiel"):
        raise UsageError("--kind must be delta, rho or rho_figiel")
    grid = (GridSpec.parse(args.grid).build() if args.grid
            else (cfg.epsilon_grid if kind == "delta" else cfg.tau_grid).build())
    sampler = SamplerConfig(seed=cfg.seed, sample_count=min(cfg.sample_count, 4096),
                            refinement_steps=cfg.refinement_steps)
    est = moduli_estimate(X, kind, grid, pair_count=cfg.pair_count,
                          seed=cfg.seed, sampler=sampler)
    sign = 1.0 if kind == "delta" else -1.0
    rows = [[a, v, b, sign * (v - b)] for a, v, b in
            zip(est.argument_grid, est.estimates, est.bounds)]
    out = os.path.join(cfg.output_dir, "moduli",
                       f"{kind}_{_slug(X.label)}.csv")
    write_csv(out, ["argument", "estimate", "bound", "margin"], rows)
    meta = os.path.join(cfg.output_dir, "moduli",
                        f"{kind}_{_slug(X.label)}.json")
    write_json(meta, {"modulus_kind": est.modulus_kind,
                      "subspace": est.subspace_label,
                      "constants": est.constants,
                      "pair_count": est.pair_count, "seed": est.seed})
    print(f"wrote {out}")
    return 0


def cmd_verify(args) -> int:
    cfg = load_config(args)
    names = list(SUITES) if args.suite == "all" else [args.suite]
    if any(n not in SUITES for n in names):
        raise UsageError(f"unknown suite {args.suite!r}; "
                         f"choose from {', '.join(SUITES)} or all")
    all_ok = True
    for name in names:
        report, artifacts = run_suite(name, cfg)
        base = os.path.join(cfg.output_dir, name)
        write_json(os.path.join(base, "report.json"), report.to_artifact_dict())
        for artifact_name, payload in artifacts.items():
            if isinstance(payload, dict):
                write_json(os.path.join(base, f"{artifact_name}.json"), payload)
            else:
                header, rows = payload
                write_csv(os.path.join(base, f"{artifact_name}.csv"),
                          header, rows)
        for line in report.summary_lines():
            print(line)
        all_ok &= report.passed
    return 0 if all_ok else 1


def cmd_tree(args) -> int:
    cfg = load_config(args)
    if args.weight == "logweight":
        weight = log_weight()
    elif args.weight == "constant":
        weight = DyadicStepFunction(0, [1.0])
    elif args.weight.startswith("step-file:"):
        weight = _load_step_file(args.weight.split(":", 1)[1])
    else:
        raise UsageError("--weight must be logweight, constant or step-file:path")
    from .trees import SplitInvariantError, verify_tree

    try:
        tree = build_weighted_system(weight, args.eta, args.depth)
    except (ValueError, SplitInvariantError) as exc:
        raise UsageError(str(exc)) from exc
    rows = verify_tree(tree, weight)
    bad = sum(1 for r in rows if not all(v for k, v in r.items()
                                         if k.endswith("_ok")))
    out = os.path.join(cfg.output_dir, "tree",
                       f"tree_{_slug(getattr(weight, 'label', 'step'))}"
                       f"_{args.eta:g}_{args.depth}.json")
    write_json(out, tree_to_jsonable(tree))
    print(f"indices {tree.indices}")
    print(f"invariant_failures {bad}")
    print(f"wrote {out}")
    return 0 if bad == 0 else 1


def cmd_tail(args) -> int:
    cfg = load_config(args)
    grid = GridSpec.parse(args.grid).build() if args.grid else None
    report = log_weight_tail_check(grid)
    rows = [[t, F, m, ti, b, ti >= b] for t, F, m, ti, b in zip(
        report.t_grid, report.distribution, report.mass_above, report.tail,
        report.bound)]
    out = os.path.join(cfg.output_dir, "tail", "log_weight_tail.csv")
    write_csv(out, ["t", "distribution", "mass_above", "tail", "bound", "pass"],
              rows)
    write_json(os.path.join(cfg.output_dir, "tail", "log_weight_tail.json"), {
        "x_zero": report.x_zero, "t_zero": report.t_zero,
        "tail_ok": report.tail_ok, "mass_ok": report.mass_ok,
        "product_ok": report.product_ok, "pass": report.passed,
    })
    print(f"x_zero {fmt17(report.x_zero)}")
    print(f"t_zero {fmt17(report.t_zero)}")
    print(f"pass {report.passed}")
    print(f"wrote {out}")
    return 0 if report.passed else 1


def _slug(label: str) -> str:
    return "".join(c if c.isalnum() else "-" for c in label).strip("-")


# ---------------------------------------------------------------------------
# Argument parsing


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="l1renorm",
        description="Orlicz renorming of L^1([0,1]): norms, subspace indexes, "
                    "moduli and verification suites.")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p):
        p.add_argument("--config", help="JSON config file (flat keys)")
        p.add_argument("--seed", type=int)
        p.add_argument("--sample-count", dest="sample_count", type=int)
        p.add_argument("--pair-count", dest="pair_count", type=int)
        p.add_argument("--step-level", dest="step_level", type=int)
        p.add_argument("--refinement-steps", dest="refinement_steps", type=int)
        p.add_argument("--output-dir", dest="output_dir")
        p.add_argument("--tree-eta", dest="tree_eta", type=float)
        p.add_argument("--tree-depth", dest="tree_depth", type=int)
        p.add_argument("--t-grid", dest="t_grid")
        p.add_argument("--epsilon-grid", dest="epsilon_grid")
        p.add_argument("--tau-grid", dest="tau_grid")

    p = sub.add_parser("norm", help="Luxemburg and L1 norms of a function")
    p.add_argument("--fn", required=True)
    p.add_argument("--tolerance", type=float, default=1e-10)
    p.set_defaults(fn_cmd=cmd_norm)

    p = sub.add_parser("indexes", help="C/G index curve of a subspace")
    p.add_argument("--subspace", required=True)
    p.add_argument("--which", required=True)
    p.add_argument("--grid", help="min:max:count[:spacing]")
    add_common(p)
    p.set_defaults(fn_cmd=cmd_indexes)

    p = sub.add_parser("moduli", help="convexity/smoothness modulus curve")
    p.add_argument("--subspace", required=True)
    p.add_argument("--kind", required=True)
    p.add_argument("--grid", help="min:max:count[:spacing]")
    add_common(p)
    p.set_defaults(fn_cmd=cmd_moduli)

    p = sub.add_parser("verify", help="run a verification suite")
    p.add_argument("suite", help=f"{', '.join(SUITES)} or all")
    add_common(p)
    p.set_defaults(fn_cmd=cmd_verify)

    p = sub.add_parser("tree", help="build and verify a weighted system")
    p.add_argument("--weight", default="logweight")
    p.add_argument("--eta", type=float, default=0.9)
    p.add_argument("--depth", type=int, default=5)
    add_common(p)
    p.set_defaults(fn_cmd=cmd_tree)

    p = sub.add_parser("tail", help="singular-weight tail bound curve")
    p.add_argument("--grid", help="min:max:count[:spacing]")
    add_common(p)
    p.set_defaults(fn_cmd=cmd_tail)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn_cmd(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
