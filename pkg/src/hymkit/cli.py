"""Batch entry point: verification suites, the heat flow, report merging.

Subcommands:

    hymkit verify <suite> [--seed N] [--samples N] [--out DIR] [--tol k=v]
    hymkit flow <config.json> [--out DIR]
    hymkit report <file...> [--out DIR]

Suites: adhm, ansatz, potential, cone, growth.  Exit codes: 0 all checks
pass, 1 check failure, 2 usage or config error, 3 numerical abort.
Fixed seed implies byte-identical JSON/CSV outputs on one platform.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

EXIT_PASS = 0
EXIT_CHECK_FAILURE = 1
EXIT_USAGE = 2
EXIT_NUMERICAL = 3


@dataclass
class RunConfig:
    seed: int = 0
    samples: int | None = None
    out_dir: Path = Path(".")
    tolerances: dict = field(default_factory=dict)

    def tol(self, name: str, default: float) -> float:
        return float(self.tolerances.get(name, default))


def _check(name, value, bound, mode="le"):
    value = float(value)
    ok = value <= bound if mode == "le" else value >= bound
    return {"name": name, "value": value, "bound": float(bound),
            "mode": mode, "pass": bool(ok)}


# ---------------------------------------------------------------------------
# suites


def suite_adhm(cfg: RunConfig) -> list:
    from . import adhm
    from . import monads as mo

    rng = np.random.default_rng(cfg.seed)
    n_pts = cfg.samples or 100
    checks = []
    datasets = [adhm.ADHMData(1, 0, 0, 1)] + \
        [adhm.random_valid_data(rng) for _ in range(4)]
    worst_an = 0.0
    for d in datasets:
        spec = adhm.instanton_monad(d)
        pts = rng.standard_normal((n_pts, 4)) * 1.5
        pts = pts[:, :2] + 1j * pts[:, 2:]
        data = mo.curvature_batch(spec, pts)
        worst_an = max(worst_an, float(data["norm_mean"].max()))
    checks.append(_check("asd_residual_analytic", worst_an,
                         cfg.tol("asd_analytic", 1e-9)))
    worst_fd = 0.0
    spec_fd = adhm.strip_analytic_derivatives(adhm.instanton_monad(datasets[0]))
    for p in rng.standard_normal((10, 4)):
        rep = mo.curvature(spec_fd, p[:2] + 1j * p[2:])
        worst_fd = max(worst_fd, rep.norm_mean)
    checks.append(_check("asd_residual_fd", worst_fd, cfg.tol("asd_fd", 1e-6)))
    q = adhm.charge(adhm.ADHMData(1, 0, 0, 1), r_cut=20.0)
    checks.append(_check("charge_error", abs(q["charge"] - 1.0),
                         cfg.tol("charge", 0.02)))
    nf = adhm.framed_moduli_point(adhm.ADHMData(2, 0, 0, 2))
    checks.append(_check("moduli_label_error", abs(nf.z2_label - 2.0), 1e-12))
    return checks


def suite_ansatz(cfg: RunConfig) -> list:
    from . import ansatz

    checks = []
    lhs, rhs = ansatz.cancellation([1.0, 0, 0])
    checks.append(_check("cancellation_spot_lhs", abs(lhs + 0.41421356), 1e-6))
    checks.append(_check("cancellation_spot_rhs", abs(rhs - 0.5), 1e-12))
    n_pts = cfg.samples or 10_000
    sup = ansatz.weight_ratio_sup(n_pts, seed=cfg.seed)
    checks.append(_check("weight_ratio_sup", sup,
                         cfg.tol("weight_ratio", 2.6)))
    d1 = ansatz.decay_slope([1, 1, 0], np.geomspace(10, 1000, 25))
    checks.append(_check("generic_decay_slope_error", abs(d1["slope"] + 3.0),
                         cfg.tol("slope_generic", 0.1)))
    d2 = ansatz.decay_slope([1, 0, 0], np.geomspace(1e-3, 0.1, 25))
    checks.append(_check("origin_decay_slope_error", abs(d2["slope"] + 2.0),
                         cfg.tol("slope_origin", 0.15)))
    sups = {}
    for zeta in (100.0, 400.0, 1600.0):
        sups[zeta] = ansatz.instanton_comparison(zeta, seed=cfg.seed)["scaled_sup"]
    spread = max(sups.values()) / min(sups.values())
    checks.append(_check("bubbling_scaled_spread", spread,
                         cfg.tol("bubbling_factor", 2.0)))
    lbl = ansatz.fueter_map(4.0, root=2.0).z2_label
    lbl2 = ansatz.fueter_map(4.0, root=-2.0).z2_label
    checks.append(_check("fueter_root_gap", abs(lbl - lbl2), 1e-9))
    return checks


def suite_potential(cfg: RunConfig) -> list:
    from . import potential as pot
    from .ansatz import sample_log_uniform

    checks = []
    mc = pot.MCParams(samples_per_shell=cfg.samples or 2000, seed=cfg.seed)
    for i, (center, rad) in enumerate((([10.0, 0, 0], 1.0),
                                       ([0, 0, 50.0], 2.0),
                                       ([5.0, 3.0, -4.0], 1.0))):
        wc = pot.laplacian_weak_check(center, rad, mc, seed=cfg.seed + i)
        tol = max(cfg.tol("laplacian_ratio", 0.1), 2.0 * wc["stderr"])
        checks.append(_check(f"laplacian_ratio_dev_{i}", abs(wc["ratio"] - 1.0), tol))
    rng = np.random.default_rng(cfg.seed)
    pts = [sample_log_uniform(rng, 200, 1.0, 1000.0)]
    # the z-axis vicinity (log-branch of the envelope) and the transition
    # zone |x|+|y| ~ |p|/3 where the ratio field peaks
    zs = np.geomspace(2.0, 1000.0, 30)
    phases = np.exp(2j * np.pi * rng.random(30))
    pts.append(np.stack([0.1 * np.sqrt(zs) * phases,
                         np.zeros(30, dtype=complex), zs + 0j], axis=-1))
    radii = np.array([10.0, 30.0, 100.0, 300.0, 1000.0])
    fracs = np.array([0.1, 0.2, 0.3, 0.4, 0.5])
    rg, cg = np.meshgrid(radii, fracs, indexing="ij")
    ph = np.exp(2j * np.pi * rng.random(rg.size)).reshape(rg.shape)
    pts.append(np.stack([cg * rg * ph, np.zeros_like(rg, dtype=complex),
                         rg * np.sqrt(1.0 - cg**2) + 0j], axis=-1).reshape(-1, 3))
    env = pot.barrier_envelope_check(np.vstack(pts),
                                     pot.MCParams(samples_per_shell=6000,
                                                  seed=cfg.seed))
    checks.append(_check("envelope_sup", env["sup"], cfg.tol("envelope", 175.0)))
    checks.append(_check("g_min", env["g_min"], 0.0, mode="ge"))
    return checks


def suite_cone(cfg: RunConfig) -> list:
    from . import ansatz
    from . import monads as mo

    rng = np.random.default_rng(cfg.seed)
    pts = ansatz.sample_log_uniform(rng, cfg.samples or 50, 0.3, 3.0)
    res = ansatz.cone_hym_residual(pts)
    checks = [_check("cone_hym_residual", float(res.max()),
                     cfg.tol("cone_residual", 1e-8))]
    rep = mo.curvature(ansatz.flat_metric_cone_monad(), [0, 0, 1.0])
    checks.append(_check("flat_metric_control", rep.norm_mean, 0.01, mode="ge"))
    return checks


def suite_growth(cfg: RunConfig) -> list:
    from . import growth

    checks = []
    t1, t2, t3 = (growth.KoszulSection.generator(i) for i in (1, 2, 3))
    n = cfg.samples or 4096
    d0 = growth.growth_degree(t3, "origin", n_samples=n, seed=cfg.seed)
    di = growth.growth_degree(t3, "infinity", n_samples=n, seed=cfg.seed)
    checks.append(_check("t3_origin_degree_error", abs(d0.degree - 1.0),
                         cfg.tol("degree", 0.05)))
    checks.append(_check("t3_infinity_degree_error", abs(di.degree),
                         cfg.tol("degree", 0.05)))
    tab = growth.filtration_table([t1, t2, t3], n_samples=n, seed=cfg.seed)
    checks.append(_check("filtrations_differ", 1.0 if tab["filtrations_differ"]
                         else 0.0, 1.0, mode="ge"))
    zt3 = t3.times(growth.Poly3.monomial(0, 0, 1), "z*t3")
    diz = growth.growth_degree(zt3, "infinity", n_samples=n, seed=cfg.seed)
    checks.append(_check("degree_shift_error", abs(diz.degree - di.degree - 1.0),
                         cfg.tol("degree_shift", 0.07)))
    cx = growth.convexity_check(t3, seed=cfg.seed)
    checks.append(_check("t3_convexity_residual", cx["residual"],
                         -2.0 * cx["stderr"], mode="ge"))
    return checks


SUITES = {
    "adhm": suite_adhm,
    "ansatz": suite_ansatz,
    "potential": suite_potential,
    "cone": suite_cone,
    "growth": suite_growth,
}


# ---------------------------------------------------------------------------
# commands


def cmd_verify(args) -> int:
    if args.suite not in SUITES:
        print(f"unknown suite {args.suite!r}; choose from {sorted(SUITES)}",
              file=sys.stderr)
        return EXIT_USAGE
    tols = {}
    for spec in args.tol or []:
        if "=" not in spec:
            print(f"bad --tol {spec!r}, expected name=value", file=sys.stderr)
            return EXIT_USAGE
        name, val = spec.split("=", 1)
        tols[name] = float(val)
    cfg = RunConfig(seed=args.seed, samples=args.samples,
                    out_dir=Path(args.out), tolerances=tols)
    try:
        checks = SUITES[args.suite](cfg)
    except (ValueError, RuntimeError) as exc:
        print(f"numerical abort: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    report = {"suite": args.suite, "seed": args.seed,
              "samples": cfg.samples, "checks": checks,
              "pass": all(c["pass"] for c in checks)}
    cfg.out_dir.mkdir(parents=True, exist_ok=True)
    out_path = cfg.out_dir / f"verify_{args.suite}.json"
    with open(out_path, "w") as fh:
        json.dump(report, fh, indent=1, sort_keys=True)
    for c in checks:
        status = "pass" if c["pass"] else "FAIL"
        print(f"[{status}] {c['name']}: {c['value']:.6g} "
              f"({'<=' if c['mode'] == 'le' else '>='} {c['bound']:.6g})")
    print(f"report written to {out_path}")
    return EXIT_PASS if report["pass"] else EXIT_CHECK_FAILURE


def cmd_flow(args) -> int:
    from . import flow as fl

    try:
        cfg = fl.FlowConfig.from_json(args.config)
    except (OSError, ValueError, KeyError, TypeError, json.JSONDecodeError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    try:
        dom = fl.build_domain(cfg.box, cfg.resolution,
                              n_barrier_nodes=cfg.n_barrier_nodes, seed=cfg.seed)
        state = fl.run(dom, cfg.steps, dt=cfg.dt,
                       monitor_cadence=cfg.monitor_cadence)
    except (fl.PositivityError, ValueError) as exc:
        print(f"numerical abort: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    fl.write_history_csv(state, out_dir / "history.csv")
    fl.save_checkpoint(state, out_dir / "checkpoint.bin")
    sups = [row[2] for row in state.history]
    ratio = sups[-1] / sups[0] if sups[0] > 0 else 0.0
    print(f"flow: {cfg.steps} steps, sup |iLamF| {sups[0]:.4g} -> {sups[-1]:.4g} "
          f"(ratio {ratio:.3g})")
    print(f"history and checkpoint written to {out_dir}")
    return EXIT_PASS if ratio <= 0.5 else EXIT_CHECK_FAILURE


def cmd_report(args) -> int:
    rows = []
    growth_rows = []
    for path in args.inputs:
        try:
            with open(path) as fh:
                data = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            print(f"cannot read {path}: {exc}", file=sys.stderr)
            return EXIT_USAGE
        suite = data.get("suite", Path(path).stem)
        for c in data.get("checks", []):
            rows.append([suite, c["name"], format(c["value"], ".17g"),
                         format(c["bound"], ".17g"), c["mode"],
                         "pass" if c["pass"] else "fail"])
        for r in data.get("growth_table", []):
            growth_rows.append([r["label"], format(r["d_origin"], ".17g"),
                                format(r["d_infinity"], ".17g")])
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    out_path = out_dir / "report.csv"
    with open(out_path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["suite", "check", "value", "bound", "mode", "status"])
        writer.writerows(rows)
    if growth_rows:
        with open(out_dir / "growth_table.csv", "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["section", "d_origin", "d_infinity"])
            writer.writerows(growth_rows)
    print(f"merged {len(rows)} checks into {out_path}")
    return EXIT_PASS


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="hymkit",
                                     description=__doc__.split("\n")[0])
    sub = parser.add_subparsers(dest="command")
    pv = sub.add_parser("verify", help="run a verification suite")
    pv.add_argument("suite")
    pv.add_argument("--seed", type=int, default=0)
    pv.add_argument("--samples", type=int, default=None)
    pv.add_argument("--out", default=".")
    pv.add_argument("--tol", action="append", metavar="NAME=VALUE")
    pv.set_defaults(func=cmd_verify)
    pf = sub.add_parser("flow", help="run the Dirichlet heat flow")
    pf.add_argument("config")
    pf.add_argument("--out", default=".")
    pf.set_defaults(func=cmd_flow)
    pr = sub.add_parser("report", help="merge JSON reports into CSV tables")
    pr.add_argument("inputs", nargs="*")
    pr.add_argument("--out", default=".")
    pr.set_defaults(func=cmd_report)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if not getattr(args, "func", None):
        parser.print_help()
        return EXIT_USAGE
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
