"""Command-line experiment runner.

Subcommands: cs, deblur, sweep, radius-search, selftest.  Each run writes a
results CSV, an adjacent plain-text manifest echoing the configuration, and
(on request) per-iteration trace CSVs.  Exit code 0 on success, 1 on
validation errors or internal check failures.
"""

import argparse
import math
import os
import sys

import numpy as np

from . import __version__
from .bench import (
    AlgorithmSpec,
    ConfigError,
    ExperimentConfig,
    deterministic_view,
    load_config,
    manifest_text,
    mdp_trace_csv_text,
    radius_search,
    report_csv_text,
    run_experiment,
    sweep,
    trace_csv_text,
)

_ALGO_PARAM_FLAGS = ("alpha", "eta", "beta", "gamma", "radius_sq", "lam", "l_k", "lambda")


def _add_common_flags(sub, kind):
    sub.add_argument("--config", help="INI experiment config file")
    sub.add_argument("--n", type=int)
    if kind in ("cs", "both"):
        sub.add_argument("--m", type=int)
        sub.add_argument("--s", type=int)
        sub.add_argument("--scale", type=float)
        sub.add_argument("--amp-scale", type=float, dest="amp_scale")
    if kind in ("deblur", "both"):
        sub.add_argument("--band", type=int)
        sub.add_argument("--sigma", type=float)
        sub.add_argument("--image", help="CSV file with an n-by-n ground-truth image")
    sub.add_argument("--snr-db", dest="snr_db", help="noise level in dB, or 'inf'")
    sub.add_argument("--seeds", help="comma or space separated seed list")
    sub.add_argument("--maxiter", type=int)
    sub.add_argument("--step-tol", type=float, dest="step_tol")
    sub.add_argument("--x0", type=float, dest="x0_value")
    sub.add_argument("--algo", choices=("hv", "pg", "ista", "fista", "st", "ht"),
                     help="single-algorithm shortcut instead of a config file")
    sub.add_argument("--alpha", help="number or 'auto'")
    sub.add_argument("--eta", type=float)
    sub.add_argument("--beta", type=float)
    sub.add_argument("--gamma", type=float)
    sub.add_argument("--radius-sq", dest="radius_sq", help="number or 'auto'")
    sub.add_argument("--lam", type=float)
    sub.add_argument("--l-k", type=float, dest="l_k")
    sub.add_argument("--lambda", type=float, dest="lambda")
    sub.add_argument("--r-min", type=float, dest="r_min")
    sub.add_argument("--r-max", type=float, dest="r_max")
    sub.add_argument("--tau1", type=float)
    sub.add_argument("--tau2", type=float)
    sub.add_argument("--max-outer", type=int, dest="max_outer")
    sub.add_argument("--out", help="results CSV path (default results.csv)")
    sub.add_argument("--trace-dir", dest="trace_dir", help="write per-iteration trace CSVs here")


def _parse_auto(text):
    if text is None:
        return None
    if text == "auto":
        return "auto"
    if text in ("inf", "noise-free"):
        return math.inf
    return float(text)


def _config_from_args(args, kind):
    if args.config:
        cfg = load_config(args.config)
        if cfg.experiment != kind:
            raise ConfigError(
                f"config is for {cfg.experiment!r} but the {kind!r} subcommand was used"
            )
    else:
        if not args.algo:
            raise ConfigError("either --config or --algo is required")
        cfg = ExperimentConfig(
            experiment=kind,
            n=args.n if args.n else (200 if kind == "cs" else 16),
            m=getattr(args, "m", None) or 80,
            s=getattr(args, "s", None) or 16,
            scale=getattr(args, "scale", None) or 0.04,
            algorithms=(AlgorithmSpec(args.algo, {}),),
        )
        if kind == "deblur":
            cfg = _replace(
                cfg,
                band=getattr(args, "band", None) or 3,
                sigma=getattr(args, "sigma", None) or 0.7,
            )
        if kind == "cs" and getattr(args, "amp_scale", None):
            cfg = _replace(cfg, amp_scale=args.amp_scale)

    overrides = {}
    for name in ("n", "maxiter", "step_tol", "x0_value"):
        value = getattr(args, name, None)
        if value is not None:
            overrides[name] = value
    if kind == "cs":
        for name in ("m", "s", "scale", "amp_scale"):
            value = getattr(args, name, None)
            if value is not None:
                overrides[name] = value
    else:
        for name in ("band", "sigma", "image"):
            value = getattr(args, name, None)
            if value is not None:
                overrides[name] = value
    if args.snr_db is not None:
        overrides["snr_db"] = _parse_auto(args.snr_db)
    if args.seeds:
        overrides["seeds"] = tuple(int(t) for t in args.seeds.replace(",", " ").split())
    if args.algo:
        params = {}
        for name in _ALGO_PARAM_FLAGS:
            value = getattr(args, name, None)
            if value is not None:
                params[name] = _parse_auto(value) if isinstance(value, str) else value
        overrides["algorithms"] = (AlgorithmSpec(args.algo, params),)
    mdp = dict(cfg.mdp)
    for name in ("r_min", "r_max", "tau1", "tau2", "max_outer"):
        value = getattr(args, name, None)
        if value is not None:
            mdp[name] = value
    if mdp != cfg.mdp:
        overrides["mdp"] = mdp
    return _replace(cfg, **overrides) if overrides else cfg


def _replace(cfg, **kwargs):
    from dataclasses import replace

    return replace(cfg, **kwargs)


def _write(path, text):
    # SPARSQ_OUT_DIR redirects relative output paths, nothing else
    out_dir = os.environ.get("SPARSQ_OUT_DIR")
    if out_dir and not os.path.isabs(path):
        path = os.path.join(out_dir, path)
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    with open(path, "w") as fh:
        fh.write(text)


def _run_and_write(cfg, args):
    from .bench import make_instance

    out = args.out or cfg.out or "results.csv"
    trace_dir = args.trace_dir or cfg.trace_dir
    rows, traces = run_experiment(cfg, want_traces=bool(trace_dir))
    _, factor = make_instance(cfg, cfg.seeds[0])
    notes = () if factor == 1.0 else (f"operator_rescale = {factor:.17g}",)
    _write(out, report_csv_text(rows))
    _write(out + ".manifest.txt", manifest_text(cfg, notes=notes))
    if trace_dir:
        for (algo, seed), trace in traces.items():
            path = os.path.join(trace_dir, f"trace_{cfg.experiment}_{algo}_seed{seed}.csv")
            _write(path, trace_csv_text(trace))
    print(f"wrote {len(rows)} rows to {out}")
    return 0


def _cmd_cs(args):
    return _run_and_write(_config_from_args(args, "cs"), args)


def _cmd_deblur(args):
    return _run_and_write(_config_from_args(args, "deblur"), args)


def _cmd_sweep(args):
    kind = args.experiment
    cfg = _config_from_args(args, kind)
    out = args.out or cfg.out or "results.csv"
    values = [_parse_auto(t) for t in args.values.replace(",", " ").split()]
    rows, agg = sweep(cfg, args.axis, values)
    _write(out, report_csv_text(rows))
    _write(out + ".manifest.txt", manifest_text(cfg, notes=(f"sweep {args.axis} = {values}",)))
    agg_lines = ["algorithm,axis,value,n_seeds,snr_median,snr_mean,rerror_median,rerror_mean"]
    for entry in agg:
        agg_lines.append(
            ",".join(
                [
                    entry["algorithm"],
                    entry["axis"],
                    f"{entry['value']:.17g}",
                    str(entry["n_seeds"]),
                    f"{entry['snr_median']:.17g}",
                    f"{entry['snr_mean']:.17g}",
                    f"{entry['rerror_median']:.17g}",
                    f"{entry['rerror_mean']:.17g}",
                ]
            )
        )
    _write(args.agg_out or out + ".agg.csv", "\n".join(agg_lines) + "\n")
    print(f"wrote {len(rows)} rows to {out}")
    return 0


def _cmd_radius_search(args):
    kind = args.experiment
    cfg = _config_from_args(args, kind)
    out_path = args.out or cfg.out or "results.csv"
    out, inst = radius_search(cfg, beta=args.beta, gamma=args.gamma)
    _write(out_path, mdp_trace_csv_text(out.trace))
    notes = [
        f"final_radius_sq = {out.radius.radius_sq:.17g}",
        f"bracketed = {out.bracketed}",
        f"delta = {inst.delta:.17g}",
    ]
    if inst.x_true is not None:
        notes.append(f"x_true_l1_sq = {float(np.abs(inst.x_true).sum())**2:.17g}")
    _write(out_path + ".manifest.txt", manifest_text(cfg, notes=notes))
    print(
        f"final radius_sq = {out.radius.radius_sq:.6g} "
        f"(bracketed={out.bracketed}, outer iterations={len(out.trace)})"
    )
    return 0


def _selftest_battery(outdir):
    """Small deterministic battery exercising every algorithm and both
    experiment kinds.  Returns the list of (filename, deterministic bytes)."""
    from dataclasses import replace

    cs_cfg = ExperimentConfig(
        experiment="cs",
        n=40,
        m=16,
        s=4,
        scale=0.1,
        amp_scale=2.0,
        snr_db=40.0,
        seeds=(0, 1),
        maxiter=150,
        algorithms=(
            AlgorithmSpec("hv", {"alpha": 1e-3, "eta": 1.0}),
            AlgorithmSpec("pg", {"beta": 1e-3, "gamma": 1.0, "radius_sq": 30.0}),
            AlgorithmSpec("ista", {"alpha": 1e-3}),
            AlgorithmSpec("fista", {"alpha": 1e-3}),
            AlgorithmSpec("st", {"alpha": 1e-3, "eta": 0.5}),
            AlgorithmSpec("ht", {"lam": 1e-3}),
        ),
    )
    blur_cfg = ExperimentConfig(
        experiment="deblur",
        n=8,
        band=3,
        sigma=0.7,
        snr_db=40.0,
        seeds=(0,),
        maxiter=150,
        algorithms=(
            AlgorithmSpec("hv", {"alpha": 1e-4, "eta": 1.0}),
            AlgorithmSpec("pg", {"beta": 1e-4, "gamma": 1.0, "radius_sq": 400.0}),
        ),
    )
    mdp_cfg = replace(
        cs_cfg,
        algorithms=(AlgorithmSpec("pg", {"beta": 1e-3, "gamma": 1.0}),),
        mdp={"r_min": 1.0, "r_max": 400.0, "tau1": 1.01, "tau2": 1.2, "max_outer": 12},
    )

    outputs = []
    cs_rows, cs_traces = run_experiment(cs_cfg, want_traces=True)
    outputs.append(("selftest_cs.csv", report_csv_text(cs_rows)))
    outputs.append(("selftest_cs_trace_hv_seed0.csv", trace_csv_text(cs_traces[("hv", 0)])))
    blur_rows, _ = run_experiment(blur_cfg)
    outputs.append(("selftest_deblur.csv", report_csv_text(blur_rows)))
    mdp_out, _ = radius_search(mdp_cfg)
    outputs.append(("selftest_radius_trace.csv", mdp_trace_csv_text(mdp_out.trace)))
    outputs.append(("selftest_manifest.txt", manifest_text(cs_cfg)))

    if outdir:
        for name, text in outputs:
            _write(os.path.join(outdir, name), text)
    return [(name, deterministic_view(text)) for name, text in outputs]


def _quick_checks():
    """Fast internal consistency checks; returns a list of (name, ok) pairs."""
    from .linops import KroneckerBlur, densify
    from .proxops import RadiusSpec, project_l1_ball_hv, project_l1_ball_sort, prox_sq_l1

    checks = []
    rng = np.random.default_rng(123)

    op = KroneckerBlur(8, 3, 0.7)
    x = rng.standard_normal(64)
    y = rng.standard_normal(64)
    defect = abs(op.apply(x) @ y - x @ op.apply_adjoint(y))
    scale = float(np.linalg.norm(op.apply(x)) * np.linalg.norm(y)) or 1.0
    checks.append(("adjoint identity (blur 8x8)", defect / scale <= 1e-10))

    dense = densify(op)
    checks.append(
        ("blur apply matches densified matrix", np.allclose(op.apply(x), dense.apply(x), atol=1e-12))
    )

    v = rng.standard_normal(6)
    alpha = 0.3
    prox = prox_sq_l1(v, alpha)
    obj = 0.5 * np.sum((prox.value - v) ** 2) + alpha * np.sum(np.abs(prox.value)) ** 2
    ok = True
    for _ in range(200):
        u = prox.value + 0.1 * rng.standard_normal(6)
        if 0.5 * np.sum((u - v) ** 2) + alpha * np.sum(np.abs(u)) ** 2 < obj - 1e-9:
            ok = False
            break
    checks.append(("prox optimality spot check", ok))

    w = 5.0 * rng.standard_normal(12)
    r = RadiusSpec(2.0)
    gap = np.linalg.norm(project_l1_ball_hv(w, r) - project_l1_ball_sort(w, r))
    checks.append(("projection route agreement", gap <= 1e-8))
    return checks


def _cmd_selftest(args):
    outdir = args.outdir or "selftest_out"
    first = _selftest_battery(outdir)
    second = _selftest_battery(None)
    ok = True
    for (name, det1), (_, det2) in zip(first, second):
        same = det1 == det2
        ok &= same
        print(f"determinism {name}: {'PASS' if same else 'FAIL'}")
    for name, passed in _quick_checks():
        ok &= passed
        print(f"check {name}: {'PASS' if passed else 'FAIL'}")
    print(f"selftest: {'PASS' if ok else 'FAIL'} (outputs in {outdir})")
    return 0 if ok else 1


def build_parser():
    parser = argparse.ArgumentParser(
        prog="sparsq", description="Sparse recovery benchmark runner"
    )
    parser.add_argument("--version", action="version", version=f"sparsq {__version__}")
    subs = parser.add_subparsers(dest="command", required=True)

    cs = subs.add_parser("cs", help="compressive sensing experiment")
    _add_common_flags(cs, "cs")
    cs.set_defaults(func=_cmd_cs)

    deblur = subs.add_parser("deblur", help="image deblurring experiment")
    _add_common_flags(deblur, "deblur")
    deblur.set_defaults(func=_cmd_deblur)

    sw = subs.add_parser("sweep", help="parameter sweep over eta, alpha, or snr_db")
    sw.add_argument("--experiment", choices=("cs", "deblur"), default="cs")
    sw.add_argument("--axis", choices=("eta", "alpha", "snr_db"), required=True)
    sw.add_argument("--values", required=True, help="comma separated values")
    sw.add_argument("--agg-out", dest="agg_out")
    _add_common_flags(sw, "both")
    sw.set_defaults(func=_cmd_sweep)

    rs = subs.add_parser("radius-search", help="discrepancy-principle radius selection")
    rs.add_argument("--experiment", choices=("cs", "deblur"), default="cs")
    _add_common_flags(rs, "both")
    rs.set_defaults(func=_cmd_radius_search)

    st = subs.add_parser("selftest", help="deterministic smoke battery and checks")
    st.add_argument("--outdir")
    st.set_defaults(func=_cmd_selftest)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as err:
        print(f"config error: {err}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
