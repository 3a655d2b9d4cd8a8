"""Command-line front end: ``hermproj <command> [options]``.

Commands
--------
phase-check      identity and finite-difference suites, mixed-Hessian bands
kernel           both kernel routes on a diagonal slice
norm             one localized norm estimate
sweep KIND       endpoint | mu | asym | sup scaling sweeps with slope verdicts
basis            level bookkeeping and a quadrature orthonormality check

Settings resolve as flags > ``--config`` JSON file > built-in defaults.  Exit
codes: 0 pass, 1 quantitative failure, 2 usage or configuration error,
3 resource error.
"""

from __future__ import annotations

import argparse
import copy
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import basis, mehler, normlab, phase
from .errors import AccuracyError, HermprojError, InputError, ResourceError
from .localization import DEFAULT_BUDGET, DEFAULT_RESOLUTION, AnnulusSpec
from .records import SWEEP_COLUMNS, metadata, write_csv, write_json

EXIT_PASS, EXIT_FAIL, EXIT_CONFIG, EXIT_RESOURCE = 0, 1, 2, 3

DEFAULTS = {
    "d": None,
    "lambda": None,
    "lambdas": None,
    "p": None,
    "q": None,
    "mu": None,
    "mu_tilde": None,
    "mu_list": [0.25, 0.125, 0.0625, 0.03125],
    "mu_tilde_list": [0.25, 0.125, 0.0625, 0.03125],
    "ks": [100, 200, 500, 1000, 2000, 5000],
    "resolution": DEFAULT_RESOLUTION,
    "seed": 0,
    "samples": 1000,
    "hessian_samples": 100,
    "points": 101,
    "restarts": 8,
    "tolerance": 1e-6,
    "max_iter": 500,
    "j_max": 14,
    "quad_tolerance": 1e-9,
    "budget": DEFAULT_BUDGET,
    "radius": 2.0,
    "strict_regime": False,
    "out": ".",
    "verdict": {
        "kernel_rel": 1e-4,
        "endpoint_band": 0.05,
        "mu_band": 0.10,
        "sup_band": 0.01,
        "asym_monotone_slack": 0.20,
        "asym_slope_max": -0.02,
    },
}

# per-command defaults where the generic default is None
COMMAND_DEFAULTS = {
    "phase-check": {"d": 3},
    "kernel": {"d": 1, "lambda": 5},
    "norm": {"d": 2, "lambda": 8, "p": 2.0, "q": 2.0},
    "basis": {"d": 2, "lambda": 8},
    "endpoint": {"d": 3, "q": None, "p": 2.0, "lambdas": [21, 41, 61, 81]},
    "mu": {"d": 2, "lambda": 402, "q": 2.0, "p": 2.0},
    "asym": {"d": 3, "lambda": 41, "q": 3.0, "mu": 0.25},
    "sup": {"d": 1, "q": math.inf},
}


class ConfigError(InputError):
    pass


def _float_list(text):
    return [float(v) for v in text.split(",") if v.strip()]


def _int_list(text):
    return [int(v) for v in text.split(",") if v.strip()]


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--d", type=int)
    common.add_argument("--lambda", dest="lambda", type=int)
    common.add_argument("--lambdas", type=_int_list, help="comma separated eigenvalues")
    common.add_argument("--p", type=float)
    common.add_argument("--q", type=float)
    common.add_argument("--mu", type=float)
    common.add_argument("--mu-tilde", dest="mu_tilde", type=float)
    common.add_argument("--mu-list", dest="mu_list", type=_float_list)
    common.add_argument("--mu-tilde-list", dest="mu_tilde_list", type=_float_list)
    common.add_argument("--ks", type=_int_list, help="comma separated 1-D degrees")
    common.add_argument("--resolution", type=float)
    common.add_argument("--seed", type=int)
    common.add_argument("--samples", type=int)
    common.add_argument("--points", type=int)
    common.add_argument("--restarts", type=int)
    common.add_argument("--tolerance", type=float, help="power-method stopping tolerance")
    common.add_argument("--max-iter", dest="max_iter", type=int)
    common.add_argument("--j-max", dest="j_max", type=int)
    common.add_argument("--quad-tolerance", dest="quad_tolerance", type=float)
    common.add_argument("--budget", type=int)
    common.add_argument("--radius", type=float)
    common.add_argument("--strict-regime", dest="strict_regime", action="store_const", const=True)
    common.add_argument("--out", help="output directory")
    common.add_argument("--config", help="JSON file with defaults for any option")

    parser = argparse.ArgumentParser(prog="hermproj", description=__doc__.split("\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("phase-check", parents=[common], help="identity suites")
    sub.add_parser("kernel", parents=[common], help="kernel cross-check on a slice")
    sub.add_parser("norm", parents=[common], help="one norm estimate")
    sub.add_parser("basis", parents=[common], help="level information")
    sw = sub.add_parser("sweep", parents=[common], help="scaling sweeps")
    sw.add_argument("kind", choices=["endpoint", "mu", "asym", "sup"])
    return parser


def resolve_config(args: argparse.Namespace) -> dict:
    """Merge defaults, the optional JSON file and explicit flags."""
    cfg = copy.deepcopy(DEFAULTS)
    key = args.kind if args.command == "sweep" else args.command
    cfg.update(COMMAND_DEFAULTS.get(key, {}))
    if args.config:
        try:
            data = json.loads(Path(args.config).read_text(encoding="utf-8"))
        except (OSError, ValueError) as exc:
            raise ConfigError(f"cannot read config file {args.config}: {exc}") from exc
        if not isinstance(data, dict):
            raise ConfigError("config file must hold a JSON object")
        unknown = set(data) - set(cfg)
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        if "verdict" in data:
            cfg["verdict"].update(data.pop("verdict"))
        cfg.update(data)
    for name, value in vars(args).items():
        if name in cfg and value is not None:
            cfg[name] = value
    cfg["command"] = args.command
    if args.command == "sweep":
        cfg["kind"] = args.kind
    validate(cfg)
    return cfg


def validate(cfg: dict) -> None:
    """Reject configurations before any compute starts."""

    def need(cond, msg):
        if not cond:
            raise ConfigError(msg)

    need(cfg["d"] is None or int(cfg["d"]) >= 1, f"d must be >= 1, got {cfg['d']}")
    need(cfg["samples"] >= 1, f"samples must be >= 1, got {cfg['samples']}")
    need(cfg["hessian_samples"] >= 1, "hessian_samples must be >= 1")
    need(cfg["points"] >= 2, f"points must be >= 2, got {cfg['points']}")
    need(cfg["resolution"] > 0, "resolution must be positive")
    need(cfg["restarts"] >= 1, "restarts must be >= 1")
    need(cfg["tolerance"] > 0, "tolerance must be positive")
    need(cfg["budget"] >= 1, "budget must be positive")
    need(cfg["seed"] >= 0, "seed must be non-negative")
    need(cfg["j_max"] >= mehler.J_MIN, f"j_max must be >= {mehler.J_MIN}")
    mehler.OscIntegralSpec(j_max=cfg["j_max"], tolerance=cfg["quad_tolerance"])
    d = cfg["d"]
    if cfg["lambda"] is not None and d is not None:
        basis.eigen_level(d, cfg["lambda"])
    if cfg.get("kind") == "endpoint":
        need(cfg["lambdas"] and len(cfg["lambdas"]) >= 3, "endpoint sweep needs at least 3 eigenvalues")
        for lam in cfg["lambdas"]:
            basis.eigen_level(d, lam)
        if cfg["q"] is None:
            cfg["q"] = normlab.q_endpoint(d)
    if cfg.get("kind") == "mu":
        need(cfg["q"] == 2.0 and cfg["p"] == 2.0, "the mu sweep uses the Gram route, p = q = 2")
        need(len(cfg["mu_list"]) >= 3, "mu sweep needs at least 3 widths")
        for mu in cfg["mu_list"]:
            AnnulusSpec("plus", mu)
    if cfg.get("kind") == "asym":
        need(cfg["mu"] is not None, "asym sweep needs --mu")
        need(len(cfg["mu_tilde_list"]) >= 3, "asym sweep needs at least 3 values of mu_tilde")
        AnnulusSpec("plus", cfg["mu"])
        for mt in cfg["mu_tilde_list"]:
            AnnulusSpec("plus", mt)
        normlab.check_asymmetry_regime(cfg["lambda"], d, cfg["mu"], cfg["mu_tilde_list"], cfg["q"],
                                       cfg["strict_regime"])
    if cfg.get("kind") == "sup":
        need(len(cfg["ks"]) >= 3 and min(cfg["ks"]) >= 1, "sup sweep needs at least 3 positive degrees")
    if cfg["command"] == "norm":
        need(cfg["p"] is not None and cfg["q"] is not None, "norm needs --p and --q")
        need(1.0 < cfg["p"] <= 2.0 <= cfg["q"] < math.inf, "norm needs 1 < p <= 2 <= q < inf")
        if cfg["mu"] is not None:
            AnnulusSpec("plus", cfg["mu"])
        if cfg["mu_tilde"] is not None:
            AnnulusSpec("plus", cfg["mu_tilde"])


def _outdir(cfg) -> Path:
    out = Path(cfg["out"])
    out.mkdir(parents=True, exist_ok=True)
    return out


def _meta(cfg):
    return metadata(cfg, cfg["seed"])


def _verdict(target, measured, band):
    return "pass" if abs(measured - target) <= band else "fail"


# --------------------------------------------------------------------------
# commands


def cmd_phase_check(cfg) -> int:
    identities = phase.identity_suite(cfg["samples"], cfg["d"], cfg["seed"])
    hessian = phase.hessian_band_check(cfg["hessian_samples"], cfg["seed"])
    passed = all(v["passed"] for v in identities.values()) and hessian["passed"]
    path = _outdir(cfg) / "phase_check.json"
    write_json(path, {"identities": identities, "mixed_hessian": hessian, "passed": passed}, _meta(cfg))
    for name, v in identities.items():
        print(f"{name:20s} max_error={v['max_error']:.3e} tol={v['tolerance']:.0e} "
              f"{'pass' if v['passed'] else 'FAIL'}")
    print(f"{'mixed_hessian':20s} {'pass' if hessian['passed'] else 'FAIL'}")
    print(f"report: {path}")
    return EXIT_PASS if passed else EXIT_FAIL


KERNEL_COLUMNS = ("t", "x", "y", "K_direct", "Re_K_mehler", "Im_K_mehler", "abs_difference", "quad_error")


def cmd_kernel(cfg) -> int:
    """Both routes on the slice ``x = y = t e_1``, ``|t| <= 1.25 sqrt(lam)``."""
    d, lam = cfg["d"], cfg["lambda"]
    level = basis.eigen_level(d, lam)
    spec = mehler.OscIntegralSpec(j_max=cfg["j_max"], tolerance=cfg["quad_tolerance"])
    t = np.linspace(-1.25, 1.25, cfg["points"]) * math.sqrt(level.lam)
    X = np.zeros((t.size, d))
    X[:, 0] = t
    direct = mehler.kernel_direct_batch(level.lam, X, X)
    path = _outdir(cfg) / "kernel.csv"
    status = "complete"
    try:
        res = mehler.kernel_mehler_batch(level.lam, X, X, spec)
        values, qerr = res.values, res.quad_error
    except AccuracyError as exc:
        status = f"partial: {exc}"
        values = np.full(t.size, np.nan + 0j)
        qerr = np.full(t.size, np.nan)
    diff = np.abs(values - direct)
    rows = [(float(t[i]), _coords(X[i]), _coords(X[i]), float(direct[i]), float(values[i].real),
             float(values[i].imag), float(diff[i]), float(qerr[i])) for i in range(t.size)]
    meta = _meta(cfg)
    meta["status"] = status
    write_csv(path, KERNEL_COLUMNS, rows, meta)
    if status != "complete":
        print(f"kernel: {status}", file=sys.stderr)
        return EXIT_FAIL
    rel = float(np.max(diff) / np.max(np.abs(direct)))
    ok = rel <= cfg["verdict"]["kernel_rel"]
    print(f"max |difference| / max |K| = {rel:.3e} (tol {cfg['verdict']['kernel_rel']:.0e}) "
          f"{'pass' if ok else 'FAIL'}")
    print(f"data: {path}")
    return EXIT_PASS if ok else EXIT_FAIL


def _coords(v):
    return " ".join(repr(float(a)) for a in v)


def cmd_norm(cfg) -> int:
    d, lam, p, q = cfg["d"], cfg["lambda"], cfg["p"], cfg["q"]
    mu, mt = cfg["mu"], cfg["mu_tilde"]
    if p == 2.0 and q == 2.0 and mt is None:
        spec = AnnulusSpec("plus", mu) if mu is not None else None
        est = normlab.norm_2_2_gram(lam, d, spec, cfg["resolution"], cfg["budget"])
        route, value = "gram", est.value
    else:
        out_spec = AnnulusSpec("plus", mu) if mu is not None else AnnulusSpec("ball", radius=cfg["radius"])
        in_spec = AnnulusSpec("plus", mt) if mt is not None else out_spec
        tensor = out_spec.kind == "ball" and in_spec == out_spec
        op = normlab.assemble(lam, d, in_spec, out_spec, cfg["resolution"], cfg["budget"], "rescaled", tensor)
        est = normlab.norm_p_q_power(op, p, q, cfg["restarts"], cfg["tolerance"], cfg["seed"], cfg["max_iter"])
        route, value = "power", est.value / normlab.rescale_factor(op.lam, d, p, q)
    payload = {"route": route, "norm": value, "estimate": est.as_dict()}
    path = _outdir(cfg) / "norm.json"
    write_json(path, payload, _meta(cfg))
    print(f"||.||_{{{p:g}->{q:g}}} = {value!r} ({route}, restarts agreeing {est.restarts_agreeing})")
    return EXIT_PASS


def cmd_basis(cfg) -> int:
    level = basis.eigen_level(cfg["d"], cfg["lambda"])
    idx = basis.level_index_array(cfg["d"], level.lam)
    n = level.k + 1
    # Gauss-Hermite rule in function form: weight 1 / sum_j h_j(x_i)^2 over j <= n
    x, _ = basis.gauss_hermite_nodes(n + 1)
    full = basis.hermite_values(n, x)
    H = full[:n] / np.sqrt(np.sum(full * full, axis=0))
    defect = float(np.max(np.abs(H @ H.T - np.eye(n))))
    payload = {"lambda": level.lam, "k": level.k, "dimension": level.dim,
               "first_indices": idx[:10].tolist(), "orthonormality_defect_1d": defect}
    path = _outdir(cfg) / "basis.json"
    write_json(path, payload, _meta(cfg))
    print(f"lambda={level.lam} k={level.k} dim={level.dim} 1-D orthonormality defect {defect:.2e}")
    return EXIT_PASS if defect < 1e-10 else EXIT_FAIL


def _sweep_rows(rows):
    return [(r.d, r.lam, r.mu, r.mu_tilde, r.p, r.q, r.norm, r.residual, r.restarts_agreeing) for r in rows]


def _summary_line(name, target, fit, verdict, extra=""):
    return (f"{name}: target {target:+.5f} measured {fit.slope:+.5f} stderr {fit.stderr:.5f} "
            f"verdict {verdict}{extra}")


def cmd_sweep(cfg) -> int:
    kind = cfg["kind"]
    out = _outdir(cfg)
    meta = _meta(cfg)
    v = cfg["verdict"]
    if kind == "endpoint":
        rows, fit = normlab.endpoint_sweep(cfg["d"], cfg["lambdas"], cfg["q"], cfg["resolution"], cfg["seed"],
                                           cfg["p"], cfg["restarts"], cfg["tolerance"], cfg["budget"],
                                           cfg["radius"], cfg["max_iter"])
        target = normlab.endpoint_exponent(cfg["d"])
        verdict = _verdict(target, fit.slope, v["endpoint_band"])
        summary = {"target": target, "measured": fit.slope, "stderr": fit.stderr, "band": v["endpoint_band"],
                   "verdict": verdict, "abscissa": "lambda"}
    elif kind == "mu":
        rows, fit = normlab.mu_sweep(cfg["lambda"], cfg["d"], cfg["mu_list"], cfg["resolution"], cfg["budget"],
                                     cfg["strict_regime"])
        target = 0.25
        verdict = _verdict(target, fit.slope, v["mu_band"])
        summary = {"target": target, "measured": fit.slope, "stderr": fit.stderr, "band": v["mu_band"],
                   "verdict": verdict, "abscissa": "mu"}
    elif kind == "sup":
        rows, fit = normlab.sup_norm_sweep(cfg["ks"])
        target = -1.0 / 12.0
        verdict = _verdict(target, fit.slope, v["sup_band"])
        summary = {"target": target, "measured": fit.slope, "stderr": fit.stderr, "band": v["sup_band"],
                   "verdict": verdict, "abscissa": "lambda"}
    else:
        return _sweep_asym(cfg, out, meta)
    stem = f"sweep_{kind}"
    write_csv(out / f"{stem}.csv", SWEEP_COLUMNS, _sweep_rows(rows), meta)
    write_json(out / f"{stem}.json", {"fit": fit.as_dict(), "summary": summary,
                                      "extra": [r.extra for r in rows]}, meta)
    for r in rows:
        print(f"  lambda={r.lam:g} mu={r.mu} norm={r.norm:.6g} agreeing={r.restarts_agreeing}")
    print(_summary_line(kind, summary["target"], fit, verdict))
    return EXIT_PASS if verdict == "pass" else EXIT_FAIL


def monotone_within(values, slack: float) -> bool:
    """``values[i+1] <= (1 + slack) * values[i]`` for every consecutive pair."""
    return all(b <= (1.0 + slack) * a for a, b in zip(values, values[1:]))


def _sweep_asym(cfg, out, meta) -> int:
    v = cfg["verdict"]
    rows = normlab.asymmetry_profile(cfg["lambda"], cfg["d"], cfg["mu"], cfg["mu_tilde_list"], cfg["q"],
                                     cfg["resolution"], cfg["seed"], cfg["restarts"], cfg["tolerance"],
                                     cfg["budget"], cfg["strict_regime"], cfg["max_iter"])
    table = [(cfg["d"], float(cfg["lambda"]), r.mu, r.mu_tilde, r.estimate.p, r.estimate.q, r.estimate.value,
              r.estimate.residual, r.estimate.restarts_agreeing) for r in rows]
    write_csv(out / "sweep_asym.csv", SWEEP_COLUMNS, table, meta)
    ratios = [r.ratio for r in rows]
    fit = normlab.fit_exponent([r.mu_tilde / r.mu for r in rows], ratios)
    monotone = monotone_within(ratios, v["asym_monotone_slack"])
    slope_ok = fit.slope <= v["asym_slope_max"]
    verdict = "pass" if monotone and slope_ok else "fail"
    summary = {"target": f"slope <= {v['asym_slope_max']}", "measured": fit.slope, "stderr": fit.stderr,
               "monotone_within_slack": monotone, "verdict": verdict, "abscissa": "mu_tilde/mu",
               "normalizer_exponent": normlab.asymmetry_normalizer_exponent(cfg["d"], cfg["q"])}
    extra = [{"mu_tilde": r.mu_tilde, "normalizer": r.normalizer, "ratio": r.ratio,
              "regime_relaxed": r.regime_relaxed} for r in rows]
    write_json(out / "sweep_asym.json", {"fit": fit.as_dict(), "summary": summary, "rows": extra}, meta)
    for r in rows:
        flag = " (regime relaxed)" if r.regime_relaxed else ""
        print(f"  mu_tilde={r.mu_tilde:g} norm={r.estimate.value:.6g} ratio={r.ratio:.6g}{flag}")
    print(f"asym: monotone within {v['asym_monotone_slack']:.0%}: {monotone}; slope {fit.slope:+.5f} "
          f"stderr {fit.stderr:.5f} vs max {v['asym_slope_max']:+.3f}; verdict {verdict}")
    return EXIT_PASS if verdict == "pass" else EXIT_FAIL


COMMANDS = {"phase-check": cmd_phase_check, "kernel": cmd_kernel, "norm": cmd_norm, "basis": cmd_basis,
            "sweep": cmd_sweep}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code else EXIT_PASS
    try:
        cfg = resolve_config(args)
        return COMMANDS[args.command](cfg)
    except ResourceError as exc:
        print(f"resource error: {exc}", file=sys.stderr)
        return EXIT_RESOURCE
    except InputError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except AccuracyError as exc:
        print(f"accuracy error: {exc}", file=sys.stderr)
        return EXIT_FAIL
    except HermprojError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
