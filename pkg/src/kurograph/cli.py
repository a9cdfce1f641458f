"""Command-line entry point ``kurograph``.

Exit codes: 0 success, 1 usage or configuration error, 2 numerical failure,
3 acceptance-check failure (recipe mode).
"""

from __future__ import annotations

import argparse
import math
import os
import sys
from pathlib import Path
from typing import List, Optional

import numpy as np

from . import __version__, bifurcation, criticality, dynamics, freqdist, meanfield, output, plotting
from .config import RunConfig, parse_config, parse_config_text, stream
from .errors import ConfigError, KurographError, NumericalError, PreconditionError
from .graphon import MIDPOINT, sample_weight_matrix
from .spectral import mu_extremes, nystrom_eigs

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC, EXIT_ACCEPT = 0, 1, 2, 3


def parse_grid(text: str) -> np.ndarray:
    """``a:b:steps`` -> ``steps`` equally spaced values from a to b inclusive."""
    try:
        a, b, steps = text.split(":")
        a, b, steps = float(a), float(b), int(steps)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected a:b:steps, got {text!r}") from exc
    if steps < 1 or (steps > 1 and b <= a):
        raise argparse.ArgumentTypeError(f"bad grid {text!r}")
    return np.linspace(a, b, steps)


def _load(args) -> RunConfig:
    if getattr(args, "config", None):
        return parse_config(args.config)
    return parse_config_text("[kernel]\nkind = constant\np = 1.0\n")


def _svg(args, path):
    return getattr(args, "svg", None) or Path(path).with_suffix(".svg")


def cmd_spectrum(args) -> int:
    cfg = _load(args)
    n = args.n or cfg.engine["n"]
    decomp = nystrom_eigs(sample_weight_matrix(cfg.build_kernel(), n, MIDPOINT), min(args.k, n))
    mu_min, mu_max, mult = mu_extremes(decomp)
    meta = dict(n=n, mu_max=mu_max, mu_min=mu_min, multiplicity_of_max=mult)
    funcs = decomp.eigenfunctions
    cols = ["index", "eigenvalue"] + [f"w_{i}" for i in range(n)]
    rows = [[k, mu, *np.real(funcs[k])] for k, mu in enumerate(decomp.eigenvalues)]
    if np.iscomplexobj(funcs):
        cols += [f"im_w_{i}" for i in range(n)]
        rows = [r + list(np.imag(funcs[k])) for k, r in enumerate(rows)]
    output.write_csv(args.out, cols, rows, cfg, meta=meta)
    if not args.no_plot:
        plotting.spectrum(decomp.eigenvalues, _svg(args, args.out), title=cfg.build_kernel().describe())
    print(f"mu_max = {output.fmt(mu_max)}  mu_min = {output.fmt(mu_min)}  multiplicity = {mult}")
    return EXIT_OK


def cmd_critical(args) -> int:
    cfg = _load(args)
    n = args.n or min(cfg.engine["n"], 1024)
    decomp = nystrom_eigs(sample_weight_matrix(cfg.build_kernel(), n, MIDPOINT), min(8, n))
    rep = criticality.critical_couplings(decomp, cfg.build_model())
    row = [rep.kc_plus, rep.kc_minus, rep.mu_max, rep.mu_min, rep.multiplicity_of_max]
    output.write_csv(args.out, ["kc_plus", "kc_minus", "mu_max", "mu_min", "multiplicity_of_max"], [row], cfg)
    print(f"K_c+ = {rep.kc_plus:.6f}  K_c- = {output.fmt(rep.kc_minus)}")
    return EXIT_OK


def cmd_branch(args) -> int:
    cfg = _load(args)
    model = cfg.build_model()
    mu = args.mu
    if mu is None:
        mu = nystrom_eigs(sample_weight_matrix(cfg.build_kernel(), 512, MIDPOINT), 4).mu_max
    rows = []
    for K in args.k_grid:
        bp = criticality.branch(mu, float(K), model)
        rows.append([bp.K, bp.lam.real, bp.lam.imag, bp.side, bp.residual])
    output.write_csv(args.out, ["K", "re_lambda", "im_lambda", "side", "residual"], rows, cfg,
                     meta=dict(mu=mu, K_mu=criticality.threshold(mu, model)))
    return EXIT_OK


def cmd_dcurve(args) -> int:
    cfg = _load(args)
    model = cfg.build_model()
    rows = []
    for y in args.y_grid:
        lam = complex(args.x, y)
        val = freqdist.d_integral(model, lam) if args.x > 0 else freqdist.d_continuation(model, lam)
        rows.append([args.x, y, val.real, val.imag])
    output.write_csv(args.out, ["re_lambda", "im_lambda", "re_D", "im_D"], rows, cfg)
    return EXIT_OK


def _initial_phases(cfg, kind, matrix, eps=1e-2):
    rng = stream(cfg.seed, "initial-phases")
    if kind == "random":
        return dynamics.uniform_random(matrix.n, rng)
    mode = nystrom_eigs(matrix, 2).w_max
    return dynamics.coherent_seed(eps, mode, rng)


def cmd_simulate(args) -> int:
    cfg = _load(args)
    if args.seed is not None:
        cfg.seed = args.seed
    n = args.n or cfg.engine["n"]
    T = args.T if args.T is not None else cfg.engine["T"]
    dt = args.dt or cfg.engine["dt"]
    stride = args.stride or cfg.engine["stride"]
    matrix = sample_weight_matrix(cfg.build_kernel(), n, MIDPOINT)
    op = dynamics.Coupling(matrix)
    omega = freqdist.sample_frequencies(cfg.build_model(), n, stream(cfg.seed, "frequencies"))
    ens = dynamics.OscillatorEnsemble(_initial_phases(cfg, args.init, matrix), omega, matrix.grid)
    snaps, summary = [], []

    def observe(t, theta):
        field = dynamics.order_parameter(theta, op)
        rep = dynamics.classify_locked(omega, args.K, field)
        summary.append([t, float(np.mean(field.R)), rep.winding, rep.locked_fraction])
        if args.out:
            snaps.append([t, *np.mod(theta, 2 * math.pi)])

    ens = dynamics.integrate(ens, args.K, op, dt, T, stride, observe)
    meta = dict(K=args.K, n=n, T=T, dt=dt, stride=stride, init=args.init)
    if args.out:
        output.write_csv(args.out, ["t"] + [f"theta_{i}" for i in range(n)], snaps, cfg, meta=meta)
    if args.summary_out:
        output.write_csv(args.summary_out, ["t", "mean_abs_h", "winding", "locked_fraction"], summary, cfg, meta=meta)
        if not args.no_plot:
            s = np.asarray(summary, float)
            plotting.series(s[:, 0], {"mean |h|": s[:, 1]}, _svg(args, args.summary_out), ylabel="mean |h|")
    if args.snapshot_out:
        field = dynamics.order_parameter(ens.theta, op)
        rep = dynamics.classify_locked(omega, args.K, field)
        rows = zip(range(n), matrix.grid, omega, ens.phases, field.R, field.Phi, rep.locked_mask)
        output.write_csv(args.snapshot_out, ["i", "xi", "omega", "theta", "abs_h", "arg_h", "locked"],
                         rows, cfg, meta=meta)
        if not args.no_plot:
            plotting.phases(matrix.grid, ens.theta, Path(args.snapshot_out).with_suffix(".svg"), rep.locked_mask)
    last = summary[-1]
    print(f"t = {last[0]:.3f}  mean|h| = {last[1]:.6f}  winding = {last[2]}  locked = {last[3]:.3f}")
    return EXIT_OK


def cmd_meanfield(args) -> int:
    cfg = _load(args)
    e = cfg.engine
    kernel, model = cfg.build_kernel(), cfg.build_model()
    J = args.J or e["J"]
    grid = meanfield.make_grid(kernel, model, e["M"], e["x_nodes"], e["contour_shift"])
    mode = nystrom_eigs(sample_weight_matrix(kernel, e["x_nodes"], MIDPOINT), 2).w_max
    meta = dict(K=args.K, J=J, mode=args.mode, M=e["M"], x_nodes=e["x_nodes"])
    if args.mode == "linearized":
        T = args.T or 50.0
        run = meanfield.evolve_linearized(lambda w, x: np.exp(-w * w) * mode[None, :], args.K, grid, T)
        rows = zip(run.t, run.norm)
        output.write_csv(args.out, ["t", "norm_Pz1"], rows, cfg, meta=meta)
        if not args.no_plot:
            plotting.series(run.t, {"||P z1||": run.norm}, _svg(args, args.out), logy=True, ylabel="||P z1||")
        print(f"||Pz1(T)|| / ||Pz1(0)|| = {run.norm[-1] / run.norm[0]:.3e}")
        return EXIT_OK
    res = meanfield.stationary_amplitude(args.K, kernel, model, J, e["tol"], grid=grid, mode=mode,
                                         closure=e["closure"], dt=e["mf_dt"], T_max=args.T or e["T_max"])
    s = res.series
    meta["converged"] = res.converged
    output.write_csv(args.out, ["t", "mean_abs_h", "max_abs_z"], zip(s.t, s.mean_abs_h, s.max_abs_z), cfg, meta=meta)
    if not args.no_plot:
        plotting.series(s.t, {"mean |h|": s.mean_abs_h}, _svg(args, args.out), ylabel="mean |h|")
    print(f"mean|h| = {res.mean_abs_h:.8f}  converged = {res.converged}  t = {res.state.t:.1f}")
    return EXIT_OK if res.converged else EXIT_NUMERIC


def cmd_sweep(args) -> int:
    cfg = _load(args)
    e = cfg.engine
    kernel, model = cfg.build_kernel(), cfg.build_model()
    if args.engine == "galerkin":
        data = bifurcation.sweep(kernel, model, args.k_grid, "galerkin", J=e["J"], M=e["M"], n=e["x_nodes"],
                                 shift=e["contour_shift"], closure=e["closure"], dt=e["mf_dt"],
                                 T=e["T_max"], tol=e["tol"])
    else:
        data = bifurcation.sweep(kernel, model, args.k_grid, "finite-n", n=e["n"], dt=e["dt"], T=e["T"],
                                 stride=e["stride"], seed=int(stream(cfg.seed, "sweep").integers(2 ** 63)))
    rows = zip(data.K, data.summary, data.converged)
    output.write_csv(args.out, ["K", "mean_abs_h", "converged"], rows, cfg, meta=dict(engine=args.engine))
    for K, s in zip(data.K, data.summary):
        print(f"K = {K:.5f}  mean|h| = {s:.6f}")
    return EXIT_OK


def compare_rows(cfg: RunConfig, K, measured):
    kernel, model = cfg.build_kernel(), cfg.build_model()
    n = 256
    decomp = nystrom_eigs(sample_weight_matrix(kernel, n, MIDPOINT), 4)
    pred = bifurcation.predict_amplitude(decomp, model)
    rows = []
    for k, m in zip(K, measured):
        p = pred.mean_amplitude(k) if k >= pred.kc else 0.0
        rel = (m - p) / p if p > 0 else math.nan
        rows.append([k, m, p, rel])
    return pred, rows


def cmd_branch_compare(args) -> int:
    meta, cfg_text, cols = output.read_csv(args.branch)
    if not cfg_text:
        raise ConfigError([f"{args.branch}: no config echo in header"])
    cfg = parse_config_text(cfg_text, base_dir=Path(args.branch).parent)
    pred, rows = compare_rows(cfg, cols["K"], cols["mean_abs_h"])
    output.write_csv(args.out, ["K", "measured", "predicted", "rel_error"], rows, cfg,
                     meta=dict(kc=pred.kc, case=pred.case, source=Path(args.branch).name))
    svg = args.svg or (None if args.no_plot else Path(args.out).with_suffix(".svg"))
    if svg:
        r = np.asarray(rows, float)
        plotting.branch_compare(r[:, 0], r[:, 1], r[:, 2], svg, kc=pred.kc)
    return EXIT_OK


def cmd_recipe(args) -> int:
    from . import recipes

    cfg = parse_config(args.config) if args.config else None
    result = recipes.run_recipe(args.name, Path(args.out_dir), cfg, quick=args.quick)
    print(result.report_text(), end="")
    return EXIT_OK if result.passed else EXIT_ACCEPT


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="kurograph", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=f"kurograph {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p, out_default):
        p.add_argument("--config", help="INI run configuration")
        p.add_argument("--out", default=out_default, help="output CSV")
        p.add_argument("--no-plot", action="store_true", help="skip the figure next to the CSV")
        return p

    p = common(sub.add_parser("spectrum", help="Nystrom eigenvalues of the kernel"), "spectrum.csv")
    p.add_argument("--n", type=int)
    p.add_argument("--k", type=int, default=16)
    p.add_argument("--svg")
    p.set_defaults(func=cmd_spectrum)

    p = common(sub.add_parser("critical", help="critical couplings K_c+ and K_c-"), "critical.csv")
    p.add_argument("--n", type=int)
    p.set_defaults(func=cmd_critical)

    p = common(sub.add_parser("branch", help="eigenvalue/resonance lambda(mu, K) along a K grid"), "branch_lambda.csv")
    p.add_argument("--mu", type=float, help="eigenvalue (default: mu_max of the kernel)")
    p.add_argument("--k-grid", type=parse_grid, required=True, help="a:b:steps")
    p.set_defaults(func=cmd_branch)

    p = common(sub.add_parser("dcurve", help="D(lambda) along a vertical line Re lambda = x"), "dcurve.csv")
    p.add_argument("--x", type=float, default=0.1)
    p.add_argument("--y-grid", type=parse_grid, default=parse_grid("-5:5:201"))
    p.set_defaults(func=cmd_dcurve)

    p = common(sub.add_parser("simulate", help="finite-n Kuramoto simulation"), None)
    p.add_argument("--K", type=float, required=True)
    p.add_argument("--n", type=int)
    p.add_argument("--T", type=float)
    p.add_argument("--dt", type=float)
    p.add_argument("--stride", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--init", choices=["random", "coherent"], default="random")
    p.add_argument("--summary-out", default="summary.csv")
    p.add_argument("--snapshot-out", default="snapshot.csv")
    p.set_defaults(func=cmd_simulate)

    p = common(sub.add_parser("meanfield", help="Galerkin mean-field engine"), "series.csv")
    p.add_argument("--K", type=float, required=True)
    p.add_argument("--J", type=int)
    p.add_argument("--T", type=float)
    p.add_argument("--mode", choices=["nonlinear", "linearized"], default="nonlinear")
    p.set_defaults(func=cmd_meanfield)

    p = common(sub.add_parser("sweep", help="stationary amplitude along a K grid"), "branch.csv")
    p.add_argument("--engine", choices=["finite-n", "galerkin"], default="galerkin")
    p.add_argument("--k-grid", type=parse_grid, required=True, help="a:b:steps")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("branch-compare", help="measured vs predicted amplitude")
    p.add_argument("--branch", required=True, help="CSV written by sweep")
    p.add_argument("--out", default="compare.csv")
    p.add_argument("--svg")
    p.add_argument("--no-plot", action="store_true")
    p.set_defaults(func=cmd_branch_compare)

    p = sub.add_parser("recipe", help="run a named experiment with pass/fail report")
    p.add_argument("name", choices=["classical-kc", "er-pitchfork", "sw-pitchfork", "cosine-twisted", "landau"])
    p.add_argument("--config")
    p.add_argument("--out-dir", default="out")
    p.add_argument("--quick", action="store_true", help="reduced sizes for smoke runs (checks may fail)")
    p.set_defaults(func=cmd_recipe)
    return ap


def _thread_limit():
    value = os.environ.get("KUROGRAPH_THREADS")
    if not value:
        return None
    from threadpoolctl import threadpool_limits

    try:
        count = int(value)
    except ValueError:
        raise ConfigError([f"KUROGRAPH_THREADS: expected an integer, got {value!r}"]) from None
    return threadpool_limits(limits=max(1, count))


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code else EXIT_OK
    limiter = None
    try:
        limiter = _thread_limit()
        return args.func(args)
    except ConfigError as exc:
        for err in exc.errors:
            print(f"config error: {err}", file=sys.stderr)
        return EXIT_CONFIG
    except (PreconditionError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (NumericalError, KurographError, FloatingPointError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    finally:
        if limiter is not None:
            limiter.restore_original_limits()


if __name__ == "__main__":
    sys.exit(main())
