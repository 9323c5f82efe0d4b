"""Command-line entry point: ``rakeness <command> [--config PATH] [--out DIR] ...``.

Exit codes: 0 success, 2 configuration or usage error, 3 infeasible design,
4 numerical failure.
"""
import argparse
import logging
import os
import sys
from dataclasses import replace

import numpy as np

from . import experiments as ex
from .exceptions import InfeasibleError, InvalidInputError, NumericError
from .io import (
    fmt,
    read_keyvalue,
    read_matrix,
    read_spectrum,
    read_table,
    write_keyvalue,
    write_matrix,
    write_spectrum,
    write_table,
)
from .spectral import SpectralDensity
from .svg import line_chart

log = logging.getLogger("rakeness")

EXIT_OK, EXIT_CONFIG, EXIT_INFEASIBLE, EXIT_NUMERIC = 0, 2, 3, 4


def _config(args):
    if args.config is None:
        raise ex.ConfigError("--config is required for this command")
    cfg = ex.load_config(args.config)
    if args.seed is not None:
        cfg = replace(cfg, master_seed=args.seed)
    return cfg


def _out(args):
    os.makedirs(args.out, exist_ok=True)
    return args.out


def _design_name(r, sub=None):
    return f"design_r{fmt(r)}.csv" if sub is None else f"design_r{fmt(r)}_sub{sub}.csv"


def cmd_design(args):
    cfg = _config(args)
    out = _out(args)
    designs = ex.build_designs(cfg)
    meta = ex.metadata(cfg)
    if cfg.experiment == "ecg":
        write_spectrum(os.path.join(out, "signal_psd.csv"), designs.a_hat)
        lo, _ = ex.ecg_r_range()
        meta["r_min"] = lo
        for r, sd in designs.designs.items():
            write_spectrum(os.path.join(out, _design_name(r)), sd)
    else:
        for k, A in designs.correlations.items():
            write_matrix(os.path.join(out, f"correlation_sub{k}.csv"), A)
        for r, subs in designs.designs.items():
            for k, d in subs.items():
                write_matrix(os.path.join(out, _design_name(r, k)), d.B)
                write_table(os.path.join(out, f"eigs_r{fmt(r)}_sub{k}.csv"), ("mu", "lambda"), zip(d.mu, d.lambda_))
                meta[f"J.r{fmt(r)}.sub{k}"] = d.J
    for r in cfg.r_list:
        meta[f"status.r{fmt(r)}"] = "ok" if r in designs.designs else "infeasible: " + designs.errors[r]
    write_keyvalue(os.path.join(out, "design.meta"), meta)
    for r, msg in sorted(designs.errors.items()):
        log.warning("r = %s: %s", fmt(r), msg)
    print(f"designed {len(designs.designs)} of {len(cfg.r_list)} r values into {out}")
    if not designs.designs:
        raise InfeasibleError("every r in r_list is infeasible")
    return EXIT_OK


def load_designs(cfg, out):
    """Read the artifacts written by ``design`` for every r of ``cfg``."""
    hint = f"run `rakeness design --config <config> --out {out}` first"
    meta_path = os.path.join(out, "design.meta")
    if not os.path.exists(meta_path):
        raise ex.ConfigError(f"no design artifacts in {out}; {hint}")
    meta = read_keyvalue(meta_path)
    designs = ex.DesignSet(cfg.experiment)
    for r in cfg.r_list:
        status = meta.get(f"status.r{fmt(r)}")
        if status is None:
            raise ex.ConfigError(f"r = {fmt(r)} was not designed; {hint}")
        if status != "ok":
            designs.errors[r] = status
            continue
        try:
            if cfg.experiment == "ecg":
                designs.designs[r] = read_spectrum(os.path.join(out, _design_name(r)))
            else:
                designs.designs[r] = {
                    k: read_matrix(os.path.join(out, _design_name(r, k))) for k in ex.CENTRAL_SUBGRIDS
                }
        except OSError as exc:
            raise ex.ConfigError(f"missing design artifact ({exc}); {hint}") from None
    return designs


def cmd_run(args):
    cfg = _config(args)
    out = _out(args)
    designs = load_designs(cfg, out)
    for r, msg in designs.errors.items():
        log.warning("skipping r = %s (%s)", fmt(r), msg)
    r_ok = tuple(r for r in cfg.r_list if r in designs.designs)
    specs = ex.plan_rows(cfg, r_list=r_ok)
    rows = ex.run_trials(cfg, designs, specs, workers=args.workers)
    path = os.path.join(out, "results.csv")
    write_table(path, ex.RESULT_HEADER, [row.as_tuple() for row in rows])
    write_keyvalue(os.path.join(out, "results.meta"), ex.metadata(cfg, rows=len(rows)))
    print(f"wrote {len(rows)} rows to {path}")
    return EXIT_OK


def read_results(path):
    header, raw = read_table(path)
    if tuple(header) != ex.RESULT_HEADER:
        raise ex.ConfigError(f"{path}: unexpected header {header}")
    rows = []
    for cells in raw:
        exp, method, r, M, trial, rsnr, seed = cells
        r = float(r) if r not in ("", "nan") else float("nan")
        rows.append(ex.ResultRow(exp, method, r, int(M), int(trial), float(rsnr), int(seed)))
    return rows


def summary_plot(summary):
    series = {}
    for exp, method, r, M, ratio, n, mean, std, capped in summary:
        name = method if r == "" else f"{method} r={fmt(r)}"
        series.setdefault(name, []).append((ratio, mean, std))
    exp = summary[0][0]
    return line_chart(series, "compression ratio N/M", "ARSNR [dB]", title=f"{exp}: ARSNR vs N/M")


def cmd_summarize(args):
    path = args.results or os.path.join(args.out, "results.csv")
    try:
        rows = read_results(path)
    except OSError as exc:
        raise ex.ConfigError(f"cannot read results: {exc}") from None
    summary = ex.summarize_rows(rows)
    out = _out(args)
    write_table(os.path.join(out, "summary.csv"), ex.SUMMARY_HEADER, summary)
    with open(os.path.join(out, "plot.svg"), "w", encoding="utf-8", newline="\n") as f:
        f.write(summary_plot(summary))
    for s in summary:
        print(f"{s[1]:>9} r={fmt(s[2]) or '-':>8} M={s[3]:>4}  ARSNR {s[6]:7.3f} dB  (std {s[7]:.3f}, n={s[5]})")
    return EXIT_OK


def cmd_sweep_r(args):
    cfg = _config(args)
    out = _out(args)
    rep = ex.sweep_r(cfg, workers=args.workers)
    write_table(os.path.join(out, "sweep.csv"), ("r", "arsnr_db", "std_db", "n", "status"), rep.table)
    write_keyvalue(
        os.path.join(out, "sweep.meta"),
        ex.metadata(cfg, best_r=rep.best_r, M=rep.M, iid_arsnr_db=rep.iid_arsnr_db),
    )
    print(f"M = {rep.M}, iid ARSNR {rep.iid_arsnr_db:.3f} dB")
    for r, mean, std, n, status in rep.table:
        print(f"r = {fmt(r):>10}  " + (f"ARSNR {mean:7.3f} dB (std {std:.3f}, n={n})" if status == "ok" else status))
    print(f"best r = {fmt(rep.best_r)}")
    return EXIT_OK


def cmd_gen_ecg(args):
    cfg = _config(args) if args.config else ex.default_config("ecg", master_seed=args.seed or 0)
    out = _out(args)
    write_matrix(os.path.join(out, "ecg_train.csv"), ex.ecg_corpus(cfg.master_seed, cfg.n_train, 1))
    write_matrix(os.path.join(out, "ecg_test.csv"), ex.ecg_corpus(cfg.master_seed, cfg.n_test, 2))
    print(f"wrote {cfg.n_train} training and {cfg.n_test} test ECGs to {out}")
    return EXIT_OK


def cmd_gen_images(args):
    cfg = _config(args) if args.config else ex.default_config("image", master_seed=args.seed or 0)
    out = _out(args)
    header = tuple(f"p{i}" for i in range(ex.IMAGE_N)) + ("label",)
    for name, n, part in (("images_train.csv", cfg.n_train, 1), ("images_test.csv", cfg.n_test, 2)):
        X, labels = ex.image_corpus(cfg.master_seed, n, part)
        write_table(os.path.join(out, name), header, [list(x) + [lab] for x, lab in zip(X, labels)])
    print(f"wrote {cfg.n_train} training and {cfg.n_test} test images to {out}")
    return EXIT_OK


def _selftest_checks():
    from .eigen import design_eigenvalues, oracle_solve
    from .rmpi import rip_constant
    from .spectral import r_min

    rng = np.random.default_rng(0)
    mu = np.sort(rng.dirichlet(np.ones(6)))[::-1]
    lam, _ = design_eigenvalues(mu, 0.3)
    ref = oracle_solve(mu, 0.3, n_restarts=50)
    yield "closed-form eigenvalues match brute force", np.abs(lam - ref.lambda_).max() < 1e-4
    from scipy.integrate import quad

    c = 2.0
    # white-spectrum self-rakeness by direct quadrature of the triangle-weighted kernel
    val = quad(lambda u: (2 * c - abs(u)) * np.sinc(u) ** 2, -2 * c, 2 * c, limit=400)[0] / (4 * c * c)
    yield "r_min closed form matches quadrature", abs(val - r_min(c)) < 1e-6
    yield "RIP constant of the identity is zero", rip_constant(np.eye(4), 2) < 1e-12
    sd = SpectralDensity.flat(1.0, 4)
    yield "flat spectrum has unit power", abs(sd.df * sd.values.sum() - 1) < 1e-12


def cmd_selftest(args):
    ok = True
    for name, passed in _selftest_checks():
        print(f"[{'PASS' if passed else 'FAIL'}] {name}")
        ok &= bool(passed)
    return EXIT_OK if ok else EXIT_NUMERIC


COMMANDS = {
    "design": cmd_design,
    "run": cmd_run,
    "summarize": cmd_summarize,
    "sweep-r": cmd_sweep_r,
    "gen-ecg": cmd_gen_ecg,
    "gen-images": cmd_gen_images,
    "selftest": cmd_selftest,
}


def build_parser():
    parser = argparse.ArgumentParser(prog="rakeness", description="Rakeness-based design of random projections.")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", help="key = value configuration file")
        p.add_argument("--out", default=".", help="output directory (default: current)")
        p.add_argument("--workers", type=int, default=os.cpu_count() or 1, help="parallel trial workers")
        p.add_argument("--seed", type=int, help="override master_seed")
        if name == "summarize":
            p.add_argument("results", nargs="?", help="results CSV (default: OUT/results.csv)")
    return parser


def main(argv=None):
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s: %(message)s")
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code else EXIT_OK
    if args.seed is not None and not 0 <= args.seed < 2**64:
        print("error: --seed must be an unsigned 64-bit integer", file=sys.stderr)
        return EXIT_CONFIG
    if args.workers < 1:
        print("error: --workers must be >= 1", file=sys.stderr)
        return EXIT_CONFIG
    try:
        return COMMANDS[args.command](args)
    except InfeasibleError as exc:
        print(f"infeasible: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except NumericError as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (InvalidInputError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ArithmeticError as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
