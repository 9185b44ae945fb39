"""Command-line harness: rate exponents, synthetic truths, fits, benchmarks."""

from __future__ import annotations

import argparse
import os
import sys

import numpy as np

from .besov import sample_besov_section, write_section
from .needlets import build_frame
from .rates import (alpha_theoretical, estimate_rate, read_config,
                    read_csv_rows, run_convergence, write_csv)
from .regression import (EstimatorConfig, default_kappa, fit, read_dataset,
                         write_estimate)


def _num(text):
    return float("inf") if text.lower() in ("inf", "infinity") else float(text)


def _cmd_alpha(args):
    alpha, zone = alpha_theoretical(args.r, args.pi, args.p)
    print(f"alpha={alpha:.12g} zone={zone}")
    return 0


def _cmd_synth(args):
    cfg = read_config(args.config)
    section = sample_besov_section(cfg.besov, cfg.spin, cfg.band_limit,
                                   seed=cfg.seed, bandwidth=cfg.bandwidth,
                                   flavor=cfg.flavor)
    write_section(section, args.out)
    print(f"wrote section {section.truth_id} -> {args.out}")
    return 0


def _cmd_fit(args):
    cfg = read_config(args.config)
    data = read_dataset(args.data)
    if data.spin != cfg.spin:
        raise SystemExit(f"dataset spin {data.spin} does not match config spin {cfg.spin}")
    if cfg.kappa == "auto":
        sup = cfg.sup_bound if cfg.sup_bound is not None else 1.0
        p_eff = 2.0 if np.isinf(cfg.p) else cfg.p
        kappa = default_kappa(cfg.noise.sigma, sup, r=cfg.besov.r, p=p_eff)
    else:
        kappa = float(cfg.kappa)
    est_cfg = EstimatorConfig(cfg.bandwidth, cfg.spin, cfg.flavor, kappa,
                              data.n, sup_bound=cfg.sup_bound)
    frame = build_frame(cfg.bandwidth, cfg.spin, cfg.flavor, est_cfg.j_cutoff)
    result = fit(data, est_cfg, frame, noise_sigma=cfg.noise.sigma)
    write_estimate(result, args.out)
    print(f"fit n={data.n} J_n={est_cfg.j_cutoff} kappa={kappa:.6g} "
          f"kept={result.kept_total} -> {args.out}")
    return 0


def _cmd_bench(args):
    cfg = read_config(args.config)
    os.makedirs(args.out, exist_ok=True)
    csv_path = os.path.join(args.out, "results.csv")
    result = run_convergence(cfg, out_csv=csv_path)
    summary_path = os.path.join(args.out, "summary.txt")
    with open(summary_path, "w") as fh:
        fh.write(f"fitted_slope={result.fitted_slope:.17g}\n")
        fh.write(f"theoretical_alpha={result.theoretical_alpha:.17g}\n")
        fh.write(f"zone={result.zone}\n")
        fh.write(f"kappa={result.kappa:.17g}\n")
        for n, logm in zip(result.rate_fit.n_values, result.rate_fit.log_mean_loss):
            fh.write(f"log_mean_loss[n={n}]={logm:.17g}\n")
    print(f"fitted_slope={result.fitted_slope:.6g} "
          f"theoretical_alpha={result.theoretical_alpha:.6g} zone={result.zone}")
    print(f"wrote {csv_path} and {summary_path}")
    return 0


def _cmd_rate(args):
    rows = read_csv_rows(args.csv)
    fit_ = estimate_rate(rows)
    print(f"slope={fit_.slope:.12g} intercept={fit_.intercept:.12g}")
    for n, res in zip(fit_.n_values, fit_.residuals):
        print(f"residual[n={n}]={res:.6g}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="spinlets",
        description="spin needlet thresholding regression benchmark harness",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_alpha = sub.add_parser("alpha", help="theoretical rate exponent")
    p_alpha.add_argument("--r", type=float, required=True)
    p_alpha.add_argument("--pi", type=_num, required=True)
    p_alpha.add_argument("--p", type=_num, required=True)
    p_alpha.set_defaults(func=_cmd_alpha)

    p_synth = sub.add_parser("synth", help="sample a Besov-ball truth section")
    p_synth.add_argument("--config", required=True)
    p_synth.add_argument("--out", required=True)
    p_synth.set_defaults(func=_cmd_synth)

    p_fit = sub.add_parser("fit", help="fit the thresholding estimator to a dataset")
    p_fit.add_argument("--data", required=True)
    p_fit.add_argument("--config", required=True)
    p_fit.add_argument("--out", required=True)
    p_fit.set_defaults(func=_cmd_fit)

    p_bench = sub.add_parser("bench", help="run a convergence experiment grid")
    p_bench.add_argument("--config", required=True)
    p_bench.add_argument("--out", required=True, help="output directory")
    p_bench.set_defaults(func=_cmd_bench)

    p_rate = sub.add_parser("rate", help="fit a rate slope to a results CSV")
    p_rate.add_argument("--csv", required=True)
    p_rate.set_defaults(func=_cmd_rate)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
