"""Convergence-rate exponents and the seeded benchmark harness.

The theoretical exponent alpha(r, pi, p) splits into a regular zone
(pi >= 2p/(2r+2)) with alpha = r p / (2r + 2) and a sparse zone with
alpha = p (r - 2(1/pi - 1/p)) / (2 (r - 2(1/pi - 1/2))); both formulas agree
on the boundary.  The harness runs seeded Monte Carlo experiments across a
grid of sample sizes, writes one CSV row per (n, replicate), and fits the
slope of log mean loss against log(n / log n).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .besov import BesovParams, sample_besov_section
from .needlets import FLAVORS, build_frame
from .regression import (EstimatorConfig, NoiseModel, default_kappa, fit,
                         lp_loss, simulate_dataset)

__all__ = [
    "ExperimentConfig",
    "RateFit",
    "RateResult",
    "alpha_theoretical",
    "estimate_rate",
    "run_convergence",
    "read_config",
    "write_csv",
    "read_csv_rows",
]

_ZONE_TOL = 1e-12


def alpha_theoretical(r: float, pi: float, p: float):
    """Rate exponent and zone label for the p-th power loss.

    Returns (alpha, zone) with zone in {"regular", "sparse", "boundary"}.
    """
    if pi < 1 or (not np.isinf(p) and p < 1):
        raise ValueError("indices must satisfy pi >= 1 and 1 <= p <= inf")
    inv_pi = 0.0 if np.isinf(pi) else 1.0 / pi
    if r - 2.0 * inv_pi <= 0:
        raise ValueError("hypotheses require r - 2/pi > 0")
    if np.isinf(p):
        alpha = (r - 2.0 * inv_pi) / (2.0 * (r - 2.0 * (inv_pi - 0.5)))
        zone = "boundary" if np.isinf(pi) else "sparse"
        return alpha, zone
    threshold = 2.0 * p / (2.0 * r + 2.0)
    regular = r * p / (2.0 * r + 2.0)
    if np.isinf(pi) or pi > threshold + _ZONE_TOL:
        return regular, "regular"
    sparse = (p * (r - 2.0 * (inv_pi - 1.0 / p))) / (2.0 * (r - 2.0 * (inv_pi - 0.5)))
    if pi < threshold - _ZONE_TOL:
        return sparse, "sparse"
    return regular, "boundary"


@dataclass(eq=False)
class RateFit:
    slope: float
    intercept: float
    n_values: np.ndarray
    log_mean_loss: np.ndarray
    residuals: np.ndarray


def estimate_rate(rows) -> RateFit:
    """OLS slope of log(mean loss) against log(n / log n).

    rows: iterable of (n, loss) pairs; repeated n values are averaged first.
    """
    buckets: dict[int, list] = {}
    for n, loss in rows:
        buckets.setdefault(int(n), []).append(float(loss))
    if len(buckets) < 3:
        raise ValueError("need at least 3 distinct sample sizes to fit a rate")
    ns = np.array(sorted(buckets))
    means = np.array([np.mean(buckets[n]) for n in ns])
    if np.any(means <= 0):
        raise ValueError("mean losses must be positive to fit on log axes")
    x = np.log(ns / np.log(ns))
    y = np.log(means)
    slope, intercept = np.polyfit(x, y, 1)
    residuals = y - (slope * x + intercept)
    return RateFit(float(slope), float(intercept), ns, y, residuals)


@dataclass(frozen=True)
class ExperimentConfig:
    """Everything a convergence experiment needs, seeds included."""

    besov: BesovParams
    spin: int
    flavor: str
    bandwidth: float
    noise: NoiseModel
    p: float
    n_grid: tuple
    replicates: int
    kappa: float | str = "auto"
    seed: int = 0
    band_limit: int = 16
    truth_mode: str = "fixed"
    sup_bound: float | None = None
    # optional tilt of the truth's level budgets (a harder ball element):
    # levels >= truth_boost_from get their budget multiplied by truth_boost
    truth_boost: float = 1.0
    truth_boost_from: float = 0.0

    def __post_init__(self):
        if self.flavor not in FLAVORS:
            raise ValueError(f"flavor must be one of {FLAVORS}")
        grid = tuple(int(n) for n in self.n_grid)
        if len(grid) < 1 or any(b <= a for a, b in zip(grid, grid[1:])):
            raise ValueError("n_grid must be strictly increasing")
        if min(grid) < 2:
            raise ValueError("sample sizes must be at least 2")
        object.__setattr__(self, "n_grid", grid)
        if self.replicates < 1:
            raise ValueError("need at least one replicate")
        if not np.isinf(self.p) and self.p < 1:
            raise ValueError("p must satisfy 1 <= p <= inf")
        if self.truth_mode not in ("fixed", "per_replicate"):
            raise ValueError("truth_mode must be 'fixed' or 'per_replicate'")


@dataclass(eq=False)
class RateResult:
    rows: list
    fitted_slope: float
    theoretical_alpha: float
    zone: str
    rate_fit: RateFit
    kappa: float


def _derived_seed(seed: int, n_index: int, replicate: int) -> int:
    ss = np.random.SeedSequence([int(seed), 1_000 + n_index, replicate])
    return int(ss.generate_state(1)[0])


def run_convergence(config: ExperimentConfig, out_csv=None) -> RateResult:
    """Run the seeded experiment grid and fit the empirical rate.

    Cells are visited in deterministic (n, replicate) order; the CSV is
    byte-identical across reruns with the same config.
    """
    p_eff = 2.0 if np.isinf(config.p) else config.p
    truths = {}
    if config.truth_boost != 1.0:
        profile = lambda j: config.truth_boost if j >= config.truth_boost_from else 1.0
    else:
        profile = None

    def truth_for(rep: int):
        key = 0 if config.truth_mode == "fixed" else rep
        if key not in truths:
            truths[key] = sample_besov_section(
                config.besov, config.spin, config.band_limit,
                seed=config.seed if key == 0 else _derived_seed(config.seed, 0, key),
                bandwidth=config.bandwidth, flavor=config.flavor,
                level_profile=profile,
            )
        return truths[key]

    first_truth = truth_for(0)
    sup_bound = config.sup_bound if config.sup_bound is not None else first_truth.sup_norm
    if config.kappa == "auto":
        kappa = default_kappa(config.noise.sigma, sup_bound, r=config.besov.r, p=p_eff)
    else:
        kappa = float(config.kappa)

    frames = {}
    rows = []
    for ni, n in enumerate(config.n_grid):
        est_cfg = EstimatorConfig(config.bandwidth, config.spin, config.flavor,
                                  kappa, n, sup_bound=sup_bound)
        j_cut = est_cfg.j_cutoff
        if j_cut not in frames:
            frames[j_cut] = build_frame(config.bandwidth, config.spin, config.flavor, j_cut)
        frame = frames[j_cut]
        for rep in range(config.replicates):
            truth = truth_for(rep)
            dseed = _derived_seed(config.seed, ni + 1, rep)
            data = simulate_dataset(truth, n, config.noise, dseed)
            result = fit(data, est_cfg, frame)
            loss = lp_loss(result, truth, frame, config.p)
            rows.append((n, rep, loss, j_cut, result.kept_total, dseed))

    rate_fit = estimate_rate((n, loss) for n, _, loss, _, _, _ in rows)
    alpha, zone = alpha_theoretical(config.besov.r, config.besov.pi, config.p)
    if out_csv is not None:
        write_csv(rows, config.p, out_csv)
    return RateResult(rows, rate_fit.slope, alpha, zone, rate_fit, kappa)


def _fmt_p(p) -> str:
    return "inf" if np.isinf(p) else f"{p:.17g}"


def write_csv(rows, p, dest):
    """CSV schema: n,replicate,p,loss_p,J_n,kept_total,seed (17 significant digits)."""
    own = isinstance(dest, (str, bytes))
    fh = open(dest, "w", newline="") if own else dest
    try:
        fh.write("n,replicate,p,loss_p,J_n,kept_total,seed\n")
        for n, rep, loss, j_cut, kept, seed in rows:
            fh.write(f"{n},{rep},{_fmt_p(p)},{loss:.17g},{j_cut},{kept},{seed}\n")
    finally:
        if own:
            fh.close()


def read_csv_rows(src):
    """Read (n, loss_p) pairs from a benchmark CSV."""
    own = isinstance(src, (str, bytes))
    fh = open(src, "r") if own else src
    try:
        header = fh.readline().strip().split(",")
        idx_n = header.index("n")
        idx_loss = header.index("loss_p")
        rows = []
        for line in fh:
            line = line.strip()
            if not line:
                continue
            parts = line.split(",")
            rows.append((int(parts[idx_n]), float(parts[idx_loss])))
    finally:
        if own:
            fh.close()
    return rows


_DEFAULTS = {
    "r": "2", "pi": "2", "q": "2", "radius": "1", "spin": "2",
    "flavor": "mixed", "B": "2", "p": "2", "kappa": "auto", "sigma": "0.5",
    "noise_kind": "gaussian", "n_grid": "1024,2048,4096", "replicates": "8",
    "seed": "0", "sup_bound": "", "band_limit": "16", "truth_mode": "fixed",
    "truth_boost": "1", "truth_boost_from": "0",
}


def read_config(path) -> ExperimentConfig:
    """Parse a flat `key = value` experiment config file."""
    raw = dict(_DEFAULTS)
    with open(path, "r") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            key, sep, val = line.partition("=")
            if not sep:
                raise ValueError(f"{path}:{lineno}: expected 'key = value'")
            key = key.strip()
            if key not in raw:
                raise ValueError(f"{path}:{lineno}: unknown config key {key!r}")
            raw[key] = val.strip()

    def num(text):
        return float("inf") if text.lower() in ("inf", "infinity") else float(text)

    besov = BesovParams(r=num(raw["r"]), pi=num(raw["pi"]), q=num(raw["q"]),
                        radius=num(raw["radius"]))
    noise = NoiseModel(kind=raw["noise_kind"], sigma=float(raw["sigma"]))
    n_grid = tuple(int(tok) for tok in raw["n_grid"].replace(",", " ").split())
    kappa = raw["kappa"] if raw["kappa"] == "auto" else float(raw["kappa"])
    sup_bound = float(raw["sup_bound"]) if raw["sup_bound"] else None
    return ExperimentConfig(
        besov=besov, spin=int(raw["spin"]), flavor=raw["flavor"],
        bandwidth=float(raw["B"]), noise=noise, p=num(raw["p"]),
        n_grid=n_grid, replicates=int(raw["replicates"]), kappa=kappa,
        seed=int(raw["seed"]), band_limit=int(raw["band_limit"]),
        truth_mode=raw["truth_mode"], sup_bound=sup_bound,
        truth_boost=float(raw["truth_boost"]),
        truth_boost_from=float(raw["truth_boost_from"]),
    )
