"""Command-line orchestration for every experiment in the toolkit.

Commands: fidelity, calibrate, spectrum, formfactor, rmt, mc-rmt, compare.
Configuration comes from an optional JSON file plus flags (flags win);
the two chaotic parameter presets fill in couplings, kicks and symmetry
class.  Every output CSV embeds the fully resolved configuration and the
package version in '#' header lines and is byte-identical for identical
(config, seed) regardless of worker count.

Exit codes: 0 ok, 2 usage/config error, 3 resource guard, 4 numeric
failure.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import asdict, dataclass, field

import numpy as np

from . import __version__
from .csvio import read_table, write_table
from .floquet import (
    FloquetSpec,
    correlation_series,
    delta_from_epsilon,
    epsilon_from_delta,
    heisenberg_time,
    integrated_correlation,
    trace_fidelity,
)
from . import spectral
from .presets import preset_by_name
from .rng import substream
from .rmt import (
    GUE_T1_DEFAULT_VARIANT,
    NumericError,
    elr_fidelity,
    gue_exact_fidelity,
    lr_fidelity,
    mc_ensemble_fidelity,
)
from .spectral import eigenphases, mean_spacing_ratio, nns_density, spectral_form_factor, unfolded_spacings
from .stats import error_budget
from .symmetry import (
    ResourceLimitError,
    build_sector_basis,
    default_sector_list,
    sector_floquet_matrix,
)

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_RESOURCE = 3
EXIT_NUMERIC = 4

# rough per-run operation budget (state updates) before demanding --force
COST_GUARD = 2e13


class UsageError(RuntimeError):
    pass


@dataclass
class RunConfig:
    L: int = 12
    J: float = 1.0
    kicks: list = field(default_factory=lambda: [[1.0, 0.0, 1.0], [1.4, 1.4, 0.0]])
    klass: str = "non_tri"  # "tri" | "non_tri"
    delta: float | None = None
    epsilon: float | None = None
    sigma_int: float | None = None
    m: int = 10
    t_max: int | None = None
    stride: int = 1
    seed: int | None = None
    out: str = "out.csv"
    threads: int = 1

    @property
    def tri(self) -> bool:
        return self.klass == "tri"

    def spec(self) -> FloquetSpec:
        return FloquetSpec(L=self.L, J=self.J, kicks=tuple(tuple(k) for k in self.kicks))


def _resolve_threads(value: int | None) -> int:
    if value is not None:
        return max(1, value)
    env = os.environ.get("ECHOCHAIN_THREADS")
    return max(1, int(env)) if env else 1


def build_config(args: argparse.Namespace) -> RunConfig:
    """Merge JSON config file, preset, and CLI flags (flags win)."""
    raw: dict = {}
    if getattr(args, "config", None):
        with open(args.config) as fh:
            raw = json.load(fh)
        unknown = set(raw) - set(RunConfig.__dataclass_fields__)
        if unknown:
            raise UsageError(f"unknown config keys: {sorted(unknown)}")
    cfg = RunConfig(**raw)
    preset_name = getattr(args, "preset", None) or raw.get("preset")
    if preset_name:
        preset = preset_by_name(preset_name)
        cfg.J = preset.J
        cfg.kicks = [list(k) for k in preset.kicks]
        cfg.klass = "tri" if preset.tri else "non_tri"
        if cfg.sigma_int is None and getattr(args, "sigma_int", None) is None:
            cfg.sigma_int = preset.sigma_reference
    for name in RunConfig.__dataclass_fields__:
        value = getattr(args, name, None)
        if value is not None:
            setattr(cfg, name, value)
    cfg.threads = _resolve_threads(getattr(args, "threads", None) or raw.get("threads"))
    if cfg.klass not in ("tri", "non_tri"):
        raise UsageError(f"class must be 'tri' or 'non_tri', got {cfg.klass!r}")
    if not 2 <= cfg.L <= 24:
        raise UsageError(f"L={cfg.L} outside supported range [2, 24]")
    if cfg.stride < 1:
        raise UsageError("stride must be >= 1")
    return cfg


def _require_seed(cfg: RunConfig) -> int:
    if cfg.seed is None:
        raise UsageError("a seed is mandatory for reproducible stochastic runs (--seed)")
    return cfg.seed


def _config_meta(cfg: RunConfig) -> dict:
    echo = asdict(cfg)
    return {"config": echo, "version": f"echochain {__version__}"}


def _guard_cost(cfg: RunConfig, t_max: int, force: bool) -> None:
    cost = 2.0 * cfg.m * t_max * len(cfg.kicks) * cfg.L * (1 << cfg.L)
    if cost > COST_GUARD and not force:
        raise ResourceLimitError(
            f"estimated cost {cost:.1e} state-element updates exceeds the guard "
            f"({COST_GUARD:.0e}); rerun with --force to proceed"
        )


def _calibrate_sigma(cfg: RunConfig, seed: int) -> float:
    series = correlation_series(cfg.spec(), T=200, m=max(8, min(cfg.m, 16)), seed=seed,
                                workers=cfg.threads)
    return integrated_correlation(series, tri=cfg.tri).sigma


def cmd_fidelity(args) -> int:
    cfg = build_config(args)
    seed = _require_seed(cfg)
    if (cfg.delta is None) == (cfg.epsilon is None):
        raise UsageError("give exactly one of --delta or --epsilon")
    sigma = cfg.sigma_int
    if cfg.epsilon is not None:
        if sigma is None:
            sigma = _calibrate_sigma(cfg, seed)
        delta = delta_from_epsilon(cfg.L, cfg.epsilon, sigma)
        epsilon = cfg.epsilon
    else:
        delta = cfg.delta
        epsilon = epsilon_from_delta(cfg.L, delta, sigma) if sigma else None
    t_h = heisenberg_time(cfg.L, cfg.tri)
    t_max = cfg.t_max if cfg.t_max is not None else int(np.ceil(1.5 * t_h))
    _guard_cost(cfg, t_max, getattr(args, "force", False))

    series = trace_fidelity(
        cfg.spec(), delta, m=cfg.m, T=t_max, seed=seed, stride=cfg.stride,
        tri=cfg.tri, epsilon=epsilon, sigma_int=sigma, workers=cfg.threads,
    )
    budget = error_budget(series)
    meta = _config_meta(cfg)
    meta.update(
        {
            "class": cfg.klass,
            "delta": delta,
            "epsilon": epsilon,
            "sigma_int": sigma,
            "t_heis_steps": t_h,
            "m": cfg.m,
            "seed": seed,
            "stride": cfg.stride,
            "sigma_fa": budget.sigma_fa,
            "sigma_total": budget.sigma_total,
            "sigma_intrinsic": budget.sigma_intrinsic,
            "transient_cutoff": budget.transient_cutoff,
            "intrinsic_truncated": budget.intrinsic_truncated,
        }
    )
    write_table(
        cfg.out,
        {
            "t_step": series.t_steps,
            "t_heis": series.t_steps / t_h,
            "re_f": series.f.real,
            "im_f": series.f.imag,
        },
        meta,
    )
    print(
        f"fidelity: L={cfg.L} delta={delta:.6g} epsilon={epsilon if epsilon is None else round(epsilon, 6)} "
        f"m={cfg.m} T={t_max} sigma_total={budget.sigma_total:.3e} -> {cfg.out}"
    )
    return EXIT_OK


def cmd_calibrate(args) -> int:
    cfg = build_config(args)
    seed = _require_seed(cfg)
    t_max = cfg.t_max if cfg.t_max is not None else 200
    _guard_cost(cfg, 2 * t_max, getattr(args, "force", False))
    series = correlation_series(cfg.spec(), T=t_max, m=cfg.m, seed=seed, workers=cfg.threads)
    result = integrated_correlation(series, tri=cfg.tri)
    meta = _config_meta(cfg)
    meta.update(
        {
            "class": cfg.klass,
            "sigma": result.sigma,
            "sigma_at_cutoff": result.sigma_at_cutoff,
            "knee": result.knee,
            "cutoff": result.cutoff,
            "nonconvergent": result.nonconvergent,
            "m": cfg.m,
            "seed": seed,
        }
    )
    write_table(cfg.out, {"t": series.t, "c": series.c}, meta)
    flag = "  WARNING: running sum has a drifting tail (non-convergent)" if result.nonconvergent else ""
    print(f"calibrate: sigma = {result.sigma:.4f} (knee at cutoff {result.knee}, "
          f"literal value at {result.cutoff}: {result.sigma_at_cutoff:.4f}) -> {cfg.out}{flag}")
    return EXIT_OK


def _sector_phases(cfg: RunConfig, max_dim: int):
    spec = cfg.spec()
    lists = []
    for k in default_sector_list(cfg.L):
        basis = build_sector_basis(cfg.L, k)
        mat = sector_floquet_matrix(spec, basis, max_dim=max_dim)
        lists.append(eigenphases(mat, k=k, unitarity_tol=1e-9))
    return lists


def cmd_spectrum(args) -> int:
    cfg = build_config(args)
    lists = _sector_phases(cfg, getattr(args, "max_dim", 8192))
    hist = nns_density([unfolded_spacings(e) for e in lists], bins=args.bins)
    r_mean = float(np.mean([mean_spacing_ratio(e) for e in lists]))
    meta = _config_meta(cfg)
    meta.update(
        {
            "class": cfg.klass,
            "sectors": default_sector_list(cfg.L),
            "dims": [e.count for e in lists],
            "n_spacings": hist.n_spacings,
            "mean_spacing_ratio": r_mean,
        }
    )
    write_table(
        cfg.out,
        {
            "s": hist.centers,
            "density": hist.density,
            "surmise_b1": hist.surmise_b1,
            "surmise_b2": hist.surmise_b2,
        },
        meta,
    )
    if getattr(args, "mc_reference", None):
        # sampled circular-ensemble reference for the same class, matching
        # the pooled sector dimensions (the surmise columns are only the
        # small-matrix approximation)
        rng = substream(args.mc_seed, "spacing-reference", 0)
        sample = (
            spectral.sample_coe_phases if cfg.tri else spectral.sample_cue_phases
        )
        dims = [e.count for e in lists]
        pool = [
            spectral.unfolded_spacings(sample(dims[i % len(dims)], rng))
            for i in range(args.mc_samples)
        ]
        ref = spectral.nns_density(pool, bins=args.bins)
        write_table(
            args.mc_reference,
            {"s": ref.centers, "density": ref.density},
            {
                "version": f"echochain {__version__}",
                "method": "mc",
                "beta": 1 if cfg.tri else 2,
                "n_samples": args.mc_samples,
                "dims": dims,
                "seed": args.mc_seed,
            },
        )
    if getattr(args, "dump_basis", None):
        rows = []
        for k in default_sector_list(cfg.L):
            basis = build_sector_basis(cfg.L, k)
            rows.append((np.full(basis.dim, k), basis.reps, basis.periods))
        write_table(
            args.dump_basis,
            {
                "k": np.concatenate([r[0] for r in rows]),
                "representative": np.concatenate([r[1] for r in rows]),
                "orbit_size": np.concatenate([r[2] for r in rows]),
            },
            _config_meta(cfg),
        )
    print(f"spectrum: pooled {hist.n_spacings} spacings, <r> = {r_mean:.4f} -> {cfg.out}")
    return EXIT_OK


def cmd_formfactor(args) -> int:
    cfg = build_config(args)
    lists = _sector_phases(cfg, getattr(args, "max_dim", 8192))
    beta = 1 if cfg.tri else 2
    series = spectral_form_factor(lists, beta=beta, window=args.window, tau_max=args.tau_max)
    meta = _config_meta(cfg)
    meta.update(
        {
            "class": cfg.klass,
            "beta": beta,
            "window": args.window,
            "sectors": default_sector_list(cfg.L),
        }
    )
    write_table(cfg.out, {"tau": series.tau, "k": series.k, "k_ref": series.k_ref}, meta)
    print(f"formfactor: {len(series.tau)} points, window {args.window} t_H -> {cfg.out}")
    return EXIT_OK


def _t_grid(args) -> np.ndarray:
    return np.linspace(args.t_min, args.t_max_rmt, args.points)


def cmd_rmt(args) -> int:
    t = _t_grid(args)
    if args.method == "exact":
        if args.beta != 2:
            raise UsageError(
                "the closed-form curve exists for beta=2 only; use 'mc-rmt' for the "
                "orthogonal-class reference"
            )
        f = gue_exact_fidelity(args.epsilon, t, variant=args.variant)
    elif args.method == "lr":
        f = lr_fidelity(args.epsilon, args.beta, t)
    else:
        f = elr_fidelity(args.epsilon, args.beta, t)
    meta = {
        "version": f"echochain {__version__}",
        "beta": args.beta,
        "epsilon": args.epsilon,
        "method": args.method,
        "t1_branch_variant": args.variant if args.method == "exact" else None,
        "t1_branch_validation": "continuity branch validated against the MC ensemble oracle"
        if args.method == "exact"
        else None,
    }
    write_table(args.out, {"t": t, "f": f, "stderr": np.zeros_like(t)}, meta)
    print(f"rmt: beta={args.beta} epsilon={args.epsilon} method={args.method} -> {args.out}")
    return EXIT_OK


def cmd_mc_rmt(args) -> int:
    if args.seed is None:
        raise UsageError("a seed is mandatory for reproducible stochastic runs (--seed)")
    t = _t_grid(args)
    curve = mc_ensemble_fidelity(
        args.beta, args.epsilon, args.dim, args.n_real, t, seed=args.seed,
        center_fraction=args.center_fraction, workers=_resolve_threads(args.threads),
    )
    meta = {
        "version": f"echochain {__version__}",
        "beta": args.beta,
        "epsilon": args.epsilon,
        "method": "mc",
        "dim": args.dim,
        "n_real": args.n_real,
        "seed": args.seed,
        "center_fraction": args.center_fraction,
        "max_im_over_se": float(np.max(np.abs(curve.f_imag) / np.maximum(curve.stderr_imag, 1e-300))),
    }
    write_table(args.out, {"t": t, "f": curve.f, "stderr": curve.stderr}, meta)
    print(f"mc-rmt: beta={args.beta} epsilon={args.epsilon} dim={args.dim} x {args.n_real} -> {args.out}")
    return EXIT_OK


def _load_curve(path):
    meta, cols = read_table(path)
    if "re_f" in cols:  # dynamics run
        tau = cols["t_heis"]
        f = cols["re_f"]
        band = np.full_like(tau, float(meta.get("sigma_total", 0.0)))
        epsilon = meta.get("epsilon")
        beta = 1 if meta.get("class") == "tri" else 2 if meta.get("class") == "non_tri" else None
    else:
        tau = cols["t"]
        f = cols["f"]
        band = cols.get("stderr", np.zeros_like(tau))
        epsilon = meta.get("epsilon")
        beta = meta.get("beta")
    return meta, tau, f, band, epsilon, beta


def cmd_compare(args) -> int:
    meta_a, tau_a, f_a, band_a, eps_a, beta_a = _load_curve(args.data)
    meta_b, tau_b, f_b, band_b, eps_b, beta_b = _load_curve(args.reference)
    if beta_a is not None and beta_b is not None and beta_a != beta_b:
        raise UsageError(f"symmetry class mismatch: {beta_a} vs {beta_b}")
    if eps_a is not None and eps_b is not None and not np.isclose(eps_a, eps_b, rtol=1e-6):
        raise UsageError(f"epsilon mismatch: {eps_a} vs {eps_b}")
    lo = max(tau_a.min(), tau_b.min())
    hi = min(tau_a.max(), tau_b.max())
    sel = (tau_a >= lo) & (tau_a <= hi)
    if not np.any(sel):
        raise UsageError("curves do not overlap in time")
    tau = tau_a[sel]
    ref = np.interp(tau, tau_b, f_b)
    ref_band = np.interp(tau, tau_b, band_b)
    band = np.sqrt(band_a[sel] ** 2 + ref_band**2)
    resid = f_a[sel] - ref
    with np.errstate(divide="ignore", invalid="ignore"):
        pulls = np.where(band > 0, resid / np.where(band > 0, band, 1.0), np.where(resid == 0, 0.0, np.inf))
    frac = float(np.mean(np.abs(pulls) <= 3.0))
    late = tau >= 0.5 * (lo + hi)
    late_bias = float(np.mean(resid[late])) if np.any(late) else 0.0
    n_eff = max(int(late.sum()), 1)
    band_late = float(np.mean(band[late])) if np.any(late) else 0.0
    systematic = band_late == 0.0 and late_bias != 0.0 or (
        band_late > 0 and abs(late_bias) > 3.0 * band_late / np.sqrt(n_eff)
    )
    direction = "below" if late_bias < 0 else "above"
    print(f"compare: {len(tau)} aligned points on t/t_H in [{lo:.3g}, {hi:.3g}]")
    print(f"  within 3 sigma bands: {100 * frac:.2f}%")
    print(f"  max |residual|: {np.max(np.abs(resid)):.3e}   mean late-time residual: {late_bias:+.3e}")
    if systematic:
        print(f"  systematic deviation: data {direction} reference at late times")
    if args.out:
        write_table(
            args.out,
            {"t_heis": tau, "f_data": f_a[sel], "f_ref": ref, "residual": resid, "band": band},
            {
                "version": f"echochain {__version__}",
                "data": str(args.data),
                "reference": str(args.reference),
                "frac_within_3sigma": frac,
                "systematic": bool(systematic),
            },
        )
    return EXIT_OK


def _add_config_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="JSON config file; flags override its fields")
    p.add_argument("--preset", choices=["goe", "gue"], help="chaotic parameter preset")
    p.add_argument("-L", type=int, dest="L", help="number of spin-1/2 sites")
    p.add_argument("-J", type=float, dest="J", help="Ising coupling")
    p.add_argument("--kicks", type=json.loads, help='kick list as JSON, e.g. "[[1.4,0,1.4]]"')
    p.add_argument("--class", dest="klass", choices=["tri", "non_tri"], help="symmetry class")
    p.add_argument("--m", type=int, help="number of probe states")
    p.add_argument("--t-max", type=int, dest="t_max", help="number of driving periods")
    p.add_argument("--stride", type=int, help="record every stride-th step")
    p.add_argument("--seed", type=int, help="master seed for all RNG substreams")
    p.add_argument("--out", help="output CSV path")
    p.add_argument("--threads", type=int, help="worker threads (or ECHOCHAIN_THREADS)")
    p.add_argument("--force", action="store_true", help="override the run-cost guard")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="echochain",
        description="Fidelity decay in multiply kicked Ising chains with RMT reference curves.",
    )
    ap.add_argument("--version", action="version", version=f"echochain {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("fidelity", help="trace-estimated fidelity amplitude time series")
    _add_config_flags(p)
    p.add_argument("--delta", type=float, help="kick angle of the perturbation")
    p.add_argument("--epsilon", type=float, help="RMT perturbation strength (resolved via sigma)")
    p.add_argument("--sigma-int", type=float, dest="sigma_int", help="integrated correlation; calibrated if absent")
    p.set_defaults(fn=cmd_fidelity)

    p = sub.add_parser("calibrate", help="correlation function and integrated sigma")
    _add_config_flags(p)
    p.set_defaults(fn=cmd_calibrate)

    p = sub.add_parser("spectrum", help="sector eigenphases and spacing statistics")
    _add_config_flags(p)
    p.add_argument("--bins", type=int, default=50)
    p.add_argument("--max-dim", type=int, dest="max_dim", default=8192, help="dense sector-size guard")
    p.add_argument("--dump-basis", dest="dump_basis", help="also write (k, representative, orbit size) CSV")
    p.add_argument("--mc-reference", dest="mc_reference",
                   help="also write a sampled circular-ensemble spacing density CSV")
    p.add_argument("--mc-samples", dest="mc_samples", type=int, default=40)
    p.add_argument("--mc-seed", dest="mc_seed", type=int, default=2024)
    p.set_defaults(fn=cmd_spectrum)

    p = sub.add_parser("formfactor", help="sector-averaged smoothed spectral form factor")
    _add_config_flags(p)
    p.add_argument("--window", type=float, default=0.15, help="smoothing window in units of t_H")
    p.add_argument("--tau-max", type=float, dest="tau_max", default=2.0)
    p.add_argument("--max-dim", type=int, dest="max_dim", default=8192)
    p.set_defaults(fn=cmd_formfactor)

    p = sub.add_parser("rmt", help="closed-form RMT reference curve")
    p.add_argument("--beta", type=int, choices=[1, 2], required=True)
    p.add_argument("--epsilon", type=float, required=True)
    p.add_argument("--method", choices=["exact", "lr", "elr"], default="exact")
    p.add_argument("--variant", choices=["continuity", "printed"], default=GUE_T1_DEFAULT_VARIANT,
                   help="t>1 branch of the exact curve (continuity is oracle-validated)")
    p.add_argument("--t-min", type=float, dest="t_min", default=0.0)
    p.add_argument("--t-max", type=float, dest="t_max_rmt", default=2.0)
    p.add_argument("--points", type=int, default=201)
    p.add_argument("--out", required=True)
    p.set_defaults(fn=cmd_rmt)

    p = sub.add_parser("mc-rmt", help="Monte Carlo ensemble fidelity (oracle / beta=1 reference)")
    p.add_argument("--beta", type=int, choices=[1, 2], required=True)
    p.add_argument("--epsilon", type=float, required=True)
    p.add_argument("--dim", type=int, default=200)
    p.add_argument("--n-real", type=int, dest="n_real", default=500)
    p.add_argument("--center-fraction", type=float, dest="center_fraction", default=0.25)
    p.add_argument("--seed", type=int)
    p.add_argument("--threads", type=int)
    p.add_argument("--t-min", type=float, dest="t_min", default=0.05)
    p.add_argument("--t-max", type=float, dest="t_max_rmt", default=2.0)
    p.add_argument("--points", type=int, default=80)
    p.add_argument("--out", required=True)
    p.set_defaults(fn=cmd_mc_rmt)

    p = sub.add_parser("compare", help="align a run with a reference curve and report residuals")
    p.add_argument("data", help="fidelity CSV (or any curve file)")
    p.add_argument("reference", help="reference curve CSV")
    p.add_argument("--out", help="optional per-point residual CSV")
    p.set_defaults(fn=cmd_compare)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        return args.fn(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ValueError, FileNotFoundError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ResourceLimitError as exc:
        print(f"resource guard: {exc}", file=sys.stderr)
        return EXIT_RESOURCE
    except NumericError as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
