"""Command-line interface.

Commands: simulate, detect, profile, heatmap, tune, experiment.
Exit codes: 0 success, 2 input error, 3 budget refusal.
"""

from __future__ import annotations

import argparse
import math
import os
import sys

import numpy as np

from . import __version__
from .config import AUTO, RunConfig, build_run_config, parse_config_file, parse_signal_config
from .dataio import (
    dump_json,
    read_csv,
    write_columns_csv,
    write_matrix_csv,
    write_rows_csv,
    write_series_csv,
)
from .errors import BudgetExceededError, InputError, InvalidSpecError
from .experiments import DEFAULT_BUDGET, resolve_preset, run_experiment
from .pipeline import PipelineResult, Stage1Config, Stage2Config, run_pipeline
from .signals import eval_mean, simulate_noise
from .spectral import build_grid, cusum_field, local_contrast_profile, progressive_profile
from .tuning import grid_subset, mv_select_m_prime, mv_select_m_tilde, mv_select_stage1_m


def _hz(omega: float, rate: float) -> float:
    return omega * rate / (2 * math.pi)


def results_to_json(result: PipelineResult, n: int, grid, seed: int,
                    rate_hz: float | None) -> dict:
    """Stable-order JSON document for a pipeline run."""
    stage1_iters = []
    for it in result.stage1.iterations:
        stage1_iters.append({
            "k": it.k, "F": it.stat, "crit": it.crit,
            "omega_hat": it.omega_hat,
            "excluded": list(it.excluded) if it.excluded else None,
        })
    stage1 = {
        "iterations": stage1_iters,
        "omega_hat_set": list(result.stage1.omega_hat_set),
        "status": result.stage1.status,
    }
    if rate_hz is not None:
        stage1["omega_hat_hz"] = [_hz(w, rate_hz) for w in result.stage1.omega_hat_set]
    stage2 = []
    for s2 in result.stage2:
        entry = {
            "omega": s2.omega,
            "iterations": [{"k": it.k, "T": it.stat, "crit": it.crit,
                            "b_hat": it.b_hat} for it in s2.iterations],
            "change_points": list(s2.change_points),
            "status": s2.status,
        }
        if rate_hz is not None:
            entry["omega_hz"] = _hz(s2.omega, rate_hz)
        stage2.append(entry)
    return {
        "n": n,
        "seed": seed,
        "sampling_rate_hz": rate_hz,
        "grid": {"delta0": grid.delta0, "mesh": grid.mesh, "p": grid.p,
                 "factor": grid.factor},
        "tuning": {"m": result.tuning.m, "m_tilde": result.tuning.m_tilde,
                   "m_prime": result.tuning.m_prime,
                   "source": result.tuning.source},
        "stage1": stage1,
        "stage2": stage2,
    }


def _load_config(args, overrides: dict) -> RunConfig:
    file_values = parse_config_file(args.config) if args.config else {}
    return build_run_config(file_values, overrides)


def _config_overrides(args) -> dict:
    keys = ("alpha", "beta", "m", "m_tilde", "m_prime", "K", "K0", "delta0",
            "grid_factor", "seed", "sampling_rate_hz", "workers")
    out = {}
    for key in keys:
        v = getattr(args, key, None)
        if v is not None:
            out[key] = v
    return out


def cmd_simulate(args) -> int:
    raw = parse_config_file(args.config)
    if args.n is not None:
        raw["n"] = str(args.n)
    if args.seed is not None:
        raw["seed"] = str(args.seed)
    if args.noise is not None:
        raw["noise"] = args.noise
    mean, noise, n, seed = parse_signal_config(raw)
    x = eval_mean(mean, n)
    if noise is not None:
        x = x + simulate_noise(noise, n, seed, burn_in=int(raw.get("burn_in", "200")))
    write_series_csv(args.out, x)
    print(f"wrote {n} samples to {args.out}")
    return 0


def _run_detect(args):
    cfg = _load_config(args, _config_overrides(args))
    x = read_csv(args.input)
    grid = build_grid(x.size, cfg.delta0, cfg.grid_factor)
    cfg1 = Stage1Config(m=cfg.bandwidth("m"), K=cfg.K, alpha=cfg.alpha,
                        grid=grid, seed=cfg.seed)
    cfg2 = Stage2Config(m_tilde=cfg.bandwidth("m_tilde"),
                        m_prime=cfg.bandwidth("m_prime"),
                        K0=cfg.K0, beta=cfg.beta, seed=cfg.seed + 1000003)
    result = run_pipeline(x, cfg1, cfg2, workers=cfg.workers)
    return cfg, x, grid, result


def cmd_detect(args) -> int:
    cfg, x, grid, result = _run_detect(args)
    doc = results_to_json(result, x.size, grid, cfg.seed, cfg.sampling_rate_hz)
    text = dump_json(doc, args.out)
    if args.out:
        print(f"wrote {args.out}")
    else:
        sys.stdout.write(text)
    return 0


def cmd_profile(args) -> int:
    cfg = _load_config(args, _config_overrides(args))
    x = read_csv(args.input)
    grid = build_grid(x.size, cfg.delta0, cfg.grid_factor)
    prof = progressive_profile(x, grid)
    if cfg.sampling_rate_hz is not None:
        hz = [_hz(w, cfg.sampling_rate_hz) for w in grid.freqs]
        write_columns_csv(args.out, ["omega", "hz", "fbar"],
                          [grid.freqs, hz, prof.values])
    else:
        write_columns_csv(args.out, ["omega", "fbar"], [grid.freqs, prof.values])
    print(f"wrote {args.out}")
    if args.omega is not None:
        mt = cfg.bandwidth("m_tilde") or mv_select_m_tilde(x, args.omega).chosen
        mp_ = cfg.bandwidth("m_prime") or mv_select_m_prime(x, args.omega, mt).chosen
        idx = np.arange(mt + mp_ + 1, x.size - mt - mp_ - 1)
        t = local_contrast_profile(x, args.omega, mt, idx)
        write_columns_csv(args.t_out, ["i", "t_stat"], [idx, t])
        print(f"wrote {args.t_out}")
    return 0


def cmd_heatmap(args) -> int:
    x = read_csv(args.input)
    if not (0 <= args.freq_lo < args.freq_hi <= math.pi):
        raise InputError("need 0 <= freq-lo < freq-hi <= pi")
    freqs = np.linspace(args.freq_lo, args.freq_hi, args.freq_count)
    field = cusum_field(x, freqs, stride=args.stride)
    write_matrix_csv(args.out, "i", field.indices, field.freqs, field.values)
    print(f"wrote {args.out}")
    return 0


def cmd_tune(args) -> int:
    cfg = _load_config(args, _config_overrides(args))
    x = read_csv(args.input)
    if args.param == "m":
        grid = build_grid(x.size, cfg.delta0, cfg.grid_factor)
        curve = mv_select_stage1_m(x, grid_subset(grid))
    elif args.param == "mtilde":
        if args.omega is None:
            raise InputError("tune --param mtilde needs --omega")
        curve = mv_select_m_tilde(x, args.omega)
    else:
        if args.omega is None:
            raise InputError("tune --param mprime needs --omega")
        mt = cfg.bandwidth("m_tilde") or mv_select_m_tilde(x, args.omega).chosen
        curve = mv_select_m_prime(x, args.omega, mt)
    chosen_flags = [int(c == curve.chosen) for c in curve.candidates]
    write_columns_csv(args.out, ["candidate", "volatility", "chosen"],
                      [np.array(curve.candidates), np.array(curve.volatility),
                       np.array(chosen_flags)])
    print(f"wrote {args.out} (chosen {args.param} = {curve.chosen})")
    return 0


def cmd_experiment(args) -> int:
    overrides = {k: getattr(args, k) for k in
                 ("model", "n", "reps", "alpha", "beta", "K", "K0",
                  "grid_factor", "delta0", "seed", "m", "m_tilde", "m_prime",
                  "workers") if getattr(args, k, None) is not None}
    if args.amplitudes:
        overrides["amplitudes"] = tuple(float(a) for a in args.amplitudes.split(","))
    spec = resolve_preset(args.preset, overrides)
    result = run_experiment(spec, budget=args.budget, force=args.force)
    os.makedirs(args.out_dir, exist_ok=True)
    table = os.path.join(args.out_dir, "table.csv")
    summary = os.path.join(args.out_dir, "summary.json")
    header = list(result.records[0].keys())
    write_rows_csv(table, header, result.records)
    dump_json(result.summary, summary)
    print(f"wrote {table} and {summary} ({result.wall_time_s:.1f}s)")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="oscdetect",
        description="Detect oscillatory frequencies and their change points "
                    "in noisy non-stationary series.")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def add_config_flags(p, stage2=True):
        p.add_argument("--config", help="flat key=value config file")
        p.add_argument("--alpha", type=float)
        p.add_argument("--K", type=int)
        p.add_argument("--delta0", type=float)
        p.add_argument("--grid-factor", dest="grid_factor", type=float)
        p.add_argument("--seed", type=int)
        p.add_argument("--m", help="stage-1 block width or 'auto'")
        p.add_argument("--workers", type=int)
        p.add_argument("--sampling-rate-hz", dest="sampling_rate_hz", type=float)
        if stage2:
            p.add_argument("--beta", type=float)
            p.add_argument("--K0", type=int)
            p.add_argument("--m-tilde", dest="m_tilde",
                           help="stage-2 window or 'auto'")
            p.add_argument("--m-prime", dest="m_prime",
                           help="stage-2 block width or 'auto'")

    p = sub.add_parser("simulate", help="write a simulated series to CSV")
    p.add_argument("--config", required=True, help="signal description file")
    p.add_argument("--out", default="simulated.csv")
    p.add_argument("--n", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--noise", help="M1..M4, custom, or none")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("detect", help="run the two-stage detection pipeline")
    p.add_argument("input", help="single-column CSV series")
    p.add_argument("--out", help="results JSON path (default: stdout)")
    add_config_flags(p)
    p.set_defaults(func=cmd_detect)

    p = sub.add_parser("profile", help="emit the frequency profile (and, "
                                       "given --omega, the local contrast profile)")
    p.add_argument("input")
    p.add_argument("--out", default="profile.csv")
    p.add_argument("--omega", type=float, help="frequency for the time profile")
    p.add_argument("--t-out", dest="t_out", default="t_profile.csv")
    add_config_flags(p)
    p.set_defaults(func=cmd_profile)

    p = sub.add_parser("heatmap", help="CUSUM field matrix over a frequency band")
    p.add_argument("input")
    p.add_argument("--freq-lo", dest="freq_lo", type=float, required=True)
    p.add_argument("--freq-hi", dest="freq_hi", type=float, required=True)
    p.add_argument("--freq-count", dest="freq_count", type=int, default=200)
    p.add_argument("--stride", type=int, default=1)
    p.add_argument("--out", default="heatmap.csv")
    p.set_defaults(func=cmd_heatmap)

    p = sub.add_parser("tune", help="minimum-volatility bandwidth scan")
    p.add_argument("input")
    p.add_argument("--param", choices=("m", "mtilde", "mprime"), required=True)
    p.add_argument("--omega", type=float)
    p.add_argument("--out", default="tuning.csv")
    add_config_flags(p)
    p.set_defaults(func=cmd_tune)

    p = sub.add_parser("experiment", help="run a Monte-Carlo experiment preset")
    p.add_argument("preset", help="desk/<name>, paper/<name>, or a bare "
                                  "experiment name")
    p.add_argument("--out-dir", dest="out_dir", default=".")
    p.add_argument("--model")
    p.add_argument("--n", type=int)
    p.add_argument("--reps", type=int)
    p.add_argument("--alpha", type=float)
    p.add_argument("--beta", type=float)
    p.add_argument("--K", type=int)
    p.add_argument("--K0", type=int)
    p.add_argument("--grid-factor", dest="grid_factor", type=float)
    p.add_argument("--delta0", type=float)
    p.add_argument("--seed", type=int)
    p.add_argument("--m", type=int)
    p.add_argument("--m-tilde", dest="m_tilde", type=int)
    p.add_argument("--m-prime", dest="m_prime", type=int)
    p.add_argument("--amplitudes", help="comma-separated list for power_curve")
    p.add_argument("--workers", type=int)
    p.add_argument("--budget", type=float, default=DEFAULT_BUDGET,
                   help="work budget in block-multiply units")
    p.add_argument("--force", action="store_true",
                   help="run even when the estimate exceeds the budget")
    p.set_defaults(func=cmd_experiment)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "m", None) is not None and args.command in ("detect", "profile", "tune"):
        if args.m != AUTO:
            try:
                args.m = int(args.m)
            except ValueError:
                parser.error(f"--m must be an integer or 'auto', got {args.m!r}")
    for name in ("m_tilde", "m_prime"):
        v = getattr(args, name, None)
        if isinstance(v, str) and v != AUTO and args.command in ("detect", "profile", "tune"):
            try:
                setattr(args, name, int(v))
            except ValueError:
                parser.error(f"--{name.replace('_', '-')} must be an integer or 'auto'")
    try:
        return args.func(args)
    except BudgetExceededError as exc:
        print(f"refused: {exc}", file=sys.stderr)
        return 3
    except (InputError, InvalidSpecError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
