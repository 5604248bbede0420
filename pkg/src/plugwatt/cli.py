"""Operator command line driving every pipeline stage.

Exit codes: 0 success, 2 validation failure, 1 internal error, 64 usage.
Outputs are machine-readable JSON/CSV plus a short human summary; every
artifact derived from a dataset directory carries the manifest hash.
"""
from __future__ import annotations

import argparse
import csv
import json
import sys
import traceback
from dataclasses import replace
from datetime import date, timedelta
from pathlib import Path

import numpy as np

from . import arx as arx_mod
from . import inference
from .aggregation import Aggregator, export_aggregates
from .core import PhaseKind, Site
from .demand import (
    CHAPTER_COEFFS,
    DEFAULT_OFFICE_PROFILE,
    EpochInput,
    ReductionCoefficients,
    ingest_profile,
    policy_rollout,
)
from .storage import DatasetFormatError, load_dataset, manifest_sha256, save_dataset
from .synthetic import SynthConfig, generate_synthetic


class CliError(Exception):
    def __init__(self, message: str, code: int = 1):
        super().__init__(message)
        self.code = code


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):  # exit 64 on usage problems
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(64)


def _site(arg: str) -> Site:
    try:
        return Site(arg.upper())
    except ValueError:
        raise CliError(f"unknown site {arg!r}; expected one of "
                       f"{', '.join(s.value for s in Site)}", 64)


def _load(data_dir: str):
    try:
        return load_dataset(data_dir)
    except DatasetFormatError as exc:
        raise CliError(f"dataset problem: {exc}", 2)


def _read_config_file(path: str) -> dict[str, str]:
    out: dict[str, str] = {}
    for i, line in enumerate(Path(path).read_text().splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        if "=" not in stripped:
            raise CliError(f"{path}:{i}: expected key=value", 64)
        key, _, value = stripped.partition("=")
        out[key.strip()] = value.strip().strip('"')
    return out


def _write_json(path: Path, payload: dict) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(payload, sort_keys=True, indent=2) + "\n")


def _write_csv(path: Path, rows: list[list]) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        csv.writer(fh).writerows(rows)


# --------------------------------------------------------------------------
# Subcommands


def cmd_synth(args) -> int:
    config = SynthConfig(site=_site(args.site), seed=args.seed,
                         n_participants=args.participants,
                         n_sockets=args.sockets, cadence_s=args.cadence)
    if args.config:
        overrides = _read_config_file(args.config)
        fields = {f: type(getattr(config, f)) for f in (
            "floor_w", "active_w", "work_start_s", "work_end_s",
            "sessions_per_workday", "session_mean_s", "sample_noise_w",
            "day_noise_frac", "weekday_spread", "participant_spread", "tz")}
        kwargs = {}
        for key, raw in overrides.items():
            if key not in fields:
                raise CliError(f"unknown config key {key!r}", 64)
            kwargs[key] = fields[key](raw)
        config = replace(config, **kwargs)
    dataset, truth = generate_synthetic(config)
    extra = {
        "generator": "two-state-v1",
        "seed": config.seed,
        "site": config.site.value,
        "cadence_s": config.cadence_s,
        "true_reduction_by_kind": {k.value: r for k, r in truth.reduction_by_kind},
    }
    out = save_dataset(dataset, args.out, manifest_extra=extra)
    print(f"wrote dataset to {out}")
    print(f"  participants: {len(dataset.readings.participants())}")
    print(f"  readings:     {dataset.readings.n_rows}")
    print(f"  phases:       {', '.join(p.label for p in dataset.calendar.phases)}")
    return 0


def cmd_validate(args) -> int:
    try:
        dataset = load_dataset(args.data, validate=False)
    except DatasetFormatError as exc:
        print(f"dataset malformed: {exc}")
        return 2
    report = dataset.validate()
    for line in report.lines():
        print(line)
    return 0 if report.accepted else 2


def _resolve_phase(dataset, site: Site, spec: str):
    calendar = dataset.calendar
    for phase in calendar.site_phases(site):
        if phase.label.lower() == spec.lower():
            return phase
    kind_matches = [p for p in calendar.site_phases(site)
                    if p.kind is not PhaseKind.BASELINE
                    and p.kind.value.lower() == spec.lower()
                    or (spec.lower() == "feedback+incentive"
                        and p.kind is PhaseKind.FEEDBACK_AND_INCENTIVE)]
    if len(kind_matches) == 1:
        return kind_matches[0]
    if len(kind_matches) > 1:
        raise CliError(f"phase {spec!r} is ambiguous; use a label: "
                       f"{', '.join(p.label for p in kind_matches)}", 64)
    raise CliError(f"no phase {spec!r} at {site.value}; have "
                   f"{', '.join(p.label for p in calendar.site_phases(site))}", 64)


def cmd_analyze(args) -> int:
    dataset = _load(args.data)
    site = _site(args.site)
    phase = _resolve_phase(dataset, site, args.phase)
    agg = Aggregator(dataset)
    sample = inference.build_differential_sample(agg, site, phase)
    result = inference.paired_t_test(sample)
    out_dir = Path(args.out or (Path(args.data) / "analysis"))

    payload = result.as_dict()
    payload.update({"site": site.value, "phase": phase.label,
                    "manifest_sha256": manifest_sha256(args.data)})
    _write_json(out_dir / "results.json", payload)

    consistency = [row.as_dict() for row in inference.paper_consistency_report()]
    _write_json(out_dir / "paper_consistency.json", {"rows": consistency})

    agg_rows = [["participant_id", "phase", "day", "kind", "watts"]]
    agg_rows += [[pid, label, d.isoformat(), kind, repr(w)]
                 for pid, label, d, kind, w in export_aggregates(agg, site)]
    _write_csv(out_dir / "aggregates.csv", agg_rows)

    print(f"{site.value} {phase.label}: n={result.n} mean_diff={result.mean_diff_watts:.3f} W "
          f"t({result.df})={result.t_stat:.3f} p={result.p_two_tailed:.4g}")
    print(f"  95% CI [{result.ci95_watts[0]:.3f}, {result.ci95_watts[1]:.3f}] W "
          f"= [{result.ci95_pct[0]:.2f}, {result.ci95_pct[1]:.2f}]%")
    print(f"  mean reduction {result.mean_reduction_pct:.2f}% of "
          f"{result.baseline_pool_mean_watts:.2f} W baseline")
    worst = max(r["delta_ci_w"] for r in consistency)
    print(f"  published-results consistency: {len(consistency)} phases, "
          f"max CI delta {worst:.4f} W (see paper_consistency.json)")
    print(f"wrote {out_dir}/results.json")
    return 0


def _experiment_phases(dataset, site: Site):
    return [p for p in dataset.calendar.site_phases(site)
            if p.kind is not PhaseKind.BASELINE]


def cmd_fit_arx(args) -> int:
    dataset = _load(args.data)
    site = _site(args.site)
    phases = _experiment_phases(dataset, site)
    if not phases:
        raise CliError(f"{site.value} has no experiment phases", 2)
    use_incentive = any(p.kind.has_incentive for p in phases)
    spec = arx_mod.ArxSpec(n_lags=1, use_screentime=True,
                           use_incentive=use_incentive,
                           incentive_timing=args.incentive_timing)
    agg = Aggregator(dataset)
    ds = arx_mod.build_arx_dataset(agg, site, phases, spec)
    train, test = arx_mod.split_train_test(ds)
    coeffs = arx_mod.fit_ols(train)
    ev = arx_mod.evaluate(coeffs, test)
    profile = arx_mod.residual_lag_profile(train, max_lags=args.max_lags)

    out_dir = Path(args.out or (Path(args.data) / "arx"))
    model = {
        "site": site.value,
        "spec": {"n_lags": spec.n_lags, "use_screentime": spec.use_screentime,
                 "use_incentive": spec.use_incentive,
                 "incentive_timing": spec.incentive_timing},
        "alpha": coeffs.alpha,
        "beta": list(coeffs.beta),
        "gamma": coeffs.gamma,
        "delta": coeffs.delta,
        "sigma_eps": coeffs.sigma_eps,
        "standard_errors": list(coeffs.standard_errors),
        "train_rows": len(train.rows),
        "test_rows": len(test.rows),
        "rmse": ev.rmse_w,
        "accuracy": ev.rms_accuracy_pct,
        "mean_interval95_w": list(ev.mean_interval95_w),
        "manifest_sha256": manifest_sha256(args.data),
    }
    _write_json(out_dir / "model.json", model)
    diag = [["n_lags", "lag1_autocorr", "rmse"]]
    diag += [[e.n_lags, repr(e.lag1_autocorr), repr(e.rmse_w)] for e in profile]
    _write_csv(out_dir / "diagnostics.csv", diag)

    beta_txt = ", ".join(f"{b:.4f}" for b in coeffs.beta)
    print(f"{site.value} ARX({spec.n_lags}): alpha={coeffs.alpha:.4f} "
          f"beta=[{beta_txt}] gamma={coeffs.gamma:.6f}"
          + (f" delta={coeffs.delta:.4f}" if coeffs.delta is not None else "")
          + f" sigma={coeffs.sigma_eps:.4f}")
    print(f"  train {len(train.rows)} rows / test {len(test.rows)} rows; "
          f"test RMSE {ev.rmse_w:.3f} W, accuracy {ev.rms_accuracy_pct:.2f}%")
    print(f"wrote {out_dir}/model.json and diagnostics.csv")
    return 0


def _load_incentive_file(path: str) -> dict[date, float]:
    out: dict[date, float] = {}
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if not reader.fieldnames or "date" not in reader.fieldnames \
                or "amount_usd" not in reader.fieldnames:
            raise CliError(f"{path}: need columns date, amount_usd", 64)
        for row in reader:
            out[date.fromisoformat(row["date"])] = float(row["amount_usd"])
    return out


def cmd_simulate_demand(args) -> int:
    if args.horizon < 1:
        raise CliError("--horizon must be >= 1", 64)
    if args.coeffs:
        raw = json.loads(Path(args.coeffs).read_text())
        coeffs = ReductionCoefficients(
            alpha_l=float(raw["alpha_l"]), beta_l=float(raw["beta_l"]),
            gamma_l=float(raw["gamma_l"]), delta_l=float(raw["delta_l"]),
            sigma_xi=float(raw["sigma_xi"]))
    else:
        coeffs = CHAPTER_COEFFS
    if args.profile:
        with open(args.profile, newline="") as fh:
            reader = csv.DictReader(fh)
            if not reader.fieldnames or "timestamp_utc" not in reader.fieldnames \
                    or "kw" not in reader.fieldnames:
                raise CliError(f"{args.profile}: need columns timestamp_utc, kw", 64)
            profile = ingest_profile((row["timestamp_utc"], float(row["kw"]))
                                     for row in reader)
    else:
        profile = DEFAULT_OFFICE_PROFILE

    schedule = _load_incentive_file(args.incentives) if args.incentives else {}
    start_day = (min(schedule) if schedule else date(2016, 10, 18))
    inputs = []
    for k in range(args.horizon):
        day = start_day + timedelta(days=k // 24)
        inputs.append(EpochInput(screentime_prev_s=args.screentime_s,
                                 incentive_usd=schedule.get(day, 0.0)))

    summary = policy_rollout(profile, coeffs, inputs,
                             n_monte_carlo=args.mc, seed=args.seed, f_p=args.fp)
    payload = summary.to_json_dict()
    payload["profile_mean_kw"] = list(profile.mean_kw)
    out = Path(args.out or "rollout.json")
    _write_json(out, payload)
    print(f"simulated {args.horizon} h x {args.mc} draws (seed {args.seed}, "
          f"f_p {args.fp})")
    print(f"  daily energy {summary.daily_kwh_mean:.1f} kWh "
          f"[{summary.daily_kwh_p5:.1f}, {summary.daily_kwh_p95:.1f}]")
    print(f"  peak {summary.peak_kw_mean:.1f} kW "
          f"[{summary.peak_kw_p5:.1f}, {summary.peak_kw_p95:.1f}]")
    print(f"wrote {out}")
    return 0


def cmd_serve(args) -> int:
    from .service import serve

    serve(args.data, args.bind)
    return 0


def cmd_export_plots(args) -> int:
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    dataset = _load(args.data)
    site = _site(args.site)
    agg = Aggregator(dataset)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)

    phases = dataset.calendar.site_phases(site)
    summaries = []
    daily_by_phase = {}
    for phase in phases:
        try:
            summaries.append(inference.summarize_phase(agg, site, phase))
        except ValueError:
            continue
        daily_by_phase[phase.label] = [
            dm.mean_watts * 24.0 / 1000.0 for dm in agg.phase_daily_means(phase)]
    rows = [["phase", "n_days", "min_kwh", "q1_kwh", "median_kwh", "q3_kwh",
             "max_kwh", "mean_kwh"]]
    rows += [[s.phase_label, s.n_days, repr(s.min_kwh), repr(s.q1_kwh),
              repr(s.median_kwh), repr(s.q3_kwh), repr(s.max_kwh),
              repr(s.mean_kwh)] for s in summaries]
    _write_csv(out_dir / "phase_summaries.csv", rows)
    if daily_by_phase:
        fig, ax = plt.subplots(figsize=(7, 4))
        ax.boxplot(list(daily_by_phase.values()),
                   tick_labels=list(daily_by_phase.keys()))
        ax.set_ylabel("daily energy (kWh)")
        ax.set_title(f"{site.value} phase consumption")
        fig.tight_layout()
        fig.savefig(out_dir / "phase_box_summaries.png", dpi=120)
        plt.close(fig)

    expt = _experiment_phases(dataset, site)
    if expt:
        use_incentive = any(p.kind.has_incentive for p in expt)
        spec = arx_mod.ArxSpec(use_incentive=use_incentive)
        ds = arx_mod.build_arx_dataset(agg, site, expt, spec)
        train, test = arx_mod.split_train_test(ds)
        coeffs = arx_mod.fit_ols(train)
        profile = arx_mod.residual_lag_profile(train, max_lags=6)
        rows = [["n_lags", "lag1_autocorr", "rmse"]]
        rows += [[e.n_lags, repr(e.lag1_autocorr), repr(e.rmse_w)] for e in profile]
        _write_csv(out_dir / "residual_lag_profile.csv", rows)
        fig, ax = plt.subplots(figsize=(6, 4))
        ax.plot([e.n_lags for e in profile], [e.lag1_autocorr for e in profile],
                marker="o")
        ax.axhline(0.0, color="gray", lw=0.8)
        ax.set_xlabel("lagged dependents")
        ax.set_ylabel("lag-1 residual autocorrelation")
        fig.tight_layout()
        fig.savefig(out_dir / "residual_lag_profile.png", dpi=120)
        plt.close(fig)

        preds = [arx_mod.predict(coeffs, r.lags_w, r.screentime_prev_s,
                                 r.incentive_usd) for r in test.rows]
        rows = [["day", "hour", "observed_w", "predicted_w", "lo95_w", "hi95_w"]]
        rows += [[r.day.isoformat(), r.hour, repr(r.target_w), repr(p[0]),
                  repr(p[1][0]), repr(p[1][1])]
                 for r, p in zip(test.rows, preds)]
        _write_csv(out_dir / "prediction_vs_observed.csv", rows)
        fig, ax = plt.subplots(figsize=(8, 4))
        xs = np.arange(len(test.rows))
        obs = [r.target_w for r in test.rows]
        pts = [p[0] for p in preds]
        los = [p[1][0] for p in preds]
        his = [p[1][1] for p in preds]
        ax.fill_between(xs, los, his, alpha=0.25, label="95% interval")
        ax.plot(xs, obs, lw=0.9, label="observed")
        ax.plot(xs, pts, lw=0.9, label="predicted")
        ax.set_xlabel("test hour")
        ax.set_ylabel("differential (W)")
        ax.legend()
        fig.tight_layout()
        fig.savefig(out_dir / "prediction_vs_observed.png", dpi=120)
        plt.close(fig)

    print(f"wrote plots and plot data to {out_dir}")
    return 0


# --------------------------------------------------------------------------


def build_parser() -> _Parser:
    parser = _Parser(prog="plugwatt",
                     description="plugload demand-response pipeline")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="generate a synthetic dataset directory")
    p.add_argument("--out", required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--site", default="CMU")
    p.add_argument("--participants", type=int, default=16)
    p.add_argument("--sockets", type=int, default=2)
    p.add_argument("--cadence", type=int, default=60)
    p.add_argument("--config", help="key=value overrides, one per line")
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("validate", help="check dataset invariants")
    p.add_argument("--data", required=True)
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("analyze", help="matched-pairs phase analysis")
    p.add_argument("--data", required=True)
    p.add_argument("--site", required=True)
    p.add_argument("--phase", required=True,
                   help="phase label (P3C) or kind (feedback)")
    p.add_argument("--out")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("fit-arx", help="fit the hourly differential model")
    p.add_argument("--data", required=True)
    p.add_argument("--site", required=True)
    p.add_argument("--max-lags", type=int, default=6)
    p.add_argument("--incentive-timing", choices=["h", "h-1"], default="h")
    p.add_argument("--out")
    p.set_defaults(func=cmd_fit_arx)

    p = sub.add_parser("simulate-demand", help="Monte Carlo demand rollout")
    p.add_argument("--fp", type=float, default=0.5)
    p.add_argument("--horizon", type=int, default=168)
    p.add_argument("--incentives", help="CSV with date, amount_usd")
    p.add_argument("--screentime-s", type=float, default=0.0,
                   help="constant screentime seconds per hour")
    p.add_argument("--mc", type=int, default=200)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--profile", help="CSV with timestamp_utc, kw")
    p.add_argument("--coeffs", help="JSON file with reduction coefficients")
    p.add_argument("--out")
    p.set_defaults(func=cmd_simulate_demand)

    p = sub.add_parser("serve", help="run the HTTP service")
    p.add_argument("--data")
    p.add_argument("--bind", help="host:port")
    p.set_defaults(func=cmd_serve)

    p = sub.add_parser("export-plots", help="figures and their data CSVs")
    p.add_argument("--data", required=True)
    p.add_argument("--site", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_export_plots)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code
    except DatasetFormatError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except Exception:
        traceback.print_exc()
        return 1


if __name__ == "__main__":
    sys.exit(main())
