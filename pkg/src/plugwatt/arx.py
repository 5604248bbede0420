"""ARX modeling of the pool-mean hourly consumption differential.

The target series is (weekday-matched baseline pool mean) minus (experiment
pool mean) per hour.  Lagged targets plus previous-hour pool screentime and
the day's incentive form the design; parameters come from ordinary least
squares with Gaussian residuals.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, replace
from datetime import date, timedelta
from typing import Iterable, Sequence

import numpy as np

from .aggregation import Aggregator
from .core import Phase, Site, screentime_in_interval, weekday_name

log = logging.getLogger(__name__)

Z_95 = 1.96


@dataclass(frozen=True)
class ArxSpec:
    """Model shape: lag order and which exogenous inputs enter the design."""

    n_lags: int = 1
    use_screentime: bool = True
    use_incentive: bool = False
    incentive_timing: str = "h"  # "h" or "h-1"; identical here because lag
                                 # chains never cross a day boundary and the
                                 # incentive is constant within a day

    def __post_init__(self) -> None:
        if self.n_lags < 1:
            raise ValueError("n_lags must be >= 1")
        if self.incentive_timing not in ("h", "h-1"):
            raise ValueError("incentive_timing must be 'h' or 'h-1'")

    def column_names(self) -> list[str]:
        names = ["intercept"] + [f"lag{i}" for i in range(1, self.n_lags + 1)]
        if self.use_screentime:
            names.append("screentime_prev_s")
        if self.use_incentive:
            names.append("incentive_usd")
        return names


@dataclass(frozen=True, slots=True)
class HourPoint:
    """One hour of the underlying differential series, before lagging."""

    day: date
    hour: int
    target_w: float
    screentime_prev_s: float
    incentive_usd: float
    observed_pool_w: float | None = None


@dataclass(frozen=True, slots=True)
class ArxRow:
    day: date
    hour: int
    target_w: float
    lags_w: tuple[float, ...]
    screentime_prev_s: float
    incentive_usd: float
    observed_pool_w: float | None = None


@dataclass(frozen=True)
class ArxCoefficients:
    alpha: float
    beta: tuple[float, ...]
    gamma: float | None
    delta: float | None
    sigma_eps: float
    standard_errors: tuple[float, ...] = ()
    n_rows: int = 0

    def __post_init__(self) -> None:
        if self.sigma_eps < 0:
            raise ValueError("sigma_eps must be non-negative")

    def flat(self) -> list[float]:
        out = [self.alpha, *self.beta]
        if self.gamma is not None:
            out.append(self.gamma)
        if self.delta is not None:
            out.append(self.delta)
        return out


@dataclass(frozen=True)
class ArxDataset:
    spec: ArxSpec
    points: tuple[HourPoint, ...]
    rows: tuple[ArxRow, ...]
    split_tag: str | None = None

    @classmethod
    def from_points(cls, spec: ArxSpec, points: Iterable[HourPoint],
                    split_tag: str | None = None) -> "ArxDataset":
        pts = tuple(sorted(points, key=lambda p: (p.day, p.hour)))
        return cls(spec, pts, tuple(materialize_rows(pts, spec)), split_tag)


class RankDeficiencyError(ValueError):
    pass


def materialize_rows(points: Sequence[HourPoint], spec: ArxSpec) -> list[ArxRow]:
    """Lag the series within contiguous same-day hour runs.

    The first n_lags hours of each run are consumed as lag seeds; chains
    never cross a day boundary or an hour gap.
    """
    rows: list[ArxRow] = []
    run: list[HourPoint] = []

    def flush(run: list[HourPoint]) -> None:
        for i in range(spec.n_lags, len(run)):
            p = run[i]
            lags = tuple(run[i - k].target_w for k in range(1, spec.n_lags + 1))
            # Incentives are constant within a day and runs stay within a
            # day, so the h / h-1 timing flag selects the same value.
            rows.append(ArxRow(p.day, p.hour, p.target_w, lags,
                               p.screentime_prev_s, p.incentive_usd,
                               p.observed_pool_w))

    for p in points:
        if run and not (p.day == run[-1].day and p.hour == run[-1].hour + 1):
            flush(run)
            run = []
        run.append(p)
    flush(run)
    return rows


def build_arx_dataset(agg: Aggregator, site: Site,
                      phases: Sequence[Phase | str],
                      spec: ArxSpec | None = None) -> ArxDataset:
    """Assemble the hourly differential dataset for experiment phases.

    Target(d, h) = mean over same-weekday baseline days of the baseline pool
    hourly mean, minus the experiment pool hourly mean.  Screentime is the
    pool mean over phase participants during hour h-1 (absentees count 0).
    """
    spec = spec or ArxSpec()
    calendar = agg.dataset.calendar
    baseline = calendar.baseline(site)
    resolved = [calendar.by_label(p) if isinstance(p, str) else p for p in phases]

    base_ref: dict[tuple[str, int], float] = {}
    acc: dict[tuple[str, int], list[float]] = {}
    for bday in baseline.days():
        for hour in range(1, 25):
            pm = agg.pool_hourly_mean(baseline, bday, hour)
            if pm is not None:
                acc.setdefault((weekday_name(bday), hour), []).append(pm.mean_watts)
    for key, vals in acc.items():
        base_ref[key] = float(np.mean(vals))

    sessions = agg.dataset.sessions
    incentives = agg.dataset.incentives
    points: list[HourPoint] = []
    for phase in resolved:
        roster = agg.phase_participants(phase)
        if not roster:
            continue
        for day in phase.days():
            incentive = incentives.amount_on(day) or 0.0
            for hour in range(1, 25):
                ref = base_ref.get((weekday_name(day), hour))
                if ref is None:
                    continue
                pm = agg.pool_hourly_mean(phase, day, hour)
                if pm is None:
                    continue
                st = float(np.mean([
                    screentime_in_interval(sessions, pid, day,
                                           3600 * (hour - 2), 3600 * (hour - 1),
                                           agg.tz)
                    for pid in roster]))
                points.append(HourPoint(day, hour, ref - pm.mean_watts, st,
                                        incentive, pm.mean_watts))
    ds = ArxDataset.from_points(spec, points)
    if not ds.rows:
        raise ValueError("no usable rows: experiment and baseline phases share "
                         "no weekday-hour coverage")
    return ds


# --------------------------------------------------------------------------
# Ordinary least squares


def design_matrix(rows: Sequence[ArxRow], spec: ArxSpec) -> tuple[np.ndarray, np.ndarray]:
    n = len(rows)
    names = spec.column_names()
    X = np.empty((n, len(names)))
    y = np.empty(n)
    for i, r in enumerate(rows):
        col = 0
        X[i, col] = 1.0
        col += 1
        for lag in r.lags_w:
            X[i, col] = lag
            col += 1
        if spec.use_screentime:
            X[i, col] = r.screentime_prev_s
            col += 1
        if spec.use_incentive:
            X[i, col] = r.incentive_usd
            col += 1
        y[i] = r.target_w
    return X, y


def _solve_ols(X: np.ndarray, y: np.ndarray, names: Sequence[str],
               ) -> tuple[np.ndarray, float, np.ndarray]:
    """QR-based least squares with an explicit rank check.

    Returns (coefficients, sigma_eps, standard errors).  sigma uses the
    n - p - 1 denominator, p being the predictor count without intercept.
    """
    n, k = X.shape
    if n < k + 1:
        raise ValueError(f"need at least {k + 1} rows to fit {k} columns, got {n}")
    Q, R = np.linalg.qr(X)
    diag = np.abs(np.diag(R))
    tol = max(n, k) * np.finfo(float).eps * (diag.max() if diag.size else 0.0)
    bad = [names[i] for i in range(k) if diag[i] <= tol]
    if bad:
        raise RankDeficiencyError(
            f"design matrix is rank deficient; collinear column(s): {', '.join(bad)}")
    coef = np.linalg.solve(R, Q.T @ y)
    resid = y - X @ coef
    ssr = float(resid @ resid)
    dof = n - k
    sigma = math.sqrt(ssr / dof)
    r_inv = np.linalg.solve(R, np.eye(k))
    cov_unit = r_inv @ r_inv.T
    se = sigma * np.sqrt(np.diag(cov_unit))
    return coef, sigma, se


def fit_ols(dataset: ArxDataset) -> ArxCoefficients:
    """Estimate coefficients by OLS; errors name any collinear columns."""
    spec = dataset.spec
    X, y = design_matrix(dataset.rows, spec)
    names = spec.column_names()
    coef, sigma, se = _solve_ols(X, y, names)
    idx = 1 + spec.n_lags
    gamma = float(coef[idx]) if spec.use_screentime else None
    if spec.use_screentime:
        idx += 1
    delta = float(coef[idx]) if spec.use_incentive else None
    return ArxCoefficients(
        alpha=float(coef[0]),
        beta=tuple(float(b) for b in coef[1:1 + spec.n_lags]),
        gamma=gamma, delta=delta, sigma_eps=sigma,
        standard_errors=tuple(float(s) for s in se), n_rows=len(y))


def predict(coeffs: ArxCoefficients, prev_diff: float | Sequence[float],
            screentime_prev: float = 0.0, incentive_now: float = 0.0,
            ) -> tuple[float, tuple[float, float]]:
    """One-step-ahead point prediction with a Gaussian 95% interval."""
    if isinstance(prev_diff, (int, float, np.floating, np.integer)):
        prev = (float(prev_diff),)
    else:
        prev = tuple(float(v) for v in prev_diff)
    if len(prev) != len(coeffs.beta):
        raise ValueError(f"expected {len(coeffs.beta)} lagged value(s), got {len(prev)}")
    terms = [coeffs.alpha]
    terms += [b * p for b, p in zip(coeffs.beta, prev)]
    if coeffs.gamma is not None:
        terms.append(coeffs.gamma * screentime_prev)
    if coeffs.delta is not None:
        terms.append(coeffs.delta * incentive_now)
    point = float(sum(terms))
    if not math.isfinite(point):
        raise ValueError("non-finite prediction input")
    half = Z_95 * coeffs.sigma_eps
    return point, (point - half, point + half)


def _row_prediction(coeffs: ArxCoefficients, row: ArxRow) -> float:
    point, _ = predict(coeffs, row.lags_w, row.screentime_prev_s, row.incentive_usd)
    return point


# --------------------------------------------------------------------------
# Diagnostics and evaluation


@dataclass(frozen=True, slots=True)
class LagProfileEntry:
    n_lags: int
    lag1_autocorr: float
    rmse_w: float


def residual_lag_profile(dataset: ArxDataset, max_lags: int = 6,
                         ) -> list[LagProfileEntry]:
    """Refit with 1..max_lags lagged dependents; report each fit's lag-1
    residual autocorrelation (Pearson on consecutive residuals) and
    in-sample RMSE.  Truncates with a warning when rows run out."""
    if max_lags < 1:
        raise ValueError("max_lags must be >= 1")
    out: list[LagProfileEntry] = []
    for L in range(1, max_lags + 1):
        spec = replace(dataset.spec, n_lags=L)
        rows = materialize_rows(dataset.points, spec)
        k = len(spec.column_names())
        if len(rows) < k + 3:
            log.warning("lag profile truncated at %d lags: only %d rows", L, len(rows))
            break
        X, y = design_matrix(rows, spec)
        coef, _, _ = _solve_ols(X, y, spec.column_names())
        resid = y - X @ coef
        if np.std(resid[1:]) == 0.0 or np.std(resid[:-1]) == 0.0:
            ac = 0.0
        else:
            ac = float(np.corrcoef(resid[1:], resid[:-1])[0, 1])
        rmse = float(np.sqrt(np.mean(resid ** 2)))
        out.append(LagProfileEntry(L, ac, rmse))
    return out


@dataclass(frozen=True)
class EvalResult:
    rmse_w: float
    rms_accuracy_pct: float
    mean_interval95_w: tuple[float, float]
    n_rows: int

    def as_dict(self) -> dict:
        return {"rmse_w": self.rmse_w, "rms_accuracy_pct": self.rms_accuracy_pct,
                "mean_interval95_w": list(self.mean_interval95_w),
                "n_rows": self.n_rows}


def evaluate(coeffs: ArxCoefficients, test: ArxDataset | Sequence[ArxRow],
             ) -> EvalResult:
    """One-step-ahead test error.

    rms_accuracy = 100 * (1 - rmse / mean absolute observed pool power);
    when rows lack the observed pool level the mean absolute target stands
    in as the denominator.
    """
    rows = test.rows if isinstance(test, ArxDataset) else tuple(test)
    if not rows:
        raise ValueError("empty test set")
    points = np.array([_row_prediction(coeffs, r) for r in rows])
    targets = np.array([r.target_w for r in rows])
    rmse = float(np.sqrt(np.mean((targets - points) ** 2)))
    observed = [r.observed_pool_w for r in rows]
    if all(o is not None for o in observed):
        denom = float(np.mean(np.abs(np.array(observed, dtype=float))))
    else:
        denom = float(np.mean(np.abs(targets)))
    accuracy = 100.0 * (1.0 - rmse / denom) if denom > 0 else float("nan")
    half = Z_95 * coeffs.sigma_eps
    mean_point = float(np.mean(points))
    return EvalResult(rmse, accuracy, (mean_point - half, mean_point + half),
                      len(rows))


def split_train_test(dataset: ArxDataset, frac: float = 0.7,
                     ) -> tuple[ArxDataset, ArxDataset]:
    """Chronological split: earliest `frac` of rows train, remainder test."""
    if not 0.0 < frac < 1.0:
        raise ValueError("frac must be strictly between 0 and 1")
    rows = dataset.rows
    n_train = int(len(rows) * frac)
    train_rows, test_rows = rows[:n_train], rows[n_train:]
    if len(test_rows) < 2:
        raise ValueError(f"split leaves {len(test_rows)} test row(s); need >= 2")
    if not train_rows:
        raise ValueError("split leaves no training rows")
    boundary = (train_rows[-1].day, train_rows[-1].hour)
    train_pts = tuple(p for p in dataset.points if (p.day, p.hour) <= boundary)
    test_pts = tuple(p for p in dataset.points if (p.day, p.hour) > boundary)
    train = ArxDataset(dataset.spec, train_pts, train_rows, "train")
    test = ArxDataset(dataset.spec, test_pts, test_rows, "test")
    return train, test
