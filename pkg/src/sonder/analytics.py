"""Country-level aggregation, OLS with fixed effects, and region curves.

The regression layer is a thin, numerically careful OLS built on a pivoted
QR decomposition: fixed effects are absorbed as drop-one dummy columns,
flagged continuous columns are z-scored before the fit, and standard errors
are classical or HC1-robust. It exists so that both the press-restriction
analysis and the experiment's treatment-effect estimates run through one
audited code path.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
import pandas as pd
from scipy import linalg as sla
from scipy import stats

from .completeness import CompletenessCurve, report_scale
from .errors import EmptyInput, InvalidInput, RankDeficient

REGIONS = (
    "East Asia & Pacific",
    "Europe & Central Asia",
    "Latin America & Caribbean",
    "Middle East & North Africa",
    "North America",
    "South Asia",
)

# small built-in country -> region map covering the fixture corpus
COUNTRY_REGION = {
    "US": "North America", "CA": "North America",
    "GB": "Europe & Central Asia", "DE": "Europe & Central Asia",
    "FR": "Europe & Central Asia", "RU": "Europe & Central Asia",
    "TR": "Europe & Central Asia", "IT": "Europe & Central Asia",
    "ES": "Europe & Central Asia", "PL": "Europe & Central Asia",
    "BR": "Latin America & Caribbean", "MX": "Latin America & Caribbean",
    "AR": "Latin America & Caribbean", "CO": "Latin America & Caribbean",
    "CL": "Latin America & Caribbean", "PE": "Latin America & Caribbean",
    "EG": "Middle East & North Africa", "SA": "Middle East & North Africa",
    "AE": "Middle East & North Africa", "IL": "Middle East & North Africa",
    "MA": "Middle East & North Africa", "QA": "Middle East & North Africa",
    "IN": "South Asia", "PK": "South Asia", "BD": "South Asia",
    "LK": "South Asia", "NP": "South Asia",
    "JP": "East Asia & Pacific", "KR": "East Asia & Pacific",
    "AU": "East Asia & Pacific", "NZ": "East Asia & Pacific",
    "ID": "East Asia & Pacific", "PH": "East Asia & Pacific",
    "VN": "East Asia & Pacific", "TH": "East Asia & Pacific",
    "MY": "East Asia & Pacific", "SG": "East Asia & Pacific",
}


@dataclass(frozen=True)
class ScoredQuery:
    """First-page completeness for one (query, country, date) observation."""

    query: str
    country: str
    date: str
    first_page_completeness: float  # 0-100 reporting scale
    volume: int = 0

    @property
    def region(self) -> str:
        region = COUNTRY_REGION.get(self.country)
        if region is None:
            raise InvalidInput(f"no region known for country {self.country!r}")
        return region


@dataclass(frozen=True)
class CountryDayAggregate:
    country: str
    region: str
    date: str
    mean_completeness: float
    search_volume: int
    queries: int


def first_page_completeness(curve: CompletenessCurve,
                            page_size: int = 10) -> float:
    """Cumulative completeness at the first-page cutoff, on the 0-100 scale."""
    n = min(page_size, curve.n_results)
    return report_scale(curve.points[n][1])


def aggregate(records: Sequence[ScoredQuery],
              group_by: Sequence[str] = ("country", "date"),
              ) -> list[CountryDayAggregate]:
    if not records:
        raise EmptyInput("no scored queries to aggregate")
    allowed = {"country", "region", "date"}
    bad = set(group_by) - allowed
    if bad:
        raise InvalidInput(f"cannot group by {sorted(bad)}")
    groups: dict[tuple, list[ScoredQuery]] = {}
    for rec in records:
        key = tuple(
            rec.region if g == "region" else getattr(rec, g)
            for g in group_by
        )
        groups.setdefault(key, []).append(rec)
    out = []
    for key, members in sorted(groups.items()):
        by_field = dict(zip(group_by, key))
        country = by_field.get("country", "")
        region = by_field.get(
            "region",
            members[0].region if country else "",
        )
        out.append(CountryDayAggregate(
            country=country,
            region=region,
            date=by_field.get("date", ""),
            mean_completeness=float(
                np.mean([m.first_page_completeness for m in members])
            ),
            search_volume=int(sum(m.volume for m in members)),
            queries=len(members),
        ))
    return out


# ---------------------------------------------------------------------------
# OLS

@dataclass(frozen=True)
class RegressionFit:
    coefficients: dict[str, float]
    standard_errors: dict[str, float]
    p_values: dict[str, float]
    n_obs: int
    r_squared: float
    outcome: str = "y"

    def coef(self, name: str) -> float:
        return self.coefficients[name]

    def se(self, name: str) -> float:
        return self.standard_errors[name]


def _zscore(col: np.ndarray) -> np.ndarray:
    sd = col.std(ddof=1)
    if sd == 0:
        raise InvalidInput("cannot standardize a constant column")
    return (col - col.mean()) / sd


def ols_fit(
    data: pd.DataFrame,
    outcome: str,
    covariates: Sequence[str],
    fixed_effects: Sequence[str] = (),
    standardize: Sequence[str] = (),
    robust_se: bool = False,
) -> RegressionFit:
    """OLS of `outcome` on covariates + intercept + drop-one FE dummies."""
    frame = data[[outcome, *covariates, *fixed_effects]].copy()
    if frame.isna().any().any():
        frame = frame.dropna()
    if frame.empty:
        raise EmptyInput("no complete observations")

    y = frame[outcome].to_numpy(dtype=float)
    names = ["intercept"]
    columns = [np.ones(len(frame))]
    for name in covariates:
        col = frame[name].to_numpy(dtype=float)
        if name in standardize:
            col = _zscore(col)
        names.append(name)
        columns.append(col)
    for fe in fixed_effects:
        dummies = pd.get_dummies(frame[fe].astype(str), prefix=fe,
                                 drop_first=True)
        for dummy_name in dummies.columns:
            names.append(dummy_name)
            columns.append(dummies[dummy_name].to_numpy(dtype=float))
    if outcome in standardize:
        y = _zscore(y)

    X = np.column_stack(columns)
    n, k = X.shape
    if n <= k:
        raise EmptyInput(f"{n} observations cannot identify {k} parameters")

    q, r, piv = sla.qr(X, mode="economic", pivoting=True)
    diag = np.abs(np.diag(r))
    tol = diag.max() * max(n, k) * np.finfo(float).eps
    rank = int((diag > tol).sum())
    if rank < k:
        bad = names[piv[rank]]
        raise RankDeficient(f"collinear column: {bad}", column=bad)

    beta = np.empty(k)
    beta[piv] = sla.solve_triangular(r, q.T @ y)
    resid = y - X @ beta
    dof = n - k
    xtx_inv = np.linalg.inv(X.T @ X)
    if robust_se:
        meat = X.T @ (X * (resid ** 2)[:, None])
        cov = xtx_inv @ meat @ xtx_inv * (n / dof)
    else:
        sigma2 = resid @ resid / dof
        cov = xtx_inv * sigma2
    se = np.sqrt(np.diag(cov))
    tvals = np.divide(beta, se, out=np.zeros_like(beta), where=se > 0)
    pvals = 2.0 * stats.t.sf(np.abs(tvals), dof)
    ss_tot = ((y - y.mean()) ** 2).sum()
    r2 = 1.0 - (resid @ resid) / ss_tot if ss_tot > 0 else 0.0

    return RegressionFit(
        coefficients=dict(zip(names, map(float, beta))),
        standard_errors=dict(zip(names, map(float, se))),
        p_values=dict(zip(names, map(float, pvals))),
        n_obs=n,
        r_squared=float(r2),
        outcome=outcome,
    )


def significance_stars(p: float) -> str:
    if p < 0.001:
        return "***"
    if p < 0.01:
        return "**"
    if p < 0.05:
        return "*"
    return ""


def export_table(fits: Sequence[RegressionFit],
                 skip_prefixes: Sequence[str] = ()) -> tuple[str, str]:
    """Render fits side by side; returns (csv_text, aligned_text)."""
    if not fits:
        raise EmptyInput("no fits to export")
    col_ids = [chr(ord("I") + i) for i in range(len(fits))]
    rows: list[str] = []
    for fit in fits:
        for name in fit.coefficients:
            if name == "intercept":
                continue
            if any(name.startswith(p) for p in skip_prefixes):
                continue
            if name not in rows:
                rows.append(name)

    csv_buf = io.StringIO()
    writer = csv.writer(csv_buf)
    writer.writerow(["term", *col_ids])
    text_rows: list[list[str]] = [["", *col_ids]]
    for name in rows:
        estimates, ses = [], []
        for fit in fits:
            if name in fit.coefficients:
                star = significance_stars(fit.p_values[name])
                estimates.append(f"{fit.coefficients[name]:.2f}{star}")
                ses.append(f"({fit.standard_errors[name]:.2f})")
            else:
                estimates.append("")
                ses.append("")
        writer.writerow([name, *(f"{fit.coefficients.get(name, '')}"
                                 for fit in fits)])
        writer.writerow([f"{name}_se",
                         *(f"{fit.standard_errors.get(name, '')}"
                           for fit in fits)])
        text_rows.append([name, *estimates])
        text_rows.append(["", *ses])
    writer.writerow(["N", *(str(f.n_obs) for f in fits)])
    text_rows.append(["N", *(str(f.n_obs) for f in fits)])

    widths = [max(len(r[i]) for r in text_rows)
              for i in range(len(col_ids) + 1)]
    lines = ["  ".join(cell.ljust(widths[i]) for i, cell in enumerate(row))
             for row in text_rows]
    legend = "*** p<0.001; ** p<0.01; * p<0.05"
    return csv_buf.getvalue(), "\n".join(lines + [legend]) + "\n"


# ---------------------------------------------------------------------------
# region curves

RESAMPLE_GRID = np.linspace(0.0, 1.0, 101)


def resample_curve(curve: CompletenessCurve) -> np.ndarray:
    fractions = np.array([p[0] for p in curve.points])
    values = np.array([p[1] for p in curve.points])
    return np.interp(RESAMPLE_GRID, fractions, values)


def region_curves(
    curves_by_region: dict[str, Sequence[CompletenessCurve]],
) -> list[tuple[str, CompletenessCurve]]:
    """Pointwise-mean curve per region, sorted ascending by AUC."""
    if not curves_by_region:
        raise EmptyInput("no regions")
    out = []
    for region, curves in curves_by_region.items():
        if not curves:
            raise EmptyInput(f"region {region!r} has no curves")
        grid = np.mean([resample_curve(c) for c in curves], axis=0)
        points = tuple(
            (float(f), float(v)) for f, v in zip(RESAMPLE_GRID, grid)
        )
        auc = float(np.mean(grid[1:]))
        out.append((region, CompletenessCurve(points=points, auc=auc)))
    out.sort(key=lambda item: item[1].auc)
    return out
