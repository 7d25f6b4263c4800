"""Option-set correlation between relative complexity and relative density,
development stages derived from it, and distribution comparisons."""
from __future__ import annotations

import itertools
import warnings
from dataclasses import dataclass, field

import numpy as np
import pandas as pd
from scipy import optimize, special

from . import kernels
from .errors import InsufficientDataError, UndefinedCorrelationWarning


@dataclass(frozen=True)
class StageProfile:
    country: str
    year: int
    rho: float
    stage: int | None


def option_set_correlation(pci_tilde, omega_tilde) -> float:
    """Pearson correlation over the option-set products.

    Returns NaN (with a warning) when either variable is constant.
    """
    x = np.asarray(pci_tilde, dtype=float)
    y = np.asarray(omega_tilde, dtype=float)
    if x.shape != y.shape:
        raise ValueError("inputs differ in length")
    if len(x) < 3:
        raise InsufficientDataError("option set needs at least 3 products")
    dx, dy = x - x.mean(), y - y.mean()
    sxx, syy = float(dx @ dx), float(dy @ dy)
    if sxx == 0 or syy == 0:
        warnings.warn("constant variable in option set; correlation undefined",
                      UndefinedCorrelationWarning, stacklevel=2)
        return float("nan")
    return float(np.clip((dx @ dy) / np.sqrt(sxx * syy), -1.0, 1.0))


def classify_stage(rho: float, cuts) -> int:
    """1 if ``rho <= low``, 3 if ``rho >= high``, 2 in between."""
    low, high = cuts
    if low > high:
        raise ValueError("low cut exceeds high cut")
    if not np.isfinite(rho):
        raise ValueError("rho is undefined")
    if rho <= low:
        return 1
    if rho >= high:
        return 3
    return 2


def default_stage_cuts(rhos) -> tuple:
    """Terciles of the pooled correlation distribution."""
    r = np.asarray(rhos, dtype=float)
    r = r[np.isfinite(r)]
    if len(r) == 0:
        raise InsufficientDataError("no defined correlations")
    lo, hi = np.quantile(r, [1.0 / 3.0, 2.0 / 3.0])
    return float(lo), float(hi)


def stage_profiles(metrics_by_year, cuts=None) -> pd.DataFrame:
    """Correlation and stage for every (country, year).

    ``metrics_by_year`` maps year -> RelativeMetrics. Observations with
    undefined correlation get NaN rho and no stage.
    """
    rows = []
    for year in sorted(metrics_by_year):
        m = metrics_by_year[year]
        for c, country in enumerate(m.countries):
            mask = m.option_mask[c]
            rho = np.nan
            if mask.sum() >= 3:
                with warnings.catch_warnings():
                    warnings.simplefilter("ignore", UndefinedCorrelationWarning)
                    rho = option_set_correlation(m.pci_tilde[c, mask], m.omega_tilde[c, mask])
            rows.append((country, year, rho))
    df = pd.DataFrame(rows, columns=["country", "year", "rho"])
    if cuts is None:
        cuts = default_stage_cuts(df["rho"])
    df["stage"] = [classify_stage(r, cuts) if np.isfinite(r) else pd.NA for r in df["rho"]]
    df["stage"] = df["stage"].astype("Int64")
    df.attrs["cuts"] = tuple(cuts)
    return df


def ks_two_sample(sample_a, sample_b):
    """Two-sample Kolmogorov-Smirnov statistic and asymptotic p-value.

    ``D`` is the largest absolute gap between the two empirical CDFs; the
    p-value is the Kolmogorov survival function at ``sqrt(n1 n2 / (n1 + n2)) D``.
    """
    a = np.sort(np.asarray(sample_a, dtype=np.float64))
    b = np.sort(np.asarray(sample_b, dtype=np.float64))
    if len(a) == 0 or len(b) == 0:
        raise InsufficientDataError("KS test needs two non-empty samples")
    if np.isnan(a).any() or np.isnan(b).any():
        raise ValueError("samples contain NaN")
    d = float(kernels.ks_statistic(a, b))
    en = len(a) * len(b) / (len(a) + len(b))
    return d, float(special.kolmogorov(np.sqrt(en) * d))


def stage_ks_report(directions: pd.DataFrame, profiles: pd.DataFrame, component: str = "Omega") -> dict:
    """Pairwise KS comparisons of a direction component across stages.

    Each direction vector takes the stage of its country at the interval start.
    """
    merged = directions.merge(profiles, left_on=["country", "y"], right_on=["country", "year"], how="inner")
    merged = merged[merged["stage"].notna()]
    samples = {int(s): g[component].to_numpy(dtype=float) for s, g in merged.groupby("stage")}
    report = {
        "component": component,
        "cuts": list(profiles.attrs.get("cuts", ())),
        "n_by_stage": {str(s): int(len(v)) for s, v in sorted(samples.items())},
        "pairs": [],
    }
    for s1, s2 in itertools.combinations(sorted(samples), 2):
        if len(samples[s1]) and len(samples[s2]):
            d, p = ks_two_sample(samples[s1], samples[s2])
            report["pairs"].append({"stages": [s1, s2], "D": d, "p_value": p})
    return report


def logistic(x, lower, upper, midpoint, slope):
    return lower + (upper - lower) * special.expit(slope * (x - midpoint))


@dataclass
class SigmoidFit:
    bins: pd.DataFrame = field(repr=False)
    lower: float = np.nan
    upper: float = np.nan
    midpoint: float = np.nan
    slope: float = np.nan
    success: bool = False
    message: str = ""

    def as_dict(self):
        return {k: getattr(self, k) for k in ("lower", "upper", "midpoint", "slope", "success", "message")}


def eci_rho_sigmoid(eci, rho, n_bins: int = 10) -> SigmoidFit:
    """Binned means of rho by ECI and a four-parameter logistic fit of rho on ECI."""
    x = np.asarray(eci, dtype=float)
    y = np.asarray(rho, dtype=float)
    ok = np.isfinite(x) & np.isfinite(y)
    x, y = x[ok], y[ok]
    if len(x) < 10:
        raise InsufficientDataError("need at least 10 observations")
    edges = np.linspace(x.min(), x.max(), n_bins + 1)
    which = np.clip(np.searchsorted(edges, x, side="right") - 1, 0, n_bins - 1)
    bins = pd.DataFrame({
        "eci_lo": edges[:-1],
        "eci_hi": edges[1:],
        "n": np.bincount(which, minlength=n_bins),
        "mean_rho": [y[which == k].mean() if (which == k).any() else np.nan for k in range(n_bins)],
    })
    if np.ptp(y) == 0:
        return SigmoidFit(bins, y[0], y[0], float(np.median(x)), 0.0, True, "constant rho")
    sign = 1.0 if np.corrcoef(x, y)[0, 1] >= 0 else -1.0
    lo, hi = np.quantile(y, [0.05, 0.95])
    if sign < 0:
        lo, hi = hi, lo
    p0 = [lo, hi, float(np.median(x)), 1.0 / max(np.std(x), 1e-12)]
    try:
        with warnings.catch_warnings():
            # exact data leave the parameter covariance undefined; only the point estimate is used
            warnings.simplefilter("ignore", optimize.OptimizeWarning)
            popt, _ = optimize.curve_fit(logistic, x, y, p0=p0, maxfev=20000)
    except RuntimeError as exc:
        return SigmoidFit(bins, success=False, message=str(exc))
    lower, upper, mid, slope = map(float, popt)
    if slope < 0:
        lower, upper, slope = upper, lower, -slope
    return SigmoidFit(bins, lower, upper, mid, slope, True, "")
