"""OLS with year fixed effects and the regression suites built on it."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Iterable

import numpy as np
import pandas as pd
from scipy import linalg, stats

from .errors import InsufficientDataError, RankDeficientError

# 1 - R^2 at or below this is reported as perfect collinearity
VIF_COLLINEAR = 1e-12

CONTROLS = ("eci", "ln_gdp_pc", "ln_pop", "human_capital", "ln_capital_stock")

TABLE1_MODELS = {
    "1": ("eci", "eci_sq"),
    "2": ("ln_gdp_pc", "ln_gdp_pc_sq"),
    "3": ("eci", "eci_sq", "human_capital"),
    "4": ("eci", "eci_sq", "human_capital", "ln_capital_stock"),
    "5": ("eci", "eci_sq", "human_capital", "human_capital_sq"),
}

TABLE2_MODELS = {
    "1": ("Omega",),
    "2": ("Pi",),
    "3": ("Omega", "Pi"),
    "4": CONTROLS,
    "5": ("Omega",) + CONTROLS,
    "6": ("Pi",) + CONTROLS,
    "7": ("Omega", "Pi") + CONTROLS,
}

INTERACTION_MODELS = {
    "1": ("Omega",),
    "2": ("Pi",),
    "3": ("Omega", "Pi"),
    "4": ("Omega", "Pi", "Omega_x_Pi"),
}


@dataclass(frozen=True)
class DesignMatrix:
    """Regressors ``X`` (intercept first, year dummies last) and response ``y``.

    The last ``n_effects`` columns are year dummies.
    """

    X: np.ndarray
    y: np.ndarray
    names: tuple
    n_effects: int = 0
    rows: pd.Index | None = field(default=None, repr=False)

    def __post_init__(self):
        if self.X.ndim != 2 or self.X.shape[0] != self.y.shape[0]:
            raise ValueError("X and y disagree on the number of observations")
        if len(self.names) != self.X.shape[1] or len(set(self.names)) != len(self.names):
            raise ValueError("column names must be unique and match X")
        if not (np.isfinite(self.X).all() and np.isfinite(self.y).all()):
            raise ValueError("design contains missing or non-finite cells")

    @property
    def has_const(self):
        return "const" in self.names

    @property
    def regressors(self) -> tuple:
        """Columns that are neither the intercept nor a year dummy."""
        end = len(self.names) - self.n_effects
        return tuple(n for n in self.names[:end] if n != "const")


@dataclass
class RegressionFit:
    names: tuple
    coef: pd.Series
    se: pd.Series
    tvalues: pd.Series
    pvalues: pd.Series
    r2: float
    adj_r2: float
    fvalue: float
    f_pvalue: float
    df_model: int
    df_resid: int
    ssr: float
    residuals: np.ndarray = field(repr=False)
    n_obs: int = 0
    vif: pd.Series = field(default=None, repr=False)


def build_design(df: pd.DataFrame, response: str, regressors: Iterable[str],
                 year_col: str = "year", year_effects: bool = True) -> DesignMatrix:
    """Intercept + regressors + year dummies (first year dropped).

    Rows with a missing response or regressor are dropped.
    """
    regressors = tuple(regressors)
    used = [response, *regressors, year_col] if year_effects else [response, *regressors]
    data = df.loc[:, used].replace([np.inf, -np.inf], np.nan).dropna()
    if data.empty:
        raise InsufficientDataError("no complete observations for the design")
    cols = [np.ones(len(data))] + [data[r].to_numpy(dtype=float) for r in regressors]
    names = ["const", *regressors]
    n_effects = 0
    if year_effects:
        years = np.sort(data[year_col].unique())
        for yr in years[1:]:
            cols.append((data[year_col].to_numpy() == yr).astype(float))
            names.append(f"year[{yr}]")
        n_effects = len(years) - 1
    return DesignMatrix(
        X=np.column_stack(cols),
        y=data[response].to_numpy(dtype=float),
        names=tuple(names),
        n_effects=n_effects,
        rows=data.index,
    )


def _r2(y, resid, centered):
    ssr = float(resid @ resid)
    dev = y - y.mean() if centered else y
    sst = float(dev @ dev)
    return 1.0 - ssr / sst if sst > 0 else np.nan, ssr, sst


def ols_fit(design: DesignMatrix, with_vif: bool = True) -> RegressionFit:
    """Least squares with classical standard errors.

    The overall F statistic tests every column except the intercept
    (year dummies included).
    """
    X, y = design.X, design.y
    n, k = X.shape
    if n <= k:
        raise InsufficientDataError(f"{n} observations for {k} columns")
    if np.linalg.matrix_rank(X) < k:
        raise RankDeficientError(f"design of {k} columns is rank deficient")
    q, r = np.linalg.qr(X)
    beta = linalg.solve_triangular(r, q.T @ y)
    resid = y - X @ beta
    df_resid = n - k
    r2, ssr, sst = _r2(y, resid, design.has_const)
    sigma2 = ssr / df_resid
    r_inv = linalg.solve_triangular(r, np.eye(k))
    cov = sigma2 * (r_inv @ r_inv.T)
    se = np.sqrt(np.diag(cov))
    with np.errstate(divide="ignore", invalid="ignore"):
        tvals = beta / se
    pvals = 2.0 * stats.t.sf(np.abs(tvals), df_resid)
    df_model = k - 1 if design.has_const else k
    with np.errstate(divide="ignore", invalid="ignore"):
        # exact fits give ssr = 0 and an infinite F
        fvalue = np.float64(sst - ssr) / df_model / (np.float64(ssr) / df_resid) if df_model > 0 else np.nan
    f_p = float(stats.f.sf(fvalue, df_model, df_resid)) if df_model > 0 else np.nan
    adj = 1.0 - (1.0 - r2) * (n - 1) / df_resid if design.has_const else 1.0 - (1.0 - r2) * n / df_resid
    idx = pd.Index(design.names)
    return RegressionFit(
        names=design.names,
        coef=pd.Series(beta, index=idx),
        se=pd.Series(se, index=idx),
        tvalues=pd.Series(tvals, index=idx),
        pvalues=pd.Series(pvals, index=idx),
        r2=r2,
        adj_r2=adj,
        fvalue=float(fvalue),
        f_pvalue=f_p,
        df_model=df_model,
        df_resid=df_resid,
        ssr=ssr,
        residuals=resid,
        n_obs=n,
        vif=vif(design) if with_vif else None,
    )


def vif(design: DesignMatrix) -> pd.Series:
    """Variance inflation factor of every non-dummy regressor.

    Each regressor is regressed on all remaining columns (intercept and year
    dummies included); perfect collinearity gives ``inf``.
    """
    X = design.X
    out = {}
    for name in design.regressors:
        j = design.names.index(name)
        others = np.delete(X, j, axis=1)
        target = X[:, j]
        beta, *_ = np.linalg.lstsq(others, target, rcond=None)
        resid = target - others @ beta
        r2, _, _ = _r2(target, resid, design.has_const)
        if not np.isfinite(r2):
            out[name] = np.inf
        else:
            out[name] = np.inf if 1.0 - r2 <= VIF_COLLINEAR else 1.0 / (1.0 - r2)
    return pd.Series(out, dtype=float)


def f_test(restricted: RegressionFit, unrestricted: RegressionFit):
    """Nested-model F test. Returns ``(F, p_value, df_num, df_den)``."""
    if restricted.n_obs != unrestricted.n_obs:
        raise ValueError("nested models were fitted on different samples")
    q = restricted.df_resid - unrestricted.df_resid
    if q <= 0:
        raise ValueError("unrestricted model must have more columns")
    with np.errstate(divide="ignore", invalid="ignore"):
        f = np.float64(restricted.ssr - unrestricted.ssr) / q / (np.float64(unrestricted.ssr) / unrestricted.df_resid)
    return float(f), float(stats.f.sf(f, q, unrestricted.df_resid)), q, unrestricted.df_resid


def stars(p: float) -> str:
    if not np.isfinite(p):
        return ""
    return "***" if p < 0.01 else "**" if p < 0.05 else "*" if p < 0.1 else ""


def annualized_growth(gdp_start, gdp_end, span, method: str = "geometric"):
    """Annual growth rate of GDP per capita between two years ``span`` apart.

    ``geometric``: ``(end/start)**(1/span) - 1``; ``log``: ``ln(end/start)/span``.
    """
    g0 = np.asarray(gdp_start, dtype=float)
    g1 = np.asarray(gdp_end, dtype=float)
    if span < 1:
        raise ValueError("span must be >= 1")
    if np.any(~(g0 > 0)) or np.any(~(g1 > 0)):
        raise ValueError("GDP per capita must be positive")
    if method == "geometric":
        g = (g1 / g0) ** (1.0 / span) - 1.0
    elif method == "log":
        g = np.log(g1 / g0) / span
    else:
        raise ValueError(f"unknown growth method {method!r}")
    return float(g) if np.ndim(g) == 0 else g


def add_derived_columns(obs: pd.DataFrame) -> pd.DataFrame:
    obs = obs.copy()
    if "eci" in obs:
        obs["eci_sq"] = obs["eci"] ** 2
    if "ln_gdp_pc" in obs:
        obs["ln_gdp_pc_sq"] = obs["ln_gdp_pc"] ** 2
    if "human_capital" in obs:
        obs["human_capital_sq"] = obs["human_capital"] ** 2
    if "Omega" in obs and "Pi" in obs:
        obs["Omega_x_Pi"] = obs["Omega"] * obs["Pi"]
    return obs


@dataclass
class SuiteResult:
    fits: dict
    errors: dict
    ftest: dict | None = None

    def table(self) -> pd.DataFrame:
        return regression_table(self.fits)

    def vif_table(self) -> pd.DataFrame:
        return pd.DataFrame({m: f.vif for m, f in self.fits.items() if f.vif is not None})


def _window(obs, first_year, last_year, year_col="year"):
    keep = np.ones(len(obs), dtype=bool)
    if first_year is not None:
        keep &= obs[year_col].to_numpy() >= first_year
    if last_year is not None:
        keep &= obs[year_col].to_numpy() <= last_year
    return obs.loc[keep]


def run_suite(obs: pd.DataFrame, response: str, models: dict, first_year=None, last_year=None,
              year_effects: bool = True) -> SuiteResult:
    """Fit every model in ``models`` (name -> regressors), collecting per-model errors."""
    obs = _window(add_derived_columns(obs), first_year, last_year)
    if obs.empty:
        raise InsufficientDataError("no observations in the regression window")
    fits, errors = {}, {}
    for name, regs in models.items():
        try:
            fits[name] = ols_fit(build_design(obs, response, regs, year_effects=year_effects))
        except (RankDeficientError, InsufficientDataError) as exc:
            errors[name] = f"{type(exc).__name__}: {exc}"
    return SuiteResult(fits, errors)


def run_table1_suite(obs: pd.DataFrame, first_year=1970, last_year=2010) -> SuiteResult:
    """Omega on development measures (ECI, GDP, human capital, capital stock)."""
    return run_suite(obs, "Omega", TABLE1_MODELS, first_year, last_year)


def run_table2_suite(obs: pd.DataFrame, first_year=1970, last_year=2008) -> SuiteResult:
    """Growth on Omega, Pi and initial country controls."""
    return run_suite(obs, "growth", TABLE2_MODELS, first_year, last_year)


def run_interaction_suite(obs: pd.DataFrame, first_year=1970, last_year=2010) -> SuiteResult:
    """Growth on Omega, Pi and their product; F test of model 4 against model 3."""
    res = run_suite(obs, "growth", INTERACTION_MODELS, first_year, last_year)
    if "3" in res.fits and "4" in res.fits:
        f, p, q, d = f_test(res.fits["3"], res.fits["4"])
        res.ftest = {"restricted": "3", "unrestricted": "4", "F": f, "p_value": p, "df_num": q, "df_den": d}
    return res


def regression_table(fits: dict) -> pd.DataFrame:
    """Long table: one row per (model, term) plus fit statistics as pseudo-terms."""
    rows = []
    for model, fit in fits.items():
        for term in fit.names:
            if term.startswith("year["):
                continue
            rows.append((model, term, fit.coef[term], fit.se[term], fit.tvalues[term],
                         fit.pvalues[term], stars(fit.pvalues[term])))
        rows.append((model, "R2", fit.r2, np.nan, np.nan, np.nan, ""))
        rows.append((model, "adj_R2", fit.adj_r2, np.nan, np.nan, np.nan, ""))
        rows.append((model, "F", fit.fvalue, np.nan, np.nan, fit.f_pvalue, stars(fit.f_pvalue)))
        rows.append((model, "n_obs", float(fit.n_obs), np.nan, np.nan, np.nan, ""))
    return pd.DataFrame(rows, columns=["model", "term", "estimate", "se", "t", "p_value", "stars"])


def format_table(title: str, suite: SuiteResult, digits: int = 3) -> str:
    """Text table with coefficients, standard errors in parentheses and stars."""
    models = list(suite.fits)
    terms = []
    for m in models:
        for t in suite.fits[m].names:
            if t != "const" and not t.startswith("year[") and t not in terms:
                terms.append(t)
    terms.append("const")
    width = 16
    lines = [title, " " * 22 + "".join(f"({m})".rjust(width) for m in models)]
    for t in terms:
        cells = []
        for m in models:
            f = suite.fits[m]
            if t in f.coef:
                cells.append(f"{f.coef[t]:.{digits}f}{stars(f.pvalues[t])} ({f.se[t]:.{digits}f})")
            else:
                cells.append("")
        lines.append(t.ljust(22) + "".join(c.rjust(width) for c in cells))
    for label, get in (("Observations", lambda f: f"{f.n_obs:d}"),
                       ("R2", lambda f: f"{f.r2:.{digits}f}"),
                       ("Adjusted R2", lambda f: f"{f.adj_r2:.{digits}f}"),
                       ("F Statistic", lambda f: f"{f.fvalue:.{digits}f}{stars(f.f_pvalue)}")):
        lines.append(label.ljust(22) + "".join(get(suite.fits[m]).rjust(width) for m in models))
    for m, err in suite.errors.items():
        lines.append(f"model ({m}) not estimated: {err}")
    lines.append("*p<0.1; **p<0.05; ***p<0.01; all models include year fixed effects")
    return "\n".join(lines)


def delta_robustness(deltas: Iterable[int], build_observations: Callable[[int], pd.DataFrame],
                     models=("1", "5"), first_year=1970, last_year=2008) -> pd.DataFrame:
    """Omega coefficient of growth models across interval lengths.

    ``build_observations(delta)`` must rebuild the observation table with new
    products and growth measured over ``delta`` years.
    """
    rows = []
    for delta in deltas:
        if int(delta) < 1:
            raise ValueError("delta must be >= 1")
        obs = build_observations(int(delta))
        res = run_suite(obs, "growth", {m: TABLE2_MODELS[m] for m in models}, first_year, last_year)
        for m in models:
            if m in res.fits:
                f = res.fits[m]
                rows.append((delta, m, f.coef["Omega"], f.se["Omega"], f.pvalues["Omega"],
                             stars(f.pvalues["Omega"]), f.n_obs, ""))
            else:
                rows.append((delta, m, np.nan, np.nan, np.nan, "", 0, res.errors[m]))
    return pd.DataFrame(rows, columns=["delta", "model", "coef", "se", "p_value", "stars", "n_obs", "error"])


@dataclass(frozen=True)
class CubicFit:
    coefficients: np.ndarray  # highest power first, in the original x units
    argmin: float
    interior: bool
    boundary: str | None
    x_range: tuple

    def __call__(self, x):
        return np.polyval(self.coefficients, x)


def cubic_minimum_fit(x, y) -> CubicFit:
    """Least-squares cubic and the location of its interior local minimum.

    When the fitted cubic has no local minimum inside the observed x range,
    ``interior`` is False and ``argmin`` is the end point with the lower
    fitted value (``boundary`` names which end).
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    ok = np.isfinite(x) & np.isfinite(y)
    x, y = x[ok], y[ok]
    if len(x) < 5:
        raise InsufficientDataError("need at least 5 points for a cubic fit")
    lo, hi = float(x.min()), float(x.max())
    if hi <= lo:
        raise InsufficientDataError("x has no spread")
    # fit on a standardized axis for conditioning, then map back
    mid, half = 0.5 * (lo + hi), 0.5 * (hi - lo)
    t = (x - mid) / half
    a, b, c, d = np.polyfit(t, y, 3)
    coeffs = np.poly1d([a, b, c, d])(np.poly1d([1.0 / half, -mid / half])).coeffs
    coeffs = np.concatenate([np.zeros(4 - len(coeffs)), coeffs])

    candidates = []
    scale = max(abs(a), abs(b), abs(c), 1e-300)
    if abs(a) > 1e-12 * scale:
        disc = b * b - 3.0 * a * c
        if disc >= 0:
            sq = np.sqrt(disc)
            # numerically stable pair of roots of 3a t^2 + 2b t + c
            qv = -(b + np.copysign(sq, b))
            roots = [qv / (3.0 * a)] + ([c / qv] if qv != 0 else [])
            candidates = [r for r in roots if 6.0 * a * r + 2.0 * b > 0]
    elif b > 0:
        candidates = [-c / (2.0 * b)]
    inside = [r for r in candidates if -1.0 <= r <= 1.0]
    if inside:
        tmin = min(inside)
        return CubicFit(coeffs, float(mid + half * tmin), True, None, (lo, hi))
    f_lo, f_hi = np.polyval(coeffs, lo), np.polyval(coeffs, hi)
    if f_lo <= f_hi:
        return CubicFit(coeffs, lo, False, "lower", (lo, hi))
    return CubicFit(coeffs, hi, False, "upper", (lo, hi))


def descriptive_summary(directions: pd.DataFrame, country_year: pd.DataFrame) -> pd.DataFrame:
    """Per-interval-start means over countries with at least one new product.

    ``country_year`` is indexed by (country, year) and may carry
    option_set_size, basket_size, eci, rho, gdp_pc, population,
    human_capital and capital_stock_per_worker.
    """
    if directions.empty:
        raise InsufficientDataError("no direction vectors to summarize")
    merged = directions.merge(country_year.reset_index(), left_on=["country", "y"],
                              right_on=["country", "year"], how="left")
    rows = []
    for y, g in merged.groupby("y"):
        row = {"year": y, "N": len(g), "N_j": int(g["n_jumps"].sum()),
               "Omega": g["Omega"].mean(), "Pi": g["Pi"].mean()}
        for src, dst in (("option_set_size", "O"), ("basket_size", "P"), ("eci", "ECI"), ("rho", "rho"),
                         ("human_capital", "HC")):
            row[dst] = g[src].mean() if src in g else np.nan
        for src, dst in (("gdp_pc", "log_gdp_pc"), ("population", "log_pop"),
                         ("capital_stock_per_worker", "log_stock")):
            row[dst] = np.log(g[src].mean()) if src in g else np.nan
        rows.append(row)
    cols = ["year", "N", "O", "P", "N_j", "Omega", "Pi", "ECI", "rho", "log_gdp_pc", "log_pop", "HC", "log_stock"]
    return pd.DataFrame(rows)[cols]
