"""Seeded synthetic data: export worlds, planted RCA transitions, growth panels."""
from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np
import pandas as pd

from .complexity import advantage_from_rca
from .ingest import COVARIATE_COLUMNS


def synthetic_world(n_countries: int = 30, n_products: int = 60, first_year: int = 1985,
                    last_year: int = 2014, n_clusters: int = 6, seed: int = 0):
    """Export flows and covariates from a latent-capability model.

    Country capability drifts upward over time; a product is exported more
    when capability exceeds its complexity and when the country has affinity
    for the product's cluster. Persistent AR(1) shocks create entries and
    exits. A few countries are deliberately small so the filters bite.

    Returns ``(trade, covariates)`` data frames in the CSV layouts.
    """
    rng = np.random.default_rng(seed)
    years = np.arange(first_year, last_year + 1)
    T, C, P = len(years), n_countries, n_products
    countries = [f"C{i:02d}" for i in range(C)]
    products = [f"{1000 + 7 * i:04d}" for i in range(P)]

    cluster = rng.integers(0, n_clusters, size=P)
    complexity = rng.normal(0.0, 1.0, size=P)
    weight = rng.lognormal(0.0, 0.6, size=P)
    affinity = rng.normal(0.0, 0.9, size=(C, n_clusters))
    cap0 = rng.normal(0.0, 1.0, size=C)
    drift = rng.normal(0.035, 0.02, size=C)
    cap = cap0[None, :] + drift[None, :] * np.arange(T)[:, None] \
        + np.cumsum(rng.normal(0.0, 0.03, size=(T, C)), axis=0)

    shock = np.empty((T, C, P))
    shock[0] = rng.normal(0.0, 0.65, size=(C, P))
    for t in range(1, T):
        shock[t] = 0.85 * shock[t - 1] + rng.normal(0.0, 0.34, size=(C, P))
    z = affinity[:, cluster][None] + 1.2 * (cap[:, :, None] - complexity[None, None, :]) + shock

    log_size = rng.normal(np.log(4e10), 0.8, size=C)
    size = np.exp(log_size[None, :] + 0.03 * np.arange(T)[:, None])
    values = size[:, :, None] * (weight / weight.sum())[None, None, :] * np.exp(z - 2.0)
    values[z < -2.2] = 0.0
    # a tiny exporter that trips the trade filter
    values[:, C - 1, :] *= 1e-3

    ty, tc, tp = np.nonzero(values)
    trade = pd.DataFrame({
        "year": years[ty],
        "country": np.array(countries, dtype=object)[tc],
        "product": np.array(products, dtype=object)[tp],
        "value": np.round(values[ty, tc, tp], 2),
    })

    pop0 = rng.lognormal(np.log(2.5e7), 1.0, size=C)
    pop0[C - 2] = 8e5  # below the population floor
    pop = pop0[None, :] * np.exp(0.015 * np.arange(T))[:, None]
    gdp = np.exp(8.6 + 0.8 * cap + np.cumsum(rng.normal(0.0, 0.02, size=(T, C)), axis=0))
    hc = np.clip(1.6 + 0.35 * (cap + 1.5) + rng.normal(0.0, 0.05, size=(T, C)), 1.0, None)
    stock = gdp * 3.0 * np.exp(rng.normal(0.0, 0.1, size=(T, C)))
    rows = []
    for t, y in enumerate(years):
        for c, name in enumerate(countries):
            rows.append((name, int(y), pop[t, c], gdp[t, c], hc[t, c], stock[t, c], 0.42 * pop[t, c]))
    cov = pd.DataFrame(rows, columns=list(COVARIATE_COLUMNS))
    # explicit gaps: covariates missing for one country early on
    cov.loc[(cov["country"] == countries[0]) & (cov["year"] < first_year + 3), "human_capital"] = np.nan
    return trade, cov


def write_synthetic(out_dir, **kwargs) -> tuple[Path, Path]:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    trade, cov = synthetic_world(**kwargs)
    tp, cp = out / "trade.csv", out / "covariates.csv"
    trade.to_csv(tp, index=False, float_format="%.12g", lineterminator="\n")
    cov.to_csv(cp, index=False, float_format="%.12g", lineterminator="\n")
    return tp, cp


def random_advantage(n_countries: int = 20, n_products: int = 50, seed: int = 0, noise: float = 0.7,
                     year: int = 2000):
    """Advantage matrix from a nested latent model, without empty rows or columns."""
    rng = np.random.default_rng(seed)
    cap = rng.normal(size=n_countries)
    cx = rng.normal(size=n_products)
    R = np.exp(cap[:, None] - cx[None, :] + noise * rng.normal(size=(n_countries, n_products)))
    # guarantee every country and product has at least one advantage
    R[np.arange(n_countries), R.argmax(axis=1)] = np.maximum(R.max(axis=1), 1.0)
    cols = R.argmax(axis=0)
    R[cols, np.arange(n_products)] = np.maximum(R[cols, np.arange(n_products)], 1.0)
    return advantage_from_rca(R, [f"C{i:02d}" for i in range(n_countries)],
                              [f"{i:04d}" for i in range(n_products)], year)


@dataclass
class PlantedPanel:
    years: tuple
    R: np.ndarray
    plants: set          # (country_idx, product_idx, baseline_year) that must be detected
    violations: set      # (country_idx, product_idx, baseline_year) that must not
    bw5_traps: set       # clean for backward window 4, dirty for 5
    start_year: int      # first baseline of the detection grid


def planted_jump_panel(n_plants: int = 500, n_violations: int = 500, n_bw5_traps: int = 100,
                       seed: int = 0, threshold: float = 1.0, gap: int = 2,
                       backward: int = 4, forward: int = 4) -> PlantedPanel:
    """RCA tensor with known transitions and known near-misses.

    Each series hosts at most one planted pattern inside a background that
    never crosses the threshold, so ground truth is exact. Baselines sit on
    one grid starting at ``start_year`` with step ``gap``, late enough that
    a 5-year backward window also fits.
    """
    rng = np.random.default_rng(seed)
    n_years = 24
    years = tuple(range(1980, 1980 + n_years))
    total = n_plants + n_violations + n_bw5_traps
    n_c = 40
    n_p = int(np.ceil(total / n_c)) + 5
    lo = lambda k: rng.uniform(0.05, 0.95 * threshold, size=k)  # noqa: E731
    hi = lambda k: rng.uniform(threshold, 3.0 * threshold, size=k)  # noqa: E731
    R = lo(n_years * n_c * n_p).reshape(n_years, n_c, n_p)
    # leave room for a 5-year backward window so traps can be tested
    first_base = 5
    grid = list(range(first_base, n_years - gap - forward + 1, gap))
    slots = rng.permutation(n_c * n_p)[:total]
    plants, violations, traps = set(), set(), set()
    for k, slot in enumerate(slots):
        c, p = divmod(int(slot), n_p)
        b = int(rng.choice(grid))
        e = b + gap
        series = R[:, c, p]
        tail = n_years - e
        series[e:] = hi(tail)
        if k < n_plants:
            # optional dips after the forward window keep it realistic
            if tail > forward and rng.random() < 0.5:
                series[e + forward + int(rng.integers(0, tail - forward)):] = lo(1)[0]
            plants.add((c, p, years[b]))
        elif k < n_plants + n_violations:
            if rng.random() < 0.5:
                t = int(rng.integers(b - backward, b))
                series[t] = hi(1)[0]
            else:
                t = int(rng.integers(e, e + forward))
                series[t] = lo(1)[0]
                # exit afterwards so no later interval qualifies either
                series[e + forward:] = lo(n_years - e - forward)
            violations.add((c, p, years[b]))
        else:
            series[b - backward - 1] = hi(1)[0]
            traps.add((c, p, years[b]))
    return PlantedPanel(years, R, plants, violations, traps, years[first_base])


def growth_panel(n_obs: int = 1500, alpha_omega: float = -0.005, alpha_pi: float = 0.0,
                 n_years: int = 20, noise: float = 0.02, seed: int = 0) -> pd.DataFrame:
    """Observation table drawn from the growth model with known coefficients.

    Columns match what the regression suites expect.
    """
    rng = np.random.default_rng(seed)
    n_countries = int(np.ceil(n_obs / n_years))
    country = np.repeat([f"C{i:03d}" for i in range(n_countries)], n_years)[:n_obs]
    year = np.tile(1970 + 2 * np.arange(n_years), n_countries)[:n_obs]
    eci = rng.normal(0.0, 1.0, n_obs)
    ln_gdp = 8.5 + 0.8 * eci + rng.normal(0.0, 0.6, n_obs)
    ln_pop = rng.normal(16.0, 1.3, n_obs)
    hc = 2.2 + 0.3 * eci + rng.normal(0.0, 0.3, n_obs)
    ln_cap = ln_gdp + 1.0 + rng.normal(0.0, 0.3, n_obs)
    omega = 0.8 - 0.25 * eci + rng.normal(0.0, 0.7, n_obs)
    pi = -0.35 + 0.2 * eci - 0.3 * (omega - 0.8) + rng.normal(0.0, 0.6, n_obs)
    year_fx = {y: rng.normal(0.0, 0.01) for y in np.unique(year)}
    growth = (0.04 + alpha_omega * omega + alpha_pi * pi + 0.004 * eci - 0.003 * (ln_gdp - 8.5)
              + 0.001 * (ln_pop - 16) + 0.005 * (hc - 2.2) - 0.002 * (ln_cap - 9.5)
              + np.array([year_fx[y] for y in year]) + rng.normal(0.0, noise, n_obs))
    return pd.DataFrame({
        "country": country, "year": year, "Omega": omega, "Pi": pi, "eci": eci,
        "ln_gdp_pc": ln_gdp, "ln_pop": ln_pop, "human_capital": hc, "ln_capital_stock": ln_cap,
        "growth": growth,
    })
