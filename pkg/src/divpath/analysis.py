"""Per-year assembly of the metrics and the country-level tables built on them."""
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Mapping

import numpy as np
import pandas as pd

from .complexity import AdvantageMatrix, ComplexityScores, compute_eci_pci, compute_rca, drop_degenerate
from .econometrics import annualized_growth
from .errors import DivpathError
from .jumps import JumpConfig, RCAStack, detect_jumps
from .product_space import DensityMatrix, ProximityMatrix, density_from, proximity_from_m
from .relatedness import RelativeMetrics, directions_frame, directions_from_jumps, relative_metrics


@dataclass(frozen=True)
class YearAnalysis:
    """Everything computed from one year's advantage matrix.

    ``density`` and ``metrics`` use the full panel index. Products nobody
    exports, or with zero proximity to every other product, get NaN density
    and so never enter an option set.
    """

    adv: AdvantageMatrix
    scores: ComplexityScores
    proximity: ProximityMatrix
    density: DensityMatrix
    metrics: RelativeMetrics

    @property
    def year(self):
        return self.adv.year


def map_years(func, years, threads: int = 1) -> dict:
    """``{year: func(year)}`` with optional thread parallelism; order-independent."""
    years = sorted(years)
    if threads <= 1 or len(years) <= 1:
        return {y: func(y) for y in years}
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return dict(zip(years, pool.map(func, years)))


def advantages(panel, rca_threshold: float = 1.0, threads: int = 1) -> dict:
    return map_years(lambda y: compute_rca(panel, y, rca_threshold), panel.years, threads)


def year_density(adv: AdvantageMatrix):
    """Proximity on the exported products and density embedded in the full index."""
    active = adv.k_p > 0
    M = adv.M[:, active]
    phi = proximity_from_m(M)
    omega_active = density_from(M, phi, strict=False)
    off = phi.sum(axis=0) - 1.0
    omega_active[:, off <= 0] = np.nan
    omega = np.full(adv.R.shape, np.nan)
    omega[:, active] = omega_active
    prods = tuple(np.array(adv.products, dtype=object)[active].tolist())
    return ProximityMatrix(adv.year, prods, phi), DensityMatrix(adv.year, adv.countries, adv.products, omega)


def full_pci(scores: ComplexityScores, products) -> np.ndarray:
    return scores.pci_series().reindex(list(products)).to_numpy(dtype=float)


def analyze_year(adv: AdvantageMatrix, method: str = "eigenvector") -> YearAnalysis:
    try:
        scores = compute_eci_pci(drop_degenerate(adv), method=method)
        prox, dens = year_density(adv)
    except DivpathError as exc:
        raise type(exc)(f"year {adv.year}: {exc}") from exc
    return YearAnalysis(adv, scores, prox, dens, relative_metrics(adv, dens, full_pci(scores, adv.products)))


def analyze_years(advs: Mapping[int, AdvantageMatrix], method: str = "eigenvector",
                  threads: int = 1) -> dict:
    return map_years(lambda y: analyze_year(advs[y], method), advs, threads)


def country_year_table(advs: Mapping[int, AdvantageMatrix], eci: pd.DataFrame,
                       metrics: Mapping[int, RelativeMetrics], covariates: pd.DataFrame,
                       profiles: pd.DataFrame | None = None) -> pd.DataFrame:
    """One row per (country, year) with complexity, option-set and covariate columns.

    ``eci`` has columns year, country, eci. ``covariates`` is indexed by
    (country, year). ``profiles`` (optional) adds rho and stage.
    """
    frames = []
    for y in sorted(advs):
        adv, m = advs[y], metrics[y]
        frames.append(pd.DataFrame({
            "country": list(adv.countries),
            "year": y,
            "diversity": adv.k_c,
            "basket_size": adv.k_c,
            "option_set_size": m.option_mask.sum(axis=1),
            "option_density": np.where(m.option_mask.any(axis=1), m.mean_omega, np.nan),
        }))
    table = pd.concat(frames, ignore_index=True)
    table = table.merge(eci[["year", "country", "eci"]], on=["year", "country"], how="left")
    if profiles is not None:
        table = table.merge(profiles[["year", "country", "rho", "stage"]], on=["year", "country"], how="left")
    cov = covariates.reset_index()
    table = table.merge(cov, on=["country", "year"], how="left")
    with np.errstate(divide="ignore", invalid="ignore"):
        table["ln_gdp_pc"] = np.log(table["gdp_pc"])
        table["ln_pop"] = np.log(table["population"])
        table["ln_capital_stock"] = np.log(table["capital_stock_per_worker"])
    return table.set_index(["country", "year"]).sort_index()


def observation_table(directions: pd.DataFrame, country_year: pd.DataFrame,
                      growth_method: str = "geometric") -> pd.DataFrame:
    """Direction vectors joined with initial-year controls and growth over the interval."""
    cy = country_year.reset_index()
    start = cy[["country", "year", "eci", "ln_gdp_pc", "ln_pop", "human_capital", "ln_capital_stock",
                "gdp_pc"]]
    obs = directions.merge(start, left_on=["country", "y"], right_on=["country", "year"], how="left")
    end = cy[["country", "year", "gdp_pc"]].rename(columns={"year": "y_end", "gdp_pc": "gdp_pc_end"})
    obs = obs.merge(end, on=["country", "y_end"], how="left")
    g0 = obs["gdp_pc"].to_numpy(dtype=float)
    g1 = obs["gdp_pc_end"].to_numpy(dtype=float)
    span = (obs["y_end"] - obs["y"]).to_numpy()
    growth = np.full(len(obs), np.nan)
    ok = (g0 > 0) & (g1 > 0)
    for s in np.unique(span[ok]):
        rows = ok & (span == s)
        growth[rows] = annualized_growth(g0[rows], g1[rows], int(s), growth_method)
    obs["growth"] = growth
    obs["year"] = obs["y"]
    return obs.sort_values(["country", "y"], kind="mergesort").reset_index(drop=True)


def observations_for_delta(stack: RCAStack, metrics: Mapping[int, RelativeMetrics],
                           country_year: pd.DataFrame, delta: int, cfg: JumpConfig = JumpConfig(),
                           start_year=None, growth_method: str = "geometric") -> pd.DataFrame:
    """Observation table with entries and growth measured over ``delta`` years."""
    cfg_d = JumpConfig(cfg.rca_threshold, cfg.backward_window, cfg.forward_window, int(delta))
    det = detect_jumps(stack, cfg_d, start_year=start_year, metrics=metrics)
    dirs = directions_frame(directions_from_jumps(det.events))
    return observation_table(dirs, country_year, growth_method)
