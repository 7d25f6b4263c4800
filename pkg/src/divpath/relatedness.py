"""Option sets, relative density and relative complexity, and development directions."""
from __future__ import annotations

import warnings
from collections import defaultdict
from dataclasses import dataclass, field

import numpy as np
import pandas as pd

from . import kernels
from .complexity import AdvantageMatrix, ComplexityScores
from .errors import DegenerateOptionSetWarning, InsufficientDataError
from .product_space import DensityMatrix


@dataclass(frozen=True)
class OptionSet:
    country: str
    year: int
    products: tuple
    mean_omega: float
    sd_omega: float
    mean_pci: float
    sd_pci: float

    @property
    def size(self):
        return len(self.products)


@dataclass(frozen=True)
class RelativeMetrics:
    """Relative density and complexity of every product for every country in one year.

    Values are z-scores against the country's option set: products outside the
    basket that have a defined density and PCI. Rows whose option set has zero
    spread are set to 0 and flagged in ``degenerate_omega`` / ``degenerate_pci``.
    """

    year: int
    countries: tuple
    products: tuple
    omega_tilde: np.ndarray
    pci_tilde: np.ndarray
    option_mask: np.ndarray
    mean_omega: np.ndarray
    sd_omega: np.ndarray
    mean_pci: np.ndarray
    sd_pci: np.ndarray
    degenerate_omega: np.ndarray = field(repr=False)
    degenerate_pci: np.ndarray = field(repr=False)

    def frame(self, option_set_only: bool = True) -> pd.DataFrame:
        ci, pi = np.nonzero(self.option_mask if option_set_only else np.ones_like(self.option_mask))
        countries = np.array(self.countries, dtype=object)
        products = np.array(self.products, dtype=object)
        return pd.DataFrame({
            "year": self.year,
            "country": countries[ci],
            "product": products[pi],
            "omega_tilde": self.omega_tilde[ci, pi],
            "pci_tilde": self.pci_tilde[ci, pi],
        })

    def moments_frame(self) -> pd.DataFrame:
        return pd.DataFrame({
            "year": self.year,
            "country": list(self.countries),
            "option_set_size": self.option_mask.sum(axis=1),
            "mean_omega": self.mean_omega,
            "sd_omega": self.sd_omega,
            "mean_pci": self.mean_pci,
            "sd_pci": self.sd_pci,
            "degenerate_omega": self.degenerate_omega,
            "degenerate_pci": self.degenerate_pci,
        })


@dataclass(frozen=True)
class DirectionVector:
    country: str
    start: int
    end: int
    Omega: float
    Pi: float
    n_jumps: int


def _aligned_omega(density, adv: AdvantageMatrix) -> np.ndarray:
    if isinstance(density, DensityMatrix):
        if density.countries == adv.countries and density.products == adv.products:
            return density.omega
        frame = pd.DataFrame(density.omega, index=density.countries, columns=density.products)
        return frame.reindex(index=list(adv.countries), columns=list(adv.products)).to_numpy()
    omega = np.asarray(density, dtype=float)
    if omega.shape != adv.R.shape:
        raise ValueError("density array does not match the advantage matrix")
    return omega


def _aligned_pci(scores, adv: AdvantageMatrix) -> np.ndarray:
    if isinstance(scores, ComplexityScores):
        return scores.pci_series().reindex(list(adv.products)).to_numpy(dtype=float)
    pci = np.asarray(scores, dtype=float)
    if pci.shape != (len(adv.products),):
        raise ValueError("PCI vector does not match the advantage matrix")
    return pci


def option_mask(adv: AdvantageMatrix, omega: np.ndarray, pci: np.ndarray) -> np.ndarray:
    return (adv.R < adv.rca_threshold) & np.isfinite(omega) & np.isfinite(pci)[None, :]


def option_set(adv: AdvantageMatrix, country, density, scores) -> OptionSet:
    """Products outside ``country``'s basket and their density/PCI moments.

    Moments use the population standard deviation.
    """
    c = adv.countries.index(country)
    omega = _aligned_omega(density, adv)[c]
    pci = _aligned_pci(scores, adv)
    mask = (adv.R[c] < adv.rca_threshold) & np.isfinite(omega) & np.isfinite(pci)
    if not mask.any():
        raise InsufficientDataError(f"{country} has an empty option set in {adv.year}")
    prods = tuple(np.array(adv.products, dtype=object)[mask].tolist())
    return OptionSet(
        country=country,
        year=adv.year,
        products=prods,
        mean_omega=float(omega[mask].mean()),
        sd_omega=float(omega[mask].std()),
        mean_pci=float(pci[mask].mean()),
        sd_pci=float(pci[mask].std()),
    )


def _relative(value, mean, sd, product, optset, what):
    if product not in optset.products:
        raise ValueError(f"{product} is not in the option set of {optset.country} in {optset.year}")
    if not sd > 0:
        warnings.warn(
            f"{what}: zero spread in option set of {optset.country} ({optset.year}); using 0",
            DegenerateOptionSetWarning,
            stacklevel=3,
        )
        return 0.0
    return (value - mean) / sd


def relative_density(omega: float, optset: OptionSet, product) -> float:
    return _relative(omega, optset.mean_omega, optset.sd_omega, product, optset, "relative density")


def relative_complexity(pci: float, optset: OptionSet, product) -> float:
    return _relative(pci, optset.mean_pci, optset.sd_pci, product, optset, "relative complexity")


def _zscore_rows(values, mask):
    mean, sd, count = kernels.masked_row_moments(
        np.ascontiguousarray(values, dtype=np.float64), np.ascontiguousarray(mask)
    )
    degenerate = (count > 0) & ~(sd > 0)
    with np.errstate(invalid="ignore", divide="ignore"):
        z = (values - mean[:, None]) / sd[:, None]
    z[degenerate] = np.where(np.isfinite(values[degenerate]), 0.0, np.nan)
    return z, mean, sd, degenerate


def relative_metrics(adv: AdvantageMatrix, density, scores) -> RelativeMetrics:
    """Relative density and complexity for all (country, product) pairs in one year."""
    omega = _aligned_omega(density, adv)
    pci = _aligned_pci(scores, adv)
    mask = option_mask(adv, omega, pci)
    pci_rows = np.broadcast_to(pci, omega.shape)
    om_t, om_mean, om_sd, om_deg = _zscore_rows(omega, mask)
    pc_t, pc_mean, pc_sd, pc_deg = _zscore_rows(pci_rows, mask)
    return RelativeMetrics(
        year=adv.year,
        countries=adv.countries,
        products=adv.products,
        omega_tilde=om_t,
        pci_tilde=pc_t,
        option_mask=mask,
        mean_omega=om_mean,
        sd_omega=om_sd,
        mean_pci=pc_mean,
        sd_pci=pc_sd,
        degenerate_omega=om_deg,
        degenerate_pci=pc_deg,
    )


def development_direction(jumps) -> DirectionVector | None:
    """Mean relative density and complexity of the products entered in one interval.

    ``jumps`` are events for a single country and interval carrying
    ``omega_tilde`` and ``pci_tilde``. Returns None when there are none.
    """
    jumps = list(jumps)
    if not jumps:
        return None
    keys = {(j.country, j.baseline_year, j.entry_year) for j in jumps}
    if len(keys) != 1:
        raise ValueError("jumps span more than one country or interval")
    country, start, end = keys.pop()
    om = np.array([j.omega_tilde for j in jumps], dtype=float)
    pi = np.array([j.pci_tilde for j in jumps], dtype=float)
    return DirectionVector(country, start, end, float(om.mean()), float(pi.mean()), len(jumps))


def directions_from_jumps(jumps) -> list[DirectionVector]:
    groups = defaultdict(list)
    for j in jumps:
        groups[(j.country, j.baseline_year, j.entry_year)].append(j)
    return [development_direction(groups[k]) for k in sorted(groups)]


def directions_frame(vectors) -> pd.DataFrame:
    cols = ["country", "y", "y_end", "Omega", "Pi", "n_jumps"]
    return pd.DataFrame(
        [(v.country, v.start, v.end, v.Omega, v.Pi, v.n_jumps) for v in vectors], columns=cols
    )


@dataclass
class DirectionSummary:
    n: int
    share_positive_omega: float
    mean_omega: float
    mean_pi: float
    hist_omega: tuple
    hist_pi: tuple
    slope_pooled: float
    slope_by_country: float
    interval_slopes: pd.DataFrame = field(repr=False)

    def as_dict(self):
        return {
            "n": self.n,
            "share_positive_omega": self.share_positive_omega,
            "mean_omega": self.mean_omega,
            "mean_pi": self.mean_pi,
            "slope_pooled": self.slope_pooled,
            "slope_by_country": self.slope_by_country,
        }


def _slope(x, y):
    from .econometrics import ols_fit, DesignMatrix
    from .errors import RankDeficientError

    x = np.asarray(x, dtype=float)
    if len(x) < 3:
        return np.nan, np.nan, np.nan
    design = DesignMatrix(np.column_stack([np.ones_like(x), x]), np.asarray(y, dtype=float),
                          ("const", "Omega"), n_effects=0)
    try:
        fit = ols_fit(design)
    except RankDeficientError:
        return np.nan, np.nan, np.nan
    return fit.coef["Omega"], fit.se["Omega"], fit.r2


def direction_statistics(vectors, bins: int = 30) -> DirectionSummary:
    """Distribution of the direction components and the Pi-on-Omega slopes.

    Slopes come from OLS of Pi on Omega: pooled over all vectors, across
    per-country means, and separately within each interval start.
    """
    df = directions_frame(vectors)
    if df.empty:
        raise InsufficientDataError("no direction vectors")
    om, pi = df["Omega"].to_numpy(), df["Pi"].to_numpy()
    by_country = df.groupby("country")[["Omega", "Pi"]].mean()
    rows = []
    for start, g in df.groupby("y"):
        slope, se, r2 = _slope(g["Omega"], g["Pi"])
        rows.append((start, len(g), slope, se, r2))
    return DirectionSummary(
        n=len(df),
        share_positive_omega=float((om > 0).mean()),
        mean_omega=float(om.mean()),
        mean_pi=float(pi.mean()),
        hist_omega=np.histogram(om, bins=bins),
        hist_pi=np.histogram(pi, bins=bins),
        slope_pooled=_slope(om, pi)[0],
        slope_by_country=_slope(by_country["Omega"], by_country["Pi"])[0],
        interval_slopes=pd.DataFrame(rows, columns=["y", "n", "slope", "se", "r2"]),
    )
