"""Proximity between products, density of products around country baskets,
and empirical entry probabilities as a function of relatedness."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping

import numpy as np
import pandas as pd

from . import kernels
from .complexity import AdvantageMatrix
from .errors import DegenerateMatrixError, InsufficientDataError


@dataclass(frozen=True)
class ProximityMatrix:
    year: int
    products: tuple
    phi: np.ndarray

    def edges(self, min_phi: float = 0.0) -> pd.DataFrame:
        """Upper-triangle edge list ``(p, p2, phi)`` with ``phi > min_phi``."""
        iu, ju = np.triu_indices(len(self.products), k=1)
        w = self.phi[iu, ju]
        keep = w > min_phi
        prods = np.array(self.products, dtype=object)
        return pd.DataFrame({"p": prods[iu[keep]], "p2": prods[ju[keep]], "phi": w[keep]})


@dataclass(frozen=True)
class DensityMatrix:
    year: int
    countries: tuple
    products: tuple
    omega: np.ndarray


def proximity_from_m(M: np.ndarray) -> np.ndarray:
    M = np.asarray(M, dtype=float)
    k_p = M.sum(axis=0)
    if (k_p == 0).any():
        raise DegenerateMatrixError("product with zero ubiquity; proximity undefined")
    co = M.T @ M
    phi = co / np.maximum.outer(k_p, k_p)
    np.fill_diagonal(phi, 1.0)
    return phi


def compute_proximity(adv: AdvantageMatrix) -> ProximityMatrix:
    """Co-export proximity: shared exporters over the larger of the two ubiquities."""
    return ProximityMatrix(adv.year, adv.products, proximity_from_m(adv.M))


def pooled_proximity(advs) -> ProximityMatrix:
    """Proximity from co-exports pooled over several years (same product index)."""
    advs = list(advs)
    products = advs[0].products
    co = 0.0
    k = 0.0
    for adv in advs:
        if adv.products != products:
            raise ValueError("pooled proximity needs a common product index")
        M = adv.M.astype(float)
        co = co + M.T @ M
        k = k + M.sum(axis=0)
    if np.any(k == 0):
        raise DegenerateMatrixError("product with zero ubiquity in every year")
    phi = co / np.maximum.outer(k, k)
    np.fill_diagonal(phi, 1.0)
    return ProximityMatrix(advs[-1].year, products, phi)


def density_from(M: np.ndarray, phi: np.ndarray, strict: bool = True) -> np.ndarray:
    off = np.array(phi, dtype=float, copy=True)
    np.fill_diagonal(off, 0.0)
    denom = off.sum(axis=0)
    isolated = denom <= 0
    if isolated.any():
        if strict:
            raise DegenerateMatrixError("isolated product: zero proximity to every other product")
        denom = np.where(isolated, 1.0, denom)
    return (np.asarray(M, dtype=float) @ off) / denom


def compute_density(adv: AdvantageMatrix, prox: ProximityMatrix) -> DensityMatrix:
    """Proximity-weighted share of each product's neighbours in the country basket.

    The product's own proximity (the diagonal) is left out of both sums.
    """
    if prox.products != adv.products:
        raise ValueError("proximity and advantage matrices index different products")
    return DensityMatrix(adv.year, adv.countries, adv.products, density_from(adv.M, prox.phi))


def entry_probability_curve(advs: Mapping[int, AdvantageMatrix], horizon: int = 4,
                            binning: str = "density", n_bins: int = 20,
                            proximities: Mapping[int, ProximityMatrix] | None = None) -> pd.DataFrame:
    """Share of (country, product) pairs outside the basket at ``y`` that are
    inside it at ``y + horizon``, binned by relatedness at ``y``.

    ``binning`` is ``"density"`` or ``"max_proximity"`` (proximity to the
    closest product already in the basket). Bins are equal width on [0, 1];
    bins with no pairs get a NaN probability.
    """
    if binning not in ("density", "max_proximity"):
        raise ValueError(f"unknown binning {binning!r}")
    if horizon < 1:
        raise ValueError("horizon must be >= 1")
    years = sorted(advs)
    pairs = [(y, y + horizon) for y in years if y + horizon in advs]
    if not pairs:
        raise InsufficientDataError(f"no year pair {horizon} years apart in the data")
    edges = np.linspace(0.0, 1.0, n_bins + 1)
    n_pairs = np.zeros(n_bins, dtype=np.int64)
    n_entries = np.zeros(n_bins, dtype=np.int64)
    for y0, y1 in pairs:
        a0, a1 = advs[y0], advs[y1]
        if a0.countries != a1.countries or a0.products != a1.products:
            raise ValueError("advantage matrices across years must share the same index")
        if proximities is not None and y0 in proximities:
            phi = proximities[y0].phi
        else:
            phi = _safe_proximity(a0.M)
        if binning == "density":
            measure = density_from(a0.M, phi, strict=False)
        else:
            measure = kernels.max_basket_proximity(np.ascontiguousarray(a0.M), np.ascontiguousarray(phi))
        outside = a0.R < a0.rca_threshold
        entered = a1.R >= a1.rca_threshold
        bins = np.clip(np.searchsorted(edges, measure[outside], side="right") - 1, 0, n_bins - 1)
        n_pairs += np.bincount(bins, minlength=n_bins)
        n_entries += np.bincount(bins, weights=entered[outside], minlength=n_bins).astype(np.int64)
    with np.errstate(invalid="ignore", divide="ignore"):
        prob = np.where(n_pairs > 0, n_entries / n_pairs, np.nan)
    return pd.DataFrame({
        "bin_lo": edges[:-1],
        "bin_hi": edges[1:],
        "n_pairs": n_pairs,
        "n_entries": n_entries,
        "probability": prob,
    })


def _safe_proximity(M):
    # products nobody exports get zero proximity instead of an error here
    M = np.asarray(M, dtype=float)
    k_p = M.sum(axis=0)
    with np.errstate(invalid="ignore", divide="ignore"):
        phi = (M.T @ M) / np.maximum.outer(k_p, k_p)
    phi = np.nan_to_num(phi)
    np.fill_diagonal(phi, 1.0)
    return phi
