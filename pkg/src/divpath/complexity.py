"""Revealed comparative advantage and the economic / product complexity indices."""
from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np
import pandas as pd

from .errors import ConvergenceError, DegenerateMatrixError, InsufficientDataError

# eigenvalues closer than this are treated as tied
EIG_TOL = 1e-10


@dataclass(frozen=True)
class AdvantageMatrix:
    year: int
    countries: tuple
    products: tuple
    R: np.ndarray
    M: np.ndarray
    k_c: np.ndarray
    k_p: np.ndarray
    rca_threshold: float = 1.0
    removed_countries: tuple = field(default=(), compare=False)
    removed_products: tuple = field(default=(), compare=False)


@dataclass(frozen=True)
class ComplexityScores:
    year: int
    countries: tuple
    products: tuple
    eci: np.ndarray
    pci: np.ndarray
    method: str
    iterations: int = 0
    converged: bool = True
    eigenvalue: float = float("nan")

    def eci_series(self) -> pd.Series:
        return pd.Series(self.eci, index=pd.Index(self.countries, name="country"), name="eci")

    def pci_series(self) -> pd.Series:
        return pd.Series(self.pci, index=pd.Index(self.products, name="product"), name="pci")


def rca_matrix(x: np.ndarray) -> np.ndarray:
    """Balassa RCA of a country-by-product export matrix.

    Entries whose country row or product column is empty are set to 0.
    """
    x = np.asarray(x, dtype=float)
    total = x.sum()
    if total <= 0:
        raise InsufficientDataError("all-zero export matrix")
    row = x.sum(axis=1, keepdims=True)
    col = x.sum(axis=0, keepdims=True)
    with np.errstate(invalid="ignore", divide="ignore", over="ignore"):
        r = (x / row) / (col / total)
    return np.nan_to_num(r, nan=0.0, posinf=0.0, neginf=0.0)


def advantage_from_rca(R, countries, products, year, rca_threshold=1.0) -> AdvantageMatrix:
    R = np.asarray(R, dtype=float)
    M = (R >= rca_threshold).astype(np.uint8)
    return AdvantageMatrix(
        year=year,
        countries=tuple(countries),
        products=tuple(products),
        R=R,
        M=M,
        k_c=M.sum(axis=1).astype(np.int64),
        k_p=M.sum(axis=0).astype(np.int64),
        rca_threshold=rca_threshold,
    )


def compute_rca(panel, year: int, rca_threshold: float = 1.0) -> AdvantageMatrix:
    x = panel.matrix(year)
    return advantage_from_rca(rca_matrix(x), panel.countries, panel.products, year, rca_threshold)


def drop_degenerate(adv: AdvantageMatrix) -> AdvantageMatrix:
    """Remove countries and products with empty rows/columns of M, to a fixed point."""
    keep_c = np.ones(len(adv.countries), dtype=bool)
    keep_p = np.ones(len(adv.products), dtype=bool)
    M = adv.M
    while True:
        sub = M[np.ix_(keep_c, keep_p)]
        zero_c = sub.sum(axis=1) == 0
        zero_p = sub.sum(axis=0) == 0
        if not zero_c.any() and not zero_p.any():
            break
        keep_c[np.flatnonzero(keep_c)[zero_c]] = False
        keep_p[np.flatnonzero(keep_p)[zero_p]] = False
        if not keep_c.any() or not keep_p.any():
            raise DegenerateMatrixError("every country or product was removed as degenerate")
    if keep_c.all() and keep_p.all():
        return adv
    countries = np.array(adv.countries, dtype=object)
    products = np.array(adv.products, dtype=object)
    R = adv.R[np.ix_(keep_c, keep_p)]
    M = adv.M[np.ix_(keep_c, keep_p)]
    return replace(
        adv,
        countries=tuple(countries[keep_c].tolist()),
        products=tuple(products[keep_p].tolist()),
        R=R,
        M=M,
        k_c=M.sum(axis=1).astype(np.int64),
        k_p=M.sum(axis=0).astype(np.int64),
        removed_countries=adv.removed_countries + tuple(countries[~keep_c].tolist()),
        removed_products=adv.removed_products + tuple(products[~keep_p].tolist()),
    )


def zscore(v: np.ndarray) -> np.ndarray:
    v = np.asarray(v, dtype=float)
    sd = v.std()
    if not sd > 0:
        raise DegenerateMatrixError("scores have zero variance; entities are indistinguishable")
    return (v - v.mean()) / sd


def _orient(eci, k_c):
    """Flip sign so ECI correlates non-negatively with diversity."""
    if np.std(k_c) > 0 and np.corrcoef(eci, k_c)[0, 1] < 0:
        return -eci
    return eci


def compute_eci_pci(adv: AdvantageMatrix, method: str = "eigenvector", max_iter: int = 1000,
                    tol: float = 1e-9, strict: bool = True) -> ComplexityScores:
    """ECI and PCI for one year.

    ``method="eigenvector"`` takes the eigenvector of the second largest
    eigenvalue of the country-country operator ``M D_p^-1 M^T`` scaled by
    ``1/k_c``. ``method="reflections"`` alternates the two averaging maps
    starting from diversity, z-scoring each step, and stops when successive
    ECI iterates correlate above ``1 - tol``. With ``strict=False`` the last
    iterate is returned unconverged instead of raising.

    Both outputs are z-scored (population sd) and oriented so that ECI
    correlates non-negatively with diversity. PCI is the product average of
    the final ECI.
    """
    M = adv.M.astype(float)
    k_c = M.sum(axis=1)
    k_p = M.sum(axis=0)
    if (k_c == 0).any() or (k_p == 0).any():
        raise DegenerateMatrixError("M has empty rows or columns; call drop_degenerate first")
    if M.shape[0] < 2:
        raise DegenerateMatrixError("need at least two countries")

    if method == "eigenvector":
        eci, lam = _eigenvector_eci(M, k_c, k_p)
        iterations, converged = 0, True
    elif method == "reflections":
        eci, iterations, converged = _reflections_eci(M, k_c, k_p, max_iter, tol)
        if not converged and strict:
            raise ConvergenceError(f"reflections did not converge in {max_iter} iterations")
        lam = float("nan")
    else:
        raise ValueError(f"unknown method {method!r}")

    eci = _orient(zscore(eci), k_c)
    pci = zscore((M.T @ eci) / k_p)
    return ComplexityScores(
        year=adv.year,
        countries=adv.countries,
        products=adv.products,
        eci=eci,
        pci=pci,
        method=method,
        iterations=iterations,
        converged=converged,
        eigenvalue=lam,
    )


def _eigenvector_eci(M, k_c, k_p):
    # D_c^-1/2 M D_p^-1 M^T D_c^-1/2 is symmetric and similar to the operator
    inv_sqrt = 1.0 / np.sqrt(k_c)
    B = (M * inv_sqrt[:, None]) / np.sqrt(k_p)[None, :]
    A = B @ B.T
    A = 0.5 * (A + A.T)
    vals, vecs = np.linalg.eigh(A)
    vals, vecs = vals[::-1], vecs[:, ::-1]
    lam2 = vals[1]
    if lam2 < EIG_TOL:
        raise DegenerateMatrixError("second eigenvalue is zero: all countries export the same basket")
    if len(vals) > 2 and abs(lam2 - vals[2]) < EIG_TOL:
        raise DegenerateMatrixError("second eigenvalue is repeated; ranking is not unique")
    return vecs[:, 1] * inv_sqrt, float(lam2)


def _reflections_eci(M, k_c, k_p, max_iter, tol):
    eci = zscore(k_c)
    for it in range(1, max_iter + 1):
        pci = zscore((M.T @ eci) / k_p)
        new = zscore((M @ pci) / k_c)
        r = float(np.dot(new, eci)) / len(eci)
        eci = new
        if r > 1.0 - tol:
            return eci, it, True
    return eci, max_iter, False
