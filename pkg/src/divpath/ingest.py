"""Loading export records and country covariates, and the cleaning filters."""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, NamedTuple

import numpy as np
import pandas as pd

from .errors import FilterError, InsufficientDataError, SchemaError

TRADE_COLUMNS = ("year", "country", "product", "value")
COVARIATE_COLUMNS = (
    "country",
    "year",
    "population",
    "gdp_pc",
    "human_capital",
    "capital_stock_per_worker",
    "employment",
)


@dataclass(frozen=True, order=True)
class ExportRecord:
    year: int
    country: str
    product: str
    value: float


class RowError(NamedTuple):
    line: int
    reason: str
    row: dict


class LoadResult(NamedTuple):
    records: list
    errors: list


@dataclass(frozen=True)
class FilterConfig:
    """Thresholds for the cleaning filters.

    ``reference_year`` is the single year on which every threshold is
    evaluated. ``exclude_countries`` lists economies dropped outright
    (for instance ones with unreliable reporting).
    """

    min_population: float = 1_200_000
    min_total_trade: float = 1e9
    reference_year: int = 2008
    min_flow: float = 5_000
    max_zero_country_share: float = 0.80
    min_global_product_export: float = 1e7
    max_zero_product_share: float = 0.95
    exclude_countries: tuple = ()
    first_year: int | None = None
    last_year: int | None = None
    require_full_coverage: bool = False

    def __post_init__(self):
        for name in ("min_population", "min_total_trade", "min_flow", "min_global_product_export"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be >= 0")
        for name in ("max_zero_country_share", "max_zero_product_share"):
            if not 0.0 <= getattr(self, name) <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1]")
        if self.first_year is not None and self.last_year is not None and self.first_year > self.last_year:
            raise ValueError("first_year is after last_year")


@dataclass(frozen=True)
class TradePanel:
    """Dense export tensor ``values[year, country, product]`` in USD plus covariates."""

    countries: tuple
    products: tuple
    years: tuple
    values: np.ndarray
    covariates: pd.DataFrame = field(repr=False)
    removed: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        shape = (len(self.years), len(self.countries), len(self.products))
        if self.values.shape != shape:
            raise ValueError(f"values has shape {self.values.shape}, expected {shape}")
        for name in ("countries", "products", "years"):
            idx = list(getattr(self, name))
            if idx != sorted(set(idx)):
                raise ValueError(f"{name} must be unique and sorted")
        if np.any(self.values < 0):
            raise ValueError("negative export values")
        self.values.setflags(write=False)

    @property
    def shape(self):
        return self.values.shape

    def year_index(self, year: int) -> int:
        try:
            return self.years.index(year)
        except ValueError:
            raise KeyError(f"year {year} not in panel") from None

    def matrix(self, year: int) -> np.ndarray:
        return self.values[self.year_index(year)]

    def covariate(self, name: str, year: int) -> pd.Series:
        """Covariate ``name`` for every panel country in ``year`` (NaN where missing)."""
        idx = pd.MultiIndex.from_product([self.countries, [year]], names=["country", "year"])
        col = self.covariates[name].reindex(idx)
        return pd.Series(col.to_numpy(), index=pd.Index(self.countries, name="country"), name=name)

    def to_records(self) -> list[ExportRecord]:
        ys, cs, ps = np.nonzero(self.values)
        return [
            ExportRecord(self.years[y], self.countries[c], self.products[p], float(self.values[y, c, p]))
            for y, c, p in zip(ys, cs, ps)
        ]


def load_trade_csv(path, schema: dict | None = None, first_year=None, last_year=None) -> LoadResult:
    """Parse an export CSV into :class:`ExportRecord` objects.

    ``schema`` maps the canonical names ``year, country, product, value`` to
    the column names used in the file. Rows that cannot be parsed go into the
    error list with the reason; they are never silently dropped.
    """
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(path)
    mapping = {k: k for k in TRADE_COLUMNS}
    mapping.update(schema or {})
    records, errors = [], []
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        header = reader.fieldnames or []
        missing = [mapping[k] for k in TRADE_COLUMNS if mapping[k] not in header]
        if missing:
            raise SchemaError(f"{path}: missing column(s) {missing}")
        for line, row in enumerate(reader, start=2):
            try:
                rec = _parse_trade_row(row, mapping)
            except ValueError as exc:
                errors.append(RowError(line, str(exc), dict(row)))
                continue
            if (first_year is not None and rec.year < first_year) or (
                last_year is not None and rec.year > last_year
            ):
                errors.append(RowError(line, f"year {rec.year} outside configured range", dict(row)))
                continue
            records.append(rec)
    return LoadResult(records, errors)


def _parse_trade_row(row, mapping) -> ExportRecord:
    raw_year = (row[mapping["year"]] or "").strip()
    country = (row[mapping["country"]] or "").strip()
    product = (row[mapping["product"]] or "").strip()
    raw_value = (row[mapping["value"]] or "").strip()
    try:
        year = int(raw_year)
    except ValueError:
        raise ValueError(f"non-integer year {raw_year!r}") from None
    if not country:
        raise ValueError("empty country code")
    if len(product) != 4:
        raise ValueError(f"product code {product!r} is not 4 characters")
    try:
        value = float(raw_value)
    except ValueError:
        raise ValueError(f"non-numeric value {raw_value!r}") from None
    if not math.isfinite(value) or value < 0:
        raise ValueError(f"value {raw_value!r} is not a finite non-negative number")
    return ExportRecord(year, country, product, value)


def load_covariates_csv(path) -> pd.DataFrame:
    """Read the covariates CSV into a frame indexed by ``(country, year)``.

    Empty cells become NaN, which is how missing values are flagged
    downstream. Non-positive population or GDP per capita is an error.
    """
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(path)
    df = pd.read_csv(path, dtype={"country": str}, keep_default_na=True)
    missing = [c for c in COVARIATE_COLUMNS if c not in df.columns]
    if missing:
        raise SchemaError(f"{path}: missing column(s) {missing}")
    return validate_covariates(df[list(COVARIATE_COLUMNS)])


def validate_covariates(df: pd.DataFrame) -> pd.DataFrame:
    df = df.copy()
    df["year"] = df["year"].astype(int)
    for col in COVARIATE_COLUMNS[2:]:
        df[col] = pd.to_numeric(df[col], errors="raise").astype(float)
    if (df["population"] <= 0).any():
        raise ValueError("population must be > 0")
    if (df["gdp_pc"] <= 0).any():
        raise ValueError("gdp_pc must be > 0 where present")
    df = df.set_index(["country", "year"]).sort_index()
    if df.index.has_duplicates:
        raise ValueError("duplicate (country, year) rows in covariates")
    return df


def _dense(records: Iterable[ExportRecord], first_year=None, last_year=None):
    recs = sorted(
        r for r in records
        if (first_year is None or r.year >= first_year) and (last_year is None or r.year <= last_year)
    )
    countries = sorted({r.country for r in recs})
    products = sorted({r.product for r in recs})
    years = sorted({r.year for r in recs})
    ci = {c: i for i, c in enumerate(countries)}
    pi = {p: i for i, p in enumerate(products)}
    yi = {y: i for i, y in enumerate(years)}
    values = np.zeros((len(years), len(countries), len(products)))
    if recs:
        idx = np.array([(yi[r.year], ci[r.country], pi[r.product]) for r in recs])
        vals = np.array([r.value for r in recs])
        # sorted input makes duplicate summation order-independent of file order
        np.add.at(values, (idx[:, 0], idx[:, 1], idx[:, 2]), vals)
    return countries, products, years, values


def apply_filters(source, covariates: pd.DataFrame, cfg: FilterConfig = FilterConfig()) -> TradePanel:
    """Build a :class:`TradePanel` and apply the cleaning filters.

    Order within one pass, all evaluated on ``cfg.reference_year``:

    1. drop countries below ``min_population`` or ``min_total_trade``;
    2. zero every flow strictly below ``min_flow`` (all years);
    3. drop products with zero exports in more than ``max_zero_country_share``
       of the countries;
    4. drop products whose global export is below ``min_global_product_export``;
    5. drop countries with zero exports on at least ``max_zero_product_share``
       of the products;
    6. optionally drop countries without exports in every year of the window.

    Passes repeat until nothing changes, so the result is a fixed point and
    re-filtering it is a no-op.
    """
    if isinstance(source, TradePanel):
        source = source.to_records()
    countries, products, years, values = _dense(source, cfg.first_year, cfg.last_year)
    if not countries or not products:
        raise FilterError("no export records to filter")
    if cfg.reference_year not in years:
        raise FilterError(f"reference year {cfg.reference_year} not present in trade data")
    ref = years.index(cfg.reference_year)
    countries = np.array(countries, dtype=object)
    products = np.array(products, dtype=object)
    removed: dict[str, list] = {k: [] for k in (
        "excluded", "population", "total_trade", "product_zero_share",
        "product_global_export", "country_zero_share", "coverage")}

    keep_c = np.array([c not in set(cfg.exclude_countries) for c in countries])
    removed["excluded"] = sorted(countries[~keep_c].tolist())
    countries, values = countries[keep_c], values[:, keep_c]

    pop = _reference_covariate(covariates, "population", countries, cfg.reference_year)

    while True:
        n_before = (len(countries), len(products))

        total = values[ref].sum(axis=1)
        small_pop = pop < cfg.min_population
        small_trade = (total < cfg.min_total_trade) & ~small_pop
        removed["population"] += countries[small_pop].tolist()
        removed["total_trade"] += countries[small_trade].tolist()
        keep_c = ~(small_pop | small_trade)
        countries, values, pop = countries[keep_c], values[:, keep_c], pop[keep_c]
        _require(countries, products)

        values = np.where(values < cfg.min_flow, 0.0, values)

        zero_share = (values[ref] == 0).mean(axis=0)
        drop_p = zero_share > cfg.max_zero_country_share
        removed["product_zero_share"] += products[drop_p].tolist()
        products, values = products[~drop_p], values[:, :, ~drop_p]
        _require(countries, products)

        drop_p = values[ref].sum(axis=0) < cfg.min_global_product_export
        removed["product_global_export"] += products[drop_p].tolist()
        products, values = products[~drop_p], values[:, :, ~drop_p]
        _require(countries, products)

        zero_share = (values[ref] == 0).mean(axis=1)
        drop_c = zero_share >= cfg.max_zero_product_share
        removed["country_zero_share"] += countries[drop_c].tolist()
        countries, values, pop = countries[~drop_c], values[:, ~drop_c], pop[~drop_c]
        _require(countries, products)

        if cfg.require_full_coverage:
            drop_c = (values.sum(axis=2) <= 0).any(axis=0)
            removed["coverage"] += countries[drop_c].tolist()
            countries, values, pop = countries[~drop_c], values[:, ~drop_c], pop[~drop_c]
            _require(countries, products)

        if (len(countries), len(products)) == n_before:
            break

    cov = covariates.loc[covariates.index.get_level_values("country").isin(set(countries))]
    return TradePanel(
        countries=tuple(countries.tolist()),
        products=tuple(products.tolist()),
        years=tuple(years),
        values=np.ascontiguousarray(values, dtype=np.float64),
        covariates=cov,
        removed={k: sorted(v) for k, v in removed.items()},
    )


def _reference_covariate(covariates, name, countries, year):
    idx = pd.MultiIndex.from_arrays([list(countries), [year] * len(countries)])
    vals = covariates[name].reindex(idx).to_numpy(dtype=float)
    missing = countries[np.isnan(vals)]
    if len(missing):
        raise FilterError(f"{name} missing in reference year {year} for {sorted(missing.tolist())}")
    return vals


def _require(countries, products):
    if len(countries) == 0:
        raise FilterError("all countries filtered out")
    if len(products) == 0:
        raise FilterError("all products filtered out")


def panel_summary(panel: TradePanel, rca_threshold: float = 1.0) -> pd.DataFrame:
    """Per-year counts of active countries and products, and mean option-set
    and basket sizes over active countries."""
    from .complexity import rca_matrix

    if panel.values.size == 0 or not panel.values.any():
        raise InsufficientDataError("empty panel")
    rows = []
    for y, year in enumerate(panel.years):
        x = panel.values[y]
        active_c = x.sum(axis=1) > 0
        active_p = x.sum(axis=0) > 0
        if not active_c.any():
            rows.append((year, 0, 0, np.nan, np.nan))
            continue
        r = rca_matrix(x[np.ix_(active_c, active_p)])
        basket = (r >= rca_threshold).sum(axis=1)
        rows.append((year, int(active_c.sum()), int(active_p.sum()),
                     float((r.shape[1] - basket).mean()), float(basket.mean())))
    return pd.DataFrame(rows, columns=["year", "n_countries", "n_products", "mean_option_set", "mean_basket"])
