"""Detection of new export products and the persistence of those entries."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping

import numpy as np
import pandas as pd
from scipy import stats

from . import kernels
from .complexity import AdvantageMatrix
from .errors import InsufficientDataError


@dataclass(frozen=True)
class JumpConfig:
    """Windows (in years) of the new-product rule.

    A country enters product p between baseline ``y`` and ``y + transition_gap``
    when RCA is below threshold in ``y`` and in each of the
    ``backward_window`` years before it, and at or above threshold in each of
    the ``forward_window`` years starting at ``y + transition_gap``.
    """

    rca_threshold: float = 1.0
    backward_window: int = 4
    forward_window: int = 4
    transition_gap: int = 2

    def __post_init__(self):
        if self.backward_window < 1 or self.forward_window < 1:
            raise ValueError("windows must be >= 1")
        if self.transition_gap < 1:
            raise ValueError("transition_gap must be >= 1")
        if not self.rca_threshold > 0:
            raise ValueError("rca_threshold must be > 0")


@dataclass(frozen=True)
class JumpEvent:
    country: str
    product: str
    baseline_year: int
    entry_year: int
    omega_tilde: float = float("nan")
    pci_tilde: float = float("nan")
    survival: int = 0
    censored: bool = False


@dataclass(frozen=True)
class RCAStack:
    """RCA for consecutive years on a common country/product index."""

    years: tuple
    countries: tuple
    products: tuple
    R: np.ndarray

    @classmethod
    def from_advantages(cls, advs: Mapping[int, AdvantageMatrix]) -> "RCAStack":
        years = tuple(sorted(advs))
        if not years:
            raise InsufficientDataError("no advantage matrices")
        if list(years) != list(range(years[0], years[-1] + 1)):
            raise ValueError("RCA years must be consecutive")
        first = advs[years[0]]
        for y in years:
            if advs[y].countries != first.countries or advs[y].products != first.products:
                raise ValueError("advantage matrices must share one country/product index")
        R = np.ascontiguousarray(np.stack([advs[y].R for y in years]), dtype=np.float64)
        return cls(years, first.countries, first.products, R)

    def series(self, country, product) -> np.ndarray:
        return self.R[:, self.countries.index(country), self.products.index(product)]


@dataclass
class Detection:
    events: list
    baselines: tuple
    reason: str | None = None

    def __iter__(self):
        return iter(self.events)

    def __len__(self):
        return len(self.events)

    def frame(self) -> pd.DataFrame:
        return jumps_frame(self.events)


def baseline_years(years, cfg: JumpConfig, start_year=None) -> tuple:
    """Interval starts where both windows fit inside ``years``, stepping by the gap."""
    first, last = years[0], years[-1]
    lo = first + cfg.backward_window
    hi = last - cfg.transition_gap - cfg.forward_window + 1
    start = lo if start_year is None else start_year
    return tuple(y for y in range(start, hi + 1, cfg.transition_gap) if y >= lo)


def detect_jumps(data, cfg: JumpConfig = JumpConfig(), start_year=None,
                 metrics: Mapping | None = None) -> Detection:
    """Find every (country, product, interval) satisfying the new-product rule.

    ``data`` is an :class:`RCAStack` or a mapping year -> AdvantageMatrix.
    Intervals start at ``start_year`` (default: first year with a full
    backward window) and advance by ``cfg.transition_gap``. When ``metrics``
    maps years to :class:`~divpath.relatedness.RelativeMetrics`, events carry
    relative density and complexity from their baseline year.
    """
    stack = data if isinstance(data, RCAStack) else RCAStack.from_advantages(data)
    bases = baseline_years(stack.years, cfg, start_year)
    if not bases:
        need = cfg.backward_window + cfg.transition_gap + cfg.forward_window
        return Detection([], (), f"need at least {need} consecutive years, have {len(stack.years)}")
    b_idx = np.array([stack.years.index(y) for y in bases], dtype=np.int64)
    mask = kernels.jump_mask(stack.R, b_idx, cfg.backward_window, cfg.forward_window,
                             cfg.transition_gap, float(cfg.rca_threshold))
    bi, ci, pi = np.nonzero(mask)
    entry_idx = b_idx[bi] + cfg.transition_gap
    length, censored = kernels.survival(stack.R, entry_idx.astype(np.int64), ci.astype(np.int64),
                                        pi.astype(np.int64), float(cfg.rca_threshold))
    events = []
    for k in range(len(bi)):
        y = bases[bi[k]]
        om = pc = float("nan")
        if metrics is not None and y in metrics:
            m = metrics[y]
            om = float(m.omega_tilde[ci[k], pi[k]])
            pc = float(m.pci_tilde[ci[k], pi[k]])
        events.append(JumpEvent(
            country=stack.countries[ci[k]],
            product=stack.products[pi[k]],
            baseline_year=y,
            entry_year=y + cfg.transition_gap,
            omega_tilde=om,
            pci_tilde=pc,
            survival=int(length[k]),
            censored=bool(censored[k]),
        ))
    events.sort(key=lambda e: (e.country, e.baseline_year, e.product))
    return Detection(events, bases)


def audit_jumps(events, stack: RCAStack, cfg: JumpConfig) -> list:
    """Re-check every event against the raw RCA series; returns violations."""
    bad = []
    thr = cfg.rca_threshold
    for e in events:
        r = stack.series(e.country, e.product)
        t0 = stack.years.index(e.baseline_year)
        t1 = t0 + cfg.transition_gap
        if t0 - cfg.backward_window < 0 or t1 + cfg.forward_window > len(r):
            bad.append((e, "window outside data"))
        elif not np.all(r[t0 - cfg.backward_window:t0 + 1] < thr):
            bad.append((e, "backward condition"))
        elif not np.all(r[t1:t1 + cfg.forward_window] >= thr):
            bad.append((e, "forward condition"))
        elif stack.years[t1] != e.entry_year:
            bad.append((e, "entry year"))
    return bad


def survival_time(jump: JumpEvent, stack: RCAStack, rca_threshold: float = 1.0):
    """Consecutive years at or above threshold from the entry year.

    Returns ``(years, censored)``; censored when the data end first.
    """
    r = stack.series(jump.country, jump.product)
    t = stack.years.index(jump.entry_year)
    n = 0
    while t + n < len(r) and r[t + n] >= rca_threshold:
        n += 1
    return n, t + n == len(r)


def jumps_frame(events) -> pd.DataFrame:
    cols = ["country", "product", "y", "y_entry", "omega_tilde", "pci_tilde", "survival", "censored"]
    return pd.DataFrame(
        [(e.country, e.product, e.baseline_year, e.entry_year, e.omega_tilde, e.pci_tilde,
          e.survival, e.censored) for e in events],
        columns=cols,
    )


def events_from_frame(df: pd.DataFrame) -> list:
    return [
        JumpEvent(str(r.country), str(r.product), int(r.y), int(r.y_entry), float(r.omega_tilde),
                  float(r.pci_tilde), int(r.survival), bool(r.censored))
        for r in df.itertuples(index=False)
    ]


def survival_vs_development(jumps, country_year: pd.DataFrame, reference_years,
                            measures=("eci", "gdp_pc", "diversity", "option_density"),
                            include_censored: bool = False) -> pd.DataFrame:
    """Pearson correlation between a country's mean survival of new products
    and its development measures taken in each reference year.

    ``country_year`` is indexed by (country, year). Correlations with zero
    variance on either side are reported as NaN with ``flag="zero variance"``.
    """
    df = jumps_frame(jumps)
    if not include_censored:
        df = df[~df["censored"]]
    mean_surv = df.groupby("country")["survival"].mean()
    if len(mean_surv) < 3:
        raise InsufficientDataError("need at least 3 countries with new products")
    rows = []
    for ref in reference_years:
        for m in measures:
            idx = pd.MultiIndex.from_arrays([mean_surv.index, [ref] * len(mean_surv)])
            x = country_year[m].reindex(idx).to_numpy(dtype=float) if m in country_year else np.full(len(idx), np.nan)
            y = mean_surv.to_numpy(dtype=float)
            ok = np.isfinite(x) & np.isfinite(y)
            flag = ""
            if ok.sum() < 3:
                r, flag = np.nan, "fewer than 3 countries"
            elif np.std(x[ok]) == 0 or np.std(y[ok]) == 0:
                r, flag = np.nan, "zero variance"
            else:
                r = float(np.corrcoef(x[ok], y[ok])[0, 1])
            rows.append((ref, m, r, int(ok.sum()), flag))
    return pd.DataFrame(rows, columns=["reference_year", "measure", "r", "n", "flag"])


@dataclass
class Autocorrelation:
    lag: int
    component: str
    mean: float
    t_stat: float
    p_value: float
    n_countries: int
    per_country: pd.Series = field(repr=False)
    skipped: dict = field(default_factory=dict, repr=False)


def direction_autocorrelation(directions: pd.DataFrame, lag: int = 1, component: str = "Omega",
                              step: int | None = None) -> Autocorrelation:
    """Average over countries of the lag-``lag`` Pearson autocorrelation of a
    direction component, with a one-sample t test of the mean against zero.

    ``directions`` has columns country, y, y_end and the component. ``lag``
    counts intervals of length ``step`` (default: the interval length).
    """
    if lag < 1:
        raise ValueError("lag must be >= 1")
    if directions.empty:
        raise InsufficientDataError("no direction vectors")
    if step is None:
        step = int((directions["y_end"] - directions["y"]).mode().iloc[0])
    per, skipped = {}, {}
    for country, g in directions.groupby("country"):
        s = g.set_index("y")[component].sort_index()
        if len(s) <= lag + 1:
            skipped[country] = f"series length {len(s)} <= lag + 1"
            continue
        later = s.reindex(s.index + lag * step).to_numpy()
        ok = np.isfinite(later) & np.isfinite(s.to_numpy())
        a, b = s.to_numpy()[ok], later[ok]
        if len(a) < 3:
            skipped[country] = "fewer than 3 aligned pairs"
            continue
        if np.std(a) == 0 or np.std(b) == 0:
            skipped[country] = "zero variance"
            continue
        per[country] = float(np.corrcoef(a, b)[0, 1])
    if not per:
        raise InsufficientDataError(f"no country series long enough for lag {lag}")
    vals = pd.Series(per, name=f"{component}_lag{lag}")
    if len(vals) >= 2 and vals.std() > 0:
        t, p = stats.ttest_1samp(vals.to_numpy(), 0.0)
    else:
        t, p = np.nan, np.nan
    return Autocorrelation(lag, component, float(vals.mean()), float(t), float(p), len(vals), vals, skipped)
