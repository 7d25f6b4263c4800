"""Run configuration read from an INI file.

Sections and keys (all optional except the two input paths)::

    [paths]
    trade = trade.csv              ; relative to the config file
    covariates = covariates.csv
    output = out

    [filters]
    min_population = 1200000
    min_total_trade = 1e9
    reference_year = 2008
    min_flow = 5000
    max_zero_country_share = 0.80
    min_global_product_export = 1e7
    max_zero_product_share = 0.95
    exclude_countries =            ; whitespace separated codes
    first_year =
    last_year =
    require_full_coverage = false

    [jumps]
    rca_threshold = 1.0
    backward_window = 4
    forward_window = 4
    delta = 2
    start_year =                   ; first interval start, default first feasible

    [analysis]
    eci_method = eigenvector
    growth_method = geometric
    table1_years = 1970 2010
    table2_years = 1970 2008
    delta_sweep = 1 2 3 4
    entry_horizon = 4
    entry_bins = 20
    autocorr_lags = 1 2 3 4
    survival_reference_years =     ; default: first, middle and last interval start
    stage_cuts =                   ; "low high", default terciles
    histogram_bins = 30

    [run]
    seed = 0
    threads = 1

Only the output directory and thread count can be overridden from the
environment (``DIVPATH_OUT``, ``DIVPATH_THREADS``).
"""
from __future__ import annotations

import configparser
import os
from dataclasses import asdict, dataclass, field
from pathlib import Path

from .ingest import FilterConfig
from .jumps import JumpConfig


@dataclass(frozen=True)
class RunConfig:
    trade_path: Path
    covariates_path: Path
    output_dir: Path
    filters: FilterConfig = field(default_factory=FilterConfig)
    jumps: JumpConfig = field(default_factory=JumpConfig)
    start_year: int | None = None
    eci_method: str = "eigenvector"
    growth_method: str = "geometric"
    table1_years: tuple = (1970, 2010)
    table2_years: tuple = (1970, 2008)
    delta_sweep: tuple = (1, 2, 3, 4)
    entry_horizon: int = 4
    entry_bins: int = 20
    autocorr_lags: tuple = (1, 2, 3, 4)
    survival_reference_years: tuple = ()
    stage_cuts: tuple | None = None
    histogram_bins: int = 30
    seed: int = 0
    threads: int = 1

    @property
    def rca_threshold(self) -> float:
        return self.jumps.rca_threshold

    @property
    def delta(self) -> int:
        return self.jumps.transition_gap

    def validate(self) -> "RunConfig":
        for label, p in (("trade", self.trade_path), ("covariates", self.covariates_path)):
            if not Path(p).is_file():
                raise FileNotFoundError(f"{label} file not found: {p}")
        if self.eci_method not in ("eigenvector", "reflections"):
            raise ValueError(f"unknown eci_method {self.eci_method!r}")
        if self.growth_method not in ("geometric", "log"):
            raise ValueError(f"unknown growth_method {self.growth_method!r}")
        for name in ("table1_years", "table2_years"):
            lo, hi = getattr(self, name)
            if lo > hi:
                raise ValueError(f"{name}: empty year range")
        if self.stage_cuts is not None and self.stage_cuts[0] > self.stage_cuts[1]:
            raise ValueError("stage_cuts: low exceeds high")
        if any(d < 1 for d in self.delta_sweep):
            raise ValueError("delta_sweep values must be >= 1")
        if self.threads < 1:
            raise ValueError("threads must be >= 1")
        return self

    def fingerprint(self) -> dict:
        """Settings that determine the outputs: no output path, no thread count.

        The kernel backend is included because numba and numpy sum in
        different orders, which can move the 12th significant digit.
        """
        from ._accel import BACKEND

        d = asdict(self)
        d["backend"] = BACKEND
        d.pop("output_dir")
        d.pop("threads")
        d["trade_path"] = Path(self.trade_path).name
        d["covariates_path"] = Path(self.covariates_path).name
        return _jsonable(d)


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, Path):
        return str(obj)
    return obj


def _ints(text):
    return tuple(int(t) for t in text.split())


def _opt_int(text):
    return int(text) if text.strip() else None


def load_config(path, overrides: dict | None = None, environ=None) -> RunConfig:
    """Parse an INI file into a :class:`RunConfig`.

    ``overrides`` (from the command line) win over the environment, which
    wins over the file. Recognised override keys: output_dir, threads, seed,
    delta, rca_threshold, backward_window.
    """
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"config file not found: {path}")
    cp = configparser.ConfigParser(inline_comment_prefixes=(";", "#"))
    cp.read(path)
    base = path.parent
    overrides = {k: v for k, v in (overrides or {}).items() if v is not None}
    environ = os.environ if environ is None else environ

    def get(section, key, fallback=""):
        return cp.get(section, key, fallback=fallback).strip()

    if not get("paths", "trade") or not get("paths", "covariates"):
        raise ValueError("config must set [paths] trade and covariates")

    f = FilterConfig()
    fs = "filters"
    filters = FilterConfig(
        min_population=cp.getfloat(fs, "min_population", fallback=f.min_population),
        min_total_trade=cp.getfloat(fs, "min_total_trade", fallback=f.min_total_trade),
        reference_year=cp.getint(fs, "reference_year", fallback=f.reference_year),
        min_flow=cp.getfloat(fs, "min_flow", fallback=f.min_flow),
        max_zero_country_share=cp.getfloat(fs, "max_zero_country_share", fallback=f.max_zero_country_share),
        min_global_product_export=cp.getfloat(fs, "min_global_product_export",
                                              fallback=f.min_global_product_export),
        max_zero_product_share=cp.getfloat(fs, "max_zero_product_share", fallback=f.max_zero_product_share),
        exclude_countries=tuple(sorted(get(fs, "exclude_countries").split())),
        first_year=_opt_int(get(fs, "first_year")),
        last_year=_opt_int(get(fs, "last_year")),
        require_full_coverage=cp.getboolean(fs, "require_full_coverage", fallback=False),
    )

    j = JumpConfig()
    jumps = JumpConfig(
        rca_threshold=float(overrides.get("rca_threshold",
                                          cp.getfloat("jumps", "rca_threshold", fallback=j.rca_threshold))),
        backward_window=int(overrides.get("backward_window",
                                          cp.getint("jumps", "backward_window", fallback=j.backward_window))),
        forward_window=cp.getint("jumps", "forward_window", fallback=j.forward_window),
        transition_gap=int(overrides.get("delta", cp.getint("jumps", "delta", fallback=j.transition_gap))),
    )

    an = "analysis"
    cuts = get(an, "stage_cuts")
    if "output_dir" in overrides:
        output = Path(overrides["output_dir"])
    elif environ.get("DIVPATH_OUT"):
        output = Path(environ["DIVPATH_OUT"])
    else:
        output = base / (get("paths", "output") or "out")
    threads = overrides.get("threads") or environ.get("DIVPATH_THREADS") or get("run", "threads") or 1
    cfg = RunConfig(
        trade_path=base / get("paths", "trade"),
        covariates_path=base / get("paths", "covariates"),
        output_dir=output,
        filters=filters,
        jumps=jumps,
        start_year=_opt_int(get("jumps", "start_year")),
        eci_method=get(an, "eci_method") or "eigenvector",
        growth_method=get(an, "growth_method") or "geometric",
        table1_years=_ints(get(an, "table1_years") or "1970 2010"),
        table2_years=_ints(get(an, "table2_years") or "1970 2008"),
        delta_sweep=_ints(get(an, "delta_sweep") or "1 2 3 4"),
        entry_horizon=int(get(an, "entry_horizon") or 4),
        entry_bins=int(get(an, "entry_bins") or 20),
        autocorr_lags=_ints(get(an, "autocorr_lags") or "1 2 3 4"),
        survival_reference_years=_ints(get(an, "survival_reference_years")),
        stage_cuts=tuple(float(t) for t in cuts.split()) if cuts else None,
        histogram_bins=int(get(an, "histogram_bins") or 30),
        seed=int(overrides.get("seed", get("run", "seed") or 0)),
        threads=int(threads),
    )
    if cfg.stage_cuts is not None and len(cfg.stage_cuts) != 2:
        raise ValueError("stage_cuts needs exactly two numbers")
    return cfg


def write_config(path, trade: str, covariates: str, output: str = "out", **sections) -> Path:
    """Write a minimal INI file; ``sections`` maps section name -> {key: value}."""
    cp = configparser.ConfigParser()
    cp["paths"] = {"trade": trade, "covariates": covariates, "output": output}
    for name, values in sections.items():
        cp[name] = {k: " ".join(map(str, v)) if isinstance(v, (list, tuple)) else str(v)
                    for k, v in values.items()}
    path = Path(path)
    with open(path, "w") as fh:
        cp.write(fh)
    return path
