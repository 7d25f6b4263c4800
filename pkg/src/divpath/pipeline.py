"""Pipeline stages that read upstream artifacts and write their own.

Every stage reads only files from the output directory (plus the raw inputs
for ``ingest``), so each one can be rerun on its own once its upstream
artifacts exist.
"""
from __future__ import annotations

import logging
import warnings
from pathlib import Path

import numpy as np
import pandas as pd

from . import artifacts as art
from .analysis import (country_year_table, map_years, observation_table, observations_for_delta,
                       year_density)
from .complexity import advantage_from_rca, compute_eci_pci, drop_degenerate, rca_matrix
from .config import RunConfig
from .econometrics import (SuiteResult, cubic_minimum_fit, delta_robustness, descriptive_summary,
                           format_table, run_interaction_suite, run_table1_suite, run_table2_suite)
from .errors import DegenerateOptionSetWarning, DivpathError, InsufficientDataError
from .ingest import TradePanel, apply_filters, load_covariates_csv, load_trade_csv, panel_summary, \
    validate_covariates
from .jumps import RCAStack, audit_jumps, detect_jumps, direction_autocorrelation, events_from_frame, \
    survival_vs_development
from .product_space import entry_probability_curve
from .relatedness import directions_frame, directions_from_jumps, direction_statistics, relative_metrics
from .stages import eci_rho_sigmoid, stage_ks_report, stage_profiles

log = logging.getLogger(__name__)

STAGES = ("ingest", "complexity", "proximity", "jumps", "directions", "stages", "regress")

OUTPUTS = {
    "ingest": ("index.json", "panel.csv", "covariates.csv", "panel_summary.csv", "filter_report.json"),
    "complexity": ("rca.csv", "eci.csv", "pci.csv"),
    "proximity": ("proximity.csv", "density.csv", "entry_curve.csv"),
    "jumps": ("jumps.csv", "jump_report.json", "survival_correlations.csv"),
    "directions": ("relative_metrics.csv", "option_sets.csv", "directions.csv", "direction_summary.json",
                   "direction_histograms.csv", "direction_slopes.csv", "autocorrelation.csv"),
    "stages": ("stages.csv", "ks_report.json", "eci_rho_bins.csv", "eci_rho_sigmoid.json"),
    "regress": ("country_year.csv", "observations.csv", "table1.csv", "table2.csv", "interaction.csv",
                "vif.csv", "ftest.json", "regressions.txt", "cubic_minimum.json", "delta_robustness.csv",
                "descriptive_summary.csv"),
}

REQUIRES = {
    "ingest": (),
    "complexity": ("index.json", "panel.csv"),
    "proximity": ("index.json", "rca.csv"),
    "jumps": ("index.json", "covariates.csv", "rca.csv", "eci.csv", "pci.csv", "density.csv"),
    "directions": ("index.json", "rca.csv", "pci.csv", "density.csv", "jumps.csv"),
    "stages": ("index.json", "rca.csv", "eci.csv", "pci.csv", "density.csv", "directions.csv"),
    "regress": ("index.json", "covariates.csv", "rca.csv", "eci.csv", "pci.csv", "density.csv",
                "directions.csv", "stages.csv"),
}


class StageError(DivpathError):
    def __init__(self, stage, cause):
        super().__init__(f"stage '{stage}' failed: {cause}")
        self.stage = stage
        self.cause = cause


# ---------------------------------------------------------------- loaders

def _index(out):
    idx = art.read_json(Path(out) / "index.json")
    return tuple(idx["countries"]), tuple(idx["products"]), tuple(idx["years"])


def _dense(df, column, out, fill):
    countries, products, years = _index(out)
    arr = np.full((len(years), len(countries), len(products)), fill, dtype=np.float64)
    if len(df):
        yi = pd.Index(years).get_indexer(df["year"])
        ci = pd.Index(countries).get_indexer(df["country"])
        pi = pd.Index(products).get_indexer(df["product"])
        if (yi < 0).any() or (ci < 0).any() or (pi < 0).any():
            raise DivpathError(f"{column}: rows outside the panel index")
        arr[yi, ci, pi] = df[column].to_numpy(dtype=float)
    return arr


def load_panel(out) -> TradePanel:
    out = Path(out)
    countries, products, years = _index(out)
    values = _dense(art.read_csv(out / "panel.csv"), "value", out, 0.0)
    cov = validate_covariates(art.read_csv(out / "covariates.csv"))
    return TradePanel(countries, products, years, values, cov)


def load_covariates(out) -> pd.DataFrame:
    return validate_covariates(art.read_csv(Path(out) / "covariates.csv"))


def load_advantages(out, rca_threshold: float) -> dict:
    out = Path(out)
    countries, products, years = _index(out)
    R = _dense(art.read_csv(out / "rca.csv"), "rca", out, 0.0)
    return {y: advantage_from_rca(R[t], countries, products, y, rca_threshold) for t, y in enumerate(years)}


def _by_year(out, name, column, keys):
    """Year -> array over the panel index of ``keys`` (country, product or both)."""
    out = Path(out)
    countries, products, years = _index(out)
    df = art.read_csv(out / name)
    result = {}
    groups = dict(tuple(df.groupby("year")))
    for y in years:
        g = groups.get(y, df.iloc[0:0])
        if keys == "product":
            result[y] = g.set_index("product")[column].reindex(list(products)).to_numpy(dtype=float)
        elif keys == "country":
            result[y] = g.set_index("country")[column].reindex(list(countries)).to_numpy(dtype=float)
    return result


def load_density(out) -> dict:
    out = Path(out)
    countries, products, years = _index(out)
    omega = _dense(art.read_csv(out / "density.csv"), "omega", out, np.nan)
    return {y: omega[t] for t, y in enumerate(years)}


def load_metrics(out, rca_threshold: float, threads: int = 1):
    advs = load_advantages(out, rca_threshold)
    density = load_density(out)
    pci = _by_year(out, "pci.csv", "pci", "product")
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", DegenerateOptionSetWarning)
        metrics = map_years(lambda y: relative_metrics(advs[y], density[y], pci[y]), advs, threads)
    return advs, metrics


def _long(arr3, years, countries, products, name, keep):
    t, c, p = np.nonzero(keep)
    return pd.DataFrame({
        "year": np.asarray(years)[t],
        "country": np.asarray(countries, dtype=object)[c],
        "product": np.asarray(products, dtype=object)[p],
        name: arr3[t, c, p],
    })


# ---------------------------------------------------------------- stages

def stage_ingest(cfg: RunConfig) -> dict:
    out = cfg.output_dir
    loaded = load_trade_csv(cfg.trade_path, first_year=cfg.filters.first_year, last_year=cfg.filters.last_year)
    cov = load_covariates_csv(cfg.covariates_path)
    panel = apply_filters(loaded.records, cov, cfg.filters)
    art.write_json({"countries": panel.countries, "products": panel.products, "years": panel.years},
                   out / "index.json")
    flows = _long(panel.values, panel.years, panel.countries, panel.products, "value", panel.values > 0)
    art.write_csv(flows, out / "panel.csv")
    art.write_csv(panel.covariates.reset_index(), out / "covariates.csv")
    art.write_csv(panel_summary(panel, cfg.rca_threshold), out / "panel_summary.csv")
    art.write_json({
        "n_countries": len(panel.countries),
        "n_products": len(panel.products),
        "years": [panel.years[0], panel.years[-1]],
        "removed": panel.removed,
        "n_load_errors": len(loaded.errors),
        "load_errors": [{"line": e.line, "reason": e.reason} for e in loaded.errors[:50]],
    }, out / "filter_report.json")
    return {"trade": art.sha256_file(cfg.trade_path), "covariates": art.sha256_file(cfg.covariates_path)}


def stage_complexity(cfg: RunConfig) -> None:
    out = cfg.output_dir
    panel = load_panel(out)

    def one(y):
        R = rca_matrix(panel.matrix(y))
        adv = advantage_from_rca(R, panel.countries, panel.products, y, cfg.rca_threshold)
        return adv, compute_eci_pci(drop_degenerate(adv), method=cfg.eci_method)

    try:
        results = map_years(one, panel.years, cfg.threads)
    except DivpathError as exc:
        raise DivpathError(f"complexity: {exc}") from exc
    R = np.stack([results[y][0].R for y in panel.years])
    art.write_csv(_long(R, panel.years, panel.countries, panel.products, "rca", R > 0), out / "rca.csv")
    eci_rows, pci_rows = [], []
    for y in panel.years:
        adv, sc = results[y]
        eci = sc.eci_series().reindex(list(adv.countries))
        pci = sc.pci_series().reindex(list(adv.products))
        eci_rows.append(pd.DataFrame({"year": y, "country": list(adv.countries), "eci": eci.to_numpy(),
                                      "k_c": adv.k_c}))
        pci_rows.append(pd.DataFrame({"year": y, "product": list(adv.products), "pci": pci.to_numpy(),
                                      "k_p": adv.k_p}))
    art.write_csv(pd.concat(eci_rows, ignore_index=True), out / "eci.csv")
    art.write_csv(pd.concat(pci_rows, ignore_index=True), out / "pci.csv")


def stage_proximity(cfg: RunConfig) -> None:
    out = cfg.output_dir
    advs = load_advantages(out, cfg.rca_threshold)
    countries, products, years = _index(out)
    results = map_years(lambda y: year_density(advs[y]), years, cfg.threads)
    edges = []
    for y in years:
        e = results[y][0].edges()
        e.insert(0, "year", y)
        edges.append(e)
    art.write_csv(pd.concat(edges, ignore_index=True), out / "proximity.csv")
    omega = np.stack([results[y][1].omega for y in years])
    art.write_csv(_long(omega, years, countries, products, "omega", np.isfinite(omega)), out / "density.csv")
    curves = []
    for binning in ("density", "max_proximity"):
        try:
            c = entry_probability_curve(advs, cfg.entry_horizon, binning, cfg.entry_bins)
        except InsufficientDataError as exc:
            log.warning("entry curve skipped: %s", exc)
            continue
        c.insert(0, "binning", binning)
        curves.append(c)
    cols = ["binning", "bin_lo", "bin_hi", "n_pairs", "n_entries", "probability"]
    art.write_csv(pd.concat(curves, ignore_index=True) if curves else pd.DataFrame(columns=cols),
                  out / "entry_curve.csv")


def _eci_frame(out):
    return art.read_csv(Path(out) / "eci.csv")


def stage_jumps(cfg: RunConfig) -> None:
    out = cfg.output_dir
    advs, metrics = load_metrics(out, cfg.rca_threshold, cfg.threads)
    stack = RCAStack.from_advantages(advs)
    det = detect_jumps(stack, cfg.jumps, start_year=cfg.start_year, metrics=metrics)
    art.write_csv(det.frame(), out / "jumps.csv")
    report = {
        "n_events": len(det),
        "baselines": list(det.baselines),
        "reason": det.reason,
        "audit_violations": len(audit_jumps(det.events, stack, cfg.jumps)),
        "n_censored": sum(e.censored for e in det.events),
    }
    cy = country_year_table(advs, _eci_frame(out), metrics, load_covariates(out))
    refs = cfg.survival_reference_years
    if not refs and det.baselines:
        b = det.baselines
        refs = tuple(sorted({b[0], b[len(b) // 2], b[-1]}))
    try:
        surv = survival_vs_development(det.events, cy, refs)
    except InsufficientDataError as exc:
        report["survival_note"] = str(exc)
        surv = pd.DataFrame(columns=["reference_year", "measure", "r", "n", "flag"])
    art.write_csv(surv, out / "survival_correlations.csv")
    art.write_json(report, out / "jump_report.json")


def _read_directions(out) -> pd.DataFrame:
    return art.read_csv(Path(out) / "directions.csv")


def stage_directions(cfg: RunConfig) -> None:
    out = cfg.output_dir
    advs, metrics = load_metrics(out, cfg.rca_threshold, cfg.threads)
    years = sorted(metrics)
    art.write_csv(pd.concat([metrics[y].frame() for y in years], ignore_index=True), out / "relative_metrics.csv")
    art.write_csv(pd.concat([metrics[y].moments_frame() for y in years], ignore_index=True),
                  out / "option_sets.csv")
    events = events_from_frame(art.read_csv(out / "jumps.csv"))
    vectors = directions_from_jumps(events)
    dirs = directions_frame(vectors)
    art.write_csv(dirs, out / "directions.csv")

    hist_rows, slopes = [], pd.DataFrame(columns=["y", "n", "slope", "se", "r2"])
    summary = {"n": 0}
    if vectors:
        st = direction_statistics(vectors, bins=cfg.histogram_bins)
        summary = st.as_dict()
        summary["n_countries"] = int(dirs["country"].nunique())
        summary["share_negative_omega"] = float((dirs["Omega"] < 0).mean())
        for comp, (counts, edges) in (("Omega", st.hist_omega), ("Pi", st.hist_pi)):
            for k in range(len(counts)):
                hist_rows.append((comp, edges[k], edges[k + 1], int(counts[k])))
        slopes = st.interval_slopes
    art.write_json(summary, out / "direction_summary.json")
    art.write_csv(pd.DataFrame(hist_rows, columns=["component", "bin_lo", "bin_hi", "count"]),
                  out / "direction_histograms.csv")
    art.write_csv(slopes, out / "direction_slopes.csv")

    rows = []
    for comp in ("Omega", "Pi"):
        for lag in cfg.autocorr_lags:
            try:
                a = direction_autocorrelation(dirs, lag=lag, component=comp)
                rows.append((comp, lag, a.mean, a.t_stat, a.p_value, a.n_countries, len(a.skipped), ""))
            except InsufficientDataError as exc:
                rows.append((comp, lag, np.nan, np.nan, np.nan, 0, 0, str(exc)))
    art.write_csv(pd.DataFrame(rows, columns=["component", "lag", "mean_r", "t_stat", "p_value", "n_countries",
                                              "n_skipped", "note"]), out / "autocorrelation.csv")


def _read_stages(out) -> pd.DataFrame:
    df = art.read_csv(Path(out) / "stages.csv")
    df["stage"] = df["stage"].astype("Int64")
    return df


def stage_stages(cfg: RunConfig) -> None:
    out = cfg.output_dir
    _, metrics = load_metrics(out, cfg.rca_threshold, cfg.threads)
    profiles = stage_profiles(metrics, cfg.stage_cuts)
    art.write_csv(profiles, out / "stages.csv")
    dirs = _read_directions(out)
    report = {"cuts": list(profiles.attrs["cuts"])}
    for comp in ("Omega", "Pi"):
        report[comp] = stage_ks_report(dirs, profiles, comp) if len(dirs) else {"pairs": []}
    art.write_json(report, out / "ks_report.json")
    merged = profiles.merge(_eci_frame(out), on=["year", "country"], how="inner")
    try:
        fit = eci_rho_sigmoid(merged["eci"], merged["rho"])
        bins, params = fit.bins, fit.as_dict()
    except InsufficientDataError as exc:
        bins = pd.DataFrame(columns=["eci_lo", "eci_hi", "n", "mean_rho"])
        params = {"success": False, "message": str(exc)}
    art.write_csv(bins, out / "eci_rho_bins.csv")
    art.write_json(params, out / "eci_rho_sigmoid.json")


def _suite(fn, obs, years) -> SuiteResult:
    try:
        return fn(obs, *years)
    except InsufficientDataError as exc:
        return SuiteResult({}, {"all": str(exc)})


def stage_regress(cfg: RunConfig) -> None:
    out = cfg.output_dir
    advs, metrics = load_metrics(out, cfg.rca_threshold, cfg.threads)
    cy = country_year_table(advs, _eci_frame(out), metrics, load_covariates(out), _read_stages(out))
    art.write_csv(cy.reset_index(), out / "country_year.csv")
    dirs = _read_directions(out)
    obs = observation_table(dirs, cy, cfg.growth_method) if len(dirs) else pd.DataFrame(
        columns=list(dirs.columns) + ["growth"])
    art.write_csv(obs, out / "observations.csv")

    suites = {
        "table1": ("Relative density on development measures", _suite(run_table1_suite, obs, cfg.table1_years)),
        "table2": ("Growth on direction components", _suite(run_table2_suite, obs, cfg.table2_years)),
        "interaction": ("Growth with the direction interaction",
                        _suite(run_interaction_suite, obs, cfg.table2_years)),
    }
    text, vifs = [], []
    for name, (title, suite) in suites.items():
        art.write_csv(suite.table(), out / f"{name}.csv")
        text.append(format_table(f"{name}: {title}", suite) if suite.fits else
                    f"{name}: {title}\nnot estimated: {suite.errors}")
        for model, fit in suite.fits.items():
            for term, v in fit.vif.items():
                vifs.append((name, model, term, v))
    (out / "regressions.txt").write_text("\n\n".join(text) + "\n")
    art.write_csv(pd.DataFrame(vifs, columns=["table", "model", "term", "vif"]), out / "vif.csv")
    art.write_json(suites["interaction"][1].ftest or {"note": "models 3 and 4 not both estimated"},
                   out / "ftest.json")

    cubic = {}
    for xcol in ("eci", "ln_gdp_pc"):
        try:
            fit = cubic_minimum_fit(obs[xcol].to_numpy(dtype=float), obs["Omega"].to_numpy(dtype=float))
            cubic[xcol] = {"argmin": fit.argmin, "interior": fit.interior, "boundary": fit.boundary,
                           "coefficients": list(fit.coefficients), "x_range": list(fit.x_range)}
        except (InsufficientDataError, KeyError) as exc:
            cubic[xcol] = {"error": str(exc)}
    art.write_json(cubic, out / "cubic_minimum.json")

    stack = RCAStack.from_advantages(advs)
    cols = ["delta", "model", "coef", "se", "p_value", "stars", "n_obs", "error"]
    parts = []
    for d in cfg.delta_sweep:
        try:
            parts.append(delta_robustness(
                [d],
                lambda k: observations_for_delta(stack, metrics, cy, k, cfg.jumps, cfg.start_year,
                                                 cfg.growth_method),
                first_year=cfg.table2_years[0], last_year=cfg.table2_years[1]))
        except InsufficientDataError as exc:
            parts.append(pd.DataFrame([(d, m, np.nan, np.nan, np.nan, "", 0, str(exc)) for m in ("1", "5")],
                                      columns=cols))
    rob = pd.concat(parts, ignore_index=True) if parts else pd.DataFrame(columns=cols)
    art.write_csv(rob, out / "delta_robustness.csv")
    try:
        desc = descriptive_summary(dirs, cy)
    except InsufficientDataError:
        desc = pd.DataFrame(columns=["year"])
    art.write_csv(desc, out / "descriptive_summary.csv")


RUNNERS = {
    "ingest": stage_ingest,
    "complexity": stage_complexity,
    "proximity": stage_proximity,
    "jumps": stage_jumps,
    "directions": stage_directions,
    "stages": stage_stages,
    "regress": stage_regress,
}


def run_stage(name: str, cfg: RunConfig) -> dict:
    """Run one stage, checking its upstream artifacts, and update the manifest."""
    out = Path(cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    missing = [f for f in REQUIRES[name] if not (out / f).is_file()]
    if missing:
        producers = sorted({s for s, files in OUTPUTS.items() for f in missing if f in files})
        raise StageError(name, f"missing upstream artifact(s) {missing}; run {producers} first")
    if name == "ingest":
        cfg.validate()
    log.info("stage %s", name)
    try:
        inputs = RUNNERS[name](cfg)
    except StageError:
        raise
    except (DivpathError, ValueError, KeyError, FileNotFoundError) as exc:
        raise StageError(name, f"{type(exc).__name__}: {exc}") from exc
    return art.update_manifest(out, name, OUTPUTS[name], cfg.fingerprint(), inputs)


def run_pipeline(cfg: RunConfig) -> dict:
    cfg.validate()
    manifest = {}
    for name in STAGES:
        manifest = run_stage(name, cfg)
    return manifest
