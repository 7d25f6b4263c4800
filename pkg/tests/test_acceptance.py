"""Acceptance gates. Each test records one PASS/FAIL line, echoed in the terminal summary."""
import time
import warnings
from pathlib import Path

import numpy as np
import pandas as pd
import pytest

import oracles
from conftest import ACCEPTANCE_LINES
from divpath import artifacts as art
from divpath.analysis import advantages, analyze_years
from divpath.complexity import compute_eci_pci, compute_rca, drop_degenerate
from divpath.config import load_config
from divpath.econometrics import DesignMatrix, cubic_minimum_fit, ols_fit, run_table2_suite, vif
from divpath.errors import DegenerateOptionSetWarning
from divpath.ingest import TradePanel, apply_filters, load_covariates_csv, load_trade_csv
from divpath.jumps import JumpConfig, RCAStack, detect_jumps
from divpath.pipeline import run_pipeline
from divpath.product_space import compute_density, compute_proximity
from divpath.stages import ks_two_sample, option_set_correlation
from divpath.synthetic import growth_panel, planted_jump_panel, random_advantage

REAL_CONFIG = Path(__file__).resolve().parents[1] / "configs" / "example.ini"


def gate(number, ok, detail):
    line = f"criterion {number:2d}: {'PASS' if ok else 'FAIL'}  {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    assert ok, line


def test_criterion_01_metric_oracles():
    worst, elapsed = 0.0, 0.0
    for seed in range(50):
        rng = np.random.default_rng(seed)
        x = rng.lognormal(14, 2, size=(1, 20, 50)) * (rng.random((1, 20, 50)) < 0.8)
        panel = TradePanel(tuple(f"C{i:02d}" for i in range(20)), tuple(f"{1000 + j}" for j in range(50)), (2000,),
                           x, pd.DataFrame())
        t0 = time.perf_counter()
        adv = drop_degenerate(compute_rca(panel, 2000))
        prox = compute_proximity(adv)
        dens = compute_density(adv, prox)
        elapsed += time.perf_counter() - t0
        keep_c = [panel.countries.index(c) for c in adv.countries]
        keep_p = [panel.products.index(p) for p in adv.products]
        r_full = oracles.rca(x[0])
        phi = oracles.proximity(adv.M)
        worst = max(worst,
                    np.abs(adv.R - r_full[np.ix_(keep_c, keep_p)]).max(),
                    np.abs(prox.phi - phi).max(),
                    np.abs(dens.omega - oracles.density(adv.M, phi)).max())
    gate(1, worst <= 1e-12 and elapsed < 5.0, f"max abs error {worst:.2e} (<= 1e-12), {elapsed:.2f} s (< 5 s)")


def test_criterion_02_eci_consistency():
    t0 = time.perf_counter()
    worst_r, signs_ok = 1.0, True
    for seed in range(20):
        adv = random_advantage(20, 50, seed=seed)
        eig = compute_eci_pci(adv)
        refl = compute_eci_pci(adv, method="reflections", max_iter=25, strict=False)
        worst_r = min(worst_r, abs(np.corrcoef(eig.eci, refl.eci)[0, 1]))
        for s in (eig, refl):
            signs_ok &= bool(np.corrcoef(s.eci, adv.k_c)[0, 1] >= 0)
    elapsed = time.perf_counter() - t0
    gate(2, worst_r >= 0.999 and signs_ok and elapsed < 5.0,
         f"min |r| {worst_r:.6f} (>= 0.999), sign convention {'held' if signs_ok else 'broken'}, {elapsed:.2f} s")


def test_criterion_03_zscore_invariants(fixture_config):
    cfg = load_config(fixture_config, environ={})
    loaded = load_trade_csv(cfg.trade_path, first_year=cfg.filters.first_year, last_year=cfg.filters.last_year)
    panel = apply_filters(loaded.records, load_covariates_csv(cfg.covariates_path), cfg.filters)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", DegenerateOptionSetWarning)
        years = analyze_years(advantages(panel))
    worst, n = 0.0, 0
    for ya in years.values():
        m = ya.metrics
        for c in range(len(m.countries)):
            mask = m.option_mask[c]
            if mask.sum() < 2 or m.degenerate_omega[c] or m.degenerate_pci[c]:
                continue
            for v in (m.omega_tilde[c, mask], m.pci_tilde[c, mask]):
                worst = max(worst, abs(v.mean()), abs(v.std() - 1.0))
            n += 1
    gate(3, n > 0 and worst <= 1e-9, f"{n} country-years, worst deviation {worst:.2e} (<= 1e-9)")


def test_criterion_04_jump_detector():
    panel = planted_jump_panel(n_plants=500, n_violations=500, n_bw5_traps=100, seed=0)
    stack = RCAStack(panel.years, tuple(range(panel.R.shape[1])), tuple(range(panel.R.shape[2])), panel.R)

    def found(cfg):
        return {(e.country, e.product, e.baseline_year) for e in detect_jumps(stack, cfg, start_year=panel.start_year)}

    # traps are clean over 4 years, so under the default window they are legitimate entries
    truth = panel.plants | panel.bw5_traps
    got = found(JumpConfig())
    tp = len(got & truth)
    precision = tp / len(got) if got else 0.0
    recall = tp / len(truth)
    got5 = found(JumpConfig(backward_window=5))
    traps_rejected = not (got5 & panel.bw5_traps)
    gate(4, precision == 1.0 and recall == 1.0 and traps_rejected and got5 == panel.plants,
         f"precision {precision:.3f}, recall {recall:.3f} on {len(panel.plants)} plants + "
         f"{len(panel.violations)} violations; backward_window=5 rejects {len(panel.bw5_traps)} traps: "
         f"{traps_rejected}")


def test_criterion_05_econometrics_oracle():
    rng = np.random.default_rng(5)
    base = rng.normal(size=(500, 7))
    base[:, 1] += 0.6 * base[:, 0]
    base[:, 4] += 0.4 * base[:, 2] - 0.3 * base[:, 3]
    X = np.column_stack([np.ones(500), base])
    y = X @ rng.normal(size=8) + rng.normal(size=500)
    names = ("const",) + tuple(f"x{j}" for j in range(1, 8))
    fit = ols_fit(DesignMatrix(X, y, names))
    beta, se, r2, f = oracles.normal_equations(X, y)
    errs = [np.abs(fit.coef.to_numpy() - beta).max(), np.abs(fit.se.to_numpy() - se).max(), abs(fit.r2 - r2),
            abs(fit.fvalue - f), max(abs(fit.vif[n] - oracles.auxiliary_vif(X, j)) for j, n in enumerate(names) if j)]
    z = rng.normal(size=(500, 7))
    q, _ = np.linalg.qr(z - z.mean(axis=0))
    orth = vif(DesignMatrix(np.column_stack([np.ones(500), q]), y, names))
    orth_err = np.abs(orth.to_numpy() - 1.0).max()
    resid = np.abs(X.T @ fit.residuals).max()
    gate(5, max(errs) <= 1e-8 and orth_err <= 1e-9 and resid <= 1e-6,
         f"max oracle error {max(errs):.2e} (<= 1e-8), orthogonal VIF error {orth_err:.2e} (<= 1e-9), "
         f"max |X'r| {resid:.2e} (<= 1e-6)")


def test_criterion_06_generative_recovery():
    t0 = time.perf_counter()
    obs = growth_panel(n_obs=1500, alpha_omega=-0.005, alpha_pi=0.0, seed=0)
    fit = run_table2_suite(obs, 1970, 2008).fits["7"]
    a, se, p = fit.coef["Omega"], fit.se["Omega"], fit.pvalues["Omega"]
    elapsed = time.perf_counter() - t0
    gate(6, abs(a + 0.005) <= 2 * se and p < 0.01 and elapsed < 30.0,
         f"alpha_1 {a:.5f} (se {se:.5f}, {abs(a + 0.005) / se:.2f} SE from -0.005), p {p:.1e}, n {fit.n_obs}, "
         f"{elapsed:.2f} s")


def test_criterion_07_ks_and_rho():
    rng = np.random.default_rng(7)
    exact = 0
    worst = 0.0
    for _ in range(100):
        a = np.round(rng.normal(size=int(rng.integers(1, 80))), 1)
        b = np.round(rng.normal(0.2, 1.3, size=int(rng.integers(1, 80))), 1)
        exact += ks_two_sample(a, b)[0] == oracles.ks_scan(a, b)
        x, y = rng.normal(size=(2, int(rng.integers(3, 200))))
        worst = max(worst, abs(option_set_correlation(x, y) - oracles.pearson(list(x), list(y))))
    gate(7, exact == 100 and worst <= 1e-12, f"KS exact on {exact}/100 pairs, max rho error {worst:.2e} (<= 1e-12)")


def test_criterion_08_cubic_minimum():
    x = np.linspace(-1.0, 4.0, 51)
    fit = cubic_minimum_fit(x, (x - 1) ** 3 - 3 * (x - 1))
    mono = cubic_minimum_fit(x, 2.0 * x + 0.1 * x ** 3)
    err = abs(fit.argmin - 2.0)
    gate(8, fit.interior and err <= 1e-9 and not mono.interior and mono.boundary is not None,
         f"argmin error {err:.2e} (<= 1e-9), monotone data reported as {mono.boundary} boundary")


def test_criterion_09_determinism(fixture_config, pipeline_out, tmp_path):
    manifests = {"threads=1 (first run)": (pipeline_out / "manifest.json").read_bytes()}
    for label, threads in (("threads=1 (second run)", 1), ("threads=8", 8)):
        out = tmp_path / label.split()[0].replace("=", "")
        run_pipeline(load_config(fixture_config, {"output_dir": str(out), "threads": threads}, environ={}))
        manifests[label] = (out / "manifest.json").read_bytes()
    same = len(set(manifests.values())) == 1
    gate(9, same, f"manifests byte-identical across {', '.join(manifests)}: {same}")


def test_criterion_10_full_data(tmp_path):
    cfg = load_config(REAL_CONFIG, {"output_dir": str(tmp_path)}, environ={})
    if not (cfg.trade_path.is_file() and cfg.covariates_path.is_file()):
        ACCEPTANCE_LINES.append("criterion 10: SKIP  full trade data not present (optional, data-dependent)")
        pytest.skip(f"full trade data not found at {cfg.trade_path}")
    # loaders surface malformed rows early instead of inside the pipeline
    load_covariates_csv(cfg.covariates_path)
    if load_trade_csv(cfg.trade_path).errors:
        warnings.warn("trade file has malformed rows; they are skipped")
    run_pipeline(cfg)
    summ = art.read_json(tmp_path / "direction_summary.json")
    t1 = art.read_csv(tmp_path / "table1.csv")
    m1 = t1[t1["model"].astype(str) == "1"].set_index("term")["estimate"]
    cubic = art.read_json(tmp_path / "cubic_minimum.json")["eci"]
    checks = {
        "Omega>0 share": abs(summ["share_positive_omega"] - 0.928) <= 0.02,
        "mean Omega": abs(summ["mean_omega"] - 0.77) <= 0.10,
        "mean Pi": abs(summ["mean_pi"] + 0.35) <= 0.10,
        "model 1 signs": m1["eci"] < 0 < m1["eci_sq"],
        "cubic minimum": bool(cubic.get("interior")) and abs(cubic["argmin"] - 1.01) <= 0.3,
    }
    gate(10, all(checks.values()), ", ".join(f"{k}: {'ok' if v else 'off'}" for k, v in checks.items()))
