import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays
from numpy.testing import assert_allclose, assert_array_equal

import oracles
from divpath.complexity import advantage_from_rca
from divpath.errors import DegenerateMatrixError, InsufficientDataError
from divpath.product_space import (compute_density, compute_proximity, density_from, entry_probability_curve,
                                   pooled_proximity, proximity_from_m)
from divpath.synthetic import random_advantage


def adv_of(M, year=2000, countries=None):
    M = np.asarray(M, dtype=float)
    countries = countries or [f"c{i}" for i in range(M.shape[0])]
    return advantage_from_rca(2.0 * M, countries, [f"{j:04d}" for j in range(M.shape[1])], year)


binary = arrays(np.uint8, st.tuples(st.integers(2, 8), st.integers(2, 8)), elements=st.integers(0, 1))


# -- proximity ----------------------------------------------------------------------

def test_identical_and_disjoint_exporters():
    phi = proximity_from_m([[1, 1, 0], [1, 1, 0], [0, 0, 1]])
    assert phi[0, 1] == 1.0
    assert phi[0, 2] == 0.0


def test_one_shared_exporter():
    # k = 2 and k' = 3 with one country in common
    M = np.array([[1, 1], [1, 0], [0, 1], [0, 1]])
    assert proximity_from_m(M)[0, 1] == pytest.approx(1 / 3, abs=1e-15)


def test_zero_ubiquity_raises():
    with pytest.raises(DegenerateMatrixError):
        proximity_from_m([[1, 0], [1, 0]])


@settings(max_examples=60, deadline=None)
@given(binary)
def test_proximity_matches_oracle_and_invariants(M):
    if (M.sum(axis=0) == 0).any():
        return
    phi = proximity_from_m(M)
    assert_allclose(phi, oracles.proximity(M), atol=1e-15)
    assert_array_equal(phi, phi.T)
    assert phi.min() >= 0 and phi.max() <= 1
    assert_array_equal(np.diag(phi), 1.0)
    perm = np.random.default_rng(int(M.sum())).permutation(M.shape[1])
    assert_allclose(proximity_from_m(M[:, perm]), phi[np.ix_(perm, perm)], atol=0)


def test_same_m_two_years_same_proximity():
    adv = random_advantage(10, 20, seed=2)
    other = advantage_from_rca(adv.R, adv.countries, adv.products, adv.year + 1)
    assert_array_equal(compute_proximity(adv).phi, compute_proximity(other).phi)


def test_edge_list_is_upper_triangle():
    prox = compute_proximity(adv_of([[1, 1, 0], [1, 0, 1], [0, 1, 1]]))
    e = prox.edges()
    assert len(e) == 3
    assert (e["p"] < e["p2"]).all()
    assert_allclose(e["phi"], 0.5)


def test_pooled_proximity_single_year_matches():
    adv = random_advantage(8, 12, seed=4)
    assert_allclose(pooled_proximity([adv]).phi, compute_proximity(adv).phi)
    with pytest.raises(ValueError):
        pooled_proximity([adv, random_advantage(8, 13, seed=4)])


# -- density ------------------------------------------------------------------------

def test_full_and_empty_basket():
    M = np.array([[1, 1, 1, 1], [0, 0, 0, 0], [1, 0, 1, 0], [0, 1, 1, 0]])
    phi = proximity_from_m(M[[0, 2, 3]])
    om = density_from(M, phi)
    assert_allclose(om[0], 1.0)
    assert_allclose(om[1], 0.0)


def test_three_product_hand_value():
    phi = np.array([[1.0, 0.5, 0.2], [0.5, 1.0, 0.4], [0.2, 0.4, 1.0]])
    M = np.array([[0, 1, 0], [1, 0, 1]])
    om = density_from(M, phi)
    assert om[0, 0] == pytest.approx(0.5 / 0.7)
    assert om[0, 2] == pytest.approx(0.4 / 0.6)
    assert om[1, 1] == pytest.approx(0.9 / 0.9)
    assert_allclose(om, oracles.density(M, phi), atol=1e-15)


def test_isolated_product_raises():
    phi = np.array([[1.0, 0.0], [0.0, 1.0]])
    with pytest.raises(DegenerateMatrixError):
        density_from([[1, 0]], phi)


def test_density_product_index_must_match():
    a = random_advantage(6, 10, seed=1)
    b = random_advantage(6, 11, seed=1)
    with pytest.raises(ValueError):
        compute_density(a, compute_proximity(b))


@settings(max_examples=60, deadline=None)
@given(binary, st.data())
def test_density_bounded_and_monotone_in_basket(M, data):
    if (M.sum(axis=0) == 0).any():
        return
    phi = proximity_from_m(M)
    off = phi - np.eye(len(phi))
    if (off.sum(axis=0) == 0).any():
        return
    om = density_from(M, phi)
    assert_allclose(om, oracles.density(M, phi), atol=1e-12)
    assert om.min() >= -1e-15 and om.max() <= 1 + 1e-15
    c = data.draw(st.integers(0, M.shape[0] - 1))
    p = data.draw(st.integers(0, M.shape[1] - 1))
    bigger = M.copy()
    bigger[c, p] = 1
    assert np.all(density_from(bigger, phi)[c] >= om[c] - 1e-15)


# -- entry curve -------------------------------------------------------------------

def two_year_world(entry_prob, n_c=300, n_p=60, seed=0, horizon=4):
    rng = np.random.default_rng(seed)
    latent = rng.random(n_c)[:, None] + rng.random(n_p)[None, :]
    M0 = (latent + 0.6 * rng.random((n_c, n_p)) > 1.3).astype(np.uint8)
    M0[:, M0.sum(axis=0) == 0] = 1
    phi = proximity_from_m(M0)
    om = density_from(M0, phi)
    enter = (M0 == 0) & (rng.random(M0.shape) < entry_prob(om))
    M1 = (M0 | enter).astype(np.uint8)
    cs = [f"c{i}" for i in range(n_c)]
    advs = {2000: adv_of(M0, 2000, cs), 2000 + horizon: adv_of(M1, 2000 + horizon, cs)}
    return advs, om, M0


def test_entries_only_above_half_density():
    advs, om, _ = two_year_world(lambda om: np.where(om > 0.5, 0.6, 0.0))
    curve = entry_probability_curve(advs, horizon=4, n_bins=20)
    below = curve[curve["bin_hi"] <= 0.5]
    assert (below["n_entries"] == 0).all()
    assert (below.loc[below["n_pairs"] > 0, "probability"] == 0).all()
    assert curve["n_entries"].sum() > 0


def test_curve_within_binomial_band():
    advs, om, M0 = two_year_world(lambda om: 0.1 + 0.8 * om, seed=5)
    curve = entry_probability_curve(advs, horizon=4, n_bins=10)
    outside = M0 == 0
    x = om[outside]
    edges = np.linspace(0, 1, 11)
    idx = np.clip(np.searchsorted(edges, x, side="right") - 1, 0, 9)
    checked = 0
    for b in range(10):
        sel = idx == b
        n = int(sel.sum())
        assert curve.loc[b, "n_pairs"] == n
        if n < 30:
            continue
        p_bar = float(np.mean(0.1 + 0.8 * x[sel]))
        band = 2.576 * np.sqrt(p_bar * (1 - p_bar) / n)
        assert abs(curve.loc[b, "probability"] - p_bar) <= band + 1e-12
        checked += 1
    assert checked >= 3


def test_empty_bins_are_missing_not_zero():
    advs, _, _ = two_year_world(lambda om: 0.3 + 0 * om, n_c=30, n_p=12)
    curve = entry_probability_curve(advs, horizon=4, n_bins=200)
    empty = curve["n_pairs"] == 0
    assert empty.any()
    assert curve.loc[empty, "probability"].isna().all()


def test_max_proximity_binning_runs():
    advs, _, _ = two_year_world(lambda om: om, n_c=40, n_p=15)
    curve = entry_probability_curve(advs, horizon=4, binning="max_proximity", n_bins=5)
    assert curve["n_pairs"].sum() == (advs[2000].M == 0).sum()


def test_horizon_beyond_data():
    advs, _, _ = two_year_world(lambda om: om, n_c=20, n_p=10)
    with pytest.raises(InsufficientDataError):
        entry_probability_curve(advs, horizon=7)
    with pytest.raises(ValueError):
        entry_probability_curve(advs, binning="rank")
