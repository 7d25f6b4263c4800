import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays
from numpy.testing import assert_allclose, assert_array_equal

import oracles
from divpath.complexity import (advantage_from_rca, compute_eci_pci, drop_degenerate, rca_matrix, zscore)
from divpath.errors import ConvergenceError, DegenerateMatrixError, InsufficientDataError
from divpath.synthetic import random_advantage


def adv_from_m(M, year=2000):
    M = np.asarray(M, dtype=float)
    return advantage_from_rca(M * 2.0, [f"c{i}" for i in range(M.shape[0])],
                              [f"p{j:03d}" for j in range(M.shape[1])], year)


# -- RCA ---------------------------------------------------------------------------

def test_single_cell():
    r = rca_matrix(np.array([[7.0]]))
    assert r[0, 0] == 1.0
    assert advantage_from_rca(r, ["A"], ["0001"], 2000).M[0, 0] == 1


def test_hand_value():
    r = rca_matrix(np.array([[10.0, 0.0], [10.0, 10.0]]))
    assert r[0, 0] == pytest.approx((10 / 10) / (20 / 30), abs=1e-15)
    assert r[0, 0] == pytest.approx(1.5)


def test_matches_scalar_oracle(rng):
    x = rng.lognormal(size=(7, 11)) * (rng.random((7, 11)) < 0.7)
    x[3] = 0.0
    x[:, 4] = 0.0
    r = rca_matrix(x)
    assert_allclose(r, oracles.rca(x), rtol=0, atol=1e-12)
    assert np.all(r[3] == 0) and np.all(r[:, 4] == 0)


def test_scale_free(rng):
    x = rng.lognormal(size=(5, 8))
    assert_allclose(rca_matrix(1000 * x), rca_matrix(x), rtol=0, atol=1e-12)


def test_all_zero_matrix():
    with pytest.raises(InsufficientDataError):
        rca_matrix(np.zeros((2, 2)))


def test_threshold_tie_counts_as_advantage():
    adv = advantage_from_rca(np.array([[1.0, 0.999999]]), ["A"], ["0001", "0002"], 2000)
    assert_array_equal(adv.M, [[1, 0]])


@settings(max_examples=50, deadline=None)
@given(arrays(np.float64, (6, 9), elements=st.floats(0, 1e6)), st.floats(0.5, 1.5))
def test_m_and_degree_invariants(x, thr):
    if x.sum() <= 0:
        return
    adv = advantage_from_rca(rca_matrix(x), list("abcdef"), [str(i) for i in range(9)], 1, thr)
    assert set(np.unique(adv.M)) <= {0, 1}
    assert_array_equal(adv.M, (adv.R >= thr).astype(np.uint8))
    assert_array_equal(adv.k_c, adv.M.sum(axis=1))
    assert_array_equal(adv.k_p, adv.M.sum(axis=0))


# -- degenerate rows/columns ------------------------------------------------------------

def test_drop_zero_column():
    adv = adv_from_m([[1, 0, 1], [0, 0, 1], [1, 0, 0]])
    out = drop_degenerate(adv)
    assert out.products == ("p000", "p002")
    assert out.countries == adv.countries
    assert out.removed_products == ("p001",)


def test_drop_is_identity_without_zeros():
    adv = adv_from_m([[1, 0], [0, 1]])
    assert drop_degenerate(adv) is adv


def test_drop_everything_raises():
    with pytest.raises(DegenerateMatrixError):
        drop_degenerate(adv_from_m(np.zeros((2, 3))))


def brute_force_fixed_point(M):
    rows = list(range(M.shape[0]))
    cols = list(range(M.shape[1]))
    changed = True
    while changed:
        changed = False
        for c in list(rows):
            if sum(M[c, p] for p in cols) == 0:
                rows.remove(c)
                changed = True
        for p in list(cols):
            if sum(M[c, p] for c in rows) == 0:
                cols.remove(p)
                changed = True
    return rows, cols


@settings(max_examples=60, deadline=None)
@given(arrays(np.uint8, (7, 6), elements=st.integers(0, 1)))
def test_drop_matches_fixed_point_oracle(M):
    if M.sum() == 0:
        return
    out = drop_degenerate(adv_from_m(M))
    rows, cols = brute_force_fixed_point(M)
    assert out.countries == tuple(f"c{i}" for i in rows)
    assert out.products == tuple(f"p{j:03d}" for j in cols)
    assert (out.k_c > 0).all() and (out.k_p > 0).all()


# -- ECI / PCI ----------------------------------------------------------------------------

def test_uniform_matrix_is_degenerate():
    with pytest.raises(DegenerateMatrixError):
        compute_eci_pci(adv_from_m(np.ones((4, 5))))


def test_nested_matrix_ordering():
    M = np.array([[1, 1, 1], [1, 1, 0], [1, 0, 0]])
    sc = compute_eci_pci(adv_from_m(M))
    assert sc.eci[0] > sc.eci[1] > sc.eci[2]
    assert_allclose(sc.eci, oracles.eci(M), atol=1e-9)
    assert_allclose(sc.pci, oracles.pci_from_eci(M, oracles.eci(M)), atol=1e-9)


def test_zero_row_must_be_dropped_first():
    with pytest.raises(DegenerateMatrixError, match="drop_degenerate"):
        compute_eci_pci(adv_from_m([[1, 1], [0, 0], [1, 0]]))


@pytest.mark.parametrize("seed", range(5))
def test_eigenvector_matches_dense_oracle(seed):
    adv = random_advantage(12, 25, seed=seed)
    sc = compute_eci_pci(adv)
    assert_allclose(sc.eci, oracles.eci(adv.M), atol=1e-8)
    assert_allclose(sc.pci, oracles.pci_from_eci(adv.M, sc.eci), atol=1e-10)


@pytest.mark.parametrize("method", ["eigenvector", "reflections"])
def test_zscored_and_oriented(method):
    adv = random_advantage(20, 50, seed=3)
    sc = compute_eci_pci(adv, method=method)
    for v in (sc.eci, sc.pci):
        assert abs(v.mean()) < 1e-9
        assert abs(v.std() - 1.0) < 1e-9
    assert np.corrcoef(sc.eci, adv.k_c)[0, 1] >= 0


def test_country_permutation_permutes_eci(rng):
    adv = random_advantage(15, 30, seed=7)
    perm = rng.permutation(15)
    shuffled = advantage_from_rca(adv.R[perm], np.array(adv.countries)[perm], adv.products, adv.year)
    assert_allclose(compute_eci_pci(shuffled).eci, compute_eci_pci(adv).eci[perm], atol=1e-10)


def test_eci_invariant_to_export_rescaling(rng):
    x = rng.lognormal(0, 1.5, size=(15, 40))
    names = ([f"c{i}" for i in range(15)], [f"{j:04d}" for j in range(40)])
    a = drop_degenerate(advantage_from_rca(rca_matrix(x), *names, 1))
    b = drop_degenerate(advantage_from_rca(rca_matrix(1e3 * x), *names, 1))
    assert_allclose(compute_eci_pci(a).eci, compute_eci_pci(b).eci, atol=1e-9)


def test_reflections_track_eigenvector():
    adv = random_advantage(20, 50, seed=11)
    eig = compute_eci_pci(adv)
    refl = compute_eci_pci(adv, method="reflections", max_iter=25, strict=False)
    assert abs(np.corrcoef(eig.eci, refl.eci)[0, 1]) >= 0.999
    assert refl.iterations <= 25


def test_reflections_strict_nonconvergence():
    adv = random_advantage(20, 50, seed=11)
    with pytest.raises(ConvergenceError):
        compute_eci_pci(adv, method="reflections", max_iter=1, tol=1e-15)
    loose = compute_eci_pci(adv, method="reflections", max_iter=1, tol=1e-15, strict=False)
    assert not loose.converged


def test_unknown_method():
    with pytest.raises(ValueError):
        compute_eci_pci(random_advantage(5, 8), method="power")


def test_zscore_constant_vector():
    with pytest.raises(DegenerateMatrixError):
        zscore(np.ones(4))
