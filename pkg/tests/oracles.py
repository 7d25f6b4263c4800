"""Independent reference implementations written as plain scalar loops.

Nothing here imports the package; each function restates a formula directly
so tests compare two unrelated code paths.
"""
import math

import numpy as np


def rca(x):
    x = np.asarray(x, dtype=float)
    n_c, n_p = x.shape
    total = sum(x[c, p] for c in range(n_c) for p in range(n_p))
    out = np.zeros_like(x)
    for c in range(n_c):
        row = sum(x[c, q] for q in range(n_p))
        for p in range(n_p):
            col = sum(x[d, p] for d in range(n_c))
            if row > 0 and col > 0:
                out[c, p] = (x[c, p] / row) / (col / total)
    return out


def proximity(m):
    m = np.asarray(m)
    n_c, n_p = m.shape
    phi = np.eye(n_p)
    for p in range(n_p):
        for q in range(n_p):
            if p == q:
                continue
            both = sum(int(m[c, p] and m[c, q]) for c in range(n_c))
            kp = sum(int(m[c, p]) for c in range(n_c))
            kq = sum(int(m[c, q]) for c in range(n_c))
            phi[p, q] = both / max(kp, kq)
    return phi


def density(m, phi):
    m = np.asarray(m)
    n_c, n_p = m.shape
    out = np.zeros((n_c, n_p))
    for c in range(n_c):
        for p in range(n_p):
            num = sum(m[c, q] * phi[p, q] for q in range(n_p) if q != p)
            den = sum(phi[p, q] for q in range(n_p) if q != p)
            out[c, p] = num / den
    return out


def _z(v):
    v = np.asarray(v, dtype=float)
    return (v - v.mean()) / v.std()


def eci(m):
    """Second eigenvector of the row-stochastic country operator via a general eig."""
    m = np.asarray(m, dtype=float)
    kc = m.sum(axis=1)
    kp = m.sum(axis=0)
    s = np.zeros((m.shape[0], m.shape[0]))
    for c in range(m.shape[0]):
        for d in range(m.shape[0]):
            s[c, d] = sum(m[c, p] * m[d, p] / kp[p] for p in range(m.shape[1])) / kc[c]
    vals, vecs = np.linalg.eig(s)
    order = np.argsort(-vals.real)
    v = _z(vecs[:, order[1]].real)
    if np.corrcoef(v, kc)[0, 1] < 0:
        v = -v
    return v


def pci_from_eci(m, e):
    m = np.asarray(m, dtype=float)
    kp = m.sum(axis=0)
    return _z(np.array([sum(m[c, p] * e[c] for c in range(m.shape[0])) / kp[p] for p in range(m.shape[1])]))


def ks_scan(a, b):
    """Largest ECDF gap, evaluated at every pooled sample point by counting."""
    a = sorted(float(v) for v in a)
    b = sorted(float(v) for v in b)
    d = 0.0
    for x in a + b:
        ca = sum(1 for v in a if v <= x)
        cb = sum(1 for v in b if v <= x)
        d = max(d, abs(ca / len(a) - cb / len(b)))
    return d


def pearson(x, y):
    n = len(x)
    mx = math.fsum(x) / n
    my = math.fsum(y) / n
    sxy = math.fsum((a - mx) * (b - my) for a, b in zip(x, y))
    sxx = math.fsum((a - mx) ** 2 for a in x)
    syy = math.fsum((b - my) ** 2 for b in y)
    return sxy / math.sqrt(sxx * syy)


def normal_equations(X, y):
    """OLS through the normal equations; returns coef, se, r2, F (intercept in column 0)."""
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    n, k = X.shape
    xtx = X.T @ X
    beta = np.linalg.solve(xtx, X.T @ y)
    resid = y - X @ beta
    ssr = resid @ resid
    sst = ((y - y.mean()) ** 2).sum()
    r2 = 1 - ssr / sst
    sigma2 = ssr / (n - k)
    se = np.sqrt(np.diag(sigma2 * np.linalg.inv(xtx)))
    f = ((sst - ssr) / (k - 1)) / (ssr / (n - k))
    return beta, se, r2, f


def auxiliary_vif(X, j):
    """VIF of column j of X (column 0 the intercept) from one auxiliary regression."""
    X = np.asarray(X, dtype=float)
    others = np.delete(X, j, axis=1)
    target = X[:, j]
    beta = np.linalg.solve(others.T @ others, others.T @ target)
    resid = target - others @ beta
    r2 = 1 - (resid @ resid) / ((target - target.mean()) ** 2).sum()
    return 1.0 / (1.0 - r2)


def jumps_scan(R, years, baselines, backward, forward, gap, thr):
    """Set of (country_idx, product_idx, baseline_year) satisfying both windows."""
    n_y, n_c, n_p = R.shape
    found = set()
    for b in baselines:
        t0 = years.index(b)
        if t0 - backward < 0 or t0 + gap + forward > n_y:
            continue
        for c in range(n_c):
            for p in range(n_p):
                back = all(R[t, c, p] < thr for t in range(t0 - backward, t0 + 1))
                fwd = all(R[t, c, p] >= thr for t in range(t0 + gap, t0 + gap + forward))
                if back and fwd:
                    found.add((c, p, b))
    return found


def survival_scan(series, start, thr):
    n = 0
    while start + n < len(series) and series[start + n] >= thr:
        n += 1
    return n, start + n == len(series)
