"""Hot inner loops, each in a numba flavour (``*_nb``) and a numpy flavour (``*_np``).

The public names at the bottom point at whichever flavour the backend flag
selected. Both flavours are kept importable so tests can check they agree
and the benchmark can time them side by side.
"""
import numpy as np

from ._accel import USE_NUMBA, njit


# -- new-product detection -------------------------------------------------

@njit
def jump_mask_nb(rca, baselines, backward, forward, gap, threshold):
    n_years, n_c, n_p = rca.shape
    out = np.zeros((baselines.shape[0], n_c, n_p), dtype=np.bool_)
    for i in range(baselines.shape[0]):
        b = baselines[i]
        if b - backward < 0 or b + gap + forward > n_years:
            continue
        ok = out[i]
        ok[:, :] = True
        # year-major sweeps keep memory access contiguous
        for t in range(b - backward, b + 1):
            for c in range(n_c):
                for p in range(n_p):
                    if not rca[t, c, p] < threshold:
                        ok[c, p] = False
        for t in range(b + gap, b + gap + forward):
            for c in range(n_c):
                for p in range(n_p):
                    if not rca[t, c, p] >= threshold:
                        ok[c, p] = False
    return out


def jump_mask_np(rca, baselines, backward, forward, gap, threshold):
    n_years, n_c, n_p = rca.shape
    out = np.zeros((len(baselines), n_c, n_p), dtype=bool)
    for i, b in enumerate(baselines):
        if b - backward < 0 or b + gap + forward > n_years:
            continue
        low = (rca[b - backward:b + 1] < threshold).all(axis=0)
        high = (rca[b + gap:b + gap + forward] >= threshold).all(axis=0)
        out[i] = low & high
    return out


@njit
def survival_nb(rca, start, country, product, threshold):
    n_years = rca.shape[0]
    n = start.shape[0]
    length = np.zeros(n, dtype=np.int64)
    censored = np.zeros(n, dtype=np.bool_)
    for k in range(n):
        t = start[k]
        c = country[k]
        p = product[k]
        while t < n_years and rca[t, c, p] >= threshold:
            t += 1
        length[k] = t - start[k]
        censored[k] = t == n_years
    return length, censored


def survival_np(rca, start, country, product, threshold):
    n_years = rca.shape[0]
    high = rca >= threshold
    # run[t] = consecutive years at or above threshold from t onward
    run = np.zeros(rca.shape, dtype=np.int64)
    run[-1] = high[-1]
    for t in range(n_years - 2, -1, -1):
        run[t] = (run[t + 1] + 1) * high[t]
    start = np.asarray(start, dtype=np.int64)
    length = run[start, country, product]
    censored = length == (n_years - start)
    return length, censored


# -- two-sample KS -----------------------------------------------------------

@njit
def ks_statistic_nb(a_sorted, b_sorted):
    n1 = a_sorted.shape[0]
    n2 = b_sorted.shape[0]
    i = 0
    j = 0
    d = 0.0
    while i < n1 and j < n2:
        v = min(a_sorted[i], b_sorted[j])
        while i < n1 and a_sorted[i] <= v:
            i += 1
        while j < n2 and b_sorted[j] <= v:
            j += 1
        diff = abs(i / n1 - j / n2)
        if diff > d:
            d = diff
    return d


def ks_statistic_np(a_sorted, b_sorted):
    grid = np.concatenate([a_sorted, b_sorted])
    fa = np.searchsorted(a_sorted, grid, side="right") / a_sorted.shape[0]
    fb = np.searchsorted(b_sorted, grid, side="right") / b_sorted.shape[0]
    return float(np.max(np.abs(fa - fb)))


# -- product-space helpers ----------------------------------------------------

@njit
def max_basket_proximity_nb(m, phi):
    n_c, n_p = m.shape
    out = np.zeros((n_c, n_p))
    basket = np.empty(n_p, dtype=np.int64)
    for c in range(n_c):
        k = 0
        for q in range(n_p):
            if m[c, q]:
                basket[k] = q
                k += 1
        for p in range(n_p):
            best = 0.0
            for j in range(k):
                q = basket[j]
                if q != p and phi[p, q] > best:
                    best = phi[p, q]
            out[c, p] = best
    return out


def max_basket_proximity_np(m, phi):
    off = np.array(phi, dtype=float, copy=True)
    np.fill_diagonal(off, 0.0)
    out = np.zeros(m.shape)
    for c in range(m.shape[0]):
        basket = m[c].astype(bool)
        if basket.any():
            out[c] = off[:, basket].max(axis=1)
    return out


@njit
def masked_row_moments_nb(values, mask):
    n_rows, n_cols = values.shape
    count = np.zeros(n_rows, dtype=np.int64)
    mean = np.full(n_rows, np.nan)
    sd = np.full(n_rows, np.nan)
    for r in range(n_rows):
        s = 0.0
        n = 0
        for k in range(n_cols):
            if mask[r, k]:
                s += values[r, k]
                n += 1
        count[r] = n
        if n == 0:
            continue
        mu = s / n
        ss = 0.0
        for k in range(n_cols):
            if mask[r, k]:
                dev = values[r, k] - mu
                ss += dev * dev
        mean[r] = mu
        sd[r] = np.sqrt(ss / n)
    return mean, sd, count


def masked_row_moments_np(values, mask):
    mask = mask.astype(bool)
    count = mask.sum(axis=1)
    with np.errstate(invalid="ignore", divide="ignore"):
        mean = np.where(mask, values, 0.0).sum(axis=1) / count
        dev = np.where(mask, values - mean[:, None], 0.0)
        sd = np.sqrt((dev * dev).sum(axis=1) / count)
    mean[count == 0] = np.nan
    sd[count == 0] = np.nan
    return mean, sd, count.astype(np.int64)


if USE_NUMBA:
    jump_mask = jump_mask_nb
    survival = survival_nb
    ks_statistic = ks_statistic_nb
    max_basket_proximity = max_basket_proximity_nb
    masked_row_moments = masked_row_moments_nb
else:
    jump_mask = jump_mask_np
    survival = survival_np
    ks_statistic = ks_statistic_np
    max_basket_proximity = max_basket_proximity_np
    masked_row_moments = masked_row_moments_np
