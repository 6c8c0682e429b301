"""Hot inner loops.

Every kernel exists twice: a vectorized numpy version (``np_*``) and an
explicit-loop version compiled with ``numba.njit`` (``nb_*``). The public
names bind to the numba versions when numba imports and the environment
variable ``FAIRSELECT_DISABLE_NUMBA`` is unset (or ``0``); otherwise they bind
to the numpy versions. Both versions must agree to rounding error; the test
suite checks that.
"""

import os

import numpy as np

try:
    import numba
except ImportError:  # pragma: no cover - numba is an optional extra
    numba = None


def _numba_requested() -> bool:
    flag = os.environ.get("FAIRSELECT_DISABLE_NUMBA", "").strip().lower()
    return flag in ("", "0", "false", "no")


HAVE_NUMBA = numba is not None
USE_NUMBA = HAVE_NUMBA and _numba_requested()

# relative slack under which two objective values are treated as a tie
TIE_TOL = 1e-12


# --------------------------------------------------------------------------
# numpy versions
# --------------------------------------------------------------------------

def np_central_cut(center, factor, a):
    """Central cut on the ellipsoid {center + factor @ v : |v| <= 1}.

    Returns ``(new_center, new_factor, norm)`` with ``norm = |factor.T @ a|``;
    the new ellipsoid is the minimum-volume one containing the half
    {p : a.(p - center) <= 0}. Working on the factor J (shape = J J^T) keeps
    the shape positive semidefinite by construction. When ``norm <= 0`` the
    inputs are returned unchanged so the caller can raise.
    """
    ja = factor.T @ a
    norm = float(np.sqrt(ja @ ja))
    if not norm > 0.0:
        return center, factor, norm
    u = ja / norm
    ju = factor @ u
    d = center.shape[0]
    if d == 1:
        return center - 0.5 * ju, factor * 0.5, norm
    beta = 1.0 - np.sqrt((d - 1.0) / (d + 1.0))
    scale = d / np.sqrt(d * d - 1.0)
    new_center = center - ju / (d + 1.0)
    new_factor = scale * (factor - beta * np.outer(ju, u))
    return new_center, new_factor, norm


def np_composite_argmax(fvals, gvals, coeffs):
    """First index maximizing ``fvals + gvals @ coeffs``; returns (index, value).

    Values within ``TIE_TOL * (1 + |max|)`` of the maximum count as ties so the
    lowest index wins regardless of summation order.
    """
    vals = fvals + gvals @ coeffs
    best = vals.max()
    idx = int(np.argmax(vals >= best - TIE_TOL * (1.0 + abs(best))))
    return idx, float(vals[idx])


def np_pivot(tableau, row, col):
    """Gauss-Jordan pivot of ``tableau`` on (row, col), in place."""
    tableau[row] /= tableau[row, col]
    factors = tableau[:, col].copy()
    factors[row] = 0.0
    tableau -= np.outer(factors, tableau[row])
    tableau[:, col] = 0.0
    tableau[row, col] = 1.0


def np_mnl_best_prefix(revenue, nu, nu0):
    """Best prefix of items already sorted by adjusted revenue.

    Returns ``(length, value)``; length 0 is the empty assortment with value 0.
    """
    num = np.cumsum(revenue * nu)
    den = nu0 + np.cumsum(nu)
    vals = np.concatenate(([0.0], num / den))
    best = vals.max()
    length = int(np.argmax(vals >= best - TIE_TOL * (1.0 + abs(best))))
    return length, float(vals[length])


def np_coverage_gains(cover, weights, covered):
    """Weight newly covered by each item: ``gains[i] = w . (cover[i] & ~covered)``."""
    fresh = cover & ~covered
    return fresh.astype(np.float64) @ weights


# --------------------------------------------------------------------------
# numba versions
# --------------------------------------------------------------------------

def _nb_central_cut(center, factor, a):
    d = center.shape[0]
    ja = np.zeros(d)
    for j in range(d):
        acc = 0.0
        for i in range(d):
            acc += factor[i, j] * a[i]
        ja[j] = acc
    sq = 0.0
    for j in range(d):
        sq += ja[j] * ja[j]
    norm = np.sqrt(sq)
    if not norm > 0.0:
        return center.copy(), factor.copy(), norm
    u = ja / norm
    ju = np.zeros(d)
    for i in range(d):
        acc = 0.0
        for j in range(d):
            acc += factor[i, j] * u[j]
        ju[i] = acc
    if d == 1:
        return center - 0.5 * ju, factor * 0.5, norm
    beta = 1.0 - np.sqrt((d - 1.0) / (d + 1.0))
    scale = d / np.sqrt(d * d - 1.0)
    step = 1.0 / (d + 1.0)
    new_center = np.empty(d)
    new_factor = np.empty((d, d))
    for i in range(d):
        new_center[i] = center[i] - step * ju[i]
        for j in range(d):
            new_factor[i, j] = scale * (factor[i, j] - beta * ju[i] * u[j])
    return new_center, new_factor, norm


def _nb_composite_argmax(fvals, gvals, coeffs):
    n, m = gvals.shape
    vals = np.empty(n)
    best = -np.inf
    for s in range(n):
        v = fvals[s]
        for t in range(m):
            v += gvals[s, t] * coeffs[t]
        vals[s] = v
        if v > best:
            best = v
    cut = best - TIE_TOL * (1.0 + abs(best))
    for s in range(n):
        if vals[s] >= cut:
            return s, vals[s]
    return 0, vals[0]


def _nb_pivot(tableau, row, col):
    rows, cols = tableau.shape
    p = tableau[row, col]
    for j in range(cols):
        tableau[row, j] /= p
    for i in range(rows):
        if i == row:
            continue
        f = tableau[i, col]
        if f != 0.0:
            for j in range(cols):
                tableau[i, j] -= f * tableau[row, j]
        tableau[i, col] = 0.0
    tableau[row, col] = 1.0


def _nb_mnl_best_prefix(revenue, nu, nu0):
    n = revenue.shape[0]
    vals = np.zeros(n + 1)
    num = 0.0
    den = nu0
    best = 0.0
    for i in range(n):
        num += revenue[i] * nu[i]
        den += nu[i]
        vals[i + 1] = num / den
        if vals[i + 1] > best:
            best = vals[i + 1]
    cut = best - TIE_TOL * (1.0 + abs(best))
    for i in range(n + 1):
        if vals[i] >= cut:
            return i, vals[i]
    return 0, 0.0


def _nb_coverage_gains(cover, weights, covered):
    n, e = cover.shape
    gains = np.zeros(n)
    for i in range(n):
        s = 0.0
        for k in range(e):
            if cover[i, k] and not covered[k]:
                s += weights[k]
        gains[i] = s
    return gains


if HAVE_NUMBA:
    _jit = numba.njit(cache=True)
    nb_central_cut = _jit(_nb_central_cut)
    nb_composite_argmax = _jit(_nb_composite_argmax)
    nb_pivot = _jit(_nb_pivot)
    nb_mnl_best_prefix = _jit(_nb_mnl_best_prefix)
    nb_coverage_gains = _jit(_nb_coverage_gains)
else:  # pragma: no cover
    nb_central_cut = _nb_central_cut
    nb_composite_argmax = _nb_composite_argmax
    nb_pivot = _nb_pivot
    nb_mnl_best_prefix = _nb_mnl_best_prefix
    nb_coverage_gains = _nb_coverage_gains


if USE_NUMBA:
    central_cut = nb_central_cut
    composite_argmax = nb_composite_argmax
    pivot = nb_pivot
    mnl_best_prefix = nb_mnl_best_prefix
    coverage_gains = nb_coverage_gains
else:
    central_cut = np_central_cut
    composite_argmax = np_composite_argmax
    pivot = np_pivot
    mnl_best_prefix = np_mnl_best_prefix
    coverage_gains = np_coverage_gains


def backend() -> str:
    return "numba" if USE_NUMBA else "numpy"
