"""Pure-Python (numpy) implementation of the hot kernels.

Mirrors the compiled core in ``_core.pyx``.  Reductions traverse the flat
array in lexicographic (C) order with error-tracking accumulation, so results
are reproducible across runs and independent of thread counts.  Terms in the
power sums are nonnegative, hence an overflow can only produce +inf, which
``math.fsum`` propagates.
"""

from __future__ import annotations

import math

import numpy as np

BACKEND_NAME = "python"


def _as_flat(x):
    return np.ascontiguousarray(x, dtype=np.float64).ravel()


# ---------------------------------------------------------------------------
# reductions


def comp_sum(x):
    """Compensated sum of a flat array in fixed lexicographic order."""
    x = _as_flat(x)
    if not np.all(np.isfinite(x)):
        return float(np.sum(x))
    return math.fsum(x)


def dot(x, y):
    """Compensated dot product."""
    return comp_sum(_as_flat(x) * _as_flat(y))


def abs_power_sum(absu, pexp):
    """sum_i absu_i ** p_i for absu >= 0."""
    with np.errstate(over="ignore"):
        t = np.power(_as_flat(absu), _as_flat(pexp))
    if not np.all(np.isfinite(t)):
        return math.inf
    return math.fsum(t)


def abs_power_sum_weighted(absu, pexp, w):
    """sum_i w_i * absu_i ** p_i for absu >= 0, w >= 0."""
    absu = _as_flat(absu)
    pexp = _as_flat(pexp)
    w = _as_flat(w)
    t = np.zeros_like(absu)
    m = w != 0.0
    with np.errstate(over="ignore"):
        t[m] = w[m] * np.power(absu[m], pexp[m])
    if not np.all(np.isfinite(t)):
        return math.inf
    return math.fsum(t)


def scaled_abs_power_sum(absu, pexp, inv_scale):
    """sum_i (absu_i * inv_scale) ** p_i, the Luxemburg bisection kernel."""
    with np.errstate(over="ignore"):
        t = np.power(_as_flat(absu) * inv_scale, _as_flat(pexp))
    if not np.all(np.isfinite(t)):
        return math.inf
    return math.fsum(t)


def scaled_abs_power_sum_weighted(absu, pexp, w, inv_scale):
    absu = _as_flat(absu)
    pexp = _as_flat(pexp)
    w = _as_flat(w)
    t = np.zeros_like(absu)
    m = w != 0.0
    with np.errstate(over="ignore"):
        t[m] = w[m] * np.power(absu[m] * inv_scale, pexp[m])
    if not np.all(np.isfinite(t)):
        return math.inf
    return math.fsum(t)


# ---------------------------------------------------------------------------
# elementwise maps (flat in, flat out)


def abs_power(absu, pexp):
    """absu ** p elementwise."""
    return np.power(_as_flat(absu), _as_flat(pexp))


def signed_power(u, e):
    """|u|^(e-1) * sign(u) elementwise; zero at u = 0 whenever e > 1."""
    u = _as_flat(u)
    return np.power(np.abs(u), _as_flat(e) - 1.0) * np.sign(u)


def power_density(u, e):
    """|u|^e / e elementwise."""
    u = _as_flat(u)
    return np.power(np.abs(u), _as_flat(e)) / _as_flat(e)


def typical_potential(gmag, p, q):
    """Two-branch potential: |x|^q/q for |x| <= 1, |x|^p/p + 1/q - 1/p above."""
    g = _as_flat(gmag)
    p = _as_flat(p)
    q = _as_flat(q)
    out = np.empty_like(g)
    small = g <= 1.0
    big = ~small
    out[small] = np.power(g[small], q[small]) / q[small]
    out[big] = np.power(g[big], p[big]) / p[big] + 1.0 / q[big] - 1.0 / p[big]
    return out


def typical_flux_factor(gmag, p, q):
    """Scalar factor s with flux = s * xi: |xi|^(q-2) inside, |xi|^(p-2) outside."""
    g = _as_flat(gmag)
    p = _as_flat(p)
    q = _as_flat(q)
    out = np.zeros_like(g)
    small = (g <= 1.0) & (g > 0.0)
    big = g > 1.0
    out[small] = np.power(g[small], q[small] - 2.0)
    out[big] = np.power(g[big], p[big] - 2.0)
    return out


def weighted_potential(gmag, p, q, a, b):
    """a/p |x|^p + b/q |x|^q with nonnegative coefficient fields."""
    g = _as_flat(gmag)
    p = _as_flat(p)
    q = _as_flat(q)
    a = _as_flat(a)
    b = _as_flat(b)
    out = np.zeros_like(g)
    ma = a != 0.0
    mb = b != 0.0
    out[ma] += a[ma] / p[ma] * np.power(g[ma], p[ma])
    out[mb] += b[mb] / q[mb] * np.power(g[mb], q[mb])
    return out


def weighted_flux_factor(gmag, p, q, a, b):
    g = _as_flat(gmag)
    p = _as_flat(p)
    q = _as_flat(q)
    a = _as_flat(a)
    b = _as_flat(b)
    out = np.zeros_like(g)
    pos = g > 0.0
    ma = pos & (a != 0.0)
    mb = pos & (b != 0.0)
    out[ma] += a[ma] * np.power(g[ma], p[ma] - 2.0)
    out[mb] += b[mb] * np.power(g[mb], q[mb] - 2.0)
    return out


def bcm_potential(gmag, p, q, a):
    """|x|^p + a(x) |x|^q, the coefficient-driven double-phase density."""
    g = _as_flat(gmag)
    p = _as_flat(p)
    q = _as_flat(q)
    a = _as_flat(a)
    out = np.power(g, p)
    ma = a != 0.0
    out[ma] += a[ma] * np.power(g[ma], q[ma])
    return out


def bcm_flux_factor(gmag, p, q, a):
    g = _as_flat(gmag)
    p = _as_flat(p)
    q = _as_flat(q)
    a = _as_flat(a)
    out = np.zeros_like(g)
    pos = g > 0.0
    out[pos] = p[pos] * np.power(g[pos], p[pos] - 2.0)
    ma = pos & (a != 0.0)
    out[ma] += a[ma] * q[ma] * np.power(g[ma], q[ma] - 2.0)
    return out
