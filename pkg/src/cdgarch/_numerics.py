"""Compiled numerical kernels shared by the simulators and the mean solvers.

Delay kernels are passed around in packed form ``(kind, par, tab)``:

* ``kind == 0``: absent kernel (identically zero);
* ``kind == 1``: ``w * (exp(lam * u) - exp(-lam * r))`` on ``[-r, 0]`` with
  ``par = (w, lam, r, exp(-lam * r))``;
* ``kind == 2``: linear interpolation of ``tab`` on the uniform grid
  ``-r + i * du`` with ``par = (r, du, 0, 0)``.

Delay integrals ``int f(s - t) X(s) ds`` are computed by product integration:
``X`` is the piecewise-linear interpolant of its knots and the kernel is
integrated exactly against each hat function.
"""

from __future__ import annotations

import math

import numpy as np
from numba import njit

# ---------------------------------------------------------------------------
# kernel primitives


@njit(cache=True)
def _phi0(x):
    # (e^x - 1) / x
    if abs(x) < 1e-2:
        return 1.0 + x * (0.5 + x * (1.0 / 6 + x * (1.0 / 24 + x / 120.0)))
    return math.expm1(x) / x


@njit(cache=True)
def _phi2(x):
    # ((x - 1) e^x + 1) / x^2
    if abs(x) < 1e-2:
        return 0.5 + x * (1.0 / 3 + x * (1.0 / 8 + x * (1.0 / 30 + x / 144.0)))
    return ((x - 1.0) * math.exp(x) + 1.0) / (x * x)


@njit(cache=True)
def _exp_moments(lam, a, d):
    """``int_a^{a+d} e^{lam u} du`` and ``int_a^{a+d} e^{lam u} (u - a) du``."""
    ea = math.exp(lam * a)
    x = lam * d
    return ea * d * _phi0(x), ea * d * d * _phi2(x)


@njit(cache=True)
def kernel_value(kind, par, tab, u):
    if kind == 0:
        return 0.0
    if kind == 1:
        r = par[2]
        if u < -r or u > 0.0:
            return 0.0
        return par[0] * (math.exp(par[1] * u) - par[3])
    r = par[0]
    du = par[1]
    if u < -r or u > 0.0:
        return 0.0
    pos = (u + r) / du
    i = int(math.floor(pos))
    m = tab.shape[0]
    if i >= m - 1:
        return tab[m - 1]
    if i < 0:
        i = 0
    frac = pos - i
    return tab[i] + (tab[i + 1] - tab[i]) * frac


@njit(cache=True)
def cell_weights(kind, par, tab, u0, u1):
    """Hat-function weights ``(W0, W1)`` of ``f`` on the cell ``[u0, u1]``.

    ``W0 = int f(u) (u1 - u) / l du`` and ``W1 = int f(u) (u - u0) / l du``
    with ``l = u1 - u0 > 0``; the kernel is zero outside its support.
    """
    length = u1 - u0
    if kind == 0 or length <= 0.0:
        return 0.0, 0.0
    if kind == 1:
        w = par[0]
        lam = par[1]
        r = par[2]
        c = par[3]
        a = max(u0, -r)
        b = min(u1, 0.0)
        if b <= a:
            return 0.0, 0.0
        d = b - a
        i0, i1 = _exp_moments(lam, a, d)
        # moments taken about u0 instead of a
        e1 = i1 + (a - u0) * i0
        c0 = d
        c1 = (a - u0) * d + 0.5 * d * d
        tot = w * (i0 - c * c0)
        w1 = w * (e1 - c * c1) / length
        return tot - w1, w1
    r = par[0]
    du = par[1]
    m = tab.shape[0]
    a = max(u0, -r)
    b = min(u1, 0.0)
    if b <= a:
        return 0.0, 0.0
    tot = 0.0
    num1 = 0.0
    i = int(math.floor((a + r) / du))
    if i > m - 2:
        i = m - 2
    if i < 0:
        i = 0
    sa = a
    while sa < b and i < m - 1:
        node_hi = -r + (i + 1) * du
        if i == m - 2:
            node_hi = 0.0
        sb = min(b, node_hi)
        if sb > sa:
            fa = kernel_value(kind, par, tab, sa)
            fb = kernel_value(kind, par, tab, sb)
            d = sb - sa
            tot += 0.5 * d * (fa + fb)
            num1 += (sa - u0) * 0.5 * d * (fa + fb) + d * d * (fa + 2.0 * fb) / 6.0
        sa = sb
        i += 1
    w1 = num1 / length
    return tot - w1, w1


@njit(cache=True)
def grid_weights(kind, par, tab, step, nlag):
    """Weights ``W_k`` with ``int f(u) x(t + u) du = sum_k W_k x(t - k*step)``

    for ``x`` piecewise linear on the grid ``t - k*step``, ``k = 0..nlag``.
    """
    out = np.zeros(nlag + 1)
    for k in range(nlag):
        u1 = -k * step
        u0 = -(k + 1) * step
        w0, w1 = cell_weights(kind, par, tab, u0, u1)
        out[k] += w1
        out[k + 1] += w0
    return out


# ---------------------------------------------------------------------------
# delay integral over a knot history


@njit(cache=True)
def _interp_right(tk, xk, n, s):
    """Right-continuous linear interpolation of the first ``n`` knots."""
    i = np.searchsorted(tk[:n], s, side="right") - 1
    if i < 0:
        return xk[0]
    if i >= n - 1:
        return xk[n - 1]
    t0 = tk[i]
    t1 = tk[i + 1]
    if t1 <= t0:
        return xk[i + 1]
    return xk[i] + (xk[i + 1] - xk[i]) * (s - t0) / (t1 - t0)


@njit(cache=True)
def delay_integral_loop(kind, par, tab, p, tk, xk, n, t, xs):
    """``int_{t-p}^t f(s - t) X(s) ds`` by a direct pass over the knots.

    ``X`` is given by the knots ``tk[:n], xk[:n]`` and, when ``t`` is past
    the last knot, by the straight segment from the last knot to ``(t, xs)``.
    """
    if kind == 0 or p <= 0.0:
        return 0.0
    a = t - p
    tl = tk[n - 1]
    xl = xk[n - 1]
    i = np.searchsorted(tk[:n], a, side="right") - 1
    if i < 0:
        i = 0
        a = tk[0]
    if i >= n - 1:
        if t > tl:
            x_prev = xl + (xs - xl) * (a - tl) / (t - tl)
        else:
            x_prev = xl
    else:
        x_prev = _interp_right(tk, xk, n, a)
    s_prev = a
    acc = 0.0
    for j in range(i + 1, n):
        s1 = tk[j]
        x1 = xk[j]
        if s1 > s_prev:
            w0, w1 = cell_weights(kind, par, tab, s_prev - t, s1 - t)
            acc += w0 * x_prev + w1 * x1
            s_prev = s1
        x_prev = x1
    if t > s_prev:
        w0, w1 = cell_weights(kind, par, tab, s_prev - t, 0.0)
        acc += w0 * x_prev + w1 * xs
    return acc


@njit(cache=True)
def _exp_window(par, tk, xk, ek, ck, n, p, t, xs):
    """Exponential-kernel delay integral from discounted running sums.

    ``ek[k] = int_{tk[0]}^{tk[k]} e^{lam (s - tk[k])} X(s) ds`` and
    ``ck[k] = int_{tk[0]}^{tk[k]} X(s) ds``.
    """
    w = par[0]
    lam = par[1]
    c = par[3]
    tl = tk[n - 1]
    xl = xk[n - 1]
    dt = t - tl
    # integral over [tk[0], t]
    e_tot = ek[n - 1] * math.exp(-lam * dt)
    c_tot = ck[n - 1]
    if dt > 0.0:
        i0, i1 = _exp_moments(lam, -dt, dt)
        e_tot += xl * (i0 - i1 / dt) + xs * i1 / dt
        c_tot += 0.5 * (xl + xs) * dt
    # integral over [tk[0], t - p]
    a = t - p
    i = np.searchsorted(tk[:n], a, side="right") - 1
    if i < 0:
        return w * (e_tot - c * c_tot)
    si = tk[i]
    xi = xk[i]
    if i >= n - 1:
        xa = xl + (xs - xl) * (a - tl) / dt if dt > 0.0 else xl
    else:
        t1 = tk[i + 1]
        xa = xi + (xk[i + 1] - xi) * (a - si) / (t1 - si) if t1 > si else xk[i + 1]
    e_head = ek[i] * math.exp(lam * (si - t))
    c_head = ck[i]
    d = a - si
    if d > 0.0:
        i0, i1 = _exp_moments(lam, si - t, d)
        e_head += xi * (i0 - i1 / d) + xa * i1 / d
        c_head += 0.5 * (xi + xa) * d
    return w * ((e_tot - e_head) - c * (c_tot - c_head))


@njit(cache=True)
def _push_knot(kind, par, tk, xk, ek, ck, n, t, x):
    """Append knot ``(t, x)`` at index ``n`` and update the running sums."""
    tk[n] = t
    xk[n] = x
    if n == 0:
        ek[0] = 0.0
        ck[0] = 0.0
        return
    d = t - tk[n - 1]
    if d <= 0.0:
        ek[n] = ek[n - 1]
        ck[n] = ck[n - 1]
        return
    x0 = xk[n - 1]
    ck[n] = ck[n - 1] + 0.5 * (x0 + x) * d
    if kind == 1:
        lam = par[1]
        i0, i1 = _exp_moments(lam, -d, d)
        ek[n] = ek[n - 1] * math.exp(-lam * d) + x0 * (i0 - i1 / d) + x * i1 / d
    else:
        ek[n] = 0.0


@njit(cache=True)
def _nu_sum(kind, par, tab, q, jt, jz, jxpre, lo, hi, t):
    acc = 0.0
    if kind == 0:
        return acc
    for j in range(lo, hi):
        if jt[j] > t - q and jt[j] <= t:
            acc += kernel_value(kind, par, tab, jt[j] - t) * jxpre[j] * jz[j] * jz[j]
    return acc


@njit(cache=True)
def _drift(eta, c_mu, mk, mpar, mtab, p, nk, npar, ntab, q,
           tk, xk, ek, ck, n, jt, jz, jxpre, lo, hi, t, xs):
    val = eta - c_mu * xs
    if mk == 1:
        val += _exp_window(mpar, tk, xk, ek, ck, n, p, t, xs)
    elif mk == 2:
        val += delay_integral_loop(mk, mpar, mtab, p, tk, xk, n, t, xs)
    val += _nu_sum(nk, npar, ntab, q, jt, jz, jxpre, lo, hi, t)
    return val


# ---------------------------------------------------------------------------
# event-driven simulation


@njit(cache=True)
def event_core(eta, c_mu, c_nu, mk, mpar, mtab, p, nk, npar, ntab, q,
               hist_t, hist_x, jt, jz, jxpre, n_hist_jumps,
               bp, bp_jump, bp_report, h, y0, cap):
    """Integrate the variance between jumps by RK4 and apply the jump map.

    ``bp`` holds every time the integrator must land on (jump times, report
    times, kinks of the delay terms, horizon end); ``bp_jump[b]`` is the jump
    index at ``bp[b]`` or -1 and ``bp_report[b]`` flags reporting times.
    Returns the knot arrays and the recorded rows ``(t, x, y, event)``.
    """
    tk = np.empty(cap)
    xk = np.empty(cap)
    ek = np.empty(cap)
    ck = np.empty(cap)
    n = 0
    for i in range(hist_t.shape[0]):
        _push_knot(mk, mpar, tk, xk, ek, ck, n, hist_t[i], hist_x[i])
        n += 1
    nrec_cap = 2 * bp.shape[0] + 1
    rt = np.empty(nrec_cap)
    rx = np.empty(nrec_cap)
    ry = np.empty(nrec_cap)
    rev = np.zeros(nrec_cap, dtype=np.int8)
    t_cur = tk[n - 1]
    x_cur = xk[n - 1]
    y = y0
    rt[0] = t_cur
    rx[0] = x_cur
    ry[0] = y
    nrec = 1
    lo = 0
    hi = n_hist_jumps
    for b in range(bp.shape[0]):
        t_target = bp[b]
        span = t_target - t_cur
        if span > 0.0:
            m = int(math.ceil(span / h - 1e-9))
            if m < 1:
                m = 1
            hs = span / m
            for k in range(m):
                t_next = t_target if k == m - 1 else t_cur + hs
                dt = t_next - t_cur
                while lo < hi and jt[lo] <= t_cur - q:
                    lo += 1
                th = t_cur + 0.5 * dt
                k1 = _drift(eta, c_mu, mk, mpar, mtab, p, nk, npar, ntab, q,
                            tk, xk, ek, ck, n, jt, jz, jxpre, lo, hi, t_cur, x_cur)
                k2 = _drift(eta, c_mu, mk, mpar, mtab, p, nk, npar, ntab, q,
                            tk, xk, ek, ck, n, jt, jz, jxpre, lo, hi, th,
                            x_cur + 0.5 * dt * k1)
                k3 = _drift(eta, c_mu, mk, mpar, mtab, p, nk, npar, ntab, q,
                            tk, xk, ek, ck, n, jt, jz, jxpre, lo, hi, th,
                            x_cur + 0.5 * dt * k2)
                k4 = _drift(eta, c_mu, mk, mpar, mtab, p, nk, npar, ntab, q,
                            tk, xk, ek, ck, n, jt, jz, jxpre, lo, hi, t_next,
                            x_cur + dt * k3)
                x_cur = x_cur + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
                t_cur = t_next
                _push_knot(mk, mpar, tk, xk, ek, ck, n, t_cur, x_cur)
                n += 1
        j = bp_jump[b]
        if j >= 0:
            rt[nrec] = t_cur
            rx[nrec] = x_cur
            ry[nrec] = y
            nrec += 1
            jxpre[j] = x_cur
            z = jz[j]
            y = y + math.sqrt(max(x_cur, 0.0)) * z
            x_cur = x_cur + c_nu * x_cur * z * z
            _push_knot(mk, mpar, tk, xk, ek, ck, n, t_cur, x_cur)
            n += 1
            hi = j + 1
            rt[nrec] = t_cur
            rx[nrec] = x_cur
            ry[nrec] = y
            rev[nrec] = 1
            nrec += 1
        elif bp_report[b]:
            rt[nrec] = t_cur
            rx[nrec] = x_cur
            ry[nrec] = y
            nrec += 1
    return tk[:n], xk[:n], rt[:nrec], rx[:nrec], ry[:nrec], rev[:nrec]
