"""Compiled RK4 loops for the open- and closed-loop networks.

These mirror ``dynamics.open_loop_rhs`` / ``dynamics.closed_loop_rhs``
term by term; tests pin the two paths against each other.
Status codes: 0 ok, 1 non-finite stage value (step, index reported).
"""

import numpy as np
from numba import njit

LAW_NONE = 0
LAW_TWO_HARMONIC = 1


@njit(cache=True)
def _law_factor(law, t):
    if law == LAW_TWO_HARMONIC:
        return 1.0 + np.sin(5.0 * t) / 3.0 + np.cos(3.0 * t) / 3.0
    return 1.0


@njit(cache=True)
def _matvec(M, v, out):
    n, p = M.shape
    for i in range(n):
        acc = 0.0
        for j in range(p):
            acc += M[i, j] * v[j]
        out[i] = acc


@njit(cache=True)
def _first_bad(v):
    for i in range(v.size):
        if not np.isfinite(v[i]):
            return i
    return -1


@njit(cache=True)
def open_loop_deriv(t, s, A, alpha, beta, eps, law, d, work):
    n = A.shape[0]
    f = _law_factor(law, t)
    _matvec(A, s[:n], work)
    for i in range(n):
        x = s[i]
        y = s[n + i]
        d[i] = -x - y + np.tanh(alpha * x + beta * f * work[i])
        d[n + i] = eps * (x - y)


@njit(cache=True)
def closed_loop_deriv(t, s, n, m, A, B, Am, Bm, alpha_c, alpha_r, beta, gamma, eps,
                      k, delta, k_hat, filtered, route, mp, law, exact_model, d, w1, w2, w3, w4):
    f = _law_factor(law, t)
    xs = s[:n]
    Xs = s[3 * n + 2:3 * n + 2 + m]
    xc = s[2 * n]
    yc = s[2 * n + 1]
    ao = 2 * n + 2
    Xo = 3 * n + 2
    Yo = Xo + m
    ho = Yo + m
    _matvec(A, xs, w1)
    _matvec(B, Xs, w3)
    if exact_model:
        w2[:] = w1
        w4[:] = w3
    else:
        _matvec(Am, xs, w2)
        _matvec(Bm, Xs, w4)
    if abs(xc) >= delta:
        denom = beta * xc
    elif xc >= 0.0:
        denom = beta * delta
    else:
        denom = -beta * delta
    for i in range(n):
        x = s[i]
        a = s[ao + i]
        drive_a = s[ho + i] if route else a
        d[i] = -x - s[n + i] + np.tanh(alpha_c * x + beta * w1[i] + beta * drive_a * xc)
        d[n + i] = eps * (x - s[n + i])
        j = mp[i]
        F = alpha_r * Xs[j] + beta * f * w4[j] - alpha_c * x - beta * w2[i]
        d[ao + i] = k[i] * (F / denom - a)
        if filtered:
            d[ho + i] = k_hat * (a - s[ho + i])
    d[2 * n] = -xc - yc + np.tanh(alpha_c * xc + beta * gamma * xc)
    d[2 * n + 1] = eps * (xc - yc)
    for j in range(m):
        X = Xs[j]
        Y = s[Yo + j]
        d[Xo + j] = -X - Y + np.tanh(alpha_r * X + beta * f * w3[j])
        d[Yo + j] = eps * (X - Y)


@njit(cache=True)
def integrate_open(s0, t0, dt, nsteps, stride, A, alpha, beta, eps, law):
    size = s0.size
    n = A.shape[0]
    out = np.empty((nsteps // stride + 1, size))
    s = s0.copy()
    out[0] = s
    k1 = np.empty(size)
    k2 = np.empty(size)
    k3 = np.empty(size)
    k4 = np.empty(size)
    tmp = np.empty(size)
    work = np.empty(n)
    for step in range(nsteps):
        t = t0 + step * dt
        open_loop_deriv(t, s, A, alpha, beta, eps, law, k1, work)
        bad = _first_bad(k1)
        if bad < 0:
            for q in range(size):
                tmp[q] = s[q] + 0.5 * dt * k1[q]
            open_loop_deriv(t + 0.5 * dt, tmp, A, alpha, beta, eps, law, k2, work)
            bad = _first_bad(k2)
        if bad < 0:
            for q in range(size):
                tmp[q] = s[q] + 0.5 * dt * k2[q]
            open_loop_deriv(t + 0.5 * dt, tmp, A, alpha, beta, eps, law, k3, work)
            bad = _first_bad(k3)
        if bad < 0:
            for q in range(size):
                tmp[q] = s[q] + dt * k3[q]
            open_loop_deriv(t + dt, tmp, A, alpha, beta, eps, law, k4, work)
            bad = _first_bad(k4)
        if bad >= 0:
            return out, 1, step, bad
        for q in range(size):
            s[q] = s[q] + dt / 6.0 * (k1[q] + 2.0 * k2[q] + 2.0 * k3[q] + k4[q])
        if (step + 1) % stride == 0:
            out[(step + 1) // stride] = s
    return out, 0, nsteps, -1


@njit(cache=True)
def integrate_closed(s0, t0, dt, nsteps, stride, n, m, A, B, Am, Bm, alpha_c, alpha_r, beta,
                     gamma, eps, k, delta, k_hat, filtered, route, mp, law, exact_model):
    size = s0.size
    out = np.empty((nsteps // stride + 1, size))
    s = s0.copy()
    out[0] = s
    k1 = np.empty(size)
    k2 = np.empty(size)
    k3 = np.empty(size)
    k4 = np.empty(size)
    tmp = np.empty(size)
    w1 = np.empty(n)
    w2 = np.empty(n)
    w3 = np.empty(m)
    w4 = np.empty(m)
    for step in range(nsteps):
        t = t0 + step * dt
        closed_loop_deriv(t, s, n, m, A, B, Am, Bm, alpha_c, alpha_r, beta, gamma, eps, k, delta,
                          k_hat, filtered, route, mp, law, exact_model, k1, w1, w2, w3, w4)
        bad = _first_bad(k1)
        if bad < 0:
            for q in range(size):
                tmp[q] = s[q] + 0.5 * dt * k1[q]
            closed_loop_deriv(t + 0.5 * dt, tmp, n, m, A, B, Am, Bm, alpha_c, alpha_r, beta, gamma,
                              eps, k, delta, k_hat, filtered, route, mp, law, exact_model, k2, w1, w2, w3, w4)
            bad = _first_bad(k2)
        if bad < 0:
            for q in range(size):
                tmp[q] = s[q] + 0.5 * dt * k2[q]
            closed_loop_deriv(t + 0.5 * dt, tmp, n, m, A, B, Am, Bm, alpha_c, alpha_r, beta, gamma,
                              eps, k, delta, k_hat, filtered, route, mp, law, exact_model, k3, w1, w2, w3, w4)
            bad = _first_bad(k3)
        if bad < 0:
            for q in range(size):
                tmp[q] = s[q] + dt * k3[q]
            closed_loop_deriv(t + dt, tmp, n, m, A, B, Am, Bm, alpha_c, alpha_r, beta, gamma,
                              eps, k, delta, k_hat, filtered, route, mp, law, exact_model, k4, w1, w2, w3, w4)
            bad = _first_bad(k4)
        if bad >= 0:
            return out, 1, step, bad
        for q in range(size):
            s[q] = s[q] + dt / 6.0 * (k1[q] + 2.0 * k2[q] + 2.0 * k3[q] + k4[q])
        if (step + 1) % stride == 0:
            out[(step + 1) // stride] = s
    return out, 0, nsteps, -1
