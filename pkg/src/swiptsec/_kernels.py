"""Compiled inner loops of the penalty method.

Every function takes the instance constants as plain arrays:

    k     complex (3, N)  conjugated cascade gains conj(h_id h_si), conj(h_ie h_si), conj(h_ie h_di)
    q     float (2, N)    relay noise seen at D and E: |h_id|^2 s2, |h_ie|^2 s2
    pn    float (N,)      received power at each relay including its noise
    sc    float (5,)      P_s, P_d, s2, eta, first-hop eavesdropper SINR
"""
import math

import numpy as np
from numba import njit

INV_LN2 = 1.0 / math.log(2.0)
# sqrt(1 - rho) has an unbounded derivative at rho = 1
RHO_GRAD_CAP = 1.0 - 1e-9


@njit(cache=True)
def residual(i, wi, ri, pi, pn, sc):
    aw = wi.real * wi.real + wi.imag * wi.imag
    return aw * ((1.0 - ri) * pn[i] + sc[2]) + pi - sc[3] * ri * pn[i]


@njit(cache=True)
def _terms(i, wi, ri, pi, k, q, pn, sc):
    v = math.sqrt(1.0 - ri) * wi
    aw = (2.0 - ri) * (wi.real * wi.real + wi.imag * wi.imag)
    r = residual(i, wi, ri, pi, pn, sc)
    return k[0, i] * v, k[1, i] * v, k[2, i] * v, q[0, i] * aw, q[1, i] * aw, r * r


@njit(cache=True)
def _sums(w, rho, psi, skip, k, q, pn, sc):
    a1 = a2 = a3 = 0j
    dd = de = pen = 0.0
    for j in range(w.shape[0]):
        if j == skip:
            continue
        t1, t2, t3, td, te, tp = _terms(j, w[j], rho[j], psi[j], k, q, pn, sc)
        a1 += t1
        a2 += t2
        a3 += t3
        dd += td
        de += te
        pen += tp
    return a1, a2, a3, dd, de, pen


@njit(cache=True)
def _value(a1, a2, a3, dd, de, pen, lam, sc):
    ps, pd, s2, g1 = sc[0], sc[1], sc[2], sc[4]
    snr_d = ps * (a1.real * a1.real + a1.imag * a1.imag) / (dd + s2)
    snr_e = ps * (a2.real * a2.real + a2.imag * a2.imag) / (pd * (a3.real * a3.real + a3.imag * a3.imag) + de + s2)
    return 0.5 * (math.log2(1.0 + snr_d) - math.log2(1.0 + g1 + snr_e)) - lam * pen


@njit(cache=True)
def objective(w, rho, psi, lam, k, q, pn, sc):
    a1, a2, a3, dd, de, pen = _sums(w, rho, psi, -1, k, q, pn, sc)
    return _value(a1, a2, a3, dd, de, pen, lam, sc)


@njit(cache=True)
def rate_term(w, rho, k, q, pn, sc):
    # psi only enters the penalty, which is weighted by zero here
    a1, a2, a3, dd, de, _ = _sums(w, rho, rho, -1, k, q, pn, sc)
    return _value(a1, a2, a3, dd, de, 0.0, 0.0, sc)


@njit(cache=True)
def residual_sq(w, rho, psi, pn, sc):
    total = 0.0
    for i in range(w.shape[0]):
        r = residual(i, w[i], rho[i], psi[i], pn, sc)
        total += r * r
    return total


@njit(cache=True)
def _grad_prep(a1, a2, a3, dd, de, sc):
    ps, pd, s2, g1 = sc[0], sc[1], sc[2], sc[4]
    den_d = dd + s2
    x_d = ps * (a1.real * a1.real + a1.imag * a1.imag) / den_d
    den_e = pd * (a3.real * a3.real + a3.imag * a3.imag) + de + s2
    x_e = ps * (a2.real * a2.real + a2.imag * a2.imag) / den_e
    c_d = 0.5 * INV_LN2 / (den_d * (1.0 + x_d))
    c_e = 0.5 * INV_LN2 / (den_e * (1.0 + g1 + x_e))
    return x_d, x_e, c_d, c_e


@njit(cache=True)
def _grad_one(i, wi, rho_i, psi_i, lam, a1, a2, a3, x_d, x_e, c_d, c_e, k, q, pn, sc):
    # dS = c_d (dN_d - x_d dD_d) - c_e (dN_e - x_e dD_e); w-partials as d/dRe + 1j d/dIm
    ps, pd, s2, eta = sc[0], sc[1], sc[2], sc[3]
    ri = min(rho_i, RHO_GRAD_CAP)
    si = math.sqrt(1.0 - ri)
    aw = wi.real * wi.real + wi.imag * wi.imag
    k1, k2, k3 = k[0, i], k[1, i], k[2, i]
    q1, q2 = q[0, i], q[1, i]
    r = residual(i, wi, rho_i, psi_i, pn, sc)

    dn_d = 2.0 * ps * si * a1 * k1.conjugate()
    dd_d = 2.0 * q1 * (2.0 - ri) * wi
    dn_e = 2.0 * ps * si * a2 * k2.conjugate()
    dd_e = 2.0 * pd * si * a3 * k3.conjugate() + 2.0 * q2 * (2.0 - ri) * wi
    gw = c_d * (dn_d - x_d * dd_d) - c_e * (dn_e - x_e * dd_e)
    gw -= 4.0 * lam * r * ((1.0 - rho_i) * pn[i] + s2) * wi

    dn_d = -ps * (a1.conjugate() * k1 * wi).real / si
    dd_d = -q1 * aw
    dn_e = -ps * (a2.conjugate() * k2 * wi).real / si
    dd_e = -pd * (a3.conjugate() * k3 * wi).real / si - q2 * aw
    grho = c_d * (dn_d - x_d * dd_d) - c_e * (dn_e - x_e * dd_e)
    grho += 2.0 * lam * r * (aw + eta) * pn[i]

    return gw, grho, -2.0 * lam * r


@njit(cache=True)
def gradient(w, rho, psi, lam, k, q, pn, sc):
    n = w.shape[0]
    gw = np.empty(n, dtype=np.complex128)
    grho = np.empty(n)
    gpsi = np.empty(n)
    a1, a2, a3, dd, de, _ = _sums(w, rho, psi, -1, k, q, pn, sc)
    x_d, x_e, c_d, c_e = _grad_prep(a1, a2, a3, dd, de, sc)
    for i in range(n):
        gw[i], grho[i], gpsi[i] = _grad_one(i, w[i], rho[i], psi[i], lam, a1, a2, a3,
                                            x_d, x_e, c_d, c_e, k, q, pn, sc)
    return gw, grho, gpsi


@njit(cache=True)
def projected_grad_norm(w, rho, psi, lam, k, q, pn, sc):
    a1, a2, a3, dd, de, _ = _sums(w, rho, psi, -1, k, q, pn, sc)
    x_d, x_e, c_d, c_e = _grad_prep(a1, a2, a3, dd, de, sc)
    total = 0.0
    for i in range(w.shape[0]):
        gw, g, gp = _grad_one(i, w[i], rho[i], psi[i], lam, a1, a2, a3, x_d, x_e, c_d, c_e, k, q, pn, sc)
        total += gw.real * gw.real + gw.imag * gw.imag
        if not ((rho[i] <= 0.0 and g < 0.0) or (rho[i] >= 1.0 and g > 0.0)):
            total += g * g
        if not (psi[i] <= 0.0 and gp < 0.0):
            total += gp * gp
    return math.sqrt(total)


@njit(cache=True)
def _block_value(block, i, x, wi, ri, pi, o, lam, k, q, pn, sc):
    if block == 0:
        wi = x
    elif block == 1:
        ri = x.real
    else:
        pi = x.real
    t1, t2, t3, td, te, tp = _terms(i, wi, ri, pi, k, q, pn, sc)
    return _value(o[0] + t1, o[1] + t2, o[2] + t3, o[3].real + td, o[4].real + te, o[5].real + tp, lam, sc)


@njit(cache=True)
def _set_row(t, i, wi, ri, pi, k, q, pn, sc):
    t1, t2, t3, td, te, tp = _terms(i, wi, ri, pi, k, q, pn, sc)
    t[i, 0], t[i, 1], t[i, 2], t[i, 3], t[i, 4], t[i, 5] = t1, t2, t3, td, te, tp


@njit(cache=True)
def sweep(w, rho, psi, lam, f, acfg, k, q, pn, sc, record, work):
    """One Gauss-Seidel pass over all w_i, then rho_i, then psi_i, in place.

    ``acfg`` = (alpha_init, shrink, slope_coef, max_backtracks). Each Armijo
    test compares against the last accepted value ``f``; ``record`` receives
    the value after every block update (length 3N). ``work`` is complex
    scratch of shape (N + 1, 6): per-relay terms plus one row for the sums
    over the other relays. Returns ``(f, number of accepted updates)``.
    """
    n = w.shape[0]
    alpha_init, shrink, c_slope, max_bt = acfg[0], acfg[1], acfg[2], int(acfg[3])
    t = work[:n]
    o = work[n]
    for j in range(n):
        _set_row(t, j, w[j], rho[j], psi[j], k, q, pn, sc)
    moved = 0
    for block in range(3):
        for i in range(n):
            for c in range(6):
                acc = 0j
                for j in range(n):
                    if j != i:
                        acc += t[j, c]
                o[c] = acc
            a1, a2, a3 = o[0] + t[i, 0], o[1] + t[i, 1], o[2] + t[i, 2]
            x_d, x_e, c_d, c_e = _grad_prep(a1, a2, a3, (o[3] + t[i, 3]).real, (o[4] + t[i, 4]).real, sc)
            gw, grho, gpsi = _grad_one(i, w[i], rho[i], psi[i], lam, a1, a2, a3, x_d, x_e, c_d, c_e, k, q, pn, sc)
            if block == 0:
                d = gw
                x0 = w[i]
            elif block == 1:
                d = complex(grho)
                x0 = complex(rho[i])
            else:
                d = complex(gpsi)
                x0 = complex(psi[i])
            slope = d.real * d.real + d.imag * d.imag
            if slope > 0.0:
                alpha = alpha_init
                for _ in range(max_bt + 1):
                    x = x0 + alpha * d
                    if block == 1:
                        x = complex(min(1.0, max(0.0, x.real)))
                    elif block == 2:
                        x = complex(max(0.0, x.real))
                    fx = _block_value(block, i, x, w[i], rho[i], psi[i], o, lam, k, q, pn, sc)
                    if fx - f >= c_slope * alpha * slope:
                        if block == 0:
                            w[i] = x
                        elif block == 1:
                            rho[i] = x.real
                        else:
                            psi[i] = x.real
                        if x != x0:
                            moved += 1
                        f = fx
                        _set_row(t, i, w[i], rho[i], psi[i], k, q, pn, sc)
                        break
                    alpha *= shrink
            record[block * n + i] = f
    return f, moved


@njit(cache=True)
def _rel_change(new, old):
    # squared change over the larger squared norm of the two iterates
    num = 0.0
    den_new = 0.0
    den_old = 0.0
    for j in range(new.shape[0]):
        d = new[j] - old[j]
        num += d.real * d.real + d.imag * d.imag
        den_new += new[j].real * new[j].real + new[j].imag * new[j].imag
        den_old += old[j].real * old[j].real + old[j].imag * old[j].imag
    if num == 0.0:
        return 0.0
    return num / max(den_new, den_old)


@njit(cache=True)
def run_segment(w, rho, psi, lam, acfg, max_sweeps, inner_tol, step_tol, k, q, pn, sc,
                obj, rate, res, w_hist, rho_hist, psi_hist, blocks):
    """Sweep at fixed ``lam`` until the scaled projected gradient is <= ``inner_tol``
    and no ratio moved by more than ``step_tol`` in the last sweep.

    Histories are written row by row; returns the number of sweeps done.
    """
    n = w.shape[0]
    work = np.empty((n + 1, 6), dtype=np.complex128)
    rho_prev = np.empty(n)
    f = objective(w, rho, psi, lam, k, q, pn, sc)
    for s in range(max_sweeps):
        blocks[s, 0] = f
        rho_prev[:] = rho
        f, moved = sweep(w, rho, psi, lam, f, acfg, k, q, pn, sc, blocks[s, 1:], work)
        obj[s] = f
        rate[s] = rate_term(w, rho, k, q, pn, sc)
        res[s] = residual_sq(w, rho, psi, pn, sc)
        w_hist[s] = w
        rho_hist[s] = rho
        psi_hist[s] = psi
        if moved == 0:
            return s + 1
        step = 0.0
        for i in range(n):
            step = max(step, abs(rho[i] - rho_prev[i]))
        if step <= step_tol and projected_grad_norm(w, rho, psi, lam, k, q, pn, sc) <= inner_tol * (1.0 + abs(f)):
            return s + 1
    return max_sweeps
