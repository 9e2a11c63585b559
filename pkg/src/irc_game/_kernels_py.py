"""Pure-Python kernels: scalar per-band rates, best-response refinement and
the clamped-affine Cournot map.

This module is the reference the compiled ``_ckernels`` extension mirrors
line by line, and the fallback used when the extension is not built.

A band and its protocol settings travel as a flat float vector, see
``pack_band`` in ``kernels.py`` for the layout.
"""
from __future__ import annotations

import math

import numpy as np

DF, EF, EF_SELECT, AF_FIXED, AF_SAT = 0, 1, 2, 3, 4
PACK_LEN = 32
FD_STEP = 2e-6
LN2 = math.log(2.0)


def _c(x):
    return math.log1p(x) / LN2


def _gains(v):
    return [complex(v[2 * k], v[2 * k + 1]) for k in range(8)]


def _abs2(z):
    return z.real * z.real + z.imag * z.imag


def _df(v, p1, p2):
    h11, h12, h21, h22, h1r, h2r, hr1, hr2 = _gains(v)
    n1, n2, nr, pr = v[16], v[17], v[18], v[19]
    t1, t2, nu = v[20], v[21], v[22]
    nu2 = 1.0 - nu
    q1 = _abs2(h1r) * (1.0 - t1) * p1
    q2 = _abs2(h2r) * (1.0 - t2) * p2
    relay1 = _c(q1 / (q2 + nr))
    relay2 = _c(q2 / (q1 + nr))

    def coh(hs, hr, p, t, share):
        cross = 2.0 * (hs * hr.conjugate()).real
        return _abs2(hs) * p + _abs2(hr) * share * pr + cross * math.sqrt(t * p * share * pr)

    dest1 = _c(coh(h11, hr1, p1, t1, nu) / (coh(h21, hr1, p2, t2, nu2) + n1))
    dest2 = _c(coh(h22, hr2, p2, t2, nu2) / (coh(h12, hr2, p1, t1, nu) + n2))
    if pr == 0.0 and _abs2(h1r) + _abs2(h2r) + _abs2(hr1) + _abs2(hr2) == 0.0:
        return dest1, dest2  # no relay at all: plain interference channel
    return min(relay1, dest1), min(relay2, dest2)


def _ef(v, p1, p2, select):
    h11, h12, h21, h22, h1r, h2r, hr1, hr2 = _gains(v)
    n1, n2, nr, pr = v[16], v[17], v[18], v[19]
    nu = v[22]
    nu2 = 1.0 - nu
    g11, g12, g21, g22 = _abs2(h11), _abs2(h12), _abs2(h21), _abs2(h22)
    g1r, g2r = _abs2(h1r), _abs2(h2r)
    u1 = _abs2(hr1) * pr
    u2 = _abs2(hr2) * pr
    big_a = g1r * p1 + g2r * p2 + nr
    a1 = _abs2(h11 * h1r.conjugate() * p1 + h21 * h2r.conjugate() * p2)
    a2 = _abs2(h12 * h1r.conjugate() * p1 + h22 * h2r.conjugate() * p2)
    s1 = g11 * p1 + g21 * p2 + n1
    s2 = g22 * p2 + g12 * p1 + n2
    case = 3
    if select:
        if u1 * nu2 * (s2 + u2 * nu) >= u2 * nu2 * (s1 + u1 * nu):
            case = 1
        elif u2 * nu * (s1 + u1 * nu2) >= u1 * nu * (s2 + u2 * nu2):
            case = 2
    i1 = 0.0 if case == 1 else u1 * nu2
    i2 = 0.0 if case == 2 else u2 * nu

    def user(gd, gc, gdr, gcr, pd, pc, s, noise, interf, a_cross, share):
        nt = noise + interf
        k = share * nr + (s + interf) * big_a - a_cross
        num = (gcr * pc * share + k) * gd * pd + (gc * pc + nt) * gdr * pd * share
        den = k * (gc * pc + nt) + gcr * pc * nt * share
        return _c(num / den)

    r1 = user(g11, g21, g1r, g2r, p1, p2, s1, n1, i1, a1, u1 * nu)
    r2 = user(g22, g12, g2r, g1r, p2, p1, s2, n2, i2, a2, u2 * nu2)
    return r1, r2


def _af(v, p1, p2, a):
    h11, h12, h21, h22, h1r, h2r, hr1, hr2 = _gains(v)
    n1, n2, nr = v[16], v[17], v[18]
    sig1 = _abs2(a * h1r * hr1 + h11) * p1 / n1
    int1 = _abs2(a * h2r * hr1 + h21) * p2 / n1
    sig2 = _abs2(a * h2r * hr2 + h22) * p2 / n2
    int2 = _abs2(a * h1r * hr2 + h12) * p1 / n2
    r1 = _c(sig1 / (int1 + a * a * _abs2(hr1) * nr / n1 + 1.0))
    r2 = _c(sig2 / (int2 + a * a * _abs2(hr2) * nr / n2 + 1.0))
    return r1, r2


def _sat_gain(v, p1, p2):
    if v[24] != 0.0:
        p1, p2 = v[25], v[26]
    g1r = v[8] * v[8] + v[9] * v[9]
    g2r = v[10] * v[10] + v[11] * v[11]
    return math.sqrt(v[19] / (g1r * p1 + g2r * p2 + v[18]))


def plain_rates(code, v, p1, p2):
    """Rates of both users in one band without time-sharing."""
    if code == DF:
        return _df(v, p1, p2)
    if code == EF:
        return _ef(v, p1, p2, False)
    if code == EF_SELECT:
        return _ef(v, p1, p2, True)
    if code == AF_FIXED:
        return _af(v, p1, p2, v[23])
    if code == AF_SAT:
        return _af(v, p1, p2, _sat_gain(v, p1, p2))
    raise ValueError(f"unknown protocol code {code}")


def pair_rates(code, v, p1, p2):
    """Band rates honouring the time-sharing flag stored in ``v``."""
    if v[27] == 0.0:
        return plain_rates(code, v, p1, p2)
    a1, a2, b1, b2 = v[28], v[29], v[30], v[31]
    q1 = p1 / a1 if a1 > 0 else 0.0
    q2 = p2 / a2 if a2 > 0 else 0.0
    r1 = r2 = 0.0
    both = plain_rates(code, v, q1, q2) if (a1 > 0 and a2 > 0) else (0.0, 0.0)
    if a1 > 0:
        r1 = a1 * (1.0 - b2) * plain_rates(code, v, q1, 0.0)[0] + a1 * b2 * both[0]
    if a2 > 0:
        r2 = a2 * (1.0 - b1) * plain_rates(code, v, 0.0, q2)[1] + a2 * b1 * both[1]
    return r1, r2


def user_rate(code, v, user, p_own, p_other):
    if user == 0:
        return pair_rates(code, v, p_own, p_other)[0]
    return pair_rates(code, v, p_other, p_own)[1]


def rate_table(code, v, user, own_powers, p_other):
    """Rate of ``user`` at every entry of ``own_powers``."""
    own = np.asarray(own_powers, dtype=float)
    out = np.empty(own.shape)
    for k, p in enumerate(own.flat):
        out.flat[k] = user_rate(code, v, user, p, p_other)
    return out


class _Band:
    """Own-share objective of one band, theta in [0, 1]."""

    def __init__(self, code, v, user, total, p_other):
        self.code, self.v, self.user = code, v, user
        self.total, self.p_other = total, p_other

    def f(self, t):
        return user_rate(self.code, self.v, self.user, t * self.total, self.p_other)

    def df(self, t):
        a = max(t - FD_STEP, 0.0)
        b = min(t + FD_STEP, 1.0)
        return (self.f(b) - self.f(a)) / (b - a)


def _band_argmax(band, lam, lo, hi, tol):
    """argmax of f(t) - lam t over [lo, hi], ties to the smaller t."""
    cands = [lo, hi]
    if hi > lo and band.df(lo) - lam > 0.0 and band.df(hi) - lam < 0.0:
        a, b = lo, hi
        while b - a > tol:
            m = 0.5 * (a + b)
            if band.df(m) - lam > 0.0:
                a = m
            else:
                b = m
        cands.insert(1, 0.5 * (a + b))
    best, best_val = lo, -math.inf
    for t in cands:
        val = band.f(t) - lam * t
        if val > best_val + 1e-15:
            best, best_val = t, val
    return best


def refine_br(codes, packed, user, total, p_other, lo, hi, tol=1e-13):
    """Maximize a separable band-sum over the box [lo, hi] cut by sum <= 1.

    Uses the multiplier of the budget constraint: per-band maximization of
    ``f_q(t) - lam t`` followed by bisection on ``lam``.
    """
    nb = len(codes)
    bands = [_Band(int(codes[q]), packed[q], user, total, p_other[q]) for q in range(nb)]

    def alloc(lam):
        return [_band_argmax(bands[q], lam, lo[q], hi[q], tol) for q in range(nb)]

    theta = alloc(0.0)
    if sum(theta) <= 1.0:
        return np.array(theta)
    lam_lo, lam_hi = 0.0, 1.0
    theta_hi = alloc(lam_hi)
    while sum(theta_hi) > 1.0:
        lam_lo, lam_hi = lam_hi, 2.0 * lam_hi
        theta_hi = alloc(lam_hi)
        if lam_hi > 1e12:
            break
    for _ in range(200):
        if lam_hi - lam_lo <= 1e-15 * (1.0 + lam_hi):
            break
        mid = 0.5 * (lam_lo + lam_hi)
        th = alloc(mid)
        if sum(th) > 1.0:
            lam_lo = mid
        else:
            lam_hi, theta_hi = mid, th
    return np.array(theta_hi)


def _clamp01(x):
    return 0.0 if x <= 0.0 else (1.0 if x >= 1.0 else x)


def affine_br(cii, cij, di, theta_other):
    return _clamp01((di - cij * theta_other) / cii)


def affine_cournot(c, d, t1, t2, max_iter, tol):
    """Sequential clamped-affine Cournot map.

    ``c = (c11, c12, c21, c22)``, ``d = (d1, d2)``.  Returns
    ``(theta1, theta2, iterations, converged)``.
    """
    c11, c12, c21, c22 = c
    d1, d2 = d
    for it in range(1, max_iter + 1):
        n1 = affine_br(c11, c12, d1, t2)
        n2 = affine_br(c22, c21, d2, n1)
        step = max(abs(n1 - t1), abs(n2 - t2))
        t1, t2 = n1, n2
        if step < tol:
            return t1, t2, it, True
    return t1, t2, max_iter, False


def affine_cournot_grid(c, d, starts1, starts2, max_iter, tol):
    """Run ``affine_cournot`` from every start; returns final states, counts, flags."""
    s1 = np.asarray(starts1, dtype=float).ravel()
    s2 = np.asarray(starts2, dtype=float).ravel()
    out1, out2 = np.empty(s1.size), np.empty(s1.size)
    iters = np.empty(s1.size, dtype=np.int64)
    conv = np.empty(s1.size, dtype=bool)
    for k in range(s1.size):
        out1[k], out2[k], iters[k], conv[k] = affine_cournot(c, d, s1[k], s2[k], max_iter, tol)
    return out1, out2, iters, conv
