# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels; mirrors ``_kernels_py`` (see there for documentation)."""
import numpy as np

from libc.math cimport log1p, sqrt, fabs, INFINITY

cdef enum:
    NPACK = 32

cdef double LN2 = 0.6931471805599453
cdef double FD_STEP = 2e-6

DF, EF, EF_SELECT, AF_FIXED, AF_SAT = 0, 1, 2, 3, 4
PACK_LEN = NPACK


cdef inline double _c(double x) nogil:
    return log1p(x) / LN2


cdef inline double _abs2(double complex z) nogil:
    return z.real * z.real + z.imag * z.imag


cdef inline double complex _g(const double *v, int k) nogil:
    return v[2 * k] + 1j * v[2 * k + 1]


cdef inline double _coh(double complex hs, double complex hr, double p, double t,
                        double share, double pr) nogil:
    cdef double cross = 2.0 * (hs * hr.conjugate()).real
    return _abs2(hs) * p + _abs2(hr) * share * pr + cross * sqrt(t * p * share * pr)


cdef void _df(const double *v, double p1, double p2, double *r) nogil:
    cdef double complex h11 = _g(v, 0), h12 = _g(v, 1), h21 = _g(v, 2), h22 = _g(v, 3)
    cdef double complex h1r = _g(v, 4), h2r = _g(v, 5), hr1 = _g(v, 6), hr2 = _g(v, 7)
    cdef double n1 = v[16], n2 = v[17], nr = v[18], pr = v[19]
    cdef double t1 = v[20], t2 = v[21], nu = v[22]
    cdef double nu2 = 1.0 - nu
    cdef double q1 = _abs2(h1r) * (1.0 - t1) * p1
    cdef double q2 = _abs2(h2r) * (1.0 - t2) * p2
    cdef double relay1 = _c(q1 / (q2 + nr))
    cdef double relay2 = _c(q2 / (q1 + nr))
    cdef double dest1 = _c(_coh(h11, hr1, p1, t1, nu, pr)
                           / (_coh(h21, hr1, p2, t2, nu2, pr) + n1))
    cdef double dest2 = _c(_coh(h22, hr2, p2, t2, nu2, pr)
                           / (_coh(h12, hr2, p1, t1, nu, pr) + n2))
    if pr == 0.0 and _abs2(h1r) + _abs2(h2r) + _abs2(hr1) + _abs2(hr2) == 0.0:
        r[0] = dest1
        r[1] = dest2
        return
    r[0] = relay1 if relay1 < dest1 else dest1
    r[1] = relay2 if relay2 < dest2 else dest2


cdef inline double _ef_user(double gd, double gc, double gdr, double gcr, double pd,
                            double pc, double s, double noise, double interf,
                            double a_cross, double share, double nr, double big_a) nogil:
    cdef double nt = noise + interf
    cdef double k = share * nr + (s + interf) * big_a - a_cross
    cdef double num = (gcr * pc * share + k) * gd * pd + (gc * pc + nt) * gdr * pd * share
    cdef double den = k * (gc * pc + nt) + gcr * pc * nt * share
    return _c(num / den)


cdef void _ef(const double *v, double p1, double p2, bint select, double *r) nogil:
    cdef double complex h11 = _g(v, 0), h12 = _g(v, 1), h21 = _g(v, 2), h22 = _g(v, 3)
    cdef double complex h1r = _g(v, 4), h2r = _g(v, 5), hr1 = _g(v, 6), hr2 = _g(v, 7)
    cdef double n1 = v[16], n2 = v[17], nr = v[18], pr = v[19]
    cdef double nu = v[22]
    cdef double nu2 = 1.0 - nu
    cdef double g11 = _abs2(h11), g12 = _abs2(h12), g21 = _abs2(h21), g22 = _abs2(h22)
    cdef double g1r = _abs2(h1r), g2r = _abs2(h2r)
    cdef double u1 = _abs2(hr1) * pr
    cdef double u2 = _abs2(hr2) * pr
    cdef double big_a = g1r * p1 + g2r * p2 + nr
    cdef double a1 = _abs2(h11 * h1r.conjugate() * p1 + h21 * h2r.conjugate() * p2)
    cdef double a2 = _abs2(h12 * h1r.conjugate() * p1 + h22 * h2r.conjugate() * p2)
    cdef double s1 = g11 * p1 + g21 * p2 + n1
    cdef double s2 = g22 * p2 + g12 * p1 + n2
    cdef int case = 3
    if select:
        if u1 * nu2 * (s2 + u2 * nu) >= u2 * nu2 * (s1 + u1 * nu):
            case = 1
        elif u2 * nu * (s1 + u1 * nu2) >= u1 * nu * (s2 + u2 * nu2):
            case = 2
    cdef double i1 = 0.0 if case == 1 else u1 * nu2
    cdef double i2 = 0.0 if case == 2 else u2 * nu
    r[0] = _ef_user(g11, g21, g1r, g2r, p1, p2, s1, n1, i1, a1, u1 * nu, nr, big_a)
    r[1] = _ef_user(g22, g12, g2r, g1r, p2, p1, s2, n2, i2, a2, u2 * nu2, nr, big_a)


cdef void _af(const double *v, double p1, double p2, double a, double *r) nogil:
    cdef double complex h11 = _g(v, 0), h12 = _g(v, 1), h21 = _g(v, 2), h22 = _g(v, 3)
    cdef double complex h1r = _g(v, 4), h2r = _g(v, 5), hr1 = _g(v, 6), hr2 = _g(v, 7)
    cdef double n1 = v[16], n2 = v[17], nr = v[18]
    cdef double sig1 = _abs2(a * h1r * hr1 + h11) * p1 / n1
    cdef double int1 = _abs2(a * h2r * hr1 + h21) * p2 / n1
    cdef double sig2 = _abs2(a * h2r * hr2 + h22) * p2 / n2
    cdef double int2 = _abs2(a * h1r * hr2 + h12) * p1 / n2
    r[0] = _c(sig1 / (int1 + a * a * _abs2(hr1) * nr / n1 + 1.0))
    r[1] = _c(sig2 / (int2 + a * a * _abs2(hr2) * nr / n2 + 1.0))


cdef inline double _sat_gain(const double *v, double p1, double p2) nogil:
    if v[24] != 0.0:
        p1 = v[25]
        p2 = v[26]
    cdef double g1r = v[8] * v[8] + v[9] * v[9]
    cdef double g2r = v[10] * v[10] + v[11] * v[11]
    return sqrt(v[19] / (g1r * p1 + g2r * p2 + v[18]))


cdef int _plain(int code, const double *v, double p1, double p2, double *r) nogil:
    if code == 0:
        _df(v, p1, p2, r)
    elif code == 1:
        _ef(v, p1, p2, False, r)
    elif code == 2:
        _ef(v, p1, p2, True, r)
    elif code == 3:
        _af(v, p1, p2, v[23], r)
    elif code == 4:
        _af(v, p1, p2, _sat_gain(v, p1, p2), r)
    else:
        return -1
    return 0


cdef int _pair(int code, const double *v, double p1, double p2, double *r) nogil:
    if v[27] == 0.0:
        return _plain(code, v, p1, p2, r)
    cdef double a1 = v[28], a2 = v[29], b1 = v[30], b2 = v[31]
    cdef double q1 = p1 / a1 if a1 > 0 else 0.0
    cdef double q2 = p2 / a2 if a2 > 0 else 0.0
    cdef double both[2]
    cdef double tmp[2]
    both[0] = 0.0
    both[1] = 0.0
    r[0] = 0.0
    r[1] = 0.0
    if a1 > 0 and a2 > 0:
        if _plain(code, v, q1, q2, both) < 0:
            return -1
    if a1 > 0:
        if _plain(code, v, q1, 0.0, tmp) < 0:
            return -1
        r[0] = a1 * (1.0 - b2) * tmp[0] + a1 * b2 * both[0]
    if a2 > 0:
        if _plain(code, v, 0.0, q2, tmp) < 0:
            return -1
        r[1] = a2 * (1.0 - b1) * tmp[1] + a2 * b1 * both[1]
    return 0


cdef inline double _user(int code, const double *v, int user, double p_own,
                         double p_other) nogil:
    cdef double r[2]
    if user == 0:
        _pair(code, v, p_own, p_other, r)
        return r[0]
    _pair(code, v, p_other, p_own, r)
    return r[1]


cdef double[::1] _vec(v):
    cdef double[::1] out = np.ascontiguousarray(v, dtype=np.float64)
    if out.shape[0] != NPACK:
        raise ValueError("packed band vector has the wrong length")
    return out


def _check_code(int code):
    if code < 0 or code > 4:
        raise ValueError(f"unknown protocol code {code}")


def plain_rates(int code, v, double p1, double p2):
    _check_code(code)
    cdef double[::1] vv = _vec(v)
    cdef double r[2]
    _plain(code, &vv[0], p1, p2, r)
    return r[0], r[1]


def pair_rates(int code, v, double p1, double p2):
    _check_code(code)
    cdef double[::1] vv = _vec(v)
    cdef double r[2]
    _pair(code, &vv[0], p1, p2, r)
    return r[0], r[1]


def user_rate(int code, v, int user, double p_own, double p_other):
    _check_code(code)
    cdef double[::1] vv = _vec(v)
    return _user(code, &vv[0], user, p_own, p_other)


def rate_table(int code, v, int user, own_powers, double p_other):
    _check_code(code)
    cdef double[::1] vv = _vec(v)
    own = np.ascontiguousarray(own_powers, dtype=np.float64)
    out = np.empty(own.shape)
    cdef double[::1] src = own.reshape(-1)
    cdef double[::1] dst = out.reshape(-1)
    cdef Py_ssize_t k
    with nogil:
        for k in range(src.shape[0]):
            dst[k] = _user(code, &vv[0], user, src[k], p_other)
    return out


cdef struct Band:
    int code
    const double *v
    int user
    double total
    double p_other


cdef inline double _bf(Band *b, double t) nogil:
    return _user(b.code, b.v, b.user, t * b.total, b.p_other)


cdef inline double _bdf(Band *b, double t) nogil:
    cdef double a = t - FD_STEP
    cdef double c = t + FD_STEP
    if a < 0.0:
        a = 0.0
    if c > 1.0:
        c = 1.0
    return (_bf(b, c) - _bf(b, a)) / (c - a)


cdef double _band_argmax(Band *b, double lam, double lo, double hi, double tol) nogil:
    cdef double cands[3]
    cdef int nc = 2
    cdef double a, c, m, best, best_val, val
    cdef int k
    cands[0] = lo
    cands[1] = hi
    if hi > lo and _bdf(b, lo) - lam > 0.0 and _bdf(b, hi) - lam < 0.0:
        a = lo
        c = hi
        while c - a > tol:
            m = 0.5 * (a + c)
            if _bdf(b, m) - lam > 0.0:
                a = m
            else:
                c = m
        cands[1] = 0.5 * (a + c)
        cands[2] = hi
        nc = 3
    best = lo
    best_val = -INFINITY
    for k in range(nc):
        val = _bf(b, cands[k]) - lam * cands[k]
        if val > best_val + 1e-15:
            best = cands[k]
            best_val = val
    return best


cdef double _alloc(Band *bands, int nb, double lam, const double *lo, const double *hi,
                   double tol, double *theta) nogil:
    cdef double s = 0.0
    cdef int q
    for q in range(nb):
        theta[q] = _band_argmax(&bands[q], lam, lo[q], hi[q], tol)
        s += theta[q]
    return s


def refine_br(codes, packed, int user, double total, p_other, lo, hi, double tol=1e-13):
    cdef long[::1] cc = np.ascontiguousarray(codes, dtype=np.int_)
    cdef double[:, ::1] pk = np.ascontiguousarray(packed, dtype=np.float64)
    cdef double[::1] po = np.ascontiguousarray(p_other, dtype=np.float64)
    cdef double[::1] lo_v = np.ascontiguousarray(lo, dtype=np.float64)
    cdef double[::1] hi_v = np.ascontiguousarray(hi, dtype=np.float64)
    cdef int nb = cc.shape[0]
    cdef int q, it
    if pk.shape[0] != nb or pk.shape[1] != NPACK:
        raise ValueError("packed array must have shape (n_bands, PACK_LEN)")
    for q in range(nb):
        _check_code(cc[q])
    theta = np.empty(nb)
    theta_hi = np.empty(nb)
    work = np.empty(nb)
    cdef double[::1] th = theta
    cdef double[::1] th_hi = theta_hi
    cdef double[::1] wk = work
    cdef Band bands[64]
    if nb > 64:
        raise ValueError("at most 64 bands supported by the compiled kernel")
    for q in range(nb):
        bands[q].code = cc[q]
        bands[q].v = &pk[q, 0]
        bands[q].user = user
        bands[q].total = total
        bands[q].p_other = po[q]
    cdef double lam_lo, lam_hi, mid, s
    with nogil:
        s = _alloc(bands, nb, 0.0, &lo_v[0], &hi_v[0], tol, &th[0])
    if s <= 1.0:
        return theta
    lam_lo = 0.0
    lam_hi = 1.0
    with nogil:
        s = _alloc(bands, nb, lam_hi, &lo_v[0], &hi_v[0], tol, &th_hi[0])
        while s > 1.0:
            lam_lo = lam_hi
            lam_hi = 2.0 * lam_hi
            s = _alloc(bands, nb, lam_hi, &lo_v[0], &hi_v[0], tol, &th_hi[0])
            if lam_hi > 1e12:
                break
        for it in range(200):
            if lam_hi - lam_lo <= 1e-15 * (1.0 + lam_hi):
                break
            mid = 0.5 * (lam_lo + lam_hi)
            s = _alloc(bands, nb, mid, &lo_v[0], &hi_v[0], tol, &wk[0])
            if s > 1.0:
                lam_lo = mid
            else:
                lam_hi = mid
                for q in range(nb):
                    th_hi[q] = wk[q]
    return theta_hi


cdef inline double _clamp01(double x) nogil:
    if x <= 0.0:
        return 0.0
    if x >= 1.0:
        return 1.0
    return x


def affine_br(double cii, double cij, double di, double theta_other):
    return _clamp01((di - cij * theta_other) / cii)


cdef int _cournot(double c11, double c12, double c21, double c22, double d1, double d2,
                  double *t1, double *t2, int max_iter, double tol) nogil:
    """Returns the iteration count, negated when not converged."""
    cdef double n1, n2, step
    cdef int it
    for it in range(1, max_iter + 1):
        n1 = _clamp01((d1 - c12 * t2[0]) / c11)
        n2 = _clamp01((d2 - c21 * n1) / c22)
        step = fabs(n1 - t1[0])
        if fabs(n2 - t2[0]) > step:
            step = fabs(n2 - t2[0])
        t1[0] = n1
        t2[0] = n2
        if step < tol:
            return it
    return -max_iter


def affine_cournot(c, d, double t1, double t2, int max_iter, double tol):
    cdef double c11 = c[0], c12 = c[1], c21 = c[2], c22 = c[3]
    cdef double d1 = d[0], d2 = d[1]
    cdef int it = _cournot(c11, c12, c21, c22, d1, d2, &t1, &t2, max_iter, tol)
    return t1, t2, abs(it), it > 0


def affine_cournot_grid(c, d, starts1, starts2, int max_iter, double tol):
    cdef double c11 = c[0], c12 = c[1], c21 = c[2], c22 = c[3]
    cdef double d1 = d[0], d2 = d[1]
    out1 = np.array(starts1, dtype=np.float64).ravel()
    out2 = np.array(starts2, dtype=np.float64).ravel()
    if out1.size != out2.size:
        raise ValueError("start arrays differ in size")
    iters = np.empty(out1.size, dtype=np.int64)
    conv = np.empty(out1.size, dtype=bool)
    cdef double[::1] a = out1
    cdef double[::1] b = out2
    cdef long long[::1] itv = iters
    cdef Py_ssize_t k
    cdef int it
    cdef unsigned char[::1] cv = conv.view(np.uint8)
    with nogil:
        for k in range(a.shape[0]):
            it = _cournot(c11, c12, c21, c22, d1, d2, &a[k], &b[k], max_iter, tol)
            itv[k] = it if it > 0 else -it
            cv[k] = it > 0
    return out1, out2, iters, conv
