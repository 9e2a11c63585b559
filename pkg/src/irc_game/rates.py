"""Single-band achievable rates under DF, bi-level EF, ZDSAF and time-sharing.

The ``*_pair`` helpers are vectorized over the two transmit powers (numpy
broadcasting) and return ``(r1, r2)`` arrays in bits per channel use.  The
public ``rate_*`` functions wrap them for scalar use.

Relay power split convention: user 1 receives the fraction ``nu`` of the
relay power, user 2 receives ``1 - nu``.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .scenario import BandChannel, DomainError, TsParams

__all__ = [
    "RatePair", "EfCaseResult", "TsParams", "capacity", "df_pair", "ef_pair",
    "af_pair", "rate_df", "rate_ef", "rate_af", "saturating_gain", "rate_ts",
    "ts_pair",
]


@dataclass(frozen=True)
class RatePair:
    r1: float
    r2: float

    def __getitem__(self, i):
        return (self.r1, self.r2)[i]

    @property
    def total(self) -> float:
        return self.r1 + self.r2


@dataclass(frozen=True)
class EfCaseResult:
    case_id: int
    nwz1: float
    nwz2: float
    rates: RatePair


def capacity(x):
    """log2(1 + x)."""
    return np.log2(1.0 + x)


def _abs2(z):
    return z.real * z.real + z.imag * z.imag


def df_pair(band: BandChannel, p1, p2, tau1: float, tau2: float, nu: float):
    """Decode-and-forward rates: min of the relay-decoding and destination terms.

    A band without any relay (no relay power and no relay links) is a plain
    interference channel, so the relay-decoding constraint is dropped there.
    """
    p1 = np.asarray(p1, dtype=float)
    p2 = np.asarray(p2, dtype=float)
    pr = band.relay_power
    nu1, nu2 = nu, 1.0 - nu
    nr = band.noise_r
    q1 = _abs2(band.h1r) * (1.0 - tau1) * p1
    q2 = _abs2(band.h2r) * (1.0 - tau2) * p2
    relay1 = capacity(q1 / (q2 + nr))
    relay2 = capacity(q2 / (q1 + nr))

    def coherent(h_src, h_rel, p, tau, share):
        # |h_src|^2 p + |h_rel|^2 share Pr + 2 Re(h_src h_rel*) sqrt(tau p share Pr)
        cross = 2.0 * (h_src * np.conj(h_rel)).real
        return (_abs2(h_src) * p + _abs2(h_rel) * share * pr
                + cross * np.sqrt(tau * p * share * pr))

    dest1 = capacity(coherent(band.h11, band.hr1, p1, tau1, nu1)
                     / (coherent(band.h21, band.hr1, p2, tau2, nu2) + band.noise_d1))
    dest2 = capacity(coherent(band.h22, band.hr2, p2, tau2, nu2)
                     / (coherent(band.h12, band.hr2, p1, tau1, nu1) + band.noise_d2))
    if not band.has_relay:
        return dest1, dest2
    return np.minimum(relay1, dest1), np.minimum(relay2, dest2)


def ef_pair(band: BandChannel, p1, p2, nu: float, cases: str = "select"):
    """Bi-level compression EF rates.

    Returns ``(r1, r2, case_id, nwz1, nwz2)``.  With ``cases="select"`` the
    decoding case is chosen per input from the two receiver-quality tests
    (ties go to case 1); ``cases="interference"`` always uses case 3, where
    each destination treats the other's cooperation signal as noise.

    Compression noises are set to their lower bounds.  A user whose relay
    share vanishes gets an infinite compression noise and its direct-link
    rate.
    """
    p1 = np.asarray(p1, dtype=float)
    p2 = np.asarray(p2, dtype=float)
    p1, p2 = np.broadcast_arrays(p1, p2)
    g11, g12, g21, g22 = (_abs2(band.h11), _abs2(band.h12),
                          _abs2(band.h21), _abs2(band.h22))
    g1r, g2r = _abs2(band.h1r), _abs2(band.h2r)
    n1, n2, nr = band.noise_d1, band.noise_d2, band.noise_r
    u1 = _abs2(band.hr1) * band.relay_power  # relay power seen at D1
    u2 = _abs2(band.hr2) * band.relay_power
    nu1, nu2 = nu, 1.0 - nu

    big_a = g1r * p1 + g2r * p2 + nr
    a1 = _abs2(band.h11 * np.conj(band.h1r) * p1 + band.h21 * np.conj(band.h2r) * p2)
    a2 = _abs2(band.h12 * np.conj(band.h1r) * p1 + band.h22 * np.conj(band.h2r) * p2)
    s1 = g11 * p1 + g21 * p2 + n1
    s2 = g22 * p2 + g12 * p1 + n2

    if cases == "select":
        # case 1: D1 can decode U2 at D2's rate; compare SINRs cross-multiplied
        case1 = u1 * nu2 * (s2 + u2 * nu1) >= u2 * nu2 * (s1 + u1 * nu1)
        case2 = u2 * nu1 * (s1 + u1 * nu2) >= u1 * nu1 * (s2 + u2 * nu2)
        case_id = np.where(case1, 1, np.where(case2, 2, 3))
    elif cases == "interference":
        case_id = np.full(p1.shape, 3)
    else:
        raise ValueError(f"unknown EF case mode {cases!r}")
    i1 = np.where(case_id == 1, 0.0, u1 * nu2)  # residual relay interference at D1
    i2 = np.where(case_id == 2, 0.0, u2 * nu1)

    def user_rate(gd, gc, gdr, gcr, pd, pc, s, noise, interf, a_cross, share):
        # d: own links, c: the other user's links.  K = share * (Nr + Nwz)
        # stays finite when the relay share vanishes.
        nt = noise + interf
        k = share * nr + (s + interf) * big_a - a_cross
        num = (gcr * pc * share + k) * gd * pd + (gc * pc + nt) * gdr * pd * share
        den = k * (gc * pc + nt) + gcr * pc * nt * share
        return capacity(num / den), k

    sh1 = u1 * nu1
    sh2 = u2 * nu2
    r1, k1 = user_rate(g11, g21, g1r, g2r, p1, p2, s1, n1, i1, a1, sh1)
    r2, k2 = user_rate(g22, g12, g2r, g1r, p2, p1, s2, n2, i2, a2, sh2)
    with np.errstate(divide="ignore"):
        nwz1 = np.where(sh1 > 0, k1 / np.where(sh1 > 0, sh1, 1.0) - nr, np.inf)
        nwz2 = np.where(sh2 > 0, k2 / np.where(sh2 > 0, sh2, 1.0) - nr, np.inf)
    return r1, r2, case_id, nwz1, nwz2


def saturating_gain(band: BandChannel, band_powers) -> float:
    """Gain that makes the relay transmit exactly its power budget."""
    p1, p2 = band_powers
    return np.sqrt(band.relay_power / (_abs2(band.h1r) * p1 + _abs2(band.h2r) * p2
                                       + band.noise_r))


def af_pair(band: BandChannel, p1, p2, gain):
    """Zero-delay scalar AF rates with amplification ``gain`` (may be an array)."""
    p1 = np.asarray(p1, dtype=float)
    p2 = np.asarray(p2, dtype=float)
    a = np.asarray(gain, dtype=float)
    n1, n2, nr = band.noise_d1, band.noise_d2, band.noise_r
    hr1sq, hr2sq = _abs2(band.hr1), _abs2(band.hr2)
    sig1 = _abs2(a * band.h1r * band.hr1 + band.h11) * p1 / n1
    int1 = _abs2(a * band.h2r * band.hr1 + band.h21) * p2 / n1
    sig2 = _abs2(a * band.h2r * band.hr2 + band.h22) * p2 / n2
    int2 = _abs2(a * band.h1r * band.hr2 + band.h12) * p1 / n2
    r1 = capacity(sig1 / (int1 + a * a * hr1sq * nr / n1 + 1.0))
    r2 = capacity(sig2 / (int2 + a * a * hr2sq * nr / n2 + 1.0))
    return r1, r2


def ts_pair(pair: Callable, ts: TsParams, p1, p2):
    """Time-sharing wrapper around a vectorized pair evaluator ``pair(p1, p2)``.

    User i is on a fraction ``alpha_i`` of the time with boosted power
    ``P_i / alpha_i``; the other user overlaps a fraction ``beta_j`` of that.
    """
    p1 = np.asarray(p1, dtype=float)
    p2 = np.asarray(p2, dtype=float)
    a1, a2, b1, b2 = ts.alpha1, ts.alpha2, ts.beta1, ts.beta2
    zero = np.zeros(np.broadcast(p1, p2).shape)
    both = pair(p1 / a1, p2 / a2) if (a1 > 0 and a2 > 0) else (zero, zero)
    r1 = zero
    r2 = zero
    if a1 > 0:
        r1 = a1 * (1.0 - b2) * pair(p1 / a1, zero)[0] + a1 * b2 * both[0]
    if a2 > 0:
        r2 = a2 * (1.0 - b1) * pair(zero, p2 / a2)[1] + a2 * b1 * both[1]
    return r1, r2


def _check_powers(powers):
    p1, p2 = powers
    if p1 < 0 or p2 < 0:
        raise DomainError("transmit powers must be nonnegative")
    return float(p1), float(p2)


def rate_df(band: BandChannel, powers, tau=(0.0, 0.0), nu: float = 0.5) -> RatePair:
    p1, p2 = _check_powers(powers)
    t1, t2 = tau
    if min(t1, t2) < 0 or t1 + t2 > 1 + 1e-12:
        raise DomainError("tau must be nonnegative with tau1 + tau2 <= 1")
    if not 0 <= nu <= 1:
        raise DomainError("nu must lie in [0, 1]")
    r1, r2 = df_pair(band, p1, p2, t1, t2, nu)
    return RatePair(float(r1), float(r2))


def rate_ef(band: BandChannel, powers, nu: float = 0.5, cases: str = "select") -> EfCaseResult:
    p1, p2 = _check_powers(powers)
    if not 0 <= nu <= 1:
        raise DomainError("nu must lie in [0, 1]")
    r1, r2, case_id, nwz1, nwz2 = ef_pair(band, p1, p2, nu, cases)
    return EfCaseResult(int(case_id), float(nwz1), float(nwz2),
                        RatePair(float(r1), float(r2)))


def rate_af(band: BandChannel, powers, gain: float) -> RatePair:
    p1, p2 = _check_powers(powers)
    if gain < 0:
        raise DomainError("amplification gain must be nonnegative")
    r1, r2 = af_pair(band, p1, p2, gain)
    return RatePair(float(r1), float(r2))


def rate_ts(band: BandChannel, powers, ts: TsParams, inner: Callable) -> RatePair:
    """Time-sharing rates around ``inner(band, (p1, p2)) -> RatePair``."""
    p1, p2 = _check_powers(powers)
    bad = ts.violations()
    if bad:
        raise DomainError("; ".join(bad))

    def pair(x1, x2):
        rp = inner(band, (float(x1), float(x2)))
        return np.array(rp[0]), np.array(rp[1])

    r1, r2 = ts_pair(pair, ts, p1, p2)
    return RatePair(float(r1), float(r2))
