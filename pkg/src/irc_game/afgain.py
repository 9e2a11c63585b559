"""Optimal amplification gain of a zero-delay scalar AF relay.

For user i the rate as a function of the relay gain ``a`` is

    R(a) = log2(1 + |m a + n|^2 / (|p a + q|^2 + s a^2 + 1))

with composite coefficients built from the band (see ``gain_params``).
Its stationary points solve a quadratic; the maximizer over ``[0, a_max]``
is one of ``0``, ``a_max`` or an interior root.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize_scalar

from .rates import af_pair, capacity
from .scenario import BandChannel, DomainError

DEGENERATE_TOL = 1e-14


@dataclass(frozen=True)
class GainParams:
    m: complex
    n: complex
    p: complex
    q: complex
    s: float

    def __post_init__(self):
        vals = [self.m, self.n, self.p, self.q, self.s]
        if not all(np.isfinite(complex(v)) for v in vals):
            raise DomainError("gain parameters must be finite")
        if self.s < 0:
            raise DomainError("s must be nonnegative")

    def rate(self, a):
        a = np.asarray(a, dtype=float)
        num = np.abs(self.m * a + self.n) ** 2
        den = np.abs(self.p * a + self.q) ** 2 + self.s * a * a + 1.0
        return capacity(num / den)

    def asymptote(self) -> float:
        """Rate limit as the gain grows without bound."""
        den = abs(self.p) ** 2 + self.s
        if den == 0.0:
            return math.inf if self.m != 0 else float(capacity(abs(self.n) ** 2))
        return float(capacity(abs(self.m) ** 2 / den))


@dataclass(frozen=True)
class GainSolution:
    optimum: float
    rate: float
    candidates: list = field(default_factory=list)  # (gain, rate) pairs
    discriminant: float = 0.0
    roots: tuple = ()


def gain_params(band: BandChannel, powers, user: int) -> GainParams:
    """Composite coefficients of ``user`` (0 or 1) in ``band``.

    With ``rho_k = P_k / N_user``: m = h_ur h_ru sqrt(rho_u),
    n = h_uu sqrt(rho_u), p = h_or h_ru sqrt(rho_o), q = h_ou sqrt(rho_o),
    s = |h_ru|^2 N_r / N_user (``o`` is the other user).
    """
    if user not in (0, 1):
        raise DomainError("user must be 0 or 1")
    b = band if user == 0 else band.swapped()
    p_own, p_oth = (powers[0], powers[1]) if user == 0 else (powers[1], powers[0])
    if p_own < 0 or p_oth < 0:
        raise DomainError("transmit powers must be nonnegative")
    nd = b.noise_d1
    ro, rt = math.sqrt(p_own / nd), math.sqrt(p_oth / nd)
    return GainParams(
        m=complex(b.h1r * b.hr1 * ro), n=complex(b.h11 * ro),
        p=complex(b.h2r * b.hr1 * rt), q=complex(b.h21 * rt),
        s=abs(b.hr1) ** 2 * b.noise_r / nd,
    )


def quadratic_coeffs(gp: GainParams) -> tuple[float, float, float]:
    """(A, B, C) of A a^2 + B a + C = 0 whose roots are the stationary points."""
    m2, n2 = abs(gp.m) ** 2, abs(gp.n) ** 2
    p2s = abs(gp.p) ** 2 + gp.s
    q21 = abs(gp.q) ** 2 + 1.0
    re_mn = (gp.m * gp.n.conjugate()).real
    re_pq = (gp.p * gp.q.conjugate()).real
    return (m2 * re_pq - p2s * re_mn, m2 * q21 - n2 * p2s, q21 * re_mn - n2 * re_pq)


def critical_points(gp: GainParams) -> tuple[float, ...]:
    """Real roots of the stationarity quadratic, sorted ascending."""
    a, b, c = quadratic_coeffs(gp)
    scale = max(abs(a), abs(b), abs(c))
    if scale == 0.0:
        return ()
    if abs(a) < DEGENERATE_TOL * scale:
        if abs(b) < DEGENERATE_TOL * scale:
            return ()
        return (-c / b,)
    disc = b * b - 4.0 * a * c
    if disc < 0.0:
        return ()
    # cancellation-free form of the quadratic formula
    t = -0.5 * (b + math.copysign(math.sqrt(disc), b))
    r1 = t / a
    r2 = c / t if t != 0.0 else r1
    return tuple(sorted({r1, r2}))


def discriminant(gp: GainParams) -> float:
    a, b, c = quadratic_coeffs(gp)
    return b * b - 4.0 * a * c


def optimal_gain(gp: GainParams, a_max: float) -> GainSolution:
    """Maximize the user rate over ``[0, a_max]`` by candidate evaluation."""
    if not a_max >= 0:
        raise DomainError("a_max must be nonnegative")
    roots = critical_points(gp)
    cands = sorted({0.0, float(a_max)} | {r for r in roots if 0.0 < r < a_max})
    rates = [float(gp.rate(a)) for a in cands]
    best = int(np.argmax(rates))  # first maximum is the smallest gain
    return GainSolution(optimum=cands[best], rate=rates[best],
                        candidates=list(zip(cands, rates)),
                        discriminant=discriminant(gp), roots=roots)


def real_gain_roots(gp: GainParams) -> tuple[float | None, float | None]:
    """Closed-form roots for real coefficients (None where undefined)."""
    m, n, p, q, s = gp.m.real, gp.n.real, gp.p.real, gp.q.real, gp.s
    c1 = -n / m if m != 0 else None
    den = m * q * p - p * p * n - n * s
    c2 = -(m * q * q + m - p * q * n) / den if den != 0 else None
    return c1, c2


def sum_rate(band: BandChannel, powers, gain):
    r1, r2 = af_pair(band, powers[0], powers[1], gain)
    return r1 + r2


def sum_rate_gain(band: BandChannel, powers, a_max: float, grid_n: int = 1001) -> float:
    """Gain maximizing R1 + R2 over ``[0, a_max]``: grid scan, then golden section."""
    if grid_n < 2:
        raise DomainError("grid_n must be at least 2")
    if not a_max >= 0:
        raise DomainError("a_max must be nonnegative")
    if a_max == 0:
        return 0.0
    grid = np.linspace(0.0, a_max, grid_n)
    vals = sum_rate(band, powers, grid)
    k = int(np.argmax(vals))
    neg = lambda a: -float(sum_rate(band, powers, a))  # noqa: E731
    lo, hi = grid[max(k - 1, 0)], grid[min(k + 1, grid_n - 1)]
    if 0 < k < grid_n - 1 and vals[k] > max(vals[k - 1], vals[k + 1]):
        res = minimize_scalar(neg, bracket=(lo, grid[k], hi), method="golden",
                              options={"xtol": 1e-12})
    else:
        res = minimize_scalar(neg, bounds=(lo, hi), method="bounded",
                              options={"xatol": 1e-12})
    x = float(np.clip(res.x, 0.0, a_max))
    return x if -neg(x) > vals[k] else float(grid[k])
