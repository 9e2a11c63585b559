"""Closed-form analysis of the two-band fixed-gain AF game.

With two bands and full power use, user i puts ``theta_i`` on band 1 and
``1 - theta_i`` on band 2.  Its utility is then concave in ``theta_i`` and
the stationarity condition is affine, so each best response is a clamped
line ``BR_i(theta_j) = clip((d_i - c_ij theta_j) / c_ii, 0, 1)``.

Equilibria are found exactly: either some coordinate sits on a clamp
(0 or 1), which pins the other through its best response, or both are
interior and solve the 2x2 linear system.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import kernels
from .scenario import DomainError, Scenario

EQ_TOL = 1e-12


@dataclass(frozen=True)
class BrCoefficients:
    c11: float
    c12: float
    c21: float
    c22: float
    d1: float
    d2: float

    @property
    def c(self) -> tuple[float, float, float, float]:
        return (self.c11, self.c12, self.c21, self.c22)

    @property
    def d(self) -> tuple[float, float]:
        return (self.d1, self.d2)

    @property
    def det(self) -> float:
        return self.c11 * self.c22 - self.c12 * self.c21

    def row(self, user: int) -> tuple[float, float, float]:
        """(c_ii, c_ij, d_i) of ``user`` (0 or 1)."""
        if user == 0:
            return self.c11, self.c12, self.d1
        return self.c22, self.c21, self.d2

    def swapped(self) -> "BrCoefficients":
        return BrCoefficients(self.c22, self.c21, self.c12, self.c11, self.d2, self.d1)


@dataclass(frozen=True)
class NePoint:
    theta1: float
    theta2: float
    kind: str  # interior | border | segment-member
    stability: str  # stable | unstable | neutral
    slope_product: float


@dataclass(frozen=True)
class NeSet:
    points: tuple[NePoint, ...]
    cardinality: str  # one | two | three | infinite
    segment: tuple[tuple[float, float], tuple[float, float]] | None = None


def _af_terms(band, gain: float, user: int, p_own: float, p_other: float, d_reading: str):
    """(alpha, beta, gamma) of one band: SINR = alpha t / (beta t_j + gamma)."""
    b = band if user == 0 else band.swapped()
    nd = b.noise_d1
    alpha = abs(gain * b.hr1 * b.h1r + b.h11) ** 2 * p_own / nd
    beta = abs(gain * b.hr1 * b.h2r + b.h21) ** 2 * p_other / nd
    if d_reading == "squared":
        gamma = gain * gain * abs(b.hr1) ** 2 * b.noise_r / nd + 1.0
    elif d_reading == "literal":
        gamma = gain * abs(b.hr1) ** 2 * b.noise_r / nd + 1.0
    else:
        raise DomainError(f"unknown d reading {d_reading!r}")
    return alpha, beta, gamma


def br_coefficients(scenario: Scenario, d_reading: str = "squared") -> BrCoefficients:
    """Affine best-response coefficients of a two-band fixed-gain AF scenario.

    Coefficients are normalized by ``rho_i = P_i / N_i`` (band-1 noise), which
    gives the familiar ``c_ii = 2 |A h_ri h_ir + h_ii|^2 |A g_ri g_ir + g_ii|^2 rho_i``
    form when noises are common to both bands.  ``d_reading="literal"`` uses
    ``A |h_ri|^2 + 1`` in place of the relay-noise term ``A^2 |h_ri|^2 + 1``.
    """
    if scenario.n_bands != 2:
        raise DomainError("the affine analysis needs exactly two bands")
    gains = scenario.gain
    if any(g is None for g in gains):
        raise DomainError("the affine analysis needs fixed relay gains in both bands")
    out = []
    for user in (0, 1):
        p_own, p_other = (scenario.p1, scenario.p2) if user == 0 else (scenario.p2, scenario.p1)
        a1, b1, g1 = _af_terms(scenario.bands[0], gains[0], user, p_own, p_other, d_reading)
        a2, b2, g2 = _af_terms(scenario.bands[1], gains[1], user, p_own, p_other, d_reading)
        noise = scenario.bands[0].noise_d1 if user == 0 else scenario.bands[0].noise_d2
        rho = p_own / noise if p_own > 0 else 1.0
        cii = 2.0 * a1 * a2 / rho
        cij = (a1 * b2 + a2 * b1) / rho
        di = (a1 * (a2 + b2 + g2) - a2 * g1) / rho
        out.append((cii, cij, di))
    (c11, c12, d1), (c22, c21, d2) = out
    return BrCoefficients(c11, c12, c21, c22, d1, d2)


def _require(coeffs: BrCoefficients):
    if not (coeffs.c11 > 0 and coeffs.c22 > 0):
        raise DomainError("degenerate coefficients: c11 and c22 must be positive")


def affine_value(coeffs: BrCoefficients, user: int, theta_other: float) -> float:
    """Unclamped ``F_i(theta_j)``."""
    cii, cij, di = coeffs.row(user)
    return (di - cij * theta_other) / cii


def br_affine(coeffs: BrCoefficients, user: int, theta_other: float) -> float:
    """Clamped affine best response of ``user`` (0 or 1)."""
    _require(coeffs)
    cii, cij, di = coeffs.row(user)
    return kernels.affine_br(cii, cij, di, float(theta_other))


def interior_ne(coeffs: BrCoefficients) -> tuple[float, float]:
    """Intersection of the two unclamped lines (may lie outside the unit square)."""
    det = coeffs.det
    scale = max(abs(coeffs.c11 * coeffs.c22), abs(coeffs.c12 * coeffs.c21), 1e-300)
    if abs(det) <= EQ_TOL * scale:
        raise DomainError("parallel best-response lines: no unique intersection")
    t1 = (coeffs.c22 * coeffs.d1 - coeffs.c12 * coeffs.d2) / det
    t2 = (coeffs.c11 * coeffs.d2 - coeffs.c21 * coeffs.d1) / det
    return t1, t2


def _slope(coeffs: BrCoefficients, user: int, theta_other: float) -> float:
    """|dBR_i/dtheta_j|, the larger one-sided value on a clamp boundary."""
    cii, cij, _ = coeffs.row(user)
    f = affine_value(coeffs, user, theta_other)
    if f < -EQ_TOL or f > 1.0 + EQ_TOL:
        return 0.0
    return cij / cii


def stability(coeffs: BrCoefficients, theta1: float, theta2: float) -> tuple[str, float]:
    """Stability tag and slope product of the best-response maps at a point."""
    prod = _slope(coeffs, 0, theta2) * _slope(coeffs, 1, theta1)
    if abs(prod - 1.0) <= EQ_TOL:
        return "neutral", prod
    return ("stable" if prod < 1.0 else "unstable"), prod


def _is_fixed(coeffs, t1, t2) -> bool:
    return (abs(br_affine(coeffs, 0, t2) - t1) <= EQ_TOL
            and abs(br_affine(coeffs, 1, t1) - t2) <= EQ_TOL)


def _superposed(coeffs: BrCoefficients) -> bool:
    c11, c12, c21, c22 = coeffs.c
    d1, d2 = coeffs.d
    scale = max(abs(c11 * c22), abs(c12 * c21), abs(c11 * d2), abs(c21 * d1),
                abs(c12 * d2), abs(c22 * d1), 1e-300)
    return (abs(coeffs.det) <= EQ_TOL * scale and abs(c11 * d2 - c21 * d1) <= EQ_TOL * scale
            and abs(c12 * d2 - c22 * d1) <= EQ_TOL * scale)


def _segment(coeffs: BrCoefficients):
    """Part of the common line ``c11 t1 + c12 t2 = d1`` inside the unit square."""
    c11, c12, d1 = coeffs.c11, coeffs.c12, coeffs.d1
    if c12 == 0.0:
        t1 = d1 / c11
        if not -EQ_TOL <= t1 <= 1 + EQ_TOL:
            return None
        t1 = min(max(t1, 0.0), 1.0)
        return (t1, 0.0), (t1, 1.0)
    # t1 = (d1 - c12 t2) / c11 is decreasing in t2; clip t2 so that t1 in [0, 1]
    lo = max(0.0, (d1 - c11) / c12)
    hi = min(1.0, d1 / c12)
    if lo > hi + EQ_TOL:
        return None
    hi = max(hi, lo)
    return ((d1 - c12 * lo) / c11, lo), ((d1 - c12 * hi) / c11, hi)


def _kind(t1, t2) -> str:
    return "interior" if (0.0 < t1 < 1.0 and 0.0 < t2 < 1.0) else "border"


_CARD = {1: "one", 2: "two", 3: "three"}


def enumerate_ne(coeffs: BrCoefficients) -> NeSet:
    """All pure equilibria of the clamped-affine best-response pair.

    Sign cases of ``(d1, d2)``: when both are nonpositive the best responses
    are identically zero and (0, 0) is the unique equilibrium; when exactly
    one is positive the other user stays silent.  Otherwise equilibria are
    collected from the clamp faces and the interior intersection, which
    covers unique, two-point (boundary coincidence) and three-point
    configurations, and superposed lines give a segment.
    """
    _require(coeffs)
    if coeffs.d1 <= 0 and coeffs.d2 <= 0:
        return NeSet((NePoint(0.0, 0.0, "border", "stable", 0.0),), "one")
    if _superposed(coeffs):
        seg = _segment(coeffs)
        if seg is not None:
            pts = tuple(NePoint(t1, t2, "segment-member", "neutral", 1.0) for t1, t2 in seg)
            return NeSet(pts, "infinite", seg)
    found: list[tuple[float, float]] = []

    def add(t1, t2):
        if _is_fixed(coeffs, t1, t2) and not any(
                abs(t1 - a) <= 1e-10 and abs(t2 - b) <= 1e-10 for a, b in found):
            found.append((t1, t2))

    for t1 in (0.0, 1.0):
        add(t1, br_affine(coeffs, 1, t1))
    for t2 in (0.0, 1.0):
        add(br_affine(coeffs, 0, t2), t2)
    try:
        t1, t2 = interior_ne(coeffs)
    except DomainError:
        pass
    else:
        if -EQ_TOL <= t1 <= 1 + EQ_TOL and -EQ_TOL <= t2 <= 1 + EQ_TOL:
            add(min(max(t1, 0.0), 1.0), min(max(t2, 0.0), 1.0))
    if not found:  # cannot happen for valid coefficients; the map has a fixed point
        raise DomainError("no equilibrium found; coefficients are inconsistent")
    found.sort()
    pts = []
    for t1, t2 in found:
        tag, prod = stability(coeffs, t1, t2)
        pts.append(NePoint(t1, t2, _kind(t1, t2), tag, prod))
    return NeSet(tuple(pts), _CARD[len(pts)])


def affine_cournot(coeffs: BrCoefficients, theta1: float, theta2: float,
                   max_iter: int = 1000, tol: float = 1e-12):
    """Exact Cournot iteration; returns ``(theta1, theta2, iterations, converged)``."""
    _require(coeffs)
    return kernels.affine_cournot(coeffs.c, coeffs.d, float(theta1), float(theta2),
                                  int(max_iter), float(tol))


@dataclass(frozen=True)
class BasinMap:
    theta1: np.ndarray  # starting points, shape (n, n)
    theta2: np.ndarray
    label: np.ndarray  # index into ne.points, -1 when not converged to a listed NE
    iterations: np.ndarray
    ne: NeSet


def basin_map(coeffs: BrCoefficients, resolution: int = 101, max_iter: int = 1000,
              tol: float = 1e-12, match_tol: float = 1e-8) -> BasinMap:
    """Label every start of a uniform grid on [0, 1]^2 with the NE it reaches."""
    if resolution < 2:
        raise DomainError("resolution must be at least 2")
    ne = enumerate_ne(coeffs)
    axis = np.linspace(0.0, 1.0, resolution)
    s1, s2 = np.meshgrid(axis, axis, indexing="ij")
    f1, f2, iters, conv = kernels.affine_cournot_grid(coeffs.c, coeffs.d, s1, s2,
                                                      int(max_iter), float(tol))
    label = np.full(f1.shape, -1, dtype=int)
    for k, p in enumerate(ne.points):
        hit = conv & (np.abs(f1 - p.theta1) <= match_tol) & (np.abs(f2 - p.theta2) <= match_tol)
        label[hit & (label < 0)] = k
    if ne.segment is not None:
        (a1, a2), (b1, b2) = ne.segment
        on = conv & _on_segment(f1, f2, a1, a2, b1, b2, match_tol)
        label[on & (label < 0)] = len(ne.points)
    shape = s1.shape
    return BasinMap(s1, s2, label.reshape(shape), iters.reshape(shape), ne)


def _on_segment(x, y, a1, a2, b1, b2, tol):
    dx, dy = b1 - a1, b2 - a2
    length2 = dx * dx + dy * dy
    if length2 == 0.0:
        return (np.abs(x - a1) <= tol) & (np.abs(y - a2) <= tol)
    t = np.clip(((x - a1) * dx + (y - a2) * dy) / length2, 0.0, 1.0)
    return np.hypot(x - (a1 + t * dx), y - (a2 + t * dy)) <= tol


def saturating_fixed_gains(scenario: Scenario) -> tuple[float, ...]:
    """Gains saturating each relay at full power on every band."""
    out = []
    for b in scenario.bands:
        den = abs(b.h1r) ** 2 * scenario.p1 + abs(b.h2r) ** 2 * scenario.p2 + b.noise_r
        out.append(math.sqrt(b.relay_power / den) if b.relay_power > 0 else 0.0)
    return tuple(out)
