"""Leader-follower sweeps: the relay operator fixes a parameter, the
transmitters settle at an equilibrium of the power-allocation game, and the
resulting sum-rate is recorded.

Also provides the single-band protocol dominance map and the EF sum-rate
cut used to exhibit the decoding-case frontier.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from . import kernels
from .af_analytic import affine_cournot, br_coefficients
from .game import BrOptions, PowerAllocation, cournot, utilities, verify_ne
from .scenario import DomainError, NodeLayout, Protocol, Scenario, layout_gains

VARIABLES = ("amplification", "nu", "relay_position")
POLICIES = ("cournot", "multistart", "analytic")
PRECEDENCE = ("DF", "EF", "AF")


@dataclass(frozen=True)
class SweepSpec:
    variable: str
    values: tuple = ()  # scalar sweeps
    xs: tuple = ()  # relay_position grid
    ys: tuple = ()
    band: int = 0  # band whose relay parameter is swept
    policy: str = "cournot"
    start: PowerAllocation | None = None
    max_iter: int = 1000
    tol: float = 1e-8
    verify_tol: float = 1e-6
    d_reading: str = "squared"
    br: BrOptions = field(default_factory=BrOptions)

    def __post_init__(self):
        if self.variable not in VARIABLES:
            raise DomainError(f"unknown sweep variable {self.variable!r}")
        if self.policy not in POLICIES:
            raise DomainError(f"unknown equilibrium policy {self.policy!r}")
        if self.variable == "relay_position":
            if len(self.xs) < 2 or len(self.ys) < 2:
                raise DomainError("position sweeps need at least 2 points per axis")
        elif len(self.values) < 2:
            raise DomainError("scalar sweeps need at least 2 values")
        if self.variable == "nu" and any(not 0 <= v <= 1 for v in self.values):
            raise DomainError("nu values must lie in [0, 1]")
        if self.variable == "amplification" and any(v < 0 for v in self.values):
            raise DomainError("amplification gains must be nonnegative")

    def leader_values(self) -> list:
        if self.variable == "relay_position":
            return [(float(x), float(y)) for x in self.xs for y in self.ys]
        return [float(v) for v in self.values]


@dataclass(frozen=True)
class SweepPoint:
    value: float | tuple[float, float]
    theta: PowerAllocation | None
    u1: float
    u2: float
    converged: bool
    iterations: int
    max_improvement: float
    verified: bool
    equilibria: tuple = ()  # distinct equilibria seen (multistart)

    @property
    def sum_rate(self) -> float:
        return self.u1 + self.u2


@dataclass
class SweepResult:
    spec: SweepSpec
    points: list[SweepPoint]

    def sum_rates(self) -> np.ndarray:
        return np.array([p.sum_rate for p in self.points])


def relocate(scenario: Scenario, layout: NodeLayout, x: float, y: float) -> Scenario:
    """Scenario with every band's gains recomputed for a relay at (x, y)."""
    lay = layout.with_relay(x, y)
    if len(lay.gamma) != scenario.n_bands:
        raise DomainError("layout and scenario disagree on the band count")
    bands = []
    for b, g in zip(scenario.bands, lay.gamma):
        nb = replace(b, **layout_gains(lay, g))
        bands.append(nb if b.has_relay else nb.without_relay())  # relay-free bands stay so
    return replace(scenario, bands=tuple(bands))


def _set_band(values: tuple, band: int, value) -> tuple:
    out = list(values)
    out[band] = value
    return tuple(out)


def apply_leader(spec: SweepSpec, template: Scenario, value,
                 layout: NodeLayout | None = None) -> Scenario:
    if spec.variable == "amplification":
        return replace(template, gain=_set_band(template.gain, spec.band, value))
    if spec.variable == "nu":
        return replace(template, nu=_set_band(template.nu, spec.band, value))
    if layout is None:
        raise DomainError("relay position sweeps need a node layout")
    return relocate(template, layout, *value)


def _starts(q: int) -> list[PowerAllocation]:
    """Uniform start plus every pair of simplex vertices except the all-zero one.

    Each user's vertices are the single-band strategies and silence, so two
    bands give 8 corners and the center.
    """
    verts = [np.zeros(q)] + list(np.eye(q))
    out = [PowerAllocation.uniform(q)]
    for a in verts:
        for b in verts:
            if a.any() or b.any():
                out.append(PowerAllocation(a, b))
    return out


def equilibrium(scenario: Scenario, policy: str = "cournot", *,
                start: PowerAllocation | None = None, max_iter: int = 1000,
                tol: float = 1e-8, verify_tol: float = 1e-6, d_reading: str = "squared",
                br: BrOptions | None = None) -> SweepPoint:
    """Followers' equilibrium of one scenario.

    ``cournot`` iterates from ``start`` (uniform by default), ``multistart``
    keeps the best sum-rate over the corner starts and records every distinct
    fixed point, ``analytic`` runs the exact affine map (two-band fixed-gain AF).
    """
    if policy not in POLICIES:
        raise DomainError(f"unknown equilibrium policy {policy!r}")
    br = br or BrOptions()
    start = start or PowerAllocation.uniform(scenario.n_bands)
    if policy == "analytic":
        if scenario.protocol is not Protocol.AF_FIXED or scenario.n_bands != 2:
            raise DomainError("the analytic policy needs a two-band fixed-gain AF scenario")
        c = br_coefficients(scenario, d_reading)
        t1, t2, iters, conv = affine_cournot(c, start.theta1[0], start.theta2[0],
                                             max_iter, tol)
        runs = [(PowerAllocation.two_band(t1, t2), conv, iters)]
    else:
        starts = [start] if policy == "cournot" else _starts(scenario.n_bands)
        runs = []
        for s in starts:
            tr = cournot(None, scenario, s, max_iter, tol, br)
            runs.append((tr.states[-1], tr.converged, tr.iterations))
    seen, best = [], None
    for theta, conv, iters in runs:
        if not conv:
            continue
        if not any(theta.distance(t) < 1e-6 for t in seen):
            seen.append(theta)
        u = utilities(None, scenario, theta)
        if best is None or sum(u) > sum(best[1]) + 1e-12:
            best = (theta, u, iters)
    if best is None:
        theta, _, iters = runs[0]
        u = utilities(None, scenario, theta)
        chk = verify_ne(None, scenario, theta, verify_tol, br)
        return SweepPoint(None, None, u[0], u[1], False, iters, chk.max_improvement, False)
    theta, u, iters = best
    chk = verify_ne(None, scenario, theta, verify_tol, br)
    return SweepPoint(None, theta, u[0], u[1], True, iters, chk.max_improvement,
                      chk.passed, tuple(seen))


def sweep(spec: SweepSpec, template: Scenario, layout: NodeLayout | None = None) -> SweepResult:
    """Evaluate the followers' equilibrium at every leader value (row-major)."""
    points = []
    for value in spec.leader_values():
        sc = apply_leader(spec, template, value, layout)
        pt = equilibrium(sc, spec.policy, start=spec.start, max_iter=spec.max_iter,
                         tol=spec.tol, verify_tol=spec.verify_tol,
                         d_reading=spec.d_reading, br=spec.br)
        points.append(replace(pt, value=value))
    return SweepResult(spec, points)


def best_leader_value(result: SweepResult):
    """Leader value with the largest equilibrium sum-rate among converged points.

    Ties go to the smallest value (lexicographic for positions).
    """
    pts = [p for p in result.points if p.converged]
    if not pts:
        raise DomainError("no converged sweep point")
    top = max(p.sum_rate for p in pts)
    ties = [p for p in pts if p.sum_rate >= top - 1e-12]
    best = min(ties, key=lambda p: p.value)
    return best.value, best.sum_rate


def saturating_gain_full(scenario: Scenario, band: int = 0) -> float:
    """Gain saturating the relay of ``band`` when both users put full power there."""
    b = scenario.bands[band]
    den = abs(b.h1r) ** 2 * scenario.p1 + abs(b.h2r) ** 2 * scenario.p2 + b.noise_r
    return math.sqrt(b.relay_power / den)


# ---------------------------------------------------------------- dominance


def _df_pairs(tau_grid) -> list[tuple[float, float]]:
    return [(a, b) for a in tau_grid for b in tau_grid if a + b <= 1.0 + 1e-12]


@dataclass(frozen=True)
class ProtocolSums:
    df: float
    ef: float
    af: float
    ef_case: int

    def label(self, tie_tol: float = 1e-6) -> str:
        vals = {"DF": self.df, "EF": self.ef, "AF": self.af}
        top = max(vals.values())
        return next(k for k in PRECEDENCE if vals[k] >= top - tie_tol)


def protocol_sums(band, p1: float, p2: float, nu_grid, tau_grid) -> ProtocolSums:
    """Full-power sum-rates of DF (best tau, nu), EF (best nu) and saturating AF."""
    df = -np.inf
    for tau in _df_pairs(tau_grid):
        for nu in nu_grid:
            r = kernels.pair_rates(kernels.DF, kernels.pack_band(band, tau=tau, nu=nu), p1, p2)
            df = max(df, r[0] + r[1])
    ef, ef_nu = -np.inf, 0.5
    for nu in nu_grid:
        r = kernels.pair_rates(kernels.EF_SELECT, kernels.pack_band(band, nu=nu), p1, p2)
        if r[0] + r[1] > ef:
            ef, ef_nu = r[0] + r[1], nu
    r = kernels.pair_rates(kernels.AF_SAT, kernels.pack_band(band), p1, p2)
    return ProtocolSums(float(df), float(ef), float(r[0] + r[1]), ef_case(band, p1, p2, ef_nu))


def ef_case(band, p1: float, p2: float, nu: float) -> int:
    from .rates import ef_pair  # vectorized helper exposes the case id
    return int(ef_pair(band, p1, p2, nu, "select")[2])


@dataclass
class DominanceMap:
    xs: np.ndarray
    ys: np.ndarray
    labels: np.ndarray  # shape (len(xs), len(ys)), entries from PRECEDENCE
    df: np.ndarray
    ef: np.ndarray
    af: np.ndarray
    ef_case: np.ndarray

    def counts(self) -> dict[str, int]:
        return {k: int(np.sum(self.labels == k)) for k in PRECEDENCE}


DEFAULT_NU_GRID = tuple(np.linspace(0.0, 1.0, 21))
DEFAULT_TAU_GRID = (0.0, 0.25, 0.5)


def dominance_map(scenario: Scenario, layout: NodeLayout, xs, ys,
                  nu_grid=DEFAULT_NU_GRID, tau_grid=DEFAULT_TAU_GRID,
                  tie_tol: float = 1e-6) -> DominanceMap:
    """Best protocol at every relay position of the grid (single band, full power)."""
    if scenario.n_bands != 1:
        raise DomainError("dominance maps are defined for single-band scenarios")
    xs, ys = np.asarray(xs, dtype=float), np.asarray(ys, dtype=float)
    shape = (xs.size, ys.size)
    out = {k: np.empty(shape) for k in ("df", "ef", "af")}
    labels = np.empty(shape, dtype="<U2")
    cases = np.empty(shape, dtype=int)
    for i, x in enumerate(xs):
        for j, y in enumerate(ys):
            band = relocate(scenario, layout, x, y).bands[0]
            s = protocol_sums(band, scenario.p1, scenario.p2, nu_grid, tau_grid)
            out["df"][i, j], out["ef"][i, j], out["af"][i, j] = s.df, s.ef, s.af
            labels[i, j] = s.label(tie_tol)
            cases[i, j] = s.ef_case
    return DominanceMap(xs, ys, labels, out["df"], out["ef"], out["af"], cases)


@dataclass
class EfCut:
    xs: np.ndarray
    y: float
    sum_rate: np.ndarray
    case: np.ndarray
    crossings: list = field(default_factory=list)  # (x, jump, adjacent variation)


def ef_cut(scenario: Scenario, layout: NodeLayout, xs, y: float,
           nu_grid=DEFAULT_NU_GRID) -> EfCut:
    """EF best-nu sum-rate along a horizontal relay cut, with case-frontier jumps.

    At each change of decoding case the frontier is located by bisection and
    the jump is measured between one-sided limits; it is reported next to the
    larger variation of the two neighbouring grid cells.
    """
    xs = np.asarray(xs, dtype=float)

    def at(x):
        band = relocate(scenario, layout, x, y).bands[0]
        best, best_case = -np.inf, 0
        for nu in nu_grid:
            r = kernels.pair_rates(kernels.EF_SELECT, kernels.pack_band(band, nu=nu),
                                   scenario.p1, scenario.p2)
            if r[0] + r[1] > best:
                best, best_case = r[0] + r[1], ef_case(band, scenario.p1, scenario.p2, nu)
        return best, best_case

    vals = [at(x) for x in xs]
    s = np.array([v[0] for v in vals])
    c = np.array([v[1] for v in vals])
    crossings = []
    for k in np.nonzero(np.diff(c))[0]:
        a, b = xs[k], xs[k + 1]
        ca = c[k]
        for _ in range(60):
            m = 0.5 * (a + b)
            if at(m)[1] == ca:
                a = m
            else:
                b = m
        jump = abs(at(b)[0] - at(a)[0])
        left = abs(s[k] - s[k - 1]) if k >= 1 else 0.0
        right = abs(s[k + 2] - s[k + 1]) if k + 2 < s.size else 0.0
        crossings.append((0.5 * (a + b), float(jump), float(max(left, right))))
    return EfCut(xs, float(y), s, c, crossings)
