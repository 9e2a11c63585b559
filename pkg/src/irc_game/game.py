"""Multi-band power-allocation game between the two transmitters.

Each transmitter splits its total power over the bands, ``theta_i`` on the
simplex ``{theta in [0, 1]^Q : sum(theta) <= 1}``, and maximizes the sum of
its band rates.  Utilities are separable in the own allocation, which the
best-response search exploits: a dynamic program over a coarse grid finds
the global grid optimum, then a multiplier method refines it.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from . import kernels
from .scenario import DomainError, Protocol, Scenario

SIMPLEX_TOL = 1e-12
CONCAVITY_TOL = 1e-7


@dataclass(frozen=True)
class PowerAllocation:
    """Band fractions of both users; ``theta1[q]`` is user 1's share of band q."""

    theta1: tuple[float, ...]
    theta2: tuple[float, ...]

    def __post_init__(self):
        t1 = tuple(float(x) for x in np.ravel(self.theta1))
        t2 = tuple(float(x) for x in np.ravel(self.theta2))
        if len(t1) != len(t2) or not t1:
            raise DomainError("both users need one fraction per band")
        for name, t in (("theta1", t1), ("theta2", t2)):
            if any(not (0.0 <= x <= 1.0) for x in t) or sum(t) > 1.0 + SIMPLEX_TOL:
                raise DomainError(f"{name} must lie on the simplex (got {t})")
        object.__setattr__(self, "theta1", t1)
        object.__setattr__(self, "theta2", t2)

    @property
    def n_bands(self) -> int:
        return len(self.theta1)

    def of(self, user: int) -> np.ndarray:
        return np.array(self.theta1 if user == 0 else self.theta2)

    def with_user(self, user: int, theta) -> "PowerAllocation":
        if user == 0:
            return replace(self, theta1=tuple(theta))
        return replace(self, theta2=tuple(theta))

    def distance(self, other: "PowerAllocation") -> float:
        return float(max(np.max(np.abs(self.of(0) - other.of(0))),
                         np.max(np.abs(self.of(1) - other.of(1)))))

    @classmethod
    def uniform(cls, n_bands: int) -> "PowerAllocation":
        t = (1.0 / n_bands,) * n_bands
        return cls(t, t)

    @classmethod
    def two_band(cls, theta1: float, theta2: float) -> "PowerAllocation":
        """Full-power Q=2 state with ``theta_i`` on band 1 and the rest on band 2."""
        return cls((theta1, 1.0 - theta1), (theta2, 1.0 - theta2))


@dataclass(frozen=True)
class BrOptions:
    coarse_grid: int = 101
    refine_tol: float = 1e-8
    starts: int = 5  # refined grid candidates when the utility is not concave
    method: str = "grid+multiplier"

    def __post_init__(self):
        if self.coarse_grid < 3:
            raise DomainError("coarse_grid must be at least 3")
        if not self.refine_tol > 0:
            raise DomainError("refine_tol must be positive")
        if self.starts < 1:
            raise DomainError("starts must be at least 1")


@dataclass(frozen=True)
class BestResponse:
    theta: np.ndarray
    utility: float
    concave: bool  # False when the grid tables showed a convexity witness


@dataclass
class CournotTrace:
    states: list[PowerAllocation]
    converged: bool
    iterations: int
    fixed_point: PowerAllocation | None = None
    utilities: list[tuple[float, float]] = field(default_factory=list)


@dataclass(frozen=True)
class NeCheck:
    passed: bool
    improvements: tuple[float, float]

    @property
    def max_improvement(self) -> float:
        return max(self.improvements)


@dataclass(frozen=True)
class ConcavityCertificate:
    certified: bool
    witness: tuple[int, float, float] | None = None  # (band, theta, second difference)
    max_second_difference: float = -np.inf


@dataclass(frozen=True)
class DfCondition:
    holds: bool
    violations: tuple[tuple[int, int], ...] = ()  # (band, user)


def _scenario(protocol, scenario: Scenario) -> Scenario:
    if protocol is None or Protocol(protocol) is scenario.protocol:
        return scenario
    return scenario.with_protocol(protocol)


def _check_user(user: int):
    if user not in (0, 1):
        raise DomainError("user must be 0 or 1")


class _Game:
    """Packed view of a scenario for repeated evaluation."""

    def __init__(self, scenario: Scenario):
        self.scenario = scenario
        self.codes, self.packed = kernels.pack_scenario(scenario)
        self.totals = (scenario.p1, scenario.p2)

    def band_rates(self, theta: PowerAllocation) -> np.ndarray:
        """Array (Q, 2) of per-band rates."""
        if theta.n_bands != len(self.codes):
            raise DomainError("allocation and scenario disagree on the band count")
        out = np.empty((len(self.codes), 2))
        for q in range(len(self.codes)):
            out[q] = kernels.pair_rates(int(self.codes[q]), self.packed[q],
                                        theta.theta1[q] * self.totals[0],
                                        theta.theta2[q] * self.totals[1])
        return out

    def utility(self, theta: PowerAllocation, user: int) -> float:
        return float(self.band_rates(theta)[:, user].sum())

    def own_utility(self, user: int, own: np.ndarray, other: np.ndarray) -> float:
        tot, oth = self.totals[user], self.totals[1 - user]
        return float(sum(kernels.user_rate(int(self.codes[q]), self.packed[q], user,
                                           own[q] * tot, other[q] * oth)
                         for q in range(len(self.codes))))

    def tables(self, user: int, other: np.ndarray, grid: np.ndarray) -> np.ndarray:
        tot, oth = self.totals[user], self.totals[1 - user]
        return np.stack([kernels.rate_table(int(self.codes[q]), self.packed[q], user,
                                            grid * tot, other[q] * oth)
                         for q in range(len(self.codes))])

    def best_response(self, user: int, other: np.ndarray, opts: BrOptions) -> BestResponse:
        n = opts.coarse_grid - 1
        grid = np.linspace(0.0, 1.0, n + 1)
        f = self.tables(user, other, grid)
        concave = bool(np.all(f[:, :-2] - 2.0 * f[:, 1:-1] + f[:, 2:] <= CONCAVITY_TOL))
        starts = _grid_candidates(f, 1 if concave else opts.starts)
        other = np.asarray(other, dtype=float)
        best_theta, best_u = None, -np.inf
        tol = min(opts.refine_tol, 1e-12)
        for ks in starts:
            lo = np.maximum(ks - 2, 0) / n
            hi = np.minimum(ks + 2, n) / n
            theta_grid = ks / n
            theta = kernels.refine_br(self.codes, self.packed, user, self.totals[user],
                                      other * self.totals[1 - user], lo, hi, tol)
            theta = _to_simplex(theta)
            u = self.own_utility(user, theta, other)
            # derivative noise can leave a sliver of an active budget unused
            s = theta.sum()
            if 1.0 - 1e-6 < s < 1.0:
                full = theta / s
                u_full = self.own_utility(user, full, other)
                if u_full > u:
                    theta, u = full, u_full
            u_grid = self.own_utility(user, theta_grid, other)
            if u_grid > u:
                theta, u = theta_grid, u_grid
            if u > best_u + 1e-15:
                best_theta, best_u = theta, u
        return BestResponse(best_theta, best_u, concave)


def _to_simplex(theta: np.ndarray) -> np.ndarray:
    theta = np.clip(np.asarray(theta, dtype=float), 0.0, 1.0)
    s = theta.sum()
    if s > 1.0:
        theta = theta / s
    return theta


def _grid_candidates(f: np.ndarray, count: int) -> list[np.ndarray]:
    """Best grid allocations (index vectors with sum <= n) of a separable sum.

    ``f[q, k]`` is band q's value at k grid steps.  A dynamic program gives
    the best allocation of the first Q-1 bands for every budget; the last
    band's profile then yields up to ``count`` local maxima.
    """
    nb, n1 = f.shape
    n = n1 - 1
    k = np.arange(n1)
    # best[q][m]: value of bands 0..q with budget m; arg[q][m]: band q's steps
    best = [np.maximum.accumulate(f[0])]
    arg = [_running_argmax(f[0])]
    for q in range(1, nb - 1):
        m = k[:, None]
        idx = m - k[None, :]
        vals = np.where(idx >= 0, f[q][None, :] + best[-1][np.clip(idx, 0, n)], -np.inf)
        arg.append(np.argmax(vals, axis=1))
        best.append(vals[k, arg[-1]])
    if nb == 1:
        profile = f[0]
    else:
        profile = f[nb - 1] + best[-1][n - k]
    pad = np.concatenate(([-np.inf], profile, [-np.inf]))
    peaks = np.nonzero((pad[1:-1] >= pad[:-2]) & (pad[1:-1] >= pad[2:]))[0]
    peaks = peaks[np.argsort(-profile[peaks], kind="stable")][:count]
    out = []
    for kl in peaks:
        ks = np.zeros(nb, dtype=int)
        if nb == 1:
            ks[0] = kl
        else:
            ks[nb - 1] = kl
            budget = n - kl
            for q in range(nb - 2, -1, -1):
                ks[q] = arg[q][budget]
                budget -= ks[q]
        out.append(ks)
    return out


def _running_argmax(x: np.ndarray) -> np.ndarray:
    """Index of the first maximum of x[:m+1] for every m."""
    out = np.empty(len(x), dtype=int)
    bi = 0
    for i in range(len(x)):
        if x[i] > x[bi]:
            bi = i
        out[i] = bi
    return out


def utility(protocol, scenario: Scenario, theta: PowerAllocation, user: int) -> float:
    """Sum over bands of ``user``'s rate at allocation ``theta``."""
    _check_user(user)
    return _Game(_scenario(protocol, scenario)).utility(theta, user)


def utilities(protocol, scenario: Scenario, theta: PowerAllocation) -> tuple[float, float]:
    r = _Game(_scenario(protocol, scenario)).band_rates(theta).sum(axis=0)
    return float(r[0]), float(r[1])


def best_response(protocol, scenario: Scenario, opponent_theta, user: int,
                  opts: BrOptions | None = None) -> BestResponse:
    """Maximize ``user``'s utility over its simplex against ``opponent_theta``."""
    _check_user(user)
    opts = opts or BrOptions()
    other = np.asarray(opponent_theta, dtype=float)
    if other.shape != (scenario.n_bands,):
        raise DomainError("opponent allocation needs one fraction per band")
    return _Game(_scenario(protocol, scenario)).best_response(user, other, opts)


def cournot(protocol, scenario: Scenario, initial: PowerAllocation, max_iter: int = 1000,
            tol: float = 1e-8, opts: BrOptions | None = None,
            simultaneous: bool = False, damping: float = 1.0) -> CournotTrace:
    """Best-response iteration, user 1 first in each round.

    ``damping < 1`` moves each user only that fraction of the way to its best
    response.  The plain iteration can cycle even when every utility is
    concave; the relaxed one often settles on the equilibrium in that case.
    """
    if max_iter < 1:
        raise DomainError("max_iter must be at least 1")
    if not 0.0 < damping <= 1.0:
        raise DomainError("damping must lie in (0, 1]")
    opts = opts or BrOptions()
    g = _Game(_scenario(protocol, scenario))
    state = initial
    states = [state]
    utils = [(g.utility(state, 0), g.utility(state, 1))]
    for it in range(1, max_iter + 1):
        t1 = g.best_response(0, state.of(1), opts).theta
        if damping < 1.0:
            t1 = (1.0 - damping) * state.of(0) + damping * t1
        base = state.of(0) if simultaneous else t1
        t2 = g.best_response(1, base, opts).theta
        if damping < 1.0:
            t2 = (1.0 - damping) * state.of(1) + damping * t2
        new = PowerAllocation(t1, t2)
        step = new.distance(state)
        state = new
        states.append(state)
        utils.append((g.utility(state, 0), g.utility(state, 1)))
        if step < tol:
            return CournotTrace(states, True, it, state, utils)
    return CournotTrace(states, False, max_iter, None, utils)


def verify_ne(protocol, scenario: Scenario, theta: PowerAllocation, tol: float = 1e-6,
              opts: BrOptions | None = None) -> NeCheck:
    """Largest unilateral utility gain of each user; passes when both <= tol."""
    opts = opts or BrOptions()
    g = _Game(_scenario(protocol, scenario))
    gains = []
    for user in (0, 1):
        br = g.best_response(user, theta.of(1 - user), opts)
        gains.append(max(0.0, br.utility - g.utility(theta, user)))
    return NeCheck(all(x <= tol for x in gains), (gains[0], gains[1]))


def concavity_certificate(protocol, scenario: Scenario, user: int, opponent_theta,
                          samples: int = 101, tol: float = CONCAVITY_TOL) -> ConcavityCertificate:
    """Second-difference test of every band rate in the own share on [0, 1]."""
    _check_user(user)
    if samples < 3:
        raise DomainError("samples must be at least 3")
    g = _Game(_scenario(protocol, scenario))
    grid = np.linspace(0.0, 1.0, samples)
    f = g.tables(user, np.asarray(opponent_theta, dtype=float), grid)
    d2 = f[:, :-2] - 2.0 * f[:, 1:-1] + f[:, 2:]
    worst = float(d2.max())
    if worst <= tol:
        return ConcavityCertificate(True, None, worst)
    q, k = np.unravel_index(int(np.argmax(d2 > tol)), d2.shape)
    return ConcavityCertificate(False, (int(q), float(grid[k + 1]), float(d2[q, k])), worst)


def df_condition(scenario: Scenario) -> DfCondition:
    """Sign condition Re(h_ii conj(h_ri)) >= 0 for every user and band."""
    bad = []
    for q, b in enumerate(scenario.bands):
        for user, (hd, hr) in enumerate(((b.h11, b.hr1), (b.h22, b.hr2))):
            if (complex(hd) * complex(hr).conjugate()).real < 0:
                bad.append((q, user))
    return DfCondition(not bad, tuple(bad))


def ic_utility(scenario: Scenario, theta: PowerAllocation, user: int) -> float:
    """Parallel interference channel utility (relay ignored)."""
    _check_user(user)
    total = 0.0
    for q, b in enumerate(scenario.bands):
        p1 = theta.theta1[q] * scenario.p1
        p2 = theta.theta2[q] * scenario.p2
        if user == 0:
            sinr = abs(b.h11) ** 2 * p1 / (abs(b.h21) ** 2 * p2 + b.noise_d1)
        else:
            sinr = abs(b.h22) ** 2 * p2 / (abs(b.h12) ** 2 * p1 + b.noise_d2)
        total += float(np.log2(1.0 + sinr))
    return total
