import itertools
from dataclasses import replace

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import gen
import oracles
from irc_game import af_analytic as aa
from irc_game import canonical, game, rates
from irc_game.game import BrOptions, PowerAllocation
from irc_game.scenario import BandChannel, DomainError, Protocol, Scenario

seeds = st.integers(0, 2 ** 32 - 1)


def brute_best(sc, user, other, n=201):
    """Best utility over a uniform grid of the user's simplex (Q = 2)."""
    g = game._Game(sc)
    a = np.linspace(0.0, 1.0, n)
    best = -np.inf
    for x in a:
        for y in a[a <= 1.0 - x + 1e-12]:
            best = max(best, g.own_utility(user, np.array([x, y]), np.asarray(other)))
    return best


# allocations ------------------------------------------------------------------

def test_power_allocation_validation():
    with pytest.raises(DomainError):
        PowerAllocation((0.7, 0.4), (0.5, 0.5))
    with pytest.raises(DomainError):
        PowerAllocation((-0.1, 0.4), (0.5, 0.5))
    with pytest.raises(DomainError):
        PowerAllocation((0.5,), (0.5, 0.5))
    t = PowerAllocation.two_band(0.25, 1.0)
    assert t.theta1 == (0.25, 0.75) and t.theta2 == (1.0, 0.0)
    assert t.distance(PowerAllocation.two_band(0.5, 1.0)) == 0.25


def test_options_validation():
    with pytest.raises(DomainError):
        BrOptions(coarse_grid=2)
    with pytest.raises(DomainError):
        BrOptions(refine_tol=0.0)


# utilities ----------------------------------------------------------------------

@pytest.mark.parametrize("protocol", ["DF", "EF", "AF", "AF_FIXED"])
def test_single_band_full_power_is_band_rate(protocol):
    rng = np.random.default_rng(0)
    sc = gen.scenario(rng, protocol, q=1)
    theta = PowerAllocation((1.0,), (1.0,))
    b, p = sc.bands[0], (sc.p1, sc.p2)
    ref = {
        "DF": lambda: rates.rate_df(b, p, sc.tau[0], sc.nu[0]),
        "EF": lambda: rates.rate_ef(b, p, sc.nu[0], "interference").rates,
        "AF": lambda: rates.rate_af(b, p, rates.saturating_gain(b, p)),
        "AF_FIXED": lambda: rates.rate_af(b, p, sc.gain[0]),
    }[protocol]()
    assert game.utilities(None, sc, theta) == pytest.approx((ref.r1, ref.r2), abs=1e-12)


@pytest.mark.parametrize("protocol", list(Protocol))
def test_silent_user_has_zero_utility(protocol):
    sc = gen.scenario(np.random.default_rng(1), protocol)
    theta = PowerAllocation((0.0, 0.0), (0.3, 0.6))
    assert game.utility(None, sc, theta, 0) == 0.0


def test_three_equilibria_utility_matches_oracle():
    sc = canonical.three_equilibria_scenario()
    theta = PowerAllocation.two_band(0.5, 0.5)
    ref = [0.0, 0.0]
    for k, b in enumerate(sc.bands):
        r = oracles.af_rates(b, 0.5 * sc.p1, 0.5 * sc.p2, sc.gain[k])
        ref[0] += r[0]
        ref[1] += r[1]
    assert game.utilities(None, sc, theta) == pytest.approx(tuple(ref), abs=1e-12)


def test_saturating_gain_follows_allocation():
    sc = gen.scenario(np.random.default_rng(2), "AF")
    theta = PowerAllocation((0.3, 0.5), (0.6, 0.1))
    ref = 0.0
    for k, b in enumerate(sc.bands):
        p = (theta.theta1[k] * sc.p1, theta.theta2[k] * sc.p2)
        ref += oracles.af_rates(b, *p, oracles.saturating(b, *p))[0]
    assert game.utility(None, sc, theta, 0) == pytest.approx(ref, abs=1e-12)
    full = replace(sc, gain_denominator="full")
    ref = 0.0
    for k, b in enumerate(sc.bands):
        p = (theta.theta1[k] * sc.p1, theta.theta2[k] * sc.p2)
        ref += oracles.af_rates(b, *p, oracles.saturating(b, sc.p1, sc.p2))[0]
    assert game.utility(None, full, theta, 0) == pytest.approx(ref, abs=1e-12)


@settings(max_examples=50, deadline=None)
@given(seeds, st.sampled_from(list(Protocol)))
def test_band_permutation_invariance(seed, protocol):
    rng = np.random.default_rng(seed)
    sc = gen.scenario(rng, protocol, q=3, noises=True)
    theta = PowerAllocation(gen.opponent(rng, 3), gen.opponent(rng, 3))
    perm = list(rng.permutation(3))
    pick = lambda t: tuple(t[i] for i in perm)  # noqa: E731
    sp = replace(sc, bands=pick(sc.bands), tau=pick(sc.tau), nu=pick(sc.nu),
                 gain=pick(sc.gain), ts=pick(sc.ts))
    tp = PowerAllocation(pick(theta.theta1), pick(theta.theta2))
    assert game.utilities(None, sp, tp) == pytest.approx(game.utilities(None, sc, theta),
                                                         abs=1e-12)


@settings(max_examples=50, deadline=None)
@given(seeds, st.sampled_from([Protocol.AF, Protocol.EF, Protocol.AF_FIXED, Protocol.DF]))
def test_interference_channel_reduction(seed, protocol):
    rng = np.random.default_rng(seed)
    q = int(rng.integers(1, 4))
    sc = gen.scenario(rng, protocol, q=q, relay_power=0.0, noises=True)
    if protocol is Protocol.DF:
        sc = replace(sc, bands=tuple(b.without_relay() for b in sc.bands))
    if protocol is Protocol.AF_FIXED:
        sc = replace(sc, gain=(0.0,) * q)
    theta = PowerAllocation(gen.opponent(rng, q), gen.opponent(rng, q))
    for user in (0, 1):
        assert game.utility(None, sc, theta, user) == pytest.approx(
            game.ic_utility(sc, theta, user), abs=1e-12)


def test_df_without_relay_power_keeps_relay_constraint():
    rng = np.random.default_rng(3)
    sc = gen.scenario(rng, "DF", relay_power=0.0)
    sc = replace(sc, tau=((0.0, 0.0),) * 2)
    theta = PowerAllocation((0.4, 0.6), (0.7, 0.2))
    ref = sum(oracles.df_rates(b, theta.theta1[k] * sc.p1, theta.theta2[k] * sc.p2, 0, 0,
                               sc.nu[k])[0] for k, b in enumerate(sc.bands))
    assert game.utility(None, sc, theta, 0) == pytest.approx(ref, abs=1e-12)
    assert game.utility(None, sc, theta, 0) <= game.ic_utility(sc, theta, 0) + 1e-12


# best responses -------------------------------------------------------------------

def test_interference_free_single_band_uses_full_power():
    b = BandChannel(1.0, 0.0, 0.0, 1.0, 0.5, 0.5, 0.7, 0.7, relay_power=2.0)
    for protocol in ("AF", "EF", "AF_FIXED"):
        sc = Scenario((b,), 3.0, 2.0, protocol, gain=(0.4,))
        for other in (0.0, 0.5, 1.0):
            assert game.best_response(None, sc, (other,), 0).theta[0] == pytest.approx(1.0)


@pytest.mark.parametrize("protocol,kw", [("EF", {}), ("DF", {"df_sign": True}),
                                         ("AF_FIXED", {}), ("AF", {}), ("DF", {})])
def test_best_response_against_brute_force(protocol, kw):
    rng = np.random.default_rng(4)
    for _ in range(4):
        sc = gen.scenario(rng, protocol, **kw)
        other = gen.opponent(rng)
        for user in (0, 1):
            br = game.best_response(None, sc, other, user)
            assert br.utility >= brute_best(sc, user, other) - 1e-9


def test_three_band_best_response_against_brute_force():
    rng = np.random.default_rng(5)
    sc = gen.scenario(rng, "EF", q=3)
    other = gen.opponent(rng, 3)
    br = game.best_response(None, sc, other, 0)
    g = game._Game(sc)
    a = np.linspace(0, 1, 41)
    best = max(g.own_utility(0, np.array(t), other)
               for t in itertools.product(a, a, a) if sum(t) <= 1 + 1e-12)
    assert br.utility >= best - 1e-9


@settings(max_examples=40, deadline=None)
@given(seeds, st.sampled_from(list(Protocol)))
def test_best_response_stays_on_simplex(seed, protocol):
    rng = np.random.default_rng(seed)
    q = int(rng.integers(1, 4))
    sc = gen.scenario(rng, protocol, q=q)
    br = game.best_response(None, sc, gen.opponent(rng, q), int(rng.integers(2)))
    assert (br.theta >= 0).all() and (br.theta <= 1).all()
    assert br.theta.sum() <= 1.0 + 1e-12
    PowerAllocation(br.theta, br.theta)


@pytest.mark.parametrize("protocol,kw", [("EF", {}), ("DF", {"df_sign": True}), ("AF_FIXED", {})])
def test_best_response_grid_refinement_stable(protocol, kw):
    rng = np.random.default_rng(6)
    for _ in range(5):
        sc = gen.scenario(rng, protocol, **kw)
        other = gen.opponent(rng)
        a = game.best_response(None, sc, other, 0, BrOptions(coarse_grid=101))
        b = game.best_response(None, sc, other, 0, BrOptions(coarse_grid=1001))
        assert abs(a.utility - b.utility) < 1e-4


def test_best_response_matches_affine_closed_form():
    rng = np.random.default_rng(7)
    for _ in range(20):
        sc = gen.scenario(rng, "AF_FIXED", noises=True)
        c = aa.br_coefficients(sc)
        for user in (0, 1):
            s = float(rng.uniform())
            br = game.best_response(None, sc, (s, 1 - s), user)
            assert br.theta[0] == pytest.approx(aa.br_affine(c, user, s), abs=1e-6)
            assert br.theta.sum() == pytest.approx(1.0, abs=1e-9)


def test_best_response_argument_checks():
    sc = gen.scenario(np.random.default_rng(8), "EF")
    with pytest.raises(DomainError):
        game.best_response(None, sc, (0.5,), 0)
    with pytest.raises(DomainError):
        game.best_response(None, sc, (0.5, 0.5), 2)


# Cournot and equilibria ------------------------------------------------------------

def test_cournot_from_equilibrium_stops_at_once():
    sc = canonical.three_equilibria_scenario()
    ne = aa.enumerate_ne(aa.br_coefficients(sc))
    p = next(p for p in ne.points if p.stability == "stable")
    start = PowerAllocation.two_band(p.theta1, p.theta2)
    tr = game.cournot(None, sc, start)
    assert tr.converged and tr.iterations == 1
    assert tr.fixed_point.distance(start) < 1e-8


def test_cournot_reaches_stable_border_equilibrium():
    sc = canonical.three_equilibria_scenario()
    c = aa.br_coefficients(sc)
    ne = aa.enumerate_ne(c)
    stable = [p for p in ne.points if p.stability == "stable"]
    for start in (0.02, 0.98):
        tr = game.cournot(None, sc, PowerAllocation.two_band(start, 0.5))
        assert tr.converged
        t1, t2 = tr.fixed_point.theta1[0], tr.fixed_point.theta2[0]
        exact = aa.affine_cournot(c, start, 0.5)
        assert any(abs(t1 - p.theta1) < 1e-6 and abs(t2 - p.theta2) < 1e-6 for p in stable)
        assert (t1, t2) == pytest.approx(exact[:2], abs=1e-6)
        assert len(tr.utilities) == len(tr.states)


def _contracting_scenario(rng):
    while True:
        sc = gen.scenario(rng, "AF_FIXED")
        ne = aa.enumerate_ne(aa.br_coefficients(sc))
        p = ne.points[0]
        if len(ne.points) == 1 and p.kind == "interior" and p.slope_product < 0.9:
            return sc, p


@pytest.mark.parametrize("simultaneous", [False, True])
def test_cournot_contraction_from_random_starts(simultaneous):
    rng = np.random.default_rng(9)
    sc, p = _contracting_scenario(rng)
    for _ in range(10):
        start = PowerAllocation(gen.opponent(rng), gen.opponent(rng))
        tr = game.cournot(None, sc, start, simultaneous=simultaneous)
        assert tr.converged
        assert tr.fixed_point.theta1[0] == pytest.approx(p.theta1, abs=1e-6)
        assert tr.fixed_point.theta2[0] == pytest.approx(p.theta2, abs=1e-6)
        assert game.verify_ne(None, sc, tr.fixed_point, 1e-7).passed


def test_cournot_can_cycle_and_damping_settles():
    # regenerate the EF scenario on which plain Cournot 2-cycles
    rng = np.random.default_rng(41)
    for _ in range(46):
        sc, _ = gen.scenario(rng, Protocol.EF), gen.opponent(rng)
    assert all(game.concavity_certificate(None, sc, u, (0.5, 0.5)).certified for u in (0, 1))
    start = PowerAllocation.uniform(2)
    plain = game.cournot(None, sc, start, max_iter=100)
    assert not plain.converged and plain.fixed_point is None
    assert plain.states[-1].distance(plain.states[-3]) < 1e-9  # period two
    assert plain.states[-1].distance(plain.states[-2]) > 1e-2
    damped = game.cournot(None, sc, start, max_iter=200, damping=0.5)
    assert damped.converged
    assert game.verify_ne(None, sc, damped.fixed_point, 1e-6).passed


def test_cournot_argument_checks():
    sc = gen.scenario(np.random.default_rng(10), "EF")
    with pytest.raises(DomainError):
        game.cournot(None, sc, PowerAllocation.uniform(2), max_iter=0)
    with pytest.raises(DomainError):
        game.cournot(None, sc, PowerAllocation.uniform(2), damping=0.0)


def test_verify_ne_rejects_perturbed_equilibrium():
    rng = np.random.default_rng(11)
    sc, p = _contracting_scenario(rng)
    ne = PowerAllocation.two_band(p.theta1, p.theta2)
    assert game.verify_ne(None, sc, ne, 1e-6).passed
    t = p.theta1 + 0.05 if p.theta1 <= 0.95 else p.theta1 - 0.05
    check = game.verify_ne(None, sc, PowerAllocation.two_band(t, p.theta2), 1e-6)
    assert not check.passed and check.improvements[0] > 1e-6


def test_verify_ne_silent_band_one():
    rng = np.random.default_rng(12)
    for _ in range(2000):
        sc = gen.scenario(rng, "AF_FIXED")
        c = aa.br_coefficients(sc)
        if c.d1 <= 0 and c.d2 <= 0:
            break
    else:
        pytest.fail("no scenario with d1, d2 <= 0")
    assert game.verify_ne(None, sc, PowerAllocation.two_band(0.0, 0.0), 1e-6).passed


# concavity ------------------------------------------------------------------------

@pytest.mark.parametrize("protocol,kw", [("EF", {}), ("DF", {"df_sign": True}),
                                         ("DF", {"real": True, "df_sign": True}),
                                         ("AF_FIXED", {})])
def test_concavity_certified(protocol, kw):
    rng = np.random.default_rng(13)
    for _ in range(20):
        sc = gen.scenario(rng, protocol, **kw)
        for u in (0, 1):
            cert = game.concavity_certificate(None, sc, u, gen.opponent(rng))
            assert cert.certified and cert.witness is None


def test_concavity_pathloss_df():
    sc = canonical.nu_sweep_scenario(Protocol.DF)
    sc = replace(sc, tau=((0.3, 0.2), (0.0, 0.0)))
    assert game.df_condition(sc).holds
    for other in ((0.5, 0.5), (0.1, 0.9), (1.0, 0.0)):
        assert game.concavity_certificate(None, sc, 0, other).certified


@pytest.mark.parametrize("protocol,kw", [("DF", {}), ("AF", {}), ("TS-DF", {}), ("TS-AF", {})])
def test_concavity_witness_found(protocol, kw):
    rng = np.random.default_rng(14)
    for _ in range(200):
        sc = gen.scenario(rng, protocol, **kw)
        cert = game.concavity_certificate(None, sc, 0, gen.opponent(rng))
        if not cert.certified:
            band, theta, d2 = cert.witness
            assert 0 <= band < 2 and 0 < theta < 1 and d2 > 1e-7
            return
    pytest.fail("no non-concave instance found")


def test_concavity_argument_checks():
    sc = gen.scenario(np.random.default_rng(15), "EF")
    with pytest.raises(DomainError):
        game.concavity_certificate(None, sc, 0, (0.5, 0.5), samples=2)


def test_df_condition_examples():
    real = BandChannel(1, 0.5, 0.5, 1, 0.3, 0.3, 0.8, 0.8)
    assert game.df_condition(Scenario((real,), 1, 1, "DF")).holds
    bad = replace(real, h11=1.0, hr1=-1.0)
    cond = game.df_condition(Scenario((real, bad), 1, 1, "DF"))
    assert not cond.holds and cond.violations == ((1, 0),)
    edge = replace(real, h11=1j, hr1=1.0)
    assert game.df_condition(Scenario((edge,), 1, 1, "DF")).holds
