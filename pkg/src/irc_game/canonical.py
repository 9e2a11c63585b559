"""Reference scenarios used by the reproduction scripts and tests.

Published geometries only fix the four source-destination distances, so a
concrete embedding is chosen here: both direct links are parallel and
centered on the origin.  ``two_link_layout`` solves for the offset and gap
that reproduce the four distances.

Layout coordinates of each embedding (meters):

* single-band comparison (``single_band_layout``): distances
  S1D1 = 11.5, S2D2 = 10, S1D2 = 11, S2D1 = 14, d0 = 5, eps = 0.1;
  vertical links, sources below, link 1 on the left:
  S1 = (-3.158, -5.253), D1 = (-3.158, 6.247),
  S2 = (3.158, -6.247), D2 = (3.158, 3.753).
  With destinations side by side the receiver-quality frontier of the EF
  decoding cases crosses the horizontal cut y = 2.5.
* two-band sweeps (``sweep_layout``): S1D1 = 6.52, S1D2 = 8.32,
  S2D1 = 6.64, S2D2 = 6.73, d0 = 1, eps = 0.5, inside [-10, 10]^2;
  horizontal links, link 1 above link 2:
  S1 = (-3.787, 1.722), D1 = (2.733, 1.722),
  S2 = (-2.943, -1.722), D2 = (3.787, -1.722).
"""
from __future__ import annotations

import math

from .scenario import (BandChannel, DomainError, NodeLayout, Protocol, Scenario,
                       dbm_to_linear, layout_to_scenario)

L_SWEEP = 10.0
# relay positions chosen for the gain and power-split sweeps
GAIN_SWEEP_RELAY = (4.5, -1.5)
NU_SWEEP_RELAY = (0.0, 0.0)


def two_link_layout(d11: float, d22: float, d12: float, d21: float, *,
                    relay=(0.0, 0.0), eps: float = 0.1, d0: float = 1.0,
                    gamma=(2.0,), vertical: bool = False) -> NodeLayout:
    """Embed two parallel links with the given cross distances.

    ``dij`` is the distance from source i to destination j.  Links run left
    to right, link 1 above link 2; ``vertical`` turns the picture a quarter
    turn counterclockwise (links run upward, link 1 on the left).
    """
    # S1 = (-d11/2, y1), D1 = (d11/2, y1), S2 = (x, y2), D2 = (x + d22, y2)
    x = ((d12 ** 2 - d21 ** 2) / (d11 + d22) - d22) / 2.0
    gap2 = d21 ** 2 - (d11 / 2.0 - x) ** 2
    if gap2 <= 0:
        raise DomainError("distances admit no embedding with parallel links")
    gap = math.sqrt(gap2)
    xs = [-d11 / 2.0, d11 / 2.0, x, x + d22]
    shift = -(min(xs) + max(xs)) / 2.0
    y1, y2 = gap / 2.0, -gap / 2.0
    pts = [(xs[0] + shift, y1), (xs[1] + shift, y1), (xs[2] + shift, y2), (xs[3] + shift, y2)]
    if vertical:
        pts = [(-y, x) for x, y in pts]
    return NodeLayout(s1=pts[0], d1=pts[1], s2=pts[2], d2=pts[3],
                      relay=tuple(relay), eps=eps, d0=d0, gamma=tuple(gamma))


def single_band_layout(relay=(0.0, 0.0)) -> NodeLayout:
    return two_link_layout(11.5, 10.0, 11.0, 14.0, relay=relay, eps=0.1, d0=5.0,
                           gamma=(2.0,), vertical=True)


def single_band_scenario(layout: NodeLayout | None = None, *, p1: float = 10.0,
                         p2: float = 10.0, relay_power: float = 10.0,
                         protocol=Protocol.EF) -> Scenario:
    """Single-band comparison scenario (symmetric powers by default), N = 1."""
    layout = layout or single_band_layout()
    return layout_to_scenario(layout, p1=p1, p2=p2, noise=(1.0, 1.0, 1.0),
                              relay_power=relay_power, protocol=protocol,
                              ef_cases="select")


def sweep_layout(relay=(0.0, 0.0), gamma=(2.0, 2.0)) -> NodeLayout:
    return two_link_layout(6.52, 6.73, 8.32, 6.64, relay=relay, eps=0.5, d0=1.0,
                           gamma=gamma)


def _dbm_noise(n1: float, n2: float, nr: float):
    return (dbm_to_linear(n1), dbm_to_linear(n2), dbm_to_linear(nr))


def _relay_plus_ic(layout: NodeLayout, *, p1_dbm, p2_dbm, pr_dbm, noise_dbm,
                   protocol, gain=None, nu=0.5) -> Scenario:
    """Relay-assisted band 1 in parallel with a relay-free band 2."""
    noise = _dbm_noise(*noise_dbm)
    sc = layout_to_scenario(
        layout, p1=dbm_to_linear(p1_dbm), p2=dbm_to_linear(p2_dbm), noise=noise,
        relay_power=(dbm_to_linear(pr_dbm), 0.0), protocol=protocol,
        gain=(gain, 0.0), nu=(nu, 0.5), tau=(0.0, 0.0),
    )
    return sc.with_band(1, sc.bands[1].without_relay())


def gain_sweep_scenario(relay=GAIN_SWEEP_RELAY, gain: float | None = 0.0) -> Scenario:
    """Fixed-gain AF sweep: P = (20, 23) dBm, Pr = 22 dBm, N = (10, 9, 7) dBm."""
    return _relay_plus_ic(sweep_layout(relay, (2.0, 2.0)), p1_dbm=20.0, p2_dbm=23.0,
                          pr_dbm=22.0, noise_dbm=(10.0, 9.0, 7.0),
                          protocol=Protocol.AF_FIXED, gain=gain)


def position_sweep_scenario(relay=(0.0, 0.0)) -> Scenario:
    """Saturating AF placement sweep: P = (20, 17) dBm, gamma = (2.5, 2)."""
    return _relay_plus_ic(sweep_layout(relay, (2.5, 2.0)), p1_dbm=20.0, p2_dbm=17.0,
                          pr_dbm=22.0, noise_dbm=(10.0, 9.0, 7.0), protocol=Protocol.AF)


def nu_sweep_scenario(protocol=Protocol.DF, relay=NU_SWEEP_RELAY, nu: float = 0.5) -> Scenario:
    """Relay power split sweep: P = (22, 17) dBm, Pr = 23 dBm, N = (7, 9, 0) dBm."""
    return _relay_plus_ic(sweep_layout(relay, (2.5, 2.0)), p1_dbm=22.0, p2_dbm=17.0,
                          pr_dbm=23.0, noise_dbm=(7.0, 9.0, 0.0), protocol=protocol,
                          nu=nu)


def three_equilibria_scenario(gains: tuple[float, float] | None = None) -> Scenario:
    """Relay band in parallel with an interference channel, N = 1.

    rho = (1, 3), rho_r = 2.  Relay gains default to the values saturating the
    relay at full power on band 1; band 2 has no relay.
    """
    h = BandChannel(14.15, 3.4, 0.0, 1.38, -3.1, 2.22, -3.12, 1.16, relay_power=2.0)
    g = BandChannel(2.76, 5.64, -3.55, -1.61, 0.0, 0.0, 0.0, 0.0, relay_power=0.0)
    if gains is None:
        den = abs(h.h1r) ** 2 * 1.0 + abs(h.h2r) ** 2 * 3.0 + h.noise_r
        gains = (math.sqrt(h.relay_power / den), 0.0)
    return Scenario((h, g), p1=1.0, p2=3.0, protocol=Protocol.AF_FIXED, gain=tuple(gains))


FAMILIES = {
    "fig2-canonical": lambda: single_band_scenario(),
    "fig3-canonical": lambda: single_band_scenario(single_band_layout((0.0, 2.5))),
    "fig4-canonical": three_equilibria_scenario,
    "fig5-canonical": gain_sweep_scenario,
    "fig6-canonical": position_sweep_scenario,
    "fig7-canonical": nu_sweep_scenario,
}


def canonical_layout(family: str) -> NodeLayout | None:
    return {
        "fig2-canonical": single_band_layout(),
        "fig3-canonical": single_band_layout((0.0, 2.5)),
        "fig5-canonical": sweep_layout(GAIN_SWEEP_RELAY, (2.0, 2.0)),
        "fig6-canonical": sweep_layout((0.0, 0.0), (2.5, 2.0)),
        "fig7-canonical": sweep_layout(NU_SWEEP_RELAY, (2.5, 2.0)),
    }.get(family)
