"""Random scenario generators shared by the tests."""
from __future__ import annotations

from dataclasses import replace

import numpy as np

from irc_game.leader import saturating_gain_full
from irc_game.scenario import BandChannel, Protocol, Scenario, TsParams


def cn(rng, size):
    return (rng.standard_normal(size) + 1j * rng.standard_normal(size)) / np.sqrt(2.0)


def band(rng, *, real=False, relay_power=None, df_sign=False, noises=False) -> BandChannel:
    z = rng.standard_normal(8) if real else cn(rng, 8)
    g = [complex(v) for v in z]
    if df_sign:
        # rotate h_ri so that Re(h_ii conj(h_ri)) >= 0
        for d, r in ((0, 6), (3, 7)):
            phi = rng.uniform(-np.pi / 2, np.pi / 2)
            g[r] = abs(g[r]) * np.exp(1j * (np.angle(g[d]) + phi))
    n = rng.uniform(0.5, 2.0, 3) if noises else (1.0, 1.0, 1.0)
    pr = float(rng.uniform(0.5, 10.0)) if relay_power is None else relay_power
    return BandChannel(*g, noise_d1=float(n[0]), noise_d2=float(n[1]), noise_r=float(n[2]),
                       relay_power=pr)


def ts_params(rng) -> TsParams:
    a1, a2 = rng.uniform(0.2, 1.0, 2)
    o = rng.uniform(max(0.0, a1 + a2 - 1.0), min(a1, a2))
    return TsParams.from_overlap(float(a1), float(a2), float(o))


def scenario(rng, protocol, q: int = 2, **band_kw) -> Scenario:
    protocol = Protocol(protocol)
    bands = tuple(band(rng, **band_kw) for _ in range(q))
    taus = []
    for _ in range(q):
        t = rng.dirichlet([1.0, 1.0, 1.0])
        taus.append((float(t[0]), float(t[1])))
    sc = Scenario(bands, p1=float(rng.uniform(0.5, 10.0)), p2=float(rng.uniform(0.5, 10.0)),
                  protocol=protocol, tau=tuple(taus),
                  nu=tuple(float(v) for v in rng.uniform(0.0, 1.0, q)),
                  ts=tuple(ts_params(rng) for _ in range(q)) if protocol.time_sharing else ())
    if protocol.inner is Protocol.AF_FIXED:
        sc = replace(sc, gain=tuple(float(rng.uniform(0.05, 1.0)) * saturating_gain_full(sc, k)
                                    for k in range(q)))
    return sc


def opponent(rng, q: int = 2) -> np.ndarray:
    return rng.dirichlet(np.ones(q + 1))[:q]
