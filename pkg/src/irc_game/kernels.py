"""Kernel selection: the compiled extension when importable, else pure Python.

Set ``IRC_GAME_PURE_PYTHON=1`` to force the fallback.

Packed band layout (``PACK_LEN`` floats)::

    0..15   re, im of h11 h12 h21 h22 h1r h2r hr1 hr2
    16..19  noise_d1, noise_d2, noise_r, relay_power
    20..23  tau1, tau2, nu, fixed AF gain
    24..26  saturating-gain denominator uses full powers (flag), P1, P2
    27..31  time-sharing flag, alpha1, alpha2, beta1, beta2
"""
from __future__ import annotations

import os

import numpy as np

from . import _kernels_py
from .scenario import GAIN_NAMES, BandChannel, Protocol, Scenario

BACKEND = "python"
_impl = _kernels_py
if os.environ.get("IRC_GAME_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from . import _ckernels as _impl  # type: ignore[no-redef]
        BACKEND = "cython"
    except ImportError:  # extension not built
        _impl = _kernels_py

DF, EF, EF_SELECT, AF_FIXED, AF_SAT = 0, 1, 2, 3, 4
PACK_LEN = _kernels_py.PACK_LEN

plain_rates = _impl.plain_rates
pair_rates = _impl.pair_rates
user_rate = _impl.user_rate
rate_table = _impl.rate_table
refine_br = _impl.refine_br
affine_br = _impl.affine_br
affine_cournot = _impl.affine_cournot
affine_cournot_grid = _impl.affine_cournot_grid


def pack_band(band: BandChannel, *, tau=(0.0, 0.0), nu=0.5, gain=0.0,
              full_powers=None, ts=None) -> np.ndarray:
    v = np.zeros(PACK_LEN)
    for k, name in enumerate(GAIN_NAMES):
        z = complex(getattr(band, name))
        v[2 * k], v[2 * k + 1] = z.real, z.imag
    v[16:20] = band.noise_d1, band.noise_d2, band.noise_r, band.relay_power
    v[20], v[21] = tau
    v[22] = nu
    v[23] = 0.0 if gain is None else gain
    if full_powers is not None:
        v[24] = 1.0
        v[25], v[26] = full_powers
    if ts is not None:
        v[27:32] = 1.0, ts.alpha1, ts.alpha2, ts.beta1, ts.beta2
    return v


def protocol_code(scenario: Scenario, q: int) -> int:
    """Kernel code of the relaying protocol used in band ``q``."""
    inner = scenario.protocol.inner
    if inner is Protocol.DF:
        return DF
    if inner is Protocol.EF:
        return EF_SELECT if scenario.ef_cases == "select" else EF
    if inner is Protocol.AF_FIXED:
        return AF_FIXED
    # AF with a numeric per-band gain behaves as a fixed-gain band
    return AF_SAT if scenario.gain[q] is None else AF_FIXED


def pack_scenario(scenario: Scenario) -> tuple[np.ndarray, np.ndarray]:
    """Codes and packed vectors of every band, shapes (Q,) and (Q, PACK_LEN)."""
    q = scenario.n_bands
    codes = np.empty(q, dtype=np.int_)
    packed = np.empty((q, PACK_LEN))
    full = (scenario.p1, scenario.p2) if scenario.gain_denominator == "full" else None
    for k, band in enumerate(scenario.bands):
        codes[k] = protocol_code(scenario, k)
        ts = scenario.ts[k] if scenario.protocol.time_sharing else None
        packed[k] = pack_band(band, tau=scenario.tau[k], nu=scenario.nu[k],
                              gain=scenario.gain[k], full_powers=full, ts=ts)
    return codes, packed
