"""Network description for the two-user multi-band interference relay channel.

Channel gains are stored as builtin ``complex`` values.  Powers and noises are
linear (milliwatts when they originate from dBm values).  All containers are
frozen dataclasses; every operation here is a pure function.
"""
from __future__ import annotations

import enum
import json
import math
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Any, Mapping, Sequence


SCHEMA_VERSION = 1
TS_TOL = 1e-12

GAIN_NAMES = ("h11", "h12", "h21", "h22", "h1r", "h2r", "hr1", "hr2")
RELAY_GAINS = ("h1r", "h2r", "hr1", "hr2")


class DomainError(ValueError):
    """Raised when an operation is called outside its mathematical domain."""


class ScenarioError(ValueError):
    """A scenario failed validation; ``violations`` lists every problem."""

    def __init__(self, violations: Sequence[str]):
        self.violations = list(violations)
        super().__init__("; ".join(self.violations))


class Protocol(str, enum.Enum):
    DF = "DF"
    EF = "EF"
    AF = "AF"
    AF_FIXED = "AF_FIXED"
    TS_DF = "TS-DF"
    TS_EF = "TS-EF"
    TS_AF = "TS-AF"
    TS_AF_FIXED = "TS-AF_FIXED"

    @property
    def time_sharing(self) -> bool:
        return self.value.startswith("TS-")

    @property
    def inner(self) -> "Protocol":
        """Relaying protocol with the time-sharing wrapper removed."""
        return Protocol(self.value[3:]) if self.time_sharing else self

    def wrapped(self) -> "Protocol":
        return self if self.time_sharing else Protocol("TS-" + self.value)


def dbm_to_linear(dbm: float) -> float:
    """dBm to milliwatts."""
    return 10.0 ** (dbm / 10.0)


def linear_to_dbm(mw: float) -> float:
    return 10.0 * math.log10(mw)


@dataclass(frozen=True)
class TsParams:
    """Coordinated time-sharing schedule of one band.

    ``alpha_i`` is the fraction of time user i is on, ``beta_j`` the fraction
    of user i's on-time during which user j also transmits.
    """

    alpha1: float = 1.0
    alpha2: float = 1.0
    beta1: float = 1.0
    beta2: float = 1.0

    @property
    def overlap(self) -> float:
        return self.beta1 * self.alpha2

    @classmethod
    def from_overlap(cls, alpha1: float, alpha2: float, overlap: float) -> "TsParams":
        b2 = overlap / alpha1 if alpha1 > 0 else 0.0
        b1 = overlap / alpha2 if alpha2 > 0 else 0.0
        return cls(alpha1, alpha2, min(b1, 1.0), min(b2, 1.0))

    def violations(self) -> list[str]:
        out = []
        for name in ("alpha1", "alpha2", "beta1", "beta2"):
            v = getattr(self, name)
            if not (math.isfinite(v) and 0.0 <= v <= 1.0):
                out.append(f"{name} must lie in [0, 1]")
        if out:
            return out
        if abs(self.beta1 * self.alpha2 - self.beta2 * self.alpha1) > TS_TOL:
            out.append("time-sharing requires beta1*alpha2 == beta2*alpha1")
        o = self.overlap
        if o < max(0.0, self.alpha1 + self.alpha2 - 1.0) - TS_TOL:
            out.append("time-sharing overlap too small for the frame")
        if o > min(self.alpha1, self.alpha2) + TS_TOL:
            out.append("time-sharing overlap exceeds the shorter window")
        return out


@dataclass(frozen=True)
class BandChannel:
    """Link gains, noise powers and relay power of one band."""

    h11: complex
    h12: complex
    h21: complex
    h22: complex
    h1r: complex
    h2r: complex
    hr1: complex
    hr2: complex
    noise_d1: float = 1.0
    noise_d2: float = 1.0
    noise_r: float = 1.0
    relay_power: float = 0.0

    def gains(self) -> dict[str, complex]:
        return {k: complex(getattr(self, k)) for k in GAIN_NAMES}

    @property
    def has_relay(self) -> bool:
        """False for a plain interference-channel band: no relay power and no relay links."""
        return self.relay_power > 0 or any(complex(getattr(self, k)) != 0 for k in RELAY_GAINS)

    def without_relay(self) -> "BandChannel":
        return replace(self, relay_power=0.0, **{k: 0j for k in RELAY_GAINS})

    def swapped(self) -> "BandChannel":
        """Same band with the user labels exchanged."""
        return BandChannel(
            h11=self.h22, h12=self.h21, h21=self.h12, h22=self.h11,
            h1r=self.h2r, h2r=self.h1r, hr1=self.hr2, hr2=self.hr1,
            noise_d1=self.noise_d2, noise_d2=self.noise_d1,
            noise_r=self.noise_r, relay_power=self.relay_power,
        )

    def scaled(self, factor: float) -> "BandChannel":
        """Scale every noise and the relay power by ``factor``."""
        return replace(
            self,
            noise_d1=self.noise_d1 * factor,
            noise_d2=self.noise_d2 * factor,
            noise_r=self.noise_r * factor,
            relay_power=self.relay_power * factor,
        )


@dataclass(frozen=True)
class Scenario:
    """Full multi-band network description.

    Per-band protocol settings are tuples aligned with ``bands``:
    ``tau`` holds DF cooperation degrees, ``nu`` the relay power fraction
    given to user 1 (user 2 receives ``1 - nu``), ``gain`` the fixed AF gain
    (``None`` means saturate the relay power), ``ts`` the time-sharing
    schedule used by the ``TS-*`` protocols.
    """

    bands: tuple[BandChannel, ...]
    p1: float
    p2: float
    protocol: Protocol = Protocol.AF_FIXED
    tau: tuple[tuple[float, float], ...] = ()
    nu: tuple[float, ...] = ()
    gain: tuple[float | None, ...] = ()
    ts: tuple[TsParams | None, ...] = ()
    gain_denominator: str = "allocated"
    ef_cases: str = "interference"

    def __post_init__(self):
        q = len(self.bands)
        object.__setattr__(self, "protocol", Protocol(self.protocol))
        if not self.tau:
            object.__setattr__(self, "tau", ((0.0, 0.0),) * q)
        if not self.nu:
            object.__setattr__(self, "nu", (0.5,) * q)
        if not self.gain:
            object.__setattr__(self, "gain", (None,) * q)
        if not self.ts:
            object.__setattr__(self, "ts", (None,) * q)

    @property
    def n_bands(self) -> int:
        return len(self.bands)

    def with_protocol(self, protocol: Protocol | str) -> "Scenario":
        return replace(self, protocol=Protocol(protocol))

    def with_band(self, q: int, band: BandChannel) -> "Scenario":
        bands = list(self.bands)
        bands[q] = band
        return replace(self, bands=tuple(bands))


@dataclass(frozen=True)
class NodeLayout:
    """Planar node positions (meters); the relay sits ``eps`` above the plane."""

    s1: tuple[float, float]
    s2: tuple[float, float]
    d1: tuple[float, float]
    d2: tuple[float, float]
    relay: tuple[float, float]
    eps: float = 0.1
    d0: float = 5.0
    gamma: tuple[float, ...] = (2.0,)

    def translated(self, dx: float, dy: float) -> "NodeLayout":
        mv = lambda p: (p[0] + dx, p[1] + dy)  # noqa: E731
        return replace(self, s1=mv(self.s1), s2=mv(self.s2), d1=mv(self.d1),
                       d2=mv(self.d2), relay=mv(self.relay))

    def with_relay(self, x: float, y: float) -> "NodeLayout":
        return replace(self, relay=(float(x), float(y)))


def pathloss_gain(distance: float, d0: float, gamma: float) -> complex:
    """Real positive gain ``(distance / d0) ** (-gamma / 2)``."""
    if not distance > 0:
        raise DomainError(
            f"distance must be positive (got {distance}); "
            "use a nonzero relay height eps for relay links")
    if not d0 > 0:
        raise DomainError(f"reference distance must be positive (got {d0})")
    return complex((distance / d0) ** (-gamma / 2.0), 0.0)


def _dist(a, b) -> float:
    return math.hypot(a[0] - b[0], a[1] - b[1])


def layout_gains(layout: NodeLayout, gamma: float) -> dict[str, complex]:
    """Pathloss gains of every link for one pathloss exponent."""
    eps2 = layout.eps ** 2
    direct = {
        "h11": _dist(layout.s1, layout.d1),
        "h12": _dist(layout.s1, layout.d2),
        "h21": _dist(layout.s2, layout.d1),
        "h22": _dist(layout.s2, layout.d2),
    }
    relay = {
        "h1r": _dist(layout.s1, layout.relay),
        "h2r": _dist(layout.s2, layout.relay),
        "hr1": _dist(layout.relay, layout.d1),
        "hr2": _dist(layout.relay, layout.d2),
    }
    out = {}
    for k, d in direct.items():
        out[k] = pathloss_gain(d, layout.d0, gamma)
    for k, d in relay.items():
        out[k] = pathloss_gain(math.sqrt(d * d + eps2), layout.d0, gamma)
    return out


def _per_band(value, q: int, name: str) -> list:
    if isinstance(value, (list, tuple)):
        if len(value) != q:
            raise ScenarioError([f"{name} needs one entry per band ({q})"])
        return list(value)
    return [value] * q


def layout_to_scenario(
    layout: NodeLayout,
    *,
    p1: float,
    p2: float,
    noise: tuple[float, float, float] | Sequence[tuple[float, float, float]] = (1.0, 1.0, 1.0),
    relay_power: float | Sequence[float] = 0.0,
    protocol: Protocol | str = Protocol.AF,
    tau=(0.0, 0.0),
    nu: float | Sequence[float] = 0.5,
    gain: float | None | Sequence[float | None] = None,
    ts: TsParams | None | Sequence[TsParams | None] = None,
    gain_denominator: str = "allocated",
    ef_cases: str = "interference",
) -> Scenario:
    """Build a scenario whose gains follow the pathloss model of ``layout``.

    One band is created per entry of ``layout.gamma``.  Scalar settings are
    broadcast to every band.
    """
    if not layout.d0 > 0:
        raise DomainError("reference distance d0 must be positive")
    if layout.eps < 0:
        raise DomainError("relay height eps must be nonnegative")
    q = len(layout.gamma)
    if isinstance(noise, (list, tuple)) and noise and isinstance(noise[0], (list, tuple)):
        noises = list(noise)
    else:
        noises = [tuple(noise)] * q
    if len(noises) != q:
        raise ScenarioError([f"noise needs one entry per band ({q})"])
    relay_powers = _per_band(relay_power, q, "relay_power")
    if isinstance(tau, (list, tuple)) and tau and isinstance(tau[0], (list, tuple)):
        taus = [tuple(t) for t in tau]
    else:
        taus = [tuple(tau)] * q
    nus = _per_band(nu, q, "nu")
    gains = _per_band(gain, q, "gain")
    tss = _per_band(ts, q, "ts")
    bands = []
    for k, gamma in enumerate(layout.gamma):
        g = layout_gains(layout, gamma)
        n1, n2, nr = noises[k]
        bands.append(BandChannel(**g, noise_d1=n1, noise_d2=n2, noise_r=nr,
                                 relay_power=relay_powers[k]))
    return Scenario(
        bands=tuple(bands), p1=p1, p2=p2, protocol=Protocol(protocol),
        tau=tuple(taus), nu=tuple(nus), gain=tuple(gains), ts=tuple(tss),
        gain_denominator=gain_denominator, ef_cases=ef_cases,
    )


def _finite(x) -> bool:
    try:
        return math.isfinite(float(x))
    except (TypeError, ValueError):
        return False


def validate(scenario: Scenario) -> list[str]:
    """Return every invariant violation of ``scenario`` (empty when valid)."""
    v: list[str] = []
    q = len(scenario.bands)
    if q < 1:
        return ["scenario needs at least one band"]
    for name in ("p1", "p2"):
        x = getattr(scenario, name)
        if not _finite(x) or x < 0:
            v.append(f"{name} must be a finite nonnegative power")
    lengths = [f"{name} needs one entry per band ({q})" for name in ("tau", "nu", "gain", "ts")
               if len(getattr(scenario, name)) != q]
    if lengths:  # per-band checks below index these
        return v + lengths
    if scenario.gain_denominator not in ("allocated", "full"):
        v.append("gain_denominator must be 'allocated' or 'full'")
    if scenario.ef_cases not in ("select", "interference"):
        v.append("ef_cases must be 'select' or 'interference'")
    proto = scenario.protocol
    for k, band in enumerate(scenario.bands):
        pre = f"band {k}: "
        for gname in GAIN_NAMES:
            g = complex(getattr(band, gname))
            if not (math.isfinite(g.real) and math.isfinite(g.imag)):
                v.append(pre + f"gain {gname} must be finite")
        for nname in ("noise_d1", "noise_d2", "noise_r"):
            n = getattr(band, nname)
            if not _finite(n) or n <= 0:
                v.append(pre + f"noise must be positive ({nname})")
        if not _finite(band.relay_power) or band.relay_power < 0:
            v.append(pre + "relay power must be nonnegative")
        t1, t2 = scenario.tau[k]
        if not all(_finite(t) and 0 <= t <= 1 for t in (t1, t2)):
            v.append(pre + "tau must lie in [0, 1]")
        elif t1 + t2 > 1 + 1e-12:
            v.append(pre + "tau sum exceeds 1")
        nu = scenario.nu[k]
        if not (_finite(nu) and 0 <= nu <= 1):
            v.append(pre + "nu must lie in [0, 1]")
        a = scenario.gain[k]
        if a is not None and not (_finite(a) and a >= 0):
            v.append(pre + "amplification gain must be nonnegative")
        if proto.inner is Protocol.AF_FIXED and a is None:
            v.append(pre + "AF_FIXED needs a numeric amplification gain")
        ts = scenario.ts[k]
        if proto.time_sharing and ts is None:
            v.append(pre + "time-sharing protocol needs ts parameters")
        if ts is not None:
            v.extend(pre + msg for msg in ts.violations())
    return v


def check(scenario: Scenario) -> Scenario:
    """Raise :class:`ScenarioError` unless ``scenario`` is valid."""
    violations = validate(scenario)
    if violations:
        raise ScenarioError(violations)
    return scenario


# --------------------------------------------------------------------------
# JSON documents

def parse_power(obj: Any, name: str = "power") -> float:
    """``{"dbm": x}``, ``{"linear": x}`` or a bare number (linear)."""
    if isinstance(obj, Mapping):
        if "dbm" in obj:
            return dbm_to_linear(float(obj["dbm"]))
        if "linear" in obj:
            return float(obj["linear"])
        raise ScenarioError([f"{name}: expected 'dbm' or 'linear' key"])
    if isinstance(obj, (int, float)) and not isinstance(obj, bool):
        return float(obj)
    raise ScenarioError([f"{name}: not a power value"])


def parse_gain(obj: Any, name: str = "gain") -> complex:
    """``{"re": a, "im": b}`` or a bare real number."""
    if isinstance(obj, Mapping):
        return complex(float(obj.get("re", 0.0)), float(obj.get("im", 0.0)))
    if isinstance(obj, (int, float)) and not isinstance(obj, bool):
        return complex(float(obj), 0.0)
    raise ScenarioError([f"{name}: not a gain value"])


def _gain_doc(g: complex):
    g = complex(g)
    return float(g.real) if g.imag == 0 else {"re": g.real, "im": g.imag}


def layout_from_dict(doc: Mapping) -> NodeLayout:
    pt = lambda key: tuple(float(x) for x in doc[key])  # noqa: E731
    return NodeLayout(
        s1=pt("s1"), s2=pt("s2"), d1=pt("d1"), d2=pt("d2"), relay=pt("relay"),
        eps=float(doc.get("eps", 0.1)), d0=float(doc.get("d0", 5.0)),
        gamma=tuple(float(g) for g in doc.get("gamma", (2.0,))),
    )


def layout_to_dict(layout: NodeLayout) -> dict:
    return {
        "s1": list(layout.s1), "s2": list(layout.s2), "d1": list(layout.d1),
        "d2": list(layout.d2), "relay": list(layout.relay),
        "eps": layout.eps, "d0": layout.d0, "gamma": list(layout.gamma),
    }


def _band_settings(b: Mapping, k: int, errors: list[str]):
    pre = f"band {k}: "
    tau = b.get("tau", [0.0, 0.0])
    try:
        tau = (float(tau[0]), float(tau[1]))
    except (TypeError, ValueError, IndexError):
        errors.append(pre + "tau must be a pair of numbers")
        tau = (0.0, 0.0)
    nu = float(b.get("nu", 0.5))
    g = b.get("gain", "saturating")
    gain = None if g in (None, "saturating") else float(g)
    ts = b.get("ts")
    if ts is not None:
        ts = TsParams(**{k2: float(ts[k2]) for k2 in ("alpha1", "alpha2", "beta1", "beta2")})
    return tau, nu, gain, ts


def scenario_from_dict(doc: Mapping) -> tuple[Scenario, NodeLayout | None]:
    """Parse a scenario document; raises :class:`ScenarioError` on any problem."""
    errors: list[str] = []
    try:
        version = doc.get("schema_version", SCHEMA_VERSION)
        if version != SCHEMA_VERSION:
            raise ScenarioError([f"unsupported schema_version {version}"])
        p1 = parse_power(doc["p1"], "p1")
        p2 = parse_power(doc["p2"], "p2")
        protocol = Protocol(doc.get("protocol", "AF_FIXED"))
        raw_bands = doc["bands"]
        if not isinstance(raw_bands, list) or not raw_bands:
            raise ScenarioError(["scenario needs at least one band"])
        layout = layout_from_dict(doc["layout"]) if "layout" in doc else None
        if layout is not None and len(layout.gamma) != len(raw_bands):
            raise ScenarioError(["layout gamma needs one entry per band"])
        bands, taus, nus, gains, tss = [], [], [], [], []
        for k, b in enumerate(raw_bands):
            if layout is not None:
                g = layout_gains(layout, layout.gamma[k])
                if b.get("relay", True) is False:
                    g.update({n: 0j for n in RELAY_GAINS})
            else:
                missing = [n for n in GAIN_NAMES if n not in b]
                if missing:
                    errors.append(f"band {k}: missing gains {', '.join(missing)}")
                    continue
                g = {n: parse_gain(b[n], n) for n in GAIN_NAMES}
            bands.append(BandChannel(
                **g,
                noise_d1=parse_power(b.get("noise_d1", 1.0), "noise_d1"),
                noise_d2=parse_power(b.get("noise_d2", 1.0), "noise_d2"),
                noise_r=parse_power(b.get("noise_r", 1.0), "noise_r"),
                relay_power=parse_power(b.get("relay_power", 0.0), "relay_power"),
            ))
            tau, nu, gain, ts = _band_settings(b, k, errors)
            taus.append(tau)
            nus.append(nu)
            gains.append(gain)
            tss.append(ts)
        if errors:
            raise ScenarioError(errors)
        scen = Scenario(
            bands=tuple(bands), p1=p1, p2=p2, protocol=protocol,
            tau=tuple(taus), nu=tuple(nus), gain=tuple(gains), ts=tuple(tss),
            gain_denominator=doc.get("gain_denominator", "allocated"),
            ef_cases=doc.get("ef_cases", "interference"),
        )
    except ScenarioError:
        raise
    except (KeyError, TypeError, ValueError, DomainError) as exc:
        raise ScenarioError([f"malformed scenario: {exc!r}"]) from exc
    return check(scen), layout


def scenario_to_dict(scenario: Scenario, layout: NodeLayout | None = None) -> dict:
    bands = []
    for k, band in enumerate(scenario.bands):
        b: dict[str, Any] = {}
        if layout is None:
            b.update({n: _gain_doc(getattr(band, n)) for n in GAIN_NAMES})
        elif not band.has_relay:
            b["relay"] = False
        b.update({
            "noise_d1": band.noise_d1, "noise_d2": band.noise_d2,
            "noise_r": band.noise_r, "relay_power": band.relay_power,
            "tau": list(scenario.tau[k]), "nu": scenario.nu[k],
            "gain": "saturating" if scenario.gain[k] is None else scenario.gain[k],
        })
        ts = scenario.ts[k]
        if ts is not None:
            b["ts"] = {"alpha1": ts.alpha1, "alpha2": ts.alpha2,
                       "beta1": ts.beta1, "beta2": ts.beta2}
        bands.append(b)
    doc = {
        "schema_version": SCHEMA_VERSION,
        "protocol": scenario.protocol.value,
        "p1": {"linear": scenario.p1},
        "p2": {"linear": scenario.p2},
        "gain_denominator": scenario.gain_denominator,
        "ef_cases": scenario.ef_cases,
        "bands": bands,
    }
    if layout is not None:
        doc["layout"] = layout_to_dict(layout)
    return doc


def load_scenario(path: str | Path) -> tuple[Scenario, NodeLayout | None]:
    with open(path) as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ScenarioError([f"invalid JSON: {exc}"]) from exc
    return scenario_from_dict(doc)


def dump_scenario(scenario: Scenario, path: str | Path, layout: NodeLayout | None = None) -> None:
    with open(path, "w") as fh:
        json.dump(scenario_to_dict(scenario, layout), fh, indent=2, sort_keys=True)
        fh.write("\n")

