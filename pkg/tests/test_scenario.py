import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import gen
from irc_game import canonical
from irc_game.scenario import (BandChannel, DomainError, NodeLayout, Protocol, Scenario,
                               ScenarioError, TsParams, dbm_to_linear, dump_scenario,
                               layout_to_scenario, linear_to_dbm, load_scenario,
                               pathloss_gain, scenario_from_dict, scenario_to_dict, validate)


def unit_band(**kw):
    return BandChannel(1, 1, 1, 1, 1, 1, 1, 1, **kw)


# pathloss -------------------------------------------------------------------

@pytest.mark.parametrize("d,expected", [(10, 0.5), (5, 1.0), (0.1, 50.0)])
def test_pathloss_examples(d, expected):
    g = pathloss_gain(d, 5.0, 2.0)
    assert g.imag == 0.0
    assert g.real == pytest.approx(expected, rel=1e-12)


@pytest.mark.parametrize("d", [0.0, -1.0])
def test_pathloss_rejects_nonpositive_distance(d):
    with pytest.raises(DomainError, match="eps"):
        pathloss_gain(d, 5.0, 2.0)


@given(st.floats(0.01, 100), st.floats(0.01, 100), st.floats(0.1, 5), st.floats(0.1, 10))
def test_pathloss_decreasing_and_unit_at_reference(a, b, gamma, d0):
    assert pathloss_gain(d0, d0, gamma).real == pytest.approx(1.0, rel=1e-12)
    if a < b:
        assert pathloss_gain(a, d0, gamma).real > pathloss_gain(b, d0, gamma).real


@given(st.floats(-60, 60))
def test_dbm_round_trip(dbm):
    assert linear_to_dbm(dbm_to_linear(dbm)) == pytest.approx(dbm, rel=1e-12, abs=1e-12)
    mw = dbm_to_linear(dbm)
    assert dbm_to_linear(linear_to_dbm(mw)) == pytest.approx(mw, rel=1e-12)


# layouts ----------------------------------------------------------------------

def test_relay_on_top_of_source():
    layout = NodeLayout(s1=(0, 0), s2=(10, 0), d1=(0, 10), d2=(10, 10), relay=(0, 0),
                        eps=0.1, d0=5.0)
    sc = layout_to_scenario(layout, p1=1, p2=1)
    assert abs(sc.bands[0].h1r) == pytest.approx(50.0, rel=1e-12)


def test_all_nodes_at_reference_distance():
    # square of side d0 with the relay above its center at distance d0 from every corner
    d0 = 5.0
    h = d0 / math.sqrt(2)
    eps = math.sqrt(d0 ** 2 - h ** 2)
    layout = NodeLayout(s1=(-h, 0), d1=(0, h), s2=(0, -h), d2=(h, 0), relay=(0, 0), eps=eps,
                        d0=d0)
    # direct links join adjacent corners; the cross links are the diagonals
    sc = layout_to_scenario(layout, p1=1, p2=1)
    b = sc.bands[0]
    for name in ("h11", "h22", "h1r", "h2r", "hr1", "hr2"):
        assert complex(getattr(b, name)) == pytest.approx(1.0, rel=1e-12), name
    for name in ("h12", "h21"):
        assert complex(getattr(b, name)) == pytest.approx(1.0 / math.sqrt(2.0), rel=1e-12)


def test_coincident_nodes_without_height():
    layout = NodeLayout(s1=(0, 0), s2=(1, 0), d1=(0, 1), d2=(1, 1), relay=(0, 0), eps=0.0)
    with pytest.raises(DomainError):
        layout_to_scenario(layout, p1=1, p2=1)


def test_layout_deterministic_and_translation_invariant():
    layout = canonical.sweep_layout((1.3, -2.2), (2.5, 2.0))
    a = layout_to_scenario(layout, p1=3, p2=4, relay_power=2.0)
    b = layout_to_scenario(layout, p1=3, p2=4, relay_power=2.0)
    assert a == b
    c = layout_to_scenario(layout.translated(7.5, -3.25), p1=3, p2=4, relay_power=2.0)
    for ba, bc in zip(a.bands, c.bands):
        for name, g in ba.gains().items():
            assert complex(getattr(bc, name)) == pytest.approx(g, rel=1e-12)


def test_one_band_per_pathloss_exponent():
    sc = layout_to_scenario(canonical.sweep_layout(gamma=(2.5, 2.0, 3.0)), p1=1, p2=1)
    assert sc.n_bands == 3
    assert abs(sc.bands[2].h11) < abs(sc.bands[1].h11)


@pytest.mark.parametrize("d", [(11.5, 10.0, 11.0, 14.0), (6.52, 6.73, 8.32, 6.64)])
@pytest.mark.parametrize("vertical", [False, True])
def test_canonical_embedding_distances(d, vertical):
    lay = canonical.two_link_layout(*d, vertical=vertical)
    dist = lambda a, b: math.dist(a, b)  # noqa: E731
    got = (dist(lay.s1, lay.d1), dist(lay.s2, lay.d2), dist(lay.s1, lay.d2), dist(lay.s2, lay.d1))
    assert got == pytest.approx(d, rel=1e-12)


def test_impossible_embedding():
    with pytest.raises(DomainError):
        canonical.two_link_layout(10.0, 10.0, 30.0, 1.0)


# validation -------------------------------------------------------------------

def test_validate_tau_sum():
    sc = Scenario((unit_band(),), 1, 1, Protocol.DF, tau=((0.6, 0.6),))
    assert any("tau sum exceeds 1" in v for v in validate(sc))


def test_validate_noise():
    sc = Scenario((unit_band(noise_d1=0.0),), 1, 1, Protocol.AF)
    assert any("noise must be positive" in v for v in validate(sc))


def test_three_equilibria_scenario_is_valid():
    assert validate(canonical.three_equilibria_scenario()) == []


def test_validate_collects_all_violations():
    sc = Scenario((unit_band(noise_r=-1.0, relay_power=-2.0),), -1, 1, Protocol.TS_AF_FIXED,
                  nu=(1.5,), tau=((0.9, 0.9),))
    v = validate(sc)
    assert any("p1" in x for x in v)
    v = validate(Scenario((unit_band(noise_r=-1.0, relay_power=-2.0),), 1, 1,
                          Protocol.TS_AF_FIXED, nu=(1.5,), tau=((0.9, 0.9),)))
    for needle in ("noise must be positive", "relay power", "tau sum", "nu must",
                   "AF_FIXED needs", "time-sharing protocol needs"):
        assert any(needle in x for x in v), needle


def test_ts_params_constraints():
    assert TsParams.from_overlap(0.5, 0.8, 0.4).violations() == []
    assert TsParams(0.5, 0.5, 0.5, 0.2).violations()  # beta1 a2 != beta2 a1
    assert TsParams.from_overlap(0.9, 0.9, 0.5).violations()  # overlap below a1 + a2 - 1
    assert TsParams(1.5, 1, 1, 1).violations()


@given(st.floats(0.05, 1), st.floats(0.05, 1), st.floats(0, 1))
def test_ts_from_overlap_feasible(a1, a2, t):
    lo, hi = max(0.0, a1 + a2 - 1.0), min(a1, a2)
    ts = TsParams.from_overlap(a1, a2, lo + t * (hi - lo))
    assert ts.violations() == []
    assert ts.beta1 * ts.alpha2 == pytest.approx(ts.beta2 * ts.alpha1, abs=1e-12)


# documents --------------------------------------------------------------------

def test_json_round_trip(tmp_path):
    rng = np.random.default_rng(0)
    for protocol in Protocol:
        sc = gen.scenario(rng, protocol, noises=True)
        path = tmp_path / f"{protocol.value}.json"
        dump_scenario(sc, path)
        back, layout = load_scenario(path)
        assert layout is None
        assert back == sc


def test_layout_document_round_trip(tmp_path):
    layout = canonical.sweep_layout((0.5, 0.5), (2.5, 2.0))
    sc = canonical.position_sweep_scenario((0.5, 0.5))
    doc = scenario_to_dict(sc, layout)
    assert "h11" not in doc["bands"][0]
    back, lay = scenario_from_dict(json.loads(json.dumps(doc)))
    assert lay == layout
    for a, b in zip(back.bands, sc.bands):
        assert a == b


def test_power_units():
    doc = {"p1": {"dbm": 20}, "p2": 3.0, "protocol": "AF",
           "bands": [{n: 1.0 for n in ("h11", "h12", "h21", "h22", "h1r", "h2r", "hr1", "hr2")}
                     | {"h12": {"re": 0.5, "im": -0.5}, "noise_r": {"dbm": 0}}]}
    sc, _ = scenario_from_dict(doc)
    assert sc.p1 == pytest.approx(100.0)
    assert sc.p2 == 3.0
    assert sc.bands[0].h12 == complex(0.5, -0.5)
    assert sc.bands[0].noise_r == pytest.approx(1.0)


@pytest.mark.parametrize("doc", [
    {},
    {"p1": 1, "p2": 1, "bands": []},
    {"p1": 1, "p2": 1, "bands": [{"h11": 1}]},
    {"p1": "x", "p2": 1, "bands": [{}]},
    {"p1": 1, "p2": 1, "protocol": "XF", "bands": [{}]},
    {"p1": 1, "p2": 1, "schema_version": 2, "bands": [{}]},
])
def test_bad_documents(doc):
    with pytest.raises(ScenarioError) as exc:
        scenario_from_dict(doc)
    assert exc.value.violations


def test_bad_json(tmp_path):
    p = tmp_path / "bad.json"
    p.write_text("{not json")
    with pytest.raises(ScenarioError):
        load_scenario(p)


def test_band_swap_is_involution():
    b = gen.band(np.random.default_rng(1), noises=True)
    assert b.swapped().swapped() == b


@settings(max_examples=20)
@given(st.sampled_from(list(Protocol)))
def test_protocol_wrapping(p):
    assert p.wrapped().inner is p.inner
    assert p.wrapped().time_sharing
