import pytest
from hypothesis import given, strategies as st

from nhspec.config import config_from_dict, load, loads, save
from nhspec.errors import ConfigError
from nhspec.presets import PRESETS, preset, preset_dict

positive = st.floats(0.001, 1.0, allow_nan=False)


@st.composite
def raw_configs(draw):
    kind = draw(st.sampled_from(["mrm", "lk", "generic"]))
    if kind == "mrm":
        params = {"J1": draw(positive), "J2": draw(positive), "J3": draw(positive),
                  "mz": draw(st.floats(-0.1, 0.1)), "gamma": draw(positive)}
    elif kind == "lk":
        params = {"mx": draw(positive), "g1": draw(positive), "g2": draw(positive),
                  "g3": draw(positive), "gamma0": draw(positive)}
    else:
        params = {"c": draw(positive), "d_re": draw(st.floats(-1, 1)), "d_im": -draw(positive)}
    raw = {"units": "rad/us", "seed": draw(st.integers(0, 2**32)),
           "model": {"kind": kind, "params": params},
           "probe": {"omega": draw(positive), "t": draw(st.floats(1, 500)), "n0": draw(st.floats(0.5, 1))},
           "k_grid": {"num": draw(st.integers(8, 200))}}
    if draw(st.booleans()):
        raw["noise"] = None
    else:
        raw["noise"] = {"shots": draw(st.integers(1, 5000)), "reps": draw(st.integers(1, 50)),
                        "gamma_fluct": draw(st.floats(0, 0.5)),
                        "dephasing_t2": draw(st.one_of(st.none(), st.floats(10, 1000)))}
    if draw(st.booleans()):
        raw["topology"] = {"eb": [draw(st.floats(-1, 1)), draw(st.floats(-1, 1))],
                           "grid_refine": draw(st.integers(1, 4))}
    return raw


@given(raw_configs())
def test_round_trip(raw):
    cfg = config_from_dict(raw)
    assert loads(cfg.dumps()) == cfg
    assert loads(cfg.dumps()).dumps() == cfg.dumps()


@pytest.mark.parametrize("name", sorted(PRESETS))
def test_presets_valid(name, tmp_path):
    cfg = preset(name)
    save(cfg, tmp_path / "c.yaml")
    assert load(tmp_path / "c.yaml") == cfg


def test_preset_values():
    assert preset("fig2_trivial").model.params["J3"] == 0.0
    assert preset("fig2_trivial").model.params["mz"] == 0.038
    assert preset("figS4_short_time").probe.t == 80.0
    assert preset("fig3_hopf").model.kind == "lk"
    assert preset("figS1_validate").validate.jl == 4.76


def bad(mutator):
    raw = preset_dict("fig2_nontrivial")
    mutator(raw)
    with pytest.raises(ConfigError):
        config_from_dict(raw)


def test_rejects_unknown_keys():
    bad(lambda r: r.update(extra=1))
    bad(lambda r: r["probe"].update(phase=0.1))
    bad(lambda r: r["model"]["params"].update(J4=0.1))


def test_requires_units():
    bad(lambda r: r.pop("units"))
    bad(lambda r: r.update(units="MHz"))


def test_rejects_bad_values():
    bad(lambda r: r["probe"].update(omega="fast"))
    bad(lambda r: r["probe"].update(n0=2.0))
    bad(lambda r: r["model"].update(kind="ssh"))
    bad(lambda r: r["model"]["params"].update(gamma=-0.1))
    bad(lambda r: r["k_grid"].update(num=4))
    bad(lambda r: r["noise"].update(reps=0))
    bad(lambda r: r["topology"].update(eb=[1.0]))
    bad(lambda r: r.update(seed=-1))
    bad(lambda r: r["deltas"].update(num=2.5))


def test_unparseable(tmp_path):
    with pytest.raises(ConfigError):
        loads("units: [unclosed")
    with pytest.raises(ConfigError):
        load(tmp_path / "missing.yaml")
    with pytest.raises(ConfigError):
        loads("- just a list")
