"""Bundled run configurations (rad/us, us)."""

from __future__ import annotations

import copy

from .config import RunConfig, config_from_dict
from .errors import ConfigError

_MRM_NONTRIVIAL = {"J1": 0.315, "J2": 0.098, "J3": 0.122, "mz": 0.035, "gamma": 0.092}

_BASE = {
    "units": "rad/us",
    "seed": 0,
    "probe": {"omega": 0.019, "t": 200.0, "n0": 1.0},
    "deltas": {"start": -0.6, "stop": 0.6, "num": 61},
    "k_grid": {"num": 41},
    "noise": {"shots": 1000, "reps": 20, "gamma_fluct": 0.2, "dephasing_t2": None},
    "topology": {"eb": None, "grid_refine": 1},
}

PRESETS = {
    "fig2_nontrivial": {"model": {"kind": "mrm", "params": dict(_MRM_NONTRIVIAL)},
                        "output": {"dir": "out/fig2_nontrivial"}},
    "fig2_trivial": {"model": {"kind": "mrm",
                               "params": {**_MRM_NONTRIVIAL, "J3": 0.0, "mz": 0.038}},
                     "output": {"dir": "out/fig2_trivial"}},
    "fig3_unknot": {"model": {"kind": "mrm",
                              "params": {"J1": 0.195, "J2": 0.098, "J3": 0.100,
                                         "mz": 0.038, "gamma": 0.127}},
                    "output": {"dir": "out/fig3_unknot"}},
    "fig3_hopf": {"model": {"kind": "lk",
                            "params": {"mx": 0.13, "g1": 0.05, "g2": 0.08,
                                       "g3": 0.07, "gamma0": 0.15}},
                  "output": {"dir": "out/fig3_hopf"}},
    "figS1_validate": {"model": {"kind": "mrm", "params": dict(_MRM_NONTRIVIAL)},
                       "validate": {"k": 1.2566370614359172, "jl": 4.76, "gamma_e": 123.0,
                                    "dt": 0.001, "threshold": 0.01,
                                    "gamma_e_scan": [61.5, 123.0, 246.0, 492.0],
                                    "dephasing_t2": [200.0, 400.0, 800.0],
                                    "gamma_fluct_reps": 20},
                       "output": {"dir": "out/figS1_validate"}},
    "figS4_short_time": {"model": {"kind": "mrm", "params": dict(_MRM_NONTRIVIAL)},
                         "probe": {"omega": 0.019, "t": 80.0, "n0": 1.0},
                         "output": {"dir": "out/figS4_short_time"}},
}

TOPOLOGY_PRESETS = ("fig2_nontrivial", "fig2_trivial", "fig3_unknot", "fig3_hopf")
EXPECTED_CLASS = {"fig2_nontrivial": "Unlink", "fig2_trivial": "TrivialArcs",
                  "fig3_unknot": "Unknot", "fig3_hopf": "HopfLink",
                  "figS4_short_time": "Unlink"}


def preset_dict(name: str) -> dict:
    if name not in PRESETS:
        raise ConfigError(f"unknown preset {name!r}; choose from {sorted(PRESETS)}")
    d = copy.deepcopy(_BASE)
    d.update(copy.deepcopy(PRESETS[name]))
    return d


def preset(name: str) -> RunConfig:
    return config_from_dict(preset_dict(name))
