"""Monte Carlo over seeds: classification rates and mean energy errors per preset.

Usage: python3 scripts/classification_rates.py [--seeds 20] [--t 200] [--out rates.json]
"""

import argparse
import collections
from dataclasses import replace

import numpy as np

from nhspec.errors import TopologyError
from nhspec.fitting import pooled_energy_spread
from nhspec.io import write_json
from nhspec.pipeline import closed_form_table, run_sweep, topology_from_table
from nhspec.presets import TOPOLOGY_PRESETS, preset
from nhspec.topology import bandset_from_model


def study(name, seeds, t):
    cfg = preset(name)
    if t is not None:
        cfg = replace(cfg, probe=replace(cfg.probe, t=t))
    expected = topology_from_table(closed_form_table(cfg)).classification
    outcomes = collections.Counter()
    tables = []
    for seed in range(seeds):
        table = run_sweep(replace(cfg, seed=seed), uncertainty=False).table
        tables.append(table)
        try:
            outcomes[topology_from_table(table).classification] += 1
        except TopologyError as exc:
            outcomes[type(exc).__name__] += 1
    truth = bandset_from_model(cfg.model.build(), cfg.k_grid.values()).bands
    err = []
    for j in range(truth.shape[1]):
        est = pooled_energy_spread([tb.pairs[j] for tb in tables])
        if abs(est[0].e - truth[0, j]) > abs(est[0].e - truth[1, j]):
            est = est[::-1]
        err.append([(e.err_re, e.err_im) for e in est])
    err = np.mean(err, axis=0)
    return {"expected": expected, "outcomes": dict(outcomes),
            "rate": outcomes[expected] / seeds,
            "mean_err_re": err[:, 0].tolist(), "mean_err_im": err[:, 1].tolist(),
            "mean_abs_im_e": np.abs(truth.imag).mean(axis=1).tolist()}


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--seeds", type=int, default=20)
    p.add_argument("--t", type=float, help="override the probe time")
    p.add_argument("--presets", nargs="+", default=list(TOPOLOGY_PRESETS))
    p.add_argument("--out", default="out/classification_rates.json")
    args = p.parse_args()
    report = {}
    for name in args.presets:
        report[name] = study(name, args.seeds, args.t)
        r = report[name]
        print(f"{name}: {r['expected']} {r['rate']:.0%} {r['outcomes']}", flush=True)
    write_json(args.out, report)


if __name__ == "__main__":
    main()
