"""Six-level master-equation spectra with probe dephasing, written as CSV.

Usage: python3 scripts/dephasing_curves.py [--out out/dephasing.csv]
"""

import argparse
import csv
from dataclasses import replace
from pathlib import Path

from nhspec.dynamics import na_master_curve
from nhspec.models import SixLevelConfig
from nhspec.presets import preset


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--out", type=Path, default=Path("out/dephasing.csv"))
    args = p.parse_args()
    cfg = preset("figS1_validate")
    v = cfg.validate
    probe = cfg.probe.build()
    deltas = cfg.deltas.values()
    jx, jy, jz = cfg.model.build().components(v.k)
    base = SixLevelConfig(jx, jy, jz, probe.omega, 0.0, v.jl, gamma_e=v.gamma_e)
    cols = {"none": na_master_curve(base, probe, deltas, v.dt)}
    for t2 in v.dephasing_t2:
        cols[f"t2_{t2:g}"] = na_master_curve(replace(base, dephasing_rate=1.0 / t2), probe, deltas, v.dt)
    args.out.parent.mkdir(parents=True, exist_ok=True)
    with args.out.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["delta", *cols])
        for i, d in enumerate(deltas):
            w.writerow([repr(float(d)), *(repr(float(c[i])) for c in cols.values())])
    print(f"wrote {args.out}")


if __name__ == "__main__":
    main()
