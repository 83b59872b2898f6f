"""Run every bundled preset through the command line and collect the outputs.

Usage: python3 scripts/run_all.py [--out out] [--seed 0] [--no-noise]
"""

import argparse
import sys
from pathlib import Path

from nhspec.cli import main
from nhspec.presets import PRESETS, TOPOLOGY_PRESETS


def run(argv):
    code = main(argv)
    print(f"[{code}] nhspec {' '.join(argv)}", flush=True)
    return code


def cli():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--out", type=Path, default=Path("out"))
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--no-noise", action="store_true")
    args = p.parse_args()
    extra = ["--seed", str(args.seed)] + (["--no-noise"] if args.no_noise else [])
    codes = []
    for name in PRESETS:
        out = args.out / name
        if name == "figS1_validate":
            codes.append(run(["validate", "--preset", name, "--out", str(out)]))
            continue
        codes.append(run(["sweep", "--preset", name, "--out", str(out), *extra]))
        codes.append(run(["topology", "--energies", str(out / "energies.csv"), "--out", str(out)]))
        if name in TOPOLOGY_PRESETS:
            codes.append(run(["topology", "--preset", name, "--out", str(out / "closed_form")]))
    return max(codes)


if __name__ == "__main__":
    sys.exit(cli())
