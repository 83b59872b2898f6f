"""Command-line entry point: spectrum, sweep, topology and validate.

Exit codes: 0 success; 1 a fit did not converge or a validation failed;
2 bad configuration, arguments or files; 3 band tracking or an invariant
could not be resolved.
"""

from __future__ import annotations

import argparse
import logging
import sys
from dataclasses import replace
from pathlib import Path

from . import config as config_mod
from .errors import ConfigError, InvalidInputError, NHSpecError, TopologyError
from .io import read_energies_csv, write_energies_csv, write_json, write_line_csv
from .pipeline import (closed_form_table, fit_summary, run_spectrum, run_sweep,
                       run_validate, topology_from_table)
from .presets import PRESETS, preset

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_USAGE = 2
EXIT_TOPOLOGY = 3

log = logging.getLogger("nhspec")


def _parse_eb(raw: str):
    try:
        re_s, im_s = raw.split(",")
        return (float(re_s), float(im_s))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected RE,IM, got {raw!r}") from None


def _positive_int(raw: str) -> int:
    v = int(raw)
    if v < 1:
        raise argparse.ArgumentTypeError("must be >= 1")
    return v


def _common(p: argparse.ArgumentParser, needs_model=True):
    src = p.add_mutually_exclusive_group(required=needs_model)
    src.add_argument("--config", type=Path, help="YAML run configuration")
    src.add_argument("--preset", choices=sorted(PRESETS), help="bundled configuration")
    p.add_argument("--seed", type=int, help="override the configured seed")
    p.add_argument("--out", type=Path, help="output directory (default: config output.dir)")
    p.add_argument("--no-noise", action="store_true", help="noiseless spectra")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="nhspec",
        description="Complex-energy spectroscopy of two-band non-Hermitian models.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("spectrum", help="one spectral line N_a(delta) at momentum k")
    _common(p)
    p.add_argument("--k", type=float, required=True, help="momentum in [0, 2 pi]")

    p = sub.add_parser("sweep", help="spectral lines and fitted energies over the k grid")
    _common(p)
    p.add_argument("--grid-refine", type=_positive_int, metavar="FACTOR",
                   help="subdivide every k interval FACTOR times")

    p = sub.add_parser("topology", help="band tracking, invariants and classification")
    _common(p, needs_model=False)
    p.add_argument("--energies", type=Path,
                   help="energies CSV from `sweep`; without it the closed-form bands are used")
    p.add_argument("--eb", type=_parse_eb, metavar="RE,IM", help="explicit base energy")
    p.add_argument("--grid-refine", type=_positive_int, metavar="FACTOR",
                   help="refine the closed-form k grid")

    p = sub.add_parser("validate", help="six-level master equation checks")
    _common(p)
    return parser


def load_config(args) -> config_mod.RunConfig | None:
    if args.config is not None:
        cfg = config_mod.load(args.config)
    elif args.preset is not None:
        cfg = preset(args.preset)
    else:
        return None
    if args.seed is not None:
        if args.seed < 0:
            raise ConfigError("--seed must be non-negative")
        cfg = replace(cfg, seed=args.seed)
    if getattr(args, "no_noise", False):
        cfg = replace(cfg, noise=None)
    top = cfg.topology
    if getattr(args, "grid_refine", None) is not None:
        top = replace(top, grid_refine=args.grid_refine)
    if getattr(args, "eb", None) is not None:
        top = replace(top, eb=args.eb)
    return replace(cfg, topology=top)


def _out_dir(args, cfg) -> Path:
    if args.out is not None:
        return args.out
    return Path(cfg.output.dir if cfg is not None else "out")


def _save_config(cfg, out: Path):
    if cfg is not None:
        out.mkdir(parents=True, exist_ok=True)
        config_mod.save(cfg, out / "config.yaml")


def cmd_spectrum(args, cfg) -> int:
    out = _out_dir(args, cfg)
    line = run_spectrum(cfg, args.k, noisy=cfg.noise is not None)
    write_line_csv(out / "spectrum.csv", line)
    meta = {k: v for k, v in line.meta.items()}
    write_json(out / "spectrum.json", meta)
    _save_config(cfg, out)
    log.info("wrote %s", out / "spectrum.csv")
    return EXIT_OK


def cmd_sweep(args, cfg) -> int:
    out = _out_dir(args, cfg)
    res = run_sweep(cfg, noisy=cfg.noise is not None)
    for i, line in enumerate(res.lines):
        write_line_csv(out / "lines" / f"line_{i:03d}.csv", line)
    write_energies_csv(out / "energies.csv", res.table)
    write_json(out / "sweep.json", {"k": res.table.k.tolist(),
                                    "fits": [fit_summary(f) for f in res.fits],
                                    "all_converged": res.all_converged})
    _save_config(cfg, out)
    if not res.all_converged:
        bad = [float(k) for k, c in zip(res.table.k, res.table.converged) if not c.all()]
        log.error("fits did not converge at k = %s", bad)
        return EXIT_FAILED
    return EXIT_OK


def cmd_topology(args, cfg) -> int:
    out = _out_dir(args, cfg)
    if args.energies is not None:
        table = read_energies_csv(args.energies)
        source = "energies_csv"
    elif cfg is not None:
        table = closed_form_table(cfg)
        source = "closed_form"
    else:
        raise ConfigError("topology needs --energies or a model (--config/--preset)")
    eb = args.eb if args.eb is not None else (cfg.topology.eb if cfg is not None else None)
    try:
        report = topology_from_table(table, eb)
    except TopologyError as exc:
        payload = {"error": type(exc).__name__, "message": str(exc), "source": source}
        if hasattr(exc, "k_interval"):
            payload["k_interval"] = list(exc.k_interval)
        write_json(out / "topology.json", payload)
        log.error("%s", exc)
        return EXIT_TOPOLOGY
    payload = report.to_dict()
    payload["source"] = source
    write_json(out / "topology.json", payload)
    _save_config(cfg, out)
    print(f"{report.classification}: w={payload['w']} W={payload['W']} m={report.m} nu={report.nu}")
    return EXIT_OK if table.all_converged else EXIT_FAILED


def cmd_validate(args, cfg) -> int:
    out = _out_dir(args, cfg)
    report = run_validate(cfg)
    write_json(out / "validate.json", report)
    _save_config(cfg, out)
    for name, chk in report["checks"].items():
        print(f"{name}: {'pass' if chk['passed'] else 'FAIL'}")
    return EXIT_OK if report["passed"] else EXIT_FAILED


COMMANDS = {"spectrum": cmd_spectrum, "sweep": cmd_sweep,
            "topology": cmd_topology, "validate": cmd_validate}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        cfg = load_config(args)
        return COMMANDS[args.command](args, cfg)
    except (ConfigError, InvalidInputError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except TopologyError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_TOPOLOGY
    except NHSpecError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAILED


if __name__ == "__main__":
    sys.exit(main())
