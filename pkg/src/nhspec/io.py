"""CSV and JSON serialisation with fixed column contracts.

Floats are written with ``repr`` (shortest string that round-trips), so
files are full precision and byte-identical across reruns.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import InvalidInputError
from .spectroscopy import SpectralLine

LINE_COLUMNS = ("delta", "na_mean", "na_std")
ENERGY_COLUMNS = ("k", "re_e1", "im_e1", "re_e2", "im_e2",
                  "err_re_e1", "err_im_e1", "err_re_e2", "err_im_e2",
                  "converged1", "converged2")


def _fmt(x) -> str:
    x = float(x)
    if not math.isfinite(x):
        raise InvalidInputError(f"refusing to write non-finite value {x!r}")
    return repr(x)


def _write_rows(path, header, rows):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)


def _read_rows(path, header):
    with Path(path).open("r", encoding="utf-8", newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows or tuple(rows[0]) != tuple(header):
        raise InvalidInputError(f"{path}: expected header {','.join(header)}")
    body = rows[1:]
    for i, r in enumerate(body, start=2):
        if len(r) != len(header):
            raise InvalidInputError(f"{path}:{i}: expected {len(header)} fields, got {len(r)}")
    return body


def write_line_csv(path, line: SpectralLine) -> None:
    rows = [(_fmt(d), _fmt(m), _fmt(s))
            for d, m, s in zip(line.deltas, line.na_mean, line.na_std)]
    _write_rows(path, LINE_COLUMNS, rows)


def read_line_csv(path) -> SpectralLine:
    body = _read_rows(path, LINE_COLUMNS)
    arr = np.array([[float(x) for x in r] for r in body]).reshape(-1, 3)
    return SpectralLine(arr[:, 0], arr[:, 1], arr[:, 2])


@dataclass
class EnergyTable:
    k: np.ndarray          # (N,)
    pairs: np.ndarray      # (N, 2) complex
    errors: np.ndarray     # (N, 2, 2): per eigenvalue (err_re, err_im)
    converged: np.ndarray  # (N, 2) bool

    @property
    def all_converged(self) -> bool:
        return bool(self.converged.all())


def write_energies_csv(path, table: EnergyTable) -> None:
    rows = []
    for k, (e1, e2), err, conv in zip(table.k, table.pairs, table.errors, table.converged):
        rows.append((_fmt(k), _fmt(e1.real), _fmt(e1.imag), _fmt(e2.real), _fmt(e2.imag),
                     _fmt(err[0, 0]), _fmt(err[0, 1]), _fmt(err[1, 0]), _fmt(err[1, 1]),
                     str(int(conv[0])), str(int(conv[1]))))
    _write_rows(path, ENERGY_COLUMNS, rows)


def _flag(s, path):
    if s not in ("0", "1"):
        raise InvalidInputError(f"{path}: converged flags must be 0 or 1, got {s!r}")
    return s == "1"


def read_energies_csv(path) -> EnergyTable:
    body = _read_rows(path, ENERGY_COLUMNS)
    if not body:
        raise InvalidInputError(f"{path}: no rows")
    k, pairs, errors, conv = [], [], [], []
    for r in body:
        v = [float(x) for x in r[:9]]
        k.append(v[0])
        pairs.append((complex(v[1], v[2]), complex(v[3], v[4])))
        errors.append(((v[5], v[6]), (v[7], v[8])))
        conv.append((_flag(r[9], path), _flag(r[10], path)))
    return EnergyTable(np.array(k), np.array(pairs, dtype=complex),
                       np.array(errors), np.array(conv, dtype=bool))


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return float(obj)
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    return obj


def dumps_json(obj) -> str:
    return json.dumps(_jsonable(obj), indent=2, sort_keys=True, allow_nan=False) + "\n"


def write_json(path, obj) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(dumps_json(obj), encoding="utf-8")


def read_json(path):
    return json.loads(Path(path).read_text(encoding="utf-8"))
