"""Band tracking and complex-energy invariants of two-band spectra.

Bands are sampled on a grid k_0 = 0 < ... < k_{N-1} = 2 pi. The last sample
and the first describe the same Brillouin-zone point, so every closed path
below ends with the increment from the k = 2 pi sample back to the
(permuted) k = 0 sample. For exact data that increment is zero.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .errors import (BasePointError, DegenerateBandsError, GridRefinementRequired,
                     InvalidInputError, ResolutionError)

IDENTITY = (0, 1)
SWAP = (1, 0)

MIN_POINTS = 8
JUMP_FACTOR = 3.0        # jump allowed relative to the median of nearby jumps
JUMP_WINDOW = 4          # nearby = this many steps on either side
AMBIGUITY_RATIO = 1.2    # alternative pairing must cost at least this much more
MAX_PHASE_STEP = np.pi / 2
SNAP_RESIDUE = 0.05
ON_CURVE = 1e-6
# a base energy must sit at least this fraction of the curve size away from it
MIN_DEPTH_FRACTION = 0.04
_BASE_GRID = 61

CLASSES = ("TrivialArcs", "Unlink", "Unknot", "HopfLink", "Other")


@dataclass
class BandSet:
    k_grid: np.ndarray
    bands: np.ndarray                 # shape (2, N), complex
    sigma: tuple = IDENTITY           # band at k = 2 pi  ->  band index at k = 0
    errors: np.ndarray | None = None  # shape (2, N, 2): (err_re, err_im)

    def __post_init__(self):
        self.k_grid = np.asarray(self.k_grid, dtype=float)
        self.bands = np.asarray(self.bands, dtype=complex)
        self.sigma = tuple(int(s) for s in self.sigma)
        if self.bands.shape != (2, self.k_grid.size):
            raise InvalidInputError("bands must have shape (2, len(k_grid))")
        if self.sigma not in (IDENTITY, SWAP):
            raise InvalidInputError(f"sigma must be a permutation of (0, 1), got {self.sigma}")

    @property
    def m(self) -> int:
        return 1 if self.sigma == IDENTITY else 2

    def loop(self, n: int) -> np.ndarray:
        """Closed path of band n over m Brillouin periods (k = 0 sample repeated at the end)."""
        if self.sigma == IDENTITY:
            path = self.bands[n]
            return np.append(path, path[0])
        other = self.sigma[n]
        return np.concatenate([self.bands[n], self.bands[other], self.bands[n][:1]])


@dataclass
class TopologyReport:
    w: list                  # per band: int, or None when the band does not close
    W: Fraction
    m: int
    nu: int | None
    e_b: list                # base energy used per band
    classification: str
    sigma: tuple = IDENTITY
    details: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        def cplx(z):
            return [float(np.real(z)), float(np.imag(z))]

        return {
            "classification": self.classification,
            "sigma": list(self.sigma),
            "m": self.m,
            "w": [("undefined" if x is None else int(x)) for x in self.w],
            "W": str(self.W),
            "nu": None if self.nu is None else int(self.nu),
            "e_b": [cplx(z) for z in self.e_b],
            **({"details": self.details} if self.details else {}),
        }


# ---------------------------------------------------------------- tracking

def _local_median(x, half):
    """Median of x over a window of 2 half + 1 entries (truncated at the ends)."""
    n = x.size
    return np.array([np.median(x[max(0, i - half):min(n, i + half + 1)]) for i in range(n)])


def track_bands(k_grid, pairs, jump_factor=JUMP_FACTOR,
                ambiguity_ratio=AMBIGUITY_RATIO, errors=None) -> BandSet:
    """Assign unordered eigenvalue pairs to two continuous bands.

    At each step the pairing closest to a linear extrapolation of the two
    bands is chosen (first step: closest to the previous point). Tracking is
    refused when the chosen pairing is not clearly better than the swapped
    one, or when a jump exceeds ``jump_factor`` times the median of the
    jumps around it. ``errors`` (shape (N, 2, 2), per pair member
    (err_re, err_im)) follow their eigenvalues through the reordering.
    """
    k = np.asarray(k_grid, dtype=float)
    pairs = np.asarray(pairs, dtype=complex)
    if k.ndim != 1 or k.size < MIN_POINTS:
        raise InvalidInputError(f"band tracking needs at least {MIN_POINTS} k points")
    if pairs.shape != (k.size, 2):
        raise InvalidInputError("pairs must have shape (len(k_grid), 2)")
    if np.any(np.diff(k) <= 0):
        raise InvalidInputError("k grid must be strictly increasing")
    if not np.all(np.isfinite(pairs)):
        raise InvalidInputError("eigenvalue pairs must be finite")

    if errors is not None:
        errors = np.asarray(errors, dtype=float)
        if errors.shape != (k.size, 2, 2):
            raise InvalidInputError("errors must have shape (len(k_grid), 2, 2)")
    order = np.zeros((k.size, 2), dtype=int)
    order[0] = (0, 1)
    bands = np.empty((2, k.size), dtype=complex)
    bands[:, 0] = pairs[0]
    jumps = np.zeros(k.size - 1)
    margins = np.full(k.size - 1, np.inf)
    for j in range(1, k.size):
        if j >= 2:
            ratio = (k[j] - k[j - 1]) / (k[j - 1] - k[j - 2])
            pred = bands[:, j - 1] + ratio * (bands[:, j - 1] - bands[:, j - 2])
        else:
            pred = bands[:, j - 1]
        a, b = pairs[j]
        order[j] = (0, 1)
        same = abs(a - pred[0]) + abs(b - pred[1])
        swap = abs(b - pred[0]) + abs(a - pred[1])
        if swap < same:
            a, b = b, a
            same, swap = swap, same
            order[j] = (1, 0)
        bands[:, j] = (a, b)
        jumps[j - 1] = max(abs(a - bands[0, j - 1]), abs(b - bands[1, j - 1]))
        margins[j - 1] = swap / same if same > 0 else np.inf

    bad = int(np.argmin(margins))
    if margins[bad] < ambiguity_ratio:
        raise GridRefinementRequired(
            f"ambiguous band assignment (alternative costs only {margins[bad]:.3g}x more)",
            (k[bad], k[bad + 1]))
    local = _local_median(jumps, JUMP_WINDOW)
    excess = np.where(local > 0, jumps / np.where(local > 0, local, 1.0), 0.0)
    worst = int(np.argmax(excess))
    if excess[worst] > jump_factor:
        raise GridRefinementRequired(
            f"jump {jumps[worst]:.3g} exceeds {jump_factor}x the nearby median {local[worst]:.3g}",
            (k[worst], k[worst + 1]))

    first, last = bands[:, 0], bands[:, -1]
    keep = abs(last[0] - first[0]) + abs(last[1] - first[1])
    cross = abs(last[0] - first[1]) + abs(last[1] - first[0])
    sigma = IDENTITY if keep <= cross else SWAP
    band_errors = None
    if errors is not None:
        rows = np.arange(k.size)
        band_errors = np.stack([errors[rows, order[:, n]] for n in range(2)])
    return BandSet(k, bands, sigma, band_errors)


# ---------------------------------------------------------------- invariants

def _phase_total(z, closed=True):
    if closed:
        z = np.append(z, z[0])
    inc = np.angle(z[1:] / z[:-1])
    worst = float(np.max(np.abs(inc))) if inc.size else 0.0
    if worst >= MAX_PHASE_STEP:
        raise ResolutionError(
            f"phase step {worst:.3g} rad exceeds pi/2; refine the k grid")
    return float(inc.sum())


def _snap(value, denominator=1):
    n = round(value * denominator)
    if abs(value * denominator - n) >= SNAP_RESIDUE:
        raise ResolutionError(f"winding {value:.4f} is not within {SNAP_RESIDUE} of a multiple of 1/{denominator}")
    return int(n)


def winding_number(band, e_b, closed=True) -> int:
    """Number of times a closed band path encircles the base energy e_b.

    ``band`` lists the samples in k order with the k = 2 pi sample last;
    with ``closed`` the path returns from it to the first sample.
    """
    z = np.asarray(band, dtype=complex) - complex(e_b)
    if np.min(np.abs(z)) <= ON_CURVE:
        raise BasePointError(f"base energy {complex(e_b)} lies on the band")
    return _snap(_phase_total(z, closed) / (2 * np.pi))


def modified_winding(bs: BandSet, e_b, n: int = 0) -> tuple[Fraction, int]:
    """Winding of band n about e_b per 2 m pi, m being the band's k-period."""
    m = bs.m
    path = bs.loop(n)[:-1]
    z = path - complex(e_b)
    if np.min(np.abs(z)) <= ON_CURVE:
        raise BasePointError(f"base energy {complex(e_b)} lies on the band")
    total = _phase_total(z, closed=True) / (2 * np.pi)
    return Fraction(_snap(total), m), m


def braid_degree(bs: BandSet) -> int:
    """Phase accumulated by E_1 - E_2 over one period, in units of pi."""
    diff = bs.bands[0] - bs.bands[1]
    if np.min(np.abs(diff)) <= ON_CURVE:
        raise DegenerateBandsError("bands touch; braid degree undefined")
    end = diff[0] if bs.sigma == IDENTITY else -diff[0]
    total = _phase_total(np.append(diff, end), closed=False)
    return _snap(total / np.pi)


# ---------------------------------------------------------------- base energies

def _winding_field(path, points):
    z = path[None, :] - points[:, None]
    # points sitting on a vertex get a meaningless value; their depth is zero
    with np.errstate(divide="ignore", invalid="ignore"):
        inc = np.angle(z[:, 1:] / z[:, :-1])
    inc = np.nan_to_num(inc)
    return np.rint(inc.sum(axis=1) / (2 * np.pi)).astype(int)


def _distance_to_polyline(path, points):
    a, b = path[:-1], path[1:]
    ab = b - a
    p = points[:, None]
    denom = np.abs(ab) ** 2
    denom[denom == 0] = 1.0
    s = np.clip(((p - a) * ab.conj()).real / denom, 0.0, 1.0)
    return np.abs(p - (a + s * ab)).min(axis=1)


def default_base_energy(path) -> complex:
    """Base energy deepest inside the region a closed path encloses.

    Candidate points on a grid over the bounding box are scored by their
    distance to the path; the deepest point with non-zero winding is
    returned if it is at least ``MIN_DEPTH_FRACTION`` of the curve size away
    from the path. Otherwise the path encloses nothing resolvable and the
    deepest point overall (winding zero) is returned.
    """
    path = np.asarray(path, dtype=complex)
    if path[0] != path[-1]:
        path = np.append(path, path[0])
    re, im = path.real, path.imag
    size = max(np.ptp(re), np.ptp(im))
    if size == 0:
        return complex(path[0]) + 1.0
    xs = np.linspace(re.min(), re.max(), _BASE_GRID)
    ys = np.linspace(im.min(), im.max(), _BASE_GRID)
    gx, gy = np.meshgrid(xs, ys)
    pts = (gx + 1j * gy).ravel()
    depth = _distance_to_polyline(path, pts)
    wind = _winding_field(path, pts)
    inside = wind != 0
    if inside.any():
        i = int(np.argmax(np.where(inside, depth, -1.0)))
        if depth[i] >= MIN_DEPTH_FRACTION * size:
            return complex(pts[i])
    outside = ~inside
    i = int(np.argmax(np.where(outside, depth, -1.0)))
    return complex(pts[i])


# ---------------------------------------------------------------- classification

def classify(bs: BandSet, e_b=None) -> TopologyReport:
    """Unlink / unknot / Hopf link / trivial arcs from (sigma, w, W, nu).

    ``e_b`` overrides the base energy for every band.
    """
    try:
        nu = braid_degree(bs)
    except DegenerateBandsError:
        nu = None

    if bs.sigma == SWAP:
        base = complex(e_b) if e_b is not None else default_base_energy(bs.loop(0))
        W, m = modified_winding(bs, base, 0)
        w = [None, None]
        bases = [base, base]
        if abs(W) == Fraction(1, 2):
            cls = "Unknot"
        else:
            cls = "Other"
        return TopologyReport(w=w, W=W, m=m, nu=nu, e_b=bases, classification=cls,
                              sigma=bs.sigma)

    bases = [complex(e_b) if e_b is not None else default_base_energy(bs.loop(n))
             for n in range(2)]
    w = [winding_number(bs.loop(n)[:-1], bases[n]) for n in range(2)]
    W = Fraction(w[0], 1)
    if w[0] == 0 and w[1] == 0:
        cls = "TrivialArcs"
    elif abs(w[0]) == 1 and w[0] == w[1] and nu is not None and abs(nu) >= 2:
        cls = "HopfLink"
    elif abs(w[0]) == 1 and w[0] == w[1] and (nu is None or nu == 0):
        cls = "Unlink"
    else:
        cls = "Other"
    return TopologyReport(w=w, W=W, m=1, nu=nu, e_b=bases, classification=cls,
                          sigma=bs.sigma)


def bandset_from_model(model, k_grid):
    """Closed-form bands of a model, tracked over ``k_grid``."""
    from .models import closed_form_energies

    pairs = [closed_form_energies(model.at_k(k)) for k in k_grid]
    return track_bands(k_grid, pairs)
