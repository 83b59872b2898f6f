"""Recover (c, d, N0), and with them the complex energies, from a spectral line.

The fit minimises sum_i (N_a,i - N0 |<a|exp(-i H_f t)|a>|^2)^2 over the
generic two-band parameters with Omega and t held at their known values.
N0 enters linearly, so for each trial (c, d) it is eliminated in closed form
and only (c, Re d, Im d) are iterated on.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.signal import find_peaks, peak_widths

from .dynamics import na_curve
from .errors import InvalidInputError, UncertaintyUnavailableError
from .models import TwoBandParams, closed_form_energies
from .spectroscopy import SpectralLine

N_STARTS = 5
MAX_EVALS = 10_000
XTOL = 1e-6      # absolute parameter step, rad/us
FTOL = 1e-9      # relative change of the residual sum of squares
_FD_STEP = 1e-7
_NOISE_FLOOR = 1e-3


@dataclass
class Dip:
    center: float
    half_width: float
    depth: float


@dataclass
class FitResult:
    c: float
    d_re: float
    d_im: float
    n0: float
    residual: float          # root-mean-square of the fit residuals
    converged: bool
    iterations: int
    n_eval: int = 0
    trace: list = field(default_factory=list, repr=False)  # cost after each accepted step

    @property
    def d(self) -> complex:
        return complex(self.d_re, self.d_im)

    def two_band(self) -> TwoBandParams:
        return TwoBandParams(c=self.c, d=self.d)


@dataclass
class EnergyEstimate:
    e: complex
    err_re: float = 0.0
    err_im: float = 0.0


# ---------------------------------------------------------------- dips

def _smooth3(y):
    s = np.convolve(y, np.ones(3) / 3.0, mode="same")
    s[0] = 0.5 * (y[0] + y[1])
    s[-1] = 0.5 * (y[-1] + y[-2])
    return s


def detect_dips(line: SpectralLine, max_dips: int = 2) -> list[Dip]:
    """Up to ``max_dips`` absorption dips, sorted by centre.

    A dip is a local minimum of the 3-point smoothed line lying below
    baseline * (1 - 3 * median(std)); its centre is refined by a parabola
    through the three lowest points and its half width is half the width
    at half prominence.
    """
    if len(line) < 7:
        raise InvalidInputError("dip detection needs at least 7 points")
    x, y = line.deltas, line.na_mean
    s = _smooth3(y)
    baseline = float(np.percentile(s, 90))
    noise = max(float(np.median(line.na_std)), _NOISE_FLOOR)
    threshold = baseline * (1.0 - 3.0 * noise)
    idx, props = find_peaks(-s, prominence=3.0 * noise)
    keep = [j for j, i in enumerate(idx) if s[i] < threshold]
    if not keep:
        return []
    keep.sort(key=lambda j: -props["prominences"][j])
    keep = keep[:max_dips]
    widths = peak_widths(-s, idx[keep], rel_height=0.5)[0]
    step = float(np.mean(np.diff(x)))
    dips = []
    for w, j in zip(widths, keep):
        i = idx[j]
        y0, y1, y2 = s[i - 1], s[i], s[i + 1]
        denom = y0 - 2 * y1 + y2
        shift = 0.5 * (y0 - y2) / denom if denom > 0 else 0.0
        center = x[i] + float(np.clip(shift, -0.5, 0.5)) * step
        dips.append(Dip(center=center, half_width=0.5 * w * step,
                        depth=baseline - float(s[i])))
    dips.sort(key=lambda d: d.center)
    return dips


# ---------------------------------------------------------------- model / objective

class _Objective:
    """Residuals with N0 profiled out; counts model evaluations."""

    def __init__(self, line, t, omega, weights):
        self.x = line.deltas
        self.y = line.na_mean
        self.t = t
        self.omega = omega
        self.w = weights
        self.n_eval = 0

    def shape(self, theta):
        self.n_eval += 1
        c, dre, dim = theta
        return na_curve(c, complex(dre, dim), self.omega, self.t, self.x)

    def n0_for(self, g):
        gw = g * self.w
        den = float(gw @ gw)
        if den == 0:
            return 1.0
        return float(np.clip((gw @ (self.y * self.w)) / den, 0.0, 1.0))

    def residuals(self, theta):
        g = self.shape(theta)
        n0 = self.n0_for(g)
        return (n0 * g - self.y) * self.w, n0


def _jacobian(obj, theta, r0, lo, hi):
    jac = np.empty((r0.size, theta.size))
    for j in range(theta.size):
        h = _FD_STEP
        tp = theta.copy()
        # step inward when sitting on the upper bound
        if tp[j] + h > hi[j]:
            h = -h
        tp[j] += h
        jac[:, j] = (obj.residuals(tp)[0] - r0) / h
    return jac


def _levenberg_marquardt(obj, theta0, lo, hi, max_evals=MAX_EVALS):
    """Bounded Levenberg-Marquardt with Marquardt scaling.

    Components on an active bound whose gradient points outward are frozen
    for the step; trial points are clipped into the box. Only steps that
    lower the cost are accepted, so ``trace`` is strictly decreasing.
    """
    theta = np.clip(np.asarray(theta0, dtype=float), lo, hi)
    start_evals = obj.n_eval
    r, n0 = obj.residuals(theta)
    cost = 0.5 * float(r @ r)
    trace = [cost]
    lam = 1e-3
    iterations = 0
    converged = False
    while obj.n_eval - start_evals < max_evals:
        iterations += 1
        jac = _jacobian(obj, theta, r, lo, hi)
        grad = jac.T @ r
        a = jac.T @ jac
        free = ~(((theta <= lo) & (grad > 0)) | ((theta >= hi) & (grad < 0)))
        if not free.any():
            converged = True
            break
        af = a[np.ix_(free, free)]
        gf = grad[free]
        diag = np.diag(af).copy()
        diag[diag <= 0] = 1e-12
        accepted = False
        while obj.n_eval - start_evals < max_evals:
            try:
                step_f = np.linalg.solve(af + lam * np.diag(diag), -gf)
            except np.linalg.LinAlgError:
                lam *= 10.0
                continue
            trial = theta.copy()
            trial[free] += step_f
            trial = np.clip(trial, lo, hi)
            step = trial - theta
            r_new, n0_new = obj.residuals(trial)
            cost_new = 0.5 * float(r_new @ r_new)
            small_step = np.max(np.abs(step)) < XTOL
            if cost_new < cost:
                rel = (cost - cost_new) / cost if cost > 0 else 0.0
                theta, r, n0, cost = trial, r_new, n0_new, cost_new
                trace.append(cost)
                lam = max(lam / 3.0, 1e-12)
                accepted = True
                if small_step and rel < FTOL:
                    converged = True
                break
            # no decrease even for a vanishing step: stationary to working precision
            if small_step and (cost_new - cost) <= FTOL * max(cost, 1e-300):
                converged = True
                break
            lam *= 4.0
            if lam > 1e16:
                converged = small_step
                break
        if converged or not accepted:
            break
        if cost < 1e-30:
            converged = True
            break
    return theta, n0, cost, converged, iterations, trace


# ---------------------------------------------------------------- initial guesses

def _guess_from_energies(e1, e2, n0):
    d = e1 + e2
    c = float(np.sqrt(abs(e1 * e2)))
    return np.array([c, d.real, min(d.imag, -1e-3)]), n0


def initial_guesses(line: SpectralLine, t: float, dips=None):
    """Parameter guesses (c, Re d, Im d) from the located dips.

    A dip at detuning delta marks an eigenvalue with Re E = -delta; its half
    width (less the 1/t transit broadening) estimates |Im E|. Both the
    two-dip and the single-dip hypotheses are produced.
    """
    if dips is None:
        dips = detect_dips(line)
    span = float(np.max(np.abs(line.deltas)))
    guesses = []

    def energy(dip):
        width = max(dip.half_width - 1.0 / t, 0.2 * dip.half_width, 1e-3)
        return complex(-dip.center, -width)

    if len(dips) >= 2:
        e1, e2 = energy(dips[0]), energy(dips[1])
        guesses.append(_guess_from_energies(e1, e2, None)[0])
    for dip in dips:
        e1 = energy(dip)
        # merged pair near band coalescence
        guesses.append(np.array([abs(e1.imag), 2 * e1.real, 2 * e1.imag]))
        # second band outside the scan or only weakly visible
        for other in (-span, 0.0, span):
            if abs(other - e1.real) > 0.1 * span:
                guesses.append(_guess_from_energies(e1, complex(other, e1.imag), None)[0])
    # coarse generic starts
    for c in (0.1 * span, 0.5 * span):
        for dre in (-0.5 * span, 0.5 * span):
            guesses.append(np.array([c, dre, -0.3 * span]))
    return guesses


def _bounds(line):
    span = float(np.max(np.abs(line.deltas)))
    lo = np.array([0.0, -4.0 * span, -4.0 * span])
    hi = np.array([2.0 * span, 4.0 * span, 0.0])
    return lo, hi


def fit_line(line: SpectralLine, t: float, omega: float, init: FitResult | None = None,
             n_starts: int = N_STARTS, weighted: bool = False, seed: int = 0,
             max_evals: int = MAX_EVALS) -> FitResult:
    """Least-squares fit of the effective three-level model to one line.

    Candidate starts (dip-based guesses, their random jitters and ``init``)
    are ranked by cost and the best ``n_starts`` are refined; the lowest
    final residual wins. Jitter is drawn from a generator seeded by
    ``seed`` so the result is deterministic.
    """
    if weighted:
        weights = 1.0 / np.maximum(line.na_std, _NOISE_FLOOR)
    else:
        weights = np.ones(len(line))
    obj = _Objective(line, t, omega, weights)
    lo, hi = _bounds(line)
    rng = np.random.default_rng(seed)

    base = initial_guesses(line, t)
    if init is not None:
        base.insert(0, np.array([init.c, init.d_re, init.d_im]))
    pool = []
    for g in base:
        pool.append(np.clip(g, lo, hi))
        for _ in range(2):
            jitter = g * (1 + 0.15 * rng.standard_normal(3)) + 0.02 * rng.standard_normal(3)
            pool.append(np.clip(jitter, lo, hi))
    scored = []
    for g in pool:
        r, _ = obj.residuals(g)
        scored.append((float(r @ r), len(scored), g))
    scored.sort(key=lambda s: (s[0], s[1]))

    best = None
    total_iters = 0
    for _, _, g in scored[:max(n_starts, 1)]:
        theta, n0, cost, ok, iters, trace = _levenberg_marquardt(obj, g, lo, hi, max_evals)
        total_iters += iters
        cand = (not ok, cost, theta, n0, ok, iters, trace)
        if best is None or cand[:2] < best[:2]:
            best = cand
    _, cost, theta, n0, ok, iters, trace = best
    rms = float(np.sqrt(2.0 * cost / len(line)))
    if weighted:
        raw = n0 * na_curve(theta[0], complex(theta[1], theta[2]), omega, t, line.deltas) - line.na_mean
        rms = float(np.sqrt(np.mean(raw**2)))
    return FitResult(c=float(theta[0]), d_re=float(theta[1]), d_im=float(theta[2]),
                     n0=float(n0), residual=rms, converged=bool(ok), iterations=iters,
                     n_eval=obj.n_eval, trace=trace)


# ---------------------------------------------------------------- energies

def _match(pair, ref):
    a, b = pair
    if abs(a - ref[0]) + abs(b - ref[1]) <= abs(b - ref[0]) + abs(a - ref[1]):
        return a, b
    return b, a


def energies_from_fit(fr: FitResult, uncertainty=None) -> tuple[EnergyEstimate, EnergyEstimate]:
    """Point estimates E_+- from the fitted (c, d).

    ``uncertainty`` may be the output of :func:`fit_uncertainty`; its error
    bars are attached to the nearest eigenvalue.
    """
    if not fr.converged:
        raise InvalidInputError("cannot derive energies from a non-converged fit")
    ep, em = closed_form_energies(fr.two_band())
    if uncertainty is None:
        return EnergyEstimate(ep), EnergyEstimate(em)
    ref = (uncertainty[0].e, uncertainty[1].e)
    if abs(ep - ref[0]) + abs(em - ref[1]) <= abs(ep - ref[1]) + abs(em - ref[0]):
        u1, u2 = uncertainty
    else:
        u2, u1 = uncertainty
    return (EnergyEstimate(ep, u1.err_re, u1.err_im),
            EnergyEstimate(em, u2.err_re, u2.err_im))


def pooled_energy_spread(pairs, min_count: int = 5) -> list[EnergyEstimate]:
    """Mean and standard deviation of eigenvalue pairs from independent fits.

    Pairs are aligned to the pooled means by nearest-neighbour matching,
    iterated until the assignment is stable.
    """
    pairs = [tuple(p) for p in pairs]
    if len(pairs) < min_count:
        raise UncertaintyUnavailableError(
            f"only {len(pairs)} converged fits, need at least {min_count}"
        )
    ref = pairs[0]
    for _ in range(10):
        aligned = np.array([_match(p, ref) for p in pairs])
        new_ref = tuple(aligned.mean(axis=0))
        if np.allclose(new_ref, ref, rtol=0, atol=1e-15):
            break
        ref = new_ref
    mean = aligned.mean(axis=0)
    std_re = aligned.real.std(axis=0, ddof=1)
    std_im = aligned.imag.std(axis=0, ddof=1)
    return [EnergyEstimate(complex(mean[i]), float(std_re[i]), float(std_im[i])) for i in range(2)]


def fit_uncertainty(lines, t: float, omega: float, **fit_kwargs) -> list[EnergyEstimate]:
    """Fit every resampled line and return the per-band spread of the energies."""
    pairs = []
    for line in lines:
        fr = fit_line(line, t, omega, **fit_kwargs)
        if fr.converged:
            pairs.append(closed_form_energies(fr.two_band()))
    return pooled_energy_spread(pairs)
