"""Synthetic absorption spectra N_a(delta) with the experiment's noise channels."""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from .dynamics import DEFAULT_DT, na_curve, na_master_curve
from .errors import ConsistencyError, InvalidInputError
from .models import GAMMA_E_YB, LkParams, MrmParams, ProbeConfig, SixLevelConfig, TwoBandParams

DEFAULT_DELTAS = np.linspace(-0.6, 0.6, 61)
DEFAULT_KGRID = np.linspace(0.0, 2.0 * np.pi, 21)
PROB_TOL = 1e-9


@dataclass
class SpectralLine:
    deltas: np.ndarray
    na_mean: np.ndarray
    na_std: np.ndarray
    meta: dict = field(default_factory=dict)
    # per-repetition means, shape (reps, len(deltas)); None for noiseless lines
    na_reps: np.ndarray | None = None

    def __post_init__(self):
        self.deltas = np.asarray(self.deltas, dtype=float)
        self.na_mean = np.asarray(self.na_mean, dtype=float)
        self.na_std = np.asarray(self.na_std, dtype=float)
        if not (self.deltas.shape == self.na_mean.shape == self.na_std.shape):
            raise InvalidInputError("deltas, na_mean and na_std must have equal length")

    def __len__(self):
        return len(self.deltas)

    def repetition(self, r: int) -> "SpectralLine":
        """Line made of a single repetition (std set to zero)."""
        if self.na_reps is None:
            raise InvalidInputError("line carries no per-repetition data")
        meta = {**self.meta, "reps": 1, "repetition": r}
        return SpectralLine(self.deltas, self.na_reps[r], np.zeros_like(self.deltas), meta)


@dataclass(frozen=True)
class NoiseModel:
    shots: int = 1000
    reps: int = 20
    gamma_fluct: float = 0.2
    dephasing_t2: float | None = None
    seed: int = 0
    gamma_e: float = GAMMA_E_YB  # only used with dephasing (master-equation path)

    def __post_init__(self):
        if self.shots < 1 or self.reps < 1:
            raise InvalidInputError("shots and reps must be >= 1")
        if not 0.0 <= self.gamma_fluct < 1.0:
            raise InvalidInputError("gamma_fluct must lie in [0, 1)")
        if self.dephasing_t2 is not None and self.dephasing_t2 <= 0:
            raise InvalidInputError("dephasing_t2 must be positive")


def _check_grid(deltas):
    deltas = np.asarray(deltas, dtype=float)
    if deltas.ndim != 1 or deltas.size == 0:
        raise InvalidInputError("detuning grid must be a non-empty 1-d array")
    if np.any(np.diff(deltas) <= 0):
        raise InvalidInputError("detuning grid must be strictly increasing")
    return deltas


def _meta(p, probe, noise=None, model=None):
    meta = {"t": probe.t, "omega": probe.omega, "n0": probe.n0, "k": p.k,
            "c": p.c, "d_re": p.d.real, "d_im": p.d.imag,
            "model": describe_model(model if model is not None else p)}
    if noise is None:
        meta.update(shots=None, reps=0, seed=None)
    else:
        meta.update(shots=noise.shots, reps=noise.reps, seed=noise.seed,
                    gamma_fluct=noise.gamma_fluct, gamma_distribution="uniform",
                    dephasing_t2=noise.dephasing_t2)
    return meta


def describe_model(model) -> dict:
    if isinstance(model, MrmParams):
        return {"kind": "mrm", **{f: getattr(model, f) for f in ("J1", "J2", "J3", "mz", "gamma")}}
    if isinstance(model, LkParams):
        return {"kind": "lk", **{f: getattr(model, f) for f in ("mx", "g1", "g2", "g3", "gamma0")}}
    if isinstance(model, TwoBandParams):
        return {"kind": "generic", "c": model.c, "d_re": model.d.real, "d_im": model.d.imag}
    raise InvalidInputError(f"unknown model type {type(model).__name__}")


def line_noiseless(p: TwoBandParams, probe: ProbeConfig, deltas=DEFAULT_DELTAS) -> SpectralLine:
    deltas = _check_grid(deltas)
    na = na_curve(p.c, p.d, probe.omega, probe.t, deltas, probe.n0)
    return SpectralLine(deltas, na, np.zeros_like(na), _meta(p, probe))


def _probabilities(p, probe, deltas, noise, dt):
    if noise.dephasing_t2 is None:
        q = na_curve(p.c, p.d, probe.omega, probe.t, deltas, probe.n0)
    else:
        cfg = SixLevelConfig.from_two_band(p, probe, gamma_e=noise.gamma_e,
                                           dephasing_rate=1.0 / noise.dephasing_t2)
        q = na_master_curve(cfg, probe, deltas, dt)
    if np.any(q < -PROB_TOL) or np.any(q > 1.0 + PROB_TOL):
        raise ConsistencyError(f"probability out of range: [{q.min():.3g}, {q.max():.3g}]")
    return np.clip(q, 0.0, 1.0)


def line_noisy(p: TwoBandParams, probe: ProbeConfig, deltas, noise: NoiseModel,
               rescale=None, seed_seq=None, dt=DEFAULT_DT) -> SpectralLine:
    """Averaged spectrum over ``noise.reps`` repetitions of ``noise.shots`` shots.

    Each repetition draws its own loss rate uniformly from
    [gamma (1 - f), gamma (1 + f)] and keeps it for every detuning.
    ``rescale(factor)`` builds the two-band parameters for a scaled loss; by
    default Im(d) is scaled. ``seed_seq`` overrides ``noise.seed``.
    """
    deltas = _check_grid(deltas)
    if rescale is None:
        rescale = p.with_loss_scale
    ss = seed_seq if seed_seq is not None else np.random.SeedSequence(noise.seed)
    rng = np.random.default_rng(ss)
    reps = np.empty((noise.reps, deltas.size))
    factors = np.empty(noise.reps)
    for r in range(noise.reps):
        f = rng.uniform(1.0 - noise.gamma_fluct, 1.0 + noise.gamma_fluct)
        q = _probabilities(rescale(f), probe, deltas, noise, dt)
        reps[r] = rng.binomial(noise.shots, q) / noise.shots
        factors[r] = f
    std = reps.std(axis=0, ddof=1) if noise.reps > 1 else np.zeros(deltas.size)
    meta = _meta(p, probe, noise)
    meta["loss_factors"] = factors.tolist()
    return SpectralLine(deltas, reps.mean(axis=0), std, meta, na_reps=reps)


def _sweep_point(args):
    model, i, k, probe, deltas, noise = args
    p = model.at_k(k)
    if noise is None:
        line = line_noiseless(p, probe, deltas)
    else:
        ss = np.random.SeedSequence([noise.seed, i])
        line = line_noisy(p, probe, deltas, noise,
                          rescale=lambda f: model.with_loss_scale(f).at_k(k), seed_seq=ss)
    line.meta.update(k=float(k), k_index=i, model=describe_model(model))
    return line


def sweep_k(model, k_grid=DEFAULT_KGRID, probe: ProbeConfig | None = None,
            deltas=DEFAULT_DELTAS, noise: NoiseModel | None = None, workers=None):
    """One spectral line per momentum.

    The noise stream of point i is seeded from (seed, i), so results do not
    depend on the order or process in which points are evaluated.
    """
    k_grid = np.asarray(k_grid, dtype=float)
    if np.any(k_grid < 0) or np.any(k_grid > 2 * np.pi + 1e-12):
        raise InvalidInputError("k grid must lie within [0, 2 pi]")
    if probe is None:
        probe = ProbeConfig(omega=0.019)
    jobs = [(model, i, float(k), probe, deltas, noise) for i, k in enumerate(k_grid)]
    if workers and workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(_sweep_point, jobs))
    return [_sweep_point(j) for j in jobs]


def with_noise_seed(noise: NoiseModel, seed: int) -> NoiseModel:
    return replace(noise, seed=seed)
