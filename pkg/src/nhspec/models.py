"""Hamiltonians: modified Rice-Mele, Hopf-link, the generic two-band form,
the probed three-level Hamiltonian and the six-level ion model.

All energies and rates are angular frequencies in rad/us; times are in us.

Basis orders are fixed:
    three-level: (|0>, |1>, |a>)
    six-level:   (|0>, |1>, |2>, |3>, |e>, |a>)
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .errors import InvalidInputError

# Yb+ P1/2 total decay rate, rad/us
GAMMA_E_YB = 123.0

THREE_LEVEL = ("0", "1", "a")
SIX_LEVEL = ("0", "1", "2", "3", "e", "a")
IDX3 = {name: i for i, name in enumerate(THREE_LEVEL)}
IDX6 = {name: i for i, name in enumerate(SIX_LEVEL)}


def _check_finite(**values):
    for name, v in values.items():
        if not math.isfinite(v):
            raise InvalidInputError(f"{name} must be finite, got {v!r}")


@dataclass(frozen=True)
class TwoBandParams:
    """H = c (|0><1| + |1><0|) + d |1><1| at one momentum k."""

    c: float
    d: complex
    k: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "c", float(self.c))
        object.__setattr__(self, "d", complex(self.d))
        object.__setattr__(self, "k", float(self.k))
        _check_finite(c=self.c, d_re=self.d.real, d_im=self.d.imag, k=self.k)
        if self.c < 0:
            raise InvalidInputError("coupling c must be >= 0 (use the |1> -> -|1> gauge)")

    @property
    def loss(self) -> float:
        return -self.d.imag

    def at_k(self, k: float) -> "TwoBandParams":
        return replace(self, k=k)

    def with_loss_scale(self, factor: float) -> "TwoBandParams":
        return replace(self, d=complex(self.d.real, self.d.imag * factor))


@dataclass(frozen=True)
class MrmParams:
    """Modified Rice-Mele model: J0 (|0><1| + h.c.) - 2 (Jz + i gamma) |1><1|."""

    J1: float
    J2: float
    J3: float
    mz: float
    gamma: float

    def __post_init__(self):
        _check_finite(J1=self.J1, J2=self.J2, J3=self.J3, mz=self.mz, gamma=self.gamma)
        if self.gamma < 0:
            raise InvalidInputError("gamma must be >= 0")

    def components(self, k):
        """(Jx, Jy, Jz) at momentum k."""
        jx = self.J1 + self.J2 * math.cos(k)
        jy = self.J2 * math.sin(k)
        jz = self.J3 * math.sin(k) + self.mz
        return jx, jy, jz

    def at_k(self, k: float) -> TwoBandParams:
        return mrm_at_k(self, k)

    def with_loss_scale(self, factor: float) -> "MrmParams":
        return replace(self, gamma=self.gamma * factor)


@dataclass(frozen=True)
class LkParams:
    """Hopf-link model: mx sigma_x + g(k) |1><1|."""

    mx: float
    g1: float
    g2: float
    g3: float
    gamma0: float

    def __post_init__(self):
        _check_finite(mx=self.mx, g1=self.g1, g2=self.g2, g3=self.g3, gamma0=self.gamma0)
        if self.gamma0 < 0:
            raise InvalidInputError("gamma0 must be >= 0")

    def at_k(self, k: float) -> TwoBandParams:
        return lk_at_k(self, k)

    def with_loss_scale(self, factor: float) -> "LkParams":
        # the whole loss rate gamma0 - 2 g3 sin 2k comes from one laser
        return replace(self, g3=self.g3 * factor, gamma0=self.gamma0 * factor)


@dataclass(frozen=True)
class ProbeConfig:
    """Auxiliary-level probe: Rabi frequency, detuning, evolution time, N0."""

    omega: float
    delta: float = 0.0
    t: float = 200.0
    n0: float = 1.0

    def __post_init__(self):
        _check_finite(omega=self.omega, delta=self.delta, t=self.t, n0=self.n0)
        if self.omega < 0:
            raise InvalidInputError("omega must be >= 0")
        if self.t < 0:
            raise InvalidInputError("t must be >= 0")
        if not 0.0 <= self.n0 <= 1.0:
            raise InvalidInputError("n0 must lie in [0, 1]")

    def at_delta(self, delta: float) -> "ProbeConfig":
        return replace(self, delta=float(delta))


@dataclass(frozen=True)
class SixLevelConfig:
    """Full ion model before eliminating the excited state |e>.

    ``branching`` holds (Gamma_1, Gamma_2, Gamma_3) and defaults to an even
    split of ``gamma_e``. ``dephasing_rate`` is 1/t2 of the probe laser.
    """

    jx: float
    jy: float
    jz: float
    omega: float
    delta: float
    jl: float
    gamma_e: float = GAMMA_E_YB
    branching: tuple[float, float, float] | None = None
    dephasing_rate: float = 0.0

    def __post_init__(self):
        _check_finite(jx=self.jx, jy=self.jy, jz=self.jz, omega=self.omega,
                      delta=self.delta, jl=self.jl, gamma_e=self.gamma_e,
                      dephasing_rate=self.dephasing_rate)
        if self.branching is None:
            object.__setattr__(self, "branching", (self.gamma_e / 3.0,) * 3)
        else:
            object.__setattr__(self, "branching", tuple(float(g) for g in self.branching))
        if len(self.branching) != 3:
            raise InvalidInputError("branching needs exactly three rates")
        if self.gamma_e < 0 or self.dephasing_rate < 0 or min(self.branching) < 0:
            raise InvalidInputError("rates must be non-negative")
        if abs(sum(self.branching) - self.gamma_e) > 1e-9 * max(1.0, self.gamma_e):
            raise InvalidInputError(
                f"branching {self.branching} does not sum to gamma_e={self.gamma_e}"
            )

    @property
    def effective_gamma(self) -> float:
        """Loss rate on |1> after adiabatic elimination, J_L^2 / (2 Gamma_e)."""
        return effective_decay_rate(self.jl, self.gamma_e)

    def effective_two_band(self) -> TwoBandParams:
        c = abs(complex(self.jx, -self.jy))
        return TwoBandParams(c=c, d=-2.0 * complex(self.jz, self.effective_gamma))

    def effective_probe(self, t: float, n0: float = 1.0) -> ProbeConfig:
        return ProbeConfig(omega=self.omega, delta=self.delta, t=t, n0=n0)

    def at_delta(self, delta: float) -> "SixLevelConfig":
        return replace(self, delta=float(delta))

    @classmethod
    def from_two_band(cls, p: TwoBandParams, probe: ProbeConfig,
                      gamma_e: float = GAMMA_E_YB, dephasing_rate: float = 0.0,
                      branching=None) -> "SixLevelConfig":
        """Six-level model whose eliminated form reproduces ``p``.

        The loss -Im(d)/2 fixes the laser coupling through J_L = sqrt(2 Gamma_e gamma).
        """
        gamma = -p.d.imag / 2.0
        if gamma < 0:
            raise InvalidInputError("a gain term (Im d > 0) cannot come from spontaneous decay")
        return cls(jx=p.c, jy=0.0, jz=-p.d.real / 2.0, omega=probe.omega,
                   delta=probe.delta, jl=math.sqrt(2.0 * gamma_e * gamma),
                   gamma_e=gamma_e, branching=branching, dephasing_rate=dephasing_rate)


def effective_decay_rate(jl: float, gamma_e: float) -> float:
    if gamma_e <= 0:
        raise InvalidInputError("gamma_e must be positive")
    return jl * jl / (2.0 * gamma_e)


def mrm_at_k(p: MrmParams, k: float) -> TwoBandParams:
    jx, jy, jz = p.components(k)
    return TwoBandParams(c=math.hypot(jx, jy), d=-2.0 * complex(jz, p.gamma), k=k)


def lk_at_k(p: LkParams, k: float) -> TwoBandParams:
    g = 2.0 * complex(p.g1 * math.cos(k) + p.g2 * math.cos(2 * k),
                      p.g3 * math.sin(2 * k) - p.gamma0 / 2.0)
    return TwoBandParams(c=p.mx, d=g, k=k)


def two_band_matrix(p: TwoBandParams) -> np.ndarray:
    return np.array([[0.0, p.c], [p.c, p.d]], dtype=complex)


def rice_mele_matrix(p: MrmParams, k: float) -> np.ndarray:
    """Non-Hermitian Rice-Mele form with complex hopping J = Jx - i Jy."""
    jx, jy, jz = p.components(k)
    j = complex(jx, -jy)
    return np.array([[0.0, j], [j.conjugate(), -2.0 * complex(jz, p.gamma)]], dtype=complex)


def closed_form_energies(p: TwoBandParams) -> tuple[complex, complex]:
    """E_+- = d/2 +- sqrt(d^2/4 + c^2), principal square root."""
    half = p.d / 2.0
    s = np.sqrt(half * half + p.c * p.c)
    return complex(half + s), complex(half - s)


def full_hamiltonian(p: TwoBandParams, probe: ProbeConfig) -> np.ndarray:
    """Two-band model plus the weak probe coupling |0> <-> |a>."""
    h = np.zeros((3, 3), dtype=complex)
    h[0, 1] = h[1, 0] = p.c
    h[1, 1] = p.d
    h[0, 2] = h[2, 0] = probe.omega / 2.0
    h[2, 2] = -probe.delta
    return h


def full_hamiltonian_grid(c, d, omega, deltas) -> np.ndarray:
    """Stack of probed Hamiltonians, one per detuning."""
    deltas = np.asarray(deltas, dtype=float)
    h = np.zeros(deltas.shape + (3, 3), dtype=complex)
    h[..., 0, 1] = h[..., 1, 0] = c
    h[..., 1, 1] = d
    h[..., 0, 2] = h[..., 2, 0] = omega / 2.0
    h[..., 2, 2] = -deltas
    return h


def _ket_bra(i, j, n=6):
    m = np.zeros((n, n), dtype=complex)
    m[i, j] = 1.0
    return m


def six_level_system(cfg: SixLevelConfig):
    """Hamiltonian and jump operators of the ion before elimination.

    Jump operators follow the factor-2 convention of the master equation
    d rho/dt = -i(H_eff rho - rho H_eff^+) + sum 2 L rho L^+, with
    H_eff = H - i sum L^+ L. |2> and |3> are pure sinks.
    """
    i0, i1, ie, ia = IDX6["0"], IDX6["1"], IDX6["e"], IDX6["a"]
    h = np.zeros((6, 6), dtype=complex)
    j = complex(cfg.jx, -cfg.jy)
    h[i0, i1] = j
    h[i1, i0] = j.conjugate()
    h[i1, i1] = -2.0 * cfg.jz
    h[i0, ia] = h[ia, i0] = cfg.omega / 2.0
    h[ia, ia] = -cfg.delta
    h[i1, ie] = h[ie, i1] = cfg.jl

    lindblads = [math.sqrt(g) * _ket_bra(mu, ie) for mu, g in zip((1, 2, 3), cfg.branching)]
    if cfg.dephasing_rate > 0:
        lindblads.append(math.sqrt(cfg.dephasing_rate) * _ket_bra(ia, ia))
    return h, lindblads
