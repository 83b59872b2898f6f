"""Auxiliary-level populations from the effective Hamiltonian and from the
six-level master equation.

The population read out after the probe pulse is

    N_a = N0 |<a| exp(-i H_f t) |a>|^2

i.e. the modulus squared of the survival amplitude, which is the real
quantity in [0, N0] the experiment measures.
"""

from __future__ import annotations

from dataclasses import replace

import numpy as np

from .errors import IntegratorFailureError, InvalidInputError, InvalidStepError
from .linalg import expm, expm_batch
from .models import (IDX3, IDX6, ProbeConfig, SixLevelConfig, TwoBandParams,
                     full_hamiltonian, full_hamiltonian_grid, six_level_system)

DEFAULT_DT = 1e-3
# dt * max(largest rate, ||H||) must stay below this. RK4 is stable for
# |h lambda| < 2.78; the fastest mode decays at 2 Gamma_e in this convention.
STABILITY_BOUND = 0.2
TRACE_FAIL = 1e-4


def na_effective(p: TwoBandParams, probe: ProbeConfig) -> float:
    u = expm(full_hamiltonian(p, probe), probe.t)
    ia = IDX3["a"]
    return float(probe.n0 * abs(u[ia, ia]) ** 2)


def na_curve(c, d, omega, t, deltas, n0=1.0) -> np.ndarray:
    """Vectorised N_a over a detuning grid for the generic two-band model."""
    u = expm_batch(full_hamiltonian_grid(c, d, omega, deltas), t)
    ia = IDX3["a"]
    return n0 * np.abs(u[..., ia, ia]) ** 2


def liouvillian(h, lindblads) -> np.ndarray:
    """Superoperator acting on row-major vec(rho).

    d rho/dt = -i (H_eff rho - rho H_eff^+) + sum_mu 2 L_mu rho L_mu^+,
    H_eff = H - i sum_mu L_mu^+ L_mu.
    """
    h = np.asarray(h, dtype=complex)
    n = h.shape[0]
    eye = np.eye(n)
    k = np.zeros_like(h)
    for lop in lindblads:
        k = k + lop.conj().T @ lop
    heff = h - 1j * k
    # row-major: vec(A rho B) = kron(A, B^T) vec(rho)
    sup = -1j * (np.kron(heff, eye) - np.kron(eye, heff.conj()))
    for lop in lindblads:
        sup = sup + 2.0 * np.kron(lop, lop.conj())
    return sup


def master_rhs(rho, h, lindblads):
    k = sum((lop.conj().T @ lop for lop in lindblads), np.zeros_like(h))
    heff = h - 1j * k
    out = -1j * (heff @ rho - rho @ heff.conj().T)
    for lop in lindblads:
        out = out + 2.0 * lop @ rho @ lop.conj().T
    return out


def rk4_step_matrix(sup, dt) -> np.ndarray:
    """One classical RK4 step of the linear ODE d v/dt = sup v, as a matrix."""
    x = dt * sup
    eye = np.eye(sup.shape[0], dtype=complex)
    out = eye.copy()
    for j in (4, 3, 2, 1):
        out = eye + (x @ out) / j
    return out


def _check_step(h, lindblads, dt):
    if dt <= 0:
        raise InvalidStepError("dt must be positive")
    k = sum((lop.conj().T @ lop for lop in lindblads), np.zeros_like(h))
    rate = np.linalg.norm(k, 2)
    scale = max(rate, np.linalg.norm(h, 2))
    if dt * scale > STABILITY_BOUND:
        raise InvalidStepError(
            f"dt={dt:g} too large: dt*max(rate, ||H||)={dt * scale:.3g} > {STABILITY_BOUND}"
        )


def _n_steps(t, dt):
    n = int(round(t / dt))
    if abs(n * dt - t) > 1e-9 * max(1.0, t):
        raise InvalidInputError(f"t={t} is not a multiple of dt={dt}")
    return n


def integrate_master(rho0, h, lindblads, t, dt=DEFAULT_DT, times=None, method="power"):
    """Classical fixed-step RK4 integration of the master equation.

    For this time-independent linear equation one RK4 step is the matrix
    P = T4(dt L) (fourth-order Taylor polynomial of the Liouvillian), so N
    steps equal P^N. ``method="power"`` evaluates P^N by repeated squaring;
    ``method="loop"`` applies the four RK4 stages step by step. Both produce
    the same iterate up to rounding.

    Returns rho(t), or a list of rho at each entry of ``times`` if given.
    """
    rho0 = np.asarray(rho0, dtype=complex)
    h = np.asarray(h, dtype=complex)
    n = h.shape[0]
    if rho0.shape != (n, n):
        raise InvalidInputError("rho0 does not match H")
    if t < 0:
        raise InvalidInputError("t must be non-negative")
    _check_step(h, lindblads, dt)
    checkpoints = [t] if times is None else list(times)
    steps = [_n_steps(tc, dt) for tc in checkpoints]
    if any(b < a for a, b in zip(steps, steps[1:])):
        raise InvalidInputError("times must be non-decreasing")

    tr0 = np.trace(rho0).real
    out = []
    if method == "power":
        step = rk4_step_matrix(liouvillian(h, lindblads), dt)
        v = rho0.reshape(-1)
        done = 0
        for s in steps:
            v = np.linalg.matrix_power(step, s - done) @ v
            done = s
            out.append(v.reshape(n, n))
    elif method == "loop":
        rho = rho0.copy()
        done = 0
        for s in steps:
            for _ in range(s - done):
                k1 = master_rhs(rho, h, lindblads)
                k2 = master_rhs(rho + 0.5 * dt * k1, h, lindblads)
                k3 = master_rhs(rho + 0.5 * dt * k2, h, lindblads)
                k4 = master_rhs(rho + dt * k3, h, lindblads)
                rho = rho + (dt / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
            done = s
            out.append(rho.copy())
    else:
        raise InvalidInputError(f"unknown method {method!r}")

    for rho in out:
        drift = abs(np.trace(rho).real - tr0)
        if drift > TRACE_FAIL or not np.all(np.isfinite(rho)):
            raise IntegratorFailureError(f"trace drifted by {drift:.3g}")
    return out[0] if times is None else out


def na_master(cfg: SixLevelConfig, probe: ProbeConfig, dt=DEFAULT_DT) -> float:
    """N0 * rho_aa(t) of the six-level model started in |a><a|.

    The detuning and Rabi frequency of ``probe`` override those in ``cfg``.
    """
    cfg = replace(cfg, omega=probe.omega, delta=probe.delta)
    h, lindblads = six_level_system(cfg)
    ia = IDX6["a"]
    rho0 = np.zeros((6, 6), dtype=complex)
    rho0[ia, ia] = 1.0
    rho = integrate_master(rho0, h, lindblads, probe.t, dt)
    return float(probe.n0 * rho[ia, ia].real)


def na_master_curve(cfg: SixLevelConfig, probe: ProbeConfig, deltas, dt=DEFAULT_DT):
    return np.array([na_master(cfg, probe.at_delta(x), dt) for x in deltas])


def validate_elimination(cfg: SixLevelConfig, probes, dt=DEFAULT_DT) -> float:
    """Max |N_a(master) - N_a(effective)| over a list of probe settings.

    The effective model uses gamma = J_L^2 / (2 Gamma_e).
    """
    eff = cfg.effective_two_band()
    worst = 0.0
    for probe in probes:
        a = na_master(cfg, probe, dt)
        b = na_effective(eff, probe)
        worst = max(worst, abs(a - b))
    return worst
