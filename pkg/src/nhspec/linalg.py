"""Small dense complex kernels: 2x2 eigenvalues, matrix exponential, evolution.

The exponential is computed by scaling and squaring a fixed-order Taylor
series. Diagonalisation is avoided on purpose: the two-band models pass close
to exceptional points where eigenvectors coalesce.
"""

from __future__ import annotations

import math

import numpy as np

from .errors import InvalidInputError, NumericRangeError

TAYLOR_ORDER = 16
_PS_BLOCK = 4  # Paterson-Stockmeyer block size; TAYLOR_ORDER is a multiple of it
# ||A / 2^s||_1 is brought below this before the series is summed.
SCALE_TARGET = 0.5
_MAX_SQUARINGS = 1000


def _as_finite_matrix(h, name="matrix"):
    a = np.asarray(h, dtype=complex)
    if a.ndim < 2 or a.shape[-1] != a.shape[-2]:
        raise InvalidInputError(f"{name} must be square, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise InvalidInputError(f"{name} has non-finite entries")
    return a


def _sort_key(z):
    return (-z.real, -z.imag)


def eig2(h) -> tuple[complex, complex]:
    """Both eigenvalues of a 2x2 complex matrix.

    Roots of l^2 - tr(h) l + det(h) = 0. The larger-magnitude root is taken
    from the quadratic formula and the other from det / root, which avoids
    cancellation. Returned in descending real part, ties by descending
    imaginary part.
    """
    a = _as_finite_matrix(h)
    if a.shape != (2, 2):
        raise InvalidInputError(f"eig2 needs a 2x2 matrix, got {a.shape}")
    tr = a[0, 0] + a[1, 1]
    det = a[0, 0] * a[1, 1] - a[0, 1] * a[1, 0]
    disc = np.sqrt(tr * tr - 4.0 * det)
    # choose the sign that adds magnitudes
    if (tr.conjugate() * disc).real < 0:
        disc = -disc
    q = 0.5 * (tr + disc)
    if q == 0:
        roots = [0j, 0j]
    else:
        roots = [complex(q), complex(det / q)]
    roots.sort(key=_sort_key)
    return roots[0], roots[1]


def _taylor_ps(x, eye):
    """sum_{j<=TAYLOR_ORDER} x^j / j! by Paterson-Stockmeyer (6 products for order 16)."""
    powers = [eye, x]
    for _ in range(2, _PS_BLOCK + 1):
        powers.append(powers[-1] @ x)
    y = powers[_PS_BLOCK]
    coef = [1.0 / math.factorial(j) for j in range(TAYLOR_ORDER + 1)]
    nblocks = TAYLOR_ORDER // _PS_BLOCK

    def block(i):
        return sum(coef[i * _PS_BLOCK + m] * powers[m] for m in range(_PS_BLOCK))

    result = coef[TAYLOR_ORDER] * y + block(nblocks - 1)
    for i in range(nblocks - 2, -1, -1):
        result = result @ y + block(i)
    return result


def expm_batch(a, t=1.0):
    """exp(-i a t) for a stack of square matrices with shape (..., n, n).

    A single scaling exponent is used for the whole stack so every member is
    treated identically.
    """
    a = _as_finite_matrix(a)
    t = float(t)
    if t < 0:
        raise InvalidInputError("time must be non-negative")
    with np.errstate(over="ignore", invalid="ignore"):
        x = (-1j * t) * a
        norm = float(np.max(np.abs(x).sum(axis=-2))) if x.size else 0.0
    n = a.shape[-1]
    eye = np.broadcast_to(np.eye(n, dtype=complex), a.shape)
    if not np.isfinite(norm):
        raise NumericRangeError("matrix norm overflows")
    squarings = 0
    if norm > SCALE_TARGET:
        squarings = int(np.ceil(np.log2(norm / SCALE_TARGET)))
    if squarings > _MAX_SQUARINGS:
        raise NumericRangeError(f"scaling would need {squarings} squarings")
    x = x / 2.0**squarings

    result = _taylor_ps(x, eye)
    for _ in range(squarings):
        result = result @ result
    if not np.all(np.isfinite(result)):
        raise NumericRangeError("matrix exponential overflowed during squaring")
    return result


def expm(a, t=1.0):
    """exp(-i a t) for one square matrix."""
    a = _as_finite_matrix(a)
    if a.ndim != 2:
        raise InvalidInputError("expm takes a single matrix; use expm_batch for stacks")
    return expm_batch(a, t)


def evolve(h, psi0, t):
    """State after time t under d psi/dt = -i h psi."""
    h = _as_finite_matrix(h)
    psi0 = np.asarray(psi0, dtype=complex)
    if psi0.ndim != 1 or psi0.shape[0] != h.shape[-1]:
        raise InvalidInputError(
            f"state of shape {psi0.shape} does not match matrix {h.shape}"
        )
    if not np.all(np.isfinite(psi0)):
        raise InvalidInputError("state has non-finite entries")
    return expm(h, t) @ psi0


def rk4_propagate(h, psi0, t, dt):
    """Fixed-step classical RK4 for d psi/dt = -i h psi (reference integrator)."""
    h = _as_finite_matrix(h)
    psi = np.array(psi0, dtype=complex)
    steps = int(round(t / dt))
    if steps * dt - t > 1e-9 * max(t, 1.0) or steps * dt - t < -1e-9 * max(t, 1.0):
        raise InvalidInputError("t must be an integer multiple of dt")
    g = -1j * h
    for _ in range(steps):
        k1 = g @ psi
        k2 = g @ (psi + 0.5 * dt * k1)
        k3 = g @ (psi + 0.5 * dt * k2)
        k4 = g @ (psi + dt * k3)
        psi = psi + (dt / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
    return psi
