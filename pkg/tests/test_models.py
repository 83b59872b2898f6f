import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from nhspec.errors import InvalidInputError
from nhspec.models import (IDX3, LkParams, MrmParams, ProbeConfig, SixLevelConfig, TwoBandParams,
                           closed_form_energies, effective_decay_rate, full_hamiltonian,
                           full_hamiltonian_grid, rice_mele_matrix, six_level_system,
                           two_band_matrix)

NONTRIVIAL = MrmParams(0.315, 0.098, 0.122, 0.035, 0.092)
HOPF = LkParams(0.13, 0.05, 0.08, 0.07, 0.15)

finite = st.floats(-2, 2, allow_nan=False)


def numeric_pair(p):
    return np.linalg.eigvals(two_band_matrix(p))


def same_pair(a, b, tol):
    a, b = np.asarray(a), np.asarray(b)
    return min(np.abs(a - b).max(), np.abs(a - b[::-1]).max()) < tol


def test_effective_decay_rate_value():
    assert effective_decay_rate(4.76, 123.0) == pytest.approx(0.0921, abs=5e-4)


@given(st.floats(0, 2), finite, st.floats(-2, 0))
def test_closed_form_matches_numeric(c, dre, dim):
    p = TwoBandParams(c, complex(dre, dim))
    assert same_pair(closed_form_energies(p), numeric_pair(p), 1e-10)


@given(st.floats(0, 2), finite, st.floats(-2, 0))
def test_trace_and_determinant(c, dre, dim):
    p = TwoBandParams(c, complex(dre, dim))
    ep, em = closed_form_energies(p)
    assert ep + em == pytest.approx(p.d, abs=1e-12)
    assert ep * em == pytest.approx(-c * c, abs=1e-12)


def test_c_zero_gives_zero_and_d():
    ep, em = closed_form_energies(TwoBandParams(0.0, -0.3 - 0.2j))
    assert same_pair((ep, em), (0.0, -0.3 - 0.2j), 1e-15)


@given(st.floats(0, 2 * math.pi))
def test_rice_mele_gauge(k):
    # complex hopping J and the real coupling |J| share the spectrum
    p = NONTRIVIAL.at_k(k)
    assert same_pair(np.linalg.eigvals(rice_mele_matrix(NONTRIVIAL, k)), closed_form_energies(p), 1e-12)


def test_mrm_components():
    k = 2 * math.pi / 5
    p = NONTRIVIAL.at_k(k)
    jx = 0.315 + 0.098 * math.cos(k)
    jy = 0.098 * math.sin(k)
    assert p.c == pytest.approx(math.hypot(jx, jy))
    assert p.d == pytest.approx(-2 * complex(0.122 * math.sin(k) + 0.035, 0.092))


def test_lk_components():
    k = 0.7
    p = HOPF.at_k(k)
    want = 2 * complex(0.05 * math.cos(k) + 0.08 * math.cos(2 * k), 0.07 * math.sin(2 * k) - 0.075)
    assert p.c == 0.13
    assert p.d == pytest.approx(want)


@given(st.floats(0.5, 1.5), st.floats(0, 2 * math.pi))
def test_loss_scaling_never_creates_gain(f, k):
    assert HOPF.with_loss_scale(f).at_k(k).d.imag <= 1e-15
    assert NONTRIVIAL.with_loss_scale(f).at_k(k).d.imag <= 0


def test_validation_errors():
    with pytest.raises(InvalidInputError):
        TwoBandParams(-0.1, 0)
    with pytest.raises(InvalidInputError):
        TwoBandParams(0.1, complex(float("nan"), 0))
    with pytest.raises(InvalidInputError):
        ProbeConfig(omega=0.01, n0=1.5)
    with pytest.raises(InvalidInputError):
        MrmParams(0.3, 0.1, 0.1, 0.0, -0.1)
    with pytest.raises(InvalidInputError):
        SixLevelConfig(0.3, 0, 0, 0.02, 0, 4.76, gamma_e=123.0, branching=(40.0, 40.0, 40.0))


def test_full_hamiltonian_layout():
    p = TwoBandParams(0.3, -0.1 - 0.2j)
    h = full_hamiltonian(p, ProbeConfig(omega=0.02, delta=0.05))
    a, z, one = IDX3["a"], IDX3["0"], IDX3["1"]
    assert h[z, one] == h[one, z] == 0.3
    assert h[one, one] == -0.1 - 0.2j
    assert h[z, a] == h[a, z] == 0.01
    assert h[a, a] == -0.05
    assert h[one, a] == 0
    grid = full_hamiltonian_grid(0.3, -0.1 - 0.2j, 0.02, [0.05, 0.1])
    assert np.array_equal(grid[0], h)


def test_six_level_structure():
    cfg = SixLevelConfig(0.3, 0.1, 0.05, 0.02, 0.0, 4.76, dephasing_rate=0.005)
    h, ls = six_level_system(cfg)
    assert h.shape == (6, 6)
    assert np.allclose(h, h.conj().T)
    assert len(ls) == 4
    k = sum(l.conj().T @ l for l in ls)
    assert k[4, 4] == pytest.approx(123.0)
    assert cfg.branching == (41.0, 41.0, 41.0)


def test_from_two_band_roundtrip():
    p = TwoBandParams(0.35, -0.2 - 0.184j)
    cfg = SixLevelConfig.from_two_band(p, ProbeConfig(omega=0.019))
    back = cfg.effective_two_band()
    assert back.c == pytest.approx(p.c)
    assert back.d == pytest.approx(p.d)
