import numpy as np
import pytest
import scipy.linalg
from hypothesis import given, strategies as st

from nhspec.errors import InvalidInputError, NumericRangeError
from nhspec.linalg import eig2, evolve, expm, expm_batch, rk4_propagate


def random_matrix(rng, n, scale=1.0):
    return scale * (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n)))


@pytest.mark.parametrize("n", [2, 3, 6])
@pytest.mark.parametrize("scale", [1e-3, 0.3, 5.0, 60.0])
def test_expm_matches_scipy(rng, n, scale):
    for _ in range(5):
        a = random_matrix(rng, n, scale)
        ref = scipy.linalg.expm(-1j * a)
        got = expm(a)
        assert np.allclose(got, ref, rtol=1e-10, atol=1e-12 * np.abs(ref).max())


def test_expm_at_exceptional_point():
    # defective 2x2 block: exp(-i t [[a, 1], [0, a]]) = e^{-iat} [[1, -it], [0, 1]]
    a, t = 0.3 - 0.1j, 7.0
    h = np.array([[a, 1.0], [0.0, a]])
    want = np.exp(-1j * a * t) * np.array([[1.0, -1j * t], [0.0, 1.0]])
    assert np.allclose(expm(h, t), want, rtol=1e-12, atol=1e-13)


def test_expm_zero_and_zero_time(rng):
    assert np.array_equal(expm(np.zeros((3, 3))), np.eye(3))
    assert np.allclose(expm(random_matrix(rng, 3), 0.0), np.eye(3))


def test_expm_batch_equals_individual(rng):
    stack = np.stack([random_matrix(rng, 3, s) for s in (0.1, 1.0, 4.0)])
    batch = expm_batch(stack, 2.0)
    for a, u in zip(stack, batch):
        assert np.allclose(u, scipy.linalg.expm(-2j * a), rtol=1e-10, atol=1e-12)


def test_expm_overflow_raises():
    h = np.array([[1e305j, 0], [0, 0]])
    with pytest.raises(NumericRangeError):
        expm(h, 1e10)


def test_expm_rejects_bad_input():
    with pytest.raises(InvalidInputError):
        expm(np.array([[np.nan, 0], [0, 0]]))
    with pytest.raises(InvalidInputError):
        expm(np.ones((2, 2)), -1.0)


@given(st.lists(st.floats(-3, 3), min_size=4, max_size=4), st.floats(0, 50))
def test_hermitian_evolution_is_unitary(v, t):
    h = np.array([[v[0], v[2] + 1j * v[3]], [v[2] - 1j * v[3], v[1]]])
    u = expm(h, t)
    assert np.allclose(u.conj().T @ u, np.eye(2), atol=1e-10)


@given(st.floats(0.0, 2.0), st.floats(0.0, 5.0))
def test_lossy_evolution_contracts(loss, t):
    h = np.array([[0.2, 0.1], [0.1, -1j * loss]])
    psi = evolve(h, [1.0, 0.0], t)
    assert np.linalg.norm(psi) <= 1.0 + 1e-12


def test_evolve_dimension_mismatch():
    with pytest.raises(InvalidInputError):
        evolve(np.eye(3), [1.0, 0.0], 1.0)


def test_rk4_reference_agrees(rng):
    h = random_matrix(rng, 3, 0.2)
    psi0 = np.array([1.0, 0.0, 0.0], dtype=complex)
    a = rk4_propagate(h, psi0, 2.0, 1e-3)
    b = evolve(h, psi0, 2.0)
    assert np.allclose(a, b, atol=1e-11)


def test_eig2_against_numpy(rng):
    for _ in range(200):
        h = random_matrix(rng, 2, rng.uniform(1e-3, 10))
        got = np.array(eig2(h))
        ref = np.linalg.eigvals(h)
        # same multiset
        assert min(np.abs(got - ref).max(), np.abs(got - ref[::-1]).max()) < 1e-12 * max(1, np.abs(ref).max())


def test_eig2_cancellation():
    # roots 1e8 and 1e-8: the small one must keep its relative accuracy
    h = np.array([[1e8, 1.0], [0.0, 1e-8]], dtype=complex)
    big, small = eig2(h)
    assert big == pytest.approx(1e8)
    assert abs(small - 1e-8) < 1e-20


def test_eig2_order():
    a, b = eig2(np.diag([-1.0, 2.0]))
    assert (a, b) == (2.0, -1.0)
