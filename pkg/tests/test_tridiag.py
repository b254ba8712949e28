import numpy as np
import pytest

from dbnoise.tridiag import HAVE_NUMBA, CNStepper

BACKENDS = ["numba", "scipy"] if HAVE_NUMBA else ["scipy"]


def dense_cn_step(psi, v, beta, gamma):
    """Reference step via an explicitly assembled dense system."""
    n = len(psi)
    dim = 2.0 * beta + gamma * v
    a = np.zeros((n - 2, n - 2), dtype=complex)
    b = np.zeros((n - 2, n - 2), dtype=complex)
    for i in range(n - 2):
        a[i, i] = 1.0 + 1j * dim[i + 1]
        b[i, i] = 1.0 - 1j * dim[i + 1]
        if i > 0:
            a[i, i - 1] = -1j * beta
            b[i, i - 1] = 1j * beta
        if i < n - 3:
            a[i, i + 1] = -1j * beta
            b[i, i + 1] = 1j * beta
    rhs = b @ psi[1:-1]
    rhs[0] += 1j * beta * psi[0]
    rhs[-1] += 1j * beta * psi[-1]
    out = np.zeros_like(psi)
    out[1:-1] = np.linalg.solve(a, rhs)
    return out


def random_state(n, seed):
    rng = np.random.default_rng(seed)
    psi = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    v = rng.uniform(-0.3, 0.5, size=n)
    return psi, v


@pytest.mark.parametrize("backend", BACKENDS)
@pytest.mark.parametrize("n", [5, 6, 61, 200])
def test_step_matches_dense_solve(backend, n):
    psi, v = random_state(n, seed=n)
    beta, gamma = 17.3, 0.076
    stepper = CNStepper(v, np.empty(0, dtype=np.intp), beta, gamma, backend=backend)
    out = np.empty_like(psi)
    stepper.step(psi, out)
    ref = dense_cn_step(psi, v, beta, gamma)
    assert np.allclose(out, ref, rtol=0.0, atol=1e-12)
    assert out[0] == 0.0 and out[-1] == 0.0


@pytest.mark.parametrize("backend", BACKENDS)
def test_cached_refresh_matches_fresh_stepper(backend):
    # changing the well floor must update exactly the coefficients a
    # freshly built stepper would have
    n = 301
    psi, v = random_state(n, seed=7)
    v[:] = 0.0
    well = np.arange(140, 166)
    v[100:140] = 0.4
    v[166:206] = 0.4
    beta, gamma = 17.3, 0.076
    cached = CNStepper(v.copy(), well, beta, gamma, backend=backend)
    out_cached = np.empty_like(psi)
    out_fresh = np.empty_like(psi)
    for floor in (0.1, -0.05, 0.2, 0.2, -0.19, 0.0):
        cached.set_well_floor(floor)
        cached.step(psi, out_cached)
        v2 = v.copy()
        v2[well] = floor
        fresh = CNStepper(v2, well, beta, gamma, backend=backend)
        fresh.step(psi, out_fresh)
        assert np.allclose(out_cached, out_fresh, rtol=0.0, atol=1e-13)
        ref = dense_cn_step(psi, v2, beta, gamma)
        assert np.allclose(out_cached, ref, rtol=0.0, atol=1e-12)


@pytest.mark.skipif(not HAVE_NUMBA, reason="needs both backends")
def test_backends_agree():
    n = 1001
    psi, v = random_state(n, seed=3)
    out_a = np.empty_like(psi)
    out_b = np.empty_like(psi)
    CNStepper(v, np.empty(0, dtype=np.intp), 17.3, 0.076, backend="numba").step(
        psi, out_a
    )
    CNStepper(v, np.empty(0, dtype=np.intp), 17.3, 0.076, backend="scipy").step(
        psi, out_b
    )
    assert np.allclose(out_a, out_b, rtol=0.0, atol=1e-13)


def test_unitarity_many_steps():
    n = 2001
    rng = np.random.default_rng(11)
    x = np.linspace(-1, 1, n)
    psi = np.exp(-((x * 20) ** 2) + 40j * x).astype(complex)
    psi /= np.sqrt(np.sum(np.abs(psi) ** 2))
    v = rng.uniform(0.0, 0.4, size=n)
    stepper = CNStepper(v, np.empty(0, dtype=np.intp), 5.0, 0.05)
    out = np.empty_like(psi)
    norm0 = np.sum(np.abs(psi) ** 2)
    for _ in range(500):
        stepper.step(psi, out)
        psi, out = out, psi
    assert abs(np.sum(np.abs(psi) ** 2) - norm0) < 1e-10


def test_rejects_bad_input():
    with pytest.raises(ValueError):
        CNStepper(np.zeros(4), np.empty(0, dtype=np.intp), 1.0, 1.0)
    with pytest.raises(ValueError):
        CNStepper(np.zeros(50), np.array([3, 5]), 1.0, 1.0)  # not contiguous
    with pytest.raises(ValueError):
        CNStepper(np.zeros(50), np.empty(0, dtype=np.intp), 1.0, 1.0, backend="gpu")
