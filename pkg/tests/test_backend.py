import numpy as np
import pytest

from pidlab import _backend, _fallback

_core = pytest.importorskip("pidlab._core")


def test_compiled_core_selected():
    assert _backend.COMPILED
    assert _backend.rk4_affine is _core.rk4_affine


@pytest.mark.parametrize("record_every", [1, 7, 50])
def test_rk4_parity(rng, record_every):
    a = rng.standard_normal((6, 6)) - 3 * np.eye(6)
    c = rng.standard_normal((6, 3))
    x0 = rng.standard_normal((6, 3))
    fast, fail_fast = _core.rk4_affine(a, c, x0, 1e-2, 100, record_every, 1e12)
    slow, fail_slow = _fallback.rk4_affine(a, c, x0, 1e-2, 100, record_every, 1e12)
    assert fail_fast == fail_slow == -1
    assert fast.shape == slow.shape
    np.testing.assert_allclose(fast, slow, rtol=1e-12, atol=1e-13)


def test_rk4_blowup_reported_at_same_step(rng):
    a = 5 * np.eye(3)
    x0 = np.ones((3, 1))
    for impl in (_core, _fallback):
        _, fail = impl.rk4_affine(a, np.zeros((3, 1)), x0, 0.1, 1000, 1, 1e12)
        # RK4 growth per step for h*lambda = 0.5 is 1.6484375; it first exceeds 1e12 at step 56
        assert fail == 56


def test_perron_parity(rng):
    k = rng.uniform(0.1, 1.0, (7, 7))
    k /= k.sum(axis=1, keepdims=True)
    p1, it1, ch1 = _core.perron_power(np.ascontiguousarray(k.T), 1e-13, 10_000)
    p2, it2, ch2 = _fallback.perron_power(np.ascontiguousarray(k.T), 1e-13, 10_000)
    np.testing.assert_allclose(p1, p2, atol=1e-15)
    assert it1 == it2
