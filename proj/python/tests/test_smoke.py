import numpy as np
import pytest

try:
    import mmlp as m
except ImportError:
    import _mmlp as m


def spd(d, seed):
    rng = np.random.default_rng(seed)
    a = rng.standard_normal((d, d))
    s = a @ a.T + 0.1 * np.eye(d)
    return s / np.trace(s)


def test_losses_vanish_at_target():
    y = spd(4, 0)
    assert m.qre_loss(y, y) == pytest.approx(0.0, abs=1e-12)
    assert m.stein_loss(y, y) == pytest.approx(0.0, abs=1e-12)
    assert m.quad_loss(y, y) == pytest.approx(0.0, abs=1e-12)


def test_losses_positive_off_target():
    y, z = spd(4, 1), spd(4, 2)
    assert m.qre_loss(z, y) > 0
    assert m.stein_loss(z, y) > 0
    assert m.quad_loss(z, y) > 0


def test_kernel_activation_trace_one_spd():
    rng = np.random.default_rng(3)
    z = rng.standard_normal((5, 5))
    for form in ("full", "diagonal"):
        h = m.kernel_activation(z, form)
        assert np.trace(h) == pytest.approx(1.0, abs=1e-12)
        assert np.allclose(h, h.T)
        assert np.linalg.eigvalsh(h).min() >= -1e-12
    hd = m.kernel_activation(z, "diagonal")
    assert np.allclose(hd, np.diag(np.diag(hd)))


def test_dataset_shapes_and_determinism():
    x, y = m.gen_spd_dataset(6, 8, 4, seed=7, draws_per_class=200)
    x2, y2 = m.gen_spd_dataset(6, 8, 4, seed=7, draws_per_class=200)
    assert x.shape == (6, 8)
    assert len(y) == 6
    assert np.array_equal(x, x2)
    for a, b in zip(y, y2):
        assert np.array_equal(a, b)
        assert np.trace(a) == pytest.approx(1.0, abs=1e-10)


def test_regressor_improves_on_training_data():
    x, y = m.gen_spd_dataset(4, 6, 3, seed=11, draws_per_class=200)
    reg = m.SpdRegressor(3, [8], 6, seed=0)
    before = reg.score(x, y, "qre")
    reg.fit(x, y, loss="qre", iterations=200, lr=1e-2)
    after = reg.score(x, y, "qre")
    assert after < before
    p = reg.predict(x[0])
    assert np.trace(p) == pytest.approx(1.0, abs=1e-10)


def test_gradcheck_clean():
    rows = m.gradcheck(seeds=2)
    assert rows
    assert all(r["pass"] for r in rows)
    assert all(r["max_rel"] <= r["tol"] for r in rows)
