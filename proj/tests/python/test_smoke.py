"""Python smoke tests for the anovaemu extension module."""

import math

import numpy as np
import pytest

import anovaemu as ae


def test_marginals():
    u = ae.uniform(-1.0, 3.0)
    assert u.lower == -1.0
    assert u.upper == 3.0
    assert u.cdf(1.0) == pytest.approx(0.5)
    assert u.quantile(0.5) == pytest.approx(1.0)
    g = ae.mixture(ae.uniform(0.0, 1.0), 0.9)
    assert g.kind == "mixture"
    assert g.cdf(0.5) == pytest.approx(0.45)


def test_sobol_points():
    pts = ae.sobol_points(5, 128)
    assert pts.shape == (128, 5)
    assert pts.min() > 0.0 and pts.max() < 1.0
    # Skipping reproduces the tail of the stream.
    tail = ae.sobol_points(5, 28, skip=100)
    np.testing.assert_array_equal(pts[100:], tail)


def test_esp():
    e = ae.esp(np.array([2.0, -1.0, 3.0]), 3)
    assert e[0] == 1.0
    assert e[1] == pytest.approx(4.0)
    assert e[3] == pytest.approx(-6.0)


def test_recommend_truncation():
    s = np.array([0.3139, 0.4424, 0.0])
    st = np.array([0.567, 0.442, 0.243])
    assert ae.recommend_truncation(s, st) == 2
    assert ae.recommend_truncation(np.full(10, 0.10), np.full(10, 0.10)) == 1


def test_screen_ishigami():
    rep = ae.screen("ishigami", n=4096, seed=1)
    assert rep["recommended_d0"] == 2
    assert rep["s"][0] == pytest.approx(0.3139, abs=0.05)
    assert rep["s"][1] == pytest.approx(0.4424, abs=0.05)
    assert abs(rep["s"][2]) < 0.05
    assert len(rep["retained"]) >= 3


def test_df_emulator_roundtrip(tmp_path):
    marg = [ae.uniform(0.0, 1.0) for _ in range(3)]

    def model(x):
        return math.exp(x[0]) + math.exp(x[1]) + math.exp(x[2])

    em = ae.fit_df_emulator(model, marg, d0=1, n=300, seed=3)
    x = ae.sample_design(marg, 50, seed=9, generator="pseudo")
    pred = em.predict(x)
    truth = np.array([model(row) for row in x])
    r2 = 1.0 - np.sum((truth - pred) ** 2) / np.sum((truth - truth.mean()) ** 2)
    assert r2 > 0.95

    path = tmp_path / "emulator.json"
    em.save(str(path))
    back = ae.load_df_emulator(str(path))
    np.testing.assert_array_equal(pred, back.predict(x))


def test_db_emulator():
    em = ae.fit_db_emulator("ishigami", n=400, seed=5)
    marg = ae.problem_marginals("ishigami")
    x = ae.sample_design(marg, 100, seed=11, generator="pseudo")
    pred = em.predict(x)
    truth = np.array([ae.problem_value("ishigami", row) for row in x])
    r2 = 1.0 - np.sum((truth - pred) ** 2) / np.sum((truth - truth.mean()) ** 2)
    assert r2 > 0.9


def test_pde_gradient():
    rng = np.random.default_rng(0)
    z = rng.uniform(-1.0, 1.0, size=10)
    g = ae.pde_qoi_gradient(z)
    eps = 1e-5
    for j in range(10):
        zp, zm = z.copy(), z.copy()
        zp[j] += eps
        zm[j] -= eps
        fd = (ae.pde_qoi(zp) - ae.pde_qoi(zm)) / (2 * eps)
        assert fd == pytest.approx(g[j], rel=1e-5)
