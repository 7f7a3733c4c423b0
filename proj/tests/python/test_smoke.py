# Copyright The eulerci Authors
# SPDX-License-Identifier: Apache-2.0

import json
import math

import numpy as np
import pytest

import eulerci


def _random_vector(n, seed):
    rng = np.random.default_rng(seed)
    x = np.arange(n) * 2 * math.pi / n
    X, Y = np.meshgrid(x, x, indexing="ij")
    comps = []
    for _ in range(2):
        f = np.zeros((n, n))
        for _ in range(5):
            k1, k2 = rng.integers(-4, 5, size=2)
            a, b = rng.normal(size=2)
            f += a * np.cos(k1 * X + k2 * Y) + b * np.sin(k1 * X + k2 * Y)
        comps.append(f)
    return np.stack(comps)


def test_div_inverse_and_leray():
    v = _random_vector(32, 1)
    R = eulerci.div_inverse(v)
    assert R.shape == (3, 32, 32)
    back = eulerci.divergence(R)
    mean = v.mean(axis=(1, 2), keepdims=True)
    assert np.abs(back - (v - mean)).max() < 1e-10
    # Trace of the (11, 12, 22) storage.
    assert np.abs(R[0] + R[2]).max() < 1e-11
    p = eulerci.leray_p(v)
    q = eulerci.leray_q(v)
    assert np.abs(p + q - v).max() < 1e-11
    assert np.abs(eulerci.divergence(p)).max() < 1e-11


def test_bad_shapes_raise():
    with pytest.raises(ValueError):
        eulerci.div_inverse(np.zeros((3, 8, 8)))
    with pytest.raises(ValueError):
        eulerci.div_inverse(np.zeros((2, 8, 6)))


def test_lattice_sphere_and_plan():
    assert sorted(map(tuple, eulerci.lattice_sphere(2, 5))) == sorted(
        [(1, 2), (2, 1), (-1, 2), (2, -1), (1, -2), (-2, 1), (-1, -2), (-2, -1)]
    )
    sys = eulerci.plan_system(2)
    assert sys["nu"] == 325
    assert len(sys["families"]) == 4


def test_fit_scaling():
    lam = [32.0, 64.0, 128.0, 256.0]
    fit = eulerci.fit_scaling(lam, [2.0 * l ** -0.3 for l in lam])
    assert abs(fit["slope"] + 0.3) < 1e-12
    assert eulerci.fit_scaling([1.0, 2.0], [4.0, 4.0])["slope"] == 0.0


def test_run_command(tmp_path):
    out = tmp_path / "run"
    code, log = eulerci.run_command(
        "run", {"grid": 80, "time_samples": 3, "n_steps": 1, "out": str(out)}
    )
    assert code == 0, log
    report = json.loads((out / "report.json").read_text())
    assert "config_hash" in report and "system_hash" in report
    assert (out / "state_1" / "state.json").exists()
    assert (out / "norms.csv").read_text().startswith("step,lambda,mu,sup_R")

    code, log = eulerci.run_command("plan", {"grid": 80, "spread_target": 0.01,
                                             "search_bound": 50, "out": str(out)})
    assert code == 2
    code, _ = eulerci.run_command("nonsense")
    assert code == 2
