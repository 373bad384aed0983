import math

import numpy as np
import pytest

import qpamdp


def test_discounted_return():
    assert qpamdp.discounted_return([1.0, 1.0, 1.0], 0.5) == 1.75
    assert qpamdp.discounted_return([], 0.9) == 0.0


def test_action_probabilities():
    p = qpamdp.action_probabilities(np.array([1.0, 2.0]), 1.0)
    e = math.exp(1.0)
    assert p[1] == pytest.approx(e / (1 + e))
    assert qpamdp.action_probabilities(np.array([0.0, 0.0, 0.0]), 0.3).sum() == pytest.approx(1.0)


def test_fourier_coefficients():
    assert qpamdp.fourier_coefficients(2, 1, 2) == [[0, 0], [1, 0], [0, 1], [1, 1]]
    assert len(qpamdp.fourier_coefficients(14, 2, 2, {1, 3, 5, 7, 9, 11, 13})) == 1 + 2 * 7 + 21 * 4


def test_enac_two_episodes():
    w, b = qpamdp.enac_natural_gradient(np.array([[1.0], [-1.0]]), np.array([2.0, 0.0]))
    assert w[0] == 1.0 and b == 1.0


def test_enac_singular():
    with pytest.raises(qpamdp.SingularSystemError):
        qpamdp.enac_natural_gradient(np.ones((3, 1)), np.array([1.0, 2.0, 3.0]))


def test_toy_gradient_check():
    g = qpamdp.gradient_of_H_check([0.2, -0.1], [0.01, 0.01])
    assert g["differentiable"]
    assert g["rel_error"] < 1e-4
    cf = qpamdp.toy_closed_forms([0.5, -0.5], [0.0, 0.0])
    assert cf["best_action"] == 1 and cf["H"] == pytest.approx(2.0)


@pytest.mark.parametrize("name", ["toy", "goal", "platform"])
def test_env_step(name):
    env = qpamdp.make_env(name)
    rng = qpamdp.Rng(3)
    s = env.reset(rng)
    assert s.shape == (env.state_dim,)
    action, _, bounds = env.actions[0]
    params = np.array([(lo + hi) / 2 for lo, hi in bounds])
    nxt, reward, terminal = env.step(s, action, params, rng)
    assert nxt.shape == s.shape
    assert math.isfinite(reward)
    assert isinstance(terminal, bool)


def test_unknown_env():
    with pytest.raises(ValueError):
        qpamdp.make_env("pong")


def test_config_roundtrip():
    cfg = qpamdp.default_config("platform", "qpamdp-inf")
    again = qpamdp.parse_config(cfg.to_text())
    assert again.to_text() == cfg.to_text()
    assert again.method == "qpamdp-inf"


def test_config_errors():
    with pytest.raises(qpamdp.ConfigError, match="runs"):
        qpamdp.parse_config("env = toy\nruns = 0\n")


def test_toy_run_is_reproducible(tmp_path):
    cfg = qpamdp.default_config("toy")
    cfg.runs = 2
    a = qpamdp.run_experiment(cfg, parallel=1)
    b = qpamdp.run_experiment(cfg, parallel=2)
    assert [r.curve for r in a] == [r.curve for r in b]
    assert all(r.ok for r in a)
    assert a[0].final_success > 1.5

    points = qpamdp.aggregate(a)
    assert points[0][0] == 0
    paths = qpamdp.emit_outputs(cfg, a, tmp_path)
    assert (tmp_path / "curve.csv").exists()
    ckpt = next(p for p in paths if str(p).endswith(".json"))
    episodes = qpamdp.trace(ckpt, episodes=3)
    assert len(episodes) == 3
    assert len(episodes[0]["steps"]) == 1
