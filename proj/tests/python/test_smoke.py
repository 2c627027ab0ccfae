import json
import math
import os
import subprocess

import numpy as np
import pytest

import oclopt


def small_config():
    cfg = oclopt.preset("main-comparison")
    cfg["stream"]["horizon"] = 200
    cfg["seeds"] = [0, 1]
    return cfg


def test_presets_round_trip():
    names = oclopt.preset_names()
    assert "main-comparison" in names and "theory-verify" in names
    cfg = oclopt.preset("malr-ablation")
    assert oclopt.validate(cfg) == cfg


def test_bad_config_raises():
    cfg = small_config()
    cfg["replay"]["bogus"] = 1
    with pytest.raises(oclopt.ConfigError):
        oclopt.validate(cfg)


def test_run_experiment_is_deterministic():
    cfg = small_config()
    a = oclopt.run_experiment(cfg)
    b = oclopt.run_experiment(cfg)
    assert list(a) == ["sgd-rwp", "ama-rwp", "ama-malr"]
    for arm in a:
        assert len(a[arm]) == 2
        for x, y in zip(a[arm], b[arm]):
            assert x["P_IR"] == y["P_IR"] and x["step_perf"] == y["step_perf"]
            assert 0.0 <= x["P_IR"] <= 1.0
            assert x["iterations"] == len(x["alpha"])


def test_next_batch_and_horizon():
    stream = oclopt.preset("main-comparison")["stream"]
    x, y = oclopt.next_batch(stream, 1)
    x2, y2 = oclopt.next_batch(stream, 1)
    assert x.shape == (stream["batch_size"], stream["d_in"])
    assert np.array_equal(x, x2) and y == y2
    with pytest.raises(oclopt.HorizonExceeded):
        oclopt.next_batch(stream, stream["horizon"] + 1)


def test_loss_and_grad_matches_finite_differences():
    rng = np.random.default_rng(0)
    d_in, k, hidden = 3, 4, 5
    dim = hidden * (d_in + 1) + k * (hidden + 1)
    theta = rng.normal(size=dim)
    x = rng.normal(size=(6, d_in))
    labels = list(rng.integers(0, k, size=6))
    loss, grad = oclopt.loss_and_grad("mlp", d_in, k, theta, x, labels, hidden=hidden)
    h = 1e-5
    fd = np.empty(dim)
    for i in range(dim):
        e = np.zeros(dim)
        e[i] = h
        fd[i] = (oclopt.loss_and_grad("mlp", d_in, k, theta + e, x, labels, hidden=hidden)[0]
                 - oclopt.loss_and_grad("mlp", d_in, k, theta - e, x, labels, hidden=hidden)[0]) / (2 * h)
    assert np.linalg.norm(grad - fd) / np.linalg.norm(grad) < 1e-6
    zero = np.zeros(d_in * 2 + 2)
    assert oclopt.loss_and_grad("linear-softmax", d_in, 2, zero, x, [0, 1, 0, 1, 0, 1])[0] == pytest.approx(math.log(2))


def test_ama_and_schedule():
    ama = oclopt.Ama(np.zeros(2), update_interval=1, validation_interval=1, weight_interval=2)
    assert ama.gamma1 == pytest.approx(0.99) and ama.gamma2 == pytest.approx(0.198)
    ama.step(np.ones(2), 1, lambda th: 1.0 if th[0] > 0.5 else 0.0)
    ev = ama.step(np.ones(2), 2, lambda th: 1.0 if th[0] > 0.5 else 0.0)
    assert ev["adapted"] and ama.gamma1 == pytest.approx(0.198)
    assert oclopt.ma_update(np.array([1.0]), 0.0, np.array([3.0]))[0] == 3.0
    with pytest.raises(oclopt.ConfigError):
        oclopt.ma_update(np.array([1.0]), 1.5, np.array([3.0]))

    s = oclopt.Schedule("malr", alpha0=0.1, patience=20)
    for k in range(10, 500, 10):
        s.malr_update(0.5, 0.01, k)
    assert s.alpha == 0.1
    assert oclopt.cyclic_lr(0.2, 50, 100) == pytest.approx(0.1)
    assert oclopt.sigma(0.45, 0.41) == pytest.approx(0.04)


def test_bound_terms_and_verification():
    t1, t2, t3 = oclopt.bound_terms(4.0, 1.0, [0.1] * 10, [0.0] * 10, 2.0, [1.0] * 10, 9)
    assert t3 == 0.0 and t2 == pytest.approx(4.0 * 0.1 / (2 - 0.4))
    with pytest.raises(oclopt.PreconditionError):
        oclopt.bound_terms(4.0, 1.0, [3.0] * 10, [0.0] * 10, 2.0, [1.0] * 10, 9)
    reports = oclopt.verify_bounds()
    assert len(reports) >= 6 and all(r["all_hold"] for r in reports)


@pytest.mark.skipif("OCLOPT_CLI" not in os.environ, reason="CLI path not provided")
def test_cli_exit_codes(tmp_path):
    cli = os.environ["OCLOPT_CLI"]
    cfg = small_config()
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps(cfg))
    out = tmp_path / "out"
    assert subprocess.run([cli, "run", str(path), "--out", str(out)], capture_output=True).returncode == 0
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["complete"] and set(manifest["arms"]) == {"sgd-rwp", "ama-rwp", "ama-malr"}
    report = subprocess.run([cli, "report", str(out)], capture_output=True, text=True)
    assert report.returncode == 0 and "ama-malr" in report.stdout

    cfg["replay"]["minibatch"] = 0
    path.write_text(json.dumps(cfg))
    assert subprocess.run([cli, "run", str(path)], capture_output=True).returncode == 2

    bad = tmp_path / "bound.json"
    vc = {"name": "too-large", "stream": {"kind": "drifting-quadratic", "d_in": 4},
          "schedule": {"kind": "constant", "alpha0": 5.0}}
    bad.write_text(json.dumps(vc))
    assert subprocess.run([cli, "verify-bounds", str(bad)], capture_output=True).returncode == 4
