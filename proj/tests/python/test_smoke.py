import json
import math
import os
import subprocess
from pathlib import Path

import numpy as np
import pytest

import eprauth

SCENARIOS = Path(__file__).resolve().parents[2] / "scenarios"


def test_closed_forms():
    assert eprauth.p1(0.0) == pytest.approx(1.0)
    assert eprauth.p2(math.pi / 4) == pytest.approx(1.0)
    assert eprauth.detection_bound(20) == 2.0**-20
    opt = eprauth.optimal_fixed_angle()
    assert opt["P"] == pytest.approx(0.9, abs=1e-15)
    assert opt["cos_values"][0] == pytest.approx(2 / math.sqrt(5), abs=1e-15)


def test_ensemble_dependence_of_ghz_detection():
    t = 1.1
    assert eprauth.ghz_detection_numeric(t, "real") == pytest.approx(0.5 * math.sin(t) ** 2, abs=1e-12)
    assert eprauth.ghz_detection_numeric(t) == pytest.approx(2 / 3 * math.sin(t) ** 2, abs=1e-12)


def test_impersonation_formula_matches_evolution():
    rng = np.random.default_rng(3)
    for _ in range(50):
        v = rng.normal(size=4)
        a, b = complex(v[0], v[1]), complex(v[2], v[3])
        n = math.sqrt(abs(a) ** 2 + abs(b) ** 2)
        a, b = a / n, b / n
        ens = [(0.4, 1.0, 0.0), (0.6, 0.6, 0.8j)]
        assert eprauth.eq7_fidelity(a, b, ens) == pytest.approx(
            eprauth.impersonation_pass_probability(a, b, ens), abs=1e-12
        )


def test_distances_on_numpy_matrices():
    zero = np.diag([1.0, 0.0]).astype(complex)
    one = np.diag([0.0, 1.0]).astype(complex)
    assert eprauth.trace_distance(zero, one) == pytest.approx(2.0)
    assert eprauth.fidelity(zero, np.eye(2) / 2) == pytest.approx(0.5)
    with pytest.raises(ValueError):
        eprauth.fidelity(np.eye(2), np.eye(2))


def test_key_theft():
    r = eprauth.quarter_pi_key_steal(math.pi / 4, 0.6, 0.8)
    assert r["precondition_met"]
    assert r["eve_fidelity"] == pytest.approx(1.0, abs=1e-12)
    best = eprauth.maximize_key_steal(0.4, grid=60)
    assert best["fidelity"] == pytest.approx(eprauth.p2(0.4), abs=1e-9)


def test_session_and_estimate():
    honest = json.loads((SCENARIOS / "honest.json").read_text())
    rounds = eprauth.run_session(honest, seed=2)
    assert rounds[0]["verdict"] == "accepted"
    est = eprauth.estimate(honest, seed=2, trials=50)
    assert est[0]["mean"] == pytest.approx(1.0)
    with pytest.raises(eprauth.ConfigError):
        eprauth.estimate({"K": 1, "K_prime": 3})


def test_in_process_cli():
    code, out, _ = eprauth.run_cli(["session", "--scenario", str(SCENARIOS / "honest.json")])
    assert code == 0
    assert json.loads(out)["schema_version"] == 1


@pytest.mark.skipif("EPRAUTH_CLI" not in os.environ, reason="CLI binary not given")
def test_cli_binary():
    cli = os.environ["EPRAUTH_CLI"]
    ok = subprocess.run([cli, "session", "--scenario", str(SCENARIOS / "honest.json")],
                        capture_output=True, text=True)
    assert ok.returncode == 0
    bad = subprocess.run([cli, "session", "--scenario", "/nonexistent.json"],
                         capture_output=True, text=True)
    assert bad.returncode == 2
    imp = subprocess.run([cli, "session", "--scenario", str(SCENARIOS / "impersonation_k8.json")],
                         capture_output=True, text=True)
    assert imp.returncode in (0, 1)
