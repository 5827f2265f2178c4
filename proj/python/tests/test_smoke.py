import math

import numpy as np
import pytest

import snailsim as ss


def test_kerr_free_point():
    p = ss.device_params()
    root = ss.find_kerr_free_flux(p)
    assert 0.38 <= root <= 0.41
    c = ss.hamiltonian_coefficients(root, p)
    assert abs(ss.effective_static(c)["k1"]) < 2 * math.pi * 1e3
    assert ss.resonator_frequency(root, p) / (2 * math.pi) == pytest.approx(4.19e9, rel=1e-2)


def test_coefficient_vectors():
    c = ss.hamiltonian_coefficients(0.39, ss.device_params())
    assert len(c.g_dc) == 7
    assert c.g_dc[1] == 0.0 and c.g_dc[2] == 0.0


def test_oracle_levels():
    c = ss.hamiltonian_coefficients(0.36, ss.device_params())
    o = ss.numeric_kerr_oracle(c, 30)
    assert len(o["levels"]) >= 3
    assert o["k1"] == pytest.approx(ss.effective_static(c)["k1"], rel=0.1)


def test_wigner_normalization():
    re, im, w = ss.state_wigner("squeezed", dim=40, zeta=-0.5)
    assert w.shape == (len(im), len(re))
    step = re[1] - re[0]
    assert np.sum(w) * step * step == pytest.approx(1.0, abs=0.03)


def test_bad_family():
    with pytest.raises(ValueError):
        ss.state_wigner("cat")


def test_coeffs_run(tmp_path):
    cfg = tmp_path / "c.yaml"
    cfg.write_text(
        "circuit:\n  beta: 0.097\n  ej_ghz: 245\n  n_junctions: 3\n"
        "  omega_inf_ghz: 8.99\n  impedance_ohm: 57.94\n"
        "protocol:\n  coeffs:\n    start_phi0: 0.3\n    stop_phi0: 0.45\n    points: 16\n"
    )
    files = ss.run("coeffs", str(cfg), str(tmp_path / "out"))
    assert files[-1].endswith("manifest.yaml")
    assert (tmp_path / "out" / "coeffs.csv").exists()


def test_config_error(tmp_path):
    cfg = tmp_path / "bad.yaml"
    cfg.write_text("circuit:\n  beta: -1\n")
    with pytest.raises(ValueError):
        ss.run("coeffs", str(cfg), str(tmp_path / "out"))
