import math

import numpy as np
import pytest

import mmlink


def test_bell_state_is_maximally_entangled():
    psi = mmlink.bell_state(0.0)
    rho = np.outer(psi, psi.conj())
    assert mmlink.concurrence(rho) == pytest.approx(1.0, abs=1e-12)
    assert mmlink.fidelity(rho, psi) == pytest.approx(1.0, abs=1e-12)


def test_werner_tomography_round_trip():
    rho = mmlink.werner(0.8)
    counts = mmlink.simulate_counts(rho, 20000, 7)
    assert counts.shape == (9, 4)
    assert counts.sum(axis=1).tolist() == [20000] * 9
    est, loglik, converged = mmlink.mle_reconstruct(counts)
    assert converged
    assert math.isfinite(loglik)
    assert mmlink.concurrence(est) == pytest.approx(0.7, abs=0.03)
    assert np.allclose(est, est.conj().T)


def test_local_rotation_recovers_phase():
    psi = mmlink.bell_state(1.1)
    fid, angles = mmlink.optimize_local_rotation(np.outer(psi, psi.conj()), mmlink.bell_state(0.0))
    assert fid == pytest.approx(1.0, abs=1e-6)
    assert len(angles) == 6


def test_rates():
    p = mmlink.success_probability([6.5e-4, 7.8e-4, 7.3e-4])
    assert mmlink.effective_rate(p, 757.0) == pytest.approx(2.85, abs=0.01)
    assert mmlink.enhancement_factor(p, 757.0, 7.8e-4, 633.0) == pytest.approx(2.31, abs=0.02)
    assert mmlink.detection_probability_with_error(13127, 41645)[0] == pytest.approx(13127 / 41645)
    single, double, triple = mmlink.multiplicity_distribution([1.0, 1.0, 1.0])
    assert (single, double, triple) == (0.0, 0.0, 1.0)


def test_link_simulation_is_deterministic():
    a = mmlink.run_link_simulation([0.3, 0.3, 0.3], 20000, 11)
    b = mmlink.run_link_simulation([0.3, 0.3, 0.3], 20000, 11)
    assert a == b
    assert a["attempts"] <= 20000


def test_noise_and_budget():
    assert mmlink.noisy_fidelity(6.5e-4) == pytest.approx(0.88, abs=0.01)
    value, sigma = mmlink.budget_chain([("a", "0.78(2)"), ("b", "0.96(1)"), ("c", "0.81(3)"), ("d", "0.87(2)")])
    assert value == pytest.approx(0.78 * 0.96 * 0.81 * 0.87, rel=1e-12)
    assert sigma == pytest.approx(0.027, abs=0.001)
    with pytest.raises(ValueError):
        mmlink.budget_chain([("bad", "1.5")])


def test_geometry():
    z = mmlink.equilibrium_positions(3, 0.869)
    assert z[1] - z[0] == pytest.approx(5.26, abs=0.02)
    assert mmlink.string_angle_from_projection(z[1] - z[0], 0.427) == pytest.approx(85.3, abs=0.1)
    x = mmlink.gaussian_coupling()
    assert x[1] == pytest.approx(1.0)
    assert x[0] == pytest.approx(x[2])


def test_wavepacket():
    o1, o2 = mmlink.split_drive(2 * math.pi * 31.47e6, 0.81)
    assert o1 / o2 == pytest.approx(0.81, rel=1e-12)
    omega = mmlink.calibrate_rabi(0.88)
    assert mmlink.stark_shift(omega) == pytest.approx(0.88, rel=1e-3)
    w = mmlink.integrate_wavepacket(pulse_us=5.0, step_us=2e-3)
    assert w["max_trace_error"] < 1e-9
    assert w["bookkeeping_total"] == pytest.approx(1.0, abs=1e-6)
    cumulative = np.asarray(w["cumulative"])
    assert np.all(np.diff(cumulative) >= -1e-15)
    assert 0.0 < cumulative[-1] <= 1.0
