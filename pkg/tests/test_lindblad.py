import math

import numpy as np
import pytest

from cqinet.core import DeviceParams, cqi_response, qubit_cavity_response
from cqinet.lindblad import (
    DriveSpec,
    FockConfig,
    build_liouvillian,
    extract_response,
    operators,
    scatter_response,
    solve_qubit_cavity_response,
    solve_response,
    steady_state,
    thermal_leak_flux,
    truncation_check,
)

P = DeviceParams()


def _vec(m):
    return m.reshape(-1, order="F")


def test_vacuum_is_stationary():
    p = DeviceParams(g_conv=0, mu=0)
    lv = build_liouvillian(p, DriveSpec(), True, FockConfig(3, 3))
    dim = lv.matrix.shape[0]
    n = int(math.isqrt(dim))
    vac = np.zeros((n, n), complex)
    vac[0, 0] = 1
    assert np.max(np.abs(lv.matrix @ _vec(vac))) < 1e-14


def test_trace_preserved():
    lv = build_liouvillian(P.with_(n_th=0.3), DriveSpec(0.1, 1.0), True, FockConfig(3, 3))
    n = int(math.isqrt(lv.matrix.shape[0]))
    trace_row = _vec(np.eye(n))
    assert np.max(np.abs(trace_row @ lv.matrix)) < 1e-12


def test_unique_steady_state_at_reference_dims():
    lv = build_liouvillian(P.with_(n_th=0.2), DriveSpec(1e-3), True, FockConfig(3, 4))
    ev = np.linalg.eigvals(lv.matrix.toarray())
    assert np.sum(np.abs(ev) < 1e-9) == 1


def test_fock_cap():
    with pytest.raises(ValueError):
        FockConfig(20, 20, cap=512)
    with pytest.raises(ValueError):
        FockConfig(1, 4)


def test_density_invariants_and_ground_state():
    rho = steady_state(build_liouvillian(P, DriveSpec(), True, FockConfig(3, 3)))
    rho.check()
    assert abs(rho.data[0, 0] - 1) < 1e-10  # qubit g, both modes empty


def test_detailed_balance_reference():
    p = DeviceParams(g_conv=0, mu=0, n_th=0.5)
    rho = steady_state(build_liouvillian(p, DriveSpec(), True, FockConfig(2, 30, cap=10**4)))
    rho.check()
    _, b, _ = operators(rho.dims)
    assert rho.expect(b.conj().T @ b).real == pytest.approx(0.0049505, abs=1e-6)


def test_zero_temperature_response_matches_closed_form():
    for coupled in (True, False):
        f = solve_response(P, 0.0, coupled, FockConfig(3, 3))
        assert abs(f - cqi_response(P, 0.0, coupled)) < 1e-3
    f = solve_response(P, 4.0, True, FockConfig(3, 3))
    assert abs(f - cqi_response(P, 4.0, True)) < 1e-3


def test_weak_drive_linearity():
    eps = 1e-3 * math.sqrt(P.kappa_a)
    f1 = solve_response(P, 0.0, True, FockConfig(3, 3), epsilon=eps, check=False)
    f2 = solve_response(P, 0.0, True, FockConfig(3, 3), epsilon=2 * eps, check=False)
    assert abs(f1 - f2) < 1e-4


def test_incoherent_flux_zero_temperature():
    drive = DriveSpec(1e-3)
    rho = steady_state(build_liouvillian(P, drive, True, FockConfig(3, 3)))
    _, phi = extract_response(rho, P, drive)
    assert phi < 1e-8


def test_bare_overcoupled_cavity():
    p = DeviceParams(kappa_a_o=0, g_conv=0, mu=0)
    assert abs(solve_response(p, 0.0, True, FockConfig(4, 2)) + 1) < 1e-6


def test_thermal_flux():
    assert thermal_leak_flux(P, 0.0, True) == 0
    assert thermal_leak_flux(P.with_(n_th=0.5, kappa_a_ex=0), 0.0, True) == 0
    hot = P.with_(n_th=0.5)
    drive = DriveSpec()
    rho = steady_state(build_liouvillian(hot, drive, True, FockConfig()))
    a, _, _ = operators(rho.dims)
    expected = hot.kappa_a_ex * rho.expect(a.conj().T @ a).real
    flux = thermal_leak_flux(hot, 0.0, True)
    assert flux > 0 and flux == pytest.approx(expected, rel=1e-12)


def test_thermal_flux_is_detuning_independent():
    # without a drive the probe detuning only shifts the rotating frame
    hot = P.with_(n_th=0.5)
    ref = thermal_leak_flux(hot, 0.0, True)
    for d in (-hot.g_conv, hot.g_conv, 3.0):
        assert thermal_leak_flux(hot, d, True) == pytest.approx(ref, rel=1e-9)


def test_cascade_flux_positive():
    assert thermal_leak_flux(P.with_(n_th=0.5), 0.0, True, scheme="cas") > 0


def test_truncation_check_examples():
    eps = 1e-3 * math.sqrt(P.kappa_a)
    assert truncation_check(P, DriveSpec(eps), FockConfig(3, 3)).passed
    assert not truncation_check(P.with_(n_th=5.0), DriveSpec(), FockConfig(2, 2)).passed
    assert truncation_check(P, DriveSpec(), FockConfig(2, 2)).passed


def test_qubit_cavity_master_equation():
    f = solve_qubit_cavity_response(P, 0.0, True, FockConfig(2, 3))
    assert abs(f - qubit_cavity_response(P, 0.0, True)) < 1e-3


def test_scatter_response_noiseless_uses_closed_form():
    r = scatter_response(P, 0.0, "cqi")
    assert r.f_coupled == cqi_response(P, 0.0, True)
    assert r.nu_coupled == r.nu_uncoupled == 0


def test_scatter_response_noisy_window_scaling():
    hot = P.with_(n_th=0.2)
    r1 = scatter_response(hot, 0.0, "cqi", window=1.0)
    r2 = scatter_response(hot, 0.0, "cqi", window=2.0)
    assert r1.nu_coupled > 0
    assert r2.nu_coupled == pytest.approx(2 * r1.nu_coupled)


def test_steady_state_deterministic():
    lv = build_liouvillian(P.with_(n_th=0.5), DriveSpec(1e-3), True, FockConfig(4, 6))
    assert np.array_equal(steady_state(lv).data, steady_state(lv).data)
