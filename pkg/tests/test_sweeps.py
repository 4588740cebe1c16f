import warnings

import numpy as np
import pytest

from cqinet.core import DeviceParams, cqi_response, matched_coupling
from cqinet.protocol import ghz_chain, identical_links
from cqinet.sweeps import (
    KAPPA_B_GRID,
    N_GRID,
    N_TH_GRID,
    ProtocolSettings,
    SweepSpec,
    golden_section_max,
    iter_scaling,
    link_result,
    node_response,
    optimize_detuning,
    run_sweep,
    scaling_sweep,
    sweep_kappa_b,
    sweep_nth,
)

P = DeviceParams()


def test_grids():
    assert len(KAPPA_B_GRID) == 31 and KAPPA_B_GRID[0] == pytest.approx(0.01)
    assert KAPPA_B_GRID[-1] == pytest.approx(1.0)
    assert len(N_TH_GRID) == 21 and N_GRID == (2, 4, 6, 8, 10)


@pytest.mark.parametrize(
    "kwargs",
    [dict(variable="x", grid=(1,)), dict(variable="n_th", grid=()),
     dict(variable="n_th", grid=(0.1, 0.3, 0.2)), dict(variable="n_th", grid=(1,), scheme="abc")],
)
def test_spec_validation(kwargs):
    with pytest.raises(ValueError):
        SweepSpec(**kwargs)


def test_single_point_equals_direct():
    row = run_sweep(SweepSpec("kappa_b_o", (0.1,)))[0]
    direct = link_result(P, 0.0, "cqi")
    assert row.f_cqi == direct.fidelity and row.p_cqi == direct.success_prob


def test_lossless_matched_limit():
    p = DeviceParams(kappa_a_o=0, kappa_b_o=1e-6)
    p = p.with_(g_conv=matched_coupling(p))
    assert link_result(p, 0.0, "cqi").fidelity > 0.999


def test_kappa_b_sweep_cqi_monotone():
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        rows = sweep_kappa_b(SweepSpec("kappa_b_o", KAPPA_B_GRID))
    f = [r.f_cqi for r in rows]
    assert all(b <= a + 1e-12 for a, b in zip(f, f[1:]))
    assert all(r.error is None for r in rows)


def test_kappa_b_sweep_warns_on_rising_fidelity():
    spec = SweepSpec("kappa_b_o", (0.01, 0.5), params=P.with_(cqi_b_external_is_loss=False))
    with pytest.warns(RuntimeWarning):
        sweep_kappa_b(spec)


def test_zero_noise_shortcut():
    # kappa_b_o = 0 never touches the master equation, even when hot
    node = node_response(P.with_(kappa_b_o=0, n_th=0.5), 0.0, "cqi")
    assert node.nu == 0
    assert node.f_g == cqi_response(P.with_(kappa_b_o=0), 0.0, True)


def test_nth_zero_row_matches_closed_form():
    row = sweep_nth(SweepSpec("n_th", (0.0,)))[0]
    expected = (1 - row.f_cas) / (1 - row.f_cqi)
    assert row.infidelity_ratio == expected
    assert row.f_cqi == pytest.approx(0.956165, abs=5e-6)


def test_golden_section():
    x, fx = golden_section_max(lambda x: -(x - 0.3) ** 2, -1, 2, xtol=1e-8)
    assert x == pytest.approx(0.3, abs=1e-6) and fx <= 0


def test_optimizer_noiseless_resonance():
    d, f = optimize_detuning(P)
    grid = np.linspace(-30, 30, 601)
    best = max(link_result(P, x, "cqi").fidelity for x in grid)
    assert abs(d) < 1e-3
    assert f >= best - 1e-9


def test_optimizer_never_below_starts():
    p = P.with_(g_conv=4.0)
    d, f = optimize_detuning(p)
    starts = [link_result(p, s, "cqi").fidelity for s in (-4.0, 0.0, 4.0)]
    assert f >= max(starts) - 1e-9
    assert d >= 0


def test_optimizer_hot_improves_or_ties():
    hot = P.with_(n_th=0.5)
    d, f = optimize_detuning(hot, xtol=1e-2)
    assert f >= link_result(hot, 0.0, "cqi").fidelity - 1e-12


def test_scaling_base_case_and_composition():
    rows = scaling_sweep((2, 4, 6), (0.0,), P)
    r2 = link_result(P, 0.0, "cqi")
    c2 = link_result(P, 0.0, "cas")
    assert rows[0].zeta == pytest.approx(r2.figure_of_merit / c2.figure_of_merit, rel=1e-12)
    prod = list(iter_scaling((2, 4, 6), (0.0,), P, method="product"))
    for row in prod:
        assert row.zeta == pytest.approx(prod[0].zeta ** (row.value - 1), rel=1e-12)


def test_scaling_exact_uses_tracker():
    row = scaling_sweep((4,), (0.0,), P)[0]
    node = node_response(P, 0.0, "cqi")
    assert row.f_cqi == ghz_chain(identical_links(node, 4), 4).ghz_fidelity


def test_rows_preserve_order_in_parallel():
    spec = SweepSpec("delta", (-2.0, -1.0, 0.0, 1.0, 2.0))
    serial = run_sweep(spec)
    parallel = run_sweep(SweepSpec("delta", spec.grid, workers=2))
    assert [r.as_dict() for r in serial] == [r.as_dict() for r in parallel]


def test_solver_error_flagged_in_row():
    spec = SweepSpec("n_th", (0.5,), protocol=ProtocolSettings(window=1e6))
    row = run_sweep(spec)[0]
    assert row.error is not None and "ModelValidityError" in row.error
    assert row.f_cqi is None


def test_sweep_pure():
    spec = SweepSpec("n_th", (0.2,))
    assert run_sweep(spec)[0].as_dict() == run_sweep(spec)[0].as_dict()
