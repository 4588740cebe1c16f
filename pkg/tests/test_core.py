import math

import numpy as np
import pytest

from cqinet.acceptance import oracle_converter, oracle_cqi, oracle_qubit_cavity
from cqinet.core import (
    DeviceParams,
    SingularInputError,
    cas_response,
    conversion_efficiency,
    converter_reflection,
    converter_transmission,
    cooperativities,
    cqi_response,
    cqi_response_resonant,
    efficiency_bound,
    link_figures,
    matched_coupling,
    noise_transfer_cqi,
    qubit_cavity_response,
    supermode_splitting,
)

P = DeviceParams()


def test_defaults_match_reference_rates():
    assert (P.kappa_a_o, P.kappa_a_ex, P.kappa_b_o, P.kappa_b_ex) == (1, 14, 0.1, 10)
    assert (P.g_conv, P.mu, P.gamma) == (10, 10, 1)
    assert P.kappa_a == 15 and P.kappa_b_cqi == pytest.approx(10.1)


@pytest.mark.parametrize(
    "bad",
    [dict(gamma=0), dict(kappa_a_o=-1), dict(n_th=float("nan")), dict(mu=float("inf")),
     dict(kappa_a_o=0, kappa_a_ex=0)],
)
def test_invalid_params_rejected(bad):
    with pytest.raises(ValueError):
        DeviceParams(**bad)


def test_string_param_rejected():
    with pytest.raises(TypeError):
        DeviceParams(mu="10")


def test_cooperativities_reference():
    c = cooperativities(P)
    assert c.c_ab == pytest.approx(2.6403, abs=5e-5)
    assert c.c_bq == pytest.approx(39.604, abs=5e-4)
    assert cooperativities(P.with_(g_conv=0)).c_ab == 0
    assert cooperativities(P.with_(mu=0)).c_bq == 0


def test_cqi_reference_values():
    assert cqi_response(P, 0, True) == pytest.approx(-0.752698, abs=5e-6)
    assert cqi_response(P, 0, False) == pytest.approx(0.487217, abs=5e-6)
    # frozen from the 3x3 coupled-mode oracle
    assert abs(cqi_response(P, 0, True) - oracle_cqi(P, 0, True)) < 1e-12


def test_bare_critical_cavity():
    p = DeviceParams(g_conv=0, mu=0, kappa_a_o=0)
    assert cqi_response(p, 0, True) == pytest.approx(-1, abs=1e-15)


def test_resonant_form_at_large_mu():
    p = P.with_(mu=1e6)
    bare = 1 - 2 * p.kappa_a_ex / p.kappa_a
    assert abs(cqi_response(p, 0, True) - bare) < 1e-6


def test_detuned_matches_oracle():
    for d in np.linspace(-30, 30, 61):
        assert abs(cqi_response(P, d, True) - oracle_cqi(P, d, True)) < 1e-12
        t, r = oracle_converter(P, d)
        assert abs(converter_transmission(P, d) - t) < 1e-12
        assert abs(converter_reflection(P, d) - r) < 1e-12
        assert abs(qubit_cavity_response(P, d, True) - oracle_qubit_cavity(P, d, True)) < 1e-12


def test_converter_examples():
    lossless = DeviceParams(kappa_a_o=0, kappa_b_o=0, kappa_a_ex=4, kappa_b_ex=4, g_conv=2)
    assert abs(converter_transmission(lossless, 0)) ** 2 == pytest.approx(1, abs=1e-12)
    assert converter_transmission(P.with_(g_conv=0), 0) == 0
    g = math.sqrt(P.kappa_a * P.kappa_b_device / 4)
    assert conversion_efficiency(P.with_(g_conv=g)) == pytest.approx(0.9241, abs=5e-5)
    assert conversion_efficiency(P.with_(kappa_b_ex=0)) == 0


def test_converter_reciprocity_lossless():
    rng = np.random.default_rng(1)
    for _ in range(50):
        p = DeviceParams(
            kappa_a_o=0, kappa_b_o=0, kappa_a_ex=rng.uniform(0.1, 10),
            kappa_b_ex=rng.uniform(0.1, 10), g_conv=rng.uniform(0, 10),
        )
        d = rng.uniform(-10, 10)
        total = abs(converter_transmission(p, d)) ** 2 + abs(converter_reflection(p, d)) ** 2
        assert total == pytest.approx(1, abs=1e-9)


def test_qubit_cavity_examples():
    bare = DeviceParams(mu=0, kappa_b_o=0)
    assert qubit_cavity_response(bare, 0, True) == pytest.approx(-1)
    # all-pass value at reference rates, from the 2x2 oracle
    assert qubit_cavity_response(P, 0, True).real == pytest.approx(0.951231, abs=5e-6)
    assert abs(qubit_cavity_response(P.with_(mu=1e6), 0, True) - 1) < 1e-6


def test_cascade_examples():
    assert cas_response(P.with_(g_conv=0), 0, True) == 0
    lossless = DeviceParams(kappa_a_o=0, kappa_b_o=0, kappa_a_ex=4, kappa_b_ex=4, g_conv=2, mu=0)
    assert abs(cas_response(lossless, 0, False)) == pytest.approx(1, abs=1e-12)
    # coupled state: the cascade loses more amplitude than the cooperative node
    assert abs(cas_response(P, 0, True)) < abs(cqi_response(P, 0, True))
    # golden values
    assert cas_response(P, 0, False).real == pytest.approx(0.721890, abs=5e-6)
    assert cas_response(P, 0, True).real == pytest.approx(-0.700556, abs=5e-6)


def test_efficiency_bound_scan():
    bound = efficiency_bound(P)
    gs = np.linspace(0, 20, 2001)
    eta = [conversion_efficiency(P.with_(g_conv=g)) for g in gs]
    assert max(eta) <= bound + 1e-12
    g_opt = math.sqrt(P.kappa_a * P.kappa_b_device / 4)
    assert abs(gs[int(np.argmax(eta))] - g_opt) <= gs[1] - gs[0]


def test_noise_transfer():
    assert noise_transfer_cqi(P.with_(kappa_b_o=0), 3.0) == 0
    assert noise_transfer_cqi(P.with_(g_conv=0), 0.0) == 0
    # hybridised modes carry the noise; the bare resonance sits in a dip
    at_zero = noise_transfer_cqi(P, 0.0)
    at_supermode = noise_transfer_cqi(P, P.g_conv)
    assert at_zero < at_supermode
    grid = np.linspace(0, P.g_conv, 201)
    assert min(noise_transfer_cqi(P, d) for d in grid) == pytest.approx(at_zero)


def test_supermodes():
    assert supermode_splitting(P) == (-10, 10)
    assert supermode_splitting(P.with_(g_conv=0)) == (0, 0)
    p = P.with_(delta_b_offset=3.0)
    ref = np.linalg.eigvalsh([[0, 10], [10, 3]])
    assert np.allclose(supermode_splitting(p), ref)


def test_link_figures():
    assert link_figures(1, -1) == (1, 1)
    assert link_figures(0.5, 0.5)[0] == 0
    with pytest.raises(ZeroDivisionError):
        link_figures(0, 0)


def test_matched_coupling_gives_unit_fidelity():
    g = matched_coupling(P)
    p = P.with_(g_conv=g)
    f_s, f_g = cqi_response(p, 0, False), cqi_response(p, 0, True)
    assert abs(f_s + f_g) < 1e-9
    with pytest.raises(ValueError):
        matched_coupling(P.with_(kappa_a_o=20))


def test_nonfinite_detuning_rejected():
    with pytest.raises((ValueError, SingularInputError)):
        cqi_response(P, float("nan"), True)


def test_resonant_equals_detuned_at_zero():
    for flag in (True, False):
        p = P.with_(cqi_b_external_is_loss=flag)
        for c in (True, False):
            assert abs(cqi_response(p, 0, c) - cqi_response_resonant(p, c)) < 1e-12
