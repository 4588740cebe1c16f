"""Closed-form frequency-domain response of a single interface node.

All rates, couplings and detunings are expressed in units of the qubit
decay rate ``gamma``.  Output fields follow ``out = in - sqrt(kappa_ex) * c``
for a port coupled to intracavity field ``c``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, fields, replace

import numpy as np
from scipy.optimize import brentq


class SingularInputError(ValueError):
    """Raised when a response denominator vanishes."""


@dataclass(frozen=True)
class DeviceParams:
    kappa_a_o: float = 1.0
    kappa_a_ex: float = 14.0
    kappa_b_o: float = 0.1
    kappa_b_ex: float = 10.0
    g_conv: float = 10.0
    mu: float = 10.0
    gamma: float = 1.0
    n_th: float = 0.0
    delta_b_offset: float = 0.0
    delta_q_offset: float = 0.0
    cqi_b_external_is_loss: bool = True

    def __post_init__(self):
        for f in fields(self):
            if f.name == "cqi_b_external_is_loss":
                continue
            value = getattr(self, f.name)
            if not isinstance(value, (int, float)) or isinstance(value, bool):
                raise TypeError(f"{f.name} must be a real number, got {value!r}")
            if not math.isfinite(value):
                raise ValueError(f"{f.name} must be finite, got {value!r}")
            if not f.name.startswith("delta_") and value < 0:
                raise ValueError(f"{f.name} must be >= 0, got {value!r}")
        if self.gamma <= 0:
            raise ValueError("gamma must be > 0")
        if self.kappa_a <= 0:
            raise ValueError("kappa_a_o + kappa_a_ex must be > 0")
        if self.kappa_b_cqi <= 0:
            raise ValueError("total kappa_b of the CQI must be > 0")

    @property
    def kappa_a(self) -> float:
        return self.kappa_a_o + self.kappa_a_ex

    @property
    def kappa_b_cqi(self) -> float:
        """Total decay of mode b inside the cooperative interface."""
        if self.cqi_b_external_is_loss:
            return self.kappa_b_o + self.kappa_b_ex
        return self.kappa_b_o

    @property
    def kappa_b_device(self) -> float:
        """Total decay of a bus-coupled b mode in the cascaded chain."""
        return self.kappa_b_o + self.kappa_b_ex

    def with_(self, **changes) -> "DeviceParams":
        return replace(self, **changes)


PAPER_DEFAULTS = DeviceParams()


@dataclass(frozen=True)
class Cooperativities:
    c_ab: float
    c_bq: float


@dataclass(frozen=True)
class ScatterResponse:
    """Output amplitudes for both qubit states at one probe detuning.

    ``nu_*`` are incoherent (noise) click probabilities per detection window.
    """

    detuning: float
    f_coupled: complex
    f_uncoupled: complex
    nu_coupled: float = 0.0
    nu_uncoupled: float = 0.0


def _check_delta(delta: float) -> float:
    delta = float(delta)
    if not math.isfinite(delta):
        raise ValueError(f"detuning must be finite, got {delta!r}")
    return delta


def _inverse(z: complex, what: str) -> complex:
    if z == 0:
        raise SingularInputError(f"degenerate denominator in {what}")
    return 1.0 / z


def cooperativities(params: DeviceParams, kappa_b: float | None = None) -> Cooperativities:
    """Return ``C_ab = 4G^2/(k_a k_b)`` and ``C_bq = 4 mu^2/(gamma k_b)``.

    ``kappa_b`` defaults to the CQI total; pass ``params.kappa_b_device``
    for a cascaded-chain device.
    """
    kb = params.kappa_b_cqi if kappa_b is None else float(kappa_b)
    if not (math.isfinite(kb) and kb > 0):
        raise ValueError(f"kappa_b must be finite and > 0, got {kb!r}")
    c_ab = 4.0 * params.g_conv**2 / (params.kappa_a * kb)
    c_bq = 4.0 * params.mu**2 / (params.gamma * kb)
    return Cooperativities(c_ab=c_ab, c_bq=c_bq)


def _qubit_self_energy(params: DeviceParams, delta: float, coupled: bool) -> complex:
    if not coupled or params.mu == 0:
        return 0.0
    den = 1j * (delta + params.delta_q_offset) + params.gamma / 2
    return params.mu**2 * _inverse(den, "qubit branch")


def cqi_response(params: DeviceParams, delta: float, qubit_coupled: bool) -> complex:
    """Reflection amplitude of the cooperative interface at probe detuning ``delta``.

    ``qubit_coupled`` selects the qubit in |g> (coupling ``mu`` active);
    otherwise the qubit sits in |s> and is invisible to mode b.
    """
    delta = _check_delta(delta)
    b_den = (
        1j * (delta + params.delta_b_offset)
        + params.kappa_b_cqi / 2
        + _qubit_self_energy(params, delta, qubit_coupled)
    )
    a_den = 1j * delta + params.kappa_a / 2
    if params.g_conv != 0:
        a_den += params.g_conv**2 * _inverse(b_den, "mode-b branch")
    return complex(1.0 - params.kappa_a_ex * _inverse(a_den, "mode-a branch"))


def cqi_response_resonant(params: DeviceParams, qubit_coupled: bool) -> float:
    """On-resonance amplitude written through the cooperativities."""
    coop = cooperativities(params)
    c_bq = coop.c_bq if qubit_coupled else 0.0
    ratio = 2.0 * params.kappa_a_ex / params.kappa_a
    return 1.0 - ratio / (1.0 + coop.c_ab / (1.0 + c_bq))


def _converter_denominator(params: DeviceParams, delta: float) -> complex:
    den = (1j * delta + params.kappa_a / 2) * (
        1j * (delta + params.delta_b_offset) + params.kappa_b_device / 2
    ) + params.g_conv**2
    if den == 0:
        raise SingularInputError("degenerate converter denominator")
    return den


def converter_transmission(params: DeviceParams, delta: float) -> complex:
    """Transmission of an isolated two-mode frequency converter (a port -> b port)."""
    delta = _check_delta(delta)
    num = -1j * params.g_conv * math.sqrt(params.kappa_a_ex * params.kappa_b_ex)
    return complex(num / _converter_denominator(params, delta))


def converter_reflection(params: DeviceParams, delta: float) -> complex:
    """Reflection at the a port of the isolated converter."""
    delta = _check_delta(delta)
    b_den = 1j * (delta + params.delta_b_offset) + params.kappa_b_device / 2
    den = _converter_denominator(params, delta)
    return complex(1.0 - params.kappa_a_ex * b_den / den)


def qubit_cavity_response(params: DeviceParams, delta: float, qubit_coupled: bool) -> complex:
    """All-pass response of the bus-coupled qubit cavity used in the cascade."""
    delta = _check_delta(delta)
    den = (
        1j * (delta + params.delta_b_offset)
        + params.kappa_b_device / 2
        + _qubit_self_energy(params, delta, qubit_coupled)
    )
    return complex(1.0 - params.kappa_b_ex * _inverse(den, "qubit cavity"))


def cas_response(params: DeviceParams, delta: float, qubit_coupled: bool) -> complex:
    """Converter -> qubit cavity -> converter, all sharing ``params``."""
    t = converter_transmission(params, delta)
    r = qubit_cavity_response(params, delta, qubit_coupled)
    return t * r * t


def conversion_efficiency(params: DeviceParams) -> float:
    return abs(converter_transmission(params, 0.0)) ** 2


def efficiency_bound(params: DeviceParams) -> float:
    """Best achievable converter efficiency for these decay rates."""
    return params.kappa_a_ex * params.kappa_b_ex / (params.kappa_a * params.kappa_b_device)


def noise_transfer_cqi(params: DeviceParams, delta: float) -> float:
    """|S|^2 from the intrinsic noise port of mode b to the a output (qubit decoupled)."""
    delta = _check_delta(delta)
    den = (1j * delta + params.kappa_a / 2) * (
        1j * (delta + params.delta_b_offset) + params.kappa_b_cqi / 2
    ) + params.g_conv**2
    if den == 0:
        raise SingularInputError("degenerate noise-transfer denominator")
    amp = math.sqrt(params.kappa_a_ex * params.kappa_b_o) * params.g_conv / den
    return float(abs(amp) ** 2)


def supermode_splitting(params: DeviceParams) -> tuple[float, float]:
    """Frequencies of the hybridised a/b modes."""
    if params.delta_b_offset == 0:
        return (-params.g_conv, params.g_conv)
    h = np.array([[0.0, params.g_conv], [params.g_conv, params.delta_b_offset]])
    lo, hi = np.linalg.eigvalsh(h)
    return (float(lo), float(hi))


def link_figures(f_s: complex, f_g: complex) -> tuple[float, float]:
    """Noiseless (fidelity, success probability) from the two amplitudes."""
    p = (abs(f_s) ** 2 + abs(f_g) ** 2) / 2
    if p == 0:
        raise ZeroDivisionError("both amplitudes vanish; fidelity undefined")
    return abs(f_s - f_g) ** 2 / (4 * p), p


def matched_coupling(params: DeviceParams) -> float:
    """Conversion coupling G that makes f_s = -f_g on resonance (F = 1).

    Requires ``kappa_a_ex > kappa_a_o``; otherwise no real matching point
    exists and ``ValueError`` is raised.
    """
    if 2 * params.kappa_a_ex <= params.kappa_a:
        raise ValueError("impedance matching needs kappa_a_ex > kappa_a_o")

    def contrast(g: float) -> float:
        p = params.with_(g_conv=g)
        return cqi_response_resonant(p, False) + cqi_response_resonant(p, True)

    hi = max(params.kappa_a, params.kappa_b_cqi, params.mu, 1.0)
    while contrast(hi) <= 0:
        hi *= 2
        if hi > 1e12:
            raise ValueError("no matching coupling found")
    return float(brentq(contrast, 0.0, hi, xtol=1e-14, rtol=1e-15))
