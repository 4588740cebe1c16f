"""Truncated-Fock master-equation engine for a single node.

Basis ordering is ``qubit (x) a (x) b`` (row-major, qubit index 0 = |g>),
and density matrices are vectorised column-stacked, so that
``vec(A rho B) = (B^T kron A) vec(rho)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla
from scipy.integrate import solve_ivp

from .core import (
    DeviceParams,
    ScatterResponse,
    cas_response,
    converter_transmission,
    cqi_response,
    qubit_cavity_response,
)

DEFAULT_CAP = 512
WEAK_DRIVE_TOL = 1e-4
RESIDUAL_TOL = 1e-10


class SteadyStateError(RuntimeError):
    """The Liouvillian has no unique, accurately solvable steady state."""


class WeakDriveError(RuntimeError):
    """The probe is too strong for linear-response extraction."""


@dataclass(frozen=True)
class FockConfig:
    dim_a: int = 3
    dim_b: int = 4
    include_qubit: bool = True
    cap: int = DEFAULT_CAP

    def __post_init__(self):
        if self.dim_a < 2 or self.dim_b < 2:
            raise ValueError("Fock truncations must be >= 2")
        if self.hilbert_dim > self.cap:
            raise ValueError(
                f"Hilbert dimension {self.hilbert_dim} exceeds cap {self.cap}"
            )

    @property
    def hilbert_dim(self) -> int:
        return self.dim_a * self.dim_b * (2 if self.include_qubit else 1)


@dataclass(frozen=True)
class DriveSpec:
    amplitude: float = 0.0
    detuning: float = 0.0

    def __post_init__(self):
        if not (math.isfinite(self.amplitude) and self.amplitude >= 0):
            raise ValueError("drive amplitude must be finite and >= 0")
        if not math.isfinite(self.detuning):
            raise ValueError("drive detuning must be finite")


@dataclass
class Liouvillian:
    matrix: sp.csc_matrix
    dims: tuple[int, int, int]  # (qubit, a, b); qubit dimension 1 means absent


@dataclass
class DensityMatrix:
    data: np.ndarray
    dims: tuple[int, int, int]
    residual: float = field(default=0.0, compare=False)

    @property
    def dim(self) -> int:
        return self.data.shape[0]

    def expect(self, op) -> complex:
        return complex((op @ self.data).trace())

    def check(self, herm_tol=1e-10, trace_tol=1e-10, eig_tol=1e-8) -> None:
        rho = self.data
        if np.max(np.abs(rho - rho.conj().T)) > herm_tol:
            raise ValueError("density matrix is not Hermitian")
        if abs(np.trace(rho) - 1) > trace_tol:
            raise ValueError("density matrix trace differs from 1")
        if np.min(np.linalg.eigvalsh(rho)) < -eig_tol:
            raise ValueError("density matrix has negative eigenvalues")


@dataclass(frozen=True)
class TruncationReport:
    passed: bool
    dims: tuple[int, int]
    refined_dims: tuple[int, int]
    values: dict
    refined_values: dict


def operators(dims: tuple[int, int, int]):
    """Sparse (a, b, sigma_minus) on the full space; sigma_minus is None without qubit."""
    nq, na, nb = dims
    ann_a = sp.diags(np.sqrt(np.arange(1, na)), 1, shape=(na, na))
    ann_b = sp.diags(np.sqrt(np.arange(1, nb)), 1, shape=(nb, nb))
    iq, ia, ib = sp.identity(nq), sp.identity(na), sp.identity(nb)
    a = sp.kron(sp.kron(iq, ann_a), ib, format="csr")
    b = sp.kron(sp.kron(iq, ia), ann_b, format="csr")
    sm = None
    if nq == 2:
        lower = sp.csr_matrix(np.array([[0.0, 1.0], [0.0, 0.0]]))
        sm = sp.kron(sp.kron(lower, ia), ib, format="csr")
    return a, b, sm


def _superop(h, c_ops) -> sp.csc_matrix:
    n = h.shape[0]
    eye = sp.identity(n, format="csr")
    lv = -1j * (sp.kron(eye, h) - sp.kron(h.T, eye))
    for c in c_ops:
        cdc = (c.conj().T @ c).tocsr()
        lv = lv + sp.kron(c.conj(), c) - 0.5 * sp.kron(eye, cdc) - 0.5 * sp.kron(cdc.T, eye)
    return sp.csc_matrix(lv)


def _device_liouvillian(
    dims,
    *,
    delta,
    delta_b,
    delta_q,
    g,
    mu,
    kappa_a,
    kappa_b_cold,
    kappa_b_hot,
    n_th,
    gamma,
    drive_port=None,
    drive_rate=0.0,
    epsilon=0.0,
) -> Liouvillian:
    a, b, sm = operators(dims)
    ad, bd = a.conj().T, b.conj().T
    h = delta * (ad @ a) + (delta + delta_b) * (bd @ b) + g * (ad @ b + a @ bd)
    if sm is not None:
        sp_ = sm.conj().T
        h = h + (delta + delta_q) * (sp_ @ sm) + mu * (sp_ @ b + sm @ bd)
    if epsilon and drive_port is not None:
        c = a if drive_port == "a" else b
        h = h + 1j * math.sqrt(drive_rate) * (epsilon * c.conj().T - np.conj(epsilon) * c)
    c_ops = []
    if kappa_a > 0 and dims[1] > 1:
        c_ops.append(math.sqrt(kappa_a) * a)
    if kappa_b_cold > 0:
        c_ops.append(math.sqrt(kappa_b_cold) * b)
    if kappa_b_hot > 0:
        c_ops.append(math.sqrt(kappa_b_hot * (n_th + 1)) * b)
        if n_th > 0:
            c_ops.append(math.sqrt(kappa_b_hot * n_th) * bd)
    if sm is not None and gamma > 0:
        c_ops.append(math.sqrt(gamma) * sm)
    return Liouvillian(_superop(sp.csr_matrix(h), c_ops), tuple(dims))


def _dims(fock: FockConfig, qubit_coupled: bool) -> tuple[int, int, int]:
    return (2 if (qubit_coupled and fock.include_qubit) else 1, fock.dim_a, fock.dim_b)


def build_liouvillian(
    params: DeviceParams,
    drive: DriveSpec,
    qubit_coupled: bool,
    fock: FockConfig = FockConfig(),
) -> Liouvillian:
    """Liouvillian of the cooperative interface under a weak coherent probe on mode a."""
    b_cold = params.kappa_b_ex if params.cqi_b_external_is_loss else 0.0
    return _device_liouvillian(
        _dims(fock, qubit_coupled),
        delta=drive.detuning,
        delta_b=params.delta_b_offset,
        delta_q=params.delta_q_offset,
        g=params.g_conv,
        mu=params.mu,
        kappa_a=params.kappa_a,
        kappa_b_cold=b_cold,
        kappa_b_hot=params.kappa_b_o,
        n_th=params.n_th,
        gamma=params.gamma,
        drive_port="a",
        drive_rate=params.kappa_a_ex,
        epsilon=drive.amplitude,
    )


def _converter_liouvillian(params, drive, fock) -> Liouvillian:
    return _device_liouvillian(
        (1, fock.dim_a, fock.dim_b),
        delta=drive.detuning,
        delta_b=params.delta_b_offset,
        delta_q=0.0,
        g=params.g_conv,
        mu=0.0,
        kappa_a=params.kappa_a,
        kappa_b_cold=params.kappa_b_ex,
        kappa_b_hot=params.kappa_b_o,
        n_th=params.n_th,
        gamma=params.gamma,
        drive_port="a",
        drive_rate=params.kappa_a_ex,
        epsilon=drive.amplitude,
    )


def _qubit_cavity_liouvillian(params, drive, qubit_coupled, fock) -> Liouvillian:
    # no a mode: dim_a = 1
    return _device_liouvillian(
        (2 if qubit_coupled else 1, 1, fock.dim_b),
        delta=drive.detuning,
        delta_b=params.delta_b_offset,
        delta_q=params.delta_q_offset,
        g=0.0,
        mu=params.mu,
        kappa_a=0.0,
        kappa_b_cold=params.kappa_b_ex,
        kappa_b_hot=params.kappa_b_o,
        n_th=params.n_th,
        gamma=params.gamma,
        drive_port="b",
        drive_rate=params.kappa_b_ex,
        epsilon=drive.amplitude,
    )


def _residual(lv: sp.csc_matrix, x: np.ndarray) -> float:
    return float(np.linalg.norm(lv @ x))


def steady_state(liouvillian: Liouvillian, tol: float = RESIDUAL_TOL) -> DensityMatrix:
    """Unique steady state via a sparse solve with the trace constraint in row 0.

    Falls back to adaptive time stepping if the direct solve is inaccurate.
    """
    lv = liouvillian.matrix
    n = int(round(math.sqrt(lv.shape[0])))
    trace_row = np.eye(n).reshape(-1, order="F")
    lmat = lv.tolil(copy=True)
    lmat[0, :] = trace_row
    rhs = np.zeros(n * n, dtype=complex)
    rhs[0] = 1.0
    scale = spla.norm(lv) or 1.0
    try:
        lu = spla.splu(lmat.tocsc())
    except RuntimeError as exc:
        raise SteadyStateError(f"steady state is not unique: {exc}") from None
    x = lu.solve(rhs)
    if not np.all(np.isfinite(x)):
        raise SteadyStateError("steady-state solve produced non-finite values")
    res = _residual(lv, x)
    if res > tol * scale:
        x = _relax(lv, x, tol * scale)
        res = _residual(lv, x)
    rho = x.reshape(n, n, order="F")
    rho = 0.5 * (rho + rho.conj().T)
    rho = rho / np.trace(rho).real
    return DensityMatrix(rho, liouvillian.dims, residual=res / scale)


def _relax(lv, x0, target, t_max=1e4):
    """Integrate d(rho)/dt = L rho until the residual drops below ``target``."""
    t = 0.0
    x = x0
    span = 1.0
    while t < t_max:
        sol = solve_ivp(lambda _t, y: lv @ y, (0.0, span), x, method="RK45", rtol=1e-12, atol=1e-14)
        x = sol.y[:, -1]
        t += span
        if _residual(lv, x) <= target:
            return x
        span *= 2
    raise SteadyStateError("time-stepping fallback did not reach the residual target")


def default_epsilon(params: DeviceParams) -> float:
    return 1e-3 * math.sqrt(params.kappa_a)


def extract_response(
    rho: DensityMatrix, params: DeviceParams, drive: DriveSpec
) -> tuple[complex, float]:
    """Coherent reflection amplitude and incoherent output flux of the CQI a port.

    ``f`` is ``nan`` when the drive amplitude is zero.
    """
    a, _, _ = operators(rho.dims)
    mean_a = rho.expect(a)
    n_a = rho.expect(a.conj().T @ a).real
    phi_inc = params.kappa_a_ex * max(n_a - abs(mean_a) ** 2, 0.0)
    if drive.amplitude == 0:
        return complex("nan"), phi_inc
    f = 1.0 - math.sqrt(params.kappa_a_ex) * mean_a / drive.amplitude
    return complex(f), phi_inc


def _drive_response(build, rate, port_index, epsilon, delta, check):
    def solve(eps):
        lv = build(DriveSpec(eps, delta))
        rho = steady_state(lv)
        ops = operators(rho.dims)
        return 1.0 - math.sqrt(rate) * rho.expect(ops[port_index]) / eps

    f = solve(epsilon)
    if check:
        f_half = solve(epsilon / 2)
        if abs(f - f_half) >= WEAK_DRIVE_TOL:
            raise WeakDriveError(
                f"response changes by {abs(f - f_half):.2e} when halving the drive; "
                "use a smaller amplitude or a larger truncation"
            )
    return complex(f)


def solve_response(
    params: DeviceParams,
    delta: float,
    qubit_coupled: bool,
    fock: FockConfig = FockConfig(),
    epsilon: float | None = None,
    check: bool = True,
) -> complex:
    """Master-equation reflection amplitude of the CQI (weak-drive enforced)."""
    eps = default_epsilon(params) if epsilon is None else epsilon
    if eps <= 0:
        raise ValueError("drive amplitude must be > 0 to extract a response")
    return _drive_response(
        lambda d: build_liouvillian(params, d, qubit_coupled, fock),
        params.kappa_a_ex, 0, eps, delta, check,
    )


def solve_qubit_cavity_response(
    params, delta, qubit_coupled, fock=FockConfig(), epsilon=None, check=True
) -> complex:
    """Master-equation all-pass response of the cascade's qubit cavity."""
    eps = default_epsilon(params) if epsilon is None else epsilon
    return _drive_response(
        lambda d: _qubit_cavity_liouvillian(params, d, qubit_coupled, fock),
        params.kappa_b_ex, 1, eps, delta, check,
    )


def _thermal_occupations(lv: Liouvillian):
    rho = steady_state(lv)
    a, b, _ = operators(rho.dims)
    return rho.expect(a.conj().T @ a).real, rho.expect(b.conj().T @ b).real


def thermal_leak_flux(
    params: DeviceParams,
    delta: float,
    qubit_coupled: bool,
    fock: FockConfig = FockConfig(),
    scheme: str = "cqi",
) -> float:
    """Zero-drive thermal photon flux leaving the node's output port.

    For ``scheme="cas"`` the fluxes of the three devices are attenuated by
    the linear transmission of every downstream device at ``delta``.
    """
    if params.n_th == 0 or params.kappa_b_o == 0:
        return 0.0
    idle = DriveSpec(0.0, delta)
    if scheme == "cqi":
        if params.kappa_a_ex == 0:
            return 0.0
        n_a, _ = _thermal_occupations(build_liouvillian(params, idle, qubit_coupled, fock))
        return params.kappa_a_ex * n_a
    if scheme != "cas":
        raise ValueError(f"unknown scheme {scheme!r}")
    n_a, n_b = _thermal_occupations(_converter_liouvillian(params, idle, fock))
    _, n_bq = _thermal_occupations(_qubit_cavity_liouvillian(params, idle, qubit_coupled, fock))
    # converter 1 emits from its b port, the qubit cavity into the bus,
    # converter 2 (reversed) from its a port
    phis = [params.kappa_b_ex * n_b, params.kappa_b_ex * n_bq, params.kappa_a_ex * n_a]
    gains = [
        abs(converter_transmission(params, delta)) ** 2,
        abs(qubit_cavity_response(params, delta, qubit_coupled)) ** 2,
        abs(converter_transmission(params, delta)) ** 2,
    ]
    total = 0.0
    for i, phi in enumerate(phis):
        total += phi * math.prod(gains[j] for j in range(i + 1, 3))
    return float(total)


def truncation_check(
    params: DeviceParams,
    drive: DriveSpec,
    fock: FockConfig = FockConfig(),
    qubit_coupled: bool = True,
    rtol: float = 1e-6,
) -> TruncationReport:
    """Compare observables against a solve at (dim_a + 1, dim_b + 2)."""
    refined = FockConfig(fock.dim_a + 1, fock.dim_b + 2, fock.include_qubit, cap=max(fock.cap, 10**9))

    def observe(fc):
        rho = steady_state(build_liouvillian(params, drive, qubit_coupled, fc))
        a, b, _ = operators(rho.dims)
        return {
            "a": rho.expect(a),
            "n_a": rho.expect(a.conj().T @ a).real,
            "n_b": rho.expect(b.conj().T @ b).real,
        }

    coarse, fine = observe(fock), observe(refined)
    passed = True
    for key in coarse:
        diff = abs(coarse[key] - fine[key])
        ref = max(abs(coarse[key]), abs(fine[key]))
        if diff > rtol * ref and diff > 1e-15:
            passed = False
    return TruncationReport(
        passed, (fock.dim_a, fock.dim_b), (refined.dim_a, refined.dim_b), coarse, fine
    )


def adequate_fock(
    params: DeviceParams, drive: DriveSpec, fock: FockConfig = FockConfig()
) -> FockConfig:
    """Grow the truncation until ``truncation_check`` passes or the cap is hit."""
    while True:
        if truncation_check(params, drive, fock).passed:
            return fock
        try:
            fock = FockConfig(fock.dim_a + 1, fock.dim_b + 2, fock.include_qubit, fock.cap)
        except ValueError:
            return fock


def scatter_response(
    params: DeviceParams,
    delta: float,
    scheme: str = "cqi",
    fock: FockConfig = FockConfig(),
    window: float | None = None,
) -> ScatterResponse:
    """Amplitudes for both qubit states plus noise click probabilities.

    Noiseless nodes (``n_th == 0`` or ``kappa_b_o == 0``) use the closed
    forms; otherwise amplitudes come from the master equation.  ``window``
    is the detection window, default ``20 / kappa_a``.
    """
    tau = 20.0 / params.kappa_a if window is None else window
    noisy = params.n_th > 0 and params.kappa_b_o > 0
    if scheme == "cqi":
        if noisy:
            f_g = solve_response(params, delta, True, fock)
            f_s = solve_response(params, delta, False, fock)
        else:
            f_g = cqi_response(params, delta, True)
            f_s = cqi_response(params, delta, False)
    elif scheme == "cas":
        if noisy:
            t = converter_transmission(params, delta)
            f_g = t * t * solve_qubit_cavity_response(params, delta, True, fock)
            f_s = t * t * solve_qubit_cavity_response(params, delta, False, fock)
        else:
            f_g = cas_response(params, delta, True)
            f_s = cas_response(params, delta, False)
    else:
        raise ValueError(f"unknown scheme {scheme!r}")
    nu_g = tau * thermal_leak_flux(params, delta, True, fock, scheme) if noisy else 0.0
    nu_s = tau * thermal_leak_flux(params, delta, False, fock, scheme) if noisy else 0.0
    return ScatterResponse(delta, f_g, f_s, nu_g, nu_s)
