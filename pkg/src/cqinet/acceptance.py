"""Acceptance checks shared by ``cqinet selftest`` and the pytest suite.

Each check returns a :class:`CriterionResult` whose ``lines()`` never
contain wall-clock numbers, so reports are byte-stable across runs.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np

from .core import (
    DeviceParams,
    cas_response,
    conversion_efficiency,
    converter_transmission,
    cqi_response,
    cqi_response_resonant,
    efficiency_bound,
    matched_coupling,
    qubit_cavity_response,
)
from .lindblad import (
    DriveSpec,
    FockConfig,
    build_liouvillian,
    operators,
    solve_response,
    steady_state,
)
from .protocol import NodeResponse, ghz_chain, identical_links, link_closed_form, link_entangle
from .sweeps import (
    KAPPA_B_GRID,
    N_GRID,
    SweepSpec,
    linspace_grid,
    link_result,
    node_response,
    sweep_kappa_b,
    sweep_nth,
)

SEED = 20240611


@dataclass
class Check:
    name: str
    passed: bool
    measured: str
    expected: str


@dataclass
class CriterionResult:
    number: int
    title: str
    time_limit: float
    checks: list[Check] = field(default_factory=list)
    elapsed: float = 0.0

    @property
    def in_time(self) -> bool:
        return self.elapsed <= self.time_limit

    @property
    def passed(self) -> bool:
        return self.in_time and all(c.passed for c in self.checks)

    def add(self, name, passed, measured, expected):
        self.checks.append(Check(name, bool(passed), measured, expected))

    def lines(self) -> list[str]:
        head = f"[{'PASS' if self.passed else 'FAIL'}] {self.number}. {self.title}"
        out = [head]
        for c in self.checks:
            flag = "ok " if c.passed else "BAD"
            out.append(f"    {flag} {c.name}: measured {c.measured}; expected {c.expected}")
        out.append(f"    {'ok ' if self.in_time else 'BAD'} runtime within {self.time_limit:g} s")
        return out


def _g(x) -> str:
    return f"{x:.6g}"


def _random_params(rng, n, zero_temp=True):
    out = []
    for _ in range(n):
        out.append(
            DeviceParams(
                kappa_a_o=rng.uniform(0.0, 3.0),
                kappa_a_ex=rng.uniform(0.5, 20.0),
                kappa_b_o=rng.uniform(0.01, 2.0),
                kappa_b_ex=rng.uniform(0.0, 15.0),
                g_conv=rng.uniform(0.0, 15.0),
                mu=rng.uniform(0.0, 15.0),
                gamma=rng.uniform(0.5, 2.0),
                n_th=0.0 if zero_temp else rng.uniform(0.0, 0.5),
                cqi_b_external_is_loss=bool(rng.integers(2)),
            )
        )
    return out


# -- independent coupled-mode oracles -------------------------------------------------


def oracle_cqi(p: DeviceParams, delta: float, coupled: bool) -> complex:
    """Solve the linearised steady state for (a, b, sigma) amplitudes directly."""
    mu = p.mu if coupled else 0.0
    m = np.array(
        [
            [1j * delta + p.kappa_a / 2, 1j * p.g_conv, 0],
            [1j * p.g_conv, 1j * (delta + p.delta_b_offset) + p.kappa_b_cqi / 2, 1j * mu],
            [0, 1j * mu, 1j * (delta + p.delta_q_offset) + p.gamma / 2],
        ],
        dtype=complex,
    )
    eps = 1.0
    x = np.linalg.solve(m, np.array([math.sqrt(p.kappa_a_ex) * eps, 0, 0], dtype=complex))
    return complex(1 - math.sqrt(p.kappa_a_ex) * x[0] / eps)


def oracle_converter(p: DeviceParams, delta: float) -> tuple[complex, complex]:
    """(transmission, reflection); transmitted field read as +sqrt(kappa_b_ex) b."""
    m = np.array(
        [
            [1j * delta + p.kappa_a / 2, 1j * p.g_conv],
            [1j * p.g_conv, 1j * (delta + p.delta_b_offset) + p.kappa_b_device / 2],
        ],
        dtype=complex,
    )
    x = np.linalg.solve(m, np.array([math.sqrt(p.kappa_a_ex), 0], dtype=complex))
    return complex(math.sqrt(p.kappa_b_ex) * x[1]), complex(1 - math.sqrt(p.kappa_a_ex) * x[0])


def oracle_qubit_cavity(p: DeviceParams, delta: float, coupled: bool) -> complex:
    mu = p.mu if coupled else 0.0
    m = np.array(
        [
            [1j * (delta + p.delta_b_offset) + p.kappa_b_device / 2, 1j * mu],
            [1j * mu, 1j * (delta + p.delta_q_offset) + p.gamma / 2],
        ],
        dtype=complex,
    )
    x = np.linalg.solve(m, np.array([math.sqrt(p.kappa_b_ex), 0], dtype=complex))
    return complex(1 - math.sqrt(p.kappa_b_ex) * x[0])


# -- criteria --------------------------------------------------------------------------


def criterion_1() -> CriterionResult:
    res = CriterionResult(1, "on-resonance cooperativity form of the CQI amplitude", 1.0)
    rng = np.random.default_rng(SEED)
    worst = 0.0
    for p in _random_params(rng, 100):
        for coupled in (True, False):
            worst = max(worst, abs(cqi_response(p, 0.0, coupled) - cqi_response_resonant(p, coupled)))
    res.add("max |f - closed form| over 100 sets", worst <= 1e-12, _g(worst), "<= 1e-12")
    return res


def criterion_2() -> CriterionResult:
    res = CriterionResult(2, "closed forms vs dense coupled-mode solves", 1.0)
    rng = np.random.default_rng(SEED + 2)
    worst_cqi = worst_cas = worst_stage = 0.0
    for p in _random_params(rng, 100):
        for delta in (0.0, rng.uniform(-20, 20)):
            for coupled in (True, False):
                worst_cqi = max(worst_cqi, abs(cqi_response(p, delta, coupled) - oracle_cqi(p, delta, coupled)))
                t_o, _ = oracle_converter(p, delta)
                r_o = oracle_qubit_cavity(p, delta, coupled)
                worst_stage = max(
                    worst_stage,
                    abs(converter_transmission(p, delta) - t_o),
                    abs(qubit_cavity_response(p, delta, coupled) - r_o),
                )
                worst_cas = max(worst_cas, abs(cas_response(p, delta, coupled) - t_o * r_o * t_o))
    res.add("CQI 3x3", worst_cqi <= 1e-12, _g(worst_cqi), "<= 1e-12")
    res.add("CAS per stage", worst_stage <= 1e-12, _g(worst_stage), "<= 1e-12")
    res.add("CAS chain", worst_cas <= 1e-12, _g(worst_cas), "<= 1e-12")
    return res


def criterion_3() -> CriterionResult:
    res = CriterionResult(3, "zero-temperature master equation vs closed form", 60.0)
    rng = np.random.default_rng(SEED + 3)
    fock = FockConfig(3, 3)
    worst = 0.0
    for p in _random_params(rng, 20):
        eps = 1e-3 * math.sqrt(p.kappa_a)
        for coupled in (True, False):
            f_me = solve_response(p, 0.0, coupled, fock, epsilon=eps)
            worst = max(worst, abs(f_me - cqi_response(p, 0.0, coupled)))
    res.add("max |f_ME - f_closed| over 20 sets", worst < 1e-3, _g(worst), "< 1e-3")
    return res


def criterion_4() -> CriterionResult:
    res = CriterionResult(4, "thermal detailed balance of a bare cavity", 5.0)
    worst = 0.0
    reference = None
    cases = [(0.5, 0.1, 10.0), (0.1, 1.0, 1.0), (1.0, 0.3, 2.0), (0.2, 2.0, 0.0)]
    for n_th, kbo, kbex in cases:
        p = DeviceParams(g_conv=0.0, mu=0.0, n_th=n_th, kappa_b_o=kbo, kappa_b_ex=kbex)
        rho = steady_state(build_liouvillian(p, DriveSpec(), False, FockConfig(2, 30, cap=10**4)))
        _, b, _ = operators(rho.dims)
        n_b = rho.expect(b.conj().T @ b).real
        expect = n_th * kbo / p.kappa_b_cqi
        worst = max(worst, abs(n_b - expect))
        if reference is None:
            reference = n_b
    res.add("max |<b+b> - n_th k_bo/k_b|", worst <= 1e-6, _g(worst), "<= 1e-6")
    res.add(
        "<b+b> at n_th=0.5, k_bo=0.1, k_bex=10",
        abs(reference - 0.0049505) <= 1e-6,
        f"{reference:.7f}",
        "0.0049505",
    )
    return res


def criterion_5() -> CriterionResult:
    res = CriterionResult(5, "exact link bookkeeping vs fidelity/success closed forms", 1.0)
    rng = np.random.default_rng(SEED + 5)
    worst = 0.0
    for _ in range(200):
        z = rng.uniform(0, 1, 2) * np.exp(2j * np.pi * rng.uniform(0, 1, 2))
        node = NodeResponse(complex(z[0]), complex(z[1]))
        brute = link_entangle(node, node)
        closed = link_closed_form(node)
        worst = max(
            worst,
            abs(brute.fidelity - closed.fidelity),
            abs(brute.success_prob - closed.success_prob),
        )
    res.add("max deviation over 200 amplitude pairs", worst <= 1e-12, _g(worst), "<= 1e-12")
    ideal = link_entangle(NodeResponse.ideal(), NodeResponse.ideal())
    res.add(
        "ideal amplitudes (1, -1)",
        ideal.fidelity == 1.0 and ideal.success_prob == 1.0,
        f"F={ideal.fidelity!r}, P={ideal.success_prob!r}",
        "F=1.0, P=1.0",
    )
    return res


def criterion_6() -> CriterionResult:
    res = CriterionResult(6, "trends versus intrinsic loss of the intermediate mode", 30.0)
    rows = sweep_kappa_b(SweepSpec("kappa_b_o", KAPPA_B_GRID))
    f_cqi = [r.f_cqi for r in rows]
    rises = sum(b > a + 1e-12 for a, b in zip(f_cqi, f_cqi[1:]))
    res.add("F_cqi nonincreasing in k_bo", rises == 0, f"{rises} increases", "0 increases")
    wins = sum(r.f_cqi > r.f_cas for r in rows)
    margin = min(r.f_cqi - r.f_cas for r in rows)
    res.add(
        "F_cqi > F_cas at every grid point",
        wins == len(rows),
        f"{wins}/{len(rows)} points, min F_cqi-F_cas {_g(margin)}",
        f"{len(rows)}/{len(rows)}",
    )
    eff = [r.efficiency_ratio for r in rows]
    res.add(
        "P_cqi/P_cas > 1 at every grid point",
        min(eff) > 1,
        f"range [{_g(min(eff))}, {_g(max(eff))}]",
        "> 1",
    )
    lossless = DeviceParams(kappa_a_o=0.0, kappa_b_o=1e-6)
    lossless = lossless.with_(g_conv=matched_coupling(lossless))
    f_ideal = link_result(lossless, 0.0, "cqi").fidelity
    res.add(
        f"lossless impedance-matched CQI (G={lossless.g_conv:.6g})",
        f_ideal > 0.999,
        _g(f_ideal),
        "> 0.999",
    )
    return res


NTH_TREND_GRID = linspace_grid(0.1, 0.5, 9)


def criterion_7() -> CriterionResult:
    res = CriterionResult(7, "noise-resilience trends versus n_th", 600.0)
    rows = sweep_nth(SweepSpec("n_th", NTH_TREND_GRID, optimize_detuning=True))
    ratios = [r.infidelity_ratio for r in rows]
    increasing = all(b > a for a, b in zip(ratios, ratios[1:]))
    res.add(
        "infidelity ratio strictly increasing on n_th in [0.1, 0.5]",
        increasing,
        ", ".join(_g(x) for x in ratios),
        "strictly increasing",
    )
    res.add("infidelity ratio > 1 everywhere", min(ratios) > 1, f"min {_g(min(ratios))}", "> 1")
    last = rows[-1]
    f0 = link_result(DeviceParams(n_th=0.5), 0.0, "cqi").fidelity
    res.add(
        "F_cqi(delta*) >= F_cqi(0) at n_th=0.5",
        last.f_cqi >= f0 - 1e-12,
        f"delta*={_g(last.delta_star)}, F*={_g(last.f_cqi)}, F(0)={_g(f0)}",
        ">=",
    )
    return res


SCALING_NTH = (0.1, 0.2, 0.5)


def criterion_8() -> CriterionResult:
    res = CriterionResult(8, "multi-node scaling of zeta with identical links", 300.0)
    zetas = {}
    for n_th in SCALING_NTH:
        p = DeviceParams(n_th=n_th)
        cqi = node_response(p, 0.0, "cqi")
        cas = node_response(p, 0.0, "cas")
        for n in N_GRID:
            a = ghz_chain(identical_links(cqi, n), n)
            b = ghz_chain(identical_links(cas, n), n)
            zetas[n_th, n] = a.figure_of_merit / b.figure_of_merit
    worst_pow = 0.0
    worst_fit = 0.0
    for n_th in SCALING_NTH:
        z2 = zetas[n_th, 2]
        for n in N_GRID:
            worst_pow = max(worst_pow, abs(zetas[n_th, n] / z2 ** (n - 1) - 1))
        x = np.array(N_GRID, dtype=float)
        y = np.log([zetas[n_th, n] for n in N_GRID])
        coef = np.polyfit(x, y, 1)
        worst_fit = max(worst_fit, float(np.max(np.abs(np.polyval(coef, x) - y))))
    res.add("max |zeta(N)/zeta(2)^(N-1) - 1|", worst_pow <= 1e-9, _g(worst_pow), "<= 1e-9")
    res.add("max residual of linear fit to log zeta", worst_fit < 1e-9, _g(worst_fit), "< 1e-9")
    for n in (4, 6):
        seq = [zetas[t, n] for t in SCALING_NTH]
        res.add(
            f"zeta increases with n_th at N={n}",
            all(b > a for a, b in zip(seq, seq[1:])),
            ", ".join(_g(z) for z in seq),
            "increasing",
        )
    return res


def criterion_9() -> CriterionResult:
    res = CriterionResult(9, "converter efficiency bound and its optimum", 1.0)
    base = DeviceParams()
    bound = efficiency_bound(base)
    g_opt = math.sqrt(base.kappa_a * base.kappa_b_device / 4)
    grid = np.linspace(0.0, 3 * g_opt, 3001)
    eta = np.array([conversion_efficiency(base.with_(g_conv=g)) for g in grid])
    step = grid[1] - grid[0]
    res.add("max over G of eta - bound", eta.max() <= bound + 1e-12, _g(eta.max() - bound), "<= 0")
    g_peak = grid[int(np.argmax(eta))]
    res.add(
        "grid maximum location",
        abs(g_peak - g_opt) <= step,
        _g(g_peak),
        f"{_g(g_opt)} +/- {_g(step)}",
    )
    eta_opt = conversion_efficiency(base.with_(g_conv=g_opt))
    res.add(
        "efficiency at G^2 = k_a k_b / 4",
        abs(eta_opt - bound) <= 1e-12 and abs(eta_opt - 0.9241) < 5e-5,
        f"{eta_opt:.6f}",
        "0.9241 (= bound)",
    )
    return res


QUICK = (1, 2, 4, 5, 6, 9)
CRITERIA = {
    1: criterion_1,
    2: criterion_2,
    3: criterion_3,
    4: criterion_4,
    5: criterion_5,
    6: criterion_6,
    7: criterion_7,
    8: criterion_8,
    9: criterion_9,
}


def run_criterion(number: int) -> CriterionResult:
    start = time.perf_counter()
    res = CRITERIA[number]()
    res.elapsed = time.perf_counter() - start
    return res


def criterion_10(previous: list[CriterionResult], total_elapsed: float) -> CriterionResult:
    res = CriterionResult(10, "determinism and runtime", 900.0)
    first = {r.number: r.lines() for r in previous}
    rerun = [n for n in QUICK if n in first]
    same = all(run_criterion(n).lines() == first[n] for n in rerun)
    res.add(
        "re-running criteria gives identical report lines",
        same,
        f"criteria {', '.join(map(str, rerun))} {'identical' if same else 'differ'}",
        "identical",
    )
    p = DeviceParams(n_th=0.5)
    lv = build_liouvillian(p, DriveSpec(1e-3, 0.0), True, FockConfig(4, 6))
    start = time.perf_counter()
    rho_a = steady_state(lv)
    solve_time = time.perf_counter() - start
    rho_b = steady_state(lv)
    res.add("steady-state solve at dims (4, 6) with qubit", solve_time < 1.0, "timed", "< 1 s")
    res.add(
        "repeated solve is bit-identical",
        np.array_equal(rho_a.data, rho_b.data),
        "identical" if np.array_equal(rho_a.data, rho_b.data) else "differs",
        "identical",
    )
    res.add("suite runtime", total_elapsed < 900.0, "timed", "< 900 s")
    return res


def run_all(quick: bool = False, progress=None) -> list[CriterionResult]:
    numbers = QUICK if quick else tuple(CRITERIA)
    results = []
    start = time.perf_counter()
    for n in numbers:
        res = run_criterion(n)
        results.append(res)
        if progress:
            progress(res)
    if not quick:
        t0 = time.perf_counter()
        res = criterion_10(results, t0 - start)
        res.elapsed = time.perf_counter() - t0
        results.append(res)
        if progress:
            progress(res)
    return results
