"""Parameter sweeps, detuning optimisation and figure-data tables."""

from __future__ import annotations

import math
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, replace
from functools import partial
from typing import Callable, Iterable, Iterator, Sequence

import numpy as np

from .core import DeviceParams, SingularInputError
from .lindblad import FockConfig, SteadyStateError, WeakDriveError, scatter_response
from .protocol import (
    LinkResult,
    ModelValidityError,
    NodeResponse,
    ghz_chain,
    identical_links,
    link_entangle,
    zeta,
)

SCHEMES = ("cqi", "cas")
VARIABLES = ("kappa_b_o", "n_th", "delta", "N")
INV_PHI = (math.sqrt(5) - 1) / 2
SOLVER_ERRORS = (
    SteadyStateError,
    WeakDriveError,
    ModelValidityError,
    SingularInputError,
    ZeroDivisionError,
)


@dataclass(frozen=True)
class ProtocolSettings:
    window: float | None = None  # detection window; None means 20 / kappa_a
    transmission: float = 1.0  # per-link amplitude factor (fibre loss)


@dataclass(frozen=True)
class SweepSpec:
    variable: str
    grid: tuple[float, ...]
    params: DeviceParams = DeviceParams()
    scheme: str = "both"
    optimize_detuning: bool = False
    fock: FockConfig = FockConfig()
    protocol: ProtocolSettings = ProtocolSettings()
    n_th_list: tuple[float, ...] = (0.1, 0.2, 0.5)  # only used for variable "N"
    workers: int = 1

    def __post_init__(self):
        if self.variable not in VARIABLES:
            raise ValueError(f"unknown sweep variable {self.variable!r}")
        if self.scheme not in ("cqi", "cas", "both"):
            raise ValueError(f"unknown scheme {self.scheme!r}")
        grid = tuple(float(x) for x in self.grid)
        if not grid:
            raise ValueError("sweep grid is empty")
        steps = np.diff(grid)
        if len(grid) > 1 and not (np.all(steps > 0) or np.all(steps < 0)):
            raise ValueError("sweep grid must be strictly monotone")
        object.__setattr__(self, "grid", grid)

    @property
    def schemes(self) -> tuple[str, ...]:
        return SCHEMES if self.scheme == "both" else (self.scheme,)


@dataclass
class SweepRow:
    value: float
    f_cqi: float | None = None
    p_cqi: float | None = None
    f_cas: float | None = None
    p_cas: float | None = None
    infidelity_ratio: float | None = None
    efficiency_ratio: float | None = None
    zeta: float | None = None
    delta_star: float | None = None
    n_th: float | None = None
    log_zeta: float | None = None
    error: str | None = None

    def as_dict(self) -> dict:
        return asdict(self)


ROW_FIELDS = tuple(SweepRow.__dataclass_fields__)


def linspace_grid(lo, hi, n):
    return tuple(np.linspace(lo, hi, n).tolist())


def logspace_grid(lo, hi, n):
    return tuple(np.geomspace(lo, hi, n).tolist())


KAPPA_B_GRID = logspace_grid(1e-2, 1.0, 31)
N_TH_GRID = linspace_grid(0.0, 1.0, 21)
N_GRID = (2, 4, 6, 8, 10)


def node_response(
    params: DeviceParams,
    delta: float,
    scheme: str,
    fock: FockConfig = FockConfig(),
    protocol: ProtocolSettings = ProtocolSettings(),
) -> NodeResponse:
    resp = scatter_response(params, delta, scheme, fock, protocol.window)
    return NodeResponse.from_scatter(resp, protocol.transmission)


def link_result(params, delta, scheme, fock=FockConfig(), protocol=ProtocolSettings()) -> LinkResult:
    node = node_response(params, delta, scheme, fock, protocol)
    return link_entangle(node, node)


def golden_section_max(
    func: Callable[[float], float],
    lo: float,
    hi: float,
    xtol: float = 1e-4,
    ftol: float = 1e-6,
    max_iter: int = 200,
) -> tuple[float, float]:
    """Maximise a unimodal ``func`` on [lo, hi]; returns (x, func(x))."""
    a, b = min(lo, hi), max(lo, hi)
    c = b - INV_PHI * (b - a)
    d = a + INV_PHI * (b - a)
    fc, fd = func(c), func(d)
    for _ in range(max_iter):
        if not (math.isfinite(fc) and math.isfinite(fd)):
            raise ValueError("objective returned a non-finite value")
        if b - a < xtol and abs(fc - fd) < ftol:
            break
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - INV_PHI * (b - a)
            fc = func(c)
        else:
            a, c, fc = c, d, fd
            d = a + INV_PHI * (b - a)
            fd = func(d)
    return (c, fc) if fc >= fd else (d, fd)


def optimize_detuning(
    params: DeviceParams,
    n_th: float | None = None,
    scheme: str = "cqi",
    fock: FockConfig = FockConfig(),
    protocol: ProtocolSettings = ProtocolSettings(),
    xtol: float = 1e-4,
) -> tuple[float, float]:
    """Probe detuning maximising the link fidelity on [-3G, 3G].

    Three golden-section searches run on brackets around -G, 0 and +G; the
    best result wins, and the starts themselves are candidates too.  Ties
    between +/- delta resolve to the non-negative value.
    """
    if n_th is not None:
        params = params.with_(n_th=n_th)

    cache: dict[float, float] = {}

    def fidelity(delta: float) -> float:
        if delta not in cache:
            value = link_result(params, delta, scheme, fock, protocol).fidelity
            if not math.isfinite(value):
                raise ValueError(f"non-finite fidelity at delta={delta}")
            cache[delta] = value
        return cache[delta]

    scale = max(params.g_conv, params.gamma)
    starts = (-scale, 0.0, scale)
    brackets = ((-3 * scale, -scale / 2), (-scale / 2, scale / 2), (scale / 2, 3 * scale))
    candidates = [(fidelity(s), -abs(s), s) for s in starts]
    for lo, hi in brackets:
        x, fx = golden_section_max(fidelity, lo, hi, xtol=xtol)
        candidates.append((fx, -abs(x), x))
    f_best, _, x_best = max(candidates)
    if x_best < 0 and fidelity(-x_best) >= f_best - 1e-12:
        x_best = -x_best
        f_best = max(f_best, fidelity(x_best))
    return float(x_best), float(f_best)


def _ratio(num, den):
    if num is None or den is None:
        return None
    if den == 0:
        return math.inf if num > 0 else None
    return num / den


def _evaluate(value: float, spec: SweepSpec) -> SweepRow:
    params = spec.params
    delta = 0.0
    if spec.variable == "kappa_b_o":
        params = params.with_(kappa_b_o=value)
    elif spec.variable == "n_th":
        params = params.with_(n_th=value)
    elif spec.variable == "delta":
        delta = value
    row = SweepRow(value=value, n_th=params.n_th)
    try:
        links = {}
        for scheme in spec.schemes:
            d = delta
            if scheme == "cqi" and spec.optimize_detuning and spec.variable != "delta":
                d, _ = optimize_detuning(params, None, "cqi", spec.fock, spec.protocol)
                row.delta_star = d
            links[scheme] = link_result(params, d, scheme, spec.fock, spec.protocol)
    except SOLVER_ERRORS as exc:
        row.error = f"{type(exc).__name__}: {exc}"
        return row
    if "cqi" in links:
        row.f_cqi, row.p_cqi = links["cqi"].fidelity, links["cqi"].success_prob
    if "cas" in links:
        row.f_cas, row.p_cas = links["cas"].fidelity, links["cas"].success_prob
    if len(links) == 2:
        row.infidelity_ratio = _ratio(1 - row.f_cas, 1 - row.f_cqi)
        row.efficiency_ratio = _ratio(row.p_cqi, row.p_cas)
        try:
            row.zeta = zeta(links["cqi"], links["cas"])
        except ZeroDivisionError:
            row.zeta = None
    return row


def _pool_map(func, items: Sequence, workers: int) -> Iterator:
    if workers <= 1 or len(items) <= 1:
        return map(func, items)
    pool = ProcessPoolExecutor(max_workers=workers)

    def gen():
        with pool:
            yield from pool.map(func, items)

    return gen()


def iter_sweep(spec: SweepSpec) -> Iterator[SweepRow]:
    """Stream rows in grid order."""
    if spec.variable == "N":
        yield from iter_scaling(
            [int(round(n)) for n in spec.grid],
            spec.n_th_list,
            spec.params,
            spec.fock,
            spec.protocol,
            spec.optimize_detuning,
            spec.workers,
        )
        return
    yield from _pool_map(partial(_evaluate, spec=spec), spec.grid, spec.workers)


def _warn_if_increasing(rows: Sequence[SweepRow], what: str) -> None:
    values = [r.f_cqi for r in rows if r.f_cqi is not None]
    if any(b > a + 1e-12 for a, b in zip(values, values[1:])):
        warnings.warn(f"F_cqi is not nonincreasing along {what}", RuntimeWarning, stacklevel=3)


def sweep_kappa_b(spec: SweepSpec) -> list[SweepRow]:
    if spec.variable != "kappa_b_o":
        raise ValueError("sweep_kappa_b needs variable 'kappa_b_o'")
    rows = list(iter_sweep(spec))
    increasing = spec.grid[-1] > spec.grid[0]
    _warn_if_increasing(rows if increasing else rows[::-1], "kappa_b_o")
    return rows


def sweep_nth(spec: SweepSpec) -> list[SweepRow]:
    if spec.variable != "n_th":
        raise ValueError("sweep_nth needs variable 'n_th'")
    return list(iter_sweep(spec))


def _scaling_nodes(n_th, params, fock, protocol, optimize):
    p = params.with_(n_th=n_th)
    delta_cqi = optimize_detuning(p, None, "cqi", fock, protocol)[0] if optimize else 0.0
    return (
        node_response(p, delta_cqi, "cqi", fock, protocol),
        node_response(p, 0.0, "cas", fock, protocol),
        delta_cqi,
    )


def iter_scaling(
    n_grid: Iterable[int],
    n_th_list: Iterable[float],
    params: DeviceParams = DeviceParams(),
    fock: FockConfig = FockConfig(),
    protocol: ProtocolSettings = ProtocolSettings(),
    optimize: bool = False,
    workers: int = 1,
    method: str = "exact",
) -> Iterator[SweepRow]:
    """Rows of zeta(N) for identical links, one block per thermal occupation.

    ``method="exact"`` runs the GHZ tracker; ``method="product"`` uses the
    independent-link composition F*P(N) = (F*P of one link)^(N-1).
    """
    if method not in ("exact", "product"):
        raise ValueError(f"unknown composition method {method!r}")
    n_grid = list(n_grid)
    n_th_list = list(n_th_list)
    nodes = list(
        _pool_map(
            partial(_scaling_nodes, params=params, fock=fock, protocol=protocol, optimize=optimize),
            n_th_list,
            workers,
        )
    )
    for n_th, (cqi_node, cas_node, delta_cqi) in zip(n_th_list, nodes):
        link_cqi = link_entangle(cqi_node, cqi_node)
        link_cas = link_entangle(cas_node, cas_node)
        for n in n_grid:
            row = SweepRow(value=float(n), n_th=n_th, delta_star=delta_cqi if optimize else None)
            try:
                if method == "exact":
                    cqi = ghz_chain(identical_links(cqi_node, n), n)
                    cas = ghz_chain(identical_links(cas_node, n), n)
                    fp_cqi, fp_cas = cqi.figure_of_merit, cas.figure_of_merit
                    row.f_cqi, row.p_cqi = cqi.ghz_fidelity, cqi.total_success
                    row.f_cas, row.p_cas = cas.ghz_fidelity, cas.total_success
                else:
                    fp_cqi = link_cqi.figure_of_merit ** (n - 1)
                    fp_cas = link_cas.figure_of_merit ** (n - 1)
                if fp_cas == 0:
                    raise ZeroDivisionError("cascaded figure of merit is zero")
                row.zeta = fp_cqi / fp_cas
                row.log_zeta = math.log(row.zeta) if row.zeta > 0 else None
                if row.f_cqi is not None:
                    row.infidelity_ratio = _ratio(1 - row.f_cas, 1 - row.f_cqi)
                    row.efficiency_ratio = _ratio(row.p_cqi, row.p_cas)
            except SOLVER_ERRORS as exc:
                row.error = f"{type(exc).__name__}: {exc}"
            yield row


def scaling_sweep(
    n_grid: Iterable[int] = N_GRID,
    n_th_list: Iterable[float] = (0.1, 0.2, 0.5),
    params: DeviceParams = DeviceParams(),
    **kwargs,
) -> list[SweepRow]:
    return list(iter_scaling(n_grid, n_th_list, params, **kwargs))


def run_sweep(spec: SweepSpec) -> list[SweepRow]:
    if spec.variable == "kappa_b_o":
        return sweep_kappa_b(spec)
    return list(iter_sweep(spec))


def with_grid(spec: SweepSpec, grid) -> SweepSpec:
    return replace(spec, grid=tuple(grid))
