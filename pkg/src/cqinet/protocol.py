"""Heralded entanglement bookkeeping for two-node links and GHZ chains.

Qubit basis index 0 is |s> (uncoupled), 1 is |g> (coupled).  A photon
prepared in ``(|up> + i|down>)/sqrt(2)`` reflects off node 1 on the upper
path and node 2 on the lower path; projecting onto ``|+i>`` gives the
amplitude ``(f1 + f2)/2`` and onto ``|-i>`` gives ``(f1 - f2)/2``.

Adaptive corrections map both ideal outcomes onto the target
``(|s..s> + |g..g>)/sqrt(2)``: a ``+i`` click applies Z to the first qubit
of the chain, a ``-i`` click applies Y to the first qubit of the incoming
block and X to its remaining qubit.

Noise clicks fire each detector with probability ``(nu1 + nu2)/2`` per
window and leave the addressed pair in the uniform diagonal mixture.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .core import ScatterResponse

SIGMA_Z = np.diag([1.0, -1.0]).astype(complex)
SIGMA_Y = np.array([[0.0, -1j], [1j, 0.0]])
SIGMA_X = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
MAX_NODES = 16
MAX_DENSE_NODES = 10


class ModelValidityError(ValueError):
    """Click probabilities leave [0, 1]: detection window too long or flux too high."""


@dataclass(frozen=True)
class NodeResponse:
    f_s: complex
    f_g: complex
    nu: float = 0.0

    def __post_init__(self):
        if not (np.isfinite(self.f_s) and np.isfinite(self.f_g)):
            raise ValueError("amplitudes must be finite")
        if not (math.isfinite(self.nu) and self.nu >= 0):
            raise ValueError("nu must be finite and >= 0")

    @classmethod
    def ideal(cls) -> "NodeResponse":
        return cls(1.0, -1.0, 0.0)

    @classmethod
    def from_scatter(cls, resp: ScatterResponse, transmission: float = 1.0) -> "NodeResponse":
        # the qubit enters in an equal superposition, so both noise levels weigh equally
        nu = 0.5 * (resp.nu_coupled + resp.nu_uncoupled)
        return cls(transmission * resp.f_uncoupled, transmission * resp.f_coupled, nu)

    def amplitudes(self) -> np.ndarray:
        return np.array([self.f_s, self.f_g], dtype=complex)


@dataclass(frozen=True)
class Outcome:
    label: str
    probability: float
    state: np.ndarray  # normalised two-qubit state before correction
    fidelity: float  # overlap with the outcome's ideal Bell state


@dataclass(frozen=True)
class LinkResult:
    fidelity: float
    success_prob: float
    per_outcome: tuple[Outcome, ...] = ()

    @property
    def figure_of_merit(self) -> float:
        return self.fidelity * self.success_prob


@dataclass(frozen=True)
class NetworkResult:
    n_nodes: int
    ghz_fidelity: float
    total_success: float
    round_success: tuple[float, ...] = ()

    @property
    def figure_of_merit(self) -> float:
        return self.ghz_fidelity * self.total_success

    @property
    def fidelity(self) -> float:
        return self.ghz_fidelity

    @property
    def success_prob(self) -> float:
        return self.total_success


def link_closed_form(node: NodeResponse) -> LinkResult:
    """Noiseless link figures for two identical nodes."""
    if node.nu != 0:
        raise ValueError("closed form holds for noiseless nodes only")
    p = (abs(node.f_s) ** 2 + abs(node.f_g) ** 2) / 2
    if p == 0:
        raise ZeroDivisionError("success probability is zero; fidelity undefined")
    return LinkResult(abs(node.f_s - node.f_g) ** 2 / (4 * p), p)


# -- single-round machinery on a small register ------------------------------------


def _embed(op: np.ndarray, pos: int, n: int) -> np.ndarray:
    out = np.array([[1.0 + 0j]])
    for q in range(n):
        out = np.kron(out, op if q == pos else np.eye(2))
    return out


def _bits(n: int) -> np.ndarray:
    idx = np.arange(2**n)
    return (idx[:, None] >> (n - 1 - np.arange(n))[None, :]) & 1


def _reset_pair(rho: np.ndarray, n: int, i: int, j: int) -> np.ndarray:
    """Trace out qubits i, j and put them back in the maximally mixed state."""
    t = rho.reshape((2,) * (2 * n))
    red = np.einsum(_reset_subscripts(n, i, j), t)
    out = np.einsum(_expand_subscripts(n, i, j), red, np.eye(2) / 2, np.eye(2) / 2)
    return out.reshape(2**n, 2**n)


def _letters(k):
    return [chr(ord("a") + x) for x in range(k)]


def _reset_subscripts(n, i, j):
    row = _letters(n)
    col = _letters(2 * n)[n:]
    col[i], col[j] = row[i], row[j]
    keep_r = [row[q] for q in range(n) if q not in (i, j)]
    keep_c = [col[q] for q in range(n) if q not in (i, j)]
    return "".join(row + col) + "->" + "".join(keep_r + keep_c)


def _expand_subscripts(n, i, j):
    row = _letters(n)
    col = _letters(2 * n)[n:]
    keep_r = [row[q] for q in range(n) if q not in (i, j)]
    keep_c = [col[q] for q in range(n) if q not in (i, j)]
    return (
        "".join(keep_r + keep_c)
        + ","
        + row[i] + col[i]
        + ","
        + row[j] + col[j]
        + "->"
        + "".join(row + col)
    )


def photon_round(
    rho: np.ndarray,
    n: int,
    i: int,
    j: int,
    node_i: NodeResponse,
    node_j: NodeResponse,
):
    """One heralding photon on qubits ``i`` (upper path) and ``j`` (lower path).

    Returns ``(plus, minus, noise)``: unnormalised pre-correction
    coherent states for each click plus the per-detector noise term.
    """
    bits = _bits(n)
    fi = node_i.amplitudes()[bits[:, i]]
    fj = node_j.amplitudes()[bits[:, j]]
    k_plus = (fi + fj) / 2
    k_minus = (fi - fj) / 2
    plus = k_plus[:, None] * rho * k_plus.conj()[None, :]
    minus = k_minus[:, None] * rho * k_minus.conj()[None, :]
    p_noise = (node_i.nu + node_j.nu) / 2
    noise = p_noise * _reset_pair(rho, n, i, j) if p_noise else np.zeros_like(rho)
    return plus, minus, noise


def _corrections(n: int, first: int, incoming: Sequence[int]):
    c_plus = _embed(SIGMA_Z, first, n)
    c_minus = _embed(SIGMA_Y, incoming[0], n)
    for q in incoming[1:]:
        c_minus = c_minus @ _embed(SIGMA_X, q, n)
    return c_plus, c_minus


def _apply_round(rho, n, i, j, node_i, node_j, first, incoming):
    plus, minus, noise = photon_round(rho, n, i, j, node_i, node_j)
    c_plus, c_minus = _corrections(n, first, incoming)
    out = c_plus @ (plus + noise) @ c_plus.conj().T
    out += c_minus @ (minus + noise) @ c_minus.conj().T
    return out


def _round_probability(before: float, after: float) -> float:
    p = after / before if before > 0 else 0.0
    if p > 1 + 1e-12:
        raise ModelValidityError(
            f"click probability {p:.4f} exceeds 1; shorten the detection window"
        )
    return p


def _plus_state(n: int) -> np.ndarray:
    v = np.full(2**n, 2 ** (-n / 2), dtype=complex)
    return np.outer(v, v.conj())


def _ghz_vector(n: int) -> np.ndarray:
    v = np.zeros(2**n, dtype=complex)
    v[0] = v[-1] = 1 / math.sqrt(2)
    return v


def link_entangle(node1: NodeResponse, node2: NodeResponse) -> LinkResult:
    """Exact two-node protocol with post-selection on either click."""
    rho0 = _plus_state(2)
    plus, minus, noise = photon_round(rho0, 2, 0, 1, node1, node2)
    # unnormalised Bell vectors; the 1/2 is applied once so the ideal case is exact
    targets = {
        "+i": np.array([1, 0, 0, -1], dtype=complex),
        "-i": np.array([0, 1, -1, 0], dtype=complex),
    }
    outcomes = []
    total_p = 0.0
    weighted_f = 0.0
    for label, coherent in (("+i", plus), ("-i", minus)):
        state = coherent + noise
        p = float(np.trace(state).real)
        total_p += p
        if p > 1e-300:  # denormal weights would overflow the normalisation
            overlap = float(np.real(targets[label].conj() @ state @ targets[label])) / 2
            weighted_f += overlap
            outcomes.append(Outcome(label, p, state / p, overlap / p))
        else:
            outcomes.append(Outcome(label, 0.0, state, 0.0))
    _round_probability(1.0, total_p)
    if total_p == 0:
        raise ZeroDivisionError("no clicks possible; fidelity undefined")
    return LinkResult(weighted_f / total_p, total_p, tuple(outcomes))


def _check_chain(links, n_nodes):
    if n_nodes < 2 or n_nodes % 2:
        raise ValueError(f"node count must be even and >= 2, got {n_nodes}")
    if n_nodes > MAX_NODES:
        raise ValueError(f"node count is limited to {MAX_NODES}")
    if len(links) != n_nodes - 1:
        raise ValueError(f"expected {n_nodes - 1} links, got {len(links)}")


def identical_links(node: NodeResponse, n_nodes: int):
    return [(node, node)] * (n_nodes - 1)


def ghz_chain_dense(links, n_nodes: int) -> NetworkResult:
    """Brute-force density-matrix tracker over all 2^N qubit configurations.

    Link ``k < N/2`` creates the Bell pair (2k, 2k+1); link ``N/2 + m``
    merges qubits (2m+1, 2m+2).  Memory grows as 4^N, so N <= 10.
    """
    _check_chain(links, n_nodes)
    if n_nodes > MAX_DENSE_NODES:
        raise ValueError(f"dense tracker is limited to {MAX_DENSE_NODES} nodes")
    n = n_nodes
    rho = _plus_state(n)
    rounds = []
    half = n // 2
    schedule = [(2 * k, 2 * k + 1, 2 * k, [2 * k + 1]) for k in range(half)]
    schedule += [(2 * m + 1, 2 * m + 2, 0, [2 * m + 2, 2 * m + 3]) for m in range(half - 1)]
    for (i, j, first, incoming), (n_i, n_j) in zip(schedule, links):
        before = float(np.trace(rho).real)
        rho = _apply_round(rho, n, i, j, n_i, n_j, first, incoming)
        rounds.append(_round_probability(before, float(np.trace(rho).real)))
    ghz = _ghz_vector(n)
    success = float(np.trace(rho).real)
    overlap = float(np.real(ghz.conj() @ rho @ ghz))
    return NetworkResult(n, overlap / success if success else 0.0, success, tuple(rounds))


def _pair_state(node_a: NodeResponse, node_b: NodeResponse) -> np.ndarray:
    return _apply_round(_plus_state(2), 2, 0, 1, node_a, node_b, 0, [1])


def ghz_chain(links, n_nodes: int) -> NetworkResult:
    """Exact GHZ-chain figures with a register that never exceeds four qubits.

    Qubits that no later photon addresses only see diagonal operations, so
    for the GHZ overlap they can be projected onto span{|s..s>, |g..g>}
    (one effective qubit) and, for the success probability, traced out.
    """
    _check_chain(links, n_nodes)
    half = n_nodes // 2
    pairs = [_pair_state(*links[k]) for k in range(half)]
    rounds = [float(np.trace(p).real) for p in pairs]
    for p in rounds:
        _round_probability(1.0, p)

    # fid: (effective frozen qubit, last qubit); trace: last qubit only
    fid = pairs[0]
    trace_state = np.einsum("ijik->jk", pairs[0].reshape(2, 2, 2, 2))
    success = rounds[0]
    for m in range(half - 1):
        pair = pairs[m + 1]
        node_i, node_j = links[half + m]

        # register (E, L, J, K): merge photon on L, J; incoming block J, K
        big = np.kron(fid, pair)
        big = _apply_round(big, 4, 1, 2, node_i, node_j, 0, [2, 3])
        keep = [0b0000, 0b0001, 0b1110, 0b1111]  # (E, L, J) all s or all g, K free
        fid = big[np.ix_(keep, keep)]

        small = np.kron(trace_state, pair)
        before = float(np.trace(small).real)
        # register (L, J, K); the Z lands on L, which is diagonal and traced out
        small = _apply_round(small, 3, 0, 1, node_i, node_j, 0, [1, 2])
        after = float(np.trace(small).real)
        p_round = _round_probability(before, after)
        rounds.append(p_round)
        trace_state = np.einsum("ijkijl->kl", small.reshape((2,) * 6))
        success = float(np.trace(trace_state).real)
    ghz = np.array([1, 0, 0, 1], dtype=complex) / math.sqrt(2)
    overlap = float(np.real(ghz.conj() @ fid @ ghz))
    return NetworkResult(n_nodes, overlap / success if success else 0.0, success, tuple(rounds))


def zeta(cqi, cas) -> float:
    """Ratio of figures of merit F*P, CQI over cascade."""
    denom = cas.figure_of_merit
    if denom == 0:
        raise ZeroDivisionError("cascaded figure of merit is zero")
    return cqi.figure_of_merit / denom
