# %% [markdown]
# # Heralded entanglement between two nodes
#
# Each node's qubit starts in (|s> + |g>)/sqrt(2).  A photon is split towards
# both nodes, reflected, recombined on a beam splitter, and detected.  Either
# click heralds a Bell state up to a known single-qubit correction.  The same
# bookkeeping handles noise clicks.

# %%
import numpy as np

from cqinet import DeviceParams, NodeResponse, link_closed_form, link_entangle
from cqinet.sweeps import link_result, optimize_detuning

# %% Ideal amplitudes give a perfect, deterministic link
ideal = link_entangle(NodeResponse.ideal(), NodeResponse.ideal())
print(f"ideal: F={ideal.fidelity}, P={ideal.success_prob}")

# %% Realistic amplitudes: the brute-force tracker matches the closed form
node = NodeResponse(0.4872, -0.7527)
print(link_entangle(node, node).fidelity, link_closed_form(node).fidelity)

# %% Noise clicks pull the heralded state towards the maximally mixed one
for nu in np.linspace(0.0, 0.1, 5):
    res = link_entangle(NodeResponse(0.4872, -0.7527, nu), NodeResponse(0.4872, -0.7527, nu))
    print(f"nu={nu:.3f}: F={res.fidelity:.4f}, P={res.success_prob:.4f}")

# %% Cooperative vs cascaded at a hot operating point
hot = DeviceParams(n_th=0.3)
for scheme in ("cqi", "cas"):
    r = link_result(hot, 0.0, scheme)
    print(f"{scheme}: F={r.fidelity:.4f}, P={r.success_prob:.4f}")
delta, f_best = optimize_detuning(hot, xtol=1e-2)
print(f"best CQI probe detuning {delta:.3f} gives F={f_best:.4f}")
