# %% [markdown]
# # GHZ chains over N nodes
#
# The first N/2 photons build Bell pairs and the remaining N/2 - 1 photons
# fuse neighbouring pairs.  The exact tracker keeps at most four qubits
# alive, because qubits that no later photon touches can be compressed.
# zeta compares the F*P figure of merit of the two interfaces.

# %%

from cqinet import NodeResponse, ghz_chain, ghz_chain_dense, identical_links
from cqinet.sweeps import iter_scaling

# %% Compressed and dense trackers agree
node = NodeResponse(0.45, -0.8, 0.01)
for n in (2, 4, 6):
    a = ghz_chain(identical_links(node, n), n)
    b = ghz_chain_dense(identical_links(node, n), n)
    print(f"N={n}: F={a.ghz_fidelity:.6f} (dense {b.ghz_fidelity:.6f}), P={a.total_success:.6f}")

# %% Exact tracking vs the independent-link product rule
for method in ("exact", "product"):
    rows = list(iter_scaling((2, 4, 6, 8, 10), (0.1,), method=method))
    print(method, " ".join(f"{r.zeta:.4f}" for r in rows))

# %% Antisymmetric amplitudes (f_s = -f_g) compose exactly
f = 0.8
for n in (2, 4, 6, 8):
    res = ghz_chain(identical_links(NodeResponse(f, -f), n), n)
    print(f"N={n}: F={res.ghz_fidelity:.12f}, P={res.total_success:.6f}, |f|^(2(N-1))={f ** (2 * (n - 1)):.6f}")
