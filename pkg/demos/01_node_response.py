# %% [markdown]
# # Single-node response
#
# A cooperative node reflects a probe off mode a.  Mode a is converted into
# mode b, and a qubit sits in mode b.  The reflected amplitude depends on the
# qubit state, and that contrast is what heralded entanglement relies on.
# Here we compare it with the cascaded chain: converter, qubit cavity, converter.

# %%
import numpy as np

from cqinet import DeviceParams, cas_response, cooperativities, cqi_response, matched_coupling

p = DeviceParams()  # reference rates, units of the qubit decay rate
c = cooperativities(p)
print(f"C_ab = {c.c_ab:.4f}, C_bq = {c.c_bq:.3f}")

# %% Resonant amplitudes for both qubit states
for name, func in (("CQI", cqi_response), ("CAS", cas_response)):
    f_s, f_g = func(p, 0.0, False), func(p, 0.0, True)
    print(f"{name}: f_s = {f_s.real:+.4f}, f_g = {f_g.real:+.4f}")

# %% Detuning dependence: the qubit only matters near the bare resonance
for delta in np.linspace(-15, 15, 7):
    f_s, f_g = cqi_response(p, delta, False), cqi_response(p, delta, True)
    print(f"delta={delta:+6.1f}  |f_s|={abs(f_s):.3f}  |f_g|={abs(f_g):.3f}  "
          f"phase gap={np.angle(f_g / f_s):+.3f}")

# %% Impedance matching: choose G so that f_s = -f_g exactly
g = matched_coupling(p)
q = p.with_(g_conv=g)
print(f"matched G = {g:.4f}: f_s = {cqi_response(q, 0, False).real:+.4f}, "
      f"f_g = {cqi_response(q, 0, True).real:+.4f}")
