# %% [markdown]
# # Thermal noise via the master equation
#
# Mode b leaks thermal photons through its intrinsic loss channel.  A weak
# coherent probe plus a sparse steady-state solve gives the reflection
# amplitude.  The undriven steady state gives the incoherent photon flux that
# can trigger a false detector click.

# %%
from cqinet import DeviceParams, FockConfig, cqi_response, solve_response, thermal_leak_flux
from cqinet.lindblad import DriveSpec, truncation_check

p = DeviceParams()

# %% At zero temperature the master equation reproduces the closed form
for coupled in (True, False):
    me = solve_response(p, 0.0, coupled, FockConfig(3, 3))
    print(f"coupled={coupled}: ME {me.real:+.6f}, closed form {cqi_response(p, 0, coupled).real:+.6f}")

# %% Heating the intrinsic bath
for n_th in (0.1, 0.2, 0.5):
    hot = p.with_(n_th=n_th)
    f_g = solve_response(hot, 0.0, True)
    flux = thermal_leak_flux(hot, 0.0, True)
    print(f"n_th={n_th}: f_g={f_g.real:+.4f}, leaked flux={flux:.3e} per unit time")

# %% Is the default Fock truncation good enough?
report = truncation_check(p.with_(n_th=0.5), DriveSpec(1e-3), FockConfig(3, 4))
print("truncation adequate:", report.passed, "refined dims:", report.refined_dims)
