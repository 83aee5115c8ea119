# %% [markdown]
# # Free acceleration and the rated point
#
# The 100 hp machine started direct on line from an ideal 460 V source,
# then checked against its steady-state equivalent circuit.

# %%
import math

import matplotlib.pyplot as plt
import numpy as np

from imdrive.machine import equivalent_circuit_torque, params_from_nameplate, slip_at_torque
from imdrive.scenario import SimulationConfig, run_simulation

p = params_from_nameplate()
v_phase = p.v_rated_ll / math.sqrt(3)
print(f"lm = {p.lm * 1e3:.4f} mH, lls = llr = {p.lls * 1e6:.1f} uH")

# %%
run = run_simulation(SimulationConfig(source="ideal", t_end=2.0, load_steps=()))
t = run.t
fig, ax = plt.subplots(3, 1, sharex=True, figsize=(8, 7))
ax[0].plot(t, run.series["ia"], lw=0.4)
ax[0].set_ylabel("ia (A)")
ax[1].plot(t, run.series["te"], lw=0.6)
ax[1].set_ylabel("Te (N m)")
ax[2].plot(t, run.series["speed_pu"])
ax[2].set(ylabel="speed (pu)", xlabel="t (s)")
fig.tight_layout()
plt.show()
print("final speed", run.series["speed_pu"][-1])

# %% [markdown]
# ## Torque-slip curve
#
# The equivalent circuit puts rated torque (about 403 N m) at the nameplate
# slip; the dynamic model should agree once loaded.

# %%
slip = np.linspace(1e-4, 1.0, 2000)
te = [equivalent_circuit_torque(s, v_phase, p) for s in slip]
plt.plot(1 - slip, te)
plt.xlabel("speed (pu)")
plt.ylabel("Te (N m)")
plt.show()

for load in (100.0, 200.0, 400.0):
    print(f"{load:5.0f} N m -> slip {slip_at_torque(load, v_phase, p):.4f}")

# %%
loaded = run_simulation(SimulationConfig(source="ideal", t_end=3.0, load_steps=((1.5, 400.0),)))
sel = loaded.t >= 2.5
print("dynamic slip at 400 N m:", 1 - loaded.series["speed_pu"][sel].mean())
