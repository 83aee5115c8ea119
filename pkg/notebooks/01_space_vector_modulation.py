# %% [markdown]
# # Space-vector modulation
#
# How a rotating reference becomes a seven-segment switching pattern, and
# what the switched phase voltage looks like once it leaves the inverter.

# %%
import math

import matplotlib.pyplot as plt
import numpy as np

from imdrive import analysis
from imdrive.inverter import DcBus, state_table
from imdrive.scenario import SimulationConfig, run_simulation
from imdrive.svpwm import ModulatorConfig, reference_vector, sector_of, sequence_for

cfg = ModulatorConfig(fsw=1000.0, vdc=625.0, mod_index=0.9, fo=60.0)
print(f"Ts = {cfg.ts * 1e3:.3f} ms, |Vref| = {cfg.vref:.1f} V, "
      f"linear limit Vdc/sqrt(3) = {cfg.vdc / math.sqrt(3):.1f} V")

# %% [markdown]
# The reference asks for slightly more than the linear limit, so near the
# sector centres the zero-vector time runs out and the active times are
# scaled back together.

# %%
for t in (0.0, 1 / 720, 1 / 360):
    ref = reference_vector(t, cfg)
    sector, theta = sector_of(ref.alpha)
    seq = sequence_for(ref, cfg)
    pattern = " ".join(f"{''.join(map(str, s))}:{d * 1e6:.0f}us" for s, d in seq.segments)
    print(f"t={t * 1e3:5.2f} ms sector {sector} theta={math.degrees(theta):5.1f} deg  {pattern}")

# %% [markdown]
# Volt-seconds over one period reproduce the reference.

# %%
table = state_table(DcBus(cfg.vdc))
ref = reference_vector(0.4e-3, cfg)
seq = sequence_for(ref, cfg)
avg = sum(table[s.index, 3:5] * d for s, d in seq.segments) / seq.period
print(f"reference ({ref.vq:.4f}, {ref.vd:.4f})  average ({avg[0]:.4f}, {avg[1]:.4f})")

# %% [markdown]
# ## The switched phase voltage

# %%
run = run_simulation(SimulationConfig(fsw=1000.0, t_end=0.1, load_steps=()))
w = run.phase_voltage(0.05, 0.1)
amp, _ = analysis.fundamental(w, 60.0)
print(f"fundamental {amp:.1f} V peak, THD {analysis.thd(analysis.spectrum(w, 60.0), 60.0):.3f}")

fig, ax = plt.subplots(2, 1, figsize=(8, 6))
ax[0].plot(w.t * 1e3, w.samples, lw=0.5)
ax[0].set(xlabel="t (ms)", ylabel="van (V)", xlim=(50, 67))
sp = analysis.spectrum(w, 60.0)
ax[1].stem(sp.freqs, sp.mags, markerfmt=" ", basefmt=" ")
ax[1].set(xlabel="f (Hz)", ylabel="|V| (V)", xlim=(0, 5000))
fig.tight_layout()
plt.show()
