# %% [markdown]
# # Load step
#
# 200 N m applied at 3.26 s. The inverter-fed machine dips slightly further
# than the ideal-source one.

# %%
import matplotlib.pyplot as plt

from imdrive.scenario import SimulationConfig, run_simulation

base = SimulationConfig()
runs = {cfg.label: run_simulation(cfg)
        for cfg in (base.replace(source="ideal"), base.replace(fsw=1000.0), base)}

# %%
fig, ax = plt.subplots(2, 1, sharex=True, figsize=(8, 6))
for label, run in runs.items():
    ax[0].plot(run.t, run.series["speed_pu"], lw=0.8, label=label)
    ax[1].plot(run.t, run.series["te"], lw=0.3, label=label)
ax[0].set(ylabel="speed (pu)", xlim=(3.0, 4.0), ylim=(0.97, 1.005))
ax[1].set(ylabel="Te (N m)", xlabel="t (s)")
ax[0].legend()
fig.tight_layout()
plt.show()

# %%
for label, run in runs.items():
    m = run.metrics
    print(f"{label:12s} dip {m['speed_dip']:.5f} pu  settled {m['settled_speed']:.5f} pu  "
          f"torque ripple {m['torque_ripple_ratio']:.3f}")
