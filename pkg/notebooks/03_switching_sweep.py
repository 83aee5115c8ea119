# %% [markdown]
# # Switching-frequency sweep
#
# The same machine fed from an ideal source and from the inverter at 1, 3.5
# and 7 kHz. Current ripple and the current spectrum clean up as the
# switching frequency rises; the voltage keeps roughly the same broadband
# distortion, it just moves upward in frequency.

# %%
import matplotlib.pyplot as plt

from imdrive import analysis
from imdrive.scenario import SimulationConfig, format_report, switching_sweep

report = switching_sweep(SimulationConfig(), [1000.0, 3500.0, 7000.0])
print(format_report(report))

# %%
window = SimulationConfig().steady_window
fig, ax = plt.subplots(len(report.runs), 1, sharex=True, figsize=(8, 8))
for a, (label, run) in zip(ax, report.runs.items()):
    w = run.waveform("ia").window(window[0], window[0] + 1 / 30)
    a.plot(w.t, w.samples, lw=0.6)
    a.set_ylabel(f"ia (A)\n{label}")
ax[-1].set_xlabel("t (s)")
fig.tight_layout()
plt.show()

# %% [markdown]
# ## Where the harmonics sit
#
# Sidebands cluster around multiples of the switching frequency, and the
# machine's leakage inductance attenuates the current harmonics relative to
# the voltage ones.

# %%
fig, ax = plt.subplots(3, 1, figsize=(8, 8))
for a, label in zip(ax, ("svpwm_1000", "svpwm_3500", "svpwm_7000")):
    run = report.runs[label]
    sv = analysis.spectrum(run.phase_voltage(*window), 60.0)
    si = analysis.spectrum(run.waveform("ia").window(*window), 60.0)
    a.semilogy(sv.freqs, sv.mags / sv.magnitude_at(60.0), lw=0.6, label="Vn/V1")
    a.semilogy(si.freqs, si.mags / si.magnitude_at(60.0), lw=0.6, label="In/I1")
    a.set(xlim=(0, 16000), ylim=(1e-5, 1.5), title=label)
    a.legend()
ax[-1].set_xlabel("f (Hz)")
fig.tight_layout()
plt.show()

for label in ("svpwm_1000", "svpwm_3500", "svpwm_7000"):
    run = report.runs[label]
    print(label, analysis.dominant_components(analysis.spectrum(run.phase_voltage(*window), 60.0),
                                              4, exclude_below=90.0))
