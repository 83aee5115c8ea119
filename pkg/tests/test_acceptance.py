"""Exit criteria for the drive toolkit, one test per criterion."""
import math
import time

import numpy as np
import pytest

from imdrive import analysis
from imdrive.inverter import DcBus, phase_voltages
from imdrive.machine import equivalent_circuit_torque, params_from_nameplate
from imdrive.scenario import SimulationConfig, run_simulation, switching_sweep, write_outputs
from imdrive.solver import integrate
from imdrive.svpwm import (
    ModulatorConfig,
    SpaceVector,
    ThreePhase,
    build_sequence,
    clarke_transform,
    dwell_times,
    sector_of,
    sequence_for,
)

FSW = (1000.0, 3500.0, 7000.0)
FO = 60.0
SECTOR_TABLE = {
    1: {(1, 0, 0), (1, 1, 0), (1, 1, 1), (0, 0, 0)},
    2: {(1, 1, 0), (0, 1, 0), (0, 0, 0), (1, 1, 1)},
    3: {(0, 1, 0), (0, 1, 1), (1, 1, 1), (0, 0, 0)},
    4: {(0, 1, 1), (0, 0, 1), (0, 0, 0), (1, 1, 1)},
    5: {(0, 0, 1), (1, 0, 1), (1, 1, 1), (0, 0, 0)},
    6: {(1, 0, 1), (1, 0, 0), (0, 0, 0), (1, 1, 1)},
}


@pytest.fixture(scope="module")
def sweep():
    t0 = time.perf_counter()
    report = switching_sweep(SimulationConfig(), FSW)
    report.elapsed = time.perf_counter() - t0
    return report


def _vsi(sweep):
    return [sweep.runs[f"svpwm_{f:g}"] for f in FSW]


def _spectra(run, window):
    cfg = run.config
    sv = analysis.spectrum(run.phase_voltage(*window), cfg.fo)
    si = analysis.spectrum(run.waveform("ia").window(*window), cfg.fo)
    return sv, si


def test_01_volt_second_balance(criterion):
    cfg = ModulatorConfig(fsw=7000.0, vdc=625.0)
    bus = DcBus(cfg.vdc)
    rng = np.random.default_rng(2024)
    mags = cfg.vdc / math.sqrt(3) * np.sqrt(rng.uniform(0.0, 1.0, 1000))
    alphas = rng.uniform(0.0, 2 * math.pi, 1000)
    t0 = time.perf_counter()
    worst = 0.0
    for mag, alpha in zip(mags, alphas):
        ref = SpaceVector.from_polar(mag, alpha)
        seq = sequence_for(ref, cfg)
        vq = vd = 0.0
        for state, dur in seq.segments:
            sv = clarke_transform(ThreePhase(*phase_voltages(state, bus)))
            vq += sv.vq * dur
            vd += sv.vd * dur
        err = math.hypot(vq / seq.period - ref.vq, vd / seq.period - ref.vd) / max(mag, 1e-9)
        worst = max(worst, err)
    elapsed = time.perf_counter() - t0
    ok = worst < 1e-3 and elapsed < 1.0
    criterion("1", "volt-second balance", ok, f"max rel err {worst:.2e} (< 1e-3), {elapsed:.2f} s")
    assert ok


def test_02_switching_vector_table(criterion):
    cfg = ModulatorConfig(fsw=7000.0, vdc=625.0)
    t0 = time.perf_counter()
    problems = []
    for sector in range(1, 7):
        for theta in np.linspace(0.01, math.pi / 3 - 0.01, 25):
            for mag in (0.2 * cfg.vm, 0.8 * cfg.vm):
                d = dwell_times(mag, theta, cfg)
                seq = build_sequence(sector, d)
                used = {tuple(s) for s in seq.states}
                if used != SECTOR_TABLE[sector]:
                    problems.append((sector, used))
                for a, b in zip(seq.states, seq.states[1:]):
                    if sum(x != y for x, y in zip(a, b)) != 1:
                        problems.append((sector, a, b))
        # the modulation chain picks this sector for angles inside it
        if sector_of((sector - 0.5) * math.pi / 3)[0] != sector:
            problems.append(("sector_of", sector))
    elapsed = time.perf_counter() - t0
    ok = not problems and elapsed < 1.0
    criterion("2", "sector vector table conformance, one-leg transitions", ok,
              f"{len(problems)} violations over 6 sectors, {elapsed:.2f} s")
    assert ok


def test_03_rated_operating_point(criterion):
    p = params_from_nameplate()
    shaft = 74_600 / (0.9823 * 2 * math.pi * 60 / 2)
    te = equivalent_circuit_torque(0.0177, 460 / math.sqrt(3), p)
    oracle_ok = abs(te - shaft) <= 0.05 * shaft
    # starting torque (~140 N·m) is below 400 N·m, so load after run-up
    cfg = SimulationConfig(source="ideal", t_end=3.0, load_steps=((1.5, 400.0),))
    run = run_simulation(cfg)
    slip = 1.0 - run.series["speed_pu"][run.t >= 2.5].mean()
    dyn_ok = abs(slip - 0.0177) <= 0.002
    criterion("3", "rated operating point", oracle_ok and dyn_ok,
              f"oracle {te:.1f} N·m vs {shaft:.1f} N·m (5%); dynamic slip {slip:.5f} (0.0177 ± 0.002)")
    assert oracle_ok and dyn_ok


def test_04_free_acceleration(criterion):
    cfg = SimulationConfig(source="ideal", t_end=3.2, load_steps=())
    run_simulation(cfg.replace(t_end=0.01))  # compile outside the timing
    t0 = time.perf_counter()
    run = run_simulation(cfg)
    elapsed = time.perf_counter() - t0
    speed = run.series["speed_pu"]
    settled = speed[run.t >= 3.0].mean()
    ok = abs(settled - 1.0) <= 1e-3 and abs(speed[-1] - 1.0) <= 1e-3 and elapsed < 3.0
    criterion("4", "free acceleration", ok,
              f"speed {settled:.6f} pu (1.000 ± 0.001), {elapsed:.2f} s for 3.2 s simulated")
    assert ok


def test_05_ripple_monotonic(sweep, criterion):
    ripple = [r.metrics["ripple_pp"] for r in _vsi(sweep)]
    ok = all(a >= 1.2 * b for a, b in zip(ripple, ripple[1:]))
    criterion("5", "ripple decreases with fsw (>= 20% steps)", ok,
              ", ".join(f"{f:g} Hz {x:.2f} A" for f, x in zip(FSW, ripple)))
    assert ok


def test_06_harmonic_attenuation(sweep, criterion):
    fails = []
    for run in _vsi(sweep):
        sv, si = _spectra(run, run.config.steady_window)
        v1, i1 = sv.magnitude_at(FO), si.magnitude_at(FO)
        for f, vn in analysis.dominant_components(sv, 10, exclude_below=1.5 * FO):
            if not vn / v1 > si.magnitude_at(f) / i1:
                fails.append(f"{run.config.fsw:g} Hz run @ {f:g} Hz: "
                             f"V {vn / v1:.4f} vs I {si.magnitude_at(f) / i1:.4f}")
    criterion("6", "Vn/V1 > In/I1 on top-10 voltage bins", not fails,
              "all bins hold" if not fails else "; ".join(fails))
    assert not fails


def test_07_thd_ordering(sweep, criterion):
    runs = _vsi(sweep)
    order_ok = all(r.metrics["thd_i"] < r.metrics["thd_v"] for r in runs)
    band = (FO, min(FSW))
    sub = []
    for r in runs:
        sv, _ = _spectra(r, r.config.steady_window)
        sub.append(analysis.thd(sv, FO, band=band))
    band_ok = sub[-1] <= 1.05 * sub[0]
    detail = "; ".join(
        f"{r.config.fsw:g} Hz THDi {r.metrics['thd_i']:.4f} THDv {r.metrics['thd_v']:.4f} "
        f"sub-band THDv {s:.4f}" for r, s in zip(runs, sub))
    criterion("7", "THD(ia) < THD(vas); sub-switching THD(vas) falls", order_ok and band_ok, detail)
    assert order_ok and band_ok


def test_08_sideband_structure(sweep, criterion):
    out = []
    ok = True
    for run in _vsi(sweep):
        sv, _ = _spectra(run, run.config.steady_window)
        (f, _), = analysis.dominant_components(sv, 1, exclude_below=1.5 * FO)
        fsw = run.config.fsw
        n = max(1, round(f / fsw))
        hit = abs(f - n * fsw) <= 4 * FO
        ok &= hit
        out.append(f"{fsw:g} Hz: peak {f:g} Hz ({f - n * fsw:+g} Hz from {n}·fsw)")
    criterion("8", "largest harmonic within ±4·fo of k·fsw", ok, "; ".join(out))
    assert ok


def test_09_torque_spectrum(sweep, criterion):
    run = sweep.runs["svpwm_7000"]
    # the pre-step window is at no load, where the DC torque is ~0
    w = run.config.loaded_window
    st = analysis.spectrum(run.waveform("te").window(*w), FO)
    ratio = st.mags[1:].max() / st.mags[0]
    ok = ratio < 0.1
    criterion("9", "torque non-DC bins < 10% of DC (7 kHz, loaded steady state)", ok,
              f"DC {st.mags[0]:.1f} N·m, worst bin {st.freqs[1 + st.mags[1:].argmax()]:g} Hz "
              f"ratio {ratio:.4f}")
    assert ok


def test_10a_vsi_dip_exceeds_ideal(sweep, criterion):
    ideal = sweep.runs["ideal"].metrics["speed_dip"]
    dips = [r.metrics["speed_dip"] for r in _vsi(sweep)]
    ok = all(d > ideal for d in dips)
    criterion("10a", "speed dip VSI > ideal", ok,
              f"ideal {ideal:.5f} pu; " + ", ".join(f"{f:g} Hz {d:.5f}" for f, d in zip(FSW, dips)))
    assert ok


def test_10b_settled_speeds(sweep, criterion):
    ideal = sweep.runs["ideal"].metrics["settled_speed"]
    vsi = [r.metrics["settled_speed"] for r in _vsi(sweep)]
    ok = abs(ideal - 0.974) <= 0.005 and all(abs(v - 0.971) <= 0.005 for v in vsi)
    criterion("10b", "settled speed 0.974 (ideal) / 0.971 (VSI) ± 0.005 pu", ok,
              f"ideal {ideal:.5f}; " + ", ".join(f"{f:g} Hz {v:.5f}" for f, v in zip(FSW, vsi)))
    assert ok


def test_10c_dip_difference(sweep, criterion):
    ideal = sweep.runs["ideal"].metrics["speed_dip"]
    diffs = [r.metrics["speed_dip"] - ideal for r in _vsi(sweep)]
    ok = all(0.0005 <= d <= 0.01 for d in diffs)
    criterion("10c", "dip difference in [0.0005, 0.01] pu", ok,
              ", ".join(f"{f:g} Hz {d:.5f}" for f, d in zip(FSW, diffs)))
    assert ok


def test_11_rk4_order(criterion):
    def err(dt):
        y = integrate(lambda t, y: -y, [1.0], 0.0, dt, int(round(1 / dt)))
        return abs(y[-1, 0] - math.exp(-1.0))

    ratio = err(0.02) / err(0.01)
    ok = 12.0 <= ratio <= 20.0
    criterion("11", "RK4 error ratio on halving dt", ok, f"{ratio:.3f} (in [12, 20])")
    assert ok


def test_12_deterministic_sweep(sweep, criterion, tmp_path):
    write_outputs(sweep, tmp_path / "first")
    again = switching_sweep(SimulationConfig(), FSW)
    write_outputs(again, tmp_path / "second")
    files = sorted(p.relative_to(tmp_path / "first") for p in (tmp_path / "first").rglob("*.csv"))
    differ = [str(f) for f in files
              if (tmp_path / "first" / f).read_bytes() != (tmp_path / "second" / f).read_bytes()]
    ok = bool(files) and not differ
    criterion("12", "byte-identical sweep CSVs", ok,
              f"{len(files)} CSV files compared, {len(differ)} differ; sweep took {sweep.elapsed:.1f} s")
    assert ok
    assert sweep.elapsed < 60.0
