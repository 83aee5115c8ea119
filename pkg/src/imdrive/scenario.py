"""
End-to-end drive runs: modulator, inverter, machine and integrator wired
together, plus the switching-frequency sweep and file outputs.
"""
from __future__ import annotations

import configparser
import dataclasses
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from imdrive import analysis
from imdrive.errors import InvalidInputError
from imdrive.inverter import DcBus, state_table
from imdrive.machine import MachineParams, Nameplate, outputs, params_from_nameplate
from imdrive.solver import integrate_machine
from imdrive.svpwm import ModulatorConfig, ThreePhase, reference_vector, sequence_for

log = logging.getLogger(__name__)

IDEAL_DT = 1.0 / (10 * 7000.0)
SERIES = ("t", "ia", "ib", "ic", "vas", "te", "speed_pu")


class ConfigError(InvalidInputError):
    """Configuration rejected before a run starts."""


@dataclass(frozen=True)
class SimulationConfig:
    """
    One drive run.

    ``dt = None`` selects a tenth of the switching period for SVPWM runs and
    ``1/70 kHz`` for the ideal source. ``v_ll_rms = None`` feeds the ideal
    source at the machine's rated voltage. The windows (start, stop) in
    seconds drive the derived metrics; ``loaded_window`` must lie after the
    last load step for the torque spectrum to have a DC component.
    """
    source: str = "svpwm"
    fsw: float = 7000.0
    vdc: float = 625.0
    mod_index: float = 0.9
    fo: float = 60.0
    t_end: float = 4.0
    load_steps: tuple = ((3.26, 200.0),)
    dt: float | None = None
    machine: MachineParams = field(default_factory=params_from_nameplate)
    v_ll_rms: float | None = None
    steady_window: tuple = (2.7, 3.2)
    dip_window: tuple = (3.26, 3.8)
    settle_window: tuple = (3.9, 4.0)
    loaded_window: tuple = (3.5, 4.0)

    def __post_init__(self):
        object.__setattr__(self, "load_steps",
                           tuple((float(t), float(tq)) for t, tq in self.load_steps))
        self.validate()

    def validate(self):
        if self.source not in ("ideal", "svpwm"):
            raise ConfigError(f"source must be 'ideal' or 'svpwm', got {self.source!r}")
        if not self.t_end > 0:
            raise ConfigError(f"t_end must be positive, got {self.t_end}")
        if self.dt is not None and not self.dt > 0:
            raise ConfigError(f"dt must be positive, got {self.dt}")
        if not self.fo > 0:
            raise ConfigError(f"fo must be positive, got {self.fo}")
        times = [t for t, _ in self.load_steps]
        if any(b <= a for a, b in zip(times, times[1:])):
            raise ConfigError(f"load step times must increase strictly: {times}")
        if self.source == "svpwm":
            try:
                self.modulator
            except InvalidInputError as exc:
                raise ConfigError(str(exc)) from exc
            if math.floor(self.t_end * self.fsw + 1e-9) < 1:
                raise ConfigError("t_end shorter than one switching period")

    @property
    def step(self) -> float:
        if self.dt is not None:
            return self.dt
        return 1.0 / (10.0 * self.fsw) if self.source == "svpwm" else IDEAL_DT

    @property
    def n_steps(self) -> int:
        return int(math.floor(self.t_end / self.step + 1e-9))

    @property
    def modulator(self) -> ModulatorConfig:
        return ModulatorConfig(self.fsw, self.vdc, self.mod_index, self.fo)

    @property
    def label(self) -> str:
        return "ideal" if self.source == "ideal" else f"svpwm_{self.fsw:g}"

    def replace(self, **changes) -> "SimulationConfig":
        return dataclasses.replace(self, **changes)


@dataclass
class RunResult:
    config: SimulationConfig
    series: dict
    states: np.ndarray
    gates: GateSchedule | None
    metrics: dict

    @property
    def t(self) -> np.ndarray:
        return self.series["t"]

    @property
    def n_sequences(self) -> int:
        return 0 if self.gates is None else self.gates.n_periods

    def waveform(self, name: str) -> analysis.Waveform:
        return analysis.Waveform(self.series[name], 1.0 / self.config.step, 0.0)

    def phase_voltage(self, start: float, stop: float) -> analysis.Waveform:
        """
        Applied phase-a voltage over [start, stop) at full fidelity.

        For SVPWM this is the switched waveform rebuilt from the gate
        schedule rather than the per-step ``vas`` series, which is limited
        to the integration grid. The ideal source is evaluated on the grid.
        """
        if self.gates is not None:
            return self.gates.phase_voltage(start, stop)
        cfg = self.config
        v_ll = cfg.machine.v_rated_ll if cfg.v_ll_rms is None else cfg.v_ll_rms
        t = self.waveform("t").window(start, stop).samples
        return analysis.Waveform(ideal_source_voltages(t, v_ll, cfg.fo)[0], 1.0 / cfg.step, start)


@dataclass(frozen=True)
class Assertion:
    name: str
    passed: bool
    detail: str


@dataclass
class ComparisonReport:
    rows: list
    assertions: list
    runs: dict

    @property
    def passed(self) -> bool:
        return all(a.passed for a in self.assertions)


def load_profile(t, steps):
    """Load torque: zero before the first step, then the latest step's value."""
    if not steps:
        return np.zeros_like(t, dtype=float) if np.ndim(t) else 0.0
    times = np.array([s[0] for s in steps])
    torques = np.concatenate(([0.0], [s[1] for s in steps]))
    idx = np.searchsorted(times, t, side="right")
    out = torques[idx]
    return out if np.ndim(t) else float(out)


def ideal_source_voltages(t, v_ll_rms: float, fo: float):
    """Balanced positive-sequence phase voltages with phase a on cosine."""
    vp = v_ll_rms * math.sqrt(2.0) / math.sqrt(3.0)
    th = 2.0 * math.pi * fo * np.asarray(t, dtype=float)
    a = vp * np.cos(th)
    b = vp * np.cos(th - 2.0 * math.pi / 3.0)
    c = vp * np.cos(th + 2.0 * math.pi / 3.0)
    if np.ndim(t) == 0:
        return ThreePhase(float(a), float(b), float(c))
    return a, b, c


@dataclass(frozen=True)
class GateSchedule:
    """
    The switching sequences of a run, one per switching period.

    ``starts`` and ``states`` are (n_periods, 7): segment start offsets
    within the period and switch-state indices into ``table``. Instants
    past the last full period reuse its sequence.
    """
    starts: np.ndarray
    states: np.ndarray
    ts: float
    table: np.ndarray

    @classmethod
    def build(cls, cfg: SimulationConfig) -> "GateSchedule":
        mod = cfg.modulator
        ts = mod.ts
        n_per = int(math.floor(cfg.t_end * cfg.fsw + 1e-9))
        starts = np.empty((n_per, 7))
        states = np.empty((n_per, 7), dtype=np.int8)
        for k in range(n_per):
            seq = sequence_for(reference_vector(k * ts, mod), mod)
            starts[k] = seq.starts
            states[k] = [s.index for s, _ in seq.segments]
        return cls(starts, states, ts, state_table(DcBus(cfg.vdc)))

    @property
    def n_periods(self) -> int:
        return self.states.shape[0]

    def state_index(self, t) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        k = np.minimum(np.floor(t / self.ts).astype(np.int64), self.n_periods - 1)
        t_in = np.mod(t - k * self.ts, self.ts)
        seg = np.count_nonzero(self.starts[k] <= t_in[:, None], axis=1) - 1
        return self.states[k, np.maximum(seg, 0)]

    def phase_voltage(self, start: float, stop: float, per_period: int = 100) -> analysis.Waveform:
        """
        Switched phase-a voltage over [start, stop).

        Sampled ``per_period`` times per switching period at sub-interval
        midpoints, so no sample sits on a period boundary.
        """
        fs = per_period / self.ts
        n = int(round((stop - start) * fs))
        t = start + (np.arange(n) + 0.5) / fs
        return analysis.Waveform(self.table[self.state_index(t), 0], fs, start)


def step_voltage(v_stage: np.ndarray) -> np.ndarray:
    """
    Voltage delivered over each step, labelled at the step start.

    RK4 weights its stage inputs 1/6, 4/6, 1/6, so this is what the machine
    integrates. Point samples on the grid would alias the PWM pattern: the
    period start always falls on V0. The final grid point has no step and
    keeps its point sample.
    """
    out = np.empty(v_stage.size // 2 + 1)
    out[:-1] = (v_stage[:-1:2] + 4.0 * v_stage[1::2] + v_stage[2::2]) / 6.0
    out[-1] = v_stage[-1]
    return out


def run_simulation(cfg: SimulationConfig) -> RunResult:
    """
    Direct-on-line start from rest, recorded at every integration step.

    Currents, torque and speed are states at the grid instants; ``vas`` is
    the per-step delivered voltage from :func:`step_voltage`.
    """
    cfg.validate()
    p = cfg.machine
    dt, n = cfg.step, cfg.n_steps
    t_stage = np.arange(2 * n + 1) * (0.5 * dt)
    if cfg.source == "svpwm":
        gates = GateSchedule.build(cfg)
        idx = gates.state_index(t_stage)
        van, vq, vd = (gates.table[idx, c] for c in (0, 3, 4))
    else:
        v_ll = p.v_rated_ll if cfg.v_ll_rms is None else cfg.v_ll_rms
        a, b, c = ideal_source_voltages(t_stage, v_ll, cfg.fo)
        van, vq, vd = a, (2 * a - b - c) / 3.0, -(b - c) / math.sqrt(3.0)
        gates = None
    tl = load_profile(t_stage, cfg.load_steps)
    log.info("running %s: %d steps of %.4g s", cfg.label, n, dt)
    states = integrate_machine(np.zeros(5), vq, vd, tl, dt, p.coeffs())
    out = outputs(states, p)
    series = {
        "t": t_stage[::2],
        "ia": out["ia"], "ib": out["ib"], "ic": out["ic"],
        "vas": step_voltage(van),
        "te": out["te"], "speed_pu": out["speed_pu"],
    }
    result = RunResult(cfg, series, states, gates, {})
    result.metrics = compute_metrics(result)
    return result


def _covered(cfg: SimulationConfig, window) -> bool:
    return 0.0 <= window[0] < window[1] <= cfg.t_end + 1e-12


def compute_metrics(result: RunResult) -> dict:
    """
    Ripple and THD over the steady window, load-step speed dip and settled speed.

    ``speed_dip`` is the mean steady-window speed minus the minimum over the
    dip window. ``torque_ripple_ratio`` is the largest non-DC torque bin over
    the DC bin in the loaded window. Metrics whose window the run does not
    cover are NaN.
    """
    cfg = result.config
    f1 = cfg.fo
    m = dict.fromkeys(("ripple_pp", "thd_v", "thd_i", "speed_pre", "speed_min",
                       "speed_dip", "settled_speed", "torque_ripple_ratio"), math.nan)
    if _covered(cfg, cfg.steady_window):
        ia = result.waveform("ia").window(*cfg.steady_window)
        vas = result.phase_voltage(*cfg.steady_window)
        spd = result.waveform("speed_pu").window(*cfg.steady_window)
        m["ripple_pp"] = analysis.ripple_pp(ia, f1)
        m["thd_i"] = analysis.thd(analysis.spectrum(ia, f1), f1)
        m["thd_v"] = analysis.thd(analysis.spectrum(vas, f1), f1)
        m["speed_pre"] = float(spd.samples.mean())
    if _covered(cfg, cfg.dip_window):
        dip = result.waveform("speed_pu").window(*cfg.dip_window)
        m["speed_min"] = float(dip.samples.min())
        m["speed_dip"] = m["speed_pre"] - m["speed_min"]
    if _covered(cfg, cfg.settle_window):
        w = cfg.settle_window
        sel = (result.t >= w[0] - 1e-12) & (result.t <= w[1] + 1e-12)
        m["settled_speed"] = float(result.series["speed_pu"][sel].mean())
    if _covered(cfg, cfg.loaded_window):
        st = analysis.spectrum(result.waveform("te").window(*cfg.loaded_window), f1)
        if st.mags[0] > 0:
            m["torque_ripple_ratio"] = float(st.mags[1:].max() / st.mags[0])
    return m


def switching_sweep(base: SimulationConfig, fsw_list, keep_runs: bool = True) -> ComparisonReport:
    """
    One ideal-source run plus one SVPWM run per switching frequency.

    Each run uses its default step (a tenth of its switching period).
    """
    fsw_list = sorted(float(f) for f in fsw_list)
    if not fsw_list:
        raise InvalidInputError("fsw_list must not be empty")
    cfgs = [base.replace(source="ideal", dt=None)]
    cfgs += [base.replace(source="svpwm", fsw=f, dt=None) for f in fsw_list]
    runs = {}
    for cfg in cfgs:
        runs[cfg.label] = run_simulation(cfg)
    rows = [{"label": label, "fsw": r.config.fsw if r.config.source == "svpwm" else math.nan,
             **r.metrics} for label, r in runs.items()]
    ideal = runs["ideal"]
    vsi = [runs[c.label] for c in cfgs[1:]]
    checks = []
    if len(vsi) > 1:
        ripples = [r.metrics["ripple_pp"] for r in vsi]
        ok = all(a > b for a, b in zip(ripples, ripples[1:]))
        checks.append(Assertion(
            "ripple decreases with fsw", ok,
            ", ".join(f"{r.config.fsw:g} Hz: {x:.6g} A" for r, x in zip(vsi, ripples))))
    for r in vsi:
        d_v, d_i = r.metrics["speed_dip"], ideal.metrics["speed_dip"]
        checks.append(Assertion(
            f"speed dip {r.config.label} > ideal", bool(d_v > d_i),
            f"{d_v:.6g} pu vs {d_i:.6g} pu"))
        checks.append(Assertion(
            f"THD(ia) < THD(vas) {r.config.label}",
            bool(r.metrics["thd_i"] < r.metrics["thd_v"]),
            f"{r.metrics['thd_i']:.6g} vs {r.metrics['thd_v']:.6g}"))
    return ComparisonReport(rows, checks, runs if keep_runs else {})


def _spectrum_for(result: RunResult, name: str) -> analysis.Spectrum:
    cfg = result.config
    window = cfg.steady_window if _covered(cfg, cfg.steady_window) else (0.0, result.t[-1])
    if name == "vas":
        w = result.phase_voltage(*window)
    else:
        w = result.waveform(name).window(*window)
    return analysis.spectrum(w, cfg.fo)


def format_report(result) -> str:
    keys = ("ripple_pp", "thd_v", "thd_i", "speed_pre", "speed_min", "speed_dip",
            "settled_speed", "torque_ripple_ratio")
    if isinstance(result, RunResult):
        rows = [{"label": result.config.label, **result.metrics}]
        checks = []
    else:
        rows, checks = result.rows, result.assertions
    lines = ["run          " + "".join(f"{k:>21}" for k in keys)]
    for row in rows:
        lines.append(f"{row['label']:<13}" + "".join(f"{row[k]:>21.9g}" for k in keys))
    if isinstance(result, RunResult):
        lines.append(f"switching sequences built: {result.n_sequences}")
    if checks:
        lines.append("")
        for c in checks:
            lines.append(f"[{'PASS' if c.passed else 'FAIL'}] {c.name}: {c.detail}")
    return "\n".join(lines) + "\n"


def write_outputs(result, directory) -> list:
    """
    Write CSV, gnuplot and report files for a run or a sweep.

    A sweep writes its ``report.txt`` at the top level and one
    subdirectory per run.
    """
    directory = Path(directory)
    try:
        directory.mkdir(parents=True, exist_ok=True)
        written = []
        if isinstance(result, ComparisonReport):
            for label, run in result.runs.items():
                written += _write_run(run, directory / label)
        else:
            written += _write_run(result, directory)
        report = directory / "report.txt"
        report.write_text(format_report(result))
        written.append(report)
    except OSError as exc:
        raise OSError(f"failed writing outputs to {directory}: {exc}") from exc
    return written


def _write_run(result: RunResult, directory: Path) -> list:
    directory.mkdir(parents=True, exist_ok=True)
    data = np.column_stack([result.series[k] for k in SERIES])
    ts_csv = directory / "timeseries.csv"
    np.savetxt(ts_csv, data, fmt="%.12g", delimiter=",", header=",".join(SERIES), comments="")
    ts_dat = directory / "timeseries.dat"
    np.savetxt(ts_dat, data, fmt="%.12g", header=" ".join(SERIES))
    written = [ts_csv, ts_dat]
    for name in ("ia", "vas", "te"):
        sp = _spectrum_for(result, name)
        written.append(analysis.write_spectrum_csv(sp, directory / f"spectrum_{name}.csv"))
        dat = directory / f"spectrum_{name}.dat"
        np.savetxt(dat, np.column_stack([sp.freqs, sp.mags]), fmt="%.17g",
                   header="frequency_hz magnitude")
        written.append(dat)
    report = directory / "report.txt"
    report.write_text(format_report(result))
    written.append(report)
    return written


def read_timeseries(path) -> dict:
    data = np.genfromtxt(path, delimiter=",", names=True)
    return {name: np.asarray(data[name], dtype=float) for name in data.dtype.names}


# config file keys -> SimulationConfig fields / Nameplate fields
_FLOAT_KEYS = {"fsw", "vdc", "mod_index", "fo", "t_end", "dt", "v_ll_rms"}
_NAMEPLATE_KEYS = {f.name for f in dataclasses.fields(Nameplate)} - {"hp"}
_WINDOW_KEYS = {"steady_window", "dip_window", "settle_window", "loaded_window"}


def _parse_pairs(text: str, key: str):
    pairs = []
    for item in filter(None, (s.strip() for s in text.replace(";", ",").split(","))):
        try:
            t, tq = item.split(":")
            pairs.append((float(t), float(tq)))
        except ValueError:
            raise ConfigError(f"{key}: expected time:torque pairs, got {item!r}") from None
    return tuple(pairs)


def parse_config(text: str, **overrides) -> SimulationConfig:
    """
    Build a config from ``key = value`` lines.

    Keys are ``SimulationConfig`` fields plus the nameplate entries
    (``r1``, ``x1``, ``xm``, ``j``, ...). ``load_steps`` reads
    ``3.26:200, 3.6:300``; windows read ``2.7, 3.2``. ``#`` starts a
    comment. Keyword ``overrides`` that are not None win over the text.
    """
    cp = configparser.ConfigParser(inline_comment_prefixes=("#",), comment_prefixes=("#",))
    try:
        cp.read_string("[run]\n" + text)
    except configparser.Error as exc:
        raise ConfigError(f"malformed config: {exc}") from None
    raw = dict(cp["run"])
    raw.update({k: str(v) for k, v in overrides.items() if v is not None})
    kwargs, plate = {}, {}
    for key, val in raw.items():
        try:
            if key == "source":
                kwargs[key] = val.strip()
            elif key in _FLOAT_KEYS:
                kwargs[key] = None if val.strip().lower() == "none" else float(val)
            elif key == "load_steps":
                kwargs[key] = _parse_pairs(val, key)
            elif key in _WINDOW_KEYS:
                lo, hi = (float(x) for x in val.split(","))
                kwargs[key] = (lo, hi)
            elif key in _NAMEPLATE_KEYS:
                plate[key] = int(val) if key == "poles" else float(val)
            else:
                raise ConfigError(f"unknown config key {key!r}")
        except ValueError as exc:
            raise ConfigError(f"{key}: cannot parse {val!r} ({exc})") from None
    try:
        if plate:
            kwargs["machine"] = params_from_nameplate(Nameplate(**plate))
        return SimulationConfig(**kwargs)
    except InvalidInputError as exc:
        raise ConfigError(str(exc)) from exc


def load_config(path, **overrides) -> SimulationConfig:
    return parse_config(Path(path).read_text(), **overrides)
