"""Induction machine fed by a space-vector-modulated voltage source inverter."""
from imdrive.analysis import Spectrum, Waveform, dominant_components, ripple_pp, spectrum, thd
from imdrive.machine import MachineParams, MachineState, Nameplate, params_from_nameplate
from imdrive.scenario import (
    ComparisonReport,
    RunResult,
    SimulationConfig,
    run_simulation,
    switching_sweep,
    write_outputs,
)
from imdrive.svpwm import ModulatorConfig, SpaceVector, SwitchState, ThreePhase

__all__ = [
    "ComparisonReport", "MachineParams", "MachineState", "ModulatorConfig", "Nameplate",
    "RunResult", "SimulationConfig", "SpaceVector", "Spectrum", "SwitchState", "ThreePhase",
    "Waveform", "dominant_components", "params_from_nameplate", "ripple_pp", "run_simulation",
    "spectrum", "switching_sweep", "thd", "write_outputs",
]
__version__ = "0.1.0"
