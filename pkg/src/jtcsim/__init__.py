"""Train shunting impedance of a jointless track circuit by multi-conductor
transmission-line chain matrices."""
from ._kernels import backend_name, set_backend
from .analysis import (
    ImportanceResult,
    SweepSeries,
    capacitor_fault_delta,
    detect_pulses,
    impedance_profile,
    steady_impedance,
    steady_value,
    structural_importance,
    sweep_ballast,
    sweep_rail_impedance,
    sweep_wheel_resistance,
    tcr_comparison,
)
from .config import dump_scenario, load_scenario, parse_scenario
from .elements import CapacitorFault, ShuntElement, ShuntKind, capacitor_fault, capacitor_impedance
from .errors import *  # noqa: F401,F403
from .fitting import FitKind, FitResult, fit_linear, fit_quadratic, fit_reciprocal, goodness_of_fit
from .jtc import JTCScenario, ShuntingSolution, solve_many, solve_shunting_point, tcr_amplitude
from .netcore import ESTN, PortState, compose, invert
from .nodal import nodal_oracle
from .railline import RailUnitParams, line_eigen, rail_estn
from .train import TrainFormation, wheel_positions

__version__ = "0.1.0"
