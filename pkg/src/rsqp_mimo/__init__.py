"""PSK MIMO detection through the block-simplex sparse QP relaxation."""
from .bench_cli import ExperimentConfig, ResultRow, emit_csv, emit_plot_data, run_experiment
from .core_model import (ChannelInstance, PskConstellation, make_instance, project_to_psk,
                         psk_constellation, symbol_error_rate)
from .detectors import (DetectorKind, GpmOptions, detect, gpm_detect, mmse_detect, ml_bruteforce,
                        no_interference_lb)
from .formulation import AssignmentForm, build_assignment_form, f_grad, f_value, h_value, t_from_x, x_from_t
from .instance_gen import GenSpec, generate_instance, sigma2_from_snr
from .pnqp import DetectionResult, SolverConfig, pnqp_detect
from .rounding import is_stationary, round_gradient_guided
from .tightness import ConditionReport, check_cond_exact_detection, check_cond_tightness

__all__ = [
    "AssignmentForm", "ExperimentConfig", "ResultRow", "emit_csv", "emit_plot_data", "run_experiment",
    "ChannelInstance", "ConditionReport", "DetectionResult", "DetectorKind",
    "GenSpec", "GpmOptions", "PskConstellation", "SolverConfig", "build_assignment_form",
    "check_cond_exact_detection", "check_cond_tightness", "detect", "f_grad", "f_value",
    "generate_instance", "gpm_detect", "h_value", "is_stationary", "make_instance", "ml_bruteforce",
    "mmse_detect", "no_interference_lb", "pnqp_detect", "project_to_psk", "psk_constellation",
    "round_gradient_guided", "sigma2_from_snr", "symbol_error_rate", "t_from_x", "x_from_t",
]
