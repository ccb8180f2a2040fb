"""Euler-Maruyama schemes for SDEs driven by rotationally invariant alpha-stable noise."""

__version__ = "0.1.0"

from ._backend import BACKEND
from .drift import AssumptionReport, DriftModel, builtin_drift, check_assumption_a, parse_drift
from .errors import DomainError, NumericalFailure
from .metrics import EmpiricalMeasure, empirical_cf, sliced_w1, w1_1d
from .noise import (NoiseSpec, RngStream, c_d_alpha, sample_isotropic_stable, sample_pareto_vec,
                    sample_pos_stable, sample_sym_stable_1d, surface_area)
from .oubench import (OUBenchConfig, cf_gap, exact_inv_cf, lipschitz_witness_bound, pareto_cf,
                      pareto_scheme_inv_cf, sample_exact_invariant, stable_scheme_inv_cf)
from .ratestudy import Method, RateReport, fit_loglog, run_rate_study, theoretical_rate
from .scheme import (ChainConfig, MomentReport, Scheme, coupled_pair_decay, em_step_pareto,
                     em_step_stable, moment_track, reference_sde_ensemble, run_ensemble)

__all__ = [
    "BACKEND", "AssumptionReport", "DriftModel", "builtin_drift", "check_assumption_a", "parse_drift",
    "DomainError", "NumericalFailure", "EmpiricalMeasure", "empirical_cf", "sliced_w1", "w1_1d",
    "NoiseSpec", "RngStream", "c_d_alpha", "sample_isotropic_stable", "sample_pareto_vec",
    "sample_pos_stable", "sample_sym_stable_1d", "surface_area", "OUBenchConfig", "cf_gap",
    "exact_inv_cf", "lipschitz_witness_bound", "pareto_cf", "pareto_scheme_inv_cf",
    "sample_exact_invariant", "stable_scheme_inv_cf", "Method", "RateReport", "fit_loglog",
    "run_rate_study", "theoretical_rate", "ChainConfig", "MomentReport", "Scheme",
    "coupled_pair_decay", "em_step_pareto", "em_step_stable", "moment_track",
    "reference_sde_ensemble", "run_ensemble",
]
