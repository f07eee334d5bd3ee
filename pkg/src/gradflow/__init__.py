"""Integrating-factor Runge-Kutta schemes with steady-state preserving corrections
for semi-discrete gradient flows, and a differentiation-matrix energy analyzer."""

from .analyzer import (DiffMatrixReport, Verdict, auxiliary_g, certify, diff_matrix,
                       stage_energy_check, sym_minors)
from .models import DoubleWell, EnergyTrace, FloryHuggins, energy, modified_energy_if1
from .scalarfun import CorrectionKind, chi, corrected_coeff, phi1, raw_if_coeff, stage_coefficients
from .specop import Grid, SpectralOperator, build_operator
from .stepper import (NonFiniteStateError, SchemeSpec, Stepper, StepResult, integrate,
                      parse_scheme_name, step_corrected, step_raw)
from .tableau import REGISTRY, ButcherTableau, registry_get, validate

__version__ = "0.1.0"
