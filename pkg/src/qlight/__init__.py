"""Nonlinear optical response of matter driven by quantum light.

Matter systems, quantized field states, loop-diagram signal assembly,
Liouville-space super-correlators and an exact-diagonalization oracle.
"""

__version__ = "0.1.0"

from .errors import ContractError, NumericalError, SizeError, UnsupportedRepresentationError
from .field import FieldMode, FieldState, field_correlator, p_representation, prepare_state, reconstruct
from .matter import MatterSystem, build_system, green, ground_state, harmonic, ladder, thermal_state, two_level
from .operators import OperatorMatrix, commutator, anticommutator, partial_trace, tensor, tensor_product
from .oracle import build_joint_model, order_fit, photon_flux, propagate, windowed_flux
from .response import (chi1, chi3, hilbert_pathway, linear_signal, pathway, scan, signal_classical,
                       signal_p_averaged, signal_quantum)
from .superop import SignSequence, fdt_check, super_correlator, super_spectrum, two_atom_demo

__all__ = [
    "ContractError", "NumericalError", "SizeError", "UnsupportedRepresentationError",
    "FieldMode", "FieldState", "field_correlator", "p_representation", "prepare_state", "reconstruct",
    "MatterSystem", "build_system", "green", "ground_state", "harmonic", "ladder", "thermal_state", "two_level",
    "OperatorMatrix", "commutator", "anticommutator", "partial_trace", "tensor", "tensor_product",
    "build_joint_model", "order_fit", "photon_flux", "propagate", "windowed_flux",
    "chi1", "chi3", "hilbert_pathway", "linear_signal", "pathway", "scan", "signal_classical",
    "signal_p_averaged", "signal_quantum",
    "SignSequence", "fdt_check", "super_correlator", "super_spectrum", "two_atom_demo",
]
