"""Spectral theory of the operator linearized around the standing wave."""

from acwall.spectral.asymptotics import (
    boundary_layer_drift,
    boundary_layer_drift_asymptotic,
    interpolation_ratio,
    lambda0_asymptotic,
    lambda0_domain_asymptotic,
    lambda0_scaling_fit,
)
from acwall.spectral.eigen import SpectralPair, count_below, eigenpairs, spectral_basis, spectral_gap
from acwall.spectral.green import gbar_kernel, green_apply, green_explicit, green_row_norm
from acwall.spectral.kellogg import KelloggReport, ground_state_distances, kellogg
from acwall.spectral.operator import TridiagonalOperator, assemble_operator, translation_exact_potential
from acwall.spectral.report import spectral_report
from acwall.spectral.semigroup import (
    gperp_columns,
    gperp_diagonal,
    gperp_kernel,
    gperp_trace_tail,
    gperp_weighted_trace,
    semigroup_apply,
    semigroup_tail,
)

__all__ = [
    'KelloggReport',
    'SpectralPair',
    'TridiagonalOperator',
    'assemble_operator',
    'boundary_layer_drift',
    'boundary_layer_drift_asymptotic',
    'count_below',
    'eigenpairs',
    'gbar_kernel',
    'gperp_columns',
    'gperp_diagonal',
    'gperp_kernel',
    'gperp_trace_tail',
    'gperp_weighted_trace',
    'green_apply',
    'green_explicit',
    'green_row_norm',
    'ground_state_distances',
    'interpolation_ratio',
    'kellogg',
    'lambda0_asymptotic',
    'lambda0_domain_asymptotic',
    'lambda0_scaling_fit',
    'semigroup_apply',
    'semigroup_tail',
    'spectral_basis',
    'spectral_gap',
    'spectral_report',
    'translation_exact_potential',
]
