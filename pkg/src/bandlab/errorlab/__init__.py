"""Anatomy of the self-consistent equation error."""
from .chains import OperatorL, SigmaCheck, XStats, chain_Y, check_sigma, loop_Z, operator_L, x_stat
from .decomposition import (
    ModeSplit, PRSplit, Projection, P_entries, error_E, isotropic_contract,
    mode_split, project_decompose, projector, split_PR,
)
from .fourier import (
    FourierTable, apply_multiplier, build_Q, bump_chi, cutoff_scale, e_vector,
    fourier_coefficients, fourier_s, momenta, momentum_norm,
)
