"""Exact many-body linear algebra on small bosonic Fock spaces.

The hot assembly kernel is compiled when the extension is available and
falls back to a pure-Python implementation otherwise; see
:func:`pairwave.focksector.backend`.
"""
from . import _backend
from ._backend import available as available_backends, current as backend, set_backend
from .checks import (
    ConstructedState,
    ModeBlocks,
    SectorSpectrumReport,
    bogoliubov_gap_check,
    build_Hph_fock,
    combinatorial_sums,
    conjugation_scaling_check,
    construct_eigenvector,
    depletion_diagnostic,
    ground_state_depletion,
    level_factor,
    mode_blocks,
    submodel,
    theorem2_check,
    verify_projector_lemmas,
)
from .sector import DIM_CAP, FockSector, block_offdiag_norm, ccr_residual, enumerate_sector, sector_dim

__all__ = [
    "DIM_CAP", "FockSector", "sector_dim", "enumerate_sector", "ccr_residual",
    "block_offdiag_norm", "ModeBlocks", "mode_blocks", "build_Hph_fock",
    "combinatorial_sums", "SectorSpectrumReport", "theorem2_check", "ConstructedState",
    "level_factor", "construct_eigenvector", "verify_projector_lemmas", "submodel",
    "conjugation_scaling_check", "bogoliubov_gap_check", "depletion_diagnostic",
    "ground_state_depletion", "available_backends", "backend", "set_backend",
]
