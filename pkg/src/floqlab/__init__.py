"""Floquet spectroscopy of periodically driven quantum systems.

Solve for quasienergies and Floquet modes, compute harmonic-resolved dipole
elements and band susceptibilities, and check the dark-state and selection
rules implied by dynamical symmetries.
"""

from .dipole import DipoleSet, dipole_elements, parseval_residual
from .errors import FloqlabError
from .floquet import (
    FloquetSolution,
    SolverConfig,
    extended_space_solve,
    floquet_solve,
    fold,
    match_branches,
    monodromy,
)
from .models import (
    ModelBundle,
    PeriodicHamiltonian,
    ProbeOperator,
    build_benzene,
    build_dimer,
    build_model,
    build_tls,
    evaluate,
    load_custom,
)
from .response import (
    Populations,
    ResponseConfig,
    ResponseSpectrum,
    diagonal_populations,
    explicit_populations,
    floquet_gibbs,
    intensity_change,
    spectra,
    susceptibility,
)
from .symmetry import (
    SymmetrySpec,
    compose_cs_trs,
    fbsr_vanishing_bands,
    lone_symmetry_residual,
    no_dark_rule,
    phs_partner_pairing,
    predict_phs_dark_states,
    predict_rs_dark_states,
    rotation_eigenvalues,
    scan_dark_states,
    sit_check,
    symmetry_adapted,
    symmetry_report,
    validate_dark,
    verify_symmetry,
)

__version__ = "0.1.0"
