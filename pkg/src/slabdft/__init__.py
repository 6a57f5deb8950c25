"""Reduced one-dimensional Thomas-Fermi and reduced Hartree-Fock models of a
charged homogeneous slab: SCF solvers, closed-form oracles, screening and
tail diagnostics, and a CLI for reproducible runs."""

from .analysis import (
    C_TF_SPINFUL,
    C_TF_SPINLESS,
    ComparisonReport,
    LiebThirringCheck,
    SommerfeldFit,
    compare,
    fit_tail,
    lieb_thirring_check,
    potential_limits,
    screening_defect,
    sommerfeld_constants,
    tf_constant,
)
from .grid import (
    Grid,
    GridFunction,
    apply_laplacian,
    inner,
    integrate,
    kinetic_energy,
    make_grid,
)
from .hartree import (
    MeanFieldPotential,
    NeutralityError,
    NeutralResidual,
    cumulative,
    dipole_moment,
    hartree_energy,
    hartree_pairing,
    neutral_residual,
    potential,
)
from .rhf import (
    Hamiltonian,
    InsufficientSpectrumError,
    ReducedHartreeFock,
    ReducedState,
    assemble_hamiltonian,
    lowest_eigenpairs,
    mix,
    optimal_mixing_t,
    reduced_state,
    rhf_energy,
    rhf_fermi_level,
)
from .sources import (
    Box,
    ChargeProfile,
    Gaussian,
    MollifiedDirac,
    ProfileSamplingWarning,
    named_profile,
)
from .tf import (
    EnergyBreakdown,
    SolverError,
    ThomasFermi,
    dirac_closed_form,
    initial_density,
    tf_density_from_potential,
    tf_energy,
    tf_fermi_level,
)

__version__ = "0.1.0"

__all__ = [
    "Grid", "GridFunction", "make_grid", "integrate", "inner",
    "kinetic_energy", "apply_laplacian",
    "Box", "Gaussian", "MollifiedDirac", "ChargeProfile",
    "ProfileSamplingWarning", "named_profile",
    "NeutralResidual", "MeanFieldPotential", "NeutralityError",
    "neutral_residual", "cumulative", "potential", "hartree_energy",
    "hartree_pairing", "dipole_moment",
    "EnergyBreakdown", "SolverError", "ThomasFermi",
    "tf_density_from_potential", "tf_fermi_level", "tf_energy",
    "dirac_closed_form", "initial_density",
    "ReducedState", "Hamiltonian", "InsufficientSpectrumError",
    "ReducedHartreeFock", "assemble_hamiltonian", "lowest_eigenpairs",
    "rhf_fermi_level", "reduced_state", "rhf_energy", "mix",
    "optimal_mixing_t",
    "tf_constant", "sommerfeld_constants", "C_TF_SPINLESS", "C_TF_SPINFUL",
    "SommerfeldFit", "fit_tail", "screening_defect", "potential_limits",
    "LiebThirringCheck", "lieb_thirring_check", "ComparisonReport", "compare",
    "__version__",
]
