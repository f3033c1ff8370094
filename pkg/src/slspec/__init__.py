"""Forward and inverse spectral theory for -y'' + q(x) y = mu y on (0, pi)
with separated boundary conditions parameterized by angles alpha, beta in (0, pi).
"""

__version__ = "0.1.0"

from .errors import (
    CompletionError,
    DegenerateRootError,
    DimensionMismatchError,
    DomainError,
    EndpointDegeneracyError,
    InsufficientDataError,
    IntegrationOverflowError,
    IterationFailureError,
    MalformedDataError,
    MissingEigenvalueError,
    SlspecError,
    UnsolvableGLError,
)
from .numerics import (
    Grid,
    IvpSolution,
    Potential,
    diff_central,
    integrate_ivp,
    load_potential_csv,
    quad_trapz,
    save_potential_csv,
)
from .forward import (
    BoundaryAngles,
    EigenRecord,
    Spectrum,
    char_fn,
    eigenvalues,
    psi_char_fn,
    reflect_problem,
)
from .identities import (
    AsymptoticModel,
    SumEvaluation,
    b_tilde_from_data,
    extend_mus,
    fit_asymptotics,
    phidot_finite_difference,
    phidot_product,
    solve_delta_n,
    sum_identity_a,
    sum_identity_b,
    verify_cn_relation,
)
from .gl import (
    Reconstruction,
    SpectralData,
    TriangularKernel,
    build_F,
    reconstruct,
    solve_GL,
)
from .validation import (
    Perturbation,
    Tolerances,
    ValidationReport,
    check_conditions,
    perturb_and_classify,
)

__all__ = [name for name in dir() if not name.startswith("_")]
