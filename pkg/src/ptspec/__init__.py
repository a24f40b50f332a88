"""Finite-truncation spectral lab for PT-symmetric oscillator perturbations.

Subpackages by theme:

* basis / operators / potentials - truncated Fock bases, ladder algebra,
  exact polynomial and quadrature matrix elements of odd potentials;
* jordan - the quanta-preserving coupled pair whose blocks are genuine
  Jordan blocks, with structural certification;
* resonance - exact rational frequency arithmetic: clusters, the
  resonance-lattice parity criterion, spectral gaps and the reality radius;
* rspt - degenerate perturbation series with parity bookkeeping;
* spectrum - dense spectra, truncation trust windows, reality scans,
  branch tracking and order-scaling checks;
* cli - the `ptspec` command-line front end.
"""

from .basis import BasisTruncation, MultiIndex, enumerate_basis, parity_of
from .errors import (
    BasisMismatchError,
    DegenerateFitError,
    DegenerateFrameError,
    EigensolverError,
    EmptyTrustWindowError,
    ExactnessWindowWarning,
    GapInconsistencyError,
    NumericalError,
    OddnessError,
    PtspecError,
    QuadratureOrderWarning,
    ToleranceAmbiguityError,
    UnboundedPotentialError,
    UsageError,
)
from .jordan import (
    JordanBlockReport,
    build_q,
    dm_matrix,
    eigvec_check,
    jordan_report,
    symbol_bound_check,
)
from .operators import (
    OperatorMatrix,
    assemble_h,
    build_h0,
    ladder_matrix,
    number_matrix,
    position_matrix,
)
from .potentials import (
    PotentialSpec,
    coordinate,
    polynomial,
    potential_matrix,
    quadrature_matrix,
    sin_cos_product,
    sin_linear,
    spec_from_json,
    spec_to_json,
)
from .resonance import (
    Cluster,
    ConditionAReport,
    FrequencyVector,
    check_condition_a,
    eigenvalue_clusters,
    gap_and_delta,
    kernel_lattice,
    rho,
)
from .rspt import (
    ClusterOperators,
    PerturbationSeries,
    StringSpec,
    cluster_operators,
    gn,
    pn,
    series,
    series_eigenvalues,
    similarity_coefficients,
    similarity_u,
    string_product,
    tn_hat,
    x_matrix,
)
from .spectrum import (
    Branch,
    BranchTrackResult,
    SlopeReport,
    SpectrumReport,
    branch_track,
    dense_spectrum,
    reality_scan,
    rspt_vs_direct,
    trust_window,
)

__version__ = "0.1.0"
