"""Time evolution of finite-dimensional non-Hermitian collective-spin
Hamiltonians under Krein-space metrics.

The pipeline: build spin operators and a model Hamiltonian
(`spin_core`), diagonalize and classify the spectrum or extract Jordan
chains at exceptional points (`spectral`), construct the symmetry
operator and positive metric (`metric`), propagate states in closed
form (`dynamics`), and evaluate metric-consistent observables such as
spin squeezing (`observables`).  The `kreinspin` CLI drives scenario
files and parameter scans.
"""

from .spin_core import (
    SpinSystem,
    DissipativeOAT,
    NVLipkin,
    CoherentState,
    build_spin_system,
    build_hamiltonian,
    coherent_spin_state,
    pt_transform,
)
from .spectral import (
    Classification,
    Tolerances,
    SpectralData,
    JordanData,
    EPLocation,
    AmbiguousPairingError,
    JordanResidualError,
    eigensystem,
    classify_spectrum,
    jordan_chains,
    count_real_eigenvalues,
    locate_exceptional_points,
)
from .metric import (
    MetricCase,
    AlphaPolicy,
    SymmetryOperator,
    MetricContext,
    SingularMetricError,
    metric_case_real,
    symmetry_operator_pairs,
    symmetry_operator_jordan,
    metric_case_general,
    krein_split,
    s_inner_product,
    transform_observable,
    transform_coordinates,
    s_matrix_element,
    build_metric,
)
from .dynamics import (
    Propagator,
    EvolutionResult,
    build_propagator,
    evolve,
    survival_probability,
)
from .observables import (
    SqueezingReport,
    UncertaintyCheck,
    expectation,
    squeezing_report,
    uncertainty_check,
)

__version__ = "0.1.0"
