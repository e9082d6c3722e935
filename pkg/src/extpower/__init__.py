"""Extended power method for simultaneous eigenpairs of commuting symmetric operators."""

from .diagnostics import (
    ConvergencePrediction,
    PseudoConvergenceReport,
    cost_summary,
    detect_pseudo_convergence,
    predict_limit,
)
from .errors import (
    ContractViolation,
    ExtPowerError,
    NonConvergenceError,
    OracleFailure,
    ProblemError,
    SingularShiftError,
    SingularSystemError,
    UnusableSplittingError,
    ZeroVectorError,
)
from .iteration import (
    IterationConfig,
    IterationTrace,
    StepRecord,
    extended_run,
    extended_step,
    inverse_run,
    inverse_step,
    power_run,
    power_step,
    rr2x2_run,
    rr2x2_step,
)
from .linsolve import SolveOptions, SolveReport, solve, solve_gauss, solve_gauss_seidel, solve_jacobi
from .operators import (
    CommutingPair,
    StateVector,
    SymmetricOperator,
    apply,
    commutator_norm,
    normalize,
    rayleigh,
    shifted,
)
from .spectra import (
    EigenDecomposition,
    SpectrumSpec,
    build_commuting_pair,
    fig1_fixture,
    jacobi_eigensolve,
    random_orthogonal,
    simultaneous_eigenpairs,
    table1_fixture,
    table2_fixture,
)

__version__ = "0.1.0"
