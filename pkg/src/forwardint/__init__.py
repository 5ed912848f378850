"""Forward stochastic integration on a uniform grid.

Integrands are operator-valued processes ``G: [0, T] -> L(R^m, R^d)`` driven
by ``m`` coordinates of a cylindrical Brownian motion.  The package provides
Ito and regularized forward integrals, fractional Sobolev / Hoelder /
``V^{beta,p}`` norms, integration by parts with nonadapted multipliers, a
forward stochastic convolution for linear equations, and a reproducible Monte
Carlo driver with a CLI.
"""

__version__ = "0.1.0"

from .calculus import (
    MultiplierSpec,
    deterministic_ibp_residual,
    discrete_ibp_residual,
    ibp_residual,
    multiply,
    regime,
    stochastic_ibp_rhs,
)
from .exceptions import (
    AdaptednessError,
    AlignmentError,
    ConfigError,
    EvaluationError,
    ForwardIntError,
    InvalidArgumentError,
    OutOfRangeError,
    StabilityError,
    UnsupportedRegimeError,
)
from .grid import (
    BrownianBundle,
    TimeGrid,
    make_grid,
    required_lookahead,
    sample_brownian,
    shifted_increment,
)
from .integrals import (
    VectorPath,
    forward_approx,
    forward_path,
    ito_integral,
    ito_path,
    tail_integrals,
)
from .norms import (
    NormSpec,
    holder_seminorm,
    hs_gamma_norm,
    lp_norm,
    sobolev_norm,
    sobolev_seminorm,
    v_norm,
    v_norm_weighted,
)
from .processes import OperatorProcess, ProcessSpec, materialize, restrict, smooth, truncate_basis
from .spde import (
    DriftSpec,
    EvolutionFamily,
    build_family,
    euler_maruyama,
    forward_convolution,
    weak_solution_residual,
)
from .experiments import (
    ExperimentConfig,
    RunReport,
    run_convergence,
    run_experiment,
    run_ibp,
    run_identity_suite,
    run_norms,
    run_spde,
    summarize,
)
from .config import parse_config, render_config
from .report import emit_report
