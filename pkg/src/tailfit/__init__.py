"""Tail index estimation for regularly varying upper tails.

Weighted least squares regression on the log empirical quantile function,
together with the Hill, Pickands and Dekkers-Einmahl-de Haan estimators,
closed-form heavy-tailed sampling models, the asymptotic variance of the
regression estimator, and a deterministic Monte Carlo harness.
"""

__version__ = "0.1.0"

from .errors import (  # noqa: E402
    ConditionMError,
    ConfigurationError,
    DomainError,
    IllConditionedError,
    NumericError,
    SingularMatrixError,
    TailfitError,
)
from .models import (  # noqa: E402
    Hall,
    OrderedSample,
    StrictPareto,
    TrigSeries,
    density_quantile,
    sample,
    stream,
    upper_quantile,
)
from .estimators import (  # noqa: E402
    DesignSystem,
    FitResult,
    Power,
    RegressionConfig,
    Uniform,
    attach_response,
    build_design,
    dedh,
    hill,
    pickands,
    wls_estimate,
    wls_fit,
)
from .asymptotics import (  # noqa: E402
    asymptotic_spec,
    asymptotic_variance,
    g_r_coefficients,
    limit_matrix,
)
from .simulation import (  # noqa: E402
    EstimatorSpec,
    SimulationPlan,
    SimulationReport,
    aggregate,
    standard_estimators,
    run_plan,
)
