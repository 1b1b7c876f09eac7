"""Mean values of density-like arithmetic functions, with finite-field applications."""

from .engine import (
    A_t,
    DensityLikeSpec,
    Ladder,
    MeanValueReport,
    deficiency_partial_sum,
    empirical_average,
    euler_ratio_spec,
    f_value,
    gcd_average_oracle,
    geometric_lower_bound,
    make_ladder,
    mean_value_report,
    product_lower_bound,
    t_of_x,
    truncated_log_mean,
    variance_estimate,
)
from .errors import (
    BudgetExceeded,
    ContractError,
    DensimeanError,
    DomainError,
    ResourceError,
    SpecViolation,
)

__version__ = "0.1.0"
