"""momentlab: exact moment sequences of i.i.d. averages, log-convexity and
log-concavity verdicts, and counterexample search."""

from .distributions import (
    ContinuousFamily,
    DiscreteDistribution,
    EstimateWithError,
    MomentProfile,
    as_fraction,
    bernoulli,
    exponential,
    laplace,
    laplace_exact,
    load_distribution,
    moments_of,
    mu_of_partition,
    normalize_mean,
    parse_distribution_spec,
    point_mass,
    sample,
    uniform,
)
from .partitions import (
    MAX_ORDER,
    Partition,
    alpha,
    beta,
    enumerate_partitions,
    falling_factorial,
    stirling2,
)
from .sequences import (
    ExpDecayFunction,
    HingeFunction,
    MomentSequence,
    PowerFunction,
)
from .moment_engine import (
    an_convolution_oracle,
    an_sequence,
    bn_bernoulli_stirling,
    bn_binomial_oracle,
    bn_convolution_oracle,
    bn_partition_formula,
    bn_partition_sequence,
    iid_sum_distribution,
)
from .analytic import (
    an_monte_carlo,
    an_quadrature_fractional_p,
    an_quadrature_negative_p,
    g_alpha_t,
    u_n,
)
from .checkers import (
    SequenceVerdict,
    check_lemma7,
    check_log_concave,
    check_log_convex,
    check_remark6_factor,
    check_theorem4,
    lemma7_value,
    verify_remark5_decomposition,
)
from .explorer import (
    SearchReport,
    check_pointwise_remark8,
    find_final_remark_counterexample,
    random_rational_distributions,
    remark8_random_scan,
    scan_g_properties,
    search_conjecture4,
)
from .errors import ConfigError, ConvergenceError, DomainError, SizeLimitError
from .precision import DEFAULT_PRECISION_BITS, PRECISION_ENV_VAR, default_precision

__version__ = "0.1.0"
