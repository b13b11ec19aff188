"""Maximum-likelihood state tomography with certified gradient stopping rules."""
from .confidence import (
    Chi2Params,
    RegionReport,
    StoppingContext,
    chi2_cdf,
    chi2_quantile,
    chi2_sf,
    point_estimate_threshold,
    state_region_report,
    state_region_rule_of_thumb,
)
from .constrained import (
    ConfidenceInterval,
    ConstrainedFit,
    constrained_bound,
    expectation_ci,
    k_objective,
    maximize_constrained,
    sandwich_check,
)
from .likelihood import (
    Dataset,
    PovmElement,
    directional_derivative,
    gradient_bound,
    likelihood_ratio_bound,
    log_likelihood,
    r_matrix,
)
from .optimizer import FitResult, IterationRecord, StopSpec, gradient_ascent_step, maximize, rhor_step
from .quantum import make_density, max_eig_hermitian, trace_distance

__version__ = "0.1.0"
