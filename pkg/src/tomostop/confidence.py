"""Chi-squared distribution functions and likelihood-ratio stopping rules.

The regularized incomplete gamma function is evaluated by its power series
below ``x = a + 1`` and by a modified-Lentz continued fraction above, so the
upper tail is always computed directly.
"""
from __future__ import annotations

import enum
import math
from dataclasses import asdict, dataclass

from .errors import NegativeArgument, ProbabilityOutOfRange, ValidationError

_MAX_TERMS = 100_000
_EPS = 1e-16
_TINY = 1e-300


def _prefactor(a: float, x: float) -> float:
    # x**a e**-x / Gamma(a)
    return math.exp(a * math.log(x) - x - math.lgamma(a))


def _series_p(a: float, x: float) -> float:
    term = total = 1.0 / a
    ap = a
    for _ in range(_MAX_TERMS):
        ap += 1.0
        term *= x / ap
        total += term
        if abs(term) < abs(total) * _EPS:
            break
    return total * _prefactor(a, x)


def _contfrac_q(a: float, x: float) -> float:
    b = x + 1.0 - a
    c = 1.0 / _TINY
    d = 1.0 / b
    h = d
    for i in range(1, _MAX_TERMS):
        an = -i * (i - a)
        b += 2.0
        d = an * d + b
        if abs(d) < _TINY:
            d = _TINY
        c = b + an / c
        if abs(c) < _TINY:
            c = _TINY
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < _EPS:
            break
    return h * _prefactor(a, x)


def gamma_pq(a: float, x: float) -> tuple[float, float]:
    """Regularized lower and upper incomplete gamma ``(P(a, x), Q(a, x))``."""
    if x < 0:
        raise NegativeArgument(f"x = {x!r} < 0")
    if a <= 0:
        raise ValidationError("shape must be positive")
    if x == 0:
        return 0.0, 1.0
    if math.isinf(x):
        return 1.0, 0.0
    if x < a + 1.0:
        p = min(1.0, _series_p(a, x))
        return p, 1.0 - p
    q = min(1.0, _contfrac_q(a, x))
    return 1.0 - q, q


@dataclass(frozen=True)
class Chi2Params:
    dof: int

    def __post_init__(self):
        if int(self.dof) != self.dof or self.dof < 1:
            raise ValidationError(f"dof must be a positive integer, got {self.dof!r}")


def _dof(p) -> int:
    return p.dof if isinstance(p, Chi2Params) else Chi2Params(int(p)).dof


def chi2_cdf(x: float, p) -> float:
    """``P(chi2(dof) <= x)``; ``p`` is a :class:`Chi2Params` or an integer dof."""
    return gamma_pq(0.5 * _dof(p), 0.5 * float(x))[0]


def chi2_sf(x: float, p) -> float:
    """Upper tail ``P(chi2(dof) > x)``, i.e. the p-value of a statistic ``x``."""
    return gamma_pq(0.5 * _dof(p), 0.5 * float(x))[1]


def chi2_pdf(x: float, p) -> float:
    k = 0.5 * _dof(p)
    if x < 0:
        raise NegativeArgument(f"x = {x!r} < 0")
    if x == 0:
        return 0.5 if k == 1 else (math.inf if k < 1 else 0.0)
    return math.exp((k - 1.0) * math.log(x) - 0.5 * x - k * math.log(2.0) - math.lgamma(k))


def chi2_quantile(prob: float, params) -> float:
    """Smallest ``x`` with ``chi2_cdf(x) == prob``, to ~1e-13 relative."""
    prob = float(prob)
    if not 0.0 < prob < 1.0:
        raise ProbabilityOutOfRange(f"p = {prob!r} not in (0, 1)")
    dof = _dof(params)
    upper = prob > 0.5
    target = 1.0 - prob if upper else prob

    def resid(x: float) -> float:
        lo, hi = gamma_pq(0.5 * dof, 0.5 * x)
        # Residual in the tail that carries the precision, oriented so it increases with x.
        return (target - hi) if upper else (lo - target)

    # Wilson-Hilferty starting point.
    z = _norm_quantile(prob)
    h = 2.0 / (9.0 * dof)
    x = max(dof * (1.0 - h + z * math.sqrt(h)) ** 3, 1e-8)
    lo, hi = 0.0, None
    while True:
        if resid(x) >= 0:
            hi = x
            break
        lo = x
        x *= 2.0
    for _ in range(200):
        f = resid(x)
        if f == 0:
            return x
        if f > 0:
            hi = x
        else:
            lo = x
        pdf = chi2_pdf(x, dof)
        step = f / pdf if pdf > 0 else math.inf
        nx = x - step
        if not lo < nx < hi:
            nx = 0.5 * (lo + hi)
        if abs(nx - x) <= 1e-15 * max(x, 1e-300) or hi - lo <= 1e-15 * hi:
            return nx
        x = nx
    return x


def _norm_quantile(p: float) -> float:
    # Acklam's rational approximation; only used to seed the root search.
    a = (-3.969683028665376e01, 2.209460984245205e02, -2.759285104469687e02,
         1.383577518672690e02, -3.066479806614716e01, 2.506628277459239e00)
    b = (-5.447609879822406e01, 1.615858368580409e02, -1.556989798598866e02,
         6.680131188771972e01, -1.328068155288572e01)
    c = (-7.784894002430293e-03, -3.223964580411365e-01, -2.400758277161838e00,
         -2.549732539343734e00, 4.374664141464968e00, 2.938163982698783e00)
    d = (7.784695709041462e-03, 3.224671290700398e-01, 2.445134137142996e00,
         3.754408661907416e00)
    if p < 0.02425:
        q = math.sqrt(-2 * math.log(p))
        return (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) / \
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1)
    if p > 1 - 0.02425:
        return -_norm_quantile(1 - p)
    q = p - 0.5
    r = q * q
    return (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q / \
        (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1)


def _check_s(s: float) -> float:
    s = float(s)
    if not 0.0 < s < 1.0:
        raise ProbabilityOutOfRange(f"significance {s!r} not in (0, 1)")
    return s


def _check_dim(dim: int) -> int:
    if int(dim) != dim or dim < 2:
        raise ValidationError(f"dim must be an integer >= 2, got {dim!r}")
    return int(dim)


def state_dof(dim: int) -> int:
    return _check_dim(dim) ** 2 - 1


def point_estimate_threshold(dim: int, s: float) -> float:
    """Largest ``r_k`` that still places the iterate inside the level-``s``
    likelihood-ratio region around the data: ``t / 2`` with
    ``t = chi2_quantile(1 - s, d**2 - 1)``.
    """
    return 0.5 * chi2_quantile(1.0 - _check_s(s), state_dof(dim))


@dataclass(frozen=True)
class RegionReport:
    threshold_t: float
    nominal_pvalue: float
    worst_case_pvalue: float

    def to_dict(self) -> dict:
        return asdict(self)


def state_region_report(dim: int, s: float, r_k: float) -> RegionReport:
    """Threshold and worst-case p-value of the region ``2[L(rho_k) - L(rho)] <= t``."""
    if r_k < 0:
        raise NegativeArgument(f"r_k = {r_k!r} < 0")
    s = _check_s(s)
    dof = state_dof(dim)
    t = chi2_quantile(1.0 - s, dof)
    worst = chi2_sf(t + 2.0 * r_k, dof) if r_k > 0 else s
    return RegionReport(t, s, min(worst, s))


def state_region_rule_of_thumb(dim: int) -> float:
    """Standard deviation of ``chi2(d**2 - 1)``; stop at a fraction of it."""
    return math.sqrt(0.5 * state_dof(dim))


def expectation_ci_threshold(s: float) -> float:
    return chi2_quantile(1.0 - _check_s(s), 1)


def ci_worst_case_pvalue(s: float, r_rho: float, r_phi: float) -> float:
    """Lowest p-value an endpoint with ``D_lb = t`` can have: ``sf(t + 2 r_rho + 2 r_phi)``."""
    if r_rho < 0 or r_phi < 0:
        raise NegativeArgument("bounds must be non-negative")
    return chi2_sf(expectation_ci_threshold(s) + 2.0 * (r_rho + r_phi), 1)


class ContextKind(str, enum.Enum):
    POINT_ESTIMATE = "point_estimate"
    STATE_REGION = "state_region"
    EXPECTATION_CI = "expectation_ci"


DEFAULT_FRACTION = 0.2


@dataclass(frozen=True)
class StoppingContext:
    kind: ContextKind
    dim: int
    significance: float
    fraction: float = DEFAULT_FRACTION

    def __post_init__(self):
        object.__setattr__(self, "kind", ContextKind(self.kind))
        _check_s(self.significance)
        _check_dim(self.dim)
        if not 0 < self.fraction <= 1:
            raise ValidationError("fraction must be in (0, 1]")

    def r_threshold(self) -> float:
        """The ``r_k`` below which iterations may stop in this context.

        Regions and intervals use ``fraction`` times the standard deviation
        of the relevant chi-squared law (``d**2 - 1`` or one degree of freedom).
        """
        if self.kind is ContextKind.POINT_ESTIMATE:
            return point_estimate_threshold(self.dim, self.significance)
        if self.kind is ContextKind.STATE_REGION:
            return self.fraction * state_region_rule_of_thumb(self.dim)
        return self.fraction * math.sqrt(2.0)
