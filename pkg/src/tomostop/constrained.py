"""Likelihood-ratio confidence intervals for an expectation value ``Tr(rho A)``.

The likelihood is profiled over level sets of ``Tr(rho A)`` by maximizing
``K(rho, lam) = L(rho) + lam Tr(rho A)`` for fixed multipliers. Increasing
``lam`` moves the constrained optimum to larger ``Tr(rho A)`` and lower
likelihood, so each interval endpoint is found by doubling and bisecting on
``lam`` until the certified lower bound ``D_lb`` on the profile statistic
lands in ``[t, t + slack]``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .confidence import chi2_sf, expectation_ci_threshold
from .errors import BracketFailure, ValidationError
from .likelihood import Dataset
from .optimizer import FitResult, Objective, StopSpec, run
from .quantum import as_hermitian

CI_SLACK = 0.1
LAMBDA_LIMIT = 1e6
MAX_BISECTIONS = 60


def k_objective(data: Dataset, rho, lam: float, a) -> float:
    """``L(rho) + lam Tr(rho A)``."""
    obj = Objective(data, lam, a)
    return obj.point(np.asarray(rho, dtype=complex)).value


def constrained_bound(data: Dataset, rho, lam: float, a) -> float:
    """Bound ``max eig(R + lam A) - N - lam Tr(rho A)`` on the possible increase of K."""
    obj = Objective(data, lam, a)
    return obj.bound(obj.point(np.asarray(rho, dtype=complex)))


@dataclass
class ConstrainedFit:
    state: np.ndarray
    lam: float
    f_value: float
    loglik: float
    r_phi: float
    fit: FitResult = field(repr=False)


def maximize_constrained(data: Dataset, lam: float, a, stop: StopSpec, rho0=None,
                         algo="rhor") -> ConstrainedFit:
    """Maximize ``K(., lam)`` until the constrained bound drops below threshold."""
    obj = Objective(data, lam, a)
    res = run(obj, algo, stop, rho0)
    f = float(np.real(np.sum(res.state.T * obj.a)))
    return ConstrainedFit(res.state, float(lam), f, res.loglik, res.final_r, res)


@dataclass(frozen=True)
class EndpointReport:
    lam: float
    f: float
    D_lb: float
    D_ub: float
    pvalue_lb: float
    pvalue_ub: float
    r_phi: float
    loglik: float

    def to_dict(self) -> dict:
        return {
            "lambda": self.lam,
            "f": self.f,
            "D_lb": self.D_lb,
            "D_ub": self.D_ub,
            "pvalue_lb": self.pvalue_lb,
            "pvalue_ub": self.pvalue_ub,
        }


@dataclass(frozen=True)
class ConfidenceInterval:
    """``[f_lo, f_hi]`` with the certificates of the lower and upper endpoint.

    ``pvalue_lb`` is the p-value of ``D_ub`` (a lower bound on the endpoint's
    p-value) and ``pvalue_ub`` the p-value of ``D_lb``.
    """

    f_lo: float
    f_hi: float
    s: float
    t: float
    endpoints: tuple[EndpointReport, EndpointReport]

    def to_dict(self) -> dict:
        return {
            "f_lo": self.f_lo,
            "f_hi": self.f_hi,
            "s": self.s,
            "t": self.t,
            "endpoints": [e.to_dict() for e in self.endpoints],
        }


def _endpoint(fit: ConstrainedFit, l_rho: float, r_rho: float) -> EndpointReport:
    d_lb = 2.0 * (l_rho - fit.loglik - fit.r_phi)
    d_ub = 2.0 * (l_rho + r_rho - fit.loglik)
    return EndpointReport(
        lam=fit.lam,
        f=fit.f_value,
        D_lb=d_lb,
        D_ub=d_ub,
        pvalue_lb=chi2_sf(max(d_ub, 0.0), 1),
        pvalue_ub=chi2_sf(max(d_lb, 0.0), 1),
        r_phi=fit.r_phi,
        loglik=fit.loglik,
    )


def _search(data, a, sign, t, slack, unconstrained, stop, algo) -> EndpointReport:
    l_rho, r_rho = unconstrained.loglik, unconstrained.final_r

    def solve(lam):
        fit = maximize_constrained(data, lam, a, stop, rho0=unconstrained.state, algo=algo)
        return fit, _endpoint(fit, l_rho, r_rho)

    lo, hi = 0.0, float(sign)
    while True:
        fit, rep = solve(hi)
        if rep.D_lb >= t:
            break
        lo, hi = hi, 2.0 * hi
        if abs(hi) > LAMBDA_LIMIT:
            raise BracketFailure(
                f"D_lb never reached t = {t:.4g} for |lambda| <= {LAMBDA_LIMIT:g}; "
                "the observable may be uninformative or unbounded in this direction"
            )
    best = rep
    for _ in range(MAX_BISECTIONS):
        if best.D_lb <= t + slack:
            break
        mid = 0.5 * (lo + hi)
        _, rep = solve(mid)
        if rep.D_lb < t:
            lo = mid
        else:
            hi, best = mid, rep
    return best


def expectation_ci(data: Dataset, a, s: float, unconstrained: FitResult, stop: StopSpec,
                   algo="rhor", slack: float = CI_SLACK) -> ConfidenceInterval:
    """Conservative likelihood-ratio interval for ``Tr(rho A)`` at significance ``s``.

    Every reported endpoint satisfies ``D_lb >= t`` with
    ``t = chi2_quantile(1 - s, 1)``, so the interval contains the exact
    profile-likelihood interval.
    """
    a = as_hermitian(a)
    if a.shape != (data.dim, data.dim):
        raise ValidationError("observable dimension does not match dataset")
    centered = a - np.trace(a).real / data.dim * np.eye(data.dim)
    if np.max(np.abs(centered)) < 1e-12 * max(1.0, np.max(np.abs(a))):
        raise BracketFailure("observable is proportional to the identity; Tr(rho A) is constant")
    t = expectation_ci_threshold(s)
    lower = _search(data, a, -1.0, t, slack, unconstrained, stop, algo)
    upper = _search(data, a, +1.0, t, slack, unconstrained, stop, algo)
    return ConfidenceInterval(lower.f, upper.f, float(s), t, (lower, upper))


def sandwich_check(ci: ConfidenceInterval, exact_d: Sequence[float], tol: float = 0.0) -> bool:
    """True iff ``D_lb <= exact <= D_ub`` at both endpoints."""
    if len(exact_d) != len(ci.endpoints):
        raise ValidationError("one exact statistic per endpoint required")
    return all(e.D_lb - tol <= d <= e.D_ub + tol for e, d in zip(ci.endpoints, exact_d))
