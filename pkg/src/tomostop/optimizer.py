"""Iterative likelihood maximizers instrumented with the gradient bound.

Both algorithms work on the Lagrangian ``K(rho) = L(rho) + lam * Tr(rho A)``;
the plain likelihood problem is ``lam = 0``. The gradient matrix of ``K`` is
``R(rho) + lam * A`` and the bound on the remaining increase of ``K`` is
``max eig(R + lam A) - N - lam Tr(rho A)``.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .errors import DegenerateUpdate, DimensionMismatch, NonPositiveUpdate, ValidationError
from .likelihood import (
    Dataset,
    loglik_from_probs,
    pack_hermitian,
    probabilities,
    r_from_probs,
)
from .quantum import as_hermitian, make_density, maximally_mixed, top_eig, trace_distance

_INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0
LINE_SEARCH_TOL = 1e-10
STALL_WINDOW = 50


class Algorithm(str, enum.Enum):
    RHOR = "rhor"
    GRADIENT_ASCENT = "gradient_ascent"


class StopReason(str, enum.Enum):
    RULE_SATISFIED = "rule_satisfied"
    MAX_ITERS = "max_iters"
    STALLED = "stalled"


@dataclass(frozen=True)
class StopSpec:
    r_threshold: float
    max_iters: int = 10_000
    stall_trace_dist: float = 1e-12

    def __post_init__(self):
        if not self.r_threshold > 0:
            raise ValidationError("r_threshold must be > 0")
        if self.max_iters < 1:
            raise ValidationError("max_iters must be >= 1")


@dataclass(frozen=True)
class IterationRecord:
    k: int
    loglik: float
    r_k: float
    trace_dist_prev: Optional[float]
    step_kind: Algorithm
    epsilon: Optional[float] = None
    objective: Optional[float] = None


@dataclass
class FitResult:
    state: np.ndarray
    trace: list[IterationRecord]
    stop_reason: StopReason
    final_r: float
    n_total: int = 0

    @property
    def loglik(self) -> float:
        return self.trace[-1].loglik

    @property
    def iterations(self) -> int:
        return len(self.trace)


def golden_section_max(f: Callable[[float], float], a: float, b: float, tol: float = LINE_SEARCH_TOL):
    """Maximize a unimodal ``f`` on ``[a, b]``; returns ``(x, f(x))``."""
    c = b - _INV_PHI * (b - a)
    d = a + _INV_PHI * (b - a)
    fc, fd = f(c), f(d)
    while b - a > tol:
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - _INV_PHI * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + _INV_PHI * (b - a)
            fd = f(d)
    return (c, fc) if fc >= fd else (d, fd)


class Objective:
    """``K(rho) = L(rho) + lam Tr(rho A)`` evaluated at cached points."""

    def __init__(self, data: Dataset, lam: float = 0.0, observable=None):
        self.data = data
        self.lam = float(lam)
        if observable is None:
            self.a = None
            self._a_packed = None
        else:
            self.a = as_hermitian(observable)
            if self.a.shape != (data.dim, data.dim):
                raise DimensionMismatch("observable dimension does not match dataset")
            self._a_packed = pack_hermitian(self.a)
        self.n = data.n_total

    def point(self, rho: np.ndarray) -> "Point":
        p = probabilities(self.data, rho)
        loglik = loglik_from_probs(self.data, p)
        f = float(pack_hermitian(rho) @ self._a_packed) if self.a is not None else 0.0
        return Point(rho, p, loglik, f, loglik + self.lam * f)

    def gradient(self, pt: "Point") -> np.ndarray:
        g = r_from_probs(self.data, pt.p)
        if self.a is not None:
            g = g + self.lam * self.a
        return g

    def bound(self, pt: "Point", g: Optional[np.ndarray] = None) -> float:
        g = self.gradient(pt) if g is None else g
        top, _ = top_eig(g)
        return top - self.n - self.lam * pt.f


@dataclass
class Point:
    rho: np.ndarray
    p: np.ndarray
    loglik: float
    f: float
    value: float


def _rhor_candidate(obj: Objective, pt: Point, g: np.ndarray) -> np.ndarray:
    if obj.a is not None:
        # Identity shift: same K-gradient on trace-one states, keeps Tr(rho G) = N.
        g = g - obj.lam * pt.f * np.eye(obj.data.dim)
        if top_eig(g)[0] <= 0:
            raise NonPositiveUpdate("shifted gradient matrix has no positive eigenvalue")
    m = g @ pt.rho @ g
    tr = float(np.trace(m).real)
    if not tr > 1e-300:
        raise DegenerateUpdate(f"normalization trace {tr:.3g}")
    return make_density(m / tr)


def _line_search(obj: Objective, pt: Point, g: np.ndarray) -> tuple[np.ndarray, float]:
    _, vec = top_eig(g)
    sigma = np.outer(vec, vec.conj())
    q = obj.data.packed @ pack_hermitian(sigma)
    f_sigma = float(np.real(vec.conj() @ obj.a @ vec)) if obj.a is not None else 0.0
    slope = float(obj.data.weights @ (q / pt.p)) - obj.n + obj.lam * (f_sigma - pt.f)
    if not slope > 0:
        return pt.rho, 0.0
    w = obj.data.weights
    p0, dq, df = pt.p, q - pt.p, f_sigma - pt.f

    def k_of(eps: float) -> float:
        with np.errstate(divide="ignore", invalid="ignore"):
            val = float(w @ np.log(p0 + eps * dq)) + obj.lam * (pt.f + eps * df)
        return val if np.isfinite(val) else -np.inf

    eps, _ = golden_section_max(k_of, 0.0, 1.0)
    rho = make_density((1.0 - eps) * pt.rho + eps * sigma)
    return rho, eps


def rhor_step(data: Dataset, rho) -> np.ndarray:
    """One unsafeguarded ``R rho R / Tr(R rho R)`` update."""
    obj = Objective(data)
    pt = obj.point(np.asarray(rho, dtype=complex))
    return _rhor_candidate(obj, pt, obj.gradient(pt))


def gradient_ascent_step(data: Dataset, rho) -> tuple[np.ndarray, float]:
    """Move toward the top eigenstate of ``R`` with an exact line search.

    Returns the new state and the mixing weight ``eps``; the log-likelihood
    never decreases.
    """
    obj = Objective(data)
    pt = obj.point(np.asarray(rho, dtype=complex))
    new, eps = _line_search(obj, pt, obj.gradient(pt))
    if eps > 0 and obj.point(new).value < pt.value:
        return pt.rho, 0.0
    return new, eps


def _safeguarded_step(obj: Objective, pt: Point, g: np.ndarray, algo: Algorithm):
    """Return ``(next_point, kind, eps)`` with ``next.value >= pt.value``."""
    if algo is Algorithm.RHOR:
        try:
            cand = obj.point(_rhor_candidate(obj, pt, g))
        except (DegenerateUpdate, ArithmeticError):
            cand = None
        # Strict: a tie can mean G rho G is proportional to rho (e.g. G with
        # eigenvalues +c and -c) while K can still increase.
        if cand is not None and cand.value > pt.value:
            return cand, Algorithm.RHOR, None
    rho, eps = _line_search(obj, pt, g)
    if eps == 0.0:
        return pt, Algorithm.GRADIENT_ASCENT, 0.0
    cand = obj.point(rho)
    if cand.value < pt.value:
        return pt, Algorithm.GRADIENT_ASCENT, 0.0
    return cand, Algorithm.GRADIENT_ASCENT, eps


def run(obj: Objective, algo, stop: StopSpec, rho0=None) -> FitResult:
    algo = Algorithm(_canonical_algo(algo))
    rho = maximally_mixed(obj.data.dim) if rho0 is None else make_density(rho0)
    pt = obj.point(rho)
    g = obj.gradient(pt)
    trace: list[IterationRecord] = []
    still = 0
    reason = StopReason.MAX_ITERS
    for k in range(1, stop.max_iters + 1):
        nxt, kind, eps = _safeguarded_step(obj, pt, g, algo)
        dist = trace_distance(pt.rho, nxt.rho) if nxt is not pt else 0.0
        pt = nxt
        g = obj.gradient(pt)
        r = obj.bound(pt, g)
        trace.append(IterationRecord(k, pt.loglik, r, dist, kind, eps, pt.value))
        if r <= stop.r_threshold:
            reason = StopReason.RULE_SATISFIED
            break
        still = still + 1 if dist < stop.stall_trace_dist else 0
        if still >= STALL_WINDOW:
            reason = StopReason.STALLED
            break
    return FitResult(pt.rho, trace, reason, trace[-1].r_k, obj.n)


def _canonical_algo(algo) -> str:
    if isinstance(algo, Algorithm):
        return algo.value
    return {"gradient": "gradient_ascent"}.get(str(algo), str(algo))


def maximize(data: Dataset, algo="rhor", stop: Optional[StopSpec] = None, rho0=None) -> FitResult:
    """Maximize the log-likelihood until ``r_k <= stop.r_threshold``.

    ``algo`` is ``"rhor"`` (safeguarded fixed-point iteration; any step that
    would lower the likelihood is replaced by a line-search step) or
    ``"gradient_ascent"``. The state defaults to ``I/d``.
    """
    stop = stop or StopSpec(r_threshold=1e-6)
    return run(Objective(data), algo, stop, rho0)
