"""Simulated balanced-homodyne tomography of a lossy even cat state.

Quadratures follow ``x = (a + a^dagger) / sqrt(2)`` (vacuum variance 1/2).
Detector inefficiency is a pure-loss channel ahead of an ideal detector and
is folded into each POVM element through the dual channel, so the likelihood
stays linear in the state that reaches the detector.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .errors import DimensionMismatch, EtaOutOfRange, ValidationError
from .likelihood import Dataset, PovmElement
from .quantum import even_cat_state, loss_channel, loss_kraus, pure_density

GRID_LO, GRID_HI, GRID_POINTS = -8.0, 8.0, 4096
DEFAULT_PHASES = 8


def hermite_functions(x, dim: int) -> np.ndarray:
    """Normalized Hermite functions ``psi_n(x)`` for ``n < dim``, shape ``(len(x), dim)``."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    out = np.empty((x.size, dim))
    out[:, 0] = np.pi ** -0.25 * np.exp(-0.5 * x * x)
    if dim > 1:
        out[:, 1] = np.sqrt(2.0) * x * out[:, 0]
    for n in range(2, dim):
        out[:, n] = np.sqrt(2.0 / n) * x * out[:, n - 1] - np.sqrt((n - 1) / n) * out[:, n - 2]
    return out


def quadrature_vectors(xs, thetas, dim: int) -> np.ndarray:
    """Rows ``<n|x_theta> = exp(i n theta) psi_n(x)``."""
    xs = np.atleast_1d(np.asarray(xs, dtype=float))
    thetas = np.broadcast_to(np.asarray(thetas, dtype=float), xs.shape)
    n = np.arange(dim)
    return hermite_functions(xs, dim) * np.exp(1j * np.outer(thetas, n))


def quadrature_projector(x: float, theta: float, dim: int) -> np.ndarray:
    """Truncated rank-one projector ``|x_theta><x_theta|``."""
    if dim < 1:
        raise ValidationError("dim must be >= 1")
    v = quadrature_vectors([x], [theta], dim)[0]
    return np.outer(v, v.conj())


def _check_efficiency(eta: float) -> float:
    eta = float(eta)
    if not 0.0 < eta <= 1.0:
        raise EtaOutOfRange(f"efficiency {eta!r} not in (0, 1]")
    return eta


def efficient_povm_ops(xs, thetas, eta: float, dim: int) -> np.ndarray:
    """Stack of ``sum_k A_k^dagger |x_theta><x_theta| A_k`` for many outcomes."""
    eta = _check_efficiency(eta)
    v = quadrature_vectors(xs, thetas, dim)
    if eta == 1.0:
        return v[:, :, None] * v.conj()[:, None, :]
    kraus = loss_kraus(dim, eta)
    # (A_k^dagger v)_n = sum_m A_k[m, n] v_m; the Kraus maps are real.
    w = np.einsum("kmn,im->ikn", kraus, v)
    return np.einsum("ika,ikb->iab", w, w.conj())


def efficient_povm(x: float, theta: float, eta: float, dim: int) -> PovmElement:
    return PovmElement(efficient_povm_ops([x], [theta], eta, dim)[0], 1)


def homodyne_pdf(rho, theta: float, eta: float, grid) -> np.ndarray:
    """Outcome density ``Tr[rho Pi_eta(x|theta)]`` on ``grid``."""
    rho = np.asarray(rho, dtype=complex)
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        raise DimensionMismatch(f"state must be square, got {rho.shape}")
    grid = np.asarray(grid, dtype=float)
    if grid.ndim != 1 or np.any(np.diff(grid) <= 0):
        raise ValidationError("grid must be strictly increasing")
    detected = loss_channel(rho, _check_efficiency(eta))
    v = quadrature_vectors(grid, theta, rho.shape[0])
    pdf = np.einsum("ia,ab,ib->i", v.conj(), detected, v).real
    return np.clip(pdf, 0.0, None)


@dataclass(frozen=True)
class Scenario:
    alpha: complex = 1.0
    transmissivity: float = 0.8
    efficiency: float = 0.9
    dim: int = 11
    n_samples: int = 10_000
    phases: tuple = field(default_factory=lambda: tuple(np.arange(DEFAULT_PHASES) * np.pi / DEFAULT_PHASES))
    seed: int = 1

    def __post_init__(self):
        if not 0.0 <= self.transmissivity <= 1.0:
            raise EtaOutOfRange(f"transmissivity {self.transmissivity!r} not in [0, 1]")
        _check_efficiency(self.efficiency)
        if int(self.dim) != self.dim or self.dim < 2:
            raise ValidationError("dim must be an integer >= 2")
        if int(self.n_samples) != self.n_samples or self.n_samples < 1:
            raise ValidationError("n_samples must be a positive integer")
        if len(self.phases) == 0:
            raise ValidationError("at least one phase required")
        phases = tuple(float(p) for p in self.phases)
        if any(not 0.0 <= p < np.pi for p in phases):
            raise ValidationError("phases must lie in [0, pi)")
        object.__setattr__(self, "phases", phases)
        object.__setattr__(self, "alpha", complex(self.alpha))


def scenario_truth(scenario: Scenario) -> np.ndarray:
    """The cat state after the lossy medium; detector efficiency is not applied here."""
    cat = pure_density(even_cat_state(scenario.alpha, scenario.dim))
    return loss_channel(cat, scenario.transmissivity)


class HomodyneDataset(Dataset):
    """Weight-one efficient-POVM elements that remember their ``(theta, x)`` records."""

    def __init__(self, thetas, xs, efficiency: float, dim: int):
        thetas = np.asarray(thetas, dtype=float)
        xs = np.asarray(xs, dtype=float)
        if thetas.shape != xs.shape or thetas.ndim != 1:
            raise ValidationError("thetas and xs must be equal-length vectors")
        if np.any(thetas < 0) or np.any(thetas >= np.pi):
            raise ValidationError("phases must lie in [0, pi)")
        ops = efficient_povm_ops(xs, thetas, efficiency, dim)
        super().__init__(ops, None, validate=False)
        object.__setattr__(self, "thetas", thetas)
        object.__setattr__(self, "xs", xs)
        object.__setattr__(self, "efficiency", float(efficiency))

    @property
    def records(self) -> np.ndarray:
        return np.column_stack([self.thetas, self.xs])


def sampling_grid() -> np.ndarray:
    return np.linspace(GRID_LO, GRID_HI, GRID_POINTS)


def sample_records(scenario: Scenario, rho_true, rng: Optional[np.random.Generator] = None):
    """Draw ``(thetas, xs)`` by inverse-CDF sampling with phases cycled in order."""
    rho_true = np.asarray(rho_true, dtype=complex)
    if rho_true.shape != (scenario.dim, scenario.dim):
        raise DimensionMismatch("truth state does not match scenario dimension")
    rng = np.random.default_rng(scenario.seed) if rng is None else rng
    n = scenario.n_samples
    phases = np.asarray(scenario.phases)
    idx = np.arange(n) % len(phases)
    u = rng.random(n)
    grid = sampling_grid()
    xs = np.empty(n)
    for j, theta in enumerate(phases):
        pdf = homodyne_pdf(rho_true, theta, scenario.efficiency, grid)
        cdf = np.concatenate([[0.0], np.cumsum(0.5 * (pdf[1:] + pdf[:-1]) * np.diff(grid))])
        cdf /= cdf[-1]
        sel = idx == j
        xs[sel] = np.interp(u[sel], cdf, grid)
    return phases[idx], xs


def sample_homodyne(scenario: Scenario, rho_true) -> HomodyneDataset:
    thetas, xs = sample_records(scenario, rho_true)
    return HomodyneDataset(thetas, xs, scenario.efficiency, scenario.dim)


def trapezoid(y: Sequence[float], x: Sequence[float]) -> float:
    y = np.asarray(y)
    x = np.asarray(x)
    return float(np.sum(0.5 * (y[1:] + y[:-1]) * np.diff(x)))
