"""Finite-dimensional primitives: density matrices, eigensolves, Fock states
and the bosonic pure-loss channel.

Operators are plain ``numpy`` complex arrays of shape ``(d, d)``; state
vectors are 1-D complex arrays. Validation helpers return cleaned copies.
"""
from __future__ import annotations

from functools import lru_cache
from math import comb

import numpy as np

from .errors import (
    DegenerateState,
    DimensionMismatch,
    DimensionTooLarge,
    EtaOutOfRange,
    NotHermitian,
    NotPositive,
    SolverFailure,
    TraceNotOne,
    ValidationError,
)

HERM_TOL = 1e-10
EIG_TOL = 1e-10
TRACE_TOL = 1e-10
MAX_DIM = 256


def _square(m) -> np.ndarray:
    m = np.asarray(m, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] == 0:
        raise ValidationError(f"expected a non-empty square matrix, got shape {m.shape}")
    if m.shape[0] > MAX_DIM:
        raise DimensionTooLarge(f"dimension {m.shape[0]} exceeds cap {MAX_DIM}")
    return m


def as_hermitian(m, tol: float = HERM_TOL) -> np.ndarray:
    """Check self-adjointness entrywise and return the symmetrized matrix."""
    m = _square(m)
    dev = np.max(np.abs(m - m.conj().T))
    if not np.isfinite(dev) or dev > tol:
        raise NotHermitian(f"max |m_ij - conj(m_ji)| = {dev:.3g} > {tol:g}")
    return 0.5 * (m + m.conj().T)


def make_density(m) -> np.ndarray:
    """Validate ``m`` as a density matrix.

    Eigenvalues in ``[-1e-10, 0)`` are clamped to zero and the trace is
    renormalized; anything more negative raises :class:`NotPositive`.
    """
    h = as_hermitian(m)
    tr = float(np.trace(h).real)
    if abs(tr - 1.0) > TRACE_TOL:
        raise TraceNotOne(f"trace = {tr!r}")
    w, v = _eigh(h)
    if w[0] < -EIG_TOL:
        raise NotPositive(f"min eigenvalue {w[0]:.3g} < {-EIG_TOL:g}")
    if w[0] < 0:
        w = np.clip(w, 0.0, None)
        h = (v * w) @ v.conj().T
        h = 0.5 * (h + h.conj().T)
        tr = float(np.trace(h).real)
    if tr != 1.0:
        h = h / tr
    return h


def is_density(m) -> bool:
    try:
        make_density(m)
    except ValidationError:
        return False
    return True


def maximally_mixed(dim: int) -> np.ndarray:
    return np.eye(dim, dtype=complex) / dim


def pure_density(vec) -> np.ndarray:
    v = np.asarray(vec, dtype=complex)
    return np.outer(v, v.conj())


def _eigh(h: np.ndarray):
    try:
        return np.linalg.eigh(h)
    except np.linalg.LinAlgError as exc:  # pragma: no cover - LAPACK failure
        raise SolverFailure(str(exc)) from exc


def max_eig_hermitian(h) -> tuple[float, np.ndarray]:
    """Largest eigenvalue of a Hermitian matrix and a unit eigenvector."""
    h = as_hermitian(h)
    w, v = _eigh(h)
    return float(w[-1]), v[:, -1]


def top_eig(h: np.ndarray) -> tuple[float, np.ndarray]:
    # Unchecked variant for internal hot paths; h must already be Hermitian.
    w, v = _eigh(h)
    return float(w[-1]), v[:, -1]


def trace_distance(a, b) -> float:
    """``Tr|a - b| / 2`` for two density matrices of equal dimension."""
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    if a.shape != b.shape:
        raise DimensionMismatch(f"{a.shape} vs {b.shape}")
    diff = a - b
    w = np.linalg.eigvalsh(0.5 * (diff + diff.conj().T))
    return float(min(1.0, 0.5 * np.sum(np.abs(w))))


def fidelity_pure(rho, vec) -> float:
    v = np.asarray(vec, dtype=complex)
    return float(np.real(v.conj() @ np.asarray(rho) @ v))


def purity(rho) -> float:
    rho = np.asarray(rho)
    return float(np.real(np.trace(rho @ rho)))


def mean_photon_number(rho) -> float:
    rho = np.asarray(rho)
    return float(np.real(np.sum(np.arange(rho.shape[0]) * np.diag(rho))))


def _fock_amplitudes(alpha: complex, dim: int) -> np.ndarray:
    """alpha**n / sqrt(n!) for n < dim, by recurrence."""
    if dim < 1:
        raise ValidationError("dim must be >= 1")
    c = np.empty(dim, dtype=complex)
    c[0] = 1.0
    for n in range(1, dim):
        c[n] = c[n - 1] * alpha / np.sqrt(n)
    return c


def _normalized(c: np.ndarray) -> np.ndarray:
    norm = np.linalg.norm(c)
    if norm < 1e-12:
        raise DegenerateState(f"state norm {norm:.3g} too small to normalize")
    return c / norm


def coherent_state(alpha: complex, dim: int) -> np.ndarray:
    """Coherent state truncated to ``dim`` Fock levels, renormalized."""
    c = np.exp(-0.5 * abs(alpha) ** 2) * _fock_amplitudes(alpha, dim)
    return _normalized(c)


def even_cat_state(alpha: complex, dim: int) -> np.ndarray:
    """Normalized ``|alpha> + |-alpha>`` in the truncated Fock basis."""
    c = _fock_amplitudes(alpha, dim)
    c[1::2] = 0.0
    return _normalized(2.0 * c)


def _check_eta(eta: float) -> float:
    eta = float(eta)
    if not 0.0 <= eta <= 1.0:
        raise EtaOutOfRange(f"eta = {eta!r} not in [0, 1]")
    return eta


@lru_cache(maxsize=64)
def _loss_kraus_cached(dim: int, eta: float) -> np.ndarray:
    kraus = np.zeros((dim, dim, dim))
    for k in range(dim):
        for n in range(k, dim):
            kraus[k, n - k, n] = np.sqrt(comb(n, k) * eta ** (n - k) * (1.0 - eta) ** k)
    kraus.flags.writeable = False
    return kraus


def loss_kraus(dim: int, eta: float) -> np.ndarray:
    """Kraus operators of the pure-loss channel, stacked as ``(k, out, in)``."""
    return _loss_kraus_cached(int(dim), _check_eta(eta))


def loss_channel(rho, eta: float) -> np.ndarray:
    """Apply ``sum_k A_k rho A_k^dagger`` with binomial photon-loss Kraus maps."""
    rho = np.asarray(rho, dtype=complex)
    kraus = loss_kraus(rho.shape[0], eta)
    out = np.einsum("kab,bc,kdc->ad", kraus, rho, kraus)
    return 0.5 * (out + out.conj().T)


def adjoint_loss_on_operator(op, eta: float) -> np.ndarray:
    """Heisenberg-picture dual of :func:`loss_channel`."""
    op = np.asarray(op, dtype=complex)
    kraus = loss_kraus(op.shape[0], eta)
    out = np.einsum("kba,bc,kcd->ad", kraus, op, kraus)
    return 0.5 * (out + out.conj().T)


def random_density(dim: int, rng: np.random.Generator, rank: int | None = None) -> np.ndarray:
    """Ginibre-distributed random state; used by tests and benchmarks."""
    rank = dim if rank is None else rank
    g = rng.normal(size=(dim, rank)) + 1j * rng.normal(size=(dim, rank))
    rho = g @ g.conj().T
    return make_density(rho / np.trace(rho).real)
