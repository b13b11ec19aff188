"""Log-likelihood, R-matrix and the gradient bound over a POVM dataset.

Hermitian operators are packed into real vectors of length ``d**2`` such that
``Tr(A B) == pack(A) @ pack(B)``. With every element of a dataset packed into
the rows of one real matrix, event probabilities and the R-matrix are each a
single BLAS matrix-vector product.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .errors import BoundOverflow, DimensionMismatch, ValidationError, ZeroProbability
from .quantum import EIG_TOL, as_hermitian, top_eig

P_FLOOR = 1e-300
_SQRT2 = np.sqrt(2.0)


def _pack_index(dim: int):
    iu = np.triu_indices(dim, k=1)
    return np.diag_indices(dim), iu


def pack_hermitian(ops: np.ndarray) -> np.ndarray:
    """Pack ``(..., d, d)`` Hermitian arrays into real ``(..., d*d)`` vectors."""
    ops = np.asarray(ops)
    dim = ops.shape[-1]
    diag, (iu, ju) = _pack_index(dim)
    return np.concatenate(
        [
            ops[..., diag[0], diag[1]].real,
            _SQRT2 * ops[..., iu, ju].real,
            _SQRT2 * ops[..., iu, ju].imag,
        ],
        axis=-1,
    )


def unpack_hermitian(vec: np.ndarray, dim: int) -> np.ndarray:
    vec = np.asarray(vec, dtype=float)
    iu, ju = np.triu_indices(dim, k=1)
    m = len(iu)
    out = np.zeros((dim, dim), dtype=complex)
    out[np.arange(dim), np.arange(dim)] = vec[:dim]
    upper = (vec[dim:dim + m] + 1j * vec[dim + m:]) / _SQRT2
    out[iu, ju] = upper
    out[ju, iu] = upper.conj()
    return out


@dataclass(frozen=True)
class PovmElement:
    op: np.ndarray
    weight: int = 1

    def __post_init__(self):
        op = as_hermitian(self.op)
        if np.linalg.eigvalsh(op)[0] < -EIG_TOL:
            raise ValidationError("POVM element is not positive semidefinite")
        if int(self.weight) != self.weight or self.weight < 1:
            raise ValidationError(f"weight must be a positive integer, got {self.weight!r}")
        object.__setattr__(self, "op", op)
        object.__setattr__(self, "weight", int(self.weight))


@dataclass(frozen=True, eq=False)
class Dataset:
    """Distinct POVM elements with multiplicities; ``n_total`` is N."""

    ops: np.ndarray
    weights: np.ndarray
    packed: np.ndarray = field(repr=False)

    def __init__(self, ops, weights=None, *, validate: bool = True):
        ops = np.asarray(ops, dtype=complex)
        if ops.ndim != 3 or ops.shape[1] != ops.shape[2] or len(ops) == 0:
            raise ValidationError(f"ops must have shape (M, d, d), got {ops.shape}")
        if weights is None:
            weights = np.ones(len(ops), dtype=np.int64)
        w = np.asarray(weights)
        if w.shape != (len(ops),):
            raise ValidationError("one weight per element required")
        if np.any(w < 1) or np.any(w != np.round(w)):
            raise ValidationError("weights must be positive integers")
        if validate:
            for op in ops:
                PovmElement(op, 1)
        ops = 0.5 * (ops + np.conj(np.swapaxes(ops, 1, 2)))
        ops.flags.writeable = False
        w = w.astype(np.int64)
        w.flags.writeable = False
        packed = pack_hermitian(ops)
        packed.flags.writeable = False
        object.__setattr__(self, "ops", ops)
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "packed", packed)

    @classmethod
    def from_elements(cls, elements: Iterable[PovmElement]) -> "Dataset":
        elements = list(elements)
        if not elements:
            raise ValidationError("dataset needs at least one element")
        dims = {e.op.shape[0] for e in elements}
        if len(dims) != 1:
            raise DimensionMismatch(f"elements have mixed dimensions {sorted(dims)}")
        return cls([e.op for e in elements], [e.weight for e in elements], validate=False)

    @classmethod
    def from_counts(cls, ops: Sequence, counts: Sequence[int]) -> "Dataset":
        """Drop zero-count outcomes and build a dataset from the rest."""
        keep = [i for i, c in enumerate(counts) if c > 0]
        return cls([ops[i] for i in keep], [counts[i] for i in keep])

    @property
    def dim(self) -> int:
        return self.ops.shape[1]

    @property
    def n_total(self) -> int:
        return int(self.weights.sum())

    @property
    def elements(self) -> list[PovmElement]:
        return [PovmElement(op, int(w)) for op, w in zip(self.ops, self.weights)]

    def __len__(self) -> int:
        return len(self.weights)


def _check_dim(data: Dataset, rho: np.ndarray) -> None:
    if rho.shape != (data.dim, data.dim):
        raise DimensionMismatch(f"state shape {rho.shape} vs dataset dim {data.dim}")


def probabilities(data: Dataset, rho) -> np.ndarray:
    """``Tr(Pi_i rho)`` for every distinct element; raises below the floor."""
    rho = np.asarray(rho, dtype=complex)
    _check_dim(data, rho)
    p = data.packed @ pack_hermitian(rho)
    bad = ~(p > P_FLOOR)
    if np.any(bad):
        i = int(np.flatnonzero(bad)[0])
        raise ZeroProbability(f"element {i} has probability {p[i]:.3g} <= {P_FLOOR:g}")
    return p


def loglik_from_probs(data: Dataset, p: np.ndarray) -> float:
    return float(data.weights @ np.log(p))


def r_from_probs(data: Dataset, p: np.ndarray) -> np.ndarray:
    return unpack_hermitian((data.weights / p) @ data.packed, data.dim)


def log_likelihood(data: Dataset, rho) -> float:
    """``sum_i w_i ln Tr(Pi_i rho)``."""
    return loglik_from_probs(data, probabilities(data, rho))


def r_matrix(data: Dataset, rho) -> np.ndarray:
    """``sum_i w_i Pi_i / Tr(rho Pi_i)``."""
    return r_from_probs(data, probabilities(data, rho))


def directional_derivative(data: Dataset, rho, sigma) -> float:
    """Slope of ``L((1-e) rho + e sigma)`` at ``e = 0``: ``Tr(sigma R) - N``."""
    sigma = np.asarray(sigma, dtype=complex)
    _check_dim(data, sigma)
    r = r_matrix(data, rho)
    return float(np.real(np.sum(sigma.T * r))) - data.n_total


def gradient_bound(data: Dataset, rho) -> float:
    """Upper bound ``max eig R(rho) - N`` on ``L(rho_ML) - L(rho)``."""
    top, _ = top_eig(r_matrix(data, rho))
    return top - data.n_total


def likelihood_ratio_bound(r: float) -> float:
    """Bound on the likelihood ratio ``L(rho_ML) / L(rho)``, i.e. ``exp(r)``."""
    r = float(r)
    if not np.isfinite(r):
        raise ValidationError(f"r must be finite, got {r!r}")
    if r > 700:
        raise BoundOverflow(f"exp({r:g}) overflows")
    return float(np.exp(r))


def qubit_example() -> Dataset:
    """Three |0> events and one |1> event; the ML state is diag(0.75, 0.25)."""
    zero = np.diag([1.0, 0.0]).astype(complex)
    one = np.diag([0.0, 1.0]).astype(complex)
    return Dataset([zero, one], [3, 1])
