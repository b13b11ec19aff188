import math

import numpy as np
import pytest

from tomostop.errors import BoundOverflow, DimensionMismatch, ValidationError, ZeroProbability
from tomostop.likelihood import (
    Dataset,
    PovmElement,
    directional_derivative,
    gradient_bound,
    likelihood_ratio_bound,
    log_likelihood,
    pack_hermitian,
    r_matrix,
    unpack_hermitian,
)
from tomostop.quantum import random_density

from oracles import random_element_dataset

ML = np.diag([0.75, 0.25])
# Closed-form binomial log-likelihoods.
L_MIXED = 4 * math.log(0.5)
L_ML = 3 * math.log(0.75) + math.log(0.25)


def identity_data(n=7, dim=3):
    return Dataset([np.eye(dim)], [n])


def mix(rho, sigma, eps):
    return (1 - eps) * rho + eps * sigma


def test_pack_roundtrip_and_inner_product(rng):
    a, b = random_density(4, rng), random_density(4, rng)
    assert pack_hermitian(a) @ pack_hermitian(b) == pytest.approx(np.trace(a @ b).real, abs=1e-14)
    np.testing.assert_allclose(unpack_hermitian(pack_hermitian(a), 4), a, atol=1e-15)


def test_dataset_invariants():
    data = Dataset([np.diag([1, 0]), np.diag([0, 1])], [3, 1])
    assert data.n_total == 4 and data.dim == 2 and len(data) == 2
    assert [e.weight for e in data.elements] == [3, 1]
    with pytest.raises(ValidationError):
        PovmElement(np.diag([1.0, -0.5]), 1)
    with pytest.raises(ValidationError):
        PovmElement(np.eye(2), 0)
    with pytest.raises(DimensionMismatch):
        Dataset.from_elements([PovmElement(np.eye(2)), PovmElement(np.eye(3))])
    with pytest.raises(AttributeError):
        data.weights = None


class TestLogLikelihood:
    def test_identity(self, rng):
        assert log_likelihood(identity_data(), random_density(3, rng)) == 0.0

    def test_mixed(self, qubit_data):
        assert log_likelihood(qubit_data, np.eye(2) / 2) == pytest.approx(L_MIXED, rel=1e-14)

    def test_ml(self, qubit_data):
        assert log_likelihood(qubit_data, ML) == pytest.approx(L_ML, rel=1e-14)
        assert L_MIXED == pytest.approx(-2.77259, abs=1e-5)
        assert L_ML == pytest.approx(-2.24934, abs=1e-5)

    def test_zero_probability(self, qubit_data):
        with pytest.raises(ZeroProbability):
            log_likelihood(qubit_data, np.diag([1.0, 0.0]))

    def test_dimension_mismatch(self, qubit_data):
        with pytest.raises(DimensionMismatch):
            log_likelihood(qubit_data, np.eye(3) / 3)


class TestRMatrix:
    def test_identity(self, rng):
        np.testing.assert_allclose(r_matrix(identity_data(5), random_density(3, rng)), 5 * np.eye(3), atol=1e-12)

    def test_mixed(self, qubit_data):
        np.testing.assert_allclose(r_matrix(qubit_data, np.eye(2) / 2), np.diag([6, 2]), atol=1e-14)

    def test_ml(self, qubit_data):
        np.testing.assert_allclose(r_matrix(qubit_data, ML), np.diag([4, 4]), atol=1e-14)

    def test_trace_identity(self, rng):
        for _ in range(100):
            data = random_element_dataset(int(rng.integers(2, 5)), rng)
            rho = random_density(data.dim, rng)
            r = r_matrix(data, rho)
            assert np.max(np.abs(r - r.conj().T)) < 1e-12
            assert np.trace(rho @ r).real == pytest.approx(data.n_total, rel=1e-8)


class TestDirectionalDerivative:
    def test_no_move(self, qubit_data, rng):
        rho = random_density(2, rng)
        assert directional_derivative(qubit_data, rho, rho) == pytest.approx(0.0, abs=1e-12)

    def test_hand_value(self, qubit_data):
        assert directional_derivative(qubit_data, np.eye(2) / 2, np.diag([1, 0])) == pytest.approx(2.0)

    def test_finite_differences(self, rng):
        h = 1e-5
        for _ in range(50):
            data = random_element_dataset(int(rng.integers(2, 5)), rng)
            rho, sigma = random_density(data.dim, rng), random_density(data.dim, rng)
            fd = (log_likelihood(data, mix(rho, sigma, h)) - log_likelihood(data, mix(rho, sigma, -h))) / (2 * h)
            exact = directional_derivative(data, rho, sigma)
            assert exact == pytest.approx(fd, rel=1e-6, abs=1e-8)


class TestGradientBound:
    def test_identity(self, rng):
        assert gradient_bound(identity_data(), random_density(3, rng)) == pytest.approx(0.0, abs=1e-12)

    def test_mixed(self, qubit_data):
        assert gradient_bound(qubit_data, np.eye(2) / 2) == pytest.approx(2.0)

    def test_ml(self, qubit_data):
        assert gradient_bound(qubit_data, ML) == pytest.approx(0.0, abs=1e-12)

    def test_bound_and_concavity(self, rng):
        for _ in range(300):
            data = random_element_dataset(int(rng.integers(2, 5)), rng)
            rho, sigma = random_density(data.dim, rng), random_density(data.dim, rng)
            r = gradient_bound(data, rho)
            assert r >= -1e-8 * data.n_total
            assert log_likelihood(data, sigma) - log_likelihood(data, rho) <= r + 1e-9
            assert directional_derivative(data, rho, sigma) <= r + 1e-9
            eps = rng.random()
            lhs = log_likelihood(data, mix(rho, sigma, eps))
            rhs = (1 - eps) * log_likelihood(data, rho) + eps * log_likelihood(data, sigma)
            assert lhs >= rhs - 1e-10


class TestLikelihoodRatioBound:
    def test_values(self):
        assert likelihood_ratio_bound(0) == 1.0
        assert likelihood_ratio_bound(2) == pytest.approx(7.389, abs=1e-3)
        assert likelihood_ratio_bound(0.1) == pytest.approx(1.105, abs=1e-3)

    def test_overflow(self):
        with pytest.raises(BoundOverflow):
            likelihood_ratio_bound(701)
