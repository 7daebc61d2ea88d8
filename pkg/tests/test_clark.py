import numpy as np
import pytest

from helpers import richardson_derivative
from modelspace.acceptance import random_circle, random_disk, random_theta, random_vector
from modelspace.clark import (
    cauchy_reconstruct,
    clark_coefficient,
    clark_measure,
    clark_unitary,
    embed,
    unembed,
    unitary_embedding,
    weighted_norm,
)
from modelspace.errors import DomainError, MismatchError
from modelspace.inner_function import BlaschkeProduct, deriv, evaluate
from modelspace.model_space import eval_vector, kernel, tm_basis

norm = np.linalg.norm


def nearest_match(a, b):
    return max(np.min(np.abs(np.asarray(b) - x)) for x in a)


class TestMeasure:
    def test_cube_roots(self):
        basis = tm_basis(BlaschkeProduct((0j,) * 3))
        cm = clark_measure(basis, 1.0)
        roots = np.exp(2j * np.pi * np.arange(3) / 3)
        assert nearest_match(cm.atoms, roots) <= 1e-12
        assert np.allclose(cm.masses, 1 / 3, atol=1e-12)

    def test_degree_one(self):
        basis = tm_basis(BlaschkeProduct((0j,)))
        alpha = np.exp(0.9j)
        cm = clark_measure(basis, alpha)
        assert len(cm) == 1
        assert abs(cm.atoms[0] - alpha) <= 1e-12 and cm.masses[0] == pytest.approx(1.0)

    def test_atoms_solve_theta_equals_alpha(self, rng):
        # the origin is not a zero here, so the perturbation constant matters
        for _ in range(5):
            theta = random_theta(rng, 5)
            alpha = random_circle(rng)
            cm = clark_measure(tm_basis(theta), alpha)
            assert np.max(np.abs(evaluate(theta, cm.atoms) - alpha)) <= 1e-8
            assert np.allclose(np.abs(cm.atoms), 1.0, atol=1e-14)

    def test_masses_are_inverse_derivative(self, random_basis, rng):
        cm = clark_measure(random_basis, random_circle(rng))
        assert np.allclose(cm.masses, 1 / np.abs(deriv(random_basis.theta, cm.atoms, 1)), rtol=1e-8)

    def test_eigenvectors_are_boundary_kernels(self, random_basis, rng):
        alpha = random_circle(rng)
        U = clark_unitary(random_basis, alpha)
        for xi in clark_measure(random_basis, alpha).atoms:
            k = kernel(random_basis, xi)
            assert np.linalg.norm(U @ k - xi * k) <= 1e-9 * norm(k)

    def test_unitary(self, random_basis, rng):
        for _ in range(10):
            U = clark_unitary(random_basis, random_circle(rng))
            assert np.max(np.abs(U.conj().T @ U - np.eye(random_basis.dim))) <= 1e-10

    def test_coefficient_reduces_to_alpha_when_origin_is_zero(self):
        alpha = np.exp(2.1j)
        assert clark_coefficient(BlaschkeProduct((0j, 0.3)), alpha) == pytest.approx(alpha, abs=1e-15)

    def test_non_unimodular_alpha(self, z2_basis):
        with pytest.raises(DomainError):
            clark_measure(z2_basis, 0.5)


class TestEmbedding:
    def test_parseval(self, random_basis, rng):
        cm = clark_measure(random_basis, random_circle(rng))
        for _ in range(10):
            f = random_vector(rng, random_basis.dim)
            assert weighted_norm(cm, embed(random_basis, cm, f)) == pytest.approx(norm(f), rel=1e-9)

    def test_embedding_matrix_is_unitary(self, random_basis, rng):
        W = unitary_embedding(random_basis, clark_measure(random_basis, random_circle(rng)))
        assert np.max(np.abs(W.conj().T @ W - np.eye(random_basis.dim))) <= 1e-8

    def test_origin_kernel_embeds_to_ones(self):
        basis = tm_basis(BlaschkeProduct((0j, 0.4 - 0.2j, -0.5)))
        cm = clark_measure(basis, np.exp(0.4j))
        assert np.allclose(embed(basis, cm, kernel(basis, 0.0)), 1.0, atol=1e-12)

    def test_kernel_values(self, random_basis, rng):
        alpha = random_circle(rng)
        cm = clark_measure(random_basis, alpha)
        lam = random_disk(rng, 0.8)
        expected = (1 - np.conj(evaluate(random_basis.theta, lam)) * alpha) / (1 - np.conj(lam) * cm.atoms)
        assert np.allclose(embed(random_basis, cm, kernel(random_basis, lam)), expected, atol=1e-10)

    def test_indicator_unembeds_to_weighted_kernel(self, random_basis, rng):
        cm = clark_measure(random_basis, random_circle(rng))
        j = 2
        e = np.zeros(random_basis.dim)
        e[j] = 1.0
        assert np.allclose(unembed(random_basis, cm, e), cm.masses[j] * kernel(random_basis, cm.atoms[j]),
                           atol=1e-12)

    def test_round_trips(self, random_basis, rng):
        cm = clark_measure(random_basis, random_circle(rng))
        f = random_vector(rng, random_basis.dim)
        vals = random_vector(rng, random_basis.dim)
        assert np.allclose(unembed(random_basis, cm, embed(random_basis, cm, f)), f, atol=1e-9)
        assert np.allclose(embed(random_basis, cm, unembed(random_basis, cm, vals)), vals, atol=1e-8)

    def test_length_mismatch(self, random_basis, rng):
        cm = clark_measure(random_basis, 1.0)
        with pytest.raises(MismatchError):
            unembed(random_basis, cm, np.ones(3))


class TestReconstruction:
    def test_constant_in_degree_one(self):
        basis = tm_basis(BlaschkeProduct((0j,)))
        cm = clark_measure(basis, 1j)
        assert cauchy_reconstruct(cm, np.ones(1), 0.0, basis) == pytest.approx(1.0, abs=1e-14)

    def test_matches_evaluation(self, random_basis, rng):
        cm = clark_measure(random_basis, random_circle(rng))
        f = random_vector(rng, random_basis.dim)
        vals = embed(random_basis, cm, f)
        for _ in range(5):
            z = random_disk(rng, 0.9)
            assert abs(cauchy_reconstruct(cm, vals, z, random_basis) - eval_vector(random_basis, f, z)) <= 1e-8

    def test_derivative(self, random_basis, rng):
        cm = clark_measure(random_basis, random_circle(rng))
        f = random_vector(rng, random_basis.dim)
        vals = embed(random_basis, cm, f)
        z = random_disk(rng, 0.6)
        fd = richardson_derivative(lambda w: cauchy_reconstruct(cm, vals, w, random_basis), z)
        assert abs(fd - eval_vector(random_basis, f, z, 1)) <= 1e-5

    def test_outside_disk(self, z2_basis):
        cm = clark_measure(z2_basis, 1.0)
        with pytest.raises(DomainError):
            cauchy_reconstruct(cm, np.ones(2), 1.0, z2_basis)
