import numpy as np
import pytest

from helpers import max_principal_angle_sin
from modelspace.acceptance import generator, random_matrix, random_theta, synthesized_case
from modelspace.decompose import (
    Component,
    Decomposition,
    decompose,
    elementary_coefficients,
    find_range_structure,
    fit_coefficients,
    range_inclusion_residual,
    synthesize,
)
from modelspace.errors import FitError, NotTTOError, OrderError, SpanMismatchError, StructureError
from modelspace.inner_function import BlaschkeProduct
from modelspace.linalg import range_basis
from modelspace.model_space import conj_kernel, tm_basis
from modelspace.tto import BOUNDARY, D, DBAR, K_TENSOR_KTILDE, KTILDE_TENSOR_K, derived_op, rank_one


@pytest.fixture
def basis8():
    return tm_basis(random_theta(generator(7), 8))


def relative(A, B):
    return np.linalg.norm(A - B) / np.linalg.norm(B)


class TestRangeBasis:
    def test_zero(self, basis8):
        assert range_basis(np.zeros((8, 8))).shape == (8, 0)

    def test_rank_one_is_conjugate_kernel(self, basis8):
        lam = 0.2 - 0.3j
        R = range_basis(rank_one(basis8, lam, KTILDE_TENSOR_K))
        assert R.shape[1] == 1
        assert max_principal_angle_sin(R, conj_kernel(basis8, lam)[:, None]) <= 1e-10

    def test_derived_op_rank(self, basis8):
        for n in range(4):
            assert range_basis(derived_op(basis8, 0.1 + 0.4j, n, D)).shape[1] == n + 1


class TestRangeStructure:
    def test_single_d_component(self, basis8):
        s = find_range_structure(basis8, derived_op(basis8, 0.4, 1, D))
        assert len(s.components) == 1
        c = s.components[0]
        assert abs(c.point - 0.4) <= 1e-6 and c.order == 1 and c.orientation == D

    def test_monomial_rank_one_at_origin(self, z2_basis):
        s = find_range_structure(z2_basis, rank_one(z2_basis, 0.0, KTILDE_TENSOR_K))
        (c,) = s.components
        assert abs(c.point) <= 1e-6 and c.order == 0 and c.orientation == D

    def test_boundary_point(self, basis8):
        lam = np.exp(1.3j)
        (c,) = find_range_structure(basis8, derived_op(basis8, lam, 0, DBAR)).components
        assert abs(c.point - lam) <= 1e-6 and c.orientation == BOUNDARY

    def test_interior_dbar(self, basis8):
        (c,) = find_range_structure(basis8, derived_op(basis8, -0.3 + 0.5j, 2, DBAR)).components
        assert abs(c.point - (-0.3 + 0.5j)) <= 1e-6 and c.order == 2 and c.orientation == DBAR

    def test_rank_matches(self, basis8):
        A = derived_op(basis8, 0.3, 1, D) + derived_op(basis8, -0.5j, 0, DBAR)
        s = find_range_structure(basis8, A)
        assert s.rank == 3

    def test_zero_operator(self, basis8):
        with pytest.raises(StructureError):
            find_range_structure(basis8, np.zeros((8, 8)))

    def test_full_range(self, basis8):
        with pytest.raises(StructureError):
            find_range_structure(basis8, np.eye(8))

    def test_range_inclusion(self, basis8):
        res, _ = range_inclusion_residual(basis8, derived_op(basis8, 0.2j, 2, D))
        assert res <= 1e-8


class TestFitCoefficients:
    def test_scaled_member(self, basis8):
        A = 2 * derived_op(basis8, 0.3, 0, D)
        d = decompose(basis8, A)
        (c,) = d.components
        assert abs(c.point - 0.3) <= 1e-6 and np.allclose(c.coefficients, [2], atol=1e-8)

    def test_two_components(self, basis8):
        A = derived_op(basis8, 0.3, 2, D) + 5 * rank_one(basis8, -0.6, K_TENSOR_KTILDE)
        d = decompose(basis8, A)
        by_point = {round(c.point.real, 6): c for c in d.components}
        assert set(by_point) == {0.3, -0.6}
        assert np.allclose(by_point[0.3].coefficients, [0, 0, 1], atol=1e-7)
        assert np.allclose(by_point[-0.6].coefficients, [5], atol=1e-7)

    def test_same_point_stacking(self, basis8):
        A = derived_op(basis8, 0.3, 1, D) + derived_op(basis8, 0.3, 0, D)
        (c,) = decompose(basis8, A).components
        assert c.order == 1 and np.allclose(c.coefficients, [1, 1], atol=1e-7)

    def test_wrong_structure_raises(self, basis8):
        A = derived_op(basis8, 0.3, 1, D)
        s = find_range_structure(basis8, derived_op(basis8, -0.4, 1, D))
        with pytest.raises(FitError):
            fit_coefficients(basis8, A, s)


class TestElementaryCoefficients:
    @pytest.mark.parametrize("mu", [0.0, 0.35 - 0.2j])
    def test_second_order_binomials(self, basis8, mu):
        t = elementary_coefficients(basis8, derived_op(basis8, mu, 2, D), mu, 2)
        expected = np.zeros((3, 3))
        expected[0, 2], expected[1, 1], expected[2, 0] = 1, 2, 1
        assert np.allclose(t.table, expected, atol=1e-8)
        assert t.binomial_residual() <= 1e-8 and t.upper_residual() <= 1e-8
        assert t.system_residual() <= 1e-8

    def test_rank_one(self, basis8):
        t = elementary_coefficients(basis8, rank_one(basis8, 0.5, KTILDE_TENSOR_K), 0.5, 0)
        assert np.allclose(t.table, [[1]], atol=1e-10)

    def test_linear_combination(self, basis8):
        mu = -0.2 + 0.1j
        A = derived_op(basis8, mu, 1, D) + 3 * derived_op(basis8, mu, 0, D)
        t = elementary_coefficients(basis8, A, mu, 1)
        assert np.allclose(t.table, [[3, 1], [1, 0]], atol=1e-8)
        assert np.allclose(t.derived_coefficients(), [3, 1], atol=1e-8)

    def test_wrong_point(self, basis8):
        with pytest.raises(SpanMismatchError):
            elementary_coefficients(basis8, derived_op(basis8, 0.3, 1, D), -0.3, 1)


class TestSynthesize:
    def test_empty(self, basis8):
        assert np.all(synthesize(basis8, Decomposition((), 0.0)) == 0)

    def test_single_member(self, basis8):
        d = Decomposition((Component(0.3, 0, D, (1,)),), 0.0)
        assert np.allclose(synthesize(basis8, d), rank_one(basis8, 0.3, KTILDE_TENSOR_K))

    def test_order_cap(self, z2_basis):
        with pytest.raises(OrderError):
            synthesize(z2_basis, Decomposition((Component(0.1, 2, D, (0, 0, 1)),), 0.0))


class TestDecompose:
    def test_dbar_example(self, basis8):
        d = decompose(basis8, derived_op(basis8, 0.5j, 1, DBAR))
        (c,) = d.components
        assert c.orientation == DBAR and c.order == 1
        assert np.allclose(c.coefficients, [0, 1], atol=1e-8)
        assert d.residual <= 1e-8

    def test_non_tto(self, basis8):
        with pytest.raises(NotTTOError):
            decompose(basis8, random_matrix(generator(3), 8))

    def test_zero_operator(self, basis8):
        d = decompose(basis8, np.zeros((8, 8)))
        assert d.components == () and d.residual == 0.0

    def test_full_range_fallback(self, basis8):
        d = decompose(basis8, np.eye(8))
        assert d.residual <= 1e-8
        assert np.allclose(synthesize(basis8, d), np.eye(8), atol=1e-7)

    def test_synthesized_cases(self):
        rng = generator(11)
        for _ in range(10):
            basis, A, comps, _ = synthesized_case(rng, 8)
            d = decompose(basis, A)
            assert d.residual <= 1e-6
            assert len(d.components) == len(comps)
            for c in comps:
                assert min(abs(c.point - e.point) for e in d.components) <= 1e-6
            assert relative(synthesize(basis, d), A) <= 1e-6

    def test_adjoint_swaps_orientations(self, basis8):
        A = derived_op(basis8, 0.3, 1, D) + 2j * derived_op(basis8, -0.5j, 0, DBAR)
        d = decompose(basis8, A)
        da = decompose(basis8, A.conj().T)
        swap = {D: DBAR, DBAR: D, BOUNDARY: BOUNDARY}
        key = lambda c: (round(c.point.real, 6), round(c.point.imag, 6))
        for c, ca in zip(sorted(d.components, key=key), sorted(da.components, key=key)):
            assert abs(c.point - ca.point) <= 1e-6 and swap[c.orientation] == ca.orientation
            assert np.allclose(np.conj(c.coefficients), ca.coefficients, atol=1e-7)

    def test_deterministic(self, basis8):
        A = derived_op(basis8, 0.3, 1, D) + derived_op(basis8, np.exp(0.4j), 0, DBAR)
        assert decompose(basis8, A, seed=5) == decompose(basis8, A, seed=5)

    def test_monomial_space(self):
        basis = tm_basis(BlaschkeProduct((0j,) * 5))
        A = derived_op(basis, 0.0, 1, DBAR)
        d = decompose(basis, A)
        assert relative(synthesize(basis, d), A) <= 1e-8
