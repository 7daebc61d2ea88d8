"""Coordinates on the model space K_theta = H^2 (-) theta H^2.

Vectors of K_theta are stored as complex coefficient arrays in the
Takenaka-Malmquist orthonormal basis

    e_k(z) = sqrt(1 - |a_k|^2) / (1 - conj(a_k) z) * prod_{j<k} b_j(z),

where b_j is the Blaschke factor of the j-th zero.  Operators are complex
N x N arrays acting on those coefficients.  The inner product is
``(u, v) = sum u_i conj(v_i)`` and ``x (x) y`` is the rank-one map
``h -> (h, y) x``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ConditioningError, DomainError, MismatchError, OrderError
from .inner_function import (
    BlaschkeProduct,
    cauchy_series,
    evaluate,
    mobius_series,
    series_mul,
)

GRAM_TOL = 1e-8
BOUNDARY_SLACK = 1e-12


def inner(u: np.ndarray, v: np.ndarray) -> complex:
    """Inner product (u, v), linear in u."""
    return complex(np.vdot(v, u))


def tensor(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Matrix of the rank-one operator h -> (h, y) x."""
    return np.outer(x, np.conj(y))


def default_quadrature_size(theta: BlaschkeProduct) -> int:
    """Trapezoid nodes needed for the basis: max(256, 16N) raised until the
    geometric decay of the Fourier coefficients reaches roundoff."""
    n = theta.degree
    size = max(256, 16 * n)
    rmax = max((abs(a) for a in theta.zeros), default=0.0)
    if rmax > 0:
        size = max(size, int(math.ceil(37.0 / -math.log(rmax))))
    return int(64 * math.ceil(size / 64))


def circle_nodes(size: int) -> np.ndarray:
    return np.exp(2j * np.pi * np.arange(size) / size)


@dataclass(frozen=True, eq=False)
class ModelBasis:
    """Orthonormal Takenaka-Malmquist coordinates for K_theta.

    ``nodes`` are the trapezoid nodes on the circle and ``values[m, i]`` is
    e_i(nodes[m]); the inner product of two functions is approximated by
    ``values.conj().T @ diag(...) @ values / quadrature_size``.
    """

    theta: BlaschkeProduct
    quadrature_size: int
    nodes: np.ndarray = field(repr=False)
    values: np.ndarray = field(repr=False)

    @property
    def dim(self) -> int:
        return self.theta.degree

    def gram(self) -> np.ndarray:
        return self.values.conj().T @ self.values / self.quadrature_size

    def quad_inner(self, f_vals: np.ndarray, g_vals: np.ndarray) -> complex:
        """Quadrature inner product of boundary samples on ``nodes``."""
        return complex(np.sum(f_vals * np.conj(g_vals)) / self.quadrature_size)

    def project(self, f_vals: np.ndarray) -> np.ndarray:
        """Coordinates of P_theta f from samples of f on ``nodes``."""
        return self.values.conj().T @ f_vals / self.quadrature_size

    def sample(self, v: np.ndarray) -> np.ndarray:
        """Boundary samples on ``nodes`` of the function with coordinates v."""
        return self.values @ v


def basis_series(theta: BlaschkeProduct, z, n: int) -> np.ndarray:
    """Taylor coefficients of e_1..e_N at z; shape ``z.shape + (N, n+1)``."""
    z = np.asarray(z, dtype=complex)
    prefix = np.zeros(z.shape + (n + 1,), dtype=complex)
    prefix[..., 0] = 1.0
    out = []
    for a in theta.zeros:
        scale = math.sqrt(1.0 - abs(a) ** 2)
        out.append(scale * series_mul(cauchy_series(a, z, n), prefix))
        prefix = series_mul(prefix, mobius_series(a, z, n))
    return np.stack(out, axis=-2)


def conj_basis_series(theta: BlaschkeProduct, z, n: int) -> np.ndarray:
    """Taylor coefficients of C e_1..C e_N at z.

    On the circle C e_k = conj(z) theta conj(e_k) simplifies to the rational
    function c * sqrt(1 - |a_k|^2) / (1 - conj(a_k) z) * prod_{j>k} b_j(z).
    """
    z = np.asarray(z, dtype=complex)
    suffix = np.zeros(z.shape + (n + 1,), dtype=complex)
    suffix[..., 0] = theta.constant
    out = []
    for a in reversed(theta.zeros):
        scale = math.sqrt(1.0 - abs(a) ** 2)
        out.append(scale * series_mul(cauchy_series(a, z, n), suffix))
        suffix = series_mul(suffix, mobius_series(a, z, n))
    return np.stack(out[::-1], axis=-2)


def basis_values(theta: BlaschkeProduct, z) -> np.ndarray:
    return basis_series(theta, z, 0)[..., 0]


def tm_basis(theta: BlaschkeProduct, quadrature_size: int | None = None) -> ModelBasis:
    """Build the Takenaka-Malmquist basis and verify it under quadrature."""
    n = theta.degree
    if n < 1:
        raise DomainError("the model space of a constant inner function is trivial")
    floor = max(256, 16 * n)
    if quadrature_size is None:
        quadrature_size = default_quadrature_size(theta)
    elif quadrature_size < floor:
        raise DomainError(f"quadrature_size must be at least {floor}")
    nodes = circle_nodes(quadrature_size)
    values = basis_values(theta, nodes)
    values.setflags(write=False)
    nodes.setflags(write=False)
    basis = ModelBasis(theta, int(quadrature_size), nodes, values)

    gram_err = np.max(np.abs(basis.gram() - np.eye(n)))
    if gram_err > GRAM_TOL:
        raise ConditioningError(f"Gram residual {gram_err:.2e}; zeros too close to the circle")
    theta_vals = evaluate(theta, nodes)
    powers = nodes[:, None] ** np.arange(n)
    leak = np.max(np.abs(basis.project(theta_vals[:, None] * powers)))
    if leak > GRAM_TOL:
        raise ConditioningError(f"basis leaks into theta H^2 by {leak:.2e}")
    return basis


def _check_order(basis: ModelBasis, n: int, cap: int | None = None) -> None:
    if n < 0:
        raise OrderError("derivative order must be nonnegative")
    if cap is not None and n > cap:
        raise OrderError(f"derivative order {n} exceeds cap {cap}")


def eval_vector(basis: ModelBasis, v: np.ndarray, z, n: int = 0):
    """n-th derivative at z of the function with coordinates v."""
    _check_order(basis, n, basis.dim + 2)
    coef = basis_series(basis.theta, z, n)[..., n] * math.factorial(n)
    val = coef @ np.asarray(v, dtype=complex)
    return complex(val) if np.ndim(val) == 0 else val


def _check_point(lam: complex) -> complex:
    lam = complex(lam)
    if abs(lam) > 1.0 + BOUNDARY_SLACK:
        raise DomainError(f"point {lam} lies outside the closed unit disk")
    return lam


def kernel(basis: ModelBasis, lam: complex, n: int = 0) -> np.ndarray:
    """Coordinates of the n-th conj(lambda)-derivative of k_lambda.

    (f, kernel(lam, n)) = f^(n)(lam) for every f in K_theta.  Boundary
    points are admissible for all n since the zeros stay off the circle.
    """
    lam = _check_point(lam)
    _check_order(basis, n)
    coef = basis_series(basis.theta, lam, n)[:, n] * math.factorial(n)
    return np.conj(coef)


def conj_kernel(basis: ModelBasis, lam: complex, n: int = 0) -> np.ndarray:
    """Coordinates of the n-th lambda-derivative of the conjugate kernel
    (theta - theta(lam)) / (z - lam), equal to C applied to kernel(lam, n)."""
    lam = _check_point(lam)
    _check_order(basis, n)
    return conj_basis_series(basis.theta, lam, n)[:, n] * math.factorial(n)


def kernel_block(basis: ModelBasis, lam: complex, n: int, conjugate: bool = False) -> np.ndarray:
    """Columns j = 0..n of kernel (or conj_kernel) derivatives at lam."""
    lam = _check_point(lam)
    facts = np.array([math.factorial(j) for j in range(n + 1)], dtype=float)
    if conjugate:
        return conj_basis_series(basis.theta, lam, n) * facts
    return np.conj(basis_series(basis.theta, lam, n)) * facts


@dataclass(frozen=True, eq=False)
class AntilinearMap:
    """Antilinear map v -> matrix @ conj(v)."""

    matrix: np.ndarray

    def __call__(self, v: np.ndarray) -> np.ndarray:
        return self.matrix @ np.conj(v)

    def squared(self) -> np.ndarray:
        """Matrix of the linear map obtained by applying the map twice."""
        return self.matrix @ np.conj(self.matrix)


def conjugation_matrix(basis: ModelBasis) -> AntilinearMap:
    """The conjugation C x = conj(z) theta conj(x) by circle quadrature."""
    z = basis.nodes
    weight = np.conj(z) * evaluate(basis.theta, z)
    # entry [j, i] = (C e_i, e_j)
    mat = basis.values.conj().T @ (weight[:, None] * np.conj(basis.values)) / basis.quadrature_size
    cmap = AntilinearMap(mat)
    err = np.max(np.abs(cmap.squared() - np.eye(basis.dim)))
    if err > GRAM_TOL:
        raise ConditioningError(f"C^2 deviates from the identity by {err:.2e}")
    return cmap


def multiplication_matrix(values: np.ndarray, symbol_values: np.ndarray) -> np.ndarray:
    """Entries (phi e_j, e_i) from basis samples and samples of phi on the
    same equispaced circle nodes."""
    return values.conj().T @ (symbol_values[:, None] * values) / values.shape[0]


def compressed_shift(basis: ModelBasis) -> np.ndarray:
    """Matrix of S_theta f = P_theta(z f)."""
    return multiplication_matrix(basis.values, basis.nodes)


def frostman_unitary(basis_theta: ModelBasis, basis_Theta: ModelBasis) -> np.ndarray:
    """Matrix of J f = sqrt(1 - |theta(0)|^2) / (1 - conj(theta(0)) theta) * f
    from K_theta to K_Theta, Theta the Frostman shift of theta."""
    if basis_theta.dim != basis_Theta.dim:
        raise MismatchError("the two model spaces have different dimensions")
    size = max(basis_theta.quadrature_size, basis_Theta.quadrature_size)
    z = circle_nodes(size)
    t0 = evaluate(basis_theta.theta, 0.0)
    mult = math.sqrt(1.0 - abs(t0) ** 2) / (1.0 - np.conj(t0) * evaluate(basis_theta.theta, z))
    src = basis_values(basis_theta.theta, z)
    dst = basis_values(basis_Theta.theta, z)
    return dst.conj().T @ (mult[:, None] * src) / size
