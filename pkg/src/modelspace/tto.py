"""Truncated Toeplitz operators on K_theta.

``A_phi f = P_theta(phi f)`` is computed by trapezoid quadrature on the
circle; the kernel-built operators (rank-one tensors and their derivatives)
are assembled exactly from kernel coordinates.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import DomainError, OrderError
from .inner_function import evaluate
from .model_space import (
    AntilinearMap,
    ModelBasis,
    basis_values,
    circle_nodes,
    compressed_shift,
    conjugation_matrix,
    kernel,
    kernel_block,
    conj_kernel,
    multiplication_matrix,
    tensor,
)

DBAR = "Dbar"
D = "D"
BOUNDARY = "boundary_both"
K_TENSOR_KTILDE = "k_tensor_ktilde"
KTILDE_TENSOR_K = "ktilde_tensor_k"

SYMBOL_KINDS = ("poly_analytic", "poly_conj", "theta_pole", "theta_pole_conj")


@dataclass(frozen=True)
class SymbolTerm:
    kind: str
    m: int
    coeff: complex = 1.0
    lam: complex | None = None

    def __post_init__(self):
        if self.kind not in SYMBOL_KINDS:
            raise DomainError(f"unknown symbol kind {self.kind!r}")
        if self.m < 0:
            raise DomainError("symbol exponent must be nonnegative")
        if self.kind.startswith("theta_pole"):
            if self.lam is None:
                raise DomainError(f"{self.kind} term needs a pole location")
            if not abs(self.lam) < 1.0:
                raise DomainError(f"pole {self.lam} must lie strictly inside the disk")
        object.__setattr__(self, "coeff", complex(self.coeff))


@dataclass(frozen=True)
class SymbolSpec:
    """Bounded rational symbol: a sum of terms c z^m, c conj(z)^m,
    c theta/(z - lam)^m and c conj(theta)/(conj(z) - conj(lam))^m."""

    terms: tuple[SymbolTerm, ...]

    @classmethod
    def of(cls, *terms: SymbolTerm) -> "SymbolSpec":
        return cls(tuple(terms))

    def __add__(self, other: "SymbolSpec") -> "SymbolSpec":
        return SymbolSpec(self.terms + other.terms)

    def scaled(self, c: complex) -> "SymbolSpec":
        return SymbolSpec(tuple(SymbolTerm(t.kind, t.m, c * t.coeff, t.lam) for t in self.terms))

    def conjugate(self) -> "SymbolSpec":
        flip = {"poly_analytic": "poly_conj", "poly_conj": "poly_analytic",
                "theta_pole": "theta_pole_conj", "theta_pole_conj": "theta_pole"}
        return SymbolSpec(tuple(SymbolTerm(flip[t.kind], t.m, np.conj(t.coeff), t.lam)
                                for t in self.terms))

    def pole_radius(self) -> float:
        return max((abs(t.lam) for t in self.terms if t.lam is not None), default=0.0)

    def max_order(self) -> int:
        return max((t.m for t in self.terms), default=0)

    def values(self, theta, z: np.ndarray) -> np.ndarray:
        """Samples of the symbol at points z on the unit circle."""
        z = np.asarray(z, dtype=complex)
        out = np.zeros(z.shape, dtype=complex)
        th = None
        for t in self.terms:
            if t.kind == "poly_analytic":
                out += t.coeff * z ** t.m
            elif t.kind == "poly_conj":
                out += t.coeff * np.conj(z) ** t.m
            else:
                if th is None:
                    th = evaluate(theta, z)
                f = th / (z - t.lam) ** t.m
                out += t.coeff * (f if t.kind == "theta_pole" else np.conj(f))
        return out


def _symbol_grid(basis: ModelBasis, phi: SymbolSpec) -> tuple[np.ndarray, np.ndarray]:
    r = phi.pole_radius()
    size = basis.quadrature_size
    if r > 0:
        need = (37.0 + 3.0 * phi.max_order()) / -math.log(r)
        # the polynomial terms shift the spectrum by at most max_order
        need += phi.max_order()
        if need > size:
            size = int(64 * math.ceil(need / 64))
    size = max(size, basis.quadrature_size + 2 * phi.max_order())
    if size == basis.quadrature_size:
        return basis.nodes, basis.values
    z = circle_nodes(size)
    return z, basis_values(basis.theta, z)


def compress(basis: ModelBasis, phi: SymbolSpec) -> np.ndarray:
    """Matrix of the truncated Toeplitz operator A_phi."""
    z, vals = _symbol_grid(basis, phi)
    return multiplication_matrix(vals, phi.values(basis.theta, z))


def symbol_operator(basis: ModelBasis, psi: np.ndarray, chi: np.ndarray) -> np.ndarray:
    """A_{psi + conj(chi)} for psi, chi given by K_theta coordinates."""
    psi_vals = basis.values @ psi
    chi_vals = basis.values @ chi
    return multiplication_matrix(basis.values, psi_vals + np.conj(chi_vals))


def rank_one(basis: ModelBasis, lam: complex, orientation: str) -> np.ndarray:
    """k_lam (x) ktilde_lam or ktilde_lam (x) k_lam."""
    k = kernel(basis, lam)
    kt = conj_kernel(basis, lam)
    if orientation == K_TENSOR_KTILDE:
        return tensor(k, kt)
    if orientation == KTILDE_TENSOR_K:
        return tensor(kt, k)
    raise DomainError(f"unknown rank-one orientation {orientation!r}")


def binomial_antidiagonal(n: int) -> np.ndarray:
    h = np.zeros((n + 1, n + 1))
    for k in range(n + 1):
        h[k, n - k] = math.comb(n, k)
    return h


def derived_op(basis: ModelBasis, lam: complex, n: int, orientation: str) -> np.ndarray:
    """n-th derivative of the rank-one kernel tensor at lam.

    ``D``:    sum_k C(n,k) d^k ktilde_lam (x) dbar^(n-k) k_lam
    ``Dbar``: sum_k C(n,k) dbar^k k_lam (x) d^(n-k) ktilde_lam
    """
    if n < 0 or n + 1 > basis.dim:
        raise OrderError(f"order {n} needs n + 1 <= {basis.dim}")
    K = kernel_block(basis, lam, n)
    Kt = kernel_block(basis, lam, n, conjugate=True)
    H = binomial_antidiagonal(n)
    if orientation == D:
        return Kt @ H @ K.conj().T
    if orientation in (DBAR, BOUNDARY):
        return K @ H @ Kt.conj().T
    raise DomainError(f"unknown orientation {orientation!r}")


def derived_symbol(lam: complex, n: int, orientation: str) -> SymbolSpec:
    """Bounded symbol of derived_op for an interior point lam."""
    kind = "theta_pole" if orientation == D else "theta_pole_conj"
    return SymbolSpec.of(SymbolTerm(kind, n + 1, math.factorial(n), lam))


@dataclass(frozen=True, eq=False)
class SarasonResult:
    is_tto: bool
    residual: float
    psi: np.ndarray
    chi: np.ndarray


def sarason_defect(basis: ModelBasis, A: np.ndarray, shift: np.ndarray | None = None) -> np.ndarray:
    S = compressed_shift(basis) if shift is None else shift
    return A - S @ A @ S.conj().T


def sarason_test(basis: ModelBasis, A: np.ndarray, tol: float = 1e-8) -> SarasonResult:
    """Sarason's criterion A - S A S* = psi (x) k_0 + k_0 (x) chi.

    The defect R is projected onto the orthogonal complement Q of k_0 on
    both sides; A is accepted when ||Q R Q|| <= tol ||A||.  The reported
    residual is that ratio.  The pair (psi, chi) is normalized by chi _|_ k_0.
    """
    A = np.asarray(A, dtype=complex)
    if A.shape != (basis.dim, basis.dim):
        raise DomainError(f"operator shape {A.shape} does not match dim {basis.dim}")
    R = sarason_defect(basis, A)
    k0 = kernel(basis, 0.0)
    nk = np.vdot(k0, k0).real
    Q = np.eye(basis.dim) - np.outer(k0, k0.conj()) / nk
    scale = np.linalg.norm(A, 2)
    defect = np.linalg.norm(Q @ R @ Q, 2)
    residual = 0.0 if scale == 0 else float(defect / scale)
    psi = R @ k0 / nk
    chi = np.conj(k0.conj() @ (R - np.outer(psi, k0.conj()))) / nk
    return SarasonResult(residual <= tol, residual, psi, chi)


def complex_symmetry_residual(basis: ModelBasis, A: np.ndarray,
                              cmap: AntilinearMap | None = None) -> float:
    """Operator norm of C A - A* C."""
    Mc = conjugation_matrix(basis).matrix if cmap is None else cmap.matrix
    A = np.asarray(A, dtype=complex)
    # C A v = Mc conj(A) conj(v) and A* C v = A^H Mc conj(v)
    return float(np.linalg.norm(Mc @ np.conj(A) - A.conj().T @ Mc, 2))


def pair(A: np.ndarray, terms: Iterable[Sequence[np.ndarray]]) -> complex:
    """Duality pairing <A, sum x_k y_k> = sum (A x_k, y_k)."""
    total = 0j
    for x, y in terms:
        total += np.vdot(y, A @ x)
    return complex(total)
