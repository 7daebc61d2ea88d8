"""Clark unitary perturbations of the compressed shift and their atomic
spectral measures."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import (
    AtomCollisionError,
    ConditioningError,
    DomainError,
    EigensolverError,
    MismatchError,
)
from .inner_function import deriv, evaluate
from .model_space import (
    ModelBasis,
    basis_values,
    compressed_shift,
    conj_kernel,
    kernel,
    tensor,
)

UNITARY_TOL = 1e-10
ATOM_SEPARATION = 1e-10
MASS_TOL = 1e-8
POLISH_TOL = 1e-8


@dataclass(frozen=True, eq=False)
class ClarkMeasure:
    alpha: complex
    atoms: np.ndarray
    masses: np.ndarray

    def __len__(self) -> int:
        return len(self.atoms)


def clark_coefficient(theta, alpha: complex) -> complex:
    """c with U = S_theta + c k_0 (x) ktilde_0 unitary and sigma(U) = {theta = alpha}.

    U k_xi = xi k_xi exactly when c conj(theta(xi) - theta(0)) = 1, so
    theta(xi) = alpha forces c = alpha / (1 - conj(theta(0)) alpha); this is
    alpha itself when theta(0) = 0.
    """
    t0 = evaluate(theta, 0.0)
    return alpha / (1.0 - np.conj(t0) * alpha)


def clark_unitary(basis: ModelBasis, alpha: complex) -> np.ndarray:
    """U_alpha = S_theta + c_alpha k_0 (x) ktilde_0."""
    c = clark_coefficient(basis.theta, alpha)
    return compressed_shift(basis) + c * tensor(kernel(basis, 0.0), conj_kernel(basis, 0.0))


def _polish_atom(theta, xi: complex, alpha: complex) -> complex:
    # Newton in the angle for arg(theta(e^{it}) / alpha) = 0
    t = np.angle(xi)
    for _ in range(3):
        z = np.exp(1j * t)
        val = evaluate(theta, z)
        speed = (z * deriv(theta, z, 1) / val).real  # d/dt arg theta = |theta'|
        step = np.angle(val / alpha) / speed
        t -= step
        if abs(step) < 1e-17:
            break
    return complex(np.exp(1j * t))


def clark_measure(basis: ModelBasis, alpha: complex) -> ClarkMeasure:
    """Atoms and masses of the spectral measure of U_alpha.

    Atoms are the eigenvalues of U_alpha (then snapped to the circle with a
    short Newton polish of theta(xi) = alpha); masses 1/||k_xi||^2 are
    cross-checked against 1/|theta'(xi)|.
    """
    alpha = complex(alpha)
    if abs(abs(alpha) - 1.0) > 1e-12:
        raise DomainError(f"alpha = {alpha} is not unimodular")
    U = clark_unitary(basis, alpha)
    n = basis.dim
    err = np.max(np.abs(U.conj().T @ U - np.eye(n)))
    if err > UNITARY_TOL:
        raise ConditioningError(f"U_alpha fails unitarity by {err:.2e}")
    try:
        T, Z = scipy.linalg.schur(U, output="complex")
    except (np.linalg.LinAlgError, ValueError) as exc:
        raise EigensolverError(str(exc)) from exc
    eig = np.diag(T)
    atoms = np.array([_polish_atom(basis.theta, x / abs(x), alpha) for x in eig])
    drift = np.max(np.abs(atoms - eig))
    if drift > POLISH_TOL:
        raise EigensolverError(f"eigenvalues of U_alpha miss theta = alpha by {drift:.1e}")
    atoms = atoms[np.argsort(np.mod(np.angle(atoms), 2 * np.pi), kind="stable")]
    if n > 1:
        gaps = np.abs(atoms - np.roll(atoms, 1))
        if np.min(gaps) < ATOM_SEPARATION:
            raise AtomCollisionError(f"Clark atoms collide (gap {np.min(gaps):.1e})")
    vals = basis_values(basis.theta, atoms)
    masses = 1.0 / np.sum(np.abs(vals) ** 2, axis=1)
    dtheta = np.abs(deriv(basis.theta, atoms, 1))
    if np.max(np.abs(masses * dtheta - 1.0)) > MASS_TOL:
        raise ConditioningError("Clark masses disagree with 1/|theta'|")
    return ClarkMeasure(alpha, atoms, masses)


def value_matrix(basis: ModelBasis, cm: ClarkMeasure) -> np.ndarray:
    """Row j holds e_1..e_N evaluated at atom j."""
    if len(cm) != basis.dim:
        raise MismatchError("Clark measure and basis have different sizes")
    return basis_values(basis.theta, cm.atoms)


def unitary_embedding(basis: ModelBasis, cm: ClarkMeasure) -> np.ndarray:
    """V_alpha followed by the isometry L^2(sigma) -> C^N, g -> sqrt(w) g."""
    return np.sqrt(cm.masses)[:, None] * value_matrix(basis, cm)


def embed(basis: ModelBasis, cm: ClarkMeasure, v: np.ndarray) -> np.ndarray:
    """Boundary values (V_alpha f)_j = f(xi_j)."""
    return value_matrix(basis, cm) @ np.asarray(v, dtype=complex)


def unembed(basis: ModelBasis, cm: ClarkMeasure, values: np.ndarray) -> np.ndarray:
    """Inverse of embed: sum_j values_j w_j k_{xi_j}."""
    values = np.asarray(values, dtype=complex)
    if values.shape != (len(cm),):
        raise MismatchError("value vector length does not match the atoms")
    return value_matrix(basis, cm).conj().T @ (cm.masses * values)


def weighted_norm(cm: ClarkMeasure, values: np.ndarray) -> float:
    return float(math.sqrt(np.sum(cm.masses * np.abs(values) ** 2)))


def cauchy_reconstruct(cm: ClarkMeasure, values: np.ndarray, z: complex,
                       basis: ModelBasis) -> complex:
    """f(z) = integral of (V f)(xi) (1 - conj(alpha) theta(z)) / (1 - conj(xi) z) d sigma."""
    z = complex(z)
    if not abs(z) < 1.0:
        raise DomainError(f"reconstruction point {z} must lie in the open disk")
    factor = 1.0 - np.conj(cm.alpha) * evaluate(basis.theta, z)
    return complex(np.sum(values * cm.masses * factor / (1.0 - np.conj(cm.atoms) * z)))
