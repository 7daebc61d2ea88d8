"""Finite Blaschke products.

An inner function here is always a finite Blaschke product

    theta(z) = c * prod_k (z - a_k) / (1 - conj(a_k) z),   |a_k| < 1, |c| = 1.

Derivatives are computed exactly by multiplying truncated Taylor series of
the individual factors around the evaluation point, which is the product
rule carried out to all orders at once.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import DomainError, OrderError, PoleError, RootFindingError

ZERO_RADIUS_LIMIT = 1.0 - 1e-12
POLE_TOL = 1e-14


# ---------------------------------------------------------------------------
# truncated Taylor series of the elementary factors
# ---------------------------------------------------------------------------

def series_mul(p: np.ndarray, q: np.ndarray) -> np.ndarray:
    """Cauchy product of truncated series along the last axis."""
    order = p.shape[-1]
    out = np.zeros(np.broadcast_shapes(p.shape, q.shape), dtype=complex)
    for k in range(order):
        out[..., k] = np.sum(p[..., : k + 1] * q[..., k::-1], axis=-1)
    return out


def cauchy_series(a: complex, z, n: int) -> np.ndarray:
    """Taylor coefficients of ``1 / (1 - conj(a) w)`` at ``w = z``, orders 0..n.

    Raises PoleError when ``z`` sits on the pole ``1 / conj(a)``.
    """
    z = np.asarray(z, dtype=complex)
    ab = np.conj(a)
    d = 1.0 - ab * z
    if np.any(np.abs(d) < POLE_TOL):
        raise PoleError(f"evaluation point hits the pole 1/conj({a})")
    ratio = ab / d
    powers = ratio[..., None] ** np.arange(n + 1)
    return powers / d[..., None]


def mobius_series(a: complex, z, n: int) -> np.ndarray:
    """Taylor coefficients of ``(w - a) / (1 - conj(a) w)`` at ``w = z``."""
    z = np.asarray(z, dtype=complex)
    g = cauchy_series(a, z, n)
    out = (z - a)[..., None] * g
    out[..., 1:] += g[..., :-1]
    return out


def factorials(n: int) -> np.ndarray:
    return np.array([math.factorial(k) for k in range(n + 1)], dtype=float)


# ---------------------------------------------------------------------------
# the Blaschke product
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class BlaschkeProduct:
    """Finite Blaschke product given by its zeros (with repetition) and a
    unimodular constant."""

    zeros: tuple[complex, ...]
    constant: complex = 1.0 + 0.0j

    def __post_init__(self):
        zeros = tuple(complex(a) for a in self.zeros)
        for a in zeros:
            if not abs(a) < ZERO_RADIUS_LIMIT:
                raise DomainError(f"zero {a} is not strictly inside the unit disk")
        c = complex(self.constant)
        if abs(abs(c) - 1.0) > 1e-14:
            raise DomainError(f"constant {c} is not unimodular")
        object.__setattr__(self, "zeros", zeros)
        object.__setattr__(self, "constant", c)

    @classmethod
    def from_zeros(cls, zeros: Sequence[complex], constant: complex = 1.0) -> "BlaschkeProduct":
        return cls(tuple(zeros), constant)

    @property
    def degree(self) -> int:
        return len(self.zeros)

    def series(self, z, n: int) -> np.ndarray:
        """Taylor coefficients of theta at z up to order n (last axis)."""
        z = np.asarray(z, dtype=complex)
        out = np.zeros(z.shape + (n + 1,), dtype=complex)
        out[..., 0] = self.constant
        for a in self.zeros:
            out = series_mul(out, mobius_series(a, z, n))
        return out

    def __call__(self, z):
        return evaluate(self, z)


def evaluate(B: BlaschkeProduct, z):
    """Value of the Blaschke product at ``z`` (scalar or array)."""
    z_arr = np.asarray(z, dtype=complex)
    val = np.full(z_arr.shape, B.constant, dtype=complex)
    for a in B.zeros:
        d = 1.0 - np.conj(a) * z_arr
        if np.any(np.abs(d) < POLE_TOL):
            raise PoleError(f"evaluation point hits the pole 1/conj({a})")
        val = val * (z_arr - a) / d
    return complex(val) if val.ndim == 0 else val


def deriv(B: BlaschkeProduct, z, n: int):
    """n-th complex derivative of the Blaschke product at ``z``."""
    if n < 0:
        raise OrderError("derivative order must be nonnegative")
    if n > 2 * B.degree + 4:
        raise OrderError(f"derivative order {n} exceeds cap {2 * B.degree + 4}")
    if n == 0:
        return evaluate(B, z)
    coef = B.series(z, n)[..., n] * math.factorial(n)
    return complex(coef) if np.ndim(coef) == 0 else coef


def frostman_shift(B: BlaschkeProduct) -> BlaschkeProduct:
    """Return Theta = (theta - theta(0)) / (1 - conj(theta(0)) theta).

    The zeros of Theta are the roots of theta(z) = theta(0), found from the
    numerator polynomial c*prod(z - a_k) - theta(0)*prod(1 - conj(a_k) z)
    with a companion-matrix solver and then polished by Newton steps.
    """
    t0 = evaluate(B, 0.0)
    if abs(t0) < 1e-15:
        return B
    zeros = np.array(B.zeros, dtype=complex)
    num = B.constant * np.poly(zeros)
    # prod(1 - conj(a) z) in descending powers of z
    den = np.array([1.0 + 0j])
    for a in zeros:
        den = np.polymul(den, np.array([-np.conj(a), 1.0]))
    poly = np.polysub(num, t0 * den)
    try:
        roots = np.roots(poly)
    except np.linalg.LinAlgError as exc:
        raise RootFindingError(str(exc)) from exc
    if roots.size != B.degree or not np.all(np.isfinite(roots)):
        raise RootFindingError("companion solver returned the wrong number of roots")
    polished = []
    for r in roots:
        for _ in range(8):
            s = B.series(r, 1)
            f, df = s[0] - t0, s[1]
            if abs(df) < 1e-300:
                break
            step = f / df
            r = r - step
            if abs(step) < 1e-16:
                break
        polished.append(complex(r))
    if any(not abs(r) < ZERO_RADIUS_LIMIT for r in polished):
        raise RootFindingError("Frostman zeros escaped the unit disk")
    shifted = BlaschkeProduct(tuple(polished), 1.0)
    # fix the unimodular constant by comparing at a boundary point
    probe = np.exp(0.37j)
    ratio = (evaluate(B, probe) - t0) / (1.0 - np.conj(t0) * evaluate(B, probe))
    c = ratio / evaluate(shifted, probe)
    return BlaschkeProduct(tuple(polished), c / abs(c))


def ahern_clark_sum(B: BlaschkeProduct, lam: complex, n: int) -> float:
    """Sum over zeros of (1 - |a_k|^2) / |1 - lam conj(a_k)|^(2n+2) for |lam| = 1."""
    if abs(abs(lam) - 1.0) > 1e-12:
        raise DomainError(f"point {lam} is not on the unit circle")
    if n < 0:
        raise OrderError("order must be nonnegative")
    a = np.array(B.zeros, dtype=complex)
    return float(np.sum((1 - np.abs(a) ** 2) / np.abs(1 - lam * np.conj(a)) ** (2 * n + 2)))
