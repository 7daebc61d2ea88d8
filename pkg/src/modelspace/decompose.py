"""Decomposition of finite-rank truncated Toeplitz operators.

Every finite-rank TTO is a finite combination of the derived operators
``D^n[ktilde_lam (x) k_lam]`` and ``Dbar^n[k_lam (x) ktilde_lam]``.  The
pipeline below makes this constructive:

1. the range of A is pushed into L^2 of a Clark measure, where it becomes
   a subspace F of functions on the atoms with z F inside F + <z^n>;
2. the compressed multiplication T on conj(z)^n F has root subspaces
   spanned by (z - mu)^-j, so its eigenvalue clusters give the points mu
   and orders of the range components;
3. each mu is translated back to a kernel-derivative span in K_theta and
   checked against Ran A by principal angles;
4. the coefficients are fitted by least squares over the derived-operator
   dictionary of the detected components.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.cluster.hierarchy

from .clark import ClarkMeasure, clark_measure, unitary_embedding
from .errors import (
    AtomCollisionError,
    ConditioningError,
    EigensolverError,
    FitError,
    NotTTOError,
    OrderError,
    RankMismatchError,
    SpanMismatchError,
    StructureError,
)
from .linalg import orth, projection_residual, range_basis, range_split, subspace_containment
from .model_space import ModelBasis, compressed_shift, kernel, kernel_block
from .tto import BOUNDARY, D, DBAR, derived_op, sarason_test

CLUSTER_RADII = (1e-6, 1e-5, 1e-4, 1e-3, 1e-2, 3e-2)
SNAP_TOL = 1e-6
INDICATOR_TOL = 1e-10
ATOM_GUARD = 0.1
# span and angle thresholds never drop below NOISE_FACTOR * (range noise level)
NOISE_FACTOR = 1e2


@dataclass(frozen=True)
class Component:
    point: complex
    order: int
    orientation: str
    coefficients: tuple[complex, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "point", complex(self.point))
        object.__setattr__(self, "coefficients", tuple(complex(c) for c in self.coefficients))

    def with_coefficients(self, coefficients) -> "Component":
        return Component(self.point, self.order, self.orientation,
                         tuple(complex(c) for c in coefficients))


@dataclass(frozen=True)
class RangeStructure:
    components: tuple[Component, ...]
    zero_chain_order: int
    alpha: complex = field(default=1.0, compare=False)

    @property
    def rank(self) -> int:
        return sum(c.order + 1 for c in self.components)


@dataclass(frozen=True)
class Decomposition:
    components: tuple[Component, ...]
    residual: float


# ---------------------------------------------------------------------------
# dictionary plumbing
# ---------------------------------------------------------------------------

def component_span(basis: ModelBasis, comp: Component) -> np.ndarray:
    """Kernel-derivative vectors spanning the range of a component."""
    return kernel_block(basis, comp.point, comp.order, conjugate=(comp.orientation == D))


def _dictionary_orientation(orientation: str) -> str:
    return DBAR if orientation == BOUNDARY else orientation


def synthesize(basis: ModelBasis, d: Decomposition) -> np.ndarray:
    """sum_k sum_s c_{k,s} derived_op(point_k, s, orientation_k)."""
    A = np.zeros((basis.dim, basis.dim), dtype=complex)
    for comp in d.components:
        if comp.order + 1 > basis.dim:
            raise OrderError(f"component order {comp.order} too large for dim {basis.dim}")
        for s, c in enumerate(comp.coefficients):
            A += c * derived_op(basis, comp.point, s, _dictionary_orientation(comp.orientation))
    return A


def _sort_key(comp: Component):
    return (round(comp.point.real, 9), round(comp.point.imag, 9), comp.orientation, comp.order)


# ---------------------------------------------------------------------------
# range structure
# ---------------------------------------------------------------------------

def zero_chain_order(basis: ModelBasis, R: np.ndarray, span_tol: float = 1e-6) -> int:
    """Largest n with dbar^j k_0 in span(R) for all j < n (R orthonormal)."""
    r = R.shape[1]
    n = 0
    while n < min(r, basis.dim - 1):
        if projection_residual(R, kernel(basis, 0.0, n)) > span_tol:
            break
        n += 1
    return n


def range_inclusion_residual(basis: ModelBasis, A: np.ndarray, rank_tol: float = 1e-8,
                             span_tol: float = 1e-6) -> tuple[float, int]:
    """Residual of S_theta Ran A inside Ran A + <dbar^n k_0>.

    Returns (residual, n) where n is the zero-chain order of Ran A.
    """
    R, _ = range_split(A, rank_tol)
    n = zero_chain_order(basis, R, span_tol)
    target = orth(np.column_stack([R, kernel(basis, 0.0, n)]))
    S = compressed_shift(basis)
    return projection_residual(target, S @ R), n


def _disk_image(eigs: np.ndarray) -> np.ndarray:
    # mu outside the disk stands for the point 1/conj(mu); clustering there
    # keeps the smearing of defective eigenvalues on a common scale
    eigs = np.asarray(eigs, dtype=complex)
    out = eigs.copy()
    far = np.abs(eigs) > 1.0
    out[far] = 1.0 / np.conj(eigs[far])
    return out


def _clusters(eigs: np.ndarray, radius: float) -> list[np.ndarray]:
    if eigs.size == 1:
        return [np.array([0])]
    w = _disk_image(eigs)
    pts = np.column_stack([w.real, w.imag])
    labels = scipy.cluster.hierarchy.fclusterdata(pts, t=radius, criterion="distance",
                                                  method="single")
    groups = {}
    for i, lab in enumerate(labels):
        groups.setdefault(lab, []).append(i)
    return [np.array(g) for g in groups.values()]


class _Resample(Exception):
    pass


def _candidates(mu: complex, p: int) -> list[Component]:
    """Possible range components for an eigenvalue cluster (mu, p), most
    likely first.  Eigenvalue mu of T carries (z - mu)^-j; for |mu| < 1 that
    is the span of d^j ktilde_mu, for |mu| > 1 the span of dbar^j k_lam at
    lam = 1/conj(mu); on the circle both coincide."""
    order = p - 1
    r = abs(mu)
    out = []
    if abs(r - 1.0) < SNAP_TOL:
        out.append(Component(mu / r, order, BOUNDARY))
    if r < 1.0:
        out.append(Component(mu, order, D))
    else:
        out.append(Component(1.0 / np.conj(mu), order, DBAR))
    if abs(r - 1.0) >= SNAP_TOL and abs(r - 1.0) < 1e-3:
        out.append(Component(mu / r, order, BOUNDARY))
    return out


def _boundary_both(basis: ModelBasis, R: np.ndarray, comp: Component, verify_tol: float) -> bool:
    other = Component(comp.point, comp.order, D)
    primary = Component(comp.point, comp.order, DBAR)
    return (subspace_containment(R, component_span(basis, primary)) <= verify_tol
            and subspace_containment(R, component_span(basis, other)) <= verify_tol)


def _structure_for_measure(basis: ModelBasis, R: np.ndarray, cm: ClarkMeasure,
                           span_tol: float, verify_tol: float,
                           cluster_radius: float) -> RangeStructure:
    r = R.shape[1]
    Vt = unitary_embedding(basis, cm)
    X = Vt @ R
    # distance from each unit indicator vector to F
    dist = np.sqrt(np.clip(1.0 - np.linalg.norm(X, axis=1) ** 2, 0.0, None))
    if np.min(dist) < INDICATOR_TOL:
        raise _Resample("range contains an atom indicator")
    atoms = cm.atoms
    one = np.sqrt(cm.masses).astype(complex)

    # zero chain: weighted monomials z^0..z^(n-1) inside F
    n = 0
    while n < r:
        v = one * atoms ** n
        if projection_residual(X, v) > span_tol:
            break
        n += 1
    if n == r:
        # the range is exactly the polynomial chain F(0, r-1)
        chain = Component(0j, r - 1, DBAR)
        _verify(basis, R, [chain], verify_tol)
        return RangeStructure((chain,), n, cm.alpha)

    G = np.conj(atoms)[:, None] ** n * X
    M = np.column_stack([G, one])
    coef, *_ = np.linalg.lstsq(M, atoms[:, None] * G, rcond=None)
    defect = np.linalg.norm(M @ coef - atoms[:, None] * G, 2)
    if defect > span_tol:
        raise StructureError(f"z F is not inside F + <z^n> (defect {defect:.2e})")
    T = coef[:r]
    try:
        eigs = np.linalg.eigvals(T)
    except np.linalg.LinAlgError as exc:
        raise EigensolverError(str(exc)) from exc

    spacing = np.abs(atoms - np.roll(atoms, 1))
    last_error: Exception | None = None
    seen = set()
    for radius in (cluster_radius,) + tuple(x for x in CLUSTER_RADII if x > cluster_radius):
        groups = _clusters(eigs, radius)
        key = tuple(sorted(tuple(sorted(g.tolist())) for g in groups))
        if key in seen:
            continue
        seen.add(key)
        try:
            comps = _assemble(basis, R, groups, eigs, n, atoms, spacing, verify_tol)
        except (StructureError, SpanMismatchError) as exc:
            last_error = exc
            continue
        return RangeStructure(tuple(sorted(comps, key=_sort_key)), n, cm.alpha)
    raise StructureError(f"no clustering of the eigenvalues verified: {last_error}")


def _assemble(basis, R, groups, eigs, n, atoms, spacing, verify_tol) -> list[Component]:
    comps: list[Component] = []
    zero_seen = False
    for g in groups:
        mu = complex(np.mean(eigs[g]))
        p = len(g)
        if abs(mu) < SNAP_TOL:
            zero_seen = True
            if p < n:
                raise RankMismatchError(f"zero cluster of size {p} cannot hold a chain of {n}")
            if n > 0:
                comps.append(Component(0j, n - 1, DBAR))
            if p > n:
                comps.append(Component(0j, p - n - 1, D))
            continue
        if abs(abs(mu) - 1.0) < 1e-3:
            j = int(np.argmin(np.abs(atoms - mu)))
            if abs(atoms[j] - mu) < ATOM_GUARD * spacing[j]:
                raise _Resample("a boundary point sits next to a Clark atom")
        for cand in _candidates(mu, p):
            if cand.order + 1 > basis.dim:
                continue
            if subspace_containment(R, component_span(basis, cand)) <= verify_tol:
                if cand.orientation == BOUNDARY and not _boundary_both(basis, R, cand, verify_tol):
                    continue
                comps.append(cand)
                break
        else:
            raise SpanMismatchError(f"no kernel span matches eigenvalue cluster at {mu}")
    if n > 0 and not zero_seen:
        raise RankMismatchError("zero chain present but T has no eigenvalue at 0")
    _verify(basis, R, comps, verify_tol)
    return comps


def _verify(basis: ModelBasis, R: np.ndarray, comps: list[Component], verify_tol: float) -> None:
    r = R.shape[1]
    total = sum(c.order + 1 for c in comps)
    if total != r:
        raise RankMismatchError(f"components account for rank {total}, operator has {r}")
    blocks = []
    for c in comps:
        span = component_span(basis, c)
        if subspace_containment(R, span) > verify_tol:
            raise SpanMismatchError(f"component at {c.point} is not inside Ran A")
        blocks.append(orth(span))
    joint = np.column_stack(blocks)
    s = np.linalg.svd(joint, compute_uv=False)
    if s[-1] < 1e-6:
        raise SpanMismatchError("component ranges are not a direct sum")


def find_range_structure(basis: ModelBasis, A: np.ndarray, tol: float = 1e-8, seed: int = 0, *,
                         rank_tol: float = 1e-8, span_tol: float = 1e-6,
                         verify_tol: float = 1e-6, cluster_radius: float = 1e-6,
                         max_tries: int = 8) -> RangeStructure:
    """Identify Ran A as a direct sum of kernel-derivative spans.

    ``tol`` is kept for interface symmetry with the other stages; the
    individual thresholds are ``rank_tol`` (SVD rank, see ``gap_rank``),
    ``span_tol`` (membership in the embedded range) and ``verify_tol``
    (principal-angle check of each detected component against Ran A).  The
    last two are raised to ``NOISE_FACTOR`` times the angular accuracy of
    the computed range when A is badly conditioned.
    """
    R, noise = range_split(A, rank_tol)
    r = R.shape[1]
    span_tol = max(span_tol, NOISE_FACTOR * noise)
    verify_tol = max(verify_tol, NOISE_FACTOR * noise)
    if r == 0:
        raise StructureError("the zero operator has no range structure")
    if r >= basis.dim:
        raise StructureError("range is the whole space; no proper range structure")
    rng = np.random.Generator(np.random.Philox(seed))
    last: Exception | None = None
    for _ in range(max_tries):
        alpha = complex(np.exp(2j * np.pi * rng.random()))
        try:
            cm = clark_measure(basis, alpha)
            return _structure_for_measure(basis, R, cm, span_tol, verify_tol, cluster_radius)
        except (_Resample, AtomCollisionError, ConditioningError) as exc:
            last = exc
        except StructureError as exc:
            last = exc
    if isinstance(last, RankMismatchError):
        raise last
    raise StructureError(f"no consistent range structure after {max_tries} Clark measures: {last}")


# ---------------------------------------------------------------------------
# coefficients
# ---------------------------------------------------------------------------

def _lstsq_dictionary(basis: ModelBasis, A: np.ndarray, comps) -> tuple[list[Component], np.ndarray]:
    columns, owners = [], []
    for idx, comp in enumerate(comps):
        for s in range(comp.order + 1):
            columns.append(derived_op(basis, comp.point, s,
                                      _dictionary_orientation(comp.orientation)).ravel())
            owners.append(idx)
    if not columns:
        return [Component(c.point, c.order, c.orientation) for c in comps], np.zeros_like(A)
    Phi = np.column_stack(columns)
    scale = np.linalg.norm(Phi, axis=0)
    x, *_ = np.linalg.lstsq(Phi / scale, np.asarray(A, dtype=complex).ravel(), rcond=None)
    x = x / scale
    fitted = []
    pos = 0
    for comp in comps:
        k = comp.order + 1
        fitted.append(comp.with_coefficients(x[pos:pos + k]))
        pos += k
    synth = (Phi @ x).reshape(A.shape)
    return fitted, synth


def _relative_residual(A: np.ndarray, synth: np.ndarray) -> float:
    na = np.linalg.norm(A)
    return 0.0 if na == 0 else float(np.linalg.norm(A - synth) / na)


def fit_coefficients(basis: ModelBasis, A: np.ndarray, structure: RangeStructure,
                     tol: float = 1e-8) -> Decomposition:
    """Least-squares coefficients over the derived operators of each component."""
    fitted, synth = _lstsq_dictionary(basis, A, structure.components)
    residual = _relative_residual(A, synth)
    if residual > tol:
        raise FitError(f"relative reconstruction residual {residual:.2e} exceeds {tol:.1e}")
    return Decomposition(tuple(fitted), residual)


def elementary_coefficients(basis: ModelBasis, A: np.ndarray, mu: complex, n: int,
                            span_tol: float = 1e-6) -> "ElementaryCoefficients":
    """Expand A in the tensors d^p ktilde_mu (x) dbar^q k_mu, 0 <= p, q <= n.

    Requires Ran A = span{d^j ktilde_mu} and Ran A* = span{dbar^j k_mu}.
    """
    if n + 1 > basis.dim:
        raise OrderError(f"order {n} needs n + 1 <= {basis.dim}")
    A = np.asarray(A, dtype=complex)
    Kt = kernel_block(basis, mu, n, conjugate=True)
    K = kernel_block(basis, mu, n)
    R = range_basis(A)
    Rs = range_basis(A.conj().T)
    if (R.shape[1] != n + 1 or Rs.shape[1] != n + 1
            or subspace_containment(R, Kt) > span_tol
            or subspace_containment(Rs, K) > span_tol):
        raise SpanMismatchError("operator range is not the kernel-derivative span at mu")
    table = np.linalg.pinv(Kt) @ A @ np.linalg.pinv(K.conj().T)
    return ElementaryCoefficients(complex(mu), n, table)


@dataclass(frozen=True, eq=False)
class ElementaryCoefficients:
    mu: complex
    order: int
    table: np.ndarray

    @property
    def scale(self) -> float:
        return float(np.max(np.abs(self.table)))

    def binomial_residual(self) -> float:
        """max |a_{t,s-t} - a_{0,s} C(s,t)| over s <= n."""
        a = self.table
        worst = 0.0
        for s in range(self.order + 1):
            for t in range(s + 1):
                worst = max(worst, abs(a[t, s - t] - a[0, s] * math.comb(s, t)))
        return worst

    def upper_residual(self) -> float:
        """max |a_{p,q}| over p + q > n."""
        n = self.order
        vals = [abs(self.table[p, q]) for p in range(n + 1) for q in range(n + 1) if p + q > n]
        return max(vals, default=0.0)

    def system_residual(self) -> float:
        """Largest violation of the linear relations satisfied by the table.

        For mu != 0 these are (q+1) a_{p,q+1} - (p+1) a_{p+1,q} = 0; for
        mu = 0 they read a_{p,q} - (p+1)/q a_{p+1,q-1} = 0.  Out-of-range
        entries count as zero.
        """
        n = self.order
        a = np.zeros((n + 2, n + 2), dtype=complex)
        a[: n + 1, : n + 1] = self.table
        worst = 0.0
        if self.mu != 0:
            for p in range(n + 1):
                for q in range(n + 1):
                    worst = max(worst, abs((q + 1) * a[p, q + 1] - (p + 1) * a[p + 1, q]))
        else:
            for p in range(n + 1):
                for q in range(1, n + 2):
                    worst = max(worst, abs(a[p, q] - (p + 1) / q * a[p + 1, q - 1]))
        return worst

    def derived_coefficients(self) -> np.ndarray:
        """a_{0,s}: the coefficients of D^s[ktilde_mu (x) k_mu]."""
        return self.table[0, :].copy()


# ---------------------------------------------------------------------------
# the full pipeline
# ---------------------------------------------------------------------------

def _full_range_fallback(basis: ModelBasis, A: np.ndarray, tol: float, seed: int) -> Decomposition:
    # candidate points: atoms of two Clark measures, i.e. eigenvalues of the
    # compressed multiplication on the whole space after unitary perturbation
    rng = np.random.Generator(np.random.Philox(seed))
    points: list[complex] = []
    tries = 0
    while len(points) < 2 * basis.dim - 1 and tries < 16:
        tries += 1
        try:
            cm = clark_measure(basis, complex(np.exp(2j * np.pi * rng.random())))
        except (AtomCollisionError, ConditioningError):
            continue
        for xi in cm.atoms:
            if all(abs(xi - p) > 1e-6 for p in points) and len(points) < 2 * basis.dim - 1:
                points.append(complex(xi))
    comps = [Component(p, 0, BOUNDARY) for p in points]
    fitted, synth = _lstsq_dictionary(basis, A, comps)
    residual = _relative_residual(A, synth)
    if residual > tol:
        raise FitError(f"full-range fallback residual {residual:.2e} exceeds {tol:.1e}")
    return Decomposition(tuple(fitted), residual)


def decompose(basis: ModelBasis, A: np.ndarray, tol: float = 1e-8, seed: int = 0, *,
              rank_tol: float = 1e-8, **structure_options) -> Decomposition:
    """Write a finite-rank TTO as a combination of derived kernel operators."""
    A = np.asarray(A, dtype=complex)
    check = sarason_test(basis, A, tol)
    if not check.is_tto:
        raise NotTTOError(f"Sarason residual {check.residual:.2e} exceeds {tol:.1e}")
    R, _ = range_split(A, rank_tol)
    if R.shape[1] == 0:
        return Decomposition((), 0.0)
    if R.shape[1] >= basis.dim:
        return _full_range_fallback(basis, A, tol, seed)
    structure = find_range_structure(basis, A, tol, seed, rank_tol=rank_tol, **structure_options)
    return fit_coefficients(basis, A, structure, tol)
