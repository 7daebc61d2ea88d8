"""Acceptance suites, shared by ``modelspace selftest`` and the test suite.

Each suite draws its random data from its own seeded generator and compares
the package's output with an independent oracle (circle quadrature of Cauchy
integrals, closed forms, or the defining identities).  Vector and matrix
comparisons use ``relerr``: ``||a - b|| / max(1, ||b||)`` against the tolerance.
"""
from __future__ import annotations

import math
import time
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .clark import cauchy_reconstruct, clark_measure, clark_unitary, unembed, unitary_embedding
from .decompose import (
    Component,
    Decomposition,
    decompose,
    elementary_coefficients,
    range_inclusion_residual,
    synthesize,
)
from .inner_function import BlaschkeProduct, evaluate
from .model_space import (
    circle_nodes,
    basis_values,
    compressed_shift,
    conj_kernel,
    conjugation_matrix,
    eval_vector,
    kernel,
    tm_basis,
)
from .serialization import dumps, matrix_to_json, theta_to_json
from .tto import (
    D,
    DBAR,
    BOUNDARY,
    SymbolSpec,
    SymbolTerm,
    complex_symmetry_residual,
    compress,
    derived_op,
    derived_symbol,
    pair,
    sarason_test,
    symbol_operator,
)

SEPARATION = 0.1
ZERO_RADIUS = 0.6
RANK_FLOOR = 1e-8


@dataclass
class CriterionResult:
    number: int
    name: str
    passed: bool
    detail: str
    seconds: float = 0.0

    def line(self) -> str:
        mark = "PASS" if self.passed else "FAIL"
        return f"[{mark}] criterion {self.number:2d} {self.name}: {self.detail} ({self.seconds:.2f} s)"

    def to_json(self) -> dict:
        # no timing: the report must be reproducible byte for byte
        return {"number": self.number, "name": self.name, "passed": self.passed,
                "detail": self.detail}


# ---------------------------------------------------------------------------
# random data
# ---------------------------------------------------------------------------

def generator(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(seed))


def random_disk(rng: np.random.Generator, rmax: float, rmin: float = 0.0) -> complex:
    r = math.sqrt(rmin ** 2 + (rmax ** 2 - rmin ** 2) * rng.random())
    return complex(r * np.exp(2j * np.pi * rng.random()))


def random_circle(rng: np.random.Generator) -> complex:
    return complex(np.exp(2j * np.pi * rng.random()))


def random_theta(rng: np.random.Generator, n: int, rmax: float = ZERO_RADIUS) -> BlaschkeProduct:
    zeros = tuple(random_disk(rng, rmax) for _ in range(n))
    return BlaschkeProduct(zeros, random_circle(rng))


def random_vector(rng: np.random.Generator, n: int) -> np.ndarray:
    return rng.standard_normal(n) + 1j * rng.standard_normal(n)


def random_matrix(rng: np.random.Generator, n: int) -> np.ndarray:
    return rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))


def random_symbol(rng: np.random.Generator) -> SymbolSpec:
    terms = []
    for _ in range(int(rng.integers(1, 5))):
        kind = ("poly_analytic", "poly_conj", "theta_pole", "theta_pole_conj")[int(rng.integers(4))]
        coeff = complex(random_vector(rng, 1)[0])
        if kind.startswith("theta_pole"):
            terms.append(SymbolTerm(kind, int(rng.integers(1, 4)), coeff, random_disk(rng, 0.8)))
        else:
            terms.append(SymbolTerm(kind, int(rng.integers(0, 4)), coeff))
    return SymbolSpec(tuple(terms))


def relerr(a, b) -> float:
    return float(np.linalg.norm(np.asarray(a) - np.asarray(b)) / max(1.0, float(np.linalg.norm(b))))


ORACLE_NODES = 4096


def oracle_nodes() -> np.ndarray:
    return circle_nodes(ORACLE_NODES)


def cauchy_derivative(samples: np.ndarray, lam: complex, n: int) -> complex:
    """f^(n)(lam) from samples of an analytic f on ``oracle_nodes()``, by the
    Cauchy integral (an oracle independent of Taylor series).  The grid is
    fine enough that the trapezoid error is negligible for |lam| <= 0.9."""
    z = oracle_nodes()
    return complex(math.factorial(n) * np.mean(samples * z / (z - lam) ** (n + 1)))


# ---------------------------------------------------------------------------
# the synthesized-operator generator for the round trip
# ---------------------------------------------------------------------------

REGIMES = ("interior", "exterior", "boundary")


def synthesized_case(rng: np.random.Generator, n: int, separation: float = SEPARATION):
    """A random finite-rank TTO with known components.

    ``interior`` draws Dbar components inside the disk, ``exterior`` draws
    D components (the reflected points of the range dictionary) and
    ``boundary`` draws Dbar components on the circle.  Points are separated
    by ``separation`` both as points and after reflection, coefficients have
    modulus in [0.5, 2] and the total rank is at most n - 2.  Cases whose
    smallest nonzero singular value falls below ``RANK_FLOOR * sigma_max``
    are redrawn, since their rank is not numerically defined.
    """
    while True:
        theta = random_theta(rng, n)
        basis = tm_basis(theta)
        comps: list[Component] = []
        used: list[tuple[complex, complex]] = []
        budget = n - 2
        for _ in range(int(rng.integers(1, 5))):
            if budget <= 0:
                break
            for _attempt in range(100):
                regime = REGIMES[int(rng.integers(3))]
                if regime == "boundary":
                    lam = random_circle(rng)
                    image = lam
                else:
                    lam = random_disk(rng, 0.75, 0.2)
                    image = lam if regime == "exterior" else 1.0 / np.conj(lam)
                if all(abs(lam - p) >= separation and abs(image - q) >= separation for p, q in used):
                    break
            order = int(rng.integers(0, min(3, budget - 1) + 1))
            budget -= order + 1
            coefs = tuple(complex((0.5 + 1.5 * rng.random()) * np.exp(2j * np.pi * rng.random()))
                          for _ in range(order + 1))
            orient = D if regime == "exterior" else DBAR
            comps.append(Component(lam, order, orient, coefs))
            used.append((lam, image))
        A = synthesize(basis, Decomposition(tuple(comps), 0.0))
        s = np.linalg.svd(A, compute_uv=False)
        rank = sum(c.order + 1 for c in comps)
        if s[rank - 1] >= RANK_FLOOR * s[0]:
            regimes = ["boundary" if abs(abs(c.point) - 1) < 1e-12 else
                       ("exterior" if c.orientation == D else "interior") for c in comps]
            return basis, A, comps, regimes


def _expected_orientation(comp: Component) -> str:
    return BOUNDARY if abs(abs(comp.point) - 1.0) < 1e-12 else comp.orientation


# ---------------------------------------------------------------------------
# criteria
# ---------------------------------------------------------------------------

def criterion_reproducing() -> tuple[bool, str]:
    rng = generator(101)
    worst0 = worstn = 0.0
    for _ in range(20):
        basis = tm_basis(random_theta(rng, int(rng.integers(1, 9))))
        f = random_vector(rng, basis.dim)
        lam = random_disk(rng, 0.9)
        samples = basis_values(basis.theta, oracle_nodes()) @ f
        nf = np.linalg.norm(f)
        k = kernel(basis, lam)
        worst0 = max(worst0, abs(np.vdot(k, f) - cauchy_derivative(samples, lam, 0))
                     / (nf * np.linalg.norm(k)))
        for n in range(1, 4):
            kn = kernel(basis, lam, n)
            worstn = max(worstn, abs(np.vdot(kn, f) - cauchy_derivative(samples, lam, n))
                         / (nf * np.linalg.norm(kn)))
    ok = worst0 <= 1e-9 and worstn <= 1e-7
    return ok, f"value error {worst0:.1e} (<= 1e-9), derivative error {worstn:.1e} (<= 1e-7)"


def criterion_shift() -> tuple[bool, str]:
    rng = generator(102)
    worst = 0.0
    for _ in range(20):
        theta = random_theta(rng, int(rng.integers(4, 9)))
        basis = tm_basis(theta)
        S = compressed_shift(basis)
        lam = random_disk(rng, 0.9, 0.1)
        k0, kt0 = kernel(basis, 0.0), conj_kernel(basis, 0.0)
        kl, ktl = kernel(basis, lam), conj_kernel(basis, lam)
        checks = [
            (S @ kl, (kl - k0) / np.conj(lam)),
            (S @ ktl, lam * ktl - evaluate(theta, lam) * k0),
            (S @ k0, kernel(basis, 0.0, 1)),
            (S @ kt0, -evaluate(theta, 0.0) * k0),
        ]
        Sn = np.eye(basis.dim)
        for n in range(1, 4):
            Sn = S @ Sn
            checks.append((Sn @ k0, kernel(basis, 0.0, n) / math.factorial(n)))
        worst = max(worst, max(relerr(a, b) for a, b in checks))
    return worst <= 1e-9, f"largest relation error {worst:.1e} (<= 1e-9)"


def criterion_conjugation() -> tuple[bool, str]:
    rng = generator(103)
    c2 = sym = 0.0
    non = math.inf
    for i in range(20):
        basis = tm_basis(random_theta(rng, int(rng.integers(3, 11))))
        cmap = conjugation_matrix(basis)
        c2 = max(c2, float(np.max(np.abs(cmap.squared() - np.eye(basis.dim)))))
        sym = max(sym, complex_symmetry_residual(basis, compress(basis, random_symbol(rng)), cmap))
        if i < 10:
            non = min(non, complex_symmetry_residual(basis, random_matrix(rng, basis.dim), cmap))
    ok = c2 <= 1e-10 and sym <= 1e-8 and non >= 0.1
    return ok, (f"C^2 - I {c2:.1e} (<= 1e-10), TTO symmetry residual {sym:.1e} (<= 1e-8), "
                f"non-TTO residual >= {non:.2f} (>= 0.1)")


def criterion_sarason() -> tuple[bool, str]:
    rng = generator(104)
    tol = 1e-8
    accepted = rejected = 0
    worst_accept = worst_roundtrip = 0.0
    least_reject = math.inf
    for _ in range(20):
        basis = tm_basis(random_theta(rng, int(rng.integers(3, 11))))
        A = compress(basis, random_symbol(rng))
        res = sarason_test(basis, A, tol)
        accepted += res.is_tto
        worst_accept = max(worst_accept, res.residual)
        worst_roundtrip = max(worst_roundtrip, relerr(symbol_operator(basis, res.psi, res.chi), A))
        bad = sarason_test(basis, random_matrix(rng, basis.dim), tol)
        rejected += (not bad.is_tto) and bad.residual >= 1e3 * tol
        least_reject = min(least_reject, bad.residual)
    ok = accepted == 20 and rejected == 20 and worst_roundtrip <= 1e-7
    return ok, (f"accepted {accepted}/20 (max residual {worst_accept:.1e}), rejected {rejected}/20 "
                f"(min residual {least_reject:.2f}), symbol round trip {worst_roundtrip:.1e} (<= 1e-7)")


def criterion_clark() -> tuple[bool, str]:
    rng = generator(105)
    unit = atom = embed_err = recon = 0.0
    for _ in range(10):
        basis = tm_basis(random_theta(rng, int(rng.integers(1, 11))))
        alpha = random_circle(rng)
        U = clark_unitary(basis, alpha)
        unit = max(unit, float(np.max(np.abs(U.conj().T @ U - np.eye(basis.dim)))))
        cm = clark_measure(basis, alpha)
        atom = max(atom, float(np.max(np.abs(evaluate(basis.theta, cm.atoms) - alpha))))
        V = unitary_embedding(basis, cm)
        embed_err = max(embed_err, float(np.max(np.abs(V.conj().T @ V - np.eye(basis.dim)))))
        f = random_vector(rng, basis.dim)
        values = basis_values(basis.theta, cm.atoms) @ f
        for _ in range(3):
            z = random_disk(rng, 0.9)
            recon = max(recon, abs(cauchy_reconstruct(cm, values, z, basis) - eval_vector(basis, f, z))
                        / max(1.0, abs(eval_vector(basis, f, z))))
        recon = max(recon, relerr(unembed(basis, cm, values), f))
    roots = masses = 0.0
    for n in (1, 3, 8, 16):
        basis = tm_basis(BlaschkeProduct((0j,) * n))
        cm = clark_measure(basis, 1.0)
        nearest = np.abs(cm.atoms[:, None] - circle_nodes(n)[None, :]).min(axis=1)
        roots = max(roots, float(np.max(nearest)))
        masses = max(masses, float(np.max(np.abs(cm.masses - 1.0 / n))))
    ok = unit <= 1e-10 and atom <= 1e-8 and embed_err <= 1e-9 and recon <= 1e-8 and roots <= 1e-10 and masses <= 1e-10
    return ok, (f"unitarity {unit:.1e}, theta(atoms) - alpha {atom:.1e}, embedding {embed_err:.1e}, "
                f"reconstruction {recon:.1e}, roots of unity {roots:.1e}, masses {masses:.1e}")


def _rank(A: np.ndarray, rtol: float = 1e-10) -> int:
    s = np.linalg.svd(A, compute_uv=False)
    return int(np.sum(s > rtol * s[0]))


def criterion_rank() -> tuple[bool, str]:
    rng = generator(106)
    good = 0
    for i in range(20):
        basis = tm_basis(random_theta(rng, int(rng.integers(2, 11))))
        lam = random_circle(rng) if i % 2 else random_disk(rng, 0.8)
        n = int(rng.integers(0, min(3, basis.dim - 1) + 1))
        orient = (D, DBAR)[int(rng.integers(2))]
        good += _rank(derived_op(basis, lam, n, orient)) == n + 1
    return good == 20, f"rank n + 1 in {good}/20 cases (10 interior, 10 boundary)"


def criterion_symbol() -> tuple[bool, str]:
    rng = generator(107)
    worst = 0.0
    for i in range(10):
        basis = tm_basis(random_theta(rng, int(rng.integers(3, 11))))
        lam = random_disk(rng, 0.8)
        n = i % 3
        worst = max(worst, relerr(compress(basis, derived_symbol(lam, n, D)), derived_op(basis, lam, n, D)))
    return worst <= 1e-7, f"largest difference {worst:.1e} (<= 1e-7)"


def criterion_round_trip() -> tuple[bool, str]:
    rng = generator(108)
    good = 0
    worst_point = worst_res = 0.0
    failures = []
    seen = set()
    for i in range(30):
        n = (6, 10, 16)[i % 3]
        basis, A, comps, regimes = synthesized_case(rng, n)
        seen.update(regimes)
        try:
            d = decompose(basis, A, 1e-8, seed=i)
        except Exception as exc:  # reported, never swallowed silently
            failures.append(f"case {i}: {type(exc).__name__}")
            continue
        ok = len(d.components) == len(comps)
        for c in comps:
            m = min(d.components, key=lambda x: abs(x.point - c.point))
            err = abs(m.point - c.point)
            worst_point = max(worst_point, err)
            ok &= err <= 1e-6 and m.order == c.order and m.orientation == _expected_orientation(c)
        worst_res = max(worst_res, d.residual)
        ok &= d.residual <= 1e-6
        good += ok
        if not ok:
            failures.append(f"case {i}: mismatch")
    detail = (f"{good}/30 recovered, point error {worst_point:.1e} (<= 1e-6), "
              f"residual {worst_res:.1e} (<= 1e-6), regimes {sorted(seen)}")
    if failures:
        detail += "; " + ", ".join(failures)
    return good == 30 and len(seen) == 3, detail


def criterion_coefficients() -> tuple[bool, str]:
    rng = generator(109)
    worst = 0.0
    cases = 0
    for mu0 in (True, False):
        for n in range(4):
            basis = tm_basis(random_theta(rng, int(rng.integers(n + 2, 11))))
            mu = 0j if mu0 else random_disk(rng, 0.7, 0.1)
            A = derived_op(basis, mu, n, D)
            ec = elementary_coefficients(basis, A, mu, n)
            worst = max(worst, ec.binomial_residual() / ec.scale, ec.upper_residual() / ec.scale)
            cases += 1
    return worst <= 1e-8, f"{cases} operators, largest structure residual {worst:.1e} (<= 1e-8 max|a|)"


def criterion_range_inclusion() -> tuple[bool, str]:
    rng = generator(110)
    worst = 0.0
    chains = 0
    for i in range(20):
        n = int(rng.integers(4, 11))
        basis = tm_basis(random_theta(rng, n))
        comps = []
        budget = n - 1
        if i % 2 == 0:
            order = int(rng.integers(0, 3))
            comps.append(Component(0j, order, DBAR, tuple(random_vector(rng, order + 1))))
            budget -= order + 1
        while budget > 0 and len(comps) < 3:
            order = int(rng.integers(0, min(2, budget - 1) + 1))
            lam = random_circle(rng) if rng.random() < 0.3 else random_disk(rng, 0.8, 0.2)
            comps.append(Component(lam, order, (D, DBAR)[int(rng.integers(2))],
                                   tuple(random_vector(rng, order + 1))))
            budget -= order + 1
        A = synthesize(basis, Decomposition(tuple(comps), 0.0))
        res, chain = range_inclusion_residual(basis, A)
        chains += chain > 0
        worst = max(worst, res)
    return worst <= 1e-7, f"largest residual {worst:.1e} (<= 1e-7), {chains} cases with a zero chain"


def criterion_pairing() -> tuple[bool, str]:
    rng = generator(111)
    worst = 0.0
    for i in range(10):
        basis = tm_basis(random_theta(rng, int(rng.integers(3, 11))))
        cmap = conjugation_matrix(basis)
        lam = random_disk(rng, 0.8)
        s = i % 3
        terms = [(random_vector(rng, basis.dim), random_vector(rng, basis.dim))
                 for _ in range(int(rng.integers(1, 4)))]
        # boundary samples of sum x_k * (C y_k), an analytic function
        vals = basis_values(basis.theta, oracle_nodes())
        h = sum((vals @ x) * (vals @ cmap(y)) for x, y in terms)
        expected = cauchy_derivative(h, lam, s)
        got = pair(derived_op(basis, lam, s, D), terms)
        worst = max(worst, abs(got - expected) / max(1.0, abs(expected)))
    return worst <= 1e-7, f"largest pairing error {worst:.1e} (<= 1e-7)"


def criterion_determinism() -> tuple[bool, str]:
    from .cli import run

    rng = generator(112)
    basis, A, _, _ = synthesized_case(rng, 10)
    job = dumps({"theta": theta_to_json(basis.theta), "matrix": matrix_to_json(A), "seed": 7})
    outputs = [run(["decompose"], job) for _ in range(3)]
    codes = {code for code, _ in outputs}
    same = len({text for _, text in outputs}) == 1
    return same and codes == {0}, f"3 runs, exit codes {sorted(codes)}, byte-identical: {same}"


CRITERIA: tuple[tuple[int, str, Callable[[], tuple[bool, str]]], ...] = (
    (1, "reproducing identities", criterion_reproducing),
    (2, "shift relations", criterion_shift),
    (3, "conjugation and complex symmetry", criterion_conjugation),
    (4, "Sarason criterion", criterion_sarason),
    (5, "Clark measures", criterion_clark),
    (6, "rank law", criterion_rank),
    (7, "interior symbol equivalence", criterion_symbol),
    (8, "decomposition round trip", criterion_round_trip),
    (9, "coefficient system", criterion_coefficients),
    (10, "range inclusion", criterion_range_inclusion),
    (11, "duality pairing", criterion_pairing),
    (12, "determinism", criterion_determinism),
)


def run_criterion(number: int) -> CriterionResult:
    for num, name, fn in CRITERIA:
        if num == number:
            start = time.perf_counter()
            try:
                passed, detail = fn()
            except Exception as exc:
                passed, detail = False, f"raised {type(exc).__name__}: {exc}"
            return CriterionResult(num, name, bool(passed), detail, time.perf_counter() - start)
    raise KeyError(number)


def run_all() -> list[CriterionResult]:
    return [run_criterion(num) for num, _, _ in CRITERIA]
