"""Command-line front end: JSON job in, JSON result out.

    modelspace kernel    < job.json     # {"theta", "lambda", "n"?, "conjugate"?}
    modelspace build     < job.json     # {"theta", "symbol"}
    modelspace check     < job.json     # {"theta", "matrix"}
    modelspace decompose < job.json     # {"theta", "matrix"}
    modelspace synthesize < job.json    # {"theta", "decomposition"}
    modelspace clark     < job.json     # {"theta", "alpha"}
    modelspace selftest

Every job may also carry "tol", "seed" and "quadrature_size"; the flags
``--tol``, ``--seed`` and ``--quadrature`` override them.  Failures print
``{"error": {"kind", "message"}}`` and exit with 2 (domain), 3 (numerical)
or 4 (parse).
"""
from __future__ import annotations

import argparse
import io
import sys
from dataclasses import dataclass
from typing import Any, Callable

import numpy as np

from .clark import clark_measure, unitary_embedding
from .decompose import decompose, synthesize
from .errors import DomainError, ModelSpaceError, ParseError
from .inner_function import BlaschkeProduct
from .model_space import ModelBasis, conj_kernel, kernel, tm_basis
from .serialization import (
    clark_to_json,
    decomposition_from_json,
    decomposition_to_json,
    dumps,
    loads,
    matrix_from_json,
    matrix_to_json,
    parse_complex,
    parse_int,
    parse_real,
    symbol_from_json,
    theta_from_json,
    vector_to_json,
)
from .tto import compress, sarason_test

COMMON_FIELDS = ("theta", "tol", "seed", "quadrature_size")

# command -> (required payload fields, optional payload fields)
PAYLOADS = {
    "kernel": (("lambda",), ("n", "conjugate")),
    "build": (("symbol",), ()),
    "check": (("matrix",), ()),
    "decompose": (("matrix",), ()),
    "synthesize": (("decomposition",), ()),
    "clark": (("alpha",), ()),
    "selftest": ((), ()),
}


@dataclass(frozen=True)
class JobConfig:
    command: str
    theta: BlaschkeProduct | None
    payload: dict
    tol: float = 1e-8
    seed: int = 0
    quadrature_size: int | None = None

    def basis(self) -> ModelBasis:
        if self.theta is None:
            raise ParseError(f"command {self.command!r} needs a theta")
        return tm_basis(self.theta, self.quadrature_size)


def parse_job(command: str, obj: Any, tol=None, seed=None, quadrature=None) -> JobConfig:
    """Strictly parse a job object; flag values override the file."""
    if not isinstance(obj, dict):
        raise ParseError("job must be a JSON object")
    required, optional = PAYLOADS[command]
    allowed = set(COMMON_FIELDS) | set(required) | set(optional)
    unknown = sorted(set(obj) - allowed)
    if unknown:
        raise ParseError(f"unknown field(s) for {command}: {', '.join(unknown)}")
    missing = [k for k in required if k not in obj]
    if command != "selftest" and "theta" not in obj:
        missing.insert(0, "theta")
    if missing:
        raise ParseError(f"missing field(s) for {command}: {', '.join(missing)}")
    theta = theta_from_json(obj["theta"]) if "theta" in obj else None
    t = parse_real(obj["tol"], "tol") if "tol" in obj else 1e-8
    s = parse_int(obj["seed"], "seed") if "seed" in obj else 0
    q = parse_int(obj["quadrature_size"], "quadrature_size") if "quadrature_size" in obj else None
    if tol is not None:
        t = tol
    if seed is not None:
        s = seed
    if quadrature is not None:
        q = quadrature
    if not t > 0:
        raise DomainError("tol must be positive")
    payload = {k: obj[k] for k in required + optional if k in obj}
    return JobConfig(command, theta, payload, t, s, q)


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------

def cmd_kernel(job: JobConfig) -> dict:
    basis = job.basis()
    lam = parse_complex(job.payload["lambda"], "lambda")
    n = parse_int(job.payload.get("n", 0), "n")
    conjugate = job.payload.get("conjugate", False)
    if not isinstance(conjugate, bool):
        raise ParseError("conjugate must be true or false")
    v = conj_kernel(basis, lam, n) if conjugate else kernel(basis, lam, n)
    return {"vector": vector_to_json(v), "norm": float(np.linalg.norm(v))}


def cmd_build(job: JobConfig) -> dict:
    basis = job.basis()
    return matrix_to_json(compress(basis, symbol_from_json(job.payload["symbol"])))


def _operator(job: JobConfig, basis: ModelBasis) -> np.ndarray:
    A = matrix_from_json(job.payload["matrix"])
    if A.shape != (basis.dim, basis.dim):
        raise DomainError(f"matrix shape {A.shape} does not match dim {basis.dim}")
    return A


def cmd_check(job: JobConfig) -> dict:
    basis = job.basis()
    res = sarason_test(basis, _operator(job, basis), job.tol)
    return {"is_tto": bool(res.is_tto), "residual": res.residual,
            "psi": vector_to_json(res.psi), "chi": vector_to_json(res.chi)}


def cmd_decompose(job: JobConfig) -> dict:
    basis = job.basis()
    return decomposition_to_json(decompose(basis, _operator(job, basis), job.tol, job.seed))


def cmd_synthesize(job: JobConfig) -> dict:
    basis = job.basis()
    return matrix_to_json(synthesize(basis, decomposition_from_json(job.payload["decomposition"])))


def cmd_clark(job: JobConfig) -> dict:
    basis = job.basis()
    cm = clark_measure(basis, parse_complex(job.payload["alpha"], "alpha"))
    V = unitary_embedding(basis, cm)
    return {"measure": clark_to_json(cm),
            "total_mass": float(np.sum(cm.masses)),
            "embedding_residual": float(np.linalg.norm(V.conj().T @ V - np.eye(basis.dim), 2))}


def cmd_selftest(job: JobConfig) -> tuple[dict, int]:
    from .acceptance import run_all

    results = run_all()
    report = {"criteria": [r.to_json() for r in results],
              "passed": all(r.passed for r in results)}
    return report, 0 if report["passed"] else 3


COMMANDS: dict[str, Callable[[JobConfig], Any]] = {
    "kernel": cmd_kernel,
    "build": cmd_build,
    "check": cmd_check,
    "decompose": cmd_decompose,
    "synthesize": cmd_synthesize,
    "clark": cmd_clark,
    "selftest": cmd_selftest,
}


# ---------------------------------------------------------------------------
# entry point
# ---------------------------------------------------------------------------

class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ParseError(message)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="modelspace",
                     description="Model-space and truncated Toeplitz operator toolkit.")
    parser.add_argument("command", choices=sorted(COMMANDS))
    parser.add_argument("--in", dest="infile", help="read the job from this file instead of stdin")
    parser.add_argument("--out", dest="outfile", help="write the result to this file instead of stdout")
    parser.add_argument("--tol", type=float, default=None, help="tolerance (default 1e-8)")
    parser.add_argument("--seed", type=int, default=None, help="random seed (default 0)")
    parser.add_argument("--quadrature", type=int, default=None,
                        help="number of circle quadrature nodes (default automatic)")
    return parser


def error_envelope(exc: BaseException) -> tuple[dict, int]:
    code = exc.exit_code if isinstance(exc, ModelSpaceError) else 3
    return {"error": {"kind": type(exc).__name__, "message": str(exc)}}, code


def execute(args: argparse.Namespace, stdin: io.TextIOBase) -> tuple[dict, int]:
    try:
        if args.infile is not None:
            try:
                with open(args.infile, encoding="utf-8") as fh:
                    text = fh.read()
            except OSError as exc:
                raise ParseError(f"cannot read {args.infile}: {exc}") from exc
        elif args.command == "selftest":
            text = "{}"
        else:
            text = stdin.read()
        obj = loads(text) if text.strip() else {}
        job = parse_job(args.command, obj, args.tol, args.seed, args.quadrature)
        out = COMMANDS[args.command](job)
        return out if isinstance(out, tuple) else (out, 0)
    except Exception as exc:  # every failure becomes a machine-readable envelope
        return error_envelope(exc)


def main(argv: list[str] | None = None, stdin=None, stdout=None) -> int:
    out = sys.stdout if stdout is None else stdout
    try:
        args = build_parser().parse_args(argv)
    except ParseError as exc:
        result, code = error_envelope(exc)
        out.write(dumps(result))
        return code
    result, code = execute(args, sys.stdin if stdin is None else stdin)
    text = dumps(result)
    if args.outfile is not None:
        with open(args.outfile, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        out.write(text)
    return code


def run(argv: list[str], stdin_text: str = "") -> tuple[int, str]:
    """Run the CLI in-process; returns (exit code, stdout text)."""
    out = io.StringIO()
    code = main(argv, io.StringIO(stdin_text), out)
    return code, out.getvalue()


if __name__ == "__main__":
    sys.exit(main())
