"""Quantum Markov processes: Kraus channels and Lindblad generators.

Vectorization is column stacking throughout, so that

    vec(A X B) = (B^T kron A) vec(X).
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass, field
from typing import Literal, Sequence

import numpy as np
import scipy.linalg

from . import tolerances
from .operators import as_operator, dag, hermiticity_error, validate_density

DISCRETE = "discrete"
CONTINUOUS = "continuous"

# beyond this many steps discrete powers use repeated squaring
_KRAUS_STEPS_MAX = 64
_EIG_COND_MAX = 1e8


class InvalidProcessError(ValueError):
    pass


def vec(x: np.ndarray) -> np.ndarray:
    return np.asarray(x).reshape(-1, order="F")


def unvec(v: np.ndarray, dim: int | None = None) -> np.ndarray:
    v = np.asarray(v)
    if dim is None:
        dim = math.isqrt(v.size)
    return v.reshape((dim, dim), order="F")


@dataclass(frozen=True, eq=False)
class ProcessSpec:
    """A discrete Kraus channel or a continuous Lindbladian ``(H, {L_j})``.

    Build instances with :meth:`discrete` or :meth:`continuous`; both validate
    unless ``check=False`` (the verification suite inspects broken specs).
    """

    kind: Literal["discrete", "continuous"]
    dim: int
    kraus: tuple = ()
    hamiltonian: np.ndarray | None = None
    lindblad_ops: tuple = ()
    label: str | None = None
    meta: dict = field(default_factory=dict)

    @classmethod
    def discrete(cls, kraus: Sequence, label=None, meta=None, check=True) -> "ProcessSpec":
        ops = tuple(as_operator(k) for k in kraus)
        if not ops:
            raise InvalidProcessError("a discrete process needs at least one Kraus operator")
        dim = ops[0].shape[0]
        for k in ops:
            as_operator(k, dim)
        spec = cls(DISCRETE, dim, kraus=ops, label=label, meta=dict(meta or {}))
        if check:
            spec.validate()
        return spec

    @classmethod
    def continuous(cls, hamiltonian, lindblad_ops: Sequence = (), label=None, meta=None, check=True) -> "ProcessSpec":
        h = as_operator(hamiltonian)
        ops = tuple(as_operator(op, h.shape[0]) for op in lindblad_ops)
        spec = cls(CONTINUOUS, h.shape[0], hamiltonian=h, lindblad_ops=ops, label=label, meta=dict(meta or {}))
        if check:
            spec.validate()
        return spec

    def completeness_error(self) -> float:
        if self.kind != DISCRETE:
            return 0.0
        s = sum(dag(k) @ k for k in self.kraus)
        return float(np.linalg.norm(s - np.eye(self.dim)))

    def validate(self) -> "ProcessSpec":
        tol = tolerances.current()
        if self.kind == DISCRETE:
            err = self.completeness_error()
            if err > tol.tp:
                raise InvalidProcessError(
                    f"Kraus operators are not trace preserving (||sum K^dagger K - I||_F = {err:.3e})"
                )
        elif self.kind == CONTINUOUS:
            err = hermiticity_error(self.hamiltonian)
            if err > tol.herm:
                raise InvalidProcessError(f"Hamiltonian is not Hermitian (||H - H^dagger||_F = {err:.3e})")
        else:
            raise InvalidProcessError(f"unknown process kind {self.kind!r}")
        return self

    @functools.cached_property
    def superoperator(self) -> "Superoperator":
        return to_superoperator(self)

    @functools.cached_property
    def _generator_eig(self):
        w, v = np.linalg.eig(self.superoperator.matrix)
        cond = np.linalg.cond(v)
        if not np.isfinite(cond) or cond > _EIG_COND_MAX:
            return None
        return w, v, np.linalg.inv(v)


@dataclass(frozen=True, eq=False)
class Superoperator:
    dim: int
    matrix: np.ndarray
    picture: Literal["schrodinger", "heisenberg"] = "schrodinger"
    kind: Literal["map", "generator"] = "map"

    def __call__(self, x: np.ndarray) -> np.ndarray:
        return unvec(self.matrix @ vec(x), self.dim)


def check_time(kind: str, t) -> float | int:
    t = float(t) if not isinstance(t, (int, np.integer)) else int(t)
    if not math.isfinite(t) or t < 0:
        raise ValueError(f"time must be a finite non-negative number, got {t}")
    if kind == DISCRETE:
        if isinstance(t, float):
            if not t.is_integer():
                raise ValueError(f"discrete processes need integer times, got {t}")
            t = int(t)
    return t


def to_superoperator(spec: ProcessSpec) -> Superoperator:
    n = spec.dim
    eye = np.eye(n)
    if spec.kind == DISCRETE:
        m = sum(np.kron(np.conj(k), k) for k in spec.kraus)
        return Superoperator(n, np.asarray(m, dtype=complex), "schrodinger", "map")
    h = spec.hamiltonian
    # i[X, H] = i X H - i H X
    m = 1j * np.kron(h.T, eye) - 1j * np.kron(eye, h)
    for op in spec.lindblad_ops:
        ldl = dag(op) @ op
        m = m + np.kron(np.conj(op), op) - 0.5 * np.kron(eye, ldl) - 0.5 * np.kron(ldl.T, eye)
    return Superoperator(n, np.asarray(m, dtype=complex), "schrodinger", "generator")


def adjoint(s: Superoperator) -> Superoperator:
    picture = "heisenberg" if s.picture == "schrodinger" else "schrodinger"
    return Superoperator(s.dim, dag(s.matrix), picture, s.kind)


def apply_kraus(kraus, rho: np.ndarray) -> np.ndarray:
    return sum(k @ rho @ dag(k) for k in kraus)


def propagator(spec: ProcessSpec, t, method: str = "auto") -> np.ndarray:
    """Matrix of the propagator ``T_t`` acting on vectorized operators.

    For continuous processes ``method`` selects ``"eig"`` (reuse the cached
    eigendecomposition of the generator), ``"expm"`` (scaling and squaring) or
    ``"auto"`` (eig when the eigenvector matrix is well conditioned).
    """
    t = check_time(spec.kind, t)
    m = spec.superoperator.matrix
    if spec.kind == DISCRETE:
        return np.linalg.matrix_power(m, t)
    if method not in ("auto", "eig", "expm"):
        raise ValueError(f"unknown propagation method {method!r}")
    eig = spec._generator_eig if method != "expm" else None
    if eig is None:
        if method == "eig":
            raise ValueError("generator eigendecomposition is too ill-conditioned")
        return scipy.linalg.expm(m * t)
    w, v, vinv = eig
    return (v * np.exp(w * t)) @ vinv


def evolve(spec: ProcessSpec, rho, t, method: str = "auto", validate: bool = True) -> np.ndarray:
    """State at time ``t`` of the trajectory started in ``rho``.

    Discrete ``method``: ``"auto"``, ``"kraus"`` (step-by-step Kraus sums) or
    ``"matrix"`` (powers of the superoperator matrix). Continuous: see
    :func:`propagator`.
    """
    t = check_time(spec.kind, t)
    rho = as_operator(rho, spec.dim)
    if t == 0:
        out = rho.copy()
    elif spec.kind == DISCRETE and (method == "kraus" or (method == "auto" and t <= _KRAUS_STEPS_MAX)):
        out = rho
        for _ in range(t):
            out = apply_kraus(spec.kraus, out)
    else:
        if spec.kind == DISCRETE:
            method = "auto"
        out = unvec(propagator(spec, t, method=method) @ vec(rho), spec.dim)
    if validate:
        validate_density(out)
    return out


def heisenberg_evolve(spec: ProcessSpec, b, t, method: str = "auto") -> np.ndarray:
    """Observable ``B(t) = T_t^dagger(B)``."""
    b = as_operator(b, spec.dim)
    return unvec(dag(propagator(spec, t, method)) @ vec(b), spec.dim)


def unitality_error(spec: ProcessSpec) -> float:
    n = spec.dim
    if spec.kind == DISCRETE:
        return float(np.linalg.norm(sum(k @ dag(k) for k in spec.kraus) - np.eye(n)))
    return float(np.linalg.norm(spec.superoperator(np.eye(n))))


def is_unital(spec: ProcessSpec) -> bool:
    return unitality_error(spec) <= tolerances.current().tp


def one_step(spec: ProcessSpec, x: np.ndarray) -> np.ndarray:
    """Apply the one-step map ``T`` (``exp(L)`` for continuous processes)."""
    if spec.kind == DISCRETE:
        return spec.superoperator(x)
    return unvec(propagator(spec, 1.0) @ vec(x), spec.dim)
