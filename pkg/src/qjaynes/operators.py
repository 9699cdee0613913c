"""Operator-space helpers: Hilbert-Schmidt geometry, Hermitian functional
calculus restricted to supports, and density-matrix validation.

Operators are plain square complex ``numpy`` arrays throughout the package.
"""

from __future__ import annotations

from typing import Callable, NamedTuple

import numpy as np

from . import tolerances


class DensityMatrixError(ValueError):
    """Raised when an operator fails one or more density-matrix invariants.

    ``violations`` holds ``(name, magnitude)`` pairs, one per failed check.
    """

    def __init__(self, violations):
        self.violations = list(violations)
        text = "; ".join(f"{name} (magnitude {mag:.3e})" for name, mag in self.violations)
        super().__init__(f"not a density matrix: {text}")


class SupportProjector(NamedTuple):
    op: np.ndarray
    rank: int


def as_operator(a, dim: int | None = None) -> np.ndarray:
    a = np.asarray(a, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"operator must be a square matrix, got shape {a.shape}")
    if dim is not None and a.shape[0] != dim:
        raise ValueError(f"operator has dimension {a.shape[0]}, expected {dim}")
    return a


def dag(a: np.ndarray) -> np.ndarray:
    return np.conj(np.swapaxes(a, -1, -2))


def hermitian_part(a: np.ndarray) -> np.ndarray:
    return 0.5 * (a + dag(a))


def hs_inner(a, b) -> complex:
    """Hilbert-Schmidt product ``Tr[a^dagger b]``."""
    a = as_operator(a)
    b = as_operator(b)
    if a.shape != b.shape:
        raise ValueError(f"dimension mismatch: {a.shape[0]} vs {b.shape[0]}")
    return complex(np.vdot(a, b))


def commutator(a, b) -> np.ndarray:
    return a @ b - b @ a


def hermiticity_error(a: np.ndarray) -> float:
    return float(np.linalg.norm(a - dag(a)))


def _eigh_checked(a) -> tuple[np.ndarray, np.ndarray]:
    a = as_operator(a)
    tol = tolerances.current()
    err = hermiticity_error(a)
    if err > tol.herm * max(1.0, np.linalg.norm(a)):
        raise ValueError(f"operator is not Hermitian (||A - A^dagger||_F = {err:.3e})")
    return np.linalg.eigh(hermitian_part(a))


def _support_mask(w: np.ndarray) -> np.ndarray:
    scale = np.max(np.abs(w)) if w.size else 0.0
    if scale == 0.0:
        return np.zeros_like(w, dtype=bool)
    return w > tolerances.current().support * scale


def herm_function(a, f: Callable[[np.ndarray], np.ndarray], support_only: bool = False) -> np.ndarray:
    """Apply a scalar function to a Hermitian operator through its eigenbasis.

    With ``support_only`` the eigenvalues at or below ``tol.support`` times the
    largest one are left out of the functional calculus and contribute zero,
    which is how logarithms of rank-deficient states are taken.
    """
    w, v = _eigh_checked(a)
    if support_only:
        keep = _support_mask(w)
        w, v = w[keep], v[:, keep]
    with np.errstate(divide="raise", invalid="raise"):
        try:
            fw = np.asarray(f(w))
        except FloatingPointError as exc:
            raise ValueError(f"function undefined on the spectrum {w}: {exc}") from None
    if not np.all(np.isfinite(fw)):
        raise ValueError(f"function undefined on the spectrum {w}")
    out = (v * fw) @ dag(v)
    if np.isrealobj(fw):
        out = hermitian_part(out)
    return out


def herm_log(a, support_only: bool = True) -> np.ndarray:
    return herm_function(a, np.log, support_only=support_only)


def herm_exp(a) -> np.ndarray:
    return herm_function(a, np.exp)


def support_projector(a) -> SupportProjector:
    """Projector onto the eigenspaces of a PSD operator above ``tol.support``."""
    w, v = _eigh_checked(a)
    tol = tolerances.current()
    scale = max(1.0, float(np.max(np.abs(w)))) if w.size else 1.0
    if w.size and w[0] < -tol.psd * scale:
        raise ValueError(f"operator is not positive semidefinite (eigenvalue {w[0]:.3e})")
    keep = _support_mask(w)
    vs = v[:, keep]
    return SupportProjector(hermitian_part(vs @ dag(vs)), int(keep.sum()))


def support_basis(projector) -> np.ndarray:
    """Orthonormal columns spanning the range of a projector."""
    p = projector.op if isinstance(projector, SupportProjector) else np.asarray(projector)
    w, v = np.linalg.eigh(hermitian_part(p))
    return v[:, w > 0.5]


def validate_density(op) -> np.ndarray:
    """Check the density-matrix invariants and return the Hermitian part.

    Raises :class:`DensityMatrixError` listing every violated invariant.
    """
    a = as_operator(op)
    if not np.all(np.isfinite(a)):
        raise DensityMatrixError([("non-finite entries", float("inf"))])
    tol = tolerances.current()
    problems = []
    herr = hermiticity_error(a)
    if herr > tol.herm:
        problems.append(("non-Hermitian", herr))
    h = hermitian_part(a)
    wmin = float(np.linalg.eigvalsh(h)[0])
    if wmin < -tol.psd:
        problems.append(("negative eigenvalue", -wmin))
    terr = abs(np.trace(a) - 1.0)
    if terr > tol.trace:
        problems.append((f"trace {np.trace(a).real:.6g}", terr))
    if problems:
        raise DensityMatrixError(problems)
    return h


def is_density(op) -> bool:
    try:
        validate_density(op)
    except DensityMatrixError:
        return False
    return True
