"""Constants and integrals of motion.

A constant of motion is a Hermitian family ``C(t)`` whose expectation value
is the same along every trajectory: ``Tr[C(t+s) rho(t)] = Tr[C(s) rho(0)]``.
They are built from the dual attractors ``X^k`` (eigenoperators of the
adjoint map with eigenvalue ``conj(lambda_k)``) as

    C(t) = sum_k lambda_k^t X^k (X_k, C(0)),

so ``C(0)`` determines the whole family. Constants of motion form a real
vector space with the same dimension as the attractor space.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import tolerances
from .attractors import AttractorDecomposition, PeripheralEigenvalue
from .operators import as_operator, dag, hermitian_part, hermiticity_error, hs_inner
from .process import check_time


class MotionBasisError(RuntimeError):
    pass


@dataclass(frozen=True, eq=False)
class ConstantOfMotion:
    """``C(t) = sum_k exp(1j omegas[k] t) ops[k]``, Hermitian for every t."""

    kind: str
    omegas: np.ndarray
    ops: np.ndarray
    label: str = ""
    parity: str = "custom"
    eigenvalue: PeripheralEigenvalue | None = None

    @property
    def integral(self) -> bool:
        """True for integrals of motion (time-independent members)."""
        norms = np.linalg.norm(self.ops, axis=(1, 2))
        return bool(np.all((self.omegas == 0.0) | (norms <= 1e-14)))

    @property
    def dim(self) -> int:
        return self.ops.shape[-1]

    def __call__(self, t) -> np.ndarray:
        return evaluate(self, t)


@dataclass(frozen=True, eq=False)
class MotionBasis:
    identity: np.ndarray
    constants: tuple
    # positions in ``constants`` of the integrals of motion
    integrals: tuple

    def __len__(self) -> int:
        return 1 + len(self.constants)

    def labels(self) -> list[str]:
        return ["I"] + [c.label for c in self.constants]

    def get(self, key) -> ConstantOfMotion:
        """Constant by 1-based index (0 is the identity) or by label."""
        if isinstance(key, str):
            for c in self.constants:
                if c.label == key:
                    return c
            raise KeyError(f"no constant of motion labelled {key!r}")
        if not 1 <= key <= len(self.constants):
            raise KeyError(f"constant of motion index {key} out of range 1..{len(self.constants)}")
        return self.constants[key - 1]


def evaluate(c: ConstantOfMotion, t) -> np.ndarray:
    t = check_time(c.kind, t)
    phases = np.exp(1j * c.omegas * t)
    return hermitian_part(np.tensordot(phases, c.ops, axes=1))


def constant_from_operator(dec: AttractorDecomposition, c0, label: str = "", parity: str = "custom") -> ConstantOfMotion:
    """Extend a Hermitian element of the dual attractor space to its family ``C(t)``.

    Raises ``ValueError`` when ``c0`` is not Hermitian or not a constant of
    motion at time zero.
    """
    c0 = as_operator(c0, dec.dim)
    herr = hermiticity_error(c0)
    if herr > tolerances.current().herm * max(1.0, np.linalg.norm(c0)):
        raise ValueError(f"constant of motion must be Hermitian (error {herr:.3e})")
    omegas, ops = [], []
    for gi, ev in enumerate(dec.eigenvalues):
        y = np.zeros((dec.dim, dec.dim), dtype=complex)
        for k in range(dec.dim_attractor):
            if dec.block_index[k] == gi:
                y = y + dec.dual_basis[k] * hs_inner(dec.right_basis[k], c0)
        if np.linalg.norm(y) > 1e-14 * max(1.0, np.linalg.norm(c0)):
            omegas.append(ev.omega)
            ops.append(y)
    if not ops:
        omegas, ops = [0.0], [np.zeros_like(c0)]
    ops = np.array(ops)
    resid = np.linalg.norm(ops.sum(axis=0) - c0)
    if resid > 1e-8 * max(1.0, np.linalg.norm(c0)):
        raise ValueError(f"operator is not a constant of motion (distance {resid:.3e} from the dual attractor space)")
    return ConstantOfMotion(dec.kind, np.array(omegas), ops, label, parity)


def _realvec(x: np.ndarray) -> np.ndarray:
    return np.concatenate([x.real.ravel(), x.imag.ravel()])


def _conjugate_groups(dec: AttractorDecomposition) -> list[int]:
    tol = tolerances.current()
    partner = []
    for ev in dec.eigenvalues:
        target = np.conj(ev.lam)
        for gj, other in enumerate(dec.eigenvalues):
            if abs(other.lam - target) < tol.cluster:
                partner.append(gj)
                break
        else:
            raise MotionBasisError(f"peripheral eigenvalue {ev.lam:.6g} has no complex-conjugate partner")
    return partner


def motion_basis(dec: AttractorDecomposition) -> MotionBasis:
    """Real basis ``{I, C_1, ..., C_d}`` of the constants of motion.

    For every peripheral eigenvalue (taking one of each conjugate pair) the
    Hermitian combinations ``(X + X^dagger)/2`` and ``(X - X^dagger)/2i`` of
    its dual attractors are reduced to an independent set by Gram-Schmidt in
    the real Hilbert-Schmidt geometry, after removing the identity. Members
    are scaled to unit operator norm.
    """
    tol = tolerances.current()
    n = dec.dim
    ident = np.eye(n, dtype=complex)
    partner = _conjugate_groups(dec)
    constants = []
    done = set()
    for gi, ev in enumerate(dec.eigenvalues):
        if gi in done:
            continue
        done.update({gi, partner[gi]})
        cands = []
        for k in range(dec.dim_attractor):
            if dec.block_index[k] != gi:
                continue
            x = dec.dual_basis[k]
            cands.append((0.5 * (x + dag(x)), "plus"))
            cands.append(((x - dag(x)) / 2j, "minus"))
        ortho = []
        if ev.is_stationary:
            ortho.append(_realvec(ident) / np.sqrt(n))
        scale = max((np.linalg.norm(c) for c, _ in cands), default=1.0)
        for c, parity in cands:
            v = _realvec(c)
            # two passes keep the projection accurate
            for _ in range(2):
                for q in ortho:
                    v = v - (q @ v) * q
            norm = np.linalg.norm(v)
            if norm <= tol.rank * scale:
                continue
            ortho.append(v / norm)
            half = v.size // 2
            op = hermitian_part((v[:half] + 1j * v[half:]).reshape(n, n))
            op = op / np.max(np.abs(np.linalg.eigvalsh(op)))
            cm = constant_from_operator(dec, op, f"C{len(constants) + 1}", parity)
            constants.append(ConstantOfMotion(cm.kind, cm.omegas, cm.ops, cm.label, parity, ev))
    if 1 + len(constants) != dec.dim_attractor:
        raise MotionBasisError(
            f"found {1 + len(constants)} independent constants of motion, expected {dec.dim_attractor}"
        )
    integrals = tuple(j for j, c in enumerate(constants) if c.integral)
    return MotionBasis(ident, tuple(constants), integrals)


def expectations(basis: MotionBasis, rho, t) -> np.ndarray:
    """``(Tr[rho], Tr[C_1(t) rho], ..., Tr[C_d(t) rho])``."""
    rho = np.asarray(rho, dtype=complex)
    vals = [np.trace(rho)] + [np.trace(evaluate(c, t) @ rho) for c in basis.constants]
    vals = np.array(vals)
    imag = np.max(np.abs(vals.imag)) if vals.size else 0.0
    if imag > 1e-12 * max(1.0, np.max(np.abs(vals))):
        raise ValueError(f"expectation values have imaginary part {imag:.3e}")
    return vals.real
