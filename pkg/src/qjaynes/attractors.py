"""Asymptotic structure of a quantum Markov process.

The attractor space is the span of eigenoperators of the generator whose
eigenvalues lie on the unit circle (discrete) or the imaginary axis
(continuous). Together with the biorthonormal left eigenoperators it gives the
asymptotic trajectory of every initial state in closed form::

    rho(t >> 1) = sum_k lambda_k^t X_k Tr[X^k^dagger rho(0)]

For continuous processes ``lambda^t`` is always evaluated as ``exp(a t)`` from
the generator eigenvalue ``a``; the one-step eigenvalue is derived from it and
never converted back through a logarithm.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from . import tolerances
from .operators import (
    SupportProjector,
    hermitian_part,
    hs_inner,
    support_projector,
    validate_density,
)
from .process import CONTINUOUS, DISCRETE, ProcessSpec, check_time, one_step, unvec, vec


class AttractorError(RuntimeError):
    """Numerical failure while extracting the asymptotic structure."""


class JordanDefectError(AttractorError):
    pass


@dataclass(frozen=True)
class PeripheralEigenvalue:
    """An eigenvalue of the one-step map on the unit circle.

    ``rate`` is the generator eigenvalue ``a`` (continuous processes only),
    with ``lam == exp(rate)``.
    """

    lam: complex
    rate: complex | None
    multiplicity: int

    @property
    def omega(self) -> float:
        """Angular frequency: ``lam**t == exp(1j * omega * t)``."""
        if self.rate is not None:
            return float(self.rate.imag)
        return float(np.angle(self.lam))

    @property
    def is_stationary(self) -> bool:
        return self.omega == 0.0

    def power(self, t) -> complex:
        return complex(np.exp(1j * self.omega * t))


@dataclass(frozen=True, eq=False)
class Trajectory:
    """Asymptotic trajectory ``rho(t) = sum_k exp(1j omega_k t) ops[k]``."""

    kind: str
    omegas: np.ndarray
    ops: np.ndarray
    label: str = ""

    def __call__(self, t) -> np.ndarray:
        return self.evaluate(t)

    def evaluate(self, t) -> np.ndarray:
        t = check_time(self.kind, t)
        phases = np.exp(1j * self.omegas * t)
        return hermitian_part(np.tensordot(phases, self.ops, axes=1))

    @property
    def dim(self) -> int:
        return self.ops.shape[-1]

    def shifted(self, s) -> "Trajectory":
        """The trajectory ``t -> rho(t + s)``."""
        s = check_time(self.kind, s)
        ops = self.ops * np.exp(1j * self.omegas * s)[:, None, None]
        return Trajectory(self.kind, self.omegas, ops, self.label)

    def time_average(self) -> np.ndarray:
        """Exact Cesaro average: the non-oscillating part."""
        still = self.omegas == 0.0
        return hermitian_part(self.ops[still].sum(axis=0)) if still.any() else np.zeros(self.ops.shape[1:], complex)

    @property
    def is_stationary(self) -> bool:
        norms = np.linalg.norm(self.ops, axis=(1, 2))
        return bool(np.all((self.omegas == 0.0) | (norms <= 1e-14)))

    @classmethod
    def constant(cls, kind: str, op, label: str = "") -> "Trajectory":
        op = np.asarray(op, dtype=complex)
        return cls(kind, np.zeros(1), op[None, :, :], label)


@dataclass(frozen=True, eq=False)
class AttractorDecomposition:
    kind: str
    dim: int
    eigenvalues: tuple
    right_basis: tuple
    dual_basis: tuple
    # index into ``eigenvalues`` for every basis element
    block_index: tuple
    t_projector: SupportProjector
    t_state: np.ndarray
    spectral_gap: float | None
    superoperator: np.ndarray = field(repr=False)
    spectrum: np.ndarray = field(repr=False)

    @property
    def dim_attractor(self) -> int:
        return len(self.right_basis)

    def eigenvalue_of(self, k: int) -> PeripheralEigenvalue:
        return self.eigenvalues[self.block_index[k]]

    def omegas(self) -> np.ndarray:
        return np.array([self.eigenvalue_of(k).omega for k in range(self.dim_attractor)])


def _cluster(values: np.ndarray, radius: float) -> list[np.ndarray]:
    """Single-linkage clusters of complex numbers closer than ``radius``."""
    remaining = list(range(len(values)))
    clusters = []
    while remaining:
        members = [remaining.pop(0)]
        grew = True
        while grew:
            grew = False
            for i in list(remaining):
                if np.min(np.abs(values[members] - values[i])) < radius:
                    members.append(i)
                    remaining.remove(i)
                    grew = True
        clusters.append(values[members])
    return clusters


def _null_space(a: np.ndarray, k: int, what: str) -> np.ndarray:
    tol = tolerances.current()
    _, s, vh = np.linalg.svd(a)
    scale = max(1.0, float(s[0]))
    if s[-k] > tol.defect * scale:
        raise JordanDefectError(
            f"{what}: geometric multiplicity below algebraic multiplicity {k} "
            f"(singular value {s[-k]:.3e}); peripheral spectrum is not semisimple"
        )
    return np.conj(vh[-k:, :]).T


def _canonical_block(b: np.ndarray, dim: int) -> np.ndarray:
    """Deterministic basis of span(b): reduced echelon on pivot entries,
    unit Frobenius norm, ordered by descending |Tr X| then by entries."""
    m = b.shape[1]
    _, _, piv = scipy.linalg.qr(b.T, pivoting=True, mode="economic")
    c = b @ np.linalg.inv(b[piv[:m], :])
    c = c / np.linalg.norm(c, axis=0)

    def key(j):
        x = unvec(c[:, j], dim)
        entries = np.round(x.ravel(), 9)
        return (-round(abs(np.trace(x)), 9), tuple(-entries.real), tuple(-entries.imag))

    order = sorted(range(m), key=key)
    return c[:, order]


def _peripheral_mask(kind: str, w: np.ndarray, tol) -> np.ndarray:
    if kind == DISCRETE:
        return np.abs(w) >= 1.0 - tol.peripheral
    return np.abs(w.real) <= tol.peripheral


def _snap(kind: str, center: complex, tol) -> PeripheralEigenvalue:
    if kind == DISCRETE:
        lam = center / abs(center)
        if abs(lam - 1.0) < tol.cluster:
            lam = 1.0 + 0.0j
        elif abs(lam + 1.0) < tol.cluster:
            lam = -1.0 + 0.0j
        return PeripheralEigenvalue(complex(lam), None, 0)
    a = 1j * center.imag
    if abs(a) < tol.cluster:
        a = 0j
    return PeripheralEigenvalue(complex(np.exp(a)), complex(a), 0)


def _order_key(ev: PeripheralEigenvalue):
    return (round(abs(ev.omega), 12), -ev.omega)


def decompose(spec: ProcessSpec) -> AttractorDecomposition:
    """Attractor space, dual basis, T-state, T-projector and spectral gap."""
    tol = tolerances.current()
    m = spec.superoperator.matrix
    n = spec.dim
    w = np.linalg.eigvals(m)
    mask = _peripheral_mask(spec.kind, w, tol)
    if not mask.any():
        raise AttractorError("no peripheral eigenvalues found; the process is not trace preserving")

    groups = []
    for members in _cluster(w[mask], tol.cluster):
        ev = _snap(spec.kind, complex(members.mean()), tol)
        groups.append(PeripheralEigenvalue(ev.lam, ev.rate, len(members)))
    groups.sort(key=_order_key)

    eye = np.eye(n * n)
    scale = max(1.0, float(np.linalg.norm(m, 2)))
    right, dual, index = [], [], []
    for gi, ev in enumerate(groups):
        c = ev.lam if spec.kind == DISCRETE else ev.rate
        k = ev.multiplicity
        r = _canonical_block(_null_space(m - c * eye, k, f"eigenvalue {c:.6g}"), n)
        left = _null_space(m.conj().T - np.conj(c) * eye, k, f"adjoint eigenvalue {np.conj(c):.6g}")
        gram = left.conj().T @ r
        if np.linalg.cond(gram) > 1e12:
            raise AttractorError(f"dual Gram matrix is singular for eigenvalue {c:.6g}")
        d = left @ np.linalg.inv(gram).conj().T
        resid = np.linalg.norm(m @ r - c * r, axis=0)
        if np.any(resid > tol.eig * scale):
            raise AttractorError(f"eigenoperator residual {resid.max():.3e} for eigenvalue {c:.6g}")
        for j in range(k):
            right.append(unvec(r[:, j], n))
            dual.append(unvec(d[:, j], n))
            index.append(gi)

    rest = w[~mask]
    if rest.size == 0:
        gap = None
    elif spec.kind == DISCRETE:
        gap = float(1.0 - np.max(np.abs(rest)))
    else:
        gap = float(-np.max(rest.real))

    dec = AttractorDecomposition(
        kind=spec.kind,
        dim=n,
        eigenvalues=tuple(groups),
        right_basis=tuple(right),
        dual_basis=tuple(dual),
        block_index=tuple(index),
        t_projector=SupportProjector(np.eye(n, dtype=complex), n),
        t_state=np.eye(n, dtype=complex) / n,
        spectral_gap=gap,
        superoperator=m,
        spectrum=w,
    )
    sigma, proj = t_state_and_projector(spec, dec)
    return AttractorDecomposition(
        kind=dec.kind,
        dim=n,
        eigenvalues=dec.eigenvalues,
        right_basis=dec.right_basis,
        dual_basis=dec.dual_basis,
        block_index=dec.block_index,
        t_projector=proj,
        t_state=sigma,
        spectral_gap=gap,
        superoperator=m,
        spectrum=w,
    )


def peripheral_projection(dec: AttractorDecomposition, y) -> np.ndarray:
    """``sum_k X_k (X^k, Y)``: the component of ``Y`` in the attractor space."""
    y = np.asarray(y, dtype=complex)
    return sum(x * hs_inner(xd, y) for x, xd in zip(dec.right_basis, dec.dual_basis))


def stationary_projection(dec: AttractorDecomposition, y) -> np.ndarray:
    y = np.asarray(y, dtype=complex)
    out = np.zeros((dec.dim, dec.dim), dtype=complex)
    for k, (x, xd) in enumerate(zip(dec.right_basis, dec.dual_basis)):
        if dec.eigenvalue_of(k).is_stationary:
            out = out + x * hs_inner(xd, y)
    return out


def t_state_and_projector(spec: ProcessSpec, dec: AttractorDecomposition, initial=None):
    """Time-averaged state of the trajectory from ``initial`` and its support.

    ``initial`` defaults to the maximally mixed state, which yields the
    canonical T-state. Another strictly positive state gives an alternative
    T-state.
    """
    tol = tolerances.current()
    n = dec.dim
    rho0 = np.eye(n) / n if initial is None else validate_density(initial)
    sigma = validate_density(hermitian_part(stationary_projection(dec, rho0)))
    if spec.kind == DISCRETE:
        resid = np.linalg.norm(one_step(spec, sigma) - sigma)
    else:
        resid = np.linalg.norm(spec.superoperator(sigma))
    if resid > tol.eig:
        raise AttractorError(f"T-state is not a fixed point (residual {resid:.3e})")
    return sigma, support_projector(sigma)


def asymptotic_trajectory(dec: AttractorDecomposition, rho0) -> Trajectory:
    rho0 = np.asarray(rho0, dtype=complex)
    omegas, ops = [], []
    for gi, ev in enumerate(dec.eigenvalues):
        y = np.zeros((dec.dim, dec.dim), dtype=complex)
        for k in range(dec.dim_attractor):
            if dec.block_index[k] == gi:
                y = y + dec.right_basis[k] * hs_inner(dec.dual_basis[k], rho0)
        if np.linalg.norm(y) > 1e-15 or ev.is_stationary:
            omegas.append(ev.omega)
            ops.append(y)
    return Trajectory(dec.kind, np.array(omegas), np.array(ops))


def _sample_times(dec: AttractorDecomposition) -> list:
    if dec.kind == DISCRETE:
        return list(range(8))
    return [0.0, 0.37, 1.3, 2.9, 5.1, 7.7]


def maximally_mixed_trajectory(dec: AttractorDecomposition) -> Trajectory:
    """Asymptotic part of the trajectory started in ``I/N``; a T-trajectory."""
    n = dec.dim
    traj = asymptotic_trajectory(dec, np.eye(n) / n)
    traj = Trajectory(traj.kind, traj.omegas, traj.ops, "sigma_I")
    p = dec.t_projector
    for t in _sample_times(dec):
        q = support_projector(traj(t))
        if q.rank != p.rank or np.linalg.norm(q.op - p.op) > 1e-6:
            raise AttractorError(f"maximally mixed trajectory leaves the T-projector support at t={t}")
    return traj


def t_state_trajectory(dec: AttractorDecomposition) -> Trajectory:
    return Trajectory.constant(dec.kind, dec.t_state, "sigma_I (time average)")


def regime_time(dec: AttractorDecomposition, tol: float = 1e-10):
    """Smallest time after which the slowest transient has shrunk below ``tol``."""
    gap = dec.spectral_gap
    if gap is None:
        return 0
    if gap <= tolerances.current().peripheral:
        raise AttractorError(f"spectral gap {gap:.3e} vanishes; no asymptotic regime can be certified")
    if dec.kind == DISCRETE:
        if gap >= 1.0:
            return 1
        return max(0, math.ceil(math.log(tol) / math.log1p(-gap)))
    return -math.log(tol) / gap
