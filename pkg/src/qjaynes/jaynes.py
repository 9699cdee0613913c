"""Generalized Gibbs states and relative-entropy reconstructions.

Asymptotic states are written as

    rho(t) = exp[ln sigma(t) - sum_j gamma_j P C_j(t) P] / Z

on the support ``P`` of a reference T-trajectory ``sigma(t)`` and zero
outside it. The multipliers ``gamma`` are found by minimizing the convex dual
``f(gamma) = ln Z(gamma) + gamma . c`` with a damped Newton method, whose
Hessian is the Kubo-Mori covariance of the projected constraints.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import tolerances
from .attractors import (
    AttractorDecomposition,
    Trajectory,
    asymptotic_trajectory,
    maximally_mixed_trajectory,
    regime_time,
    t_state_trajectory,
)
from .motion import ConstantOfMotion, MotionBasis, evaluate, expectations, motion_basis
from .operators import (
    SupportProjector,
    dag,
    hermitian_part,
    herm_log,
    support_basis,
    support_projector,
)
from .process import DISCRETE, ProcessSpec, check_time, one_step

CONVERGED = "converged"
BOUNDARY = "boundary_suspected"
INFEASIBLE = "moment_infeasible"

# Newton steps must also have settled before a fit counts as converged
_STEP_TOL = 1e-6
# covariance eigenvalue below which the Gibbs family is treated as degenerate
_HESS_FLOOR = 1e-13
_DEPENDENT_RATIO = 1e-10
_RECONSTRUCTION_TOL = 1e-7
_ENTROPY_TOL = 1e-8
_STATIONARY_TOL = 1e-9


class DependentConstraintsError(ValueError):
    pass


class ReconstructionError(RuntimeError):
    pass


@dataclass(frozen=True, eq=False)
class FitResult:
    gammas: np.ndarray
    log_partition: float
    achieved_moments: np.ndarray
    residual_norm: float
    iterations: int
    status: str
    # smallest covariance eigenvalue seen over all Newton iterates
    min_hessian_eig: float

    @property
    def converged(self) -> bool:
        return self.status == CONVERGED


@dataclass(frozen=True, eq=False)
class GibbsModel:
    reference: Trajectory
    constraints: tuple
    gammas: np.ndarray
    log_partition: float
    t_projector: SupportProjector
    targets: np.ndarray
    fit: FitResult | None = None
    t_eval: float = 0

    def state(self, t) -> np.ndarray:
        return gibbs_state(self, t)


def _reference_block(sigma: np.ndarray, v: np.ndarray, p: np.ndarray) -> np.ndarray:
    """``ln sigma`` restricted to the range of ``v``; sigma must live exactly there."""
    tol = tolerances.current()
    off = np.linalg.norm(sigma - p @ sigma @ p)
    scale = max(1e-300, float(np.linalg.norm(sigma, 2)))
    if off > tol.support * scale:
        raise ValueError(f"reference state leaves the T-projector support (weight {off:.3e})")
    block = hermitian_part(dag(v) @ sigma @ v)
    w = np.linalg.eigvalsh(block)
    if w[0] <= tol.support * w[-1]:
        raise ValueError(f"reference state is not strictly positive on the T-projector (eigenvalue {w[0]:.3e})")
    return herm_log(block, support_only=False)


def _blocks(reference: Trajectory, constraints: Sequence[ConstantOfMotion], projector: SupportProjector, t):
    v = support_basis(projector)
    p = projector.op
    log_sigma = _reference_block(reference(t), v, p)
    ops = [hermitian_part(dag(v) @ evaluate(c, t) @ v) for c in constraints]
    return v, log_sigma, ops


class _Dual:
    """``ln Z``, moments and covariance of the Gibbs family on the P-block."""

    def __init__(self, log_sigma, ops, gammas, hessian="frechet"):
        e = log_sigma - sum((g * a for g, a in zip(gammas, ops)), np.zeros_like(log_sigma))
        w, u = np.linalg.eigh(hermitian_part(e))
        shift = w.max()
        ex = np.exp(w - shift)
        z = ex.sum()
        self.w, self.u = w, u
        self.p = ex / z
        self.log_z = float(shift + math.log(z))
        self.rot = [dag(u) @ a @ u for a in ops]
        self.moments = np.array([float(np.real(np.diagonal(a) @ self.p)) for a in self.rot])
        self.hessian_kind = hessian

    def state_block(self) -> np.ndarray:
        return hermitian_part((self.u * self.p) @ dag(self.u))

    def hessian(self) -> np.ndarray:
        k = len(self.rot)
        if k == 0:
            return np.zeros((0, 0))
        w, p = self.w, self.p
        if self.hessian_kind == "symmetrized":
            g = 0.5 * (p[:, None] + p[None, :])
        else:
            # divided differences of exp, scaled by the larger weight to avoid overflow
            delta = np.abs(w[:, None] - w[None, :])
            p_hi = np.maximum(p[:, None], p[None, :])
            with np.errstate(invalid="ignore", divide="ignore"):
                ratio = np.where(delta > 1e-12, -np.expm1(-delta) / delta, 1.0 - 0.5 * delta)
            g = p_hi * ratio
        h = np.empty((k, k))
        for i in range(k):
            for j in range(i, k):
                val = np.real(np.sum(g * self.rot[i].T * self.rot[j])) - self.moments[i] * self.moments[j]
                h[i, j] = h[j, i] = val
        return h


def _check_targets(constraints):
    ops, targets = [], []
    for item in constraints:
        c, target = item
        if not isinstance(c, ConstantOfMotion):
            raise TypeError("constraints must be (ConstantOfMotion, target) pairs")
        target = float(target)
        if not math.isfinite(target):
            raise ValueError(f"target for {c.label or 'constraint'} is not finite")
        ops.append(c)
        targets.append(target)
    return ops, np.array(targets, dtype=float)


def fit(
    reference: Trajectory,
    constraints: Sequence,
    t_eval,
    projector: SupportProjector | None = None,
    hessian: str = "frechet",
) -> FitResult:
    """Lagrange multipliers reproducing the target expectation values.

    ``constraints`` is a sequence of ``(ConstantOfMotion, target)`` pairs.
    ``hessian`` is ``"frechet"`` (exact Kubo-Mori covariance) or
    ``"symmetrized"`` (anticommutator covariance, exact only for commuting
    constraints).
    """
    tol = tolerances.current()
    t_eval = check_time(reference.kind, t_eval)
    if projector is None:
        projector = support_projector(reference(t_eval))
    cons, c = _check_targets(constraints)
    _, log_sigma, ops = _blocks(reference, cons, projector, t_eval)
    k = len(ops)
    gam = np.zeros(k)
    dual = _Dual(log_sigma, ops, gam, hessian)
    if k == 0:
        return FitResult(gam, dual.log_z, dual.moments, 0.0, 0, CONVERGED, 0.0)

    h = dual.hessian()
    hw = np.linalg.eigvalsh(h)
    if hw[-1] <= 0 or hw[0] <= _DEPENDENT_RATIO * hw[-1]:
        raise DependentConstraintsError(
            f"projected constraints are linearly dependent (covariance eigenvalues {hw[0]:.3e} .. {hw[-1]:.3e})"
        )

    status = None
    it = 0
    min_eig = lowest = float(hw[0])
    for it in range(1, tol.max_newton + 1):
        g = c - dual.moments
        h = dual.hessian()
        hw = np.linalg.eigvalsh(h)
        min_eig = float(hw[0])
        lowest = min(lowest, min_eig)
        if min_eig < -1e-10:
            raise ReconstructionError(f"covariance Hessian is not positive semidefinite ({min_eig:.3e})")
        try:
            step = -np.linalg.solve(h, g)
        except np.linalg.LinAlgError:
            step = -np.linalg.lstsq(h, g, rcond=None)[0]
        gnorm = float(np.max(np.abs(g)))
        if gnorm <= tol.fit and np.max(np.abs(step)) <= _STEP_TOL * max(1.0, np.max(np.abs(gam))):
            status = CONVERGED
            break
        if min_eig < _HESS_FLOOR or np.max(np.abs(gam)) > tol.gamma_max:
            break
        f0 = dual.log_z + float(gam @ c)
        slope = float(g @ step)
        alpha = 1.0
        while True:
            gam_trial = gam + alpha * step
            trial = _Dual(log_sigma, ops, gam_trial, hessian)
            f1 = trial.log_z + float(gam_trial @ c)
            if f1 <= f0 + 1e-4 * alpha * slope:
                break
            if abs(slope) * alpha < 1e-15 * max(1.0, abs(f0)):
                # f cannot resolve the decrease any more; trust the Newton step
                break
            alpha *= 0.5
            if alpha < 1e-12:
                break
        gam, dual = gam_trial, trial

    g = c - dual.moments
    residual = float(np.max(np.abs(g)))
    if status is None:
        if residual <= tol.fit and min_eig >= _HESS_FLOOR and np.max(np.abs(gam)) <= tol.gamma_max:
            status = CONVERGED
        elif residual <= 1e-6:
            status = BOUNDARY
        else:
            status = INFEASIBLE
    return FitResult(gam, dual.log_z, dual.moments, residual, it, status, lowest)


def make_model(reference, constraints, gammas, projector=None, t_eval=0, fit_result=None, targets=None) -> GibbsModel:
    t_eval = check_time(reference.kind, t_eval)
    if projector is None:
        projector = support_projector(reference(t_eval))
    cons = tuple(c for c, _ in constraints) if constraints and isinstance(constraints[0], tuple) else tuple(constraints)
    gammas = np.asarray(gammas, dtype=float)
    if len(cons) != gammas.size:
        raise ValueError(f"{len(cons)} constraints but {gammas.size} multipliers")
    if targets is None:
        targets = np.full(len(cons), np.nan)
    model = GibbsModel(reference, cons, gammas, 0.0, projector, np.asarray(targets, float), fit_result, t_eval)
    lz = log_partition(model, t_eval)
    return GibbsModel(reference, cons, gammas, lz, projector, np.asarray(targets, float), fit_result, t_eval)


def fit_model(reference, constraints, t_eval, projector=None, hessian="frechet") -> GibbsModel:
    result = fit(reference, constraints, t_eval, projector, hessian)
    cons, targets = _check_targets(constraints)
    return make_model(reference, list(zip(cons, targets)), result.gammas, projector, t_eval, result, targets)


def _model_dual(model: GibbsModel, t):
    t = check_time(model.reference.kind, t)
    v, log_sigma, ops = _blocks(model.reference, model.constraints, model.t_projector, t)
    return v, _Dual(log_sigma, ops, model.gammas)


def gibbs_state(model: GibbsModel, t) -> np.ndarray:
    v, dual = _model_dual(model, t)
    return hermitian_part(v @ dual.state_block() @ dag(v))


def log_partition(model: GibbsModel, t) -> float:
    return _model_dual(model, t)[1].log_z


def moment_map(model: GibbsModel, t) -> np.ndarray:
    """``(Tr[C_j(t) rho(t)])_j``, equal to ``-d ln Z / d gamma_j``."""
    return _model_dual(model, t)[1].moments


def relative_entropy(rho, sigma) -> float:
    """``Tr[rho (ln rho - ln sigma)]``, or ``inf`` when supp(rho) is not in supp(sigma)."""
    rho = hermitian_part(np.asarray(rho, dtype=complex))
    sigma = hermitian_part(np.asarray(sigma, dtype=complex))
    q = np.eye(rho.shape[0]) - support_projector(sigma).op
    leak = np.linalg.norm(q @ rho @ q)
    if leak > tolerances.current().support * max(1e-300, float(np.linalg.norm(rho, 2))):
        return math.inf
    w = np.linalg.eigvalsh(rho)
    w = w[w > tolerances.current().support * w[-1]]
    return float(np.sum(w * np.log(w)) - np.real(np.trace(rho @ herm_log(sigma))))


@dataclass(frozen=True)
class EntropyReport:
    S: float
    check: float


def entropy_report(model: GibbsModel, t) -> EntropyReport:
    """Relative entropy to the reference and its deviation from ``-ln Z - gamma . <C>``."""
    rho = gibbs_state(model, t)
    s = relative_entropy(rho, model.reference(t))
    v, dual = _model_dual(model, t)
    identity = -dual.log_z - float(model.gammas @ dual.moments)
    check = abs(s - identity)
    if check > _ENTROPY_TOL:
        raise ReconstructionError(f"relative entropy identity violated by {check:.3e}")
    return EntropyReport(s, check)


def asymptotic_times(dec: AttractorDecomposition, t0, count: int = 8) -> list:
    if dec.kind == DISCRETE:
        return [int(t0) + k for k in range(count)]
    return [float(t0) + 0.75 * k for k in range(count)]


def reconstruct_known_state(spec: ProcessSpec, dec: AttractorDecomposition, basis: MotionBasis | None, rho0, check: bool = True) -> GibbsModel:
    """Gibbs model of the asymptotic trajectory of a fully known initial state.

    Every constant of motion is constrained to its value in ``rho0``; the
    reference is the maximally mixed T-trajectory.
    """
    if basis is None:
        basis = motion_basis(dec)
    c = expectations(basis, rho0, 0)[1:]
    t_eval = regime_time(dec)
    model = fit_model(maximally_mixed_trajectory(dec), list(zip(basis.constants, c)), t_eval, dec.t_projector)
    if check and model.fit.converged:
        traj = asymptotic_trajectory(dec, rho0)
        worst = max(np.linalg.norm(gibbs_state(model, t) - traj(t)) for t in asymptotic_times(dec, t_eval))
        if worst > _RECONSTRUCTION_TOL:
            raise ReconstructionError(f"Gibbs model deviates from the asymptotic trajectory by {worst:.3e}")
    return model


def reconstruct_partial(spec: ProcessSpec, dec: AttractorDecomposition, subset: Sequence) -> GibbsModel:
    """Gibbs trajectory from a few known constants of motion.

    Only the given constants receive multipliers; the reference is the
    maximally mixed T-trajectory.
    """
    return fit_model(maximally_mixed_trajectory(dec), list(subset), regime_time(dec), dec.t_projector)


def reconstruct_stationary(spec: ProcessSpec, dec: AttractorDecomposition, subset: Sequence) -> GibbsModel:
    """Stationary Gibbs state from a few known integrals of motion.

    The reference is the time-averaged T-state.
    """
    for c, _ in subset:
        if not c.integral:
            raise ValueError(f"{c.label or 'constraint'} is not an integral of motion")
    model = fit_model(t_state_trajectory(dec), list(subset), 0, dec.t_projector)
    if model.fit.converged:
        rho = gibbs_state(model, 0)
        if spec.kind == DISCRETE:
            resid = np.linalg.norm(one_step(spec, rho) - rho)
        else:
            resid = np.linalg.norm(spec.superoperator(rho))
        if resid > _STATIONARY_TOL:
            raise ReconstructionError(f"reconstructed state is not stationary (residual {resid:.3e})")
    return model
