"""Verification harness: every structural and variational invariant, with residuals.

Each check compares a library result with an independent oracle (brute-force
evolution, ``scipy.linalg.expm``, finite differences, windowed time
averages, a generic root finder for the MaxEnt state) and reports the
measured residual next to its tolerance. Checks never raise; an exception
inside a check is reported as a failure with its message.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
import scipy.linalg
import scipy.optimize

from . import tolerances
from .attractors import (
    asymptotic_trajectory,
    decompose,
    maximally_mixed_trajectory,
    peripheral_projection,
    regime_time,
)
from .channels import random_hermitian, random_state
from .jaynes import (
    CONVERGED,
    asymptotic_times,
    fit,
    fit_model,
    gibbs_state,
    log_partition,
    make_model,
    moment_map,
    reconstruct_partial,
    reconstruct_stationary,
    relative_entropy,
)
from .motion import expectations, motion_basis
from .operators import commutator, dag, hermitian_part, hs_inner, support_basis
from .process import (
    DISCRETE,
    ProcessSpec,
    evolve,
    heisenberg_evolve,
    is_unital,
    one_step,
    propagator,
    vec,
)

FULL = "full"
FAST = "fast"


class Skip(Exception):
    """Raised by a check that does not apply to the process at hand."""


@dataclass(frozen=True)
class CheckResult:
    name: str
    residual: float | None
    tolerance: float
    # None when the check was skipped
    passed: bool | None
    detail: str = ""


class Context:
    """Shared, lazily computed objects for one process."""

    def __init__(self, spec: ProcessSpec, suite: str = FULL, seed: int = 0, n_states: int | None = None,
                 n_perturb: int | None = None):
        if suite not in (FULL, FAST):
            raise ValueError(f"unknown suite {suite!r}")
        self.spec = spec
        self.suite = suite
        self.rng = np.random.default_rng(seed)
        fast = suite == FAST
        self.n_states = n_states if n_states is not None else (2 if fast else 6)
        self.n_perturb = n_perturb if n_perturb is not None else (10 if fast else 50)
        self.states = [random_state(spec.dim, self.rng) for _ in range(self.n_states)]
        self.hessian_eigs = []

    @property
    def discrete(self) -> bool:
        return self.spec.kind == DISCRETE

    @functools.cached_property
    def dec(self):
        return decompose(self.spec)

    @functools.cached_property
    def basis(self):
        return motion_basis(self.dec)

    @functools.cached_property
    def sigma_i(self):
        return maximally_mixed_trajectory(self.dec)

    @functools.cached_property
    def t_star(self):
        return regime_time(self.dec)

    @functools.cached_property
    def grid(self) -> list:
        return asymptotic_times(self.dec, self.t_star)

    def short_times(self) -> list:
        return [0, 1, 2, 5] if self.discrete else [0.0, 0.3, 1.1, 2.5]

    def steps(self) -> list:
        return [1, 3] if self.discrete else [0.7, 1.9]

    def brute(self, rho, t):
        return evolve(self.spec, rho, t, method="matrix" if self.discrete else "expm", validate=False)

    @functools.lru_cache(maxsize=None)
    def known_model(self, i: int):
        c = expectations(self.basis, self.states[i], 0)[1:]
        model = fit_model(self.sigma_i, list(zip(self.basis.constants, c)), self.t_star, self.dec.t_projector)
        self._record(model.fit)
        return model

    @functools.cached_property
    def partial_subset(self) -> list:
        cons = self.basis.constants[::2]
        c = expectations(self.basis, self.states[0], 0)[1:][::2]
        return list(zip(cons, c))

    @functools.cached_property
    def partial_model(self):
        model = reconstruct_partial(self.spec, self.dec, self.partial_subset)
        self._record(model.fit)
        return model

    @functools.cached_property
    def integral_subset(self) -> list:
        # constraining every integral would pin the stationary state down completely
        c = expectations(self.basis, self.states[0], 0)[1:]
        chosen = self.basis.integrals[::2] if len(self.basis.integrals) > 1 else self.basis.integrals
        return [(self.basis.constants[j], c[j]) for j in chosen]

    @functools.cached_property
    def stationary_model(self):
        model = reconstruct_stationary(self.spec, self.dec, self.integral_subset)
        self._record(model.fit)
        return model

    def _record(self, result):
        if result is not None and result.iterations:
            self.hessian_eigs.append(result.min_hessian_eig)


def _require_converged(model, what: str):
    if model.fit is not None and model.fit.status != CONVERGED:
        raise RuntimeError(f"{what} fit ended as {model.fit.status} (residual {model.fit.residual_norm:.3e})")


def _worst(values) -> float:
    values = list(values)
    return float(max(values)) if values else 0.0


# ---------------------------------------------------------------- process checks

def check_trace_preservation(ctx: Context):
    spec = ctx.spec
    res = spec.completeness_error()
    times = [1, 7, 100] if ctx.discrete else [0.5, 3.0, 40.0]
    for rho in ctx.states:
        for t in times:
            res = max(res, abs(np.trace(evolve(spec, rho, t, validate=False)) - 1.0))
    return res, f"times {times}"


def check_state_validity(ctx: Context):
    worst = 0.0
    for rho in ctx.states:
        for t in ctx.short_times()[1:]:
            out = evolve(ctx.spec, rho, t, validate=False)
            worst = max(worst, np.linalg.norm(out - dag(out)), max(0.0, -np.linalg.eigvalsh(hermitian_part(out))[0]))
    return worst, "Hermiticity and positivity of evolved states"


def check_semigroup(ctx: Context):
    worst = 0.0
    for rho in ctx.states:
        for t in ctx.short_times()[1:]:
            for s in ctx.steps():
                lhs = ctx.brute(rho, t + s)
                rhs = ctx.brute(ctx.brute(rho, t), s)
                worst = max(worst, np.linalg.norm(lhs - rhs))
    return worst, "T_{t+s} = T_s T_t"


def check_heisenberg_duality(ctx: Context):
    worst = 0.0
    for rho in ctx.states:
        b = random_hermitian(ctx.spec.dim, ctx.rng)
        for t in ctx.short_times()[1:]:
            lhs = np.trace(b @ evolve(ctx.spec, rho, t, validate=False))
            rhs = np.trace(heisenberg_evolve(ctx.spec, b, t) @ rho)
            worst = max(worst, abs(lhs - rhs))
    return worst, "Tr[B T_t(rho)] = Tr[T_t^dagger(B) rho]"


def check_representation_consistency(ctx: Context):
    worst = 0.0
    if ctx.discrete:
        for rho in ctx.states:
            for t in (1, 5):
                a = evolve(ctx.spec, rho, t, method="kraus", validate=False)
                b = evolve(ctx.spec, rho, t, method="matrix", validate=False)
                worst = max(worst, np.linalg.norm(a - b))
        return worst, "Kraus sums against superoperator powers"
    if ctx.spec._generator_eig is None:
        raise Skip("generator eigenvectors are ill-conditioned")
    for t in (1.0, 5.0):
        worst = max(worst, np.linalg.norm(propagator(ctx.spec, t, "eig") - propagator(ctx.spec, t, "expm"), 2))
    return worst, "eigendecomposition against scaling-and-squaring exponential"


# ---------------------------------------------------------------- attractor checks

def check_eigen_residuals(ctx: Context):
    dec = ctx.dec
    m = dec.superoperator
    worst = 0.0
    for k in range(dec.dim_attractor):
        ev = dec.eigenvalue_of(k)
        target = ev.lam if ctx.discrete else ev.rate
        xr, xd = vec(dec.right_basis[k]), vec(dec.dual_basis[k])
        worst = max(worst, np.linalg.norm(m @ xr - target * xr) / np.linalg.norm(xr))
        worst = max(worst, np.linalg.norm(dag(m) @ xd - np.conj(target) * xd) / np.linalg.norm(xd))
    return worst, f"{dec.dim_attractor} attractors"


def check_biorthonormality(ctx: Context):
    dec = ctx.dec
    g = np.array([[hs_inner(a, b) for b in dec.right_basis] for a in dec.dual_basis])
    return float(np.max(np.abs(g - np.eye(dec.dim_attractor)))), "(X^i, X_j) = delta_ij"


def check_left_right_dimension(ctx: Context):
    tol = tolerances.current()
    w = np.linalg.eigvals(dag(ctx.dec.superoperator))
    if ctx.discrete:
        count = int(np.sum(np.abs(w) >= 1 - tol.peripheral))
    else:
        count = int(np.sum(np.abs(w.real) <= tol.peripheral))
    return abs(count - ctx.dec.dim_attractor), f"adjoint peripheral count {count}, attractors {ctx.dec.dim_attractor}"


def check_t_state(ctx: Context):
    dec = ctx.dec
    sigma = dec.t_state
    if ctx.discrete:
        res = np.linalg.norm(one_step(ctx.spec, sigma) - sigma)
    else:
        res = np.linalg.norm(ctx.spec.superoperator(sigma))
    res = max(res, abs(np.trace(sigma) - 1), max(0.0, -np.linalg.eigvalsh(sigma)[0]))
    return res, f"T-projector rank {dec.t_projector.rank}"


def check_asymptotic_equivalence(ctx: Context):
    worst = 0.0
    for rho in ctx.states:
        traj = asymptotic_trajectory(ctx.dec, rho)
        for t in ctx.grid[:3]:
            worst = max(worst, np.linalg.norm(ctx.brute(rho, t) - traj(t)))
    return worst, f"brute force against the spectral trajectory from t = {ctx.t_star}"


def check_projection_idempotent(ctx: Context):
    dec = ctx.dec
    worst = 0.0
    for _ in range(3):
        y = random_hermitian(dec.dim, ctx.rng)
        once = peripheral_projection(dec, y)
        worst = max(worst, np.linalg.norm(peripheral_projection(dec, once) - once))
    for x in dec.right_basis:
        worst = max(worst, np.linalg.norm(peripheral_projection(dec, x) - x))
    return worst, "projection onto the attractor space"


def check_algebra_closure(ctx: Context):
    dec = ctx.dec
    p = dec.t_projector.op
    gens = np.array([vec(p @ x @ p) for x in dec.dual_basis]).T
    worst = 0.0
    for _ in range(5):
        a = sum(z * (p @ x @ p) for z, x in zip(ctx.rng.standard_normal(len(gens.T)), dec.dual_basis))
        b = sum(z * (p @ x @ p) for z, x in zip(ctx.rng.standard_normal(len(gens.T)), dec.dual_basis))
        prod = vec(a @ b)
        coef = np.linalg.lstsq(gens, prod, rcond=None)[0]
        worst = max(worst, np.linalg.norm(gens @ coef - prod) / max(1e-300, np.linalg.norm(prod)))
    return worst, "P X P products stay in the span"


def check_sigma_commutation(ctx: Context):
    p = ctx.dec.t_projector.op
    worst = 0.0
    for c in ctx.basis.constants:
        for t in ctx.short_times():
            for s in [0] + ctx.steps():
                worst = max(worst, np.linalg.norm(commutator(p @ c(t + s) @ p, ctx.sigma_i(t))))
    return worst, "[P C(t+s) P, sigma_I(t)]"


# ---------------------------------------------------------------- constants of motion

def check_basis_dimension(ctx: Context):
    return abs(len(ctx.basis) - ctx.dec.dim_attractor), f"{len(ctx.basis)} constants including I"


def check_conservation(ctx: Context):
    worst = 0.0
    for rho in ctx.states:
        for c in ctx.basis.constants:
            for t in ctx.short_times():
                evolved = evolve(ctx.spec, rho, t, validate=False)
                for s in [0] + ctx.steps():
                    worst = max(worst, abs(np.trace(c(t + s) @ evolved) - np.trace(c(s) @ rho)))
    return worst, "Tr[C(t+s) rho(t)] = Tr[C(s) rho(0)] including pre-asymptotic times"


def check_heisenberg_reversal(ctx: Context):
    worst = 0.0
    for c in ctx.basis.constants:
        for t1 in ctx.steps():
            for t2 in ctx.steps():
                worst = max(worst, np.linalg.norm(heisenberg_evolve(ctx.spec, c(t1 + t2), t1) - c(t2)))
    return worst, "T_t1^dagger C(t2) = C(t2 - t1)"


def check_integrals(ctx: Context):
    worst = 0.0
    for j in ctx.basis.integrals:
        c = ctx.basis.constants[j]
        for t in ctx.short_times():
            worst = max(worst, np.linalg.norm(c(t) - c(0)))
    return worst, f"{len(ctx.basis.integrals)} integrals of motion"


# ---------------------------------------------------------------- reconstructions

def check_known_state(ctx: Context):
    worst = 0.0
    for i, rho in enumerate(ctx.states):
        model = ctx.known_model(i)
        _require_converged(model, "known-state")
        traj = asymptotic_trajectory(ctx.dec, rho)
        worst = max(worst, _worst(np.linalg.norm(gibbs_state(model, t) - traj(t)) for t in ctx.grid))
    return worst, f"{len(ctx.states)} initial states, 8 asymptotic times"


def check_multiplier_time_independence(ctx: Context):
    worst = 0.0
    for i in range(len(ctx.states)):
        model = ctx.known_model(i)
        _require_converged(model, "known-state")
        cons = list(zip(model.constraints, model.targets))
        for t in (ctx.grid[3], ctx.grid[-1]):
            refit = fit(ctx.sigma_i, cons, t, ctx.dec.t_projector)
            ctx._record(refit)
            if model.gammas.size:
                worst = max(worst, float(np.max(np.abs(refit.gammas - model.gammas))))
    return worst, "gamma refitted at later asymptotic times"


def _constraint_free_directions(model, t, rng, count):
    """Random Hermitian directions on P orthogonal to I and every P C_j(t) P."""
    v = support_basis(model.t_projector)
    r = v.shape[1]
    cons = [np.eye(r)] + [hermitian_part(dag(v) @ c(t) @ v) for c in model.constraints]
    a = np.array([np.concatenate([x.real.ravel(), x.imag.ravel()]) for x in cons]).T
    q = np.linalg.qr(a)[0][:, : np.linalg.matrix_rank(a)]
    out = []
    for _ in range(count):
        z = random_hermitian(r, rng)
        x = np.concatenate([z.real.ravel(), z.imag.ravel()])
        x = x - q @ (q.T @ x)
        x = x - q @ (q.T @ x)
        if np.linalg.norm(x) <= 1e-8 * np.linalg.norm(z):
            return v, []
        out.append(hermitian_part((x[: r * r] + 1j * x[r * r:]).reshape(r, r)))
    return v, out


def _variational(model, t, rng, count):
    rho = gibbs_state(model, t)
    sigma = model.reference(t)
    s0 = relative_entropy(rho, sigma)
    v, dirs = _constraint_free_directions(model, t, rng, count)
    lam_min = np.linalg.eigvalsh(hermitian_part(dag(v) @ rho @ v))[0]
    worst = 0.0
    for d in dirs:
        eps = rng.uniform(0.05, 0.95) * lam_min / np.linalg.norm(d, 2)
        s1 = relative_entropy(rho + eps * (v @ d @ dag(v)), sigma)
        worst = max(worst, s0 - s1)
    return worst, len(dirs)


def check_variational(ctx: Context):
    worst, used = 0.0, 0
    models = [ctx.known_model(0), ctx.partial_model]
    for model in models:
        _require_converged(model, "reconstruction")
        w, n = _variational(model, ctx.grid[1], ctx.rng, ctx.n_perturb)
        worst, used = max(worst, w), used + n
    if used == 0:
        raise Skip("constraints fix the state completely; no admissible perturbations")
    return worst, f"{used} constraint-preserving perturbations"


def check_partition_derivative(ctx: Context, step: float = 1e-5):
    model = ctx.known_model(0)
    _require_converged(model, "known-state")
    if not model.gammas.size:
        raise Skip("no constraints")
    t = ctx.grid[0]
    cons = list(model.constraints)
    mom = moment_map(model, t)
    worst = 0.0
    for j in range(model.gammas.size):
        e = np.zeros(model.gammas.size)
        e[j] = step
        up = log_partition(make_model(model.reference, cons, model.gammas + e, model.t_projector, t), t)
        dn = log_partition(make_model(model.reference, cons, model.gammas - e, model.t_projector, t), t)
        worst = max(worst, abs(-(up - dn) / (2 * step) - mom[j]))
    return worst, f"central differences with step {step:g}"


def _entropy_identity(model, t):
    rho = gibbs_state(model, t)
    s = relative_entropy(rho, model.reference(t))
    identity = -log_partition(model, t) - float(model.gammas @ moment_map(model, t))
    return s, abs(s - identity)


def check_entropy_identity(ctx: Context):
    worst = 0.0
    models = [ctx.known_model(i) for i in range(len(ctx.states))] + [ctx.partial_model]
    for model in models:
        _require_converged(model, "reconstruction")
        for t in ctx.grid:
            worst = max(worst, _entropy_identity(model, t)[1])
    return worst, "S = -ln Z - gamma . <C>"


def check_entropy_constancy(ctx: Context):
    worst = 0.0
    for i in range(len(ctx.states)):
        model = ctx.known_model(i)
        values = [_entropy_identity(model, t)[0] for t in ctx.grid]
        worst = max(worst, max(values) - min(values))
    return worst, "S(rho(t)|sigma_I(t)) along 8 asymptotic times"


def check_differential(ctx: Context, size: float = 1e-4):
    model = ctx.known_model(0)
    _require_converged(model, "known-state")
    if not model.gammas.size:
        raise Skip("no constraints")
    t = ctx.grid[0]
    dc = ctx.rng.standard_normal(model.gammas.size)
    dc *= size / np.linalg.norm(dc)
    other = fit_model(model.reference, list(zip(model.constraints, model.targets + dc)), t, model.t_projector)
    _require_converged(other, "perturbed")
    ds = _entropy_identity(other, t)[0] - _entropy_identity(model, t)[0]
    return abs(ds + float(model.gammas @ dc)) / size**2, "|dS + gamma . dc| / |dc|^2"


def _interchange_refs(ctx: Context):
    shift = 1 if ctx.discrete else 0.8
    refs = [("sigma_I(t+s)", ctx.sigma_i.shifted(shift))]
    refs.append(("random T-trajectory", asymptotic_trajectory(ctx.dec, ctx.states[-1])))
    return refs


def check_interchange_state(ctx: Context):
    model = ctx.known_model(0)
    _require_converged(model, "known-state")
    cons = list(zip(model.constraints, model.targets))
    worst = 0.0
    for _, ref in _interchange_refs(ctx):
        other = fit_model(ref, cons, model.t_eval, ctx.dec.t_projector)
        _require_converged(other, "second-reference")
        worst = max(worst, _worst(np.linalg.norm(gibbs_state(other, t) - gibbs_state(model, t)) for t in ctx.grid))
    return worst, "same state from a different T-trajectory"


def check_interchange_entropy(ctx: Context):
    model = ctx.known_model(0)
    _require_converged(model, "known-state")
    basis = ctx.basis
    t0 = model.t_eval
    worst = 0.0
    for _, ref in _interchange_refs(ctx):
        # write sigma_I itself as a Gibbs state relative to the second reference
        c1 = expectations(basis, ctx.sigma_i(t0), t0)[1:]
        link = fit_model(ref, list(zip(basis.constants, c1)), t0, ctx.dec.t_projector)
        other = fit_model(ref, list(zip(model.constraints, model.targets)), t0, ctx.dec.t_projector)
        _require_converged(link, "link")
        _require_converged(other, "second-reference")
        if model.gammas.size:
            worst = max(worst, float(np.max(np.abs(other.gammas - model.gammas - link.gammas))))
        for t in ctx.grid[:4]:
            rho, s1, s2 = gibbs_state(model, t), ctx.sigma_i(t), ref(t)
            lhs = relative_entropy(rho, s2)
            mom_rho = expectations(basis, rho, t)[1:]
            mom_s1 = expectations(basis, s1, t)[1:]
            rhs = relative_entropy(rho, s1) + relative_entropy(s1, s2) + float(link.gammas @ (mom_s1 - mom_rho))
            worst = max(worst, abs(lhs - rhs))
    return worst, "S(rho|s2) = S(rho|s1) + S(s1|s2) + omega . (<C>_s1 - <C>_rho), gamma shift"


def check_hessian_psd(ctx: Context):
    for i in range(len(ctx.states)):
        ctx.known_model(i)
    ctx.partial_model
    if ctx.basis.integrals:
        ctx.stationary_model
    if not ctx.hessian_eigs:
        raise Skip("no Newton iterations were needed")
    lowest = min(ctx.hessian_eigs)
    return max(0.0, -lowest), f"smallest covariance eigenvalue {lowest:.3e}"


def check_partial_dynamics(ctx: Context):
    model = ctx.partial_model
    _require_converged(model, "partial")
    worst = 0.0
    for t in ctx.grid[:3]:
        rho = gibbs_state(model, t)
        for s in ctx.steps():
            worst = max(worst, np.linalg.norm(ctx.brute(rho, s) - gibbs_state(model, t + s)))
    return worst, f"{len(model.constraints)} of {len(ctx.basis.constants)} constants constrained"


def check_stationary_fixed_point(ctx: Context):
    model = ctx.stationary_model
    _require_converged(model, "stationary")
    rho = gibbs_state(model, 0)
    if ctx.discrete:
        return np.linalg.norm(evolve(ctx.spec, rho, 1, validate=False) - rho), "||T(rho) - rho||"
    return np.linalg.norm(ctx.brute(rho, 1.0) - rho), "||T_1(rho) - rho||"


def _commensurate_period(omegas, max_period=5000):
    period = 1
    for w in omegas:
        frac = w / (2 * np.pi)
        for q in range(1, 721):
            if abs(frac * q - round(frac * q)) < 1e-9:
                period = period * q // math.gcd(period, q)
                break
        else:
            return None
    return period if period <= max_period else None


def windowed_average(fn: Callable, kind: str, omegas, start=0, max_points: int = 40000) -> np.ndarray:
    """Time average of ``fn`` over a trajectory oscillating at ``omegas``.

    Discrete trajectories with commensurate frequencies are averaged over
    one exact period; otherwise a Gaussian window wide enough to damp every
    frequency below ``1e-17`` is used.
    """
    nonzero = [abs(w) for w in omegas if abs(w) > 1e-12]
    if not nonzero:
        return fn(start)
    if kind == DISCRETE:
        period = _commensurate_period(nonzero)
        if period is not None:
            return sum(fn(start + k) for k in range(period)) / period
    w_min, w_max = min(nonzero), max(nonzero)
    sd = 9.0 / w_min
    h = 1.0 if kind == DISCRETE else min(1.0, np.pi / (2 * w_max))
    n = int(math.ceil(18 * sd / h))
    if n > max_points:
        raise Skip(f"averaging window needs {n} samples")
    ts = start + h * np.arange(n + 1)
    if kind == DISCRETE:
        ts = ts.astype(int)
    weights = np.exp(-0.5 * ((ts - ts[n // 2]) / sd) ** 2)
    total = sum(wt * fn(t) for wt, t in zip(weights, ts))
    return total / weights.sum()


def check_stationary_average(ctx: Context):
    model = ctx.stationary_model
    _require_converged(model, "stationary")
    partial = reconstruct_partial(ctx.spec, ctx.dec, ctx.integral_subset)
    _require_converged(partial, "partial")
    avg = windowed_average(lambda t: gibbs_state(partial, t), ctx.spec.kind, ctx.dec.omegas(), start=partial.t_eval)
    return np.linalg.norm(avg - gibbs_state(model, 0)), f"{len(ctx.integral_subset)} integrals constrained"


def maxent_state(ops, targets, dim: int) -> np.ndarray:
    """Textbook maximum-entropy state ``exp(-sum gamma_j A_j)/Z`` with ``<A_j> = c_j``."""
    if not ops:
        return np.eye(dim) / dim

    def state(g):
        r = scipy.linalg.expm(-sum(x * a for x, a in zip(g, ops)))
        return r / np.trace(r).real

    def residual(g):
        r = state(g)
        return np.array([np.trace(a @ r).real for a in ops]) - targets

    sol = scipy.optimize.root(residual, np.zeros(len(ops)), method="hybr", options={"xtol": 1e-15})
    if np.max(np.abs(residual(sol.x))) > 1e-11:
        raise RuntimeError(f"MaxEnt oracle did not converge ({sol.message})")
    return state(sol.x)


def check_maxent(ctx: Context):
    if not is_unital(ctx.spec):
        raise Skip("process is not unital")
    model = ctx.stationary_model
    _require_converged(model, "stationary")
    ops = [c(0) for c, _ in ctx.integral_subset]
    targets = np.array([x for _, x in ctx.integral_subset])
    oracle = maxent_state(ops, targets, ctx.spec.dim)
    return np.linalg.norm(gibbs_state(model, 0) - oracle), "against exp(-sum gamma A)/Z from a generic root finder"


# name, tolerance, check
CHECKS = [
    ("trace_preservation", 1e-10, check_trace_preservation),
    ("state_validity", 1e-10, check_state_validity),
    ("semigroup", 1e-9, check_semigroup),
    ("heisenberg_duality", 1e-9, check_heisenberg_duality),
    ("representation_consistency", 1e-9, check_representation_consistency),
    ("eigen_residuals", 1e-9, check_eigen_residuals),
    ("biorthonormality", 1e-9, check_biorthonormality),
    ("left_right_dimension", 0, check_left_right_dimension),
    ("t_state_fixed_point", 1e-9, check_t_state),
    ("asymptotic_equivalence", 1e-8, check_asymptotic_equivalence),
    ("projection_idempotent", 1e-9, check_projection_idempotent),
    ("algebra_closure", 1e-8, check_algebra_closure),
    ("sigma_commutation", 1e-9, check_sigma_commutation),
    ("basis_dimension", 0, check_basis_dimension),
    ("conservation", 1e-9, check_conservation),
    ("heisenberg_reversal", 1e-9, check_heisenberg_reversal),
    ("integrals_time_independent", 1e-9, check_integrals),
    ("known_state_reconstruction", 1e-7, check_known_state),
    ("multiplier_time_independence", 1e-7, check_multiplier_time_independence),
    ("variational_optimality", 1e-9, check_variational),
    ("partition_derivative", 1e-6, check_partition_derivative),
    ("entropy_identity", 1e-8, check_entropy_identity),
    ("entropy_constancy", 1e-8, check_entropy_constancy),
    ("differential_relation", 10.0, check_differential),
    ("interchange_state", 1e-8, check_interchange_state),
    ("interchange_entropy", 1e-7, check_interchange_entropy),
    ("hessian_psd", 1e-10, check_hessian_psd),
    ("partial_dynamics", 1e-8, check_partial_dynamics),
    ("stationary_fixed_point", 1e-9, check_stationary_fixed_point),
    ("stationary_time_average", 1e-8, check_stationary_average),
    ("maxent_reduction", 1e-8, check_maxent),
]

CHECK_NAMES = [name for name, _, _ in CHECKS]


def run_check(ctx: Context, name: str) -> CheckResult:
    for cname, tol, fn in CHECKS:
        if cname == name:
            break
    else:
        raise KeyError(f"unknown check {name!r}")
    try:
        residual, detail = fn(ctx)
    except Skip as exc:
        return CheckResult(name, None, tol, None, f"skipped: {exc}")
    except Exception as exc:  # reported, not raised
        return CheckResult(name, None, tol, False, f"{type(exc).__name__}: {exc}")
    residual = float(residual)
    return CheckResult(name, residual, tol, bool(residual <= tol), detail)


def run_suite(spec: ProcessSpec, suite: str = FULL, seed: int = 0) -> list[CheckResult]:
    """Run every check; after a trace-preservation failure the rest are skipped."""
    ctx = Context(spec, suite, seed)
    results = [run_check(ctx, CHECK_NAMES[0])]
    if results[0].passed is False:
        reason = "skipped: process is not trace preserving"
        return results + [CheckResult(name, None, tol, None, reason) for name, tol, _ in CHECKS[1:]]
    results += [run_check(ctx, name) for name in CHECK_NAMES[1:]]
    return results


def all_passed(results) -> bool:
    return all(r.passed is not False for r in results)
