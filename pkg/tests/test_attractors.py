import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qjaynes.attractors import (
    JordanDefectError,
    asymptotic_trajectory,
    decompose,
    maximally_mixed_trajectory,
    peripheral_projection,
    regime_time,
    t_state_and_projector,
)
from qjaynes.channels import (
    amplitude_damping,
    dephasing,
    direct_sum,
    identity_channel,
    phase_unitary,
    random_state,
    random_structured_channel,
    random_structured_lindbladian,
)
from qjaynes.motion import evaluate, motion_basis
from qjaynes.operators import commutator, hs_inner
from qjaynes.process import ProcessSpec, evolve

from conftest import fro

seeds = st.integers(min_value=0, max_value=2**32 - 1)
dims = st.integers(min_value=2, max_value=4)
PLUS = np.full((2, 2), 0.5, dtype=complex)


def _random_spec(seed, dim, continuous):
    rng = np.random.default_rng(seed)
    return random_structured_lindbladian(dim, rng) if continuous else random_structured_channel(dim, rng)


def test_identity_channel_decomposition():
    dec = decompose(identity_channel(2))
    assert dec.dim_attractor == 4
    assert [ev.lam for ev in dec.eigenvalues] == [1]
    assert fro(dec.t_projector.op, np.eye(2)) < 1e-12
    assert dec.spectral_gap is None


def test_amplitude_damping_decomposition():
    dec = decompose(amplitude_damping(0.5))
    assert dec.dim_attractor == 1
    assert abs(dec.eigenvalues[0].lam - 1) < 1e-12
    x = dec.right_basis[0] / np.trace(dec.right_basis[0])
    assert fro(x, np.diag([1.0, 0.0])) < 1e-12
    # oracle: dense eigendecomposition of the superoperator
    oracle = np.sort(np.abs(np.linalg.eigvals(amplitude_damping(0.5).superoperator.matrix)))
    assert np.allclose(oracle, [0.5, math.sqrt(0.5), math.sqrt(0.5), 1.0], atol=1e-12)
    assert np.allclose(np.sort(np.abs(dec.spectrum)), oracle, atol=1e-12)
    assert dec.spectral_gap == pytest.approx(1 - math.sqrt(0.5), abs=1e-12)


def test_phase_unitary_peripheral_spectrum():
    theta = np.pi / 3
    dec = decompose(phase_unitary(theta))
    assert dec.dim_attractor == 4
    lams = sorted((dec.eigenvalue_of(k).lam for k in range(4)), key=lambda z: (np.angle(z), z.real))
    # oracle: products exp(i(theta_k - theta_l)) of the unitary's eigenphases
    phases = np.array([0.0, theta])
    oracle = sorted((np.exp(1j * (a - b)) for a in phases for b in phases), key=lambda z: (np.angle(z), z.real))
    assert np.allclose(lams, oracle, atol=1e-12)


def test_biorthonormal_duals(examples):
    for spec in examples.values():
        dec = decompose(spec)
        gram = np.array([[hs_inner(xd, x) for x in dec.right_basis] for xd in dec.dual_basis])
        assert fro(gram, np.eye(dec.dim_attractor)) < 1e-9


def test_t_state_examples():
    sigma, p = t_state_and_projector(dephasing(0.3), decompose(dephasing(0.3)))
    assert fro(sigma, np.eye(2) / 2) < 1e-12 and p.rank == 2
    spec = amplitude_damping(0.5)
    sigma, p = t_state_and_projector(spec, decompose(spec))
    assert fro(sigma, np.diag([1.0, 0.0])) < 1e-12 and p.rank == 1


def test_direct_sum_projector_rank():
    spec = direct_sum(amplitude_damping(0.5), identity_channel(2))
    dec = decompose(spec)
    assert dec.t_projector.rank == 3
    # blockwise oracle: damped qubit keeps only level 0, the identity block stays whole
    assert fro(dec.t_projector.op, np.diag([1.0, 0.0, 1.0, 1.0])) < 1e-10


def test_identity_trajectory_is_constant(rng):
    rho = random_state(2, rng)
    traj = asymptotic_trajectory(decompose(identity_channel(2)), rho)
    for t in (0, 3, 17):
        assert fro(traj(t), rho) < 1e-12


def test_damped_trajectory_matches_long_iteration(rng):
    spec = amplitude_damping(0.5)
    rho = random_state(2, rng)
    traj = asymptotic_trajectory(decompose(spec), rho)
    assert fro(traj(200), evolve(spec, rho, 200)) < 1e-12
    assert fro(traj(0), np.diag([1.0, 0.0])) < 1e-12


def test_rotating_trajectory_has_period_six():
    theta = np.pi / 3
    spec = phase_unitary(theta)
    u = np.diag([1.0, np.exp(1j * theta)])
    traj = asymptotic_trajectory(decompose(spec), PLUS)
    for t in range(13):
        ut = np.linalg.matrix_power(u, t)
        assert fro(traj(t), ut @ PLUS @ ut.conj().T) < 1e-12
        assert traj(t)[0, 1] == pytest.approx(0.5 * np.exp(-1j * theta * t), abs=1e-12)
    assert fro(traj(6), traj(0)) < 1e-12


def test_maximally_mixed_trajectory_examples():
    for spec in (dephasing(0.3), phase_unitary()):
        traj = maximally_mixed_trajectory(decompose(spec))
        assert traj.is_stationary and fro(traj(5), np.eye(2) / 2) < 1e-12
    traj = maximally_mixed_trajectory(decompose(amplitude_damping(0.5)))
    assert fro(traj(3), np.diag([1.0, 0.0])) < 1e-12


def test_regime_time_examples():
    assert regime_time(decompose(amplitude_damping(0.5)), 1e-10) == 67
    assert regime_time(decompose(amplitude_damping(1.0)), 1e-10) == 1
    assert regime_time(decompose(identity_channel(2)), 1e-10) == 0


def test_jordan_defect_is_reported():
    spec = ProcessSpec.discrete([np.array([[1.0, 1.0], [0.0, 1.0]])], check=False)
    with pytest.raises(JordanDefectError):
        decompose(spec)


@settings(max_examples=15, deadline=None)
@given(seed=seeds, dim=dims, continuous=st.booleans())
def test_brute_force_equivalence(seed, dim, continuous):
    spec = _random_spec(seed, dim, continuous)
    dec = decompose(spec)
    t_star = regime_time(dec, 1e-10)
    if not continuous:
        t_star = int(t_star)
    rng = np.random.default_rng(seed + 1)
    for _ in range(3):
        rho = random_state(dim, rng)
        assert fro(evolve(spec, rho, t_star), asymptotic_trajectory(dec, rho)(t_star)) <= 1e-8


@settings(max_examples=15, deadline=None)
@given(seed=seeds, dim=dims, continuous=st.booleans())
def test_peripheral_projection_is_idempotent(seed, dim, continuous):
    dec = decompose(_random_spec(seed, dim, continuous))
    rng = np.random.default_rng(seed + 1)
    y = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    once = peripheral_projection(dec, y)
    assert fro(peripheral_projection(dec, once), once) <= 1e-9 * max(1.0, fro(y))


@settings(max_examples=15, deadline=None)
@given(seed=seeds, dim=dims, continuous=st.booleans())
def test_left_and_right_attractor_counts_agree(seed, dim, continuous):
    spec = _random_spec(seed, dim, continuous)
    dec = decompose(spec)
    assert len(dec.right_basis) == len(dec.dual_basis) == sum(ev.multiplicity for ev in dec.eigenvalues)
    mat = spec.superoperator.matrix
    w = np.linalg.eigvals(mat)
    if continuous:
        count = int(np.sum(np.abs(w.real) <= 1e-8))
    else:
        count = int(np.sum(np.abs(w) >= 1 - 1e-8))
    assert count == dec.dim_attractor


def _sigma_commutation_residual(spec):
    dec = decompose(spec)
    basis = motion_basis(dec)
    sigma = maximally_mixed_trajectory(dec)
    p = dec.t_projector.op
    grid = [0, 1, 2, 5] if spec.kind == "discrete" else [0.0, 0.4, 1.3]
    worst = 0.0
    for c in basis.constants:
        for t in grid:
            for s in grid:
                worst = max(worst, fro(commutator(p @ evaluate(c, t + s) @ p, sigma(t))))
    return worst


@pytest.mark.parametrize("name", ["identity", "unitary_theta", "dephasing", "depolarizing", "qutrit_block"])
def test_sigma_commutation_on_shipped_examples(examples, name):
    assert _sigma_commutation_residual(examples[name]) <= 1e-9


def test_sigma_commutation_counterexample():
    # the transient level 2 drains into level 0 only, so sigma_I is not flat on
    # the noiseless block {0, 1} and the commutation with P sigma_x P fails
    k0 = np.diag([1.0, 1.0, 0.0])
    k1 = np.zeros((3, 3))
    k1[0, 2] = 1.0
    spec = ProcessSpec.discrete([k0, k1])
    sx = np.zeros((3, 3))
    sx[0, 1] = sx[1, 0] = 1.0
    # by hand: sx is conserved and I/3 reaches diag(2/3, 1/3, 0) after one step
    assert np.array_equal(k0.T @ sx @ k0 + k1.T @ sx @ k1, sx)
    assert np.allclose(k0 @ k0.T / 3 + k1 @ k1.T / 3, np.diag([2 / 3, 1 / 3, 0.0]))
    dec = decompose(spec)
    assert dec.dim_attractor == 4
    assert fro(dec.t_state, np.diag([2 / 3, 1 / 3, 0.0])) < 1e-12
    assert fro(commutator(sx, dec.t_state)) == pytest.approx(math.sqrt(2) / 3, abs=1e-12)
    assert _sigma_commutation_residual(spec) == pytest.approx(math.sqrt(2) / 3, abs=1e-9)
