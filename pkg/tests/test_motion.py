import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qjaynes.attractors import decompose
from qjaynes.channels import (
    SIGMA_X,
    SIGMA_Y,
    SIGMA_Z,
    amplitude_damping,
    identity_channel,
    phase_unitary,
    random_state,
    random_structured_channel,
    random_structured_lindbladian,
)
from qjaynes.motion import constant_from_operator, evaluate, expectations, motion_basis
from qjaynes.process import evolve, heisenberg_evolve

from conftest import fro

seeds = st.integers(min_value=0, max_value=2**32 - 1)
dims = st.integers(min_value=2, max_value=4)


def _random_spec(seed, dim, continuous):
    rng = np.random.default_rng(seed)
    return random_structured_lindbladian(dim, rng) if continuous else random_structured_channel(dim, rng)


def _span_residual(ops, target):
    a = np.array([np.concatenate([o.real.ravel(), o.imag.ravel()]) for o in ops]).T
    b = np.concatenate([target.real.ravel(), target.imag.ravel()])
    coef, *_ = np.linalg.lstsq(a, b, rcond=None)
    return np.linalg.norm(a @ coef - b)


def test_identity_channel_basis_spans_paulis():
    basis = motion_basis(decompose(identity_channel(2)))
    assert len(basis) == 4 and basis.labels() == ["I", "C1", "C2", "C3"]
    assert len(basis.integrals) == 3
    ops = [basis.identity] + [c(0) for c in basis.constants]
    for s in (SIGMA_X, SIGMA_Y, SIGMA_Z):
        assert _span_residual(ops, s) < 1e-12


def test_damping_basis_is_identity_only():
    basis = motion_basis(decompose(amplitude_damping(0.5)))
    assert len(basis) == 1 and basis.constants == ()


def test_unitary_basis_has_two_oscillating_constants():
    basis = motion_basis(decompose(phase_unitary(np.pi / 3)))
    assert len(basis) == 4
    assert len(basis.integrals) == 1
    assert _span_residual([basis.identity, basis.constants[basis.integrals[0]](0)], SIGMA_Z) < 1e-12
    osc = [c for c in basis.constants if not c.integral]
    assert len(osc) == 2
    theta = np.pi / 3
    u = np.diag([1.0, np.exp(1j * theta)])
    for c in osc:
        c0 = c(0)
        for t in range(8):
            # off-diagonal rotates with phase -theta t
            assert c(t)[0, 1] == pytest.approx(c0[0, 1] * np.exp(-1j * theta * t), abs=1e-12)
            # oracle: Heisenberg evolution of C(t) by t steps gives back C(0)
            ut = np.linalg.matrix_power(u, t)
            assert fro(ut.conj().T @ c(t) @ ut, c0) < 1e-12
        assert fro(c(6), c0) < 1e-12
        assert fro(c(3), -c0) < 1e-12


def test_integrals_are_time_independent():
    basis = motion_basis(decompose(identity_channel(2)))
    for c in basis.constants:
        assert fro(c(37), c(0)) == 0


def test_expectations_examples():
    basis = motion_basis(decompose(identity_channel(2)))
    assert expectations(basis, random_state(2, np.random.default_rng(1)), 0)[0] == pytest.approx(1)
    dec = decompose(identity_channel(2))
    sz = constant_from_operator(dec, SIGMA_Z, "sz")
    assert np.trace(evaluate(sz, 0) @ (np.eye(2) / 2)) == pytest.approx(0)
    assert np.trace(evaluate(sz, 0) @ np.diag([1.0, 0.0])) == pytest.approx(1)


def test_constant_from_operator_rejects_non_constants():
    dec = decompose(amplitude_damping(0.5))
    with pytest.raises(ValueError, match="not a constant of motion"):
        constant_from_operator(dec, SIGMA_Z)
    with pytest.raises(ValueError, match="Hermitian"):
        constant_from_operator(dec, np.array([[0, 1], [0, 0]]))


@settings(max_examples=15, deadline=None)
@given(seed=seeds, dim=dims, continuous=st.booleans())
def test_conservation(seed, dim, continuous):
    spec = _random_spec(seed, dim, continuous)
    basis = motion_basis(decompose(spec))
    rng = np.random.default_rng(seed + 1)
    grid = [0.0, 0.35, 1.2, 4.0] if continuous else [0, 1, 2, 7]
    for _ in range(3):
        rho = random_state(dim, rng)
        for c in basis.constants:
            for t in grid:
                moved = evolve(spec, rho, t)
                for s in grid:
                    assert abs(np.trace(c(t + s) @ moved) - np.trace(c(s) @ rho)) <= 1e-9


@settings(max_examples=15, deadline=None)
@given(seed=seeds, dim=dims, continuous=st.booleans())
def test_reversed_time_heisenberg_relation(seed, dim, continuous):
    spec = _random_spec(seed, dim, continuous)
    basis = motion_basis(decompose(spec))
    t1, t2 = (0.8, 2.5) if continuous else (2, 5)
    for c in basis.constants:
        assert fro(heisenberg_evolve(spec, c(t2), t1), c(t2 - t1)) <= 1e-9


@settings(max_examples=15, deadline=None)
@given(seed=seeds, dim=dims, continuous=st.booleans())
def test_basis_structure(seed, dim, continuous):
    dec = decompose(_random_spec(seed, dim, continuous))
    basis = motion_basis(dec)
    assert len(basis) == dec.dim_attractor
    ops = [basis.identity] + [c(0) for c in basis.constants]
    a = np.array([np.concatenate([o.real.ravel(), o.imag.ravel()]) for o in ops])
    sv = np.linalg.svd(a, compute_uv=False)
    assert sv[-1] > 1e-9 * sv[0]
    for c in basis.constants:
        for t in (0, 1, 3):
            ct = c(t)
            assert fro(ct, ct.conj().T) <= 1e-12


@settings(max_examples=10, deadline=None)
@given(seed=seeds, dim=dims)
def test_expectations_are_real(seed, dim):
    rng = np.random.default_rng(seed)
    basis = motion_basis(decompose(_random_spec(seed, dim, False)))
    vals = expectations(basis, random_state(dim, rng), 3)
    assert vals.dtype.kind == "f" and vals[0] == pytest.approx(1)
