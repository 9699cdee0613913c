import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qjaynes.channels import (
    SIGMA_MINUS,
    SIGMA_X,
    SIGMA_Z,
    amplitude_damping,
    amplitude_damping_lindblad,
    dephasing,
    haar_unitary,
    random_hermitian,
    random_state,
    random_structured_channel,
    random_structured_lindbladian,
    unitary_channel,
)
from qjaynes.operators import DensityMatrixError
from qjaynes.process import (
    InvalidProcessError,
    ProcessSpec,
    adjoint,
    evolve,
    heisenberg_evolve,
    is_unital,
    propagator,
    to_superoperator,
    unvec,
    vec,
)

from conftest import fro

seeds = st.integers(min_value=0, max_value=2**32 - 1)
dims = st.integers(min_value=2, max_value=4)


def _random_spec(seed, dim, continuous):
    rng = np.random.default_rng(seed)
    return random_structured_lindbladian(dim, rng) if continuous else random_structured_channel(dim, rng)


def test_vectorization_convention(rng):
    a, x, b = (rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3)) for _ in range(3))
    assert np.allclose(vec(a @ x @ b), np.kron(b.T, a) @ vec(x))
    assert np.array_equal(unvec(vec(x)), x)


def test_identity_channel_superoperator():
    s = to_superoperator(ProcessSpec.discrete([np.eye(2)]))
    assert np.array_equal(s.matrix, np.eye(4))
    assert s.kind == "map" and s.picture == "schrodinger"


def test_unitary_superoperator_is_kronecker_product():
    s = to_superoperator(ProcessSpec.discrete([SIGMA_X]))
    assert np.array_equal(s.matrix, np.kron(SIGMA_X.conj(), SIGMA_X))


def test_lowering_generator_spectrum():
    s = to_superoperator(amplitude_damping_lindblad(1.0))
    assert s.kind == "generator"
    w = np.sort_complex(np.linalg.eigvals(s.matrix))
    assert np.allclose(w, [-1, -0.5, -0.5, 0], atol=1e-12)


def test_lindbladian_matches_definition(rng):
    h = random_hermitian(3, rng)
    ls = [rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3)) for _ in range(2)]
    spec = ProcessSpec.continuous(h, ls)
    x = rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3))
    expected = 1j * (x @ h - h @ x)
    for op in ls:
        ldl = op.conj().T @ op
        expected += op @ x @ op.conj().T - 0.5 * (ldl @ x + x @ ldl)
    assert fro(spec.superoperator(x), expected) < 1e-12


def test_adjoint_examples():
    ident = to_superoperator(ProcessSpec.discrete([np.eye(2)]))
    adj = adjoint(ident)
    assert np.array_equal(adj.matrix, ident.matrix) and adj.picture == "heisenberg"
    for spec in (dephasing(0.3), amplitude_damping(0.5)):
        assert fro(adjoint(spec.superoperator)(np.eye(2)), np.eye(2)) < 1e-14


def test_evolve_at_zero_is_identity(rng):
    rho = random_state(3, rng)
    spec = random_structured_channel(3, rng)
    assert np.array_equal(evolve(spec, rho, 0), rho)


def test_full_damping_in_one_step():
    spec = amplitude_damping(1.0)
    assert fro(evolve(spec, np.eye(2) / 2, 1), np.diag([1.0, 0.0])) < 1e-15


def test_lindblad_decay_half_life():
    # excited population follows exp(-t)
    out = evolve(amplitude_damping_lindblad(1.0), np.diag([0.0, 1.0]), math.log(2))
    assert fro(out, np.diag([0.5, 0.5])) < 1e-12


def test_evolve_rejects_non_integer_discrete_time():
    with pytest.raises(ValueError, match="integer"):
        evolve(dephasing(), np.eye(2) / 2, 1.5)
    with pytest.raises(ValueError, match="non-negative"):
        evolve(amplitude_damping_lindblad(), np.eye(2) / 2, -1.0)


def test_evolve_flags_non_cptp_output():
    spec = ProcessSpec.discrete([2 * np.eye(2)], check=False)
    with pytest.raises(DensityMatrixError):
        evolve(spec, np.eye(2) / 2, 1)


def test_invalid_specs_rejected():
    with pytest.raises(InvalidProcessError, match="trace preserving"):
        ProcessSpec.discrete([np.eye(2), np.eye(2)])
    with pytest.raises(InvalidProcessError, match="Hermitian"):
        ProcessSpec.continuous(SIGMA_MINUS, [])
    with pytest.raises(ValueError, match="square"):
        ProcessSpec.discrete([np.ones((2, 3))])


def test_is_unital_examples(rng):
    assert is_unital(dephasing(0.3))
    assert not is_unital(amplitude_damping(0.4))
    assert is_unital(unitary_channel(haar_unitary(3, rng)))
    assert not is_unital(amplitude_damping_lindblad(1.0))
    assert is_unital(ProcessSpec.continuous(SIGMA_Z, [SIGMA_Z]))


@settings(max_examples=15, deadline=None)
@given(seed=seeds, dim=dims, continuous=st.booleans())
def test_trace_preservation(seed, dim, continuous):
    spec = _random_spec(seed, dim, continuous)
    rho = random_state(dim, np.random.default_rng(seed + 1))
    times = [0.5, 7.0, 50.0] if continuous else [1, 64, 65, 1000]
    for t in times:
        assert abs(np.trace(evolve(spec, rho, t)) - 1) <= 1e-10


@settings(max_examples=15, deadline=None)
@given(seed=seeds, dim=dims, continuous=st.booleans())
def test_semigroup(seed, dim, continuous):
    spec = _random_spec(seed, dim, continuous)
    rho = random_state(dim, np.random.default_rng(seed + 1))
    t, s = (1.3, 0.6) if continuous else (4, 3)
    assert fro(evolve(spec, rho, t + s), evolve(spec, evolve(spec, rho, t), s)) <= 1e-9


@settings(max_examples=15, deadline=None)
@given(seed=seeds, dim=dims, continuous=st.booleans())
def test_heisenberg_duality(seed, dim, continuous):
    rng = np.random.default_rng(seed)
    spec = _random_spec(seed, dim, continuous)
    rho, b = random_state(dim, rng), random_hermitian(dim, rng)
    t = 2.2 if continuous else 5
    lhs = np.trace(b @ evolve(spec, rho, t))
    rhs = np.trace(heisenberg_evolve(spec, b, t) @ rho)
    assert abs(lhs - rhs) <= 1e-9


@settings(max_examples=15, deadline=None)
@given(seed=seeds, dim=dims)
def test_kraus_and_matrix_evolution_agree(seed, dim):
    spec = _random_spec(seed, dim, False)
    rho = random_state(dim, np.random.default_rng(seed + 1))
    for t in (1, 5, 20):
        assert fro(evolve(spec, rho, t, method="kraus"), evolve(spec, rho, t, method="matrix")) <= 1e-10


@settings(max_examples=10, deadline=None)
@given(seed=seeds, dim=dims)
def test_continuous_propagators_agree(seed, dim):
    spec = _random_spec(seed, dim, True)
    if spec._generator_eig is None:
        return
    for t in (0.5, 4.0):
        assert np.linalg.norm(propagator(spec, t, "eig") - propagator(spec, t, "expm"), 2) <= 1e-9
