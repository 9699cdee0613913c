import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qjaynes.channels import SIGMA_X, SIGMA_Z, random_hermitian, random_state
from qjaynes.operators import (
    DensityMatrixError,
    herm_exp,
    herm_function,
    herm_log,
    hs_inner,
    is_density,
    support_projector,
    validate_density,
)

from conftest import fro

seeds = st.integers(min_value=0, max_value=2**32 - 1)


def test_hs_inner_examples():
    assert hs_inner(np.eye(2), np.eye(2)) == 2
    assert hs_inner(SIGMA_X, SIGMA_Z) == 0
    assert hs_inner(SIGMA_X, SIGMA_X) == 2


def test_hs_inner_conjugates_first_argument():
    a = np.array([[0, 1j], [0, 0]])
    b = np.array([[0, 1], [0, 0]])
    assert hs_inner(a, b) == pytest.approx(-1j)


def test_hs_inner_dimension_mismatch():
    with pytest.raises(ValueError, match="dimension mismatch"):
        hs_inner(np.eye(2), np.eye(3))


def test_herm_function_examples():
    assert fro(herm_function(np.eye(2), np.exp), np.e * np.eye(2)) < 1e-14
    half = np.diag([0.5, 0.5])
    assert fro(herm_function(half, np.log, support_only=True), -np.log(2) * np.eye(2)) < 1e-14
    assert fro(herm_function(np.diag([1.0, 0.0]), np.log, support_only=True)) < 1e-14


def test_herm_function_rejects_non_hermitian():
    with pytest.raises(ValueError, match="not Hermitian"):
        herm_function(np.array([[0, 1], [0, 0]]), np.exp)


def test_log_of_negative_eigenvalue_fails_without_support_restriction():
    with pytest.raises(ValueError, match="undefined"):
        herm_log(np.diag([1.0, -0.5]), support_only=False)
    with pytest.raises(ValueError, match="undefined"):
        herm_log(np.diag([1.0, 0.0]), support_only=False)


def test_support_projector_examples():
    p = support_projector(np.eye(2) / 2)
    assert p.rank == 2 and fro(p.op, np.eye(2)) < 1e-14
    p = support_projector(np.diag([1.0, 0.0]))
    assert p.rank == 1 and fro(p.op, np.diag([1.0, 0.0])) < 1e-14
    p = support_projector(np.diag([0.7, 0.3, 0.0]))
    assert p.rank == 2 and fro(p.op, np.diag([1.0, 1.0, 0.0])) < 1e-14


def test_support_projector_rejects_negative():
    with pytest.raises(ValueError, match="positive semidefinite"):
        support_projector(np.diag([1.0, -0.1]))


def test_validate_density_examples():
    assert fro(validate_density(np.eye(2) / 2), np.eye(2) / 2) == 0
    with pytest.raises(DensityMatrixError) as err:
        validate_density(np.diag([1.5, -0.5]))
    assert [name for name, _ in err.value.violations] == ["negative eigenvalue"]
    assert err.value.violations[0][1] == pytest.approx(0.5)
    with pytest.raises(DensityMatrixError) as err:
        validate_density(SIGMA_X)
    names = [name for name, _ in err.value.violations]
    assert any(name.startswith("trace 0") for name in names)


def test_validate_density_lists_every_violation():
    bad = np.array([[2.0, 1.0], [0.0, -0.5]])
    with pytest.raises(DensityMatrixError) as err:
        validate_density(bad)
    kinds = {name.split()[0] for name, _ in err.value.violations}
    assert kinds == {"non-Hermitian", "negative", "trace"}
    assert not is_density(bad)


@settings(max_examples=25, deadline=None)
@given(seed=seeds, dim=st.integers(min_value=2, max_value=6))
def test_exp_log_roundtrip(seed, dim):
    a = random_hermitian(dim, np.random.default_rng(seed))
    assert fro(herm_log(herm_exp(a)), a) <= 1e-10


@settings(max_examples=25, deadline=None)
@given(seed=seeds, dim=st.integers(min_value=2, max_value=6), rank=st.integers(min_value=1, max_value=6))
def test_support_projector_is_orthogonal_projector(seed, dim, rank):
    rho = random_state(dim, np.random.default_rng(seed), rank=min(rank, dim))
    p = support_projector(rho)
    assert fro(p.op @ p.op, p.op) <= 1e-12
    assert fro(p.op, p.op.conj().T) <= 1e-12
    assert p.rank == min(rank, dim)
    assert fro(p.op @ rho @ p.op, rho) <= 1e-12


@settings(max_examples=25, deadline=None)
@given(seed=seeds, dim=st.integers(min_value=1, max_value=5))
def test_hs_inner_is_a_norm_and_conjugate_symmetric(seed, dim):
    rng = np.random.default_rng(seed)
    a = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    b = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    aa = hs_inner(a, a)
    assert abs(aa.imag) < 1e-12 and aa.real >= 0
    assert abs(hs_inner(a, b) - np.conj(hs_inner(b, a))) < 1e-12
