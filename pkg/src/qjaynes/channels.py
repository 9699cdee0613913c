"""Canonical processes and random generators with nontrivial asymptotics."""

from __future__ import annotations

import numpy as np
import scipy.linalg

from .operators import dag
from .process import ProcessSpec

SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)
# sigma_- = |0><1| lowers |1> to |0>
SIGMA_MINUS = np.array([[0, 1], [0, 0]], dtype=complex)


def identity_channel(dim: int = 2) -> ProcessSpec:
    return ProcessSpec.discrete([np.eye(dim)], label="identity")


def unitary_channel(u, label: str = "unitary") -> ProcessSpec:
    return ProcessSpec.discrete([np.asarray(u, dtype=complex)], label=label)


def phase_unitary(theta: float = np.pi / 3) -> ProcessSpec:
    return unitary_channel(np.diag([1.0, np.exp(1j * theta)]), label="unitary_theta")


def dephasing(p: float = 0.3) -> ProcessSpec:
    return ProcessSpec.discrete([np.sqrt(1 - p) * np.eye(2), np.sqrt(p) * SIGMA_Z], label="dephasing")


def amplitude_damping(p: float = 0.5) -> ProcessSpec:
    k0 = np.diag([1.0, np.sqrt(1 - p)])
    k1 = np.sqrt(p) * SIGMA_MINUS
    return ProcessSpec.discrete([k0, k1], label="amplitude_damping")


def amplitude_damping_lindblad(rate: float = 1.0) -> ProcessSpec:
    return ProcessSpec.continuous(np.zeros((2, 2)), [np.sqrt(rate) * SIGMA_MINUS], label="amplitude_damping_lindblad")


def depolarizing(p: float = 0.2) -> ProcessSpec:
    ops = [np.sqrt(1 - 3 * p / 4) * np.eye(2)] + [np.sqrt(p / 4) * s for s in (SIGMA_X, SIGMA_Y, SIGMA_Z)]
    return ProcessSpec.discrete(ops, label="depolarizing")


def direct_sum(a: ProcessSpec, b: ProcessSpec, label: str | None = None) -> ProcessSpec:
    """Channel acting as ``a`` and ``b`` on orthogonal blocks; coherences between blocks decay."""
    na, nb = a.dim, b.dim
    ops = [scipy.linalg.block_diag(k, np.zeros((nb, nb))) for k in a.kraus]
    ops += [scipy.linalg.block_diag(np.zeros((na, na)), k) for k in b.kraus]
    return ProcessSpec.discrete(ops, label=label or f"{a.label}+{b.label}")


def qutrit_block() -> ProcessSpec:
    """Amplitude damping on levels {0, 1} next to an untouched level 2."""
    return direct_sum(amplitude_damping(0.5), identity_channel(1), label="qutrit_block")


def haar_unitary(n: int, rng: np.random.Generator) -> np.ndarray:
    z = (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    d = np.diagonal(r)
    return q * (d / np.abs(d))


def random_kraus(n: int, count: int, rng: np.random.Generator, out_dim: int | None = None) -> list[np.ndarray]:
    """Kraus operators ``n -> out_dim`` from a random Stinespring isometry."""
    out_dim = n if out_dim is None else out_dim
    z = rng.standard_normal((out_dim * count, n)) + 1j * rng.standard_normal((out_dim * count, n))
    q, _ = np.linalg.qr(z)
    return [q[k * out_dim:(k + 1) * out_dim, :] for k in range(count)]


def random_channel(n: int, rng: np.random.Generator, count: int = 3, label: str = "random") -> ProcessSpec:
    return ProcessSpec.discrete(random_kraus(n, count, rng), label=label)


def random_hermitian(n: int, rng: np.random.Generator, scale: float = 1.0) -> np.ndarray:
    z = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    return scale * 0.5 * (z + dag(z))


def random_state(n: int, rng: np.random.Generator, rank: int | None = None) -> np.ndarray:
    rank = n if rank is None else rank
    z = rng.standard_normal((n, rank)) + 1j * rng.standard_normal((n, rank))
    rho = z @ dag(z)
    return rho / np.trace(rho).real


def _random_layout(dim: int, rng: np.random.Generator):
    """Blocks ``(m_unitary, m_mixing)`` plus a number of decaying levels."""
    layouts = {
        2: [([(2, 1)], 0), ([(1, 1), (1, 1)], 0), ([(1, 1)], 1), ([(1, 2)], 0)],
        3: [([(2, 1)], 1), ([(1, 1), (2, 1)], 0), ([(1, 2)], 1), ([(1, 1), (1, 1)], 1), ([(3, 1)], 0)],
        4: [
            ([(2, 2)], 0),
            ([(2, 1), (1, 1)], 1),
            ([(1, 2), (1, 1)], 1),
            ([(2, 1), (1, 2)], 0),
            ([(3, 1)], 1),
            ([(1, 1), (1, 1)], 2),
            ([(2, 1), (2, 1)], 0),
        ],
    }
    if dim not in layouts:
        raise ValueError("random structured processes are available for dimensions 2-4")
    options = layouts[dim]
    return options[rng.integers(len(options))]


def random_structured_channel(dim: int, rng: np.random.Generator) -> ProcessSpec:
    """Random Kraus channel with several blocks, rotating attractors and transients.

    Each block is ``U kron A_k`` (a Haar unitary on a noiseless factor times a
    random primitive channel); decaying levels leak into the whole space; the
    result is conjugated by a random unitary.
    """
    blocks, n_dec = _random_layout(dim, rng)
    n_core = sum(a * b for a, b in blocks)
    ops = []
    start = 0
    for m_u, m_mix in blocks:
        size = m_u * m_mix
        u = haar_unitary(m_u, rng)
        mix = random_kraus(m_mix, 2, rng) if m_mix > 1 else [np.eye(1)]
        for a in mix:
            k = np.zeros((dim, dim), dtype=complex)
            k[start:start + size, start:start + size] = np.kron(u, a)
            ops.append(k)
        start += size
    if n_dec:
        for b in random_kraus(n_dec, 2, rng, out_dim=dim):
            k = np.zeros((dim, dim), dtype=complex)
            k[:, n_core:] = b
            ops.append(k)
    v = haar_unitary(dim, rng)
    ops = [v @ k @ dag(v) for k in ops]
    return ProcessSpec.discrete(ops, label=f"random_structured_{dim}")


def random_structured_lindbladian(dim: int, rng: np.random.Generator) -> ProcessSpec:
    """Continuous analogue of :func:`random_structured_channel`."""
    blocks, n_dec = _random_layout(dim, rng)
    n_core = sum(a * b for a, b in blocks)
    h = np.zeros((dim, dim), dtype=complex)
    ls = []
    start = 0
    for m_u, m_mix in blocks:
        size = m_u * m_mix
        sl = slice(start, start + size)
        h[sl, sl] = np.kron(random_hermitian(m_u, rng), np.eye(m_mix)) + np.kron(
            np.eye(m_u), random_hermitian(m_mix, rng, 0.5)
        )
        if m_mix > 1:
            for _ in range(2):
                op = np.zeros((dim, dim), dtype=complex)
                z = rng.standard_normal((m_mix, m_mix)) + 1j * rng.standard_normal((m_mix, m_mix))
                op[sl, sl] = np.kron(np.eye(m_u), 0.7 * z)
                ls.append(op)
        start += size
    if n_dec:
        h[n_core:, n_core:] = random_hermitian(n_dec, rng, 0.5)
        for _ in range(2):
            op = np.zeros((dim, dim), dtype=complex)
            op[:, n_core:] = 0.7 * (rng.standard_normal((dim, n_dec)) + 1j * rng.standard_normal((dim, n_dec)))
            ls.append(op)
    v = haar_unitary(dim, rng)
    return ProcessSpec.continuous(v @ h @ dag(v), [v @ op @ dag(v) for op in ls], label=f"random_lindblad_{dim}")


def random_two_qubit(seed: int) -> ProcessSpec:
    rng = np.random.default_rng(seed)
    spec = random_channel(4, rng, count=3, label="random_two_qubit")
    return ProcessSpec.discrete(spec.kraus, label=spec.label, meta={"seed": seed})


def canonical_examples(seed: int = 20240607) -> dict[str, ProcessSpec]:
    """The shipped example set, keyed by file stem."""
    return {
        "identity": identity_channel(2),
        "unitary_theta": phase_unitary(np.pi / 3),
        "dephasing": dephasing(0.3),
        "amplitude_damping": amplitude_damping(0.5),
        "amplitude_damping_lindblad": amplitude_damping_lindblad(1.0),
        "depolarizing": depolarizing(0.2),
        "qutrit_block": qutrit_block(),
        "random_two_qubit": random_two_qubit(seed),
    }
