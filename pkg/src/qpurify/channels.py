"""Choi operators of qubit channels and their composition.

The Choi vector of a unitary is |U>> = (U (x) 1)|I>>, so a channel Choi matrix
has the output system as its first tensor factor.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .tensor import (
    LabeledOperator,
    PSD_TOL,
    SystemLabel,
    check_psd,
    ket_bra,
    link_product,
    partial_trace,
    permute_systems,
)

PAULI_I = np.eye(2, dtype=complex)
PAULI_X = np.array([[0, 1], [1, 0]], dtype=complex)
PAULI_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
PAULI_Z = np.array([[1, 0], [0, -1]], dtype=complex)
HADAMARD = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)
PHASE_S = np.diag([1, 1j])


class ChannelError(ValueError):
    pass


@dataclass(frozen=True)
class NoiseModel:
    """Qubit depolarizing noise rho -> (1 - gamma) rho + gamma I/2."""

    gamma: float

    def __post_init__(self):
        if not 0.0 <= self.gamma <= 1.0:
            raise ChannelError(f"gamma must lie in [0, 1], got {self.gamma}")


@dataclass(frozen=True)
class ChannelChoi:
    op: LabeledOperator
    input: str
    output: str

    @property
    def input_dim(self) -> int:
        return self.op.label(self.input).dim

    @property
    def output_dim(self) -> int:
        return self.op.label(self.output).dim

    def tp_residual(self) -> float:
        marg = partial_trace(self.op, [self.output])
        return float(np.abs(marg.matrix - np.eye(self.input_dim)).max())

    def validate(self, tol: float = PSD_TOL) -> None:
        rep = check_psd(self.op, tol)
        if not rep.ok:
            raise ChannelError(f"Choi operator not PSD (min eigenvalue {rep.min_eigenvalue:.3e})")
        if self.tp_residual() > tol:
            raise ChannelError(f"channel not trace preserving (residual {self.tp_residual():.3e})")

    def relabel(self, input: str, output: str) -> "ChannelChoi":
        return ChannelChoi(self.op.relabel({self.input: input, self.output: output}), input, output)


def unitary_residual(u: np.ndarray) -> float:
    u = np.asarray(u)
    return float(np.abs(u.conj().T @ u - np.eye(u.shape[1])).max())


def choi_vector(u: np.ndarray) -> np.ndarray:
    """|U>> = (U (x) 1)|I>> for a (possibly rectangular) matrix U."""
    u = np.asarray(u, dtype=complex)
    return u.reshape(-1)


def choi_of_unitary(u, input: str = "I", output: str = "O") -> ChannelChoi:
    u = np.asarray(u, dtype=complex)
    if u.shape != (2, 2) or unitary_residual(u) > 1e-10:
        raise ChannelError("expected a 2x2 unitary")
    op = LabeledOperator([output, input], ket_bra(choi_vector(u)))
    return ChannelChoi(op, input, output)


def choi_of_kraus(kraus: Sequence[np.ndarray], input: str = "I", output: str = "O") -> ChannelChoi:
    kraus = [np.asarray(k, dtype=complex) for k in kraus]
    dout, din = kraus[0].shape
    mat = sum(ket_bra(choi_vector(k)) for k in kraus)
    op = LabeledOperator([SystemLabel(output, dout), SystemLabel(input, din)], mat)
    return ChannelChoi(op, input, output)


def depolarizing_kraus(gamma: float) -> list[np.ndarray]:
    NoiseModel(gamma)
    w = np.sqrt(gamma / 4)
    return [np.sqrt(1 - 3 * gamma / 4) * PAULI_I, w * PAULI_X, w * PAULI_Y, w * PAULI_Z]


def depolarizing_choi(noise: NoiseModel | float, input: str = "I", output: str = "O") -> ChannelChoi:
    gamma = noise.gamma if isinstance(noise, NoiseModel) else NoiseModel(noise).gamma
    phi = ket_bra(choi_vector(PAULI_I))
    mat = (1 - gamma) * phi + gamma * np.kron(PAULI_I / 2, PAULI_I)
    return ChannelChoi(LabeledOperator([output, input], mat), input, output)


def compose(first: ChannelChoi, second: ChannelChoi) -> ChannelChoi:
    """Choi operator of ``second`` after ``first``."""
    mid = "__mid__"
    a = first.relabel(first.input, mid)
    b = second.relabel(mid, second.output)
    return ChannelChoi(link_product(a.op, b.op), first.input, second.output)


def noisy_unitary_choi(u, noise: NoiseModel | float, input: str = "I", output: str = "O") -> ChannelChoi:
    """J^{N o U} = J^N * |U>><<U|."""
    return compose(choi_of_unitary(u, input, output), depolarizing_choi(noise, input, output))


def channel_fidelity(j: ChannelChoi, u) -> float:
    """tr[J |U>><<U|] / d^2."""
    d = j.input_dim
    target = choi_of_unitary(u, j.input, j.output).op
    val = np.trace(j.op.matrix @ j.op.aligned(target)).real / d**2
    return float(val)


def effective_channel(strategy: LabeledOperator, noisy: ChannelChoi, n: int,
                      past: str = "P", future: str = "F") -> ChannelChoi:
    """Insert ``n`` copies of ``noisy`` into the slots (I_k, O_k) of ``strategy``."""
    expected = {past, future} | {f"I{k}" for k in range(1, n + 1)} | {f"O{k}" for k in range(1, n + 1)}
    if set(strategy.names) != expected:
        raise ChannelError(f"strategy systems {strategy.names} do not match {n}-slot layout")
    out = strategy
    for k in range(1, n + 1):
        out = link_product(out, noisy.relabel(f"I{k}", f"O{k}").op)
    return ChannelChoi(permute_systems(out, [future, past]), past, future)


def apply_kraus(kraus: Sequence[np.ndarray], rho: np.ndarray, tol: float = 1e-10) -> np.ndarray:
    kraus = [np.asarray(k, dtype=complex) for k in kraus]
    din = kraus[0].shape[1]
    completeness = sum(k.conj().T @ k for k in kraus)
    if np.abs(completeness - np.eye(din)).max() > tol:
        raise ChannelError("Kraus operators violate completeness sum K^dag K = I")
    return sum(k @ rho @ k.conj().T for k in kraus)


def choi_from_action(action, din: int, input: str = "I", output: str = "O") -> ChannelChoi:
    """Choi matrix of a linear map given only as a function on matrices."""
    blocks = []
    for i in range(din):
        row = []
        for j in range(din):
            e = np.zeros((din, din), dtype=complex)
            e[i, j] = 1.0
            row.append(action(e))
        blocks.append(row)
    dout = blocks[0][0].shape[0]
    # sum_ij A(|i><j|) (x) |i><j| on (out, in)
    mat = np.zeros((dout * din, dout * din), dtype=complex)
    for i in range(din):
        for j in range(din):
            e = np.zeros((din, din))
            e[i, j] = 1.0
            mat += np.kron(blocks[i][j], e)
    op = LabeledOperator([SystemLabel(output, dout), SystemLabel(input, din)], mat)
    return ChannelChoi(op, input, output)


def gate_set(names: Sequence[str] = ("X", "Y", "Z", "I", "H", "S")) -> list[np.ndarray]:
    table = {"X": PAULI_X, "Y": PAULI_Y, "Z": PAULI_Z, "I": PAULI_I, "H": HADAMARD, "S": PHASE_S}
    return [table[n] for n in names]


def haar_unitary(rng: np.random.Generator, d: int = 2) -> np.ndarray:
    """Haar-random unitary via QR of a complex Ginibre matrix with phase fix."""
    z = (rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    ph = np.diag(r) / np.abs(np.diag(r))
    return q * ph
