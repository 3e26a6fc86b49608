"""Density-matrix simulation of the 3-slot purification circuit.

The circuit is V1, slot, V2, slot, V3, slot, then V4 read as a family of ten
Kraus operators that discards the ancillas.  At every stage the system qubit
(the wire that enters each slot) is the least significant qubit of the stage's
output register.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..channels import ChannelChoi, NoiseModel, depolarizing_kraus, unitary_residual
from ..tensor import LabeledOperator, SystemLabel, ket_bra, link_product, permute_systems
from ..strategies import strategy_systems
from .constants import load_constants, v4_kraus

TRACE_DRIFT_TOL = 1e-9


class ProtocolError(RuntimeError):
    pass


@dataclass(frozen=True)
class ProtocolSpec:
    """Ordered stages; ``("iso", name)``, ``("slot",)`` or ``("kraus", name)``."""

    stages: tuple = (
        ("iso", "V1"), ("slot",), ("iso", "V2"), ("slot",),
        ("iso", "V3"), ("slot",), ("kraus", "V4"),
    )
    # qubit index of the system wire counted from the least significant end
    system_wire_from_lsb: int = 0
    qubit_counts: tuple = field(default=(1, 3, 3, 4, 4, 4, 4, 1))


DEFAULT_SPEC = ProtocolSpec()


def _on_qubit(op: np.ndarray, nq: int, from_lsb: int) -> np.ndarray:
    hi = nq - 1 - from_lsb
    return np.kron(np.kron(np.eye(2 ** hi), op), np.eye(2 ** from_lsb))


def _nqubits(dim: int) -> int:
    return int(round(np.log2(dim)))


def run_protocol(u, gamma: float, spec: ProtocolSpec = DEFAULT_SPEC) -> ChannelChoi:
    """Choi operator on (F, P) of the circuit with U followed by N_gamma in every slot."""
    u = np.asarray(u, dtype=complex)
    if u.shape != (2, 2) or unitary_residual(u) > 1e-10:
        raise ProtocolError("expected a 2x2 unitary")
    NoiseModel(gamma)
    consts = load_constants()
    noise = depolarizing_kraus(gamma)
    ref = np.eye(2)
    phi = np.array([1.0, 0.0, 0.0, 1.0])
    # register = (system qubits..., reference); trace 2 matches the unnormalized Choi
    rho = ket_bra(phi).astype(complex)
    for stage in spec.stages:
        if stage[0] == "iso":
            w = np.kron(consts[stage[1]].matrix, ref)
            rho = w @ rho @ w.conj().T
        elif stage[0] == "slot":
            nq = _nqubits(rho.shape[0]) - 1
            ks = [np.kron(_on_qubit(k @ u, nq, spec.system_wire_from_lsb), ref) for k in noise]
            rho = sum(k @ rho @ k.conj().T for k in ks)
        elif stage[0] == "kraus":
            ks = [np.kron(k, ref) for k in v4_kraus(consts[stage[1]].matrix)]
            rho = sum(k @ rho @ k.conj().T for k in ks)
        else:
            raise ProtocolError(f"unknown stage {stage!r}")
        drift = abs(np.trace(rho).real - 2.0)
        if drift > TRACE_DRIFT_TOL:
            raise ProtocolError(f"trace drift {drift:.3e} after stage {stage}")
    return ChannelChoi(LabeledOperator(["F", "P"], rho), "P", "F")


def _iso_choi(v: np.ndarray, out_systems, in_systems) -> LabeledOperator:
    vec = np.asarray(v, dtype=complex).reshape(-1)
    return LabeledOperator(list(out_systems) + list(in_systems), ket_bra(vec))


def protocol_as_strategy() -> LabeledOperator:
    """Comb Choi operator on P, I1, O1, I2, O2, I3, O3, F with the slots left open."""
    c = load_constants()
    m1, m2, m3 = SystemLabel("M1", 4), SystemLabel("M2", 8), SystemLabel("M3", 8)
    s = SystemLabel
    j1 = _iso_choi(c["V1"].matrix, [m1, s("I1")], [s("P")])
    j2 = _iso_choi(c["V2"].matrix, [m2, s("I2")], [m1, s("O1")])
    j3 = _iso_choi(c["V3"].matrix, [m3, s("I3")], [m2, s("O2")])
    mat = sum(ket_bra(k.reshape(-1)) for k in v4_kraus(c["V4"].matrix))
    j4 = LabeledOperator([s("F"), m3, s("O3")], mat)
    out = link_product(link_product(link_product(j1, j2), j3), j4)
    return permute_systems(out, strategy_systems(3))
