"""Exact Haar averages over SU(2) and performance operators.

SU(2) is parametrized by its Cayley-Klein form

    U = [[a, -conj(b)], [b, conj(a)]],  a = sqrt(1-t) e^{i phi},  b = sqrt(t) e^{i psi},

under which the Haar measure is the product of t ~ Uniform[0, 1] and two
independent uniform phases.  A polynomial of total degree D in the entries of
U and conj(U) has phase frequencies at most D, so a (D+1)-point periodic
trapezoid rule integrates the phases exactly; what survives is a polynomial
in t of degree at most D/2, handled by Gauss-Legendre.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Sequence

import numpy as np

from ..channels import NoiseModel
from ..tensor import LabeledOperator, permute_systems
from ..strategies import strategy_systems

MAX_DEGREE = 16


class QuadratureError(ValueError):
    pass


def su2_from_angles(t: float, phi: float, psi: float) -> np.ndarray:
    a = np.sqrt(1 - t) * np.exp(1j * phi)
    b = np.sqrt(t) * np.exp(1j * psi)
    return np.array([[a, -np.conj(b)], [b, np.conj(a)]])


@lru_cache(maxsize=None)
def quadrature(degree: int) -> tuple[np.ndarray, np.ndarray]:
    """Weights (summing to 1) and SU(2) nodes exact for polynomials of ``degree``."""
    if degree < 0 or degree > MAX_DEGREE:
        raise QuadratureError(f"degree {degree} outside supported range 0..{MAX_DEGREE}")
    m = degree // 2 + 1
    x, w = np.polynomial.legendre.leggauss(m)
    t = (x + 1) / 2
    wt = w / 2
    nph = degree + 1
    phases = 2 * np.pi * np.arange(nph) / nph
    weights, nodes = [], []
    for ti, wi in zip(t, wt):
        for phi in phases:
            for psi in phases:
                weights.append(wi / nph**2)
                nodes.append(su2_from_angles(ti, phi, psi))
    weights = np.array(weights)
    nodes = np.array(nodes)
    weights.setflags(write=False)
    nodes.setflags(write=False)
    return weights, nodes


def su2_haar_moment(integrand: Callable[[np.ndarray], object], degree: int):
    """E_U[integrand(U)] over Haar-random U in SU(2).

    ``integrand`` may return an array or a LabeledOperator; the sum runs in a
    fixed node order so results are reproducible bit for bit.
    """
    weights, nodes = quadrature(degree)
    acc = None
    for w, u in zip(weights, nodes):
        val = integrand(u)
        mat = val.matrix if isinstance(val, LabeledOperator) else np.asarray(val)
        acc = w * mat if acc is None else acc + w * mat
    if isinstance(val, LabeledOperator):
        return LabeledOperator(val.systems, acc)
    return acc


@dataclass(frozen=True)
class PerformanceOperator:
    op: LabeledOperator
    n_slots: int
    gamma: float
    averaging: str
    form: str

    def value(self, c: LabeledOperator) -> float:
        return float(np.trace(self.op.aligned(c) @ self.op.matrix).real)


def _unitary_choi(u: np.ndarray) -> np.ndarray:
    v = np.asarray(u, dtype=complex).reshape(-1)
    return np.outer(v, v.conj())


def _kron_order(n: int) -> list[str]:
    names = []
    for k in range(1, n + 1):
        names += [f"O{k}", f"I{k}"]
    return names + ["F", "P"]


def _integrand(u: np.ndarray, gamma: float, n: int, form: str) -> np.ndarray:
    slot = (1 - gamma) * _unitary_choi(u.conj()) + gamma / 2 * np.eye(4)
    target = _unitary_choi(u)
    if form == "offset":
        target = target - (4 - 3 * gamma) / 2 * np.eye(4)
    out = target
    for _ in range(n):
        out = np.kron(slot, out)
    return out


def performance_operator(noise: NoiseModel | float, n: int, averaging="haar",
                         form: str = "fidelity") -> PerformanceOperator:
    """Operator Omega with tr[C Omega] equal to the average objective of strategy C.

    form="fidelity": Omega = E_U[(J_U^T)^{(x)n} (x) |U>><<U|_{FP}] / 4, so that
    tr[C Omega] is the average channel fidelity.

    form="offset": E_U[(J_U^T)^{(x)n} (x) (|U>><<U| - (4-3g)/2 I)_{FP}] without
    the 1/4, which vanishes on the trivial strategy.

    ``averaging`` is "haar" or a sequence of 2x2 unitaries (uniform average).
    """
    gamma = noise.gamma if isinstance(noise, NoiseModel) else NoiseModel(noise).gamma
    if n not in (1, 2, 3):
        raise ValueError(f"performance operator supports n in {{1, 2, 3}}, got {n}")
    if form not in ("fidelity", "offset"):
        raise ValueError(f"unknown objective form {form!r}")
    scale = 0.25 if form == "fidelity" else 1.0
    if isinstance(averaging, str):
        if averaging != "haar":
            raise ValueError(f"unknown averaging {averaging!r}")
        mat = su2_haar_moment(lambda u: _integrand(u, gamma, n, form), 2 * (n + 1))
        label = "haar"
    else:
        gates = [np.asarray(g, dtype=complex) for g in averaging]
        mat = sum(_integrand(g, gamma, n, form) for g in gates) / len(gates)
        label = f"gate_set[{len(gates)}]"
    op = LabeledOperator(_kron_order(n), scale * mat)
    op = permute_systems(op, strategy_systems(n))
    herm = (op.matrix + op.matrix.conj().T) / 2
    return PerformanceOperator(LabeledOperator(op.systems, herm), n, gamma, label, form)
