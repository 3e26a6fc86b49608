"""Problem and solution containers for block semidefinite programs.

Primal (maximization form):

    maximize  sum_b tr[Omega_b X_b]
    s.t.      A svec(X) = b,   X_b >= 0.

Dual:

    minimize  b.y   s.t.  Z_b = sum_i y_i A_{i,b} - Omega_b >= 0.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .svec import smat, svec, svec_length


@dataclass(frozen=True)
class Block:
    name: str
    size: int
    complex: bool = True

    @property
    def length(self) -> int:
        return svec_length(self.size, self.complex)


@dataclass
class SdpProblem:
    blocks: list[Block]
    objective: list[np.ndarray]
    A: np.ndarray
    b: np.ndarray
    constant: float = 0.0
    name: str = ""

    def __post_init__(self):
        self.A = np.atleast_2d(np.asarray(self.A, dtype=float))
        self.b = np.asarray(self.b, dtype=float).reshape(-1)
        if len(self.objective) != len(self.blocks):
            raise ValueError("one objective matrix per block is required")
        for blk, om in zip(self.blocks, self.objective):
            om = np.asarray(om)
            if om.shape != (blk.size, blk.size):
                raise ValueError(f"objective for block {blk.name} has shape {om.shape}")
            if np.abs(om - om.conj().T).max() > 1e-12 * max(1.0, np.abs(om).max()):
                raise ValueError(f"objective for block {blk.name} is not Hermitian")
            if not blk.complex and np.abs(np.imag(om)).max() > 0:
                raise ValueError(f"real block {blk.name} has a complex objective")
        if self.A.shape != (len(self.b), self.n_vars):
            raise ValueError(f"constraint matrix shape {self.A.shape} != ({len(self.b)}, {self.n_vars})")

    @property
    def offsets(self) -> list[int]:
        out, k = [], 0
        for blk in self.blocks:
            out.append(k)
            k += blk.length
        return out

    @property
    def n_vars(self) -> int:
        return sum(blk.length for blk in self.blocks)

    def vectorize(self, mats: Sequence[np.ndarray]) -> np.ndarray:
        return np.concatenate([svec(m, blk.complex) for blk, m in zip(self.blocks, mats)])

    def unvectorize(self, v: np.ndarray) -> list[np.ndarray]:
        out = []
        for blk, off in zip(self.blocks, self.offsets):
            out.append(smat(v[off:off + blk.length], blk.size, blk.complex))
        return out

    def objective_value(self, mats: Sequence[np.ndarray]) -> float:
        return float(sum(np.trace(om @ x).real for om, x in zip(self.objective, mats))) + self.constant

    def residual(self, mats: Sequence[np.ndarray]) -> float:
        return float(np.abs(self.A @ self.vectorize(mats) - self.b).max()) if len(self.b) else 0.0


class ConstraintBuilder:
    """Accumulates equality rows given as per-block Hermitian coefficient matrices."""

    def __init__(self, blocks: Sequence[Block]):
        self.blocks = list(blocks)
        self.rows: list[np.ndarray] = []
        self.rhs: list[float] = []

    def add(self, coeffs: dict, rhs: float) -> None:
        """``coeffs`` maps block index to a matrix M with row value tr[M X_b]."""
        parts = []
        for i, blk in enumerate(self.blocks):
            m = coeffs.get(i)
            if m is None:
                parts.append(np.zeros(blk.length))
            else:
                m = np.asarray(m)
                herm = (m + m.conj().T) / 2
                parts.append(svec(herm, blk.complex))
        self.rows.append(np.concatenate(parts))
        self.rhs.append(float(rhs))

    def matrix(self) -> tuple[np.ndarray, np.ndarray]:
        n = sum(b.length for b in self.blocks)
        if not self.rows:
            return np.zeros((0, n)), np.zeros(0)
        return np.array(self.rows), np.array(self.rhs)


@dataclass
class SdpSolution:
    status: str
    primal_value: float
    dual_value: float
    X: list[np.ndarray]
    y: np.ndarray
    Z: list[np.ndarray]
    primal_residual: float
    dual_residual: float
    iterations: int
    rank_info: dict = field(default_factory=dict)

    @property
    def gap(self) -> float:
        return self.dual_value - self.primal_value

    @property
    def ok(self) -> bool:
        """Converged at the requested tolerance, or within NEAR_OPTIMAL_FACTOR of it."""
        return self.status in ("optimal", "near_optimal")

    def min_eigenvalue(self) -> float:
        return min(float(np.linalg.eigvalsh(x)[0]) for x in self.X)


def dump_problem(p: SdpProblem) -> str:
    lines = [f"problem {p.name or '-'}", f"blocks {len(p.blocks)}"]
    for blk, om in zip(p.blocks, p.objective):
        lines.append(f"block {blk.name} size {blk.size} {'complex' if blk.complex else 'real'}")
        for row in np.asarray(om):
            lines.append(" ".join(_fmt(z) for z in row))
    lines.append(f"constant {p.constant!r}")
    lines.append(f"equalities {p.A.shape[0]} vars {p.A.shape[1]}")
    for row, rhs in zip(p.A, p.b):
        nz = np.nonzero(row)[0]
        lines.append(f"{rhs!r} | " + " ".join(f"{j}:{row[j]!r}" for j in nz))
    return "\n".join(lines) + "\n"


def dump_solution(s: SdpSolution) -> str:
    lines = [
        f"status {s.status}",
        f"primal {s.primal_value!r}",
        f"dual {s.dual_value!r}",
        f"gap {s.gap!r}",
        f"primal_residual {s.primal_residual!r}",
        f"dual_residual {s.dual_residual!r}",
        f"iterations {s.iterations}",
    ]
    for i, x in enumerate(s.X):
        lines.append(f"X[{i}] size {x.shape[0]}")
        for row in x:
            lines.append(" ".join(_fmt(z) for z in row))
    lines.append("y " + " ".join(repr(float(v)) for v in s.y))
    return "\n".join(lines) + "\n"


def _fmt(z) -> str:
    z = complex(z)
    if z.imag == 0:
        return repr(z.real)
    sign = "+" if z.imag >= 0 else ""
    return f"{z.real!r}{sign}{z.imag!r}j"
