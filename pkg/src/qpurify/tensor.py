"""Labeled multi-subsystem operators.

Every operator carries an ordered list of named subsystems.  The matrix row
index is the usual big-endian composite index over that list, so the first
system is the most significant tensor factor.

Choi operators use the unnormalized convention |I>> = sum_i |ii>, and the link
product follows Chiribella, D'Ariano and Perinotti: shared systems are
contracted after a partial transpose on the first operand.
"""
from __future__ import annotations

import re
import string
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

HERMITIAN_TOL = 1e-12
PSD_TOL = 1e-10


class LabelError(ValueError):
    """Raised for colliding, unknown or mis-ordered subsystem labels."""


class DimensionMismatch(ValueError):
    """Raised when two operators disagree on the dimension of a shared label."""


class NotHermitianError(ValueError):
    pass


@dataclass(frozen=True)
class SystemLabel:
    name: str
    dim: int = 2

    def __post_init__(self):
        if int(self.dim) < 1:
            raise ValueError(f"system {self.name!r} must have dim >= 1, got {self.dim}")


_SLOT_RE = re.compile(r"^([IO])(\d+)$")


def canonical_key(name: str, fallback: int = 0) -> tuple:
    """Sort key for the global order P, I1, O1, ..., In, On, F, then ancillas."""
    if name == "P":
        return (0, 0, 0)
    m = _SLOT_RE.match(name)
    if m:
        return (1, int(m.group(2)), 0 if m.group(1) == "I" else 1)
    if name == "F":
        return (2, 0, 0)
    return (3, fallback, name)


def canonical_order(names: Iterable[str]) -> list[str]:
    names = list(names)
    return sorted(names, key=lambda nm: canonical_key(nm, names.index(nm)))


def _as_systems(systems) -> tuple[SystemLabel, ...]:
    out = []
    for s in systems:
        if isinstance(s, SystemLabel):
            out.append(s)
        elif isinstance(s, str):
            out.append(SystemLabel(s))
        else:
            name, dim = s
            out.append(SystemLabel(name, int(dim)))
    return tuple(out)


class LabeledOperator:
    """Dense square matrix over an ordered tuple of named subsystems.

    Instances are treated as immutable values: the stored matrix is a private
    read-only copy.
    """

    __slots__ = ("systems", "matrix")

    def __init__(self, systems, matrix):
        systems = _as_systems(systems)
        names = [s.name for s in systems]
        if len(set(names)) != len(names):
            raise LabelError(f"duplicate system names in {names}")
        mat = np.array(matrix, dtype=complex)
        total = int(np.prod([s.dim for s in systems])) if systems else 1
        if mat.shape != (total, total):
            raise ValueError(f"matrix shape {mat.shape} does not match systems {names} (dim {total})")
        mat.setflags(write=False)
        object.__setattr__(self, "systems", systems)
        object.__setattr__(self, "matrix", mat)

    def __setattr__(self, key, value):
        raise AttributeError("LabeledOperator is immutable")

    def __repr__(self):
        desc = ", ".join(f"{s.name}:{s.dim}" for s in self.systems)
        return f"LabeledOperator([{desc}])"

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(s.name for s in self.systems)

    @property
    def dims(self) -> tuple[int, ...]:
        return tuple(s.dim for s in self.systems)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def label(self, name: str) -> SystemLabel:
        for s in self.systems:
            if s.name == name:
                return s
        raise LabelError(f"unknown system {name!r}; have {self.names}")

    def trace(self) -> complex:
        return complex(np.trace(self.matrix))

    def dag(self) -> "LabeledOperator":
        return LabeledOperator(self.systems, self.matrix.conj().T)

    def transpose(self) -> "LabeledOperator":
        return LabeledOperator(self.systems, self.matrix.T)

    def hermitian_residual(self) -> float:
        return float(np.abs(self.matrix - self.matrix.conj().T).max()) if self.dim else 0.0

    def is_hermitian(self, tol: float = HERMITIAN_TOL) -> bool:
        return self.hermitian_residual() < tol

    def relabel(self, mapping: dict[str, str]) -> "LabeledOperator":
        systems = [SystemLabel(mapping.get(s.name, s.name), s.dim) for s in self.systems]
        return LabeledOperator(systems, self.matrix)

    def to(self, order: Sequence[str]) -> "LabeledOperator":
        return permute_systems(self, order)

    def aligned(self, other: "LabeledOperator") -> np.ndarray:
        """Matrix of ``other`` expressed in this operator's system order."""
        if set(other.names) != set(self.names):
            raise LabelError(f"system sets differ: {self.names} vs {other.names}")
        return permute_systems(other, self.names).matrix

    def allclose(self, other: "LabeledOperator", atol: float = 1e-10) -> bool:
        return bool(np.abs(self.matrix - self.aligned(other)).max() <= atol)

    def _binary(self, other, fn):
        if isinstance(other, LabeledOperator):
            return LabeledOperator(self.systems, fn(self.matrix, self.aligned(other)))
        return NotImplemented

    def __add__(self, other):
        return self._binary(other, np.add)

    def __sub__(self, other):
        return self._binary(other, np.subtract)

    def __mul__(self, scalar):
        if isinstance(scalar, LabeledOperator):
            return NotImplemented
        return LabeledOperator(self.systems, self.matrix * scalar)

    __rmul__ = __mul__

    def __truediv__(self, scalar):
        return LabeledOperator(self.systems, self.matrix / scalar)

    def __neg__(self):
        return LabeledOperator(self.systems, -self.matrix)

    def __matmul__(self, other):
        return self._binary(other, np.matmul)


def identity(systems) -> LabeledOperator:
    systems = _as_systems(systems)
    d = int(np.prod([s.dim for s in systems])) if systems else 1
    return LabeledOperator(systems, np.eye(d))


def scalar(value) -> LabeledOperator:
    return LabeledOperator((), np.array([[value]]))


def _tensor_view(a: LabeledOperator) -> np.ndarray:
    return a.matrix.reshape(a.dims + a.dims)


def _from_tensor(systems, t: np.ndarray) -> LabeledOperator:
    d = int(np.prod([s.dim for s in systems])) if systems else 1
    return LabeledOperator(systems, t.reshape(d, d))


def tensor(a: LabeledOperator, b: LabeledOperator) -> LabeledOperator:
    """Kronecker product, systems of ``a`` first."""
    clash = set(a.names) & set(b.names)
    if clash:
        raise LabelError(f"label collision in tensor product: {sorted(clash)}")
    return LabeledOperator(a.systems + b.systems, np.kron(a.matrix, b.matrix))


def tensor_all(ops: Iterable[LabeledOperator]) -> LabeledOperator:
    out = scalar(1.0)
    for op in ops:
        out = tensor(out, op)
    return out


def permute_systems(a: LabeledOperator, order: Sequence[str]) -> LabeledOperator:
    order = [o.name if isinstance(o, SystemLabel) else o for o in order]
    if sorted(order) != sorted(a.names) or len(order) != len(a.names):
        raise LabelError(f"{order} is not a permutation of {list(a.names)}")
    if tuple(order) == a.names:
        return a
    k = len(order)
    perm = [a.names.index(nm) for nm in order]
    t = _tensor_view(a).transpose(perm + [p + k for p in perm])
    return _from_tensor([a.systems[p] for p in perm], t)


def _check_known(a: LabeledOperator, names: Iterable[str]) -> list[str]:
    names = [n.name if isinstance(n, SystemLabel) else n for n in names]
    unknown = [n for n in names if n not in a.names]
    if unknown:
        raise LabelError(f"unknown systems {unknown}; operator has {list(a.names)}")
    return names


def partial_trace(a: LabeledOperator, over: Iterable[str]) -> LabeledOperator:
    over = set(_check_known(a, over))
    if not over:
        return a
    k = len(a.names)
    letters = string.ascii_letters
    rows = [letters[i] for i in range(k)]
    cols = [letters[i + k] if a.names[i] not in over else letters[i] for i in range(k)]
    keep = [i for i in range(k) if a.names[i] not in over]
    out = "".join(rows[i] for i in keep) + "".join(cols[i] for i in keep)
    t = np.einsum("".join(rows) + "".join(cols) + "->" + out, _tensor_view(a))
    return _from_tensor([a.systems[i] for i in keep], t)


def trace_and_replace(a: LabeledOperator, x: Iterable[str]) -> LabeledOperator:
    """Trace out ``x`` and put back the normalized identity, keeping the system order."""
    x = set(_check_known(a, x))
    if not x:
        return a
    reduced = partial_trace(a, x)
    xs = [s for s in a.systems if s.name in x]
    dx = int(np.prod([s.dim for s in xs]))
    return permute_systems(tensor(reduced, identity(xs) / dx), a.names)


def partial_transpose(a: LabeledOperator, over: Iterable[str]) -> LabeledOperator:
    over = set(_check_known(a, over))
    k = len(a.names)
    axes = list(range(2 * k))
    for i, nm in enumerate(a.names):
        if nm in over:
            axes[i], axes[i + k] = axes[i + k], axes[i]
    return _from_tensor(a.systems, _tensor_view(a).transpose(axes))


def link_product(a: LabeledOperator, b: LabeledOperator) -> LabeledOperator:
    """Contract the systems shared by ``a`` and ``b``; tensor the rest.

    result = tr_S[(a^{T_S} (x) 1)(1 (x) b)], returned in canonical system order.
    """
    shared = [n for n in a.names if n in b.names]
    for nm in shared:
        if a.label(nm).dim != b.label(nm).dim:
            raise DimensionMismatch(f"system {nm!r}: dim {a.label(nm).dim} vs {b.label(nm).dim}")
    a_rest = [s for s in a.systems if s.name not in shared]
    b_rest = [s for s in b.systems if s.name not in shared]
    letters = iter(string.ascii_letters)
    row_sym = {}
    col_sym = {}
    for nm in dict.fromkeys(a.names + b.names):
        row_sym[nm] = next(letters)
        col_sym[nm] = next(letters)
    # a[x t; x' s] b[t y; s y'] summed over shared t (a-row / b-row) and s (a-col / b-col)
    a_idx = "".join(row_sym[n] for n in a.names) + "".join(col_sym[n] for n in a.names)
    b_idx = "".join(row_sym[n] for n in b.names) + "".join(col_sym[n] for n in b.names)
    out_sys = a_rest + b_rest
    out_idx = "".join(row_sym[s.name] for s in out_sys) + "".join(col_sym[s.name] for s in out_sys)
    t = np.einsum(f"{a_idx},{b_idx}->{out_idx}", _tensor_view(a), _tensor_view(b), optimize=True)
    out = _from_tensor(out_sys, t)
    return permute_systems(out, canonical_order(out.names))


@dataclass(frozen=True)
class PsdReport:
    ok: bool
    min_eigenvalue: float


def check_psd(a: LabeledOperator, tol: float = PSD_TOL) -> PsdReport:
    if not a.is_hermitian():
        raise NotHermitianError(f"operator is not Hermitian (residual {a.hermitian_residual():.3e})")
    h = (a.matrix + a.matrix.conj().T) / 2
    lam = float(np.linalg.eigvalsh(h)[0]) if a.dim else 0.0
    return PsdReport(lam > -tol, lam)


def ket_bra(vec: np.ndarray) -> np.ndarray:
    vec = np.asarray(vec).reshape(-1)
    return np.outer(vec, vec.conj())
