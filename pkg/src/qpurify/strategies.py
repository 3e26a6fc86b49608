"""Linear validity constraints for parallel, sequential and ICO strategies.

A strategy on n slots is a PSD operator C on P, I1, O1, ..., In, On, F whose
validity is expressed as a list of identities sum_j c_j * (X_j)C = 0 built from
trace-and-replace maps, plus a trace condition tr C = 2^(n+1).

Trace-and-replace maps act diagonally on the Pauli-string basis: the string
sigma_s is killed by (X)C whenever it acts non-trivially on X and is left
unchanged otherwise.  ``pauli_allowed_mask`` uses this to describe the
feasible affine space exactly.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .tensor import (
    LabeledOperator,
    LabelError,
    check_psd,
    identity,
    ket_bra,
    permute_systems,
    tensor_all,
    trace_and_replace,
)
from .channels import choi_vector, PAULI_I, PAULI_X, PAULI_Y, PAULI_Z

KINDS = ("parallel", "sequential", "ico")


def strategy_systems(n: int) -> list[str]:
    """Canonical system order P, I1, O1, ..., In, On, F."""
    if n < 1:
        raise ValueError(f"number of slots must be >= 1, got {n}")
    names = ["P"]
    for k in range(1, n + 1):
        names += [f"I{k}", f"O{k}"]
    return names + ["F"]


@dataclass(frozen=True)
class TraceReplaceMap:
    """Linear map C -> sum_j coef_j * (X_j)C."""

    terms: tuple[tuple[float, frozenset], ...]

    @classmethod
    def difference(cls, left: Sequence[str], right: Sequence[str]) -> "TraceReplaceMap":
        return cls(((1.0, frozenset(left)), (-1.0, frozenset(right))))

    def __call__(self, c: LabeledOperator) -> LabeledOperator:
        out = None
        for coef, x in self.terms:
            term = coef * trace_and_replace(c, x)
            out = term if out is None else out + term
        return out

    def pauli_eigenvalue(self, support: frozenset | set) -> float:
        """Eigenvalue on a Pauli string acting non-trivially exactly on ``support``."""
        return float(sum(coef for coef, x in self.terms if not (x & support)))

    def describe(self) -> str:
        parts = []
        for coef, x in self.terms:
            sign = "+" if coef > 0 else "-"
            mag = "" if abs(abs(coef) - 1) < 1e-15 else f"{abs(coef):g}*"
            parts.append(f"{sign} {mag}_{{{','.join(sorted(x, key=_label_rank))}}}C")
        return " ".join(parts).lstrip("+ ") + " = 0"


def _label_rank(name: str):
    from .tensor import canonical_key
    return canonical_key(name)


@dataclass(frozen=True)
class StrategyConstraintSet:
    n_slots: int
    kind: str
    equalities: tuple[TraceReplaceMap, ...]
    trace_value: float
    systems: tuple[str, ...] = field(default=())

    def __post_init__(self):
        if not self.systems:
            object.__setattr__(self, "systems", tuple(strategy_systems(self.n_slots)))


def _slot_labels(ks, prefix=("I", "O")) -> list[str]:
    return [f"{p}{k}" for k in ks for p in prefix]


def sequential_constraints(n: int) -> StrategyConstraintSet:
    if n < 1:
        raise ValueError(f"number of slots must be >= 1, got {n}")
    eqs = [TraceReplaceMap.difference(["F"], [f"O{n}", "F"])]
    for k in range(2, n + 1):
        tail = _slot_labels(range(k, n + 1)) + ["F"]
        eqs.append(TraceReplaceMap.difference(tail, [f"O{k - 1}"] + tail))
    full = _slot_labels(range(1, n + 1)) + ["F"]
    eqs.append(TraceReplaceMap.difference(full, ["P"] + full))
    return StrategyConstraintSet(n, "sequential", tuple(eqs), 2.0 ** (n + 1))


def ico_constraints(n: int) -> StrategyConstraintSet:
    if n < 1:
        raise ValueError(f"number of slots must be >= 1, got {n}")
    slots = list(range(1, n + 1))
    eqs = []
    for r in range(1, n + 1):
        for s in itertools.combinations(slots, r):
            rest = [k for k in slots if k not in s]
            base = _slot_labels(rest) + ["F"]
            terms = []
            for rr in range(len(s) + 1):
                for sub in itertools.combinations(s, rr):
                    terms.append(((-1.0) ** rr, frozenset(base + [f"O{k}" for k in sub])))
            eqs.append(TraceReplaceMap(tuple(terms)))
    full = _slot_labels(slots) + ["F"]
    eqs.append(TraceReplaceMap.difference(full, ["P"] + full))
    return StrategyConstraintSet(n, "ico", tuple(eqs), 2.0 ** (n + 1))


def parallel_constraints(n: int) -> StrategyConstraintSet:
    """Two-step comb with the joint input I1..In and joint output O1..On."""
    if n < 1:
        raise ValueError(f"number of slots must be >= 1, got {n}")
    outs = [f"O{k}" for k in range(1, n + 1)]
    full = _slot_labels(range(1, n + 1)) + ["F"]
    eqs = (
        TraceReplaceMap.difference(["F"], outs + ["F"]),
        TraceReplaceMap.difference(full, ["P"] + full),
    )
    return StrategyConstraintSet(n, "parallel", eqs, 2.0 ** (n + 1))


def constraints_for(kind: str, n: int) -> StrategyConstraintSet:
    table = {"parallel": parallel_constraints, "sequential": sequential_constraints, "ico": ico_constraints}
    if kind not in table:
        raise ValueError(f"unknown strategy kind {kind!r}; expected one of {KINDS}")
    return table[kind](n)


@dataclass(frozen=True)
class StrategyReport:
    residuals: tuple[float, ...]
    min_eigenvalue: float
    trace_residual: float
    tol: float

    @property
    def max_residual(self) -> float:
        return max(self.residuals, default=0.0)

    @property
    def ok(self) -> bool:
        return (self.max_residual < self.tol and self.trace_residual < self.tol
                and self.min_eigenvalue > -self.tol)


def check_strategy(c: LabeledOperator, s: StrategyConstraintSet, tol: float = 1e-9) -> StrategyReport:
    if set(c.names) != set(s.systems):
        raise LabelError(f"strategy systems {c.names} do not match {s.systems}")
    c = permute_systems(c, s.systems)
    res = tuple(float(np.abs(eq(c).matrix).max()) for eq in s.equalities)
    herm = (c.matrix + c.matrix.conj().T) / 2
    lam = float(np.linalg.eigvalsh(herm)[0])
    tr_res = abs(c.trace() - s.trace_value)
    return StrategyReport(res, lam, float(tr_res), tol)


# Pauli-string description of the feasible affine space

_PAULIS = np.array([PAULI_I, PAULI_X, PAULI_Y, PAULI_Z])


def pauli_coefficients(mat: np.ndarray, k: int) -> np.ndarray:
    """c_s = tr[sigma_s M] for all 4^k Pauli strings, s in base-4 big-endian order."""
    t = np.asarray(mat, dtype=complex).reshape((2,) * (2 * k))
    # move each (row, col) pair of a qubit to the front and contract with the Pauli table
    for q in range(k):
        # current layout: already-done pauli axes (q of them), then rows q..k-1, then cols q..k-1
        nrem = k - q
        t = np.moveaxis(t, [q, q + nrem], [t.ndim - 2, t.ndim - 1])
        t = np.tensordot(t, _PAULIS, axes=([t.ndim - 2, t.ndim - 1], [2, 1]))
        t = np.moveaxis(t, -1, q)
    return t.reshape(-1)


def pauli_reconstruct(coefs: np.ndarray, k: int) -> np.ndarray:
    """Inverse of ``pauli_coefficients``: sum_s c_s sigma_s / 2^k."""
    t = np.asarray(coefs, dtype=complex).reshape((4,) * k)
    for q in range(k):
        t = np.tensordot(t, _PAULIS, axes=([0], [0]))
    # axes now (r0, c0, r1, c1, ...)
    t = t.transpose(list(range(0, 2 * k, 2)) + list(range(1, 2 * k, 2)))
    d = 2 ** k
    return t.reshape(d, d) / d


def pauli_supports(systems: Sequence[str]) -> list[frozenset]:
    k = len(systems)
    out = []
    for digits in itertools.product(range(4), repeat=k):
        out.append(frozenset(systems[i] for i in range(k) if digits[i]))
    return out


def pauli_allowed_mask(s: StrategyConstraintSet) -> np.ndarray:
    """True for Pauli strings whose coefficient is unconstrained by the equalities."""
    supports = pauli_supports(s.systems)
    cache = {}
    mask = np.empty(len(supports), dtype=bool)
    for i, sup in enumerate(supports):
        if sup not in cache:
            cache[sup] = all(abs(eq.pauli_eigenvalue(sup)) < 1e-12 for eq in s.equalities)
        mask[i] = cache[sup]
    return mask


def project_affine(c: LabeledOperator, s: StrategyConstraintSet) -> LabeledOperator:
    """Orthogonal projection onto the affine space cut out by the equalities and the trace."""
    c = permute_systems(c, s.systems)
    k = len(s.systems)
    coefs = pauli_coefficients(c.matrix, k)
    coefs[~pauli_allowed_mask(s)] = 0.0
    coefs[0] = s.trace_value
    return LabeledOperator(c.systems, pauli_reconstruct(coefs, k))


@dataclass(frozen=True)
class SlotPermutation:
    pi: tuple[int, ...]
    matrix: np.ndarray


def slot_permutation(pi: Sequence[int], n: int | None = None) -> SlotPermutation:
    """Unitary moving slot k's systems (I_k, O_k) to slot pi(k); pi uses 1-based labels."""
    pi = tuple(int(p) for p in pi)
    n = len(pi) if n is None else n
    if sorted(pi) != list(range(1, n + 1)):
        raise ValueError(f"{pi} is not a permutation of 1..{n}")
    names = strategy_systems(n)
    inv = {pi[k - 1]: k for k in range(1, n + 1)}

    def source(nm):
        if nm in ("P", "F"):
            return nm
        return f"{nm[0]}{inv[int(nm[1:])]}"

    axes = [names.index(source(nm)) for nm in names]
    d = 2 ** len(names)
    basis = np.eye(d).reshape((2,) * len(names) + (d,))
    mat = basis.transpose(axes + [len(names)]).reshape(d, d)
    return SlotPermutation(pi, mat.T.copy())


def apply_slot_permutation(c: LabeledOperator, perm: SlotPermutation) -> LabeledOperator:
    n = len(perm.pi)
    c = permute_systems(c, strategy_systems(n))
    return LabeledOperator(c.systems, perm.matrix @ c.matrix @ perm.matrix.T)


def symmetrize(c: LabeledOperator, n: int) -> LabeledOperator:
    """Average of P_pi C P_pi^dag over all slot permutations."""
    perms = [slot_permutation(p, n) for p in itertools.permutations(range(1, n + 1))]
    c = permute_systems(c, strategy_systems(n))
    acc = sum(p.matrix @ c.matrix @ p.matrix.T for p in perms) / len(perms)
    return LabeledOperator(c.systems, acc)


def _wire(a: str, b: str) -> LabeledOperator:
    return LabeledOperator([a, b], ket_bra(choi_vector(PAULI_I)))


def wire_strategy(n: int) -> LabeledOperator:
    """Identity wires P -> I1, O1 -> I2, ..., On -> F: the sequential pass-through comb."""
    names = strategy_systems(n)
    pieces = [_wire(names[2 * k], names[2 * k + 1]) for k in range(n + 1)]
    return permute_systems(tensor_all(pieces), names)


def trivial_strategy(n: int, slot: int = 1) -> LabeledOperator:
    """Use one slot as a wire P -> I_slot, O_slot -> F and discard all others.

    Unused inputs receive the maximally mixed state and unused outputs are traced.
    Feasible in every strategy class.
    """
    names = strategy_systems(n)
    if not 1 <= slot <= n:
        raise ValueError(f"slot must lie in 1..{n}")
    pieces = [_wire("P", f"I{slot}"), _wire(f"O{slot}", "F")]
    for k in range(1, n + 1):
        if k != slot:
            pieces.append(identity([f"I{k}"]) / 2)
            pieces.append(identity([f"O{k}"]))
    return permute_systems(tensor_all(pieces), names)
