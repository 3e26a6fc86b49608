"""Materialize strategy constraints as real equality systems for the solver.

Full space: the feasible affine space of a trace-and-replace constraint set is
"every forbidden Pauli string has zero coefficient" plus the trace condition,
so each forbidden string sigma_s contributes the row tr[sigma_s X] = 0.

Reduced space: the variable is the list of multiplicity blocks H_k of a
commutant operator C = G ((+) H_k (x) I_{d_k}) G^T.  Every constraint map
commutes with the local-unitary action, so L(C) stays in the commutant and
L(C) = 0 is equivalent to block_extract(L(C)) = 0.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import lru_cache, reduce

import numpy as np

from ..channels import PAULI_I, PAULI_X, PAULI_Y, PAULI_Z
from ..strategies import (
    StrategyConstraintSet,
    apply_slot_permutation,
    constraints_for,
    pauli_allowed_mask,
    slot_permutation,
)
from ..symmetry.blocks import BlockStructure, block_embed, block_extract, build_block_structure
from ..tensor import LabeledOperator
from .problem import Block, SdpProblem
from .solver import reduce_rows
from .svec import smat, svec, svec_length

_PAULIS = [PAULI_I, PAULI_X, PAULI_Y, PAULI_Z]


@dataclass(frozen=True)
class CompiledConstraints:
    A: np.ndarray
    b: np.ndarray
    blocks: tuple[Block, ...]
    rank: int
    n_params: int

    @property
    def free_dimension(self) -> int:
        return self.n_params - self.rank


def compile_full(s: StrategyConstraintSet, complex_block: bool = True) -> CompiledConstraints:
    k = len(s.systems)
    d = 2 ** k
    mask = pauli_allowed_mask(s)
    rows = []
    for idx in np.nonzero(~mask)[0]:
        digits = np.unravel_index(idx, (4,) * k)
        if not complex_block and sum(1 for q in digits if q == 2) % 2 == 1:
            continue  # imaginary antisymmetric string: automatically orthogonal to real X
        sigma = reduce(np.kron, [_PAULIS[q] for q in digits])
        rows.append(svec(sigma, complex_block))
    rows.append(svec(np.eye(d), complex_block))
    A = np.array(rows)
    b = np.zeros(len(rows))
    b[-1] = s.trace_value
    blocks = (Block("C", d, complex_block),)
    return CompiledConstraints(A, b, blocks, len(rows), svec_length(d, complex_block))


def compile_dense(s: StrategyConstraintSet, complex_block: bool = True) -> CompiledConstraints:
    """Apply every equality map to every basis element (small n only)."""
    k = len(s.systems)
    d = 2 ** k
    L = svec_length(d, complex_block)
    cols = []
    for j in range(L):
        e = np.zeros(L)
        e[j] = 1.0
        c = LabeledOperator(s.systems, smat(e, d, complex_block))
        cols.append(np.concatenate([svec(eq(c).matrix, complex_block) for eq in s.equalities]))
    A = np.array(cols).T
    A = np.vstack([A, svec(np.eye(d), complex_block)])
    b = np.zeros(A.shape[0])
    b[-1] = s.trace_value
    keep, _, rank = reduce_rows(A, b)
    blocks = (Block("C", d, complex_block),)
    return CompiledConstraints(A[keep], b[keep], blocks, rank, L)


def reduced_blocks(bs: BlockStructure, complex_blocks: bool) -> tuple[Block, ...]:
    return tuple(Block(f"H{i}", s.mult, complex_blocks) for i, s in enumerate(bs.sectors))


def _unvec(v, blocks):
    out, o = [], 0
    for blk in blocks:
        out.append(smat(v[o:o + blk.length], blk.size, blk.complex))
        o += blk.length
    return out


def _vec(mats, blocks):
    return np.concatenate([svec(m, blk.complex) for m, blk in zip(mats, blocks)])


@lru_cache(maxsize=None)
def compile_reduced(kind: str, n: int, symmetric: bool = False, complex_blocks: bool = False) -> CompiledConstraints:
    """Constraints of class ``kind`` on the multiplicity blocks of the n-slot commutant.

    With ``symmetric`` the blocks are additionally required to be invariant
    under every slot permutation (generated by adjacent transpositions).
    """
    s = constraints_for(kind, n)
    bs = build_block_structure(n)
    blocks = reduced_blocks(bs, complex_blocks)
    nparam = sum(blk.length for blk in blocks)
    gens = [slot_permutation(p, n) for p in _adjacent_transpositions(n)] if symmetric else []
    cols = []
    for j in range(nparam):
        e = np.zeros(nparam)
        e[j] = 1.0
        hs = _unvec(e, blocks)
        c = block_embed(hs, bs)
        parts = [_vec(block_extract(eq(c), bs), blocks) for eq in s.equalities]
        for g in gens:
            parts.append(_vec(block_extract(apply_slot_permutation(c, g), bs), blocks) - e)
        cols.append(np.concatenate(parts))
    A = np.array(cols).T
    trace_row = _vec([s_.dim * np.eye(s_.mult) for s_ in bs.sectors], blocks)
    A = np.vstack([A, trace_row])
    b = np.zeros(A.shape[0])
    b[-1] = s.trace_value
    keep, consistent, rank = reduce_rows(A, b)
    if not consistent:
        raise ValueError("reduced constraint system is inconsistent")
    return CompiledConstraints(A[keep], b[keep], blocks, rank, nparam)


def _adjacent_transpositions(n: int):
    out = []
    for k in range(1, n):
        p = list(range(1, n + 1))
        p[k - 1], p[k] = p[k], p[k - 1]
        out.append(tuple(p))
    return out


def all_permutations(n: int):
    return list(itertools.permutations(range(1, n + 1)))


def full_problem(omega: np.ndarray, s: StrategyConstraintSet, name: str = "") -> SdpProblem:
    """max tr[Omega C] over strategies of class s in the full space."""
    omega = np.asarray(omega)
    real = bool(np.abs(np.imag(omega)).max() < 1e-14)
    cc = compile_full(s, complex_block=not real)
    om = omega.real if real else omega
    return SdpProblem(list(cc.blocks), [om], cc.A, cc.b, name=name)


def reduced_problem(omegas, kind: str, n: int, symmetric: bool = False, name: str = "") -> SdpProblem:
    """max sum_k tr[omega_k H_k] with omega_k the irrep-traced blocks of Omega."""
    real = all(np.abs(np.imag(o)).max() < 1e-14 for o in omegas)
    cc = compile_reduced(kind, n, symmetric, not real)
    oms = [np.real(o) if real else np.asarray(o) for o in omegas]
    oms = [(o + o.conj().T) / 2 for o in oms]
    return SdpProblem(list(cc.blocks), oms, cc.A, cc.b, name=name)

