"""Irrep decomposition of U_{V,W} = V_P (x) V*^{(x)n} (x) W*^{(x)n} (x) W_F.

Construction:

1. V* = eps V eps^T with eps = [[0, 1], [-1, 0]], so conjugating every I_k and
   O_k qubit by eps turns the action into V on P, I_k and W on O_k, F.
2. Reorder qubits to (I1..In, P | O1..On, F).
3. Couple each group of n+1 spin-1/2 factors left to right with
   Clebsch-Gordan coefficients (basis |0> is m = +1/2).

Sectors are labelled by the pair of total spins (jV, jW), ordered with jV as
the outer and jW as the inner index.  Inside a sector the columns run over
(multiplicity pV, pW) outer and irrep index (mV, mW) inner, so that

    G^T U_{V,W} G = (+)_k I_{m_k} (x) f_k(V, W)
    G^T C G       = (+)_k H_k (x) I_{d_k}   for every C in the commutant.

G is real orthogonal.
"""
from __future__ import annotations

import struct
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from sympy import Rational
from sympy.physics.wigner import clebsch_gordan

from ..tensor import LabeledOperator, permute_systems
from ..strategies import strategy_systems

EPS = np.array([[0.0, 1.0], [-1.0, 0.0]])
COMMUTANT_TOL = 1e-8


class CommutationError(ValueError):
    pass


@lru_cache(maxsize=None)
def _cg(j1x2: int, m1x2: int, j2x2: int, m2x2: int, jx2: int, mx2: int) -> float:
    """<j1 m1; j2 m2 | j m> with all arguments doubled."""
    val = clebsch_gordan(Rational(j1x2, 2), Rational(j2x2, 2), Rational(jx2, 2),
                         Rational(m1x2, 2), Rational(m2x2, 2), Rational(mx2, 2))
    return float(val)


def coupled_spin_basis(k: int) -> dict[int, np.ndarray]:
    """Coupled basis of k spin-1/2 factors.

    Returns {2J: array of shape (multiplicity, 2J+1, 2^k)} where
    vecs[p, i] is the state of coupling path p with M = J - i.
    """
    basis = {1: np.eye(2).reshape(1, 2, 2)}
    for step in range(1, k):
        new: dict[int, list] = {}
        for j2 in sorted(basis):
            vecs = basis[j2]
            for jn in (j2 - 1, j2 + 1):
                if jn < 0:
                    continue
                for p in range(vecs.shape[0]):
                    block = np.zeros((jn + 1, 2 ** (step + 1)))
                    for i in range(jn + 1):
                        mx2 = jn - 2 * i
                        for s, msx2 in enumerate((1, -1)):
                            m1x2 = mx2 - msx2
                            if abs(m1x2) > j2:
                                continue
                            c = _cg(j2, m1x2, 1, msx2, jn, mx2)
                            if c == 0.0:
                                continue
                            e = np.zeros(2)
                            e[s] = 1.0
                            block[i] += c * np.kron(vecs[p, (j2 - m1x2) // 2], e)
                    new.setdefault(jn, []).append(block)
        basis = {j: np.array(v) for j, v in new.items()}
    return basis


def spin_matrix(u: np.ndarray, jx2: int, vecs: np.ndarray, k: int) -> np.ndarray:
    """Matrix of u^{(x)k} on one coupled irrep copy (vecs of shape (2J+1, 2^k))."""
    full = u
    for _ in range(k - 1):
        full = np.kron(full, u)
    return vecs.conj() @ full @ vecs.T


@dataclass(frozen=True)
class Sector:
    jv2: int
    jw2: int
    mult: int
    dim: int
    offset: int

    @property
    def size(self) -> int:
        return self.mult * self.dim

    @property
    def label(self) -> str:
        return f"(jV={self.jv2}/2, jW={self.jw2}/2)"


@dataclass(frozen=True)
class BlockStructure:
    n: int
    basis_change: np.ndarray
    sectors: tuple[Sector, ...]
    factor_order: tuple[str, ...]

    @property
    def multiplicities(self) -> tuple[int, ...]:
        return tuple(s.mult for s in self.sectors)

    @property
    def irrep_dims(self) -> tuple[int, ...]:
        return tuple(s.dim for s in self.sectors)

    @property
    def systems(self) -> tuple[str, ...]:
        return tuple(strategy_systems(self.n))

    def to_block_basis(self, mat: np.ndarray) -> np.ndarray:
        g = self.basis_change
        return g.conj().T @ mat @ g

    def from_block_basis(self, mat: np.ndarray) -> np.ndarray:
        g = self.basis_change
        return g @ mat @ g.conj().T


def group_action(v: np.ndarray, w: np.ndarray, n: int) -> np.ndarray:
    """U_{V,W} on P, I1, O1, ..., In, On, F."""
    out = np.asarray(v, dtype=complex)
    for _ in range(n):
        out = np.kron(out, np.kron(np.conj(v), np.conj(w)))
    return np.kron(out, w)


def _qubit_permutation(src: list[str], dst: list[str]) -> np.ndarray:
    """Matrix Pi with (Pi psi) in order ``dst`` for psi given in order ``src``."""
    k = len(src)
    d = 2 ** k
    axes = [src.index(nm) for nm in dst]
    idx = np.arange(d).reshape((2,) * k).transpose(axes).reshape(-1)
    pi = np.zeros((d, d))
    pi[np.arange(d), idx] = 1.0
    return pi


@lru_cache(maxsize=None)
def build_block_structure(n: int) -> BlockStructure:
    if n not in (1, 2, 3):
        raise ValueError(f"block structure supports n in {{1, 2, 3}}, got {n}")
    canon = strategy_systems(n)
    grouped = [f"I{k}" for k in range(1, n + 1)] + ["P"] + [f"O{k}" for k in range(1, n + 1)] + ["F"]
    k = n + 1
    coupled = coupled_spin_basis(k)
    eps_all = np.array([[1.0]])
    for nm in canon:
        eps_all = np.kron(eps_all, np.eye(2) if nm in ("P", "F") else EPS)
    pi = _qubit_permutation(canon, grouped)
    cols = []
    sectors = []
    offset = 0
    for jv2 in sorted(coupled):
        for jw2 in sorted(coupled):
            bv, bw = coupled[jv2], coupled[jw2]
            mult = bv.shape[0] * bw.shape[0]
            dim = (jv2 + 1) * (jw2 + 1)
            for pv in range(bv.shape[0]):
                for pw in range(bw.shape[0]):
                    for iv in range(jv2 + 1):
                        for iw in range(jw2 + 1):
                            cols.append(np.kron(bv[pv, iv], bw[pw, iw]))
            sectors.append(Sector(jv2, jw2, mult, dim, offset))
            offset += mult * dim
    b = np.array(cols).T
    # columns live in the grouped, eps-conjugated frame; map back to the canonical frame
    g = eps_all.T @ pi.T @ b
    g.setflags(write=False)
    return BlockStructure(n, g, tuple(sectors), tuple(grouped))


def sector_slices(bs: BlockStructure):
    return [slice(s.offset, s.offset + s.size) for s in bs.sectors]


def _as_matrix(c, bs: BlockStructure) -> np.ndarray:
    if isinstance(c, LabeledOperator):
        return permute_systems(c, bs.systems).matrix
    return np.asarray(c)


def block_extract(c, bs: BlockStructure, check: bool = True, tol: float = COMMUTANT_TOL) -> list[np.ndarray]:
    """Blocks H_k with G^T C G = (+) H_k (x) I_{d_k}."""
    m = bs.to_block_basis(_as_matrix(c, bs))
    blocks = []
    for s in bs.sectors:
        sub = m[s.offset:s.offset + s.size, s.offset:s.offset + s.size]
        blocks.append(np.einsum("aibi->ab", sub.reshape(s.mult, s.dim, s.mult, s.dim)) / s.dim)
    if check:
        resid = np.abs(m - _embed_block_basis(blocks, bs)).max()
        if resid > tol * max(1.0, np.abs(m).max()):
            raise CommutationError(f"operator is not in the commutant of U_VW (residual {resid:.3e})")
    return blocks


def _embed_block_basis(blocks, bs: BlockStructure) -> np.ndarray:
    d = bs.basis_change.shape[0]
    dtype = np.result_type(*[np.asarray(h) for h in blocks], float)
    out = np.zeros((d, d), dtype=dtype)
    for s, h in zip(bs.sectors, blocks):
        out[s.offset:s.offset + s.size, s.offset:s.offset + s.size] = np.kron(h, np.eye(s.dim))
    return out


def block_embed(blocks, bs: BlockStructure) -> LabeledOperator:
    mat = bs.from_block_basis(_embed_block_basis(blocks, bs))
    return LabeledOperator(bs.systems, mat)


def block_traces(c, bs: BlockStructure) -> list[np.ndarray]:
    """Partial traces over the irrep factor, tr_{d_k}[G^T C G]_k, without the commutant check.

    For the performance operator these are the blocks that pair with H_k in
    tr[C Omega] = sum_k tr[H_k omega_k].
    """
    m = bs.to_block_basis(_as_matrix(c, bs))
    out = []
    for s in bs.sectors:
        sub = m[s.offset:s.offset + s.size, s.offset:s.offset + s.size]
        out.append(np.einsum("aibi->ab", sub.reshape(s.mult, s.dim, s.mult, s.dim)))
    return out


def twirl(c, bs: BlockStructure) -> LabeledOperator:
    """E_{V,W}[U_{V,W} C U_{V,W}^dag]: orthogonal projection onto the commutant."""
    return block_embed(block_extract(c, bs, check=False), bs)


def export_basis(bs: BlockStructure, path) -> None:
    """Binary dump: two little-endian int64 dimensions, then row-major complex128 entries."""
    g = np.ascontiguousarray(bs.basis_change, dtype="<c16")
    with open(path, "wb") as fh:
        fh.write(struct.pack("<qq", *g.shape))
        fh.write(g.tobytes())


def import_basis(path) -> np.ndarray:
    with open(path, "rb") as fh:
        rows, cols = struct.unpack("<qq", fh.read(16))
        data = np.frombuffer(fh.read(), dtype="<c16")
    return data.reshape(rows, cols)
