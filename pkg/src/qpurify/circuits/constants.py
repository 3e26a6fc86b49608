"""Exact matrices of the 3-slot purification circuit.

Entries are written as short algebraic strings over 1, r2, r3, r6 (the square
roots of 2, 3 and 6) and evaluated once with sympy.  Sparse rows list only
their nonzero columns.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Sequence

import numpy as np
import sympy

ISOMETRY_TOL = 1e-12

_SYMBOLS = {"r2": sympy.sqrt(2), "r3": sympy.sqrt(3), "r6": sympy.sqrt(6)}


def _expr(text: str) -> sympy.Expr:
    return sympy.sympify(text, locals=_SYMBOLS)


def _dense(rows: Sequence[str]) -> list[list[str]]:
    return [r.split(",") for r in rows]


def _sparse(ncols: int, rows: Sequence[dict]) -> list[list[str]]:
    return [[r.get(j, "0") for j in range(ncols)] for r in rows]


_V1 = _dense(["0,0", "1/r3,0", "0,1/r3", "0,0", "-1/r6,0", "0,1/r6", "1/r2,0", "0,1/r2"])

_V2 = _dense([
    "r3/2,0,0,0,0,0,0,0",
    "0,0,0,0,r6/4,0,-r2/4,0",
    "0,r3/2,0,0,0,0,0,0",
    "0,0,0,0,0,r6/4,0,-r2/4",
    "0,0,0,0,-r6/4,0,r2/4,0",
    "0,0,r3/2,0,0,0,0,0",
    "0,0,0,0,0,-r6/4,0,r2/4",
    "0,0,0,r3/2,0,0,0,0",
    "0,0,0,0,r2/4,0,r6/4,0",
    "0,0,-1/2,0,0,0,0,0",
    "1/2,0,0,0,0,0,0,0",
    "0,0,0,0,r2/4,0,r6/4,0",
    "0,0,0,0,0,r2/4,0,r6/4",
    "0,0,0,-1/2,0,0,0,0",
    "0,1/2,0,0,0,0,0,0",
    "0,0,0,0,0,r2/4,0,r6/4",
])

_V3 = _sparse(16, [
    {0: "1"}, {4: "-1/2", 8: "r3/2"}, {1: "1"}, {5: "-1/2", 9: "r3/2"},
    {10: "1"}, {4: "-r3/2", 8: "-1/2"}, {11: "1"}, {5: "-r3/2", 9: "-1/2"},
    {2: "1"}, {6: "-1/2", 12: "r3/2"}, {3: "1"}, {7: "-1/2", 13: "r3/2"},
    {14: "1"}, {6: "-r3/2", 12: "-1/2"}, {15: "1"}, {7: "-r3/2", 13: "-1/2"},
])

_V4_ROWS = [
    {2: "-1/2", 5: "-r3/3", 6: "r3/6", 8: "1/2", 12: "r3/6"},
    {3: "-1/2", 7: "-r3/6", 9: "1/2", 13: "-r3/6", 14: "r3/3"},
    {2: "r3/6", 5: "-r2/3-1/3", 6: "1/6-r2/3", 8: "-r3/6", 12: "1/6-r2/3"},
    {3: "-r3/6", 7: "1/6-r2/3", 9: "r3/6", 13: "1/6-r2/3", 14: "-r2/3-1/3"},
    {1: "-1/3+r2/3", 2: "1/6+r2/3", 6: "-r3/6", 8: "1/6+r2/3", 12: "r3/6"},
    {3: "1/6+r2/3", 7: "r3/6", 9: "1/6+r2/3", 10: "-1/3+r2/3", 13: "-r3/6"},
    {3: "r6/6", 7: "-1/3-r2/6", 9: "-r6/6", 13: "-1/3-r2/6", 14: "-1/3+r2/3"},
    {15: "-1"},
    {4: "-1"},
    {2: "-r6/6", 5: "-1/3+r2/3", 6: "-1/3-r2/6", 8: "r6/6", 12: "-1/3-r2/6"},
    {3: "1/3-r2/6", 7: "-r6/6", 9: "1/3-r2/6", 10: "1/3+r2/3", 13: "r6/6"},
    {11: "1"},
    {0: "-1"},
    {1: "-r2/3-1/3", 2: "-1/3+r2/6", 6: "-r6/6", 8: "-1/3+r2/6", 12: "r6/6"},
    {1: "1/3", 2: "-1/6", 6: "-r3/6", 8: "-1/6", 12: "r3/6"},
    {3: "-1/6", 7: "r3/6", 9: "-1/6", 10: "1/3", 13: "-r3/6"},
    {3: "-r2/6", 7: "r6/6", 9: "-r2/6", 10: "r2/3", 13: "-r6/6"},
    {},
    {},
    {1: "r2/3", 2: "-r2/6", 6: "-r6/6", 8: "-r2/6", 12: "r6/6"},
]
_V4 = _sparse(16, _V4_ROWS)

# four extra columns completing V4 to a 20x20 unitary
_U4_EXTRA = {14: {19: "-r6/3"}, 15: {16: "-r6/3"}, 16: {16: "r3/3"},
             17: {17: "1"}, 18: {18: "1"}, 19: {19: "r3/3"}}
_U4 = _sparse(20, [{**row, **_U4_EXTRA.get(i, {})} for i, row in enumerate(_V4_ROWS)])

_U41 = _dense([
    "0,-1/2,-r3/3,r3/6,1/2,r3/6,0,0",
    "0,r3/6,-r2/3-1/3,1/6-r2/3,-r3/6,1/6-r2/3,0,0",
    "-1/3+r2/3,1/6+r2/3,0,-r3/6,1/6+r2/3,r3/6,0,0",
    "0,-r6/6,-1/3+r2/3,-1/3-r2/6,r6/6,-1/3-r2/6,0,0",
    "0,0,0,0,0,0,0,-1",
    "-r2/3-1/3,-1/3+r2/6,0,-r6/6,-1/3+r2/6,r6/6,0,0",
    "1/3,-1/6,0,-r3/6,-1/6,r3/6,-r6/3,0",
    "r2/3,-r2/6,0,-r6/6,-r2/6,r6/6,r3/3,0",
])

_U42 = _dense([
    "0,-1/2,r3/3,-r3/6,1/2,-r3/6,0,0",
    "0,-r3/6,-r2/3-1/3,1/6-r2/3,r3/6,1/6-r2/3,0,0",
    "-1/3+r2/3,1/6+r2/3,0,r3/6,1/6+r2/3,-r3/6,0,0",
    "0,r6/6,-1/3+r2/3,-1/3-r2/6,-r6/6,-1/3-r2/6,0,0",
    "0,0,0,0,0,0,0,-1",
    "1/3+r2/3,1/3-r2/6,0,-r6/6,1/3-r2/6,r6/6,0,0",
    "1/3,-1/6,0,r3/6,-1/6,-r3/6,-r6/3,0",
    "r2/3,-r2/6,0,r6/6,-r2/6,-r6/6,r3/3,0",
])

_U43 = _dense(["-1,0,0,0", "0,1,0,0", "0,0,1,0", "0,0,0,1"])

_TABLE = {"V1": _V1, "V2": _V2, "V3": _V3, "V4": _V4, "U4": _U4,
          "U41": _U41, "U42": _U42, "U43": _U43}
ISOMETRIES = ("V1", "V2", "V3", "V4")
UNITARIES = ("U4", "U41", "U42", "U43")

# Row and column orders taking U4 to diag(U41, U42, U43):
#   U4[U4_ROW_ORDER][:, U4_COL_ORDER] == block_diag(U41, U42, U43)
# found by ``find_block_permutation`` and frozen here.
U4_ROW_ORDER = (0, 2, 4, 9, 7, 13, 14, 19, 1, 3, 5, 6, 8, 10, 15, 16, 12, 11, 17, 18)
U4_COL_ORDER = (1, 2, 5, 6, 8, 12, 19, 15, 10, 3, 14, 7, 9, 13, 16, 4, 0, 11, 17, 18)


@dataclass(frozen=True)
class IsometryConstant:
    name: str
    matrix: np.ndarray

    @property
    def shape(self) -> tuple[int, int]:
        return self.matrix.shape

    def isometry_residual(self) -> float:
        v = self.matrix
        return float(np.abs(v.conj().T @ v - np.eye(v.shape[1])).max())

    def unitarity_residual(self) -> float:
        v = self.matrix
        if v.shape[0] != v.shape[1]:
            return float("inf")
        return max(self.isometry_residual(), float(np.abs(v @ v.conj().T - np.eye(v.shape[0])).max()))


class TranscriptionError(ValueError):
    pass


def symbolic_matrix(name: str) -> sympy.Matrix:
    return sympy.Matrix([[_expr(e) for e in row] for row in _TABLE[name]])


def _numeric(name: str) -> np.ndarray:
    mat = np.array([[float(_expr(e)) for e in row] for row in _TABLE[name]])
    mat.setflags(write=False)
    return mat


@lru_cache(maxsize=None)
def load_constants() -> dict[str, IsometryConstant]:
    out = {name: IsometryConstant(name, _numeric(name)) for name in _TABLE}
    for name in ISOMETRIES:
        r = out[name].isometry_residual()
        if r > ISOMETRY_TOL:
            raise TranscriptionError(f"{name} is not an isometry (residual {r:.3e})")
    for name in UNITARIES:
        r = out[name].unitarity_residual()
        if r > ISOMETRY_TOL:
            raise TranscriptionError(f"{name} is not unitary (residual {r:.3e})")
    kraus = v4_kraus(out["V4"].matrix)
    comp = sum(k.conj().T @ k for k in kraus)
    if np.abs(comp - np.eye(16)).max() > ISOMETRY_TOL:
        raise TranscriptionError("V4 Kraus slices are not complete")
    return out


def v4_kraus(v4: np.ndarray | None = None) -> list[np.ndarray]:
    """Ten 2x16 Kraus operators: consecutive row pairs of V4.

    Row 2k + s of V4 is output qubit s with ancilla outcome k, i.e. the
    surviving system qubit is the least significant index.
    """
    if v4 is None:
        v4 = load_constants()["V4"].matrix
    return [np.asarray(v4[2 * k:2 * k + 2]) for k in range(v4.shape[0] // 2)]


def block_diag(*blocks: np.ndarray) -> np.ndarray:
    n = sum(b.shape[0] for b in blocks)
    out = np.zeros((n, n), dtype=np.result_type(*blocks))
    i = 0
    for b in blocks:
        k = b.shape[0]
        out[i:i + k, i:i + k] = b
        i += k
    return out


def find_block_permutation(u: np.ndarray, target: np.ndarray, tol: float = 1e-12):
    """Row order r and column order c with u[r][:, c] == target, or None.

    Backtracking over target rows; each row fixes or prunes the candidate
    source columns of the target columns it touches.
    """
    n = u.shape[0]
    sig_u = [np.sort(np.round(u[i], 10)) for i in range(n)]
    sig_t = [np.sort(np.round(target[i], 10)) for i in range(n)]
    row_cands = [[r for r in range(n) if np.allclose(sig_u[r], sig_t[i], atol=1e-9)] for i in range(n)]
    order = sorted(range(n), key=lambda i: len(row_cands[i]))

    def search(k, rows_used, col_cands):
        if k == n:
            cols = []
            for j in range(n):
                if len(col_cands[j]) != 1:
                    return None
                cols.append(next(iter(col_cands[j])))
            if len(set(cols)) != n:
                return None
            return cols
        i = order[k]
        for r in row_cands[i]:
            if r in rows_used:
                continue
            new = []
            ok = True
            for j in range(n):
                cand = {c for c in col_cands[j] if abs(u[r, c] - target[i, j]) < tol}
                if not cand:
                    ok = False
                    break
                new.append(cand)
            if not ok:
                continue
            res = search(k + 1, rows_used | {r}, new)
            if res is not None:
                return res
        return None

    def _finish(cols):
        rows = []
        for i in range(n):
            match = [r for r in range(n) if all(abs(u[r, cols[j]] - target[i, j]) < tol for j in range(n))]
            if not match:
                return None
            rows.append(match[0])
        return rows, cols

    cols = search(0, frozenset(), [set(range(n)) for _ in range(n)])
    res = None if cols is None else _finish(cols)
    if res is None:
        return None
    rows, cols = res
    if len(set(rows)) != n:
        return None
    return tuple(rows), tuple(cols)


def u4_block_form() -> np.ndarray:
    c = load_constants()
    return block_diag(c["U41"].matrix, c["U42"].matrix, c["U43"].matrix)


def check_u4_permutation() -> bool:
    """Exact (bitwise) equality of the permuted U4 with diag(U41, U42, U43)."""
    u4 = load_constants()["U4"].matrix
    perm = u4[list(U4_ROW_ORDER)][:, list(U4_COL_ORDER)]
    return bool(np.array_equal(perm, u4_block_form()))


def export_text(path=None) -> str:
    """All constants as plain text: name, shape, then rows of %.17g values."""
    lines = []
    for name, const in load_constants().items():
        m = const.matrix
        lines.append(f"# {name} {m.shape[0]} {m.shape[1]}")
        for row in m:
            lines.append(" ".join(f"{x:.17g}" for x in row))
    lines.append(f"# U4_ROW_ORDER {' '.join(map(str, U4_ROW_ORDER))}")
    lines.append(f"# U4_COL_ORDER {' '.join(map(str, U4_COL_ORDER))}")
    text = "\n".join(lines) + "\n"
    if path is not None:
        with open(path, "w") as fh:
            fh.write(text)
    return text
