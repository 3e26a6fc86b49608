"""Primal-dual interior-point method for dense block SDPs.

Internally the problem is put in the standard minimization form

    min <C, X>  s.t.  A(X) = b, X >= 0        (C = -Omega)
    max b.y     s.t.  Z = C - A*(y) >= 0,

and solved with Nesterov-Todd scaling, a dense Schur complement and a
Mehrotra predictor-corrector step.  Starting points are infeasible.

Nesterov-Todd scaling per block: with X = L1 L1^H, Z = L2 L2^H and the SVD
L2^H L1 = U diag(lam) V^H, the matrix R = L1 V diag(lam)^{-1/2} satisfies
R^{-1} X R^{-H} = R^H Z R = diag(lam).
"""
from __future__ import annotations

import numpy as np
import scipy.linalg

from .problem import SdpProblem, SdpSolution
from .svec import smat, svec

STEP_FRACTION = 0.98
RANK_TOL = 1e-10
# an iterate this many times looser than tol is reported as near_optimal when progress stalls
NEAR_OPTIMAL_FACTOR = 1e3
STALL_ITERATIONS = 5


class SolverError(RuntimeError):
    pass


def reduce_rows(A: np.ndarray, b: np.ndarray, tol: float = RANK_TOL):
    """Drop linearly dependent equality rows; report inconsistency.

    Returns (kept row indices, consistent flag, rank).
    """
    m = A.shape[0]
    if m == 0:
        return np.arange(0), True, 0
    _, r, piv = scipy.linalg.qr(A.T, mode="economic", pivoting=True)
    diag = np.abs(np.diag(r))
    rank = int(np.sum(diag > tol * diag[0])) if diag.size and diag[0] > 0 else 0
    keep = np.sort(piv[:rank])
    consistent = True
    if rank < m:
        x, *_ = np.linalg.lstsq(A[keep], b[keep], rcond=None)
        resid = np.abs(A @ x - b).max()
        consistent = bool(resid <= 1e-8 * (1 + np.abs(b).max()))
    return keep, consistent, rank


def _chol(x: np.ndarray) -> np.ndarray:
    try:
        return np.linalg.cholesky(x)
    except np.linalg.LinAlgError:
        w, v = np.linalg.eigh(x)
        w = np.maximum(w, 1e-300)
        q, r = np.linalg.qr((v * np.sqrt(w)).conj().T)
        return r.conj().T


def _max_step(lam: np.ndarray, dt: np.ndarray) -> float:
    """Largest alpha with diag(lam) + alpha * dt >= 0."""
    s = 1 / np.sqrt(lam)
    m = dt * s[:, None] * s[None, :]
    mn = np.linalg.eigvalsh((m + m.conj().T) / 2)[0]
    return np.inf if mn >= 0 else -1 / mn


class _Blocks:
    """Per-block data of the standard-form problem."""

    def __init__(self, p: SdpProblem, A: np.ndarray):
        self.p = p
        self.sizes = [blk.size for blk in p.blocks]
        self.cplx = [blk.complex for blk in p.blocks]
        self.offs = p.offsets
        self.lens = [blk.length for blk in p.blocks]
        self.A = A
        self.Amats = [smat(A[:, o:o + L], n, c) for o, L, n, c in zip(self.offs, self.lens, self.sizes, self.cplx)]

    def vec(self, mats):
        return np.concatenate([svec(m, c) for m, c in zip(mats, self.cplx)])

    def adjoint(self, y):
        """A*(y) as a list of block matrices."""
        v = self.A.T @ y
        return [smat(v[o:o + L], n, c) for o, L, n, c in zip(self.offs, self.lens, self.sizes, self.cplx)]


def solve(p: SdpProblem, tol: float = 1e-9, max_iter: int = 150, verbose: bool = False) -> SdpSolution:
    """Maximize sum_b tr[Omega_b X_b] + constant subject to A svec(X) = b, X >= 0."""
    keep, consistent, rank = reduce_rows(p.A, p.b)
    info = {"rows": int(p.A.shape[0]), "rank": rank}
    nblk = len(p.blocks)
    if not consistent:
        zero = [np.zeros((blk.size, blk.size)) for blk in p.blocks]
        return SdpSolution("infeasible", np.nan, np.nan, zero, np.zeros(len(p.b)), zero,
                           np.inf, np.inf, 0, info)
    A = p.A[keep]
    b = p.b[keep]
    m = len(b)
    blk = _Blocks(p, A)
    C = [-np.asarray(om, dtype=complex if c else float) for om, c in zip(p.objective, blk.cplx)]
    N = sum(blk.sizes)

    # starting point in the style of SDPT3
    normA = [np.linalg.norm(A[:, o:o + L], axis=1) for o, L in zip(blk.offs, blk.lens)]
    xi, eta = [], []
    for k, n in enumerate(blk.sizes):
        na = normA[k] if m else np.zeros(1)
        xi.append(max(10.0, np.sqrt(n), n * np.max((1 + np.abs(b)) / (1 + na)) if m else 10.0))
        eta.append(max(10.0, np.sqrt(n), np.max(na) if m else 0.0, np.linalg.norm(C[k])))
    X = [x * np.eye(n) for x, n in zip(xi, blk.sizes)]
    Z = [e * np.eye(n) for e, n in zip(eta, blk.sizes)]
    y = np.zeros(m)
    normb = 1 + np.abs(b).max(initial=0.0)
    normC = 1 + max(np.abs(c).max() for c in C)

    status = "max_iter"
    it = 0
    best = (np.inf, None)
    since_best = 0
    for it in range(1, max_iter + 1):
        AX = A @ blk.vec(X) if m else np.zeros(0)
        rp = b - AX
        Aty = blk.adjoint(y) if m else [np.zeros_like(c) for c in C]
        Rd = [c - a - z for c, a, z in zip(C, Aty, Z)]
        pobj = sum(np.trace(c @ x).real for c, x in zip(C, X))
        dobj = float(b @ y)
        gap = sum(np.trace(x @ z).real for x, z in zip(X, Z))
        mu = gap / N
        pinf = np.abs(rp).max(initial=0.0) / normb
        dinf = max(np.abs(r).max() for r in Rd) / normC
        relgap = abs(pobj - dobj) / (1 + abs(pobj) + abs(dobj))
        if verbose:
            print(f"{it:3d} p={pobj:+.10e} d={dobj:+.10e} gap={relgap:.2e} pinf={pinf:.2e} dinf={dinf:.2e}")
        if pinf < tol and dinf < tol and relgap < tol and gap / (1 + abs(pobj) + abs(dobj)) < 10 * tol:
            status = "optimal"
            break
        if not np.isfinite(pobj) or not np.isfinite(dobj):
            status = "numerical"
            break
        merit = max(pinf, dinf, relgap)
        if merit < best[0]:
            best = (merit, ([x.copy() for x in X], y.copy(), [z.copy() for z in Z]))
            since_best = 0
        else:
            since_best += 1
            if since_best >= STALL_ITERATIONS:
                status = "stalled"
                break
        if np.linalg.norm(y) > 1e12 and dinf < tol:
            status = "primal_infeasible"
            break
        if max(np.abs(x).max() for x in X) > 1e12 and pinf < tol:
            status = "dual_infeasible"
            break

        # Nesterov-Todd scaling
        Rs, lams = [], []
        for x, z in zip(X, Z):
            l1, l2 = _chol(x), _chol(z)
            u, s, vh = np.linalg.svd(l2.conj().T @ l1)
            if s[-1] <= 0 or not np.all(np.isfinite(s)):
                break
            r = l1 @ vh.conj().T / np.sqrt(s)[None, :]
            Rs.append(r)
            lams.append(s)
        if len(Rs) < nblk:
            status = "numerical"
            break
        # scaled constraint matrices and Schur complement
        At_rows = []
        for k in range(nblk):
            r = Rs[k]
            at = r.conj().T @ blk.Amats[k] @ r
            At_rows.append(svec(at, blk.cplx[k]))
        Atil = np.concatenate(At_rows, axis=1) if m else np.zeros((0, blk.offs[-1] + blk.lens[-1]))
        M = Atil @ Atil.T
        if not np.all(np.isfinite(M)):
            status = "numerical"
            break
        try:
            factor = scipy.linalg.cho_factor(M)
        except np.linalg.LinAlgError:
            reg = 1e-13 * max(1.0, np.trace(M) / max(m, 1))
            try:
                factor = scipy.linalg.cho_factor(M + reg * np.eye(m))
            except np.linalg.LinAlgError:
                status = "numerical"
                break
        Rdt = [r.conj().T @ rd @ r for r, rd in zip(Rs, Rd)]

        def direction(T):
            D = [2 * t / (l[:, None] + l[None, :]) for t, l in zip(T, lams)]
            vD = np.concatenate([svec(d - rdt, c) for d, rdt, c in zip(D, Rdt, blk.cplx)])
            rhs = rp - Atil @ vD
            dy = scipy.linalg.cho_solve(factor, rhs) if m else np.zeros(0)
            v = Atil.T @ dy if m else np.zeros(vD.shape)
            dZt, dXt = [], []
            for k in range(nblk):
                o, L, n, c = blk.offs[k], blk.lens[k], blk.sizes[k], blk.cplx[k]
                dz = Rdt[k] - smat(v[o:o + L], n, c)
                dZt.append(dz)
                dXt.append(D[k] - dz)
            return dy, dXt, dZt

        def steps(dXt, dZt):
            ap = min(_max_step(l, d) for l, d in zip(lams, dXt))
            ad = min(_max_step(l, d) for l, d in zip(lams, dZt))
            return min(1.0, STEP_FRACTION * ap), min(1.0, STEP_FRACTION * ad)

        # predictor
        T = [-np.diag(l ** 2) for l in lams]
        dy_a, dXa, dZa = direction(T)
        ap, ad = steps(dXa, dZa)
        mu_aff = sum(np.trace((np.diag(l) + ap * dx) @ (np.diag(l) + ad * dz)).real
                     for l, dx, dz in zip(lams, dXa, dZa)) / N
        sigma = min(1.0, max(0.0, (mu_aff / mu) ** 3)) if mu > 0 else 0.0
        # corrector
        T = []
        for l, dx, dz in zip(lams, dXa, dZa):
            prod = dx @ dz
            T.append(sigma * mu * np.eye(len(l)) - np.diag(l ** 2) - (prod + prod.conj().T) / 2)
        dy, dXt, dZt = direction(T)
        ap, ad = steps(dXt, dZt)
        for k in range(nblk):
            r = Rs[k]
            dx = r @ dXt[k] @ r.conj().T
            X[k] = X[k] + ap * (dx + dx.conj().T) / 2
        if m:
            y = y + ad * dy
        dAty = blk.adjoint(dy) if m else [0 * z for z in Z]
        for k in range(nblk):
            dz = Rd[k] - dAty[k]
            Z[k] = Z[k] + ad * dz

    if status != "optimal" and best[1] is not None and best[0] < NEAR_OPTIMAL_FACTOR * tol:
        X, y, Z = best[1]
        status = "near_optimal"
    # report in the maximization convention
    AX = A @ blk.vec(X) if m else np.zeros(0)
    Aty = blk.adjoint(y) if m else [np.zeros_like(c) for c in C]
    Rd = [c - a - z for c, a, z in zip(C, Aty, Z)]
    full_y = np.zeros(len(p.b))
    full_y[keep] = -y
    primal = -sum(np.trace(c @ x).real for c, x in zip(C, X)) + p.constant
    dual = -float(b @ y) + p.constant
    # Z = C - A*(y_internal) is also the slack sum_i y_i A_i - Omega of the max form
    return SdpSolution(
        status, float(primal), float(dual), [np.asarray(x) for x in X], full_y, [np.asarray(z) for z in Z],
        float(np.abs(b - AX).max(initial=0.0)), float(max(np.abs(r).max() for r in Rd)), it, info)
