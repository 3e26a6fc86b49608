import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from qpurify.channels import gate_set
from qpurify.sdp.compile import (
    compile_dense,
    compile_full,
    compile_reduced,
    full_problem,
    reduced_problem,
)
from qpurify.sdp.problem import Block, ConstraintBuilder, SdpProblem, dump_problem, dump_solution
from qpurify.sdp.solver import reduce_rows, solve
from qpurify.sdp.svec import smat, svec, svec_length
from qpurify.strategies import KINDS, check_strategy, constraints_for
from qpurify.symmetry.blocks import block_embed, block_traces, build_block_structure
from qpurify.symmetry.frames import ico_relation_residuals, to_reference_frame
from qpurify.symmetry.haar import performance_operator
from qpurify.tensor import LabeledOperator, permute_systems

from conftest import random_hermitian

cvxpy = pytest.importorskip("cvxpy")


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 2 ** 31 - 1), st.integers(1, 7), st.booleans())
def test_svec_isometry(seed, n, cplx):
    rng = np.random.default_rng(seed)
    x, y = random_hermitian(rng, n), random_hermitian(rng, n)
    if not cplx:
        x, y = x.real, y.real
    vx, vy = svec(x, cplx), svec(y, cplx)
    assert len(vx) == svec_length(n, cplx)
    assert abs(vx @ vy - np.trace(x @ y).real) < 1e-10
    assert np.abs(smat(vx, n, cplx) - x).max() < 1e-14


def test_largest_eigenvalue(rng):
    om = random_hermitian(rng, 6)
    cb = ConstraintBuilder([Block("X", 6)])
    cb.add({0: np.eye(6)}, 1.0)
    a, b = cb.matrix()
    sol = solve(SdpProblem([Block("X", 6)], [om], a, b))
    assert sol.ok
    lam = np.linalg.eigvalsh(om)[-1]
    assert abs(sol.primal_value - lam) < 1e-8
    assert abs(sol.dual_value - lam) < 1e-8
    assert sol.min_eigenvalue() > -1e-10


def random_problem(rng, sizes, m):
    blocks = [Block(f"B{i}", n) for i, n in enumerate(sizes)]
    feas = [random_hermitian(rng, n) for n in sizes]
    feas = [f @ f + np.eye(len(f)) for f in feas]
    cb = ConstraintBuilder(blocks)
    for _ in range(m):
        coeffs = {i: random_hermitian(rng, n) for i, n in enumerate(sizes)}
        rhs = sum(np.trace(coeffs[i] @ feas[i]).real for i in coeffs)
        cb.add(coeffs, rhs)
    # a trace bound keeps the problem bounded
    cb.add({i: np.eye(n) for i, n in enumerate(sizes)}, sum(np.trace(f).real for f in feas))
    a, b = cb.matrix()
    om = [random_hermitian(rng, n) for n in sizes]
    return SdpProblem(blocks, om, a, b), cb


def cvxpy_value(p: SdpProblem, cb: ConstraintBuilder):
    xs = [cvxpy.Variable((blk.size, blk.size), hermitian=True) for blk in p.blocks]
    cons = [x >> 0 for x in xs]
    for row, rhs in zip(cb.rows, cb.rhs):
        expr = 0
        o = 0
        for blk, x in zip(p.blocks, xs):
            m = smat(row[o:o + blk.length], blk.size, True)
            expr = expr + cvxpy.real(cvxpy.trace(m @ x))
            o += blk.length
        cons.append(expr == rhs)
    obj = sum(cvxpy.real(cvxpy.trace(om @ x)) for om, x in zip(p.objective, xs))
    prob = cvxpy.Problem(cvxpy.Maximize(obj), cons)
    prob.solve(solver="CLARABEL")
    return prob.value


@pytest.mark.parametrize("seed", [0, 1, 2])
def test_against_cvxpy(seed):
    rng = np.random.default_rng(seed)
    p, cb = random_problem(rng, [3, 4], 5)
    sol = solve(p)
    assert sol.ok
    ref = cvxpy_value(p, cb)
    assert abs(sol.primal_value - ref) < 1e-6 * (1 + abs(ref))
    assert sol.primal_residual < 1e-8
    assert abs(sol.gap) < 1e-6


def test_inconsistent_is_infeasible():
    cb = ConstraintBuilder([Block("X", 2)])
    cb.add({0: np.eye(2)}, 1.0)
    cb.add({0: 2 * np.eye(2)}, 3.0)
    a, b = cb.matrix()
    sol = solve(SdpProblem([Block("X", 2)], [np.eye(2)], a, b))
    assert sol.status == "infeasible"
    assert not sol.ok


def test_reduce_rows_drops_duplicates():
    a = np.array([[1.0, 0, 0], [2.0, 0, 0], [0, 1.0, 0]])
    keep, consistent, rank = reduce_rows(a, np.array([1.0, 2.0, 0.0]))
    assert rank == 2 and consistent and len(keep) == 2


def test_problem_validation():
    with pytest.raises(ValueError):
        SdpProblem([Block("X", 2)], [np.array([[0, 1], [0, 0]])], np.zeros((0, 4)), np.zeros(0))
    with pytest.raises(ValueError):
        SdpProblem([Block("X", 2)], [np.eye(3)], np.zeros((0, 4)), np.zeros(0))


def test_dumps_are_plain_text():
    cb = ConstraintBuilder([Block("X", 2)])
    cb.add({0: np.eye(2)}, 1.0)
    a, b = cb.matrix()
    p = SdpProblem([Block("X", 2)], [np.diag([1.0, 2.0])], a, b, name="tiny")
    text = dump_problem(p)
    assert text.startswith("problem tiny")
    sol = solve(p)
    assert "status optimal" in dump_solution(sol)
    assert abs(sol.primal_value - 2) < 1e-8


@pytest.mark.parametrize("kind", KINDS)
def test_full_compile_matches_dense(kind):
    s = constraints_for(kind, 1)
    fast, dense = compile_full(s), compile_dense(s)
    # same affine space: stacking either system onto the other adds no rank
    both = np.vstack([fast.A, dense.A])
    assert np.linalg.matrix_rank(both, 1e-9) == fast.rank == dense.rank
    x = np.linalg.lstsq(dense.A, dense.b, rcond=None)[0]
    assert np.abs(fast.A @ x - fast.b).max() < 1e-10


@pytest.mark.parametrize("kind", KINDS)
def test_one_slot_gate_set_against_cvxpy(kind):
    s = constraints_for(kind, 1)
    om = permute_systems(performance_operator(0.4, 1, averaging=gate_set()).op, s.systems).matrix
    sol = solve(full_problem(om, s))
    assert sol.ok
    c = LabeledOperator(s.systems, sol.X[0])
    assert check_strategy(c, s, tol=1e-7).ok
    x = cvxpy.Variable((16, 16), hermitian=True)
    cons = [x >> 0]
    cc = compile_full(s)
    for row, rhs in zip(cc.A, cc.b):
        cons.append(cvxpy.real(cvxpy.trace(smat(row, 16, True) @ x)) == rhs)
    prob = cvxpy.Problem(cvxpy.Maximize(cvxpy.real(cvxpy.trace(om @ x))), cons)
    prob.solve(solver="CLARABEL")
    assert abs(prob.value - sol.primal_value) < 1e-6


def test_reduced_three_slot_counts():
    # [PAPER] 196 real parameters, 171 independent equalities, 25 free
    cc = compile_reduced("sequential", 3, symmetric=True, complex_blocks=True)
    assert cc.n_params == 196
    assert cc.rank == 171
    assert cc.free_dimension == 25


def test_reduced_ico_relations():
    cc = compile_reduced("ico", 2, complex_blocks=True)
    assert cc.n_params == 25
    assert cc.rank == 6
    rng = np.random.default_rng(4)
    x0 = np.linalg.lstsq(cc.A, cc.b, rcond=None)[0]
    null = np.linalg.svd(cc.A)[2][cc.rank:].T
    sizes = [blk.size for blk in cc.blocks]
    for _ in range(5):
        v = x0 + null @ rng.normal(size=null.shape[1])
        hs, o = [], 0
        for blk in cc.blocks:
            hs.append(smat(v[o:o + blk.length], blk.size, True))
            o += blk.length
        assert np.abs(ico_relation_residuals(to_reference_frame(hs))).max() < 1e-12
        assert [h.shape[0] for h in hs] == sizes
        # the lifted operator satisfies the unreduced constraints
        c = block_embed(hs, build_block_structure(2))
        assert check_strategy(c, constraints_for("ico", 2)).max_residual < 1e-10


def test_reduced_equals_full_two_slot():
    g = 0.45
    s = constraints_for("sequential", 2)
    om = performance_operator(g, 2)
    full = solve(full_problem(permute_systems(om.op, s.systems).matrix, s))
    red = solve(reduced_problem(block_traces(om.op, build_block_structure(2)), "sequential", 2))
    assert full.ok and red.ok
    assert abs(full.primal_value - red.primal_value) < 1e-7
    assert abs(full.primal_value - (1 - 0.75 * g)) < 1e-7
