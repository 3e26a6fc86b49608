import numpy as np
import pytest

from qpurify.channels import gate_set, haar_unitary
from qpurify.strategies import trivial_strategy
from qpurify.symmetry.blocks import group_action
from qpurify.symmetry.haar import (
    QuadratureError,
    performance_operator,
    quadrature,
    su2_haar_moment,
)

from conftest import random_unitary


def sym_projector(k):
    """Projector onto the symmetric subspace of k qubits (Hamming-weight Dicke states)."""
    d = 2 ** k
    out = np.zeros((d, d))
    weights = [bin(i).count("1") for i in range(d)]
    for w in range(k + 1):
        v = np.array([1.0 if x == w else 0.0 for x in weights])
        v /= np.linalg.norm(v)
        out += np.outer(v, v)
    return out


def test_weights_and_nodes():
    for deg in (0, 2, 6, 8):
        w, nodes = quadrature(deg)
        assert abs(w.sum() - 1) < 1e-14
        for u in nodes[:: max(1, len(nodes) // 17)]:
            assert np.abs(u.conj().T @ u - np.eye(2)).max() < 1e-14
            assert abs(np.linalg.det(u) - 1) < 1e-14
    with pytest.raises(QuadratureError):
        quadrature(17)


@pytest.mark.parametrize("k", [1, 2, 3, 4])
def test_moment_of_entry(k):
    # |U_00|^2 = 1 - t with t uniform: E |U_00|^{2k} = 1 / (k + 1)
    val = su2_haar_moment(lambda u: np.array([[abs(u[0, 0]) ** (2 * k)]]), 2 * k)
    assert abs(val[0, 0] - 1 / (k + 1)) < 1e-14


def test_low_degree_is_not_exact():
    val = su2_haar_moment(lambda u: np.array([[abs(u[0, 0]) ** 8]]), 2)
    assert abs(val[0, 0] - 0.2) > 1e-4


@pytest.mark.parametrize("k", [1, 2, 3])
def test_symmetric_twirl(k):
    # E[U^{(x)k} |0..0><0..0| U^{dag (x)k}] = P_sym / (k + 1)
    d = 2 ** k
    rho = np.zeros((d, d))
    rho[0, 0] = 1.0

    def f(u):
        uk = u
        for _ in range(k - 1):
            uk = np.kron(uk, u)
        return uk @ rho @ uk.conj().T

    assert np.abs(su2_haar_moment(f, 2 * k) - sym_projector(k) / (k + 1)).max() < 1e-14


def test_first_moment_depolarizes(rng):
    x = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
    val = su2_haar_moment(lambda u: u @ x @ u.conj().T, 2)
    assert np.abs(val - np.trace(x) * np.eye(2) / 2).max() < 1e-14


def test_monte_carlo_agrees():
    rng = np.random.default_rng(9)
    f = lambda u: np.kron(u, u.conj()) @ np.diag([1.0, 0, 0, 0]) @ np.kron(u, u.conj()).conj().T  # noqa: E731
    exact = su2_haar_moment(f, 4)
    mc = np.mean([f(haar_unitary(rng)) for _ in range(20000)], axis=0)
    assert np.abs(exact - mc).max() < 0.01


@pytest.mark.parametrize("n", [1, 2, 3])
def test_performance_operator_trivial_value(n):
    for g in (0.0, 0.35, 1.0):
        fid = performance_operator(g, n)
        off = performance_operator(g, n, form="offset")
        c = trivial_strategy(n)
        assert abs(fid.value(c) - (1 - 0.75 * g)) < 1e-12
        assert abs(off.value(c)) < 1e-12
        assert fid.op.is_hermitian(1e-13)


def test_performance_operator_invariance(rng):
    om = performance_operator(0.3, 2).op.matrix
    for _ in range(20):
        g = group_action(random_unitary(rng, 2), random_unitary(rng, 2), 2)
        assert np.abs(g @ om @ g.conj().T - om).max() < 1e-10


def test_gate_set_average():
    op = performance_operator(0.2, 1, averaging=gate_set())
    assert op.averaging.startswith("gate_set")
    assert abs(op.value(trivial_strategy(1)) - 0.85) < 1e-12


def test_bad_arguments():
    with pytest.raises(ValueError):
        performance_operator(0.1, 4)
    with pytest.raises(ValueError):
        performance_operator(0.1, 2, form="other")
    with pytest.raises(ValueError):
        performance_operator(0.1, 2, averaging="uniform")
