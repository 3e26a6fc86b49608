import numpy as np
import pytest
import sympy

from qpurify.channels import channel_fidelity, effective_channel, haar_unitary, noisy_unitary_choi
from qpurify.circuits.constants import (
    ISOMETRIES,
    U4_COL_ORDER,
    U4_ROW_ORDER,
    UNITARIES,
    block_diag,
    check_u4_permutation,
    export_text,
    find_block_permutation,
    load_constants,
    symbolic_matrix,
    u4_block_form,
    v4_kraus,
)
from qpurify.circuits.protocol import ProtocolError, protocol_as_strategy, run_protocol
from qpurify.strategies import check_strategy, constraints_for
from qpurify.theorems import optimal_fidelity_3slot


def test_shapes():
    c = load_constants()
    # [PAPER] stage widths 1 -> 3 -> 4 -> 4 qubits, then a 20-row final isometry
    assert c["V1"].shape == (8, 2)
    assert c["V2"].shape == (16, 8)
    assert c["V3"].shape == (16, 16)
    assert c["V4"].shape == (20, 16)
    assert c["U4"].shape == (20, 20)


def test_residuals():
    c = load_constants()
    for name in ISOMETRIES:
        assert c[name].isometry_residual() < 1e-12
    for name in UNITARIES:
        assert c[name].unitarity_residual() < 1e-12


@pytest.mark.parametrize("name", ISOMETRIES + UNITARIES)
def test_exact_isometry(name):
    m = symbolic_matrix(name)
    gram = sympy.simplify(m.T * m - sympy.eye(m.shape[1]))
    assert gram == sympy.zeros(m.shape[1], m.shape[1])


def test_u4_block_permutation():
    assert check_u4_permutation()
    u4 = load_constants()["U4"].matrix
    found = find_block_permutation(u4, u4_block_form())
    assert found is not None
    rows, cols = found
    assert np.array_equal(u4[list(rows)][:, list(cols)], u4_block_form())
    assert sorted(U4_ROW_ORDER) == list(range(20)) and sorted(U4_COL_ORDER) == list(range(20))


def test_find_block_permutation_recovers_shuffle():
    rng = np.random.default_rng(3)
    target = block_diag(np.array([[0.6, 0.8], [-0.8, 0.6]]), np.array([[1.0]]), np.array([[0.0, 1.0], [1.0, 0.0]]))
    r, c = rng.permutation(5), rng.permutation(5)
    shuffled = np.empty_like(target)
    shuffled[np.ix_(r, c)] = target
    rows, cols = find_block_permutation(shuffled, target)
    assert np.array_equal(shuffled[list(rows)][:, list(cols)], target)


def test_v4_kraus_complete():
    ks = v4_kraus()
    assert len(ks) == 10
    assert np.abs(sum(k.conj().T @ k for k in ks) - np.eye(16)).max() < 1e-12


def test_export_text_roundtrip(tmp_path):
    path = tmp_path / "c.txt"
    text = export_text(path)
    assert path.read_text() == text
    mats, cur = {}, None
    for line in text.splitlines():
        if line.startswith("# U4_"):
            continue
        if line.startswith("# "):
            cur = line.split()[1]
            mats[cur] = []
        else:
            mats[cur].append([float(x) for x in line.split()])
    for name, const in load_constants().items():
        assert np.array_equal(np.array(mats[name]), const.matrix)


@pytest.mark.parametrize("gamma", [0.0, 0.25, 0.5, 0.8, 1.0])
def test_protocol_fidelity_is_closed_form(gamma):
    rng = np.random.default_rng(11)
    fids = [channel_fidelity(run_protocol(u, gamma), u) for u in (haar_unitary(rng) for _ in range(10))]
    assert max(abs(f - optimal_fidelity_3slot(gamma)) for f in fids) < 1e-10


def test_protocol_output_is_channel():
    u = haar_unitary(np.random.default_rng(2))
    run_protocol(u, 0.4).validate(1e-10)


def test_protocol_rejects_non_unitary():
    with pytest.raises(ProtocolError):
        run_protocol(np.ones((2, 2)), 0.1)


def test_comb_is_sequential_and_matches_simulation():
    comb = protocol_as_strategy()
    assert check_strategy(comb, constraints_for("sequential", 3), tol=1e-10).ok
    rng = np.random.default_rng(5)
    for gamma in (0.2, 0.7):
        u = haar_unitary(rng)
        via_links = effective_channel(comb, noisy_unitary_choi(u, gamma), 3)
        via_circuit = run_protocol(u, gamma)
        assert via_links.op.allclose(via_circuit.op, 1e-11)
