import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from qpurify.strategies import (
    KINDS,
    check_strategy,
    constraints_for,
    pauli_allowed_mask,
    pauli_coefficients,
    pauli_reconstruct,
    project_affine,
    slot_permutation,
    apply_slot_permutation,
    strategy_systems,
    symmetrize,
    trivial_strategy,
    wire_strategy,
)
from qpurify.tensor import (
    LabeledOperator,
    SystemLabel,
    link_product,
    partial_trace,
    permute_systems,
    trace_and_replace,
)

from conftest import random_hermitian, random_unitary


def iso_choi(v, outs, ins):
    vec = v.reshape(-1)
    return LabeledOperator(list(outs) + list(ins), np.outer(vec, vec.conj()))


def random_isometry(rng, dout, din):
    return random_unitary(rng, dout)[:, :din]


def S(name, d=2):
    return SystemLabel(name, d)


def random_sequential_comb(rng):
    """P -> (I1, M1); (O1, M1) -> (I2, M2); (O2, M2) -> (F, E) with E discarded."""
    a = iso_choi(random_isometry(rng, 4, 2), [S("I1"), S("M1")], [S("P")])
    b = iso_choi(random_isometry(rng, 4, 4), [S("I2"), S("M2")], [S("O1"), S("M1")])
    c = iso_choi(random_isometry(rng, 8, 4), [S("F"), S("E", 4)], [S("O2"), S("M2")])
    c = partial_trace(c, ["E"])
    return permute_systems(link_product(link_product(a, b), c), strategy_systems(2))


def random_parallel_comb(rng):
    """P -> (I1, I2, M); (O1, O2, M) -> (F, E) with E discarded."""
    a = iso_choi(random_isometry(rng, 8, 2), [S("I1"), S("I2"), S("M")], [S("P")])
    c = iso_choi(random_isometry(rng, 16, 8), [S("F"), S("E", 8)], [S("O1"), S("O2"), S("M")])
    c = partial_trace(c, ["E"])
    return permute_systems(link_product(a, c), strategy_systems(2))


def ico_conditions_two_slot(c):
    """The four operator identities of a two-slot ICO process, written out directly."""
    t = trace_and_replace
    return [
        t(c, ["I1", "O1", "F"]) - t(c, ["I1", "O1", "O2", "F"]),
        t(c, ["I2", "O2", "F"]) - t(c, ["O1", "I2", "O2", "F"]),
        t(c, ["I1", "O1", "I2", "O2", "F"]) - t(c, ["P", "I1", "O1", "I2", "O2", "F"]),
        t(c, ["F"]) + t(c, ["O1", "O2", "F"]) - t(c, ["O1", "F"]) - t(c, ["O2", "F"]),
    ]


def test_strategy_systems():
    assert strategy_systems(2) == ["P", "I1", "O1", "I2", "O2", "F"]
    with pytest.raises(ValueError):
        strategy_systems(0)
    with pytest.raises(ValueError):
        constraints_for("causal", 2)


def test_allowed_counts_and_inclusion():
    masks = {k: pauli_allowed_mask(constraints_for(k, 2)) for k in KINDS}
    # [DERIVED] counts of Pauli strings left free by each class (4^6 = 4096 total)
    assert masks["parallel"].sum() == 3133
    assert masks["sequential"].sum() == 3277
    assert masks["ico"].sum() == 3421
    assert not np.any(masks["parallel"] & ~masks["sequential"])
    assert not np.any(masks["sequential"] & ~masks["ico"])


def test_ico_mask_matches_direct_conditions():
    # apply the directly written identities to every Pauli string: each one is either
    # killed by all conditions (free) or violates one of them
    systems = strategy_systems(2)
    mask = pauli_allowed_mask(constraints_for("ico", 2))
    paulis = [np.eye(2), np.array([[0, 1], [1, 0]]), np.array([[0, -1j], [1j, 0]]), np.diag([1, -1])]
    rng = np.random.default_rng(0)
    for idx in rng.choice(4 ** 6, 300, replace=False):
        digits = np.unravel_index(idx, (4,) * 6)
        mat = paulis[digits[0]]
        for d in digits[1:]:
            mat = np.kron(mat, paulis[d])
        c = LabeledOperator(systems, mat)
        free = all(np.abs(r.matrix).max() < 1e-12 for r in ico_conditions_two_slot(c))
        assert free == bool(mask[idx]) or idx == 0


def test_random_combs_feasibility(rng):
    seq = random_sequential_comb(rng)
    par = random_parallel_comb(rng)
    assert check_strategy(seq, constraints_for("sequential", 2)).ok
    assert check_strategy(seq, constraints_for("ico", 2)).ok
    assert not check_strategy(seq, constraints_for("parallel", 2)).ok
    for kind in KINDS:
        assert check_strategy(par, constraints_for(kind, 2)).ok
    assert max(np.abs(r.matrix).max() for r in ico_conditions_two_slot(seq)) < 1e-12


def test_trivial_and_wire():
    for n in (1, 2, 3):
        for kind in KINDS:
            assert check_strategy(trivial_strategy(n), constraints_for(kind, n)).ok
    assert check_strategy(wire_strategy(2), constraints_for("sequential", 2)).ok
    assert check_strategy(wire_strategy(2), constraints_for("ico", 2)).ok
    assert not check_strategy(wire_strategy(2), constraints_for("parallel", 2)).ok


def test_pauli_roundtrip(rng):
    x = random_hermitian(rng, 16)
    coefs = pauli_coefficients(x, 4)
    assert np.abs(coefs.imag).max() < 1e-12
    assert np.abs(pauli_reconstruct(coefs, 4) - x).max() < 1e-12


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 2 ** 31 - 1), st.sampled_from(KINDS))
def test_projection_satisfies_equalities(seed, kind):
    rng = np.random.default_rng(seed)
    s = constraints_for(kind, 2)
    c = LabeledOperator(s.systems, random_hermitian(rng, 64))
    proj = project_affine(c, s)
    rep = check_strategy(proj, s)
    assert rep.max_residual < 1e-10
    assert rep.trace_residual < 1e-10
    # idempotent
    assert project_affine(proj, s).allclose(proj, 1e-10)


def test_slot_permutation_group():
    p12 = slot_permutation((2, 1, 3))
    p23 = slot_permutation((1, 3, 2))
    for p in (p12, p23):
        assert np.abs(p.matrix @ p.matrix.T - np.eye(256)).max() == 0
    cyc = slot_permutation((2, 3, 1))
    prod = p12.matrix @ p23.matrix
    assert any(np.abs(prod - q.matrix).max() == 0 for q in (cyc, slot_permutation((3, 1, 2))))


def test_slot_permutation_moves_labels(rng):
    # swapping slots of a product over slots swaps the factors
    a, b = random_hermitian(rng, 4), random_hermitian(rng, 4)
    pf = random_hermitian(rng, 4)
    c = permute_systems(LabeledOperator(["I1", "O1", "I2", "O2", "P", "F"],
                                        np.kron(np.kron(a, b), pf)), strategy_systems(2))
    swapped = apply_slot_permutation(c, slot_permutation((2, 1)))
    expect = permute_systems(LabeledOperator(["I1", "O1", "I2", "O2", "P", "F"],
                                             np.kron(np.kron(b, a), pf)), strategy_systems(2))
    assert swapped.allclose(expect, 1e-13)


def test_symmetrize_preserves_ico(rng):
    s = constraints_for("ico", 2)
    c = symmetrize(random_sequential_comb(rng), 2)
    assert check_strategy(c, s).ok
    for pi in itertools.permutations((1, 2)):
        assert apply_slot_permutation(c, slot_permutation(pi)).allclose(c, 1e-12)
