"""Fixed change of multiplicity basis for the two-slot block structure.

Our multiplicity bases come from left-to-right Clebsch-Gordan coupling.  The
reference frame used for the hand reduction of the two-slot ICO problem
orders and phases the multiplicity vectors differently.  Per sector the two
frames differ by a monomial unitary T_k (a permutation times diagonal phases
in {1, -1, i, -i}), and reference blocks are T_k H_k T_k^dag.

In the reference frame the ICO equalities take the form

    H1[0,0] = (3 H0[3,3] - H0[0,0]) / 2
    H1[0,1] = (3 conj(H0[1,3]) - H0[0,2]) / 2
    H1[1,1] = (3 H0[1,1] - H0[2,2]) / 2
    H2[1,1] = (-2 H0[1,1] - 2 H0[3,3] + 1) / 4
    H3      = (-6 H0[1,1] - 6 H0[3,3] - 4 H2[0,0] + 3) / 8

and the irrep-traced offset performance blocks are real with a closed form
(``reference_omega_blocks``).
"""
from __future__ import annotations

import numpy as np


def _monomial(perm, phases) -> np.ndarray:
    return np.diag(np.asarray(phases, dtype=complex)) @ np.eye(len(perm))[list(perm)]


# sector order (jV, jW) = (1/2, 1/2), (1/2, 3/2), (3/2, 1/2), (3/2, 3/2)
TWO_SLOT_FRAME = (
    _monomial((3, 0, 1, 2), (-1, 1, 1j, 1j)),
    _monomial((1, 0), (1j, 1)),
    _monomial((1, 0), (1, 1)),
    np.eye(1, dtype=complex),
)


def to_reference_frame(blocks) -> list[np.ndarray]:
    return [t @ np.asarray(h) @ t.conj().T for t, h in zip(TWO_SLOT_FRAME, blocks)]


def from_reference_frame(blocks) -> list[np.ndarray]:
    return [t.conj().T @ np.asarray(h) @ t for t, h in zip(TWO_SLOT_FRAME, blocks)]


def ico_relation_residuals(blocks) -> np.ndarray:
    """Residuals of the five ICO equalities for blocks given in the reference frame."""
    h0, h1, h2, h3 = blocks
    return np.array([
        h1[0, 0] - (3 * h0[3, 3] - h0[0, 0]) / 2,
        h1[0, 1] - (3 * np.conj(h0[1, 3]) - h0[0, 2]) / 2,
        h1[1, 1] - (3 * h0[1, 1] - h0[2, 2]) / 2,
        h2[1, 1] - (-2 * h0[1, 1] - 2 * h0[3, 3] + 1) / 4,
        h3[0, 0] - (-6 * h0[1, 1] - 6 * h0[3, 3] - 4 * h2[0, 0] + 3) / 8,
    ])


def reference_omega_blocks(gamma: float) -> list[np.ndarray]:
    """Closed-form irrep-traced blocks of the two-slot offset performance operator.

    Returns [Omega_00, tr Omega_11, tr Omega_22, tr Omega_33] in the reference frame.
    """
    g = float(gamma)
    q = 1 - g
    w0 = np.zeros((4, 4))
    w0[0, 0] = -q * (3 * q * q + 1) / 6
    w0[0, 1] = w0[1, 0] = -q * (2 - g)
    w0[1, 1] = -1.5 * q * (3 * q * q + 1)
    w0[2, 2] = w0[3, 3] = -1.5 * g ** 3 + 4.5 * g * g - 3 * g
    w0[2, 3] = w0[3, 2] = q * g
    w1 = np.diag([-q * (3 * q * q + 13) / 3, -3 * q * (1 - q * q)])
    w3 = np.array([[-2 / 3 * q * (3 * q * q + 7)]])
    return [w0, w1, w1.copy(), w3]
