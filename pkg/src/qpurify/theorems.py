"""Verification pipelines for the purification bounds.

Two-slot no-go: the best ICO strategy under Haar-random U is no better than
the trivial one, checked by the full 64x64 SDP, the symmetry-reduced SDP and
every stage of the hand reduction down to a 2x2 eigenvalue problem.

Three-slot optimum: the reduced sequential SDP, its numeric dual, the closed
form, the analytic dual certificate and the explicit circuit all agree.

Two-slot values of the hand-reduction stages are in "offset" units, i.e.
4 (F - (1 - 3 gamma / 4)); reports convert everything to fidelities.
"""
from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .channels import NoiseModel, channel_fidelity, gate_set, haar_unitary
from .circuits.protocol import protocol_as_strategy, run_protocol
from .sdp.compile import full_problem, reduced_problem
from .sdp.problem import Block, ConstraintBuilder, SdpProblem
from .sdp.solver import solve
from .strategies import KINDS, constraints_for
from .symmetry.blocks import block_traces, build_block_structure
from .symmetry.frames import reference_omega_blocks
from .symmetry.haar import performance_operator
from .tensor import permute_systems

SQRT2 = np.sqrt(2.0)
SQRT3 = np.sqrt(3.0)
WORKERS_ENV = "QPURIFY_WORKERS"

NOGO_STAGES = ("full_ico", "reduced", "sdp_first", "sdp_7+", "sdp_7", "sdp_6", "sdp_4", "sdp_2", "sdp_3")


class StageFailure(RuntimeError):
    """A solver stage did not reach optimality."""

    def __init__(self, stage: str, status: str):
        super().__init__(f"stage {stage}: solver status {status}")
        self.stage = stage
        self.status = status


def _gamma(gamma: float, open_interval: bool = False) -> float:
    g = NoiseModel(gamma).gamma
    if open_interval and not 0 < g < 1:
        raise ValueError(f"gamma must lie in (0, 1), got {g}")
    return g


def baseline_fidelity(gamma: float) -> float:
    """Fidelity of the trivial strategy: one use of the noisy channel."""
    return 1 - 0.75 * _gamma(gamma)


def optimal_fidelity_3slot(gamma: float) -> float:
    g = _gamma(gamma)
    return float((2 - g) * (12 + (8 * SQRT2 - 9) * g + (3 - 8 * SQRT2) * g * g) / 24)


def improvement_3slot(gamma: float) -> float:
    return optimal_fidelity_3slot(gamma) - baseline_fidelity(gamma)


# ---------------------------------------------------------------- dual certificate

@dataclass(frozen=True)
class DualCertificate:
    gamma: float
    y: dict
    objective: float


def dual_certificate_values(gamma: float) -> DualCertificate:
    """Closed-form dual variables of the three-slot bound and their objective."""
    g = _gamma(gamma)
    y = {}
    y[1] = (8 * SQRT2 - 25) / 128 * g ** 3 + (105 - 24 * SQRT2) / 128 * g ** 2 + (8 * SQRT2 - 73) / 64 * g + 9 / 16
    y[2] = (4 * SQRT2 + 5) / 64 * g ** 3 - (6 * SQRT2 + 9) / 32 * g ** 2 + (SQRT2 + 2) / 8 * g
    y[4] = (8 * SQRT2 - 7) / 128 * g ** 3 + (27 - 24 * SQRT2) / 128 * g ** 2 + (8 * SQRT2 - 19) / 64 * g + 3 / 16
    y[6] = 3 * SQRT3 / 128 * (3 * g ** 3 - 13 * g ** 2 + 18 * g - 8)
    y[7] = (8 * SQRT2 + 29) / 128 * g ** 3 - (24 * SQRT2 + 75) / 128 * g ** 2 + (8 * SQRT2 + 35) / 64 * g - 3 / 16
    y[8] = (-(8 * SQRT2 + 47) / 128 * g ** 3 + (24 * SQRT2 + 153) / 128 * g ** 2
            - (8 * SQRT2 + 89) / 64 * g + 9 / 16)
    y[3] = y[1]
    y[5] = y[2]
    y[11] = y[6]
    y[9] = y[10] = -y[6]
    y = dict(sorted(y.items()))
    objective = 4 / 3 * y[3] + 4 / 3 * y[4] + 8 / 3 * y[5]
    return DualCertificate(g, y, float(objective))


def dual_matrices(cert: DualCertificate) -> tuple[np.ndarray, np.ndarray]:
    """The parametrized matrices Y0 (4x4) and Y1 (6x6) built from the dual variables."""
    y = cert.y
    y00 = -y[1] - 2 * y[2] + y[3] + y[4] + 2 * y[5]
    y0 = np.array([
        [y00, y[6], y[11], y[7]],
        [y[6], y[1], y[8], y[10]],
        [y[11], y[8], y[3], y[9]],
        [y[7], y[10], y[9], y[4]],
    ]) / 3
    c = -(y[10] + y[11]) / 2
    y1 = np.array([
        [y00, y[6], 0, y[11], y[7], 0],
        [y[6], y[1], 0, y[8], y[10], 0],
        [0, 0, y[2], 0, 0, c],
        [y[11], y[8], 0, y[3], y[9], 0],
        [y[7], y[10], 0, y[9], y[4], 0],
        [0, 0, c, 0, 0, y[5]],
    ])
    return y0, y1


def dual_eigen_polynomials(gamma: float) -> dict:
    """Declared eigenvalues (with multiplicity) of Y0 - Omega0 and Y1 - Omega1."""
    g = _gamma(gamma)
    e0 = [g * g * (1 - g) / 16,
          g * (2 * SQRT2 * g * g + 5 * g * g - 9 * g - 6 * SQRT2 * g + 4 + 4 * SQRT2) / 48]
    e1 = [-13 * g ** 3 / 16 + 45 * g * g / 16 - 7 * g / 2 + 1.5,
          3 * SQRT2 * g * (g * g - 3 * g + 2) / 16]
    return {"Y0-Omega0": [e0[0], e0[1], e0[1], 0.0],
            "Y1-Omega1": [e1[0], e1[1], e1[1], 0.0, 0.0, 0.0]}


# ---------------------------------------------------------------- small SDP helpers

def _entry(n: int, i: int, j: int, part: str) -> np.ndarray:
    """Hermitian M with tr[M X] = Re X[i, j] (part "re") or Im X[i, j] (part "im")."""
    m = np.zeros((n, n), dtype=complex)
    if i == j:
        m[i, i] = 1.0 if part == "re" else 0.0
    elif part == "re":
        m[i, j] = m[j, i] = 0.5
    else:
        m[i, j], m[j, i] = 0.5j, -0.5j
    return m


def _solve_stage(stage: str, p: SdpProblem, tol: float):
    sol = solve(p, tol=tol)
    if not sol.ok:
        raise StageFailure(stage, sol.status)
    return sol


def _stage_first(gamma: float, tol: float) -> float:
    """Reduced two-slot ICO SDP written with the closed-form blocks and the five relations."""
    blocks = [Block("H0", 4), Block("H1", 2), Block("H2", 2), Block("h3", 1)]
    cb = ConstraintBuilder(blocks)
    e = _entry
    # H1[0,0] = (3 H0[3,3] - H0[0,0]) / 2
    cb.add({1: e(2, 0, 0, "re"), 0: -(3 * e(4, 3, 3, "re") - e(4, 0, 0, "re")) / 2}, 0.0)
    # H1[0,1] = (3 conj(H0[1,3]) - H0[0,2]) / 2, real and imaginary parts
    cb.add({1: e(2, 0, 1, "re"), 0: -(3 * e(4, 1, 3, "re") - e(4, 0, 2, "re")) / 2}, 0.0)
    cb.add({1: e(2, 0, 1, "im"), 0: -(-3 * e(4, 1, 3, "im") - e(4, 0, 2, "im")) / 2}, 0.0)
    # H1[1,1] = (3 H0[1,1] - H0[2,2]) / 2
    cb.add({1: e(2, 1, 1, "re"), 0: -(3 * e(4, 1, 1, "re") - e(4, 2, 2, "re")) / 2}, 0.0)
    # H2[1,1] = (-2 H0[1,1] - 2 H0[3,3] + 1) / 4
    cb.add({2: e(2, 1, 1, "re"), 0: (2 * e(4, 1, 1, "re") + 2 * e(4, 3, 3, "re")) / 4}, 0.25)
    # h3 = (-6 H0[1,1] - 6 H0[3,3] - 4 H2[0,0] + 3) / 8
    cb.add({3: np.eye(1), 0: (6 * e(4, 1, 1, "re") + 6 * e(4, 3, 3, "re")) / 8,
            2: 4 * e(2, 0, 0, "re") / 8}, 3 / 8)
    a, b = cb.matrix()
    p = SdpProblem(blocks, reference_omega_blocks(gamma), a, b, name="sdp_first")
    return _solve_stage("sdp_first", p, tol).primal_value


def _w_matrices(gamma: float):
    q = 1 - gamma
    w1 = np.array([[2 * q, -q * (2 - gamma)], [-q * (2 - gamma), -q]])
    w2 = np.array([[0.0, q * gamma], [q * gamma, -3 * q]])
    return w1, w2


def _stage_7plus(gamma: float, tol: float) -> float:
    """H0 >= 0 plus the three relation-built PSD blocks, with the printed objective."""
    q = 1 - gamma
    w1, w2 = _w_matrices(gamma)
    om0 = np.zeros((4, 4))
    om0[:2, :2] = w1
    om0[2:, 2:] = w2
    blocks = [Block("H0", 4), Block("B1", 2), Block("B2", 2), Block("s", 1)]
    objective = [om0, np.zeros((2, 2)), np.diag([-2 * q, 0.0]), np.zeros((1, 1))]
    cb = ConstraintBuilder(blocks)
    e = _entry
    cb.add({1: e(2, 0, 0, "re"), 0: -(3 * e(4, 3, 3, "re") - e(4, 0, 0, "re")) / 2}, 0.0)
    cb.add({1: e(2, 0, 1, "re"), 0: -(3 * e(4, 1, 3, "re") - e(4, 0, 2, "re")) / 2}, 0.0)
    cb.add({1: e(2, 0, 1, "im"), 0: -(-3 * e(4, 1, 3, "im") - e(4, 0, 2, "im")) / 2}, 0.0)
    cb.add({1: e(2, 1, 1, "re"), 0: -(3 * e(4, 1, 1, "re") - e(4, 2, 2, "re")) / 2}, 0.0)
    cb.add({2: e(2, 1, 1, "re"), 0: (2 * e(4, 1, 1, "re") + 2 * e(4, 3, 3, "re")) / 4}, 0.25)
    cb.add({3: np.eye(1), 0: 6 * e(4, 1, 1, "re") + 6 * e(4, 3, 3, "re"), 2: 4 * e(2, 0, 0, "re")}, 3.0)
    a, b = cb.matrix()
    p = SdpProblem(blocks, objective, a, b, constant=-2.5 * q, name="sdp_7+")
    return _solve_stage("sdp_7+", p, tol).primal_value


def _scalar_stage(gamma: float, tol: float, keep_h200: bool) -> float:
    """The two 2x2 blocks of H0 plus scalar slacks (H200 kept or fixed to zero)."""
    q = 1 - gamma
    w1, w2 = _w_matrices(gamma)
    names = ["3H033-H000", "3H011-H022", "1-2H011-2H033"]
    if keep_h200:
        names += ["H200", "3-6H011-6H033-4H200"]
    blocks = [Block("A", 2, False), Block("B", 2, False)] + [Block(nm, 1, False) for nm in names]
    objective = [w1, w2] + [np.zeros((1, 1)) for _ in names]
    one = np.ones((1, 1))
    d = lambda i: np.diag([1.0 if k == i else 0.0 for k in range(2)])  # noqa: E731
    cb = ConstraintBuilder(blocks)
    # block A holds (H000, H011), block B holds (H022, H033)
    cb.add({2: one, 1: -3 * d(1), 0: d(0)}, 0.0)
    cb.add({3: one, 0: -3 * d(1), 1: d(0)}, 0.0)
    cb.add({4: one, 0: 2 * d(1), 1: 2 * d(1)}, 1.0)
    if keep_h200:
        objective[5] = np.array([[-2 * q]])
        cb.add({6: one, 0: 6 * d(1), 1: 6 * d(1), 5: 4 * one}, 3.0)
    a, b = cb.matrix()
    name = "sdp_7" if keep_h200 else "sdp_6"
    p = SdpProblem(blocks, objective, a, b, constant=-2.5 * q, name=name)
    return _solve_stage(name, p, tol).primal_value


def _sdp4_objective(u: np.ndarray, gamma: float) -> float:
    q = 1 - gamma
    a, b, c, d = u
    return (2 * q * a * a + 2 * q * (2 - gamma) * a * b - q * b * b
            + 2 * q * gamma * c * d - 3 * q * d * d - 2.5 * q)


def _stage_4(gamma: float, tol: float) -> tuple[float, float, np.ndarray]:
    """Rank-one boundary problem in u = (sqrt H000, sqrt H011, sqrt H022, sqrt H033).

    Solved by its semidefinite lift Y = u u^T; returns (lift value, value at the
    recovered point, recovered u).
    """
    q = 1 - gamma
    om = np.zeros((4, 4))
    om[0, 0] = 2 * q
    om[0, 1] = om[1, 0] = q * (2 - gamma)
    om[1, 1] = -q
    om[2, 3] = om[3, 2] = q * gamma
    om[3, 3] = -3 * q
    blocks = [Block("Y", 4, False)] + [Block(f"s{k}", 1, False) for k in range(3)]
    objective = [om] + [np.zeros((1, 1))] * 3
    one = np.ones((1, 1))
    d = lambda i: np.diag([1.0 if k == i else 0.0 for k in range(4)])  # noqa: E731
    cb = ConstraintBuilder(blocks)
    cb.add({1: one, 0: d(0) - 3 * d(3)}, 0.0)
    cb.add({2: one, 0: d(2) - 3 * d(1)}, 0.0)
    cb.add({3: one, 0: 2 * d(1) + 2 * d(3)}, 1.0)
    a, b = cb.matrix()
    p = SdpProblem(blocks, objective, a, b, constant=-2.5 * q, name="sdp_4")
    sol = _solve_stage("sdp_4", p, tol)
    # constraints only involve diag Y, so sqrt(diag Y) is feasible and at least as good
    u = np.sqrt(np.maximum(np.diag(sol.X[0]), 0.0))
    return sol.primal_value, float(_sdp4_objective(u, gamma)), u


def m_matrix(gamma: float) -> np.ndarray:
    q = 1 - _gamma(gamma)
    return q * np.array([[-1.0, 2 * SQRT3], [2 * SQRT3, 3.0]])


def m_eigen(gamma: float) -> tuple[float, np.ndarray]:
    """Largest eigenvalue of M and its eigenvector with nonnegative entries."""
    w, v = np.linalg.eigh(m_matrix(gamma))
    vec = v[:, -1]
    if vec[np.argmax(np.abs(vec))] < 0:
        vec = -vec
    return float(w[-1]), vec


def _stage_2(gamma: float, tol: float) -> tuple[float, np.ndarray]:
    """max v^T M v - 5q/2 over |v|^2 <= 1/2 by its lift; returns value and recovered v."""
    q = 1 - gamma
    blocks = [Block("Y", 2, False), Block("s", 1, False)]
    cb = ConstraintBuilder(blocks)
    cb.add({0: np.eye(2), 1: np.ones((1, 1))}, 0.5)
    a, b = cb.matrix()
    p = SdpProblem(blocks, [m_matrix(gamma), np.zeros((1, 1))], a, b, constant=-2.5 * q, name="sdp_2")
    sol = _solve_stage("sdp_2", p, tol)
    w, v = np.linalg.eigh(sol.X[0])
    vec = np.abs(v[:, -1]) * np.sqrt(max(w[-1], 0.0))
    return sol.primal_value, vec


# ---------------------------------------------------------------- two-slot no-go

@dataclass
class NoGoReport:
    gamma: float
    full_ico_optimum: float
    reduced_chain_values: dict
    m_eigen: tuple
    optimal_point: np.ndarray
    baseline: float
    tol: float
    failures: list = field(default_factory=list)

    @property
    def chain_spread(self) -> float:
        vals = list(self.reduced_chain_values.values())
        return float(max(vals) - min(vals)) if vals else np.inf

    @property
    def improvement(self) -> float:
        return float(self.full_ico_optimum - self.baseline)

    @property
    def ok(self) -> bool:
        return (not self.failures and self.chain_spread <= self.tol and self.improvement <= self.tol
                and abs(self.improvement) <= self.tol)

    def record(self) -> dict:
        out = {"gamma": self.gamma, "full_ico": self.full_ico_optimum, "baseline": self.baseline,
               "improvement": self.improvement, "chain_spread": self.chain_spread,
               "m_lambda_max": self.m_eigen[0], "m_vector": list(map(float, self.m_eigen[1])),
               "sqrt_H011_H033": list(map(float, self.optimal_point))}
        out.update({f"stage_{k}": v for k, v in self.reduced_chain_values.items()})
        out["failures"] = list(self.failures)
        out["pass"] = self.ok
        return out


def _to_fidelity(offset_value: float, gamma: float) -> float:
    return 1 - 0.75 * gamma + offset_value / 4


def verify_nogo(gamma: float, tol: float = 1e-6, solver_tol: float = 1e-9) -> NoGoReport:
    g = _gamma(gamma, open_interval=True)
    chain: dict = {}
    failures: list = []
    full = np.nan

    def run(stage, fn):
        try:
            return fn()
        except StageFailure as exc:
            failures.append(f"{exc.stage}: {exc.status}")
            return None

    s = constraints_for("ico", 2)
    om = permute_systems(performance_operator(g, 2).op, s.systems).matrix
    sol = run("full_ico", lambda: _solve_stage("full_ico", full_problem(om, s, "full_ico"), solver_tol))
    if sol is not None:
        full = sol.primal_value
        chain["full_ico"] = full

    bs = build_block_structure(2)
    omegas = block_traces(performance_operator(g, 2, form="offset").op, bs)
    sol = run("reduced", lambda: _solve_stage("reduced", reduced_problem(omegas, "ico", 2), solver_tol))
    if sol is not None:
        chain["reduced"] = _to_fidelity(sol.primal_value, g)
    for stage, fn in (("sdp_first", lambda: _stage_first(g, solver_tol)),
                      ("sdp_7+", lambda: _stage_7plus(g, solver_tol)),
                      ("sdp_7", lambda: _scalar_stage(g, solver_tol, True)),
                      ("sdp_6", lambda: _scalar_stage(g, solver_tol, False))):
        v = run(stage, fn)
        if v is not None:
            chain[stage] = _to_fidelity(v, g)
    r4 = run("sdp_4", lambda: _stage_4(g, solver_tol))
    if r4 is not None:
        chain["sdp_4"] = _to_fidelity(r4[0], g)
        chain["sdp_4_point"] = _to_fidelity(r4[1], g)
    r2 = run("sdp_2", lambda: _stage_2(g, solver_tol))
    point = np.full(2, np.nan)
    if r2 is not None:
        chain["sdp_2"] = _to_fidelity(r2[0], g)
        point = r2[1]
    lam, vec = m_eigen(g)
    chain["sdp_3"] = _to_fidelity(lam / 2 - 2.5 * (1 - g), g)
    return NoGoReport(g, full, chain, (lam, vec), point, baseline_fidelity(g), tol, failures)


# ---------------------------------------------------------------- three-slot optimum

@dataclass
class ThreeSlotReport:
    gamma: float
    reduced_primal_optimum: float
    dual_value: float
    formula_value: float
    circuit_fidelity: float
    circuit_variance: float
    circuit_strategy_value: float
    certificate_objective: float
    dual_eigen_margins: dict
    dual_slack_min_eigenvalue: float
    baseline: float
    tol: float
    failures: list = field(default_factory=list)

    @property
    def delta(self) -> float:
        return self.formula_value - self.baseline

    @property
    def ok(self) -> bool:
        f = self.formula_value
        return (not self.failures
                and abs(self.reduced_primal_optimum - f) <= self.tol
                and abs(self.dual_value - f) <= self.tol
                and self.reduced_primal_optimum <= self.dual_value + self.tol
                and abs(self.circuit_fidelity - f) <= 1e-9
                and abs(self.circuit_strategy_value - f) <= 1e-9
                and abs(self.certificate_objective - f) <= 1e-12
                and min(self.dual_eigen_margins.values()) >= -1e-12
                and self.delta > 0)

    def record(self) -> dict:
        return {"gamma": self.gamma, "primal": self.reduced_primal_optimum, "dual": self.dual_value,
                "formula": self.formula_value, "circuit": self.circuit_fidelity,
                "circuit_variance": self.circuit_variance, "strategy": self.circuit_strategy_value,
                "certificate": self.certificate_objective,
                "margin_Y0": self.dual_eigen_margins["Y0-Omega0"],
                "margin_Y1": self.dual_eigen_margins["Y1-Omega1"],
                "dual_slack_min_eig": self.dual_slack_min_eigenvalue,
                "baseline": self.baseline, "delta": self.delta,
                "failures": list(self.failures), "pass": self.ok}


def circuit_fidelities(gamma: float, samples: int = 100, seed: int = 0) -> np.ndarray:
    rng = np.random.default_rng(seed)
    return np.array([channel_fidelity(run_protocol(u, gamma), u)
                     for u in (haar_unitary(rng) for _ in range(samples))])


def three_slot_reduced(gamma: float, solver_tol: float = 1e-9):
    """Reduced sequential, slot-symmetric three-slot SDP with the Haar fidelity objective."""
    bs = build_block_structure(3)
    omegas = block_traces(performance_operator(gamma, 3).op, bs)
    return _solve_stage("reduced_3slot", reduced_problem(omegas, "sequential", 3, symmetric=True,
                                                         name="reduced_3slot"), solver_tol)


def verify_3slot(gamma: float, tol: float = 1e-6, samples: int = 100, seed: int = 0,
                 solver_tol: float = 1e-9) -> ThreeSlotReport:
    g = _gamma(gamma, open_interval=True)
    failures = []
    try:
        sol = three_slot_reduced(g, solver_tol)
        primal, dual = sol.primal_value, sol.dual_value
        slack = min(float(np.linalg.eigvalsh(z)[0]) for z in sol.Z)
    except StageFailure as exc:
        failures.append(f"{exc.stage}: {exc.status}")
        primal = dual = slack = np.nan
    fids = circuit_fidelities(g, samples, seed)
    comb = protocol_as_strategy()
    strategy_value = performance_operator(g, 3).value(comb)
    cert = dual_certificate_values(g)
    margins = {k: float(min(v)) for k, v in dual_eigen_polynomials(g).items()}
    return ThreeSlotReport(g, primal, dual, optimal_fidelity_3slot(g), float(fids.mean()), float(fids.var()),
                           strategy_value, cert.objective, margins, slack, baseline_fidelity(g), tol, failures)


# ---------------------------------------------------------------- gate-set experiment

@dataclass
class ExperimentRow:
    gamma: float
    values: dict
    statuses: dict
    baseline: float

    @property
    def ok(self) -> bool:
        return all(s == "optimal" for s in self.statuses.values())

    def monotone(self, tol: float = 1e-6) -> bool:
        order = [k for k in KINDS if k in self.values]
        vals = [self.values[k] for k in order]
        return all(a <= b + tol for a, b in zip(vals, vals[1:]))


def _experiment_row(args) -> ExperimentRow:
    gamma, gates, kinds, solver_tol = args
    values, statuses = {}, {}
    for kind in kinds:
        s = constraints_for(kind, 2)
        om = permute_systems(performance_operator(gamma, 2, averaging=gates).op, s.systems).matrix
        sol = solve(full_problem(om, s, f"{kind}@{gamma}"), tol=solver_tol)
        values[kind] = sol.primal_value
        statuses[kind] = sol.status
    return ExperimentRow(gamma, values, statuses, baseline_fidelity(gamma))


def worker_count() -> int:
    env = os.environ.get(WORKERS_ENV)
    if env:
        return max(1, int(env))
    return max(1, os.cpu_count() or 1)


def gate_set_experiment(gammas, gates=None, kinds=KINDS, solver_tol: float = 1e-9,
                        workers: int | None = None) -> list[ExperimentRow]:
    """Optimal two-slot average fidelity over a finite gate set, per gamma and strategy class."""
    gates = [np.asarray(u, dtype=complex) for u in (gate_set() if gates is None else gates)]
    kinds = tuple(kinds)
    for k in kinds:
        if k not in KINDS:
            raise ValueError(f"unknown strategy kind {k!r}")
    order = [k for k in KINDS if k in kinds]
    tasks = [(_gamma(g), gates, order, solver_tol) for g in gammas]
    workers = worker_count() if workers is None else workers
    if workers <= 1 or len(tasks) <= 1:
        rows = [_experiment_row(t) for t in tasks]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(_experiment_row, tasks))
    return sorted(rows, key=lambda r: r.gamma)
