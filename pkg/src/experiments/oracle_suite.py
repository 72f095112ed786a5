"""
Oracle Suite - Random circuits run on the sparse and dense simulators side by side

Gates come from {H, S, CNOT, T, R_Z}; forced Pauli measurements and
stochastic channels are interleaved. Every random choice (measurement
outcome, Pauli letter, Kraus branch) is drawn once from the sparse state
and replayed on the dense one.
"""

import logging
from dataclasses import dataclass, field
from typing import List

import numpy as np
import pandas as pd

from dense_oracle import DenseState, overlap_fidelity
from experiment_models import OracleSpec
from montecarlo import trajectory_rng
from noise_channels import amplitude_damping_kraus_terms
from pauli_algebra import PauliString, random_pauli
from pfsr_state import PFSRState

from .base import ExperimentRunner, RunOutput

logger = logging.getLogger("pfsr_sim")

FIDELITY_TOLERANCE = 1e-8
ORACLE_TAG = 7
GATE_MENU = ("H", "S", "CNOT", "T", "RZ")
# Relative odds of gate, forced measurement, Pauli channel, amplitude damping
EVENT_ODDS = np.array([0.75, 0.1, 0.1, 0.05])
MIN_BRANCH_PROBABILITY = 1e-6


@dataclass
class OracleCase:
    index: int
    n: int
    depth: int
    fidelity: float
    max_entries: int
    events: List[str] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return self.fidelity >= 1.0 - FIDELITY_TOLERANCE


def _apply_gate(sparse: PFSRState, dense: DenseState, n: int, rng: np.random.Generator) -> str:
    name = GATE_MENU[int(rng.integers(len(GATE_MENU)))] if n > 1 else GATE_MENU[int(rng.choice([0, 1, 3, 4]))]
    if name == "CNOT":
        control, target = (int(q) for q in rng.choice(n, size=2, replace=False))
        sparse.apply_gate("CNOT", [control, target])
        dense.apply_gate("CNOT", [control, target])
        return f"CNOT {control} {target}"
    qubit = int(rng.integers(n))
    if name == "T":
        sparse.apply_t(qubit)
        dense.apply_gate("T", [qubit])
    elif name == "RZ":
        theta = float(rng.uniform(-np.pi, np.pi))
        sparse.apply_rz(qubit, theta)
        dense.apply_rz(qubit, theta)
        return f"RZ({theta:.4f}) {qubit}"
    else:
        sparse.apply_gate(name, [qubit])
        dense.apply_gate(name, [qubit])
    return f"{name} {qubit}"


def _forced_measurement(sparse: PFSRState, dense: DenseState, n: int, rng: np.random.Generator) -> str:
    p = random_pauli(n, rng, hermitian=True)
    if p.support == 0:
        return "skip"
    p_plus = 0.5 * (1.0 + sparse.expectation_pauli(p))
    outcome = 1 if rng.random() < p_plus else -1
    if (p_plus if outcome == 1 else 1.0 - p_plus) < MIN_BRANCH_PROBABILITY:
        outcome = -outcome
    sparse.measure_pauli(p, forced=outcome)
    dense.project(p, outcome)
    return f"M {p.to_literal(explicit_sign=True)} = {outcome:+d}"


def _pauli_channel(sparse: PFSRState, dense: DenseState, n: int, rng: np.random.Generator) -> str:
    qubit = int(rng.integers(n))
    letter = "IXYZ"[int(rng.integers(4))]
    sigma = PauliString.single(n, qubit, letter)
    sparse.apply_pauli(sigma)
    dense.apply_pauli(sigma)
    return f"P {letter} {qubit}"


def _amplitude_damping(sparse: PFSRState, dense: DenseState, n: int, rng: np.random.Generator) -> str:
    qubit = int(rng.integers(n))
    gamma = float(rng.uniform(0.05, 0.5))
    z = sparse.expectation_pauli(PauliString.single(n, qubit, "Z"))
    p0 = 1.0 - 0.5 * gamma * (1.0 - z)
    branch = 0 if rng.random() < p0 else 1
    if (p0 if branch == 0 else 1.0 - p0) < MIN_BRANCH_PROBABILITY:
        branch = 1 - branch
    terms = amplitude_damping_kraus_terms(n, qubit, gamma)[branch]
    sparse.apply_pauli_sum(terms, renormalize=True)
    dense.apply_pauli_sum(terms, renormalize=True)
    return f"AD({gamma:.3f}) K{branch} {qubit}"


EVENTS = (_apply_gate, _forced_measurement, _pauli_channel, _amplitude_damping)


def run_oracle_case(index: int, n: int, depth: int, rng: np.random.Generator) -> OracleCase:
    """One random circuit; returns |⟨dense|sparse⟩| and the recorded events"""
    sparse = PFSRState.init_zero(n)
    dense = DenseState(n)
    events = []
    for _ in range(depth):
        choice = int(rng.choice(len(EVENTS), p=EVENT_ODDS / EVENT_ODDS.sum()))
        events.append(EVENTS[choice](sparse, dense, n, rng))
    fidelity = overlap_fidelity(sparse.to_dense(), dense.vector)
    return OracleCase(index, n, depth, fidelity, sparse.global_log.get("max_entries", len(sparse)), events)


def run_oracle_suite(spec: OracleSpec, seed: int) -> List[OracleCase]:
    cases = []
    for i in range(spec.circuits):
        rng = trajectory_rng(seed, ORACLE_TAG, i)
        n = int(rng.integers(1, spec.max_qubits + 1))
        depth = int(rng.integers(1, spec.depth + 1))
        case = run_oracle_case(i, n, depth, rng)
        if not case.passed:
            logger.warning("Oracle case %d (n=%d, depth=%d) fidelity %.12f", i, n, depth, case.fidelity)
        cases.append(case)
    return cases


def suite_frame(cases: List[OracleCase]) -> pd.DataFrame:
    return pd.DataFrame([
        {
            "case": c.index,
            "n": c.n,
            "depth": c.depth,
            "fidelity": c.fidelity,
            "max_entries": c.max_entries,
            "passed": c.passed,
        }
        for c in cases
    ])


class OracleSuiteRunner(ExperimentRunner):
    """Equivalence suite; writes one row per circuit"""

    def run(self) -> RunOutput:
        output = RunOutput()
        cases = run_oracle_suite(self.config.oracle, self.seed)
        frame = suite_frame(cases)
        output.tables["oracle_cases"] = frame
        failed = int((~frame["passed"]).sum())
        worst = float(frame["fidelity"].min())
        output.messages.append(f"{len(cases) - failed}/{len(cases)} circuits matched (worst fidelity {worst:.12f})")
        if failed:
            raise RuntimeError(f"{failed} oracle circuits disagree with the dense simulator")
        return output
