"""
Dense Oracle - Reference state-vector and density-matrix simulation
Small-n ground truth for the sparse simulator and the noise channels
"""

import os
from typing import List, Optional, Sequence, Tuple

import numpy as np

from pauli_algebra import PauliString, iter_bits

DEFAULT_ORACLE_MAX_QUBITS = 12

# Basis index convention: qubit k is bit k of the computational-basis index
I2 = np.eye(2, dtype=complex)
X2 = np.array([[0, 1], [1, 0]], dtype=complex)
Y2 = np.array([[0, -1j], [1j, 0]], dtype=complex)
Z2 = np.array([[1, 0], [0, -1]], dtype=complex)
H2 = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)
S2 = np.diag([1, 1j]).astype(complex)
SDG2 = np.diag([1, -1j]).astype(complex)
T2 = np.diag([1, np.exp(1j * np.pi / 4)]).astype(complex)
PAULI_MATRICES = {"I": I2, "X": X2, "Y": Y2, "Z": Z2}

SINGLE_QUBIT_GATES = {"H": H2, "S": S2, "SDG": SDG2, "T": T2, "X": X2, "Y": Y2, "Z": Z2}


class OracleLimitError(ValueError):
    """Requested dense representation exceeds the configured qubit cap"""


def oracle_max_qubits() -> int:
    """Qubit cap for dense reconstruction, overridable via PFSR_ORACLE_MAX_QUBITS"""
    raw = os.environ.get("PFSR_ORACLE_MAX_QUBITS")
    if raw is None:
        return DEFAULT_ORACLE_MAX_QUBITS
    try:
        return int(raw)
    except ValueError:
        return DEFAULT_ORACLE_MAX_QUBITS


def rz_matrix(theta: float) -> np.ndarray:
    return np.diag([np.exp(-0.5j * theta), np.exp(0.5j * theta)])


def _parity_of_masked(indices: np.ndarray, mask: int) -> np.ndarray:
    parity = np.zeros_like(indices)
    for k in iter_bits(mask):
        parity ^= (indices >> k) & 1
    return parity


def apply_pauli_to_vector(vector: np.ndarray, p: PauliString) -> np.ndarray:
    """Return P|v⟩ using i^q Z^z X^x |b⟩ = i^q (-1)^{z·(b⊕x)} |b⊕x⟩"""
    indices = np.arange(vector.shape[0])
    zx_phase = (p.phase_power - p.y_count) % 4
    signs = 1 - 2 * _parity_of_masked(indices, p.z_bits)
    return (1j ** zx_phase) * signs * vector[indices ^ p.x_bits]


def pauli_matrix(p: PauliString) -> np.ndarray:
    """Full 2^n x 2^n matrix of a Pauli string"""
    dim = 1 << p.n
    matrix = np.zeros((dim, dim), dtype=complex)
    for b in range(dim):
        e = np.zeros(dim, dtype=complex)
        e[b] = 1.0
        matrix[:, b] = apply_pauli_to_vector(e, p)
    return matrix


def apply_single_qubit(vector: np.ndarray, n: int, qubit: int, matrix: np.ndarray) -> np.ndarray:
    psi = vector.reshape([2] * n)
    axis = n - 1 - qubit
    psi = np.tensordot(matrix, psi, axes=([1], [axis]))
    psi = np.moveaxis(psi, 0, axis)
    return psi.reshape(-1)


def overlap_fidelity(a: np.ndarray, b: np.ndarray) -> float:
    """|⟨a|b⟩| for unit vectors, insensitive to global phase"""
    return float(abs(np.vdot(a, b)))


class DenseState:
    """Plain state-vector simulator used as the reference implementation"""

    def __init__(self, n: int, vector: Optional[np.ndarray] = None):
        if n > oracle_max_qubits():
            raise OracleLimitError(f"{n} qubits exceeds the dense oracle cap {oracle_max_qubits()}")
        self.n = n
        if vector is None:
            vector = np.zeros(1 << n, dtype=complex)
            vector[0] = 1.0
        self.vector = np.asarray(vector, dtype=complex)

    def copy(self) -> "DenseState":
        return DenseState(self.n, self.vector.copy())

    def apply_gate(self, name: str, qubits: Sequence[int]) -> "DenseState":
        if name in SINGLE_QUBIT_GATES:
            self.vector = apply_single_qubit(self.vector, self.n, qubits[0], SINGLE_QUBIT_GATES[name])
        elif name in ("CX", "CNOT"):
            c, t = qubits
            indices = np.arange(1 << self.n)
            selected = indices[((indices >> c) & 1) == 1]
            out = self.vector.copy()
            out[selected ^ (1 << t)] = self.vector[selected]
            self.vector = out
        elif name == "CZ":
            a, b = qubits
            indices = np.arange(1 << self.n)
            both = (((indices >> a) & 1) & ((indices >> b) & 1)) == 1
            self.vector = np.where(both, -self.vector, self.vector)
        else:
            raise ValueError(f"Unknown gate {name!r}")
        return self

    def apply_rz(self, qubit: int, theta: float) -> "DenseState":
        self.vector = apply_single_qubit(self.vector, self.n, qubit, rz_matrix(theta))
        return self

    def apply_matrix(self, qubit: int, matrix: np.ndarray, renormalize: bool = False) -> "DenseState":
        self.vector = apply_single_qubit(self.vector, self.n, qubit, matrix)
        if renormalize:
            self.vector = self.vector / np.linalg.norm(self.vector)
        return self

    def apply_pauli(self, p: PauliString) -> "DenseState":
        self.vector = apply_pauli_to_vector(self.vector, p)
        return self

    def apply_pauli_sum(self, terms: Sequence[Tuple[complex, PauliString]], renormalize: bool = False) -> "DenseState":
        out = np.zeros_like(self.vector)
        for coefficient, sigma in terms:
            out = out + coefficient * apply_pauli_to_vector(self.vector, sigma)
        if renormalize:
            out = out / np.linalg.norm(out)
        self.vector = out
        return self

    def expectation(self, p: PauliString) -> float:
        return float(np.real(np.vdot(self.vector, apply_pauli_to_vector(self.vector, p))))

    def project(self, p: PauliString, eigenvalue: int) -> float:
        """Project onto the ±1 eigenspace of p, renormalize, return the probability"""
        projected = 0.5 * (self.vector + eigenvalue * apply_pauli_to_vector(self.vector, p))
        probability = float(np.real(np.vdot(projected, projected)))
        if probability > 0:
            self.vector = projected / np.sqrt(probability)
        return probability


# ----------------------------------------------------------------------
# Channel-level references
# ----------------------------------------------------------------------

def apply_kraus_to_density(rho: np.ndarray, kraus: Sequence[np.ndarray]) -> np.ndarray:
    return sum(k @ rho @ k.conj().T for k in kraus)


def superoperator(kraus: Sequence[np.ndarray]) -> np.ndarray:
    """Process matrix acting on row-major vec(ρ): Σ K ⊗ K*"""
    return sum(np.kron(k, k.conj()) for k in kraus)


def pauli_twirl_kraus(kraus: Sequence[np.ndarray]) -> List[np.ndarray]:
    """Kraus set of (1/4) Σ_P P† E(P ρ P†) P"""
    return [P.conj().T @ k @ P / 2.0 for P in PAULI_MATRICES.values() for k in kraus]


def pauli_channel_kraus(p_x: float, p_y: float, p_z: float) -> List[np.ndarray]:
    p_i = 1.0 - p_x - p_y - p_z
    return [np.sqrt(max(p_i, 0.0)) * I2, np.sqrt(p_x) * X2, np.sqrt(p_y) * Y2, np.sqrt(p_z) * Z2]


def pauli_eigenstates() -> List[np.ndarray]:
    """The six single-qubit Pauli eigenstates as density matrices"""
    kets = [
        np.array([1, 0], dtype=complex),
        np.array([0, 1], dtype=complex),
        np.array([1, 1], dtype=complex) / np.sqrt(2),
        np.array([1, -1], dtype=complex) / np.sqrt(2),
        np.array([1, 1j], dtype=complex) / np.sqrt(2),
        np.array([1, -1j], dtype=complex) / np.sqrt(2),
    ]
    return [np.outer(k, k.conj()) for k in kets]
