"""
PFSR State - Pauli Frame Sparse Representation
|Ψ⟩ = Σ_s α_s P_s |0⟩ over the joint eigenbasis of a stabilizer frame
"""

import logging
from dataclasses import dataclass
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np

from dense_oracle import OracleLimitError, apply_pauli_to_vector, oracle_max_qubits
from pauli_algebra import (
    CliffordTableau,
    DimensionError,
    FrameDecomposer,
    PauliString,
    commutes,
    compose,
    conjugate,
    conjugate_gate,
    frame_reduction_clifford,
    gf2_rank,
    multiply,
)

logger = logging.getLogger("pfsr_sim")

AMPLITUDE_CUTOFF = 1e-14
NORM_TOLERANCE = 1e-9
POSTSELECTION_FLOOR = 1e-12

_SQRT_HALF = 1.0 / np.sqrt(2.0)
# P_n|+⟩ = α|0⟩ + β|1⟩ for the letter left on the measured qubit
_PLUS_STATE_SPLIT = {
    "I": (_SQRT_HALF, _SQRT_HALF),
    "X": (_SQRT_HALF, _SQRT_HALF),
    "Y": (-1j * _SQRT_HALF, 1j * _SQRT_HALF),
    "Z": (_SQRT_HALF, -_SQRT_HALF),
}

Entry = Tuple[complex, PauliString]


class NormError(ValueError):
    """Linear combination changed the norm and no renormalization was requested"""


class ImpossiblePostselectionError(RuntimeError):
    """Forced measurement outcome has (numerically) zero probability"""


class IncompatibleFrameError(ValueError):
    """Two states do not share the same frame"""


@dataclass
class MeasurementOutcome:
    """Result of a projective Pauli measurement"""
    eigenvalue: int
    probability: float
    forced: bool = False
    p_plus: float = 0.5
    commuting: bool = True

    @property
    def bit(self) -> int:
        """0 for +1, 1 for -1"""
        return 0 if self.eigenvalue == 1 else 1


def label_to_string(label: int, n: int) -> str:
    """s_0 s_1 ... s_{n-1} as a bit string"""
    return "".join(str((label >> i) & 1) for i in range(n))


def string_to_label(text: str) -> int:
    return sum(int(ch) << i for i, ch in enumerate(text))


class PFSRState:
    """
    Sparse state over a stabilizer frame.

    ``entries`` maps an integer label (bit i = eigenvalue bit of S_i) to
    (amplitude, history). Operations mutate in place and return ``self``.
    """

    def __init__(
        self,
        n: int,
        frame: Sequence[PauliString],
        entries: Dict[int, Entry],
        pending_clifford: Optional[CliffordTableau] = None,
        global_log: Optional[Dict[str, Any]] = None,
    ):
        if n < 1:
            raise DimensionError("A PFSR state needs at least one qubit")
        self.n = n
        self.frame: List[PauliString] = list(frame)
        self.entries: Dict[int, Entry] = dict(entries)
        self.pending_clifford = pending_clifford
        self.labels_stale = pending_clifford is not None
        self.global_log: Dict[str, Any] = global_log if global_log is not None else {
            "max_entries": len(self.entries),
            "truncation_fallbacks": 0,
        }
        self._decomposer: Optional[FrameDecomposer] = None

    @classmethod
    def init_zero(cls, n: int) -> "PFSRState":
        """|0…0⟩ with frame {Z_i}"""
        if n < 1:
            raise DimensionError("init_zero needs n ≥ 1")
        frame = [PauliString.single(n, i, "Z") for i in range(n)]
        return cls(n, frame, {0: (1.0 + 0j, PauliString.identity(n))})

    def copy(self) -> "PFSRState":
        clone = PFSRState(self.n, self.frame, self.entries, self.pending_clifford, dict(self.global_log))
        clone.labels_stale = self.labels_stale
        clone._decomposer = self._decomposer
        return clone

    def __len__(self) -> int:
        return len(self.entries)

    @property
    def entry_count(self) -> int:
        return len(self.entries)

    def norm_squared(self) -> float:
        return float(sum(abs(a) ** 2 for a, _ in self.entries.values()))

    # ------------------------------------------------------------------
    # Frame helpers
    # ------------------------------------------------------------------

    def _check_size(self, n: int):
        if n != self.n:
            raise DimensionError(f"Qubit count mismatch: state has {self.n}, operand has {n}")

    def _frame_changed(self):
        self._decomposer = None

    @property
    def decomposer(self) -> FrameDecomposer:
        if self._decomposer is None:
            self._decomposer = FrameDecomposer(self.frame)
        return self._decomposer

    def label_of(self, p: PauliString) -> int:
        """Commutation vector c(p): bit i set when p anticommutes with S_i"""
        label = 0
        for i, s in enumerate(self.frame):
            if commutes(s, p):
                label |= 1 << i
        return label

    def relative_phase(self, reference: PauliString, history: PauliString) -> int:
        """γ (quarter turns) with history|0⟩ = γ·reference|0⟩ for equal labels"""
        if reference.same_bits(history):
            return (history.phase_power - reference.phase_power) % 4
        _, gamma = self.decomposer.decompose(multiply(reference.dagger(), history), check=False)
        return gamma

    def _note_size(self):
        if len(self.entries) > self.global_log.get("max_entries", 0):
            self.global_log["max_entries"] = len(self.entries)

    def _merge_into(self, bucket: Dict[int, List], label: int, amplitude: complex, history: PauliString):
        slot = bucket.get(label)
        if slot is None:
            bucket[label] = [amplitude, history]
            return
        gamma = self.relative_phase(slot[1], history)
        slot[0] += amplitude * (1j ** gamma)

    def _install(self, bucket: Dict[int, List]):
        self.entries = {
            label: (complex(amp), hist)
            for label, (amp, hist) in sorted(bucket.items())
            if abs(amp) >= AMPLITUDE_CUTOFF
        }
        self._note_size()

    def _ensure_fresh(self):
        if self.pending_clifford is not None or self.labels_stale:
            self.flush_relabel()

    # ------------------------------------------------------------------
    # Clifford updates
    # ------------------------------------------------------------------

    def apply_clifford(self, c: CliffordTableau) -> "PFSRState":
        """Accumulate c into the pending tableau; relabeling is deferred"""
        self._check_size(c.n)
        self.pending_clifford = c if self.pending_clifford is None else compose(c, self.pending_clifford)
        self.labels_stale = True
        return self

    def flush_relabel(self) -> "PFSRState":
        """Apply the pending tableau and recompute every label from the histories"""
        if self.pending_clifford is not None:
            tableau = self.pending_clifford
            self.frame = [conjugate(tableau, s) for s in self.frame]
            self.entries = {label: (amp, conjugate(tableau, hist)) for label, (amp, hist) in self.entries.items()}
            self.pending_clifford = None
            self._frame_changed()
        bucket: Dict[int, List] = {}
        for _, (amp, hist) in sorted(self.entries.items()):
            self._merge_into(bucket, self.label_of(hist), amp, hist)
        self._install(bucket)
        self.labels_stale = False
        return self

    def apply_gate(self, name: str, qubits: Sequence[int]) -> "PFSRState":
        """
        Elementary Clifford gate applied eagerly to frame and histories.

        Conjugating frame and histories together preserves every
        commutation relation, so labels stay valid.
        """
        for q in qubits:
            if not 0 <= q < self.n:
                raise DimensionError(f"Qubit {q} out of range for n={self.n}")
        if self.pending_clifford is not None:
            self.pending_clifford = self.pending_clifford.then_gate(name, qubits)
            return self
        self.frame = [conjugate_gate(s, name, qubits) for s in self.frame]
        self.entries = {label: (amp, conjugate_gate(hist, name, qubits)) for label, (amp, hist) in self.entries.items()}
        self._frame_changed()
        return self

    # ------------------------------------------------------------------
    # Pauli and linear-combination updates
    # ------------------------------------------------------------------

    def apply_pauli(self, sigma: PauliString) -> "PFSRState":
        """Label permutation s → s ⊕ c(σ), history → σ·P_s"""
        self._check_size(sigma.n)
        self._ensure_fresh()
        shift = self.label_of(sigma)
        self.entries = {
            label ^ shift: (amp, multiply(sigma, hist))
            for label, (amp, hist) in self.entries.items()
        }
        return self

    def apply_pauli_sum(
        self, terms: Sequence[Tuple[complex, PauliString]], renormalize: bool = False
    ) -> "PFSRState":
        """
        Apply Σ_k β_k σ_k.

        Images sharing a label are merged onto the first-arriving history
        (entries visited in ascending label order, terms in given order).
        """
        self._ensure_fresh()
        active = []
        for coefficient, sigma in terms:
            self._check_size(sigma.n)
            if coefficient != 0:
                active.append((complex(coefficient), sigma, self.label_of(sigma)))
        norm_before = self.norm_squared()

        bucket: Dict[int, List] = {}
        for label in sorted(self.entries):
            amp, hist = self.entries[label]
            for coefficient, sigma, shift in active:
                self._merge_into(bucket, label ^ shift, amp * coefficient, multiply(sigma, hist))
        self._install(bucket)

        norm_after = self.norm_squared()
        if norm_after <= 0.0:
            raise NormError("Linear combination annihilated the state")
        if renormalize:
            self._rescale(1.0 / np.sqrt(norm_after))
        elif abs(norm_after - norm_before) > NORM_TOLERANCE * max(1.0, norm_before):
            raise NormError(f"Norm changed from {norm_before:.12f} to {norm_after:.12f}; pass renormalize=True")
        return self

    def apply_rz(self, qubit: int, theta: float) -> "PFSRState":
        """exp(-iθZ/2) = cos(θ/2) I - i sin(θ/2) Z"""
        z = PauliString.single(self.n, qubit, "Z")
        return self.apply_pauli_sum(
            [(np.cos(theta / 2), PauliString.identity(self.n)), (-1j * np.sin(theta / 2), z)]
        )

    def apply_t(self, qubit: int) -> "PFSRState":
        """T gate up to the global phase e^{iπ/8}"""
        return self.apply_rz(qubit, np.pi / 4)

    def _rescale(self, factor: float):
        self.entries = {label: (amp * factor, hist) for label, (amp, hist) in self.entries.items()}

    # ------------------------------------------------------------------
    # Expectations and overlaps
    # ------------------------------------------------------------------

    def inner_product(self, other: "PFSRState") -> complex:
        """⟨self|other⟩ for states sharing a frame"""
        self._ensure_fresh()
        other._ensure_fresh()
        if self.n != other.n or any(a != b for a, b in zip(self.frame, other.frame)):
            raise IncompatibleFrameError("States do not share the same frame")
        total = 0j
        for label, (amp_b, hist_b) in other.entries.items():
            match = self.entries.get(label)
            if match is None:
                continue
            amp_a, hist_a = match
            total += np.conj(amp_a) * amp_b * (1j ** self.relative_phase(hist_a, hist_b))
        return complex(total)

    def expectation_pauli(self, p: PauliString) -> float:
        """⟨Ψ|P|Ψ⟩ clamped to [-1, 1]"""
        self._check_size(p.n)
        self._ensure_fresh()
        if self.label_of(p) == 0:
            # P is ± a frame product: each ket is an eigenvector
            subset, gamma = self.decomposer.decompose(p, check=False)
            value = 0.0
            sign = 1 if gamma == 0 else -1
            for label, (amp, _) in self.entries.items():
                parity = (label & subset).bit_count() & 1
                value += abs(amp) ** 2 * (sign if parity == 0 else -sign)
        else:
            moved = self.copy().apply_pauli(p)
            overlap = self.inner_product(moved)
            if abs(overlap.imag) > 1e-9 and p.is_hermitian():
                logger.debug("Expectation of %s has imaginary part %.3e", p, overlap.imag)
            value = overlap.real
        return float(min(1.0, max(-1.0, value)))

    # ------------------------------------------------------------------
    # Measurement
    # ------------------------------------------------------------------

    def measure_pauli(
        self,
        p: PauliString,
        forced: Optional[int] = None,
        rng: Optional[np.random.Generator] = None,
    ) -> Tuple[MeasurementOutcome, "PFSRState"]:
        """
        Projective measurement of a Hermitian Pauli.

        Args:
            p: Observable (phase 0 or 2)
            forced: Postselect on +1 or -1 instead of sampling
            rng: Random stream used when the outcome is sampled

        Returns:
            (outcome, self)
        """
        self._check_size(p.n)
        if not p.is_hermitian():
            raise ValueError(f"Cannot measure non-Hermitian {p}")
        self._ensure_fresh()

        sign = 1
        if p.phase_power == 2:
            p = -p
            sign = -1
        expectation = self.expectation_pauli(p)
        p_plus = min(1.0, max(0.0, 0.5 * (1.0 + expectation)))

        if forced is not None:
            if forced not in (1, -1):
                raise ValueError("forced must be +1 or -1")
            outcome = forced * sign
            probability = p_plus if outcome == 1 else 1.0 - p_plus
            if probability < POSTSELECTION_FLOOR:
                raise ImpossiblePostselectionError(
                    f"Outcome {forced:+d} of {p if sign == 1 else -p} has probability {probability:.3e}"
                )
        else:
            if rng is None:
                raise ValueError("rng is required for a sampled measurement")
            outcome = 1 if rng.random() < p_plus else -1
            probability = p_plus if outcome == 1 else 1.0 - p_plus

        anticommuting = [i for i, s in enumerate(self.frame) if commutes(s, p)]
        if anticommuting:
            self._project_anticommuting(p, outcome, anticommuting)
        else:
            self._project_commuting(p, outcome)

        result = MeasurementOutcome(
            eigenvalue=outcome * sign,
            probability=probability,
            forced=forced is not None,
            p_plus=p_plus if sign == 1 else 1.0 - p_plus,
            commuting=not anticommuting,
        )
        return result, self

    def _project_commuting(self, p: PauliString, outcome: int):
        subset, gamma = self.decomposer.decompose(p, check=False)
        wanted = 0 if (gamma == 0) == (outcome == 1) else 1
        kept = {
            label: entry for label, entry in self.entries.items()
            if (label & subset).bit_count() & 1 == wanted
        }
        weight = sum(abs(a) ** 2 for a, _ in kept.values())
        if weight <= 0.0:
            raise ImpossiblePostselectionError(f"No support left after projecting onto {outcome:+d} of {p}")
        self.entries = kept
        self._rescale(1.0 / np.sqrt(weight))

    def _project_anticommuting(self, p: PauliString, outcome: int, anticommuting: List[int]):
        r = anticommuting[0]
        frame = list(self.frame)
        a_op = frame[r]
        for j in anticommuting[1:]:
            frame[j] = multiply(frame[j], a_op)
        stabilizers = [frame[i] for i in range(self.n) if i != r]
        u = frame_reduction_clifford(stabilizers, a_op, p)
        u_inverse = u.inverse()
        last = self.n - 1

        new_frame = list(frame)
        new_frame[r] = p
        self.frame = new_frame
        self._frame_changed()

        bucket: Dict[int, List] = {}
        for label in sorted(self.entries):
            amp, hist = self.entries[label]
            image = conjugate(u, hist)
            alpha, beta = _PLUS_STATE_SPLIT[image.letter(last)]
            rest = image.without_qubit(last)
            if outcome == 1:
                coefficient, target = alpha, rest
            else:
                coefficient, target = beta, rest.with_letter(last, "X")
            history = conjugate(u_inverse, target)
            self._merge_into(bucket, self.label_of(history), amp * coefficient, history)
        self._install(bucket)

        weight = self.norm_squared()
        if weight <= 0.0:
            raise ImpossiblePostselectionError(f"No support left after projecting onto {outcome:+d} of {p}")
        self._rescale(1.0 / np.sqrt(weight))
        self.labels_stale = False
        logger.debug("Frame slot %d replaced by %s; %d entries", r, p, len(self.entries))

    def reset(self, qubit: int, rng: np.random.Generator) -> MeasurementOutcome:
        """Measure Z on ``qubit`` and flip it back to |0⟩ on a -1 outcome"""
        outcome, _ = self.measure_pauli(PauliString.single(self.n, qubit, "Z"), rng=rng)
        if outcome.eigenvalue == -1:
            self.apply_pauli(PauliString.single(self.n, qubit, "X"))
        return outcome

    # ------------------------------------------------------------------
    # Truncation
    # ------------------------------------------------------------------

    def truncate(self, epsilon: float) -> "PFSRState":
        """Drop entries with |α| < ε and renormalize; the largest entry always survives"""
        if epsilon <= 0:
            return self
        self._ensure_fresh()
        kept = {label: e for label, e in self.entries.items() if abs(e[0]) >= epsilon}
        if not kept:
            label, entry = max(self.entries.items(), key=lambda item: abs(item[1][0]))
            kept = {label: entry}
            self.global_log["truncation_fallbacks"] = self.global_log.get("truncation_fallbacks", 0) + 1
            logger.warning("All amplitudes below ε=%g; kept the largest entry", epsilon)
        if len(kept) == len(self.entries):
            return self
        self.entries = kept
        self._rescale(1.0 / np.sqrt(self.norm_squared()))
        return self

    # ------------------------------------------------------------------
    # Oracle bridge and dumps
    # ------------------------------------------------------------------

    def to_dense(self) -> np.ndarray:
        """Σ α_s P_s |0_frame⟩ as a 2^n vector (qubit k = bit k of the index)"""
        self._ensure_fresh()
        limit = oracle_max_qubits()
        if self.n > limit:
            raise OracleLimitError(f"{self.n} qubits exceeds the dense oracle cap {limit}")
        dim = 1 << self.n
        reference = None
        for seed in range(dim):
            v = np.zeros(dim, dtype=complex)
            v[seed] = 1.0
            for s in self.frame:
                v = 0.5 * (v + apply_pauli_to_vector(v, s))
            norm = np.linalg.norm(v)
            if norm > 1e-9:
                reference = v / norm
                break
        psi = np.zeros(dim, dtype=complex)
        for amp, hist in self.entries.values():
            psi += amp * apply_pauli_to_vector(reference, hist)
        return psi / np.linalg.norm(psi)

    def dump(self) -> str:
        """Frame lines "S:<pauli>", then "label<TAB>re,im<TAB>history" per entry"""
        self._ensure_fresh()
        lines = [f"S:{s.to_literal(explicit_sign=True)}" for s in self.frame]
        for label in sorted(self.entries):
            amp, hist = self.entries[label]
            lines.append(f"{label_to_string(label, self.n)}\t{amp.real!r},{amp.imag!r}\t{hist.to_literal(explicit_sign=True)}")
        return "\n".join(lines)

    @classmethod
    def from_dump(cls, text: str) -> "PFSRState":
        frame: List[PauliString] = []
        entries: Dict[int, Entry] = {}
        for line in text.strip().splitlines():
            if line.startswith("S:"):
                frame.append(PauliString.from_literal(line[2:]))
                continue
            label_text, amp_text, hist_text = line.split("\t")
            re_part, im_part = amp_text.split(",")
            entries[string_to_label(label_text)] = (complex(float(re_part), float(im_part)), PauliString.from_literal(hist_text))
        return cls(len(frame), frame, entries)

    def check_invariants(self) -> List[str]:
        """Return violated invariants (empty when the state is consistent)"""
        problems = []
        for i, s in enumerate(self.frame):
            for t in self.frame[i + 1:]:
                if commutes(s, t):
                    problems.append(f"frame elements {s} and {t} anticommute")
        if gf2_rank(self.frame) != self.n:
            problems.append("frame is not independent")
        if self.pending_clifford is None and not self.labels_stale:
            for label, (_, hist) in self.entries.items():
                if self.label_of(hist) != label:
                    problems.append(f"label {label_to_string(label, self.n)} disagrees with history {hist}")
        if abs(self.norm_squared() - 1.0) > NORM_TOLERANCE:
            problems.append(f"norm² is {self.norm_squared():.12f}")
        return problems


def init_zero(n: int) -> PFSRState:
    return PFSRState.init_zero(n)


def inner_product(a: PFSRState, b: PFSRState) -> complex:
    return a.inner_product(b)


if __name__ == "__main__":
    # Bell pair, then T on qubit 0, then a forced ZI measurement
    state = PFSRState.init_zero(2)
    state.apply_gate("H", [0]).apply_gate("CX", [0, 1])
    print(state.dump(), "\n")
    state.apply_t(0)
    print(state.dump(), "\n")
    outcome, _ = state.measure_pauli(PauliString.from_literal("ZI"), forced=-1)
    print(f"p = {outcome.probability:.3f}")
    print(state.dump())
