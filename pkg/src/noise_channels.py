"""
Noise Channels - Physical error processes applied to PFSR states
Exact stochastic Kraus application, Pauli-twirled surrogates and
signed quasiprobability sampling
"""

import logging
from dataclasses import dataclass, replace
from enum import Enum
from typing import List, Optional, Sequence, Tuple

import numpy as np

from dense_oracle import pauli_channel_kraus, rz_matrix
from pauli_algebra import PauliString
from pfsr_state import PFSRState

logger = logging.getLogger("pfsr_sim")

PROBABILITY_SLACK = 1e-9


class InternalConsistencyError(RuntimeError):
    """A computed probability left [0, 1] by more than rounding error"""


class ChannelModeError(ValueError):
    """Channel kind does not support the requested application mode"""


class ChannelKind(Enum):
    """Physical error processes"""
    DEPOLARIZING = "depolarizing"
    AMPLITUDE_DAMPING = "amplitude_damping"
    COHERENT_Z = "coherent_z"
    BIT_FLIP = "bit_flip"
    PHASE_FLIP = "phase_flip"
    MEASUREMENT_FLIP = "measurement_flip"


class ChannelMode(Enum):
    """How a channel is applied to a trajectory"""
    EXACT = "exact"
    PTA = "pta"
    QUASIPROBABILITY = "quasiprobability"


PAULI_KINDS = {ChannelKind.DEPOLARIZING, ChannelKind.BIT_FLIP, ChannelKind.PHASE_FLIP}
TWIRLABLE_KINDS = {ChannelKind.DEPOLARIZING, ChannelKind.AMPLITUDE_DAMPING, ChannelKind.COHERENT_Z}
QUASIPROBABILITY_KINDS = {ChannelKind.AMPLITUDE_DAMPING, ChannelKind.COHERENT_Z}


@dataclass(frozen=True)
class NoiseChannel:
    """
    Tagged description of an error process.

    ``parameter`` is p for the flip and depolarizing kinds, γ for amplitude
    damping and θ for the coherent Z rotation.
    """
    kind: ChannelKind
    parameter: float
    mode: ChannelMode = ChannelMode.EXACT
    target: Optional[int] = None

    def __post_init__(self):
        if self.kind == ChannelKind.COHERENT_Z:
            if not -np.pi < self.parameter <= np.pi:
                raise ValueError(f"θ must lie in (-π, π], got {self.parameter}")
        elif not 0.0 <= self.parameter <= 1.0:
            raise ValueError(f"{self.kind.value} parameter must lie in [0, 1], got {self.parameter}")
        if self.mode == ChannelMode.PTA and self.kind not in TWIRLABLE_KINDS | PAULI_KINDS:
            raise ChannelModeError(f"PTA mode is not defined for {self.kind.value}")
        if self.mode == ChannelMode.QUASIPROBABILITY and self.kind not in QUASIPROBABILITY_KINDS:
            raise ChannelModeError(f"Quasiprobability mode is not defined for {self.kind.value}")

    @classmethod
    def from_rate(cls, kind: ChannelKind, rate: float, mode: ChannelMode = ChannelMode.EXACT) -> "NoiseChannel":
        """Build from a physical error rate; coherent rates are sin²(θ/2)"""
        if kind == ChannelKind.COHERENT_Z:
            if not 0.0 <= rate <= 1.0:
                raise ValueError(f"Coherent rate must lie in [0, 1], got {rate}")
            return cls(kind, float(2.0 * np.arcsin(np.sqrt(rate))), mode)
        return cls(kind, float(rate), mode)

    def on(self, target: int) -> "NoiseChannel":
        return replace(self, target=target)

    @property
    def physical_rate(self) -> float:
        """p, γ or sin²(θ/2)"""
        if self.kind == ChannelKind.COHERENT_Z:
            return pta_coherent(self.parameter)
        return self.parameter

    @property
    def measurement_flip_probability(self) -> float:
        """Classical flip probability paired with this channel in memory experiments"""
        return self.physical_rate

    @property
    def is_pauli(self) -> bool:
        """True when application never grows the entry count"""
        return self.kind in PAULI_KINDS or self.mode == ChannelMode.PTA

    def pauli_probabilities(self) -> Tuple[float, float, float]:
        """(p_X, p_Y, p_Z) of the Pauli channel (twirled when the kind is not Pauli)"""
        if self.kind == ChannelKind.DEPOLARIZING:
            third = self.parameter / 3.0
            return third, third, third
        if self.kind == ChannelKind.BIT_FLIP:
            return self.parameter, 0.0, 0.0
        if self.kind == ChannelKind.PHASE_FLIP:
            return 0.0, 0.0, self.parameter
        if self.kind == ChannelKind.AMPLITUDE_DAMPING:
            return pta_amplitude_damping(self.parameter)
        if self.kind == ChannelKind.COHERENT_Z:
            return 0.0, 0.0, pta_coherent(self.parameter)
        raise ChannelModeError(f"{self.kind.value} has no Pauli form")

    def describe(self) -> str:
        return f"{self.kind.value}({self.parameter:.6g}, {self.mode.value})"


@dataclass(frozen=True)
class SignedSampleWeight:
    """Running sign and magnitude of a quasiprobability trajectory"""
    sign: int = 1
    magnitude_product: float = 1.0

    @property
    def value(self) -> float:
        return self.sign * self.magnitude_product

    def times(self, sign: int, magnitude: float) -> "SignedSampleWeight":
        return SignedSampleWeight(self.sign * sign, self.magnitude_product * magnitude)


# ----------------------------------------------------------------------
# Closed-form parameters
# ----------------------------------------------------------------------

def pta_amplitude_damping(gamma: float) -> Tuple[float, float, float]:
    """Pauli-twirled amplitude damping: (γ/4, γ/4, (1-√(1-γ))/2 - γ/4)"""
    p_xy = gamma / 4.0
    p_z = (1.0 - np.sqrt(1.0 - gamma)) / 2.0 - gamma / 4.0
    return p_xy, p_xy, max(0.0, float(p_z))


def pta_coherent(theta: float) -> float:
    return float(np.sin(theta / 2.0) ** 2)


def amplitude_damping_kraus_terms(n: int, qubit: int, gamma: float) -> Tuple[List, List]:
    """Pauli expansions of K₀ = aI + bZ and K₁ = (√γ/2)(X + iY)"""
    identity = PauliString.identity(n)
    root = np.sqrt(1.0 - gamma)
    k0 = [((1.0 + root) / 2.0, identity), ((1.0 - root) / 2.0, PauliString.single(n, qubit, "Z"))]
    half = np.sqrt(gamma) / 2.0
    k1 = [(half, PauliString.single(n, qubit, "X")), (1j * half, PauliString.single(n, qubit, "Y"))]
    return k0, k1


def quasiprobability_coefficients(channel: NoiseChannel) -> Tuple[List[float], List[str]]:
    """
    Coefficients and sub-channel names of the stabilizer-channel decomposition.

    Amplitude damping uses {identity, Z, reset}; the coherent rotation uses
    {identity, Z, S} (S† for negative θ, with |sin θ| as its coefficient).
    """
    if channel.kind == ChannelKind.AMPLITUDE_DAMPING:
        gamma = channel.parameter
        root = np.sqrt(1.0 - gamma)
        return [((1.0 - gamma) + root) / 2.0, ((1.0 - gamma) - root) / 2.0, gamma], ["I", "Z", "RESET"]
    if channel.kind == ChannelKind.COHERENT_Z:
        theta = channel.parameter
        s = abs(np.sin(theta))
        c = np.cos(theta)
        return [(1.0 + c - s) / 2.0, (1.0 - c - s) / 2.0, s], ["I", "Z", "S" if theta >= 0 else "SDG"]
    raise ChannelModeError(f"No quasiprobability decomposition for {channel.kind.value}")


def negativity(channel: NoiseChannel) -> float:
    """Σ|q_i|; the per-application growth factor of the weight magnitude"""
    coefficients, _ = quasiprobability_coefficients(channel)
    return float(sum(abs(q) for q in coefficients))


def kraus_operators(channel: NoiseChannel) -> List[np.ndarray]:
    """Single-qubit Kraus set of the channel as it is applied in its mode"""
    if channel.mode == ChannelMode.PTA or channel.kind in PAULI_KINDS:
        return pauli_channel_kraus(*channel.pauli_probabilities())
    if channel.kind == ChannelKind.AMPLITUDE_DAMPING:
        gamma = channel.parameter
        return [
            np.array([[1, 0], [0, np.sqrt(1 - gamma)]], dtype=complex),
            np.array([[0, np.sqrt(gamma)], [0, 0]], dtype=complex),
        ]
    if channel.kind == ChannelKind.COHERENT_Z:
        return [rz_matrix(channel.parameter)]
    raise ChannelModeError(f"{channel.kind.value} acts on classical records only")


# ----------------------------------------------------------------------
# Application on PFSR states
# ----------------------------------------------------------------------

def sample_pauli_letter(probabilities: Sequence[float], rng: np.random.Generator) -> str:
    """Draw I/X/Y/Z from (p_X, p_Y, p_Z) with one uniform variate"""
    u = rng.random()
    cumulative = 0.0
    for letter, p in zip("XYZ", probabilities):
        cumulative += p
        if u < cumulative:
            return letter
    return "I"


def apply_pauli_channel(
    state: PFSRState, qubit: int, probabilities: Sequence[float], rng: np.random.Generator
) -> PFSRState:
    letter = sample_pauli_letter(probabilities, rng)
    if letter != "I":
        state.apply_pauli(PauliString.single(state.n, qubit, letter))
    return state


def apply_depolarizing(state: PFSRState, qubit: int, p: float, rng: np.random.Generator) -> PFSRState:
    """I, X, Y, Z with probabilities (1-p, p/3, p/3, p/3) via label permutation"""
    return apply_pauli_channel(state, qubit, (p / 3.0, p / 3.0, p / 3.0), rng)


def apply_amplitude_damping(state: PFSRState, qubit: int, gamma: float, rng: np.random.Generator) -> PFSRState:
    """
    Draw K₀ or K₁ with the Born probabilities and apply it as a Pauli sum.

    p₀ = ‖K₀ψ‖² = 1 - γ/2 (1 - ⟨Z⟩), which avoids applying K₀ twice.
    """
    if gamma == 0.0:
        return state
    z_expectation = state.expectation_pauli(PauliString.single(state.n, qubit, "Z"))
    p0 = 1.0 - 0.5 * gamma * (1.0 - z_expectation)
    if p0 < -PROBABILITY_SLACK or p0 > 1.0 + PROBABILITY_SLACK:
        raise InternalConsistencyError(f"Amplitude damping p₀ = {p0} outside [0, 1]")
    k0, k1 = amplitude_damping_kraus_terms(state.n, qubit, gamma)
    terms = k0 if rng.random() < p0 else k1
    return state.apply_pauli_sum(terms, renormalize=True)


def apply_coherent_z(state: PFSRState, qubit: int, theta: float) -> PFSRState:
    """Deterministic exp(-iθZ/2) on ``qubit``"""
    if theta == 0.0:
        return state
    return state.apply_rz(qubit, theta)


def apply_quasiprob(
    state: PFSRState,
    qubit: int,
    channel: NoiseChannel,
    rng: np.random.Generator,
    weight: SignedSampleWeight,
) -> Tuple[PFSRState, SignedSampleWeight]:
    """Sample one stabilizer sub-channel with probability |q_i|/Σ|q_j| and fold its sign into the weight"""
    coefficients, names = quasiprobability_coefficients(channel)
    magnitudes = np.abs(coefficients)
    total = float(magnitudes.sum())
    index = int(rng.choice(len(coefficients), p=magnitudes / total))
    name = names[index]
    if name == "Z":
        state.apply_pauli(PauliString.single(state.n, qubit, "Z"))
    elif name == "RESET":
        state.reset(qubit, rng)
    elif name in ("S", "SDG"):
        state.apply_gate(name, [qubit])
    sign = 1 if coefficients[index] >= 0 else -1
    return state, weight.times(sign, total)


def apply_channel(
    state: PFSRState,
    qubit: int,
    channel: NoiseChannel,
    rng: np.random.Generator,
    weight: Optional[SignedSampleWeight] = None,
) -> Tuple[PFSRState, Optional[SignedSampleWeight]]:
    """Dispatch on kind and mode; the weight only changes in quasiprobability mode"""
    if channel.kind == ChannelKind.MEASUREMENT_FLIP:
        raise ChannelModeError("Measurement flips act on recorded outcomes, not on the state")
    if channel.is_pauli:
        return apply_pauli_channel(state, qubit, channel.pauli_probabilities(), rng), weight
    if channel.mode == ChannelMode.QUASIPROBABILITY:
        return apply_quasiprob(state, qubit, channel, rng, weight or SignedSampleWeight())
    if channel.kind == ChannelKind.AMPLITUDE_DAMPING:
        return apply_amplitude_damping(state, qubit, channel.parameter, rng), weight
    return apply_coherent_z(state, qubit, channel.parameter), weight


def flip_record(bit: int, p: float, rng: np.random.Generator) -> int:
    """Classical measurement flip with probability p"""
    if p > 0.0 and rng.random() < p:
        return bit ^ 1
    return bit
