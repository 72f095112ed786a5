"""
Pauli Algebra - Symplectic Pauli strings and Clifford tableaux
Exact n-qubit Pauli group arithmetic used by every other module
"""

import re
from dataclasses import dataclass
from typing import Dict, Iterable, Iterator, List, Optional, Sequence, Tuple

import numpy as np


class DimensionError(ValueError):
    """Operands act on different numbers of qubits"""


class PreconditionError(ValueError):
    """Inputs violate the (anti)commutation or independence requirements"""


class NotInGroupError(ValueError):
    """Pauli anticommutes with a frame element, so it is not in the stabilizer group"""


class IndependenceError(ValueError):
    """GF(2) system has no solution or the frame is rank deficient"""


class PauliParseError(ValueError):
    """Malformed Pauli literal"""


# Phase prefixes of the textual literal format, indexed by quarter turns
PHASE_PREFIXES = {"+": 0, "+i": 1, "-": 2, "-i": 3}
PHASE_TEXT = ["+", "+i", "-", "-i"]
LETTERS = "IXYZ"

_LITERAL_RE = re.compile(r"^(\+i|-i|\+|-)?([IXYZ]*)$")


def iter_bits(mask: int) -> Iterator[int]:
    """Yield indices of set bits in ascending order"""
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


def _bit(value: int, index: int) -> int:
    return (value >> index) & 1


@dataclass(frozen=True)
class PauliString:
    """
    n-qubit Pauli operator in symplectic form.

    Bit k of ``z_bits``/``x_bits`` belongs to qubit k. ``phase_power`` counts
    quarter turns in front of the letter form, so the operator is
    i^phase_power (L_0 ⊗ L_1 ⊗ ...) with L_k ∈ {I, X, Y, Z} and z=x=1 meaning Y.
    The Z^z X^x product form used for multiplication carries one extra
    quarter turn per Y (Y = i^3 ZX).
    """
    n: int
    z_bits: int = 0
    x_bits: int = 0
    phase_power: int = 0

    def __post_init__(self):
        if self.n < 0:
            raise DimensionError(f"Qubit count must be non-negative, got {self.n}")
        limit = 1 << self.n
        if self.z_bits < 0 or self.x_bits < 0 or self.z_bits >= limit or self.x_bits >= limit:
            raise DimensionError(f"Bit rows do not fit in {self.n} qubits")
        object.__setattr__(self, "phase_power", self.phase_power % 4)

    # ------------------------------------------------------------------
    # Construction
    # ------------------------------------------------------------------

    @classmethod
    def identity(cls, n: int) -> "PauliString":
        return cls(n)

    @classmethod
    def single(cls, n: int, qubit: int, letter: str) -> "PauliString":
        """Single-qubit Pauli ``letter`` on ``qubit``"""
        return cls.from_support(n, [qubit], letter)

    @classmethod
    def from_support(cls, n: int, qubits: Iterable[int], letter: str) -> "PauliString":
        """Same letter on every qubit of ``qubits``"""
        if letter not in LETTERS:
            raise PauliParseError(f"Unknown Pauli letter {letter!r}")
        mask = 0
        for q in qubits:
            if not 0 <= q < n:
                raise DimensionError(f"Qubit {q} out of range for n={n}")
            mask |= 1 << q
        z = mask if letter in "ZY" else 0
        x = mask if letter in "XY" else 0
        return cls(n, z, x, 0)

    @classmethod
    def from_letters(cls, n: int, letters: Dict[int, str], phase_power: int = 0) -> "PauliString":
        """Build from a {qubit: letter} map"""
        z = x = 0
        for q, letter in letters.items():
            if letter not in LETTERS:
                raise PauliParseError(f"Unknown Pauli letter {letter!r}")
            if letter in "ZY":
                z |= 1 << q
            if letter in "XY":
                x |= 1 << q
        return cls(n, z, x, phase_power)

    @classmethod
    def from_literal(cls, text: str) -> "PauliString":
        """
        Parse a literal such as "-iXZY".

        The optional prefix is one of "+", "-", "+i", "-i"; the letters are
        read left to right as qubits 0, 1, 2, ...
        """
        match = _LITERAL_RE.match(text.strip())
        if not match:
            raise PauliParseError(f"Invalid Pauli literal {text!r}")
        prefix, body = match.groups()
        phase = PHASE_PREFIXES[prefix] if prefix else 0
        z = x = 0
        for k, letter in enumerate(body):
            if letter in "ZY":
                z |= 1 << k
            if letter in "XY":
                x |= 1 << k
        return cls(len(body), z, x, phase)

    def to_literal(self, explicit_sign: bool = False) -> str:
        """Print in the literal format; parsing the result gives back ``self``"""
        body = "".join(self.letter(k) for k in range(self.n))
        if self.phase_power == 0 and not explicit_sign:
            return body
        return PHASE_TEXT[self.phase_power] + body

    def __str__(self) -> str:
        return self.to_literal()

    def __repr__(self) -> str:
        return f"PauliString('{self.to_literal()}')"

    # ------------------------------------------------------------------
    # Queries
    # ------------------------------------------------------------------

    def letter(self, qubit: int) -> str:
        return "IXZY"[_bit(self.x_bits, qubit) | (_bit(self.z_bits, qubit) << 1)]

    @property
    def support(self) -> int:
        return self.z_bits | self.x_bits

    @property
    def weight(self) -> int:
        return self.support.bit_count()

    @property
    def y_count(self) -> int:
        return (self.z_bits & self.x_bits).bit_count()

    def is_identity(self) -> bool:
        return self.z_bits == 0 and self.x_bits == 0 and self.phase_power == 0

    def is_hermitian(self) -> bool:
        return self.phase_power % 2 == 0

    def same_bits(self, other: "PauliString") -> bool:
        return self.z_bits == other.z_bits and self.x_bits == other.x_bits

    def symplectic_vector(self) -> int:
        """z bits in the low n positions, x bits above them"""
        return self.z_bits | (self.x_bits << self.n)

    # ------------------------------------------------------------------
    # Algebra
    # ------------------------------------------------------------------

    def __mul__(self, other: "PauliString") -> "PauliString":
        return multiply(self, other)

    def __neg__(self) -> "PauliString":
        return PauliString(self.n, self.z_bits, self.x_bits, self.phase_power + 2)

    def with_phase(self, phase_power: int) -> "PauliString":
        return PauliString(self.n, self.z_bits, self.x_bits, phase_power)

    def times_phase(self, quarter_turns: int) -> "PauliString":
        return PauliString(self.n, self.z_bits, self.x_bits, self.phase_power + quarter_turns)

    def dagger(self) -> "PauliString":
        # Letters are Hermitian, only the scalar conjugates
        return PauliString(self.n, self.z_bits, self.x_bits, -self.phase_power)

    def commutes_with(self, other: "PauliString") -> bool:
        return commutes(self, other) == 0

    def without_qubit(self, qubit: int) -> "PauliString":
        """Drop the letter on ``qubit`` (phase of the letter form is kept)"""
        mask = ~(1 << qubit)
        return PauliString(self.n, self.z_bits & mask, self.x_bits & mask, self.phase_power)

    def with_letter(self, qubit: int, letter: str) -> "PauliString":
        """Replace the letter on ``qubit``"""
        base = self.without_qubit(qubit)
        z = base.z_bits | ((1 << qubit) if letter in "ZY" else 0)
        x = base.x_bits | ((1 << qubit) if letter in "XY" else 0)
        return PauliString(self.n, z, x, self.phase_power)


def _check_dims(a: PauliString, b: PauliString):
    if a.n != b.n:
        raise DimensionError(f"Qubit count mismatch: {a.n} vs {b.n}")


def multiply(a: PauliString, b: PauliString) -> PauliString:
    """
    Product a·b with exact phase.

    In the Z^z X^x form, moving X^{x_a} past Z^{z_b} costs (-1)^{x_a·z_b};
    letter-form phases are converted on the way in and out.
    """
    _check_dims(a, b)
    q = (a.phase_power - a.y_count) + (b.phase_power - b.y_count)
    q += 2 * (a.x_bits & b.z_bits).bit_count()
    z = a.z_bits ^ b.z_bits
    x = a.x_bits ^ b.x_bits
    q += (z & x).bit_count()
    return PauliString(a.n, z, x, q)


def commutes(a: PauliString, b: PauliString) -> int:
    """0 if a and b commute, 1 if they anticommute"""
    _check_dims(a, b)
    return ((a.x_bits & b.z_bits).bit_count() + (a.z_bits & b.x_bits).bit_count()) & 1


def product(paulis: Sequence[PauliString], n: Optional[int] = None) -> PauliString:
    """Ordered product of a sequence (identity when empty)"""
    if not paulis:
        if n is None:
            raise DimensionError("Qubit count required for an empty product")
        return PauliString.identity(n)
    result = paulis[0]
    for p in paulis[1:]:
        result = multiply(result, p)
    return result


# ----------------------------------------------------------------------
# Elementary Clifford gates acting by conjugation
# ----------------------------------------------------------------------

# Gate name -> number of qubit arguments
GATE_ARITY = {"H": 1, "S": 1, "SDG": 1, "X": 1, "Y": 1, "Z": 1, "CX": 2, "CNOT": 2, "CZ": 2}


def conjugate_gate(p: PauliString, name: str, qubits: Sequence[int]) -> PauliString:
    """
    Return G·p·G† for an elementary gate G.

    Sign updates follow the letter-form tableau rules; they apply unchanged
    to non-Hermitian strings because conjugation is linear.
    """
    z, x = p.z_bits, p.x_bits
    flip = 0
    if name == "H":
        a = qubits[0]
        xa, za = _bit(x, a), _bit(z, a)
        flip = xa & za
        if xa != za:
            z ^= 1 << a
            x ^= 1 << a
    elif name == "S":
        a = qubits[0]
        xa, za = _bit(x, a), _bit(z, a)
        flip = xa & za
        z ^= xa << a
    elif name == "SDG":
        a = qubits[0]
        xa, za = _bit(x, a), _bit(z, a)
        flip = xa & (za ^ 1)
        z ^= xa << a
    elif name == "X":
        flip = _bit(z, qubits[0])
    elif name == "Z":
        flip = _bit(x, qubits[0])
    elif name == "Y":
        a = qubits[0]
        flip = _bit(x, a) ^ _bit(z, a)
    elif name in ("CX", "CNOT"):
        c, t = qubits
        xc, zc, xt, zt = _bit(x, c), _bit(z, c), _bit(x, t), _bit(z, t)
        flip = xc & zt & (xt ^ zc ^ 1)
        x ^= xc << t
        z ^= zt << c
    elif name == "CZ":
        a, b = qubits
        xa, za, xb, zb = _bit(x, a), _bit(z, a), _bit(x, b), _bit(z, b)
        flip = xa & xb & (za ^ zb)
        z ^= xb << a
        z ^= xa << b
    else:
        raise ValueError(f"Unknown Clifford gate {name!r}")
    return PauliString(p.n, z, x, p.phase_power + 2 * flip)


# ----------------------------------------------------------------------
# Clifford tableau
# ----------------------------------------------------------------------

@dataclass(frozen=True)
class CliffordTableau:
    """Images of Z_i and X_i under conjugation by a Clifford unitary"""
    n: int
    z_images: Tuple[PauliString, ...]
    x_images: Tuple[PauliString, ...]

    def __post_init__(self):
        if len(self.z_images) != self.n or len(self.x_images) != self.n:
            raise DimensionError("Tableau needs exactly n Z images and n X images")
        for image in self.z_images + self.x_images:
            if image.n != self.n:
                raise DimensionError("Tableau image has the wrong qubit count")

    @classmethod
    def identity(cls, n: int) -> "CliffordTableau":
        return cls(
            n,
            tuple(PauliString.single(n, i, "Z") for i in range(n)),
            tuple(PauliString.single(n, i, "X") for i in range(n)),
        )

    @classmethod
    def from_gate(cls, n: int, name: str, qubits: Sequence[int]) -> "CliffordTableau":
        return cls.identity(n).then_gate(name, qubits)

    @classmethod
    def from_gates(cls, n: int, gates: Iterable[Tuple[str, Sequence[int]]]) -> "CliffordTableau":
        """Tableau of a gate sequence, first gate applied first"""
        tableau = cls.identity(n)
        for name, qubits in gates:
            tableau = tableau.then_gate(name, qubits)
        return tableau

    @classmethod
    def hadamard(cls, n: int, qubit: int) -> "CliffordTableau":
        return cls.from_gate(n, "H", [qubit])

    @classmethod
    def phase(cls, n: int, qubit: int) -> "CliffordTableau":
        return cls.from_gate(n, "S", [qubit])

    @classmethod
    def cnot(cls, n: int, control: int, target: int) -> "CliffordTableau":
        return cls.from_gate(n, "CX", [control, target])

    def then_gate(self, name: str, qubits: Sequence[int]) -> "CliffordTableau":
        """Tableau of G∘self, i.e. this Clifford followed by gate G"""
        return CliffordTableau(
            self.n,
            tuple(conjugate_gate(p, name, qubits) for p in self.z_images),
            tuple(conjugate_gate(p, name, qubits) for p in self.x_images),
        )

    def is_identity(self) -> bool:
        return self == CliffordTableau.identity(self.n)

    def is_valid(self) -> bool:
        """Check the commutation structure of the images"""
        for i in range(self.n):
            for j in range(self.n):
                expected = 1 if i == j else 0
                if commutes(self.z_images[i], self.x_images[j]) != expected:
                    return False
                if commutes(self.z_images[i], self.z_images[j]) or commutes(self.x_images[i], self.x_images[j]):
                    return False
        return all(p.is_hermitian() for p in self.z_images + self.x_images)

    def conjugate(self, p: PauliString) -> PauliString:
        return conjugate(self, p)

    def preimage(self, p: PauliString) -> PauliString:
        """
        Return Q with self(Q) = p.

        The images form a symplectic basis, so the bits of Q are read off
        from commutation with the images; the phase is fixed afterwards.
        """
        if p.n != self.n:
            raise DimensionError(f"Qubit count mismatch: {self.n} vs {p.n}")
        z = x = 0
        for i in range(self.n):
            if commutes(p, self.x_images[i]):
                z |= 1 << i
            if commutes(p, self.z_images[i]):
                x |= 1 << i
        candidate = PauliString(self.n, z, x, 0)
        image = conjugate(self, candidate)
        if not image.same_bits(p):
            raise PreconditionError("Tableau is not a valid Clifford; preimage failed")
        return candidate.with_phase(p.phase_power - image.phase_power)

    def inverse(self) -> "CliffordTableau":
        return CliffordTableau(
            self.n,
            tuple(self.preimage(PauliString.single(self.n, i, "Z")) for i in range(self.n)),
            tuple(self.preimage(PauliString.single(self.n, i, "X")) for i in range(self.n)),
        )


def conjugate(t: CliffordTableau, p: PauliString) -> PauliString:
    """
    Return t·p·t†.

    p is rewritten as i^q Π_k Z_k^{z_k} X_k^{x_k} (qubits ascending) and each
    generator is replaced by its image.
    """
    if t.n != p.n:
        raise DimensionError(f"Qubit count mismatch: {t.n} vs {p.n}")
    result = PauliString(p.n, 0, 0, p.phase_power - p.y_count)
    for k in iter_bits(p.support):
        if (p.z_bits >> k) & 1:
            result = multiply(result, t.z_images[k])
        if (p.x_bits >> k) & 1:
            result = multiply(result, t.x_images[k])
    return result


def compose(outer: CliffordTableau, inner: CliffordTableau) -> CliffordTableau:
    """Tableau conjugating as outer∘inner"""
    if outer.n != inner.n:
        raise DimensionError(f"Qubit count mismatch: {outer.n} vs {inner.n}")
    return CliffordTableau(
        outer.n,
        tuple(conjugate(outer, p) for p in inner.z_images),
        tuple(conjugate(outer, p) for p in inner.x_images),
    )


# ----------------------------------------------------------------------
# GF(2) helpers
# ----------------------------------------------------------------------

def gf2_rank(paulis: Sequence[PauliString]) -> int:
    """Rank of the symplectic rows over GF(2)"""
    pivots: Dict[int, int] = {}
    rank = 0
    for p in paulis:
        v = p.symplectic_vector()
        while v:
            top = v.bit_length() - 1
            if top in pivots:
                v ^= pivots[top]
            else:
                pivots[top] = v
                rank += 1
                break
    return rank


class FrameDecomposer:
    """
    Reusable GF(2) elimination over a fixed stabilizer frame.

    Building costs O(n²) row operations; each decomposition afterwards is a
    single pass over the pivots.
    """

    def __init__(self, frame: Sequence[PauliString]):
        if not frame:
            raise IndependenceError("Frame is empty")
        self.frame = tuple(frame)
        self.n = frame[0].n
        self._pivots: List[Tuple[int, int, int]] = []
        for i, s in enumerate(self.frame):
            v = s.symplectic_vector()
            mask = 1 << i
            for pivot_bit, pv, pm in self._pivots:
                if v & pivot_bit:
                    v ^= pv
                    mask ^= pm
            if v == 0:
                raise IndependenceError(f"Frame element {i} ({s}) is dependent on earlier elements")
            self._pivots.append((v & -v, v, mask))

    def subset_of(self, p: PauliString) -> int:
        """Bitmask A with p ∝ Π_{i∈A} S_i, ignoring phase"""
        v = p.symplectic_vector()
        subset = 0
        for pivot_bit, pv, pm in self._pivots:
            if v & pivot_bit:
                v ^= pv
                subset ^= pm
        if v:
            raise IndependenceError(f"{p} is not generated by the frame")
        return subset

    def decompose(self, p: PauliString, check: bool = True) -> Tuple[int, int]:
        """
        Solve p = γ·Π_{i∈A} S_i.

        Returns:
            (subset bitmask A, γ as quarter turns)
        """
        if p.n != self.n:
            raise DimensionError(f"Qubit count mismatch: {self.n} vs {p.n}")
        if check:
            for i, s in enumerate(self.frame):
                if commutes(s, p):
                    raise NotInGroupError(f"{p} anticommutes with frame element {i} ({s})")
        subset = self.subset_of(p)
        return subset, self.phase_for(p, subset)

    def phase_for(self, p: PauliString, subset: int) -> int:
        """γ for a known subset, from the explicit ordered product"""
        prod = PauliString.identity(self.n)
        for i in iter_bits(subset):
            prod = multiply(prod, self.frame[i])
        return (p.phase_power - prod.phase_power) % 4


def stabilizer_decomposition(frame: Sequence[PauliString], p: PauliString) -> Tuple[Tuple[int, ...], int]:
    """
    Decompose p over the frame: p = γ·Π_{i∈A} S_i (product in ascending i).

    Returns:
        (sorted tuple of indices A, γ as quarter turns so γ = i^value)
    """
    subset, gamma = FrameDecomposer(frame).decompose(p)
    return tuple(iter_bits(subset)), gamma


# ----------------------------------------------------------------------
# Frame reduction
# ----------------------------------------------------------------------

class _GateRecorder:
    """Applies gates to working rows and remembers the sequence"""

    def __init__(self, rows: List[PauliString]):
        self.rows = rows
        self.gates: List[Tuple[str, Tuple[int, ...]]] = []

    def apply(self, name: str, *qubits: int):
        self.gates.append((name, qubits))
        self.rows[:] = [conjugate_gate(r, name, qubits) for r in self.rows]


def frame_reduction_clifford(
    stabilizers: Sequence[PauliString], a: PauliString, b: PauliString
) -> CliffordTableau:
    """
    Build a Clifford U by Gaussian elimination on the symplectic rows with

        U S_i U† = Z_i (i < n-1),  U b U† = Z_{n-1},  U a U† = X_{n-1}

    all with phase exactly +1.

    Args:
        stabilizers: n-1 commuting Hermitian Paulis
        a: Hermitian Pauli commuting with the stabilizers, anticommuting with b
        b: Hermitian Pauli commuting with the stabilizers
    """
    n = a.n
    rows = list(stabilizers) + [b]
    if len(rows) != n or b.n != n or any(s.n != n for s in stabilizers):
        raise PreconditionError(f"Need {n - 1} stabilizers on {n} qubits")
    everything = rows + [a]
    for p in everything:
        if not p.is_hermitian():
            raise PreconditionError(f"{p} is not Hermitian")
    for i, s in enumerate(rows):
        for t in rows[i + 1:]:
            if commutes(s, t):
                raise PreconditionError(f"{s} and {t} anticommute")
    for s in stabilizers:
        if commutes(s, a):
            raise PreconditionError(f"{s} anticommutes with {a}")
    if not commutes(a, b):
        raise PreconditionError(f"{a} and {b} must anticommute")
    if gf2_rank(everything) != n + 1:
        raise PreconditionError("Inputs are not independent")

    work = _GateRecorder(everything)
    # Step 1: rows 0..n-1 become Z_i
    for i in range(n):
        row = work.rows[i]
        if not _bit(row.z_bits, i):
            if _bit(row.x_bits, i):
                work.apply("H", i)
            else:
                j = next((j for j in range(i + 1, n) if _bit(row.z_bits, j)), None)
                if j is None:
                    # Only X support remains above i; rotate the lowest one to Z first
                    j = next(j for j in range(i + 1, n) if _bit(row.x_bits, j))
                    work.apply("H", j)
                work.apply("CX", i, j)
        for j in range(n):
            if j == i:
                continue
            if _bit(work.rows[i].z_bits, j):
                work.apply("CX", j, i)
            if _bit(work.rows[i].x_bits, j):
                work.apply("H", j)
                work.apply("CX", j, i)
        if _bit(work.rows[i].x_bits, i):
            work.apply("H", i)
            work.apply("S", i)
            work.apply("H", i)
        if work.rows[i].phase_power == 2:
            work.apply("X", i)

    # Step 2: last row becomes X_{n-1}
    last = n - 1
    row = work.rows[n]
    if _bit(row.z_bits, last) and _bit(row.x_bits, last):
        work.apply("S", last)
    elif _bit(row.z_bits, last):
        work.apply("H", last)
    for j in range(last):
        if _bit(work.rows[n].z_bits, j):
            work.apply("H", j)
            work.apply("CX", last, j)
            work.apply("H", j)
    if _bit(work.rows[n].z_bits, last):
        work.apply("SDG", last)
    if work.rows[n].phase_power == 2:
        work.apply("Z", last)

    return CliffordTableau.from_gates(n, work.gates)


def random_clifford(n: int, rng: np.random.Generator, depth: Optional[int] = None) -> CliffordTableau:
    """Tableau of a random H/S/CX circuit (fixtures and self-checks)"""
    depth = depth if depth is not None else 4 * n * n + 4
    tableau = CliffordTableau.identity(n)
    for _ in range(depth):
        choice = rng.integers(3) if n > 1 else rng.integers(2)
        if choice == 0:
            tableau = tableau.then_gate("H", [int(rng.integers(n))])
        elif choice == 1:
            tableau = tableau.then_gate("S", [int(rng.integers(n))])
        else:
            c, t = rng.choice(n, size=2, replace=False)
            tableau = tableau.then_gate("CX", [int(c), int(t)])
    return tableau


def random_pauli(n: int, rng: np.random.Generator, hermitian: bool = False) -> PauliString:
    z = sum(int(b) << k for k, b in enumerate(rng.integers(0, 2, size=n)))
    x = sum(int(b) << k for k, b in enumerate(rng.integers(0, 2, size=n)))
    phase = int(rng.integers(2)) * 2 if hermitian else int(rng.integers(4))
    return PauliString(n, z, x, phase)


if __name__ == "__main__":
    x = PauliString.from_literal("X")
    z = PauliString.from_literal("Z")
    print(f"X·Z = {(x * z).to_literal()}")

    zz = PauliString.from_literal("ZZ")
    xx = PauliString.from_literal("XX")
    zi = PauliString.from_literal("ZI")
    u = frame_reduction_clifford([zz], xx, zi)
    for p in (zz, xx, zi):
        print(f"U {p} U† = {conjugate(u, p)}")
