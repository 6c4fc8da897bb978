"""Topological qubit registers, braiding gates and measurement-based circuits.

A register of N topological qubits lives in the fixed-sector computational
space: per qubit, the four computational Majoranas A..D carry even joint
parity and the ancilla pair (E, F) is held at parity +1 between operations.
Within that sector the Majorana bilinears act exactly as Pauli operators,

    sigma_z = i gamma_A gamma_B,   sigma_x = i gamma_B gamma_C,
    sigma_y = i gamma_A gamma_C,   i gamma_E gamma_F = +1,

so the register state is a 2**N amplitude vector and every public operation
is a Pauli rotation or a projective parity measurement.  The full
6N-Majorana representation (used for cross checks at small N) reproduces the
same matrices on the sector basis |0> = |000>, |1> = |110> per qubit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import CompileError, ConsistencyError, ReplayError

_PAULI = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}

# Majorana pair -> (sign, Pauli letter) on the computational sector.
_PAIR_TO_PAULI = {
    ("A", "B"): (1.0, "Z"), ("B", "A"): (-1.0, "Z"),
    ("B", "C"): (1.0, "X"), ("C", "B"): (-1.0, "X"),
    ("A", "C"): (1.0, "Y"), ("C", "A"): (-1.0, "Y"),
    ("E", "F"): (1.0, "I"), ("F", "E"): (-1.0, "I"),
}


@dataclass(frozen=True)
class ParitySpec:
    """Which Majorana pairs enter a joint parity measurement.

    ``pairs`` holds (qubit index, (X, Y)) entries with X, Y in {A, B, C, E, F};
    pairs on the same qubit must be disjoint.
    """

    pairs: tuple

    def __post_init__(self):
        if not self.pairs:
            raise ValueError("parity spec must name at least one pair")
        used: dict = {}
        for qubit, (a, b) in self.pairs:
            if (a, b) not in _PAIR_TO_PAULI:
                raise ConsistencyError(
                    f"pair ({a},{b}) is not representable on the computational "
                    "sector (allowed: AB, BC, AC and the ancilla pair EF)")
            seen = used.setdefault(qubit, set())
            if seen & {a, b}:
                raise ValueError(f"pairs on qubit {qubit} are not disjoint")
            seen |= {a, b}

    def describe(self) -> str:
        return " ".join(f"{q}:{a}{b}" for q, (a, b) in self.pairs)


@dataclass
class MeasurementRecord:
    """Ordered log of projective measurements: (operator, outcome, probability)."""

    entries: list = field(default_factory=list)

    def append(self, operator: str, outcome: int, probability: float) -> None:
        if outcome not in (+1, -1):
            raise ValueError("outcomes are +1 or -1")
        if not 0.0 <= probability <= 1.0 + 1e-12:
            raise ValueError("probability must lie in [0, 1]")
        self.entries.append((operator, int(outcome), float(probability)))

    def extend(self, other: "MeasurementRecord") -> None:
        self.entries.extend(other.entries)

    def outcomes(self) -> tuple:
        return tuple(outcome for _, outcome, _ in self.entries)

    def to_csv(self) -> str:
        lines = ["step,operator,outcome,probability"]
        for step, (op, outcome, prob) in enumerate(self.entries):
            name = '"' + op.replace('"', '""') + '"' if ("," in op or '"' in op) else op
            lines.append(f"{step},{name},{outcome},{prob!r}")
        return "\n".join(lines) + "\n"


class LogicalRegister:
    """N topological qubits with a pure state and a measurement record.

    The register owns its state; concurrent experiments should use separate
    registers with independent RNG streams.  ``hardware_faithful`` turns on
    layout checking: every parity measurement is first lowered to Majorana
    moves on the triangular-qubit layout and rejected if infeasible.
    """

    def __init__(self, n_qubits: int, state=None, hardware_faithful: bool = False):
        if n_qubits < 1:
            raise ValueError("need at least one qubit")
        self.n_qubits = n_qubits
        self.dim = 2 ** n_qubits
        if state is None:
            state = np.zeros(self.dim, dtype=complex)
            state[0] = 1.0
        state = np.asarray(state, dtype=complex)
        if state.shape != (self.dim,):
            raise ValueError(f"state must have dimension {self.dim}")
        norm = np.linalg.norm(state)
        if abs(norm - 1.0) > 1e-12:
            raise ValueError("state must be normalized to 1e-12")
        self.state = state.copy()
        self.record = MeasurementRecord()
        self.hardware_faithful = hardware_faithful

    def qubit_operator(self, qubit: int, letter: str) -> np.ndarray:
        if not 0 <= qubit < self.n_qubits:
            raise ValueError(f"qubit index {qubit} out of range")
        ops = [_PAULI["I"]] * self.n_qubits
        ops[qubit] = _PAULI[letter]
        out = ops[0]
        for o in ops[1:]:
            out = np.kron(out, o)
        return out

    def apply(self, matrix: np.ndarray) -> None:
        self.state = matrix @ self.state

    def expectation(self, operator: np.ndarray) -> float:
        return float(np.real(self.state.conj() @ operator @ self.state))


def pauli_operators(register: LogicalRegister, qubit: int) -> tuple:
    """(sigma_x, sigma_y, sigma_z) of one qubit as full-register matrices."""
    return (register.qubit_operator(qubit, "X"),
            register.qubit_operator(qubit, "Y"),
            register.qubit_operator(qubit, "Z"))


def parity_operator(register: LogicalRegister, spec: ParitySpec) -> np.ndarray:
    """Joint parity operator: the product of pair parities i gamma gamma."""
    sign = 1.0
    letters = ["I"] * register.n_qubits
    for qubit, pair in spec.pairs:
        if not 0 <= qubit < register.n_qubits:
            raise ValueError(f"qubit index {qubit} out of range")
        s, letter = _PAIR_TO_PAULI[pair]
        sign *= s
        if letter != "I":
            # disjointness allows at most one computational pair per qubit
            letters[qubit] = letter
    out = np.eye(1, dtype=complex) * sign
    for letter in letters:
        out = np.kron(out, _PAULI[letter])
    return out


def _pauli_rotation(register: LogicalRegister, qubit: int, axis: str,
                    angle: float) -> np.ndarray:
    """exp(-i * angle * sigma_axis) on one qubit; sigma^2 = 1 gives the closed form."""
    sigma = register.qubit_operator(qubit, axis.upper())
    eye = np.eye(register.dim, dtype=complex)
    return math.cos(angle) * eye - 1j * math.sin(angle) * sigma


def braid_gate(register: LogicalRegister, qubit: int, axis: str,
               chirality: int = +1) -> LogicalRegister:
    """One Majorana exchange: exp(-i pi/4 sigma_axis), inverted for chirality -1.

    The z gate exchanges gamma_A, gamma_B; the x gate exchanges gamma_B,
    gamma_C; the y gate is their composition.  The ancilla pair is restored at
    the end of the exchange, so the register sector is unchanged.
    """
    if axis not in ("x", "y", "z"):
        raise ValueError("axis must be one of x, y, z")
    if chirality not in (+1, -1):
        raise ValueError("chirality is +1 or -1")
    register.apply(_pauli_rotation(register, qubit, axis,
                                   chirality * math.pi / 4.0))
    return register


def _check_layout_feasible(spec: ParitySpec) -> None:
    from .braid import MeasureOp, compile_schedule, triangle_layout

    for qubit, pair in spec.pairs:
        try:
            compile_schedule([MeasureOp(pairs=(pair,))], triangle_layout())
        except CompileError as exc:
            raise CompileError(
                f"measurement {qubit}:{pair[0]}{pair[1]} is not layout-feasible: "
                f"{exc}") from exc


def measure_parity(register: LogicalRegister, spec: ParitySpec, rng=None,
                   force: int | None = None) -> tuple:
    """Born-rule projective measurement of a joint parity operator.

    Returns ``(outcome, register)``.  In replay mode (``force`` given) the
    requested branch must have nonzero probability, else :class:`ReplayError`.
    """
    if register.hardware_faithful:
        _check_layout_feasible(spec)
    op = parity_operator(register, spec)
    psi = register.state
    p_plus = float(np.real(psi.conj() @ (psi + op @ psi)) / 2.0)
    p_plus = min(max(p_plus, 0.0), 1.0)
    if force is not None:
        if force not in (+1, -1):
            raise ValueError("forced outcome must be +1 or -1")
        prob = p_plus if force == +1 else 1.0 - p_plus
        if prob < 1e-12:
            raise ReplayError(
                f"forced outcome {force:+d} of {spec.describe()} has zero "
                "probability")
        outcome = force
    else:
        if rng is None:
            raise ValueError("need an rng (or a forced outcome)")
        outcome = +1 if rng.random() < p_plus else -1
        prob = p_plus if outcome == +1 else 1.0 - p_plus
    projected = (psi + outcome * (op @ psi)) / 2.0
    register.state = projected / np.linalg.norm(projected)
    register.record.append(spec.describe(), outcome, prob)
    return outcome, register


def _take(forced, index: int):
    return None if forced is None else forced[index]


def _measure_auto(register: LogicalRegister, spec: ParitySpec, rng) -> tuple:
    """Measure with the rng, or take the dominant branch when no rng is given."""
    if rng is not None:
        return measure_parity(register, spec, rng)
    op = parity_operator(register, spec)
    p_plus = (1.0 + register.expectation(op)) / 2.0
    return measure_parity(register, spec, force=+1 if p_plus >= 0.5 else -1)


def cnot(register: LogicalRegister, control: int, target: int, ancilla: int,
         rng=None, forced=None) -> MeasurementRecord:
    """Measurement-based CNOT on (control, target) consuming a reusable ancilla.

    The sequence measures the ancilla z parity (initializing it to |0> via the
    braiding correction R1), then the three-qubit parity z_c x_t x_a, then the
    ancilla y parity, and closes with the outcome-dependent braiding
    corrections.  Every outcome branch yields CNOT|psi> with the ancilla reset.
    """
    if len({control, target, ancilla}) != 3:
        raise ValueError("control, target and ancilla must be distinct")
    start = len(register.record.entries)
    p1, _ = measure_parity(register, ParitySpec(((ancilla, ("A", "B")),)),
                           rng, _take(forced, 0))
    if p1 == -1:
        register.apply(_pauli_rotation(register, ancilla, "x", -math.pi / 2.0))
    p2, _ = measure_parity(register, ParitySpec(((control, ("A", "B")),
                                                 (target, ("B", "C")),
                                                 (ancilla, ("B", "C")))),
                           rng, _take(forced, 1))
    p3, _ = measure_parity(register, ParitySpec(((ancilla, ("A", "C")),)),
                           rng, _take(forced, 2))
    register.apply(_pauli_rotation(register, control, "z",
                                   -p2 * p3 * math.pi / 4.0))
    register.apply(_pauli_rotation(register, target, "x",
                                   -p2 * p3 * math.pi / 4.0))
    register.apply(_pauli_rotation(register, ancilla, "x", p3 * math.pi / 4.0))
    out = MeasurementRecord()
    out.entries = register.record.entries[start:]
    return out


def teleport(register: LogicalRegister, source: int, bell_a: int, bell_b: int,
             rng=None, forced=None) -> MeasurementRecord:
    """Teleport the state of ``source`` onto ``bell_b``.

    The Bell resource is prepared internally: both Bell qubits are measured in
    z, flipped to |0> where needed, and entangled by an x_a x_b parity
    measurement.  The Bell-basis readout of (source, bell_a) then fixes the
    Pauli frame on the output; the leftover pair (source, bell_a) ends in a
    maximally entangled state.
    """
    if len({source, bell_a, bell_b}) != 3:
        raise ValueError("source and Bell qubits must be distinct")
    start = len(register.record.entries)
    # Bell-pair initialization; these measurements are not part of the forced
    # branch tuple, so without an rng the dominant branch is taken.
    for qubit in (bell_a, bell_b):
        z, _ = _measure_auto(register, ParitySpec(((qubit, ("A", "B")),)), rng)
        if z == -1:
            register.apply(_pauli_rotation(register, qubit, "x", -math.pi / 2.0))
    p1, _ = measure_parity(register, ParitySpec(((bell_a, ("B", "C")),
                                                 (bell_b, ("B", "C")))),
                           rng, _take(forced, 0))
    p2, _ = measure_parity(register, ParitySpec(((source, ("B", "C")),
                                                 (bell_a, ("B", "C")))),
                           rng, _take(forced, 1))
    p3, _ = measure_parity(register, ParitySpec(((source, ("A", "B")),
                                                 (bell_a, ("A", "B")))),
                           rng, _take(forced, 2))
    if p1 * p2 == -1:
        register.apply(_pauli_rotation(register, bell_b, "z", -math.pi / 2.0))
    if p3 == -1:
        register.apply(_pauli_rotation(register, bell_b, "x", -math.pi / 2.0))
    out = MeasurementRecord()
    out.entries = register.record.entries[start:]
    return out


def t_gate_injection(register: LogicalRegister, data: int, ancilla: int,
                     rng=None, forced=None) -> MeasurementRecord:
    """Consume a magic-state ancilla |A> = (|0> + e^{i pi/4}|1>)/sqrt(2) as a T gate.

    One-bit teleportation: measure the joint z parity (outcome p1), apply the
    phase correction exp(-i pi/8 sigma_z (1 - p1)) to the data, then
    disentangle the ancilla with an x measurement whose outcome fixes a final
    z flip.  The ancilla is rotated back to |0> afterwards.
    """
    if data == ancilla:
        raise ValueError("data and ancilla must be distinct")
    start = len(register.record.entries)
    p1, _ = measure_parity(register, ParitySpec(((data, ("A", "B")),
                                                 (ancilla, ("A", "B")))),
                           rng, _take(forced, 0))
    if p1 == -1:
        register.apply(_pauli_rotation(register, data, "z", math.pi / 4.0))
    p2, _ = measure_parity(register, ParitySpec(((ancilla, ("B", "C")),)),
                           rng, _take(forced, 1))
    if p2 == -1:
        register.apply(_pauli_rotation(register, data, "z", -math.pi / 2.0))
    # park the ancilla back at |0>
    register.apply(_pauli_rotation(register, ancilla, "y", -math.pi / 4.0))
    if p2 == -1:
        register.apply(_pauli_rotation(register, ancilla, "x", -math.pi / 2.0))
    out = MeasurementRecord()
    out.entries = register.record.entries[start:]
    return out


def magic_state() -> np.ndarray:
    return np.array([1.0, np.exp(1j * math.pi / 4.0)], dtype=complex) / math.sqrt(2.0)


def product_state(*qubit_states) -> np.ndarray:
    out = np.array([1.0], dtype=complex)
    for q in qubit_states:
        out = np.kron(out, np.asarray(q, dtype=complex))
    return out / np.linalg.norm(out)


@dataclass(frozen=True)
class DistillationResult:
    value: float
    iterates: tuple


def distillation_error(eps_in: float, target: float = 1e-12,
                       max_rounds: int = 64) -> DistillationResult:
    """Error after one magic-state distillation round, 35 eps^3, plus the iterates.

    The iterate sequence applies the map repeatedly until it drops below
    ``target``; requires eps_in < 0.14 where the map contracts.
    """
    if not 0.0 <= eps_in < 0.14:
        raise ValueError("distillation map needs an initial error below 0.14")
    step = lambda e: 35.0 * e ** 3
    iterates = []
    e = eps_in
    for _ in range(max_rounds):
        e = step(e)
        iterates.append(e)
        if e < target:
            break
    return DistillationResult(value=step(eps_in), iterates=tuple(iterates))


def cluster_neighbors(rows: int, cols: int, site: int) -> tuple:
    r, c = divmod(site, cols)
    out = []
    if r > 0:
        out.append(site - cols)
    if r < rows - 1:
        out.append(site + cols)
    if c > 0:
        out.append(site - 1)
    if c < cols - 1:
        out.append(site + 1)
    return tuple(out)


def cluster_stabilizer(register: LogicalRegister, rows: int, cols: int,
                       site: int) -> np.ndarray:
    """K_site = sigma_x at the site times sigma_z on its lattice neighbours."""
    op = register.qubit_operator(site, "X")
    for nb in cluster_neighbors(rows, cols, site):
        op = op @ register.qubit_operator(nb, "Z")
    return op


def prepare_cluster_state(register: LogicalRegister, rows: int, cols: int,
                          rng=None, forced=None) -> MeasurementRecord:
    """Measure every lattice stabilizer once, then fix the frame with z flips.

    The stabilizers commute, so one measurement per qubit suffices; a site
    whose outcome came out -1 is repaired by sigma_z there (the only
    single-qubit Pauli anticommuting with exactly that stabilizer).  All
    stabilizers end at +1.
    """
    if rows * cols != register.n_qubits:
        raise ValueError("register size must equal rows * cols")
    start = len(register.record.entries)
    outcomes = []
    for site in range(rows * cols):
        nbs = cluster_neighbors(rows, cols, site)
        pairs = [(site, ("B", "C"))] + [(nb, ("A", "B")) for nb in nbs]
        outcome, _ = measure_parity(register, ParitySpec(tuple(pairs)), rng,
                                    _take(forced, site))
        outcomes.append(outcome)
    for site, outcome in enumerate(outcomes):
        if outcome == -1:
            register.apply(_pauli_rotation(register, site, "z", -math.pi / 2.0))
    out = MeasurementRecord()
    out.entries = register.record.entries[start:]
    return out


# --- plain-text circuit scripts -------------------------------------------------

def parse_script(text: str):
    """Parse one op per line: BRAID q axis sign | MEASURE q:XY ... | CNOT c t a |
    TELEPORT s a b | TGATE d a."""
    ops = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        head, *args = line.split()
        try:
            if head == "BRAID":
                ops.append(("braid", int(args[0]), args[1],
                            +1 if args[2] == "+" else -1))
            elif head == "MEASURE":
                pairs = []
                for token in args:
                    q, names = token.split(":")
                    pairs.append((int(q), (names[0], names[1])))
                ops.append(("measure", ParitySpec(tuple(pairs))))
            elif head == "CNOT":
                ops.append(("cnot", int(args[0]), int(args[1]), int(args[2])))
            elif head == "TELEPORT":
                ops.append(("teleport", int(args[0]), int(args[1]), int(args[2])))
            elif head == "TGATE":
                ops.append(("tgate", int(args[0]), int(args[1])))
            else:
                raise ValueError(f"unknown op {head!r}")
        except (IndexError, ValueError) as exc:
            raise ValueError(f"bad script line {lineno}: {raw!r} ({exc})") from exc
    return ops


def run_script(register: LogicalRegister, ops, rng) -> MeasurementRecord:
    record = MeasurementRecord()
    for op in ops:
        kind = op[0]
        if kind == "braid":
            braid_gate(register, op[1], op[2], op[3])
        elif kind == "measure":
            measure_parity(register, op[1], rng)
            record.entries.append(register.record.entries[-1])
        elif kind == "cnot":
            record.extend(cnot(register, op[1], op[2], op[3], rng))
        elif kind == "teleport":
            record.extend(teleport(register, op[1], op[2], op[3], rng))
        elif kind == "tgate":
            record.extend(t_gate_injection(register, op[1], op[2], rng))
    return record


# --- Bravyi-Kitaev expansion check ----------------------------------------------

def _rotation_from_bilinear(gamma_a: np.ndarray, gamma_b: np.ndarray,
                            angle: float) -> np.ndarray:
    """exp(angle * gamma_a gamma_b); the bilinear squares to -1."""
    prod = gamma_a @ gamma_b
    return math.cos(angle) * np.eye(prod.shape[0]) + math.sin(angle) * prod


def bravyi_kitaev_expansion_check(majoranas, p1: int, p2: int) -> float:
    """Residual of the six-Majorana CNOT expansion for forced outcomes (p1, p2).

    Both sides are evaluated on an orthonormal basis of the admissible initial
    states, i.e. those annihilated by (gamma_4 + i gamma_5); the residual is
    the largest column norm of LHS - e^{i theta} RHS after optimizing the one
    global phase.  A zero-probability branch returns NaN (flagged, skipped).
    """
    if majoranas.count != 6:
        raise ConsistencyError("the expansion lives on six Majorana operators")
    if p1 not in (+1, -1) or p2 not in (+1, -1):
        raise ValueError("outcomes are +1 or -1")
    g = majoranas.operators
    dim = majoranas.dim
    eye = np.eye(dim)

    # admissible states: (g4 + i g5)|psi> = 0, i.e. pair (4,5) parity -1
    pair45 = 1j * g[4] @ g[5]
    w, v = np.linalg.eigh(pair45)
    basis = v[:, w < 0]

    four = g[0] @ g[1] @ g[2] @ g[3]
    lhs = (eye + 1j * four) / math.sqrt(2.0) @ basis

    phi = math.pi / 4.0 * (1.0 - p1 * p2)
    proj1 = (eye - p1 * (g[0] @ g[1] @ g[3] @ g[4])) / 2.0
    proj2 = (eye + p2 * 1j * (g[2] @ g[4])) / 2.0
    rhs_op = (2.0
              * _rotation_from_bilinear(g[0], g[1], phi)
              @ _rotation_from_bilinear(g[2], g[3], phi)
              @ _rotation_from_bilinear(g[2], g[5], -math.pi / 4.0 * p2)
              @ proj2 @ proj1)
    rhs = rhs_op @ basis

    weight = np.linalg.norm(rhs)
    if weight < 1e-12:
        return math.nan
    overlap = np.trace(rhs.conj().T @ lhs)
    phase = overlap / abs(overlap) if abs(overlap) > 0 else 1.0
    return float(np.linalg.norm(lhs - phase * rhs, axis=0).max())


def bk_branch_probability(majoranas, state: np.ndarray, p1: int, p2: int) -> float:
    """Probability of the (p1, p2) branch of the expansion's two measurements."""
    g = majoranas.operators
    dim = majoranas.dim
    eye = np.eye(dim)
    proj1 = (eye - p1 * (g[0] @ g[1] @ g[3] @ g[4])) / 2.0
    proj2 = (eye + p2 * 1j * (g[2] @ g[4])) / 2.0
    return float(np.linalg.norm(proj2 @ proj1 @ state) ** 2)
