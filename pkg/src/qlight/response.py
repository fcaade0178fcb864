"""Perturbative assembly of frequency-dispersed optical signals.

A third-order signal at detection frequency omega collects every ordered
tuple of signed mode frequencies (omega_1, omega_2, omega_3) that adds up to
omega.  Each tuple feeds four loop diagrams that differ in how many
interactions sit on the ket (forward, retarded) and bra (backward, advanced)
branches:

    diagram   ket branch (time order)   bra branch (time order)   field gate
    i         omega_3, omega_2, omega_1   -                       <E+ E1 E2 E3>
    ii        omega_2, omega_1            omega_3                 <E3 E+ E1 E2>
    iii       omega_1                     omega_3, omega_2        <E3 E2 E+ E1>
    iv        -                           omega_3, omega_2, omega_1 <E3 E2 E1 E+>

where E+ is the detected creation operator.  For quantum light each
diagram is weighted by its own ordering of field operators; for classical
light the four gates coincide and the diagrams merge into chi3.

Broadening convention: every real-time interval between successive
interactions is damped by exp(-epsilon*t), whichever branch the interactions
sit on.  A loop diagram's matter factor is therefore the sum over all
interleavings of its ket and bra interactions, each a Liouville-space
pathway with propagators 1/(Omega - (E_a - E_b) + i*epsilon) and a factor -1
per bra interaction.  As epsilon -> 0 this reduces to the Hilbert-space
product <V G(.) V G(.) V G(.) V> of :func:`hilbert_pathway`; at finite
epsilon it is the form that equals an exponentially windowed average of the
exact dynamics, and under which the harmonic oscillator has no nonlinear
response.
"""

from __future__ import annotations

import itertools
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .field import (ANNIHILATE, CREATE, FieldMode, FieldState, classical_amplitudes, field_correlator,
                    p_representation)
from .matter import MatterSystem, green
from .errors import SizeError
from .operators import MAX_DIM, OperatorMatrix

DIAGRAMS = ("i", "ii", "iii", "iv")
LINEAR_DIAGRAMS = ("ket", "bra")
FREQ_TOL = 1e-9


@dataclass(frozen=True)
class PathwaySpec:
    diagram: str
    omega: float
    omega1: float
    omega2: float
    omega3: float

    def __post_init__(self):
        if self.diagram not in DIAGRAMS:
            raise ValueError(f"diagram must be one of {DIAGRAMS}, got {self.diagram!r}")
        if abs(self.omega1 + self.omega2 + self.omega3 - self.omega) >= FREQ_TOL:
            raise ValueError("field frequencies must add up to the detection frequency")

    def branches(self) -> tuple[list[float], list[float]]:
        """Ket and bra interaction frequencies, each in time order."""
        w1, w2, w3 = self.omega1, self.omega2, self.omega3
        return {
            "i": ([w3, w2, w1], []),
            "ii": ([w2, w1], [w3]),
            "iii": ([w1], [w3, w2]),
            "iv": ([], [w3, w2, w1]),
        }[self.diagram]


def _check_stationary(sys: MatterSystem, state0) -> np.ndarray:
    rho = state0.data if isinstance(state0, OperatorMatrix) else np.asarray(state0, complex)
    if rho.shape != (sys.dim, sys.dim):
        raise ValueError(f"matter state must be {sys.dim}x{sys.dim}")
    comm = sys.energies[:, None] * rho - rho * sys.energies[None, :]
    if np.abs(comm).max() > 1e-12 * max(1.0, np.abs(rho).max()):
        raise ValueError("initial matter state must commute with H0 (stationary)")
    return rho


def interleavings(ket: Sequence[float], bra: Sequence[float]):
    """Every time ordering of two branch sequences that keeps each branch's own order."""
    n = len(ket) + len(bra)
    for bra_slots in itertools.combinations(range(n), len(bra)):
        k, b = iter(ket), iter(bra)
        yield [("bra", next(b)) if t in bra_slots else ("ket", next(k)) for t in range(n)]


def liouville_pathway(sys: MatterSystem, rho: np.ndarray, sequence) -> complex:
    """Tr[V G_n ... V G_1 V rho] for one time-ordered ket/bra interaction sequence."""
    v = sys.dipole.data
    wab = sys.energies[:, None] - sys.energies[None, :]
    x = rho
    total = 0.0
    for side, freq in sequence:
        total += freq
        x = v @ x if side == "ket" else -(x @ v)
        x = x / (total - wab + 1j * sys.epsilon)
    return complex(np.trace(v @ x))


def pathway(sys: MatterSystem, state0, spec: PathwaySpec) -> complex:
    """Matter factor of one loop diagram (the 2*pi*delta is left to the tuple constraint)."""
    rho = _check_stationary(sys, state0)
    ket, bra = spec.branches()
    return sum(liouville_pathway(sys, rho, seq) for seq in interleavings(ket, bra))


def pathways(sys: MatterSystem, state0, omega1: float, omega2: float, omega3: float) -> np.ndarray:
    """All four diagram values (i, ii, iii, iv) for one ordered tuple."""
    omega = omega1 + omega2 + omega3
    return np.array([pathway(sys, state0, PathwaySpec(d, omega, omega1, omega2, omega3)) for d in DIAGRAMS])


def hilbert_pathway(sys: MatterSystem, state0, spec: PathwaySpec) -> complex:
    """Factorized Hilbert-space form <V G^dag ... V G ... V> of one diagram.

    Ket propagators are retarded at the accumulated ket frequency and bra
    propagators advanced at minus the accumulated bra frequency, measured
    from the energy of the initial level.  This agrees with :func:`pathway`
    for diagram i exactly and for the others in the limit epsilon -> 0.
    """
    rho = _check_stationary(sys, state0)
    ket, bra = spec.branches()
    v = sys.dipole.data
    total = 0.0
    for a in range(sys.dim):
        p = rho[a, a].real
        if p == 0:
            continue
        ket_vec = np.zeros(sys.dim, complex)
        ket_vec[a] = 1.0
        acc = sys.energies[a]
        for w in ket:
            acc += w
            ket_vec = green(sys, acc, "retarded").data @ (v @ ket_vec)
        bra_vec = np.zeros(sys.dim, complex)
        bra_vec[a] = 1.0
        acc = sys.energies[a]
        for w in bra:
            acc -= w
            bra_vec = green(sys, acc, "retarded").data @ (v @ bra_vec)
        # <bra| = (G(...) V ... |a>)^dagger, i.e. a chain of advanced propagators
        total += p * (bra_vec.conj() @ v @ ket_vec)
    return complex(total)


def chi3(sys: MatterSystem, state0, omega: float, omega1: float, omega2: float, omega3: float,
         symmetrize: bool = True) -> complex:
    """Third-order susceptibility chi3(-omega; omega1, omega2, omega3) = sum of the four diagrams.

    With ``symmetrize`` (the default) the value is averaged over the six
    orderings of the field frequencies (intrinsic permutation symmetry);
    signals summed over all ordered tuples are unaffected by this choice.
    """
    if abs(omega1 + omega2 + omega3 - omega) >= FREQ_TOL:
        raise ValueError("field frequencies must add up to the detection frequency")
    if not symmetrize:
        return complex(pathways(sys, state0, omega1, omega2, omega3).sum())
    perms = itertools.permutations((omega1, omega2, omega3))
    return complex(sum(pathways(sys, state0, *p).sum() for p in perms) / 6.0)


def linear_pathway(sys: MatterSystem, state0, omega: float, side: str) -> complex:
    rho = _check_stationary(sys, state0)
    if side not in LINEAR_DIAGRAMS:
        raise ValueError(f"side must be one of {LINEAR_DIAGRAMS}")
    return liouville_pathway(sys, rho, [(side, omega)])


def chi1(sys: MatterSystem, state0, omega: float) -> complex:
    """Linear susceptibility <V G(omega) V> + <V G^dag(-omega) V>.

    Convention: the first term is the interaction on the ket branch, the
    second on the bra branch.  For a ground-state two-level system this is
    mu^2 [1/(omega - omega0 + i eps) - 1/(omega + omega0 + i eps)].
    """
    return linear_pathway(sys, state0, omega, "ket") + linear_pathway(sys, state0, omega, "bra")


# --------------------------------------------------------------------------- signals

Op = tuple[int, str]
SignedTuple = tuple[tuple[int, int], ...]


def _op(j: int, s: int) -> Op:
    return (j, ANNIHILATE if s > 0 else CREATE)


def signed_tuples(frequencies: Sequence[float], target: float, order: int, tol: float = FREQ_TOL) -> list[SignedTuple]:
    """Ordered tuples ((j, s), ...) with sum of s*omega_j equal to ``target``.

    ``s = +1`` is the annihilation (positive-frequency) part of mode j and
    ``s = -1`` its creation part; both are always enumerated.
    """
    choices = [(j, s) for j in range(len(frequencies)) for s in (1, -1)]
    out = []
    for combo in itertools.product(choices, repeat=order):
        if abs(sum(s * frequencies[j] for j, s in combo) - target) < tol:
            out.append(combo)
    return out


def gate_sequence(diagram: str, tup: SignedTuple, detect: int) -> list[Op]:
    """Left-to-right field operator order of one diagram's gate."""
    d = (detect, CREATE)
    if len(tup) == 1:
        e1 = _op(*tup[0])
        return {"ket": [d, e1], "bra": [e1, d]}[diagram]
    e1, e2, e3 = (_op(*x) for x in tup)
    return {
        "i": [d, e1, e2, e3],
        "ii": [e3, d, e1, e2],
        "iii": [e3, e2, d, e1],
        "iv": [e3, e2, e1, d],
    }[diagram]


@dataclass(frozen=True)
class SignalRow:
    omega: float
    total: float
    contributions: tuple[complex, ...]
    gates: tuple[complex, ...]
    n_tuples: int


@dataclass
class SignalTable:
    """Detection-frequency rows; ``total`` is Im of the summed diagram contributions."""

    order: int
    mode: str
    rows: list[SignalRow] = field(default_factory=list)

    @property
    def diagrams(self) -> tuple[str, ...]:
        return DIAGRAMS if self.order == 3 else LINEAR_DIAGRAMS

    @property
    def omegas(self) -> np.ndarray:
        return np.array([r.omega for r in self.rows])

    @property
    def totals(self) -> np.ndarray:
        return np.array([r.total for r in self.rows])

    def extend(self, other: SignalTable) -> None:
        self.rows.extend(other.rows)


def _tuple_pathways(sys, rho, tup, frequencies, order):
    omegas = [s * frequencies[j] for j, s in tup]
    if order == 1:
        return np.array([liouville_pathway(sys, rho, [(side, omegas[0])]) for side in LINEAR_DIAGRAMS])
    return pathways(sys, rho, *omegas)


def _assemble(sys: MatterSystem, state0, modes: Sequence[FieldMode], detect, order: int, mode: str,
              gate: Callable[[str, SignedTuple, int], complex]) -> SignalTable:
    rho = _check_stationary(sys, state0)
    frequencies = [m.frequency for m in modes]
    detect = [detect] if np.isscalar(detect) else list(detect)
    table = SignalTable(order, mode)
    names = DIAGRAMS if order == 3 else LINEAR_DIAGRAMS
    for d in detect:
        if not 0 <= d < len(modes):
            raise ValueError(f"detection mode {d} out of range")
        omega_d = frequencies[d]
        contrib = np.zeros(len(names), complex)
        gates = np.zeros(len(names), complex)
        tuples = signed_tuples(frequencies, omega_d, order)
        for tup in tuples:
            f = _tuple_pathways(sys, rho, tup, frequencies, order)
            g = np.array([gate(name, tup, d) for name in names])
            contrib += g * f
            gates += g
        table.rows.append(SignalRow(omega_d, float(contrib.sum().imag), tuple(contrib), tuple(gates), len(tuples)))
    return table


def _check_field(field_state: FieldState, max_dim: int) -> None:
    if field_state.rho.dim > max_dim:
        raise SizeError(field_state.rho.dim, max_dim, "field space")


def _quantum_gate(field_state: FieldState):
    cache: dict = {}

    def gate(name, tup, d):
        ops = tuple(gate_sequence(name, tup, d))
        if ops not in cache:
            cache[ops] = field_correlator(field_state, ops)
        return cache[ops]

    return gate


def _amplitude_gate(amps: np.ndarray, weights: np.ndarray | None = None):
    """Classical gate conj(A_d) * prod A(s_k, j_k), optionally averaged over amplitude sets.

    ``amps`` has shape (n_sets, n_modes); the gate is the weighted mean over sets.
    """
    amps = np.atleast_2d(amps)
    weights = np.ones(amps.shape[0]) if weights is None else np.asarray(weights)
    cache: dict = {}

    def gate(name, tup, d):
        if tup not in cache:
            prod = np.conj(amps[:, d])
            for j, s in tup:
                prod = prod * (amps[:, j] if s > 0 else np.conj(amps[:, j]))
            cache[tup] = complex(np.dot(weights, prod))
        return cache[tup]

    return gate


def _signal(sys, state0, field_state: FieldState, detect, order: int, mode: str, max_dim: int) -> SignalTable:
    _check_field(field_state, max_dim)
    if mode == "quantum":
        gate = _quantum_gate(field_state)
    elif mode == "classical":
        gate = _amplitude_gate(classical_amplitudes(field_state))
    elif mode == "p_averaged":
        prep = p_representation(field_state)
        couplings = np.array([m.coupling for m in field_state.modes])
        gate = _amplitude_gate(prep.betas * couplings[None, :], prep.weights)
    else:
        raise ValueError(f"mode must be quantum, classical or p_averaged, got {mode!r}")
    return _assemble(sys, state0, field_state.modes, detect, order, mode, gate)


def signal_quantum(sys: MatterSystem, state0, field_state: FieldState, detect=0, max_dim: int = MAX_DIM) -> SignalTable:
    """Third-order signal with each diagram gated by its own field correlator."""
    return _signal(sys, state0, field_state, detect, 3, "quantum", max_dim)


def signal_classical(sys: MatterSystem, state0, field_state: FieldState, detect=0, max_dim: int = MAX_DIM) -> SignalTable:
    """Third-order signal with field operators replaced by their mean amplitudes."""
    return _signal(sys, state0, field_state, detect, 3, "classical", max_dim)


def signal_p_averaged(sys: MatterSystem, state0, field_state: FieldState, detect=0, max_dim: int = MAX_DIM) -> SignalTable:
    """Classical third-order signal averaged over the field's P representation."""
    return _signal(sys, state0, field_state, detect, 3, "p_averaged", max_dim)


def linear_signal(sys: MatterSystem, state0, field_state: FieldState, detect=0, mode: str = "quantum",
                  max_dim: int = MAX_DIM) -> SignalTable:
    """First-order signal: gates <E+ E1> (ket) and <E1 E+> (bra) for the quantum variant."""
    return _signal(sys, state0, field_state, detect, 1, mode, max_dim)


def scan(sys: MatterSystem, state0, field_state: FieldState, omegas: Sequence[float], detect: int = 0,
         order: int = 3, mode: str = "quantum", threads: int = 1, max_dim: int = MAX_DIM) -> SignalTable:
    """Retune the detected mode across ``omegas`` and stack the resulting rows in grid order."""

    def point(w):
        return _signal(sys, state0, field_state.retuned(detect, float(w)), detect, order, mode, max_dim)

    table = SignalTable(order, mode)
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(point, omegas))
    else:
        parts = [point(w) for w in omegas]
    for part in parts:
        table.extend(part)
    return table
