"""Liouville-space correlators built from V_+ (half anticommutator) and V_- (commutator).

The "+" superoperator keeps the factor 1/2: V_+ X = (VX + XV)/2.  Every
constant derived below inherits it, e.g. the fluctuation-dissipation ratio
C_{++}/C_{+-} = coth(beta_T omega/2)/2.

Frequency-domain quantities use the Lehmann (energy-eigenbasis)
representation with Lorentzian lines of the same width epsilon as the
response engine's Green's functions.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import ContractError, SizeError
from .field import ANNIHILATE, CREATE, FieldState, classical_amplitudes
from .matter import MatterSystem, thermal_state
from .operators import MAX_DIM, OperatorMatrix, anticommutator, commutator
from .oracle import JointModel, _embed, expectation_series, order_fit

SIGNS = ("+", "-")


@dataclass(frozen=True)
class SignSequence:
    """Signs of V_{s1} ... V_{sn}, leftmost (latest) first."""

    signs: tuple[str, ...]
    observable: bool = True

    def __post_init__(self):
        signs = tuple(self.signs)
        if not signs or any(s not in SIGNS for s in signs):
            raise ValueError(f"signs must be a non-empty string of '+'/'-', got {self.signs!r}")
        if self.observable and signs[0] == "-":
            raise ContractError("an observable correlator must start with V_+; "
                                "a leftmost V_- is the trace of a commutator and vanishes identically")
        object.__setattr__(self, "signs", signs)

    @classmethod
    def parse(cls, text: str, observable: bool = True) -> SignSequence:
        return cls(tuple(text), observable)


def _as_sequence(seq) -> SignSequence:
    if isinstance(seq, SignSequence):
        return seq
    return SignSequence.parse(seq)


def heisenberg(sys: MatterSystem, t: float) -> np.ndarray:
    """V(t) = exp(iH0 t) V exp(-iH0 t)."""
    phase = np.exp(1j * sys.energies * t)
    return phase[:, None] * sys.dipole.data * phase.conj()[None, :]


def super_correlator(sys: MatterSystem, state0, seq, times: Sequence[float]) -> complex:
    """Tr[V_{s1}(t1) V_{s2}(t2) ... V_{sn}(tn) rho0], maps applied right to left.

    ``times`` must be non-increasing from left to right.
    """
    seq = _as_sequence(seq)
    times = [float(t) for t in times]
    if len(times) != len(seq.signs):
        raise ValueError("need one time per superoperator")
    if any(a < b for a, b in zip(times, times[1:])):
        raise ValueError("times must be ordered latest-first (non-increasing left to right)")
    x = state0 if isinstance(state0, OperatorMatrix) else OperatorMatrix(state0)
    for s, t in zip(reversed(seq.signs), reversed(times)):
        v = OperatorMatrix(heisenberg(sys, t))
        x = anticommutator(v, x) if s == "+" else commutator(v, x)
    return x.trace()


def super_spectrum(sys: MatterSystem, state0, seq, freqs: Sequence[float]) -> complex:
    """One-sided Fourier transform of a super-correlator over its n-1 time intervals.

    ``freqs[k]`` is conjugate to the k-th interval counted from the earliest
    operator; each interval contributes i/(Omega - omega_ab + i epsilon).
    """
    seq = _as_sequence(seq)
    if len(freqs) != len(seq.signs) - 1:
        raise ValueError("need one frequency per time interval")
    rho = state0.data if isinstance(state0, OperatorMatrix) else np.asarray(state0, complex)
    v = sys.dipole.data
    wab = sys.energies[:, None] - sys.energies[None, :]
    x = rho.astype(complex)
    signs = list(reversed(seq.signs))
    for k, s in enumerate(signs):
        x = 0.5 * (v @ x + x @ v) if s == "+" else v @ x - x @ v
        if k < len(freqs):
            x = 1j * x / (freqs[k] - wab + 1j * sys.epsilon)
    return complex(np.trace(x))


# ----------------------------------------------------------------- linear FDT


@dataclass(frozen=True)
class Resonance:
    omega: float
    weight_pp: float
    weight_pm: float
    ratio: float
    fdt: float


@dataclass
class FDTReport:
    beta_t: float
    omegas: np.ndarray
    c_pp: np.ndarray
    c_pm: np.ndarray
    resonances: list[Resonance] = field(default_factory=list)

    @property
    def spectral_ratio(self) -> np.ndarray:
        with np.errstate(divide="ignore", invalid="ignore"):
            return self.c_pp / self.c_pm

    @property
    def fdt_curve(self) -> np.ndarray:
        return fdt_factor(self.omegas, self.beta_t)

    @property
    def max_resonance_error(self) -> float:
        return max(abs(r.ratio - r.fdt) for r in self.resonances)


def fdt_factor(omega, beta_t: float):
    """coth(beta_T omega / 2) / 2 (infinite at omega = 0)."""
    with np.errstate(divide="ignore"):
        return 0.5 / np.tanh(0.5 * beta_t * np.asarray(omega, dtype=float))


def _lines(sys: MatterSystem, populations: np.ndarray):
    """All ordered Lehmann lines (omega_ba, p_a, p_b, |V_ab|^2)."""
    v2 = np.abs(sys.dipole.data) ** 2
    out = []
    for a in range(sys.dim):
        for b in range(sys.dim):
            if a != b and v2[a, b] > 0:
                out.append((sys.energies[b] - sys.energies[a], populations[a], populations[b], v2[a, b]))
    return out


def linear_spectra(sys: MatterSystem, state0, omegas) -> tuple[np.ndarray, np.ndarray]:
    """C_{+-}(omega) and C_{++}(omega) with 2*pi*delta lines broadened to 2 eps/(x^2 + eps^2)."""
    rho = state0.data if isinstance(state0, OperatorMatrix) else np.asarray(state0)
    p = np.real(np.diag(rho))
    omegas = np.asarray(omegas, dtype=float)
    c_pm = np.zeros_like(omegas)
    c_pp = np.zeros_like(omegas)
    eps = sys.epsilon
    for w_ba, pa, pb, v2 in _lines(sys, p):
        shape = 2 * eps / ((omegas - w_ba) ** 2 + eps ** 2)
        c_pm += pa * v2 * shape
        c_pp += 0.5 * pa * v2 * shape
        # <V V(tau)> part of the commutator/anticommutator puts the same weight at -omega_ba
        mirror = 2 * eps / ((omegas + w_ba) ** 2 + eps ** 2)
        c_pm -= pa * v2 * mirror
        c_pp += 0.5 * pa * v2 * mirror
    return c_pm, c_pp


def fdt_check(sys: MatterSystem, beta_t: float, omegas, state0=None, tol: float = 1e-9) -> FDTReport:
    """Fluctuation (C_{++}) and response (C_{+-}) spectra and their ratio at each resonance.

    The state defaults to the thermal state at ``beta_t``; passing a
    non-thermal ``state0`` is how the relation is shown to fail.
    """
    if not beta_t > 0:
        raise ValueError("fdt_check needs a positive inverse temperature")
    rho = thermal_state(sys, beta_t) if state0 is None else state0
    omegas = np.asarray(omegas, dtype=float)
    c_pm, c_pp = linear_spectra(sys, rho, omegas)
    report = FDTReport(beta_t, omegas, c_pp, c_pm)
    p = np.real(np.diag(rho.data if isinstance(rho, OperatorMatrix) else rho))
    groups: dict[float, list[float]] = {}
    for a, b, w_ba, v2 in sys.transitions():
        key = next((k for k in groups if abs(k - w_ba) <= tol), w_ba)
        acc = groups.setdefault(key, [0.0, 0.0])
        acc[0] += np.pi * (p[a] + p[b]) * v2
        acc[1] += 2 * np.pi * (p[a] - p[b]) * v2
    for w in sorted(groups):
        wpp, wpm = groups[w]
        ratio = wpp / wpm if wpm != 0 else np.inf
        report.resonances.append(Resonance(float(w), float(wpp), float(wpm), float(ratio), float(fdt_factor(w, beta_t))))
    return report


# ------------------------------------------------------------ nonlinear family


def resonance_ratio(sys: MatterSystem, state0, omega_r: float, numerator: str = "++++",
                    denominator: str = "+---") -> complex:
    """Ratio of two four-point spectra at the resonant point (omega_r, 0, omega_r)."""
    point = (omega_r, 0.0, omega_r)
    return super_spectrum(sys, state0, numerator, point) / super_spectrum(sys, state0, denominator, point)


def nonlinear_fdt_table(sys: MatterSystem, beta_t: float, numerator: str = "++++", denominator: str = "+---"):
    """Per-resonance linear and nonlinear fluctuation/response ratios.

    Returns rows ``(omega_r, linear_ratio, coth/2, nonlinear_ratio)``.  The
    linear column always equals coth/2; the nonlinear one follows no such
    universal function.
    """
    rho = thermal_state(sys, beta_t)
    lin = fdt_check(sys, beta_t, [], rho)
    return [(r.omega, r.ratio, r.fdt, resonance_ratio(sys, rho, r.omega, numerator, denominator))
            for r in lin.resonances]


# ------------------------------------------------------------ two atoms


@dataclass
class TwoAtomReport:
    classical: bool
    T: float
    rows: list[tuple[str, float, float]]  # (atom-2 configuration, atom-2 frequency, atom-1 excited population)
    atom2_minus_strings: float  # largest |<V2- ... V2->| over the probes
    atom2_plus_minus: complex  # <V2+(t) V2-(0)>, the first correlator a quantum field can reach
    leading_order: object = None  # OrderFit of the atom-2 induced shift versus coupling scale

    @property
    def populations(self) -> np.ndarray:
        return np.array([r[2] for r in self.rows])

    @property
    def relative_spread(self) -> float:
        p = self.populations
        return float((p.max() - p.min()) / max(abs(p).max(), 1e-300))


def _excited_projector(sys: MatterSystem) -> np.ndarray:
    p = np.eye(sys.dim)
    p[0, 0] = 0.0
    return p


def _driven_population(atoms: list[MatterSystem], amps: np.ndarray, freqs: np.ndarray, T: float,
                       steps: int) -> float:
    """Atom-1 excited population under a c-number field, propagated in the joint atom space."""
    dims = [a.dim for a in atoms]
    h0 = sum(_embed(np.diag(a.energies), dims, k) for k, a in enumerate(atoms))
    vtot = sum(_embed(a.dipole.data, dims, k) for k, a in enumerate(atoms))
    w0, u0 = np.linalg.eigh(h0)
    psi = np.zeros(int(np.prod(dims)), complex)
    psi[0] = 1.0
    dt = T / steps
    for k in range(steps):
        t = (k + 0.5) * dt
        e_t = float(np.sum(2 * np.real(amps * np.exp(-1j * freqs * t))))
        w, u = np.linalg.eigh(h0 + e_t * vtot)
        psi = u @ (np.exp(-1j * w * dt) * (u.conj().T @ psi))
    proj = _embed(_excited_projector(atoms[0]), dims, 0)
    return float(np.real(psi.conj() @ proj @ psi))


def _quantum_model(atoms: list[MatterSystem], field_state: FieldState, max_dim: int) -> JointModel:
    adims = [a.dim for a in atoms]
    fdims = field_state.dims
    dims = adims + list(fdims)
    dim = int(np.prod(dims))
    if dim > max_dim:
        raise SizeError(dim, max_dim, "two-atom joint space")
    h = sum(_embed(np.diag(a.energies), dims, k) for k, a in enumerate(atoms))
    vtot = sum(_embed(a.dipole.data, adims, k) for k, a in enumerate(atoms))
    for j, mode in enumerate(field_state.modes):
        a = field_state.ladder(j, ANNIHILATE)
        adag = field_state.ladder(j, CREATE)
        h = h + mode.frequency * np.kron(np.eye(int(np.prod(adims))), adag @ a)
        h = h + mode.coupling * np.kron(vtot, a + adag)
    rho_atoms = np.zeros((int(np.prod(adims)),) * 2)
    rho_atoms[0, 0] = 1.0
    rho0 = np.kron(rho_atoms, field_state.rho.data)
    return JointModel(OperatorMatrix(h, tuple(dims)), OperatorMatrix(rho0, tuple(dims)), int(np.prod(adims)), fdims)


def _quantum_population(atoms, field_state, T, max_dim):
    model = _quantum_model(atoms, field_state, max_dim)
    proj = _embed(_excited_projector(atoms[0]), [a.dim for a in atoms], 0)
    return float(expectation_series(model, model.matter_operator(proj), [T])[0])


def _retuned_atom(atom: MatterSystem, omega: float) -> MatterSystem:
    scale = omega / atom.energies[1]
    return MatterSystem(atom.energies * scale, atom.dipole, atom.epsilon, f"{atom.label} @ {omega:g}")


def two_atom_demo(atom1: MatterSystem, atom2: MatterSystem, field_state: FieldState, classical: bool,
                  T: float = 20.0, atom2_frequencies: Sequence[float] | None = None, steps: int = 4000,
                  fit_grid: Sequence[float] | None = None, max_dim: int = MAX_DIM) -> TwoAtomReport:
    """Does atom 1 notice a second, non-interacting atom sharing the same field?

    Atom 1 starts in its ground state and the field in ``field_state``.
    With ``classical`` the field operators are replaced by the c-number
    amplitudes lambda_j <a_j> (so no field commutator survives) and the atoms
    are propagated under the resulting time-dependent Hamiltonian; otherwise
    the full atom x atom x field Hamiltonian is propagated exactly.  Atom 2
    is absent, or present with its first transition at each frequency in
    ``atom2_frequencies``.  ``fit_grid`` (quantum only) adds an order fit of
    the atom-2 induced shift of atom 1's population versus coupling scale.
    """
    if atom2_frequencies is None:
        base = atom2.energies[1]
        atom2_frequencies = [base, 0.8 * base, 1.25 * base]
    amps = classical_amplitudes(field_state)
    freqs = field_state.frequencies

    def population(atoms, fs=field_state):
        if classical:
            return _driven_population(atoms, amps, freqs, T, steps)
        return _quantum_population(atoms, fs, T, max_dim)

    rows = [("absent", float("nan"), population([atom1]))]
    for w in atom2_frequencies:
        rows.append(("present", float(w), population([atom1, _retuned_atom(atom2, w)])))

    probes = ["--", "----", "-+", "-+-+"]
    rho2 = np.zeros((atom2.dim, atom2.dim))
    rho2[0, 0] = 1.0
    minus = 0.0
    for p in probes:
        seq = SignSequence(tuple(p), observable=False)
        times = np.linspace(1.3, 0.0, len(p))
        minus = max(minus, abs(super_correlator(atom2, rho2, seq, times)))
    plus_minus = super_correlator(atom2, rho2, "+-", [1.3, 0.0])

    fit = None
    if fit_grid is not None and not classical:
        partner = _retuned_atom(atom2, atom2_frequencies[0])

        def shift(c):
            fs = field_state.scaled_couplings(c)
            return population([atom1, partner], fs) - population([atom1], fs)

        fit = order_fit(shift, fit_grid, orders=(2, 4, 6))
    return TwoAtomReport(classical, T, rows, minus, plus_minus, fit)
