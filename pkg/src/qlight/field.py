"""Discrete-mode quantized field in truncated Fock space.

Each mode j carries a frequency, a coupling lambda_j (the field amplitude per
photon, absorbing every quantization prefactor) and a Fock cutoff N_j.  The
field operator of mode j is E_j = lambda_j (a_j + a_j^dagger); its
annihilation part oscillates at +omega_j and its creation part at -omega_j.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from math import lgamma
from typing import Iterable, Sequence

import numpy as np

from .errors import SizeError, UnsupportedRepresentationError
from .operators import MAX_DIM, OperatorMatrix, tensor

DEFAULT_TRUNCATION = 16
#: Largest probability weight a thermal or squeezed state may lose above the cutoff.
TAIL_TOLERANCE = 1e-8

ANNIHILATE = "annihilate"
CREATE = "create"


@dataclass(frozen=True)
class FieldMode:
    frequency: float
    coupling: float = 1.0
    truncation: int = DEFAULT_TRUNCATION

    def __post_init__(self):
        if not self.frequency > 0:
            raise ValueError(f"mode frequency must be positive, got {self.frequency}")
        if int(self.truncation) != self.truncation or self.truncation < 2:
            raise ValueError(f"Fock truncation must be an integer >= 2, got {self.truncation}")


@dataclass(frozen=True, eq=False)
class FieldState:
    modes: tuple[FieldMode, ...]
    rho: OperatorMatrix
    kind: str = "custom"
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        modes = tuple(self.modes)
        dims = tuple(m.truncation for m in modes)
        rho = self.rho if isinstance(self.rho, OperatorMatrix) else OperatorMatrix(self.rho, dims)
        if rho.dim != int(np.prod(dims)):
            raise ValueError(f"field density matrix is {rho.dim}-dimensional, modes need {np.prod(dims)}")
        rho = OperatorMatrix(rho.data, dims)
        if abs(rho.trace() - 1.0) > 1e-10:
            raise ValueError(f"field density matrix has trace {rho.trace():.12g}, expected 1")
        if not rho.is_hermitian(1e-10):
            raise ValueError("field density matrix must be Hermitian")
        if np.linalg.eigvalsh(rho.data).min() < -1e-10:
            raise ValueError("field density matrix must be positive semidefinite")
        object.__setattr__(self, "modes", modes)
        object.__setattr__(self, "rho", rho)
        object.__setattr__(self, "_ops", {})

    @property
    def dims(self) -> tuple[int, ...]:
        return self.rho.dims

    @property
    def frequencies(self) -> np.ndarray:
        return np.array([m.frequency for m in self.modes])

    def with_modes(self, modes: Sequence[FieldMode]) -> FieldState:
        """Same photon-number state on modes with new frequencies or couplings."""
        modes = tuple(modes)
        if tuple(m.truncation for m in modes) != self.dims:
            raise ValueError("replacement modes must keep the Fock truncations")
        return dataclasses.replace(self, modes=modes)

    def retuned(self, j: int, frequency: float) -> FieldState:
        modes = list(self.modes)
        modes[j] = dataclasses.replace(modes[j], frequency=frequency)
        return self.with_modes(modes)

    def scaled_couplings(self, c: float) -> FieldState:
        return self.with_modes([dataclasses.replace(m, coupling=m.coupling * c) for m in self.modes])

    def ladder(self, j: int, which: str) -> np.ndarray:
        """Bare a_j or a_j^dagger on the full mode space (no coupling factor)."""
        key = (j, which)
        if key not in self._ops:
            if not 0 <= j < len(self.modes):
                raise ValueError(f"mode index {j} out of range for {len(self.modes)} modes")
            if which not in (ANNIHILATE, CREATE):
                raise ValueError(f"which must be {ANNIHILATE!r} or {CREATE!r}")
            a = annihilation(self.dims[j])
            local = a if which == ANNIHILATE else a.T
            left = int(np.prod(self.dims[:j]))
            right = int(np.prod(self.dims[j + 1:]))
            self._ops[key] = np.kron(np.kron(np.eye(left), local), np.eye(right))
        return self._ops[key]


def annihilation(n: int) -> np.ndarray:
    return np.diag(np.sqrt(np.arange(1, n)), 1).astype(complex)


def coherent_vector(beta: complex, n: int, normalize: bool = True) -> np.ndarray:
    """Fock amplitudes of |beta> up to n-1 photons."""
    beta = complex(beta)
    c = np.zeros(n, complex)
    if beta == 0:
        c[0] = 1.0
        return c
    k = np.arange(n)
    logmag = -0.5 * abs(beta) ** 2 + k * np.log(abs(beta)) - 0.5 * np.array([lgamma(i + 1) for i in k])
    c = np.exp(logmag) * np.exp(1j * k * np.angle(beta))
    return c / np.linalg.norm(c) if normalize else c


def _squeezed_amplitudes(r: float, phi: float, n: int) -> np.ndarray:
    c = np.zeros(n, complex)
    t = -np.exp(1j * phi) * np.tanh(r)
    for m in range(0, (n + 1) // 2):
        k = 2 * m
        if k >= n:
            break
        logc = 0.5 * lgamma(k + 1) - m * np.log(2.0) - lgamma(m + 1)
        c[k] = np.exp(logc) * t ** m / np.sqrt(np.cosh(r))
    return c


def _required_cutoff(amplitudes, start: int) -> int:
    n = start
    while n < 100000:
        tail = 1.0 - np.sum(np.abs(amplitudes(n)) ** 2)
        if tail <= TAIL_TOLERANCE:
            return n
        n = int(n * 1.25) + 1
    return n


def _per_mode(value, nmodes: int, name: str) -> list:
    if value is None:
        raise ValueError(f"state parameter {name!r} is required")
    if np.isscalar(value):
        return [value] * nmodes
    value = list(value)
    if len(value) != nmodes:
        raise ValueError(f"{name!r} needs one value per mode ({nmodes}), got {len(value)}")
    return value


def _pure(c: np.ndarray) -> np.ndarray:
    c = c / np.linalg.norm(c)
    return np.outer(c, c.conj())


def _single_mode_rho(kind: str, n: int, p: dict) -> np.ndarray:
    if kind == "vacuum":
        rho = np.zeros((n, n), complex)
        rho[0, 0] = 1.0
        return rho
    if kind == "fock":
        k = int(p["n"])
        if not 0 <= k < n:
            raise ValueError(f"Fock state |{k}> needs truncation of at least {k + 1}, mode has {n}")
        rho = np.zeros((n, n), complex)
        rho[k, k] = 1.0
        return rho
    if kind in ("coherent", "cat"):
        beta = complex(p["beta"])
        if abs(beta) ** 2 > n / 4:
            need = int(np.ceil(4 * abs(beta) ** 2))
            raise ValueError(f"|beta|^2 = {abs(beta) ** 2:.4g} violates the truncation guard |beta|^2 <= N/4; "
                             f"use truncation N >= {need}")
        if kind == "coherent":
            return _pure(coherent_vector(beta, n))
        parity = int(p.get("parity", 1))
        if parity not in (1, -1):
            raise ValueError("cat parity must be +1 (even) or -1 (odd)")
        c = coherent_vector(beta, n, False) + parity * coherent_vector(-beta, n, False)
        if np.linalg.norm(c) == 0:
            raise ValueError("odd cat state of beta = 0 does not exist")
        return _pure(c)
    if kind == "thermal":
        nbar = float(p["nbar"])
        if nbar < 0:
            raise ValueError("thermal occupation must be non-negative")
        q = nbar / (nbar + 1.0)
        if q ** n > TAIL_TOLERANCE:
            need = int(np.ceil(np.log(TAIL_TOLERANCE) / np.log(q)))
            raise ValueError(f"thermal nbar = {nbar} loses {q ** n:.2g} of its weight above the cutoff; "
                             f"use truncation N >= {need}")
        w = q ** np.arange(n)
        return np.diag(w / w.sum()).astype(complex)
    if kind == "squeezed":
        r, phi = float(p["r"]), float(p.get("phi", 0.0))
        tail = 1.0 - np.sum(np.abs(_squeezed_amplitudes(r, phi, n)) ** 2)
        if tail > TAIL_TOLERANCE:
            need = _required_cutoff(lambda m: _squeezed_amplitudes(r, phi, m), n)
            raise ValueError(f"squeezed state r = {r} loses {tail:.2g} above the cutoff; use truncation N >= {need}")
        return _pure(_squeezed_amplitudes(r, phi, n))
    raise ValueError(f"unknown field state kind {kind!r}")


_PARAM_NAMES = {"vacuum": (), "fock": ("n",), "coherent": ("beta",), "cat": ("beta", "parity"),
                "thermal": ("nbar",), "squeezed": ("r", "phi")}
_OPTIONAL = {"parity": 1, "phi": 0.0}


def prepare_state(modes: Iterable[FieldMode], kind: str, max_dim: int = MAX_DIM, **params) -> FieldState:
    """Build a field state.

    Product states take one parameter value per mode (scalars broadcast):
    ``vacuum``; ``fock(n)``; ``coherent(beta)``; ``thermal(nbar)``;
    ``squeezed(r, phi)``; ``cat(beta, parity)``.  ``coherent_mixture``
    takes ``atoms=[(betas, weight), ...]`` and ``custom`` takes ``rho``.
    """
    modes = tuple(modes)
    if not modes:
        raise ValueError("at least one field mode is required")
    dims = tuple(m.truncation for m in modes)
    dim = int(np.prod(dims))
    if dim > max_dim:
        raise SizeError(dim, max_dim, "field space")
    if kind == "custom":
        return FieldState(modes, OperatorMatrix(params["rho"], dims), "custom", {})
    if kind == "coherent_mixture":
        atoms = []
        rho = np.zeros((dim, dim), complex)
        for betas, weight in params["atoms"]:
            betas = [complex(b) for b in _per_mode(betas, len(modes), "beta")]
            if weight < 0:
                raise ValueError("mixture weights must be non-negative")
            single = [_single_mode_rho("coherent", n, {"beta": b}) for n, b in zip(dims, betas)]
            rho += weight * tensor(*[OperatorMatrix(s) for s in single]).data
            atoms.append((tuple(betas), float(weight)))
        total = sum(w for _, w in atoms)
        if abs(total - 1.0) > 1e-10:
            raise ValueError(f"mixture weights sum to {total}, expected 1")
        return FieldState(modes, OperatorMatrix(rho, dims), kind, {"atoms": atoms})
    if kind not in _PARAM_NAMES:
        raise ValueError(f"unknown field state kind {kind!r}")
    names = _PARAM_NAMES[kind]
    unknown = set(params) - set(names)
    if unknown:
        raise ValueError(f"unexpected parameters {sorted(unknown)} for {kind} state")
    per_mode = {}
    for name in names:
        value = params.get(name, _OPTIONAL.get(name))
        per_mode[name] = _per_mode(value, len(modes), name)
    single = []
    for j, n in enumerate(dims):
        single.append(OperatorMatrix(_single_mode_rho(kind, n, {k: v[j] for k, v in per_mode.items()})))
    rho = tensor(*single, max_dim=max_dim)
    return FieldState(modes, OperatorMatrix(rho.data, dims), kind, per_mode)


def mode_operator(state: FieldState, j: int, which: str) -> OperatorMatrix:
    """lambda_j a_j (``annihilate``) or lambda_j a_j^dagger (``create``) on the full mode space."""
    op = state.ladder(j, which)
    return OperatorMatrix(state.modes[j].coupling * op, state.dims)


def field_correlator(state: FieldState, ordered_ops: Sequence[tuple[int, str]]) -> complex:
    """Tr[rho_f O_1 O_2 ... O_k] for coupling-weighted ladder operators, left to right as given."""
    if not ordered_ops:
        raise ValueError("correlator needs at least one operator")
    x = state.rho.data
    scale = 1.0
    for j, which in reversed(ordered_ops):
        x = state.ladder(j, which) @ x
        scale *= state.modes[j].coupling
    return complex(scale * np.trace(x))


def classical_amplitudes(state: FieldState) -> np.ndarray:
    """Per-mode c-number field amplitude lambda_j <a_j>.

    Coherent states return lambda_j beta_j itself rather than the truncated
    trace, which falls short of it by the (guarded) Fock tail.
    """
    couplings = np.array([m.coupling for m in state.modes])
    if state.kind == "coherent":
        return couplings * np.array([complex(b) for b in state.params["beta"]])
    return np.array([state.modes[j].coupling * np.trace(state.ladder(j, ANNIHILATE) @ state.rho.data)
                     for j in range(len(state.modes))])


@dataclass(frozen=True)
class PRepresentation:
    """Discrete quasiprobability: coherent amplitudes (one per mode) with weights."""

    betas: np.ndarray  # shape (n_atoms, n_modes)
    weights: np.ndarray  # shape (n_atoms,)
    form: str

    @property
    def normalization(self) -> float:
        return float(self.weights.sum())


def _thermal_grid(nbar: float, n_radial: int, n_angular: int, radius_factor: float):
    if nbar == 0:
        return np.array([0j]), np.array([1.0])
    rmax = radius_factor * np.sqrt(nbar)
    x, w = np.polynomial.legendre.leggauss(n_radial)
    r = 0.5 * rmax * (x + 1.0)
    wr = 0.5 * rmax * w * r * np.exp(-r ** 2 / nbar) / (np.pi * nbar)
    phi = 2 * np.pi * np.arange(n_angular) / n_angular
    betas = (r[:, None] * np.exp(1j * phi[None, :])).ravel()
    weights = np.repeat(wr * 2 * np.pi / n_angular, n_angular)
    return betas, weights / weights.sum()


def p_representation(state: FieldState, n_radial: int = 32, n_angular: int = 32,
                     radius_factor: float = 5.0, max_atoms: int = 1_000_000) -> PRepresentation:
    """Glauber-Sudarshan P function as weighted coherent-state atoms.

    Coherent states and mixtures of coherent states are represented exactly.
    Thermal modes use their Gaussian P(beta) ~ exp(-|beta|^2/nbar) on a polar
    grid (Gauss-Legendre in radius up to ``radius_factor*sqrt(nbar)``, uniform
    in angle).  Fock, squeezed and cat states have no regular P function and
    are refused.
    """
    nmodes = len(state.modes)
    if state.kind == "vacuum":
        return PRepresentation(np.zeros((1, nmodes), complex), np.array([1.0]), "discrete")
    if state.kind == "coherent":
        betas = np.array([[complex(b) for b in state.params["beta"]]])
        return PRepresentation(betas, np.array([1.0]), "discrete")
    if state.kind == "coherent_mixture":
        atoms = state.params["atoms"]
        return PRepresentation(np.array([b for b, _ in atoms], complex),
                               np.array([w for _, w in atoms], float), "discrete")
    if state.kind == "thermal":
        grids = [_thermal_grid(float(nb), n_radial, n_angular, radius_factor) for nb in state.params["nbar"]]
        count = int(np.prod([g[0].size for g in grids]))
        if count > max_atoms:
            raise SizeError(count, max_atoms, "P-representation grid")
        mesh_b = np.meshgrid(*[g[0] for g in grids], indexing="ij")
        mesh_w = np.meshgrid(*[g[1] for g in grids], indexing="ij")
        betas = np.stack([m.ravel() for m in mesh_b], axis=1)
        weights = np.prod(np.stack([m.ravel() for m in mesh_w], axis=1), axis=1)
        return PRepresentation(betas, weights, "gaussian_grid")
    raise UnsupportedRepresentationError(
        f"no regular Glauber-Sudarshan P function for a {state.kind!r} state: its P is more singular "
        "than a delta function (derivatives of delta or worse), so a P-average of classical responses "
        "is undefined. Supported kinds: vacuum, coherent, coherent_mixture, thermal.")


def reconstruct(prep: PRepresentation, modes: Sequence[FieldMode]) -> OperatorMatrix:
    """Sum_k w_k |beta_k><beta_k| projected onto the truncated Fock space."""
    dims = tuple(m.truncation for m in modes)
    dim = int(np.prod(dims))
    rho = np.zeros((dim, dim), complex)
    for betas, w in zip(prep.betas, prep.weights):
        v = np.ones(1, complex)
        for b, n in zip(betas, dims):
            v = np.kron(v, coherent_vector(b, n, normalize=False))
        rho += w * np.outer(v, v.conj())
    return OperatorMatrix(rho, dims)


def trace_distance(a: OperatorMatrix, b: OperatorMatrix) -> float:
    d = a.data - b.data
    return 0.5 * float(np.abs(np.linalg.eigvalsh(0.5 * (d + d.conj().T))).sum())
