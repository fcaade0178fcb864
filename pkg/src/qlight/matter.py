"""Multilevel matter systems: level energies, dipole operators, Green's functions.

Energies are measured from the ground level (hbar = 1, so energies and
frequencies share a unit).  The dipole operator has no diagonal elements in
the energy basis.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .operators import OperatorMatrix

DEFAULT_EPSILON = 0.05


@dataclass(frozen=True, eq=False)
class MatterSystem:
    energies: np.ndarray
    dipole: OperatorMatrix
    epsilon: float = DEFAULT_EPSILON
    label: str = ""

    def __post_init__(self):
        e = np.array(self.energies, dtype=float)
        if e.ndim != 1 or e.size < 2:
            raise ValueError("a matter system needs at least two levels")
        if np.any(np.diff(e) < 0):
            raise ValueError(f"energies must be ascending, got {e.tolist()}")
        if not self.epsilon > 0:
            raise ValueError("broadening epsilon must be positive")
        v = self.dipole if isinstance(self.dipole, OperatorMatrix) else OperatorMatrix(self.dipole)
        if v.dim != e.size:
            raise ValueError(f"dipole is {v.dim}x{v.dim} but there are {e.size} levels")
        if not v.is_hermitian():
            raise ValueError("dipole operator must be Hermitian")
        if np.any(np.abs(np.diag(v.data)) > 1e-14 * max(v.norm(), 1.0)):
            raise ValueError("dipole operator must have zero diagonal (no permanent dipoles)")
        e.flags.writeable = False
        object.__setattr__(self, "energies", e)
        object.__setattr__(self, "dipole", v)
        object.__setattr__(self, "epsilon", float(self.epsilon))

    @property
    def dim(self) -> int:
        return self.energies.size

    @property
    def h0(self) -> OperatorMatrix:
        return OperatorMatrix(np.diag(self.energies))

    @property
    def dipole_lower(self) -> OperatorMatrix:
        """De-excitation part of the dipole: elements <a|V|b> with a < b (strict upper triangle)."""
        return OperatorMatrix(np.triu(self.dipole.data, 1))

    @property
    def dipole_raise(self) -> OperatorMatrix:
        return self.dipole_lower.dag()

    def scaled(self, c: float) -> MatterSystem:
        """Same system with the dipole multiplied by ``c``."""
        return dataclasses.replace(self, dipole=self.dipole * c)

    def with_epsilon(self, epsilon: float) -> MatterSystem:
        return dataclasses.replace(self, epsilon=epsilon)

    def transitions(self, tol: float = 1e-12) -> list[tuple[int, int, float, float]]:
        """Dipole-allowed pairs ``(a, b, E_b - E_a, |V_ab|^2)`` with ``a < b``."""
        v = self.dipole.data
        out = []
        for a in range(self.dim):
            for b in range(a + 1, self.dim):
                w = abs(v[a, b]) ** 2
                if w > tol:
                    out.append((a, b, self.energies[b] - self.energies[a], w))
        return out


def two_level(omega0: float = 1.0, mu: float = 1.0, epsilon: float = DEFAULT_EPSILON) -> MatterSystem:
    if not omega0 > 0:
        raise ValueError("omega0 must be positive")
    v = np.array([[0.0, mu], [mu, 0.0]])
    return MatterSystem([0.0, omega0], OperatorMatrix(v), epsilon, f"two_level(omega0={omega0}, mu={mu})")


def ladder(n: int, spacings: Sequence[float], dipoles: Sequence[float] | None = None,
           epsilon: float = DEFAULT_EPSILON) -> MatterSystem:
    """Ladder of ``n`` levels with dipole coupling between neighbours only."""
    if n < 2:
        raise ValueError("a ladder needs n >= 2 levels")
    spacings = np.asarray(spacings, dtype=float)
    if spacings.shape != (n - 1,):
        raise ValueError(f"ladder({n}) needs {n - 1} spacings, got {spacings.size}")
    if np.any(spacings <= 0):
        raise ValueError("ladder spacings must be positive (energies ascending)")
    dipoles = np.ones(n - 1) if dipoles is None else np.asarray(dipoles, dtype=float)
    if dipoles.shape != (n - 1,):
        raise ValueError(f"ladder({n}) needs {n - 1} dipole elements")
    energies = np.concatenate([[0.0], np.cumsum(spacings)])
    v = np.diag(dipoles, 1) + np.diag(dipoles, -1)
    return MatterSystem(energies, OperatorMatrix(v), epsilon, f"ladder({n})")


def harmonic(n: int, omega0: float = 1.0, mu: float = 1.0, epsilon: float = DEFAULT_EPSILON) -> MatterSystem:
    """Truncated harmonic oscillator, dipole mu*(a + a^dagger).

    The top level is a truncation artifact; only drive it through frequencies
    that stay at least two levels below it.
    """
    if n < 2:
        raise ValueError("harmonic ladder needs n >= 2 levels")
    sys = ladder(n, [omega0] * (n - 1), mu * np.sqrt(np.arange(1, n)), epsilon)
    return dataclasses.replace(sys, label=f"harmonic(N={n}, omega0={omega0}, mu={mu})")


PRESETS = {"two_level": two_level, "ladder": ladder, "harmonic": harmonic}


def build_system(preset: str, **params) -> MatterSystem:
    """Construct a preset matter system by name (``two_level``, ``ladder``, ``harmonic``)."""
    try:
        factory = PRESETS[preset]
    except KeyError:
        raise ValueError(f"unknown matter preset {preset!r}; choose from {sorted(PRESETS)}") from None
    return factory(**params)


def green(sys: MatterSystem, omega: float, kind: str = "retarded") -> OperatorMatrix:
    """Frequency-domain Green's function 1/(omega - H0 +/- i*epsilon)."""
    if kind == "retarded":
        s = 1.0
    elif kind == "advanced":
        s = -1.0
    else:
        raise ValueError("kind must be 'retarded' or 'advanced'")
    return OperatorMatrix(np.diag(1.0 / (omega - sys.energies + s * 1j * sys.epsilon)))


def basis_state(sys: MatterSystem, k: int) -> OperatorMatrix:
    """Projector onto energy level ``k``."""
    rho = np.zeros((sys.dim, sys.dim))
    rho[k, k] = 1.0
    return OperatorMatrix(rho)


def ground_state(sys: MatterSystem) -> OperatorMatrix:
    return basis_state(sys, 0)


def thermal_state(sys: MatterSystem, beta_t: float) -> OperatorMatrix:
    """Canonical state exp(-beta_T H0)/Z; ``beta_t = inf`` gives the ground state."""
    if beta_t < 0:
        raise ValueError("inverse temperature must be non-negative")
    if np.isinf(beta_t):
        return ground_state(sys)
    w = np.exp(-beta_t * (sys.energies - sys.energies[0]))
    return OperatorMatrix(np.diag(w / w.sum()))
