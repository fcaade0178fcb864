"""Brute-force reference: exact evolution of matter x field under the full Hamiltonian.

H = H0 (x) 1 + 1 (x) sum_j omega_j n_j + sum_j lambda_j V (x) (a_j + a_j^dagger)

The Hamiltonian is time independent, so it is diagonalized once and every
propagation is exact.  Photon-number rates come in two flavours: the
finite-time average [n(T) - n(0)]/T, and an exponentially windowed rate
epsilon * int_0^inf exp(-epsilon t) dn/dt dt, which is what the stationary,
epsilon-broadened perturbative signals describe (dn/dt = 2 S).
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Callable, Sequence

import numpy as np

from .errors import NumericalError, SizeError
from .field import ANNIHILATE, CREATE, FieldState
from .matter import MatterSystem
from .operators import MAX_DIM, OperatorMatrix, eigh_checked, partial_trace


@dataclass(frozen=True, eq=False)
class JointModel:
    """Matter (factor 0) tensored with the field modes (factors 1..M)."""

    h_total: OperatorMatrix
    rho0: OperatorMatrix
    matter_dim: int
    field_dims: tuple[int, ...]

    def __post_init__(self):
        if not self.h_total.is_hermitian():
            raise ValueError("joint Hamiltonian must be Hermitian")
        if abs(self.rho0.trace() - 1) > 1e-10:
            raise ValueError("joint initial state must have unit trace")

    @property
    def dims(self) -> tuple[int, ...]:
        return (self.matter_dim,) + self.field_dims

    @cached_property
    def eig(self) -> tuple[np.ndarray, np.ndarray]:
        return eigh_checked(self.h_total)

    def number_operator(self, j: int) -> np.ndarray:
        left = self.matter_dim * int(np.prod(self.field_dims[:j]))
        right = int(np.prod(self.field_dims[j + 1:]))
        n = np.diag(np.arange(self.field_dims[j], dtype=float))
        return np.kron(np.kron(np.eye(left), n), np.eye(right))

    def matter_operator(self, op) -> np.ndarray:
        op = op.data if isinstance(op, OperatorMatrix) else np.asarray(op)
        return np.kron(op, np.eye(int(np.prod(self.field_dims))))


def _embed(op: np.ndarray, dims: Sequence[int], k: int) -> np.ndarray:
    left = int(np.prod(dims[:k]))
    right = int(np.prod(dims[k + 1:]))
    return np.kron(np.kron(np.eye(left), op), np.eye(right))


def build_joint_model(sys: MatterSystem, state0, field_state: FieldState, rwa: bool = False,
                      max_dim: int = MAX_DIM) -> JointModel:
    """Assemble the joint Hamiltonian and product initial state.

    ``rwa=True`` keeps only the energy-conserving couplings
    lambda (V_raise a + V_lower a^dagger); the default keeps the full dipole
    coupling with counter-rotating terms.
    """
    fdims = field_state.dims
    dims = (sys.dim,) + fdims
    dim = int(np.prod(dims))
    if dim > max_dim:
        raise SizeError(dim, max_dim, "joint matter-field space")
    h = _embed(sys.h0.data, dims, 0)
    for j, mode in enumerate(field_state.modes):
        a = field_state.ladder(j, ANNIHILATE)
        adag = field_state.ladder(j, CREATE)
        h = h + mode.frequency * np.kron(np.eye(sys.dim), adag @ a)
        if rwa:
            coupling = np.kron(sys.dipole_raise.data, a) + np.kron(sys.dipole_lower.data, adag)
        else:
            coupling = np.kron(sys.dipole.data, a + adag)
        h = h + mode.coupling * coupling
    rho_m = state0.data if isinstance(state0, OperatorMatrix) else np.asarray(state0)
    rho0 = np.kron(rho_m, field_state.rho.data)
    return JointModel(OperatorMatrix(h, dims), OperatorMatrix(rho0, dims), sys.dim, fdims)


def propagate(model: JointModel, t: float) -> OperatorMatrix:
    """rho(t) = exp(-iHt) rho0 exp(iHt)."""
    w, u = model.eig
    r = u.conj().T @ model.rho0.data @ u
    phase = np.exp(-1j * w * t)
    r = phase[:, None] * r * phase.conj()[None, :]
    return OperatorMatrix(u @ r @ u.conj().T, model.dims)


def expectation_series(model: JointModel, op: np.ndarray, times: Sequence[float]) -> np.ndarray:
    """Tr[rho(t) op] for each time, evaluated in the eigenbasis."""
    w, u = model.eig
    r = u.conj().T @ model.rho0.data @ u
    o = u.conj().T @ op @ u
    # Tr[rho(t) O] = sum_kl r_kl e^{-i(w_k - w_l)t} O_lk
    prod = r * o.T
    dw = w[:, None] - w[None, :]
    return np.array([np.sum(prod * np.exp(-1j * dw * t)).real for t in times])


def reduced_matter_state(model: JointModel, t: float) -> OperatorMatrix:
    return partial_trace(propagate(model, t), 0)


def photon_flux(model: JointModel, j: int, T: float, samples: int = 2) -> tuple[float, np.ndarray, np.ndarray]:
    """Average photon-number rate [<n_j>(T) - <n_j>(0)]/T with the sampled series."""
    if not T > 0:
        raise ValueError("window T must be positive")
    if samples < 2:
        raise ValueError("need at least two samples")
    times = np.linspace(0.0, T, samples)
    series = expectation_series(model, model.number_operator(j), times)
    return (series[-1] - series[0]) / T, times, series


def windowed_flux(model: JointModel, j: int, epsilon: float) -> float:
    """epsilon * int_0^inf exp(-epsilon t) d<n_j>/dt dt, in closed form."""
    if not epsilon > 0:
        raise ValueError("window rate epsilon must be positive")
    w, u = model.eig
    h = model.h_total.data
    n = model.number_operator(j)
    ndot = 1j * (h @ n - n @ h)
    r = u.conj().T @ model.rho0.data @ u
    o = u.conj().T @ ndot @ u
    dw = w[:, None] - w[None, :]
    return float(np.sum(r * o.T * epsilon / (epsilon + 1j * dw)).real)


@dataclass(frozen=True)
class OrderFit:
    orders: tuple[int, ...]
    coefficients: tuple[float, ...]
    residual: float
    condition: float

    def __getitem__(self, order: int) -> float:
        return self.coefficients[self.orders.index(order)]


def order_fit(observable: Callable[[float], float], c_grid: Sequence[float],
              orders: Sequence[int] = (2, 4, 6), max_condition: float = 1e8) -> OrderFit:
    """Least-squares fit of observable(c) to sum_k a_k c^k over the given powers.

    The top power acts as a guard term that soaks up higher orders; pick the
    grid so that its contribution stays well below the one of interest.
    """
    c = np.asarray(c_grid, dtype=float)
    if c.size < 5:
        raise ValueError("order fit needs at least five grid points")
    y = np.array([observable(ci) for ci in c], dtype=float)
    design = np.stack([c ** k for k in orders], axis=1)
    cond = float(np.linalg.cond(design))
    if not np.isfinite(cond) or cond > max_condition:
        raise NumericalError(f"order fit is ill-conditioned (condition number {cond:.3g}); "
                             "spread the coupling grid further from zero or use fewer orders")
    coef, *_ = np.linalg.lstsq(design, y, rcond=None)
    resid = float(np.linalg.norm(design @ coef - y))
    return OrderFit(tuple(orders), tuple(float(x) for x in coef), resid, cond)
