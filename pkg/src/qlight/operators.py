"""Dense operator algebra on finite tensor-product spaces.

Every operator carries the list of factor dimensions (``dims``) of the space
it acts on, so that partial traces know where the subsystem boundaries are.
Kronecker products follow numpy's convention: the left factor is the major
index.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import reduce
from typing import Callable, Iterable, Sequence

import numpy as np

from .errors import NumericalError, SizeError

#: Hard cap on the dimension of any joint space that gets built.
MAX_DIM = 4096


@dataclass(frozen=True, eq=False)
class OperatorMatrix:
    """Square complex matrix tagged with its tensor-factor dimensions.

    The stored array is a private read-only copy, so instances can be shared
    freely.
    """

    data: np.ndarray
    dims: tuple[int, ...] = ()

    def __post_init__(self):
        arr = np.array(self.data, dtype=complex)
        if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
            raise ValueError(f"operator must be a square matrix, got shape {arr.shape}")
        dims = tuple(int(d) for d in self.dims) if self.dims else (arr.shape[0],)
        if any(d < 1 for d in dims) or int(np.prod(dims)) != arr.shape[0]:
            raise ValueError(f"factor dims {dims} do not multiply to {arr.shape[0]}")
        if not np.all(np.isfinite(arr)):
            raise NumericalError("operator has non-finite entries")
        arr.flags.writeable = False
        object.__setattr__(self, "data", arr)
        object.__setattr__(self, "dims", dims)

    @property
    def dim(self) -> int:
        return self.data.shape[0]

    def dag(self) -> OperatorMatrix:
        return OperatorMatrix(self.data.conj().T, self.dims)

    def trace(self) -> complex:
        return complex(np.trace(self.data))

    def norm(self) -> float:
        return float(np.linalg.norm(self.data))

    def is_hermitian(self, tol: float = 1e-10) -> bool:
        return _hermiticity_defect(self.data) <= tol * max(self.norm(), 1e-300)

    def allclose(self, other, atol: float = 1e-12) -> bool:
        return np.allclose(self.data, _array(other), rtol=0.0, atol=atol)

    def _check(self, other: OperatorMatrix) -> None:
        if self.dim != other.dim:
            raise ValueError(f"dimension mismatch: {self.dim} vs {other.dim}")

    def __matmul__(self, other):
        if isinstance(other, OperatorMatrix):
            self._check(other)
            return OperatorMatrix(self.data @ other.data, self.dims)
        return NotImplemented

    def __add__(self, other):
        if isinstance(other, OperatorMatrix):
            self._check(other)
            return OperatorMatrix(self.data + other.data, self.dims)
        return NotImplemented

    def __sub__(self, other):
        if isinstance(other, OperatorMatrix):
            self._check(other)
            return OperatorMatrix(self.data - other.data, self.dims)
        return NotImplemented

    def __mul__(self, scalar):
        if np.isscalar(scalar):
            return OperatorMatrix(self.data * scalar, self.dims)
        return NotImplemented

    __rmul__ = __mul__

    def __truediv__(self, scalar):
        if np.isscalar(scalar):
            return OperatorMatrix(self.data / scalar, self.dims)
        return NotImplemented

    def __neg__(self):
        return OperatorMatrix(-self.data, self.dims)

    def __repr__(self):
        return f"OperatorMatrix(dim={self.dim}, dims={self.dims})"


def _array(x) -> np.ndarray:
    return x.data if isinstance(x, OperatorMatrix) else np.asarray(x, dtype=complex)


def _hermiticity_defect(a: np.ndarray) -> float:
    return float(np.linalg.norm(a - a.conj().T))


def as_operator(x, dims: Sequence[int] | None = None) -> OperatorMatrix:
    if isinstance(x, OperatorMatrix):
        return x
    return OperatorMatrix(np.asarray(x), tuple(dims) if dims else ())


def identity(dims: int | Sequence[int]) -> OperatorMatrix:
    dims = (dims,) if np.isscalar(dims) else tuple(dims)
    return OperatorMatrix(np.eye(int(np.prod(dims))), dims)


def tensor_product(a: OperatorMatrix, b: OperatorMatrix, max_dim: int = MAX_DIM) -> OperatorMatrix:
    a, b = as_operator(a), as_operator(b)
    dim = a.dim * b.dim
    if dim > max_dim:
        raise SizeError(dim, max_dim)
    return OperatorMatrix(np.kron(a.data, b.data), a.dims + b.dims)


def tensor(*ops: OperatorMatrix, max_dim: int = MAX_DIM) -> OperatorMatrix:
    """Kronecker product of several operators, leftmost factor major."""
    return reduce(lambda x, y: tensor_product(x, y, max_dim), ops)


def partial_trace(x: OperatorMatrix, keep: int | Iterable[int]) -> OperatorMatrix:
    """Trace out every tensor factor whose index is not in ``keep``."""
    dims = x.dims
    n = len(dims)
    if n < 2:
        raise ValueError("partial_trace needs an operator with at least two factors")
    keep = sorted({keep} if isinstance(keep, (int, np.integer)) else set(keep))
    if not keep:
        raise ValueError("keep must name at least one factor")
    bad = [k for k in keep if not 0 <= k < n]
    if bad:
        raise ValueError(f"invalid factor index {bad} for {n} factors")
    t = x.data.reshape(dims + dims)
    rows = list(range(n))
    cols = [n + i if i in keep else i for i in range(n)]
    out = keep + [n + i for i in keep]
    reduced = np.einsum(t, rows + cols, out)
    kept = tuple(dims[i] for i in keep)
    d = int(np.prod(kept))
    return OperatorMatrix(reduced.reshape(d, d), kept)


def commutator(v: OperatorMatrix, x: OperatorMatrix) -> OperatorMatrix:
    """V_- X = VX - XV."""
    v, x = as_operator(v), as_operator(x)
    v._check(x)
    return OperatorMatrix(v.data @ x.data - x.data @ v.data, x.dims)


def anticommutator(v: OperatorMatrix, x: OperatorMatrix) -> OperatorMatrix:
    """V_+ X = (VX + XV)/2.  Note the factor one half."""
    v, x = as_operator(v), as_operator(x)
    v._check(x)
    return OperatorMatrix(0.5 * (v.data @ x.data + x.data @ v.data), x.dims)


def eigh_checked(h, tol: float = 1e-10) -> tuple[np.ndarray, np.ndarray]:
    """Eigendecomposition of a matrix that must be Hermitian to ``tol`` relative."""
    a = _array(h)
    if _hermiticity_defect(a) > tol * max(float(np.linalg.norm(a)), 1e-300):
        raise ValueError("matrix is not Hermitian within tolerance")
    return np.linalg.eigh(0.5 * (a + a.conj().T))


def hermitian_function(h: OperatorMatrix, f: Callable[[np.ndarray], np.ndarray], tol: float = 1e-10) -> OperatorMatrix:
    """Apply a scalar function to a Hermitian operator through its eigenbasis.

    ``f`` receives the real eigenvalue array and must return an array of the
    same shape (real or complex).
    """
    h = as_operator(h)
    w, u = eigh_checked(h, tol)
    fw = np.asarray(f(w), dtype=complex)
    return OperatorMatrix((u * fw) @ u.conj().T, h.dims)
