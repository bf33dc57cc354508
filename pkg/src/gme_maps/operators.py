"""Dense multipartite operator arithmetic.

Operators live on a tensor product of local Hilbert spaces described by
SiteDims.  The computational product basis is used throughout, row-major,
with party 0 the most significant index (numpy.kron convention).  Partial
transposition and partial trace are defined with respect to this basis.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import prod
from typing import Iterable

import numpy as np

HERM_RTOL = 1e-12
DENSITY_TRACE_TOL = 1e-10
DENSITY_EIG_TOL = 1e-10


@dataclass(frozen=True)
class SiteDims:
    """Ordered local dimensions of a multipartite system."""

    dims: tuple[int, ...]

    def __post_init__(self):
        dims = tuple(int(d) for d in self.dims)
        if not dims:
            raise ValueError("need at least one site")
        if any(d < 2 for d in dims):
            raise ValueError(f"every local dimension must be >= 2, got {dims}")
        object.__setattr__(self, "dims", dims)

    @property
    def n(self) -> int:
        return len(self.dims)

    @property
    def total(self) -> int:
        return prod(self.dims)

    def __iter__(self):
        return iter(self.dims)


def site_dims(dims: Iterable[int] | SiteDims) -> SiteDims:
    return dims if isinstance(dims, SiteDims) else SiteDims(tuple(dims))


@dataclass(frozen=True)
class PartySubset:
    """Proper nonempty subset of party indices, kept sorted."""

    members: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "members", tuple(sorted(set(int(m) for m in self.members))))

    def validate(self, n: int) -> None:
        if not self.members or len(self.members) >= n:
            raise ValueError(f"subset {self.members} must be proper and nonempty for {n} parties")
        if self.members[0] < 0 or self.members[-1] >= n:
            raise ValueError(f"subset {self.members} out of range for {n} parties")

    def complement(self, n: int) -> "PartySubset":
        return PartySubset(tuple(i for i in range(n) if i not in self.members))

    def __iter__(self):
        return iter(self.members)

    def __len__(self):
        return len(self.members)


def party_subset(members: Iterable[int] | PartySubset) -> PartySubset:
    return members if isinstance(members, PartySubset) else PartySubset(tuple(members))


@dataclass(frozen=True, eq=False)
class MpOperator:
    """Square complex matrix tagged with the SiteDims it acts on."""

    dims: SiteDims
    mat: np.ndarray

    def __post_init__(self):
        mat = np.asarray(self.mat, dtype=complex)
        D = self.dims.total
        if mat.shape != (D, D):
            raise ValueError(f"matrix shape {mat.shape} does not match dims {self.dims.dims} (D={D})")
        mat = mat.copy()
        mat.flags.writeable = False
        object.__setattr__(self, "mat", mat)

    @property
    def d(self) -> int:
        return self.dims.total

    def trace(self) -> complex:
        return complex(np.trace(self.mat))


def operator(dims: Iterable[int] | SiteDims, mat: np.ndarray) -> MpOperator:
    return MpOperator(site_dims(dims), mat)


def identity(dims: Iterable[int] | SiteDims) -> MpOperator:
    sd = site_dims(dims)
    return MpOperator(sd, np.eye(sd.total))


def is_hermitian(op: MpOperator, rtol: float = HERM_RTOL) -> bool:
    m = op.mat
    scale = max(1.0, float(np.max(np.abs(m))) if m.size else 1.0)
    return float(np.max(np.abs(m - m.conj().T))) <= rtol * scale


def is_density(op: MpOperator, trace_tol: float = DENSITY_TRACE_TOL,
               eig_tol: float = DENSITY_EIG_TOL) -> bool:
    if not is_hermitian(op):
        return False
    if abs(op.trace() - 1.0) > trace_tol:
        return False
    w = np.linalg.eigvalsh((op.mat + op.mat.conj().T) / 2)
    return bool(w[0] >= -eig_tol)


def kron(a: MpOperator, b: MpOperator) -> MpOperator:
    """Tensor product; dims concatenate, party order a then b."""
    return MpOperator(SiteDims(a.dims.dims + b.dims.dims), np.kron(a.mat, b.mat))


def _axes_tensor(op: MpOperator) -> np.ndarray:
    d = op.dims.dims
    return op.mat.reshape(d + d)


def partial_transpose(op: MpOperator, parties: Iterable[int] | PartySubset) -> MpOperator:
    """Transpose the indices of the given parties in the computational basis.

    Involution: applying twice returns the input.
    """
    ps = party_subset(parties)
    n = op.dims.n
    ps.validate(n)
    t = _axes_tensor(op)
    perm = list(range(2 * n))
    for p in ps:
        perm[p], perm[n + p] = perm[n + p], perm[p]
    D = op.d
    return MpOperator(op.dims, t.transpose(perm).reshape(D, D))


def partial_trace(op: MpOperator, parties: Iterable[int] | PartySubset) -> MpOperator:
    """Trace out the given parties; remaining parties keep their order."""
    ps = party_subset(parties)
    n = op.dims.n
    ps.validate(n)
    keep = [i for i in range(n) if i not in ps.members]
    t = _axes_tensor(op)
    row = list(range(n))
    col = [n + i if i in keep else i for i in range(n)]
    out_idx = [i for i in keep] + [n + i for i in keep]
    t = np.einsum(t, row + col, out_idx)
    new_dims = SiteDims(tuple(op.dims.dims[i] for i in keep))
    D = new_dims.total
    return MpOperator(new_dims, t.reshape(D, D))


def diag_part(op: MpOperator) -> MpOperator:
    return MpOperator(op.dims, np.diag(np.diag(op.mat)))


def od_part(op: MpOperator) -> MpOperator:
    return MpOperator(op.dims, op.mat - np.diag(np.diag(op.mat)))


def schur_product(a: MpOperator, b: MpOperator) -> MpOperator:
    if a.dims != b.dims:
        raise ValueError(f"shape mismatch: {a.dims.dims} vs {b.dims.dims}")
    return MpOperator(a.dims, a.mat * b.mat)


def min_eig(op: MpOperator, herm_rtol: float = HERM_RTOL) -> tuple[float, np.ndarray]:
    """Smallest eigenvalue and a unit eigenvector of a Hermitian operator.

    The input is symmetrised before diagonalisation; non-Hermitian input
    (beyond tolerance) raises ValueError.
    """
    if not is_hermitian(op, herm_rtol):
        raise ValueError("min_eig requires a Hermitian operator")
    h = (op.mat + op.mat.conj().T) / 2
    w, v = np.linalg.eigh(h)
    return float(w[0]), v[:, 0].copy()


def eigvalsh(op: MpOperator) -> np.ndarray:
    """All eigenvalues of the symmetrised operator, ascending."""
    h = (op.mat + op.mat.conj().T) / 2
    return np.linalg.eigvalsh(h)
