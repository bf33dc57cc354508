"""Hermiticity-preserving linear maps as immutable expression trees.

Primitive positive maps (transposition, reduction, Breuer-Hall, Choi,
unitary conjugation, Diag, trace-times-identity) are combined with
lift-to-subsystem, sum, scale and composition nodes.  Evaluation is
vectorised over a leading batch axis so subsystem lifts stay cheap, and
duals are computed analytically node by node.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable

import numpy as np

from .operators import MpOperator, PartySubset, SiteDims, party_subset, site_dims

UNITARY_TOL = 1e-12


class MapExpr:
    """Base node; every node knows the side length of matrices it accepts."""

    dim: int

    def __call__(self, op: MpOperator) -> MpOperator:
        return apply(self, op)


@dataclass(frozen=True, eq=False)
class Identity(MapExpr):
    dim: int


@dataclass(frozen=True, eq=False)
class Transpose(MapExpr):
    dim: int


@dataclass(frozen=True, eq=False)
class Reduction(MapExpr):
    """rho -> (Tr(rho) I - rho) / (d - 1), trace preserving."""

    dim: int

    def __post_init__(self):
        if self.dim < 2:
            raise ValueError("reduction map needs d >= 2")


@dataclass(frozen=True, eq=False)
class BreuerHall(MapExpr):
    """rho -> (Tr(rho) I - rho - V rho^T V^dag) / (d - 2), even d >= 4."""

    dim: int
    v: np.ndarray

    def __post_init__(self):
        d = self.dim
        if d < 4 or d % 2:
            raise ValueError("Breuer-Hall map needs even d >= 4")
        v = np.asarray(self.v, dtype=complex)
        if v.shape != (d, d):
            raise ValueError(f"V must be {d}x{d}")
        if np.max(np.abs(v @ v.conj().T - np.eye(d))) > UNITARY_TOL:
            raise ValueError("V must be unitary")
        if np.max(np.abs(v.T + v)) > UNITARY_TOL:
            raise ValueError("V must be skew-symmetric (V^T = -V)")
        v = v.copy()
        v.flags.writeable = False
        object.__setattr__(self, "v", v)


@dataclass(frozen=True, eq=False)
class Choi(MapExpr):
    """rho -> 2 Diag rho + sum_{j=1}^{d-2} X^j Diag(rho) X^{j dag} - rho.

    X is the cyclic shift X|j> = |j-1 mod d>.  At d = 2 the sum is empty and
    the map degenerates to a completely positive conjugation, so d < 3 is
    rejected.  `adjoint` selects the Hilbert-Schmidt dual (shifts reversed).
    """

    dim: int
    adjoint: bool = False

    def __post_init__(self):
        if self.dim < 3:
            raise ValueError("Choi map needs d >= 3")


@dataclass(frozen=True, eq=False)
class Conjugate(MapExpr):
    """rho -> U rho U^dag."""

    u: np.ndarray
    dim: int = field(init=False)

    def __post_init__(self):
        u = np.asarray(self.u, dtype=complex)
        if u.ndim != 2 or u.shape[0] != u.shape[1]:
            raise ValueError("U must be square")
        if np.max(np.abs(u @ u.conj().T - np.eye(u.shape[0]))) > UNITARY_TOL:
            raise ValueError("U must be unitary")
        u = u.copy()
        u.flags.writeable = False
        object.__setattr__(self, "u", u)
        object.__setattr__(self, "dim", u.shape[0])


@dataclass(frozen=True, eq=False)
class DiagAll(MapExpr):
    """Keep the main diagonal, zero elsewhere."""

    dim: int


@dataclass(frozen=True, eq=False)
class TraceIdentity(MapExpr):
    """rho -> c Tr(rho) I, with c stored exactly."""

    c: Fraction
    dim: int

    def __post_init__(self):
        object.__setattr__(self, "c", Fraction(self.c))


@dataclass(frozen=True, eq=False)
class TraceOuter(MapExpr):
    """rho -> Tr(weight rho) * output; dual swaps the two operators."""

    weight: np.ndarray
    output: np.ndarray
    dim: int = field(init=False)

    def __post_init__(self):
        w = np.asarray(self.weight, dtype=complex)
        o = np.asarray(self.output, dtype=complex)
        if w.shape != o.shape or w.ndim != 2 or w.shape[0] != w.shape[1]:
            raise ValueError("weight and output must be square matrices of equal size")
        w, o = w.copy(), o.copy()
        w.flags.writeable = False
        o.flags.writeable = False
        object.__setattr__(self, "weight", w)
        object.__setattr__(self, "output", o)
        object.__setattr__(self, "dim", w.shape[0])


@dataclass(frozen=True, eq=False)
class SchurWith(MapExpr):
    """Entrywise product with a fixed Hermitian mask."""

    mask: np.ndarray
    dim: int = field(init=False)

    def __post_init__(self):
        m = np.asarray(self.mask, dtype=complex)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValueError("mask must be square")
        m = m.copy()
        m.flags.writeable = False
        object.__setattr__(self, "mask", m)
        object.__setattr__(self, "dim", m.shape[0])


@dataclass(frozen=True, eq=False)
class Lift(MapExpr):
    """Apply `child` to the composite subsystem A, identity elsewhere."""

    child: MapExpr
    parties: PartySubset
    dims: SiteDims
    dim: int = field(init=False)

    def __post_init__(self):
        self.parties.validate(self.dims.n)
        dA = int(np.prod([self.dims.dims[p] for p in self.parties]))
        if self.child.dim != dA:
            raise ValueError(
                f"child map dimension {self.child.dim} does not match subsystem size {dA}")
        object.__setattr__(self, "dim", self.dims.total)


@dataclass(frozen=True, eq=False)
class Sum(MapExpr):
    children: tuple[MapExpr, ...]
    dim: int = field(init=False)

    def __post_init__(self):
        if not self.children:
            raise ValueError("empty sum")
        d = self.children[0].dim
        if any(c.dim != d for c in self.children):
            raise ValueError("sum children disagree on dimension")
        object.__setattr__(self, "children", tuple(self.children))
        object.__setattr__(self, "dim", d)


@dataclass(frozen=True, eq=False)
class Scale(MapExpr):
    r: float
    child: MapExpr
    dim: int = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "dim", self.child.dim)


@dataclass(frozen=True, eq=False)
class Compose(MapExpr):
    """outer after inner."""

    outer: MapExpr
    inner: MapExpr
    dim: int = field(init=False)

    def __post_init__(self):
        if self.outer.dim != self.inner.dim:
            raise ValueError("composed maps disagree on dimension")
        object.__setattr__(self, "dim", self.inner.dim)


# ---------------------------------------------------------------------------
# evaluation
# ---------------------------------------------------------------------------

def _diag_vec(x: np.ndarray) -> np.ndarray:
    return np.einsum("...ii->...i", x)


def _embed_diag(v: np.ndarray) -> np.ndarray:
    d = v.shape[-1]
    out = np.zeros(v.shape + (d,), dtype=complex)
    idx = np.arange(d)
    out[..., idx, idx] = v
    return out


def _eval(node: MapExpr, x: np.ndarray) -> np.ndarray:
    """Apply `node` to a stack of matrices, shape (..., d, d)."""
    if isinstance(node, Identity):
        return x
    if isinstance(node, Transpose):
        return x.swapaxes(-1, -2)
    if isinstance(node, Reduction):
        tr = np.trace(x, axis1=-2, axis2=-1)
        eye = np.eye(node.dim)
        return (tr[..., None, None] * eye - x) / (node.dim - 1)
    if isinstance(node, BreuerHall):
        tr = np.trace(x, axis1=-2, axis2=-1)
        eye = np.eye(node.dim)
        vxv = node.v @ x.swapaxes(-1, -2) @ node.v.conj().T
        return (tr[..., None, None] * eye - x - vxv) / (node.dim - 2)
    if isinstance(node, Choi):
        v = _diag_vec(x)
        shift = 1 if node.adjoint else -1
        acc = 2 * v.copy()
        for j in range(1, node.dim - 1):
            acc = acc + np.roll(v, shift * j, axis=-1)
        return _embed_diag(acc) - x
    if isinstance(node, Conjugate):
        return node.u @ x @ node.u.conj().T
    if isinstance(node, DiagAll):
        return _embed_diag(_diag_vec(x).copy())
    if isinstance(node, TraceIdentity):
        tr = np.trace(x, axis1=-2, axis2=-1)
        return float(node.c) * tr[..., None, None] * np.eye(node.dim)
    if isinstance(node, TraceOuter):
        tr = np.einsum("ij,...ji->...", node.weight, x)
        return tr[..., None, None] * node.output
    if isinstance(node, SchurWith):
        return node.mask * x
    if isinstance(node, Sum):
        out = _eval(node.children[0], x)
        for c in node.children[1:]:
            out = out + _eval(c, x)
        return out
    if isinstance(node, Scale):
        return node.r * _eval(node.child, x)
    if isinstance(node, Compose):
        return _eval(node.outer, _eval(node.inner, x))
    if isinstance(node, Lift):
        return _eval_lift(node, x)
    raise TypeError(f"unknown map node {type(node).__name__}")


def _eval_lift(node: Lift, x: np.ndarray) -> np.ndarray:
    dims = node.dims.dims
    n = len(dims)
    A = list(node.parties.members)
    rest = [i for i in range(n) if i not in node.parties.members]
    dA = int(np.prod([dims[i] for i in A]))
    dR = node.dim // dA
    batch = x.shape[:-2]
    nb = len(batch)
    t = x.reshape(batch + tuple(dims) + tuple(dims))
    order = A + rest
    perm = list(range(nb)) + [nb + o for o in order] + [nb + n + o for o in order]
    t = t.transpose(perm).reshape(batch + (dA, dR, dA, dR))
    # blocks indexed by the rest-space, child acts on the last two axes
    t = np.moveaxis(t, (-4, -2), (-2, -1))  # (..., dR, dR, dA, dA)
    t = _eval(node.child, t)
    t = np.moveaxis(t, (-2, -1), (-4, -2))
    adims = [dims[i] for i in A]
    rdims = [dims[i] for i in rest]
    t = t.reshape(batch + tuple(adims + rdims + adims + rdims))
    inv = np.argsort(perm).tolist()
    t = t.transpose(inv)
    return t.reshape(batch + (node.dim, node.dim))


def _check_lift_dims(m: MapExpr, dims: SiteDims) -> None:
    """Every lift reachable without crossing another lift must match `dims`."""
    if isinstance(m, Lift):
        if m.dims != dims:
            raise ValueError(
                f"operator dims {dims.dims} do not match lift dims {m.dims.dims}")
        return
    if isinstance(m, Sum):
        for c in m.children:
            _check_lift_dims(c, dims)
    elif isinstance(m, Scale):
        _check_lift_dims(m.child, dims)
    elif isinstance(m, Compose):
        _check_lift_dims(m.outer, dims)
        _check_lift_dims(m.inner, dims)


def apply(m: MapExpr, op: MpOperator) -> MpOperator:
    """Evaluate the map on a multipartite operator."""
    if m.dim != op.d:
        raise ValueError(f"operator side {op.d} does not match map dimension {m.dim}")
    _check_lift_dims(m, op.dims)
    return MpOperator(op.dims, _eval(m, op.mat))


def apply_stack(m: MapExpr, stack: np.ndarray) -> np.ndarray:
    """Evaluate the map on a stack of matrices, shape (..., d, d)."""
    stack = np.asarray(stack, dtype=complex)
    if stack.shape[-1] != m.dim or stack.shape[-2] != m.dim:
        raise ValueError("stack side does not match map dimension")
    return _eval(m, stack)


# ---------------------------------------------------------------------------
# duals
# ---------------------------------------------------------------------------

def dual(m: MapExpr) -> MapExpr:
    """Hilbert-Schmidt adjoint, computed structurally."""
    if isinstance(m, (Identity, Transpose, Reduction, DiagAll, TraceIdentity, BreuerHall)):
        # Breuer-Hall is self-dual: I Tr and I are, and skew-symmetry of V
        # makes the V rho^T V^dag addend self-adjoint.
        return m
    if isinstance(m, Choi):
        return Choi(m.dim, adjoint=not m.adjoint)
    if isinstance(m, Conjugate):
        return Conjugate(m.u.conj().T)
    if isinstance(m, TraceOuter):
        return TraceOuter(m.output, m.weight)
    if isinstance(m, SchurWith):
        return SchurWith(m.mask.T)
    if isinstance(m, Lift):
        return Lift(dual(m.child), m.parties, m.dims)
    if isinstance(m, Sum):
        return Sum(tuple(dual(c) for c in m.children))
    if isinstance(m, Scale):
        return Scale(m.r, dual(m.child))
    if isinstance(m, Compose):
        return Compose(dual(m.inner), dual(m.outer))
    raise TypeError(f"unknown map node {type(m).__name__}")


# ---------------------------------------------------------------------------
# constructors
# ---------------------------------------------------------------------------

def identity_map(d: int) -> MapExpr:
    return Identity(d)


def transpose_map(d: int) -> MapExpr:
    return Transpose(d)


def reduction_map(d: int) -> MapExpr:
    return Reduction(d)


def default_skew_unitary(d: int) -> np.ndarray:
    """Block form [[0, I], [-I, 0]]."""
    h = d // 2
    v = np.zeros((d, d))
    v[:h, h:] = np.eye(h)
    v[h:, :h] = -np.eye(h)
    return v


def breuer_hall_map(d: int, v: np.ndarray | MpOperator | None = None) -> MapExpr:
    if v is None:
        v = default_skew_unitary(d)
    elif isinstance(v, MpOperator):
        v = v.mat
    return BreuerHall(d, v)


def choi_map(d: int) -> MapExpr:
    return Choi(d)


def conjugation_map(u: np.ndarray | MpOperator) -> MapExpr:
    if isinstance(u, MpOperator):
        u = u.mat
    return Conjugate(u)


def diag_map(d: int) -> MapExpr:
    return DiagAll(d)


def trace_identity(c: Fraction | int | float, d: int) -> MapExpr:
    return TraceIdentity(Fraction(c), d)


def lift(child: MapExpr, parties: Iterable[int] | PartySubset,
         dims: Iterable[int] | SiteDims) -> MapExpr:
    return Lift(child, party_subset(parties), site_dims(dims))


def map_sum(*children: MapExpr) -> MapExpr:
    return Sum(tuple(children))


def scale(r: float, child: MapExpr) -> MapExpr:
    return Scale(r, child)


def compose(outer: MapExpr, inner: MapExpr, *more: MapExpr) -> MapExpr:
    out = Compose(outer, inner)
    for m in more:
        out = Compose(out, m)
    return out


# ---------------------------------------------------------------------------
# minimal output eigenvalue
# ---------------------------------------------------------------------------

def mu_constant(m: MapExpr) -> Fraction:
    """Closed-form minimal output eigenvalue for the supported primitives."""
    if isinstance(m, Transpose):
        return Fraction(1, 2)
    if isinstance(m, Reduction):
        return Fraction(1, m.dim)
    if isinstance(m, BreuerHall):
        return Fraction(1, m.dim)
    raise ValueError(f"no closed-form constant for {type(m).__name__}")


def estimate_mu(m: MapExpr, d: int, samples: int, seed: int,
                companion: int | None = None) -> float:
    """Lower bound on the minimal output eigenvalue by sampling.

    Maximises -lambda_min((m x I)[|psi><psi|]) over Haar-random pure states
    of C^d x C^companion, always including the maximally entangled ansatz
    at every embedded Schmidt rank.  The rank-2 member attains 1/2 for
    transposition; the full-rank member attains 1/d for the reduction and
    Breuer-Hall maps.
    """
    if samples < 1:
        raise ValueError("need samples >= 1")
    if m.dim != d:
        raise ValueError(f"map dimension {m.dim} does not match d={d}")
    nc = d if companion is None else companion
    dims = SiteDims((d, nc))
    lifted = Lift(m, PartySubset((0,)), dims)
    rng = np.random.default_rng(seed)

    def neg_min_eig(vec: np.ndarray) -> float:
        rho = np.outer(vec, vec.conj())
        out = _eval(lifted, rho)
        w = np.linalg.eigvalsh((out + out.conj().T) / 2)
        return -float(w[0])

    best = -np.inf
    for rank in range(2, min(d, nc) + 1):
        v = np.zeros(d * nc, dtype=complex)
        for i in range(rank):
            v[i * nc + i] = 1
        best = max(best, neg_min_eig(v / np.sqrt(rank)))
    for _ in range(samples):
        v = rng.standard_normal(d * nc) + 1j * rng.standard_normal(d * nc)
        best = max(best, neg_min_eig(v / np.linalg.norm(v)))
    return best


def mu_sample_values(m: MapExpr, d: int, samples: int, seed: int) -> np.ndarray:
    """Per-sample -lambda_min values (without the entangled ansatz)."""
    dims = SiteDims((d, d))
    lifted = Lift(m, PartySubset((0,)), dims)
    rng = np.random.default_rng(seed)
    vals = np.empty(samples)
    for i in range(samples):
        v = rng.standard_normal(d * d) + 1j * rng.standard_normal(d * d)
        v /= np.linalg.norm(v)
        out = _eval(lifted, np.outer(v, v.conj()))
        vals[i] = -float(np.linalg.eigvalsh((out + out.conj().T) / 2)[0])
    return vals
