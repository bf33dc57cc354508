"""Construction of biseparable-positive maps from lifted positive maps.

Each criterion sums a positive map applied to one side of every bipartition
and adds a compensation term sized by the primitive's minimal output
eigenvalue.  The Choi-based and qubit-optimised variants are composed with
a projection onto the cyclic GHZ subspace, realised either as a Schur mask
or as a mixture of clock-unitary conjugations.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from math import sqrt

import numpy as np

from .maps import (Choi, Compose, Conjugate, DiagAll, Identity, Lift, MapExpr,
                   Scale, SchurWith, Sum, TraceIdentity, TraceOuter,
                   apply, breuer_hall_map, dual, reduction_map, transpose_map)
from .operators import MpOperator, PartySubset, SiteDims, is_hermitian
from .states import PureState, clock_matrix, shift_matrix


@dataclass(frozen=True)
class BipartitionSet:
    """One representative subset per unordered bipartition A|Abar."""

    n: int
    representatives: tuple[PartySubset, ...]

    def __len__(self):
        return len(self.representatives)

    def __iter__(self):
        return iter(self.representatives)


def bipartitions(n: int) -> BipartitionSet:
    """All 2^(n-1) - 1 bipartition representatives, by size then lexicographic.

    The representative is the smaller side; for even splits, the side
    containing party 0.
    """
    if n < 2:
        raise ValueError("need n >= 2 parties")
    reps = []
    for size in range(1, n // 2 + 1):
        for combo in itertools.combinations(range(n), size):
            if 2 * size == n and 0 not in combo:
                continue
            reps.append(PartySubset(combo))
    assert len(reps) == 2 ** (n - 1) - 1
    return BipartitionSet(n, tuple(reps))


@dataclass(frozen=True)
class Claim:
    """Closed-form expectation attached to a constructed map."""

    quantity: str
    value: float
    source: str  # "closed-form" or "derived-numeric"
    note: str = ""


@dataclass(frozen=True, eq=False)
class GmeMap:
    """A map that is positive on all biseparable states of `dims`."""

    label: str
    expr: MapExpr
    dims: SiteDims
    claims: tuple[Claim, ...] = ()


def _kron_all(mats: list[np.ndarray]) -> np.ndarray:
    out = mats[0]
    for m in mats[1:]:
        out = np.kron(out, m)
    return out


def _sigma_x_on(subset: PartySubset, n: int) -> np.ndarray:
    sx = shift_matrix(2).mat
    return _kron_all([sx if i in subset.members else np.eye(2) for i in range(n)])


def _compensation(n: int, mu: Fraction, dim: int) -> MapExpr:
    """c * I Tr with c = (#bipartitions - 1) * mu, stored exactly."""
    c = (2 ** (n - 1) - 2) * mu
    return TraceIdentity(c, dim)


def phi_t(n: int, d: int = 2) -> GmeMap:
    """Lifted-transposition criterion: sum of partial transposes plus c I Tr."""
    if n < 3:
        raise ValueError("phi-t needs n >= 3")
    dims = SiteDims((d,) * n)
    lifts = [Lift(transpose_map(d ** len(A)), A, dims) for A in bipartitions(n)]
    expr = Sum(tuple(lifts) + (_compensation(n, Fraction(1, 2), dims.total),))
    claims = ()
    if n == 3 and d == 2:
        claims = (
            Claim("min-eig:w3", 1 - 2 / sqrt(3), "closed-form"),
            Claim("threshold:noisy-w3", 11 * sqrt(3) / (16 + 3 * sqrt(3)), "closed-form"),
        )
    return GmeMap("phi-t", expr, dims, claims)


def phi_tx(n: int) -> GmeMap:
    """Transposition followed by a sigma_x flip on the transposed side (qubits)."""
    if n < 3:
        raise ValueError("phi-tx needs n >= 3")
    dims = SiteDims((2,) * n)
    lifts = []
    for A in bipartitions(n):
        dA = 2 ** len(A)
        flip = Conjugate(_kron_all([shift_matrix(2).mat] * len(A)))
        lifts.append(Lift(Compose(flip, transpose_map(dA)), A, dims))
    expr = Sum(tuple(lifts) + (_compensation(n, Fraction(1, 2), dims.total),))
    b = 2 ** (n - 1)
    claims = (
        Claim("min-eig:ghz", -0.5, "closed-form"),
        Claim("threshold:noisy-ghz", (b * b - b - 1) / (b * b - 1), "derived-numeric",
              note="closed form fitted to bisection; gives 11/15 at n=3 and tends to 1"),
    )
    return GmeMap("phi-tx", expr, dims, claims)


def _digit_patterns(n: int, d: int) -> np.ndarray:
    """Per-basis-index digit offsets relative to party 0, encoded as integers."""
    D = d ** n
    idx = np.arange(D)
    digits = np.empty((D, n), dtype=np.int64)
    for k in range(n - 1, -1, -1):
        digits[:, k] = idx % d
        idx = idx // d
    rel = (digits - digits[:, :1]) % d
    enc = np.zeros(D, dtype=np.int64)
    for k in range(1, n):
        enc = enc * d + rel[:, k]
    return enc


def x_projector(n: int, d: int) -> MapExpr:
    """Projector onto the cyclic GHZ subspace via a 0/1 Schur mask.

    Keeps entries (u, v) whose digit offsets relative to party 0 agree
    between row and column indices, all offsets taken mod d.
    """
    if n < 2 or d < 2:
        raise ValueError("x_projector needs n >= 2 and d >= 2")
    enc = _digit_patterns(n, d)
    mask = (enc[:, None] == enc[None, :]).astype(float)
    return SchurWith(mask)


def x_projector_mixture(n: int, d: int) -> MapExpr:
    """Same projector as a composition of clock-unitary averages."""
    if n < 2 or d < 2:
        raise ValueError("x_projector_mixture needs n >= 2 and d >= 2")
    stages = []
    eye = np.eye(d)
    for j in range(1, n):
        terms = []
        for k in range(d):
            z = clock_matrix(d, k).mat
            u = _kron_all([z if i == 0 else (z.conj().T if i == j else eye)
                           for i in range(n)])
            terms.append(Scale(1.0 / d, Conjugate(u)))
        stages.append(Sum(tuple(terms)))
    expr = stages[0]
    for s in stages[1:]:
        expr = Compose(expr, s)
    return expr


def _phi_tx_sum(n: int) -> Sum:
    dims = SiteDims((2,) * n)
    lifts = []
    for A in bipartitions(n):
        dA = 2 ** len(A)
        flip = Conjugate(_kron_all([shift_matrix(2).mat] * len(A)))
        lifts.append(Lift(Compose(flip, transpose_map(dA)), A, dims))
    return Sum(tuple(lifts))


def eta_map(n: int) -> GmeMap:
    """Diag-compensated qubit criterion, pre-composed with the subspace projector."""
    if n < 3:
        raise ValueError("eta needs n >= 3")
    dims = SiteDims((2,) * n)
    phi = _phi_tx_sum(n)
    k = 2 ** (n - 1) - 1
    eta = Sum((phi, Scale(float(k - 1), Compose(DiagAll(dims.total), phi))))
    expr = Compose(eta, x_projector(n, 2))
    claims = (
        Claim("threshold:noisy-ghz", (2 ** (n - 1) - 1) / (2 ** n - 1), "closed-form"),
    )
    return GmeMap("eta", expr, dims, claims)


def _single_lift_criterion(label: str, n: int, d: int, child_for,
                           claims: tuple[Claim, ...]) -> GmeMap:
    dims = SiteDims((d,) * n)
    lifts = [Lift(child_for(len(A)), A, dims) for A in bipartitions(n)]
    expr = Sum(tuple(lifts) + (_compensation(n, Fraction(1, d), dims.total),))
    return GmeMap(label, expr, dims, claims)


def phi_r(d: int, n: int = 3) -> GmeMap:
    """Lifted reduction-map criterion; compensation (2^(n-1)-2)/d."""
    if n < 3:
        raise ValueError("phi-r needs n >= 3")
    if d < 2:
        raise ValueError("phi-r needs d >= 2")
    claims = ()
    if n == 3:
        claims = (
            Claim("min-eig:ghz", -1.0 / d, "closed-form"),
            Claim("threshold:noisy-ghz", 1 - d * d / (3 * (d * d + 1)), "closed-form"),
        )
    return _single_lift_criterion("phi-r", n, d,
                                  lambda m: reduction_map(d ** m), claims)


def phi_b(d: int, n: int = 3, v: np.ndarray | None = None) -> GmeMap:
    """Lifted Breuer-Hall criterion; block skew-symmetric V by default."""
    if n < 3:
        raise ValueError("phi-b needs n >= 3")
    if d < 4 or d % 2:
        raise ValueError("phi-b needs even d >= 4")
    claims = ()
    if n == 3:
        claims = (
            Claim("min-eig:ghz", -1.0 / d, "closed-form"),
            Claim("threshold:noisy-ghz", 1 - d * d / (3 * (d * d + 1)), "closed-form"),
        )

    def child(m: int) -> MapExpr:
        if m == 1 and v is not None:
            return breuer_hall_map(d, v)
        return breuer_hall_map(d ** m)

    return _single_lift_criterion("phi-b", n, d, child, claims)


def _choi_on_subset(size: int, d: int) -> MapExpr:
    """Choi-style map on a composite subsystem, shifting every party locally.

    For a single party this is the plain Choi map.  For larger subsets the
    j-th addend conjugates by X^j on each party of the subset, keeping the
    same j range; this keeps the unital coefficient at d - 1 independent of
    the subset size.
    """
    if size == 1:
        return Choi(d)
    dA = d ** size
    x = shift_matrix(d).mat
    terms: list[MapExpr] = [Scale(2.0, DiagAll(dA))]
    for j in range(1, d - 1):
        xj = np.linalg.matrix_power(x, j)
        terms.append(Compose(Conjugate(_kron_all([xj] * size)), DiagAll(dA)))
    terms.append(Scale(-1.0, Identity(dA)))
    return Sum(tuple(terms))


def alpha_critical(n: int, d: int) -> float:
    """Critical visibility of the noisy GHZ state under the Choi criterion."""
    a = (d - 2) * (2 ** (n - 1) - 1) + 1
    return a / (a + (d - 2) * d ** (n - 1))


def mu_map(n: int, d: int) -> GmeMap:
    """Choi-lift criterion with Diag compensation, composed with the projector."""
    if n < 3:
        raise ValueError("mu-choi needs n >= 3")
    if d < 3:
        raise ValueError("mu-choi needs d >= 3")
    dims = SiteDims((d,) * n)
    D = dims.total
    lifts = [Lift(_choi_on_subset(len(A), d), A, dims) for A in bipartitions(n)]
    phi = Sum(tuple(lifts))
    k = 2 ** (n - 1) - 1
    mu = Sum((phi,
              Scale(float(k - 1), Compose(DiagAll(D), phi)),
              Scale(-float((k - 1) * k), DiagAll(D))))
    expr = Compose(mu, x_projector(n, d))
    claims = (
        Claim("threshold:noisy-ghz", alpha_critical(n, d), "closed-form"),
    )
    return GmeMap("mu-choi", expr, dims, claims)


def witness_to_map(w: MpOperator) -> GmeMap:
    """rho -> Tr(W rho) I; biseparable-positive whenever W is a witness."""
    if not is_hermitian(w):
        raise ValueError("witness must be Hermitian")
    expr = TraceOuter(w.mat, np.eye(w.d))
    return GmeMap("witness", expr, w.dims)


def map_to_witness(m: GmeMap, psi: PureState) -> MpOperator:
    """Witness W with Tr(W rho) = <psi| m[rho] |psi> for all rho."""
    if psi.dims != m.dims:
        raise ValueError(f"state dims {psi.dims.dims} do not match map dims {m.dims.dims}")
    return apply(dual(m.expr), psi.density())


# ---------------------------------------------------------------------------
# catalog
# ---------------------------------------------------------------------------

MAP_IDS = ("phi-t", "phi-tx", "eta", "phi-r", "phi-b", "mu-choi")

#: smallest valid (n, d) per catalog id
SMALLEST = {
    "phi-t": (3, 2),
    "phi-tx": (3, 2),
    "eta": (3, 2),
    "phi-r": (3, 2),
    "phi-b": (3, 4),
    "mu-choi": (3, 3),
}


def build_map(map_id: str, n: int, d: int) -> GmeMap:
    """Construct a cataloged map by id; raises ValueError for bad combos."""
    if map_id == "phi-t":
        return phi_t(n, d)
    if map_id == "phi-tx":
        if d != 2:
            raise ValueError("phi-tx is a qubit criterion (d = 2)")
        return phi_tx(n)
    if map_id == "eta":
        if d != 2:
            raise ValueError("eta is a qubit criterion (d = 2)")
        return eta_map(n)
    if map_id == "phi-r":
        return phi_r(d, n)
    if map_id == "phi-b":
        return phi_b(d, n)
    if map_id == "mu-choi":
        return mu_map(n, d)
    raise ValueError(f"unknown map id {map_id!r}; choose from {', '.join(MAP_IDS)}")
