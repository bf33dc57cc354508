"""Detection verdicts, noise thresholds, family scans and fuzz verification."""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .criteria import GmeMap, bipartitions
from .maps import apply
from .operators import (MpOperator, eigvalsh, is_density, min_eig,
                        partial_transpose)
from .states import (PureState, depolarized, maximally_entangled,
                     maximally_mixed, ppt_family, random_biseparable)

DETECT_TOL = 1e-9
PPT_TOL = 1e-10
MAX_BISECT_ITER = 200
PREGRID_POINTS = 32


class NotDetectedError(ValueError):
    """Raised when a threshold is requested but the endpoint state is not detected."""


@dataclass(frozen=True)
class Verdict:
    min_eig: float
    eigvec: np.ndarray
    detected: bool
    map_id: str
    tolerance: float


@dataclass(frozen=True)
class ThresholdResult:
    p_star: float
    bracket: tuple[float, float]
    iterations: int
    residual: float
    warning: str = ""


@dataclass(frozen=True)
class ScanRow:
    param: float
    min_eig: float
    detected: bool


@dataclass(frozen=True)
class Violation:
    index: int
    seed: int | None
    min_eig: float
    label: str = ""


@dataclass(frozen=True)
class BisepReport:
    map_id: str
    samples: int
    mixtures: int
    seed: int
    tolerance: float
    min_over_samples: float
    worst_index: int
    worst_seed: int | None
    violations: tuple[Violation, ...]

    @property
    def passed(self) -> bool:
        return not self.violations


@dataclass(frozen=True)
class PptCut:
    parties: tuple[int, ...]
    min_eig: float


@dataclass(frozen=True)
class PptReport:
    cuts: tuple[PptCut, ...]
    all_ppt: bool
    tolerance: float


def detect(m: GmeMap, rho: MpOperator, tol: float = DETECT_TOL) -> Verdict:
    """Apply the map and flag the state when the output dips below -tol."""
    if rho.dims != m.dims:
        raise ValueError(f"state dims {rho.dims.dims} do not match map dims {m.dims.dims}")
    if not is_density(rho):
        raise ValueError("input is not a density matrix")
    val, vec = min_eig(apply(m.expr, rho))
    return Verdict(val, vec, val < -tol, m.label, tol)


def _bisect(f: Callable[[float], float], lo: float, hi: float, tol: float,
            flo: float, fhi: float) -> tuple[float, tuple[float, float], int, float]:
    iters = 0
    neg_lo = flo < 0
    while hi - lo > tol and iters < MAX_BISECT_ITER:
        mid = 0.5 * (lo + hi)
        fm = f(mid)
        iters += 1
        if fm == 0.0:
            lo = hi = mid
            break
        if (fm < 0) == neg_lo:
            lo = mid
        else:
            hi = mid
    p = 0.5 * (lo + hi)
    return p, (lo, hi), iters, abs(f(p))


def _crossing_warning(f: Callable[[float], float]) -> str:
    grid = np.linspace(0.0, 1.0, PREGRID_POINTS)
    signs = np.sign([f(p) for p in grid])
    signs = signs[signs != 0]
    changes = int(np.sum(signs[1:] != signs[:-1]))
    return "multiple crossings possible" if changes > 1 else ""


def noise_threshold(m: GmeMap, psi: PureState, tol: float = DETECT_TOL,
                    check_crossings: bool = True) -> ThresholdResult:
    """Critical visibility of p |psi><psi| + (1-p) I/D under the map.

    Bisects the minimal output eigenvalue as a function of p; the state is
    detected for p above the returned value.
    """
    if psi.dims != m.dims:
        raise ValueError(f"state dims {psi.dims.dims} do not match map dims {m.dims.dims}")

    def f(p: float) -> float:
        return min_eig(apply(m.expr, depolarized(psi, p)))[0]

    f0, f1 = f(0.0), f(1.0)
    if f1 >= 0:
        raise NotDetectedError("not detected at p=1")
    if f0 < 0:
        raise ValueError("already detected at p=0; no bracket")
    warning = _crossing_warning(f) if check_crossings else ""
    p, bracket, iters, resid = _bisect(f, 0.0, 1.0, tol, f0, f1)
    return ThresholdResult(p, bracket, iters, resid, warning)


def white_noise_threshold(m: GmeMap, rho0: MpOperator, tol: float = DETECT_TOL,
                          check_crossings: bool = True) -> ThresholdResult:
    """Largest white-noise fraction p with p I/D + (1-p) rho0 still detected."""
    if rho0.dims != m.dims:
        raise ValueError(f"state dims {rho0.dims.dims} do not match map dims {m.dims.dims}")
    mm = maximally_mixed(m.dims).mat

    def f(p: float) -> float:
        mixed = MpOperator(m.dims, p * mm + (1 - p) * rho0.mat)
        return min_eig(apply(m.expr, mixed))[0]

    f0, f1 = f(0.0), f(1.0)
    if f0 >= 0:
        raise NotDetectedError("not detected at p=0")
    if f1 < 0:
        raise ValueError("still detected at p=1; no bracket")
    warning = _crossing_warning(f) if check_crossings else ""
    p, bracket, iters, resid = _bisect(f, 0.0, 1.0, tol, f0, f1)
    return ThresholdResult(p, bracket, iters, resid, warning)


def _run_indexed(fn: Callable[[int], object], count: int, threads: int) -> list:
    if threads <= 1:
        return [fn(i) for i in range(count)]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, range(count)))


def lambda_scan(m: GmeMap, grid: Sequence[float], noise: float = 0.0,
                tol: float = DETECT_TOL, threads: int = 1) -> list[ScanRow]:
    """Detection scan of the 3-qutrit family, optionally with white noise."""
    mm = maximally_mixed(m.dims).mat

    def row(i: int) -> ScanRow:
        lam = float(grid[i])
        rho = ppt_family((lam, lam, lam))
        mat = noise * mm + (1 - noise) * rho.mat if noise else rho.mat
        val = min_eig(MpOperator(m.dims, _apply_mat(m, mat)))[0]
        return ScanRow(lam, val, val < -tol)

    return _run_indexed(row, len(grid), threads)


def _apply_mat(m: GmeMap, mat: np.ndarray) -> np.ndarray:
    return apply(m.expr, MpOperator(m.dims, mat)).mat


def adversarial_product(dims) -> MpOperator:
    """Maximally entangled pair on parties (0, 1) tensored with |0...0>.

    Biseparable across {0,1}|rest; the tight compensation makes lifted
    transposition-style criteria vanish on it exactly, so any undersized
    compensation is exposed.
    """
    d = dims.dims[0]
    pair = maximally_entangled(d).vec
    rest = np.prod(dims.dims[2:], dtype=int) if dims.n > 2 else 1
    block = np.zeros(rest, dtype=complex)
    block[0] = 1.0
    v = np.kron(pair, block)
    return MpOperator(dims, np.outer(v, v.conj()))


def verify_biseparable_positivity(m: GmeMap, samples: int, mixtures: int = 4,
                                  seed: int = 0, tol: float = DETECT_TOL,
                                  threads: int = 1,
                                  include_adversarial: bool = True) -> BisepReport:
    """Fuzz the defining property on seeded random biseparable states.

    Sample i uses seed + i and up to `mixtures` product terms.  A
    deterministic adversarial product state is evaluated as index -1.
    Violations below -tol are collected, never raised.
    """
    if samples < 1:
        raise ValueError("need samples >= 1")
    dims = m.dims

    def one(i: int) -> tuple[int, int, float]:
        s = seed + i
        k = 1 + (i % mixtures)
        rho = random_biseparable(dims, k, s)
        return i, s, min_eig(apply(m.expr, rho))[0]

    results = _run_indexed(one, samples, threads)
    if include_adversarial and dims.n >= 3 and len(set(dims.dims)) == 1:
        adv = adversarial_product(dims)
        results.append((-1, None, min_eig(apply(m.expr, adv))[0]))

    worst_index, worst_seed, worst = min(results, key=lambda t: t[2])
    violations = tuple(
        Violation(i, s, v, "adversarial" if i == -1 else "")
        for i, s, v in results if v < -tol
    )
    return BisepReport(m.label, samples, mixtures, seed, tol,
                       worst, worst_index, worst_seed, violations)


def ppt_check(rho: MpOperator, tol: float = PPT_TOL) -> PptReport:
    """Minimal eigenvalue of every bipartition's partial transpose."""
    if not is_density(rho):
        raise ValueError("input is not a density matrix")
    cuts = []
    for A in bipartitions(rho.dims.n):
        val = float(eigvalsh(partial_transpose(rho, A))[0])
        cuts.append(PptCut(A.members, val))
    all_ppt = all(c.min_eig >= -tol for c in cuts)
    return PptReport(tuple(cuts), all_ppt, tol)
