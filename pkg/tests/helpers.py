"""Shared test utilities: random operators and a superoperator oracle."""

import numpy as np

from gme_maps.maps import MapExpr, apply_stack
from gme_maps.operators import MpOperator, SiteDims


def rand_hermitian(D, rng):
    m = rng.standard_normal((D, D)) + 1j * rng.standard_normal((D, D))
    return (m + m.conj().T) / 2


def rand_density(D, rng):
    m = rng.standard_normal((D, D)) + 1j * rng.standard_normal((D, D))
    rho = m @ m.conj().T
    return rho / np.trace(rho).real


def hermitian_op(dims, rng):
    sd = SiteDims(tuple(dims))
    return MpOperator(sd, rand_hermitian(sd.total, rng))


def density_op(dims, rng):
    sd = SiteDims(tuple(dims))
    return MpOperator(sd, rand_density(sd.total, rng))


def superoperator(m: MapExpr) -> np.ndarray:
    """D^2 x D^2 matrix of the map in the row-major vec convention.

    With vec(rho) the row-major flattening, S @ vec(rho) = vec(m[rho]) and
    the Hilbert-Schmidt adjoint of the map is S^dagger.
    """
    D = m.dim
    basis = np.eye(D * D, dtype=complex).reshape(D * D, D, D)
    out = apply_stack(m, basis)
    return out.reshape(D * D, D * D).T
