"""Finite-dimensional indefinite inner-product spaces.

A space is defined by a nonsingular Hermitian Gram matrix G; the product is
(u, v) = u^H G v.  The canonical fundamental symmetry is the matrix sign
function of G, and pairing with it turns the indefinite product into a
positive-definite one.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Tuple

import numpy as np

__all__ = [
    "KreinSpace",
    "FundamentalSymmetry",
    "NotHermitianError",
    "SingularGramError",
    "InvalidSymmetryError",
    "make_krein",
    "fundamental_symmetry",
    "validate_symmetry",
    "krein_adjoint",
    "wick_rotate",
    "is_krein_selfadjoint",
]

HERMITIAN_TOL = 1e-12
SINGULAR_TOL = 1e-10
DEFAULT_TOL = 1e-10


class NotHermitianError(ValueError):
    """The candidate Gram matrix is not Hermitian."""


class SingularGramError(ValueError):
    """The candidate Gram matrix is (numerically) degenerate.

    Degenerate products are rejected here on purpose; the Galilean
    zero-norm-subspace phenomenon is handled by its own report in
    :mod:`opalg.galilei`.
    """


class InvalidSymmetryError(ValueError):
    """A candidate fundamental symmetry violates one of its invariants."""


@dataclass(frozen=True)
class KreinSpace:
    dim: int
    gram: np.ndarray
    signature: Tuple[int, int]

    def inner(self, u: np.ndarray, v: np.ndarray) -> complex:
        return complex(np.conj(u) @ self.gram @ v)


@dataclass(frozen=True)
class FundamentalSymmetry:
    matrix: np.ndarray


def make_krein(gram) -> KreinSpace:
    """Validate a Gram matrix and compute its signature."""
    G = np.asarray(gram, dtype=complex)
    if G.ndim != 2 or G.shape[0] != G.shape[1]:
        raise ValueError(f"Gram matrix must be square, got shape {G.shape}")
    if np.max(np.abs(G - G.conj().T)) > HERMITIAN_TOL:
        raise NotHermitianError("Gram matrix is not Hermitian")
    svals = np.linalg.svd(G, compute_uv=False)
    if svals[-1] <= SINGULAR_TOL:
        raise SingularGramError(
            f"smallest singular value {svals[-1]:.3e} below {SINGULAR_TOL:.0e}")
    eigs = np.linalg.eigvalsh(G)
    p = int(np.sum(eigs > 0))
    q = int(np.sum(eigs < 0))
    G = G.copy()
    G.setflags(write=False)
    return KreinSpace(dim=G.shape[0], gram=G, signature=(p, q))


def fundamental_symmetry(K: KreinSpace) -> FundamentalSymmetry:
    """Canonical symmetry: the matrix sign function of the Gram matrix."""
    eigs, U = np.linalg.eigh(K.gram)
    J = U @ np.diag(np.sign(eigs)) @ U.conj().T
    J.setflags(write=False)
    return FundamentalSymmetry(matrix=J)


def validate_symmetry(K: KreinSpace, matrix, tol: float = DEFAULT_TOL) -> FundamentalSymmetry:
    """Check J^2 = 1, symmetry of the pairing, and positivity of G J."""
    J = np.asarray(matrix, dtype=complex)
    n = K.dim
    if J.shape != (n, n):
        raise ValueError(f"expected a {n}x{n} matrix, got {J.shape}")
    if np.max(np.abs(J @ J - np.eye(n))) > tol:
        raise InvalidSymmetryError("J^2 != 1")
    GJ = K.gram @ J
    if np.max(np.abs(GJ - J.conj().T @ K.gram)) > tol:
        raise InvalidSymmetryError("(u, Jv) != (Ju, v)")
    if np.min(np.linalg.eigvalsh((GJ + GJ.conj().T) / 2)) <= 0:
        raise InvalidSymmetryError("G J is not positive definite")
    J = J.copy()
    J.setflags(write=False)
    return FundamentalSymmetry(matrix=J)


def krein_adjoint(K: KreinSpace, A) -> np.ndarray:
    """Adjoint with respect to the indefinite product: G^{-1} A^H G."""
    A = np.asarray(A, dtype=complex)
    if A.shape != (K.dim, K.dim):
        raise ValueError(f"expected a {K.dim}x{K.dim} matrix, got {A.shape}")
    return np.linalg.solve(K.gram, A.conj().T @ K.gram)


def wick_rotate(K: KreinSpace, J: FundamentalSymmetry) -> np.ndarray:
    """Positive-definite Gram matrix of the rotated product <u, v> = (u, Jv)."""
    return K.gram @ J.matrix


def is_krein_selfadjoint(K: KreinSpace, A, tol: float = DEFAULT_TOL) -> bool:
    A = np.asarray(A, dtype=complex)
    return bool(np.max(np.abs(A - krein_adjoint(K, A))) <= tol)
