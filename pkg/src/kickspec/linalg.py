"""Dense complex eigensolvers for Hermitian and unitary matrices.

This is the only numerically iterative kernel in the package.  Everything
else builds matrices analytically and calls into here.  All functions are
pure: inputs are never mutated and results are deterministic, so values may
be shared freely across threads.

Solver choice: LAPACK via numpy (``eigh``/``eigvals``) and, when unitary
eigenvectors are requested, a complex Schur factorization (``zgees``), whose
orthonormal Schur basis doubles as an eigenbasis because unitary matrices
are normal.  The contracts below (residual, ordering, modulus bounds) are
what is normative, not the solver.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import InvalidParams, NoConvergence, NonHermitian, NonUnitary

__all__ = [
    "Tolerances",
    "DEFAULT_TOLS",
    "EigenDecomposition",
    "eig_hermitian",
    "eig_unitary",
    "expm_i_hermitian",
    "principal_args",
]


@dataclass(frozen=True)
class Tolerances:
    """Absolute default tolerances; override per call where needed.

    ``hermitian`` is relative to the max-abs entry of the matrix;
    ``eig_residual`` is relative to the spectral norm.  Band merging
    downstream depends on these staying fixed, so they are data, not
    hard-coded constants.
    """

    hermitian: float = 1e-12
    unitary: float = 1e-10
    eig_residual: float = 1e-10
    real_eigenvalue: float = 1e-12
    unit_modulus: float = 1e-10
    dedup: float = 1e-12


DEFAULT_TOLS = Tolerances()


@dataclass(frozen=True, eq=False)
class EigenDecomposition:
    """Eigenvalues (and optionally an orthonormal eigenbasis) of a normal matrix.

    Values are sorted ascending by real value for Hermitian input and by
    principal argument in (-pi, pi] for unitary input, ties broken by
    ascending imaginary part, so output order is deterministic.
    """

    values: np.ndarray
    vectors: np.ndarray | None = None


def principal_args(values: np.ndarray) -> np.ndarray:
    """Principal arguments in (-pi, pi]; an argument of exactly -pi wraps to +pi."""
    ang = np.angle(values)
    return np.where(ang <= -np.pi, ang + 2.0 * np.pi, ang)


def _matrix_hash(a: np.ndarray) -> str:
    return hashlib.sha256(np.ascontiguousarray(a).tobytes()).hexdigest()[:16]


def _check_square_finite(a: np.ndarray, what: str) -> np.ndarray:
    a = np.asarray(a, dtype=np.complex128)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise InvalidParams(f"{what}: expected a square matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a.view(np.float64))):
        raise InvalidParams(f"{what}: matrix contains non-finite entries")
    return a


def require_hermitian(a: np.ndarray, tol: float = DEFAULT_TOLS.hermitian) -> np.ndarray:
    """Validate ||A - A*||_max <= tol * ||A||_max and return A as complex128."""
    a = _check_square_finite(a, "require_hermitian")
    scale = np.abs(a).max() if a.size else 0.0
    dev = np.abs(a - a.conj().T).max() if a.size else 0.0
    if dev > tol * scale:
        raise NonHermitian(
            f"matrix is not Hermitian: ||A - A*||_max = {dev:.3e} "
            f"exceeds {tol:.1e} * ||A||_max = {tol * scale:.3e}"
        )
    return a


def require_unitary(a: np.ndarray, tol: float = DEFAULT_TOLS.unitary) -> np.ndarray:
    """Validate ||A A* - I||_max <= tol and return A as complex128."""
    a = _check_square_finite(a, "require_unitary")
    n = a.shape[0]
    dev = np.abs(a @ a.conj().T - np.eye(n)).max()
    if dev > tol:
        raise NonUnitary(f"matrix is not unitary: ||A A* - I||_max = {dev:.3e} > {tol:.1e}")
    return a


def eig_hermitian(
    a: np.ndarray, want_vectors: bool = False, tols: Tolerances = DEFAULT_TOLS
) -> EigenDecomposition:
    """Eigendecomposition of a Hermitian matrix, values ascending.

    Raises NonHermitian if the input violates the Hermitian tolerance and
    NoConvergence if the LAPACK iteration budget is exhausted.
    """
    a = require_hermitian(a, tols.hermitian)
    try:
        if want_vectors:
            w, v = np.linalg.eigh(a)
        else:
            w, v = np.linalg.eigvalsh(a), None
    except np.linalg.LinAlgError as exc:
        raise NoConvergence(
            f"Hermitian eigensolver did not converge (matrix sha256 {_matrix_hash(a)}, "
            f"LAPACK budget ~{30 * a.shape[0]} sweeps): {exc}"
        ) from exc
    return EigenDecomposition(values=w, vectors=v)


def eig_unitary(
    u: np.ndarray, want_vectors: bool = False, tols: Tolerances = DEFAULT_TOLS
) -> EigenDecomposition:
    """Eigendecomposition of a unitary matrix.

    Eigenvalues are renormalized to exact unit modulus and sorted by
    principal argument in (-pi, pi].  With ``want_vectors`` the returned
    basis comes from a complex Schur factorization and is orthonormal.
    """
    u = require_unitary(u, tols.unitary)
    n = u.shape[0]
    try:
        if want_vectors:
            t, z = scipy.linalg.schur(u, output="complex")
            values = np.diag(t).copy()
            vectors = z
            # For a normal matrix the Schur form is diagonal; the residual of
            # eigenpair i is the strictly upper part of column i of T.
            colsq = np.diag(np.cumsum(np.abs(t) ** 2, axis=0))
            resid = np.sqrt(np.maximum(colsq - np.abs(values) ** 2, 0.0))
            worst = float(resid.max()) if n else 0.0
            if worst > tols.eig_residual:
                raise NoConvergence(
                    f"unitary eigensolver residual {worst:.3e} exceeds {tols.eig_residual:.1e} "
                    f"(matrix sha256 {_matrix_hash(u)})"
                )
        else:
            values = np.linalg.eigvals(u)
            vectors = None
    except (np.linalg.LinAlgError, scipy.linalg.LinAlgError) as exc:
        raise NoConvergence(
            f"unitary eigensolver did not converge (matrix sha256 {_matrix_hash(u)}, "
            f"LAPACK budget ~{30 * n} sweeps): {exc}"
        ) from exc

    mods = np.abs(values)
    if n and np.abs(mods - 1.0).max() > tols.unit_modulus:
        raise NoConvergence(
            f"unitary eigenvalues deviate from the circle by {np.abs(mods - 1.0).max():.3e} "
            f"(matrix sha256 {_matrix_hash(u)})"
        )
    values = values / mods
    order = np.lexsort((values.imag, principal_args(values)))
    values = values[order]
    if vectors is not None:
        vectors = vectors[:, order]
    return EigenDecomposition(values=values, vectors=vectors)


def expm_i_hermitian(
    a: np.ndarray, s: float, tols: Tolerances = DEFAULT_TOLS
) -> np.ndarray:
    """exp(-i s A) for Hermitian A, via V exp(-i s L) V* from eig_hermitian."""
    if not np.isfinite(s):
        raise InvalidParams(f"expm_i_hermitian: scale must be finite, got {s}")
    dec = eig_hermitian(a, want_vectors=True, tols=tols)
    v = dec.vectors
    out = (v * np.exp(-1j * s * dec.values)[np.newaxis, :]) @ v.conj().T
    return require_unitary(out, tols.unitary)


# -- batched kernels (stacks of matrices, shape (m, q, q)) --------------------

def eigvalsh_stack(stack: np.ndarray) -> np.ndarray:
    """Eigenvalues of a stack of Hermitian matrices, each row ascending."""
    try:
        return np.linalg.eigvalsh(stack)
    except np.linalg.LinAlgError as exc:
        raise NoConvergence(f"batched Hermitian eigensolver failed: {exc}") from exc


def eigh_stack(stack: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    try:
        return np.linalg.eigh(stack)
    except np.linalg.LinAlgError as exc:
        raise NoConvergence(f"batched Hermitian eigensolver failed: {exc}") from exc


def unitary_eigvals_stack(stack: np.ndarray, tols: Tolerances = DEFAULT_TOLS) -> np.ndarray:
    """Eigenvalues of a stack of unitary matrices, renormalized to |z| = 1.

    Row order is the solver's; callers pool and re-sort, so no per-row
    ordering is imposed here.
    """
    try:
        values = np.linalg.eigvals(stack)
    except np.linalg.LinAlgError as exc:
        raise NoConvergence(f"batched unitary eigensolver failed: {exc}") from exc
    mods = np.abs(values)
    if values.size and np.abs(mods - 1.0).max() > tols.unit_modulus:
        worst = int(np.abs(mods - 1.0).max(axis=-1).argmax())
        raise NoConvergence(
            f"batched unitary eigenvalues off the circle by {np.abs(mods - 1.0).max():.3e} "
            f"(stack index {worst})"
        )
    return values / mods
