"""Analytic construction of the q x q operator matrices.

At rational frequency alpha = p/q every operator in the family acts, after
restriction to an irreducible representation labelled by a Bloch phase x,
as a q x q matrix built from three ingredients: the discrete Fourier matrix
F, the cyclic shift C and the clock matrix D = diag(1, w, ..., w^{q-1}) with
w = exp(i 2 pi / q).  The pair (C^p, D) satisfies the rotation commutation
relation C^p D = exp(i 2 pi p / q) D C^p, which is what makes the finite
reduction exact rather than a truncation.

Four operator kinds are covered:

* ``H``       self-adjoint Harper / almost Mathieu matrix,
* ``UH``      its unitary exponential exp(-i kappa H),
* ``UKH``     the kicked product of two exponentials,
* ``UORDKR``  the on-resonance double kicked rotor, diagonalized through
              the closed-form eigensystem of D C^p.

All builders are pure and cheap; phases are assembled from exact integer
arithmetic modulo q (or 2q) before a single complex exponential table
lookup, so large q does not lose accuracy to argument reduction.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from functools import lru_cache

import numpy as np

from .errors import InvalidDimension, InvalidParams, NotCoprime
from .linalg import DEFAULT_TOLS, Tolerances, expm_i_hermitian

__all__ = [
    "MOTHER",
    "OperatorKind",
    "RationalAlpha",
    "OperatorParams",
    "DcpEigensystem",
    "dft_matrix",
    "clock_shift",
    "cos_diag",
    "harper_hermitian",
    "unitary_harper",
    "kicked_harper",
    "dcp_eigensystem",
    "ordkr",
]

#: Sentinel for the theta scope that unions over the whole phase torus.
MOTHER = "mother"


class OperatorKind(str, Enum):
    H = "h"
    UH = "uh"
    UKH = "ukh"
    UORDKR = "uordkr"


@dataclass(frozen=True)
class RationalAlpha:
    """Reduced fraction p/q in [0, 1) representing the frequency alpha."""

    p: int
    q: int

    def __post_init__(self) -> None:
        if not isinstance(self.p, int) or not isinstance(self.q, int):
            raise InvalidParams(f"alpha components must be integers, got {self.p!r}/{self.q!r}")
        if self.q < 1:
            raise InvalidDimension(f"alpha denominator must be >= 1, got {self.q}")
        if not (0 <= self.p < self.q or (self.p, self.q) == (0, 1)):
            raise InvalidParams(f"alpha must lie in [0, 1): got {self.p}/{self.q}")
        if math.gcd(self.p, self.q) != 1:
            raise NotCoprime(f"{self.p}/{self.q} is not reduced (gcd = {math.gcd(self.p, self.q)})")

    @classmethod
    def parse(cls, text: str) -> "RationalAlpha":
        """Parse a 'p/q' literal; floating alpha is deliberately rejected."""
        parts = text.strip().split("/")
        if len(parts) != 2:
            raise InvalidParams(f"alpha must be given as p/q, got {text!r}")
        try:
            p, q = int(parts[0]), int(parts[1])
        except ValueError as exc:
            raise InvalidParams(f"alpha must be given as p/q with integers, got {text!r}") from exc
        return cls(p, q)

    @property
    def value(self) -> float:
        return self.p / self.q

    def __str__(self) -> str:
        return f"{self.p}/{self.q}"


@dataclass(frozen=True)
class OperatorParams:
    """Full specification of one operator family member.

    ``theta`` is either a phase in [0, 1) (reduced mod 1 on entry) or the
    MOTHER sentinel selecting the union over the phase torus.  For kind H
    the time scale kappa plays no role and is recorded as 0.
    """

    kind: OperatorKind
    kappa: float
    lam: float
    alpha: RationalAlpha
    theta: float | str = 0.0

    def __post_init__(self) -> None:
        kind = OperatorKind(self.kind)
        object.__setattr__(self, "kind", kind)
        kappa = 0.0 if kind is OperatorKind.H else float(self.kappa)
        lam = float(self.lam)
        if not (np.isfinite(kappa) and np.isfinite(lam)):
            raise InvalidParams(f"kappa and lambda must be finite, got {kappa}, {lam}")
        object.__setattr__(self, "kappa", kappa)
        object.__setattr__(self, "lam", lam)
        if not isinstance(self.alpha, RationalAlpha):
            raise InvalidParams("alpha must be a RationalAlpha")
        if isinstance(self.theta, str):
            if self.theta != MOTHER:
                raise InvalidParams(f"theta must be a real in [0, 1) or {MOTHER!r}, got {self.theta!r}")
        else:
            th = float(self.theta)
            if not np.isfinite(th):
                raise InvalidParams(f"theta must be finite, got {th}")
            object.__setattr__(self, "theta", th % 1.0)

    @property
    def is_mother(self) -> bool:
        return self.theta == MOTHER

    def fixed_theta(self) -> float:
        if self.is_mother:
            raise InvalidParams("operation requires a fixed theta, not the mother scope")
        return float(self.theta)


# -- primitive matrices -------------------------------------------------------

def _check_dim(q: int) -> int:
    if not isinstance(q, (int, np.integer)) or q < 1:
        raise InvalidDimension(f"matrix dimension must be an integer >= 1, got {q!r}")
    return int(q)


@lru_cache(maxsize=None)
def _roots(q: int) -> np.ndarray:
    """q-th roots of unity exp(i 2 pi k / q), k = 0..q-1; read-only."""
    r = np.exp(2j * np.pi * np.arange(q) / q)
    r.setflags(write=False)
    return r


@lru_cache(maxsize=None)
def _half_roots(q: int) -> np.ndarray:
    """2q-th roots exp(i pi k / q), k = 0..2q-1; read-only."""
    r = np.exp(1j * np.pi * np.arange(2 * q) / q)
    r.setflags(write=False)
    return r


@lru_cache(maxsize=None)
def _dft_cached(q: int) -> np.ndarray:
    j = np.arange(q)
    f = _roots(q)[np.outer(j, j) % q] / np.sqrt(q)
    f.setflags(write=False)
    return f


def dft_matrix(q: int) -> np.ndarray:
    """Discrete Fourier matrix F[j, k] = w^{jk} / sqrt(q), unitary and symmetric."""
    return _dft_cached(_check_dim(q)).copy()


def clock_shift(q: int) -> tuple[np.ndarray, np.ndarray]:
    """The cyclic shift C (ones at [j, (j+1) mod q]) and clock D = diag(w^j).

    Satisfies C F = F D, hence C = F D F^{-1}, and the commutation relation
    C^p D = exp(i 2 pi p / q) D C^p for every power p.
    """
    q = _check_dim(q)
    c = np.zeros((q, q), dtype=np.complex128)
    idx = np.arange(q)
    c[idx, (idx + 1) % q] = 1.0
    d = np.diag(_roots(q)).astype(np.complex128)
    return c, d


def cos_diag(k: int, y: float, q: int) -> np.ndarray:
    """Diagonal matrix diag(cos 2 pi (y + k j / q)) for j = 0..q-1."""
    q = _check_dim(q)
    return np.diag(cos_row(k, y, q)).astype(np.complex128)


def cos_row(k: int, y: float, q: int) -> np.ndarray:
    """Diagonal of cos_diag as a real vector; k j is reduced mod q exactly."""
    j = (int(k) * np.arange(q, dtype=np.int64)) % q
    return np.cos(2.0 * np.pi * (float(y) + j / q))


def cos_rows(k: int, ys: np.ndarray, q: int) -> np.ndarray:
    """Stack of cos_row values, shape (len(ys), q)."""
    j = (int(k) * np.arange(q, dtype=np.int64)) % q
    return np.cos(2.0 * np.pi * (np.asarray(ys, dtype=np.float64)[:, None] + j / q))


# -- operator matrix builders -------------------------------------------------

def _require_kind(params: OperatorParams, kind: OperatorKind) -> None:
    if params.kind is not kind:
        raise InvalidParams(f"expected params.kind = {kind.value!r}, got {params.kind.value!r}")


def harper_hermitian(params: OperatorParams, x: float) -> np.ndarray:
    """Harper matrix 2 G(1, x) + 2 lambda F G(p, theta) F^{-1} (Hermitian)."""
    _require_kind(params, OperatorKind.H)
    theta = params.fixed_theta()
    p, q = params.alpha.p, params.alpha.q
    f = _dft_cached(q)
    circ = (f * cos_row(p, theta, q)[None, :]) @ f.conj().T
    h = 2.0 * params.lam * circ
    d = np.einsum("ii->i", h)
    d += 2.0 * cos_row(1, float(x) % 1.0, q)
    return h


def unitary_harper(params: OperatorParams, x: float, tols: Tolerances = DEFAULT_TOLS) -> np.ndarray:
    """exp(-i 2 kappa (G(1,x) + lambda F G(p,theta) F^{-1})) = exp(-i kappa H)."""
    _require_kind(params, OperatorKind.UH)
    hp = OperatorParams(OperatorKind.H, 0.0, params.lam, params.alpha, params.theta)
    return expm_i_hermitian(harper_hermitian(hp, x), params.kappa, tols=tols)


def kicked_harper(params: OperatorParams, x: float) -> np.ndarray:
    """Kicked product exp(-i 2 kappa G(1,x)) F exp(-i 2 kappa lambda G(p,theta)) F^{-1}.

    Both exponentials are diagonal, so this is assembled analytically with
    no iterative solver.
    """
    _require_kind(params, OperatorKind.UKH)
    theta = params.fixed_theta()
    p, q = params.alpha.p, params.alpha.q
    f = _dft_cached(q)
    e1 = np.exp(-2j * params.kappa * cos_row(1, float(x) % 1.0, q))
    e2 = np.exp(-2j * params.kappa * params.lam * cos_row(p, theta, q))
    return (e1[:, None] * f * e2[None, :]) @ f.conj().T


@dataclass(frozen=True, eq=False)
class DcpEigensystem:
    """Closed-form eigensystem of D C^p.

    ``values[k]`` = mu * w^k (k = 0..q-1) with mu = exp(i 2 pi phi), where
    phi = 0 when p(q-1) is even and 1/(2q) when odd.  ``vectors`` is the
    unitary matrix E of normalized eigenvectors, columns ordered to match
    ``values``, built from the index recursion u_{jp+1} = w^{-p j(j-1)/2}
    nu^j u_1 with indices taken mod q and u_1 = 1/sqrt(q).
    """

    values: np.ndarray
    vectors: np.ndarray
    phi: float


@lru_cache(maxsize=None)
def _dcp_cached(p: int, q: int) -> DcpEigensystem:
    odd = (p * (q - 1)) % 2
    phi = 0.0 if odd == 0 else 1.0 / (2 * q)
    roots = _half_roots(q)
    k = np.arange(q, dtype=np.int64)
    values = roots[(2 * k + odd) % (2 * q)].copy()

    # Entry phase in units of pi/q: nu_k^j * w^{-p j(j-1)/2} at row (j p) mod q.
    j = k[:, None]
    t = (j * (2 * k[None, :] + odd) - p * j * (j - 1)) % (2 * q)
    rows = (p * k) % q
    e = np.zeros((q, q), dtype=np.complex128)
    e[rows, :] = roots[t] / np.sqrt(q)

    values.setflags(write=False)
    e.setflags(write=False)
    return DcpEigensystem(values=values, vectors=e, phi=phi)


def dcp_eigensystem(alpha: RationalAlpha) -> DcpEigensystem:
    """Eigenvalues, eigenvectors and phase offset phi of D C^p for alpha = p/q.

    Results are memoized per (p, q); the returned arrays are read-only.
    """
    if not isinstance(alpha, RationalAlpha):
        raise InvalidParams("dcp_eigensystem expects a RationalAlpha")
    return _dcp_cached(alpha.p, alpha.q)


def ordkr_beta(params: OperatorParams, x: float, theta: float) -> float:
    """Combined phase beta = x + theta + alpha/2 + phi entering the second kick."""
    alpha = params.alpha
    phi = dcp_eigensystem(alpha).phi
    return float(x) + float(theta) + alpha.value / 2.0 + phi


def ordkr(params: OperatorParams, x: float) -> np.ndarray:
    """On-resonance double kicked rotor matrix.

    exp(-i 2 kappa G(1,x)) E diag(exp(-i 2 kappa lambda cos 2 pi (beta + j/q))) E^{-1}
    with beta = x + theta + alpha/2 + phi and (E, phi) the D C^p eigensystem.
    """
    _require_kind(params, OperatorKind.UORDKR)
    theta = params.fixed_theta()
    q = params.alpha.q
    x = float(x) % 1.0
    dcp = dcp_eigensystem(params.alpha)
    beta = ordkr_beta(params, x, theta)
    e1 = np.exp(-2j * params.kappa * cos_row(1, x, q))
    e2 = np.exp(-2j * params.kappa * params.lam * cos_row(1, beta, q))
    ev = dcp.vectors
    return (e1[:, None] * ev * e2[None, :]) @ ev.conj().T


def operator_matrix(params: OperatorParams, x: float, tols: Tolerances = DEFAULT_TOLS) -> np.ndarray:
    """Dispatch to the matrix builder for params.kind at Bloch phase x."""
    if params.kind is OperatorKind.H:
        return harper_hermitian(params, x)
    if params.kind is OperatorKind.UH:
        return unitary_harper(params, x, tols=tols)
    if params.kind is OperatorKind.UKH:
        return kicked_harper(params, x)
    return ordkr(params, x)
