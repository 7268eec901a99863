"""Grid sweeps over Bloch phases, certified error bounds, and band merging.

The spectrum of each operator at alpha = p/q is the union of the q
eigenvalues of its matrix over x in [0, 1/q) (fixed theta) or over
(x, theta) in [0, 1/q)^2 (mother scope).  Sampling that union on a uniform
grid anchored at 0 gives an estimate whose Hausdorff distance to the true
spectrum is bounded by an explicit Lipschitz constant divided by N q; the
bound is stored on the result so downstream merging and comparisons can be
certified.

Grid points are independent, and the sweep evaluates them as one batched
eigensolver call per chunk; results are pooled, sorted and deduplicated, so
the outcome is a deterministic function of (params, grid) regardless of
evaluation order.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import EmptySpectrum, InvalidParams, NumericalError, WrongKind
from .linalg import (
    DEFAULT_TOLS,
    Tolerances,
    eigh_stack,
    eigvalsh_stack,
    principal_args,
    unitary_eigvals_stack,
)
from .operators import (
    MOTHER,
    OperatorKind,
    OperatorParams,
    _dft_cached,
    cos_rows,
    dcp_eigensystem,
)

__all__ = [
    "SpectrumKind",
    "GridSpec",
    "SpectrumSet",
    "BandList",
    "grid_error_bound",
    "spectrum_fixed_theta",
    "mother_spectrum",
    "eigenphases",
    "merge_bands",
    "merge_band_list",
    "tracked_bands",
    "auto_merge_gap",
]

TWO_PI = 2.0 * np.pi

# Rows per eigensolver batch are capped so a chunk stays around 64 MB.
_CHUNK_COMPLEX = 4_000_000


class SpectrumKind(str, Enum):
    REAL_LINE = "real_line"
    UNIT_CIRCLE = "unit_circle"


@dataclass(frozen=True)
class GridSpec:
    """Uniform sampling grid: x_j = j/(n_x q), theta_k = k/(n_theta q).

    Both axes are anchored at 0 and span [0, 1/q); n_theta is ignored for
    fixed-theta sweeps.
    """

    n_x: int
    n_theta: int = 1

    def __post_init__(self) -> None:
        if not (isinstance(self.n_x, int) and self.n_x >= 1):
            raise InvalidParams(f"n_x must be an integer >= 1, got {self.n_x!r}")
        if not (isinstance(self.n_theta, int) and self.n_theta >= 1):
            raise InvalidParams(f"n_theta must be an integer >= 1, got {self.n_theta!r}")

    def xs(self, q: int) -> np.ndarray:
        return np.arange(self.n_x, dtype=np.float64) / (self.n_x * q)

    def thetas(self, q: int) -> np.ndarray:
        return np.arange(self.n_theta, dtype=np.float64) / (self.n_theta * q)


@dataclass(frozen=True, eq=False)
class SpectrumSet:
    """Finite sample of a spectrum with provenance and a certified bound.

    ``points`` is sorted and deduplicated: ascending reals on the line,
    unit-modulus complex values sorted by principal argument on the circle.
    ``error_bound`` is a certified Hausdorff distance to the true spectrum
    (0 for synthetic sets).
    """

    kind: SpectrumKind
    points: np.ndarray
    params: OperatorParams | None = None
    grid: GridSpec | None = None
    error_bound: float = 0.0

    @classmethod
    def build(
        cls,
        kind: SpectrumKind,
        values,
        params: OperatorParams | None = None,
        grid: GridSpec | None = None,
        error_bound: float = 0.0,
        tols: Tolerances = DEFAULT_TOLS,
    ) -> "SpectrumSet":
        kind = SpectrumKind(kind)
        if error_bound < 0:
            raise InvalidParams(f"error_bound must be >= 0, got {error_bound}")
        if kind is SpectrumKind.REAL_LINE:
            pts = np.sort(np.asarray(values, dtype=np.float64).ravel())
            if pts.size and not np.all(np.isfinite(pts)):
                raise InvalidParams("spectrum points must be finite")
            if pts.size:
                keep = np.concatenate(([True], np.diff(pts) > tols.dedup))
                pts = pts[keep]
        else:
            pts = np.asarray(values, dtype=np.complex128).ravel()
            if pts.size and not np.all(np.isfinite(pts.view(np.float64))):
                raise InvalidParams("spectrum points must be finite")
            if pts.size and np.abs(np.abs(pts) - 1.0).max() > tols.unit_modulus:
                raise InvalidParams("unit-circle spectrum points must have modulus 1")
            order = np.lexsort((pts.imag, principal_args(pts)))
            pts = pts[order]
            if pts.size > 1:
                keep = np.concatenate(([True], np.abs(np.diff(pts)) > tols.dedup))
                pts = pts[keep]
                if pts.size > 1 and abs(pts[0] - pts[-1]) <= tols.dedup:
                    pts = pts[:-1]
        pts.setflags(write=False)
        return cls(kind=kind, points=pts, params=params, grid=grid, error_bound=float(error_bound))

    def __len__(self) -> int:
        return int(self.points.size)


@dataclass(frozen=True)
class BandList:
    """Disjoint closed intervals (line) or arcs (circle, eigenphase coords).

    A circle band (lo, hi) with hi < lo wraps through +pi; the full circle
    is the single band (-pi, pi) of length 2 pi.  Bands are sorted by lo.
    """

    kind: SpectrumKind
    bands: tuple[tuple[float, float], ...]
    merge_gap: float

    def lengths(self) -> np.ndarray:
        if self.kind is SpectrumKind.REAL_LINE:
            return np.array([hi - lo for lo, hi in self.bands])
        return np.array([(hi - lo) % TWO_PI if (lo, hi) != (-np.pi, np.pi) else TWO_PI
                         for lo, hi in self.bands])

    def __len__(self) -> int:
        return len(self.bands)


# -- certified bounds ---------------------------------------------------------

def grid_error_bound(params: OperatorParams, grid: GridSpec) -> float:
    """Certified Hausdorff distance between the sampled and the true spectrum.

    Derived from the operator-norm Lipschitz constants of the matrix in x
    and theta (2 pi per unit phase per cosine factor), the spectral
    continuity of normal matrices, and the 1/q periodicity of the spectrum
    along each axis, which keeps every true phase within half a grid step
    of a sample.  For the double kicked rotor the theta axis is matched
    through the sheared phase beta = x + theta + alpha/2 + phi, so x and
    theta contribute independently in the mother scope while a fixed-theta
    sweep pays for x entering both kicks.
    """
    q = params.alpha.q
    kap, lam = abs(params.kappa), abs(params.lam)
    kind = params.kind
    if kind is OperatorKind.H:
        per_x = TWO_PI / (q * grid.n_x)
        per_t = TWO_PI * lam / (q * grid.n_theta)
    elif kind in (OperatorKind.UH, OperatorKind.UKH):
        per_x = TWO_PI * kap / (q * grid.n_x)
        per_t = TWO_PI * kap * lam / (q * grid.n_theta)
    else:
        if params.is_mother:
            per_x = TWO_PI * kap / (q * grid.n_x)
        else:
            per_x = TWO_PI * kap * (1.0 + lam) / (q * grid.n_x)
        per_t = TWO_PI * kap * lam / (q * grid.n_theta)
    return per_x + (per_t if params.is_mother else 0.0)


# -- the sweep kernel ---------------------------------------------------------

def _sweep_values(
    params: OperatorParams, xv: np.ndarray, tv: np.ndarray, tols: Tolerances
) -> np.ndarray:
    """Pooled eigenvalues of the operator matrices at grid pairs (xv, tv)."""
    p, q = params.alpha.p, params.alpha.q
    kind = params.kind
    kap, lam = params.kappa, params.lam
    f = _dft_cached(q)
    fh = f.conj().T

    # The theta-dependent factor repeats across the grid; build it once per
    # distinct theta.
    t_unique, t_inv = np.unique(tv, return_inverse=True)
    if kind in (OperatorKind.H, OperatorKind.UH):
        circ_u = (f[None, :, :] * cos_rows(p, t_unique, q)[:, None, :]) @ fh
    elif kind is OperatorKind.UKH:
        e2u = np.exp(-2j * kap * lam * cos_rows(p, t_unique, q))
        kick_u = (f[None, :, :] * e2u[:, None, :]) @ fh
    else:
        dcp = dcp_eigensystem(params.alpha)
        ev, evh = dcp.vectors, dcp.vectors.conj().T
        beta = xv + tv + params.alpha.value / 2.0 + dcp.phi

    m = xv.size
    idx = np.arange(q)
    chunk = max(1, _CHUNK_COMPLEX // (q * q))
    out = np.empty((m, q), dtype=np.float64 if kind is OperatorKind.H else np.complex128)

    for lo in range(0, m, chunk):
        hi = min(lo + chunk, m)
        sl = slice(lo, hi)
        if kind in (OperatorKind.H, OperatorKind.UH):
            stack = (2.0 * lam) * circ_u[t_inv[sl]]
            stack[:, idx, idx] += 2.0 * cos_rows(1, xv[sl], q)
            if kind is OperatorKind.H:
                out[sl] = eigvalsh_stack(stack)
                continue
            w, vec = eigh_stack(stack)
            stack = (vec * np.exp(-1j * kap * w)[:, None, :]) @ vec.conj().swapaxes(-1, -2)
        elif kind is OperatorKind.UKH:
            e1 = np.exp(-2j * kap * cos_rows(1, xv[sl], q))
            stack = e1[:, :, None] * kick_u[t_inv[sl]]
        else:
            e1 = np.exp(-2j * kap * cos_rows(1, xv[sl], q))
            e2 = np.exp(-2j * kap * lam * cos_rows(1, beta[sl], q))
            stack = (e1[:, :, None] * ev[None, :, :] * e2[:, None, :]) @ evh
        out[sl] = unitary_eigvals_stack(stack, tols=tols)
    return out.ravel()


def _sweep(params: OperatorParams, xv, tv, grid, tols) -> SpectrumSet:
    try:
        values = _sweep_values(params, xv, tv, tols)
    except NumericalError as exc:
        # Re-run point by point to name the offending grid node.
        for x, t in zip(xv, tv):
            try:
                _sweep_values(params, np.array([x]), np.array([t]), tols)
            except NumericalError:
                raise NumericalError(
                    f"eigensolver failed at grid point x={x!r}, theta={t!r}: {exc}"
                ) from exc
        raise
    kind = SpectrumKind.REAL_LINE if params.kind is OperatorKind.H else SpectrumKind.UNIT_CIRCLE
    return SpectrumSet.build(
        kind,
        values,
        params=params,
        grid=grid,
        error_bound=grid_error_bound(params, grid),
        tols=tols,
    )


def _grid_pairs(params: OperatorParams, grid: GridSpec) -> tuple[np.ndarray, np.ndarray]:
    q = params.alpha.q
    if params.is_mother:
        xs, ts = grid.xs(q), grid.thetas(q)
        return np.repeat(xs, ts.size), np.tile(ts, xs.size)
    xs = grid.xs(q)
    return xs, np.full(xs.size, params.fixed_theta(), dtype=np.float64)


def spectrum_fixed_theta(
    params: OperatorParams, grid: GridSpec, tols: Tolerances = DEFAULT_TOLS
) -> SpectrumSet:
    """Union of eigenvalues over the x grid at the fixed theta in params."""
    params.fixed_theta()
    xv, tv = _grid_pairs(params, grid)
    return _sweep(params, xv, tv, grid, tols)


def mother_spectrum(
    params: OperatorParams, grid: GridSpec, tols: Tolerances = DEFAULT_TOLS
) -> SpectrumSet:
    """Union of eigenvalues over the (x, theta) grid on [0, 1/q)^2."""
    if not params.is_mother:
        raise InvalidParams(f"mother_spectrum requires theta = {MOTHER!r}")
    xv, tv = _grid_pairs(params, grid)
    return _sweep(params, xv, tv, grid, tols)


# -- eigenphases and bands ----------------------------------------------------

def tracked_bands(
    params: OperatorParams, grid: GridSpec, tols: Tolerances = DEFAULT_TOLS
) -> BandList:
    """Band intervals from per-grid-point sorted eigenvalues.

    The j-th sorted eigenvalue over the grid traces the j-th spectral band,
    so its sampled range estimates that band's edges; interior extrema of a
    smooth branch are resolved to second order in the grid step, which makes
    this far sharper at coarse grids than merging the pooled point cloud.
    Overlapping ranges are unioned.  Circle spectra are first rotated so the
    largest pooled gap straddles the seam, keeping every tracked position on
    one side of it; the q disjoint-arc structure at rational alpha is what
    makes position tracking legitimate.
    """
    xv, tv = _grid_pairs(params, grid)
    q = params.alpha.q
    values = _sweep_values(params, xv, tv, tols).reshape(-1, q)

    if params.kind is OperatorKind.H:
        lo, hi = values.min(axis=0), values.max(axis=0)
        bands = _union_intervals(lo, hi)
        return BandList(SpectrumKind.REAL_LINE, bands, merge_gap=0.0)

    ph = np.sort(principal_args(values), axis=1)
    pooled = np.sort(ph.ravel())
    gaps = np.diff(pooled)
    wrap_gap = pooled[0] + TWO_PI - pooled[-1]
    delta = 0.0
    if gaps.size and gaps.max() > wrap_gap:
        i = int(gaps.argmax())
        delta = np.pi - (pooled[i] + gaps[i] / 2.0)
        ph = np.sort((ph + delta + np.pi) % TWO_PI - np.pi, axis=1)
    lo, hi = ph.min(axis=0), ph.max(axis=0)
    merged = _union_intervals(lo, hi)
    if len(merged) == 1 and merged[0][1] - merged[0][0] >= TWO_PI - 1e-12:
        return BandList(SpectrumKind.UNIT_CIRCLE, ((-np.pi, np.pi),), merge_gap=0.0)

    def unrotate(t: float) -> float:
        w = (t - delta + np.pi) % TWO_PI - np.pi
        return np.pi if w == -np.pi else float(w)

    bands = tuple(sorted((unrotate(a), unrotate(b)) for a, b in merged))
    return BandList(SpectrumKind.UNIT_CIRCLE, bands, merge_gap=0.0)


def _union_intervals(
    lo: np.ndarray, hi: np.ndarray, closure: float = 1e-12
) -> tuple[tuple[float, float], ...]:
    # closure absorbs roundoff where true bands touch (even-q Harper).
    order = np.argsort(lo)
    lo, hi = lo[order], hi[order]
    out = [[float(lo[0]), float(hi[0])]]
    for a, b in zip(lo[1:], hi[1:]):
        if a <= out[-1][1] + closure:
            out[-1][1] = max(out[-1][1], float(b))
        else:
            out.append([float(a), float(b)])
    return tuple((a, b) for a, b in out)


def eigenphases(s: SpectrumSet) -> np.ndarray:
    """Principal arguments in (-pi, pi] of a unit-circle spectrum, ascending."""
    if s.kind is not SpectrumKind.UNIT_CIRCLE:
        raise WrongKind("eigenphases requires a UNIT_CIRCLE spectrum")
    return principal_args(s.points)


def auto_merge_gap(s: SpectrumSet, factor: float = 4.0) -> float:
    """Default merge gap: 4x the certified bound (adjacent true points can
    each be displaced by error_bound; the extra factor 2 avoids spurious
    splits).  Falls back to the dedup scale when the bound is zero."""
    return max(factor * s.error_bound, 1e-12)


def merge_bands(s: SpectrumSet, merge_gap: float) -> BandList:
    """Merge consecutive points with gap <= merge_gap into closed bands.

    Circle spectra merge circularly in eigenphase distance; if every gap
    closes, the result is the single full-circle band of length 2 pi.
    Band endpoints are extreme member points.
    """
    if merge_gap <= 0:
        raise InvalidParams(f"merge_gap must be > 0, got {merge_gap}")
    if len(s) == 0:
        raise EmptySpectrum("cannot merge an empty spectrum")

    if s.kind is SpectrumKind.REAL_LINE:
        v = s.points
        cut = np.flatnonzero(np.diff(v) > merge_gap)
        starts = np.concatenate(([0], cut + 1))
        ends = np.concatenate((cut, [v.size - 1]))
        bands = tuple((float(v[a]), float(v[b])) for a, b in zip(starts, ends))
        return BandList(kind=s.kind, bands=bands, merge_gap=float(merge_gap))

    ph = eigenphases(s)
    m = ph.size
    gaps = np.concatenate((np.diff(ph), [ph[0] + TWO_PI - ph[-1]]))
    breaks = np.flatnonzero(gaps > merge_gap)
    if breaks.size == 0:
        return BandList(kind=s.kind, bands=((-np.pi, np.pi),), merge_gap=float(merge_gap))
    bands = []
    for i, b in enumerate(breaks):
        start = (breaks[i - 1] + 1) % m
        bands.append((float(ph[start]), float(ph[b])))
    bands.sort(key=lambda band: band[0])
    return BandList(kind=s.kind, bands=tuple(bands), merge_gap=float(merge_gap))


def merge_band_list(b: BandList, merge_gap: float) -> BandList:
    """Merge adjacent bands of an existing BandList with gap <= merge_gap.

    merge_bands is idempotent at this level: re-merging its output with the
    same gap returns it unchanged, because all surviving gaps exceed it.
    """
    if merge_gap <= 0:
        raise InvalidParams(f"merge_gap must be > 0, got {merge_gap}")
    if not b.bands:
        raise EmptySpectrum("cannot merge an empty band list")
    if b.kind is SpectrumKind.REAL_LINE:
        merged = [list(b.bands[0])]
        for lo, hi in b.bands[1:]:
            if lo - merged[-1][1] <= merge_gap:
                merged[-1][1] = max(merged[-1][1], hi)
            else:
                merged.append([lo, hi])
        return BandList(b.kind, tuple((lo, hi) for lo, hi in merged), float(merge_gap))

    if b.bands == ((-np.pi, np.pi),):
        return BandList(b.kind, b.bands, float(merge_gap))
    # Same circular run logic as merge_bands, with whole bands as the units.
    # Endpoints are copied, not recomputed, so re-merging is exactly stable.
    arcs = sorted(b.bands)
    m = len(arcs)
    gaps = [(arcs[(i + 1) % m][0] - arcs[i][1]) % TWO_PI for i in range(m)]
    breaks = [i for i, g in enumerate(gaps) if g > merge_gap]
    if not breaks:
        return BandList(b.kind, ((-np.pi, np.pi),), float(merge_gap))
    merged = []
    for j, brk in enumerate(breaks):
        start = (breaks[j - 1] + 1) % m
        merged.append((arcs[start][0], arcs[brk][1]))
    return BandList(b.kind, tuple(sorted(merged)), float(merge_gap))
