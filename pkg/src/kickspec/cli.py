"""Command-line front end.

``spectra <compute|bandwidth|butterfly|zoom|verify|cache> [flags]``

Computes and persists spectra, band statistics, butterflies, zooms and
verification reports.  Outputs are deterministic: identical configurations
produce byte-identical CSV/SVG files.  Data goes to files or standard
output only; diagnostics go to the error stream.  Exit codes: 0 success,
2 usage error, 3 numerical failure, 4 I/O failure.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
import tempfile

import numpy as np

from . import __version__
from .analysis import (
    CHECK_IDS,
    farey_rationals,
    golden_convergents,
    run_check,
    total_bandwidth,
    zoom_windows,
    butterfly as butterfly_dataset,
)
from .errors import (
    EmptySpectrum,
    InvalidParams,
    KindMismatch,
    NumericalError,
    UsageError,
)
from .linalg import DEFAULT_TOLS, Tolerances, principal_args
from .operators import MOTHER, OperatorKind, OperatorParams, RationalAlpha
from .spectra import (
    GridSpec,
    SpectrumKind,
    SpectrumSet,
    auto_merge_gap,
    eigenphases,
    grid_error_bound,
    merge_bands,
    mother_spectrum,
    spectrum_fixed_theta,
    tracked_bands,
)

__all__ = [
    "dispatch",
    "main",
    "write_spectrum_csv",
    "read_spectrum_csv",
    "write_rings_svg",
    "cache_key",
]


# -- float formatting ----------------------------------------------------------

def _fmt(v: float) -> str:
    """Locale-independent decimal form that round-trips binary64 exactly.

    17 fractional digits pin a double whenever |v| >= 1/16 (the decimal
    resolution 5e-18 is below half an ulp there); smaller magnitudes use
    the shortest round-trip repr instead.  Zeros print as a bare 0.
    """
    v = float(v)
    if v == 0.0:
        return "0"
    if 0.0625 <= abs(v) < 1e16:
        return np.format_float_positional(v, precision=17, unique=False, fractional=True, trim="k")
    return repr(v)


def _atomic_write(path: str, text: str) -> None:
    """Write whole files only: temp file in the target directory, then rename."""
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=directory, suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


# -- spectrum CSV --------------------------------------------------------------

def spectrum_csv_text(s: SpectrumSet) -> str:
    lines = [f"# kind={s.params.kind.value}" if s.params else f"# kind={s.kind.value}"]
    if s.params is not None:
        lines += [
            f"# kappa={s.params.kappa!r}",
            f"# lambda={s.params.lam!r}",
            f"# alpha={s.params.alpha}",
            f"# theta={MOTHER if s.params.is_mother else repr(s.params.theta)}",
        ]
    if s.grid is not None:
        lines += [f"# n_x={s.grid.n_x}", f"# n_theta={s.grid.n_theta}"]
    lines.append(f"# error_bound={s.error_bound!r}")
    if s.kind is SpectrumKind.REAL_LINE:
        lines.extend(_fmt(v) for v in s.points)
    else:
        phases = principal_args(s.points)
        lines.extend(
            f"{_fmt(z.real)},{_fmt(z.imag)},{_fmt(ph)}" for z, ph in zip(s.points, phases)
        )
    return "\n".join(lines) + "\n"


def write_spectrum_csv(s: SpectrumSet, path: str) -> None:
    """Persist a SpectrumSet: `# key=value` header lines, then sorted rows."""
    _atomic_write(path, spectrum_csv_text(s))


def read_spectrum_csv(path: str) -> SpectrumSet:
    """Inverse of write_spectrum_csv; reproduces the SpectrumSet exactly."""
    header: dict[str, str] = {}
    values: list = []
    circle = None
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            if line.startswith("#"):
                key, _, val = line[1:].strip().partition("=")
                header[key.strip()] = val.strip()
                continue
            if circle is None:
                circle = "," in line
            if circle:
                re_s, im_s, _ = line.split(",")
                values.append(complex(float(re_s), float(im_s)))
            else:
                values.append(float(line))
    kind_s = header.get("kind", "ukh")
    params = None
    if "kappa" in header:
        theta_s = header.get("theta", MOTHER)
        theta = MOTHER if theta_s == MOTHER else float(theta_s)
        params = OperatorParams(
            OperatorKind(kind_s),
            float(header["kappa"]),
            float(header["lambda"]),
            RationalAlpha.parse(header["alpha"]),
            theta,
        )
    grid = None
    if "n_x" in header:
        grid = GridSpec(int(header["n_x"]), int(header.get("n_theta", "1")))
    set_kind = (
        SpectrumKind.REAL_LINE
        if kind_s in ("h", SpectrumKind.REAL_LINE.value)
        else SpectrumKind.UNIT_CIRCLE
    )
    return SpectrumSet.build(
        set_kind,
        np.asarray(values),
        params=params,
        grid=grid,
        error_bound=float(header.get("error_bound", "0")),
    )


# -- ring SVG ------------------------------------------------------------------

def write_rings_svg(spectra: list[SpectrumSet], path: str) -> None:
    """Concentric-ring plot: one ring per spectrum, radius grows with index.

    All spectra must be on the unit circle and share the same alpha; the
    real and imaginary axes are drawn through the common center.  Output
    bytes are a deterministic function of the input.
    """
    if not spectra:
        raise EmptySpectrum("write_rings_svg needs at least one spectrum")
    alphas = {str(s.params.alpha) for s in spectra if s.params is not None}
    if any(s.kind is not SpectrumKind.UNIT_CIRCLE for s in spectra):
        raise KindMismatch("ring plots require UNIT_CIRCLE spectra")
    if len(alphas) > 1:
        raise KindMismatch(f"ring plots require a single alpha, got {sorted(alphas)}")

    r0, dr, pad = 60.0, 36.0, 24.0
    outer = r0 + dr * (len(spectra) - 1)
    half = outer + pad
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" '
        f'viewBox="{-half:.1f} {-half:.1f} {2 * half:.1f} {2 * half:.1f}">',
        f'<line x1="{-half + 4:.1f}" y1="0" x2="{half - 4:.1f}" y2="0" '
        f'stroke="#999" stroke-width="0.6"/>',
        f'<line x1="0" y1="{-half + 4:.1f}" x2="0" y2="{half - 4:.1f}" '
        f'stroke="#999" stroke-width="0.6"/>',
    ]
    for i, s in enumerate(spectra):
        r = r0 + dr * i
        ph = principal_args(s.points)
        xs, ys = r * np.cos(ph), -r * np.sin(ph)
        d = "".join(f"M{x:.3f} {y:.3f}h0" for x, y in zip(xs, ys))
        parts.append(
            f'<path d="{d}" fill="none" stroke="#000" stroke-width="1.4" '
            f'stroke-linecap="round"/>'
        )
    parts.append("</svg>")
    _atomic_write(path, "\n".join(parts) + "\n")


# -- cache ---------------------------------------------------------------------

def cache_key(params: OperatorParams, grid: GridSpec, tols: Tolerances = DEFAULT_TOLS) -> str:
    """Stable hash of everything a spectrum depends on; any change changes it."""
    payload = {
        "kind": params.kind.value,
        "kappa": params.kappa,
        "lambda": params.lam,
        "p": params.alpha.p,
        "q": params.alpha.q,
        "scope": MOTHER if params.is_mother else "fixed",
        "theta": None if params.is_mother else params.theta,
        "n_x": grid.n_x,
        "n_theta": grid.n_theta,
        "tolerances": [tols.hermitian, tols.unitary, tols.eig_residual,
                       tols.real_eigenvalue, tols.unit_modulus, tols.dedup],
        "version": __version__,
    }
    blob = json.dumps(payload, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode("utf-8")).hexdigest()


def compute_spectrum(
    params: OperatorParams,
    grid: GridSpec,
    cache_dir: str | None = None,
    tols: Tolerances = DEFAULT_TOLS,
) -> SpectrumSet:
    """Compute a spectrum, consulting/propagating the CSV cache if enabled."""
    if cache_dir is None:
        return _compute(params, grid, tols)
    path = os.path.join(cache_dir, cache_key(params, grid, tols) + ".csv")
    if os.path.exists(path):
        return read_spectrum_csv(path)
    s = _compute(params, grid, tols)
    write_spectrum_csv(s, path)
    return s


def _compute(params: OperatorParams, grid: GridSpec, tols: Tolerances) -> SpectrumSet:
    if params.is_mother:
        return mother_spectrum(params, grid, tols=tols)
    return spectrum_fixed_theta(params, grid, tols=tols)


# -- argument plumbing -----------------------------------------------------------

def _parse_grid(text: str) -> GridSpec:
    parts = text.split(",")
    try:
        if len(parts) == 1:
            n = int(parts[0])
            return GridSpec(n, n)
        if len(parts) == 2:
            return GridSpec(int(parts[0]), int(parts[1]))
    except ValueError as exc:
        raise InvalidParams(f"bad --grid value {text!r}: {exc}") from exc
    raise InvalidParams(f"--grid expects N or N,M, got {text!r}")


def _parse_theta(text: str):
    if text == MOTHER:
        return MOTHER
    try:
        return float(text)
    except ValueError as exc:
        raise InvalidParams(f"--theta expects a real or 'mother', got {text!r}") from exc


def _parse_kappas(text: str) -> list[float]:
    try:
        return [float(tok) for tok in text.split(",") if tok != ""]
    except ValueError as exc:
        raise InvalidParams(f"bad --kappa value {text!r}: {exc}") from exc


def _parse_alpha_list(text: str) -> list[RationalAlpha]:
    kind, _, arg = text.partition(":")
    try:
        if kind == "farey":
            return farey_rationals(int(arg))
        if kind == "fib":
            a, _, b = arg.partition("..")
            lo, hi = int(a), int(b)
            if lo < 1 or hi < lo:
                raise InvalidParams(f"bad fib range {arg!r}")
            return golden_convergents(hi)[lo - 1:]
    except ValueError as exc:
        raise InvalidParams(f"bad --alpha-list value {text!r}: {exc}") from exc
    raise InvalidParams(f"--alpha-list expects fib:a..b or farey:qmax, got {text!r}")


def _emit(text: str, out: str | None) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        _atomic_write(out, text)


def _add_common(p: argparse.ArgumentParser, alpha_required: bool = True) -> None:
    p.add_argument("--kind", choices=[k.value for k in OperatorKind], default="ukh")
    p.add_argument("--alpha", required=alpha_required, help="frequency as a p/q literal")
    p.add_argument("--kappa", default="1", help="time scale (comma list allowed for SVG rings)")
    p.add_argument("--lambda", dest="lam", type=float, default=1.0, help="coupling")
    p.add_argument("--theta", default=MOTHER, help="phase in [0,1) or 'mother'")
    p.add_argument("--grid", default="100", help="N or N,M grid points per axis")
    p.add_argument("--out", default=None, help="output path (default: standard output)")
    p.add_argument("--format", choices=["csv", "svg", "json"], default="csv")
    p.add_argument("--cache-dir", default=None)
    p.add_argument("--seed", default="none", help="reserved; all computations are deterministic")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="spectra",
        description="Spectra of Harper-family and kicked-rotor operators at rational frequency.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("compute", help="compute one spectrum and write CSV or SVG rings")
    _add_common(p)
    p.set_defaults(func=_cmd_compute)

    p = sub.add_parser("bandwidth", help="band statistics over a list of alphas")
    _add_common(p, alpha_required=False)
    p.add_argument("--alpha-list", required=True, help="fib:a..b or farey:qmax")
    p.add_argument("--merge-gap", default="auto",
                   help="'auto' (4x error bound), 'track' (per-band-index edges) or a number")
    p.set_defaults(func=_cmd_bandwidth)

    p = sub.add_parser("butterfly", help="union spectra over all Farey rationals")
    _add_common(p, alpha_required=False)
    p.add_argument("--alpha-list", required=True, help="farey:qmax")
    p.set_defaults(func=_cmd_butterfly)

    p = sub.add_parser("zoom", help="nested eigenphase windows around a center")
    _add_common(p)
    p.add_argument("--center", default=None, type=float,
                   help="window center (default: phase median)")
    p.add_argument("--factors", required=True, help="comma-separated zoom factors > 1")
    p.set_defaults(func=_cmd_zoom)

    p = sub.add_parser("verify", help="run verification checks and report JSON records")
    # Flags act as overrides; anything omitted falls back to the check's own
    # documented defaults, so every check stays runnable bare.
    p.add_argument("--check", required=True, help="check id or 'all'")
    p.add_argument("--kind", choices=[k.value for k in OperatorKind], default=None)
    p.add_argument("--alpha", default=None)
    p.add_argument("--kappa", type=float, default=None)
    p.add_argument("--lambda", dest="lam", type=float, default=None)
    p.add_argument("--theta", default=None)
    p.add_argument("--grid", default=None)
    p.add_argument("--out", default=None)
    p.add_argument("--format", choices=["json"], default="json")
    p.add_argument("--cache-dir", default=None)
    p.add_argument("--seed", default="none")
    p.set_defaults(func=_cmd_verify)

    p = sub.add_parser("cache", help="cache maintenance")
    p.add_argument("action", choices=["clear"])
    p.add_argument("--cache-dir", required=True)
    p.set_defaults(func=_cmd_cache)

    return parser


# -- commands --------------------------------------------------------------------

def _params_from_args(args, kappa: float) -> OperatorParams:
    return OperatorParams(
        OperatorKind(args.kind),
        kappa,
        args.lam,
        RationalAlpha.parse(args.alpha),
        _parse_theta(args.theta) if isinstance(args.theta, str) else args.theta,
    )


def _cmd_compute(args) -> int:
    kappas = _parse_kappas(args.kappa)
    grid = _parse_grid(args.grid)
    if args.format == "svg":
        if args.out is None:
            raise InvalidParams("--format svg requires --out")
        spectra = [
            compute_spectrum(_params_from_args(args, k), grid, args.cache_dir) for k in kappas
        ]
        write_rings_svg(spectra, args.out)
        return 0
    if len(kappas) != 1:
        raise InvalidParams("a kappa list is only supported with --format svg")
    s = compute_spectrum(_params_from_args(args, kappas[0]), grid, args.cache_dir)
    _emit(spectrum_csv_text(s), args.out)
    return 0


def _cmd_bandwidth(args) -> int:
    kappas = _parse_kappas(args.kappa)
    if len(kappas) != 1:
        raise InvalidParams("bandwidth expects a single --kappa")
    grid = _parse_grid(args.grid)
    theta = _parse_theta(args.theta)
    lines = [
        f"# kind={args.kind}",
        f"# kappa={kappas[0]!r}",
        f"# lambda={args.lam!r}",
        f"# n_x={grid.n_x}",
        f"# n_theta={grid.n_theta}",
        f"# merge_gap={args.merge_gap}",
        "p,q,alpha,bands,width,error_bound",
    ]
    for alpha in _parse_alpha_list(args.alpha_list):
        params = OperatorParams(OperatorKind(args.kind), kappas[0], args.lam, alpha, theta)
        if args.merge_gap == "track":
            bands = tracked_bands(params, grid)
            bound = grid_error_bound(params, grid)
        else:
            s = compute_spectrum(params, grid, args.cache_dir)
            gap = auto_merge_gap(s) if args.merge_gap == "auto" else float(args.merge_gap)
            bands = merge_bands(s, gap)
            bound = s.error_bound
        lines.append(
            f"{alpha.p},{alpha.q},{_fmt(alpha.value)},{len(bands)},"
            f"{_fmt(total_bandwidth(bands))},{_fmt(bound)}"
        )
    _emit("\n".join(lines) + "\n", args.out)
    return 0


def _cmd_butterfly(args) -> int:
    kappas = _parse_kappas(args.kappa)
    if len(kappas) != 1:
        raise InvalidParams("butterfly expects a single --kappa")
    listed = args.alpha_list
    if not listed.startswith("farey:"):
        raise InvalidParams("butterfly sweeps Farey rationals; use --alpha-list farey:qmax")
    try:
        q_max = int(listed.partition(":")[2])
    except ValueError as exc:
        raise InvalidParams(f"bad --alpha-list value {listed!r}: {exc}") from exc
    grid = _parse_grid(args.grid)
    ds = butterfly_dataset(args.kind, kappas[0], args.lam, q_max, grid.n_x)
    lines = [
        f"# kind={ds.kind.value}",
        f"# kappa={ds.kappa!r}",
        f"# lambda={ds.lam!r}",
        f"# q_max={ds.q_max}",
        f"# grid_n={ds.grid_n}",
        "p,q,value",
    ]
    lines.extend(f"{p},{q},{_fmt(v)}" for p, q, v in zip(ds.p, ds.q, ds.values))
    _emit("\n".join(lines) + "\n", args.out)
    return 0


def _cmd_zoom(args) -> int:
    kappas = _parse_kappas(args.kappa)
    if len(kappas) != 1:
        raise InvalidParams("zoom expects a single --kappa")
    grid = _parse_grid(args.grid)
    s = compute_spectrum(_params_from_args(args, kappas[0]), grid, args.cache_dir)
    phases = eigenphases(s)
    center = float(np.median(phases)) if args.center is None else args.center
    try:
        factors = [float(tok) for tok in args.factors.split(",") if tok != ""]
    except ValueError as exc:
        raise InvalidParams(f"bad --factors value {args.factors!r}: {exc}") from exc
    windows = zoom_windows(phases, center, factors)
    lines = [
        f"# center={center!r}",
        f"# factors={args.factors}",
        "window,lo,hi,phase",
    ]
    for i, w in enumerate(windows):
        lines.extend(f"{i},{_fmt(w.lo)},{_fmt(w.hi)},{_fmt(p)}" for p in w.points)
    _emit("\n".join(lines) + "\n", args.out)
    return 0


def _cmd_verify(args) -> int:
    cfg: dict = {}
    if args.kind is not None:
        cfg["kind"] = args.kind
    if args.alpha is not None:
        cfg["alpha"] = args.alpha
    if args.kappa is not None:
        cfg["kappa"] = args.kappa
    if args.lam is not None:
        cfg["lambda"] = args.lam
    if args.theta is not None:
        cfg["theta"] = _parse_theta(args.theta)
    if args.grid is not None:
        cfg["n"] = _parse_grid(args.grid).n_x
    ids = CHECK_IDS if args.check == "all" else (args.check,)
    reports = [run_check(cid, cfg).to_dict() for cid in ids]
    text = json.dumps(reports, indent=2, sort_keys=True) + "\n"
    _emit(text, args.out)
    return 0


def _cmd_cache(args) -> int:
    if os.path.isdir(args.cache_dir):
        for name in sorted(os.listdir(args.cache_dir)):
            if name.endswith(".csv"):
                os.unlink(os.path.join(args.cache_dir, name))
    return 0


def dispatch(argv) -> int:
    """Parse argv and run one command, mapping failures to exit codes."""
    parser = build_parser()
    try:
        args = parser.parse_args(list(argv))
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"spectra: {exc}", file=sys.stderr)
        return 2
    except NumericalError as exc:
        print(f"spectra: numerical failure: {exc}", file=sys.stderr)
        return 3
    except OSError as exc:
        print(f"spectra: I/O failure: {exc}", file=sys.stderr)
        return 4


def main() -> None:
    sys.exit(dispatch(sys.argv[1:]))


if __name__ == "__main__":
    main()
