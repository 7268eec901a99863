import json
import os

import numpy as np
import pytest

from kickspec.cli import (
    _fmt,
    cache_key,
    dispatch,
    read_spectrum_csv,
    spectrum_csv_text,
    write_rings_svg,
    write_spectrum_csv,
)
from kickspec.errors import EmptySpectrum, KindMismatch
from kickspec.operators import MOTHER, OperatorParams, RationalAlpha
from kickspec.spectra import (
    GridSpec,
    SpectrumKind,
    SpectrumSet,
    grid_error_bound,
    mother_spectrum,
)


def params(kind="ukh", kappa=1.0, lam=1.0, p=1, q=3, theta=MOTHER):
    return OperatorParams(kind, kappa, lam, RationalAlpha(p, q), theta)


# -- formatting and round trip ----------------------------------------------------


def test_fmt_examples():
    assert _fmt(1.0) == "1.00000000000000000"
    assert _fmt(0.0) == "0"
    assert _fmt(-0.0) == "0"


def test_fmt_round_trips():
    rng = np.random.default_rng(0)
    vals = list(rng.uniform(-10, 10, size=200)) + [np.pi, 1e-15, -1e-300, 3.5e16]
    for v in vals:
        assert float(_fmt(v)) == v


def test_single_point_csv_row():
    s = SpectrumSet.build(SpectrumKind.UNIT_CIRCLE, [1.0 + 0.0j])
    text = spectrum_csv_text(s)
    assert text.splitlines()[-1] == "1.00000000000000000,0,0"


def test_csv_round_trip_exact(tmp_path):
    s = mother_spectrum(params(), GridSpec(6, 6))
    path = str(tmp_path / "s.csv")
    write_spectrum_csv(s, path)
    back = read_spectrum_csv(path)
    assert back.kind is s.kind
    assert np.array_equal(back.points, s.points)
    assert back.error_bound == s.error_bound
    assert back.params == s.params
    assert back.grid == s.grid


def test_csv_header_contains_error_bound(tmp_path):
    pa = params()
    grid = GridSpec(6, 6)
    s = mother_spectrum(pa, grid)
    text = spectrum_csv_text(s)
    assert f"# error_bound={grid_error_bound(pa, grid)!r}" in text


def test_csv_real_line_round_trip(tmp_path):
    s = mother_spectrum(params(kind="h", kappa=0.0), GridSpec(5, 5))
    path = str(tmp_path / "h.csv")
    write_spectrum_csv(s, path)
    back = read_spectrum_csv(path)
    assert back.kind is SpectrumKind.REAL_LINE
    assert np.array_equal(back.points, s.points)


def test_csv_synthetic_real_line_round_trip(tmp_path):
    s = SpectrumSet.build(SpectrumKind.REAL_LINE, [-1.5, 0.25, 3.0])
    path = str(tmp_path / "bare.csv")
    write_spectrum_csv(s, path)
    back = read_spectrum_csv(path)
    assert back.kind is SpectrumKind.REAL_LINE
    assert np.array_equal(back.points, s.points)


def test_bad_list_values_are_exit_2(tmp_path):
    assert dispatch(["bandwidth", "--alpha-list", "farey:x", "--grid", "3"]) == 2
    assert dispatch(["butterfly", "--alpha-list", "fib:1..2", "--grid", "3"]) == 2
    assert dispatch(["zoom", "--alpha", "1/3", "--grid", "3", "--factors", "2,nope"]) == 2


def test_csv_fixed_theta_round_trip(tmp_path):
    from kickspec.spectra import spectrum_fixed_theta

    s = spectrum_fixed_theta(params(theta=0.125), GridSpec(7))
    path = str(tmp_path / "f.csv")
    write_spectrum_csv(s, path)
    back = read_spectrum_csv(path)
    assert back.params == s.params
    assert np.array_equal(back.points, s.points)


# -- SVG ---------------------------------------------------------------------------


def test_rings_svg_layout_and_determinism(tmp_path):
    a = RationalAlpha(8, 13)
    spectra = [
        mother_spectrum(OperatorParams("ukh", k, 1.0, a, MOTHER), GridSpec(4, 4))
        for k in (0.25, 0.5, 1.0, 2.0, 4.0, 8.0)
    ]
    p1, p2 = str(tmp_path / "a.svg"), str(tmp_path / "b.svg")
    write_rings_svg(spectra, p1)
    write_rings_svg(spectra, p2)
    b1, b2 = open(p1, "rb").read(), open(p2, "rb").read()
    assert b1 == b2
    text = b1.decode()
    assert text.count("<path") == 6
    assert text.count("<line") == 2


def test_rings_svg_rejects_bad_input(tmp_path):
    with pytest.raises(EmptySpectrum):
        write_rings_svg([], str(tmp_path / "x.svg"))
    real = SpectrumSet.build(SpectrumKind.REAL_LINE, [0.0])
    with pytest.raises(KindMismatch):
        write_rings_svg([real], str(tmp_path / "x.svg"))
    s1 = mother_spectrum(params(q=3), GridSpec(2, 2))
    s2 = mother_spectrum(params(q=5, p=2), GridSpec(2, 2))
    with pytest.raises(KindMismatch):
        write_rings_svg([s1, s2], str(tmp_path / "x.svg"))
    assert not os.path.exists(str(tmp_path / "x.svg"))


# -- dispatch ------------------------------------------------------------------------


def test_compute_writes_csv(tmp_path):
    out = str(tmp_path / "s.csv")
    code = dispatch([
        "compute", "--kind", "ukh", "--alpha", "1/3", "--kappa", "1", "--lambda", "1",
        "--theta", "mother", "--grid", "5", "--out", out,
    ])
    assert code == 0
    back = read_spectrum_csv(out)
    direct = mother_spectrum(params(q=3), GridSpec(5, 5))
    assert np.array_equal(back.points, direct.points)
    rows = [l for l in open(out) if not l.startswith("#")]
    assert len(rows) == len(direct)


def test_compute_mother_kicked_8_13(tmp_path):
    # The flagship configuration: every deduplicated sample of the 13-band
    # union spectrum lands in the file, one row per point.
    out = str(tmp_path / "s.csv")
    code = dispatch([
        "compute", "--kind", "ukh", "--alpha", "8/13", "--kappa", "1", "--lambda", "1",
        "--theta", "mother", "--grid", "100", "--out", out,
    ])
    assert code == 0
    direct = mother_spectrum(
        OperatorParams("ukh", 1.0, 1.0, RationalAlpha(8, 13), MOTHER), GridSpec(100, 100)
    )
    rows = [l for l in open(out) if not l.startswith("#")]
    assert len(rows) == len(direct)
    assert len(direct) <= 13 * 100 * 100


def test_compute_rejects_non_coprime_alpha(tmp_path):
    code = dispatch([
        "compute", "--alpha", "4/6", "--out", str(tmp_path / "x.csv"),
    ])
    assert code == 2


def test_compute_rectangular_grid(tmp_path):
    out = str(tmp_path / "r.csv")
    code = dispatch([
        "compute", "--alpha", "1/3", "--theta", "mother", "--grid", "6,3", "--out", out,
    ])
    assert code == 0
    text = open(out).read()
    assert "# n_x=6" in text and "# n_theta=3" in text


def test_compute_bad_usage_is_exit_2():
    assert dispatch(["compute"]) == 2  # --alpha missing
    assert dispatch(["no-such-command"]) == 2


def test_help_is_exit_0(capsys):
    assert dispatch(["--help"]) == 0
    capsys.readouterr()


def test_compute_svg_rings(tmp_path):
    out = str(tmp_path / "rings.svg")
    code = dispatch([
        "compute", "--kind", "ukh", "--alpha", "8/13", "--kappa", "0.25,0.5,1",
        "--theta", "mother", "--grid", "3", "--format", "svg", "--out", out,
    ])
    assert code == 0
    assert open(out).read().count("<path") == 3


def test_compute_io_failure_is_exit_4(tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("x")
    out = str(blocker / "sub" / "s.csv")  # parent is a regular file
    assert dispatch(["compute", "--alpha", "1/3", "--grid", "3", "--out", out]) == 4


def test_numerical_failure_is_exit_3(tmp_path, monkeypatch):
    import kickspec.cli as cli
    from kickspec.errors import NoConvergence

    def boom(*args, **kwargs):
        raise NoConvergence("synthetic solver failure")

    monkeypatch.setattr(cli, "compute_spectrum", boom)
    code = dispatch(["compute", "--alpha", "1/3", "--grid", "3",
                     "--out", str(tmp_path / "x.csv")])
    assert code == 3


def test_verify_mother_equality(tmp_path):
    out = str(tmp_path / "report.json")
    code = dispatch([
        "verify", "--check", "mother-equality", "--alpha", "8/13", "--kappa", "0.5",
        "--lambda", "1", "--grid", "40", "--out", out,
    ])
    assert code == 0
    reports = json.loads(open(out).read())
    assert len(reports) == 1
    assert reports[0]["check"] == "MOTHER_EQUALITY"
    assert reports[0]["pass"] is True


def test_verify_all_runs_every_check(tmp_path):
    out = str(tmp_path / "all.json")
    code = dispatch([
        "verify", "--check", "all", "--alpha", "2/3", "--grid", "8", "--out", out,
    ])
    assert code == 0
    reports = json.loads(open(out).read())
    assert len(reports) == 9


def test_bandwidth_command(tmp_path):
    out = str(tmp_path / "w.csv")
    code = dispatch([
        "bandwidth", "--kind", "ukh", "--kappa", "1", "--lambda", "1",
        "--alpha-list", "fib:1..3", "--grid", "6", "--theta", "mother", "--out", out,
    ])
    assert code == 0
    lines = [l for l in open(out).read().splitlines() if l and not l.startswith("#")]
    assert lines[0] == "p,q,alpha,bands,width,error_bound"
    assert len(lines) == 4  # header + 1/2, 2/3, 3/5
    assert lines[1].startswith("1,2,")


def test_bandwidth_track_mode(tmp_path):
    out = str(tmp_path / "wt.csv")
    code = dispatch([
        "bandwidth", "--kind", "ukh", "--alpha-list", "fib:1..2", "--grid", "6",
        "--theta", "mother", "--merge-gap", "track", "--out", out,
    ])
    assert code == 0


def test_butterfly_command(tmp_path):
    out = str(tmp_path / "b.csv")
    code = dispatch([
        "butterfly", "--kind", "ukh", "--kappa", "0.5", "--alpha-list", "farey:4",
        "--grid", "6", "--out", out,
    ])
    assert code == 0
    lines = [l for l in open(out).read().splitlines() if l and not l.startswith("#")]
    assert lines[0] == "p,q,value"
    assert len(lines) > 1


def test_zoom_command(tmp_path):
    out = str(tmp_path / "z.csv")
    code = dispatch([
        "zoom", "--kind", "ukh", "--alpha", "3/5", "--grid", "6", "--theta", "mother",
        "--factors", "4,2", "--out", out,
    ])
    assert code == 0
    lines = [l for l in open(out).read().splitlines() if l and not l.startswith("#")]
    assert lines[0] == "window,lo,hi,phase"
    windows = {int(l.split(",")[0]) for l in lines[1:]}
    assert windows == {0, 1, 2}


# -- cache -----------------------------------------------------------------------------


def test_cache_key_sensitivity():
    pa, grid = params(), GridSpec(5, 5)
    k1 = cache_key(pa, grid)
    assert k1 == cache_key(params(), GridSpec(5, 5))
    assert k1 != cache_key(params(kappa=2.0), grid)
    assert k1 != cache_key(pa, GridSpec(5, 6))
    assert k1 != cache_key(params(theta=0.0), grid)


def test_cache_differential_and_clear(tmp_path):
    cache = str(tmp_path / "cache")
    cold = str(tmp_path / "cold.csv")
    warm = str(tmp_path / "warm.csv")
    plain = str(tmp_path / "plain.csv")
    argv = ["compute", "--alpha", "2/5", "--grid", "6", "--theta", "mother"]
    assert dispatch(argv + ["--out", cold, "--cache-dir", cache]) == 0
    assert dispatch(argv + ["--out", warm, "--cache-dir", cache]) == 0
    assert dispatch(argv + ["--out", plain]) == 0
    cold_b, warm_b, plain_b = (open(p, "rb").read() for p in (cold, warm, plain))
    assert cold_b == warm_b == plain_b
    assert len(os.listdir(cache)) == 1
    assert dispatch(["cache", "clear", "--cache-dir", cache]) == 0
    assert os.listdir(cache) == []
