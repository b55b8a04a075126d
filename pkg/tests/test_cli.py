import re
from pathlib import Path

import pytest

from pdnf.algebra import ExactComplex, InvariantViolation
from pdnf.cli import main
from pdnf.corpus import build_corpus
from pdnf.fileformat import FormatError, SystemFile, emit, parse_file, parse_system, parse_text

SAMPLES = Path(__file__).resolve().parent.parent / "samples"


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    return code, capsys.readouterr().out


def footer(text):
    return dict(re.findall(r"^(status|error_code) = (\S+)$", text, re.M))


# -- file format ------------------------------------------------------------------
@pytest.mark.parametrize("name", ["x2sq.txt", "planted.txt", "limit_cycle.txt"])
def test_samples_round_trip(name):
    sf = parse_file(SAMPLES / name)
    again = parse_text(emit(sf))
    assert emit(again) == emit(sf)


def test_corpus_round_trip():
    for case in build_corpus(seed=5, size=12):
        sf = SystemFile.from_system(case.system)
        assert parse_text(emit(sf)).system().F == case.system.F


def test_coefficient_grammar_in_file():
    sf = parse_text("[system]\ndimension = 2\nlambda = i; 0\n[terms]\n1 0 2 3 1/2+3/4i\n")
    F = sf.system().F
    assert F.coefficient((0, 2), 3, 0) == ExactComplex("1/2", "3/4")


def test_error_positions():
    with pytest.raises(FormatError) as exc:
        parse_text("[system]\ndimension = 2\nlambda = i; 0\n[terms]\n1 0 2 0 1/0\n", "f.txt")
    assert str(exc.value).startswith("f.txt:5:")
    with pytest.raises(FormatError, match=":3:"):
        parse_text("[system]\ndimension = 2\nlambda = i\n")
    with pytest.raises(FormatError, match="component 3"):
        parse_text("[system]\ndimension = 2\nlambda = i; 0\n[terms]\n3 0 2 0 1\n")


def test_degree_one_term_rejected():
    with pytest.raises((FormatError, InvariantViolation), match=r"j=1, l=\[1, 0\], k=0"):
        parse_text("[system]\ndimension = 2\nlambda = i; 0\n[terms]\n1 1 0 0 1\n")


def test_parse_system_requires_system_kind():
    with pytest.raises(FormatError):
        parse_system(SAMPLES / "limit_cycle.txt")


# -- commands ---------------------------------------------------------------------
def test_normalize_writes_files(capsys, tmp_path):
    code, out = run(capsys, "normalize", SAMPLES / "x2sq.txt", "--out", tmp_path)
    assert code == 0 and footer(out) == {"status": "ok", "error_code": "NONE"}
    assert "residual = 0 through degree 5" in out
    phi = parse_file(tmp_path / "x2sq.phi.txt")
    assert phi.kind == "transform"
    assert "1 0 2 0 i" in (tmp_path / "x2sq.phi.txt").read_text()
    assert parse_file(tmp_path / "x2sq.G.txt").system().F.is_zero


def test_normalize_is_deterministic(capsys, tmp_path):
    a = run(capsys, "normalize", SAMPLES / "planted.txt", "--out", tmp_path)[1]
    b = run(capsys, "normalize", SAMPLES / "planted.txt", "--out", tmp_path)[1]
    assert a == b


def test_normalize_invalid_input(capsys, tmp_path):
    bad = tmp_path / "bad.txt"
    bad.write_text("[system]\ndimension = 2\nlambda = i; 0\n[terms]\n1 1 0 0 1\n")
    code, out = run(capsys, "normalize", bad)
    assert code == 1 and footer(out)["error_code"] in ("E_PARSE", "E_INVARIANT")
    code, out = run(capsys, "normalize", tmp_path / "missing.txt")
    assert code == 1 and footer(out)["error_code"] == "E_PARSE"


def test_lattice_from_lambda(capsys):
    code, out = run(capsys, "lattice", "--lambda", "i;0", "--degree", "6", "--fourier-cap", "8")
    assert code == 0 and re.search(r"^R_lambda = 2$", out, re.M)


def test_check_integral(capsys):
    code, out = run(capsys, "check-integral", SAMPLES / "planted.txt")
    assert code == 0 and "H" in out


def test_check_integral_missing(capsys):
    code, out = run(capsys, "check-integral", SAMPLES / "x2sq.txt")
    assert code == 1 and footer(out)["error_code"] == "E_NO_INTEGRAL"


def test_verify_perturbed_transform_reports_fail(capsys, tmp_path):
    run(capsys, "normalize", SAMPLES / "x2sq.txt", "--out", tmp_path)
    phi = tmp_path / "x2sq.phi.txt"
    phi.write_text(phi.read_text().replace("1 0 2 0 i", "1 0 2 0 11/10i"))
    code, out = run(capsys, "verify", SAMPLES / "x2sq.txt", "--phi", phi,
                    "--normal-form", tmp_path / "x2sq.G.txt")
    assert code == 0
    assert "verification = fail" in out


def test_verify_computed_passes(capsys):
    code, out = run(capsys, "verify", SAMPLES / "x2sq.txt")
    assert code == 0 and "verification = pass" in out


def test_floquet_command(capsys, tmp_path):
    code, out = run(capsys, "floquet", SAMPLES / "limit_cycle.txt", "--out", tmp_path)
    assert code == 0, out
    reduced = parse_file(tmp_path / "limit_cycle.reduced.txt")
    lam = sorted(complex(v).real for v in reduced.system().linear.lam)
    assert abs(lam[0] + 2) < 1e-6 and abs(lam[1]) < 1e-6


def test_floquet_orbit_not_found(capsys, tmp_path):
    f = tmp_path / "unstable.txt"
    f.write_text("[system]\nkind = field\ndimension = 2\n[terms]\n1 1 0 0 1\n2 0 1 0 1\n"
                 "[orbit]\nseed = 1; 0\nperiod_guess = 1\n")
    code, out = run(capsys, "floquet", f, "--out", tmp_path)
    assert code == 2 and footer(out)["error_code"] == "E_ORBIT_NOT_FOUND"


def test_floquet_needs_field(capsys):
    code, out = run(capsys, "floquet", SAMPLES / "x2sq.txt")
    assert code == 1


def test_report_file(capsys, tmp_path):
    rpt = tmp_path / "r.txt"
    code, out = run(capsys, "normalize", SAMPLES / "x2sq.txt", "--out", tmp_path, "--report", rpt)
    assert code == 0 and "status = ok" in rpt.read_text()
