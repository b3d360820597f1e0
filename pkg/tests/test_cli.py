import io

import pytest

from growthbound.cli import PRESETS, RunConfig, run
from growthbound.errors import ConfigError


def _run(argv):
    buf = io.StringIO()
    code = run(argv, stdout=buf)
    return code, buf.getvalue()


def _write(tmp_path, text, name="run.toml"):
    p = tmp_path / name
    p.write_text(text)
    return str(p)


def test_demo_vmoa(tmp_path):
    code, out = _run(["demo", "vmoa", "--out", str(tmp_path / "v"), "--grid-radial", "12", "--grid-angles", "16"])
    assert code == 0
    assert "OVERALL PASS" in out and "verdict = little-o" in out
    for name in ("report.txt", "report.kv", "profile.csv", "series_f.csv", "coefficients_f.csv", "little_o_profile.csv"):
        assert (tmp_path / "v" / name).exists()


def test_demo_constant_one_skips_profile(tmp_path):
    code, out = _run(["demo", "ramey-ullrich", "--out", str(tmp_path / "r"), "--grid-radial", "12", "--grid-angles", "16"])
    assert code == 0 and "profile skipped" in out
    assert "INFO f.lower" in out and "PASS f.lower_sqrt_q" in out


def test_demo_growth(tmp_path):
    code, out = _run(["demo", "abakumov-doubtsov-little", "--out", str(tmp_path / "g"), "--grid-radial", "12",
                      "--grid-angles", "16"])
    assert code == 0 and "OVERALL PASS" in out
    assert (tmp_path / "g" / "envelope.txt").exists() and (tmp_path / "g" / "zeros.txt").exists()


def test_construct_then_certify_is_reproducible(tmp_path):
    cfg = _write(tmp_path, 'mode = "growth"\ndelta_max = 1e-40\nweight = { family = "power", alpha = 2.0 }\n'
                           "grid.radial = 10\ngrid.angles = 8\n")
    a, b = tmp_path / "a", tmp_path / "b"
    assert _run(["construct", "--config", cfg, "--out", str(a)])[0] == 0
    assert _run(["certify", "--config", cfg, "--out", str(b)])[0] == 0
    code, _ = _run(["certify", "--from", str(a), "--out", str(a)])
    assert code == 0
    for name in ("report.kv", "profile.csv"):
        assert (a / name).read_text() == (b / name).read_text()


def test_thread_count_does_not_change_output(tmp_path, monkeypatch):
    args = ["certify", "--grid-radial", "10", "--grid-angles", "8"]
    _run(args + ["--out", str(tmp_path / "one")])
    monkeypatch.setenv("GROWTHBOUND_THREADS", "3")
    _run(args + ["--out", str(tmp_path / "three")])
    assert (tmp_path / "one" / "report.kv").read_text() == (tmp_path / "three" / "report.kv").read_text()


def test_bad_h_reports_line(tmp_path, capsys):
    cfg = _write(tmp_path, 'mode = "growth"\nh = 4\n')
    code, _ = _run(["construct", "--config", cfg, "--out", str(tmp_path / "x")])
    assert code == 2
    assert "line 2" in capsys.readouterr().err


@pytest.mark.parametrize(
    "text",
    ['mode = "hyperbolic"\n', "q = 10\n", 'mode = "growth"\nx0 = -0.5\n', "grid.radial = 1\n", "unknown = 3\n",
     "q = [\n"],
)
def test_config_errors(tmp_path, text):
    cfg = _write(tmp_path, text)
    assert _run(["construct", "--config", cfg, "--out", str(tmp_path / "x")])[0] == 2


def test_k_range_beyond_support(tmp_path):
    cfg = _write(tmp_path, "J = 8\n")
    assert _run(["certify", "--config", cfg, "--k-range", "1..20", "--out", str(tmp_path / "x")])[0] == 2
    assert _run(["certify", "--k-range", "one..two", "--out", str(tmp_path / "x")])[0] == 2


def test_profile_command(tmp_path):
    code, out = _run(["profile", "--out", str(tmp_path / "p"), "--grid-angles", "8"])
    assert code == 0 and "ratio = " in out


def test_seed_jitters_angles_reproducibly():
    a = RunConfig.from_text("seed = 3\n").make_grid()
    b = RunConfig.from_text("seed = 3\n").make_grid()
    c = RunConfig.from_text("").make_grid()
    assert a == b and a.angle_offset != c.angle_offset == 0.0


def test_canonical_round_trip():
    cfg = RunConfig.from_text(PRESETS["abakumov-doubtsov-little"])
    again = RunConfig.from_text(cfg.canonical())
    assert again.canonical() == cfg.canonical()


def test_inline_and_dotted_tables_agree():
    a = RunConfig.from_text('weight = { family = "exponential", c = 2.0, p = 1.0 }\n')
    b = RunConfig.from_text('weight.family = "exponential"\nweight.c = 2.0\nweight.p = 1.0\n')
    assert a.make_weight() == b.make_weight()


def test_config_error_carries_line():
    with pytest.raises(ConfigError) as exc:
        RunConfig.from_text('mode = "growth"\n\nx0 = 0.5\n').validate()
    assert "line 3" in str(exc.value)
