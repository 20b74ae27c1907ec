import json
import subprocess
import sys
import xml.etree.ElementTree as ET

import numpy as np
import pytest

from pdcontext import __version__
from pdcontext.cli import EXIT_INVALID, EXIT_NUMERICAL, EXIT_OK, run

SVG = "{http://www.w3.org/2000/svg}"


def call(capsys, *argv):
    code = run(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def circles(svg_text):
    root = ET.fromstring(svg_text)
    return [c.get("fill") for c in root.iter(f"{SVG}circle")]


class TestPayoff:
    def test_region_vi_matrix(self, capsys):
        code, out, _ = call(capsys, "payoff", "--z", "2.5", "--beta", "0.75", "--set", "3")
        assert code == EXIT_OK
        doc = json.loads(out)
        assert doc["entries"][0][0] == pytest.approx(12.0)
        assert doc["strategies"] == ["C", "D", "B"]
        assert doc["max_abs_delta"] < 1e-12
        assert doc["meta"]["version"] == __version__

    def test_one_shot(self, capsys):
        code, out, _ = call(capsys, "payoff", "--beta", "0")
        assert code == EXIT_OK
        assert json.loads(out)["entries"][1][0] == pytest.approx(5.0)

    def test_ordering_violation(self, capsys):
        code, _, err = call(capsys, "payoff", "--t", "3", "--r", "5")
        assert code == EXIT_INVALID
        assert "OrderingViolation" in err

    def test_csv(self, capsys):
        code, out, _ = call(capsys, "payoff", "--set", "4", "--format", "csv")
        lines = out.splitlines()
        assert code == EXIT_OK and lines[0] == "strategy,C,D,S,B"
        assert lines[1].split(",")[1] == "12"

    def test_unsupported_format(self, capsys):
        code, _, err = call(capsys, "payoff", "--format", "svg")
        assert code == EXIT_INVALID and "does not write svg" in err

    def test_bad_beta(self, capsys):
        code, _, _ = call(capsys, "payoff", "--beta", "1.5")
        assert code == EXIT_INVALID

    def test_unknown_flag_exits_invalid(self, capsys):
        with pytest.raises(SystemExit) as exc:
            run(["payoff", "--gamma", "0.3"])
        assert exc.value.code == EXIT_INVALID


class TestConfigFile:
    def test_flags_override_file(self, capsys, tmp_path):
        cfg = tmp_path / "game.cfg"
        cfg.write_text("# region VII\nz = 2.5\nbeta = 0.5\n")
        _, out, _ = call(capsys, "payoff", "--config", str(cfg), "--beta", "0.9")
        doc = json.loads(out)
        assert doc["params"]["beta"] == 0.9 and doc["params"]["z"] == 2.5
        assert doc["entries"][0][0] == pytest.approx(30.0)

    def test_bad_file(self, capsys, tmp_path):
        cfg = tmp_path / "game.cfg"
        cfg.write_text("gamma = 0.1\n")
        assert call(capsys, "payoff", "--config", str(cfg))[0] == EXIT_INVALID

    def test_missing_file(self, capsys, tmp_path):
        assert call(capsys, "payoff", "--config", str(tmp_path / "none.cfg"))[0] == EXIT_INVALID


class TestFixedPoints:
    def test_region_vi(self, capsys):
        code, out, _ = call(capsys, "fixed-points", "--z", "2.5", "--beta", "0.75", "--set", "3")
        doc = json.loads(out)
        assert code == EXIT_OK and len(doc["fixed_points"]) == 4
        poly = doc["fixed_points"][3]
        assert poly["stability"] == "asymptotically-stable"
        assert poly["location"] == pytest.approx([0.875, 0.125])

    def test_fixed_line(self, capsys):
        _, out, _ = call(capsys, "fixed-points", "--set", "4", "--z", "2.5", "--beta", "0.9")
        lines = [fp for fp in json.loads(out)["fixed_points"] if fp["kind"] == "fixed-line"]
        assert len(lines) == 1 and len(lines[0]["samples"]) == 5

    def test_degenerate_warns(self, capsys):
        code, out, err = call(capsys, "fixed-points", "--z", "1.5", "--beta", "0.5")
        doc = json.loads(out)
        assert code == EXIT_OK
        assert len(doc["fixed_points"]) == 3 and doc["warnings"]
        assert "note:" in err

    def test_csv_quotes_names(self, capsys):
        _, out, _ = call(capsys, "fixed-points", "--format", "csv")
        lines = out.splitlines()
        assert lines[0] == "name,kind,in_simplex,x1,x2,stability,re1,im1,re2,im2"
        assert lines[1].startswith('"{0,0}",vertex,true,0,0,non-hyperbolic')


class TestIntegrate:
    def test_region_vi_csv(self, capsys):
        code, out, _ = call(capsys, "integrate", "--seed", "0.6,0.3")
        lines = out.splitlines()
        assert code == EXIT_OK
        assert lines[0] == "t,x1,x2"
        last = np.array([float(v) for v in lines[-1].split(",")[1:]])
        assert np.abs(last - [0.875, 0.125]).max() < 1e-6

    def test_json(self, capsys):
        _, out, _ = call(capsys, "integrate", "--seed", "0.6,0.3", "--format", "json", "--max-time", "1")
        doc = json.loads(out)
        assert doc["terminal"] == "max-time" and doc["seed"] == [0.6, 0.3]

    def test_four_strategy(self, capsys):
        code, out, _ = call(capsys, "integrate", "--set", "4", "--beta", "0.9", "--seed", "0.3,0.2,0.3")
        assert code == EXIT_OK
        last = [float(v) for v in out.splitlines()[-1].split(",")[1:]]
        assert last[1] < 1e-5

    def test_four_strategy_generic_payoffs(self, capsys):
        code, out, _ = call(capsys, "integrate", "--set", "4", "--t", "6", "--seed", "0.3,0.2,0.3",
                            "--max-time", "1")
        assert code == EXIT_OK and out.splitlines()[0] == "t,x1,x2,x3"

    def test_audit_file(self, capsys, tmp_path):
        path = tmp_path / "audit.csv"
        code, _, err = call(capsys, "integrate", "--seed", "0.3,0.3", "--audit", str(path), "--step", "1e-3",
                            "--max-time", "5")
        assert code == EXIT_OK and "invariant drift" in err
        lines = path.read_text().splitlines()
        assert lines[0] == "t,x1,x2,logC"
        log_c = np.array([float(v.split(",")[3]) for v in lines[1:]])
        assert np.abs(log_c - log_c[0]).max() < 1e-6

    def test_svg(self, capsys):
        code, out, _ = call(capsys, "integrate", "--seed", "0.6,0.3", "--format", "svg", "--max-time", "5")
        assert code == EXIT_OK
        assert "#000000" in circles(out)

    def test_missing_seed(self, capsys):
        assert call(capsys, "integrate")[0] == EXIT_INVALID

    def test_wrong_seed_length(self, capsys):
        assert call(capsys, "integrate", "--seed", "0.3,0.3,0.1")[0] == EXIT_INVALID

    def test_step_explosion(self, capsys):
        code, _, err = call(capsys, "integrate", "--seed", "0.3,0.3", "--step", "50", "--beta", "0.99")
        assert code == EXIT_NUMERICAL and "StepExplosion" in err


class TestAtlas:
    def test_csv(self, capsys):
        code, out, _ = call(capsys, "atlas", "--resolution", "10")
        lines = out.splitlines()
        assert code == EXIT_OK and lines[0] == "beta,z,region" and len(lines) == 101

    def test_json_distinct(self, capsys):
        _, out, _ = call(capsys, "atlas", "--resolution", "200", "--format", "json")
        assert json.loads(out)["distinct"] == sorted(["I", "II", "III", "IV", "V", "VI", "VII", "VIII", "IX", "X"])

    def test_svg(self, capsys):
        _, out, _ = call(capsys, "atlas", "--resolution", "20", "--format", "svg")
        root = ET.fromstring(out)
        assert len(list(root.iter(f"{SVG}polyline"))) == 5
        labels = {t.text for t in root.iter(f"{SVG}text")}
        assert {"VI", "VII"} <= labels

    def test_bad_range(self, capsys):
        assert call(capsys, "atlas", "--beta-range", "0,2")[0] == EXIT_INVALID
        assert call(capsys, "atlas", "--z-range", "zero")[0] == EXIT_INVALID


class TestPortrait:
    def test_region_vi_svg_markers(self, capsys):
        code, out, _ = call(capsys, "portrait", "--region", "VI", "--density", "2", "--format", "svg",
                            "--max-time", "20")
        assert code == EXIT_OK
        fills = circles(out)
        assert fills.count("#000000") == 1  # the polymorphic point
        assert fills.count("#ffffff") == 3

    def test_region_vii_four_strategy_svg(self, capsys):
        _, out, _ = call(capsys, "portrait", "--region", "VII", "--set", "4", "--density", "2", "--format", "svg",
                         "--max-time", "20")
        root = ET.fromstring(out)
        thick = [p for p in root.iter(f"{SVG}polyline") if p.get("stroke-width") == "3"]
        assert len(thick) == 1  # the fixed line

    def test_json(self, capsys):
        _, out, _ = call(capsys, "portrait", "--region", "VII", "--density", "3")
        doc = json.loads(out)
        assert doc["region"] == "VII" and len(doc["trajectories"]) == 10
        for tr in doc["trajectories"]:
            assert np.abs(np.array(tr["end"]) - [1.0, 0.0]).max() < 1e-6

    def test_bad_density(self, capsys):
        assert call(capsys, "portrait", "--density", "1")[0] == EXIT_INVALID


class TestInvariantCheck:
    def test_passes(self, capsys):
        code, out, err = call(capsys, "invariant-check", "--seed", "0.3,0.3", "--format", "json")
        doc = json.loads(out)
        assert code == EXIT_OK and doc["drift"] < 1e-6
        assert "tolerance" in err

    def test_fails_when_tolerance_is_tight(self, capsys, tmp_path):
        path = tmp_path / "audit.csv"
        code, _, _ = call(capsys, "invariant-check", "--seed", "0.3,0.3", "--tol", "1e-300", "--step", "1e-2",
                          "--out", str(path))
        assert code == EXIT_NUMERICAL
        assert path.read_text().startswith("t,x1,x2,logC\n")

    def test_degenerate(self, capsys):
        code, _, err = call(capsys, "invariant-check", "--seed", "0.3,0.3", "--z", "2", "--beta", "0.5")
        assert code == EXIT_NUMERICAL and "DegenerateExponent" in err

    def test_four_strategy_rejected(self, capsys):
        assert call(capsys, "invariant-check", "--set", "4", "--seed", "0.3,0.3,0.1")[0] == EXIT_INVALID


class TestDeterminism:
    @pytest.mark.parametrize(
        "argv",
        [
            ("fixed-points", "--set", "4"),
            ("integrate", "--seed", "0.6,0.3", "--format", "json"),
            ("atlas", "--resolution", "30", "--format", "svg"),
            ("portrait", "--region", "VI", "--density", "3", "--format", "svg"),
        ],
    )
    def test_byte_identical(self, capsys, tmp_path, argv):
        outs = []
        for i in range(2):
            path = tmp_path / f"out{i}"
            assert run([*argv, "--out", str(path)]) == EXIT_OK
            outs.append(path.read_bytes())
        capsys.readouterr()
        assert outs[0] == outs[1]


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "pdcontext", "--version"], capture_output=True, text=True)
    assert res.returncode == 0 and res.stdout.strip() == f"pdcontext {__version__}"
