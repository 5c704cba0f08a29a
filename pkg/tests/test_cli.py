import json
import math

import numpy as np
import pytest

from covasym.cli import main


def run(argv):
    return main(argv)


class TestPredict:
    def test_ginibre_gaussian(self, tmp_path, capsys):
        code = run(
            [
                "predict",
                "--kernel",
                "ginibre",
                "--function",
                "gaussian-bump",
                "--out",
                str(tmp_path),
            ]
        )
        assert code == 0
        payload = json.loads((tmp_path / "prediction.json").read_text())
        assert payload["exponent"] == 0
        assert payload["constant"] == pytest.approx(0.25, abs=1e-6)
        # emitted term records re-parse
        from covasym.expansion import parse_expansion_term

        for term in payload["terms"]:
            m, value, count = parse_expansion_term(term["record"])
            assert m == term["m"]
            assert value == pytest.approx(term["value"], rel=1e-9, abs=1e-15)

    def test_poisson_volume_order(self, tmp_path):
        code = run(
            [
                "predict",
                "--kernel",
                "poisson lambda=1 d=2",
                "--function",
                "gaussian-bump",
                "--out",
                str(tmp_path),
            ]
        )
        assert code == 0
        payload = json.loads((tmp_path / "prediction.json").read_text())
        assert payload["exponent"] == 2
        assert payload["constant"] == pytest.approx(math.pi, rel=1e-9)

    def test_gef_constant(self, tmp_path):
        code = run(
            [
                "predict",
                "--kernel",
                "gef",
                "--function",
                "gaussian-bump",
                "--out",
                str(tmp_path),
            ]
        )
        assert code == 0
        payload = json.loads((tmp_path / "prediction.json").read_text())
        assert payload["exponent"] == -2
        zeta3 = 1.2020569031595943
        assert payload["constant"] == pytest.approx(zeta3 / 8.0, rel=1e-6)

    def test_unknown_kernel_is_domain_error(self, tmp_path, capsys):
        code = run(
            [
                "predict",
                "--kernel",
                "heisenberg",
                "--function",
                "gaussian-bump",
                "--out",
                str(tmp_path),
            ]
        )
        assert code == 2
        assert "available" in capsys.readouterr().err


class TestMoments:
    def test_gef_moment_report(self, tmp_path):
        code = run(
            ["moments", "--kernel", "gef", "--max-order", "4", "--out", str(tmp_path)]
        )
        assert code == 0
        payload = json.loads((tmp_path / "moments.json").read_text())
        assert abs(payload["defect"]) < 1e-6
        assert payload["tensor"]["(2, 0)"] == pytest.approx(0.0, abs=1e-8)


class TestSimulate:
    def test_poisson_run_and_outputs(self, tmp_path):
        code = run(
            [
                "simulate",
                "--process",
                "poisson lambda=1 halfwidth=10",
                "--function",
                "indicator-box lo=0,0 hi=1,1",
                "--L",
                "2,4,6",
                "--reps",
                "64",
                "--seed",
                "5",
                "--out",
                str(tmp_path),
            ]
        )
        assert code == 0
        fit = json.loads((tmp_path / "fit.json").read_text())
        assert "fit" in fit and "exponent" in fit["fit"]
        series = (tmp_path / "series.csv").read_text().splitlines()
        assert series[0] == "L,replicate,value"
        assert len(series) == 1 + 3 * 64
        summary = (tmp_path / "summary.csv").read_text().splitlines()
        assert summary[0] == "L,variance,ci_lo,ci_hi,n"

    def test_byte_identical_reruns(self, tmp_path):
        args = [
            "simulate",
            "--process",
            "poisson lambda=1 halfwidth=8",
            "--function",
            "indicator-box lo=0,0 hi=1,1",
            "--L",
            "2,4",
            "--reps",
            "32",
            "--seed",
            "9",
        ]
        run(args + ["--out", str(tmp_path / "a")])
        run(args + ["--out", str(tmp_path / "b")])
        for name in ("series.csv", "summary.csv", "fit.json"):
            assert (tmp_path / "a" / name).read_bytes() == (
                tmp_path / "b" / name
            ).read_bytes()

    def test_support_violation_reports_admissible_scale(self, tmp_path, capsys):
        code = run(
            [
                "simulate",
                "--process",
                "poisson lambda=1 halfwidth=4",
                "--function",
                "indicator-box lo=0,0 hi=1,1",
                "--L",
                "2,4,40",
                "--reps",
                "16",
                "--seed",
                "1",
                "--out",
                str(tmp_path),
            ]
        )
        assert code == 2
        err = capsys.readouterr().err
        assert "maximal admissible L" in err
        assert "4" in err  # box halfwidth 4 / unit support reach


class TestIndicatorCommand:
    def test_surface_limit(self, tmp_path):
        code = run(
            [
                "indicator",
                "--kernel",
                "ginibre",
                "--domain-a",
                "disc 0 0 1",
                "--out",
                str(tmp_path),
            ]
        )
        assert code == 0
        payload = json.loads((tmp_path / "indicator.json").read_text())
        assert payload["regime"] == "surface-order"
        assert payload["limit"] == pytest.approx(1.0 / math.sqrt(math.pi), abs=1e-8)

    def test_volume_regime_message(self, tmp_path, capsys):
        code = run(
            [
                "indicator",
                "--kernel",
                "poisson lambda=1",
                "--domain-a",
                "disc 0 0 1",
                "--out",
                str(tmp_path),
            ]
        )
        assert code == 0
        payload = json.loads((tmp_path / "indicator.json").read_text())
        assert payload["regime"] == "volume-order"
        assert payload["limit"] == pytest.approx(math.pi, abs=1e-9)

    def test_disjoint_domains(self, tmp_path):
        code = run(
            [
                "indicator",
                "--kernel",
                "ginibre",
                "--domain-a",
                "disc 0 0 1",
                "--domain-b",
                "disc 5 0 1",
                "--out",
                str(tmp_path),
            ]
        )
        assert code == 0
        payload = json.loads((tmp_path / "indicator.json").read_text())
        assert payload["limit"] == 0.0


class TestVerify:
    @pytest.mark.parametrize(
        "suite",
        [
            "qm-reduction",
            "cumulant-threeway",
            "integral-identity-discrete",
            "integral-identity-nonprojection",
            "dpp-cyclic",
        ],
    )
    def test_suites_pass(self, suite, tmp_path):
        code = run(["verify", "--suite", suite, "--out", str(tmp_path)])
        assert code == 0
        payload = json.loads((tmp_path / "verify.json").read_text())
        assert payload["passed"] is True
        if suite == "integral-identity-nonprojection":
            assert payload["expected_failure"] is True
            assert payload["identities"]["nonprojection-kernel-defect"] > 1e-3

    def test_unknown_suite_is_domain_error(self, tmp_path):
        assert run(["verify", "--suite", "nope", "--out", str(tmp_path)]) == 2

    def test_qm_reduction_defect_threshold(self, tmp_path):
        run(["verify", "--suite", "qm-reduction", "--out", str(tmp_path)])
        payload = json.loads((tmp_path / "verify.json").read_text())
        assert payload["identities"]["raw-vs-reduced"] < 1e-12


class TestConfigFile:
    def test_config_supplies_defaults_flags_override(self, tmp_path):
        cfg = tmp_path / "run.cfg"
        cfg.write_text(
            "# experiment defaults\n"
            "kernel=ginibre\n"
            "function=gaussian-bump\n"
            f"out={tmp_path / 'from_cfg'}\n"
        )
        code = run(["--config", str(cfg), "predict"])
        assert code == 0
        assert (tmp_path / "from_cfg" / "prediction.json").exists()
        # flag overrides the config kernel
        code = run(
            [
                "--config",
                str(cfg),
                "predict",
                "--kernel",
                "poisson lambda=2",
                "--out",
                str(tmp_path / "override"),
            ]
        )
        assert code == 0
        payload = json.loads((tmp_path / "override" / "prediction.json").read_text())
        assert payload["kernel"].startswith("poisson")

    def test_missing_required_is_domain_error(self, tmp_path, capsys):
        assert run(["predict", "--out", str(tmp_path)]) == 2
        assert "missing required options" in capsys.readouterr().err

    def test_unknown_config_key_rejected(self, tmp_path):
        cfg = tmp_path / "bad.cfg"
        cfg.write_text("flux_capacitance=1\n")
        assert run(["--config", str(cfg), "verify", "--suite", "qm-reduction"]) == 2
