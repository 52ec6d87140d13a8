import json
from fractions import Fraction

import pytest

from momentlab.cli import main
from momentlab.sequences import read_csv


def run(capsys, *args):
    code = main(list(args))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


class TestCompute:
    def test_bernoulli_square_closed_form(self, capsys):
        code, out, _ = run(capsys, "compute", "--family", "bernoulli", "--theta", "1/2",
                           "--p", "2", "--n", "1..10")
        assert code == 0
        seq = read_csv(out)
        theta = Fraction(1, 2)
        for n in seq.n_range:
            assert seq.value_at(n) == theta**2 + theta * (1 - theta) / n
        assert set(seq.provenance) == {"partition_formula"}

    def test_point_mass_constant_sequence(self, capsys):
        code, out, _ = run(capsys, "compute", "--dist", "point:1", "--p", "7", "--n", "1..8")
        assert code == 0
        seq = read_csv(out)
        assert all(seq.value_at(n) == 1 for n in seq.n_range)

    def test_dual_method_agreement_within_1e8(self, capsys):
        args = ["compute", "--family", "bernoulli", "--theta", "1/3", "--p", "1/2",
                "--n", "1..12"]
        code_q, out_q, _ = run(capsys, *args, "--method", "quadrature")
        code_b, out_b, _ = run(capsys, *args, "--method", "exact-binomial")
        assert code_q == 0 and code_b == 0
        sq, sb = read_csv(out_q), read_csv(out_b)
        for n in sq.n_range:
            assert abs(float(sq.value_at(n).value) - float(sb.value_at(n).value)) < 1e-8

    def test_json_format_roundtrips(self, capsys):
        code, out, _ = run(capsys, "compute", "--family", "bernoulli", "--theta", "1/2",
                           "--p", "2", "--n", "1..5", "--format", "json")
        assert code == 0
        data = json.loads(out)
        assert data["f"] == {"kind": "power", "p": "2"}
        assert data["entries"][0]["value"] == "1/2"

    def test_output_file(self, capsys, tmp_path):
        path = tmp_path / "seq.csv"
        code, out, _ = run(capsys, "compute", "--dist", "point:2", "--p", "1",
                           "--n", "1..3", "--output", str(path))
        assert code == 0 and out == ""
        assert read_csv(path.read_text()).value_at(2) == 2

    def test_inline_json_dist(self, capsys):
        spec = '{"atoms": [{"value": "1", "prob": "1/2"}, {"value": "3", "prob": "1/2"}]}'
        code, out, _ = run(capsys, "compute", "--dist", spec, "--p", "2", "--n", "1..4")
        assert code == 0
        assert read_csv(out).value_at(1) == 5

    def test_hinge_and_exp_functions(self, capsys):
        code, out, _ = run(capsys, "compute", "--family", "bernoulli", "--theta", "1/2",
                           "--f", "hinge:1/2", "--n", "1..5")
        assert code == 0
        assert read_csv(out).value_at(1) == Fraction(1, 4)
        code, out, _ = run(capsys, "compute", "--family", "bernoulli", "--theta", "1/2",
                           "--f", "exp:1", "--n", "1..5")
        assert code == 0
        assert set(read_csv(out).provenance) == {"laplace_power"}


class TestCheckExitCodes:
    def test_logconcave_bernoulli_sqrt_exits_zero(self, capsys):
        code, out, _ = run(capsys, "check", "logconcave", "--family", "bernoulli",
                           "--theta", "1/2", "--p", "1/2")
        assert code == 0
        assert json.loads(out)["status"] == "holds_within_tolerance"

    def test_logconvex_violation_exits_one(self, capsys):
        code, out, _ = run(capsys, "check", "logconvex", "--family", "bernoulli",
                           "--theta", "1/10", "--f", "hinge:1/5", "--n", "1..6")
        assert code == 1
        verdict = json.loads(out)
        assert verdict["status"] == "violated"
        assert verdict["certificate"]["n"] == 2

    def test_inconclusive_monte_carlo_exits_four(self, capsys):
        code, out, _ = run(capsys, "check", "logconvex", "--family", "exponential",
                           "--rate", "1", "--p", "2", "--method", "monte_carlo",
                           "--samples", "2000", "--seed", "5", "--n", "6..9")
        assert code == 4
        assert json.loads(out)["status"] == "inconclusive"

    def test_theorem4_random_pool(self, capsys):
        code, out, _ = run(capsys, "check", "theorem4", "--p", "3", "--dist", "random",
                           "--trials", "20", "--seed", "2")
        assert code == 0
        data = json.loads(out)
        assert data["status"] == "holds_exact"
        assert data["pool_size"] == 20
        assert data["n_window"] == [9, 39]

    def test_lemma7_margin_table(self, capsys):
        code, out, _ = run(capsys, "check", "lemma7", "--p", "5", "--m", "4")
        assert code == 0
        data = json.loads(out)
        assert data["status"] == "holds_exact"
        assert len(data["margin_table"]) == data["grid"][2]

    def test_remark5_random_pool(self, capsys):
        code, out, _ = run(capsys, "check", "remark5", "--p", "3", "--dist", "random",
                           "--trials", "10", "--seed", "6")
        assert code == 0
        assert json.loads(out)["status"] == "holds_exact"

    def test_remark6(self, capsys):
        code, out, _ = run(capsys, "check", "remark6", "--family", "bernoulli",
                           "--theta", "1/2", "--p", "1/4", "--n", "3")
        assert code == 0
        data = json.loads(out)
        assert data["paper_holds"] and data["boland_holds"] and data["factor_free_is_tighter"]


class TestSearch:
    def test_final_remark_exits_zero_with_exemplar(self, capsys):
        code, out, _ = run(capsys, "search", "final_remark")
        assert code == 0
        report = json.loads(out)
        assert len(report["violations"]) > 0
        first = report["violations"][0]
        assert (first["a"], first["theta"], first["n"]) == ("1/5", "1/10", 2)

    def test_conjecture4_no_violation(self, capsys):
        code, out, _ = run(capsys, "search", "conjecture4", "--p", "3", "--budget", "30",
                           "--n-max", "14", "--seed", "3")
        assert code == 0
        report = json.loads(out)
        assert report["violations"] == []
        assert Fraction(report["nearest_miss"]["slack_normalized"]) >= 0

    def test_remark8_scan(self, capsys):
        code, out, _ = run(capsys, "search", "remark8", "--trials", "2000", "--seed", "1")
        assert code == 0
        assert json.loads(out)["violations"] == []

    def test_search_reports_are_deterministic(self, capsys):
        _, out1, _ = run(capsys, "search", "conjecture4", "--p", "2", "--budget", "8",
                         "--seed", "9")
        _, out2, _ = run(capsys, "search", "conjecture4", "--p", "2", "--budget", "8",
                         "--seed", "9")
        assert out1 == out2


class TestConfigErrors:
    @pytest.mark.parametrize("args", [
        ("compute", "--family", "bernoulli", "--p", "2", "--n", "1..5"),        # theta missing
        ("compute", "--family", "bernoulli", "--theta", "1/2", "--n", "1..5"),  # p missing
        ("compute", "--dist", "point:1", "--p", "2", "--n", "9..3"),            # bad range
        ("compute", "--dist", "point:1", "--p", "x/y", "--n", "1..5"),          # bad rational
        ("compute", "--dist", "point:1", "--family", "bernoulli", "--theta", "1/2",
         "--p", "2", "--n", "1..5"),                                            # both sources
        ("compute", "--family", "bernoulli", "--theta", "1/2", "--p", "1/2",
         "--n", "1..5", "--method", "exact"),                                   # method mismatch
        ("check", "theorem4", "--p", "5/2"),                                    # non-integer p
        ("check", "remark6", "--family", "bernoulli", "--theta", "1/2",
         "--p", "3/4", "--n", "3"),                                             # p in [1/2,1)
        ("compute", "--dist", "point:1", "--p", "2", "--n", "1..5",
         "--precision-bits", "32"),                                             # precision floor
    ])
    def test_exit_code_two(self, capsys, args):
        code, _, err = run(capsys, *args)
        assert code == 2
        assert err.strip()

    def test_decimal_theta_is_parsed_exactly(self, capsys):
        # "0.5" converts exactly to 1/2 without a float step
        code, out, _ = run(capsys, "compute", "--family", "bernoulli", "--theta", "0.5",
                           "--p", "2", "--n", "1..3")
        assert code == 0
        assert read_csv(out).value_at(1) == Fraction(1, 2)


class TestPrecisionEnvVar:
    def test_env_override_recorded(self, capsys, monkeypatch):
        monkeypatch.setenv("MOMENTLAB_PRECISION_BITS", "128")
        code, out, _ = run(capsys, "compute", "--family", "bernoulli", "--theta", "1/2",
                           "--f", "exp:1", "--n", "1..4", "--format", "json")
        assert code == 0
        assert json.loads(out)["precision_bits"] == 128

    def test_flag_beats_env(self, capsys, monkeypatch):
        monkeypatch.setenv("MOMENTLAB_PRECISION_BITS", "128")
        code, out, _ = run(capsys, "compute", "--family", "bernoulli", "--theta", "1/2",
                           "--f", "exp:1", "--n", "1..4", "--format", "json",
                           "--precision-bits", "256")
        assert code == 0
        assert json.loads(out)["precision_bits"] == 256

    def test_bad_env_value_is_config_error(self, capsys, monkeypatch):
        monkeypatch.setenv("MOMENTLAB_PRECISION_BITS", "twelve")
        code, _, err = run(capsys, "compute", "--family", "bernoulli", "--theta", "1/2",
                           "--f", "exp:1", "--n", "1..4")
        assert code == 2 and err.strip()
