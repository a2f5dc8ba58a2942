import csv
import json

import numpy as np
import pytest
from scipy.integrate import trapezoid

from mfbs.calibration import ClassicalSpec, MultifractionalSpec, generate_synthetic_quotes
from mfbs.cli import main, parse_hurst, parse_quotes, write_quotes
from mfbs.errors import DomainError, EmptyInputError, ParseError
from mfbs.hurst import ConstantHurst, SinusoidalHurst, TabulatedHurst

SPOT, RATE = 3970.99, 0.045013


def _write(path, text):
    path.write_text(text, encoding="utf-8")
    return path


def _run(argv, capsys):
    code = main([str(a) for a in argv])
    return code, capsys.readouterr()


class TestParseQuotes:
    def test_spx_configuration(self, tmp_path):
        # spot/strike/rate from the SPX experiment; mids are placeholders
        p = _write(tmp_path / "q.csv", "maturity_days,strike,mid_price\n21,3970,95.4\n1,3970,22.1\n")
        qs = parse_quotes(p, SPOT, RATE)
        assert len(qs) == 2
        assert [q.maturity_days for q in qs.quotes] == [1, 21]
        assert qs.spot == SPOT and qs.rate == RATE

    def test_header_only(self, tmp_path):
        with pytest.raises(EmptyInputError):
            parse_quotes(_write(tmp_path / "q.csv", "maturity_days,strike,mid_price\n"), SPOT, RATE)

    def test_empty_file(self, tmp_path):
        with pytest.raises(EmptyInputError):
            parse_quotes(_write(tmp_path / "q.csv", ""), SPOT, RATE)

    def test_zero_maturity(self, tmp_path):
        p = _write(tmp_path / "q.csv", "maturity_days,strike,mid_price\n1,3970,22.1\n0,3970,5\n")
        with pytest.raises(ParseError) as exc:
            parse_quotes(p, SPOT, RATE)
        assert exc.value.line == 3

    @pytest.mark.parametrize("row", ["1,3970", "x,3970,1", "1,3970,abc", "1.5,3970,2", "1,3.970,00,2"])
    def test_malformed(self, tmp_path, row):
        p = _write(tmp_path / "q.csv", f"maturity_days,strike,mid_price\n{row}\n")
        with pytest.raises(ParseError) as exc:
            parse_quotes(p, SPOT, RATE)
        assert exc.value.line == 2

    def test_bad_header(self, tmp_path):
        with pytest.raises(ParseError):
            parse_quotes(_write(tmp_path / "q.csv", "days,strike,mid\n1,3970,2\n"), SPOT, RATE)

    def test_duplicates(self, tmp_path):
        p = _write(tmp_path / "q.csv", "maturity_days,strike,mid_price\n1,3970,2\n1,3970.0,3\n")
        with pytest.raises(ParseError, match="duplicate"):
            parse_quotes(p, SPOT, RATE)

    def test_round_trip(self, tmp_path):
        qs = generate_synthetic_quotes(MultifractionalSpec(0.08, 1.0, 0.55, 0.18), SPOT, RATE,
                                       [1, 6, 12, 50, 105], noise_std=0.5, strike=3970, seed=2)
        write_quotes(qs, tmp_path / "q.csv")
        assert parse_quotes(tmp_path / "q.csv", SPOT, RATE) == qs


class TestParseHurst:
    def test_grammar(self, tmp_path):
        assert parse_hurst("const:0.5") == ConstantHurst(0.5)
        assert parse_hurst("sin:0.1,0,0.5") == SinusoidalHurst(0.1, 0.0, 0.5)
        assert parse_hurst("sin:0.1,0,0.5,2").frequency == 2.0
        p = _write(tmp_path / "h.csv", "t_years,h\n0,0.4\n1,0.6\n")
        assert isinstance(parse_hurst(f"table:{p}"), TabulatedHurst)

    @pytest.mark.parametrize("text", ["0.5", "const:", "const:a", "sin:0.1,0", "cos:0.1,0,0.5", "const:1.2"])
    def test_bad(self, text):
        with pytest.raises(DomainError):
            parse_hurst(text)


class TestCommands:
    def test_price(self, capsys):
        code, out = _run(["price", "--spot", 100, "--strike", 100, "--rate", 0.05, "--sigma", 0.2,
                          "--maturity-days", 252, "--hurst", "const:0.5"], capsys)
        assert code == 0
        data = json.loads(out.out)
        assert data["schema_version"] == 1
        assert data["price"] == pytest.approx(10.4505835721855668, abs=1e-12)
        assert set(data) >= {"d1", "d2", "effective_variance", "degenerate_flag"}

    def test_density_integrates_to_one(self, tmp_path, capsys):
        out = tmp_path / "pdf.csv"
        code, _ = _run(["density", "--x0", 0, "--sigma", 0.2, "--hurst", "const:0.5", "--t", 1,
                        "--out", out], capsys)
        assert code == 0
        data = np.loadtxt(out, delimiter=",", skiprows=1)
        assert trapezoid(data[:, 1], data[:, 0]) == pytest.approx(1.0, abs=1e-6)

    def test_simulate(self, tmp_path, capsys):
        argv = ["simulate", "--spot", 100, "--sigma", 0.2, "--rate", 0.05, "--strike", 100,
                "--maturity", 1, "--hurst", "sin:0.1,0,0.5", "--paths", 20000, "--steps", 16,
                "--seed", 4, "--terminal-csv", tmp_path / "xt.csv"]
        code, out = _run(argv, capsys)
        assert code == 0
        data = json.loads(out.out)
        assert abs(data["call"]["value"] - data["closed_form_call"]) < 4 * data["call"]["standard_error"]
        with open(tmp_path / "xt.csv") as fh:
            assert sum(1 for _ in fh) == 20001
        _, again = _run(argv, capsys)
        assert again.out == out.out

    def test_sample_paths(self, tmp_path, capsys):
        out = tmp_path / "paths.csv"
        argv = ["sample-paths", "--hurst", "sin:0.1,0,0.5", "--times", "0.25,0.5,1.0",
                "--paths", 7, "--seed", 3, "--out", out]
        assert _run(argv, capsys)[0] == 0
        rows = list(csv.reader(out.open()))
        assert [float(t) for t in rows[0]] == [0.25, 0.5, 1.0]
        assert len(rows) == 8
        first = out.read_text()
        _run(argv, capsys)
        assert out.read_text() == first

    def test_calibrate_and_compare(self, tmp_path, capsys):
        qs = generate_synthetic_quotes(ClassicalSpec(0.2), SPOT, RATE, [1, 10, 30, 60, 105], strike=3970)
        write_quotes(qs, tmp_path / "q.csv")
        code, out = _run(["calibrate", "--quotes", tmp_path / "q.csv", "--spot", SPOT, "--rate", RATE,
                          "--model", "classical", "--restarts", 2], capsys)
        assert code == 0
        assert json.loads(out.out)["result"]["params"]["sigma"] == pytest.approx(0.2, abs=1e-6)

        argv = ["compare", "--quotes", tmp_path / "q.csv", "--spot", SPOT, "--rate", RATE,
                "--restarts", 2, "--out", tmp_path / "r.json", "--csv", tmp_path / "plot.csv"]
        assert _run(argv, capsys)[0] == 0
        report = json.loads((tmp_path / "r.json").read_text())
        assert report["schema_version"] == 1
        assert sorted(report["ranking"]) == ["classical", "fractional", "multifractional"]
        rows = list(csv.reader((tmp_path / "plot.csv").open()))
        assert rows[0] == ["maturity_days", "market_mid", "mf_price", "f_price", "bs_price"]
        assert len(rows) == 6
        first = (tmp_path / "r.json").read_text()
        _run(argv, capsys)
        assert (tmp_path / "r.json").read_text() == first


class TestExitCodes:
    def test_unknown_flag(self, capsys):
        with pytest.raises(SystemExit) as exc:
            main(["price", "--bogus"])
        assert exc.value.code == 2

    def test_unknown_command(self, capsys):
        with pytest.raises(SystemExit) as exc:
            main(["hedge"])
        assert exc.value.code == 2

    def test_validation_error(self, capsys):
        code, out = _run(["price", "--spot", -1, "--strike", 100, "--rate", 0.05, "--sigma", 0.2,
                          "--maturity", 1], capsys)
        assert code == 2 and "error" in out.err

    def test_missing_quotes_file(self, tmp_path, capsys):
        code, _ = _run(["compare", "--quotes", tmp_path / "none.csv", "--spot", SPOT, "--rate", RATE], capsys)
        assert code == 2

    def test_numerical_failure(self, tmp_path, capsys, monkeypatch):
        import mfbs.mbm as mbm

        monkeypatch.setattr(mbm, "covariance_matrix", lambda k, t: -np.eye(len(t)))
        code, out = _run(["sample-paths", "--times", "0.5,1", "--paths", 3], capsys)
        assert code == 1 and "numerical" in out.err
