import json

import numpy as np
import pytest

from serkit.cli import main, parse_grid


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


class TestGrid:
    def test_parse(self):
        np.testing.assert_allclose(parse_grid("1:100:3:log"), [1, 10, 100])
        np.testing.assert_allclose(parse_grid("0:1:3:lin"), [0, 0.5, 1])

    @pytest.mark.parametrize("spec", ["1:2:1:log", "0:1:5:log", "2:1:5:lin", "1:2:3", "1:2:3:cubic", "a:2:3:lin"])
    def test_rejects(self, spec):
        with pytest.raises(ValueError):
            parse_grid(spec)


class TestAnalyze:
    def test_qpsk(self, capsys, fixture_path):
        code, out, _ = run(capsys, "analyze", "--config", str(fixture_path("qpsk")))
        d = json.loads(out)
        assert code == 0
        assert d["reducedDim"] == 2 and d["dMin"] == pytest.approx(np.sqrt(2))
        assert "rho0" not in d and d["facetCounts"] == [2, 2, 2, 2]

    def test_cube(self, capsys, fixture_path):
        d = json.loads(run(capsys, "analyze", "--config", str(fixture_path("cube")))[1])
        assert d["reducedDim"] == 3
        assert d["rho0"] == pytest.approx(1.2071067811865475, rel=1e-12)

    def test_complex_fixture(self, capsys, fixture_path):
        d = json.loads(run(capsys, "analyze", "--config", str(fixture_path("complex_qpsk")))[1])
        assert d["N"] == 2 and d["M"] == 4

    def test_missing_file(self, capsys, tmp_path):
        missing = tmp_path / "nope.json"
        code, _, err = run(capsys, "analyze", "--config", str(missing))
        assert code == 2 and str(missing) in err

    def test_malformed(self, capsys, tmp_path):
        bad = tmp_path / "bad.json"
        bad.write_text('{"points": [[0, 0]]}')
        assert run(capsys, "analyze", "--config", str(bad))[0] == 2
        bad.write_text("{not json")
        assert run(capsys, "analyze", "--config", str(bad))[0] == 2

    def test_too_many_dimensions(self, capsys, tmp_path):
        cfg = tmp_path / "simplex.json"
        cfg.write_text(json.dumps({"points": np.eye(6).tolist()}))
        assert run(capsys, "ser-curve", "--config", str(cfg), "--seed", "1")[0] == 2


class TestSerCurve:
    def test_columns_and_agreement(self, capsys, fixture_path):
        code, out, _ = run(
            capsys, "ser-curve", "--config", str(fixture_path("cube")), "--seed", "3", "--grid", "0.5:5:3:log"
        )
        lines = out.splitlines()
        assert code == 0 and lines[0] == "rho,value,stderr,method"
        rows = [line.split(",") for line in lines[1:]]
        by = {}
        for r, v, s, m in rows:
            by.setdefault(m, []).append((float(r), float(v), float(s)))
        assert set(by) == {"closed_form", "quadrature", "mc"}
        for (_, a, _), (_, b, _), (_, c, s) in zip(by["closed_form"], by["quadrature"], by["mc"]):
            assert abs(a - b) < 1e-10
            assert abs(c - a) < 4 * s

    def test_mc_needs_seed(self, capsys, fixture_path):
        assert run(capsys, "ser-curve", "--config", str(fixture_path("qpsk")))[0] == 2

    def test_empty_grid(self, capsys, fixture_path):
        assert run(capsys, "ser-curve", "--config", str(fixture_path("qpsk")), "--seed", "1", "--grid", "1:2:0:lin")[0] == 2

    def test_compound_noise(self, capsys, tmp_path, fixture_path):
        cfg = tmp_path / "run.json"
        cfg.write_text(
            json.dumps(
                {
                    "constellation": str(fixture_path("qam16")),
                    "noise": {"family": "gamma", "shape": 2.0, "scale": 0.5},
                    "nSamples": 5000,
                    "seed": 4,
                    "grid": "1:10:2:log",
                }
            )
        )
        code, out, _ = run(capsys, "ser-curve", "--config", str(cfg))
        assert code == 0 and out.count(",mc") == 2

    def test_numerical_failure_exit(self, capsys, fixture_path, monkeypatch):
        import serkit.cli as cli
        from serkit.quadrature import QuadratureError

        def boom(*a, **k):
            raise QuadratureError("no convergence")

        monkeypatch.setattr(cli, "ser_quadrature_curve", boom)
        code, out, _ = run(capsys, "ser-curve", "--config", str(fixture_path("cube")), "--seed", "1", "--grid", "1:2:2:lin")
        assert code == 3
        assert out.splitlines()[0] == "rho,value,stderr,method,status"
        assert "quadrature,failed" in out and "closed_form,ok" in out


class TestOtherCommands:
    def test_cm_check(self, capsys, fixture_path):
        d = json.loads(run(capsys, "cm-check", "--config", str(fixture_path("qpsk")))[1])
        assert d["isCm"] == "yes" and d["basis"] == "reduced_dim_rule"
        d = json.loads(run(capsys, "cm-check", "--config", str(fixture_path("cube")), "--grid", "0.5:5:4:log")[1])
        assert d["isCm"] == "inconclusive"

    def test_fading_compare(self, capsys, fixture_path, tmp_path):
        code, _, _ = run(capsys, "fading-compare", "--config", str(fixture_path("nakagami_qpsk")), "--out", str(tmp_path))
        d = json.loads((tmp_path / "fading_compare.json").read_text())
        assert code == 0 and d["orders"]["0"]["relation"] == "first_dominates" and d["consistent"]
        csv = (tmp_path / "fading_ser.csv").read_text().splitlines()
        assert csv[0] == "rho,ser1,ser2" and len(csv) == 61

    def test_fading_compare_needs_pair(self, capsys, fixture_path):
        assert run(capsys, "fading-compare", "--config", str(fixture_path("qpsk")))[0] == 2

    def test_representing_fn(self, capsys, fixture_path):
        with pytest.warns(UserWarning, match="onset"):
            out = run(capsys, "representing-fn", "--config", str(fixture_path("qpsk")), "--grid", "0:4:41:lin")[1]
        rows = out.splitlines()
        assert rows[0] == "u,mu" and len(rows) == 42

    def test_decompose(self, capsys, fixture_path):
        d = json.loads(run(capsys, "decompose", "--config", str(fixture_path("qam16")))[1])
        assert len(d["symbols"]) == 16

    def test_deterministic_outputs(self, capsys, fixture_path, tmp_path):
        for k in (1, 2):
            run(
                capsys, "ser-curve", "--config", str(fixture_path("qam16")), "--seed", "9",
                "--grid", "1:10:3:log", "--out", str(tmp_path / str(k)),
            )
        a = (tmp_path / "1" / "ser_curve.csv").read_bytes()
        assert a == (tmp_path / "2" / "ser_curve.csv").read_bytes()

    def test_fixtures_listing(self, capsys):
        out = run(capsys, "fixtures")[1]
        assert "qam3d.json" in out
