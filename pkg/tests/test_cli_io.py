import csv
import io
import json
import subprocess
import sys

import numpy as np
import pytest

from epicure.cli import dispatch, load_result, main, parse_grid
from epicure.dynamics import EpidemicParams
from epicure.errors import ParseError, ValidationError
from epicure.network import from_moments
from epicure.scenarios import (
    Scenario,
    bundled_names,
    bundled_scenario,
    cross_apply,
    load_scenario,
    scenario_from_dict,
)


def base_doc(**over):
    doc = {
        "schema": 1,
        "network": {"type": "moments", "mean_degree": 1.996, "second_moment": 13.75},
        "params": {"zeta1": 0.3, "zeta2": 0.3, "gamma1": 0.5, "gamma2": 0.3},
        "cost": {"K1": 15, "K2": 10, "K3": 50},
    }
    doc.update(over)
    return doc


def write(tmp_path, doc, name="s.json"):
    path = tmp_path / name
    path.write_text(json.dumps(doc))
    return path


class TestLoad:
    def test_bundled_scenario_one(self):
        sc = bundled_scenario("scenario1")
        assert (sc.params.gamma1, sc.params.gamma2) == (0.5, 0.3)
        assert (sc.cost.K1, sc.cost.K2, sc.cost.K3) == (15, 10, 50)
        assert sc.network.mean_degree == pytest.approx(1.996, abs=1e-9)
        assert sc.network.second_moment == pytest.approx(13.75, abs=1e-9)
        assert sc.moments_only

    def test_all_bundled_load(self):
        names = bundled_names()
        assert {"scenario1", "scenario2", "fig4", "fig5", "mismatch"} <= set(names)
        for name in names:
            assert isinstance(bundled_scenario(name), Scenario)

    def test_negative_zeta(self, tmp_path):
        doc = base_doc(params={"zeta1": -0.3, "zeta2": 0.3, "gamma1": 0.5, "gamma2": 0.3})
        with pytest.raises(ValidationError, match="zeta1 > 0"):
            load_scenario(write(tmp_path, doc))

    def test_jensen(self, tmp_path):
        doc = base_doc(network={"type": "moments", "mean_degree": 2, "second_moment": 1})
        with pytest.raises(ValidationError):
            load_scenario(write(tmp_path, doc))

    def test_parse_error_has_line(self, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text('{\n  "schema": 1,\n  "network": }\n')
        with pytest.raises(ParseError, match="line 3"):
            load_scenario(path)

    @pytest.mark.parametrize(
        "doc,field",
        [
            (base_doc(extra=1), "extra"),
            (base_doc(schema=2), "schema"),
            ({k: v for k, v in base_doc().items() if k != "params"}, "params"),
            (base_doc(network={"type": "ring"}), "network.type"),
            (base_doc(params={"zeta1": "x", "zeta2": 0.3, "gamma1": 0.5, "gamma2": 0.3}), "params.zeta1"),
            (base_doc(cost={"K1": 1, "K2": 1, "K3": 1, "K4": 1}), "K4"),
        ],
    )
    def test_structural_errors_name_field(self, doc, field):
        with pytest.raises(ParseError, match=field):
            scenario_from_dict(doc)

    def test_network_kinds(self):
        for net in (
            {"type": "pmf", "pmf": [0, 0.5, 0.5]},
            {"type": "pmf", "counts": [0, 3, 1]},
            {"type": "power_law", "k_min": 1, "k_max": 20, "exponent": 3},
            {"type": "ba", "n": 100, "m": 1, "seed": 4},
        ):
            sc = scenario_from_dict(base_doc(network=net))
            assert not sc.moments_only

    def test_round_trip(self):
        sc = bundled_scenario("fig5")
        again = scenario_from_dict(json.loads(json.dumps(sc.to_dict())))
        assert again.network == sc.network and again.params == sc.params and again.cost == sc.cost

    def test_seed_override(self):
        sc = bundled_scenario("fig4")
        assert sc.with_seed(9).network.second_moment == pytest.approx(12.396)


class TestCrossApply:
    def test_paper_direction(self):
        sc = bundled_scenario("mismatch")
        a = sc.network
        b = from_moments(1.996, 10.36)
        report = cross_apply(a, b, sc.params).to_dict()
        assert report["a_under_b"]["survivor"]
        assert not report["b_under_a"]["survivor"]
        assert not report["a_under_a"]["survivor"] and not report["b_under_b"]["survivor"]

    def test_identical_networks(self):
        sc = bundled_scenario("scenario1")
        report = cross_apply(sc, sc)
        for key in ("a_under_b", "b_under_a"):
            assert not report.to_dict()[key]["survivor"]
            assert report.to_dict()[key]["margin_flag"]

    def test_requires_shared_params(self):
        with pytest.raises(ValidationError):
            cross_apply(bundled_scenario("scenario1"), bundled_scenario("scenario2"))

    def test_asymmetry_property(self):
        rng = np.random.default_rng(9)
        for _ in range(20):
            mu1 = rng.uniform(1.5, 4)
            lo = mu1 * mu1 + rng.uniform(0.5, 5)
            hi = lo + rng.uniform(0.5, 10)
            a, b = from_moments(mu1, hi), from_moments(mu1, lo)
            z = rng.uniform(0.1, 0.5)
            params = EpidemicParams(z, z * rng.uniform(0.5, 1), rng.uniform(0.1, 0.5), rng.uniform(0.1, 0.5))
            report = cross_apply(a, b, params).to_dict()
            design_b = report["design_b"]
            r_a = a.branching_ratio
            needs = any(
                zeta * r_a / (gamma + u) > 1
                for zeta, gamma, u in (
                    (params.zeta1, params.gamma1, design_b["u1"]),
                    (params.zeta2, params.gamma2, design_b["u2"]),
                )
            )
            if needs:
                assert report["a_under_b"]["survivor"]
            assert not report["b_under_a"]["survivor"]


class TestDispatch:
    def test_classify_disease_free(self, tmp_path):
        # regular c=3 network: t = psi * 3 -> (0.6, 0.9)
        doc = base_doc(
            network={"type": "pmf", "pmf": [0, 0, 0, 1]},
            params={"zeta1": 0.2, "zeta2": 0.3, "gamma1": 1.0, "gamma2": 1.0},
        )
        sc = scenario_from_dict(doc)
        assert dispatch("classify", sc, tmp_path) == 0
        out = json.loads((tmp_path / "result.json").read_text())
        assert out["result"]["class"] == "DiseaseFree"
        assert out["result"]["t1"] == pytest.approx(0.6)

    def test_solve_free_fig2_columns(self, tmp_path):
        cols = {}
        for name in ("scenario1", "scenario2"):
            assert dispatch("solve-free", bundled_scenario(name), tmp_path / name) == 0
            rows = list(csv.DictReader(io.StringIO((tmp_path / name / "solve_free.csv").read_text())))
            cols[name] = rows
        assert [r["u1"] for r in cols["scenario1"]] == [r["u1"] for r in cols["scenario2"]]
        for a, b in zip(cols["scenario1"], cols["scenario2"]):
            assert float(b["objective"]) <= float(a["objective"])

    def test_sweep_fig4(self, tmp_path):
        assert dispatch("sweep", bundled_scenario("fig4"), tmp_path, grid={"start": 10, "stop": 0.001, "num": 31}) == 0
        trans = json.loads((tmp_path / "transitions.json").read_text())
        assert len(trans["transitions"]) == 1
        assert trans["transitions"][0]["u"] == pytest.approx(0.978, abs=5e-3)
        assert (tmp_path / "profile.csv").read_text().startswith("scale,u,regime,ibar1,ibar2,objective\n")

    def test_moments_only_refused(self, tmp_path, capsys):
        status = dispatch("solve-exclusive", bundled_scenario("scenario1"), tmp_path)
        assert status == 2
        err = json.loads(capsys.readouterr().err)
        assert err["error"] == "ValidationError"
        assert not (tmp_path / "result.json").exists()

    def test_unknown_command(self, tmp_path, capsys):
        assert dispatch("fly", bundled_scenario("scenario1"), tmp_path) != 0
        assert "unknown command" in json.loads(capsys.readouterr().err)["message"]

    @pytest.mark.parametrize(
        "command,name",
        [
            ("simulate", "scenario1_ba"),
            ("classify", "fig4"),
            ("steady-state", "fig5"),
            ("solve-free", "scenario1"),
            ("solve-exclusive", "scenario1_ba"),
            ("solve-global", "scenario2_ba"),
            ("cross-apply", "mismatch"),
        ],
    )
    def test_round_trip_and_determinism(self, tmp_path, command, name):
        sc = bundled_scenario(name)
        grid = {"start": 0.2, "stop": 0.6, "num": 3} if command.startswith("solve-") else None
        assert dispatch(command, sc, tmp_path / "a", grid=grid) == 0
        assert dispatch(command, sc, tmp_path / "b", grid=grid) == 0
        doc = load_result(tmp_path / "a" / "result.json")
        assert doc["command"] == command
        for fname in doc["files"] + ["result.json"]:
            first = (tmp_path / "a" / fname).read_bytes()
            assert first == (tmp_path / "b" / fname).read_bytes()
            assert b"\r" not in first
        assert not list((tmp_path / "a").glob(".*.tmp"))

    def test_load_result_rejects_garbage(self, tmp_path):
        path = tmp_path / "result.json"
        path.write_text(json.dumps({"schema": 1, "command": "classify"}))
        with pytest.raises(ParseError):
            load_result(path)


class TestMain:
    def test_parse_grid(self):
        assert parse_grid("0.1:1:10") == {"start": 0.1, "stop": 1.0, "num": 10}
        with pytest.raises(ParseError):
            parse_grid("1:2")
        with pytest.raises(ParseError):
            parse_grid("a:b:c")

    def test_main_success(self, tmp_path):
        path = write(tmp_path, base_doc())
        assert main(["solve-free", "--scenario", str(path), "--out", str(tmp_path / "o"), "--grid", "0.1:0.5:5"]) == 0
        text = (tmp_path / "o" / "solve_free.csv").read_text()
        assert text.splitlines()[0] == "zeta,u1,u2,objective"
        assert len(text.splitlines()) == 6

    def test_main_bad_file(self, tmp_path, capsys):
        path = tmp_path / "x.json"
        path.write_text("{")
        assert main(["classify", "--scenario", str(path), "--out", str(tmp_path)]) == 2
        assert json.loads(capsys.readouterr().err)["error"] == "ParseError"

    def test_main_seed_and_tol(self, tmp_path):
        sc = bundled_scenario("fig4").to_dict()
        path = write(tmp_path, sc)
        assert main(["classify", "--scenario", str(path), "--out", str(tmp_path / "o"), "--seed", "9", "--tol", "1e-6"]) == 0
        doc = load_result(tmp_path / "o" / "result.json")
        assert doc["scenario"]["network"]["seed"] == 9

    def test_main_bundled_name(self, tmp_path, monkeypatch):
        monkeypatch.chdir(tmp_path)
        assert main(["sweep", "--scenario", "fig5", "--out", "o", "--grid", "10:0.001:21"]) == 0
        doc = json.loads((tmp_path / "o" / "transitions.json").read_text())
        assert len(doc["transitions"]) == 2
        assert load_result(tmp_path / "o" / "result.json")["scenario"]["name"] == bundled_scenario("fig5").name

    def test_main_unknown_name(self, tmp_path, capsys):
        missing = str(tmp_path / "nope")
        assert main(["classify", "--scenario", missing, "--out", str(tmp_path)]) == 2
        assert json.loads(capsys.readouterr().err)["error"] == "ParseError"

    def test_console_script(self, tmp_path):
        path = write(tmp_path, base_doc())
        proc = subprocess.run(
            [sys.executable, "-m", "epicure.cli", "classify", "--scenario", str(path), "--out", str(tmp_path / "o")],
            capture_output=True,
            text=True,
        )
        assert proc.returncode == 0, proc.stderr
        assert json.loads((tmp_path / "o" / "result.json").read_text())["result"]["class"] == "ExclusiveStrain2"
