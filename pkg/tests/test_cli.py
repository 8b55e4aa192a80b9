import csv
import io
import json

import pytest

from locc_spectrum import __version__, cli
from locc_spectrum.lemma_verify import ViolationReport


def run_cli(capsys, *argv):
    status = cli.main(list(argv))
    out = capsys.readouterr()
    return status, out.out, out.err


def csv_body(text):
    lines = [ln for ln in text.splitlines() if not ln.startswith("#")]
    return list(csv.DictReader(io.StringIO("\n".join(lines))))


def config_line(text):
    line = next(ln for ln in text.splitlines() if ln.startswith("# config="))
    return json.loads(line[len("# config="):])


class TestCommands:
    def test_estimate_csv(self, capsys):
        status, out, _ = run_cli(capsys, "estimate", "--spectrum", "0.7", "--n", "1000")
        assert status == 0
        assert out.splitlines()[0] == f"# artifact_version={__version__}"
        rows = csv_body(out)
        assert [r["k"] for r in rows] == ["0", "1"]
        assert sum(float(r["p_hat"]) for r in rows) == pytest.approx(1.0)
        assert sum(int(r["count"]) for r in rows) == 1000 - 3 * int(1000**0.6 / 3)

    def test_estimate_json(self, capsys):
        status, out, _ = run_cli(capsys, "estimate", "--spectrum", "0.5,0.3", "--n", "2000", "--format", "json",
                                 "--frame", "random")
        assert status == 0
        doc = json.loads(out)
        assert doc["provenance"]["artifact_version"] == __version__
        assert doc["provenance"]["config"]["d"] == 3
        assert len(doc["results"]["p_hat"]) == 3

    def test_bench_qcrb(self, capsys):
        status, out, _ = run_cli(capsys, "bench-qcrb", "--n-grid", "1000,2000", "--trials", "5", "--seed", "1")
        assert status == 0
        rows = csv_body(out)
        assert [r["N"] for r in rows] == ["1000", "2000"]
        assert all(float(r["target"]) == pytest.approx(0.21) for r in rows)

    def test_sweep_mu(self, capsys):
        status, out, _ = run_cli(capsys, "sweep-mu", "--n-grid", "1000", "--mu-list", "0.3,0.6", "--trials", "5")
        assert status == 0
        assert {r["mu"] for r in csv_body(out)} == {"0.3", "0.6"}

    def test_verify_lemma1(self, capsys):
        status, out, _ = run_cli(capsys, "verify-lemma1", "--trials", "30", "--format", "json")
        assert status == 0
        doc = json.loads(out)
        assert doc["results"]["samples_tested"] == 30
        assert doc["results"]["total_violations"] == 0

    def test_verify_tails(self, capsys):
        status, out, _ = run_cli(capsys, "verify-tails", "--n-grid", "1000", "--epsilon-list", "0.5",
                                 "--trials", "20")
        assert status == 0
        rows = csv_body(out)
        assert rows[0]["check"] == "chernoff-summary" and rows[0]["observed"] == "0"
        assert rows[1]["check"] == "tail" and rows[1]["ok"] == "True"

    def test_entangle(self, capsys):
        status, out, _ = run_cli(capsys, "entangle", "--n", "5000", "--trials", "10", "--format", "json")
        assert status == 0
        res = json.loads(out)["results"]
        assert res["true_entropy"] == 1.0
        assert 0.9 < res["estimate_mean"] <= 1.0


class TestExitCodes:
    def test_spectrum_outside_simplex(self, capsys):
        status, _, err = run_cli(capsys, "estimate", "--spectrum", "0.7,0.6")
        assert status == 1
        assert "spectrum" in err and "Theta membership" in err

    @pytest.mark.parametrize("argv, field", [
        (("estimate", "--mu", "1.5"), "mu"),
        (("estimate", "--n", "0"), "n"),
        (("estimate", "--d", "3", "--spectrum", "0.7"), "d"),
        (("bench-qcrb", "--n-grid", "1000", "--trials", "1"), "trials"),
    ])
    def test_invalid_field_named(self, capsys, argv, field):
        status, _, err = run_cli(capsys, *argv)
        assert status == 1
        assert err.startswith(f"error: {field}")

    def test_unparseable_flag(self, capsys):
        with pytest.raises(SystemExit) as exc:
            cli.main(["estimate", "--n", "many"])
        assert exc.value.code == 1

    def test_unknown_config_key(self, capsys, tmp_path):
        cfg = tmp_path / "c.yaml"
        cfg.write_text("bogus: 1\n")
        status, _, err = run_cli(capsys, "estimate", "--config", str(cfg))
        assert status == 1 and "bogus" in err

    def test_bad_yaml(self, capsys, tmp_path):
        cfg = tmp_path / "c.yaml"
        cfg.write_text("n: [1,\n")
        assert run_cli(capsys, "estimate", "--config", str(cfg))[0] == 1

    def test_lemma_failure_exits_2(self, capsys, monkeypatch):
        bad = ViolationReport(samples_tested=1)
        bad.violations[5] = 1
        monkeypatch.setattr(cli, "lemma1_suite", lambda *a, **k: bad)
        assert run_cli(capsys, "verify-lemma1", "--trials", "1")[0] == 2

    def test_tail_failure_exits_2(self, capsys, monkeypatch):
        monkeypatch.setattr(cli, "tail_probability_bound", lambda *a, **k: 0.0)
        monkeypatch.setattr(cli, "empirical_tail", lambda *a, **k: 0.5)
        status, out, _ = run_cli(capsys, "verify-tails", "--n-grid", "1000", "--epsilon-list", "0.5", "--trials", "10")
        assert status == 2
        assert csv_body(out)[1]["ok"] == "False"


class TestConfig:
    def test_file_and_override(self, capsys, tmp_path):
        cfg = tmp_path / "c.yaml"
        cfg.write_text("spectrum: [0.5, 0.3]\nn: 3000\nmu: 0.7\nseed: 11\n")
        status, out, _ = run_cli(capsys, "estimate", "--config", str(cfg), "--n", "4000")
        assert status == 0
        resolved = config_line(out)
        assert resolved["n"] == 4000 and resolved["mu"] == 0.7 and resolved["seed"] == 11
        assert resolved["spectrum"] == [0.5, 0.3]

    def test_json_config(self, capsys, tmp_path):
        cfg = tmp_path / "c.json"
        cfg.write_text(json.dumps({"n_grid": [1000], "mu_list": [0.5], "trials": 3}))
        status, out, _ = run_cli(capsys, "sweep-mu", "--config", str(cfg))
        assert status == 0
        assert config_line(out)["trials"] == 3

    def test_defaults_resolved(self, capsys):
        _, out, _ = run_cli(capsys, "estimate")
        resolved = config_line(out)
        assert resolved["seed"] == 42 and resolved["n"] == 10_000 and resolved["d"] == 2
        assert "out" not in resolved


class TestReproducibility:
    @pytest.mark.parametrize("argv", [
        ("estimate", "--spectrum", "0.5,0.3", "--frame", "random"),
        ("bench-qcrb", "--n-grid", "1000", "--trials", "4"),
        ("verify-lemma1", "--trials", "20", "--format", "json"),
    ])
    def test_byte_identical(self, tmp_path, argv):
        a, b = tmp_path / "a", tmp_path / "b"
        assert cli.main([*argv, "--out", str(a)]) == 0
        assert cli.main([*argv, "--out", str(b)]) == 0
        assert a.read_bytes() == b.read_bytes()

    def test_seed_changes_output(self, capsys):
        _, a, _ = run_cli(capsys, "estimate", "--seed", "1")
        _, b, _ = run_cli(capsys, "estimate", "--seed", "2")
        assert csv_body(a) != csv_body(b)
