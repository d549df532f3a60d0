import json

import pytest

import permsym.orbits
from permsym.channels import adc, choi_to_json, flagged, identity_channel
from permsym.cli import main


def run_cli(args, capsys):
    code = main(args)
    out = capsys.readouterr()
    return code, out.out, out.err


class TestTables:
    def test_dimension_summary_and_cache(self, tmp_path, capsys):
        code, out, _ = run_cli(
            ["tables", "--d", "2", "--n", "2", "--cache-dir", str(tmp_path)], capsys
        )
        assert code == 0
        assert "10 orbits" in out
        assert "built and cached" in out
        code, out, _ = run_cli(
            ["tables", "--d", "2", "--n", "2", "--cache-dir", str(tmp_path)], capsys
        )
        assert code == 0
        assert "cache hit" in out

    def test_flagged_counts(self, tmp_path, capsys):
        code, out, _ = run_cli(
            ["tables", "--d", "2", "--n", "3", "--flags", "2",
             "--cache-dir", str(tmp_path)], capsys
        )
        assert code == 0
        assert "120 orbits" in out

    def test_env_var_overrides_cache_dir(self, tmp_path, capsys, monkeypatch):
        env_dir = tmp_path / "env-cache"
        monkeypatch.setenv("PERMSYM_CACHE", str(env_dir))
        code, out, _ = run_cli(
            ["tables", "--d", "2", "--n", "1", "--cache-dir", str(tmp_path / "flag-cache")],
            capsys,
        )
        assert code == 0
        assert (env_dir / "cob_d2_n1.npz").exists()
        assert not (tmp_path / "flag-cache").exists()


class TestSeesawCommand:
    def test_adc_n4_meets_reference(self, tmp_path, capsys):
        out_file = tmp_path / "res.json"
        code, _, _ = run_cli(
            ["seesaw", "--channel", "adc", "--gamma", "0.1", "--n", "4", "--d", "2",
             "--seeds", "2", "--rng-seed", "3", "--out", str(out_file)], capsys
        )
        payload = json.loads(out_file.read_text())
        assert payload["final"]["fidelity"] >= 0.94868
        assert code in (0, 2)
        assert code == (0 if payload["converged"] else 2)
        assert payload["version"]

    def test_identity_channel_from_file(self, tmp_path, capsys):
        chan_file = tmp_path / "id.json"
        chan_file.write_text(choi_to_json(identity_channel(2)))
        out_file = tmp_path / "res.json"
        code, _, _ = run_cli(
            ["seesaw", "--channel", f"file:{chan_file}", "--n", "2", "--d", "2",
             "--seeds", "1", "--rng-seed", "0", "--out", str(out_file)], capsys
        )
        assert code == 0
        payload = json.loads(out_file.read_text())
        assert payload["final"]["fidelity"] == pytest.approx(1.0, abs=1e-6)

    def test_flagged_channel_from_file(self, tmp_path, capsys):
        chan_file = tmp_path / "flag.json"
        chan_file.write_text(choi_to_json(flagged([adc(0.1)], [1.0])))
        out_file = tmp_path / "res.json"
        code, _, _ = run_cli(
            ["seesaw", "--channel", f"flagged:{chan_file}", "--n", "1", "--d", "2",
             "--seeds", "1", "--rng-seed", "0", "--out", str(out_file)], capsys
        )
        assert code in (0, 2)

    def test_byte_identical_output_under_fixed_seed(self, tmp_path, capsys):
        files = []
        for i in (0, 1):
            out_file = tmp_path / f"r{i}.json"
            run_cli(
                ["seesaw", "--channel", "adc", "--gamma", "0.3", "--n", "2", "--d", "2",
                 "--seeds", "1", "--rng-seed", "11", "--out", str(out_file)], capsys
            )
            files.append(out_file.read_bytes())
        assert files[0] == files[1]

    def test_invalid_channel_json_exit_one(self, tmp_path, capsys):
        bad = tmp_path / "bad.json"
        bad.write_text('{"d_in": 2, "d_out": 2, "entries": [{"row": 0, "col": 99, "re": 1.0}]}')
        code, _, err = run_cli(
            ["seesaw", "--channel", f"file:{bad}", "--n", "1", "--d", "2"], capsys
        )
        assert code == 1
        assert "position 0" in err

    def test_missing_parameter_exit_one(self, capsys):
        code, _, err = run_cli(["seesaw", "--channel", "adc", "--n", "1", "--d", "2"], capsys)
        assert code == 1
        assert "gamma" in err


class TestSweepCommand:
    def test_row_count_and_reference_columns(self, tmp_path, capsys):
        out_file = tmp_path / "sweep.csv"
        code, _, _ = run_cli(
            ["sweep", "--family", "depolarizing", "--grid", "0,0.05,0.1,0.15,0.2",
             "--n-range", "1:3", "--seeds", "1", "--rng-seed", "2",
             "--max-outer", "40", "--out", str(out_file)], capsys
        )
        assert code == 0
        lines = out_file.read_text().strip().splitlines()
        header = [l for l in lines if l.startswith("param,")]
        rows = [l for l in lines if not l.startswith(("#", "param,"))]
        assert len(rows) == 15
        assert header[0] == "param,n,fidelity,best_flag,uncoded,fivequbit"
        for row in rows:
            p, n, fid, flag, uncoded, ref = row.split(",")
            assert float(uncoded) == pytest.approx(1 - 0.75 * float(p))

    def test_adc_zero_gamma_fidelity_one(self, tmp_path, capsys):
        out_file = tmp_path / "sweep.csv"
        code, _, _ = run_cli(
            ["sweep", "--family", "adc", "--grid", "0", "--n-range", "1:2",
             "--seeds", "1", "--rng-seed", "4", "--out", str(out_file)], capsys
        )
        assert code == 0
        rows = [l for l in out_file.read_text().strip().splitlines()
                if not l.startswith(("#", "param,"))]
        for row in rows:
            assert float(row.split(",")[2]) == pytest.approx(1.0, abs=1e-6)

    def test_best_flag_marks_exactly_one_per_param(self, tmp_path, capsys):
        out_file = tmp_path / "sweep.csv"
        run_cli(
            ["sweep", "--family", "adc", "--grid", "0.1,0.2", "--n-range", "1:2",
             "--seeds", "1", "--rng-seed", "6", "--max-outer", "60",
             "--out", str(out_file)], capsys
        )
        rows = [l.split(",") for l in out_file.read_text().strip().splitlines()
                if not l.startswith(("#", "param,"))]
        for p in ("0.1", "0.2"):
            flags = [int(r[3]) for r in rows if r[0] == p]
            assert sum(flags) == 1


class TestValidateCommand:
    def test_quick_level_passes(self, capsys):
        code, out, _ = run_cli(["validate", "--level", "quick"], capsys)
        assert code == 0
        assert "FAIL" not in out

    def test_fault_injection_fails_partial_trace_oracle(self, capsys, monkeypatch):
        real = permsym.orbits._kappa

        def corrupted(E, EA, dims, traced):
            value = real(E, EA, dims, traced)
            return -value if value > 1 else value

        monkeypatch.setattr(permsym.orbits, "_kappa", corrupted)
        code, out, err = run_cli(["validate", "--level", "quick"], capsys)
        assert code != 0
        assert "partial-trace-kappa" in err
