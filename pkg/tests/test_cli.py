import json

from tasep_rewind.cli import parse_and_dispatch


def run_cli(capsys, argv):
    code = parse_and_dispatch(argv)
    captured = capsys.readouterr()
    return code, captured.out, captured.err


class TestSimulate:
    def test_tasep_smoke_one_record(self, capsys):
        code, out, _ = run_cli(capsys, ["simulate", "--process", "tasep", "--t", "1", "--seed", "7", "--n", "1"])
        assert code == 0
        lines = out.strip().splitlines()
        assert len(lines) == 1
        record = json.loads(lines[0])
        assert record["time"] == 1.0 and isinstance(record["displacements"], list)

    def test_byte_identical_reruns(self, capsys):
        argv = ["simulate", "--process", "bhp", "--t", "1.5", "--tau", "0.4", "--seed", "11", "--n", "4"]
        _, first, _ = run_cli(capsys, argv)
        _, second, _ = run_cli(capsys, argv)
        assert first == second

    def test_pushblock_rows(self, capsys):
        code, out, _ = run_cli(capsys, ["simulate", "--process", "pushblock", "--t", "0.5", "--depth", "3", "--seed", "3"])
        assert code == 0
        record = json.loads(out.strip())
        assert len(record["rows"]) == 3

    def test_bernoulli_csv(self, capsys):
        code, out, _ = run_cli(capsys, ["simulate", "--process", "bernoulli", "--tau", "0.2", "--m", "5", "--seed", "2"])
        assert code == 0
        lines = out.strip().splitlines()
        assert lines[0] == "replica,column,height"
        assert len(lines) == 6


class TestVerify:
    def test_reversal_exact_report(self, capsys):
        code, out, _ = run_cli(
            capsys,
            ["verify", "reversal-exact", "--t", "0.5", "--tau", "0.693147", "--m", "12"],
        )
        assert code == 0
        report = json.loads(out)
        assert report["pass"] is True
        assert report["tv"] <= report["tolerance"]
        assert report["leak"] < 1e-6

    def test_gibbs_swap_quick(self, capsys):
        code, out, _ = run_cli(capsys, ["verify", "gibbs-swap", "--n", "4", "--seed", "5"])
        assert code == 0
        assert json.loads(out)["pass"] is True

    def test_harmonic(self, capsys):
        code, out, _ = run_cli(capsys, ["verify", "harmonic"])
        assert code == 0

    def test_failing_check_exits_one(self, capsys, monkeypatch):
        import tasep_rewind.verify as verify_mod

        monkeypatch.setattr(
            verify_mod, "check_harmonic", lambda **kw: {"name": "harmonic", "pass": False}
        )
        code, _, err = run_cli(capsys, ["verify", "harmonic"])
        assert code == 1
        assert "FAIL" in err


class TestTiling:
    def test_verify_exact(self, capsys):
        code, out, _ = run_cli(
            capsys, ["tiling", "verify", "--a", "2", "--b", "2", "--c", "2", "--q", "0.8"]
        )
        assert code == 0
        report = json.loads(out)
        assert report["pass"] is True and report["tv_swap"] <= 1e-12

    def test_render_svg_file(self, capsys, tmp_path):
        svg_path = tmp_path / "tiling.svg"
        code, _, _ = run_cli(
            capsys,
            ["tiling", "render", "--a", "1", "--b", "1", "--c", "1", "--sweeps", "2", "--seed", "1", "--svg", str(svg_path)],
        )
        assert code == 0
        assert svg_path.read_text().count("<polygon") == 3

    def test_sample_jsonl(self, capsys):
        code, out, _ = run_cli(
            capsys, ["tiling", "sample", "--a", "1", "--b", "2", "--c", "1", "--n", "2", "--sweeps", "3", "--seed", "9"]
        )
        assert code == 0
        rows = [json.loads(line) for line in out.strip().splitlines()]
        assert len(rows) == 2 and len(rows[0]["rows"]) == 2


class TestMisc:
    def test_unknown_flag_exits_two(self, capsys):
        code, _, _ = run_cli(capsys, ["simulate", "--process", "tasep", "--bogus", "1"])
        assert code == 2

    def test_density_csv(self, capsys):
        code, out, _ = run_cli(capsys, ["density", "--t", "30", "--runs", "2", "--bins", "6", "--seed", "4"])
        assert code == 0
        lines = out.strip().splitlines()
        assert lines[0] == "z,rho_empirical,rho_theory"
        assert len(lines) == 7

    def test_config_file_seed(self, capsys, tmp_path):
        cfg = tmp_path / "cfg.toml"
        cfg.write_text("seed = 7\n")
        argv_cfg = ["--config", str(cfg), "simulate", "--process", "tasep", "--t", "1", "--n", "1"]
        argv_seed = ["simulate", "--process", "tasep", "--t", "1", "--n", "1", "--seed", "7"]
        _, out_cfg, _ = run_cli(capsys, argv_cfg)
        _, out_seed, _ = run_cli(capsys, argv_seed)
        assert out_cfg == out_seed

    def test_env_seed_fallback(self, capsys, monkeypatch):
        monkeypatch.setenv("TASEP_REWIND_SEED", "7")
        argv = ["simulate", "--process", "tasep", "--t", "1", "--n", "1"]
        _, out_env, _ = run_cli(capsys, argv)
        monkeypatch.delenv("TASEP_REWIND_SEED")
        _, out_seed, _ = run_cli(capsys, argv + ["--seed", "7"])
        assert out_env == out_seed

    def test_out_file(self, capsys, tmp_path):
        out_path = tmp_path / "traj.jsonl"
        code, out, _ = run_cli(
            capsys,
            ["simulate", "--process", "tasep", "--t", "1", "--seed", "7", "--n", "2", "--out", str(out_path)],
        )
        assert code == 0 and out == ""
        assert len(out_path.read_text().strip().splitlines()) == 2
