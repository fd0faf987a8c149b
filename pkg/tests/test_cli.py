import hashlib
from pathlib import Path

import pytest

from sysforecast.cli import Settings, load_config_file, main, resolve_settings

FAST_CONFIG = """
# small-but-complete run for CLI behavior tests
n_windows = 160
dim = 4
embed_epochs = 1
max_corpus_sentences = 24
hidden = 4
epochs = 2
history = 4
horizon = 1
histories = 2,4
horizons = 1,2
"""

PIPELINE_FILES = [
    "events.jsonl",
    "telemetry.csv",
    "embeddings.json",
    "model.json",
    "grid.csv",
    "grid.svg",
]


def tree_digest(root: Path) -> dict:
    return {
        p.relative_to(root).as_posix(): hashlib.sha256(p.read_bytes()).hexdigest()
        for p in sorted(root.rglob("*"))
        if p.is_file()
    }


@pytest.fixture()
def fast_config(tmp_path):
    path = tmp_path / "fast.cfg"
    path.write_text(FAST_CONFIG)
    return path


class TestPipeline:
    def test_produces_all_artifacts(self, tmp_path, fast_config, capsys):
        out = tmp_path / "run1"
        code = main(
            ["pipeline", "--config", str(fast_config), "--seed", "1", "--out", str(out)]
        )
        assert code == 0
        for name in PIPELINE_FILES:
            assert (out / name).is_file(), name
        stdout = capsys.readouterr().out
        assert "synth:" in stdout and "eval:" in stdout

    def test_identical_seeds_give_identical_trees(self, tmp_path, fast_config):
        out_a, out_b = tmp_path / "a", tmp_path / "b"
        assert main(["pipeline", "--config", str(fast_config), "--seed", "1", "--out", str(out_a)]) == 0
        assert main(["pipeline", "--config", str(fast_config), "--seed", "1", "--out", str(out_b)]) == 0
        assert tree_digest(out_a) == tree_digest(out_b)

    def test_different_seed_changes_artifacts(self, tmp_path, fast_config):
        out_a, out_b = tmp_path / "a", tmp_path / "b"
        main(["pipeline", "--config", str(fast_config), "--seed", "1", "--out", str(out_a)])
        main(["pipeline", "--config", str(fast_config), "--seed", "2", "--out", str(out_b)])
        assert tree_digest(out_a) != tree_digest(out_b)


class TestStagedSubcommands:
    def test_synth_then_embed_then_train_then_eval(self, tmp_path, fast_config):
        out = tmp_path / "run"
        base = ["--config", str(fast_config), "--seed", "5", "--out", str(out)]
        assert main(["synth", *base]) == 0
        assert main(["embed", *base]) == 0
        assert main(["train", *base]) == 0
        assert main(["eval", *base]) == 0
        for name in PIPELINE_FILES:
            assert (out / name).is_file(), name

    def test_eval_degenerate_split_exits_2(self, tmp_path, fast_config, capsys):
        out = tmp_path / "run"
        base = ["--config", str(fast_config), "--seed", "5", "--out", str(out)]
        assert main(["synth", *base]) == 0
        assert main(["embed", *base]) == 0
        code = main(["eval", *base, "--horizons", "500"])
        assert code == 2
        err = capsys.readouterr().err
        assert "horizon=500" in err and "history=" in err

    def test_train_without_inputs_exits_2(self, tmp_path, capsys):
        code = main(["train", "--out", str(tmp_path / "none")])
        assert code == 2


class TestUsageErrors:
    def test_unknown_flag(self, capsys):
        assert main(["pipeline", "--frobnicate"]) == 1
        assert "sysforecast" in capsys.readouterr().err

    def test_unknown_subcommand(self, capsys):
        assert main(["dance"]) == 1

    def test_no_subcommand(self, capsys):
        assert main([]) == 1

    def test_unknown_config_key(self, tmp_path, capsys):
        cfg = tmp_path / "bad.cfg"
        cfg.write_text("epochz = 10\n")
        assert main(["synth", "--config", str(cfg)]) == 1
        assert "epochz" in capsys.readouterr().err

    def test_bad_config_value(self, tmp_path):
        cfg = tmp_path / "bad.cfg"
        cfg.write_text("epochs = banana\n")
        assert main(["synth", "--config", str(cfg)]) == 1

    def test_config_line_without_equals(self, tmp_path):
        cfg = tmp_path / "bad.cfg"
        cfg.write_text("epochs\n")
        assert main(["synth", "--config", str(cfg)]) == 1

    def test_collect_without_command(self, tmp_path):
        assert main(["collect", "--out", str(tmp_path)]) == 1


class TestSettingsResolution:
    def test_file_overrides_defaults(self, tmp_path):
        cfg = tmp_path / "c.cfg"
        cfg.write_text("epochs = 7\nhorizons = 2,4  # inline comment\n")
        values = load_config_file(cfg)
        assert values == {"epochs": 7, "horizons": (2, 4)}

    def test_flags_override_file(self, tmp_path, fast_config):
        from sysforecast.cli import build_parser

        args = build_parser().parse_args(
            ["train", "--config", str(fast_config), "--epochs", "9"]
        )
        settings = resolve_settings(args)
        assert settings.epochs == 9          # flag wins
        assert settings.hidden == 4          # file wins over default
        assert settings.batch_size == 32     # default preserved

    def test_paths_derived_from_out(self):
        settings = Settings(out="somewhere")
        assert settings.events_path == Path("somewhere/events.jsonl")
        assert settings.model_path == Path("somewhere/model.json")

    def test_explicit_paths_override_out(self):
        settings = Settings(out="x", events="elsewhere/ev.jsonl")
        assert settings.events_path == Path("elsewhere/ev.jsonl")
