from pathlib import Path

import numpy as np
import pytest

from speakintent.audio import tone, write_wav
from speakintent.cli import main
from speakintent.sampling import read_manifest

DATA = Path(__file__).parent / "data"


def run_cli(*argv):
    return main([str(a) for a in argv])


@pytest.fixture(scope="module")
def synth_dir(tmp_path_factory):
    out = tmp_path_factory.mktemp("cli_synth")
    code = run_cli(
        "synth", "--out", out, "--participants", 2, "--duration", 600,
        "--unsuccessful-rate", 1.0, "--seed", 4,
    )
    assert code == 0
    return out


class TestSynthAndRun:
    def test_synth_layout(self, synth_dir):
        assert sorted(p.name for p in synth_dir.iterdir()) == ["accel", "annotations", "vad"]
        assert len(list((synth_dir / "vad").glob("*.vad"))) == 2

    def test_run_from_synth_output(self, synth_dir, tmp_path, capsys):
        code = run_cli(
            "run", "--data-dir", synth_dir, "--out-dir", tmp_path / "out",
            "--windows", "1", "--experiments", "successful", "--repetitions", 3,
            "--test-interval", "400:600", "--seed", 1, "--epochs", 2,
        )
        assert code == 0
        out = capsys.readouterr().out
        assert "auc[successful]" in out
        assert (tmp_path / "out" / "auc_table.txt").exists()

    def test_config_file_with_flag_override(self, synth_dir, tmp_path, capsys):
        cfg = tmp_path / "run.cfg"
        cfg.write_text(
            "\n".join(
                [
                    f"data_dir = {synth_dir}",
                    f"out_dir = {tmp_path / 'out_a'}",
                    "windows = 1",
                    "experiments = successful",
                    "repetitions = 3",
                    "test_interval = 400:600",
                    "seed = 1",
                    "epochs = 2",
                ]
            )
            + "\n"
        )
        assert run_cli("run", "--config", cfg) == 0
        # same config, flag moves the output directory
        assert run_cli("run", "--config", cfg, "--out-dir", tmp_path / "out_b") == 0
        a = (tmp_path / "out_a" / "auc_table.txt").read_bytes()
        b = (tmp_path / "out_b" / "auc_table.txt").read_bytes()
        assert a == b

    def test_unknown_config_key(self, tmp_path):
        cfg = tmp_path / "bad.cfg"
        cfg.write_text("nonsense = 1\n")
        assert run_cli("run", "--config", cfg) == 2

    def test_missing_required(self):
        assert run_cli("run", "--windows", "1") == 2

    def test_missing_data_dir_is_data_error(self, tmp_path):
        code = run_cli(
            "run", "--data-dir", tmp_path / "nope", "--out-dir", tmp_path / "out",
            "--windows", "1", "--experiments", "successful",
        )
        assert code == 3

    def test_infeasible_config_interval(self, synth_dir, tmp_path):
        code = run_cli(
            "run", "--data-dir", synth_dir, "--out-dir", tmp_path / "out",
            "--windows", "1", "--experiments", "successful", "--test-interval", "5000:6000",
        )
        assert code == 2


class TestStatsFromTable:
    def test_reference_table(self, tmp_path, capsys):
        code = run_cli("stats-from-table", "--table", DATA / "reference_auc_table.txt", "--out", tmp_path)
        assert code == 0
        out = capsys.readouterr().out
        assert "slope[all] = -0.0281" in out
        for name in ("pvalues_table.txt", "regression_table.txt", "welch_table.txt"):
            assert (tmp_path / name).exists()

    def test_single_row_table(self, tmp_path):
        table = tmp_path / "one.txt"
        table.write_text(
            "experiment   1s               2s\n"
            "successful   0.5690 (0.016)   0.5283 (0.015)\n"
        )
        assert run_cli("stats-from-table", "--table", table, "--out", tmp_path / "out") == 0
        pvals = (tmp_path / "out" / "pvalues_table.txt").read_text()
        assert "successful" in pvals
        welch = (tmp_path / "out" / "welch_table.txt").read_text()
        assert "1s" not in welch  # no start/continue pair to compare

    def test_malformed_table(self, tmp_path):
        table = tmp_path / "bad.txt"
        table.write_text("experiment 1s\nsuccessful nonsense\n")
        assert run_cli("stats-from-table", "--table", table, "--out", tmp_path / "out") == 3


class TestAudioCli:
    def test_filter_audio_summary(self, tmp_path, capsys):
        write_wav(tone(200.0, 0.3, 44100, amplitude=0.5), tmp_path / "in.wav", fmt="float32")
        code = run_cli(
            "filter-audio", "--in", tmp_path / "in.wav", "--out", tmp_path / "out.wav",
            "--cutoff-hz", 1500, "--gain", 20,
        )
        assert code == 0
        out = capsys.readouterr().out
        assert "input_rms=" in out and "clipped_samples=" in out
        assert (tmp_path / "out.wav").exists()

    def test_bad_cutoff_exit_code(self, tmp_path):
        write_wav(tone(200.0, 0.1, 44100), tmp_path / "in.wav")
        code = run_cli("filter-audio", "--in", tmp_path / "in.wav", "--out", tmp_path / "o.wav", "--cutoff-hz", 0)
        assert code == 3


class TestVadCli:
    def test_preprocess_vad(self, tmp_path, capsys):
        src = tmp_path / "raw.vad"
        src.write_text("# participant=p9 rate_hz=1 t0_s=0\n" + "\n".join("0011101111000110".replace("", " ").split()) + "\n")
        code = run_cli("preprocess-vad", "--in", src, "--out", tmp_path / "clean.vad")
        assert code == 0
        out = capsys.readouterr().out
        assert "participant=p9" in out
        # the 1 s pause merges; the trailing 2 s turn is not short (strict <)
        cleaned = (tmp_path / "clean.vad").read_text().splitlines()
        assert cleaned[1:] == list("0011111111000110")

    def test_onsets_printed(self, tmp_path, capsys):
        src = tmp_path / "raw.vad"
        src.write_text("# participant=p rate_hz=1 t0_s=0\n0\n0\n1\n1\n1\n")
        assert run_cli("preprocess-vad", "--in", src, "--out", tmp_path / "c.vad") == 0
        assert "onset=2" in capsys.readouterr().out


class TestAnnotationCli:
    def test_parse_eaf_summary(self, eaf_corpus_dir, tmp_path, capsys):
        eaf = sorted(eaf_corpus_dir.glob("*.eaf"))[0]
        code = run_cli("parse-eaf", "--in", eaf, "--out", tmp_path / "lines.txt")
        assert code == 0
        out = capsys.readouterr().out
        assert "tier=INTS_start" in out
        assert "cue='audible smack/tongue click' count=1" in out
        assert (tmp_path / "lines.txt").exists()

    def test_parse_eaf_data_error(self, tmp_path):
        bad = tmp_path / "bad.eaf"
        bad.write_text("<oops>")
        assert run_cli("parse-eaf", "--in", bad) == 3


class TestInspectSamples:
    def test_manifest_and_overlap_report(self, small_scenario_dir, tmp_path, capsys):
        code = run_cli(
            "inspect-samples", "--data-dir", small_scenario_dir, "--out", tmp_path,
            "--windows", "1", "--experiments", "successful,unsuccessful",
            "--test-interval", "600:900", "--seed", 2,
        )
        assert code == 0
        out = capsys.readouterr().out
        assert "overlap participant=p01 experiment=successful" in out
        rows = read_manifest(tmp_path / "samples_manifest.txt")
        assert len(rows) > 0
        kinds = {w.label.value for w, _ in rows}
        assert "negative" in kinds and "successful" in kinds
