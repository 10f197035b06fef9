import json
from pathlib import Path

import pytest

from storyweave.cli import main
from storyweave.quality_metric import JudgmentSet, save_judgments
from storyweave.story_model import IllustratedStoryline, save_illustrated
from storyweave.synthetic import generate_synthetic_event

HELP_DIR = Path(__file__).parent / "data" / "help"
SUBCOMMANDS = ("filter", "rank", "illustrate", "evaluate", "synth", "bench", "serve")


@pytest.fixture(scope="module")
def event(tmp_path_factory):
    return generate_synthetic_event(31, 60, 2, tmp_path_factory.mktemp("cliev"))


class TestHelp:
    @pytest.mark.parametrize("command", SUBCOMMANDS)
    def test_help_snapshot(self, command, capsys):
        assert main([command, "--help"]) == 0
        captured = capsys.readouterr().out
        golden = (HELP_DIR / f"{command}.txt").read_text()
        assert captured == golden

    def test_top_level_help_lists_subcommands(self, capsys):
        assert main(["--help"]) == 0
        out = capsys.readouterr().out
        for command in SUBCOMMANDS:
            assert command in out


class TestExitCodes:
    def test_bad_flag_exits_one_with_usage(self, capsys):
        assert main(["filter", "--nope"]) == 1
        err = capsys.readouterr().err
        assert "Usage" in err or "no such option" in err.lower()

    def test_unknown_method_exits_one_and_lists_methods(self, event, capsys):
        code = main([
            "illustrate",
            "--corpus", str(event.corpus_path),
            "--stories", str(event.storylines_path),
            "--method", "sorcery",
            "--out", "/tmp/unused.jsonl",
        ])
        assert code == 1
        err = capsys.readouterr().err
        assert "bm25" in err and "temporal" in err

    def test_missing_input_file_exits_one(self, tmp_path, capsys):
        code = main([
            "filter",
            "--corpus", str(tmp_path / "missing.jsonl"),
            "--spec", str(tmp_path / "missing.json"),
            "--out", str(tmp_path / "out.jsonl"),
        ])
        assert code == 1

    def test_runtime_error_exits_two(self, event, tmp_path, capsys):
        # manifest parses but references a missing corpus -> runtime failure
        manifest = tmp_path / "manifest.json"
        manifest.write_text(json.dumps({
            "event_name": "x",
            "corpus": "missing.jsonl",
            "storylines": ["missing_stories.jsonl"],
            "methods": ["bm25"],
            "output_dir": "out",
        }))
        assert main(["bench", "--manifest", str(manifest)]) == 2


class TestFilterCommand:
    def test_filter_reports_counts(self, event, tmp_path, capsys):
        out = tmp_path / "filtered.jsonl"
        code = main([
            "filter",
            "--corpus", str(event.corpus_path),
            "--spec", str(event.crawl_spec_path),
            "--out", str(out),
        ])
        assert code == 0
        stdout = capsys.readouterr().out
        kept = len(event.corpus) - 3  # generator plants 3 out-of-span decoys
        assert f"kept {kept} dropped 3" in stdout
        assert out.exists()

    def test_filter_empty_corpus(self, event, tmp_path, capsys):
        empty = tmp_path / "empty.jsonl"
        empty.write_text("")
        out = tmp_path / "filtered.jsonl"
        code = main([
            "filter",
            "--corpus", str(empty),
            "--spec", str(event.crawl_spec_path),
            "--out", str(out),
        ])
        assert code == 0
        assert "kept 0" in capsys.readouterr().out


class TestRankCommand:
    def test_rank_outputs_scores(self, event, capsys):
        segment = event.storylines[0].segments[0]
        code = main([
            "rank",
            "--corpus", str(event.corpus_path),
            "--query", segment.description,
            "--k", "3",
        ])
        assert code == 0
        lines = capsys.readouterr().out.strip().splitlines()
        assert len(lines) == 3
        doc_id, score = lines[0].split("\t")
        assert doc_id in event.corpus.by_id
        assert float(score) > 0


class TestIllustrateCommand:
    def test_illustrate_writes_choices(self, event, tmp_path, capsys):
        out = tmp_path / "ill.jsonl"
        code = main([
            "illustrate",
            "--corpus", str(event.corpus_path),
            "--stories", str(event.storylines_path),
            "--method", "bm25",
            "--media-dir", str(event.out_dir),
            "--out", str(out),
        ])
        assert code == 0
        lines = out.read_text().strip().splitlines()
        assert len(lines) == len(event.storylines)
        record = json.loads(lines[0])
        assert record["method"] == "bm25"

    def test_illustrate_deterministic_bytes(self, event, tmp_path):
        outs = []
        for name in ("a.jsonl", "b.jsonl"):
            out = tmp_path / name
            main([
                "illustrate",
                "--corpus", str(event.corpus_path),
                "--stories", str(event.storylines_path),
                "--method", "random",
                "--seed", "9",
                "--media-dir", str(event.out_dir),
                "--out", str(out),
            ])
            outs.append(out.read_bytes())
        assert outs[0] == outs[1]


class TestEvaluateCommand:
    def test_prints_worked_fixture_value(self, tmp_path, capsys):
        illustrated = tmp_path / "ill.jsonl"
        save_illustrated(
            [IllustratedStoryline("s1", "bm25", ("m1", "m2", "m3"))], illustrated
        )
        judgments = tmp_path / "judgments.jsonl"
        save_judgments(
            [JudgmentSet("s1", "a", (2, 0, 1), (1, 2), 3, method_name="bm25")], judgments
        )
        code = main([
            "evaluate",
            "--illustrated", str(illustrated),
            "--judgments", str(judgments),
        ])
        assert code == 0
        out = capsys.readouterr().out
        assert "s1\t0.875" in out

    def test_alpha_beta_flags(self, tmp_path, capsys):
        illustrated = tmp_path / "ill.jsonl"
        save_illustrated([IllustratedStoryline("s1", "bm25", ("m1", "m2"))], illustrated)
        judgments = tmp_path / "judgments.jsonl"
        save_judgments([JudgmentSet("s1", "a", (2, 2), (2,), 5)], judgments)
        code = main([
            "evaluate",
            "--illustrated", str(illustrated),
            "--judgments", str(judgments),
            "--alpha", "0.5", "--beta", "1.0",
        ])
        assert code == 0
        # alpha*2 + (1-alpha)/2 * pairwiseQ(2,2,2) with beta=1 -> 1 + 0.25*4 = 2
        assert "s1\t2\n" in capsys.readouterr().out

    def test_invalid_beta_exit_one(self, tmp_path):
        illustrated = tmp_path / "ill.jsonl"
        save_illustrated([IllustratedStoryline("s1", "bm25", ("m1", "m2"))], illustrated)
        judgments = tmp_path / "judgments.jsonl"
        save_judgments([JudgmentSet("s1", "a", (2, 2), (2,), 5)], judgments)
        code = main([
            "evaluate",
            "--illustrated", str(illustrated),
            "--judgments", str(judgments),
            "--beta", "0.3",
        ])
        assert code == 1


class TestSynthCommand:
    def test_synth_generates_bundle(self, tmp_path, capsys):
        out = tmp_path / "event"
        code = main(["synth", "--seed", "3", "--docs", "55", "--stories", "1",
                     "--out", str(out)])
        assert code == 0
        for name in ("corpus.jsonl", "stories.jsonl", "concepts.jsonl",
                     "embeddings.jsonl", "ground_truth.json", "manifest.json"):
            assert (out / name).exists(), name

    def test_synth_validation_exit_one(self, tmp_path):
        assert main(["synth", "--docs", "5", "--out", str(tmp_path / "x")]) == 1


class TestBenchCommand:
    def test_bench_runs_manifest(self, event, capsys):
        code = main(["bench", "--manifest", str(event.manifest_path)])
        assert code == 0
        out = capsys.readouterr().out
        assert "bm25" in out
        assert (event.out_dir / "out" / "reports" / "summary").exists()
