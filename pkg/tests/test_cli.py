import hashlib
import json

import pytest

from lecseg.cli import EXIT_INPUT, EXIT_OK, main
from lecseg.fixtures import generate_fixture, write_fixture


@pytest.fixture()
def fixture_dir(tmp_path):
    fixture = generate_fixture(seed=42, topics=4)
    paths = write_fixture(fixture, tmp_path / "video")
    return fixture, paths


def digest(path):
    return hashlib.sha256(path.read_bytes()).hexdigest()


class TestEdgeWeights:
    def test_two_concept_fixture_yields_one_row(self, tmp_path):
        transcript = tmp_path / "t.json"
        transcript.write_text(
            json.dumps(
                {
                    "tokens": ["alpha", "x", "beta", "alpha", "y", "beta"],
                    "anchors": [[0, 0.0], [5, 5.0]],
                    "duration": 6.0,
                }
            ),
            encoding="utf-8",
        )
        lexicon = tmp_path / "lex.json"
        lexicon.write_text(json.dumps(["alpha", "beta"]), encoding="utf-8")
        out = tmp_path / "dict.tsv"
        code = main(
            [
                "edge-weights",
                "--transcript", str(transcript),
                "--lexicon", str(lexicon),
                "--fallback-embedder",
                "--out", str(out),
            ]
        )
        assert code == EXIT_OK
        rows = [line for line in out.read_text().splitlines() if line.strip()]
        assert len(rows) == 1
        a, b, score = rows[0].split("\t")
        assert (a, b) == ("alpha", "beta")
        float(score)

    def test_missing_lexicon_is_input_error(self, fixture_dir, tmp_path):
        _, paths = fixture_dir
        code = main(
            [
                "edge-weights",
                "--transcript", str(paths["transcript"]),
                "--fallback-embedder",
                "--out", str(tmp_path / "dict.tsv"),
            ]
        )
        assert code == EXIT_INPUT

    def test_fallback_output_bit_identical_across_runs(self, fixture_dir, tmp_path):
        _, paths = fixture_dir
        outs = []
        for name in ("one.tsv", "two.tsv"):
            out = tmp_path / name
            code = main(
                [
                    "edge-weights",
                    "--transcript", str(paths["transcript"]),
                    "--lexicon", str(paths["lexicon"]),
                    "--fallback-embedder",
                    "--out", str(out),
                ]
            )
            assert code == EXIT_OK
            outs.append(digest(out))
        assert outs[0] == outs[1]

    def test_emit_requests_writes_jsonl(self, fixture_dir, tmp_path):
        _, paths = fixture_dir
        requests = tmp_path / "requests.jsonl"
        code = main(
            [
                "edge-weights",
                "--transcript", str(paths["transcript"]),
                "--lexicon", str(paths["lexicon"]),
                "--emit-requests", str(requests),
            ]
        )
        assert code == EXIT_OK
        lines = requests.read_text().splitlines()
        assert lines
        for line in lines[:20]:
            obj = json.loads(line)
            assert "key" in obj and "tokens" in obj


class TestSegment:
    def test_semantic_mode_recovers_planted_boundaries(self, fixture_dir, tmp_path):
        fixture, paths = fixture_dir
        out = tmp_path / "segments.json"
        code = main(
            [
                "segment",
                "--mode", "semantic",
                "--transcript", str(paths["transcript"]),
                "--timeline", str(paths["timeline"]),
                "--kg", str(paths["kg"]),
                "--lexicon", str(paths["lexicon"]),
                "--fallback-embedder",
                "--out", str(out),
            ]
        )
        assert code == EXIT_OK
        segments = json.loads(out.read_text())
        truth = fixture.ground_truth.topics
        assert len(segments) == len(truth)
        for seg, topic in zip(segments, truth):
            assert abs(seg["start"] - topic.start) <= 1.0
            assert abs(seg["end"] - topic.end) <= 1.0

    def test_single_slide_video_gives_one_segment(self, tmp_path):
        transcript = tmp_path / "t.json"
        transcript.write_text(
            json.dumps(
                {
                    "tokens": ["alpha", "beta", "alpha", "beta", "x", "y"],
                    "anchors": [[0, 0.0]],
                    "duration": 60.0,
                }
            ),
            encoding="utf-8",
        )
        (tmp_path / "slides.json").write_text(
            json.dumps([{"slide_id": "s0", "start": 0.0, "end": 60.0, "titles": []}]),
            encoding="utf-8",
        )
        (tmp_path / "kg.tsv").write_text("alpha\tbeta\n", encoding="utf-8")
        (tmp_path / "lex.json").write_text(json.dumps(["alpha", "beta"]), encoding="utf-8")
        out = tmp_path / "segments.json"
        code = main(
            [
                "segment",
                "--mode", "semantic",
                "--transcript", str(transcript),
                "--timeline", str(tmp_path / "slides.json"),
                "--kg", str(tmp_path / "kg.tsv"),
                "--lexicon", str(tmp_path / "lex.json"),
                "--fallback-embedder",
                "--out", str(out),
            ]
        )
        assert code == EXIT_OK
        assert len(json.loads(out.read_text())) == 1

    def test_dump_graphs_writes_debug_jsonl(self, fixture_dir, tmp_path):
        _, paths = fixture_dir
        dump = tmp_path / "graphs.jsonl"
        code = main(
            [
                "segment",
                "--mode", "semantic",
                "--transcript", str(paths["transcript"]),
                "--timeline", str(paths["timeline"]),
                "--kg", str(paths["kg"]),
                "--lexicon", str(paths["lexicon"]),
                "--fallback-embedder",
                "--dump-graphs", str(dump),
                "--out", str(tmp_path / "segments.json"),
            ]
        )
        assert code == EXIT_OK
        lines = [json.loads(l) for l in dump.read_text().splitlines() if l.strip()]
        stages = {line["stage"] for line in lines}
        assert stages == {"slide", "cluster"}
        for line in lines:
            assert set(line) == {"stage", "slide_ids", "interval", "vertices", "edges"}
            for a, b, w in line["edges"]:
                assert a in line["vertices"] and b in line["vertices"]
                float(w)

    def test_structural_mode_with_weights_and_encodings(self, fixture_dir, tmp_path):
        _, paths = fixture_dir
        tokens = json.loads(paths["transcript"].read_text())["tokens"]
        n_sentences = (len(tokens) + 19) // 20
        dim = 4
        enc_lines = [
            json.dumps({"key": str(i), "vector": [float(i % 3), 1.0, 0.5, 0.0]})
            for i in range(n_sentences)
        ]
        enc_path = tmp_path / "encodings.jsonl"
        enc_path.write_text("\n".join(enc_lines) + "\n", encoding="utf-8")
        weights = {
            "W": [[0.1]] * dim,
            "b": [0.0] * 10,
            "Zs": [1.0],
            "head_w": [0.05] * (6 * dim),
            "head_b": -0.2,
        }
        weights_path = tmp_path / "weights.json"
        weights_path.write_text(json.dumps(weights), encoding="utf-8")
        out = tmp_path / "segments.json"
        code = main(
            [
                "segment",
                "--mode", "structural",
                "--transcript", str(paths["transcript"]),
                "--sentence-encodings", str(enc_path),
                "--weights", str(weights_path),
                "--out", str(out),
            ]
        )
        assert code == EXIT_OK
        segments = json.loads(out.read_text())
        assert segments[0]["start"] == 0.0

    def test_syllabus_triggers_annotation(self, fixture_dir, tmp_path):
        fixture, paths = fixture_dir
        out = tmp_path / "annotated.json"
        code = main(
            [
                "segment",
                "--mode", "semantic",
                "--transcript", str(paths["transcript"]),
                "--timeline", str(paths["timeline"]),
                "--kg", str(paths["kg"]),
                "--lexicon", str(paths["lexicon"]),
                "--syllabus", str(paths["syllabus"]),
                "--fallback-embedder",
                "--out", str(out),
            ]
        )
        assert code == EXIT_OK
        segments = json.loads(out.read_text())
        names = [seg["topic"] for seg in segments]
        assert names == list(fixture.syllabus)


class TestFuseCommand:
    def test_identical_inputs_round_trip(self, tmp_path):
        segments = [{"start": 0.0, "end": 100.0}, {"start": 100.0, "end": 400.0}]
        for name in ("a.json", "b.json"):
            (tmp_path / name).write_text(json.dumps(segments), encoding="utf-8")
        out = tmp_path / "fused.json"
        code = main(
            [
                "fuse",
                "--structural", str(tmp_path / "a.json"),
                "--semantic", str(tmp_path / "b.json"),
                "--out", str(out),
            ]
        )
        assert code == EXIT_OK
        fused = json.loads(out.read_text())
        assert [(s["start"], s["end"]) for s in fused] == [(0.0, 100.0), (100.0, 400.0)]


class TestEval:
    def write_perfect(self, tmp_path):
        gt = [
            {"topic": "A", "start": 0.0, "end": 120.0},
            {"topic": "B", "start": 120.0, "end": 300.0},
        ]
        segments = [
            {"topic": "A", "start": 0.0, "end": 120.0},
            {"topic": "B", "start": 120.0, "end": 300.0},
        ]
        (tmp_path / "gt.json").write_text(json.dumps(gt), encoding="utf-8")
        (tmp_path / "segments.json").write_text(json.dumps(segments), encoding="utf-8")

    def test_perfect_segmentation_ideal_report(self, tmp_path):
        self.write_perfect(tmp_path)
        out = tmp_path / "report.json"
        code = main(
            [
                "eval",
                "--ground-truth", str(tmp_path / "gt.json"),
                "--segments", str(tmp_path / "segments.json"),
                "--out", str(out),
            ]
        )
        assert code == EXIT_OK
        report = json.loads(out.read_text())
        assert report["mean_otr"] == 1.0
        assert report["pk"] == 0.0
        assert report["window_diff"] == 0.0
        assert report["f1"] == 1.0

    def test_table_output_matches_golden_layout(self, tmp_path, capsys):
        self.write_perfect(tmp_path)
        code = main(
            [
                "eval",
                "--ground-truth", str(tmp_path / "gt.json"),
                "--segments", str(tmp_path / "segments.json"),
                "--table",
            ]
        )
        assert code == EXIT_OK
        golden = (
            "Metric                    segmentation\n"
            "--------------------------------------\n"
            "Mean OTR                        1.0000\n"
            "Pk                              0.0000\n"
            "WindowDiff                      0.0000\n"
            "Boundary precision              1.0000\n"
            "Boundary recall                 1.0000\n"
            "Boundary F1                     1.0000\n"
            "\n"
            "Topic                                        OTR\n"
            "------------------------------------------------\n"
            "A                                         1.0000\n"
            "B                                         1.0000\n"
        )
        assert capsys.readouterr().out == golden

    def test_missing_ground_truth_is_input_error(self, tmp_path):
        self.write_perfect(tmp_path)
        code = main(["eval", "--segments", str(tmp_path / "segments.json")])
        assert code == EXIT_INPUT

    def test_csv_and_figures_written(self, tmp_path):
        self.write_perfect(tmp_path)
        code = main(
            [
                "eval",
                "--ground-truth", str(tmp_path / "gt.json"),
                "--segments", str(tmp_path / "segments.json"),
                "--out", str(tmp_path / "report.json"),
                "--csv", str(tmp_path / "report.csv"),
                "--figures", str(tmp_path / "figs"),
            ]
        )
        assert code == EXIT_OK
        assert (tmp_path / "report.csv").exists()
        assert (tmp_path / "figs" / "timeline.png").exists()
        assert (tmp_path / "figs" / "per_topic_otr.png").exists()


class TestGenFixture:
    def test_writes_all_input_files(self, tmp_path):
        code = main(["gen-fixture", "--seed", "7", "--topics", "3", "--out-dir", str(tmp_path / "fx")])
        assert code == EXIT_OK
        for name in (
            "transcript.json", "slides.json", "lexicon.json",
            "kg.tsv", "syllabus.json", "ground_truth.json",
        ):
            assert (tmp_path / "fx" / name).exists()

    def test_seed_controls_content(self, tmp_path):
        main(["gen-fixture", "--seed", "1", "--out-dir", str(tmp_path / "a")])
        main(["gen-fixture", "--seed", "1", "--out-dir", str(tmp_path / "b")])
        main(["gen-fixture", "--seed", "2", "--out-dir", str(tmp_path / "c")])
        same = (tmp_path / "a" / "transcript.json").read_bytes()
        again = (tmp_path / "b" / "transcript.json").read_bytes()
        different = (tmp_path / "c" / "transcript.json").read_bytes()
        assert same == again
        assert same != different


class TestPipelineCommand:
    def test_full_pipeline_writes_expected_artifacts(self, fixture_dir, tmp_path):
        _, paths = fixture_dir
        config = {
            "transcript": str(paths["transcript"]),
            "timeline": str(paths["timeline"]),
            "kg": str(paths["kg"]),
            "lexicon": str(paths["lexicon"]),
            "syllabus": str(paths["syllabus"]),
            "ground_truth": str(paths["ground_truth"]),
        }
        config_path = tmp_path / "config.json"
        config_path.write_text(json.dumps(config), encoding="utf-8")
        out_dir = tmp_path / "out"
        code = main(
            [
                "pipeline",
                "--config", str(config_path),
                "--out-dir", str(out_dir),
                "--fallback-embedder",
            ]
        )
        assert code == EXIT_OK
        for name in (
            "edge_weights.tsv",
            "segments_semantic.json",
            "segments_structural.json",
            "segments_fused.json",
            "annotated.json",
            "report.json",
            "report.csv",
            "report.txt",
        ):
            assert (out_dir / name).exists(), name
        assert (out_dir / "figures" / "timeline.png").exists()
