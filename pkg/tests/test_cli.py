import json

import pytest
from click.testing import CliRunner

from swsds.cli import main
from swsds.embeddings import load_word2vec_text
from swsds.evaluate import compare_pipelines
from swsds.kb import build_polysemy_dict, load_kb
from swsds.scoring import StubScorer

from conftest import build_decisive_suite, write_kb, write_store


@pytest.fixture
def runner():
    return CliRunner()


def events_of(result):
    return [json.loads(line) for line in result.stderr.splitlines()
            if line.startswith("{")]


class TestKbDict:
    def test_tsv_matches_library_oracle(self, runner, toy_kb_path, toy_kb, tmp_path):
        out = tmp_path / "dict.tsv"
        result = runner.invoke(main, ["kb", "dict", "--kb", str(toy_kb_path),
                                      "--out", str(out)])
        assert result.exit_code == 0
        rows = {}
        for line in out.read_text(encoding="utf-8").splitlines():
            lemma, pos, count = line.split("\t")
            rows[(lemma, pos)] = int(count)
            assert int(count) >= 2
        assert rows == build_polysemy_dict(toy_kb).entries

    def test_missing_file_exit_2_with_path(self, runner, tmp_path):
        missing = tmp_path / "nope.jsonl"
        result = runner.invoke(main, ["kb", "dict", "--kb", str(missing),
                                      "--out", str(tmp_path / "o.tsv")])
        assert result.exit_code == 2
        assert "nope.jsonl" in result.stderr

    def test_malformed_kb_exit_1(self, runner, tmp_path):
        bad = tmp_path / "bad.jsonl"
        bad.write_text("not json\n", encoding="utf-8")
        result = runner.invoke(main, ["kb", "dict", "--kb", str(bad),
                                      "--out", str(tmp_path / "o.tsv")])
        assert result.exit_code == 1


@pytest.fixture
def annotate_setup(tmp_path, toy_kb_path, stub_table, runner):
    dict_path = tmp_path / "dict.tsv"
    runner.invoke(main, ["kb", "dict", "--kb", str(toy_kb_path),
                         "--out", str(dict_path)])
    table_path = tmp_path / "table.json"
    table_path.write_text(json.dumps(stub_table), encoding="utf-8")
    in_path = tmp_path / "in.jsonl"
    in_path.write_text(json.dumps({
        "tokens": ["Apple", "is", "rich", "in", "nutrients"],
        "pos_tags": ["n", "v", "a", "p", "n"],
    }) + "\n", encoding="utf-8")
    return dict_path, table_path, in_path


class TestWsdAnnotate:
    def test_apple_sentence(self, runner, toy_kb_path, annotate_setup, tmp_path):
        dict_path, table_path, in_path = annotate_setup
        out = tmp_path / "out.txt"
        log = tmp_path / "results.jsonl"
        result = runner.invoke(main, [
            "wsd", "annotate", "--kb", str(toy_kb_path), "--dict", str(dict_path),
            "--in", str(in_path), "--out", str(out), "--log", str(log),
            "--stub-table", str(table_path),
        ])
        assert result.exit_code == 0
        assert out.read_text(encoding="utf-8") == \
            "Apple=244397 is rich in nutrients\n"
        [logged] = [json.loads(x) for x in
                    log.read_text(encoding="utf-8").splitlines()]
        assert logged["chosen"] == "244397"

    def test_empty_input_empty_output(self, runner, toy_kb_path, annotate_setup,
                                      tmp_path):
        dict_path, table_path, _ = annotate_setup
        empty_in = tmp_path / "empty.jsonl"
        empty_in.write_text("", encoding="utf-8")
        out = tmp_path / "out.txt"
        result = runner.invoke(main, [
            "wsd", "annotate", "--kb", str(toy_kb_path), "--dict", str(dict_path),
            "--in", str(empty_in), "--out", str(out),
        ])
        assert result.exit_code == 0
        assert out.read_text(encoding="utf-8") == ""

    def test_cache_rerun_identical_output_fewer_calls(
            self, runner, toy_kb_path, annotate_setup, tmp_path):
        dict_path, table_path, in_path = annotate_setup
        cache = tmp_path / "cache.jsonl"
        args = ["wsd", "annotate", "--kb", str(toy_kb_path),
                "--dict", str(dict_path), "--in", str(in_path),
                "--stub-table", str(table_path), "--cache", str(cache)]
        out1, out2 = tmp_path / "o1.txt", tmp_path / "o2.txt"
        first = runner.invoke(main, args + ["--out", str(out1)])
        second = runner.invoke(main, args + ["--out", str(out2)])
        assert out1.read_text(encoding="utf-8") == out2.read_text(encoding="utf-8")
        calls1 = events_of(first)[-1]["scorer_calls"]
        calls2 = events_of(second)[-1]["scorer_calls"]
        assert calls1 > 0
        assert calls2 == 0


@pytest.fixture
def suite_files(tmp_path):
    records, store, pairs, table = build_decisive_suite()
    kb_path = write_kb(tmp_path / "suite_kb.jsonl", records)
    vec_path = write_store(tmp_path / "suite_vec.txt", store)
    pairs_path = tmp_path / "pairs.jsonl"
    with open(pairs_path, "w", encoding="utf-8") as fh:
        for pair in pairs:
            fh.write(json.dumps({
                "id": pair.id, "a": list(pair.a), "b": list(pair.b),
                "label": pair.label, "a_pos": list(pair.a_pos),
                "b_pos": list(pair.b_pos),
            }) + "\n")
    table_path = tmp_path / "suite_table.json"
    table_path.write_text(json.dumps(table), encoding="utf-8")
    return kb_path, vec_path, pairs_path, table_path


class TestPipelineChain:
    def test_full_chain_matches_library_and_swsds_wins(
            self, runner, suite_files, tmp_path):
        kb_path, vec_path, pairs_path, table_path = suite_files

        dict_path = tmp_path / "dict.tsv"
        assert runner.invoke(main, ["kb", "dict", "--kb", str(kb_path),
                                    "--out", str(dict_path)]).exit_code == 0

        sentences = tmp_path / "sentences.jsonl"
        pair_objs = [json.loads(line) for line in
                     open(pairs_path, encoding="utf-8")]
        with open(sentences, "w", encoding="utf-8") as fh:
            for obj in pair_objs:
                for side, tags in (("a", "a_pos"), ("b", "b_pos")):
                    fh.write(json.dumps({"tokens": obj[side],
                                         "pos_tags": obj[tags]}) + "\n")
        annotated = tmp_path / "annotated.txt"
        assert runner.invoke(main, [
            "wsd", "annotate", "--kb", str(kb_path), "--dict", str(dict_path),
            "--in", str(sentences), "--out", str(annotated),
            "--stub-table", str(table_path)]).exit_code == 0

        extended = tmp_path / "extended.txt"
        assert runner.invoke(main, [
            "embed", "senses", "--kb", str(kb_path), "--vectors", str(vec_path),
            "--annotated", str(annotated), "--out", str(extended)]).exit_code == 0
        store = load_word2vec_text(extended)
        assert "crane=1" in store and "mole=4" in store

        compare_out = tmp_path / "compare.json"
        result = runner.invoke(main, [
            "eval", "compare", "--kb", str(kb_path), "--vectors", str(vec_path),
            "--pairs", str(pairs_path), "--out", str(compare_out),
            "--seed", "1", "--split-ratio", "0.25",
            "--stub-table", str(table_path)])
        assert result.exit_code == 0
        report = json.loads(compare_out.read_text(encoding="utf-8"))
        assert report["swsds"]["accuracy"] > report["baseline"]["accuracy"]

        # CLI adds no semantics over the library pipeline
        records, mem_store, pairs, table = build_decisive_suite()
        kb = load_kb(kb_path)
        comparison = compare_pipelines(
            pairs, mem_store, kb, build_polysemy_dict(kb), StubScorer(table),
            split_ratio=0.25, seed=1)
        assert report["baseline"]["accuracy"] == comparison.baseline.accuracy
        assert report["swsds"]["accuracy"] == comparison.swsds.accuracy
        assert report["swsds"]["threshold"] == comparison.swsds.threshold

    def test_sim_wmd_identical_pairs_zero(self, runner, suite_files, tmp_path):
        _, vec_path, _, _ = suite_files
        pairs_path = tmp_path / "identical.jsonl"
        with open(pairs_path, "w", encoding="utf-8") as fh:
            for i, word in enumerate(["heron", "stork", "spy"]):
                fh.write(json.dumps({"id": str(i), "a": [word, "the"],
                                     "b": [word, "the"]}) + "\n")
        out = tmp_path / "wmd.jsonl"
        result = runner.invoke(main, ["sim", "wmd", "--vectors", str(vec_path),
                                      "--pairs", str(pairs_path),
                                      "--out", str(out)])
        assert result.exit_code == 0
        for line in out.read_text(encoding="utf-8").splitlines():
            assert json.loads(line)["distance"] == 0.0

    def test_eval_sim_same_seed_byte_identical(self, runner, suite_files, tmp_path):
        _, vec_path, pairs_path, _ = suite_files
        out1, out2 = tmp_path / "r1.json", tmp_path / "r2.json"
        for out in (out1, out2):
            result = runner.invoke(main, [
                "eval", "sim", "--vectors", str(vec_path),
                "--pairs", str(pairs_path), "--out", str(out),
                "--seed", "4", "--split-ratio", "0.25"])
            assert result.exit_code == 0
        assert out1.read_bytes() == out2.read_bytes()

    def test_seed_via_environment_prefix(self, runner, suite_files, tmp_path):
        _, vec_path, pairs_path, _ = suite_files
        out_env = tmp_path / "env.json"
        result = runner.invoke(main, [
            "eval", "sim", "--vectors", str(vec_path), "--pairs", str(pairs_path),
            "--out", str(out_env), "--split-ratio", "0.25"],
            env={"SWSDS_EVAL_SIM_SEED": "4"})
        assert result.exit_code == 0
        out_flag = tmp_path / "flag.json"
        runner.invoke(main, [
            "eval", "sim", "--vectors", str(vec_path), "--pairs", str(pairs_path),
            "--out", str(out_flag), "--seed", "4", "--split-ratio", "0.25"])
        assert out_env.read_bytes() == out_flag.read_bytes()
