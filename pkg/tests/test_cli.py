import json

import pytest

from conftest import write_kb_dir
from semcafe.cli import main
from semcafe.config import ENV_VAR, RunConfig, parse_config_text, resolve_config
from semcafe.kb_store import dump_kb
from semcafe.synthetic import separable_corpus
from semcafe.text_pipeline import write_corpus

ROOTS = "".join(f"wordnet_root{i}_10000000{i}\n" for i in range(5))


def run(capsys, *argv):
    code = main(["--no-timings" if a == "@nt" else a for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


def err_json(err):
    return json.loads(err.strip().splitlines()[-1])


@pytest.fixture(scope="module")
def synth_files(tmp_path_factory):
    d = tmp_path_factory.mktemp("synth")
    sc = separable_corpus(n_docs=80, seed=3)
    dump_kb(sc.kb, d / "kb")
    write_corpus(sc.docs, d / "corpus.jsonl")
    return d


class TestKbValidate:
    def test_valid(self, capsys, fixtures_dir):
        code, out, _ = run(capsys, "kb-validate", "--kb", str(fixtures_dir / "kb_putin"), "--strictness", "strict")
        assert code == 0
        rep = json.loads(out)
        assert rep["dangling_refs"] == [] and rep["roots"] == 5

    def test_missing_roots_file(self, capsys, tmp_path):
        d = write_kb_dir(tmp_path / "kb", roots=ROOTS)
        (d / "roots.tsv").unlink()
        code, _, err = run(capsys, "kb-validate", "--kb", str(d))
        assert code == 2 and err_json(err)["error"] == "MissingFile"
        assert "roots.tsv" in err_json(err)["detail"]

    def test_cycle(self, capsys, tmp_path):
        a, b = "wordnet_a_100000011", "wordnet_b_100000012"
        d = write_kb_dir(tmp_path / "kb", subclass=f"{a}\t{b}\n{b}\t{a}\n", roots=ROOTS)
        code, _, err = run(capsys, "kb-validate", "--kb", str(d))
        e = err_json(err)
        assert code == 1 and e["error"] == "CycleDetected"
        assert a in e["detail"] and b in e["detail"]

    def test_strict_dangling_fails(self, capsys, tmp_path):
        d = write_kb_dir(tmp_path / "kb", sameas="X\tY\n", roots=ROOTS)
        code, _, err = run(capsys, "kb-validate", "--kb", str(d), "--strictness", "strict")
        assert code == 1 and err_json(err)["error"] == "DanglingReference"

    def test_lenient_dangling_reports(self, capsys, tmp_path):
        d = write_kb_dir(tmp_path / "kb", sameas="X\tY\n", roots=ROOTS)
        code, out, _ = run(capsys, "kb-validate", "--kb", str(d))
        assert code == 0 and json.loads(out)["dangling_refs"] == ["yago:Y"]


class TestLinkAndIngest:
    def test_antonov_link(self, capsys, fixtures_dir, tmp_path):
        out_path = tmp_path / "links.jsonl"
        code, out, _ = run(capsys, "link", "--corpus", str(fixtures_dir / "antonov_corpus.jsonl"),
                           "--kb", str(fixtures_dir / "kb_antonov"), "--out", str(out_path))
        assert code == 0
        first = json.loads(out_path.read_text().splitlines()[0])
        assert first["doc_id"] == "edmo_659"
        assert [e["dbpedia"] for e in first["entities"]] == [
            "Anatoly_Antonov", "NATO", "Russia", "MGM-140_ATACMS", "RIA_Novosti"]
        assert first["entities"][1] == {"dbpedia": "NATO", "yago": "NATO", "mentions": 2}
        summary = json.loads(out)
        assert summary["command"] == "link" and "elapsed_s" in summary

    def test_empty_corpus(self, capsys, fixtures_dir, tmp_path):
        corpus = tmp_path / "empty.jsonl"
        corpus.write_text("")
        out_path = tmp_path / "links.jsonl"
        code, _, _ = run(capsys, "link", "--corpus", str(corpus), "--kb", str(fixtures_dir / "kb_antonov"),
                         "--out", str(out_path))
        assert code == 0 and out_path.read_text() == ""

    def test_malformed_line(self, capsys, fixtures_dir, tmp_path):
        corpus = tmp_path / "bad.jsonl"
        rec = lambda i: json.dumps({"doc_id": f"d{i}", "title": "", "body": ""})  # noqa: E731
        corpus.write_text(f"{rec(1)}\n{rec(2)}\n{{broken\n")
        out_path = tmp_path / "links.jsonl"
        code, _, err = run(capsys, "link", "--corpus", str(corpus), "--kb", str(fixtures_dir / "kb_antonov"),
                           "--out", str(out_path))
        e = err_json(err)
        assert code == 2 and e["error"] == "MalformedJson" and "line 3" in e["detail"]
        assert not out_path.exists()

    def test_ingest(self, capsys, fixtures_dir, tmp_path):
        out_path = tmp_path / "clean.jsonl"
        code, _, _ = run(capsys, "ingest", "@nt", "--corpus", str(fixtures_dir / "antonov_corpus.jsonl"),
                         "--out", str(out_path))
        rec = json.loads(out_path.read_text().splitlines()[0])
        assert code == 0 and rec["title_tokens"][0] == "antonov"
        assert "track" not in rec["body_tokens"] and "home" not in rec["body_tokens"]

    def test_missing_corpus_arg(self, capsys, tmp_path):
        code, _, err = run(capsys, "ingest", "--out", str(tmp_path / "x"))
        assert code == 2 and err_json(err)["error"] == "InvalidConfig"


class TestTrainPredict:
    def test_round_trip_recovers_labels(self, capsys, synth_files, tmp_path):
        corpus, kb = str(synth_files / "corpus.jsonl"), str(synth_files / "kb")
        fps, vocab, model, preds = (str(tmp_path / n) for n in ("fp.jsonl", "vocab.txt", "m.json", "p.jsonl"))
        assert run(capsys, "fingerprint", "--corpus", corpus, "--kb", kb, "--out", fps, "--vocab-out", vocab)[0] == 0
        assert run(capsys, "train", "--corpus", corpus, "--fingerprints", fps, "--model-out", model,
                   "--hash-dim", "512")[0] == 0
        assert run(capsys, "predict", "--corpus", corpus, "--fingerprints", fps, "--model", model,
                   "--out", preds)[0] == 0
        gold = [json.loads(ln)["label"] for ln in (synth_files / "corpus.jsonl").read_text().splitlines()]
        got = [json.loads(ln) for ln in (tmp_path / "p.jsonl").read_text().splitlines()]
        assert [g["label"] for g in got] == gold
        assert all((g["probability"] > 0.5) == (g["label"] == "reliable") for g in got)

    def test_frozen_vocab_reused(self, capsys, synth_files, tmp_path):
        corpus, kb = str(synth_files / "corpus.jsonl"), str(synth_files / "kb")
        (tmp_path / "v.txt").write_text("wordnet_synth7_100000007\n")
        run(capsys, "fingerprint", "--corpus", corpus, "--kb", kb, "--out", str(tmp_path / "fp.jsonl"),
            "--vocab", str(tmp_path / "v.txt"))
        dims = {json.loads(ln)["dim"] for ln in (tmp_path / "fp.jsonl").read_text().splitlines()}
        assert dims == {1}

    def test_vocab_mismatch(self, capsys, synth_files, tmp_path):
        corpus, kb = str(synth_files / "corpus.jsonl"), str(synth_files / "kb")
        fps, model = str(tmp_path / "fp.jsonl"), str(tmp_path / "m.json")
        run(capsys, "fingerprint", "--corpus", corpus, "--kb", kb, "--out", fps)
        run(capsys, "train", "--corpus", corpus, "--fingerprints", fps, "--model-out", model, "--hash-dim", "64")
        (tmp_path / "v.txt").write_text("wordnet_synth7_100000007\n")
        other = str(tmp_path / "fp2.jsonl")
        run(capsys, "fingerprint", "--corpus", corpus, "--kb", kb, "--out", other, "--vocab", str(tmp_path / "v.txt"))
        out_path = tmp_path / "p.jsonl"
        code, _, err = run(capsys, "predict", "--corpus", corpus, "--fingerprints", other, "--model", model,
                           "--out", str(out_path))
        assert code == 1 and err_json(err)["error"] == "LayoutMismatch"
        assert not out_path.exists()

    def test_missing_fingerprint(self, capsys, synth_files, tmp_path):
        fps = tmp_path / "fp.jsonl"
        fps.write_text("")
        code, _, err = run(capsys, "train", "--corpus", str(synth_files / "corpus.jsonl"), "--fingerprints",
                           str(fps), "--model-out", str(tmp_path / "m.json"))
        assert code == 1 and err_json(err)["error"] == "MissingFingerprint"
        assert not (tmp_path / "m.json").exists()

    def test_single_class_training(self, capsys, fixtures_dir, tmp_path):
        corpus = tmp_path / "c.jsonl"
        corpus.write_text("".join(json.dumps({"doc_id": f"d{i}", "title": "", "body": "nato",
                                              "label": "reliable"}) + "\n" for i in range(3)))
        fps = str(tmp_path / "fp.jsonl")
        run(capsys, "fingerprint", "--corpus", str(corpus), "--kb", str(fixtures_dir / "kb_antonov"), "--out", fps)
        code, _, err = run(capsys, "train", "--corpus", str(corpus), "--fingerprints", fps,
                           "--model-out", str(tmp_path / "m.json"))
        assert code == 1 and err_json(err)["error"] == "SingleClassCorpus"


class TestEvaluate:
    def test_byte_identical(self, capsys, synth_files, tmp_path):
        outs = []
        for k in range(2):
            rep, mod = tmp_path / f"r{k}.json", tmp_path / f"m{k}.json"
            code, _, _ = run(capsys, "evaluate", "--corpus", str(synth_files / "corpus.jsonl"),
                             "--kb", str(synth_files / "kb"), "--seed", "7", "--hash-dim", "1024",
                             "--report-out", str(rep), "--model-out", str(mod))
            assert code == 0
            outs.append((rep.read_bytes(), mod.read_bytes()))
        assert outs[0] == outs[1]
        assert json.loads(outs[0][0])["macro_f1"] >= 0.9

    def test_no_timings_summary_is_deterministic(self, capsys, synth_files, tmp_path):
        argv = ["evaluate", "@nt", "--corpus", str(synth_files / "corpus.jsonl"), "--kb", str(synth_files / "kb"),
                "--hash-dim", "256", "--report-out", str(tmp_path / "r.json"), "--csv-out", str(tmp_path / "r.csv")]
        assert run(capsys, *argv)[1] == run(capsys, *argv)[1]
        assert (tmp_path / "r.csv").read_text().startswith("metric,value\n")

    def test_unlabeled(self, capsys, fixtures_dir, tmp_path):
        corpus = tmp_path / "c.jsonl"
        corpus.write_text(json.dumps({"doc_id": "a", "title": "", "body": ""}) + "\n")
        rep = tmp_path / "r.json"
        code, _, err = run(capsys, "evaluate", "--corpus", str(corpus), "--kb", str(fixtures_dir / "kb_antonov"),
                           "--report-out", str(rep))
        assert code == 1 and err_json(err)["error"] == "UnlabeledDocument" and not rep.exists()


class TestConfig:
    def test_precedence(self, tmp_path, monkeypatch):
        monkeypatch.delenv(ENV_VAR, raising=False)
        f = tmp_path / "c.cfg"
        f.write_text("epochs = 3\nseed = 4  # comment\nfeature_scaling = false\n")
        cfg = resolve_config(str(f), {"seed": 9, "epochs": None})
        assert (cfg.epochs, cfg.seed, cfg.feature_scaling, cfg.hash_dim) == (3, 9, False, RunConfig().hash_dim)

    def test_env_var_wins(self, tmp_path, monkeypatch):
        a, b = tmp_path / "a.cfg", tmp_path / "b.cfg"
        a.write_text("epochs = 3\n")
        b.write_text("epochs = 5\n")
        monkeypatch.setenv(ENV_VAR, str(b))
        assert resolve_config(str(a)).epochs == 5

    @pytest.mark.parametrize("text", ["nonsense = 1", "no equals sign", "epochs = many", "feature_scaling = maybe"])
    def test_bad_config(self, text):
        with pytest.raises(ValueError):
            parse_config_text(text)

    def test_cli_bad_hyperparameter(self, capsys, fixtures_dir, tmp_path):
        code, _, err = run(capsys, "evaluate", "--corpus", str(fixtures_dir / "antonov_corpus.jsonl"),
                           "--kb", str(fixtures_dir / "kb_antonov"), "--hash-dim", "0",
                           "--report-out", str(tmp_path / "r.json"))
        assert code == 2 and err_json(err)["error"] == "InvalidConfig"

    def test_config_file_supplies_paths(self, capsys, fixtures_dir, tmp_path, monkeypatch):
        monkeypatch.delenv(ENV_VAR, raising=False)
        f = tmp_path / "c.cfg"
        f.write_text(f"kb_dir = {fixtures_dir / 'kb_putin'}\nstrictness = strict\n")
        code, out, _ = run(capsys, "kb-validate", "--config", str(f))
        assert code == 0 and json.loads(out)["surface_forms"] == 1
