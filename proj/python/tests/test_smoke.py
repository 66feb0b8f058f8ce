import json

import numpy as np
import pytest

import mrag


def test_char3_recall_transliteration():
    gold = ["sofya kovalevskaya"]
    assert mrag.char3_recall(gold, "sofia kovalevskaia") == pytest.approx(9 / 13, abs=1e-12)
    assert mrag.token_recall(gold, "sofia kovalevskaia") == 0.0


def test_normalize_and_ngrams():
    assert mrag.normalize("The Answer!") == "answer"
    assert mrag.char_ngrams("sofya") == {"sof": 1, "ofy": 1, "fya": 1}
    assert mrag.char_ngrams("ab") == {"ab": 1}
    with pytest.raises(mrag.ConfigError):
        mrag.normalize("x", "xx")


def test_chunking():
    body = " ".join(f"w{i}" for i in range(250))
    passages = mrag.chunk_document("d", "Title", body, "en")
    assert [p["passage_id"] for p in passages] == ["d::0", "d::1", "d::2"]
    assert len(passages[2]["text"].split()) == 50
    assert len(mrag.chunk_document("j", "東京", "東" * 100, "ja")) == 1


def test_clr_boundary():
    assert not mrag.clr_eligible("a" * 20)
    assert mrag.clr_eligible("a" * 21)


def test_identify_and_prompts():
    assert mrag.identify("서울은 대한민국의 수도이며 가장 큰 도시이다") == "ko"
    assert mrag.identify("ok") is None
    text = mrag.render_system_prompt("Reply short in UL (EN)", "fr")
    assert text.endswith("Answer in French.")


def test_dense_index_matches_numpy():
    rng = np.random.default_rng(3)
    vectors = rng.standard_normal((500, 32)).astype(np.float32)
    vectors[10] = vectors[20]
    ids = [f"p{i:03d}" for i in range(500)]
    index = mrag.DenseIndex(ids, vectors)
    assert len(index) == 500 and index.dims == 32
    query = vectors[10]
    hits = index.search(query, 5)
    scores = vectors.astype(np.float64) @ query.astype(np.float64)
    order = sorted(range(500), key=lambda i: (-scores[i], ids[i]))[:5]
    assert [h[0] for h in hits] == [ids[i] for i in order]
    # Duplicated rows tie and come back in id order.
    assert hits[0][0] == "p010" and hits[1][0] == "p020"
    assert hits[0][1] == hits[1][1]


def test_index_round_trip_and_merge(tmp_path):
    a = mrag.DenseIndex(["a"], np.eye(2, dtype=np.float32)[:1], "e", "A")
    b = mrag.DenseIndex(["b"], np.eye(2, dtype=np.float32)[1:], "e", "B")
    merged = mrag.DenseIndex.merge([a, b])
    merged.save(str(tmp_path / "m"))
    reopened = mrag.DenseIndex.open(str(tmp_path / "m"))
    assert reopened.search(np.array([0, 1], dtype=np.float32), 1) == [("b", 1.0)]
    with pytest.raises(mrag.Error):
        mrag.DenseIndex.merge([a, a])


def test_mock_embedder_is_unit_length():
    v = np.array(mrag.mock_embed("hello world"))
    assert v.shape == (64,)
    assert np.linalg.norm(v) == pytest.approx(1.0, abs=1e-6)


def test_cli_in_process(tmp_path):
    docs = tmp_path / "docs.jsonl"
    docs.write_text(json.dumps({"id": "a", "title": "A", "text": "alpha beta", "lang": "en"}) + "\n")
    code, out, _ = mrag.cli(["ingest", "--input", str(docs), "--store", str(tmp_path / "s")])
    assert code == 0 and "1 passages" in out
    code, _, _ = mrag.cli(["ingest", "--input", str(docs), "--store", str(tmp_path / "s")])
    assert code == 2
