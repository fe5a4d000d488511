"""Smoke test for the pywordgraph extension module.

Build and install first:

    pip install maturin
    maturin develop -m crates/python/Cargo.toml   # or: maturin build ... && pip install <wheel>

then run `python python/smoke_test.py`.
"""
import json
import math
import shutil
import sys
import tempfile
from pathlib import Path

import pywordgraph as wg

ROOT = Path(__file__).resolve().parent.parent
GOLDEN = ROOT / "crates" / "core" / "tests" / "fixtures" / "golden"


def circle_table():
    angles = [0, 20, 45, 70, 100, 130, 165, 200, 235, 270, 310, 340]
    return wg.EmbeddingTable(
        {f"t{a:03d}": [math.cos(math.radians(a)), math.sin(math.radians(a))] for a in angles}
    )


def check_search():
    table = circle_table()
    cfg = wg.SearchConfig(min_sim_thresh=0.4, max_depth=2, top_k=2, context_mix=0.5)
    single = wg.bwgs(table, "t000", cfg)
    assert single.keywords[0] == "t000"
    assert len(single) <= cfg.max_keywords()
    multi = wg.bmdwgs(table, ["t000", "t165"], cfg)
    assert set(multi.keywords) == set(multi.runs[0]) | set(multi.runs[1])
    print(f"search: {single.keywords}")


def check_golden_pipeline():
    table = wg.EmbeddingTable.load(GOLDEN / "embeddings.vec")
    corpus = wg.Corpus.load(GOLDEN / "corpus.jsonl")
    result = wg.bwgs(table, "myth", wg.SearchConfig(), corpus=corpus)
    retrieved = wg.retrieve(corpus, result.keywords)
    gold = corpus.gold_ids(["misinfo"])
    p, r, f1 = wg.prf(set(retrieved.positive_ids), gold, set(corpus.ids()))
    print(f"golden: {len(result)} keywords, {retrieved.n_positive}/{retrieved.n_docs} retrieved, "
          f"P={p:.3f} R={r:.3f} F1={f1:.3f}")

    matched = [corpus_doc for corpus_doc in corpus.ids() if corpus_doc in set(retrieved.positive_ids)]
    assert matched == retrieved.positive_ids

    with tempfile.TemporaryDirectory() as tmp:
        for name in ["embeddings.vec", "corpus.jsonl", "config.json"]:
            shutil.copy(GOLDEN / name, tmp)
        manifest = Path(wg.run_pipeline(Path(tmp) / "config.json"))
        stages = json.loads(manifest.read_text())["stages"]
        assert [s["stage"] for s in stages] == ["expand", "retrieve", "topics", "eval"], stages
        print(f"pipeline: {len(stages)} stages -> {manifest.name}")


def check_lda():
    texts = ["apple banana apple", "banana apple", "car truck car", "truck car"] * 10
    corpus = wg.Corpus(texts)
    model = wg.fit_lda(corpus, num_topics=2, sweeps=50, seed=3, min_count=1, stoplist=[])
    model.check_invariants()
    tops = {frozenset(w for w, _ in model.top_words(t, 2)) for t in range(2)}
    assert tops == {frozenset({"apple", "banana"}), frozenset({"car", "truck"})}, tops
    print(f"lda: perplexity {model.perplexity(corpus):.3f}")


def main():
    check_search()
    check_golden_pipeline()
    check_lda()
    print("ok")
    return 0


if __name__ == "__main__":
    sys.exit(main())
