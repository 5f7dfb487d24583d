import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import FIXTURES
from oracles import random_kb
from semcafe.entity_linker import build_matcher, disambiguate, link_document, spot
from semcafe.kb_store import EntityId, KnowledgeBase, load_kb
from semcafe.text_pipeline import RawDocument, preprocess

ANTONOV = EntityId.dbpedia("Anatoly_Antonov")


def kb_from_surfaces(forms):
    return KnowledgeBase.build(surface_forms={f: {EntityId.dbpedia(f"E_{f.replace(' ', '_')}")} for f in forms})


@pytest.fixture(scope="module")
def antonov():
    return load_kb(FIXTURES / "kb_antonov", "strict")


class TestMatcher:
    def test_empty_kb(self):
        m = build_matcher(KnowledgeBase.build())
        assert len(m) == 0
        assert spot(m, ["anything", "at", "all"]) == []

    def test_putin(self, fixtures_dir):
        m = build_matcher(load_kb(fixtures_dir / "kb_putin"))
        assert m.patterns == {("putin",)}

    def test_nested_patterns(self):
        m = build_matcher(kb_from_surfaces(["anatoly antonov", "antonov"]))
        assert m.patterns == {("anatoly", "antonov"), ("antonov",)}


class TestSpot:
    def test_longest_wins(self):
        m = build_matcher(kb_from_surfaces(["anatoly antonov", "antonov"]))
        out = spot(m, ["anatoly", "antonov", "said"])
        assert [(x.span, x.surface) for x in out] == [((0, 2), "anatoly antonov")]

    def test_empty_tokens(self, antonov):
        assert spot(build_matcher(antonov), []) == []

    def test_antonov_two_mentions(self, antonov):
        out = spot(build_matcher(antonov), ["russia", "and", "nato"])
        assert [x.span for x in out] == [(0, 1), (2, 3)]

    def test_prefix_without_completion(self):
        # "a b c" stored, stream "a b x": no match, scanning resumes at "b"
        m = build_matcher(kb_from_surfaces(["a b c", "b"]))
        assert [x.span for x in spot(m, ["a", "b", "x"])] == [(1, 2)]

    @settings(max_examples=200)
    @given(st.lists(st.lists(st.sampled_from("abcd"), min_size=1, max_size=3).map(" ".join), max_size=6),
           st.lists(st.sampled_from("abcde"), max_size=25))
    def test_non_overlap_and_greedy(self, forms, tokens):
        m = build_matcher(kb_from_surfaces(forms))
        stored = {tuple(f.split()) for f in forms}
        out = spot(m, tokens)
        pos = 0
        for x in out:
            assert pos <= x.start < x.end <= len(tokens)
            assert tuple(tokens[x.start:x.end]) in stored and x.candidates
            # positions skipped over start no pattern
            for i in range(pos, x.start):
                assert not any(tuple(tokens[i:j]) in stored for j in range(i + 1, len(tokens) + 1))
            # nothing longer starts here
            assert not any(tuple(tokens[x.start:j]) in stored for j in range(x.end + 1, len(tokens) + 1))
            pos = x.end

    @given(st.lists(st.lists(st.sampled_from("abcd"), min_size=1, max_size=3).map(" ".join), min_size=1, max_size=6),
           st.data())
    def test_singleton_completeness(self, forms, data):
        m = build_matcher(kb_from_surfaces(forms))
        tokens = data.draw(st.sampled_from(forms)).split()
        out = spot(m, tokens)
        assert len(out) == 1 and out[0].span == (0, len(tokens))


class TestDisambiguate:
    def test_putin(self, fixtures_dir):
        kb = load_kb(fixtures_dir / "kb_putin")
        assert disambiguate(kb, EntityId.dbpedia("Vladimir_Putin")) == EntityId.yago("Vladimir_Putin")

    def test_no_same_as(self, antonov):
        assert disambiguate(antonov, EntityId.dbpedia("Nowhere")) is None

    def test_tie_break(self):
        d = EntityId.dbpedia("X")
        kb = KnowledgeBase.build(same_as={d: {EntityId.yago("B"), EntityId.yago("A")}},
                                 property_counts={EntityId.yago("A"): 7, EntityId.yago("B"): 7})
        assert disambiguate(kb, d) == EntityId.yago("A")

    @pytest.mark.parametrize("seed", range(50))
    def test_brute_force_argmax(self, seed):
        rng = random.Random(seed)
        kb, _ = random_kb(rng)
        for dbp, cands in kb.same_as.items():
            top = max(kb.property_counts.get(y, 0) for y in cands)
            tied = [y.local_name for y in cands if kb.property_counts.get(y, 0) == top]
            assert disambiguate(kb, dbp) == EntityId.yago(sorted(tied)[0])

    @given(st.dictionaries(st.sampled_from("ABCDEFG"), st.integers(0, 1000), min_size=1), st.integers(1, 50))
    def test_scale_invariance(self, counts, c):
        d = EntityId.dbpedia("X")
        ys = {EntityId.yago(k): v for k, v in counts.items()}
        kb1 = KnowledgeBase.build(same_as={d: set(ys)}, property_counts=ys)
        kb2 = KnowledgeBase.build(same_as={d: set(ys)}, property_counts={k: v * c for k, v in ys.items()})
        assert disambiguate(kb1, d) == disambiguate(kb2, d)


class TestLinkDocument:
    def test_antonov_article(self, antonov, fixtures_dir):
        from semcafe.text_pipeline import ingest_corpus
        doc = preprocess(ingest_corpus(fixtures_dir / "antonov_corpus.jsonl")[0])
        ents = link_document(antonov, build_matcher(antonov), doc)
        assert [e.yago_id.local_name for e in ents] == [
            "Anatoly_Antonov", "NATO", "Russia", "MGM-140_ATACMS", "RIA_Novosti"]
        assert {e.dbpedia_id: e.mention_count for e in ents}[ANTONOV] == 2

    def test_no_entities(self, antonov):
        doc = preprocess(RawDocument("d", "nothing here", "just words"))
        assert link_document(antonov, build_matcher(antonov), doc) == []

    def test_repeat_count(self, antonov):
        doc = preprocess(RawDocument("d", "", "Russia, russia and RUSSIA"))
        ents = link_document(antonov, build_matcher(antonov), doc)
        assert len(ents) == 1 and ents[0].mention_count == 3

    def test_ambiguous_surface_expands(self):
        a, b = EntityId.dbpedia("Georgia_(country)"), EntityId.dbpedia("Georgia_(U.S._state)")
        kb = KnowledgeBase.build(surface_forms={"georgia": {a, b}})
        ents = link_document(kb, build_matcher(kb), preprocess(RawDocument("d", "", "Georgia")))
        assert {e.dbpedia_id for e in ents} == {a, b}
        assert all(e.yago_id is None and e.mention_count == 1 for e in ents)

    def test_title_and_body_pooled(self, antonov):
        doc = preprocess(RawDocument("d", "NATO", "NATO summit"))
        ents = link_document(antonov, build_matcher(antonov), doc)
        assert ents[0].mention_count == 2

    @pytest.mark.parametrize("seed", range(20))
    def test_yago_among_same_as(self, seed):
        rng = random.Random(seed)
        kb, words = random_kb(rng)
        doc = preprocess(RawDocument("d", "", " ".join(rng.choice(words) for _ in range(40))))
        for e in link_document(kb, build_matcher(kb), doc):
            assert e.mention_count >= 1
            if e.yago_id is not None:
                assert e.yago_id in kb.same_as[e.dbpedia_id]
