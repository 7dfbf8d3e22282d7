import pytest
from hypothesis import given, settings, strategies as st

from helpers import WORD_POOL, make_instance
from pabsa.augment import (
    AugmentAudit,
    AugmentConfig,
    apply_audit,
    augment_dataset,
    augment_instance,
    entity_replace,
    synonym_replace,
)
from pabsa.corpus import AspectInstance, Dataset, Polarity
from pabsa.lexicon import EntityDictionary, SynonymLexicon


def lex(**entries):
    return SynonymLexicon({k: tuple(v) for k, v in entries.items()})


def ents(pairs):
    by_type = {}
    for surface, tag in pairs.items():
        by_type.setdefault(tag, []).append(surface)
    return EntityDictionary(dict(pairs), {t: tuple(s) for t, s in by_type.items()})


GOOD_PHONE = AspectInstance("a", "good phone", "phone", 5, 10, Polarity.POSITIVE)


class TestSynonymReplace:
    def test_rate_zero_is_identity(self):
        out, audit = synonym_replace(GOOD_PHONE, lex(good=["fine"]), 0.0, seed=1)
        assert out.text == GOOD_PHONE.text
        assert out.label is GOOD_PHONE.label
        assert audit.replacements == ()

    def test_rate_one_forces_replacement(self):
        out, audit = synonym_replace(GOOD_PHONE, lex(good=["fine"]), 1.0, seed=1)
        assert out.text == "fine phone"
        assert out.aspect_term == "phone"
        assert out.aspect_start == GOOD_PHONE.aspect_start + len("fine") - len("good")
        assert out.label is Polarity.POSITIVE
        assert [r.kind for r in audit.replacements] == ["synonym"]

    def test_longer_replacement_shifts_aspect(self):
        out, _ = synonym_replace(GOOD_PHONE, lex(good=["superb"]), 1.0, seed=1)
        assert out.text == "superb phone"
        assert out.aspect_start == 7 and out.aspect_end == 12
        assert out.text[out.aspect_start : out.aspect_end] == "phone"

    def test_deterministic(self):
        lx = lex(good=["fine", "great", "superb"])
        a = synonym_replace(GOOD_PHONE, lx, 0.7, seed=99)
        b = synonym_replace(GOOD_PHONE, lx, 0.7, seed=99)
        assert a == b

    def test_aspect_protected_by_default(self):
        out, audit = synonym_replace(GOOD_PHONE, lex(phone=["handset"]), 1.0, seed=1)
        assert out.text == GOOD_PHONE.text
        assert audit.replacements == ()

    def test_unprotected_aspect_replacement_updates_term(self):
        out, _ = synonym_replace(
            GOOD_PHONE, lex(phone=["handset"]), 1.0, seed=1, protect_aspect=False
        )
        assert out.text == "good handset"
        assert out.aspect_term == "handset"
        assert out.text[out.aspect_start : out.aspect_end] == "handset"

    def test_tokens_without_synonyms_skipped_silently(self):
        out, audit = synonym_replace(GOOD_PHONE, lex(other=["x"]), 1.0, seed=1)
        assert out.text == GOOD_PHONE.text
        assert audit.replacements == ()

    def test_id_gets_suffix(self):
        out, _ = synonym_replace(GOOD_PHONE, lex(good=["fine"]), 1.0, seed=1)
        assert out.id == "a-syn"

    def test_rate_out_of_range(self):
        with pytest.raises(ValueError):
            synonym_replace(GOOD_PHONE, lex(good=["fine"]), 1.5, seed=1)

    def test_lookup_uses_normalized_surface(self):
        # text contains Arabic yeh; lexicon key holds the Persian form
        inst = AspectInstance("a", "زيبا بود", "بود", 5, 8, Polarity.POSITIVE)
        out, audit = synonym_replace(inst, lex(**{"زیبا": ["قشنگ"]}), 1.0, seed=1)
        assert out.text == "قشنگ بود"
        assert len(audit.replacements) == 1


BOUGHT = AspectInstance("b", "bought in Tehran", "bought", 0, 6, Polarity.NEUTRAL)


class TestEntityReplace:
    def test_single_distinct_candidate(self):
        d = ents({"Tehran": "City", "Shiraz": "City"})
        out, audit = entity_replace(BOUGHT, d, 1.0, seed=1)
        assert out.text == "bought in Shiraz"
        assert [r.kind for r in audit.replacements] == ["entity"]

    def test_single_surface_type_never_replaced(self):
        d = ents({"Tehran": "City"})
        out, audit = entity_replace(BOUGHT, d, 1.0, seed=1)
        assert out.text == BOUGHT.text
        assert audit.replacements == ()

    def test_match_overlapping_aspect_not_replaced(self):
        inst = AspectInstance("c", "bought in Tehran", "Tehran", 10, 16, Polarity.NEUTRAL)
        d = ents({"Tehran": "City", "Shiraz": "City"})
        out, audit = entity_replace(inst, d, 1.0, seed=1)
        assert out.text == inst.text
        assert audit.replacements == ()

    def test_longest_match_wins(self):
        d = ents({"new york": "City", "york": "City", "paris": "City"})
        inst = AspectInstance("d", "flew to new york now", "flew", 0, 4, Polarity.NEUTRAL)
        out, audit = entity_replace(inst, d, 1.0, seed=5)
        assert len(audit.replacements) == 1
        rep = audit.replacements[0]
        assert rep.original == "new york"
        assert rep.replacement in ("york", "paris")

    def test_rate_zero_identity(self):
        d = ents({"Tehran": "City", "Shiraz": "City"})
        out, audit = entity_replace(BOUGHT, d, 0.0, seed=1)
        assert out.text == BOUGHT.text and audit.replacements == ()

    def test_replacement_same_type_only(self):
        d = ents({"Tehran": "City", "Shiraz": "City", "apple": "Brand"})
        out, _ = entity_replace(BOUGHT, d, 1.0, seed=3)
        assert out.text == "bought in Shiraz"


class TestAugmentDataset:
    def _dataset(self, n=3):
        return Dataset(
            [make_instance(["good", "phone", "ok"], 1, Polarity(i % 3), f"i{i}") for i in range(n)]
        )

    def test_identity_rates_double_dataset(self):
        d = self._dataset(3)
        cfg = AugmentConfig(synonym_rate=0.0, entity_rate=0.0, copies=1)
        out, audits = augment_dataset(d, lex(good=["fine"]), None, cfg)
        assert len(out) == 6
        for src, variant in zip(d, out.instances[3:]):
            assert variant.text == src.text
            assert variant.label == src.label
            assert variant.id == f"{src.id}-aug1"
        assert all(a.replacements == () for a in audits)

    def test_copies_size_formula(self):
        d = self._dataset(3)
        cfg = AugmentConfig(copies=2)
        out, _ = augment_dataset(d, lex(good=["fine"]), None, cfg)
        assert len(out) == 9

    def test_all_outputs_satisfy_aspect_invariant(self):
        d = self._dataset(5)
        cfg = AugmentConfig(synonym_rate=1.0, entity_rate=1.0, copies=2, seed=7)
        out, _ = augment_dataset(
            d, lex(good=["fine", "super"], ok=["alright"]),
            ents({"phone": "Prod", "tablet": "Prod"}), cfg,
        )
        for inst in out:
            assert inst.text[inst.aspect_start : inst.aspect_end] == inst.aspect_term

    def test_deterministic(self):
        d = self._dataset(4)
        cfg = AugmentConfig(synonym_rate=0.5, entity_rate=0.5, copies=2, seed=11)
        lx = lex(good=["fine", "super"])
        en = ents({"phone": "Prod", "tablet": "Prod"})
        a_out, a_aud = augment_dataset(d, lx, en, cfg)
        b_out, b_aud = augment_dataset(d, lx, en, cfg)
        assert a_out.instances == b_out.instances
        assert a_aud == b_aud

    def test_invalid_config(self):
        with pytest.raises(ValueError):
            AugmentConfig(copies=0)
        with pytest.raises(ValueError):
            AugmentConfig(synonym_rate=-0.1)


class TestAuditReplay:
    def test_replay_reproduces_text(self):
        lx = lex(good=["fine"], ok=["alright", "decent"])
        en = ents({"phone": "Prod", "tablet": "Prod"})
        inst = make_instance(["good", "phone", "ok", "ok"], 1, iid="z")
        cfg = AugmentConfig(synonym_rate=1.0, entity_rate=1.0)
        out, audit = augment_instance(inst, lx, en, cfg, seed=13, new_id="z-aug1")
        assert apply_audit(inst.text, audit) == out.text
        assert len(audit.replacements) >= 2

    def test_spans_sorted_and_disjoint(self):
        lx = lex(good=["fine"], ok=["alright"])
        inst = make_instance(["good", "phone", "ok"], 1, iid="z")
        _, audit = augment_instance(
            inst, lx, None, AugmentConfig(synonym_rate=1.0), seed=3, new_id="z1"
        )
        spans = [(r.start, r.end) for r in audit.replacements]
        assert spans == sorted(spans)
        for (s1, e1), (s2, e2) in zip(spans, spans[1:]):
            assert e1 <= s2


aspect_instances = st.builds(
    lambda words, k, label: make_instance(words, k % len(words), label, "h"),
    st.lists(st.sampled_from(WORD_POOL), min_size=1, max_size=8),
    st.integers(min_value=0, max_value=7),
    st.sampled_from(list(Polarity)),
)


@settings(max_examples=120, deadline=None)
@given(
    inst=aspect_instances,
    seed=st.integers(),
    syn_rate=st.floats(min_value=0, max_value=1),
    ent_rate=st.floats(min_value=0, max_value=1),
)
def test_augment_invariants_property(inst, seed, syn_rate, ent_rate):
    lx = lex(**{
        "خوب": ["عالی", "مناسب"],
        "بد": ["ضعیف"],
        "phone": ["handset"],
        "گوشی": ["موبایل", "تلفن"],
    })
    en = ents({"تهران": "City", "شیراز": "City", "باتری": "Part", "ارسال": "Srv"})
    cfg = AugmentConfig(synonym_rate=syn_rate, entity_rate=ent_rate, seed=seed)
    out, audit = augment_instance(inst, lx, en, cfg, seed=seed, new_id="h-aug1")
    # label and aspect preservation
    assert out.label == inst.label
    assert out.aspect_term == inst.aspect_term
    assert out.text[out.aspect_start : out.aspect_end] == out.aspect_term
    # audit replay
    assert apply_audit(inst.text, audit) == out.text
    # determinism
    out2, audit2 = augment_instance(inst, lx, en, cfg, seed=seed, new_id="h-aug1")
    assert out2 == out and audit2 == audit
    if syn_rate == 0 and ent_rate == 0:
        assert out.text == inst.text
