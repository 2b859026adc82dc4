import pytest

from graphmark.attacks import (
    ATTACK_KINDS,
    AttackOutcome,
    apply_attack,
    assess,
    bogus_field,
    duplicate_variable,
    reassign_variables,
    reorder,
    split_function,
)
from graphmark.encoder import protect
from graphmark.minilang import (
    Assign,
    FieldStore,
    IntLit,
    Var,
    interpret,
    parse,
    serialize,
)
from graphmark.watermark import WatermarkSpec, embed, extract, extract_tree

SEEDS = range(8)
ARGS = [[0, 0], [1, 2], [3, 4], [7, 5], [9, 9], [12, 1]]


def outputs(p, inputs=ARGS):
    outs = []
    for vec in inputs:
        r = interpret(p, vec)
        assert r.ok, (vec, r.status, r.error)
        outs.append(r.output)
    return outs


class TestSemanticsPreservation:
    @pytest.mark.parametrize("kind", ATTACK_KINDS)
    def test_corpus_unchanged(self, kind, corpus, corpus_inputs):
        for name, p in corpus.items():
            base = outputs(p, corpus_inputs[name])
            for seed in SEEDS:
                attacked = apply_attack(p, kind, seed)
                assert outputs(attacked, corpus_inputs[name]) == base, (
                    name,
                    kind,
                    seed,
                )

    @pytest.mark.parametrize("kind", ATTACK_KINDS)
    def test_watermarked_and_protected(self, kind, corpus, corpus_inputs):
        p = corpus["arith"]
        wm = embed(p, WatermarkSpec(472, (9, 9)))
        tree = extract_tree(wm, (9, 9))
        tp, _ = protect(wm, tree)
        for prog in (wm, tp):
            base = outputs(prog)
            for seed in (0, 3):
                assert outputs(apply_attack(prog, kind, seed)) == base

    def test_determinism(self, corpus):
        p = corpus["loops"]
        for kind in ATTACK_KINDS:
            a = serialize(apply_attack(p, kind, 5))
            b = serialize(apply_attack(p, kind, 5))
            assert a == b


class TestReorder:
    def test_respects_def_use(self):
        # b depends on a; no seed may swap them
        text = "fn main(x) { a = (x + 1); b = (a * 2); print(b); }\n"
        p = parse(text)
        for seed in range(30):
            q = reorder(p, seed)
            body = q.function("main").body
            assert [s.var for s in body[:2]] == ["a", "b"]

    def test_independent_statements_do_move(self):
        text = "fn main(x) { a = 1; b = 2; c = 3; d = 4; print((((a + b) + c) + d)); }\n"
        p = parse(text)
        variants = {serialize(reorder(p, seed)) for seed in range(30)}
        assert len(variants) > 1

    def test_prints_keep_order(self):
        text = "fn main(x) { print(1); print(2); print(3); }\n"
        p = parse(text)
        for seed in range(10):
            assert interpret(reorder(p, seed), [0]).output == ["1", "2", "3"]

    def test_heap_operations_keep_order(self):
        text = """\
fn main(x) {
    n = node();
    n.data = 5;
    m = n.data;
    print(m);
}
"""
        p = parse(text)
        for seed in range(10):
            assert interpret(reorder(p, seed), [0]).output == ["5"]


class TestSplitFunction:
    def test_adds_a_helper(self, corpus):
        p = corpus["arith"]
        q = split_function(p, 0)
        names = {f.name for f in q.functions}
        assert any(n.startswith("__atk_half") for n in names)

    def test_crossing_locals_travel_through_carrier(self):
        text = """\
fn main(x) {
    a = (x + 1);
    b = (x + 2);
    c = (a * b);
    print(c);
    print((a + 7));
}
"""
        p = parse(text)
        for seed in range(6):
            q = split_function(p, seed)
            assert interpret(q, [3]).output == ["20", "11"]

    def test_identity_when_no_eligible_function(self):
        # single-statement bodies cannot be split
        p = parse("fn main(a) { print(a); }\n")
        assert split_function(p, 0) == p


class TestDuplicateVariable:
    def test_example(self):
        p = parse("fn main(a) { x = 5; print(x); print((x + x)); }\n")
        seen_shadow = False
        for seed in range(12):
            q = duplicate_variable(p, seed)
            assert interpret(q, [0]).output == ["5", "10"]
            if "__dup" in serialize(q):
                seen_shadow = True
        assert seen_shadow

    def test_shadow_follows_reassignment(self):
        text = "fn main(a) { x = 1; x = (x + 1); x = (x + 1); print(x); }\n"
        p = parse(text)
        for seed in range(12):
            assert interpret(duplicate_variable(p, seed), [0]).output == ["3"]


class TestBogusField:
    def test_inserts_data_stores(self, corpus):
        p = corpus["listsum"]  # allocates, never reads data
        q = bogus_field(p, 0)
        stores = [
            s
            for f in q.functions
            for s in f.body
            if isinstance(s, FieldStore) and s.field == "data"
        ]
        assert q != p

    def test_identity_when_data_is_read(self, corpus):
        p = corpus["boxes"]  # reads extra.data
        assert bogus_field(p, 0) == p
        assert bogus_field(p, 9) == p

    def test_identity_without_allocations(self, corpus):
        p = corpus["arith"]
        assert bogus_field(p, 0) == p


class TestReassignVariables:
    def test_merges_disjoint_ranges(self):
        text = """\
fn main(p) {
    a = (p + 1);
    print(a);
    b = (p + 2);
    print(b);
}
"""
        p = parse(text)
        q = reassign_variables(p)
        body = q.function("main").body
        # b's range starts after a's ends, so both share one slot
        assert [s.var for s in body if isinstance(s, Assign)] == ["a", "a"]
        assert interpret(q, [10]).output == ["11", "12"]

    def test_overlapping_ranges_stay_apart(self):
        text = "fn main(p) { a = 1; b = 2; print((a + b)); }\n"
        q = reassign_variables(parse(text))
        assert interpret(q, [0]).output == ["3"]
        names = {s.var for s in q.function("main").body if isinstance(s, Assign)}
        assert len(names) == 2

    def test_loop_widening_blocks_bad_merge(self):
        # `a` is re-read on the next iteration, so its range spans the loop
        text = """\
fn main(p) {
    a = 0;
    i = 0;
    while (i < 4) {
        a = (a + 2);
        i = (i + 1);
    }
    b = 100;
    print((a + b));
}
"""
        q = reassign_variables(parse(text))
        assert interpret(q, [0]).output == ["108"]

    def test_params_untouched(self):
        text = "fn main(p) { x = (p + 1); print(x); print(p); }\n"
        q = reassign_variables(parse(text))
        assert q.function("main").params == ("p",)
        assert interpret(q, [4]).output == ["5", "4"]

    def test_seed_independent(self, corpus):
        for p in corpus.values():
            assert apply_attack(p, "reassign_variables", 0) == apply_attack(
                p, "reassign_variables", 99
            )


class TestAssess:
    def test_verdict_rule(self):
        assert AttackOutcome("reorder", True, True, True).verdict == "NotAffected"
        assert AttackOutcome("reorder", False, True, True).verdict == "Affected"
        assert AttackOutcome("reorder", True, False, True).verdict == "Affected"

    def test_watermark_survives_standard_attacks(self, corpus, corpus_inputs):
        p = corpus["arith"]
        wm = embed(p, WatermarkSpec(472, (9, 9)))
        tree = extract_tree(wm, (9, 9))
        tp, _ = protect(wm, tree)
        for kind in ("reorder", "duplicate_variable", "bogus_field"):
            wm_out, tp_out = assess(
                wm, tp, 472, (9, 9), corpus_inputs["arith"], kind, seed=0
            )
            assert wm_out.verdict == "NotAffected"
            assert tp_out.verdict == "NotAffected"

    def test_unknown_kind(self, corpus):
        with pytest.raises(ValueError):
            apply_attack(corpus["arith"], "optimize", 0)
