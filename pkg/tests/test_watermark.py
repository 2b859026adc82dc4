import pytest
from hypothesis import given, settings, strategies as st

from graphmark import ppct
from graphmark.minilang import (
    Alloc,
    CallStmt,
    FieldStore,
    If,
    interpret,
    parse,
    serialize,
)
from graphmark.watermark import (
    BUILDER_NAME,
    EmbedError,
    WatermarkSpec,
    embed,
    extract,
    extract_tree,
    extract_with_result,
    synthesize_builder,
)

HOST = """\
fn main(a, b) {
    x = ((a * 2) + b);
    print(x);
    print((x % 7));
}
"""


class TestSpec:
    def test_rejects_negative_value(self):
        with pytest.raises(EmbedError):
            WatermarkSpec(-1, (9,))

    def test_rejects_empty_trigger(self):
        with pytest.raises(EmbedError):
            WatermarkSpec(5, ())


class TestBuilder:
    @pytest.mark.parametrize("value", [0, 1, 2, 17, 472, 99991])
    def test_statement_count(self, value):
        tree = ppct.unrank(value)
        k = ppct.leaf_count(tree)
        f = synthesize_builder(WatermarkSpec(value, (9,)))
        # one alloc per node, two stores per internal (children), two
        # stores per leaf (self-loop + cycle), one anchor call
        nodes = 2 * k - 1
        assert len(f.body) == nodes + 2 * (k - 1) + 2 * k + 1
        assert f.name == BUILDER_NAME
        assert isinstance(f.body[0], Alloc)
        assert isinstance(f.body[-1], CallStmt)

    def test_builder_statement_order(self):
        f = synthesize_builder(WatermarkSpec(472, (9,)))
        kinds = [type(s) for s in f.body]
        n_alloc = kinds.count(Alloc)
        assert kinds[:n_alloc] == [Alloc] * n_alloc
        assert kinds[n_alloc:-1] == [FieldStore] * (len(kinds) - n_alloc - 1)


class TestEmbedExtract:
    def test_round_trip(self):
        p = parse(HOST)
        for value in (0, 1, 5, 472, 12345):
            wm = embed(p, WatermarkSpec(value, (9, 9)))
            assert extract(wm, (9, 9)) == value

    @settings(deadline=None, max_examples=40)
    @given(st.integers(min_value=0, max_value=10**6))
    def test_round_trip_property(self, value):
        wm = embed(parse(HOST), WatermarkSpec(value, (9, 9)))
        assert extract(wm, (9, 9)) == value

    def test_extract_tree_shape(self):
        wm = embed(parse(HOST), WatermarkSpec(472, (9, 9)))
        assert extract_tree(wm, (9, 9)) == ppct.unrank(472)

    def test_wrong_trigger_yields_nothing(self):
        wm = embed(parse(HOST), WatermarkSpec(472, (9, 9)))
        assert extract(wm, (9, 8)) is None
        assert extract(wm, (0, 0)) is None

    def test_unwatermarked_program(self):
        assert extract(parse(HOST), (9, 9)) is None

    def test_embedding_preserves_output(self):
        p = parse(HOST)
        wm = embed(p, WatermarkSpec(472, (9, 9)))
        for args in ([0, 0], [3, 4], [9, 9], [12, 1]):
            assert interpret(wm, args).output == interpret(p, args).output

    def test_tree_is_built_on_every_run(self):
        # the builder is unconditional; only the snapshot is trigger-gated
        wm = embed(parse(HOST), WatermarkSpec(472, (9, 9)))
        r = interpret(wm, [1, 2])
        k = ppct.leaf_count(ppct.unrank(472))
        assert r.total_allocations == 2 * k - 1
        assert r.snapshot is None

    def test_trigger_arity_must_match_main(self):
        with pytest.raises(EmbedError):
            embed(parse(HOST), WatermarkSpec(472, (9,)))

    def test_main_required(self):
        text = "fn main(a) { print(a); }\n"
        p = parse(text)
        q = type(p)(tuple(f for f in p.functions))
        # remove main by renaming
        q = type(p)((type(p.functions[0])("other", ("a",), p.functions[0].body),))
        with pytest.raises(EmbedError):
            embed(q, WatermarkSpec(1, (9,)))

    def test_reserved_name_rejected(self):
        text = "fn __wm_helper(x) { return x; }\nfn main(a) { print(__wm_helper(a)); }\n"
        with pytest.raises(EmbedError):
            embed(parse(text), WatermarkSpec(1, (9,)))

    def test_double_embed_rejected(self):
        wm = embed(parse(HOST), WatermarkSpec(472, (9, 9)))
        with pytest.raises(EmbedError):
            embed(wm, WatermarkSpec(5, (9, 9)))

    def test_serialized_form_round_trips(self):
        wm = embed(parse(HOST), WatermarkSpec(472, (9, 9)))
        again = parse(serialize(wm), check=False)
        assert extract(again, (9, 9)) == 472


class TestTamper:
    def test_builder_mutation_changes_or_destroys_watermark(self):
        wm = embed(parse(HOST), WatermarkSpec(472, (9, 9)))
        builder = wm.function(BUILDER_NAME)
        idx, store = next(
            (i, s)
            for i, s in enumerate(builder.body)
            if isinstance(s, FieldStore) and s.field == "left"
        )
        # retarget one left pointer at the root node
        from graphmark.minilang import Function, Program, Var

        mutated_builder = Function(
            builder.name,
            builder.params,
            builder.body[:idx]
            + (FieldStore(store.var, "left", Var("n0")),)
            + builder.body[idx + 1 :],
        )
        mutated = Program(
            tuple(
                mutated_builder if f.name == BUILDER_NAME else f
                for f in wm.functions
            )
        )
        assert extract(mutated, (9, 9)) != 472

    def test_snapshot_is_first_capture(self):
        wm = embed(parse(HOST), WatermarkSpec(3, (9, 9)))
        value, result = extract_with_result(wm, (9, 9))
        assert value == 3
        assert result.ok
        assert result.snapshot is not None
