import random
import string

import pytest
from hypothesis import given, settings, strategies as st

from slrpipe.errors import DialectUnsupported, QuerySyntaxError
from slrpipe.querylang import (
    And,
    Not,
    Or,
    Phrase,
    Term,
    ast_from_dict,
    ast_to_dict,
    evaluate_query,
    normalize_query,
    parse_query,
    print_query,
    translate_query,
)

from helpers import ALPHABET, enumerate_normalized_asts, random_ast, reference_parse

DEMO_QUERY = "large language models OR software development"
DEMO_AST = Or((Phrase("large language models"), Phrase("software development")))


class TestParse:
    def test_demo_string(self):
        assert parse_query(DEMO_QUERY) == DEMO_AST

    def test_single_bare_word(self):
        assert parse_query("llm") == Term("llm")

    def test_mixed_structure(self):
        ast = parse_query('("code generation" AND testing) OR NOT survey')
        assert ast == Or(
            (And((Phrase("code generation"), Term("testing"))), Not(Term("survey")))
        )

    def test_case_insensitive_operators(self):
        assert parse_query("a and b") == parse_query("a AND b")

    def test_empty_input(self):
        with pytest.raises(QuerySyntaxError) as exc:
            parse_query("")
        assert exc.value.offset == 0
        assert exc.value.expected

    def test_unbalanced_parens(self):
        with pytest.raises(QuerySyntaxError) as exc:
            parse_query("(a OR b")
        assert exc.value.offset == len("(a OR b")

    def test_dangling_operator(self):
        with pytest.raises(QuerySyntaxError):
            parse_query("a AND")

    def test_agrees_with_shunting_yard_reference(self):
        corpus = [
            "a", "a b", '"a b c"', "a AND b", "a OR b AND c", "NOT a OR b",
            "a AND NOT b", "(a OR b) AND c", "NOT (a AND b)", "a b OR c d",
            'x AND ("y z" OR w)', "NOT NOT a", "a OR b OR c", "a AND b AND c",
        ]
        for text in corpus:
            assert parse_query(text) == normalize_query(reference_parse(text)), text


class TestPrint:
    def test_leaf(self):
        assert print_query(Term("llm")) == "llm"

    def test_demo_ast_canonical(self):
        assert print_query(DEMO_AST) == '"large language models" OR "software development"'

    def test_parens_only_where_needed(self):
        ast = parse_query("(a OR b) AND NOT c")
        assert print_query(ast) == "(a OR b) AND NOT c"
        ast2 = parse_query("a AND b OR c")
        assert print_query(ast2) == "a AND b OR c"

    def test_round_trip_exhaustive_depth3(self):
        asts = enumerate_normalized_asts(max_depth=3)
        assert len(asts) > 2000
        for ast in asts:
            assert parse_query(print_query(ast)) == ast


class TestNormalize:
    def test_flatten(self):
        raw = Or((Or((Term("a"), Term("b"))), Term("c")))
        assert normalize_query(raw) == Or((Term("a"), Term("b"), Term("c")))

    def test_duplicate_collapse(self):
        assert normalize_query(Or((Term("a"), Term("a")))) == Term("a")

    def test_single_word_phrase_demoted(self):
        assert normalize_query(Phrase("llm")) == Term("llm")

    def test_idempotent_random(self):
        rng = random.Random(7)
        for _ in range(300):
            ast = random_ast(rng)
            once = normalize_query(ast)
            assert normalize_query(once) == once

    def test_semantics_preserved_on_document_universe(self):
        rng = random.Random(11)
        universe = [
            " ".join(rng.choices(ALPHABET, k=rng.randint(1, 6))) for _ in range(100)
        ]
        for _ in range(300):
            ast = random_ast(rng)
            normalized = normalize_query(ast)
            before = [evaluate_query(ast, doc) for doc in universe]
            after = [evaluate_query(normalized, doc) for doc in universe]
            assert before == after


def _reference_percent_encode(text):
    # Independent oracle: byte-wise RFC 3986 unreserved set.
    unreserved = set(string.ascii_letters + string.digits + "-._~")
    return "".join(
        ch if ch in unreserved else "".join(f"%{b:02X}" for b in ch.encode("utf-8"))
        for ch in text
    )


class TestTranslate:
    def test_url_keywords_demo(self):
        out = translate_query(DEMO_AST, "url_keywords")
        assert out == "%22large%20language%20models%22%20OR%20%22software%20development%22"
        assert out == _reference_percent_encode(print_query(DEMO_AST))

    def test_plus_minus_single_term(self):
        assert translate_query(Term("llm"), "plus_minus") == "llm"

    def test_plus_minus_top_level_not(self):
        ast = parse_query("a AND NOT b")
        assert translate_query(ast, "plus_minus") == "a -b"

    def test_plus_minus_rejects_nesting(self):
        ast = And((Term("a"), Or((Term("b"), Term("c")))))
        with pytest.raises(DialectUnsupported) as exc:
            translate_query(ast, "plus_minus")
        assert exc.value.construct == "Or"

    def test_canonical_is_print(self):
        assert translate_query(DEMO_AST, "canonical") == print_query(DEMO_AST)


class TestFuzzTotality:
    @settings(max_examples=500, deadline=None)
    @given(st.text(alphabet='abc ()"ANDORT-', max_size=40))
    def test_parse_or_syntax_error(self, text):
        try:
            parse_query(text)
        except QuerySyntaxError as exc:
            assert 0 <= exc.offset <= len(text.encode("utf-8"))

    def test_seeded_fuzz_corpus(self):
        rng = random.Random(99)
        pieces = ['"', "(", ")", "AND", "OR", "NOT", "a", "bb", "large language", " "]
        for _ in range(2000):
            text = "".join(rng.choices(pieces, k=rng.randint(0, 12)))
            try:
                parse_query(text)
            except QuerySyntaxError as exc:
                assert 0 <= exc.offset <= len(text.encode("utf-8"))


class TestSerde:
    def test_round_trip(self):
        rng = random.Random(3)
        for _ in range(100):
            ast = normalize_query(random_ast(rng))
            assert ast_from_dict(ast_to_dict(ast)) == ast
