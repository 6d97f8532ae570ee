import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from stepmath.errors import DepthExceeded, ExprSyntaxError
from stepmath.expr import (
    Binary,
    FractionLit,
    Group,
    Lit,
    count_atomic_ops,
    lex,
    parse,
    print_expr,
)

from conftest import GOLDEN_TRACES

ALL_GOLDEN_SOURCES = [(src, mode) for src, mode, _ in GOLDEN_TRACES]


class TestLexer:
    @pytest.mark.parametrize("src,mode", ALL_GOLDEN_SOURCES)
    def test_lossless_on_golden_inputs(self, src, mode):
        assert "".join(tok.text for tok in lex(src)) == src

    def test_token_offsets(self):
        toks = lex("12+3.5%")
        assert [(t.kind, t.offset) for t in toks] == [
            ("digits", 0), ("plus", 2), ("digits", 3), ("dot", 4),
            ("digits", 5), ("percent", 6),
        ]

    def test_rejects_unknown_character(self):
        with pytest.raises(ExprSyntaxError) as exc:
            lex("1+a")
        assert exc.value.offset == 2

    def test_rejects_non_ascii_digits(self):
        with pytest.raises(ExprSyntaxError):
            lex("١+1")  # Arabic-Indic digit: isdigit() but not part of the language

    def test_fuzz_accept_or_error_never_crash(self):
        # 10^5 random short strings: the lexer either tokenizes losslessly or
        # raises a positioned syntax error, and never anything else.
        rng = random.Random(2024)
        alphabet = "0123456789.+-*/^()[]=% ab\t"
        for _ in range(100_000):
            s = "".join(rng.choice(alphabet) for _ in range(rng.randint(0, 12)))
            try:
                toks = lex(s)
            except ExprSyntaxError as err:
                assert 0 <= err.offset <= len(s)
            else:
                assert "".join(t.text for t in toks) == s


class TestParser:
    def test_single_literal(self):
        tree = parse("7")
        assert isinstance(tree, Lit) and tree.value == 7

    def test_precedence_shape(self):
        # 1+8/1*10+2 groups as ((1+((8/1)*10))+2)
        tree = parse("1+8/1*10+2")
        assert isinstance(tree, Binary) and tree.op == "+"
        assert isinstance(tree.lhs, Binary) and tree.lhs.op == "+"
        inner = tree.lhs.rhs
        assert isinstance(inner, Binary) and inner.op == "*"
        assert isinstance(inner.lhs, Binary) and inner.lhs.op == "/"

    def test_fraction_mode_literals(self):
        tree = parse("((49/24)*-(8/70))/-(34/80)", "fraction")
        assert isinstance(tree, Binary) and tree.op == "/"
        assert isinstance(tree.rhs, FractionLit)
        assert tree.rhs.num == -34 and tree.rhs.den == 80
        group = tree.lhs
        assert isinstance(group, Group)
        assert isinstance(group.inner.lhs, FractionLit)

    def test_standard_mode_treats_slash_as_division(self):
        tree = parse("(49/24)", "standard")
        assert isinstance(tree, Group)
        assert isinstance(tree.inner, Binary) and tree.inner.op == "/"

    def test_negative_literal_folding(self):
        tree = parse("-3338")
        assert isinstance(tree, Lit) and tree.value == -3338
        assert tree.origin == "negative" and tree.text == "-3338"

    def test_unary_binds_looser_than_power(self):
        # -2^2 is -(2^2), not (-2)^2
        tree = parse("-2^2")
        from stepmath.steps import direct_eval

        assert direct_eval(tree) == -4

    def test_signed_exponent_parses(self):
        tree = parse("2^-3")
        assert isinstance(tree, Binary) and tree.op == "^"

    def test_double_minus_is_subtraction_of_negative(self):
        tree = parse("5--3")
        assert isinstance(tree, Binary) and tree.op == "-"
        assert isinstance(tree.rhs, Lit) and tree.rhs.value == -3

    def test_percent_literal(self):
        tree = parse("5483%")
        assert tree.origin == "percent" and tree.value == 5483 and tree.text == "5483%"

    def test_square_brackets(self):
        tree = parse("[(12+3)*5]")
        assert isinstance(tree, Group) and tree.kind == "["
        assert isinstance(tree.inner.lhs, Group) and tree.inner.lhs.kind == "("

    @pytest.mark.parametrize(
        "src,offset",
        [
            ("1+", 2),
            ("(1+2", 0),
            ("1+*2", 2),
            ("1+2)", 3),
            ("[1+2)", 0),
            ("1=2", 1),
            ("12.", 3),
            ("", 0),
        ],
    )
    def test_syntax_errors_carry_offsets(self, src, offset):
        with pytest.raises(ExprSyntaxError) as exc:
            parse(src)
        assert exc.value.offset == offset

    def test_depth_limit(self):
        ok = "(" * 16 + "1" + ")" * 16
        parse(ok)
        too_deep = "(" * 17 + "1" + ")" * 17
        with pytest.raises(DepthExceeded):
            parse(too_deep)


class TestPrinter:
    @pytest.mark.parametrize("src,mode", ALL_GOLDEN_SOURCES)
    def test_print_inverts_parse_on_golden_inputs(self, src, mode):
        assert print_expr(parse(src, mode)) == src

    @pytest.mark.parametrize(
        "src",
        ["8371*(-1945+8878)", "0", "5--3", "-4457+(-7823/5483%)*-3338",
         "[(12+3)*5]", "73.0+0.50"],
    )
    def test_round_trip_misc(self, src):
        assert print_expr(parse(src)) == src

    @pytest.mark.parametrize("src,mode", ALL_GOLDEN_SOURCES)
    def test_parse_print_parse_is_parse(self, src, mode):
        first = parse(src, mode)
        assert parse(print_expr(first), mode) == first

    def test_round_trip_one_thousand_generated_expressions(self):
        from stepmath.datagen import GenSpec, sample_expression

        for seed, category in enumerate(
            ("int-mixed", "bracketed-int", "lengthy-mixed", "fraction", "exponentiation")
        ):
            steps = (1, 1) if category == "exponentiation" else (2, 8)
            spec = GenSpec(category, (1, 6), steps, seed=400 + seed)
            mode = spec.mode
            for i in range(200):
                e = sample_expression(spec, i)
                text = print_expr(e)
                again = parse(text, mode)
                assert print_expr(again) == text
                assert again == e


class TestCountAtomicOps:
    def test_published_counts(self):
        assert count_atomic_ops(parse("1+8/1*10+2")) == 4
        assert count_atomic_ops(parse("7")) == 0
        assert count_atomic_ops(parse("53-2+23+51*56")) == 4

    def test_fraction_literals_do_not_count(self):
        assert count_atomic_ops(parse("(9947/9276)+(4411/9276)", "fraction")) == 1

    def test_unary_signs_do_not_count(self):
        assert count_atomic_ops(parse("-5--3")) == 1


@settings(max_examples=300, deadline=None)
@given(st.text(alphabet="0123456789.+-*/^()[]=%", max_size=24))
def test_parse_accepts_or_raises_syntax_error(src):
    try:
        tree = parse(src)
    except ExprSyntaxError:
        return
    assert print_expr(tree) == src
