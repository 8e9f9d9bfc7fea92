"""Independent oracles used by the tests: a shunting-yard reference parser,
an AST enumerator, and random AST generation. These deliberately avoid the
production parser/printer code paths."""

import itertools
import random

from slrpipe.querylang import And, Not, Or, Phrase, Term

ALPHABET = ("alpha", "beta", "gamma", "delta", "epsilon")


# ---------------------------------------------------------------------------
# Reference parser (shunting-yard over the same token stream shape)


def _ref_tokens(text):
    tokens = []
    i, n = 0, len(text)
    while i < n:
        ch = text[i]
        if ch.isspace():
            i += 1
        elif ch in "()":
            tokens.append(("paren", ch))
            i += 1
        elif ch == '"':
            end = text.index('"', i + 1)
            tokens.append(("phrase", text[i + 1:end]))
            i = end + 1
        else:
            j = i
            while j < n and not text[j].isspace() and text[j] not in '()"':
                j += 1
            word = text[i:j]
            if word.upper() in ("AND", "OR", "NOT"):
                tokens.append(("op", word.upper()))
            else:
                tokens.append(("word", word))
            i = j
    return tokens


def _fold_words(tokens):
    """Collapse adjacent bare words into leaf nodes, as the grammar requires."""
    out = []
    run = []
    for kind, value in tokens:
        if kind == "word":
            run.append(value)
            continue
        if run:
            out.append(("leaf", _leaf(run)))
            run = []
        if kind == "phrase":
            out.append(("leaf", Phrase(value)))
        else:
            out.append((kind, value))
    if run:
        out.append(("leaf", _leaf(run)))
    return out


def _leaf(words):
    return Term(words[0]) if len(words) == 1 else Phrase(" ".join(words))


_PRECEDENCE = {"OR": 1, "AND": 2, "NOT": 3}


def reference_parse(text):
    """Shunting-yard parse; no normalization, binary And/Or nodes."""
    tokens = _fold_words(_ref_tokens(text))
    output = []
    ops = []

    def reduce_op(op):
        if op == "NOT":
            output.append(Not(output.pop()))
        else:
            right = output.pop()
            left = output.pop()
            node = And((left, right)) if op == "AND" else Or((left, right))
            output.append(node)

    for kind, value in tokens:
        if kind == "leaf":
            output.append(value)
        elif kind == "op":
            if value == "NOT":
                ops.append(value)
            else:
                while ops and ops[-1] != "(" and _PRECEDENCE[ops[-1]] >= _PRECEDENCE[value]:
                    reduce_op(ops.pop())
                ops.append(value)
        elif value == "(":
            ops.append("(")
        else:
            while ops[-1] != "(":
                reduce_op(ops.pop())
            ops.pop()
    while ops:
        reduce_op(ops.pop())
    assert len(output) == 1
    return output[0]


# ---------------------------------------------------------------------------
# Enumeration of normalized ASTs


def enumerate_normalized_asts(max_depth=3, alphabet=ALPHABET, max_children=2):
    """Every normalized AST up to max_depth: leaves are terms from the
    alphabet plus two-word phrases; And/Or take ordered duplicate-free child
    pairs with no same-operator nesting."""
    leaves = [Term(a) for a in alphabet]
    leaves += [Phrase(f"{a} {b}") for a, b in zip(alphabet, alphabet[1:])]
    levels = {1: list(leaves)}
    for depth in range(2, max_depth + 1):
        nodes = []
        smaller = [n for d in range(1, depth) for n in levels[d]]
        exact = levels[depth - 1]
        for child in exact:
            nodes.append(Not(child))
        for kind, cls in (("and", And), ("or", Or)):
            for pair in itertools.permutations(smaller, max_children):
                if not any(p in exact for p in pair):
                    continue  # at least one child of depth-1, else depth is wrong
                if any(isinstance(p, cls) for p in pair):
                    continue  # same-operator nesting is not normalized
                nodes.append(cls(pair))
        levels[depth] = nodes
    return [n for d in levels for n in levels[d]]


# ---------------------------------------------------------------------------
# Random (possibly unnormalized) ASTs


def random_ast(rng: random.Random, depth=3):
    choice = rng.random()
    if depth <= 0 or choice < 0.35:
        if rng.random() < 0.5:
            return Term(rng.choice(ALPHABET))
        return Phrase(f"{rng.choice(ALPHABET)} {rng.choice(ALPHABET)}")
    if choice < 0.5:
        return Not(random_ast(rng, depth - 1))
    cls = And if choice < 0.75 else Or
    n = rng.randint(2, 3)
    return cls(tuple(random_ast(rng, depth - 1) for _ in range(n)))
