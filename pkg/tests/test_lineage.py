from __future__ import annotations

import itertools
import random
from collections import Counter

import pytest

from egokernel import DomainError, normalize, parse, parse_formula
from egokernel.enumerate import by_size, random_assembly
from egokernel.lineage import (
    code_nodes,
    desc,
    fast_equal,
    h_sequence,
    lineage_set,
    nested_signature,
    node_lineage_sets,
    subassembly_at,
)
from egokernel.selfcheck import bounded_corpus

# rooted identity trees by node count (OEIS A004111)
IDENTITY_TREES = [1, 1, 1, 2, 3, 6, 12, 25, 52, 113, 247, 548]

LD_LEFT = "{{0,{0},{0,{0}}},{{{0}},{{{0}}}}}"
LD_RIGHT = "{{0,{0},{{{0}}}},{{{0}},{0,{0}}}}"


def test_normal_forms_by_size_count_identity_trees():
    assert [len(by_size(n)) for n in range(1, 13)] == IDENTITY_TREES


def test_desc_and_lineage_of_worked_example():
    x = "{0,{{0}},{0,{0}}}"
    assert desc(x) == 9
    assert lineage_set(x) == ((9, 1), (9, 3, 2, 1), (9, 4, 1), (9, 4, 2, 1))
    assert desc(parse("{0,0}")) == 3
    assert desc(parse_formula("{0,0}")) == 2


def test_equal_formulas_share_lineage_sets():
    rng = random.Random(3)
    for _ in range(300):
        a = random_assembly(rng, rng.randint(1, 15))
        kids = list(a.children)
        rng.shuffle(kids)
        b = type(a)(tuple(kids + kids[:1]))
        assert fast_equal(a, b)


def test_lineage_sets_are_not_a_complete_invariant():
    left, right = parse_formula(LD_LEFT), parse_formula(LD_RIGHT)
    assert left is not right
    assert left.desc == right.desc == 17 and left.depth() == right.depth() == 5
    assert fast_equal(left, right)
    assert nested_signature(left) != nested_signature(right)


def test_lineage_agrees_with_equality_through_depth4_width2():
    corpus = bounded_corpus(4, 2)
    assert len(corpus) == 67
    for x, y in itertools.product(corpus, repeat=2):
        assert fast_equal(x, y) == (x is y)


def test_nested_signature_is_sound_and_complete_on_small_sizes():
    corpus = [f for n in range(1, 12) for f in by_size(n)]
    sigs = Counter(nested_signature(f) for f in corpus)
    assert max(sigs.values()) == 1


def test_h_sequence_matches_digit_filter():
    want = [n for n in range(1, 10**6) if "0" not in str(n)][:10_000]
    assert list(itertools.islice(h_sequence(), 10_000)) == want


def test_worked_node_codes():
    tree = parse("{0,0,{0,0,0},0}")
    codes = code_nodes(tree)
    assert codes[()] == "0"
    assert [codes[(i,)] for i in range(4)] == ["01", "02", "03", "04"]
    assert [codes[(2, i)] for i in range(3)] == ["003", "0301", "0302"]


def test_codes_are_injective_and_invertible_on_random_trees():
    rng = random.Random(17)
    for _ in range(200):
        tree = random_assembly(rng, rng.randint(1, 120))
        codes = code_nodes(tree)
        assert len(set(codes.values())) == len(codes) == tree.size()
        for path, code in codes.items():
            assert path == () or not code.endswith("0")
            node = tree
            for i in path:
                node = node.children[i]
            assert subassembly_at(tree, code) is node


def test_unknown_code_raises():
    with pytest.raises(DomainError):
        subassembly_at(parse("{0}"), "02")


def test_node_lineage_sets_cover_every_node():
    tree = parse("{0,{{0}},{0,{0}}}")
    sets = node_lineage_sets(tree)
    assert sets["0"] == lineage_set(tree)
    assert sets["01"] == lineage_set(normalize("0"))
    assert len(sets) == tree.size()
