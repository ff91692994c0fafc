import itertools
import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from oracles import (
    all_one_sided_matchings,
    naive_estable_one,
    naive_estable_two,
    naive_stable_one,
    naive_stable_two,
    one_sided_orders,
    orders_two_sided,
)

from exstab.errors import ContractError, ParseError
from exstab.instance import (
    OneSidedInstance,
    PreferenceInstance,
    all_instances_one_sided,
    all_instances_two_sided,
    generate_one_sided,
    generate_two_sided,
    read_instance,
)
from exstab.stability import (
    Matching,
    gale_shapley,
    is_doubly_stable,
    is_exchange_stable_one_sided,
    is_exchange_stable_two_sided,
    is_stable_one_sided,
    is_stable_two_sided,
    rank_totals,
    read_matching,
    write_matching,
)

# Fixed n=3 instance for the checker agreement test.
FIXED_N3 = """two 3
2 1 3
1 3 2
3 2 1
3 1 2
2 3 1
1 2 3
"""


def from_orders(men_orders, women_orders):
    n = len(men_orders)
    men = np.zeros((n, n), dtype=int)
    women = np.zeros((n, n), dtype=int)
    for i, order in enumerate(men_orders):
        for p, j in enumerate(order):
            men[i, j] = p + 1
    for j, order in enumerate(women_orders):
        for p, i in enumerate(order):
            women[j, i] = p + 1
    return PreferenceInstance(men, women)


def one_from_orders(orders):
    n = len(orders)
    rank = np.zeros((n, n), dtype=int)
    for i, order in enumerate(orders):
        for p, j in enumerate(order):
            rank[i, j] = p + 1
    return OneSidedInstance(rank)


def two_sided_matchings(n):
    return [Matching("two", p) for p in itertools.permutations(range(n))]


def test_n1_everything_holds():
    inst = generate_two_sided(1, 0)
    m = Matching("two", (0,))
    assert is_exchange_stable_two_sided(inst, m).verdict
    assert is_stable_two_sided(inst, m).verdict
    assert is_doubly_stable(inst, m)
    assert gale_shapley(inst) == m
    rt = rank_totals(inst, m)
    assert (rt.R, rt.Q) == (1, 1)


def test_n2_man_exchange_block():
    # each man ranks the other man's wife first; M gives each his second choice
    inst = from_orders([[1, 0], [0, 1]], [[0, 1], [0, 1]])
    report = is_exchange_stable_two_sided(inst, Matching("two", (0, 1)))
    assert not report.verdict
    assert report.witness_type == "man-exchange" and report.pair == (0, 1)
    assert report.to_dict() == {"verdict": False, "witness": {"type": "man-exchange", "pair": [1, 2]}}
    assert json.loads(report.to_json())["witness"]["pair"] == [1, 2]


def test_n2_all_first_choices_doubly_stable():
    inst = from_orders([[0, 1], [1, 0]], [[0, 1], [1, 0]])
    m = Matching("two", (0, 1))
    assert is_doubly_stable(inst, m)
    rt = rank_totals(inst, m)
    assert rt.R == rt.Q == 2


def test_fixed_n3_agrees_with_naive():
    inst = read_instance(FIXED_N3)
    men, women = orders_two_sided(inst)
    for m in two_sided_matchings(3):
        assert is_exchange_stable_two_sided(inst, m).verdict == naive_estable_two(men, women, m.pairing)
        assert is_stable_two_sided(inst, m).verdict == naive_stable_two(men, women, m.pairing)


def test_one_sided_n2_exempt_pair():
    inst = generate_one_sided(2, 0)
    m = Matching("one", (1, 0))
    assert is_exchange_stable_one_sided(inst, m).verdict
    assert is_stable_one_sided(inst, m).verdict


def test_one_sided_member_exchange_block():
    # members 0,1 matched to 2,3; 0 prefers 3 to 2 and 1 prefers 2 to 3
    inst = one_from_orders([[3, 2, 1], [2, 3, 0], [0, 1, 3], [1, 0, 2]])
    m = Matching("one", (2, 3, 0, 1))
    report = is_exchange_stable_one_sided(inst, m)
    assert not report.verdict
    assert report.witness_type == "member-exchange" and report.pair == (0, 1)


def test_one_sided_full_sweep_agrees_with_naive():
    matchings = [Matching("one", p) for p in all_one_sided_matchings(4)]
    assert len(matchings) == 3
    for inst in all_instances_one_sided(4):
        orders = one_sided_orders(inst)
        for m in matchings:
            assert is_exchange_stable_one_sided(inst, m).verdict == naive_estable_one(orders, m.pairing)
            assert is_stable_one_sided(inst, m).verdict == naive_stable_one(orders, m.pairing)


def _replay(inst, m, report):
    """Re-check a witness against its defining strict inequalities."""
    a, b = report.pair
    if report.witness_type == "man-exchange":
        mr = inst.men_rank
        return mr[a, m[b]] < mr[a, m[a]] and mr[b, m[a]] < mr[b, m[b]]
    if report.witness_type == "woman-exchange":
        wr, h = inst.women_rank, m.inverse()
        return wr[a, h[b]] < wr[a, h[a]] and wr[b, h[a]] < wr[b, h[b]]
    if report.witness_type == "member-exchange":
        rk = inst.rank
        return m[a] != b and rk[a, m[b]] < rk[a, m[a]] and rk[b, m[a]] < rk[b, m[b]]
    if isinstance(inst, PreferenceInstance):
        h = m.inverse()
        return b != m[a] and inst.men_rank[a, b] < inst.men_rank[a, m[a]] and inst.women_rank[b, a] < inst.women_rank[b, h[b]]
    rk = inst.rank
    return m[a] != b and rk[a, b] < rk[a, m[a]] and rk[b, a] < rk[b, m[b]]


@settings(max_examples=150, deadline=None)
@given(st.integers(2, 8), st.integers(0, 2**64 - 1), st.randoms(use_true_random=False))
def test_two_sided_witness_soundness_and_naive_agreement(n, seed, rnd):
    inst = generate_two_sided(n, seed)
    perm = list(range(n))
    rnd.shuffle(perm)
    m = Matching("two", perm)
    men, women = orders_two_sided(inst)
    for check, naive in ((is_exchange_stable_two_sided, naive_estable_two), (is_stable_two_sided, naive_stable_two)):
        report = check(inst, m)
        assert report.verdict == naive(men, women, m.pairing)
        if not report.verdict:
            assert _replay(inst, m, report)


@settings(max_examples=150, deadline=None)
@given(st.integers(1, 5), st.integers(0, 2**64 - 1), st.randoms(use_true_random=False))
def test_one_sided_witness_soundness(half, seed, rnd):
    n = 2 * half
    inst = generate_one_sided(n, seed)
    members = list(range(n))
    rnd.shuffle(members)
    partner = [0] * n
    for a, b in zip(members[::2], members[1::2]):
        partner[a], partner[b] = b, a
    m = Matching("one", partner)
    orders = one_sided_orders(inst)
    ex = is_exchange_stable_one_sided(inst, m)
    assert ex.verdict == naive_estable_one(orders, partner)
    if not ex.verdict:
        assert _replay(inst, m, ex)
        assert m[ex.pair[0]] != ex.pair[1]  # swap exemption
    st_ = is_stable_one_sided(inst, m)
    assert st_.verdict == naive_stable_one(orders, partner)
    if not st_.verdict:
        assert _replay(inst, m, st_)


def test_witness_is_lexicographically_smallest():
    for seed in range(30):
        inst = generate_two_sided(6, seed)
        m = Matching("two", (5, 4, 3, 2, 1, 0))
        report = is_exchange_stable_two_sided(inst, m)
        if report.verdict:
            continue
        men, _ = orders_two_sided(inst)
        man_pairs = [
            (a, b) for a, b in itertools.combinations(range(6), 2)
            if men[a].index(m[b]) < men[a].index(m[a]) and men[b].index(m[a]) < men[b].index(m[b])
        ]
        if man_pairs:
            assert report.witness_type == "man-exchange" and report.pair == min(man_pairs)


@settings(max_examples=60, deadline=None)
@given(st.integers(2, 7), st.integers(0, 2**64 - 1), st.permutations(range(7)), st.permutations(range(7)))
def test_relabeling_men_preserves_verdicts(n, seed, perm7, wife7):
    perm = [p for p in perm7 if p < n]
    wife = [w for w in wife7 if w < n]
    inst = generate_two_sided(n, seed)
    m = Matching("two", wife)
    relabeled = inst.relabel_men(perm)
    new_wife = [0] * n
    for i in range(n):
        new_wife[perm[i]] = wife[i]
    m2 = Matching("two", new_wife)
    assert is_exchange_stable_two_sided(inst, m).verdict == is_exchange_stable_two_sided(relabeled, m2).verdict
    assert is_stable_two_sided(inst, m).verdict == is_stable_two_sided(relabeled, m2).verdict
    assert rank_totals(inst, m) == rank_totals(relabeled, m2)


@settings(max_examples=100, deadline=None)
@given(st.integers(1, 9), st.integers(0, 2**64 - 1), st.permutations(range(9)))
def test_rank_bounds_and_recount(n, seed, wife9):
    inst = generate_two_sided(n, seed)
    m = Matching("two", [w for w in wife9 if w < n])
    rt = rank_totals(inst, m)
    assert n <= rt.R <= n * n and n <= rt.Q <= n * n
    men, women = orders_two_sided(inst)
    assert rt.R == sum(men[i].index(m[i]) + 1 for i in range(n))
    assert rt.Q == sum(women[m[i]].index(i) + 1 for i in range(n))


def test_one_sided_rank_totals():
    inst = one_from_orders([[1, 2, 3], [0, 2, 3], [3, 0, 1], [2, 0, 1]])
    rt = rank_totals(inst, Matching("one", (1, 0, 3, 2)))
    assert rt.R == 4 and rt.Q is None
    for seed in range(20):
        inst = generate_one_sided(6, seed)
        for p in all_one_sided_matchings(6):
            R = rank_totals(inst, Matching("one", p)).R
            assert 6 <= R <= 6 * 5


def test_random_n6_rank_recount():
    inst = generate_two_sided(6, 314)
    m = Matching("two", (3, 1, 5, 0, 2, 4))
    men, women = orders_two_sided(inst)
    rt = rank_totals(inst, m)
    assert rt.R == sum(men[i].index(m[i]) + 1 for i in range(6))
    assert rt.Q == sum(women[j].index(i) + 1 for i, j in enumerate(m.pairing))


def test_gale_shapley_mutual_first_choices():
    n = 5
    orders = [[i] + [j for j in range(n) if j != i] for i in range(n)]
    inst = from_orders(orders, orders)
    m = gale_shapley(inst)
    assert m.pairing == tuple(range(n))
    rt = rank_totals(inst, m)
    assert rt.R == rt.Q == n


@settings(max_examples=100, deadline=None)
@given(st.integers(1, 12), st.integers(0, 2**64 - 1))
def test_gale_shapley_output_is_stable(n, seed):
    inst = generate_two_sided(n, seed)
    assert is_stable_two_sided(inst, gale_shapley(inst, "men")).verdict
    assert is_stable_two_sided(inst, gale_shapley(inst, "women")).verdict


def test_gale_shapley_exhaustive_n3():
    """Men-proposing output is stable and minimizes the men's total rank among stable matchings."""
    matchings = two_sided_matchings(3)
    for inst in all_instances_two_sided(3):
        stable = [m for m in matchings if is_stable_two_sided(inst, m).verdict]
        assert stable
        gs = gale_shapley(inst)
        assert gs in stable
        ranks = [rank_totals(inst, m).R for m in stable]
        assert rank_totals(inst, gs).R == min(ranks)
        for m in stable:  # man-optimal: every man weakly prefers gs
            assert all(inst.men_rank[i, gs[i]] <= inst.men_rank[i, m[i]] for i in range(3))
        women_gs = gale_shapley(inst, "women")
        assert rank_totals(inst, women_gs).Q == min(rank_totals(inst, m).Q for m in stable)


def test_contract_errors():
    inst = generate_two_sided(3, 0)
    with pytest.raises(ContractError):
        is_exchange_stable_two_sided(inst, Matching("two", (0, 1)))
    with pytest.raises(ContractError):
        Matching("two", (0, 0, 1))
    with pytest.raises(ContractError):
        Matching("one", (0, 1))
    with pytest.raises(ContractError):
        Matching("one", (1, 2, 0, 3))
    with pytest.raises(ContractError):
        is_stable_one_sided(inst, Matching("one", (1, 0)))


def test_matching_text_round_trip():
    m = Matching("two", (2, 0, 1))
    text = write_matching(m)
    assert text == "match two 3\n3 1 2\n"
    assert read_matching(text) == m
    assert read_matching("match one 4\n2 1\n4 3\n") == Matching("one", (1, 0, 3, 2))


@pytest.mark.parametrize(
    "text, message",
    [
        ("matching two 2\n1 2\n", "malformed header"),
        ("match two 2\n1 3\n", "out of range"),
        ("match two 2\n1\n", "expected 2 entries"),
        ("match two 2\n1 1\n", "bijection"),
        ("match one 2\n1 2\n", "involution"),
    ],
)
def test_matching_parse_errors(text, message):
    with pytest.raises(ParseError, match=message):
        read_matching(text)
