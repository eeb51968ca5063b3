import itertools
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from rdvlab.model import (
    Binding,
    GameError,
    Strategy,
    Tactic,
    TacticKind,
    all_tactics,
    canonical_pattern,
    classify,
    format_strategy,
    format_tactics,
    from_weights,
    make_binding,
    make_tactic,
    pair_set,
    parse_strategy,
    parse_tactics,
    play,
    point_mass,
)


@st.composite
def tactic_pairs(draw, max_n=6):
    n = draw(st.integers(2, max_n))
    loc = st.integers(1, n)
    a = draw(st.lists(loc, min_size=n, max_size=n))
    b = draw(st.lists(loc, min_size=n, max_size=n))
    perm = draw(st.permutations(range(1, n + 1)))
    return Tactic(n, tuple(a)), Tactic(n, tuple(b)), Binding(n, tuple(perm))


# -- make_tactic ----------------------------------------------------------

def test_make_tactic_baby_and_mommy():
    assert make_tactic(4, [1, 1, 1, 1]).itinerary == (1, 1, 1, 1)
    assert make_tactic(4, [1, 2, 3, 4]).image_size == 4


@pytest.mark.parametrize("n, itin", [(3, [1, 4, 2]), (3, [0, 1, 2]), (3, [1, 2]), (1, [1]), (4, ["x", 1, 1, 1])])
def test_make_tactic_rejects(n, itin):
    with pytest.raises(GameError):
        make_tactic(n, itin)


def test_tactic_is_immutable():
    t = make_tactic(2, [1, 2])
    with pytest.raises(AttributeError):
        t.n = 3


# -- classify -------------------------------------------------------------

@pytest.mark.parametrize("n, itin, kind", [
    (4, [1, 1, 1, 1], TacticKind.PASSIVE),
    (4, [1, 2, 3, 4], TacticKind.ACTIVE),
    (3, [1, 2, 1], TacticKind.ACTIVE),
    (4, [1, 2, 1, 2], TacticKind.PASSIVE),
    (2, [1, 1], TacticKind.PASSIVE),
    (2, [2, 1], TacticKind.ACTIVE),
])
def test_classify_examples(n, itin, kind):
    assert classify(make_tactic(n, itin)) is kind


@pytest.mark.parametrize("n", range(2, 7))
def test_classify_threshold_is_floor_half(n):
    for t in all_tactics(n) if n <= 5 else []:
        assert (classify(t) is TacticKind.PASSIVE) == (t.image_size <= n // 2)


# -- binding / play -------------------------------------------------------

def test_binding_validation_and_inverse():
    b = make_binding([2, 3, 1])
    assert b(1) == 2 and b.inverse()(2) == 1
    with pytest.raises(GameError):
        make_binding([1, 1, 2])


def test_play_examples():
    assert play(make_tactic(3, [1, 1, 1]), make_tactic(3, [1, 2, 3]), make_binding([2, 3, 1])) == 2
    assert play(make_tactic(2, [1, 1]), make_tactic(2, [2, 2]), make_binding([1, 2])) == 3
    assert play(make_tactic(4, [1, 1, 1, 1]), make_tactic(4, [1, 2, 3, 4]), make_binding([3, 1, 2, 4])) == 3


def test_play_mismatched_n():
    with pytest.raises(GameError):
        play(make_tactic(2, [1, 1]), make_tactic(3, [1, 1, 1]), make_binding([1, 2]))


def test_play_matches_direct_definition():
    # W = min{i : pi(tA(i)) = tB(i)} U {n+1}, checked against every binding at n = 3
    for a, b in itertools.product(all_tactics(3), repeat=2):
        for perm in itertools.permutations((1, 2, 3)):
            meets = [i + 1 for i in range(3) if perm[a.itinerary[i] - 1] == b.itinerary[i]]
            assert play(a, b, Binding(3, perm)) == (meets[0] if meets else 4)


@given(tactic_pairs(), st.data())
@settings(max_examples=200, deadline=None)
def test_play_relabel_invariance(pair, data):
    tA, tB, pi = pair
    n = tA.n
    rho = data.draw(st.permutations(range(1, n + 1)))
    rho_inv = {r: i for i, r in enumerate(rho, start=1)}
    relabeled = Tactic(n, tuple(rho[x - 1] for x in tA.itinerary))
    pi2 = Binding(n, tuple(pi(rho_inv[y]) for y in range(1, n + 1)))
    assert play(relabeled, tB, pi2) == play(tA, tB, pi)


@given(tactic_pairs())
@settings(max_examples=200, deadline=None)
def test_play_swap_symmetry(pair):
    tA, tB, pi = pair
    assert play(tA, tB, pi) == play(tB, tA, pi.inverse())


# -- pair_set -------------------------------------------------------------

def test_pair_set_examples():
    assert pair_set(make_tactic(3, [1, 2, 3]), make_tactic(3, [1, 2, 3])).cells == {(1, 1), (2, 2), (3, 3)}
    ps = pair_set(make_tactic(3, [1, 1, 1]), make_tactic(3, [2, 2, 2]))
    assert ps.cells == {(1, 2)} and ps.m == 1
    ps = pair_set(make_tactic(4, [1, 1, 2, 2]), make_tactic(4, [1, 2, 1, 2]))
    assert ps.cells == {(1, 1), (1, 2), (2, 1), (2, 2)} and ps.m == 4


@given(tactic_pairs())
def test_pair_set_size_bounds(pair):
    tA, tB, _ = pair
    ps = pair_set(tA, tB)
    assert 1 <= ps.m <= tA.n
    assert ps.m == len(set(zip(tA.itinerary, tB.itinerary)))


def test_canonical_pattern():
    assert canonical_pattern(make_tactic(4, [3, 3, 1, 4])) == (1, 1, 2, 3)
    assert canonical_pattern(make_tactic(3, [2, 2, 2])) == (1, 1, 1)


# -- strategies -----------------------------------------------------------

def test_strategy_validation():
    t = make_tactic(2, [1, 1])
    with pytest.raises(GameError):
        Strategy(2, ((t, Fraction(1, 2)),))
    with pytest.raises(GameError):
        Strategy(2, ((t, Fraction(3, 2)), (make_tactic(2, [1, 2]), Fraction(-1, 2))))
    with pytest.raises(GameError):
        Strategy(3, ((t, Fraction(1)),))
    with pytest.raises(GameError):
        Strategy(2)


def test_from_weights_merges_and_drops_zero():
    a, b = make_tactic(2, [1, 1]), make_tactic(2, [1, 2])
    s = from_weights(2, [(a, Fraction(1, 4)), (a, Fraction(1, 4)), (b, Fraction(1, 2)), (make_tactic(2, [2, 2]), 0)])
    assert dict(s.support) == {a: Fraction(1, 2), b: Fraction(1, 2)}


def test_table_sampler_draws_from_support():
    s = from_weights(2, [(make_tactic(2, [1, 1]), Fraction(1, 4)), (make_tactic(2, [2, 1]), Fraction(3, 4))])
    draws = s.sample_tactics(np.random.default_rng(0), 20000)
    frac = sum(t.itinerary == (2, 1) for t in draws) / len(draws)
    assert abs(frac - 0.75) < 4 * (0.75 * 0.25 / 20000) ** 0.5


def test_table_stream_refuses_extra_rounds():
    s = point_mass(make_tactic(2, [1, 2]))
    stream = s.stream(np.random.default_rng(0), 3)
    stream.take(2)
    with pytest.raises(GameError):
        stream.take(1)


def test_all_tactics_count_and_cap():
    assert len(all_tactics(3)) == 27
    with pytest.raises(GameError):
        all_tactics(8)


# -- text formats ---------------------------------------------------------

def test_tactic_text_round_trip():
    ts = all_tactics(3)
    assert parse_tactics(format_tactics(ts)) == ts


def test_parse_tactics_errors():
    with pytest.raises(GameError):
        parse_tactics("1 2 x\n")
    with pytest.raises(GameError):
        parse_tactics("1 2 3\n", n=4)


def test_strategy_text_round_trip():
    s = from_weights(3, [(make_tactic(3, [1, 2, 3]), Fraction(2, 7)), (make_tactic(3, [2, 2, 2]), Fraction(5, 7))])
    text = format_strategy(s)
    assert text.startswith("n=3\n")
    again = parse_strategy(text)
    assert again.support == s.support
    assert format_strategy(again) == text


@pytest.mark.parametrize("text", ["1/2 : 1 1\n", "n=2\n1/2 1 1\n", "n=2\nabc : 1 1\n", "n=2\n1/2 : 1 1\n", "n=x\n"])
def test_parse_strategy_errors(text):
    with pytest.raises(GameError):
        parse_strategy(text)
