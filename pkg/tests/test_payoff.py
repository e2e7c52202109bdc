from __future__ import annotations

import random
from fractions import Fraction

import pytest

from conftest import random_rv, random_space
from stopgame.errors import NoValidH
from stopgame.payoff import (
    MODULUS_SLACK,
    certifies_field,
    check_adapted,
    estimate_modulus,
    modulus_max,
    payoff_from_function,
    select_h,
)
from stopgame.space import cond_exp, make_grid


def test_time_only_payoff_is_adapted(three_time_space):
    field = payoff_from_function(three_time_space, 2, lambda ks, w: ks[0] + ks[1])
    assert check_adapted(field) == []


def test_outcome_split_at_time_zero_violates(three_time_space):
    field = payoff_from_function(
        three_time_space, 2, lambda ks, w: w if ks == (0, 0) else 0
    )
    assert (0, 0) in check_adapted(field)


def test_indicator_resolved_at_max_is_adapted(three_time_space):
    space = three_time_space

    def fn(ks, w):
        if max(ks) >= 1:
            return 1 if w == 0 else 0
        return Fraction(1, 2)

    field = payoff_from_function(space, 2, fn)
    assert check_adapted(field) == []


def test_constant_modulus_is_slack_only(three_time_space):
    field = payoff_from_function(three_time_space, 2, lambda ks, w: 7)
    mod = estimate_modulus(field)
    assert all(v == MODULUS_SLACK for _, v in mod.table)
    assert certifies_field(mod, field)


def test_sum_of_times_modulus(three_time_space):
    # payoff t1+t2 on an integer grid: eta(delta) is delta plus slack
    field = payoff_from_function(
        three_time_space,
        2,
        lambda ks, w: three_time_space.grid.points[ks[0]]
        + three_time_space.grid.points[ks[1]],
    )
    mod = estimate_modulus(field)
    for delta, eta in mod.table:
        assert eta == delta + MODULUS_SLACK
    assert certifies_field(mod, field)


def test_jump_payoff_modulus(three_time_space):
    field = payoff_from_function(
        three_time_space, 2, lambda ks, w: 1 if max(ks) >= 1 else 0
    )
    mod = estimate_modulus(field)
    assert mod.eval(1) >= 1


def test_modulus_certifies_random_adapted_fields():
    rng = random.Random(19)
    for _ in range(10):
        space = random_space(rng, 3, 4)
        base = {k: cond_exp(space, random_rv(rng, 3), k) for k in range(4)}
        field = payoff_from_function(space, 2, lambda ks, w: base[max(ks)][w])
        assert check_adapted(field) == []
        assert certifies_field(estimate_modulus(field), field)


def test_modulus_max_dominates_pointwise_max():
    rng = random.Random(23)
    space = random_space(rng, 3, 4)
    f1 = payoff_from_function(space, 2, lambda ks, w: cond_exp(space, (1, 2, 5), max(ks))[w] * ks[0])
    f2 = payoff_from_function(space, 2, lambda ks, w: cond_exp(space, (3, 0, 1), max(ks))[w] * ks[1])
    m1, m2 = estimate_modulus(f1), estimate_modulus(f2)
    merged = modulus_max([m1, m2])
    fmax = payoff_from_function(
        space, 2, lambda ks, w: max(f1.value_at(ks, w), f2.value_at(ks, w))
    )
    mod_of_max = estimate_modulus(fmax)
    for delta, eta in mod_of_max.table:
        assert eta <= merged.eval(delta)


def test_select_h_flat_payoff(three_time_space):
    field = payoff_from_function(three_time_space, 2, lambda ks, w: 3)
    mod = estimate_modulus(field)
    h = select_h(mod, "1/10", three_time_space.grid)
    assert h == three_time_space.grid.span


def test_select_h_linear():
    grid = make_grid([0, "1/4", "1/2", "3/4", 1])
    deltas = sorted(
        {
            abs(a - b) + abs(c - d)
            for a in grid.points
            for b in grid.points
            for c in grid.points
            for d in grid.points
        }
    )
    from stopgame.payoff import Modulus

    mod = Modulus(tuple((d, d) for d in deltas if d > 0), cap=Fraction(4))
    h = select_h(mod, "3/10", grid)
    assert h == Fraction(1, 4)


def test_select_h_no_valid(three_time_space):
    field = payoff_from_function(
        three_time_space, 2, lambda ks, w: 1 if max(ks) >= 1 else 0
    )
    mod = estimate_modulus(field)
    with pytest.raises(NoValidH):
        select_h(mod, "1/2", three_time_space.grid)


def test_pin_reduces_arity(three_time_space):
    field = payoff_from_function(three_time_space, 3, lambda ks, w: ks[0] * 9 + ks[1] * 3 + ks[2])
    pinned = field.pin(1, 2)
    assert pinned.arity == 2
    assert pinned.value_at((1, 0), 0) == 1 * 9 + 2 * 3 + 0
