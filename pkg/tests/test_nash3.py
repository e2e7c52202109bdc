from __future__ import annotations

import random
from fractions import Fraction

import pytest

from stopgame.errors import NoValidDelta
from stopgame.generator import generate_instance
from stopgame.nash3 import (
    PlayerProcesses,
    build_overline_families,
    build_player_processes,
    certify_nash,
    partition_ABC,
    select_delta,
    shift_time,
    solve_three_player,
)
from stopgame.payoff import payoff_from_function
from stopgame.space import (
    FilteredSpace,
    StoppingTime,
    cond_exp,
    constant_time,
    is_stopping_time,
    make_grid,
)
from stopgame.strategy import lift_constant3
from stopgame.verify import on_path_value, resolve_profile


def urgency_space():
    return FilteredSpace(
        grid=make_grid(["0", "1/10", "1/5", "3/10"]),
        weights=(Fraction(1, 2), Fraction(1, 2)),
        partitions=(((0, 1),), ((0,), (1,)), ((0,), (1,)), ((0,), (1,))),
    )


def urgency_fields(space, urgencies):
    pts = space.grid.points

    def mk(i):
        def fn(ks, w):
            own = pts[ks[i]]
            others = sum(pts[k] for j, k in enumerate(ks) if j != i)
            return Fraction(1, 2) + urgencies[i] * own - Fraction(1, 5) * others

        return payoff_from_function(space, 3, fn)

    return [mk(i) for i in range(3)]


def test_constant_payoffs():
    inst = generate_instance(1)
    space = inst.space
    fields = [payoff_from_function(space, 3, lambda ks, w: "1/3")] * 3
    sol = solve_three_player(space, fields, eps="1/20", h=space.grid.min_step)
    assert sol.certificate.worst_gap == 0
    for s in range(3):
        pp = sol.context.players[s]
        assert pp.exit_time == constant_time(space, 0)
        K = space.grid.terminal_index
        for k in range(K + 1):
            assert pp.stop_exact[k] == pp.stop_family[k]
            assert set(pp.rival_floor[k]) == {Fraction(1, 3) + Fraction(1, 20)}


def test_own_time_only_payoff():
    """When a player's payoff ignores the rivals, the family evaluation of
    stopping now coincides with the exact one."""
    inst = generate_instance(2)
    space = inst.space
    pts = space.grid.points
    fields = [
        payoff_from_function(space, 3, lambda ks, w, i=i: Fraction(1, 2) + pts[ks[i]])
        for i in range(3)
    ]
    h = space.grid.min_step
    overline = build_overline_families(space, fields, h, "1/20")
    pp = build_player_processes(
        space, fields, 0, constant_time(space, 0), "1/20", h, overline
    )
    K = space.grid.terminal_index
    for k in range(K + 1):
        assert pp.stop_exact[k] == pp.stop_family[k]
        assert pp.stop_exact[k] == tuple([Fraction(1, 2) + pts[k]] * space.n_outcomes)


def test_ordering_on_random_instances():
    # the builders abort on a violation; run them over a spread of seeds
    for seed in range(1, 26):
        inst = generate_instance(
            seed, n_outcomes=2 + seed % 2, n_times=3 + seed % 2
        )
        h = inst.space.grid.min_step
        overline = build_overline_families(inst.space, inst.fields, h, inst.epsilon)
        theta = constant_time(inst.space, 0)
        for seat in range(3):
            pp = build_player_processes(
                inst.space, inst.fields, seat, theta, inst.epsilon, h, overline
            )
            K = inst.space.grid.terminal_index
            for k in range(K + 1):
                for w in range(inst.space.n_outcomes):
                    assert pp.stop_exact[k][w] <= pp.stop_family[k][w]
                    assert pp.stop_exact[k][w] <= pp.rival_floor[k][w]


def test_value_submartingale_before_stop_hit():
    inst = generate_instance(7, n_outcomes=3)
    space = inst.space
    h = space.grid.min_step
    overline = build_overline_families(space, inst.fields, h, inst.epsilon)
    theta = constant_time(space, 0)
    for seat in range(3):
        pp = build_player_processes(
            space, inst.fields, seat, theta, inst.epsilon, h, overline
        )
        K = space.grid.terminal_index
        eps = inst.epsilon
        for w in range(space.n_outcomes):
            k = 0
            while pp.value[k][w] > pp.stop_exact[k][w] + eps and k < K:
                cont = cond_exp(space, pp.value[k + 1], k)
                assert cont[w] >= pp.value[k][w]
                k += 1


def test_partition_examples():
    inst = generate_instance(3)
    space = inst.space
    t0 = constant_time(space, 0)
    t1 = constant_time(space, 1)
    a, b, c = partition_ABC(space, {0: t0, 1: t0, 2: t0})
    assert all(a) and not any(b) and not any(c)
    a, b, c = partition_ABC(space, {0: t1, 1: t0, 2: t0})
    assert all(b)
    a, b, c = partition_ABC(space, {0: t1, 1: t1, 2: t0})
    assert all(c)


def test_partition_random_triples():
    rng = random.Random(229)
    inst = generate_instance(4, n_outcomes=3)
    space = inst.space
    sts = [
        StoppingTime(tuple(rng.randint(0, space.grid.terminal_index) for _ in range(3)))
        for _ in range(30)
    ]
    for i in range(0, 30, 3):
        a, b, c = partition_ABC(space, {0: sts[i], 1: sts[i + 1], 2: sts[i + 2]})
        for w in range(space.n_outcomes):
            assert a[w] + b[w] + c[w] == 1


def fake_processes(space, layers, exit_idx):
    return PlayerProcesses(
        seat=0,
        stop_exact=layers,
        stop_family=layers,
        rival={},
        rival_floor=layers,
        value=layers,
        exit_time=StoppingTime(exit_idx),
    )


def test_select_delta_constant_processes():
    inst = generate_instance(5)
    space = inst.space
    flat = tuple(
        tuple([Fraction(1, 2)] * space.n_outcomes) for _ in range(len(space.grid))
    )
    pp = fake_processes(space, flat, (0,) * space.n_outcomes)
    theta = constant_time(space, 0)
    delta = select_delta(space, {0: pp, 1: pp, 2: pp}, theta, "1/20")
    for dur in delta.per_atom.values():
        assert dur >= space.grid.span  # maximal allowed multiple


def test_select_delta_jumpy_process():
    inst = generate_instance(6)
    space = inst.space
    eps = Fraction(1, 20)
    step_jump = eps / 2
    layers = tuple(
        tuple([k * step_jump] * space.n_outcomes) for k in range(len(space.grid))
    )
    pp = fake_processes(space, layers, (0,) * space.n_outcomes)
    theta = constant_time(space, 0)
    delta = select_delta(space, {0: pp, 1: pp, 2: pp}, theta, eps)
    assert set(delta.per_atom.values()) == {space.grid.min_step}


def test_select_delta_no_valid():
    inst = generate_instance(8)
    space = inst.space
    eps = Fraction(1, 20)
    layers = tuple(
        tuple([k * 2 * eps] * space.n_outcomes) for k in range(len(space.grid))
    )
    pp = fake_processes(space, layers, (0,) * space.n_outcomes)
    with pytest.raises(NoValidDelta):
        select_delta(space, {0: pp, 1: pp, 2: pp}, constant_time(space, 0), eps)


def test_select_delta_per_atom_measurable():
    """Exit processes that differ across the first split give per-atom delays."""
    space = FilteredSpace(
        grid=make_grid(["0", "1/20", "1/10", "3/20"]),
        weights=(Fraction(1, 2), Fraction(1, 2)),
        partitions=(((0,), (1,)), ((0,), (1,)), ((0,), (1,)), ((0,), (1,))),
    )
    eps = Fraction(1, 20)
    layers = tuple(
        (k * eps / 2, Fraction(0)) for k in range(len(space.grid))
    )
    pp = fake_processes(space, layers, (0, 0))
    theta = constant_time(space, 0)
    delta = select_delta(space, {0: pp, 1: pp, 2: pp}, theta, eps)
    durations = set(delta.per_atom.values())
    assert len(durations) == 2  # jumpy branch forces a shorter delay
    shifted = shift_time(space, pp.exit_time, delta.duration)
    assert is_stopping_time(space, shifted.idx)


def test_on_path_identity():
    """Conforming play decomposes into the family evaluations at the exits."""
    for seed in (11, 12, 13):
        inst = generate_instance(seed, n_outcomes=3)
        space = inst.space
        theta = constant_time(space, 0)
        sol = solve_three_player(space, inst.fields, eps=inst.epsilon)
        ctx = sol.context
        times = resolve_profile(space, sol.profile)
        for p in range(3):
            path, _ = on_path_value(space, inst.fields[p], sol.profile, theta)
            for atom, got in path.items():
                want = Fraction(0)
                members = atom[1]
                total = sum(space.weights[w] for w in members)
                for w in members:
                    e = next(s for s in range(3) if ctx.events[s][w])
                    mu = ctx.players[e].exit_time.idx[w]
                    if e == p:
                        ref = ctx.players[p].stop_family[mu][w]
                    else:
                        ref = ctx.players[p].rival[e][mu][w]
                    want += space.weights[w] * ref
                assert got == want / total


def test_solve_certifies_and_validates():
    for seed in (21, 22):
        inst = generate_instance(seed, n_outcomes=2, n_times=4)
        sol = solve_three_player(inst.space, inst.fields, eps=inst.epsilon)
        assert sol.certificate.passes
        assert sol.certificate.worst_gap <= sol.certificate.bound


def test_heterogeneous_urgency_exits_split():
    space = urgency_space()
    fields = urgency_fields(
        space, [Fraction(9, 10), Fraction(-3, 10), Fraction(-8, 10)]
    )
    sol = solve_three_player(space, fields, eps="1/8", h="1/10")
    assert sol.certificate.passes
    exits = {s: sol.context.players[s].exit_time.idx for s in range(3)}
    assert min(exits[1]) == 0 and min(exits[0]) > 0
    assert any(sol.context.events[1])  # seat 1 is the designated stopper


def test_broken_profile_detected():
    """A profile ignoring the late rewards fails a tight certificate."""
    space = urgency_space()
    fields = urgency_fields(
        space, [Fraction(9, 10), Fraction(8, 10), Fraction(7, 10)]
    )
    eps = Fraction(1, 1000)
    profile = [lift_constant3(space, s, 0) for s in range(3)]
    cert = certify_nash(space, fields, profile, constant_time(space, 0), eps)
    assert not cert.passes
    assert cert.worst_gap > cert.bound


def test_constant_payoff_profile_initials():
    inst = generate_instance(41)
    space = inst.space
    fields = [payoff_from_function(space, 3, lambda ks, w: "1/2")] * 3
    sol = solve_three_player(space, fields, eps="1/20", h=space.grid.min_step)
    ctx = sol.context
    assert all(ctx.events[0])  # ties designate the first seat
    assert sol.profile[0].initial == ctx.players[0].exit_time
    for s in (1, 2):
        assert sol.profile[s].initial == ctx.saddles[0][1][s].initial


def test_built_processes_are_adapted():
    from stopgame.space import is_adapted_layer

    inst = generate_instance(42, n_outcomes=3)
    sol = solve_three_player(inst.space, inst.fields, eps=inst.epsilon)
    for s in range(3):
        pp = sol.context.players[s]
        for k in range(len(inst.space.grid)):
            for layers in (pp.stop_exact, pp.stop_family, pp.rival_floor):
                assert is_adapted_layer(inst.space, layers[k], k)
            if pp.value[k] is not None:
                assert is_adapted_layer(inst.space, pp.value[k], k)


def test_dispatch_tables_on_designated_rival():
    """With seat 1 exiting first, seat 0's tables route per the case split."""
    from stopgame.nash2 import family_lookup

    space = urgency_space()
    fields = urgency_fields(
        space, [Fraction(9, 10), Fraction(-3, 10), Fraction(-8, 10)]
    )
    sol = solve_three_player(space, fields, eps="1/8", h="1/10")
    ctx = sol.context
    assert all(ctx.events[1])  # B everywhere on this fixture
    pts = space.grid.points
    K = space.grid.terminal_index
    strat0 = sol.profile[0]
    shift1 = ctx.shifted_exit[1]
    exit1 = ctx.players[1].exit_time
    for s in range(K):
        entry = family_lookup(ctx.overline[1], pts[s])
        # seat 0 owns the lower free slot of the after-1 family
        overline_initial = entry.payload[0].initial
        saddle_react = ctx.saddles[1][1][0].react_one[1][s]
        for w in range(space.n_outcomes):
            got = strat0.react_one[1][s].idx[w]
            if pts[s] >= pts[shift1.idx[w]]:
                assert got == saddle_react.idx[w]
            else:
                assert got == overline_initial.idx[w]
    # simultaneous rivals at seat 1's exit: punish the non-designated one
    for w in range(space.n_outcomes):
        a = exit1.idx[w]
        if a < K and pts[a] < pts[shift1.idx[w]]:
            entry = family_lookup(ctx.singles[(0, 2)], pts[a])
            assert strat0.react_two[(a, a)].idx[w] == entry.payload[0].idx[w]


def test_standalone_coalition_value_tracks_duel_value():
    """The coalition game started at any time never exceeds the assembled
    duel value by more than eps (the floor's built-in margin)."""
    from stopgame.coalition import build_components

    inst = generate_instance(43, n_outcomes=2, n_times=4)
    space = inst.space
    eps = inst.epsilon
    sol = solve_three_player(space, inst.fields, eps=eps)
    h = sol.context.h
    for seat in range(3):
        pp = sol.context.players[seat]
        for k in range(len(space.grid)):
            comp = build_components(
                space, inst.fields[seat], seat, constant_time(space, k), eps, h
            )
            for w in range(space.n_outcomes):
                assert comp.value[k][w] <= pp.value[k][w] + eps
