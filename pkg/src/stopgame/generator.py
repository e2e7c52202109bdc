"""Seeded random instances whose payoffs meet a target time modulus.

Payoffs combine three ingredients: a deterministic base with per-slot slopes,
and a martingale carrying the outcome information, scaled so that each
refinement step moves the payoff by at most half the slope budget times the
step length.  The result is adapted by construction and Lipschitz in the
total time displacement with constant at most the requested slope, so the
continuity assumption holds with eta(delta) = slope * delta before slack.

The grid is uniform with a step small enough that a window width exists for
the default tolerance; the last point is the never-stop stand-in.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction

from .payoff import PayoffField, payoff_from_function
from .space import FilteredSpace, TimeGrid, cond_exp, rat


@dataclass(frozen=True)
class Instance:
    space: FilteredSpace
    fields: tuple[PayoffField, ...]
    epsilon: Fraction
    seed: int


def random_partitions(rng: random.Random, n_outcomes: int, n_times: int):
    parts = [[tuple(range(n_outcomes))]]
    for _ in range(n_times - 2):
        prev = parts[-1]
        nxt = []
        for block in prev:
            if len(block) > 1 and rng.random() < 0.7:
                cut = rng.randint(1, len(block) - 1)
                nxt.append(tuple(block[:cut]))
                nxt.append(tuple(block[cut:]))
            else:
                nxt.append(block)
        parts.append(nxt)
    parts.append([(w,) for w in range(n_outcomes)])
    return tuple(tuple(p) for p in parts)


def random_space(rng: random.Random, n_outcomes: int, n_times: int, step) -> FilteredSpace:
    step = rat(step)
    raw = [rng.randint(1, 9) for _ in range(n_outcomes)]
    total = sum(raw)
    weights = tuple(Fraction(r, total) for r in raw)
    points = tuple(k * step for k in range(n_times))
    return FilteredSpace(
        grid=TimeGrid(points),
        weights=weights,
        partitions=random_partitions(rng, n_outcomes, n_times),
    )


def random_payoff(
    space: FilteredSpace, rng: random.Random, slope: Fraction, arity: int = 3
) -> PayoffField:
    n = space.n_outcomes
    K = space.grid.terminal_index
    info = tuple(Fraction(rng.randint(0, 64), 64) for _ in range(n))
    mart = {k: cond_exp(space, info, k) for k in range(K + 1)}
    jump = max(
        (abs(mart[k + 1][w] - mart[k][w]) for k in range(K) for w in range(n)),
        default=Fraction(0),
    )
    half = slope * Fraction(9, 20)  # strictly inside the per-part budget
    gamma = min(Fraction(1), half * space.grid.min_step / jump) if jump else Fraction(1)
    slopes = [Fraction(rng.randint(-100, 100), 100) * half for _ in range(arity)]
    base = Fraction(rng.randint(35, 65), 100)
    anchor = mart[0][0]
    pts = space.grid.points

    def clamp01(v: Fraction) -> Fraction:
        return min(max(v, Fraction(0)), Fraction(1))

    def fn(ks, w):
        v = base + sum(s * pts[k] for s, k in zip(slopes, ks))
        v += gamma * (mart[max(ks)][w] - anchor)
        return clamp01(v)

    return payoff_from_function(space, arity, fn)


def generate_instance(
    seed: int,
    n_outcomes: int = 2,
    n_times: int = 4,
    slope="1",
    epsilon="1/20",
    n_players: int = 3,
) -> Instance:
    """Deterministic instance for a seed; payoffs lie in [0,1].

    The uniform step is sized so that slope * step stays well under epsilon,
    which keeps a valid window width available and the construction's
    orderings inside their tolerance budgets.
    """
    slope, epsilon = rat(slope), rat(epsilon)
    if slope <= 0:
        raise ValueError("slope must be positive")
    rng = random.Random(seed)
    step = epsilon / (slope * 2 * (n_times + 2))
    space = random_space(rng, n_outcomes, n_times, step)
    fields = tuple(
        random_payoff(space, rng, slope, arity=n_players) for _ in range(n_players)
    )
    return Instance(space=space, fields=fields, epsilon=epsilon, seed=seed)
