"""Reactive strategies and how a profile resolves into actual stop times.

A strategy is an initial stopping time plus reactions to observed stops,
each strictly later than the observation.  Resolution is chronological:
earliest committed players stop, survivors switch to the matching reaction,
and the loop repeats.  The obstinate lift commits to a stopping time and
ignores everyone, which is exactly what a cooperating minimizer needs.
"""

from stopgame import lift_constant3, lift_obstinate2, resolve2, resolve3
from stopgame.space import FilteredSpace, StoppingTime, constant_time, make_grid
from stopgame.strategy import StrategyOrder2, patch_pair

space = FilteredSpace(
    grid=make_grid([0, 1, 2]),
    weights=("1/2", "1/2"),
    partitions=(((0, 1),), ((0,), (1,)), ((0,), (1,))),
)

# two players: the second reacts to the first stop it observes
eager = StrategyOrder2(
    initial=constant_time(space, 0),
    react=(constant_time(space, 2),) * 3,
)
watcher = StrategyOrder2(
    initial=constant_time(space, 2),
    react=(StoppingTime((1, 2)), constant_time(space, 2), constant_time(space, 2)),
)
ra, rb = resolve2(space, eager, watcher)
print("eager stops at:", ra.idx, " watcher reacts and stops at:", rb.idx)

# the obstinate lift ignores observations entirely
tau = StoppingTime((1, 2))
ra, rb = resolve2(space, lift_obstinate2(space, tau), eager)
print("obstinate committed to", tau.idx, "and indeed stopped at", ra.idx)

# three players: ties stop together, the survivor reacts to the pair
s0 = lift_constant3(space, 0, 2)
s1 = lift_constant3(space, 1, 1)
s2 = lift_constant3(space, 2, 1)
r0, r1, r2 = resolve3(space, s0, s1, s2)
print("\nthree players with initials (2,1,1):")
print("  seats 1,2 tie at", r1.idx, r2.idx, "; seat 0 reacts with", r0.idx)

# patching redirects early observations toward anchor-time behavior
anchored = StrategyOrder2(
    initial=constant_time(space, 1),
    react=(constant_time(space, 2), StoppingTime((2, 2)), constant_time(space, 2)),
)
hat, _ = patch_pair(space, (anchored, anchored), 1)
print("\npatched reaction to an observation before the anchor:", hat.react[0].idx)
print("unpatched reaction at the anchor stays:", hat.react[1].idx)
