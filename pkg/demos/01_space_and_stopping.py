"""Filtered spaces, conditional expectation, and stopping times.

The model is a finite outcome set with a refining partition per grid time:
what a player knows at time t is which block the true outcome lies in.  The
last grid point stands in for "never stop".  All arithmetic is exact.
"""

from stopgame import (
    StoppingTime,
    cond_exp,
    cond_exp_at,
    is_stopping_time,
    make_grid,
    validate_space,
)
from stopgame.space import FilteredSpace, constant_time, expectation, rv

space = FilteredSpace(
    grid=make_grid(["0", "1/2", "1", "2"]),
    weights=("1/4", "1/4", "1/2"),
    partitions=(
        ((0, 1, 2),),          # nothing known at time 0
        ((0, 1), (2,)),        # first split at 1/2
        ((0,), (1,), (2,)),    # everything revealed at 1
        ((0,), (1,), (2,)),
    ),
)
print("space diagnostics:", validate_space(space) or "valid")

payout = rv(("1", "0", "1/2"))
print("\npointwise payout:", payout)
for k, t in enumerate(space.grid.points):
    print(f"  E[payout | time {t}] =", cond_exp(space, payout, k))
print("unconditional expectation:", expectation(space, payout))

# a stopping time may only use information already revealed
good = StoppingTime((2, 2, 1))   # stop early exactly on the lone block
bad = (1, 2, 2)                  # distinguishes outcomes 0 and 1 too early
print("\nstop-at-(1, 1, 1/2) is a stopping time:", is_stopping_time(space, good.idx))
print("peeking rule", bad, "is a stopping time:", is_stopping_time(space, bad))

print("conditioning at the stopping time:", cond_exp_at(space, payout, good))
print("conditioning at the start:", cond_exp_at(space, payout, constant_time(space, 0)))
