"""The full three-player pipeline and its certificate, step by step.

Per player: the exact value of stopping now, the value of stopping now when
the other two answer with their precomputed equilibrium, the value of a
rival stopping first, the duel value, and the exit time where the duel value
pins to the committed stop value.  Whoever exits first stops; everyone else
responds through window-indexed families.  The certificate is an exact
best-response computation per player, never an appeal to theory.
"""

from stopgame import solve_three_player
from stopgame.generator import generate_instance
from stopgame.space import FilteredSpace, make_grid
from stopgame.payoff import payoff_from_function
from stopgame.verify import resolve_profile
from fractions import Fraction

print("=== a generated instance ===")
inst = generate_instance(seed=7, n_outcomes=3, n_times=4)
sol = solve_three_player(inst.space, inst.fields, eps=inst.epsilon)
cert = sol.certificate
print("eps:", cert.eps, " bound 13*eps:", cert.bound)
print("worst certified gap:", cert.worst_gap, " passes:", cert.passes)
for s in range(3):
    pp = sol.context.players[s]
    print(f"player {s}: exit time {pp.exit_time.idx}")
print("first-exit events (A,B,C):", sol.context.events)
print("resolved stops:", [t.idx for t in resolve_profile(inst.space, sol.profile)])

print("\n=== heterogeneous urgencies: the middle player exits first ===")
space = FilteredSpace(
    grid=make_grid(["0", "1/10", "1/5", "3/10"]),
    weights=("1/2", "1/2"),
    partitions=(((0, 1),), ((0,), (1,)), ((0,), (1,)), ((0,), (1,))),
)
pts = space.grid.points
urgency = [Fraction(9, 10), Fraction(-3, 10), Fraction(-8, 10)]


def mk(i):
    def fn(ks, w):
        own = pts[ks[i]]
        others = sum(pts[k] for j, k in enumerate(ks) if j != i)
        return Fraction(1, 2) + urgency[i] * own - Fraction(1, 5) * others

    return payoff_from_function(space, 3, fn)


fields = [mk(i) for i in range(3)]
sol = solve_three_player(space, fields, eps="1/8", h="1/10")
print("worst gap:", sol.certificate.worst_gap, "<= bound", sol.certificate.bound)
print("exit times:", {s: sol.context.players[s].exit_time.idx for s in range(3)})
print("events (A,B,C):", sol.context.events)
print("resolved stops:", [t.idx for t in resolve_profile(space, sol.profile)])
print("(seat 1 stops first; seat 2 answers via the after-1 family; seat 0 waits)")
