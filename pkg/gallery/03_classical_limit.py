# Shrinking hbar concentrates the path sum on the least-action path.
#
# The lattice here allows jumps of up to 10 cells per frame with a light
# particle, so the phase differences between neighbouring paths are small
# until hbar is small. Paths staying within 4 cells of the straight path
# form the "tube"; the rest are lumped together.
from pathrun import ActionFunctional, LatticeSystem, hbar_sweep, least_action_path

ts = LatticeSystem(81, 4, start=40, max_step=10)
f = ActionFunctional(mass=0.002)
ref = least_action_path(ts, f, 4, lambda s: s.frame == 4 and s.x == 40).witness
print("reference path:", [s.x for s in ref.states])

print("\n  hbar    P(tube)   P(tube) by enumeration")
for row in hbar_sweep(ts, f, [10, 3, 1, 0.3, 0.1, 0.03, 0.01], ref, radius=4):
    print(f"{row.hbar:6g}   {row.in_tube:.5f}   {row.in_tube_enumerated:.5f}")
