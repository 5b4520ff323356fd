# A tour of the simulator and the classical searches on the 8x6 fixture.
from pathlib import Path

from pathrun import ActionFunctional, CategoryConstraint, min_time_path, read_level, run, trajectory_action
from pathrun.simworld import decode_inputs, encode_inputs

lvl = read_level(Path(__file__).resolve().parent.parent / "fixtures" / "l1.txt")
print(lvl)
print()

# (1) replay a hand-written input string, frame by frame
traj = run(lvl, decode_inputs("R- R- R- R-"))
for s in traj.states:
    print(f"frame {s.frame}: x={s.x:3d} y={s.y:3d} vx={s.vx:2d} vy={s.vy:2d}")
print("completed:", traj.completed, "in", traj.seconds, "s")

# (2) fastest any% completion, and how many distinct trajectories tie
fast = min_time_path(lvl)
print("\nany%  ->", fast.optimal_value, "frames,", fast.optimal_count, "optimal trajectories")
for tr in fast.co_optimal[:4]:
    print("   ", encode_inputs(tr.inputs))

# (3) collecting both items costs a lot more time
full = min_time_path(lvl, CategoryConstraint.hundred_percent(lvl), cap=1)
print("100% ->", full.optimal_value, "frames")

# (4) the same runs measured with the Lagrangian action instead of the clock
lag = ActionFunctional()
print("\naction of the any% witness :", trajectory_action(fast.witness, lag, lvl))
print("action of the 100% witness :", trajectory_action(full.witness, lag, lvl))
