# Noisy players: how run statistics spread as the error rate grows.
from pathlib import Path

from pathrun import ActionFunctional, AgentSpec, completion_histogram, fit_hbar, generate_runs
from pathrun import min_time_path, read_level, tube_fraction, worlds_tree
from pathrun.agents import NOISY
from pathrun.runstats import TubeSpec

lvl = read_level(Path(__file__).resolve().parent.parent / "fixtures" / "l1.txt")
tube = TubeSpec(min_time_path(lvl, cap=1).witness, radius=8)
f = ActionFunctional()

for p in (0.0, 0.01, 0.05, 0.10):
    runs = generate_runs(AgentSpec(NOISY, p), lvl, 2000, base_seed=11)
    hist = completion_histogram(runs)
    frac = tube_fraction(runs, tube, lvl)
    tree = worlds_tree(runs)
    fit = fit_hbar(runs, lvl, f)
    top = ", ".join(f"{t}:{float(v):.3f}" for t, v in list(hist.items())[:4])
    print(f"p={p:.2f}  in tube {float(frac):.3f}  distinct runs {tree.leaf_count:4d}  "
          f"branch points {tree.total_branch_events:4d}  hbar_eff {fit.hbar_eff:.3g}")
    print("        frames histogram (first bins)", top)
