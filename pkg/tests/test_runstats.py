import json
import math
from collections import Counter
from fractions import Fraction

import numpy as np
import pytest

from pathrun import agents, errors, propagator, runstats
from pathrun.action import ActionFunctional
from pathrun.agents import AgentSpec, RunRecord, generate_runs
from pathrun.pathsearch import min_time_path
from pathrun.runstats import TubeSpec, completion_histogram, fit_hbar, in_tube, trajectory_frequencies, worlds_tree
from pathrun.simworld import PlatformerSystem, decode_inputs, run

from oracles import first_divergences


def rec(i, inputs, completed=True, frames=None):
    frames = len(inputs.split()) if frames is None else frames
    return RunRecord(i, 0, inputs, completed, frames, 0.0)


def test_histogram_recount(tmp_path, l1):
    runs = generate_runs(AgentSpec(agents.NOISY, 0.05), l1, 2000, 21)
    path = tmp_path / "runs.jsonl"
    agents.write_log(runs, path)
    # independent recount straight from the JSON stream
    counts = Counter(
        (d["frames"] if d["completed"] else "DNF") for d in map(json.loads, path.read_text().splitlines())
    )
    hist = completion_histogram(agents.read_log(path))
    assert hist == {k: Fraction(v, 2000) for k, v in counts.items()}
    assert sum(hist.values()) == 1


def test_histogram_dnf_last():
    hist = completion_histogram([rec(0, "N-", False, 120), rec(1, "R-"), rec(2, "R- R-")])
    assert list(hist) == [1, 2, "DNF"]
    assert hist["DNF"] == Fraction(1, 3)


@pytest.mark.parametrize("fn", [completion_histogram, trajectory_frequencies, worlds_tree])
def test_empty_input(fn):
    with pytest.raises(errors.EmptyInput):
        fn([])


def test_tube_membership(l1):
    ref = min_time_path(l1, cap=1).witness
    tube = TubeSpec(ref, 0)
    assert in_tube(ref, tube)
    slow = run(l1, decode_inputs("N- R- R- R- R-"))
    assert slow.completed
    assert not in_tube(slow, tube)
    assert in_tube(slow, TubeSpec(ref, 16))
    assert not in_tube(run(l1, decode_inputs("N- N-")), TubeSpec(ref, 100))
    with pytest.raises(ValueError):
        TubeSpec(ref, -1)


def test_tube_fraction_sets_flags(l1):
    ref = min_time_path(l1, cap=1).witness
    runs = generate_runs(AgentSpec(agents.NOISY, 0.1), l1, 300, 2)
    frac = runstats.tube_fraction(runs, TubeSpec(ref, 8), l1)
    assert frac == Fraction(sum(r.in_tube for r in runs), 300)
    assert 0 < frac < 1


def test_frequencies_sum_to_one(l1):
    runs = generate_runs(AgentSpec(agents.NOISY, 0.1), l1, 500, 8)
    freqs = trajectory_frequencies(runs)
    assert sum(freqs.values()) == 1
    assert len(freqs) == len({r.inputs for r in runs})


def test_worlds_tree_small():
    runs = [rec(0, "R- R- R-"), rec(1, "R- R- R-"), rec(2, "R- N- R-"), rec(3, "R- R-"), rec(4, "L-")]
    tree = worlds_tree(runs)
    assert tree.root.count == 5 and tree.check()
    assert tree.leaf_count == 4
    assert tree.branch_events == {0: 1, 1: 1}
    text = tree.to_text()
    assert text.splitlines()[0] == "* 5"
    assert tree.to_dot().startswith("digraph worlds {")
    assert worlds_tree(runs).to_text() == text


def test_worlds_tree_pairwise_oracle(l1):
    runs = generate_runs(AgentSpec(agents.NOISY, 0.1), l1, 1000, 13)
    tree = worlds_tree(runs)
    points = first_divergences(r.inputs.split() for r in runs)
    assert tree.total_branch_events == len(points)
    assert tree.branch_events == dict(sorted(Counter(len(p) for p in points).items()))
    assert tree.leaf_count == len({r.inputs for r in runs})
    assert tree.check()


def test_kl_and_floor():
    p = {1: 0.25, 2: 0.75}
    assert runstats.kl_divergence(p, p) == 0
    f = runstats.floored({1: 1.0}, range(1, 4))
    assert math.fsum(f.values()) == pytest.approx(1)
    assert f[3] > 0


def test_fit_validation(l1):
    with pytest.raises(errors.NoCompletedRuns):
        fit_hbar([rec(0, "N-", False, 120)], l1, ActionFunctional(), [1.0])
    with pytest.raises(ValueError):
        fit_hbar([rec(0, "R-")], l1, ActionFunctional(), [])
    with pytest.raises(ValueError):
        fit_hbar([rec(0, "R-")], l1, ActionFunctional(), [0.0, 1.0])


def _model(l1, hbar, window):
    ts = PlatformerSystem(l1)
    return propagator.completion_distribution(ts, propagator.WeightFunction.feynman(hbar), ActionFunctional(), window)


def test_fit_self_consistency_small(l1):
    window = 12
    model = _model(l1, 1.0, window)
    frames = sorted(model)
    rng = np.random.Generator(np.random.Philox(5))
    draws = rng.choice(frames, size=5000, p=[model[t] for t in frames])
    runs = [RunRecord(i, 0, "", True, int(t), 0.0) for i, t in enumerate(draws)]
    fit = fit_hbar(runs, l1, ActionFunctional(), [0.5, 1.0, 2.0], frame_cap=window)
    assert fit.hbar_eff == 1.0
    assert all(d >= 0 for d in fit.divergence)
    assert fit.dnf_fraction == 0


def test_fit_reports_dnf(l1):
    runs = [rec(0, "R- R- R- R-"), rec(1, "N-", False, 120)]
    fit = fit_hbar(runs, l1, ActionFunctional(), [1.0, 2.0])
    assert fit.dnf_fraction == 0.5
    assert fit.frame_cap == 4
    assert fit.hbar_eff in fit.grid


def test_histogram_trivial():
    assert completion_histogram([rec(0, "", True, 120)]) == {120: 1}
    assert completion_histogram([rec(0, "", True, 100), rec(1, "", True, 120)]) == {100: 0.5, 120: 0.5}


def test_tube_shrinking_radius(l1):
    ref = min_time_path(l1, cap=1).witness
    runs = generate_runs(AgentSpec(agents.NOISY, 0.1), l1, 400, 6)
    fracs = [runstats.tube_fraction(runs, TubeSpec(ref, r), l1) for r in (64, 32, 16, 8, 4, 0)]
    assert fracs == sorted(fracs, reverse=True)
    dnf = [rec(0, "N- N-", False, 2)]
    assert runstats.tube_fraction(dnf, TubeSpec(ref, 8), l1) == 0


def test_single_point_grid(l1):
    runs = generate_runs(AgentSpec(agents.NOISY, 0.1), l1, 50, 6)
    assert fit_hbar(runs, l1, ActionFunctional(), [3.0]).hbar_eff == 3.0
