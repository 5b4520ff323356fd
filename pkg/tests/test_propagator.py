import cmath
import itertools
import math

import numpy as np
import pytest

from pathrun import errors, propagator
from pathrun.action import COMPLETION_TIME, ActionFunctional
from pathrun.pathsearch import least_action_path
from pathrun.propagator import (
    AmplitudeField,
    TransferOperator,
    WeightFunction,
    amplitude_bruteforce,
    completion_amplitude,
    double_slit,
    enumerate_paths,
    hbar_sweep,
    propagate,
)
from pathrun.simworld import ALPHABET, LatticeState, LatticeSystem, PlatformerSystem, load_level, slit_walls, start_state, step

from oracles import hand_action, isclose_c, lattice_amplitudes, lattice_path_count, platformer_amplitudes, reaches_goal

KINETIC = ActionFunctional(mass=1.0)


def test_enumerate_trivial():
    ts = LatticeSystem(3, 2, start=1)
    assert enumerate_paths(ts, 0) == [()]
    assert len(enumerate_paths(ts, 1)) == 3


def test_path_cap():
    ts = LatticeSystem(9, 6, start=4)
    with pytest.raises(errors.PathCapExceeded):
        enumerate_paths(ts, 6, cap=100)


def test_bruteforce_trivial_cases():
    ts = LatticeSystem(3, 2, start=1)
    w = WeightFunction.feynman(1.0)
    assert amplitude_bruteforce(ts, None, LatticeState(1, 0), 0, w, KINETIC) == 1 + 0j
    # only one path reaches x = 0 then x = ... in one frame: the single left step
    assert amplitude_bruteforce(ts, None, LatticeState(0, 1), 1, w, KINETIC) == cmath.exp(0.5j)


def test_unit_field_at_start():
    ts = LatticeSystem(5, 3, start=2)
    fields = propagate(ts, WeightFunction.feynman(1.0), KINETIC, 0)
    assert len(fields) == 1 and fields[0].entries == {2: 1 + 0j}


def test_small_lattice_matches_bruteforce():
    ts = LatticeSystem(3, 2, start=1)
    w = WeightFunction.feynman(1.0)
    last = propagate(ts, w, KINETIC, 2)[2]
    for x in range(3):
        ref = amplitude_bruteforce(ts, None, LatticeState(x, 2), 2, w, KINETIC)
        assert isclose_c(last[x], ref, 1e-12)


@pytest.mark.parametrize("hbar", [0.3, 1.0, 7.0])
def test_two_slit_matches_enumeration(hbar):
    walls = slit_walls(15, 4, (5, 9))
    ts = LatticeSystem(15, 8, walls, start=7)
    w = WeightFunction.feynman(hbar)
    last = propagate(ts, w, KINETIC, 8)[8]
    oracle = lattice_amplitudes(15, 8, 7, walls, hbar)
    assert set(last.entries) == set(oracle)
    for x, a in oracle.items():
        assert isclose_c(last[x], a, 1e-9)
    p = propagator.born_distribution(last)
    q = propagator.born_distribution(oracle)
    assert math.fsum(p.values()) == pytest.approx(1, abs=1e-9)
    assert all(abs(p[x] - q[x]) <= 1e-9 for x in q)


def test_boltzmann_counts_paths():
    # at huge hbar every Boltzmann weight is ~1, so |K| approaches the path count
    walls = slit_walls(15, 4, (5, 9))
    ts = LatticeSystem(15, 8, walls, start=7)
    last = propagate(ts, WeightFunction("boltzmann", 1e12), KINETIC, 8)[8]
    total = sum(last.entries.values()).real
    assert total == pytest.approx(lattice_path_count(15, 8, 7, walls), rel=1e-9)


def test_platformer_matches_enumeration(l1):
    ts = PlatformerSystem(l1)
    f = ActionFunctional(mass=1.0, potential_coeff=1.0)
    w = WeightFunction.feynman(3.0)
    last = propagate(ts, w, f, 4)[4]
    oracle = platformer_amplitudes(l1, 4, 3.0)
    assert len(last) == len(oracle)
    for s, a in oracle.items():
        assert isclose_c(last[ts.encode(s)], a, 1e-9)


def test_transfer_operator_agrees_with_propagate(l1):
    ts = PlatformerSystem(l1)
    f = ActionFunctional()
    w = WeightFunction.feynman(2.0)
    generic = propagate(ts, w, f, 6)
    compiled = TransferOperator(ts, f, 6).fields(w, 6)
    for a, b in zip(generic, compiled):
        assert set(a.entries) == set(b.entries)
        for sid, amp in a.entries.items():
            assert isclose_c(amp, b[sid], 1e-9)


def test_propagate_is_bit_stable(l1):
    ts = PlatformerSystem(l1)
    w = WeightFunction.feynman(1.0)
    a = propagate(ts, w, ActionFunctional(), 5)
    b = propagate(ts, w, ActionFunctional(), 5)
    assert [x.entries for x in a] == [x.entries for x in b]
    assert all(np.isfinite(complex(v).real) for fld in a for v in fld.entries.values())


def test_state_budget(l1):
    with pytest.raises(errors.StateBudgetExceeded) as info:
        propagate(PlatformerSystem(l1), WeightFunction(), ActionFunctional(), 10, budget=50)
    assert info.value.count > 50


def test_custom_weight():
    table = [(0.0, 1.0), (10.0, 0.0)]
    w = WeightFunction("custom", table=table)
    assert w(5.0) == pytest.approx(0.5)
    ts = LatticeSystem(5, 2, start=2)
    with pytest.raises(ValueError):
        propagate(ts, w, KINETIC, 2)
    total = amplitude_bruteforce(ts, None, LatticeState(2, 2), 2, w, KINETIC)
    # paths to x=2 in two steps: (0,0) S=0, (+1,-1) and (-1,+1) S=1
    assert total == pytest.approx(1.0 + 2 * 0.9)


def test_weight_validation():
    with pytest.raises(ValueError):
        WeightFunction.feynman(0.0)
    with pytest.raises(ValueError):
        WeightFunction("custom")


def test_born_rule_basics():
    assert propagator.born_distribution({7: 0.3 - 0.2j}) == {7: 1.0}
    assert propagator.born_distribution(AmplitudeField(1, {1: 1j, 2: -1})) == {1: 0.5, 2: 0.5}
    with pytest.raises(errors.ZeroField):
        propagator.born_distribution({1: 0j})


def test_completion_unreachable():
    lvl = load_level("#####\n#S#G#\n#####")
    amps = completion_amplitude(PlatformerSystem(lvl), WeightFunction(), ActionFunctional(), 10)
    assert set(amps) == set(range(1, 11)) and all(a == 0 for a in amps.values())
    with pytest.raises(errors.ZeroField):
        propagator.born_distribution(amps)


def test_completion_forced_corridor():
    width = 5
    walls = {(t, x) for t in range(1, 5) for x in range(width) if x != t}
    ts = LatticeSystem(width, 6, walls, start=0, goal_cells=(4,))
    amps = completion_amplitude(ts, WeightFunction.feynman(0.7), KINETIC, 6)
    nonzero = {t: a for t, a in amps.items() if a != 0}
    assert list(nonzero) == [4]
    assert abs(nonzero[4]) == pytest.approx(1.0, abs=1e-12)


def _first_arrival_oracle(lvl, frames, hbar):
    s0 = start_state(lvl)
    out = {t: 0j for t in range(1, frames + 1)}
    for t in range(1, frames + 1):
        for labels in itertools.product(ALPHABET, repeat=t):
            states = [s0]
            for u in labels:
                if reaches_goal(states[-1], lvl):
                    break
                states.append(step(states[-1], u, lvl))
            if len(states) == t + 1 and reaches_goal(states[-1], lvl):
                out[t] += cmath.exp(1j * hand_action(states, lvl) / hbar)
    return out


def test_completion_distribution_matches_first_arrival(l1):
    ts = PlatformerSystem(l1)
    model = propagator.completion_distribution(ts, WeightFunction.feynman(1.0), ActionFunctional(), 5)
    oracle = propagator.born_distribution(_first_arrival_oracle(l1, 5, 1.0))
    for t in oracle:
        assert abs(model[t] - oracle[t]) <= 1e-9


def test_completion_time_regression(l1):
    ts = PlatformerSystem(l1)
    amps = completion_amplitude(ts, WeightFunction.feynman(1.0), ActionFunctional(COMPLETION_TIME), 30)
    # with a unit cost per frame |K_t| is the number of label sequences first arriving at t
    counts = [round(abs(amps[t])) for t in range(1, 31)]
    assert counts[:3] == [0, 0, 0] and counts[3] > 0
    for t in range(1, 31):
        assert abs(abs(amps[t]) - counts[t - 1]) < 1e-6 * max(1, counts[t - 1])
    total = math.fsum(abs(a) ** 2 for a in amps.values())
    assert total > 0
    assert counts[:13] == [0, 0, 0, 8, 32, 90, 224, 546, 1336, 3352, 8504, 21880, 57030]
    assert total == pytest.approx(4.484306672141654e43, rel=1e-9)


def _benchmark():
    ts = LatticeSystem(81, 4, start=40, max_step=10)
    f = ActionFunctional(mass=0.002)
    ref = least_action_path(ts, f, 4, lambda s: s.frame == 4 and s.x == 40).witness
    return ts, f, ref


def test_sweep_single_row():
    ts, f, ref = _benchmark()
    rows = hbar_sweep(ts, f, [1.0], ref, 4, enumerate_cap=0)
    assert len(rows) == 1 and rows[0].in_tube_enumerated is None


def test_sweep_rejects_unsorted():
    ts, f, ref = _benchmark()
    with pytest.raises(ValueError):
        hbar_sweep(ts, f, [1.0, 10.0], ref, 4)


def test_sweep_enumeration_cross_check():
    ts, f, ref = _benchmark()
    rows = hbar_sweep(ts, f, [10, 1, 0.1, 0.01], ref, 4)
    for r in rows:
        assert r.in_tube_enumerated is not None
        assert abs(r.in_tube - r.in_tube_enumerated) < 1e-9
        assert 0 <= r.endpoint_mass <= 1
    vals = [r.in_tube for r in rows]
    assert all(b >= a for a, b in zip(vals, vals[1:]))
    assert vals[-1] > 0.99


def test_large_hbar_near_uniform():
    ts = LatticeSystem(61, 3, start=30, max_step=10)
    last = propagate(ts, WeightFunction.feynman(1e6), KINETIC, 3)[3]
    p = propagator.born_distribution(last)
    oracle = propagator.born_distribution(lattice_amplitudes(61, 3, 30, frozenset(), 1e6, max_step=10))
    assert all(abs(p[x] - oracle[x]) < 1e-9 for x in oracle)
    assert max(p.values()) - min(p.values()) < 0.05


def test_double_slit():
    res = double_slit(15, 8, 4, (5, 9), WeightFunction.feynman(1.0), KINETIC)
    assert res.linearity_max_err <= 1e-12
    assert res.interference_max > 0.01
    assert math.fsum(res.classical_add.values()) == pytest.approx(1, abs=1e-12)


@pytest.mark.parametrize(
    "slits, slit_frame, walls, exc",
    [
        ((5, 5), 4, (), errors.SlitBlocked),
        ((5, 9), 4, ((4, 9),), errors.SlitBlocked),
        ((5, 20), 4, (), ValueError),
        ((5, 9), 8, (), ValueError),
    ],
)
def test_double_slit_errors(slits, slit_frame, walls, exc):
    with pytest.raises(exc):
        double_slit(15, 8, slit_frame, slits, WeightFunction(), KINETIC, walls=walls)
