"""Classical optimal trajectories over the time-layered state graph.

Searches count *trajectories*, i.e. distinct state sequences: labels that
lead to the same successor collapse into one edge carrying the lowest such
label. Witnesses follow parent links back from the endpoint; at each link
ties are broken by label rank, then parent state id.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .action import ANY_PERCENT, COMPLETION_TIME, ActionFunctional, CategoryConstraint
from .errors import Unreachable
from .simworld import DEFAULT_PHYSICS, Level, Physics, PlatformerSystem, Trajectory

COUNT_CAP = 2**64 - 1
DEFAULT_WITNESS_CAP = 16


@dataclass
class SearchResult:
    optimal_value: float
    witness: Trajectory
    optimal_count: int
    co_optimal: list = field(default_factory=list)


def _sat_add(a, b):
    return min(a + b, COUNT_CAP)


def _edges(ts, s):
    """Successors of ``s`` with parallel labels merged, in label order."""
    seen = {}
    for rank, (lab, s2) in enumerate(ts.transitions(s)):
        sid2 = ts.encode(s2)
        if sid2 not in seen:
            seen[sid2] = (rank, lab, s2)
    return [(rank, lab, sid2, s2) for sid2, (rank, lab, s2) in seen.items()]


def _tol(a, b):
    return 1e-9 * max(1.0, abs(a), abs(b))


def _trajectories(ts, layers, ends, cap):
    """Materialize up to ``cap`` optimal paths by walking optimal parents back."""
    out = []

    def back(t, sid, suffix_labels, suffix_states):
        if len(out) >= cap:
            return
        node = layers[t][sid]
        if t == 0:
            states = (node.state,) + suffix_states
            out.append(ts_trajectory(ts, suffix_labels, states))
            return
        for rank, lab, psid in node.parents:
            back(t - 1, psid, (lab,) + suffix_labels, (node.state,) + suffix_states)

    for t, sid in ends:
        back(t, sid, (), ())
    return out


def ts_trajectory(ts, labels, states):
    end = states[-1]
    done = ts.is_goal(end)
    return Trajectory(tuple(labels), tuple(states), done, end.frame if done else None)


class _Node:
    __slots__ = ("state", "value", "count", "parents")

    def __init__(self, state, value):
        self.state = state
        self.value = value
        self.count = 0
        self.parents = []  # (rank, label, parent id) achieving value, sorted


def _layered(ts, f, frames, endpoint):
    """Forward DP: best value and all optimal parents for every (frame, state)."""
    s0 = ts.initial
    layers = [{ts.encode(s0): _Node(s0, 0.0)}]
    layers[0][ts.encode(s0)].count = 1
    for t in range(frames):
        nxt = {}
        for sid in sorted(layers[t]):
            node = layers[t][sid]
            for rank, lab, sid2, s2 in _edges(ts, node.state):
                val = node.value + ts.step_action(node.state, s2, f)
                cand = nxt.get(sid2)
                if cand is None or val < cand.value - _tol(val, cand.value):
                    cand = nxt[sid2] = _Node(s2, val)
                elif abs(val - cand.value) > _tol(val, cand.value):
                    continue
                cand.parents.append((rank, lab, sid))
        for sid2, node in nxt.items():
            node.parents.sort(key=lambda p: (p[0], p[2]))
            c = 0
            for _, _, psid in node.parents:
                c = _sat_add(c, layers[t][psid].count)
            node.count = c
        layers.append(nxt)
        if not nxt:
            break
    return layers


def _best_endpoints(layers, endpoint):
    best = None
    ends = []
    for t, layer in enumerate(layers):
        for sid in sorted(layer):
            node = layer[sid]
            if not endpoint(node.state):
                continue
            if best is None or node.value < best - _tol(node.value, best):
                best, ends = node.value, [(t, sid)]
            elif abs(node.value - best) <= _tol(node.value, best):
                ends.append((t, sid))
    return best, ends


def enumerate_optimal(ts, f: ActionFunctional, frames, endpoint, cap=DEFAULT_WITNESS_CAP) -> SearchResult:
    """Least accumulated action over paths of at most ``frames`` steps.

    A path may end at any frame in ``0..frames`` on a state accepted by
    ``endpoint``. Step costs may be negative; the time layering keeps the
    program exact. ``optimal_count`` counts optimal trajectories with
    saturating arithmetic and the first ``cap`` of them are materialized.
    """
    if frames < 1:
        raise ValueError("frames must be at least 1")
    layers = _layered(ts, f, frames, endpoint)
    best, ends = _best_endpoints(layers, endpoint)
    if best is None:
        raise Unreachable(frames)
    count = 0
    for t, sid in ends:
        count = _sat_add(count, layers[t][sid].count)
    co = _trajectories(ts, layers, ends, max(cap, 1))
    return SearchResult(best, co[0], count, co[:cap])


def least_action_path(ts, f, frames, endpoint) -> SearchResult:
    return enumerate_optimal(ts, f, frames, endpoint, cap=1)


def goal_predicate(ts, category: CategoryConstraint):
    return lambda s: ts.is_goal(s) and category.accepts(getattr(s, "items", 0))


def min_time_path(
    lvl: Level,
    category: CategoryConstraint = ANY_PERCENT,
    frame_cap: int | None = None,
    physics: Physics = DEFAULT_PHYSICS,
    cap: int = DEFAULT_WITNESS_CAP,
) -> SearchResult:
    """Breadth-first search for the earliest frame satisfying ``category``.

    Configurations are visited at most once (at their earliest frame).
    Parent links are ordered by label rank, then parent id; the first chain
    is the witness. Optimal trajectories are counted over the BFS layers.
    """
    frame_cap = physics.frame_cap if frame_cap is None else frame_cap
    if frame_cap < 1:
        raise ValueError("frame cap must be at least 1")
    ts = PlatformerSystem(lvl, physics)
    done = goal_predicate(ts, category)
    s0 = ts.initial
    sid0 = ts.encode(s0)
    visited = {sid0}
    layers = [{sid0: _Node(s0, 0)}]
    layers[0][sid0].count = 1
    for t in range(frame_cap):
        nxt = {}
        for sid in sorted(layers[t]):
            node = layers[t][sid]
            for rank, lab, sid2, s2 in _edges(ts, node.state):
                if sid2 in visited:
                    continue
                cand = nxt.get(sid2)
                if cand is None:
                    cand = nxt[sid2] = _Node(s2, t + 1)
                cand.parents.append((rank, lab, sid))
        for node in nxt.values():
            node.parents.sort(key=lambda p: (p[0], p[2]))
            c = 0
            for _, _, psid in node.parents:
                c = _sat_add(c, layers[t][psid].count)
            node.count = c
        visited.update(nxt)
        layers.append(nxt)
        ends = [(t + 1, sid) for sid in sorted(nxt) if done(nxt[sid].state)]
        if ends:
            count = 0
            for tt, sid in ends:
                count = _sat_add(count, layers[tt][sid].count)
            co = _trajectories(ts, layers, ends, max(cap, 1))
            return SearchResult(t + 1, co[0], count, co[:cap])
        if not nxt:
            break
    raise Unreachable(frame_cap)


def time_functional() -> ActionFunctional:
    return ActionFunctional(kind=COMPLETION_TIME)

