"""Statistics over logs of attempts.

Frequencies are returned as :class:`fractions.Fraction` so that every
histogram sums to exactly one; they compare equal to the matching floats.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from . import propagator
from .action import ANY_PERCENT, ActionFunctional, CategoryConstraint
from .errors import EmptyInput, NoCompletedRuns
from .simworld import DEFAULT_PHYSICS, Level, Physics, PlatformerSystem, Trajectory, decode_inputs, run

DNF = "DNF"
KL_FLOOR = 1e-9
DEFAULT_GRID = tuple(float(h) for h in np.logspace(-2, 2, 41))


def _need(runs):
    if not runs:
        raise EmptyInput("no runs given")


def completion_histogram(runs) -> dict:
    """Relative frequency of each completion frame; unfinished runs under ``DNF``."""
    _need(runs)
    counts = Counter(r.frames if r.completed else DNF for r in runs)
    n = len(runs)
    keys = sorted(k for k in counts if k != DNF)
    if DNF in counts:
        keys.append(DNF)
    return {k: Fraction(counts[k], n) for k in keys}


@dataclass(frozen=True)
class TubeSpec:
    reference: Trajectory
    radius: int

    def __post_init__(self):
        if self.radius < 0:
            raise ValueError("radius must be non-negative")
        if not self.reference.states:
            raise ValueError("reference trajectory is empty")


def in_tube(traj: Trajectory, tube: TubeSpec) -> bool:
    """Completed, and within Chebyshev ``radius`` of the reference every frame.

    Frames past the end of the reference compare against its last state.
    """
    if not traj.completed:
        return False
    ref = tube.reference.states
    last = len(ref) - 1
    for s in traj.states:
        r = ref[min(s.frame, last)]
        if max(abs(s.x - r.x), abs(s.y - r.y)) > tube.radius:
            return False
    return True


def tube_fraction(runs, tube: TubeSpec, lvl: Level, physics: Physics = DEFAULT_PHYSICS) -> Fraction:
    """Share of runs inside the tube; sets ``in_tube`` on every record."""
    _need(runs)
    hits = 0
    for r in runs:
        r.in_tube = in_tube(run(lvl, decode_inputs(r.inputs), physics), tube)
        hits += r.in_tube
    return Fraction(hits, len(runs))


def trajectory_frequencies(runs) -> dict:
    _need(runs)
    counts = Counter(r.inputs for r in runs)
    n = len(runs)
    return {k: Fraction(counts[k], n) for k in sorted(counts)}


class WorldsNode:
    __slots__ = ("symbol", "count", "terminal", "children")

    def __init__(self, symbol=None):
        self.symbol = symbol
        self.count = 0
        self.terminal = 0
        self.children: dict[str, WorldsNode] = {}


@dataclass
class WorldsTree:
    """Prefix tree of input sequences with visit counts.

    A node with two or more children is a branch event: runs that agreed up
    to that frame and then parted.
    """

    root: WorldsNode
    branch_events: dict = field(default_factory=dict)  # depth -> count

    def nodes(self):
        stack = [(self.root, 0)]
        while stack:
            node, depth = stack.pop()
            yield node, depth
            for sym in sorted(node.children, reverse=True):
                stack.append((node.children[sym], depth + 1))

    @property
    def leaf_count(self) -> int:
        """Distinct complete input sequences (nodes where some run ends)."""
        return sum(1 for node, _ in self.nodes() if node.terminal)

    @property
    def total_branch_events(self) -> int:
        return sum(self.branch_events.values())

    def check(self) -> bool:
        return all(
            node.count == node.terminal + sum(c.count for c in node.children.values()) for node, _ in self.nodes()
        )

    def to_text(self) -> str:
        lines = [f"* {self.root.count}"]
        for node, depth in self.nodes():
            if depth:
                mark = " <" if len(node.children) > 1 else ""
                lines.append(f"{'  ' * depth}{node.symbol} {node.count}{mark}")
        return "\n".join(lines) + "\n"

    def to_dot(self) -> str:
        lines = ["digraph worlds {", '  n0 [label="start\\n%d"];' % self.root.count]
        ids = {id(self.root): 0}
        for node, _ in self.nodes():
            for sym in sorted(node.children):
                child = node.children[sym]
                ids[id(child)] = len(ids)
                cid = ids[id(child)]
                lines.append(f'  n{cid} [label="{child.count}"];')
                lines.append(f'  n{ids[id(node)]} -> n{cid} [label="{sym}"];')
        lines.append("}")
        return "\n".join(lines) + "\n"


def worlds_tree(runs) -> WorldsTree:
    _need(runs)
    root = WorldsNode()
    for r in runs:
        node = root
        node.count += 1
        for sym in r.inputs.split():
            child = node.children.get(sym)
            if child is None:
                child = node.children[sym] = WorldsNode(sym)
            child.count += 1
            node = child
        node.terminal += 1
    tree = WorldsTree(root)
    events = Counter(depth for node, depth in tree.nodes() if len(node.children) > 1)
    tree.branch_events = dict(sorted(events.items()))
    return tree


@dataclass
class HbarFit:
    grid: list
    divergence: list
    hbar_eff: float
    frame_cap: int
    dnf_fraction: float


def kl_divergence(empirical: dict, model: dict) -> float:
    return math.fsum(float(p) * math.log(float(p) / model[k]) for k, p in empirical.items() if p > 0)


def floored(dist: dict, frames, eps=KL_FLOOR) -> dict:
    raw = {t: dist.get(t, 0.0) + eps for t in frames}
    total = math.fsum(raw.values())
    return {t: v / total for t, v in raw.items()}


def fit_hbar(
    runs,
    lvl: Level,
    f: ActionFunctional,
    grid=DEFAULT_GRID,
    category: CategoryConstraint = ANY_PERCENT,
    frame_cap: int | None = None,
    physics: Physics = DEFAULT_PHYSICS,
) -> HbarFit:
    """Grid search for the weight scale whose completion-time model fits best.

    For each ``hbar`` the model is the Born-normalized completion amplitude
    over frames ``1..frame_cap`` (default: latest observed completion), with
    ``KL_FLOOR`` added to each bin. Unfinished runs are left out of the
    divergence and reported as ``dnf_fraction``. Ties go to the smallest
    ``hbar``.
    """
    grid = [float(h) for h in grid]
    if not grid or any(h <= 0 for h in grid):
        raise ValueError("grid must be non-empty with positive entries")
    _need(runs)
    done = [r for r in runs if r.completed]
    if not done:
        raise NoCompletedRuns("no completed runs to fit")
    frame_cap = max(r.frames for r in done) if frame_cap is None else frame_cap
    counts = Counter(r.frames for r in done if r.frames <= frame_cap)
    n = sum(counts.values())
    empirical = {t: Fraction(c, n) for t, c in counts.items()}
    frames = range(1, frame_cap + 1)

    ts = PlatformerSystem(lvl, physics)
    op = propagator.TransferOperator(ts, f, frame_cap)
    goal = np.array([ts.is_goal(s) and category.accepts(s.items) for s in op.states], dtype=bool)
    divs = []
    for hbar in grid:
        amps, _ = op.run(propagator.WeightFunction.feynman(hbar), frame_cap)
        absorbed = {}
        for t in frames:
            a = amps[t][goal]
            absorbed[t] = complex(math.fsum(a.real), math.fsum(a.imag))
        model = floored(propagator.born_distribution(absorbed), frames)
        divs.append(kl_divergence(empirical, model))
    best = min(range(len(grid)), key=lambda i: (divs[i], grid[i]))
    return HbarFit(grid, divs, grid[best], frame_cap, 1 - len(done) / len(runs))
