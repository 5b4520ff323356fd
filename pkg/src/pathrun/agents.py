"""Player models and seeded batches of attempts.

Randomness is counter based: the draws an agent uses at frame ``t`` are the
Philox block with key ``seed`` and counter ``t``. A run therefore replays
bit for bit no matter how batches are split across workers.
"""

from __future__ import annotations

import json
import os
from collections import deque
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from functools import lru_cache

import numpy as np

from .action import ANY_PERCENT, ActionFunctional, CategoryConstraint, trajectory_action
from .pathsearch import min_time_path
from .simworld import (
    ALPHABET,
    DEFAULT_PHYSICS,
    NEUTRAL,
    Level,
    Physics,
    PlatformerSystem,
    at_goal,
    decode_inputs,
    encode_inputs,
    run,
    start_state,
    step,
)

OPTIMAL = "optimal"
NOISY = "noisy"
RANDOM = "random"
REPLAY = "replay"
AGENT_KINDS = (OPTIMAL, NOISY, RANDOM, REPLAY)

_UNIT = 2.0**-53


@dataclass(frozen=True)
class AgentSpec:
    kind: str = OPTIMAL
    p: float = 0.0
    seed: int = 0
    category: CategoryConstraint = field(default=ANY_PERCENT)
    inputs: tuple = ()

    def __post_init__(self):
        if self.kind not in AGENT_KINDS:
            raise ValueError(f"unknown agent kind {self.kind!r}")
        if not 0.0 <= self.p <= 1.0:
            raise ValueError("error probability must lie in [0, 1]")


@dataclass
class RunRecord:
    run_index: int
    seed: int
    inputs: str
    completed: bool
    frames: int
    action: float
    in_tube: bool | None = None

    def to_json(self) -> str:
        return json.dumps(asdict(self))

    @classmethod
    def from_json(cls, line: str) -> "RunRecord":
        return cls(**json.loads(line))

    def input_symbols(self):
        return decode_inputs(self.inputs)


def write_log(records, path):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for r in records:
            fh.write(r.to_json() + "\n")


def read_log(path) -> list[RunRecord]:
    with open(path, encoding="utf-8") as fh:
        return [RunRecord.from_json(line) for line in fh if line.strip()]


def run_seed(base_seed: int, index: int) -> int:
    ss = np.random.SeedSequence(base_seed, spawn_key=(index,))
    return int(ss.generate_state(1, np.uint64)[0])


def noise_blocks(seed: int, frames: int) -> np.ndarray:
    """Philox output blocks for counters ``0..frames-1``, shape ``(frames, 4)``."""
    raw = np.random.Philox(key=seed).random_raw(4 * frames)
    return raw.reshape(frames, 4)


@lru_cache(maxsize=32)
def cost_to_go(lvl: Level, physics: Physics, category: CategoryConstraint) -> dict:
    """Frames-to-completion for every configuration reachable from the start.

    Keys are frame-free state ids; configurations from which the category
    cannot be completed are absent.
    """
    ts = PlatformerSystem(lvl, physics)
    s0 = ts.initial
    sid0 = ts.encode(s0)
    states = {sid0: s0}
    preds: dict[int, list[int]] = {}
    queue = deque([sid0])
    while queue:
        sid = queue.popleft()
        s = states[sid]
        for _, s2 in ts.transitions(s):
            sid2 = ts.encode(s2)
            preds.setdefault(sid2, []).append(sid)
            if sid2 not in states:
                states[sid2] = s2._replace(frame=0)
                queue.append(sid2)
    dist = {
        sid: 0
        for sid, s in states.items()
        if ts.is_goal(s) and category.accepts(s.items)
    }
    queue = deque(sorted(dist))
    while queue:
        sid = queue.popleft()
        for p in preds.get(sid, ()):
            if p not in dist:
                dist[p] = dist[sid] + 1
                queue.append(p)
    return dist


@lru_cache(maxsize=32)
def witness_plan(lvl: Level, physics: Physics, category: CategoryConstraint) -> tuple:
    """``(state, input)`` pairs along the min-time witness."""
    witness = min_time_path(lvl, category, physics=physics, cap=1).witness
    return tuple(zip(witness.states, witness.inputs))


class Agent:
    """A policy mapping the current state to the next input."""

    def __init__(self, spec: AgentSpec, lvl: Level, physics: Physics = DEFAULT_PHYSICS):
        self.spec = spec
        self.level = lvl
        self.physics = physics
        self._ts = PlatformerSystem(lvl, physics)
        self._plan = ()
        self._dist = None
        if spec.kind in (OPTIMAL, NOISY):
            self._plan = witness_plan(lvl, physics, spec.category)
        self._noise = None
        if spec.kind in (NOISY, RANDOM):
            self._noise = noise_blocks(spec.seed, physics.frame_cap)

    def _greedy(self, s):
        if self._dist is None:
            self._dist = cost_to_go(self.level, self.physics, self.spec.category)
        here = self._dist.get(self._ts.encode(s))
        if here is None or here == 0:
            return NEUTRAL
        for u in ALPHABET:
            if self._dist.get(self._ts.encode(step(s, u, self.level, self.physics))) == here - 1:
                return u
        return NEUTRAL

    def _planned(self, s):
        t = s.frame
        if t < len(self._plan) and self._plan[t][0] == s:
            return self._plan[t][1]
        return self._greedy(s)

    def act(self, s):
        kind = self.spec.kind
        if kind == REPLAY:
            return self.spec.inputs[s.frame] if s.frame < len(self.spec.inputs) else NEUTRAL
        if kind == OPTIMAL:
            return self._planned(s)
        block = self._noise[s.frame]
        if kind == RANDOM:
            return ALPHABET[int(block[1] % 6)]
        if (int(block[0]) >> 11) * _UNIT < self.spec.p:
            return ALPHABET[int(block[1] % 6)]
        return self._planned(s)

    def play(self, functional: ActionFunctional | None = None, index: int = 0) -> RunRecord:
        lvl, physics = self.level, self.physics
        s = start_state(lvl, physics)
        inputs = []
        while s.frame < physics.frame_cap:
            u = self.act(s)
            inputs.append(u)
            s = step(s, u, lvl, physics)
            if at_goal(s, lvl, physics):
                break
        traj = run(lvl, inputs, physics)
        value = 0.0
        if functional is not None:
            value = trajectory_action(traj, functional, lvl, physics.subpixels_per_tile)
        return RunRecord(index, self.spec.seed, encode_inputs(inputs), traj.completed, traj.frames, value)


def make_agent(spec: AgentSpec, lvl: Level, physics: Physics = DEFAULT_PHYSICS) -> Agent:
    if spec.kind == REPLAY and len(spec.inputs) > physics.frame_cap:
        raise ValueError("replay inputs exceed the frame cap")
    return Agent(spec, lvl, physics)


def worker_count(threads: int | None = None) -> int:
    if threads is None:
        threads = int(os.environ.get("PATHRUN_THREADS", "1") or 1)
    if threads <= 0:
        threads = os.cpu_count() or 1
    return threads


def generate_runs(
    spec: AgentSpec,
    lvl: Level,
    n: int,
    base_seed: int,
    physics: Physics = DEFAULT_PHYSICS,
    functional: ActionFunctional | None = None,
    threads: int | None = None,
) -> list[RunRecord]:
    """``n`` attempts; attempt ``i`` uses the seed derived from ``(base_seed, i)``."""
    if n < 1:
        raise ValueError("need at least one run")
    functional = functional or ActionFunctional()
    # warm shared caches before fanning out
    if spec.kind in (OPTIMAL, NOISY):
        witness_plan(lvl, physics, spec.category)
        if spec.kind == NOISY and spec.p > 0:
            cost_to_go(lvl, physics, spec.category)

    def one(i):
        agent = make_agent(_with_seed(spec, run_seed(base_seed, i)), lvl, physics)
        return agent.play(functional, i)

    workers = worker_count(threads)
    if workers == 1:
        return [one(i) for i in range(n)]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(one, range(n)))


def _with_seed(spec: AgentSpec, seed: int) -> AgentSpec:
    return AgentSpec(spec.kind, spec.p, seed, spec.category, spec.inputs)
