"""Integer platformer physics and the lattice walk.

Both worlds are exposed as transition systems: an initial state, an ordered
list of ``(label, successor)`` pairs per state and an injective integer
encoding of configurations. Everything downstream (path sums, searches,
agents) is written against that interface.

Positions are measured in subpixels with ``y`` growing downwards. The avatar
is a single tile-sized box whose top-left corner is ``(x, y)``. Anything
outside the grid counts as solid.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple, Sequence

from .errors import (
    FrameCapExceeded,
    MissingGoal,
    MissingStart,
    MultipleStarts,
    NonRectangular,
    UnknownChar,
)

FPS = 60

EMPTY, SOLID, START, GOAL, ITEM = ".", "#", "S", "G", "o"
TILE_CHARS = frozenset(EMPTY + SOLID + START + GOAL + ITEM)


@dataclass(frozen=True)
class Physics:
    gravity: int = 1
    accel: int = 1
    vmax_x: int = 4
    vmax_y: int = 8
    jump_impulse: int = -8
    subpixels_per_tile: int = 16
    frame_cap: int = 120


DEFAULT_PHYSICS = Physics()


@dataclass(frozen=True)
class Level:
    width: int
    height: int
    tiles: tuple[str, ...]
    name: str = ""
    start: tuple[int, int] = field(init=False, repr=False, compare=False)
    goals: frozenset = field(init=False, repr=False, compare=False)
    items: tuple[tuple[int, int], ...] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if len(self.tiles) != self.height or any(len(r) != self.width for r in self.tiles):
            raise NonRectangular(f"grid is not {self.width}x{self.height}")
        starts, goals, items = [], [], []
        for row, line in enumerate(self.tiles):
            for col, ch in enumerate(line):
                if ch not in TILE_CHARS:
                    raise UnknownChar(ch, (col, row))
                if ch == START:
                    starts.append((col, row))
                elif ch == GOAL:
                    goals.append((col, row))
                elif ch == ITEM:
                    items.append((col, row))
        if not starts:
            raise MissingStart("level has no 'S' tile")
        if len(starts) > 1:
            raise MultipleStarts(f"level has {len(starts)} start tiles")
        if not goals:
            raise MissingGoal("level has no 'G' tile")
        object.__setattr__(self, "start", starts[0])
        object.__setattr__(self, "goals", frozenset(goals))
        object.__setattr__(self, "items", tuple(items))

    def tile(self, col: int, row: int) -> str:
        if 0 <= col < self.width and 0 <= row < self.height:
            return self.tiles[row][col]
        return SOLID

    def is_solid(self, col: int, row: int) -> bool:
        return self.tile(col, row) == SOLID

    @property
    def all_items(self) -> int:
        """Bit mask with one bit set per item tile."""
        return (1 << len(self.items)) - 1

    def count(self, ch: str) -> int:
        return sum(line.count(ch) for line in self.tiles)

    def __str__(self):
        return "\n".join(self.tiles) + "\n"


def load_level(text: str, name: str = "") -> Level:
    """Parse an ASCII grid of ``# . S G o`` characters."""
    lines = text.split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    lines = [ln.rstrip("\r") for ln in lines]
    if not lines or not lines[0]:
        raise NonRectangular("empty level")
    width = len(lines[0])
    for row, line in enumerate(lines):
        for col, ch in enumerate(line):
            if ch not in TILE_CHARS:
                raise UnknownChar(ch, (col, row))
        if len(line) != width:
            raise NonRectangular(f"row {row} has {len(line)} columns, expected {width}")
    if width < 2:
        raise NonRectangular("level must be at least 2 tiles wide")
    return Level(width, len(lines), tuple(lines), name)


def read_level(path) -> Level:
    from pathlib import Path

    path = Path(path)
    return load_level(path.read_text(encoding="utf-8"), name=path.stem)


class InputSymbol(NamedTuple):
    horizontal: int  # -1 left, 0 neutral, +1 right
    jump: bool

    def encode(self) -> str:
        return "LNR"[self.horizontal + 1] + ("J" if self.jump else "-")

    @classmethod
    def decode(cls, token: str) -> "InputSymbol":
        if len(token) != 2 or token[0] not in "LNR" or token[1] not in "J-":
            raise ValueError(f"bad input token {token!r}")
        return cls("LNR".index(token[0]) - 1, token[1] == "J")


ALPHABET = tuple(InputSymbol(h, j) for h in (-1, 0, 1) for j in (False, True))
NEUTRAL = InputSymbol(0, False)
LABEL_INDEX = {u: i for i, u in enumerate(ALPHABET)}


def encode_inputs(inputs: Sequence[InputSymbol]) -> str:
    return " ".join(u.encode() for u in inputs)


def decode_inputs(text: str) -> tuple[InputSymbol, ...]:
    return tuple(InputSymbol.decode(tok) for tok in text.replace(",", " ").split())


class SimState(NamedTuple):
    x: int
    y: int
    vx: int
    vy: int
    frame: int
    items: int
    grounded: bool


def _clamp(v, lo, hi):
    return lo if v < lo else hi if v > hi else v


def box_hits_solid(lvl: Level, x: int, y: int, q: int) -> bool:
    for row in range(y // q, (y + q - 1) // q + 1):
        for col in range(x // q, (x + q - 1) // q + 1):
            if lvl.is_solid(col, row):
                return True
    return False


def center_tile(s: SimState, q: int) -> tuple[int, int]:
    half = q // 2
    return (s.x + half) // q, (s.y + half) // q


def at_goal(s: SimState, lvl: Level, physics: Physics = DEFAULT_PHYSICS) -> bool:
    return center_tile(s, physics.subpixels_per_tile) in lvl.goals


def start_state(lvl: Level, physics: Physics = DEFAULT_PHYSICS) -> SimState:
    q = physics.subpixels_per_tile
    col, row = lvl.start
    x, y = col * q, row * q
    grounded = box_hits_solid(lvl, x, y + 1, q)
    return SimState(x, y, 0, 0, 0, 0, grounded)


def step(s: SimState, u: InputSymbol, lvl: Level, physics: Physics = DEFAULT_PHYSICS) -> SimState:
    """Advance one frame. Integer arithmetic only; update order is fixed."""
    q = physics.subpixels_per_tile
    vx = s.vx + u.horizontal * physics.accel
    vy = s.vy
    if u.jump and s.grounded:
        vy = physics.jump_impulse
    vy += physics.gravity
    vx = _clamp(vx, -physics.vmax_x, physics.vmax_x)
    vy = _clamp(vy, -physics.vmax_y, physics.vmax_y)

    x, y = s.x + vx, s.y
    if vx:
        rows = range(y // q, (y + q - 1) // q + 1)
        col = (x + q - 1) // q if vx > 0 else x // q
        if any(lvl.is_solid(col, r) for r in rows):
            x = col * q - q if vx > 0 else (col + 1) * q
            vx = 0

    y += vy
    grounded = False
    if vy:
        cols = range(x // q, (x + q - 1) // q + 1)
        row = (y + q - 1) // q if vy > 0 else y // q
        if any(lvl.is_solid(c, row) for c in cols):
            if vy > 0:
                y = row * q - q
                grounded = True
            else:
                y = (row + 1) * q
            vy = 0

    items = s.items
    if lvl.items:
        tile = ((x + q // 2) // q, (y + q // 2) // q)
        for bit, pos in enumerate(lvl.items):
            if pos == tile:
                items |= 1 << bit
    return SimState(x, y, vx, vy, s.frame + 1, items, grounded)


@dataclass(frozen=True)
class Trajectory:
    """An input sequence together with the states it visits.

    ``states[k + 1]`` is the successor of ``states[k]`` under ``inputs[k]``.
    Lattice paths reuse this type with integer step labels.
    """

    inputs: tuple
    states: tuple
    completed: bool = False
    completion_frame: int | None = None

    @property
    def frames(self) -> int:
        return len(self.inputs)

    @property
    def seconds(self) -> float:
        return self.frames / FPS

    @property
    def final(self):
        return self.states[-1]


def run(
    lvl: Level,
    inputs: Sequence[InputSymbol],
    physics: Physics = DEFAULT_PHYSICS,
    require_completion: bool = False,
) -> Trajectory:
    """Replay ``inputs`` from the start state, stopping at first goal contact."""
    if len(inputs) > physics.frame_cap:
        raise ValueError(f"{len(inputs)} inputs exceed the frame cap of {physics.frame_cap}")
    s = start_state(lvl, physics)
    states = [s]
    used = 0
    completed = False
    for u in inputs:
        s = step(s, u, lvl, physics)
        states.append(s)
        used += 1
        if at_goal(s, lvl, physics):
            completed = True
            break
    if require_completion and not completed:
        raise FrameCapExceeded(f"goal not reached within {len(inputs)} frames")
    return Trajectory(
        tuple(inputs[:used]), tuple(states), completed, s.frame if completed else None
    )


class TransitionSystem:
    """Finite, deterministic, ordered successor structure.

    Subclasses provide ``initial``, :meth:`transitions`, :meth:`encode`,
    :meth:`decode`, :meth:`position`, :meth:`is_goal` and :meth:`step_action`.
    Labels are ranked by their position in the transition list.
    """

    time_invariant = False
    level = None

    def transitions(self, s):
        raise NotImplementedError

    def encode(self, s) -> int:
        raise NotImplementedError

    def decode(self, sid: int, frame: int = 0):
        raise NotImplementedError

    def position(self, s) -> tuple[int, ...]:
        raise NotImplementedError

    def is_goal(self, s) -> bool:
        return False

    def step_action(self, s, s2, functional) -> float:
        from .action import step_action

        q = self.physics.subpixels_per_tile if self.level is not None else 16
        return step_action(s, s2, functional, self.level, q)

    def trajectory(self, labels, completed=False) -> Trajectory:
        """Replay ``labels`` from the initial state."""
        s = self.initial
        states = [s]
        for lab in labels:
            for lab2, s2 in self.transitions(s):
                if lab2 == lab:
                    s = s2
                    break
            else:
                raise ValueError(f"label {lab!r} not available at {s}")
            states.append(s)
        done = completed or self.is_goal(s)
        return Trajectory(tuple(labels), tuple(states), done, s.frame if done else None)


class PlatformerSystem(TransitionSystem):
    """The platformer as a transition system; goal states are absorbing."""

    time_invariant = True

    def __init__(self, lvl: Level, physics: Physics = DEFAULT_PHYSICS):
        self.level = lvl
        self.physics = physics
        self.initial = start_state(lvl, physics)
        q = physics.subpixels_per_tile
        self._nx = lvl.width * q
        self._ny = lvl.height * q
        self._nvx = 2 * physics.vmax_x + 1
        self._nvy = 2 * physics.vmax_y + 1

    def transitions(self, s):
        if at_goal(s, self.level, self.physics):
            return []
        return [(u, step(s, u, self.level, self.physics)) for u in ALPHABET]

    def encode(self, s: SimState) -> int:
        p = self.physics
        sid = s.items * 2 + int(s.grounded)
        sid = sid * self._nvy + s.vy + p.vmax_y
        sid = sid * self._nvx + s.vx + p.vmax_x
        sid = sid * self._ny + s.y
        return sid * self._nx + s.x

    def decode(self, sid: int, frame: int = 0) -> SimState:
        p = self.physics
        sid, x = divmod(sid, self._nx)
        sid, y = divmod(sid, self._ny)
        sid, vx = divmod(sid, self._nvx)
        sid, vy = divmod(sid, self._nvy)
        items, grounded = divmod(sid, 2)
        return SimState(x, y, vx - p.vmax_x, vy - p.vmax_y, frame, items, bool(grounded))

    def position(self, s):
        return (s.x, s.y)

    def is_goal(self, s) -> bool:
        return at_goal(s, self.level, self.physics)


class LatticeState(NamedTuple):
    x: int
    frame: int


class LatticeSystem(TransitionSystem):
    """One-dimensional walk on ``width`` cells over ``frames`` frames.

    A step moves by ``dx`` in ``-max_step..max_step`` (ascending order), stays
    on the lattice and never lands on a wall cell active at the arrival frame.
    """

    def __init__(self, width, frames, walls=(), start=None, max_step=1, goal_cells=()):
        if width < 3:
            raise ValueError("lattice needs at least 3 cells")
        if frames < 1:
            raise ValueError("lattice needs at least 1 frame")
        walls = frozenset((int(t), int(c)) for t, c in walls)
        for t, c in walls:
            if not (0 <= c < width) or t < 0:
                raise ValueError(f"wall cell {(t, c)} out of bounds")
        self.width = width
        self.frames = frames
        self.walls = walls
        self.max_step = max_step
        self.goal_cells = frozenset(goal_cells)
        start = width // 2 if start is None else start
        if not 0 <= start < width:
            raise ValueError(f"start cell {start} out of bounds")
        self.initial = LatticeState(start, 0)

    def transitions(self, s: LatticeState):
        if s.frame >= self.frames or s.x in self.goal_cells:
            return []
        t = s.frame + 1
        out = []
        for dx in range(-self.max_step, self.max_step + 1):
            x = s.x + dx
            if 0 <= x < self.width and (t, x) not in self.walls:
                out.append((dx, LatticeState(x, t)))
        return out

    def encode(self, s) -> int:
        return s.x

    def decode(self, sid: int, frame: int = 0) -> LatticeState:
        return LatticeState(sid, frame)

    def position(self, s):
        return (s.x,)

    def is_goal(self, s) -> bool:
        return s.x in self.goal_cells


def lattice_system(width, frames, walls=(), start=None, max_step=1, goal_cells=()) -> LatticeSystem:
    return LatticeSystem(width, frames, walls, start, max_step, goal_cells)


def slit_walls(width, slit_frame, open_cells):
    """Wall row at ``slit_frame`` covering every cell except ``open_cells``."""
    return frozenset((slit_frame, c) for c in range(width) if c not in set(open_cells))
