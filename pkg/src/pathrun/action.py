"""Discrete action functionals.

The Lagrangian is evaluated once per frame (``dt = 1``) as kinetic minus
potential energy, with the potential proportional to height above the
bottom of the grid. Actions are dimensionless quanta so the weight scale
``hbar`` stays a free parameter.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

from .simworld import LatticeState, Level, SimState, Trajectory

LAGRANGIAN = "lagrangian"
COMPLETION_TIME = "time"
COMPOSITE = "composite"
KINDS = (LAGRANGIAN, COMPLETION_TIME, COMPOSITE)


class Category(str, Enum):
    ANY = "any%"
    HUNDRED = "100%"


@dataclass(frozen=True)
class CategoryConstraint:
    kind: Category = Category.ANY
    required_items: int = 0

    @classmethod
    def any_percent(cls) -> "CategoryConstraint":
        return cls(Category.ANY, 0)

    @classmethod
    def hundred_percent(cls, lvl: Level) -> "CategoryConstraint":
        return cls(Category.HUNDRED, lvl.all_items)

    @classmethod
    def parse(cls, text: str, lvl: Level) -> "CategoryConstraint":
        text = text.strip().lower()
        if text in ("any%", "any"):
            return cls.any_percent()
        if text in ("100%", "100", "hundred"):
            return cls.hundred_percent(lvl)
        raise ValueError(f"unknown category {text!r}")

    def accepts(self, items: int) -> bool:
        return items & self.required_items == self.required_items


ANY_PERCENT = CategoryConstraint.any_percent()


@dataclass(frozen=True)
class ActionFunctional:
    """Selects and parametrizes the per-frame action.

    ``composite`` adds ``penalty_weight`` times the number of unmet category
    requirements (missing items, plus one if the goal was never reached) to
    the summed ``base`` action.
    """

    kind: str = LAGRANGIAN
    mass: float = 1.0
    potential_coeff: float = 1.0
    penalty_weight: float = 0.0
    category: CategoryConstraint = field(default=ANY_PERCENT)
    base: str = COMPLETION_TIME
    potential: str = "successor"  # or "midpoint"

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown action kind {self.kind!r}")
        if self.base not in (LAGRANGIAN, COMPLETION_TIME):
            raise ValueError(f"composite base must be lagrangian or time, got {self.base!r}")
        if self.potential not in ("successor", "midpoint"):
            raise ValueError(f"unknown potential evaluation {self.potential!r}")
        if not self.mass > 0:
            raise ValueError("mass must be positive")
        if self.penalty_weight < 0:
            raise ValueError("penalty weight must be non-negative")

    @property
    def per_step_kind(self) -> str:
        return self.base if self.kind == COMPOSITE else self.kind


def height_above_bottom(s: SimState, lvl: Level, q: int = 16) -> int:
    return (lvl.height - 1) * q - s.y


def kinetic(s: SimState | LatticeState, s2: SimState | LatticeState, mass: float) -> float:
    if isinstance(s2, LatticeState):
        dx = s2.x - s.x
        return 0.5 * mass * dx * dx
    return 0.5 * mass * (s2.vx * s2.vx + s2.vy * s2.vy)


def step_action(s, s2, f: ActionFunctional, lvl: Level | None = None, q: int = 16) -> float:
    """Action accumulated over the frame from ``s`` to ``s2``."""
    if f.per_step_kind == COMPLETION_TIME:
        return 1.0
    t = kinetic(s, s2, f.mass)
    if isinstance(s2, LatticeState) or f.potential_coeff == 0:
        return t
    if lvl is None:
        raise ValueError("platformer Lagrangian needs the level for its potential")
    h = height_above_bottom(s2, lvl, q)
    if f.potential == "midpoint":
        h = 0.5 * (h + height_above_bottom(s, lvl, q))
    return t - f.potential_coeff * h


def satisfies_category(traj: Trajectory, c: CategoryConstraint) -> bool:
    if not traj.completed:
        return False
    if c.kind == Category.ANY:
        return True
    return c.accepts(traj.final.items)


def penalty(traj: Trajectory, f: ActionFunctional) -> float:
    c = f.category
    missing = 0 if traj.completed else 1
    if c.kind == Category.HUNDRED:
        items = getattr(traj.final, "items", 0)
        missing += bin(c.required_items & ~items).count("1")
    return f.penalty_weight * missing


def trajectory_action(traj: Trajectory, f: ActionFunctional, lvl: Level | None = None, q: int = 16) -> float:
    total = 0.0
    states = traj.states
    for a, b in zip(states, states[1:]):
        total += step_action(a, b, f, lvl, q)
    if f.kind == COMPOSITE and not satisfies_category(traj, f.category):
        total += penalty(traj, f)
    return total
