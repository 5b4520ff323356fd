"""Flat ``key=value`` configuration shared by physics and action settings."""

from __future__ import annotations

from dataclasses import fields, replace

from .action import ANY_PERCENT, ActionFunctional, CategoryConstraint
from .simworld import DEFAULT_PHYSICS, Level, Physics

PHYSICS_KEYS = {f.name for f in fields(Physics)}
ACTION_KEYS = {
    "action.kind": ("kind", str),
    "action.mass": ("mass", float),
    "action.penalty_weight": ("penalty_weight", float),
    "action.potential_coeff": ("potential_coeff", float),
    "action.base": ("base", str),
    "action.potential": ("potential", str),
}
KNOWN = PHYSICS_KEYS | set(ACTION_KEYS) | {"category"}


def parse_config(text: str) -> dict:
    out = {}
    for n, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"line {n}: expected key=value, got {raw!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        if key not in KNOWN:
            raise ValueError(f"line {n}: unknown key {key!r}")
        out[key] = value
    return out


def physics_from(cfg: dict) -> Physics:
    return replace(DEFAULT_PHYSICS, **{k: int(v) for k, v in cfg.items() if k in PHYSICS_KEYS})


def category_from(cfg: dict, lvl: Level | None) -> CategoryConstraint:
    text = cfg.get("category")
    if text is None:
        return ANY_PERCENT
    if lvl is None:
        if text.strip().lower() in ("any%", "any"):
            return ANY_PERCENT
        raise ValueError("a 100% category needs a level")
    return CategoryConstraint.parse(text, lvl)


def functional_from(cfg: dict, lvl: Level | None = None) -> ActionFunctional:
    """Action settings; the potential coefficient defaults to the gravity."""
    kw = {"potential_coeff": float(physics_from(cfg).gravity)}
    for key, (name, conv) in ACTION_KEYS.items():
        if key in cfg:
            kw[name] = conv(cfg[key])
    return ActionFunctional(category=category_from(cfg, lvl), **kw)


def load_config(path) -> dict:
    with open(path, encoding="utf-8") as fh:
        return parse_config(fh.read())
