"""Sums over discrete paths.

Two routes to the same numbers are kept side by side:

* :func:`enumerate_paths` / :func:`amplitude_bruteforce` list every label
  sequence and add up ``w(S)`` path by path;
* :func:`propagate` runs the frame-to-frame transfer recurrence
  ``K[t+1](s') = sum_s w(step_action(s, s')) K[t](s)``.

They agree whenever the weight factorizes over frames (the Feynman and
Boltzmann kinds). Distinct label sequences are distinct paths even when they
produce the same states.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field

import numpy as np

from . import action as _action
from .errors import PathCapExceeded, SlitBlocked, StateBudgetExceeded, ZeroField
from .simworld import LatticeSystem, Trajectory, TransitionSystem, slit_walls

DEFAULT_PATH_CAP = 10**5
DEFAULT_STATE_BUDGET = 2_000_000

FEYNMAN = "feynman"
BOLTZMANN = "boltzmann"
CUSTOM = "custom"


@dataclass(frozen=True)
class WeightFunction:
    """Maps a path action to its complex weight.

    ``feynman`` is ``exp(i S / hbar)``, ``boltzmann`` is ``exp(-S / hbar)``.
    ``custom`` takes ``table``: either a callable or a sequence of
    ``(S, value)`` points, linearly interpolated.
    """

    kind: str = FEYNMAN
    hbar: float = 1.0
    table: object = None

    def __post_init__(self):
        if self.kind not in (FEYNMAN, BOLTZMANN, CUSTOM):
            raise ValueError(f"unknown weight kind {self.kind!r}")
        if not self.hbar > 0:
            raise ValueError("hbar must be positive")
        if self.kind == CUSTOM and self.table is None:
            raise ValueError("custom weight needs a table")

    @classmethod
    def feynman(cls, hbar: float) -> "WeightFunction":
        return cls(FEYNMAN, hbar)

    @property
    def factorizes(self) -> bool:
        return self.kind != CUSTOM

    def __call__(self, s: float) -> complex:
        if self.kind == FEYNMAN:
            return cmath.exp(1j * s / self.hbar)
        if self.kind == BOLTZMANN:
            return complex(math.exp(-s / self.hbar))
        if callable(self.table):
            return complex(self.table(s))
        pts = np.asarray(self.table, dtype=complex)
        xs = pts[:, 0].real
        return complex(np.interp(s, xs, pts[:, 1].real) + 1j * np.interp(s, xs, pts[:, 1].imag))

    def many(self, actions: np.ndarray) -> np.ndarray:
        actions = np.asarray(actions, dtype=float)
        if self.kind == FEYNMAN:
            return np.exp(1j * actions / self.hbar)
        if self.kind == BOLTZMANN:
            return np.exp(-actions / self.hbar).astype(complex)
        return np.array([self(a) for a in actions], dtype=complex)


@dataclass
class AmplitudeField:
    """Amplitudes of the states reachable at one frame, keyed by state id."""

    frame: int
    entries: dict = field(default_factory=dict)

    def __getitem__(self, sid):
        return self.entries.get(sid, 0j)

    def __len__(self):
        return len(self.entries)

    def total_weight(self) -> float:
        return math.fsum(abs(a) ** 2 for a in self.entries.values())


def _walk(ts: TransitionSystem, state, depth: int, labels: list, states: list):
    if depth == 0:
        yield labels, states
        return
    for lab, s2 in ts.transitions(state):
        labels.append(lab)
        states.append(s2)
        yield from _walk(ts, s2, depth - 1, labels, states)
        labels.pop()
        states.pop()


def enumerate_trajectories(ts, t_f, final_predicate=None, cap=DEFAULT_PATH_CAP, start=None):
    """Every path of exactly ``t_f`` steps, depth first in label order."""
    if t_f < 0:
        raise ValueError("t_f must be non-negative")
    s0 = ts.initial if start is None else start
    out = []
    for labels, states in _walk(ts, s0, t_f, [], [s0]):
        end = states[-1]
        if final_predicate is not None and not final_predicate(end):
            continue
        if len(out) >= cap:
            raise PathCapExceeded(cap)
        done = ts.is_goal(end)
        out.append(Trajectory(tuple(labels), tuple(states), done, end.frame if done else None))
    return out


def enumerate_paths(ts, t_f, final_predicate=None, cap=DEFAULT_PATH_CAP):
    return [tr.inputs for tr in enumerate_trajectories(ts, t_f, final_predicate, cap)]


def _path_action(ts, traj, f):
    q = ts.physics.subpixels_per_tile if getattr(ts, "physics", None) else 16
    return _action.trajectory_action(traj, f, ts.level, q)


def _matches(ts, target):
    tid = target if isinstance(target, int) else ts.encode(target)
    frame = None if isinstance(target, int) else target.frame
    return lambda s: ts.encode(s) == tid and (frame is None or s.frame == frame)


def amplitude_bruteforce(ts, x_i, x_f, t_f, w: WeightFunction, f, cap=DEFAULT_PATH_CAP) -> complex:
    """Sum ``w(S)`` over all label sequences from ``x_i`` to ``x_f`` in ``t_f`` frames."""
    start = ts.initial if x_i is None else x_i
    total = 0j
    for traj in enumerate_trajectories(ts, t_f, _matches(ts, x_f), cap, start=start):
        total += w(_path_action(ts, traj, f))
    return total


def bruteforce_field(ts, t_f, w: WeightFunction, f, cap=DEFAULT_PATH_CAP) -> AmplitudeField:
    """Path-by-path amplitudes of every endpoint reached in exactly ``t_f`` frames."""
    entries = {}
    for traj in enumerate_trajectories(ts, t_f, None, cap):
        sid = ts.encode(traj.final)
        entries[sid] = entries.get(sid, 0j) + w(_path_action(ts, traj, f))
    return AmplitudeField(t_f, dict(sorted(entries.items())))


def _check_factorizes(w, f):
    if not w.factorizes:
        raise ValueError("transfer propagation needs a weight that factorizes over frames")
    if f.kind == _action.COMPOSITE and f.penalty_weight > 0:
        raise ValueError("category penalties are path-level; use amplitude_bruteforce")


def propagate(ts, w: WeightFunction, f, frames: int, budget=DEFAULT_STATE_BUDGET, restrict=None):
    """Transfer-recurrence amplitudes for frames ``0..frames``.

    ``restrict`` optionally drops states (and the paths through them) for
    which it returns false. Sources are visited in ascending id order, which
    fixes the summation order for every successor.
    """
    if frames < 0:
        raise ValueError("frames must be non-negative")
    _check_factorizes(w, f)
    s0 = ts.initial
    cur = {ts.encode(s0): (s0, 1 + 0j)}
    fields = [AmplitudeField(0, {sid: a for sid, (_, a) in cur.items()})]
    weights = {}
    for t in range(frames):
        nxt = {}
        for sid in sorted(cur):
            s, amp = cur[sid]
            for _, s2 in ts.transitions(s):
                if restrict is not None and not restrict(s2):
                    continue
                sid2 = ts.encode(s2)
                key = (sid, sid2)
                wt = weights.get(key)
                if wt is None:
                    wt = weights[key] = w(ts.step_action(s, s2, f))
                prev = nxt.get(sid2)
                nxt[sid2] = (s2, amp * wt if prev is None else prev[1] + amp * wt)
        if len(nxt) > budget:
            raise StateBudgetExceeded(t + 1, len(nxt))
        if not ts.time_invariant:
            weights.clear()
        cur = nxt
        fields.append(AmplitudeField(t + 1, {sid: cur[sid][1] for sid in sorted(cur)}))
    return fields


def born_distribution(field_or_map) -> dict:
    """``|K|^2`` normalized to unit total."""
    entries = field_or_map.entries if isinstance(field_or_map, AmplitudeField) else field_or_map
    weights = {k: abs(a) ** 2 for k, a in entries.items()}
    total = math.fsum(weights.values())
    if total == 0:
        raise ZeroField("every amplitude is zero")
    return {k: v / total for k, v in weights.items()}


class TransferOperator:
    """Compiled edge list of a time-invariant transition system.

    States reachable from the initial state within ``horizon`` frames are
    indexed in ascending id order; edges keep one entry per label.
    """

    def __init__(self, ts, f, horizon, budget=DEFAULT_STATE_BUDGET):
        if not ts.time_invariant:
            raise ValueError("transfer operator needs a time-invariant system")
        _check_factorizes(WeightFunction(), f)
        s0 = ts.initial
        frontier = {ts.encode(s0): s0._replace(frame=0)}
        seen = dict(frontier)
        raw = []
        for _ in range(horizon):
            nxt = {}
            for sid, s in frontier.items():
                for _, s2 in ts.transitions(s):
                    sid2 = ts.encode(s2)
                    raw.append((sid, sid2, ts.step_action(s, s2, f)))
                    if sid2 not in seen:
                        s2 = s2._replace(frame=0)
                        seen[sid2] = nxt[sid2] = s2
            if len(seen) > budget:
                raise StateBudgetExceeded(_ + 1, len(seen))
            frontier = nxt
            if not frontier:
                break
        self.ts = ts
        self.ids = np.array(sorted(seen), dtype=object)
        index = {sid: i for i, sid in enumerate(self.ids)}
        self.states = [seen[sid] for sid in self.ids]
        raw.sort(key=lambda e: (index[e[1]], index[e[0]]))
        self.src = np.array([index[a] for a, _, _ in raw], dtype=np.int64)
        self.dst = np.array([index[b] for _, b, _ in raw], dtype=np.int64)
        self.action = np.array([c for _, _, c in raw], dtype=float)
        self.start = index[ts.encode(s0)]
        self.size = len(self.ids)

    def run(self, w: WeightFunction, frames: int):
        """Dense amplitude vectors and reachability masks for frames ``0..frames``."""
        ew = w.many(self.action)
        k = np.zeros(self.size, dtype=complex)
        k[self.start] = 1
        reach = np.zeros(self.size, dtype=bool)
        reach[self.start] = True
        amps, masks = [k], [reach]
        for _ in range(frames):
            contrib = ew * k[self.src]
            k = np.bincount(self.dst, weights=contrib.real, minlength=self.size) + 1j * np.bincount(
                self.dst, weights=contrib.imag, minlength=self.size
            )
            reach = np.bincount(self.dst, weights=reach[self.src], minlength=self.size) > 0
            amps.append(k)
            masks.append(reach)
        return amps, masks

    def fields(self, w, frames):
        amps, masks = self.run(w, frames)
        return [
            AmplitudeField(t, {self.ids[i]: complex(a[i]) for i in np.flatnonzero(m)})
            for t, (a, m) in enumerate(zip(amps, masks))
        ]


def completion_amplitude(ts, w, f, frame_cap, category=None, budget=DEFAULT_STATE_BUDGET) -> dict:
    """Amplitude absorbed by goal states at each frame ``1..frame_cap``.

    Goal states have no successors, so every path is counted once, at the
    frame it first reaches the goal. With a category only goal states whose
    item set satisfies it are counted.
    """
    if frame_cap < 1:
        raise ValueError("frame cap must be at least 1")

    def accept(s):
        if not ts.is_goal(s):
            return False
        return category is None or category.accepts(getattr(s, "items", 0))

    out = {}
    if ts.time_invariant:
        op = TransferOperator(ts, f, frame_cap, budget)
        goal = np.array([accept(s) for s in op.states], dtype=bool)
        amps, _ = op.run(w, frame_cap)
        for t in range(1, frame_cap + 1):
            a = amps[t][goal]
            out[t] = complex(math.fsum(a.real), math.fsum(a.imag))
        return out
    fields = propagate(ts, w, f, frame_cap, budget)
    for t in range(1, frame_cap + 1):
        total = 0j
        for sid, a in fields[t].entries.items():
            if accept(ts.decode(sid, t)):
                total += a
        out[t] = total
    return out


def completion_distribution(ts, w, f, frame_cap, category=None) -> dict:
    return born_distribution(completion_amplitude(ts, w, f, frame_cap, category))


def chebyshev(a, b) -> int:
    return max(abs(p - q) for p, q in zip(a, b))


@dataclass(frozen=True)
class SweepRow:
    hbar: float
    in_tube: float
    endpoint_mass: float
    in_tube_enumerated: float | None = None


def _tube_ratio(k_tube, k_all):
    k_out = k_all - k_tube
    a, b = abs(k_tube) ** 2, abs(k_out) ** 2
    if a + b == 0:
        raise ZeroField("no path reaches the reference endpoint")
    return a / (a + b)


def hbar_sweep(ts, f, hbars, reference: Trajectory, radius, enumerate_cap=DEFAULT_PATH_CAP):
    """Concentration of the path sum on a tube around ``reference``.

    Paths from the initial state to the reference endpoint are split into
    those that stay within Chebyshev ``radius`` of the reference at every
    frame and the rest. The two classes are treated as the alternatives of
    the Born rule: ``P_tube = |K_tube|^2 / (|K_tube|^2 + |K_out|^2)``.
    ``endpoint_mass`` is the free-endpoint Born mass within ``radius`` of the
    reference endpoint. When the paths can be listed within
    ``enumerate_cap`` the tube probability is recomputed path by path.
    """
    hbars = list(hbars)
    if any(b >= a for a, b in zip(hbars, hbars[1:])):
        raise ValueError("hbar values must be strictly decreasing")
    frames = len(reference.states) - 1
    ref_pos = [ts.position(s) for s in reference.states]
    end = reference.final
    end_id = ts.encode(end)

    def in_tube(s):
        return chebyshev(ts.position(s), ref_pos[s.frame]) <= radius

    listed = None
    if enumerate_cap:
        try:
            paths = enumerate_trajectories(ts, frames, _matches(ts, end), enumerate_cap)
            listed = [(_path_action(ts, p, f), all(in_tube(s) for s in p.states)) for p in paths]
        except PathCapExceeded:
            listed = None

    rows = []
    for hbar in hbars:
        w = WeightFunction.feynman(hbar)
        full = propagate(ts, w, f, frames)[frames]
        tube = propagate(ts, w, f, frames, restrict=in_tube)[frames]
        p_tube = _tube_ratio(tube[end_id], full[end_id])
        probs = born_distribution(full)
        mass = math.fsum(
            p for sid, p in probs.items() if chebyshev(ts.position(ts.decode(sid, frames)), ref_pos[-1]) <= radius
        )
        enum = None
        if listed is not None:
            k_all = k_in = 0j
            for s_val, inside in listed:
                wt = w(s_val)
                k_all += wt
                if inside:
                    k_in += wt
            enum = _tube_ratio(k_in, k_all)
        rows.append(SweepRow(hbar, p_tube, mass, enum))
    return rows


@dataclass
class DoubleSlitResult:
    both: dict
    left: dict
    right: dict
    p_both: dict
    p_left: dict
    p_right: dict
    classical_add: dict
    linearity_max_err: float
    interference_max: float


def screen_amplitudes(ts: LatticeSystem, w, f) -> dict:
    last = propagate(ts, w, f, ts.frames)[ts.frames]
    return {x: last[x] for x in range(ts.width)}


def double_slit(width, frames, slit_frame, slits, w, f, start=None, walls=()) -> DoubleSlitResult:
    """Screen amplitudes with both slits open and with each slit alone."""
    left, right = slits
    if left == right:
        raise SlitBlocked(f"both slits at cell {left}")
    for c in (left, right):
        if not 0 <= c < width:
            raise ValueError(f"slit cell {c} out of bounds")
        if (slit_frame, c) in set(walls):
            raise SlitBlocked(f"slit cell {c} is walled at frame {slit_frame}")
    if not 0 < slit_frame < frames:
        raise ValueError("slit frame must lie strictly inside (0, frames)")

    def screen(open_cells):
        wall = slit_walls(width, slit_frame, open_cells) | frozenset(walls)
        return screen_amplitudes(LatticeSystem(width, frames, wall, start), w, f)

    both, k_left, k_right = screen((left, right)), screen((left,)), screen((right,))
    lin = max(abs(both[x] - (k_left[x] + k_right[x])) for x in range(width))
    p_both = born_distribution(both)
    incoherent = {x: abs(k_left[x]) ** 2 + abs(k_right[x]) ** 2 for x in range(width)}
    total = math.fsum(incoherent.values())
    if total == 0:
        raise ZeroField("no path reaches the screen")
    classical = {x: v / total for x, v in incoherent.items()}
    return DoubleSlitResult(
        both,
        k_left,
        k_right,
        p_both,
        born_distribution(k_left),
        born_distribution(k_right),
        classical,
        lin,
        max(abs(p_both[x] - classical[x]) for x in range(width)),
    )
