"""``pathrun`` command line.

Each subcommand writes its artifacts into ``--out`` and prints one summary
line of ``key=value`` pairs. Exit status is 0 on success, 1 on domain errors
(the error class name is printed) and 2 on usage errors.
"""

from __future__ import annotations

import argparse
import math
import os
import statistics
import sys
from dataclasses import replace
from pathlib import Path

from . import agents, pathsearch, propagator, runstats
from .action import COMPLETION_TIME, LAGRANGIAN, ActionFunctional, CategoryConstraint
from .config import functional_from, load_config, physics_from
from .errors import PathrunError
from .output import write_csv, write_svg
from .simworld import (
    PlatformerSystem,
    decode_inputs,
    lattice_system,
    read_level,
    run,
)

AMPLITUDE_HEADER = ["frame", "state_id", "x", "y", "re", "im", "prob"]


class UsageError(Exception):
    pass


def _floats(text):
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def _ints(text):
    try:
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="pathrun", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    def cmd(name, help):
        sp = sub.add_parser(name, help=help)
        sp.add_argument("--config", help="key=value physics/action file")
        sp.add_argument("--out", default=".", help="output directory")
        sp.add_argument("--frame-cap", type=int)
        return sp

    sp = cmd("simulate", "replay an input string on a level")
    sp.add_argument("--level", required=True)
    sp.add_argument("--inputs", default="", help='e.g. "R- R- RJ"')

    sp = cmd("search", "minimum-time or least-action trajectory")
    sp.add_argument("--level", required=True)
    sp.add_argument("--category", default="any%")
    sp.add_argument("--functional", choices=[COMPLETION_TIME, LAGRANGIAN], default=COMPLETION_TIME)
    sp.add_argument("--cap", type=int, default=16, help="co-optimal witnesses to write")

    sp = cmd("propagate", "transfer-recurrence amplitudes")
    src = sp.add_mutually_exclusive_group(required=True)
    src.add_argument("--level")
    src.add_argument("--width", type=int, help="lattice width")
    sp.add_argument("--frames", type=int, required=True)
    sp.add_argument("--hbar", type=float, default=1.0)
    sp.add_argument("--start", type=int)
    sp.add_argument("--max-step", type=int, default=1)
    sp.add_argument("--mass", type=float)

    sp = cmd("doubleslit", "two-slit lattice experiment")
    sp.add_argument("--width", type=int, required=True)
    sp.add_argument("--frames", type=int, required=True)
    sp.add_argument("--slit-frame", type=int, required=True)
    sp.add_argument("--slits", type=_ints, required=True)
    sp.add_argument("--hbar", type=float, default=1.0)
    sp.add_argument("--mass", type=float, default=1.0)

    sp = cmd("sweep", "classical-limit hbar sweep on a lattice")
    sp.add_argument("--width", type=int, default=81)
    sp.add_argument("--frames", type=int, default=4)
    sp.add_argument("--max-step", type=int, default=10)
    sp.add_argument("--mass", type=float, default=0.002)
    sp.add_argument("--start", type=int)
    sp.add_argument("--end", type=int, help="endpoint cell (default: start)")
    sp.add_argument("--radius", type=int, default=4)
    sp.add_argument("--hbars", type=_floats, default=[10.0, 1.0, 0.1, 0.01])

    sp = cmd("runs", "generate a seeded batch of attempts")
    sp.add_argument("--level", required=True)
    sp.add_argument("--agent", choices=agents.AGENT_KINDS, default=agents.NOISY)
    sp.add_argument("--p", type=float, default=0.0)
    sp.add_argument("--n", type=int, default=1000)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--category", default="any%")
    sp.add_argument("--inputs", default="", help="inputs for the replay agent")
    sp.add_argument("--threads", type=int, help="worker count (default PATHRUN_THREADS)")

    sp = cmd("stats", "histogram, frequencies and tube membership of a run log")
    sp.add_argument("--log", required=True)
    sp.add_argument("--level", required=True)
    sp.add_argument("--category", default="any%")
    sp.add_argument("--radius", type=int, default=8)

    sp = cmd("fit", "effective hbar of a run log")
    sp.add_argument("--log", required=True)
    sp.add_argument("--level", required=True)
    sp.add_argument("--category", default="any%")
    sp.add_argument("--grid", type=_floats, help="comma-separated hbar grid (default 41 log-spaced points)")
    sp.add_argument("--model-frames", type=int, help="model window (default: latest completion)")

    sp = cmd("worlds", "prefix tree of a run log")
    sp.add_argument("--log", required=True)
    return p


def _settings(args, lvl=None):
    cfg = load_config(args.config) if args.config else {}
    physics = physics_from(cfg)
    if args.frame_cap is not None:
        physics = replace(physics, frame_cap=args.frame_cap)
    return cfg, physics, functional_from(cfg, lvl)


def _out(args, name):
    d = Path(args.out)
    d.mkdir(parents=True, exist_ok=True)
    return d / name


def _summary(pairs, files=()):
    items = [f"{k}={_val(v)}" for k, v in pairs.items()]
    items.append("files=" + ",".join(str(f) for f in files))
    return " ".join(items)


def _val(v):
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return repr(v)
    return str(v)


def _amplitude_rows(ts, field, probs):
    for sid, a in field.entries.items():
        pos = ts.position(ts.decode(sid, field.frame))
        x, y = pos[0], pos[1] if len(pos) > 1 else 0
        yield [field.frame, sid, x, y, a.real, a.imag, probs.get(sid, 0.0)]


def cmd_simulate(args):
    lvl = read_level(args.level)
    _, physics, _ = _settings(args, lvl)
    traj = run(lvl, decode_inputs(args.inputs), physics)
    path = _out(args, "trajectory.csv")
    write_csv(
        path,
        ["frame", "x", "y", "vx", "vy", "grounded", "items"],
        ([s.frame, s.x, s.y, s.vx, s.vy, int(s.grounded), s.items] for s in traj.states),
    )
    return {"completed": traj.completed, "frames": traj.frames, "seconds": traj.seconds}, [path]


def cmd_search(args):
    lvl = read_level(args.level)
    _, physics, f = _settings(args, lvl)
    category = CategoryConstraint.parse(args.category, lvl)
    if args.functional == COMPLETION_TIME:
        res = pathsearch.min_time_path(lvl, category, physics=physics, cap=args.cap)
        pairs = {"optimal_frames": res.optimal_value}
    else:
        ts = PlatformerSystem(lvl, physics)
        f = ActionFunctional(LAGRANGIAN, f.mass, f.potential_coeff, potential=f.potential)
        res = pathsearch.enumerate_optimal(
            ts, f, physics.frame_cap, pathsearch.goal_predicate(ts, category), cap=args.cap
        )
        pairs = {"optimal_action": res.optimal_value, "optimal_frames": res.witness.frames}
    pairs["optimal_count"] = res.optimal_count
    path = _out(args, "witness.jsonl")
    records = [
        agents.RunRecord(i, 0, " ".join(u.encode() for u in tr.inputs), tr.completed, tr.frames,
                         float(res.optimal_value))
        for i, tr in enumerate(res.co_optimal)
    ]
    agents.write_log(records, path)
    return pairs, [path]


def cmd_propagate(args):
    if args.level:
        lvl = read_level(args.level)
        _, physics, f = _settings(args, lvl)
        ts = PlatformerSystem(lvl, physics)
    else:
        _, physics, f = _settings(args)
        ts = lattice_system(args.width, args.frames, start=args.start, max_step=args.max_step)
    if args.mass is not None:
        f = ActionFunctional(f.kind, args.mass, f.potential_coeff, potential=f.potential)
    w = propagator.WeightFunction.feynman(args.hbar)
    fields = propagator.propagate(ts, w, f, args.frames)
    rows = []
    norm_err = 0.0
    for field in fields:
        probs = propagator.born_distribution(field) if field.total_weight() > 0 else {}
        if probs:
            norm_err = max(norm_err, abs(math.fsum(probs.values()) - 1))
        rows.extend(_amplitude_rows(ts, field, probs))
    csv_path = _out(args, "amplitudes.csv")
    write_csv(csv_path, AMPLITUDE_HEADER, rows)
    last = fields[-1]
    probs = propagator.born_distribution(last) if last.total_weight() > 0 else {}
    by_x = {}
    for sid, p in probs.items():
        x = ts.position(ts.decode(sid, last.frame))[0]
        by_x[x] = by_x.get(x, 0.0) + p
    svg_path = _out(args, "propagate.svg")
    write_svg(svg_path, {"P(x)": sorted(by_x.items())}, title=f"Born distribution at frame {last.frame}",
              xlabel="x", ylabel="probability", bars=True)
    return {"frames": args.frames, "final_states": len(last), "norm_err": norm_err}, [csv_path, svg_path]


def cmd_doubleslit(args):
    _settings(args)
    if len(args.slits) != 2:
        raise UsageError("--slits takes exactly two cells")
    f = ActionFunctional(LAGRANGIAN, mass=args.mass)
    w = propagator.WeightFunction.feynman(args.hbar)
    res = propagator.double_slit(args.width, args.frames, args.slit_frame, tuple(args.slits), w, f)
    files = []
    for name, amps, probs in (
        ("both", res.both, res.p_both),
        ("left", res.left, res.p_left),
        ("right", res.right, res.p_right),
    ):
        path = _out(args, f"doubleslit_{name}.csv")
        write_csv(path, AMPLITUDE_HEADER,
                  ([args.frames, x, x, 0, amps[x].real, amps[x].imag, probs[x]] for x in range(args.width)))
        files.append(path)
    path = _out(args, "doubleslit_classical.csv")
    write_csv(path, ["x", "prob"], ([x, res.classical_add[x]] for x in range(args.width)))
    files.append(path)
    svg = _out(args, "doubleslit.svg")
    write_svg(svg, {"both slits": sorted(res.p_both.items()), "incoherent sum": sorted(res.classical_add.items())},
              title="screen distribution", xlabel="cell", ylabel="probability")
    files.append(svg)
    return {"linearity_max_err": res.linearity_max_err, "interference_max": res.interference_max}, files


def cmd_sweep(args):
    _settings(args)
    ts = lattice_system(args.width, args.frames, start=args.start, max_step=args.max_step)
    end = ts.initial.x if args.end is None else args.end
    f = ActionFunctional(LAGRANGIAN, mass=args.mass)
    ref = pathsearch.least_action_path(ts, f, args.frames, lambda s: s.frame == args.frames and s.x == end).witness
    rows = propagator.hbar_sweep(ts, f, args.hbars, ref, args.radius)
    path = _out(args, "sweep.csv")
    write_csv(path, ["hbar", "in_tube", "endpoint_mass", "in_tube_enumerated"],
              ([r.hbar, r.in_tube, r.endpoint_mass, "" if r.in_tube_enumerated is None else r.in_tube_enumerated]
               for r in rows))
    svg = _out(args, "sweep.svg")
    write_svg(svg, {"in-tube": [(r.hbar, r.in_tube) for r in rows],
                    "endpoint": [(r.hbar, r.endpoint_mass) for r in rows]},
              title="classical limit", xlabel="hbar", ylabel="probability", logx=True)
    vals = [r.in_tube for r in rows]
    monotone = all(b >= a for a, b in zip(vals, vals[1:]))
    return {"rows": len(rows), "monotone": monotone, "in_tube_last": vals[-1]}, [path, svg]


def cmd_runs(args):
    lvl = read_level(args.level)
    _, physics, f = _settings(args, lvl)
    spec = agents.AgentSpec(args.agent, args.p, args.seed, CategoryConstraint.parse(args.category, lvl),
                            decode_inputs(args.inputs))
    records = agents.generate_runs(spec, lvl, args.n, args.seed, physics, f, args.threads)
    path = _out(args, "runs.jsonl")
    agents.write_log(records, path)
    done = [r.frames for r in records if r.completed]
    return {
        "runs": len(records),
        "completed": len(done),
        "mean_frames": statistics.fmean(done) if done else float("nan"),
    }, [path]


def cmd_stats(args):
    lvl = read_level(args.level)
    _, physics, _ = _settings(args, lvl)
    records = agents.read_log(args.log)
    category = CategoryConstraint.parse(args.category, lvl)
    hist = runstats.completion_histogram(records)
    freqs = runstats.trajectory_frequencies(records)
    ref = pathsearch.min_time_path(lvl, category, physics=physics, cap=1).witness
    frac = runstats.tube_fraction(records, runstats.TubeSpec(ref, args.radius), lvl, physics)
    files = [_out(args, n) for n in ("histogram.csv", "frequencies.csv", "tube.csv", "histogram.svg")]
    write_csv(files[0], ["frames", "frequency"], ([k, float(v)] for k, v in hist.items()))
    write_csv(files[1], ["inputs", "frequency"], ([k, float(v)] for k, v in freqs.items()))
    write_csv(files[2], ["run_index", "in_tube"], ([r.run_index, int(r.in_tube)] for r in records))
    write_svg(files[3], {"runs": [(k, float(v)) for k, v in hist.items() if k != runstats.DNF]},
              title="completion frames", xlabel="frames", ylabel="frequency", bars=True)
    return {
        "runs": len(records),
        "tube_fraction": float(frac),
        "distinct": len(freqs),
        "dnf": float(hist.get(runstats.DNF, 0)),
    }, files


def cmd_fit(args):
    lvl = read_level(args.level)
    _, physics, f = _settings(args, lvl)
    records = agents.read_log(args.log)
    grid = args.grid or runstats.DEFAULT_GRID
    fit = runstats.fit_hbar(records, lvl, f, grid, CategoryConstraint.parse(args.category, lvl),
                            args.model_frames, physics)
    path, svg = _out(args, "fit.csv"), _out(args, "fit.svg")
    write_csv(path, ["hbar", "kl"], zip(fit.grid, fit.divergence))
    write_svg(svg, {"KL": list(zip(fit.grid, fit.divergence))}, title="divergence vs hbar",
              xlabel="hbar", ylabel="KL(empirical | model)", logx=True)
    return {"hbar_eff": fit.hbar_eff, "model_frames": fit.frame_cap, "dnf_excluded": fit.dnf_fraction}, [path, svg]


def cmd_worlds(args):
    records = agents.read_log(args.log)
    tree = runstats.worlds_tree(records)
    txt, dot = _out(args, "worlds.txt"), _out(args, "worlds.dot")
    txt.write_text(tree.to_text(), encoding="utf-8")
    dot.write_text(tree.to_dot(), encoding="utf-8")
    return {"runs": tree.root.count, "leaves": tree.leaf_count, "branch_events": tree.total_branch_events}, [txt, dot]


COMMANDS = {
    "simulate": cmd_simulate,
    "search": cmd_search,
    "propagate": cmd_propagate,
    "doubleslit": cmd_doubleslit,
    "sweep": cmd_sweep,
    "runs": cmd_runs,
    "stats": cmd_stats,
    "fit": cmd_fit,
    "worlds": cmd_worlds,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        pairs, files = COMMANDS[args.command](args)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"pathrun: error: {exc}", file=sys.stderr)
        return 2
    except (PathrunError, ValueError, OSError) as exc:
        print(f"error={type(exc).__name__} message={str(exc).replace(' ', '_')}")
        return 1
    print(_summary(pairs, [os.path.relpath(f, args.out) for f in files]))
    return 0


if __name__ == "__main__":
    sys.exit(main())
