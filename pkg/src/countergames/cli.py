"""Command-line front end: ``countergames <subcommand> ...``.

Verdicts are JSON on stdout (indented with ``--pretty``).  Exit codes: 0 on
success, 1 on bad input, 2 when a search ran out of budget.
"""
from __future__ import annotations

import argparse
import json
import math
import os
import sys

from .arena import (
    B_AND_PARITY,
    B_UNTIL_F,
    PARITY_ONLY,
    Arena,
    ConditionSpec,
    relabel,
    validate_arena,
    vertex_name,
)
from .families import (
    calibrate_gkn_phases,
    gen_cyclic_counter_game,
    gen_g1,
    gen_gkn,
    gen_tradeoff_game,
    round_robin_machine,
    strategy_g1_3state,
    strategy_g1_4state,
    strategy_gkn,
    tradeoff_exit_machine,
)
from .machines import (
    MachineError,
    StrategyMachine,
    evaluate_strategy_parity,
    evaluate_strategy_reachability,
    restrict_by_strategy,
    validate_machine,
)
from .solvers import (
    SearchBudgetExceeded,
    SynthesisQuery,
    decide_bparity,
    search_memory_strategy,
    strategy_from_solution,
    value_search,
)
from .transforms import (
    PreconditionError,
    compute_ranks,
    compute_slices,
    remove_even_min_color,
    remove_odd_min_color,
)
from .verification import SCOPES, run_claims

CONDITIONS = {"b-until": B_UNTIL_F, "b-parity": B_AND_PARITY, "parity": PARITY_ONLY}
EXIT_OK, EXIT_INPUT, EXIT_BUDGET = 0, 1, 2


class InputError(Exception):
    """Bad file, flag or arena; reported with exit code 1."""


def _emit(args, payload) -> None:
    if getattr(args, "pretty", False):
        print(json.dumps(payload, indent=2, sort_keys=True))
    else:
        print(json.dumps(payload, sort_keys=True, separators=(",", ":")))


def _num(x):
    return "inf" if isinstance(x, float) and math.isinf(x) else x


def _load_arena(path) -> Arena:
    if not os.path.exists(path):
        raise InputError(f"no such file: {path}")
    try:
        arena = Arena.load(path)
    except (OSError, ValueError, KeyError, TypeError) as exc:
        raise InputError(f"cannot read arena {path}: {exc}") from exc
    problems = validate_arena(arena)
    if problems:
        raise InputError(f"invalid arena {path}: {problems[0]}")
    return arena


def _load_machine(path, arena: Arena) -> StrategyMachine:
    if not os.path.exists(path):
        raise InputError(f"no such file: {path}")
    try:
        machine = StrategyMachine.load(path, arena)
    except (OSError, ValueError, KeyError, TypeError, MachineError) as exc:
        raise InputError(f"cannot read machine {path}: {exc}") from exc
    problems = validate_machine(arena, machine)
    if problems:
        raise InputError(f"invalid machine {path}: {problems[0]}")
    return machine


def _load_forbidden(path, arena: Arena) -> frozenset:
    if path is None:
        return frozenset()
    with open(path) as fh:
        names = json.load(fh)
    if isinstance(names, dict):
        names = names.get("forbidden", [])
    unknown = [n for n in names if n not in arena.owner]
    if unknown:
        raise InputError(f"forbidden vertex {unknown[0]!r} not in arena")
    return frozenset(names)


def _spec(args, arena: Arena, bound=None) -> ConditionSpec:
    spec = ConditionSpec(CONDITIONS[args.cond], bound, _load_forbidden(getattr(args, "forbidden", None), arena))
    try:
        spec.check(arena)
    except ValueError as exc:
        raise InputError(str(exc)) from exc
    return spec


def _save(obj, path, arena=None) -> str:
    try:
        if isinstance(obj, StrategyMachine):
            obj.save(path, arena)
        else:
            obj.save(path)
    except OSError as exc:
        raise InputError(f"cannot write {path}: {exc}") from exc
    return path


def _evaluate(arena, machine, kind, n_max):
    if kind == B_UNTIL_F:
        return evaluate_strategy_reachability(arena, machine, n_max, return_witness=True)
    return evaluate_strategy_parity(arena, machine, n_max, return_witness=True)


# -- subcommands ------------------------------------------------------------


def cmd_generate(args) -> int:
    fam = args.family
    need = {"tradeoff": "n", "g1": "n", "gkn": "n", "cyclic": "k"}[fam]
    if getattr(args, need) is None or (fam == "gkn" and args.k is None):
        raise InputError(f"family {fam} needs --{need}" + (" and --k" if fam == "gkn" else ""))
    try:
        if fam == "tradeoff":
            arena = gen_tradeoff_game(args.n)
            machine = tradeoff_exit_machine(arena)
        elif fam == "cyclic":
            arena = gen_cyclic_counter_game(args.k)
            machine = round_robin_machine(arena)
        elif fam == "g1":
            arena = gen_g1(args.n)
            machine = (strategy_g1_3state if args.states == 3 else strategy_g1_4state)(args.n, arena)
        else:
            arena = gen_gkn(args.k, args.n)
            phases = None
            if args.with_strategy:
                bound = args.k * (args.k + 3)
                if evaluate_strategy_reachability(arena, strategy_gkn(args.k, args.n, arena=arena), bound) > bound:
                    found = calibrate_gkn_phases(args.k, args.n, bound, arena=arena)
                    phases = found[0] if found else None
            machine = strategy_gkn(args.k, args.n, phases, arena=arena) if args.with_strategy else None
    except ValueError as exc:
        raise InputError(str(exc)) from exc
    out = args.output or f"{fam}.json"
    _save(arena, out)
    payload = {"arena": out, "vertices": len(arena.owner), "edges": len(arena.edges),
               "initial": vertex_name(arena.initial), "valid": not validate_arena(arena)}
    if args.with_strategy:
        spath = args.strategy_output or out.replace(".json", "") + ".strategy.json"
        _save(machine, spath, arena)
        payload.update(strategy=spath, states=machine.size)
    _emit(args, payload)
    return EXIT_OK


def cmd_solve(args) -> int:
    arena = _load_arena(args.arena)
    spec = _spec(args, arena, None if args.cond == "parity" else args.bound)
    if spec.kind != PARITY_ONLY and args.bound is None:
        raise InputError("--bound is required for counter conditions")
    res = decide_bparity(arena, spec)
    payload = {"winner": res.winner, "bound": res.bound,
               "configurations": len(res.arena.owner), "eve_region": len(res.win_eve)}
    if args.witness_out and res.winner == "E" and spec.kind != PARITY_ONLY:
        machine = strategy_from_solution(arena, spec, res)
        payload.update(witness=_save(machine, args.witness_out, arena), states=machine.size)
    _emit(args, payload)
    return EXIT_OK


def cmd_value(args) -> int:
    arena = _load_arena(args.arena)
    spec = _spec(args, arena)
    if spec.kind == PARITY_ONLY:
        raise InputError("value needs a counter condition")
    res = value_search(arena, spec, args.nmax)
    payload = {"value": res.value, "nmax": args.nmax}
    if args.witness_out and res.value is not None:
        machine = strategy_from_solution(arena, spec, res)
        payload.update(witness=_save(machine, args.witness_out, arena), states=machine.size)
    _emit(args, payload)
    return EXIT_OK


def cmd_eval(args) -> int:
    arena = _load_arena(args.arena)
    machine = _load_machine(args.machine, arena)
    spec = _spec(args, arena)
    if spec.kind == PARITY_ONLY:
        raise InputError("eval needs a counter condition")
    value, witness = _evaluate(arena, machine, spec.kind, args.nmax)
    payload = {"value": _num(value), "states": machine.size}
    if witness is not None:
        payload["witness"] = {"reason": witness.reason, "prefix": list(witness.play.prefix),
                              "cycle": list(witness.play.cycle)}
    _emit(args, payload)
    return EXIT_OK


def _workers() -> int:
    try:
        return max(1, int(os.environ.get("CG_THREADS", "1")))
    except ValueError:
        return 1


def cmd_search(args) -> int:
    arena = _load_arena(args.arena)
    spec = _spec(args, arena)
    if spec.kind == PARITY_ONLY:
        raise InputError("search needs a counter condition")
    query = SynthesisQuery(arena, spec, args.mem, args.bound)
    try:
        machine = search_memory_strategy(query, max_steps=args.max_steps, workers=_workers())
    except SearchBudgetExceeded as exc:
        _emit(args, {"exists": None, "budget_exceeded": True, "detail": str(exc)})
        return EXIT_BUDGET
    payload = {"exists": machine is not None, "mem": args.mem, "bound": args.bound}
    if machine is not None:
        payload["states"] = machine.size
        if args.witness_out:
            payload["witness"] = _save(machine, args.witness_out, arena)
    _emit(args, payload)
    return EXIT_OK


def cmd_transform(args) -> int:
    arena = _load_arena(args.arena)
    try:
        if args.kind == "even":
            out = remove_even_min_color(arena)
            payload = {"vertices": len(out.owner), "counters": out.k}
        else:
            if args.slices:
                with open(args.slices) as fh:
                    slices = tuple(json.load(fh)["slices"])
            elif args.machine:
                machine = _load_machine(args.machine, arena)
                restricted = restrict_by_strategy(arena, machine, args.nmax)
                if restricted.exceeded_nodes():
                    raise InputError(f"machine exceeds bound {args.nmax}")
                slices = compute_slices(restricted, arena.rank).slices
            else:
                raise InputError("odd removal needs --slices or --machine")
            out, forbidden = remove_odd_min_color(arena, slices)
            payload = {"vertices": len(out.owner), "slices": list(slices),
                       "forbidden": sorted(vertex_name(v) for v in forbidden)}
            if args.forbidden_out:
                with open(args.forbidden_out, "w") as fh:
                    json.dump(payload["forbidden"], fh, indent=1)
                    fh.write("\n")
                payload["forbidden_file"] = args.forbidden_out
    except PreconditionError as exc:
        raise InputError(str(exc)) from exc
    out = relabel(out)
    payload["arena"] = _save(out, args.output)
    _emit(args, payload)
    return EXIT_OK


def cmd_ranks(args) -> int:
    arena = _load_arena(args.arena)
    if args.F is not None:
        F = frozenset(args.F)
    elif args.color is not None:
        F = frozenset(v for v, c in arena.color.items() if c == args.color)
    else:
        raise InputError("give --F vertices or --color")
    try:
        ra = compute_ranks(arena, F, width=args.width)
    except PreconditionError as exc:
        raise InputError(str(exc)) from exc
    except AssertionError as exc:
        _emit(args, {"error": str(exc)})
        return EXIT_INPUT
    _emit(args, ra.to_json())
    return EXIT_OK


def cmd_verify_paper(args) -> int:
    results = run_claims(args.scope, slow=args.slow, echo=None if args.json else print)
    if args.json:
        _emit(args, [r.to_json() for r in results])
    failed = sum(not r.passed for r in results)
    if not args.json:
        print(f"{len(results) - failed}/{len(results)} claims passed")
    return EXIT_OK if not failed else EXIT_INPUT


def _dot_id(x) -> str:
    return json.dumps(vertex_name(x))


def arena_dot(arena: Arena) -> str:
    lines = ["digraph arena {"]
    for v in arena.owner:
        shape = "circle" if arena.owner[v] == "E" else "box"
        extra = ",peripheries=2" if arena.target and v in arena.target else ""
        label = f"{vertex_name(v)} : {arena.color[v]}"
        lines.append(f"  {_dot_id(v)} [shape={shape},label={json.dumps(label)}{extra}];")
    for e in arena.edges:
        lines.append(f"  {_dot_id(e.src)} -> {_dot_id(e.dst)} [label={json.dumps(''.join(e.act))}];")
    lines.append("}")
    return "\n".join(lines) + "\n"


def config_dot(arena: Arena, machine: StrategyMachine, cap: int) -> str:
    stop = arena.target if arena.target else None
    cg = restrict_by_strategy(arena, machine, cap, stop_at=stop)
    lines = ["digraph config {"]
    for i, (v, m, vals) in enumerate(cg.nodes):
        label = f"{vertex_name(v)} / {m} / {','.join(map(str, vals))}"
        lines.append(f"  n{i} [label={json.dumps(label)}];")
    for i, out in enumerate(cg.succ):
        for idx, j in out:
            lines.append(f"  n{i} -> n{j} [label={json.dumps(''.join(arena.edges[idx].act))}];")
    lines.append("}")
    return "\n".join(lines) + "\n"


def cmd_export_dot(args) -> int:
    arena = _load_arena(args.arena)
    text = arena_dot(arena)
    if args.machine:
        text += config_dot(arena, _load_machine(args.machine, arena), args.nmax)
    if args.output:
        with open(args.output, "w") as fh:
            fh.write(text)
        _emit(args, {"dot": args.output})
    else:
        sys.stdout.write(text)
    return EXIT_OK


# -- parser -----------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="countergames", description="Games with counters: solve, evaluate, synthesise.")
    p.add_argument("--pretty", action="store_true", help="indent JSON output")
    sub = p.add_subparsers(dest="command", required=True)

    def cond(sp, default="b-until"):
        sp.add_argument("--cond", choices=sorted(CONDITIONS), default=default)
        sp.add_argument("--forbidden", help="JSON list of vertices to avoid (Safe condition)")

    g = sub.add_parser("generate", help="write a game family instance")
    g.add_argument("family", choices=["tradeoff", "cyclic", "g1", "gkn"])
    g.add_argument("--n", type=int)
    g.add_argument("--k", type=int)
    g.add_argument("--states", type=int, choices=[3, 4], default=4, help="g1 machine size")
    g.add_argument("-o", "--output")
    g.add_argument("--with-strategy", action="store_true")
    g.add_argument("--strategy-output")
    g.set_defaults(func=cmd_generate)

    s = sub.add_parser("solve", help="decide the winner at a fixed bound")
    s.add_argument("arena")
    cond(s)
    s.add_argument("--bound", type=int)
    s.add_argument("--witness-out")
    s.set_defaults(func=cmd_solve)

    v = sub.add_parser("value", help="least bound Eve can guarantee")
    v.add_argument("arena")
    cond(v)
    v.add_argument("--nmax", type=int, default=10)
    v.add_argument("--witness-out")
    v.set_defaults(func=cmd_value)

    e = sub.add_parser("eval", help="worst-case value of a strategy machine")
    e.add_argument("arena")
    e.add_argument("machine")
    cond(e)
    e.add_argument("--nmax", type=int, default=10)
    e.set_defaults(func=cmd_eval)

    r = sub.add_parser("search", help="bounded-memory strategy synthesis")
    r.add_argument("arena")
    cond(r)
    r.add_argument("--mem", type=int, required=True)
    r.add_argument("--bound", type=int, required=True)
    r.add_argument("--max-steps", type=int, default=5_000_000)
    r.add_argument("--witness-out")
    r.set_defaults(func=cmd_search)

    t = sub.add_parser("transform", help="remove the least colour")
    t.add_argument("kind", choices=["even", "odd"])
    t.add_argument("arena")
    t.add_argument("-o", "--output", required=True)
    t.add_argument("--slices", help="JSON file with a 'slices' list")
    t.add_argument("--machine", help="winning machine to compute slices from")
    t.add_argument("--nmax", type=int, default=10)
    t.add_argument("--forbidden-out")
    t.set_defaults(func=cmd_transform)

    k = sub.add_parser("ranks", help="rank fixpoint of a graph")
    k.add_argument("arena")
    k.add_argument("--F", nargs="*")
    k.add_argument("--color", type=int, help="take F as the vertices of this colour")
    k.add_argument("--width", type=int)
    k.set_defaults(func=cmd_ranks)

    w = sub.add_parser("verify-paper", help="run the claim checks")
    w.add_argument("--scope", choices=list(SCOPES) + ["all"], default="all")
    w.add_argument("--slow", action="store_true", help="include the N=3 G1 runs")
    w.add_argument("--json", action="store_true", help="one JSON report instead of lines")
    w.set_defaults(func=cmd_verify_paper)

    d = sub.add_parser("export-dot", help="Graphviz rendering")
    d.add_argument("arena")
    d.add_argument("--machine")
    d.add_argument("--nmax", type=int, default=10)
    d.add_argument("-o", "--output")
    d.set_defaults(func=cmd_export_dot)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except InputError as exc:
        print(json.dumps({"error": str(exc)}), file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
