"""Command-line interface: build, wl, iso, pebble, mekler, cfi, canonize, accept.

Human-readable output goes to stdout; ``--report PATH`` writes a JSON report
with sorted keys.  Everything but the ``timings`` section is deterministic.
Exit codes: 0 success (``iso``: isomorphic), 1 failure (``iso``:
non-isomorphic), 2 inconclusive, 3 error.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import logging
import os
import sys
import time
from pathlib import Path

from . import __version__, acceptance, corpus, graphs, iso, mekler, pebble, wl
from .constructors import AbelianGroup
from .errors import GroupWLError
from .group_core import parse_cayley, write_cayley

SCHEMA = "groupwl-report/1"
CACHE_ENV = "GROUPWL_CACHE"
EXIT_ERROR = 3

log = logging.getLogger("groupwl")


# --------------------------------------------------------------------------
# inputs


class Input:
    def __init__(self, spec: str, cap: int | None = None):
        self.spec = spec
        path = Path(spec)
        if path.is_file():
            data = path.read_bytes()
            self.digest = hashlib.sha256(data).hexdigest()
            text = data.decode()
            head = text.lstrip().split(None, 2)[:2]
            if head == ["graph", "v1"]:
                self.kind, self.value = "graph", graphs.parse_graph(text)
            else:
                self.kind, self.value = "group", parse_cayley(text, name=path.name)
        elif "/" in spec or path.suffix in (".cay", ".gr", ".txt"):
            raise FileNotFoundError(f"no such file: {spec}")
        else:
            built = corpus.build(spec, cap)
            self.digest = None
            self.kind, self.value = built.kind, built.value

    def describe(self) -> dict:
        return {"input": self.spec, "sha256": self.digest, "kind": self.kind,
                "size": self.value.order if self.kind == "group" else self.value.num_vertices}


def _structure(inp: Input, version: str):
    if inp.kind == "graph":
        if version != "graph":
            raise GroupWLError("graph inputs need --version graph")
        return wl.graph_structure(inp.value)
    if version == "graph":
        raise GroupWLError("group inputs need --version 1 or 2")
    return wl.group_structure(inp.value, int(version))


def _rounds(text: str):
    return "stable" if text == "stable" else int(text)


def _emit(args, command: str, inputs: list[Input], results: dict, timings: dict) -> None:
    report = {"schema": SCHEMA, "engine_version": __version__, "command": command,
              "arguments": {k: v for k, v in sorted(vars(args).items())
                            if k not in ("func", "report") and not callable(v)},
              "inputs": [i.describe() for i in inputs], "results": results,
              "timings": {k: round(v, 4) for k, v in timings.items()}}
    if args.report:
        Path(args.report).write_text(json.dumps(report, sort_keys=True, indent=2, default=str) + "\n")


# --------------------------------------------------------------------------
# commands


def cmd_build(args) -> int:
    built = corpus.build(args.descriptor, args.cap)
    if built.kind == "group":
        write_cayley(built.value, args.output)
        print(f"wrote group of order {built.value.order} to {args.output}")
    else:
        graphs.write_graph(built.value, args.output)
        print(f"wrote graph with {built.value.num_vertices} vertices and "
              f"{built.value.num_edges} edges to {args.output}")
    return 0


def cmd_wl(args) -> int:
    t0 = time.perf_counter()
    inputs = [Input(s, args.cap) for s in args.inputs]
    structs = [_structure(i, args.version) for i in inputs]
    t1 = time.perf_counter()
    if len(structs) == 1:
        C = wl.run_single(structs[0], args.k, args.mode, _rounds(args.rounds), args.threads)
        results = {"rounds": C.round, "num_classes": C.num_classes}
        if args.histograms:
            results["class_sizes"] = C.class_sizes
        print(f"{C.num_classes} classes after {C.round} rounds")
    else:
        CG, CH, v = wl.run(structs[0], structs[1], args.k, args.mode, _rounds(args.rounds),
                           args.criterion, args.threads)
        results = {"verdict": "distinguished" if v.distinguished else "not distinguished",
                   "round": v.round, "witness_class": v.witness, "criterion": v.criterion,
                   "rounds_run": CG.round}
        if args.histograms:
            results["class_histogram_per_round"] = {"left": CG.histograms, "right": CH.histograms}
        print(f"{results['verdict']} ({v.criterion} criterion, round {v.round}"
              + (f", witness color {v.witness})" if v.distinguished else ")"))
    _emit(args, "wl", inputs, results, {"load": t1 - t0, "refine": time.perf_counter() - t1})
    return 0


def cmd_iso(args) -> int:
    t0 = time.perf_counter()
    inputs = [Input(s, args.cap) for s in args.inputs]
    G, H = (i.value for i in inputs)
    if args.method == "oracle":
        res = iso.oracle_isomorphic(G, H, cap=args.oracle_cap)
    elif args.method == "abelian":
        res = iso.abelian_isomorphic(G, H)
    else:
        res = iso.wl_pipeline(G, H, args.k, args.mode, _rounds(args.rounds), int(args.version),
                              args.criterion, args.threads)
    results = {"verdict": res.verdict, "method": res.method, "reason": res.reason,
               "effort": res.effort}
    if res.witness is not None:
        results["witness"] = [int(x) for x in res.witness]
    print(f"{res.verdict} ({res.method}{': ' + res.reason if res.reason else ''})")
    _emit(args, "iso", inputs, results, {"total": time.perf_counter() - t0})
    return {True: 0, False: 1, None: 2}[res.isomorphic]


def _abelian_side(inp: Input):
    value = inp.value
    if isinstance(value, AbelianGroup):
        return value
    return iso.AbelianView(value)


def _implicit(spec: str):
    """Family duplicator inputs may name large Abelian groups without a table."""
    if spec.startswith("theorem:"):
        from .constructors import theorem_family
        _, q, n, side = spec.split(":")
        L, R = theorem_family(int(q), int(n), explicit=False, cap=0)
        return L if side == "left" else R
    return None


def cmd_pebble(args) -> int:
    t0 = time.perf_counter()
    version = int(args.version)
    if args.spoiler == "exhaustive":
        inputs = [Input(s, args.cap) for s in args.inputs]
        G, H = (i.value for i in inputs)
        wins = pebble.spoiler_wins_by_round(G, H, args.budget, args.rounds, version, args.search_cap)
        for r, w in enumerate(wins):
            print(f"round {r}: {'spoiler wins' if w else 'duplicator survives'}")
        results = {"spoiler_wins_by_round": wins, "spoiler_wins": wins[-1]}
        _emit(args, "pebble", inputs, results, {"total": time.perf_counter() - t0})
        return 0
    inputs, sides = [], []
    for s in args.inputs:
        implicit = _implicit(s) if args.duplicator == "family" else None
        if implicit is not None:
            sides.append(implicit)
            continue
        inp = Input(s, args.cap)
        inputs.append(inp)
        sides.append(_abelian_side(inp) if args.duplicator == "family" else inp.value)
    G, H = sides
    if args.duplicator == "family":
        make_dup = lambda seed: pebble.FamilyDuplicator(seed)
    else:
        brute = pebble.BruteDuplicator(G, H)
        make_dup = lambda seed: brute
    if args.spoiler.startswith("script:"):
        lines = Path(args.spoiler[7:]).read_text().splitlines()
        spoilers = [lambda seed: pebble.ScriptSpoiler(lines)]
        games = 1
    else:
        spoilers = [pebble.RandomSpoiler]
        games = args.games
    summary = {"games": games, "spoiler_wins": 0, "stuck": 0}
    traces = []
    for g in range(games):
        seed = args.seed + g
        state = pebble.new_game(G, H, args.budget, args.q, version)
        try:
            rec = pebble.run_game(state, spoilers[0](seed), make_dup(seed), args.rounds)
        except pebble.StrategyStuck as exc:
            summary["stuck"] += 1
            log.error("game %d: %s", g, exc)
            continue
        summary["spoiler_wins"] += rec.winner == "spoiler"
        if g < args.trace_games:
            print(f"game {g}: {rec.winner} after {rec.rounds} rounds")
            for line in rec.trace:
                print("  " + line)
        traces.append({"winner": rec.winner, "rounds": rec.rounds, "trace": rec.trace})
    print(f"{summary['spoiler_wins']} spoiler wins, {summary['stuck']} stuck, {games} games")
    _emit(args, "pebble", inputs, {"summary": summary, "games": traces[:args.trace_games]},
          {"total": time.perf_counter() - t0})
    return 0 if summary["stuck"] == 0 else 1


def _graph_arg(spec: str) -> graphs.Graph:
    path = Path(spec)
    return graphs.read_graph(path) if path.is_file() else corpus.parse_graph_name(spec)


def cmd_mekler(args) -> int:
    t0 = time.perf_counter()
    g = _graph_arg(args.graph)
    M = mekler.mekler_group(g, args.p)
    center = mekler.formula_subgroup_order(M, mekler.center_of(M))
    results = {"vertices": M.n, "prime": M.p, "non_edges": [list(e) for e in M.non_edges],
               "order": M.order, "order_exponent": M.rank, "center_order": center}
    print(f"order {M.p}^{M.rank} = {M.order}, center order {center}")
    if args.export_cayley:
        workdir = os.environ.get(CACHE_ENV)
        G = mekler.to_cayley(M, cap=args.cap or mekler.MEKLER_CAP, workdir=workdir)
        write_cayley(G, args.export_cayley)
        print(f"wrote Cayley table to {args.export_cayley}")
    _emit(args, "mekler", [], results, {"total": time.perf_counter() - t0})
    return 0


def cmd_cfi(args) -> int:
    base = _graph_arg(args.base)
    twist = [tuple(int(v) for v in e.split("-")) for e in args.twist.split(",")] if args.twist else []
    C = graphs.cfi(base, twist)
    g = C.graph
    print(f"CFI graph: {g.num_vertices} vertices, {g.num_edges} edges, "
          f"{len(C.twist_set)} twisted base edges")
    if args.output:
        graphs.write_graph(g, args.output)
    _emit(args, "cfi", [], {"vertices": g.num_vertices, "edges": g.num_edges,
                            "twist": sorted(list(e) for e in C.twist_set)}, {})
    return 0


def cmd_canonize(args) -> int:
    t0 = time.perf_counter()
    inp = Input(args.input, args.cap)
    cert = wl.canonize(inp.value, args.d, args.mode, _rounds(args.rounds), args.threads)
    print(cert.digest)
    _emit(args, "canonize", [inp], {"order": cert.order, "digest": cert.digest,
                                    "fingerprints": cert.fingerprints()},
          {"total": time.perf_counter() - t0})
    return 0


def cmd_accept(args) -> int:
    results = acceptance.run_all(args.only, args.threads, echo=print)
    passed = all(r.passed for r in results)
    print(f"{sum(r.passed for r in results)}/{len(results)} criteria passed")
    if args.report:
        report = {"schema": SCHEMA, "engine_version": __version__, "command": "accept",
                  "results": [r.to_json() for r in results], "passed": passed}
        Path(args.report).write_text(json.dumps(report, sort_keys=True, indent=2, default=str) + "\n")
    return 0 if passed else 1


# --------------------------------------------------------------------------
# parser


def _wl_flags(p: argparse.ArgumentParser, versions=("1", "2", "graph")) -> None:
    p.add_argument("--k", type=int, default=2, choices=(1, 2, 3))
    p.add_argument("--mode", default="countfree", choices=("counting", "countfree"))
    p.add_argument("--version", default="1", choices=versions)
    p.add_argument("--criterion", default="multiset", choices=("set", "multiset"))
    p.add_argument("--rounds", default="stable", help="a round count or 'stable'")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="groupwl", description=__doc__.splitlines()[0])
    parser.add_argument("--threads", type=int, default=os.cpu_count() or 1)
    parser.add_argument("--log-level", default="WARNING")
    parser.add_argument("--version-info", action="version", version=f"groupwl {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, func, help_text):
        p = sub.add_parser(name, help=help_text)
        p.set_defaults(func=func)
        p.add_argument("--report", help="write a JSON report here")
        p.add_argument("--cap", type=int, default=None, help="enumeration cap for constructors")
        return p

    p = add("build", cmd_build, "write a group or graph file from a family descriptor")
    p.add_argument("descriptor")
    p.add_argument("-o", "--output", required=True)

    p = add("wl", cmd_wl, "run Weisfeiler-Leman on one or two inputs")
    p.add_argument("inputs", nargs="+")
    _wl_flags(p)
    p.add_argument("--histograms", action="store_true")

    p = add("iso", cmd_iso, "decide or test isomorphism of two groups")
    p.add_argument("inputs", nargs=2)
    p.add_argument("--method", default="oracle", choices=("oracle", "abelian", "wl"))
    p.add_argument("--oracle-cap", type=int, default=iso.ORACLE_CAP)
    _wl_flags(p, ("1", "2"))

    p = add("pebble", cmd_pebble, "play or solve the count-free pebble game")
    p.add_argument("inputs", nargs=2)
    p.add_argument("--budget", type=int, default=1, help="pebbles on the board")
    p.add_argument("--q", type=int, default=1)
    p.add_argument("--rounds", type=int, default=20)
    p.add_argument("--version", default="2", choices=("1", "2"))
    p.add_argument("--spoiler", default="random", help="random, exhaustive or script:FILE")
    p.add_argument("--duplicator", default="brute", choices=("brute", "family"))
    p.add_argument("--games", type=int, default=1)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--trace-games", type=int, default=1)
    p.add_argument("--search-cap", type=int, default=pebble.SEARCH_CAP)

    p = add("mekler", cmd_mekler, "Mekler group statistics and Cayley export")
    p.add_argument("graph", help="graph file or name (k4, path3, prism, empty2, ...)")
    p.add_argument("-p", type=int, default=3)
    p.add_argument("--export-cayley")

    p = add("cfi", cmd_cfi, "build a CFI graph")
    p.add_argument("base", help="graph file or name")
    p.add_argument("--twist", default="", help="twisted base edges, e.g. 0-1,2-3")
    p.add_argument("-o", "--output")

    p = add("canonize", cmd_canonize, "canonical certificate of a group")
    p.add_argument("input")
    p.add_argument("--d", type=int, default=2)
    p.add_argument("--mode", default="countfree", choices=("counting", "countfree"))
    p.add_argument("--rounds", default="stable")

    p = add("accept", cmd_accept, "run the acceptance suite")
    p.add_argument("--only", nargs="*", choices=list(acceptance.CRITERIA))
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=args.log_level.upper(), format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (GroupWLError, OSError, ValueError, KeyError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
