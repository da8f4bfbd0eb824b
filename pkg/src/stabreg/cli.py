"""Command line front end.

Every subcommand writes a JSON report (to ``--report`` or stdout) carrying
the tool version, the parsed config, the seed and the wall time; commands
that produce per-cell verdicts can also write a tab-separated table.

Exit codes: 0 when every check passed, 1 on verification failures (the
report holds witnesses), 2 on usage or structural errors.
"""
from __future__ import annotations

import argparse
import dataclasses
import json
import sys
import time
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Dict, List, Optional, Sequence

import numpy as np

from . import __version__, io
from .core import BudgetFn, GradedPartition, PartiteFunction, StructuralError, WeightedPart, rational_str, to_rational
from .embedding import (check_halfsimplex_realizable, check_monotone, embed_into_gs3,
                        sample_common_sub)
from .generators import (AverageSystem, Hypergraph3, TernaryInstance, gen_gs_instance,
                         gen_halfsimplex_grid, gen_parity_system, gen_random_average, philox,
                         random_graph)
from .gs3.classify import tag_name
from .gs3.partition import analyze
from .gs3.rfamily import PAIRS, check_family_invariants, verify_two_direction_claim
from .gs3.verify import verify_triple_homogeneity
from .regularity.construct import build_regular_partition_avg
from .regularity.verify import verify_strong_regularity
from .stability import max_ladder_exact, max_ladder_greedy

COMMANDS = ("generate", "stability", "partition", "verify", "gs3", "embed")
GEN_KINDS = ("average", "parity", "gs", "halfsimplex", "random-average")


class UsageError(ValueError):
    pass


@dataclass
class ExperimentConfig:
    """Everything a run depends on.  Rationals are kept as ``num/den`` strings."""

    command: str
    action: Optional[str] = None
    input: Optional[str] = None
    partition: Optional[str] = None
    out: Optional[str] = None
    report: Optional[str] = None
    table: Optional[str] = None
    seed: int = 0
    kind: Optional[str] = None
    sizes: List[int] = field(default_factory=lambda: [6, 6, 6])
    omega: int = 8
    density: str = "1/2"
    d: Optional[int] = None
    p: int = 3
    n: int = 2
    m: int = 11
    sample: bool = False
    zero_fraction: str = "1/5"
    epsilon: str = "1/100"
    delta: str = "1/10"
    budget: str = "const:1/2"
    mode: str = "exact"
    strategy: str = "profile"
    scope: str = "positive"
    cap: Optional[int] = None
    iterations: int = 50
    jobs: int = 1

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "ExperimentConfig":
        names = {f.name for f in dataclasses.fields(cls)}
        unknown = sorted(set(data) - names)
        if unknown:
            raise UsageError(f"unknown config keys: {', '.join(unknown)}")
        cfg = cls(**data)
        cfg.check()
        return cfg

    def check(self) -> None:
        if self.command not in COMMANDS:
            raise UsageError(f"unknown command {self.command!r}")
        for name in ("density", "zero_fraction", "epsilon", "delta"):
            value = getattr(self, name)
            if not isinstance(value, str):
                raise UsageError(f"{name} must be a 'num/den' string")
            setattr(self, name, rational_str(to_rational(value)))
        BudgetFn.parse(self.budget)
        if self.jobs < 1:
            raise UsageError("jobs must be positive")

    def echo(self) -> Dict[str, Any]:
        return dataclasses.asdict(self)


# --- helpers ------------------------------------------------------------------

def _need(cfg: ExperimentConfig, name: str):
    value = getattr(cfg, name)
    if value is None:
        raise UsageError(f"--{name.replace('_', '-')} is required for {cfg.command}")
    return value


def _read_function(path: str) -> PartiteFunction:
    obj = io.read(path)
    if isinstance(obj, AverageSystem):
        return obj.to_function()
    if isinstance(obj, PartiteFunction):
        return obj
    raise StructuralError(f"{path}: expected an average or function file")


def _read_ternary(path: str) -> TernaryInstance:
    obj = io.read(path)
    if not isinstance(obj, TernaryInstance):
        raise StructuralError(f"{path}: expected a ternary file")
    return obj


def _read_hypergraph(path: str) -> Hypergraph3:
    obj = io.read(path)
    if isinstance(obj, TernaryInstance):
        return obj.hypergraph()
    if isinstance(obj, Hypergraph3):
        return obj
    raise StructuralError(f"{path}: expected a hypergraph or ternary file")


def _q(x: Fraction) -> str:
    return rational_str(Fraction(x))


def _seq(s) -> str:
    return "".join(map(str, s)) or "<>"


def _write_table(path: str, header: Sequence[str], rows: Sequence[Sequence]) -> None:
    with open(path, "w") as fh:
        fh.write("\t".join(header) + "\n")
        for r in rows:
            fh.write("\t".join(str(c) for c in r) + "\n")


# --- subcommands ----------------------------------------------------------------

def cmd_generate(cfg: ExperimentConfig) -> Dict[str, Any]:
    kind = _need(cfg, "kind")
    out = _need(cfg, "out")
    info: Dict[str, Any] = {"kind": kind}
    if kind in ("average", "random-average"):
        d = cfg.d if cfg.d is not None else len(cfg.sizes) - 1
        system = gen_random_average(cfg.seed, cfg.sizes, cfg.omega, cfg.density, d)
        obj = system if kind == "average" else system.to_function()
    elif kind == "parity":
        if len(cfg.sizes) != 3:
            raise UsageError("parity systems have three parts")
        rng = philox(cfg.seed)
        a, b, c = cfg.sizes
        g = [random_graph(rng, s, t, cfg.density) for s, t in ((a, b), (a, c), (b, c))]
        parts = [WeightedPart.uniform(range(s)) for s in cfg.sizes]
        obj = gen_parity_system(parts, *(np.argwhere(x).tolist() for x in g))
        info["edges"] = [int(x.sum()) for x in g]
    elif kind == "gs":
        if cfg.sample:
            if cfg.p != 3:
                raise UsageError("sampling is implemented for p = 3")
            res = sample_common_sub(cfg.seed, cfg.n, cfg.sizes, Fraction(cfg.zero_fraction))
            obj = res.instance
            info.update(tried=res.tried, accepted=res.accepted, complete=res.complete)
        else:
            obj = gen_gs_instance(cfg.p, cfg.n)
        info["sizes"] = [len(part) for part in obj.parts]
    elif kind == "halfsimplex":
        if cfg.m < 2:
            raise UsageError("halfsimplex grids need m >= 2")
        obj = gen_halfsimplex_grid(cfg.m)
        info["edges"] = int(obj.edges.sum())
    else:
        raise UsageError(f"unknown kind {kind!r}; expected one of {GEN_KINDS}")
    io.write(obj, out)
    info["out"] = out
    return {"passed": True, "result": info}


def cmd_stability(cfg: ExperimentConfig) -> Dict[str, Any]:
    f = _read_function(_need(cfg, "input"))
    if cfg.mode == "exact":
        length, w = max_ladder_exact(f, cfg.delta) if cfg.cap is None else \
            max_ladder_exact(f, cfg.delta, cfg.cap)
    elif cfg.mode == "greedy":
        length, w = max_ladder_greedy(f, cfg.delta, cfg.seed, cfg.iterations)
    else:
        raise UsageError("mode must be exact or greedy")
    return {"passed": True, "result": {"mode": cfg.mode, "length": length, "xs": list(w.xs),
                                       "ys": list(w.ys), "alpha": _q(w.alpha), "delta": _q(w.delta)}}


def _cell_rows(rep):
    rows = []
    for c in rep.cells:
        iv = "" if c.interval is None else f"[{_q(c.interval[0])},{_q(c.interval[1])}]"
        wit = "" if c.witness is None else ";".join(",".join(map(str, t)) for t in c.witness)
        rows.append((",".join(map(str, c.indices)), _q(c.measure), c.size, iv,
                     _q(c.exceptional), _q(c.budget), c.verdict, wit))
    return rows


def _strong_report(f: PartiteFunction, P: GradedPartition, cfg: ExperimentConfig) -> Dict[str, Any]:
    rep = verify_strong_regularity(f, P, cfg.epsilon, BudgetFn.parse(cfg.budget))
    counts: Dict[str, int] = {}
    for c in rep.cells:
        counts[c.verdict] = counts.get(c.verdict, 0) + 1
    out = {"passed": rep.passed, "verdicts": counts,
           "exceptional_sides": {",".join(map(str, e)): _q(m) for e, m in rep.exceptional_sides.items()},
           "side_failures": [list(e) for e in rep.side_failures],
           "max_exceptional": _q(rep.max_exceptional),
           "failures": [{"indices": list(c.indices), "measure": _q(c.measure),
                         "interval": [_q(c.interval[0]), _q(c.interval[1])],
                         "witness": [list(t) for t in c.witness]} for c in rep.failures]}
    if cfg.table:
        _write_table(cfg.table, ("indices", "measure", "size", "interval", "exceptional",
                                 "budget", "verdict", "witness"), _cell_rows(rep))
    return out


def cmd_partition(cfg: ExperimentConfig) -> Dict[str, Any]:
    system = io.read(_need(cfg, "input"))
    if not isinstance(system, AverageSystem):
        raise StructuralError("partition needs an average file")
    res = build_regular_partition_avg(system, cfg.epsilon, BudgetFn.parse(cfg.budget), cfg.strategy)
    if cfg.out:
        io.write(res.partition, cfg.out)
    check = _strong_report(system.to_function(), res.partition, cfg)
    result = {"strategy": res.strategy, "partial": res.partial,
              "parts": {",".join(map(str, e)): res.partition.b(e) for e in res.partition.edges},
              "verification": check}
    return {"passed": check["passed"], "result": result}


def cmd_verify(cfg: ExperimentConfig) -> Dict[str, Any]:
    f = _read_function(_need(cfg, "input"))
    P = io.read(_need(cfg, "partition"))
    if not isinstance(P, GradedPartition):
        raise StructuralError("--partition must be a partition file")
    check = _strong_report(f, P, cfg)
    return {"passed": check["passed"], "result": check}


def _gs3_partition_json(an) -> Dict[str, Any]:
    out = {}
    for (u, v), P in an.partitions.items():
        names = [tag_name(t) if t[0] != "R" else f"R#{t[1]}" for t in P.tags]
        out[f"{u + 1},{v + 1}"] = {"tags": names, "labels": P.labels.tolist(),
                                   "masses": [_q(m) for m in P.masses]}
    return {"kind": "gs3-partition", "pairs": out}


def _load_gs3_labels(an, path: str) -> None:
    with open(path) as fh:
        data = json.load(fh)
    if data.get("kind") != "gs3-partition":
        raise StructuralError(f"{path}: expected a gs3-partition file")
    for (u, v), P in list(an.partitions.items()):
        key = f"{u + 1},{v + 1}"
        if key not in data["pairs"]:
            raise StructuralError(f"{path}: no labels for pair {key}")
        lab = np.asarray(data["pairs"][key]["labels"], dtype=np.int64)
        if lab.shape != P.labels.shape:
            raise StructuralError(f"{path}: labels for {key} have shape {lab.shape}")
        if ((lab < 0) != P.ledger).any():
            raise StructuralError(f"{path}: ledger pairs of {key} differ from the construction")
        an.partitions[(u, v)] = dataclasses.replace(P, labels=lab)


def cmd_gs3(cfg: ExperimentConfig) -> Dict[str, Any]:
    action = cfg.action
    if action not in ("analyze", "partition", "verify"):
        raise UsageError("gs3 needs one of analyze, partition, verify")
    inst = _read_ternary(_need(cfg, "input"))
    if inst.p != 3:
        raise StructuralError("the prefix-tree construction is for p = 3")
    an = analyze(inst, partitions=action != "analyze")
    ctx = an.ctx
    fams = {}
    ok = True
    for (u, v) in PAIRS:
        fam = an.families[(u, v)]
        chk = check_family_invariants(ctx, fam, an.candidates[(u, v)])
        ok &= chk.passed
        fams[f"{u + 1},{v + 1}"] = {
            "members": [{"rect": r.describe(), "measure": _q(r.measure(ctx))} for r in fam.members],
            "candidates": len(an.candidates[(u, v)]),
            "disjoint": chk.disjoint, "positive": chk.positive, "complete": chk.complete,
            "problems": chk.problems}
    two = verify_two_direction_claim(ctx)
    result: Dict[str, Any] = {
        "sizes": [len(p) for p in inst.parts],
        "families": fams,
        "ledger": {f"{u + 1},{v + 1}": {"rects": len(an.ledger.rects.get((u, v), [])),
                                        "measure": _q(an.ledger.measure(ctx, u, v))} for u, v in PAIRS},
        "two_direction_violations": [{"prefixes": [_seq(s) for s in t.sigmas], "condition": t.condition,
                                      "detail": t.detail} for t in two]}
    if action == "analyze":
        return {"passed": ok, "result": result}
    if action == "partition":
        result["census"] = {f"{u + 1},{v + 1}": P.census for (u, v), P in an.partitions.items()}
        result["fubini"] = {f"{u + 1},{v + 1}": P.fubini_count for (u, v), P in an.partitions.items()}
        if cfg.out:
            io.write(_gs3_partition_json(an), cfg.out)
        return {"passed": ok, "result": result}
    if cfg.partition:
        _load_gs3_labels(an, cfg.partition)
    rep = verify_triple_homogeneity(ctx, an.partitions, cfg.scope)
    labels = ctx.labels
    wit = lambda t: [_seq(labels[u][t[u]]) for u in range(3)]
    result["homogeneity"] = {
        "scope": rep.scope, "cells": len(rep.cells),
        "failures": [{"parts": list(c.parts), "measure": _q(c.measure),
                      "witness": [wit(t) for t in c.witness]} for c in rep.failures],
        "two_R_failures": [[wit(t) for t in w] for w in rep.two_R_failures],
        "R_disjoint_failures": [[wit(t) for t in w] for w in rep.R_disjoint_failures]}
    if cfg.table:
        _write_table(cfg.table, ("parts", "measure", "size", "kept", "side", "witness"),
                     [(",".join(map(str, c.parts)), _q(c.measure), c.size, c.kept,
                       "" if c.side is None else c.side,
                       "" if c.witness is None else ";".join(",".join(wit(t)) for t in c.witness))
                      for c in rep.cells])
    return {"passed": ok and rep.passed, "result": result}


def cmd_embed(cfg: ExperimentConfig) -> Dict[str, Any]:
    action = cfg.action
    H = _read_hypergraph(_need(cfg, "input"))
    lab = io._label_out
    if action == "monotone":
        res = check_monotone(H)
        witness = {"orders": [[lab(x) for x in o] for o in res.orders]} if res.monotone else \
            {"obstruction": {"part": res.obstruction[0] + 1,
                             "pair": [lab(res.obstruction[1]), lab(res.obstruction[2])]}}
        found = res.monotone
    elif action == "halfsimplex":
        res = check_halfsimplex_realizable(H) if cfg.cap is None else \
            check_halfsimplex_realizable(H, cfg.cap)
        found = res.realizable
        witness = {"values": [[_q(x) for x in part] for part in res.values],
                   "margin": _q(res.margin)} if found else {}
    elif action == "gs3":
        res = embed_into_gs3(H, cfg.n) if cfg.cap is None else embed_into_gs3(H, cfg.n, cfg.cap)
        found = res.found
        witness = {"maps": [{str(lab(x)): _seq(m[x]) for x in H.labels[u]}
                            for u, m in enumerate(res.maps)]} if found else {}
        witness["nodes"] = res.nodes
    else:
        raise UsageError("embed needs one of monotone, halfsimplex, gs3")
    if cfg.out:
        io.write({"kind": f"{action}-witness", "found": found, **witness}, cfg.out)
    return {"passed": found, "result": {"found": found, **witness}}


HANDLERS = {"generate": cmd_generate, "stability": cmd_stability, "partition": cmd_partition,
            "verify": cmd_verify, "gs3": cmd_gs3, "embed": cmd_embed}


def run(cfg: ExperimentConfig) -> int:
    start = time.perf_counter()
    body = HANDLERS[cfg.command](cfg)
    report = {"tool": "stabreg", "version": __version__, "config": cfg.echo(), "seed": cfg.seed,
              "passed": body["passed"], "result": body["result"],
              "wall_time": round(time.perf_counter() - start, 6)}
    text = json.dumps(report, indent=1, sort_keys=True) + "\n"
    if cfg.report:
        with open(cfg.report, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0 if body["passed"] else 1


# --- argument parsing -------------------------------------------------------------

def _common(p: argparse.ArgumentParser, *names: str) -> None:
    p.add_argument("--config", help="JSON file of config keys; flags given explicitly win")
    p.add_argument("--report", help="report path (default: stdout)")
    p.add_argument("--seed", type=int)
    p.add_argument("--jobs", type=int, help="parallelism degree (runs are deterministic)")
    opts = {
        "input": dict(), "partition": dict(), "out": dict(), "table": dict(),
        "epsilon": dict(), "delta": dict(), "budget": dict(help="const:c, recip:c or exp:c"),
        "cap": dict(type=int), "n": dict(type=int), "scope": dict(choices=("positive", "all")),
    }
    for name in names:
        p.add_argument(f"--{name}", **opts[name])


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="stabreg", description="stable regularity toolkit")
    ap.add_argument("--version", action="version", version=f"stabreg {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    g = sub.add_parser("generate", help="write a seeded instance file")
    _common(g, "out")
    g.add_argument("--kind", choices=GEN_KINDS)
    g.add_argument("--sizes", type=lambda s: [int(t) for t in s.split(",")], help="e.g. 6,6,6")
    g.add_argument("--omega", type=int)
    g.add_argument("--density")
    g.add_argument("--d", type=int)
    g.add_argument("--p", type=int)
    g.add_argument("--n", type=int)
    g.add_argument("--m", type=int)
    g.add_argument("--sample", action="store_const", const=True, help="gs: monotone sample")
    g.add_argument("--zero-fraction", dest="zero_fraction")

    s = sub.add_parser("stability", help="longest ladder of a binary function")
    _common(s, "input", "delta", "cap")
    s.add_argument("--mode", choices=("exact", "greedy"))
    s.add_argument("--iterations", type=int)

    pa = sub.add_parser("partition", help="build and verify a regular partition")
    _common(pa, "input", "out", "table", "epsilon", "budget")
    pa.add_argument("--strategy", choices=("profile", "energy"))

    v = sub.add_parser("verify", help="verify strong regularity of a partition")
    _common(v, "input", "partition", "table", "epsilon", "budget")

    gs = sub.add_parser("gs3", help="prefix-tree partition of a ternary instance")
    gsub = gs.add_subparsers(dest="action", required=True)
    for name in ("analyze", "partition", "verify"):
        q = gsub.add_parser(name)
        _common(q, "input", "out", "table", "partition", "scope")

    e = sub.add_parser("embed", help="monotonicity, half-simplex and GS_3 embeddings")
    esub = e.add_subparsers(dest="action", required=True)
    for name in ("monotone", "halfsimplex", "gs3"):
        q = esub.add_parser(name)
        _common(q, "input", "out", "cap", "n")
    return ap


def config_from_args(argv: Optional[Sequence[str]] = None) -> ExperimentConfig:
    ns = build_parser().parse_args(argv)
    data: Dict[str, Any] = {}
    path = ns.config
    if path:
        with open(path) as fh:
            data = json.load(fh)
        if not isinstance(data, dict):
            raise UsageError("config file must hold a JSON object")
    for key, value in vars(ns).items():
        if key != "config" and value is not None:
            data[key] = value
    return ExperimentConfig.from_dict(data)


def main(argv: Optional[Sequence[str]] = None) -> int:
    try:
        cfg = config_from_args(argv)
        return run(cfg)
    except SystemExit as exc:  # argparse usage errors
        return 2 if exc.code else 0
    except (ValueError, OSError, json.JSONDecodeError) as exc:
        sys.stderr.write(f"stabreg: error: {exc}\n")
        return 2


if __name__ == "__main__":
    sys.exit(main())
