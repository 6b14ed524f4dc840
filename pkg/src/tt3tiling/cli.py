"""Command-line entry point (``tt3tiling`` or ``python -m tt3tiling``).

Exit codes: 0 when the command succeeds and every verdict passes, 1 when a
verdict fails or the requested object could not be produced, 2 on usage
or input errors.
"""

from __future__ import annotations

import argparse
import json
import random
import sys
from pathlib import Path

from . import exact, extremal, generators, harness, nonextremal
from .graph import GraphError, OrientedGraph


class UsageError(Exception):
    pass


def _emit(args, payload: dict | str, human: str | None = None) -> None:
    if isinstance(payload, str):
        text = payload
    elif args.json or human is None:
        text = json.dumps(payload, indent=2, sort_keys=True)
    else:
        text = human
    if args.out:
        Path(args.out).write_text(text if text.endswith("\n") else text + "\n")
    else:
        print(text)


def _load(path: str) -> OrientedGraph:
    try:
        return OrientedGraph.read(path)
    except FileNotFoundError as exc:
        raise UsageError(f"no such file: {path}") from exc
    except GraphError as exc:
        raise UsageError(f"{path}: {exc}") from exc


def _budget(args) -> exact.SolveBudget:
    return exact.SolveBudget(node_limit=getattr(args, "node_limit", None), time_ms=args.budget_ms)


def cmd_gen(args) -> int:
    fam = args.family
    part = None
    if fam == "extremal":
        g, p = generators.extremal_graph(args.n)
        part = p.to_json()
    elif fam == "cyclic":
        g, p = generators.cyclic_blowup_parts(args.n)
        part = p.to_json()
    elif fam == "cfamily":
        g, spec = generators.c_family_graph(args.m, args.seed)
        part = spec.partition().to_json()
    elif fam == "transitive":
        g = generators.transitive_tournament(args.n)
    elif fam == "random":
        g = generators.random_oriented_graph(args.n, args.p, args.seed)
    else:
        d = args.d if args.d is not None else generators.semidegree_threshold(args.n)
        g = generators.random_with_min_semidegree(args.n, d, args.seed, drop=args.drop)
    if args.perturb:
        g = generators.perturb(g, args.perturb, args.seed)
    comment = f"family={fam} seed={args.seed}"
    meta = {"family": fam, "n": g.n, "seed": args.seed, "perturb": args.perturb, "partition": part,
            "min_semidegree": g.min_semidegree()}
    if args.out:
        Path(args.out).write_text(g.to_text(comment))
        Path(args.out + ".json").write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n")
    else:
        sys.stdout.write(g.to_text(comment))
    return 0


def cmd_solve(args) -> int:
    g = _load(args.graph)
    if args.mode == "perfect":
        out = exact.find_perfect_tiling(g, _budget(args), use_lp=not args.no_lp)
        payload = out.to_json()
        human = f"{out.status.value}: {len(out.tiling) if out.tiling else 0} tiles, {out.nodes} nodes"
        code = 0
    else:
        res = exact.max_tiling(g, _budget(args), use_lp=not args.no_lp)
        payload = res.to_json()
        human = f"{len(res.tiling)} tiles (optimal={res.optimal}), leftover {g.n - 3 * len(res.tiling)}"
        code = 0
    _emit(args, payload, human)
    return code


def cmd_near_tile(args) -> int:
    g = _load(args.graph)
    if args.pipeline:
        try:
            out = nonextremal.nonextremal_tile(g, args.seed, _budget(args), sigma=args.sigma)
        except exact.StageFailed as exc:
            _emit(args, exc.to_json(), f"stage {exc.stage} failed: {exc.diagnostic}")
            return 1
        _emit(args, out.to_json(), f"perfect tiling with {len(out.tiling)} tiles")
        return 0
    pc = nonextremal.lex_max_tiling(g, args.move_budget, args.seed)
    payload = {"cover": pc.to_json(), "bounds": nonextremal.cover_structure_bounds(g, pc)}
    _emit(args, payload, f"T={len(pc.T)} P={len(pc.P)} F={len(pc.F)} I={len(pc.I)} leftover={g.n - 3 * len(pc.T)}")
    return 0


def cmd_absorb(args) -> int:
    g = _load(args.graph)
    if args.triple:
        X = tuple(args.triple)
        found = nonextremal.find_absorbing_set(g, X, _budget(args), seed=args.seed)
        if found is None:
            _emit(args, {"status": "not_found", "X": list(X), "seed": args.seed}, "no absorbing set found")
            return 1
        _emit(args, {"status": "found", "seed": args.seed, **found.to_json()}, f"absorbing set {list(found.U)}")
        return 0
    try:
        ab = nonextremal.build_absorber(g, args.sigma, args.seed, args.reserve, args.test_triples)
    except nonextremal.CoverageFailed as exc:
        _emit(args, {"status": "coverage_failed", "triple": list(exc.triple), "count": exc.count,
                     "required": exc.required}, str(exc))
        return 1
    _emit(args, {"status": "ok", **ab.to_json()}, f"|U|={len(ab.U)} with {len(ab.sets)} absorbing sets")
    return 0


def cmd_link(args) -> int:
    g = _load(args.graph)
    rng = random.Random(args.seed)
    w = nonextremal.find_link(g, args.x, args.y, args.p, _budget(args), rng=rng)
    quad = nonextremal.link_quadrants(g, args.x, args.y).to_json() if args.x != args.y else None
    if w is None:
        _emit(args, {"status": "not_found", "quadrants": quad}, "not linked")
        return 1
    _emit(args, {"status": "found", "witness": w.to_json(), "quadrants": quad}, f"{w.p}-link {list(w.sequence)}")
    return 0


def cmd_extremal(args) -> int:
    g = _load(args.graph)
    try:
        out = extremal.extremal_tile(g, args.seed, _budget(args), args.preset)
    except exact.StageFailed as exc:
        _emit(args, exc.to_json(), f"stage {exc.stage} failed: {exc.diagnostic}")
        return 1
    _emit(args, out.to_json(), f"perfect tiling with {len(out.tiling)} tiles")
    return 0


def _report_out(args, rep: harness.Report) -> int:
    if args.csv:
        _emit(args, rep.to_csv())
    else:
        lines = [f"{rep.experiment}: {'PASS' if rep.passed else 'FAIL'}"]
        lines += [f"  {k}: {'pass' if v else 'FAIL'}" for k, v in sorted(rep.verdicts.items())]
        _emit(args, rep.to_dict(), "\n".join(lines))
    return 0 if rep.passed else 1


def cmd_verify(args) -> int:
    if args.which == "tt4":
        rep = harness.verify_prop_tt4()
    elif args.which == "cyctri":
        rep = harness.verify_prop_cyctri()
    else:
        if not args.graph:
            raise UsageError("verify deg needs --graph")
        rep = harness.verify_prop_deg(_load(args.graph), args.graph)
    return _report_out(args, rep)


def cmd_sweep(args) -> int:
    threads = args.threads or harness.default_threads()
    if args.which == "extremal-bound":
        ns = args.n_list or list(range(9, 91, 3))
        bad = [n for n in ns if n % 3 or n < 9]
        if bad:
            raise UsageError(f"n must be a multiple of 3 and at least 9: {bad}")
        rep = harness.sweep_extremal_bound(ns, args.node_limit, threads=threads)
    elif args.which == "absorption":
        seeds = [harness.derive_seed(args.seed, k) for k in range(args.samples)]
        n = args.n_list[0] if args.n_list else 120
        rep = harness.sweep_absorption(seeds, n, args.triples, threads=threads)
    elif args.which == "extremal-pipeline":
        ms = args.n_list or list(range(1, 9))
        rep = harness.sweep_extremal_pipeline(ms, [m for m in ms if m >= 4], seed=args.seed, threads=threads)
    else:
        ns = args.n_list or list(range(18, 46, 3))
        rep = harness.sweep_near_tiling(ns, args.samples, args.seed, args.node_limit, threads=threads)
    return _report_out(args, rep)


def cmd_probe(args) -> int:
    return _report_out(args, harness.small_exhaustive_probe(include_nine=not args.skip_nine))


def build_parser() -> argparse.ArgumentParser:
    def flags(suppress: bool) -> argparse.ArgumentParser:
        # the top-level parser owns the defaults; subcommands only record flags given after them
        d = (lambda v: argparse.SUPPRESS) if suppress else (lambda v: v)
        f = argparse.ArgumentParser(add_help=False)
        f.add_argument("--seed", type=int, default=d(0))
        f.add_argument("--budget-ms", type=int, default=d(None))
        f.add_argument("--threads", type=int, default=d(None), help="worker processes (default: $TT3_THREADS or 1)")
        f.add_argument("--json", action="store_true", default=d(False), help="print JSON instead of a summary")
        f.add_argument("--out", default=d(None), help="write output to this path")
        return f

    common = flags(True)
    p = argparse.ArgumentParser(prog="tt3tiling", description=__doc__.splitlines()[0], parents=[flags(False)])
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen", parents=[common], help="generate a graph")
    g.add_argument("family", choices=["extremal", "cyclic", "cfamily", "transitive", "random", "semideg"])
    g.add_argument("--n", type=int, default=18)
    g.add_argument("--m", type=int, default=1)
    g.add_argument("--p", type=float, default=0.5)
    g.add_argument("--d", type=int, default=None)
    g.add_argument("--drop", type=float, default=0.0)
    g.add_argument("--perturb", type=int, default=0)
    g.set_defaults(func=cmd_gen)

    s = sub.add_parser("solve", parents=[common], help="exact perfect or maximum tiling")
    s.add_argument("graph")
    s.add_argument("--mode", choices=["perfect", "max"], default="perfect")
    s.add_argument("--node-limit", type=int, default=None)
    s.add_argument("--no-lp", action="store_true", help="disable the LP root bound")
    s.set_defaults(func=cmd_solve)

    nt = sub.add_parser("near-tile", parents=[common], help="lexicographic near-tiling or full pipeline")
    nt.add_argument("graph")
    nt.add_argument("--move-budget", type=int, default=200_000)
    nt.add_argument("--pipeline", action="store_true", help="run absorber + near-tiling + absorption")
    nt.add_argument("--sigma", type=float, default=0.15)
    nt.set_defaults(func=cmd_near_tile)

    a = sub.add_parser("absorb", parents=[common], help="absorbing set for a triple, or a full absorber")
    a.add_argument("graph")
    a.add_argument("--triple", type=int, nargs=3, default=None)
    a.add_argument("--sigma", type=float, default=0.15)
    a.add_argument("--reserve", type=int, default=3)
    a.add_argument("--test-triples", type=int, default=100)
    a.set_defaults(func=cmd_absorb)

    lk = sub.add_parser("link", parents=[common], help="search a p-link between two vertices")
    lk.add_argument("graph")
    lk.add_argument("x", type=int)
    lk.add_argument("y", type=int)
    lk.add_argument("--p", type=int, choices=[1, 2], default=2)
    lk.set_defaults(func=cmd_link)

    e = sub.add_parser("extremal", parents=[common], help="extremal-case pipeline")
    e.add_argument("graph")
    e.add_argument("--preset", choices=["desk", "paper"], default="desk")
    e.set_defaults(func=cmd_extremal)

    v = sub.add_parser("verify", parents=[common], help="exhaustive proposition checks")
    v.add_argument("which", choices=["tt4", "deg", "cyctri"])
    v.add_argument("--graph", default=None)
    v.add_argument("--csv", action="store_true")
    v.set_defaults(func=cmd_verify)

    sw = sub.add_parser("sweep", parents=[common], help="threshold sweeps")
    sw.add_argument("which", choices=["extremal-bound", "near-tiling", "absorption", "extremal-pipeline"])
    sw.add_argument("--n-list", type=int, nargs="+", default=None,
                    help="vertex counts (m values for extremal-pipeline, one n for absorption)")
    sw.add_argument("--samples", type=int, default=50, help="instances (graphs for absorption)")
    sw.add_argument("--triples", type=int, default=100, help="random triples per graph for absorption")
    sw.add_argument("--node-limit", type=int, default=200_000)
    sw.add_argument("--csv", action="store_true")
    sw.set_defaults(func=cmd_sweep)

    pr = sub.add_parser("probe", parents=[common], help="exhaustive small-case probe")
    pr.add_argument("--skip-nine", action="store_true", help="skip the 9-vertex regular tournaments")
    pr.add_argument("--csv", action="store_true")
    pr.set_defaults(func=cmd_probe)
    return p


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code else 0
    try:
        return args.func(args)
    except (UsageError, generators.BadN, exact.InfeasibleBound, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except generators.Exhausted as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
