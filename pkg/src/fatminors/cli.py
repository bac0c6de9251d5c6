"""Command line: decompose a graph, verify certificates, run the corpus.

Exit codes
  decompose: 0 decomposition, 10 witness, 20 budget exhausted, 2 bad input
  verify:    0 valid, 1 invalid, 2 unreadable or wrong kind
  corpus:    0 all rows verified, 1 some row unverified (or a budget error
             under --fail-on-budget), 2 bad arguments
"""
from __future__ import annotations

import argparse
import hashlib
import json
import logging
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path as FsPath

from .cactus import cactus_bounds, decompose_cactus
from .corpus import named_corpus
from .decomp import ContractViolation, DecompositionError, format_decomposition, parse_decomposition, validate
from .graph import INF, Graph, GraphError, format_edge_list, parse_edge_list
from .minors import BudgetExceeded, FormatError, closest_pair, fatness, format_model, is_minor_free, parse_model, validate_model
from .quasi import QIError, format_qi, from_decomposition, parse_qi, verify_qi
from .sp import constants, decompose_series_parallel

log = logging.getLogger("fatminors")

EXIT_DECOMPOSITION, EXIT_WITNESS, EXIT_BUDGET, EXIT_USAGE = 0, 10, 20, 2
EXIT_VALID, EXIT_INVALID = 0, 1


@dataclass
class RunReport:
    input_digest: str
    target: str
    K: int
    branch: str
    orw: int | None = None
    irs: int | None = None
    H_nodes: int | None = None
    fatness: int | None = None
    scaled_constants: int | None = None
    message: str | None = None
    wall_time: float = 0.0

    def to_dict(self):
        return asdict(self)


@dataclass
class Outcome:
    report: RunReport
    decomposition: object = None
    witness: object = None
    extras: dict = field(default_factory=dict)


def digest(G: Graph) -> str:
    return "sha256:" + hashlib.sha256(format_edge_list(G).encode()).hexdigest()


def bounds_for(target: str, K: int, scale=None) -> tuple[int, int]:
    """(outer width, spread) the decomposition branch must meet."""
    if target == "k4minus":
        b = cactus_bounds(K)
        return b.f0, b.f1p + 2 * b.f1pp
    cb = constants(K, scale)
    return cb.f0, cb.f1


def _num(x):
    return None if x is INF else x


def run(G: Graph, target: str, K: int, scale=None, budget=None) -> Outcome:
    """One pipeline run; budget exhaustion becomes the budget-error branch."""
    t = time.perf_counter()
    rep = RunReport(digest(G), target, K, "budget-error", scaled_constants=scale)
    out = Outcome(rep)
    try:
        if target == "k4minus":
            res = decompose_cactus(G, K)
        else:
            res = decompose_series_parallel(G, K, scale=scale, budget=budget)
    except BudgetExceeded as e:
        rep.message = str(e)
    else:
        rep.branch = res.branch
        if res.witness is not None:
            out.witness = res.witness
            rep.fatness = _num(fatness(G, res.witness))
        else:
            D = res.decomposition
            out.decomposition = D
            v = validate(G, D)
            rep.orw, rep.irs, rep.H_nodes = _num(v.orw), _num(v.irs), D.H.n
            out.extras["bag_radii"] = v.bag_radii
    rep.wall_time = round(time.perf_counter() - t, 4)
    return out


def check_outcome(G: Graph, out: Outcome, scale=None) -> tuple[bool, str]:
    """Independent re-verification of whatever a run emitted."""
    r = out.report
    if r.branch == "budget-error":
        return False, "budget exhausted"
    if r.branch == "witness":
        rep = validate_model(G, out.witness)
        if not rep:
            return False, rep.violation
        f = fatness(G, out.witness)
        return (f >= r.K, f"fatness {f}")
    D = out.decomposition
    v = validate(G, D)
    if not v.ok or not v.honest or D.support != G.vertex_set():
        return False, (v.violations or ["decomposition does not cover the graph"])[0]
    f0, f1 = bounds_for(r.target, r.K, scale)
    if v.orw > f0 or v.irs > f1:
        return False, f"metrics ({v.orw}, {v.irs}) exceed ({f0}, {f1})"
    if not is_minor_free(D.H, r.target):
        return False, f"decomposition graph has a {r.target} minor"
    if G.n:
        q = from_decomposition(G, D)
        qr = verify_qi(D.H, G, q)
        if not qr:
            return False, qr.failure
    return True, "ok"


# --- decompose -------------------------------------------------------------


def _read_graph(path) -> Graph:
    with open(path) as fh:
        return parse_edge_list(fh.read())


def _default_budget(arg):
    if arg is not None:
        return arg
    env = os.environ.get("FATMINORS_BUDGET")
    return int(env) if env else None


def cmd_decompose(args) -> int:
    try:
        G = _read_graph(args.graph)
        if args.scaled_constants is not None and args.target != "k4":
            raise GraphError("--scaled-constants only applies to --target k4")
        if args.scaled_constants is not None:
            constants(args.fat, args.scaled_constants)
    except (OSError, GraphError, ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE
    try:
        out = run(G, args.target, args.fat, args.scaled_constants, _default_budget(args.budget))
    except ContractViolation as e:
        print(f"internal contract violation: {e}", file=sys.stderr)
        return 3
    rep = out.report
    cert_name, cert_text = None, None
    if out.decomposition is not None:
        cert_name, cert_text = "decomposition.txt", format_decomposition(out.decomposition)
    elif out.witness is not None:
        cert_name, cert_text = "witness.txt", format_model(out.witness)
    if args.out:
        d = FsPath(args.out)
        d.mkdir(parents=True, exist_ok=True)
        if cert_name:
            (d / cert_name).write_text(cert_text)
        if out.decomposition is not None and G.n:
            (d / "qi.txt").write_text(format_qi(from_decomposition(G, out.decomposition)))
            from .figures import bag_radius_figure

            bag_radius_figure(out.extras["bag_radii"], bounds_for(args.target, args.fat, args.scaled_constants)[0],
                              d / "bag_radii.png", title=f"bag radii ({args.target}, K={args.fat})")
        (d / "report.json").write_text(json.dumps(rep.to_dict(), indent=2) + "\n")
    if args.json:
        env = {"report": rep.to_dict(), "certificate": None}
        if cert_name:
            env["certificate"] = {"kind": "decomposition" if out.decomposition is not None else "model", "text": cert_text}
        print(json.dumps(env))
    else:
        bits = [f"branch={rep.branch}"]
        if rep.branch == "decomposition":
            bits += [f"orw={rep.orw}", f"irs={rep.irs}", f"nodes={rep.H_nodes}"]
        elif rep.branch == "witness":
            bits.append(f"fatness={rep.fatness}")
        else:
            bits.append(rep.message or "")
        print(" ".join(bits))
    return {"decomposition": EXIT_DECOMPOSITION, "witness": EXIT_WITNESS}.get(rep.branch, EXIT_BUDGET)


# --- verify ----------------------------------------------------------------


def _verify(G: Graph, kind: str, text: str, fat: int, host_text: str | None) -> tuple[bool, str]:
    if kind == "decomposition":
        D = parse_decomposition(text, support=G.vertex_set())
        v = validate(G, D, metrics=False)
        if not v.ok or not v.honest:
            return False, v.violations[0]
        return True, f"valid decomposition with {D.H.n} nodes"
    if kind == "model":
        m = parse_model(text)
        try:
            rep = validate_model(G, m)
        except GraphError as e:
            return False, str(e)
        if not rep:
            return False, rep.violation
        f = fatness(G, m)
        if f < fat:
            pair = closest_pair(G, m)
            return False, f"fatness {f} below {fat}; closest pair {pair[0]}"
        return True, f"valid model of fatness {f}"
    q = parse_qi(text)
    if host_text is None:
        raise QIError("--host is required for kind qi")
    H = parse_decomposition(host_text).H
    r = verify_qi(H, G, q)
    if not r:
        return False, r.failure
    return True, f"valid ({q.M}, {q.A})-quasi-isometry"


def cmd_verify(args) -> int:
    try:
        G = _read_graph(args.graph)
        text = FsPath(args.certificate).read_text()
        host = FsPath(args.host).read_text() if args.host else None
        ok, msg = _verify(G, args.kind, text, args.fat, host)
    except (OSError, DecompositionError, FormatError, QIError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except GraphError as e:
        # readable but structurally wrong for the graph
        ok, msg = False, str(e)
    if args.json:
        print(json.dumps({"kind": args.kind, "valid": ok, "message": msg}))
    else:
        print(("valid: " if ok else "invalid: ") + msg)
    return EXIT_VALID if ok else EXIT_INVALID


# --- corpus ----------------------------------------------------------------


def corpus_graphs(spec: str, scale: str, targets) -> list:
    traps = ("k4minus", "k4") if "k4" in targets else ("k4minus",)
    items = named_corpus(scale, traps=traps)
    if spec.strip() == "all":
        return items
    prefixes = [p.strip() for p in spec.split(",") if p.strip()]
    return [(n, G) for n, G in items if any(n.startswith(p) for p in prefixes)]


def _corpus_row(job) -> dict:
    name, G, target, K, scale, budget = job
    out = run(G, target, K, scale if target == "k4" else None, budget)
    ok, msg = check_outcome(G, out, scale if target == "k4" else None)
    r = out.report
    f0, f1 = bounds_for(target, K, scale if target == "k4" else None)
    return {
        "name": name, "target": target, "K": K, "n": G.n, "branch": r.branch,
        "orw": r.orw, "irs": r.irs, "orw_bound": f0, "irs_bound": f1, "H_nodes": r.H_nodes,
        "fatness": r.fatness, "verified": ok, "note": "" if ok else msg, "seconds": r.wall_time,
    }


COLUMNS = ["name", "target", "K", "n", "branch", "orw", "irs", "orw_bound", "irs_bound", "H_nodes", "fatness",
           "verified", "note", "seconds"]


def run_corpus(spec="all", scale="full", Ks=(1,), targets=("k4minus",), scaled=None, budget=None, jobs=1) -> list[dict]:
    graphs = corpus_graphs(spec, scale, targets)
    work = [(n, G, t, K, scaled, budget) for t in targets for K in Ks for n, G in graphs]
    if jobs > 1 and len(work) > 1:
        with ProcessPoolExecutor(jobs) as ex:
            return list(ex.map(_corpus_row, work))
    return [_corpus_row(w) for w in work]


def write_tsv(rows, path) -> None:
    with open(path, "w") as fh:
        fh.write("\t".join(COLUMNS) + "\n")
        for r in rows:
            fh.write("\t".join("" if r[c] is None else str(r[c]).lower() if isinstance(r[c], bool) else str(r[c])
                               for c in COLUMNS) + "\n")


def cmd_corpus(args) -> int:
    try:
        if args.scaled_constants is not None:
            constants(min(args.fat), args.scaled_constants)
    except ValueError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE
    rows = run_corpus(args.spec, args.scale, tuple(args.fat), tuple(args.targets), args.scaled_constants,
                      _default_budget(args.budget), args.jobs)
    d = FsPath(args.out)
    d.mkdir(parents=True, exist_ok=True)
    write_tsv(rows, d / "summary.tsv")
    from .figures import corpus_figure

    corpus_figure(rows, d / "corpus.png")
    if args.json:
        print(json.dumps(rows))
    else:
        ver = sum(r["verified"] for r in rows)
        print(f"{len(rows)} runs, {ver} verified; summary in {d / 'summary.tsv'}")
        for r in rows:
            if not r["verified"]:
                print(f"  {r['name']} {r['target']} K={r['K']}: {r['branch']} {r['note']}")
    budget_rows = [r for r in rows if r["branch"] == "budget-error"]
    bad = [r for r in rows if not r["verified"] and r["branch"] != "budget-error"]
    if bad or (budget_rows and args.fail_on_budget):
        return 1
    return 0


# --- entry point -----------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="fatminors", description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    p.add_argument("-v", "--verbose", action="count", default=0)
    sub = p.add_subparsers(dest="cmd", required=True)

    d = sub.add_parser("decompose", help="decomposition or fat minor for an edge-list graph")
    d.add_argument("graph")
    d.add_argument("--target", choices=("k4", "k4minus"), default="k4minus")
    d.add_argument("--fat", type=int, default=1, metavar="K")
    d.add_argument("--scaled-constants", type=int, metavar="S")
    d.add_argument("--budget", type=int)
    d.add_argument("--json", action="store_true")
    d.add_argument("--out", metavar="DIR")
    d.set_defaults(func=cmd_decompose)

    v = sub.add_parser("verify", help="check a decomposition, minor model or quasi-isometry")
    v.add_argument("graph")
    v.add_argument("certificate")
    v.add_argument("--kind", choices=("decomposition", "model", "qi"), required=True)
    v.add_argument("--fat", type=int, default=1, metavar="K", help="fatness a model must reach")
    v.add_argument("--host", metavar="DECOMPOSITION", help="decomposition file supplying H for --kind qi")
    v.add_argument("--json", action="store_true")
    v.set_defaults(func=cmd_verify)

    c = sub.add_parser("corpus", help="run and verify the built-in corpus")
    c.add_argument("--spec", default="all", help="comma-separated name prefixes, or 'all'")
    c.add_argument("--scale", choices=("small", "full"), default="full")
    c.add_argument("--fat", type=int, nargs="+", default=[1], metavar="K")
    c.add_argument("--targets", nargs="+", choices=("k4", "k4minus"), default=["k4minus", "k4"])
    c.add_argument("--scaled-constants", type=int, metavar="S")
    c.add_argument("--budget", type=int)
    c.add_argument("--jobs", type=int, default=1)
    c.add_argument("--fail-on-budget", action="store_true")
    c.add_argument("--json", action="store_true")
    c.add_argument("--out", default="corpus_out", metavar="DIR")
    c.set_defaults(func=cmd_corpus)
    return p


def main(argv=None) -> int:
    p = build_parser()
    try:
        args = p.parse_args(argv)
    except SystemExit as e:
        return EXIT_USAGE if e.code else 0
    logging.basicConfig(level=logging.WARNING - 10 * min(args.verbose, 2), format="%(name)s: %(message)s")
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
