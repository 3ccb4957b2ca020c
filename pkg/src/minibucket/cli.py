"""Command-line front end: ``gen``, ``solve``, ``bench`` and ``width``."""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import bench
from .bnet import load_network, save_network
from .errors import (
    BudgetExceededError,
    InfeasibleConfigError,
    ModelError,
    ParseError,
    ResourceLimitError,
)
from .generators import GenSpec, gen_evidence, generate
from .minibucket import MiniBucketConfig
from .network import moral_graph
from .ordering import induced_width

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_PARSE = 3
EXIT_RESOURCE = 4
EXIT_INFEASIBLE = 5
EXIT_MODEL = 6


class UsageError(Exception):
    """Flag combination that argparse alone cannot reject."""


def _int_list(text: str) -> list[int]:
    text = text.strip()
    return [int(t) for t in text.split(",")] if text else []


def _kind(text: str) -> str:
    kind = text.replace("-", "_")
    if kind not in ("uniform", "noisy_or"):
        raise argparse.ArgumentTypeError(f"unknown kind {text!r}")
    return kind


def cmd_gen(args) -> int:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    entries = []
    for k in range(args.count):
        seed = args.seed + k
        spec = GenSpec(args.nodes, args.edges, args.cardinality, args.kind, seed)
        bn = generate(spec)
        evidence = gen_evidence(bn, args.evidence, args.evidence_policy, seed)
        name = f"inst_{seed}.bnet"
        save_network(out / name, bn, evidence)
        entries.append({"id": f"inst_{seed}", "file": name, "seed": seed})
    extra = {
        "kind": args.kind,
        "nodes": args.nodes,
        "edges": args.edges,
        "cardinality": args.cardinality,
        "evidence": args.evidence,
        "evidence_policy": args.evidence_policy,
        "rng": "pcg64",
    }
    bench.write_manifest(out / "manifest.json", entries, extra)
    print(f"wrote {len(entries)} instance(s) to {out}")
    return EXIT_OK


def _solve_configs(args) -> list[MiniBucketConfig]:
    if not args.approx:
        return []
    if args.i is None and args.m is None:
        raise UsageError("solve --approx needs --i and/or --m")
    return [MiniBucketConfig(i=args.i, m=args.m, strategy=args.strategy, strict=not args.relaxed)]


def cmd_solve(args) -> int:
    bn, evidence = load_network(args.file)
    if not args.exact and not args.approx:
        args.exact = True
    ordering = args.ordering
    if ordering == "auto":
        ordering = "legal" if args.superbuckets and args.task == "mpe" else "min-fill"
    configs = _solve_configs(args)
    rows = bench.run_instance(
        bn,
        evidence,
        Path(args.file).stem,
        configs,
        task=args.task,
        ordering=ordering,
        given=args.order,
        query=args.query,
        hyp=args.hyp,
        exact=args.exact,
        superbuckets=args.superbuckets,
    )
    if args.approx and not rows:
        raise ResourceLimitError("approximation exceeded the table size cap")
    if not rows:
        # exact-only run: report the value in both bound columns
        rows = [_exact_row(bn, evidence, args, ordering)]
    sys.stdout.write(bench.rows_to_csv(rows))
    return EXIT_OK


def _exact_row(bn, evidence, args, ordering) -> bench.StatRow:
    first = sorted(set(args.hyp)) if args.task == "map" else ([args.query] if args.task == "bel" else [])
    d = bench.choose_ordering(bn, evidence, ordering, first=first, given=args.order)
    value, te = bench._exact(bn, evidence, d, args.task, args.query, sorted(set(args.hyp)), None)
    return bench.StatRow(
        instance=Path(args.file).stem,
        task=args.task,
        strategy="exact",
        i=None,
        m=None,
        exact=value,
        upper=value,
        lower=value,
        ml=1.0 if value > 0 else None,
        um=1.0 if value > 0 else None,
        ul=1.0 if value > 0 else None,
        tr=None,
        ta=te,
        te=te,
        mb=1,
        fi=bn.max_family_size(),
        fo=0,
        ordering=ordering,
    )


def cmd_bench(args) -> int:
    configs = bench.config_grid(args.i or (), args.m or (), strict=False)
    if not configs:
        raise UsageError("bench needs --i and/or --m values")
    rows = bench.run_bench(
        args.manifest,
        configs,
        workers=args.workers,
        task=args.task,
        ordering=args.ordering,
        query=args.query,
        hyp=args.hyp,
        exact=not args.no_exact,
    )
    text = bench.rows_to_csv(rows)
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    summary = bench.summarize(rows)
    if args.summary:
        Path(args.summary).write_text(bench.summary_json(summary), encoding="utf-8")
    sys.stderr.write(bench.format_summary(summary))
    return EXIT_OK


def cmd_width(args) -> int:
    bn, evidence = load_network(args.file)
    d = bench.choose_ordering(bn, evidence if args.with_evidence else {}, args.ordering, given=args.order)
    w, w_star = induced_width(moral_graph(bn), d)
    print(f"w={w} w*={w_star} d={','.join(map(str, d))}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="bnet", description="Mini-bucket bounds for belief networks.")
    sub = parser.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen", help="generate random instances")
    g.add_argument("--kind", type=_kind, default="uniform", help="uniform or noisy-or")
    g.add_argument("--nodes", type=int, required=True)
    g.add_argument("--edges", type=int, required=True)
    g.add_argument("--count", type=int, default=1)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--cardinality", type=int, default=2)
    g.add_argument("--evidence", type=int, default=0, help="number of observed variables")
    g.add_argument("--evidence-policy", choices=("positive_ones", "sampled"), default="positive_ones")
    g.add_argument("--out", default=".")
    g.set_defaults(func=cmd_gen)

    orderings = ("auto", "min-fill", "min-degree", "given", "legal")

    s = sub.add_parser("solve", help="solve one instance and print a CSV row")
    s.add_argument("file")
    s.add_argument("--task", choices=bench.TASKS, default="mpe")
    s.add_argument("--exact", action="store_true")
    s.add_argument("--approx", action="store_true")
    s.add_argument("--i", type=int)
    s.add_argument("--m", type=int)
    s.add_argument("--strategy", choices=("by_i", "by_m"))
    s.add_argument("--relaxed", action="store_true", help="keep functions wider than i whole instead of failing")
    s.add_argument("--superbuckets", action="store_true")
    s.add_argument("--ordering", choices=orderings, default="auto")
    s.add_argument("--order", type=_int_list, help="comma-separated ordering for --ordering given")
    s.add_argument("--query", type=int, default=0)
    s.add_argument("--hyp", type=_int_list, default=[])
    s.set_defaults(func=cmd_solve)

    b = sub.add_parser("bench", help="run the approximation grid over a manifest")
    b.add_argument("manifest")
    b.add_argument("--task", choices=bench.TASKS, default="mpe")
    b.add_argument("--i", type=_int_list, help="comma-separated i values")
    b.add_argument("--m", type=_int_list, help="comma-separated m values")
    b.add_argument("--ordering", choices=orderings[1:], default="min-fill")
    b.add_argument("--query", type=int, default=0)
    b.add_argument("--hyp", type=_int_list, default=[])
    b.add_argument("--no-exact", action="store_true", help="skip exact runs and report U/L only")
    b.add_argument("--workers", type=int, default=1)
    b.add_argument("--out", help="CSV path (default: standard output)")
    b.add_argument("--summary", help="write per-configuration summary JSON here")
    b.set_defaults(func=cmd_bench)

    w = sub.add_parser("width", help="print w(d) and w*(d) of an ordering")
    w.add_argument("file")
    w.add_argument("--ordering", choices=orderings[1:], default="min-fill")
    w.add_argument("--order", type=_int_list)
    w.add_argument("--with-evidence", action="store_true", help="place observed variables last")
    w.set_defaults(func=cmd_width)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ParseError as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except (ResourceLimitError, BudgetExceededError) as exc:
        print(f"resource limit: {exc}", file=sys.stderr)
        return EXIT_RESOURCE
    except InfeasibleConfigError as exc:
        print(f"infeasible configuration: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except (ModelError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_MODEL


if __name__ == "__main__":
    sys.exit(main())
