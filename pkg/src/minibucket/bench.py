"""Batch runs over instance sets: ratio statistics, CSV rows and histograms."""

from __future__ import annotations

import csv
import io
import json
import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, fields
from pathlib import Path
from typing import Mapping, Sequence

from .bnet import load_network
from .elimination import elim_bel, elim_map, elim_mpe
from .errors import ModelError, ResourceLimitError
from .minibucket import MiniBucketConfig, approx_bel, approx_map, approx_mpe, bound_ratios
from .network import BeliefNetwork, moral_graph
from .ordering import find_ordering, legal_ordering

CSV_HEADER = "instance,task,strategy,i,m,exact,upper,lower,ml,um,ul,tr,ta,te,mb,fi,fo,ordering"
TIMING_COLUMNS = ("tr", "ta", "te")
TIME_FLOOR = 1e-3  # seconds; shorter runs are reported as this long in TR
TASKS = ("mpe", "bel", "map")
HIST_BINS = ("1", "(1,2]", "(2,3]", "(3,4]", "(4,inf]")
RATIO_ONE_TOL = 1e-9


@dataclass
class StatRow:
    instance: str
    task: str
    strategy: str
    i: int | None
    m: int | None
    exact: float | None
    upper: float
    lower: float | None
    ml: float | None
    um: float | None
    ul: float | None
    tr: float | None
    ta: float
    te: float | None
    mb: int
    fi: int
    fo: int
    ordering: str

    def csv_fields(self) -> list[str]:
        return [_cell(getattr(self, f.name)) for f in fields(self)]


def _cell(x) -> str:
    if x is None:
        return ""
    if isinstance(x, float):
        return format(x, ".17g")
    return str(x)


def rows_to_csv(rows: Sequence[StatRow], header: bool = True) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    if header:
        writer.writerow(CSV_HEADER.split(","))
    for row in rows:
        writer.writerow(row.csv_fields())
    return buf.getvalue()


def time_ratio(te: float | None, ta: float) -> float | None:
    if te is None:
        return None
    return max(te, TIME_FLOOR) / max(ta, TIME_FLOOR)


def choose_ordering(
    bn: BeliefNetwork,
    evidence: Mapping[int, int],
    strategy: str = "min-fill",
    first: Sequence[int] = (),
    given: Sequence[int] | None = None,
):
    """Ordering for a run; ``legal`` asks for the poly-tree ordering."""
    if strategy == "legal":
        if first:
            raise ModelError("the poly-tree ordering cannot force variables first")
        return legal_ordering(bn, evidence)
    return find_ordering(moral_graph(bn), strategy, given=given, first=first, last=sorted(evidence))


def _exact(bn, evidence, d, task, query, hyp, cap):
    start = time.perf_counter()
    if task == "mpe":
        value = elim_mpe(bn, evidence, d, cap=cap).value
    elif task == "bel":
        value = elim_bel(bn, evidence, d, query, cap=cap).p_evidence
    else:
        value = elim_map(bn, evidence, d, hyp, cap=cap).value
    return value, time.perf_counter() - start


def _approx(bn, evidence, d, task, cfg, query, hyp, superbuckets, cap):
    """``(upper, lower, mb, fi, fo, seconds)`` for one configuration."""
    start = time.perf_counter()
    if task == "mpe":
        res = approx_mpe(bn, evidence, d, cfg, superbuckets=superbuckets, cap=cap)
        upper, lower, trace = res.upper, res.lower, res.trace
    elif task == "map":
        res = approx_map(bn, evidence, d, hyp, cfg, cap=cap)
        upper, lower, trace = res.upper, res.lower, res.trace
    else:
        hi = approx_bel(bn, evidence, d, query, cfg, "upper", cap=cap)
        lo = approx_bel(bn, evidence, d, query, cfg, "lower", cap=cap)
        upper, lower, trace = hi.p_evidence_bound, lo.p_evidence_bound, hi.trace
        trace.mb, trace.fo = max(hi.trace.mb, lo.trace.mb), max(hi.trace.fo, lo.trace.fo)
    if task != "bel" and lower is not None:
        # lower scores a real tuple, so it also bounds the optimum from below;
        # this only removes last-bit rounding gaps between the two computations
        upper = max(upper, lower)
    return upper, lower, trace.mb, trace.fi, trace.fo, time.perf_counter() - start


def run_instance(
    bn: BeliefNetwork,
    evidence: Mapping[int, int],
    instance: str,
    configs: Sequence[MiniBucketConfig],
    task: str = "mpe",
    ordering: str = "min-fill",
    given: Sequence[int] | None = None,
    query: int = 0,
    hyp: Sequence[int] = (),
    exact: bool = True,
    superbuckets: bool = False,
    cap: int | None = None,
) -> list[StatRow]:
    """One row per configuration, all sharing one ordering and one exact run.

    A resource error in the exact run leaves ``exact`` empty (U/L is still
    reported); one in an approximate run drops that row.
    """
    if task not in TASKS:
        raise ValueError(f"unknown task {task!r}")
    evidence = dict(evidence)
    hyp = sorted(set(hyp))
    first = hyp if task == "map" else ([query] if task == "bel" else [])
    d = choose_ordering(bn, evidence, ordering, first=first, given=given)
    exact_value = te = None
    if exact:
        try:
            exact_value, te = _exact(bn, evidence, d, task, query, hyp, cap)
        except ResourceLimitError:
            exact_value = te = None
    rows = []
    for cfg in configs:
        try:
            upper, lower, mb, fi, fo, ta = _approx(bn, evidence, d, task, cfg, query, hyp, superbuckets, cap)
        except ResourceLimitError:
            continue
        ml, um, ul = bound_ratios(exact_value, upper, lower)
        rows.append(
            StatRow(
                instance=instance,
                task=task,
                strategy=cfg.strategy,
                i=cfg.i,
                m=cfg.m,
                exact=exact_value,
                upper=upper,
                lower=lower,
                ml=ml,
                um=um,
                ul=ul,
                tr=time_ratio(te, ta),
                ta=ta,
                te=te,
                mb=mb,
                fi=fi,
                fo=fo,
                ordering=ordering,
            )
        )
    return rows


def config_grid(
    i_values: Sequence[int] = (), m_values: Sequence[int] = (), strict: bool = False
) -> list[MiniBucketConfig]:
    """``by_i`` configurations with unbounded m, then ``by_m`` ones with unbounded i."""
    grid = [MiniBucketConfig(i=i, strategy="by_i", strict=strict) for i in i_values]
    grid += [MiniBucketConfig(m=m, strategy="by_m") for m in m_values]
    return grid


# ---------------------------------------------------------------- manifests


def write_manifest(path, entries: Sequence[Mapping], extra: Mapping | None = None) -> None:
    doc = {"version": 1, **(extra or {}), "instances": list(entries)}
    Path(path).write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def read_manifest(path) -> list[tuple[str, Path]]:
    """``(instance id, file path)`` pairs; relative paths resolve against the manifest."""
    path = Path(path)
    doc = json.loads(path.read_text(encoding="utf-8"))
    out = []
    for entry in doc["instances"]:
        file = Path(entry["file"])
        if not file.is_absolute():
            file = path.parent / file
        if not file.exists():
            raise FileNotFoundError(f"instance {entry['id']}: {file} is missing")
        out.append((str(entry["id"]), file))
    return out


def _bench_one(job):
    instance, file, kwargs = job
    bn, evidence = load_network(file)
    return run_instance(bn, evidence, instance, **kwargs)


def run_bench(manifest, configs: Sequence[MiniBucketConfig], workers: int = 1, **kwargs) -> list[StatRow]:
    """Rows for every instance of a manifest, in manifest order."""
    jobs = [(inst, file, dict(kwargs, configs=list(configs))) for inst, file in read_manifest(manifest)]
    if workers <= 1:
        per_instance = [_bench_one(job) for job in jobs]
    else:
        with ProcessPoolExecutor(max_workers=min(workers, os.cpu_count() or 1)) as pool:
            per_instance = list(pool.map(_bench_one, jobs))
    return [row for rows in per_instance for row in rows]


# ---------------------------------------------------------------- summaries


def ratio_bin(r: float) -> str:
    if r <= 1.0 + RATIO_ONE_TOL:
        return "1"
    for hi in (2, 3, 4):
        if r <= hi:
            return f"({hi - 1},{hi}]"
    return "(4,inf]"


def histogram(rows: Sequence[StatRow], ratio: str) -> dict[str, dict[str, float | None]]:
    """Percent of rows and mean TR per bin of one ratio column."""
    counts = {b: 0 for b in HIST_BINS}
    trs: dict[str, list[float]] = {b: [] for b in HIST_BINS}
    total = 0
    for row in rows:
        r = getattr(row, ratio)
        if r is None:
            continue
        b = ratio_bin(r)
        counts[b] += 1
        total += 1
        if row.tr is not None:
            trs[b].append(row.tr)
    return {
        b: {
            "percent": 100.0 * counts[b] / total if total else 0.0,
            "mean_tr": sum(trs[b]) / len(trs[b]) if trs[b] else None,
        }
        for b in HIST_BINS
    }


def _mean(xs):
    xs = [x for x in xs if x is not None]
    if not xs:
        return None
    if any(math.isinf(x) for x in xs):
        return math.inf
    return sum(xs) / len(xs)


def summarize(rows: Sequence[StatRow]) -> list[dict]:
    """Per-configuration means, maxima and histograms, in first-seen order."""
    groups: dict[tuple, list[StatRow]] = {}
    for row in rows:
        groups.setdefault((row.task, row.strategy, row.i, row.m), []).append(row)
    out = []
    for (task, strategy, i, m), rs in groups.items():
        out.append(
            {
                "task": task,
                "strategy": strategy,
                "i": i,
                "m": m,
                "instances": len(rs),
                "mean_ml": _mean(r.ml for r in rs),
                "mean_um": _mean(r.um for r in rs),
                "mean_ul": _mean(r.ul for r in rs),
                "mean_tr": _mean(r.tr for r in rs),
                "mean_ta": _mean(r.ta for r in rs),
                "max_mb": max(r.mb for r in rs),
                "max_fi": max(r.fi for r in rs),
                "max_fo": max(r.fo for r in rs),
                "histograms": {k: histogram(rs, k) for k in ("ml", "um", "ul")},
            }
        )
    return out


def format_summary(summary: Sequence[Mapping]) -> str:
    lines = []
    for s in summary:
        lines.append(
            f"{s['task']} {s['strategy']} i={s['i']} m={s['m']} n={s['instances']} "
            f"M/L={_fmt(s['mean_ml'])} U/M={_fmt(s['mean_um'])} U/L={_fmt(s['mean_ul'])} "
            f"TR={_fmt(s['mean_tr'])} Ta={_fmt(s['mean_ta'])} mb={s['max_mb']} Fi={s['max_fi']} Fo={s['max_fo']}"
        )
        for ratio, hist in s["histograms"].items():
            cells = "  ".join(
                f"{b}:{h['percent']:.1f}%/{_fmt(h['mean_tr'])}" for b, h in hist.items()
            )
            lines.append(f"  {ratio}: {cells}")
    return "\n".join(lines) + ("\n" if lines else "")


def _fmt(x) -> str:
    return "-" if x is None else f"{x:.4g}"


def summary_json(summary) -> str:
    def clean(x):
        if isinstance(x, float) and math.isinf(x):
            return "inf"
        if isinstance(x, dict):
            return {k: clean(v) for k, v in x.items()}
        if isinstance(x, list):
            return [clean(v) for v in x]
        return x

    return json.dumps(clean(list(summary)), indent=2) + "\n"

