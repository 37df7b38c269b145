"""Campaign summaries: HV% and front-size statistics, EAF grids and their differences."""

from __future__ import annotations

import json
from itertools import combinations
from pathlib import Path

import numpy as np

from .metrics import eaf, eaf_difference, integrated_eaf_difference, union_bounds
from .problems import get_problem, true_front

BASELINE = "EHVI"


def _stats(values) -> dict:
    vals = [v for v in values if v is not None]
    if not vals:
        return {"values": list(values), "median": None, "mean": None}
    return {"values": list(values), "median": float(np.median(vals)), "mean": float(np.mean(vals))}


def comparison_pairs(methods) -> list[tuple[str, str]]:
    """Each method against EHVI when present, otherwise every pair."""
    methods = list(methods)
    if BASELINE in methods:
        return [(m, BASELINE) for m in methods if m != BASELINE]
    return list(combinations(methods, 2))


def summarise(results: dict, out_dir, resolution: int = 512, figures: bool = True, failures: dict | None = None) -> dict:
    """Write ``summary.json``, EAF CSVs and (optionally) PNG figures into ``out_dir``."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    results = {m: runs for m, runs in results.items() if runs}
    summary: dict = {"methods": {}, "eaf": {}, "failures": failures or {}}
    fronts = {m: [r.final_front() for r in runs] for m, runs in results.items()}
    for m, runs in results.items():
        summary["methods"][m] = {
            "seeds": [r.seed for r in runs],
            "hv_percent": _stats([r.metrics["hv_percent"] for r in runs]),
            "nds_size": _stats([r.metrics["nds_size"] for r in runs]),
        }

    grids = {}
    if fronts:
        ranges = union_bounds([f for fs in fronts.values() for f in fs])
        # a degenerate axis would give zero-area cells
        ranges = tuple((lo, hi if hi > lo else lo + 1.0) for lo, hi in ranges)
        summary["eaf"] = {"ranges": [list(r) for r in ranges], "resolution": resolution, "integrated_difference": {}}
        for m, fs in fronts.items():
            grids[m] = eaf(fs, ranges, resolution)
            grids[m].to_csv(out / f"eaf_{m.lower()}.csv", method=m)
        for a, b in comparison_pairs(grids):
            diff = eaf_difference(grids[a], grids[b])
            diff.to_csv(out / f"eaf_diff_{a.lower()}_{b.lower()}.csv", minuend=a, subtrahend=b)
            summary["eaf"]["integrated_difference"][f"{a}-{b}"] = integrated_eaf_difference(grids[a], grids[b])

    timing = {
        m: float(np.mean([t["seconds"] for r in runs for t in r.timing])) if any(r.timing for r in runs) else None
        for m, runs in results.items()
    }
    with open(out / "summary.json", "w") as fh:
        json.dump(summary, fh, indent=1, sort_keys=True)
        fh.write("\n")
    with open(out / "timing_summary.json", "w") as fh:
        json.dump({"mean_iteration_seconds": timing}, fh, indent=1, sort_keys=True)
        fh.write("\n")

    if figures and grids:
        _render(results, grids, out)
    summary["mean_iteration_seconds"] = timing
    return summary


def _render(results: dict, grids: dict, out: Path) -> None:
    from .plotting import plot_eaf, plot_eaf_difference, plot_hv_traces

    problem_name = next(iter(results.values()))[0].config["problem"]
    D = next(iter(results.values()))[0].config["D"]
    try:
        tf = true_front(get_problem(problem_name, D), 2000)
    except Exception:
        tf = None
    for m, grid in grids.items():
        plot_eaf(grid, out / f"eaf_{m.lower()}.png", title=f"{problem_name} {m}", true_front=tf)
    for a, b in comparison_pairs(grids):
        plot_eaf_difference(eaf_difference(grids[a], grids[b]), out / f"eaf_diff_{a.lower()}_{b.lower()}.png", f"{a} - {b}")
    traces = {m: [r.hv_trace() for r in runs] for m, runs in results.items()}
    if all(v is not None for runs in traces.values() for t in runs for v in t):
        plot_hv_traces(traces, out / "hv_trace.png")
