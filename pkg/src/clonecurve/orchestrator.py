"""Run every instance of a curve, merge their pairs and report per-instance work."""

from __future__ import annotations

import csv
import json
import time
from collections.abc import Iterable, Sequence
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Literal

from .curve import ParametricCurve, SearchConfig, apply_upper_bounds
from .engine import BlockSet, ClonePair, run_instance
from .tokenizer import CodeBlock

__all__ = [
    "CloneReport",
    "ConflictingSimilarity",
    "InstanceStats",
    "MODES",
    "instances_for",
    "merge",
    "overlap_stats",
    "run_curve",
    "write_json_report",
    "write_pairs_csv",
    "write_scatter",
]

Mode = Literal["single", "curve-raw", "curve-optimized"]
MODES: tuple[str, ...] = ("single", "curve-raw", "curve-optimized")


class ConflictingSimilarity(RuntimeError):
    def __init__(self, key: tuple[int, int], sims: tuple[int, int]):
        super().__init__(f"pair {key} reported with similarities {sims[0]} and {sims[1]}")
        self.key = key


@dataclass
class InstanceStats:
    index: int
    config: SearchConfig
    pairs_found: int
    new_pairs: int
    wall_time: float


@dataclass
class CloneReport:
    pairs: list[ClonePair]
    per_instance: list[InstanceStats]
    total_blocks: int
    mode: str
    wall_time: float = 0.0
    prepare_time: float = 0.0
    detect_time: float = field(default=0.0)

    @property
    def keys(self) -> set[tuple[int, int]]:
        return {p.key for p in self.pairs}


def instances_for(curve: ParametricCurve, mode: Mode) -> list[SearchConfig]:
    """Configurations actually run for ``curve`` in ``mode``.

    ``single`` runs the first point without an upper bound, ``curve-raw``
    drops all upper bounds, ``curve-optimized`` computes them when absent.
    """
    if mode == "single":
        return [curve[0].unbounded()]
    if mode == "curve-raw":
        return [c.unbounded() for c in curve]
    if mode == "curve-optimized":
        if not curve.is_bounded:
            curve = apply_upper_bounds(curve)
        return list(curve)
    raise ValueError(f"unknown mode {mode!r}; expected one of {MODES}")


def merge(results: Iterable[tuple[int, Iterable[ClonePair]]]) -> list[ClonePair]:
    """Union of instance results keyed by block pair, sorted by (block_a, block_b)."""
    merged: dict[tuple[int, int], ClonePair] = {}
    seen_instances: set[int] = set()
    for index, pairs in results:
        if index in seen_instances:
            raise ValueError(f"duplicate instance index {index}")
        seen_instances.add(index)
        for p in pairs:
            prev = merged.get(p.key)
            if prev is None:
                merged[p.key] = ClonePair(p.block_a, p.block_b, p.similarity, p.min_size, frozenset({index}))
                continue
            if prev.similarity != p.similarity:
                raise ConflictingSimilarity(p.key, (prev.similarity, p.similarity))
            merged[p.key] = ClonePair(
                p.block_a, p.block_b, p.similarity, p.min_size, prev.found_by | {index}
            )
    return [merged[k] for k in sorted(merged)]


def run_curve(
    blocks: BlockSet | Sequence[CodeBlock],
    curve: ParametricCurve,
    mode: Mode = "curve-optimized",
    parallelism: int = 1,
) -> CloneReport:
    start = time.perf_counter()
    configs = instances_for(curve, mode)
    bs = blocks if isinstance(blocks, BlockSet) else BlockSet(blocks)
    prepared = time.perf_counter()

    def one(item: tuple[int, SearchConfig]) -> tuple[int, set[ClonePair], float]:
        i, config = item
        t0 = time.perf_counter()
        found = run_instance(bs, config, i)
        return i, found, time.perf_counter() - t0

    work = list(enumerate(configs))
    if parallelism > 1 and len(work) > 1:
        with ThreadPoolExecutor(max_workers=parallelism) as pool:
            done = list(pool.map(one, work))
    else:
        done = [one(item) for item in work]
    done.sort(key=lambda r: r[0])
    pairs = merge((i, found) for i, found, _ in done)

    new = [0] * len(configs)
    for p in pairs:
        new[min(p.found_by)] += 1
    stats = [
        InstanceStats(i, configs[i], len(found), new[i], elapsed) for i, found, elapsed in done
    ]
    end = time.perf_counter()
    return CloneReport(
        pairs=pairs,
        per_instance=stats,
        total_blocks=len(bs),
        mode=mode,
        wall_time=end - start,
        prepare_time=prepared - start,
        detect_time=end - prepared,
    )


def overlap_stats(report: CloneReport) -> tuple[int, Fraction]:
    """Detections beyond the first per pair, and their share of all detections."""
    redundant = sum(len(p.found_by) - 1 for p in report.pairs)
    found = sum(s.pairs_found for s in report.per_instance)
    return redundant, Fraction(redundant, found) if found else Fraction(0)


# --------------------------------------------------------------------------
# report files


def write_pairs_csv(report: CloneReport, blocks: Iterable[CodeBlock], path: str | Path) -> None:
    by_id = {b.id: b for b in blocks}
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["file_a", "start_a", "end_a", "file_b", "start_b", "end_b", "similarity_permille", "min_size", "found_by"])
        for p in report.pairs:
            a, b = by_id[p.block_a], by_id[p.block_b]
            w.writerow(
                [
                    a.file_path, a.start_line, a.end_line,
                    b.file_path, b.start_line, b.end_line,
                    p.similarity, p.min_size, "|".join(str(i) for i in sorted(p.found_by)),
                ]
            )


def write_scatter(report: CloneReport, path: str | Path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["min_size", "similarity_permille"])
        for p in report.pairs:
            w.writerow([p.min_size, p.similarity])


def report_dict(report: CloneReport) -> dict:
    redundant, ratio = overlap_stats(report)
    return {
        "mode": report.mode,
        "total_blocks": report.total_blocks,
        "pair_count": len(report.pairs),
        "redundant_detections": redundant,
        "redundancy_ratio": float(ratio),
        "wall_time": report.wall_time,
        "prepare_time": report.prepare_time,
        "detect_time": report.detect_time,
        "per_instance": [
            {
                "index": s.index,
                "st": s.config.st,
                "ltlt": s.config.ltlt,
                "utlt": s.config.utlt,
                "pairs_found": s.pairs_found,
                "new_pairs": s.new_pairs,
                "wall_time": s.wall_time,
            }
            for s in report.per_instance
        ],
        "pairs": [
            {
                "block_a": p.block_a,
                "block_b": p.block_b,
                "similarity": p.similarity,
                "min_size": p.min_size,
                "found_by": sorted(p.found_by),
            }
            for p in report.pairs
        ],
    }


def write_json_report(report: CloneReport, path: str | Path, **extra) -> None:
    data = report_dict(report)
    data.update(extra)
    Path(path).write_text(json.dumps(data, indent=2) + "\n", encoding="utf-8")
