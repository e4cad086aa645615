"""Reference oracle, synthetic corpora with planted clones, scoring, calibration."""

from __future__ import annotations

import csv
import logging
import warnings
from collections.abc import Iterable, Sequence
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .curve import ParametricCurve, SearchConfig, apply_upper_bounds
from .engine import ClonePair, similarity
from .tokenizer import CodeBlock, TokenBag

__all__ = [
    "CalibrationError",
    "CorpusTooLarge",
    "DEFAULT_ST_GRID",
    "GenSpec",
    "GroundTruth",
    "LabeledPair",
    "NoFeasibleLTLT",
    "UnknownBlockId",
    "calibrate_curve",
    "generate_corpus",
    "oracle_detect",
    "read_ground_truth",
    "read_labeled_pairs",
    "score",
    "write_ground_truth",
    "write_labeled_pairs",
]

log = logging.getLogger(__name__)

# 80% down to 50% in steps of 1%
DEFAULT_ST_GRID: tuple[int, ...] = tuple(range(800, 499, -10))


class CorpusTooLarge(ValueError):
    pass


class UnknownBlockId(KeyError):
    pass


class CalibrationError(ValueError):
    pass


class NoFeasibleLTLT(UserWarning):
    """No length threshold reaches the target precision at this similarity."""

    def __init__(self, st: int):
        super().__init__(f"NoFeasibleLTLT({st})")
        self.st = st


# --------------------------------------------------------------------------
# oracle


def oracle_detect(
    blocks: Sequence[CodeBlock],
    config: SearchConfig,
    max_blocks: int | None = 2000,
    cache: dict[tuple[int, int], int] | None = None,
) -> set[ClonePair]:
    """Exhaustive pairwise check of every admitted block pair, no filtering.

    ``cache`` may be shared between calls on the same corpus to reuse pair
    similarities across configurations.
    """
    if max_blocks is not None and len(blocks) > max_blocks:
        raise CorpusTooLarge(f"{len(blocks)} blocks > {max_blocks}; pass max_blocks=None to override")
    admitted = [b for b in blocks if config.admits(b.size)]
    pairs = set()
    for i, a in enumerate(admitted):
        for b in admitted[i + 1 :]:
            key = (a.id, b.id) if a.id < b.id else (b.id, a.id)
            if cache is not None and key in cache:
                sim = cache[key]
            else:
                sim = similarity(a.bag, b.bag)
                if cache is not None:
                    cache[key] = sim
            if sim >= config.st:
                pairs.add(ClonePair(*key, sim, min(a.size, b.size), frozenset({0})))
    return pairs


# --------------------------------------------------------------------------
# synthetic corpora


@dataclass(frozen=True)
class GenSpec:
    """Parameters of a synthetic corpus.

    Each block is, with probability ``clone_fraction``, an edited copy of an
    earlier base block. An edit touches a fraction of the base's tokens drawn
    from ``mutation_range``; ``indel_share`` of the edits are deletions or
    insertions (half each), the rest replacements. Inserted and replacing
    tokens are fresh symbols that occur nowhere else.
    """

    seed: int
    n_blocks: int
    size_range: tuple[int, int] = (19, 500)
    vocab_size: int = 10000
    clone_fraction: float = 0.3
    mutation_range: tuple[float, float] = (0.05, 0.5)
    indel_share: float = 0.4

    def __post_init__(self):
        lo, hi = self.size_range
        if not 1 <= lo <= hi:
            raise ValueError(f"bad size_range {self.size_range}")
        mlo, mhi = self.mutation_range
        if not 0 <= mlo <= mhi <= 1:
            raise ValueError(f"bad mutation_range {self.mutation_range}")
        if not 0 <= self.clone_fraction <= 1:
            raise ValueError(f"clone_fraction must be in [0, 1], got {self.clone_fraction}")
        if not 0 <= self.indel_share <= 1:
            raise ValueError(f"indel_share must be in [0, 1], got {self.indel_share}")
        if self.n_blocks < 0 or self.vocab_size < 1:
            raise ValueError("n_blocks must be >= 0 and vocab_size >= 1")


@dataclass(frozen=True)
class GroundTruth:
    id_a: int
    id_b: int
    intended_similarity: int

    @property
    def key(self) -> tuple[int, int]:
        return self.id_a, self.id_b


def generate_corpus(spec: GenSpec) -> tuple[list[CodeBlock], set[GroundTruth]]:
    rng = np.random.default_rng(spec.seed)
    weights = 1.0 / np.arange(1, spec.vocab_size + 1)
    weights /= weights.sum()
    lo, hi = spec.size_range

    fresh = 0
    sequences: list[list[str]] = []
    bases: list[int] = []
    truth: set[GroundTruth] = set()
    for i in range(spec.n_blocks):
        if bases and rng.random() < spec.clone_fraction:
            src = bases[int(rng.integers(len(bases)))]
            seq, kept = _mutate(rng, sequences[src], spec, fresh)
            fresh += len(seq) - kept
            sim = 1000 * kept // max(len(seq), len(sequences[src]))
            truth.add(GroundTruth(src, i, sim))
        else:
            size = int(rng.integers(lo, hi + 1))
            seq = [f"t{r}" for r in rng.choice(spec.vocab_size, size=size, p=weights)]
            bases.append(i)
        sequences.append(seq)

    blocks = [
        CodeBlock(i, f"synthetic/block{i:05d}", 1, 1 + len(seq) // 8, TokenBag(seq))
        for i, seq in enumerate(sequences)
    ]
    return blocks, truth


def _mutate(rng: np.random.Generator, base: list[str], spec: GenSpec, fresh: int) -> tuple[list[str], int]:
    """Edited copy of ``base`` and the number of base tokens it keeps."""
    lo, hi = spec.size_range
    size = len(base)
    n_edits = int(round(rng.uniform(*spec.mutation_range) * size))
    kinds = rng.choice(3, size=n_edits, p=[1 - spec.indel_share, spec.indel_share / 2, spec.indel_share / 2])
    n_replace, n_delete, n_insert = (int((kinds == k).sum()) for k in range(3))
    # keep the copy inside the size range
    n_delete = min(n_delete, size - lo) if size >= lo else 0
    n_insert = min(n_insert, max(hi - (size - n_delete), 0))
    n_replace = min(n_replace, size - n_delete)

    order = rng.permutation(size)
    dropped = set(order[: n_delete].tolist())
    replaced = set(order[n_delete : n_delete + n_replace].tolist())
    out = []
    made = 0
    for pos, token in enumerate(base):
        if pos in dropped:
            continue
        if pos in replaced:
            out.append(f"m{fresh + made}")
            made += 1
        else:
            out.append(token)
    for _ in range(n_insert):
        out.insert(int(rng.integers(len(out) + 1)), f"m{fresh + made}")
        made += 1
    return out, size - n_delete - n_replace


# --------------------------------------------------------------------------
# scoring


def _covers(configs: Iterable[SearchConfig], size_a: int, size_b: int, sim: int) -> bool:
    return any(c.admits(size_a) and c.admits(size_b) and sim >= c.st for c in configs)


def score(
    report,
    ground_truth: Iterable[GroundTruth],
    blocks: Sequence[CodeBlock],
    region: Iterable[SearchConfig] | None = None,
) -> tuple[float, float]:
    """Recall and a lower bound on precision of ``report`` against injected clones.

    Recall only counts ground-truth pairs that fall inside ``region`` (by
    default the configurations the report ran with); pairs outside every
    configuration cannot be detected at all. Pass a common region to compare
    reports produced by different curves. Vacuous ratios are 1.0.
    """
    by_id = {b.id: b for b in blocks}
    configs = list(region) if region is not None else [inst.config for inst in report.per_instance]
    detected = {p.key for p in report.pairs}

    reachable = set()
    truth_keys = set()
    for gt in ground_truth:
        try:
            a, b = by_id[gt.id_a], by_id[gt.id_b]
        except KeyError as exc:
            raise UnknownBlockId(exc.args[0]) from None
        key = (min(a.id, b.id), max(a.id, b.id))
        truth_keys.add(key)
        if _covers(configs, a.size, b.size, similarity(a.bag, b.bag)):
            reachable.add(key)

    recall = len(reachable & detected) / len(reachable) if reachable else 1.0
    precision = len(detected & truth_keys) / len(detected) if detected else 1.0
    return recall, precision


# --------------------------------------------------------------------------
# calibration


@dataclass(frozen=True)
class LabeledPair:
    min_size: int
    similarity: int
    label: bool  # True for a real clone

    def __post_init__(self):
        if not 0 <= self.similarity <= 1000:
            raise ValueError(f"similarity out of range: {self.similarity}")
        if self.min_size < 1:
            raise ValueError(f"min_size must be >= 1, got {self.min_size}")


def _lowest_ltlt(step: list[LabeledPair], target: float, min_ltlt: int) -> int | None:
    """Smallest length threshold keeping precision >= target, or None.

    Candidate thresholds are the observed sizes, scanned from the largest down
    with running counts; if every size down to the smallest passes, the floor
    ``min_ltlt`` is returned.
    """
    by_size: dict[int, list[int]] = {}
    for p in step:
        tally = by_size.setdefault(p.min_size, [0, 0])
        tally[0] += p.label
        tally[1] += 1
    sizes = sorted(by_size, reverse=True)
    true = total = 0
    best = None
    for s in sizes:
        true += by_size[s][0]
        total += by_size[s][1]
        if true >= target * total:
            best = s
    if best is not None and best == sizes[-1]:
        return min_ltlt
    return best


def calibrate_curve(
    pairs: Sequence[LabeledPair],
    st_grid: Sequence[int] = DEFAULT_ST_GRID,
    target_precision: float = 0.9,
    min_ltlt: int = 19,
) -> ParametricCurve:
    """Derive a curve from labeled pairs by sweeping the similarity grid downwards.

    Each grid threshold only looks at the pairs the previous (higher) threshold
    did not already report, i.e. its band ``st <= similarity < previous st``,
    with pairs below ``min_ltlt`` ignored throughout. The length threshold is
    the smallest one whose precision over the band's pairs at or above it
    still reaches ``target_precision``. A threshold whose length bound is not
    larger than the last retained one supersedes it, since its region contains
    the earlier one. Bands without pairs are skipped; bands where no length
    bound is precise enough are skipped with a :class:`NoFeasibleLTLT`
    warning. Upper bounds are filled in on the result.
    """
    grid = list(st_grid)
    if any(b >= a for a, b in zip(grid, grid[1:])):
        raise CalibrationError("st_grid must be strictly descending")
    if not pairs:
        raise CalibrationError("no labeled pairs")
    if not 0 < target_precision <= 1:
        raise CalibrationError(f"target_precision must be in (0, 1], got {target_precision}")

    pool = [p for p in pairs if p.min_size >= min_ltlt]
    retained: list[tuple[int, int]] = []
    upper = None
    for st in grid:
        band = [p for p in pool if p.similarity >= st and (upper is None or p.similarity < upper)]
        upper = st
        if not band:
            log.debug("st=%d: no new pairs", st)
            continue
        ltlt = _lowest_ltlt(band, target_precision, min_ltlt)
        if ltlt is None:
            warnings.warn(NoFeasibleLTLT(st), stacklevel=2)
            continue
        while retained and retained[-1][1] >= ltlt:
            retained.pop()
        retained.append((st, ltlt))

    if not retained:
        raise CalibrationError("no similarity threshold reached the target precision")
    return apply_upper_bounds(ParametricCurve(retained))


# --------------------------------------------------------------------------
# CSV files


def read_labeled_pairs(path: str | Path) -> list[LabeledPair]:
    out = []
    with open(path, newline="", encoding="utf-8") as fh:
        for row in csv.reader(fh):
            if not row or row[0].startswith("#") or row[0] == "min_size":
                continue
            min_size, sim, label = (int(x) for x in row)
            if label not in (0, 1):
                raise ValueError(f"label must be 0 or 1, got {label}")
            out.append(LabeledPair(min_size, sim, bool(label)))
    return out


def write_labeled_pairs(pairs: Iterable[LabeledPair], path: str | Path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["min_size", "similarity_permille", "label"])
        for p in pairs:
            w.writerow([p.min_size, p.similarity, int(p.label)])


def read_ground_truth(path: str | Path) -> set[GroundTruth]:
    out = set()
    with open(path, newline="", encoding="utf-8") as fh:
        for row in csv.reader(fh):
            if not row or row[0] == "id_a":
                continue
            out.add(GroundTruth(*(int(x) for x in row)))
    return out


def write_ground_truth(truth: Iterable[GroundTruth], path: str | Path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["id_a", "id_b", "intended_similarity_permille"])
        for gt in sorted(truth, key=lambda g: g.key):
            w.writerow([gt.id_a, gt.id_b, gt.intended_similarity])
