"""Single search instance: length selection, prefix-filtered index, verification.

A block is viewed as the sorted sequence of its token occurrences, ordered by
ascending corpus frequency (rarest first). Two blocks whose overlap reaches
``o`` must share a token among their first ``size - o + 1`` occurrences, so
posting only that prefix loses no qualifying pair. Candidates are then cut by
the length filter and verified with an exact multiset overlap.

Token occurrences are encoded as "elements" ``(token, k)`` meaning the k-th
copy of a token; the multiset overlap of two bags is then the size of the
intersection of their element sets, i.e. a sparse dot product.
"""

from __future__ import annotations

from collections import Counter
from collections.abc import Iterable, Mapping, Sequence
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
from numba import njit

from .curve import SearchConfig
from .tokenizer import CodeBlock, TokenBag

__all__ = [
    "BlockSet",
    "ClonePair",
    "EmptyBag",
    "TokenIndex",
    "build_index",
    "overlap",
    "prefix_length",
    "run_instance",
    "similarity",
]


class EmptyBag(ValueError):
    pass


@dataclass(frozen=True, order=True)
class ClonePair:
    """Unordered block pair; identity ignores which instances found it."""

    block_a: int
    block_b: int
    similarity: int
    min_size: int
    found_by: frozenset[int] = field(default=frozenset(), compare=False)

    def __post_init__(self):
        if self.block_a >= self.block_b:
            raise ValueError(f"expected block_a < block_b, got ({self.block_a}, {self.block_b})")

    @property
    def key(self) -> tuple[int, int]:
        return self.block_a, self.block_b


def overlap(a: Mapping[str, int], b: Mapping[str, int]) -> int:
    if len(a) > len(b):
        a, b = b, a
    return sum(min(n, b[t]) for t, n in a.items() if t in b)


def similarity(a: TokenBag, b: TokenBag) -> int:
    """Shared tokens over the larger bag's size, in permille, rounded down."""
    size_a, size_b = sum(a.values()), sum(b.values())
    if not size_a or not size_b:
        raise EmptyBag("similarity is undefined for an empty bag")
    return 1000 * overlap(a, b) // max(size_a, size_b)


def prefix_length(size, st):
    """Number of leading token occurrences to index for threshold ``st``.

    Works elementwise on numpy arrays.
    """
    return size + (-(st * size) // 1000) + 1  # size - ceil(st * size / 1000) + 1


class BlockSet:
    """Blocks prepared once for any number of search instances.

    Each block becomes a run of ``(token rank, count)`` entries in ascending
    rank order (rarest token first), stored back to back in flat arrays. The
    global token order and the posting order are computed here so a curve
    pays for them once per corpus.
    """

    def __init__(self, blocks: Iterable[CodeBlock]):
        self.blocks: list[CodeBlock] = list(blocks)
        n = len(self.blocks)
        ids = [b.id for b in self.blocks]
        if len(set(ids)) != n:
            raise ValueError("block ids must be unique")
        self.ids = np.asarray(ids, dtype=np.int64)
        self.sizes = np.asarray([b.size for b in self.blocks], dtype=np.int64)

        freq: Counter[str] = Counter()
        for b in self.blocks:
            freq.update(b.bag)
        # rarest first, ties by token string
        self.tokens: list[str] = sorted(freq, key=lambda t: (freq[t], t))
        rank = {t: r for r, t in enumerate(self.tokens)}

        runs = [sorted((rank[t], c) for t, c in b.bag.items()) for b in self.blocks]
        lengths = np.asarray([len(r) for r in runs], dtype=np.int64)
        self.offsets = np.zeros(n + 1, dtype=np.int64)
        np.cumsum(lengths, out=self.offsets[1:])
        flat = np.asarray([e for r in runs for e in r], dtype=np.int64).reshape(-1, 2)
        self.entry_token = flat[:, 0].copy()
        self.entry_count = flat[:, 1].copy()
        self.entry_row = np.repeat(np.arange(n), lengths)
        # occurrences from this entry to the end of its block
        cum = np.cumsum(self.entry_count)
        block_end = np.zeros(n + 1, dtype=np.int64)
        block_end[1:] = np.cumsum(self.sizes)
        self.entry_rest = block_end[self.entry_row + 1] - (cum - self.entry_count)
        self.entry_start = self.sizes[self.entry_row] - self.entry_rest

        # position of each block in (size, row) order; the join probes smaller blocks only
        self.size_rank = np.empty(n, dtype=np.int64)
        self.size_rank[np.lexsort((np.arange(n), self.sizes))] = np.arange(n)
        # entries sorted by (token, size rank): posting lists are filtered views of this
        self.posting_order = np.lexsort((self.size_rank[self.entry_row], self.entry_token))

    def __len__(self) -> int:
        return len(self.blocks)


def _as_blockset(blocks: BlockSet | Sequence[CodeBlock]) -> BlockSet:
    return blocks if isinstance(blocks, BlockSet) else BlockSet(blocks)


@dataclass
class TokenIndex:
    """Prefix postings, by token rank, for the blocks one configuration admits.

    Postings of token rank ``r`` occupy ``indptr[r]:indptr[r + 1]`` of the
    ``post_*`` arrays, in ascending block size: the block row, the number of
    copies of the token inside that block's indexed prefix, and the entry
    index of the token within the block.
    """

    config: SearchConfig
    rows: np.ndarray
    block_ids: np.ndarray
    prefix_lengths: np.ndarray
    indptr: np.ndarray
    post_rows: np.ndarray
    post_counts: np.ndarray
    post_entries: np.ndarray
    tokens: list[str]
    ids: np.ndarray = field(repr=False)

    @cached_property
    def postings(self) -> dict[str, list[tuple[int, int]]]:
        out = {}
        for r in np.flatnonzero(np.diff(self.indptr)):
            lo, hi = self.indptr[r], self.indptr[r + 1]
            out[self.tokens[r]] = [
                (int(self.ids[row]), int(n)) for row, n in zip(self.post_rows[lo:hi], self.post_counts[lo:hi])
            ]
        return out

    @cached_property
    def token_rank(self) -> dict[str, int]:
        return {t: r for r, t in enumerate(self.tokens)}


def build_index(blocks: BlockSet | Sequence[CodeBlock], config: SearchConfig) -> TokenIndex:
    """Post the prefix of every block whose size lies in ``ltlt..utlt``."""
    bs = _as_blockset(blocks)
    in_range = bs.sizes >= config.ltlt
    if config.utlt is not None:
        in_range &= bs.sizes <= config.utlt
    rows = np.flatnonzero(in_range)
    k = prefix_length(bs.sizes[rows], config.st)

    prefix_k = np.zeros(len(bs), dtype=np.int64)
    prefix_k[rows] = k
    order = bs.posting_order
    entries = order[bs.entry_start[order] < prefix_k[bs.entry_row[order]]]
    post_rows = bs.entry_row[entries]
    post_counts = np.minimum(bs.entry_count[entries], prefix_k[post_rows] - bs.entry_start[entries])
    indptr = np.zeros(len(bs.tokens) + 1, dtype=np.int64)
    np.cumsum(np.bincount(bs.entry_token[entries], minlength=len(bs.tokens)), out=indptr[1:])
    return TokenIndex(config, rows, bs.ids[rows], k, indptr, post_rows, post_counts, entries, bs.tokens, bs.ids)


@njit(cache=True, nogil=True)
def _overlap_at_least(tok, cnt, rest, i, a_hi, j, b_hi, need):
    """Multiset overlap of two entry runs, or -1 once ``need`` is out of reach."""
    n = 0
    while i < a_hi and j < b_hi:
        if n + min(rest[i], rest[j]) < need:
            return -1
        if tok[i] == tok[j]:
            n += min(cnt[i], cnt[j])
            i += 1
            j += 1
        elif tok[i] < tok[j]:
            i += 1
        else:
            j += 1
    return n if n >= need else -1


@njit(cache=True, nogil=True)
def _self_join(tok, cnt, rest, start, offsets, sizes, size_rank, rows, prefix_lengths, indptr, post_rows, post_entries, st):
    """Probe each admitted block's prefix against the admitted blocks before it in (size, row) order.

    The first prefix token a pair shares is the rarest token they share at
    all, so the overlap is bounded by what remains of both blocks from there
    and verification can start at that token.
    """
    stamp = np.full(len(sizes), -1, dtype=np.int64)
    out_small, out_big, out_sim = [], [], []
    for i in range(len(rows)):
        x = rows[i]
        sx = sizes[x]
        rx = size_rank[x]
        need = -((-st * sx) // 1000)
        x_end = offsets[x + 1]
        for ix in range(offsets[x], x_end):
            if start[ix] >= prefix_lengths[i]:
                break
            t = tok[ix]
            for q in range(indptr[t], indptr[t + 1]):
                y = post_rows[q]
                if size_rank[y] >= rx:
                    break
                if stamp[y] == x:
                    continue
                stamp[y] = x
                # length filter; sizes[y] <= sx
                if sizes[y] < need:
                    continue
                jy = post_entries[q]
                ov = _overlap_at_least(tok, cnt, rest, ix, x_end, jy, offsets[y + 1], need)
                if ov >= 0:
                    out_small.append(y)
                    out_big.append(x)
                    out_sim.append(ov * 1000 // sx)
    return np.array(out_small, dtype=np.int64), np.array(out_big, dtype=np.int64), np.array(out_sim, dtype=np.int64)


def run_instance(
    blocks: BlockSet | Sequence[CodeBlock], config: SearchConfig, instance_index: int = 0
) -> set[ClonePair]:
    """All pairs of admitted blocks with similarity >= ``config.st``."""
    bs = _as_blockset(blocks)
    index = build_index(bs, config)
    if len(index.rows) < 2:
        return set()
    small, big, sim = _self_join(
        bs.entry_token, bs.entry_count, bs.entry_rest, bs.entry_start, bs.offsets, bs.sizes, bs.size_rank,
        index.rows, index.prefix_lengths, index.indptr, index.post_rows, index.post_entries, config.st,
    )
    found = frozenset((instance_index,))
    pairs = set()
    for y, x, s, m in zip(bs.ids[small].tolist(), bs.ids[big].tolist(), sim.tolist(), bs.sizes[small].tolist()):
        a, b = (y, x) if y < x else (x, y)
        pairs.add(ClonePair(a, b, s, m, found))
    return pairs
