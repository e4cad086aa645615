from __future__ import annotations

import random

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from clonecurve import CodeBlock, LabeledPair, ParametricCurve, TokenBag

settings.register_profile(
    "default",
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow, HealthCheck.data_too_large],
)
settings.load_profile("default")

# acceptance lines collected by tests/test_acceptance.py
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


def make_blocks(token_lists, first_id: int = 0) -> list[CodeBlock]:
    return [
        CodeBlock(first_id + i, f"mem/b{first_id + i}", 1, 1, TokenBag(tokens))
        for i, tokens in enumerate(token_lists)
    ]


def block_of(block_id: int, counts: dict[str, int]) -> CodeBlock:
    return CodeBlock(block_id, f"mem/b{block_id}", 1, 1, TokenBag(counts))


def random_curve(rng: random.Random, max_points: int = 8, max_ltlt: int = 400) -> ParametricCurve:
    """A valid unbounded curve with 1..max_points configurations."""
    n = rng.randint(1, max_points)
    sts = sorted(rng.sample(range(500, 1001), n), reverse=True)
    ltlts = sorted(rng.sample(range(1, max_ltlt), n))
    return ParametricCurve(list(zip(sts, ltlts)))


@pytest.fixture
def rng() -> random.Random:
    return random.Random(20240601)


# planted step curve used by the calibration tests: (st, ltlt), most similar first
PLANT = ((780, 19), (740, 28), (700, 40), (660, 62), (620, 90), (580, 130), (540, 200))


def inside(plant, size: int, sim: int) -> bool:
    return any(sim >= s and size >= l for s, l in plant)


def lattice_labels(plant, grid, sizes=range(19, 401)):
    """Noise-free labels at every size, at the bottom and middle of every grid band."""
    tops = [1001, *grid[:-1]]
    out = []
    for st, top in zip(grid, tops):
        for sim in sorted({st, (st + top - 1) // 2}):
            for size in sizes:
                out.append(LabeledPair(size, sim, inside(plant, size, sim)))
    return out


def random_labels(plant, seed: int, n: int = 20000, noise: float = 0.0):
    """Pareto-distributed sizes from 19 tokens, uniform similarity, ``noise`` of labels flipped."""
    gen = np.random.default_rng(seed)
    sizes = np.minimum(np.floor(19 * (1 - gen.random(n)) ** -1.0), 5000).astype(int)
    sims = gen.integers(500, 1001, n)
    flips = gen.random(n) < noise
    return [
        LabeledPair(int(size), int(sim), inside(plant, size, sim) != bool(flip))
        for size, sim, flip in zip(sizes, sims, flips)
    ]
