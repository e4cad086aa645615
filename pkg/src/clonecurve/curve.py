"""Parametric curves of search configurations and their upper-bound optimization.

Thresholds are integers: similarity in permille (750 == 75%), lengths in
tokens. All bounds are inclusive.
"""

from __future__ import annotations

from collections.abc import Iterable, Iterator, Sequence
from dataclasses import dataclass, replace
from pathlib import Path

__all__ = [
    "AlreadyBounded",
    "CurveError",
    "NonMonotoneLTLT",
    "NonMonotoneST",
    "OutOfRange",
    "ParametricCurve",
    "PRESETS",
    "SearchConfig",
    "UnknownPreset",
    "apply_upper_bounds",
    "format_curve",
    "parse_curve",
    "preset",
    "read_curve",
    "validate",
]


class CurveError(ValueError):
    pass


class NonMonotoneST(CurveError):
    def __init__(self, index: int):
        super().__init__(f"NonMonotoneST({index}): similarity threshold must strictly decrease")
        self.index = index


class NonMonotoneLTLT(CurveError):
    def __init__(self, index: int):
        super().__init__(f"NonMonotoneLTLT({index}): lower length threshold must strictly increase")
        self.index = index


class OutOfRange(CurveError):
    def __init__(self, index: int | None, field: str, value):
        where = "" if index is None else f"{index}, "
        super().__init__(f"OutOfRange({where}{field}): {value!r}")
        self.index = index
        self.field = field


class AlreadyBounded(CurveError):
    def __init__(self):
        super().__init__("AlreadyBounded: curve already carries upper length thresholds")


class UnknownPreset(CurveError):
    def __init__(self, name: str):
        super().__init__(f"UnknownPreset({name!r}); known: {', '.join(sorted(PRESETS))}")
        self.name = name


def _check_fields(st, ltlt, utlt, index: int | None = None) -> None:
    if not isinstance(st, int) or not 1 <= st <= 1000:
        raise OutOfRange(index, "st", st)
    if not isinstance(ltlt, int) or ltlt < 1:
        raise OutOfRange(index, "ltlt", ltlt)
    if utlt is not None and (not isinstance(utlt, int) or utlt < ltlt):
        raise OutOfRange(index, "utlt", utlt)


@dataclass(frozen=True)
class SearchConfig:
    """One search instance: pairs with similarity >= ``st`` among blocks sized ``ltlt..utlt``."""

    st: int
    ltlt: int
    utlt: int | None = None

    def __post_init__(self):
        _check_fields(self.st, self.ltlt, self.utlt)

    def admits(self, size: int) -> bool:
        return self.ltlt <= size and (self.utlt is None or size <= self.utlt)

    def unbounded(self) -> SearchConfig:
        return replace(self, utlt=None)

    def __str__(self) -> str:
        upper = "+" if self.utlt is None else f"-{self.utlt}"
        return f"({self.st / 10:g}%, {self.ltlt}{upper})"


@dataclass(frozen=True)
class ParametricCurve(Sequence[SearchConfig]):
    """Configurations ordered most-similar first."""

    configs: tuple[SearchConfig, ...]

    def __init__(self, configs: Iterable[SearchConfig | Sequence[int]]):
        object.__setattr__(self, "configs", validate(configs))

    def __getitem__(self, index):
        return self.configs[index]

    def __len__(self) -> int:
        return len(self.configs)

    def __iter__(self) -> Iterator[SearchConfig]:
        return iter(self.configs)

    @property
    def is_bounded(self) -> bool:
        return any(c.utlt is not None for c in self.configs)

    def unbounded(self) -> ParametricCurve:
        return ParametricCurve(c.unbounded() for c in self.configs)

    def __str__(self) -> str:
        return " ".join(str(c) for c in self.configs)


def validate(curve: Iterable[SearchConfig | Sequence[int]]) -> tuple[SearchConfig, ...]:
    """Check range and monotonicity; return the configs as a tuple.

    Accepts :class:`SearchConfig` objects or plain ``(st, ltlt[, utlt])``
    tuples. Raises :class:`OutOfRange`, :class:`NonMonotoneST` or
    :class:`NonMonotoneLTLT` naming the first offending index.
    """
    configs = []
    for i, item in enumerate(curve):
        if isinstance(item, SearchConfig):
            configs.append(item)
            continue
        st, ltlt, *rest = item
        utlt = rest[0] if rest else None
        _check_fields(st, ltlt, utlt, i)
        configs.append(SearchConfig(st, ltlt, utlt))
    if not configs:
        raise CurveError("a curve needs at least one configuration")
    for i in range(1, len(configs)):
        if configs[i].st >= configs[i - 1].st:
            raise NonMonotoneST(i)
        if configs[i].ltlt <= configs[i - 1].ltlt:
            raise NonMonotoneLTLT(i)
    return tuple(configs)


def apply_upper_bounds(curve: ParametricCurve | Iterable) -> ParametricCurve:
    """Give every configuration but the last the largest block size it still needs.

    A block bigger than ``(ltlt_next - 1) / st`` cannot reach similarity ``st``
    with any block the next instance skips, so pairs involving it are either
    impossible here or found by the next instance.
    """
    configs = validate(curve)
    if any(c.utlt is not None for c in configs):
        raise AlreadyBounded()
    bounded = [
        replace(cur, utlt=(nxt.ltlt - 1) * 1000 // cur.st) for cur, nxt in zip(configs, configs[1:])
    ]
    bounded.append(configs[-1])
    return ParametricCurve(bounded)


def _table(st: list[int], ltlt: list[int], utlt: list[int | None]) -> ParametricCurve:
    return ParametricCurve(SearchConfig(s * 10, l, u) for s, l, u in zip(st, ltlt, utlt))


# Calibrated curves for Java, block-level tokenization.
PRESETS: dict[str, ParametricCurve] = {
    "sourcerercc-java": _table(
        [75, 73, 71, 70, 65, 60, 55, 50],
        [19, 24, 34, 36, 56, 65, 144, 215],
        [30, 45, 49, 78, 98, 238, 389, None],
    ),
    "cloneworks-java": _table(
        [77, 75, 72, 71, 70, 65, 60, 55],
        [19, 22, 24, 30, 35, 50, 72, 140],
        [27, 30, 40, 47, 70, 109, 231, None],
    ),
}


def preset(name: str) -> ParametricCurve:
    try:
        return PRESETS[name]
    except KeyError:
        raise UnknownPreset(name) from None


# --------------------------------------------------------------------------
# curve files: one `st_permille,ltlt[,utlt]` per line, `#` starts a comment


def parse_curve(text: str) -> ParametricCurve:
    rows = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        try:
            fields = [int(f) for f in line.split(",")]
        except ValueError:
            raise CurveError(f"line {lineno}: expected integers, got {raw.strip()!r}") from None
        if len(fields) not in (2, 3):
            raise CurveError(f"line {lineno}: expected st,ltlt[,utlt], got {raw.strip()!r}")
        rows.append(tuple(fields))
    return ParametricCurve(rows)


def read_curve(path: str | Path) -> ParametricCurve:
    return parse_curve(Path(path).read_text(encoding="utf-8"))


def format_curve(curve: ParametricCurve) -> str:
    lines = []
    for c in curve:
        lines.append(f"{c.st},{c.ltlt}" if c.utlt is None else f"{c.st},{c.ltlt},{c.utlt}")
    return "\n".join(lines) + "\n"
