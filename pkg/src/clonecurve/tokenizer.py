"""Java-like lexer, block extraction and the pre-tokenized corpus format.

A block is reduced to a bag of tokens: identifiers, keywords and literals are
kept verbatim, everything else (operators, separators, comments, whitespace)
is dropped. Blocks are found by brace matching over the lexed stream, which is
enough for bag-of-tokens granularity and tolerant of code that does not parse.
"""

from __future__ import annotations

import bisect
import re
import warnings
from collections import Counter
from collections.abc import Iterable, Iterator, Mapping
from dataclasses import dataclass, field
from pathlib import Path
from typing import Literal
from urllib.parse import unquote

Granularity = Literal["method", "braced-block"]

SOURCE_SUFFIXES = (".java",)
FIELD_SEP = "@#@"

__all__ = [
    "BinaryFile",
    "CodeBlock",
    "CorpusWarning",
    "SourceFile",
    "TokenBag",
    "TokenizerWarning",
    "UnbalancedBraces",
    "extract_blocks",
    "format_block",
    "load_corpus",
    "parse_block",
    "read_blocks",
    "tokenize",
    "write_blocks",
]


class TokenizerWarning(UserWarning):
    """Raised through :mod:`warnings` for recoverable lexing problems."""


class UnbalancedBraces(ValueError):
    def __init__(self, path: str, line: int):
        super().__init__(f"{path}:{line}: unbalanced braces")
        self.path = path
        self.line = line


class BinaryFile(ValueError):
    def __init__(self, path: str):
        super().__init__(f"{path}: binary file")
        self.path = path


class TokenBag(Mapping[str, int]):
    """Immutable multiset of normalized tokens."""

    __slots__ = ("_counts", "_size")

    def __init__(self, counts: Mapping[str, int] | Iterable[str] = ()):
        if isinstance(counts, Mapping):
            items = dict(counts)
        else:
            items = dict(Counter(counts))
        for token, count in items.items():
            if not token:
                raise ValueError("empty token in bag")
            if not isinstance(count, int) or count < 1:
                raise ValueError(f"count for {token!r} must be a positive integer, got {count!r}")
        self._counts = items
        self._size = sum(items.values())

    @property
    def size(self) -> int:
        return self._size

    def __getitem__(self, token: str) -> int:
        return self._counts[token]

    def __iter__(self) -> Iterator[str]:
        return iter(self._counts)

    def __len__(self) -> int:
        return len(self._counts)

    def __contains__(self, token: object) -> bool:
        return token in self._counts

    # direct views; the Mapping defaults go through __getitem__ per token
    def keys(self):
        return self._counts.keys()

    def items(self):
        return self._counts.items()

    def values(self):
        return self._counts.values()

    def __eq__(self, other: object) -> bool:
        if isinstance(other, TokenBag):
            return self._counts == other._counts
        if isinstance(other, Mapping):
            return self._counts == dict(other)
        return NotImplemented

    def __hash__(self) -> int:
        return hash(frozenset(self._counts.items()))

    def __repr__(self) -> str:
        inner = ", ".join(f"{t!r}: {c}" for t, c in sorted(self._counts.items()))
        return f"TokenBag({{{inner}}})"


@dataclass(frozen=True)
class SourceFile:
    path: str
    content: str
    language: str = "java-like"
    lossy: bool = False  # True when invalid UTF-8 was replaced on decode

    @classmethod
    def from_bytes(cls, path: str, data: bytes) -> SourceFile:
        if b"\x00" in data:
            raise BinaryFile(path)
        try:
            return cls(path, data.decode("utf-8"))
        except UnicodeDecodeError:
            return cls(path, data.decode("utf-8", errors="replace"), lossy=True)


@dataclass(frozen=True)
class CodeBlock:
    id: int
    file_path: str
    start_line: int
    end_line: int
    bag: TokenBag = field(repr=False)

    def __post_init__(self):
        if self.start_line > self.end_line:
            raise ValueError(f"block {self.id}: start_line {self.start_line} > end_line {self.end_line}")

    @property
    def size(self) -> int:
        return self.bag.size


# --------------------------------------------------------------------------
# lexer

_LEXEME = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<line_comment>//[^\n]*)
  | (?P<block_comment>/\*.*?(?:\*/|\Z))
  | (?P<text_block>\"\"\".*?(?:\"\"\"|\Z))
  | (?P<string>"(?:\\.|[^"\\\n])*(?:"|$))
  | (?P<char>'(?:\\.|[^'\\\n])*(?:'|$))
  | (?P<number>
        0[xX][0-9a-fA-F_]*(?:\.[0-9a-fA-F_]*)?(?:[pP][+-]?\d+)?[lLfFdD]?
      | 0[bB][01_]+[lL]?
      | (?:\d[\d_]*(?:\.[\d_]*)?|\.\d[\d_]*)(?:[eE][+-]?\d[\d_]*)?[lLfFdD]?
    )
  | (?P<ident>(?:[^\W\d]|\$)(?:\w|\$)*)
  | (?P<op>.)
    """,
    re.VERBOSE | re.DOTALL | re.MULTILINE,
)

_KEPT = frozenset({"text_block", "string", "char", "number", "ident"})


@dataclass(frozen=True)
class _Lexeme:
    kind: str
    text: str
    line: int


def _lex(text: str, where: str = "<block>") -> list[_Lexeme]:
    line_starts = [0] + [m.end() for m in re.finditer("\n", text)]
    out = []
    for m in _LEXEME.finditer(text):
        kind = m.lastgroup
        if kind == "ws" or kind == "line_comment":
            continue
        value = m.group()
        line = bisect.bisect_right(line_starts, m.start())
        if kind == "block_comment":
            if not value.endswith("*/") or len(value) < 4:
                warnings.warn(f"{where}:{line}: unterminated comment", TokenizerWarning, stacklevel=3)
            continue
        if kind == "text_block":
            if len(value) < 6 or not value.endswith('"""'):
                warnings.warn(f"{where}:{line}: unterminated text block", TokenizerWarning, stacklevel=3)
        elif kind in ("string", "char"):
            quote = value[0]
            if len(value) < 2 or not value.endswith(quote) or value.endswith("\\" + quote) and _odd_escape(value):
                warnings.warn(f"{where}:{line}: unterminated literal", TokenizerWarning, stacklevel=3)
        out.append(_Lexeme(kind, value, line))
    return out


def _odd_escape(literal: str) -> bool:
    # a closing quote preceded by an odd number of backslashes is escaped
    n = 0
    for ch in reversed(literal[:-1]):
        if ch != "\\":
            break
        n += 1
    return n % 2 == 1


def _bag(lexemes: Iterable[_Lexeme]) -> TokenBag:
    return TokenBag(Counter(lx.text for lx in lexemes if lx.kind in _KEPT))


def tokenize(block_text: str) -> TokenBag:
    """Bag of the identifiers, keywords and literals in ``block_text``.

    >>> dict(tokenize("int x = x + 1;"))
    {'int': 1, 'x': 2, '1': 1}
    """
    return _bag(_lex(block_text))


# --------------------------------------------------------------------------
# block extraction

_TYPE_KEYWORDS = frozenset({"class", "interface", "enum"})


def _is_type_header(header: list[_Lexeme]) -> bool:
    for i, lx in enumerate(header):
        if lx.kind != "ident" or (i and header[i - 1].text == "."):  # skip `Foo.class`
            continue
        if lx.text == "new" or lx.text in _TYPE_KEYWORDS:  # `new` opens an anonymous class body
            return True
        # `record` is contextual: only a type when followed by a name
        if lx.text == "record" and i + 1 < len(header) and header[i + 1].kind == "ident":
            return True
    return False


def _is_method_header(header: list[_Lexeme]) -> bool:
    texts = [lx.text for lx in header]
    if "throws" in texts:
        texts = texts[: texts.index("throws")]
    return bool(texts) and texts[-1] == ")"


def extract_blocks(file: SourceFile, granularity: Granularity = "method", first_id: int = 0) -> list[CodeBlock]:
    """Return the method (or type-level braced) blocks of ``file``.

    Ids are assigned from ``first_id`` in (start_line) order. Raises
    :class:`UnbalancedBraces` when brace matching fails.
    """
    if granularity not in ("method", "braced-block"):
        raise ValueError(f"unknown granularity {granularity!r}")
    if "\x00" in file.content:
        raise BinaryFile(file.path)
    lexemes = _lex(file.content, file.path)

    # stack entries: (index of "{", kind) with kind in {"type", "body", "other"}
    stack: list[tuple[int, str]] = []
    spans: list[tuple[int, int]] = []
    header_start = 0
    for i, lx in enumerate(lexemes):
        if lx.kind != "op":
            continue
        if lx.text == "{":
            header = lexemes[header_start:i]
            parent = stack[-1][1] if stack else "type"  # file scope behaves like a type body
            if parent == "type":
                if _is_type_header(header):
                    kind = "type"
                elif granularity == "braced-block" and stack:
                    kind = "body"
                elif granularity == "method" and stack and _is_method_header(header):
                    kind = "body"
                else:
                    kind = "other"
            else:
                kind = "other"
            stack.append((i, kind))
            header_start = i + 1
        elif lx.text == "}":
            if not stack:
                raise UnbalancedBraces(file.path, lx.line)
            open_idx, kind = stack.pop()
            if kind == "body":
                spans.append((open_idx, i))
            header_start = i + 1
        elif lx.text == ";":
            header_start = i + 1
    if stack:
        raise UnbalancedBraces(file.path, lexemes[stack[-1][0]].line)

    blocks = []
    for open_idx, close_idx in sorted(spans, key=lambda s: (lexemes[s[0]].line, s[0])):
        bag = _bag(lexemes[open_idx + 1 : close_idx])
        if bag.size < 1:
            continue
        blocks.append(
            CodeBlock(
                id=first_id + len(blocks),
                file_path=file.path,
                start_line=lexemes[open_idx].line,
                end_line=lexemes[close_idx].line,
                bag=bag,
            )
        )
    return blocks


@dataclass
class CorpusWarning:
    path: str
    message: str

    def __str__(self) -> str:
        return f"{self.path}: {self.message}"


def load_corpus(path: str | Path, granularity: Granularity = "method") -> tuple[list[CodeBlock], list[CorpusWarning]]:
    """Load blocks from a source directory, a single source file, or a pre-tokenized file.

    Files that fail lexing are skipped and reported in the returned warning
    list. Block ids are assigned in (file path, start line) order.
    """
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"corpus not found: {path}")
    if path.is_file() and not path.name.endswith(SOURCE_SUFFIXES):
        return read_blocks(path), []

    if path.is_dir():
        files = sorted(p for p in path.rglob("*") if p.is_file() and p.name.endswith(SOURCE_SUFFIXES))
        root = path
    else:
        files = [path]
        root = path.parent

    problems: list[CorpusWarning] = []
    collected: list[CodeBlock] = []
    for f in files:
        rel = f.relative_to(root).as_posix()
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always", TokenizerWarning)
            try:
                source = SourceFile.from_bytes(rel, f.read_bytes())
                if source.lossy:
                    problems.append(CorpusWarning(rel, "invalid UTF-8 replaced"))
                collected.extend(extract_blocks(source, granularity))
            except (UnbalancedBraces, BinaryFile) as exc:
                problems.append(CorpusWarning(rel, f"skipped: {exc}"))
        problems.extend(CorpusWarning(rel, str(w.message)) for w in caught if issubclass(w.category, TokenizerWarning))

    collected.sort(key=lambda b: (b.file_path, b.start_line, b.end_line, b.id))
    blocks = [
        CodeBlock(i, b.file_path, b.start_line, b.end_line, b.bag) for i, b in enumerate(collected)
    ]
    return blocks, problems


# --------------------------------------------------------------------------
# pre-tokenized format: <id>,<path>,<start>,<end>,<size>@#@<tok>:<n>;<tok>:<n>;...

_ESCAPES = {"%": "%25", ",": "%2C", ";": "%3B", ":": "%3A", "@": "%40", "\n": "%0A", "\r": "%0D"}
_ESCAPE_RE = re.compile("[%,;:@\n\r]")


def _encode(text: str) -> str:
    return _ESCAPE_RE.sub(lambda m: _ESCAPES[m.group()], text)


def format_block(block: CodeBlock) -> str:
    tokens = ";".join(f"{_encode(t)}:{c}" for t, c in sorted(block.bag.items()))
    head = f"{block.id},{_encode(block.file_path)},{block.start_line},{block.end_line},{block.size}"
    return f"{head}{FIELD_SEP}{tokens}"


def parse_block(line: str) -> CodeBlock:
    head, sep, body = line.rstrip("\r\n").partition(FIELD_SEP)
    if not sep:
        raise ValueError(f"missing {FIELD_SEP!r} separator")
    parts = head.split(",")
    if len(parts) != 5:
        raise ValueError(f"expected 5 header fields, got {len(parts)}")
    block_id, path, start, end, size = parts
    counts: dict[str, int] = {}
    for entry in filter(None, body.split(";")):
        token, _, count = entry.rpartition(":")
        token = unquote(token)
        counts[token] = counts.get(token, 0) + int(count)
    block = CodeBlock(int(block_id), unquote(path), int(start), int(end), TokenBag(counts))
    if block.size != int(size):
        raise ValueError(f"block {block.id}: declared size {size} != bag size {block.size}")
    return block


def read_blocks(path: str | Path) -> list[CodeBlock]:
    blocks = []
    seen: set[int] = set()
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            if not line.strip():
                continue
            try:
                block = parse_block(line)
            except ValueError as exc:
                raise ValueError(f"{path}:{lineno}: {exc}") from None
            if block.id in seen:
                raise ValueError(f"{path}:{lineno}: duplicate block id {block.id}")
            seen.add(block.id)
            blocks.append(block)
    return blocks


def write_blocks(blocks: Iterable[CodeBlock], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for block in blocks:
            fh.write(format_block(block) + "\n")
