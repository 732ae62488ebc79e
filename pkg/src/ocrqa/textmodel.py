"""Canonical text representation shared by every metric.

Texts are normalized into lines of whitespace-free string segments.
Counting rule: spaces inside a line count as characters, line breaks do not.
"""

from __future__ import annotations

import enum
import functools
import re
import unicodedata
from dataclasses import dataclass, field
from typing import Iterable, Mapping

from .errors import InputError, ParseError


class CharClass(enum.Enum):
    ALPHABET = "alphabet"
    DIGIT = "digit"
    SPECIAL = "special"


@functools.lru_cache(maxsize=4096)
def classify_char(ch: str) -> CharClass | None:
    """Return the class of a single character, or None for whitespace.

    Unicode letters are ALPHABET, Unicode decimal digits are DIGIT and
    any other non-whitespace character is SPECIAL.
    """
    if len(ch) != 1:
        raise ValueError(f"expected a single character, got {ch!r}")
    if ch.isspace():
        return None
    if ch.isdecimal():
        return CharClass.DIGIT
    if unicodedata.category(ch).startswith("L"):
        return CharClass.ALPHABET
    return CharClass.SPECIAL


@dataclass(frozen=True)
class StringSegment:
    text: str
    classes_present: frozenset = field(init=False)

    def __post_init__(self):
        if not self.text or any(ch.isspace() for ch in self.text):
            raise ValueError(f"invalid string segment {self.text!r}")
        object.__setattr__(
            self, "classes_present", frozenset(classify_char(ch) for ch in self.text)
        )

    def __str__(self):
        return self.text


@dataclass(frozen=True)
class Line:
    index: int
    text: str
    segments: tuple[StringSegment, ...]

    def __len__(self):
        return len(self.text)


def tokenize_segments(line: Line | str) -> list[StringSegment]:
    """Split a line into its maximal whitespace-free runs, left to right."""
    text = line.text if isinstance(line, Line) else line
    return [StringSegment(tok) for tok in text.split()]


@dataclass(frozen=True)
class NormalizedText:
    """Lines of normalized text. Build with :func:`normalize` or ``from_lines``."""

    lines: tuple[Line, ...] = ()

    @classmethod
    def from_lines(cls, texts: Iterable[str]) -> "NormalizedText":
        """Build from a sequence of lines; each is re-normalized, blanks dropped."""
        lines = []
        for raw in texts:
            for piece in unicodedata.normalize("NFC", raw).splitlines():
                text = " ".join(piece.split())
                if text:
                    lines.append(Line(len(lines), text, tuple(tokenize_segments(text))))
        return cls(tuple(lines))

    @property
    def char_count(self) -> int:
        return sum(len(line.text) for line in self.lines)

    @property
    def segment_count(self) -> int:
        return sum(len(line.segments) for line in self.lines)

    @property
    def texts(self) -> tuple[str, ...]:
        return tuple(line.text for line in self.lines)

    def __len__(self):
        return len(self.lines)

    def __str__(self):
        return "\n".join(self.texts)


def normalize(raw: str | bytes) -> NormalizedText:
    """Normalize raw text into a :class:`NormalizedText`.

    Applies NFC composition, splits on every line-break convention, collapses
    whitespace runs to one space, trims each line and drops blank lines.
    Bytes are decoded as strict UTF-8.
    """
    if isinstance(raw, (bytes, bytearray)):
        try:
            raw = bytes(raw).decode("utf-8")
        except UnicodeDecodeError as exc:
            raise InputError(f"input is not valid UTF-8: {exc}") from None
    if raw.startswith("\ufeff"):
        raw = raw[1:]
    return NormalizedText.from_lines([raw])


def filter_by_class(text: NormalizedText, cls: CharClass) -> NormalizedText:
    """Keep only characters of ``cls``; whitespace is dropped with the rest."""
    kept = (
        "".join(ch for ch in line.text if classify_char(ch) is cls)
        for line in text.lines
    )
    return NormalizedText.from_lines(kept)


@dataclass(frozen=True)
class SymbolSequence:
    """Segments replaced by integer symbols, line structure kept.

    ``table`` maps symbol id to segment text and is shared by both sides of
    a comparison built with :func:`build_symbols`.
    """

    lines: tuple[tuple[int, ...], ...]
    table: Mapping[int, str]

    @property
    def flat(self) -> tuple[int, ...]:
        return tuple(sym for line in self.lines for sym in line)

    def __len__(self):
        return sum(len(line) for line in self.lines)


def build_symbols(
    gt: NormalizedText, ocr: NormalizedText
) -> tuple[SymbolSequence, SymbolSequence]:
    """Map every distinct segment text to one symbol, shared across both texts.

    Ids are ranks in the sorted set of segment texts, so they do not depend
    on line order and compare in the same order as the texts themselves.
    """
    vocab = sorted(
        {seg.text for text in (gt, ocr) for line in text.lines for seg in line.segments}
    )
    ids = {text: i for i, text in enumerate(vocab)}
    table = dict(enumerate(vocab))

    def encode(text):
        return SymbolSequence(
            tuple(tuple(ids[seg.text] for seg in line.segments) for line in text.lines),
            table,
        )

    return encode(gt), encode(ocr)


class SectionKind(enum.Enum):
    STORE = "store"
    ITEMS = "items"
    TRANSACTION = "transaction"
    MISC = "misc"
    OTHER = "other"


@dataclass(frozen=True)
class Section:
    kind: SectionKind
    body: NormalizedText


@dataclass(frozen=True)
class GroundTruthDoc:
    sections: tuple[Section, ...] = ()

    @property
    def full_text(self) -> NormalizedText:
        return NormalizedText.from_lines(
            text for section in self.sections for text in section.body.texts
        )

    def kinds(self) -> list[SectionKind]:
        """Section kinds in first-appearance order, without repeats."""
        seen = []
        for section in self.sections:
            if section.kind not in seen:
                seen.append(section.kind)
        return seen

    def body(self, kind: SectionKind) -> NormalizedText:
        """All bodies of ``kind`` joined in file order."""
        return NormalizedText.from_lines(
            text
            for section in self.sections
            if section.kind is kind
            for text in section.body.texts
        )


_HEADER = re.compile(r"^\s*#section:(.*)$", re.IGNORECASE)


def parse_ground_truth(data: str | bytes) -> GroundTruthDoc:
    """Parse a ground-truth file with optional ``#section: <name>`` headers.

    Lines before the first header form an implicit ``other`` section, which
    is omitted when it holds no text.
    """
    if isinstance(data, (bytes, bytearray)):
        try:
            data = bytes(data).decode("utf-8")
        except UnicodeDecodeError as exc:
            raise InputError(f"ground truth is not valid UTF-8: {exc}") from None
    if data.startswith("\ufeff"):
        data = data[1:]

    blocks: list[tuple[SectionKind, list[str], bool]] = []
    kind, body, explicit = SectionKind.OTHER, [], False
    for lineno, raw in enumerate(data.splitlines(), start=1):
        match = _HEADER.match(raw)
        if match is None:
            body.append(raw)
            continue
        blocks.append((kind, body, explicit))
        name = match.group(1).strip().lower()
        try:
            kind = SectionKind(name)
        except ValueError:
            raise ParseError(f"unknown section name {name!r}", location=f"line {lineno}") from None
        body, explicit = [], True
    blocks.append((kind, body, explicit))

    sections = []
    for kind, body, explicit in blocks:
        text = normalize("\n".join(body))
        if explicit or text.lines:
            sections.append(Section(kind, text))
    return GroundTruthDoc(tuple(sections))
