"""Edit-distance alignment with operation traces.

Sequences can be strings or any sequence of hashable items (symbol ids).
All costs are unit: one per insertion, deletion or substitution.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Hashable, Iterator, NamedTuple, Sequence

import numpy as np

from .errors import UndefinedScoreError

# Above this many DP cells the matrix is filled row-wise with numpy.
_NUMPY_CELLS = 4096


class OpKind(enum.Enum):
    MATCH = "M"
    SUBSTITUTE = "S"
    DELETE = "D"
    INSERT = "I"


class EditOp(NamedTuple):
    """One alignment step. DELETE drops a GT item, INSERT adds an OCR item."""

    kind: OpKind
    gt_pos: int | None
    ocr_pos: int | None


@dataclass(frozen=True)
class EditScript:
    ops: tuple[EditOp, ...]

    @property
    def error_count(self) -> int:
        return sum(op.kind is not OpKind.MATCH for op in self.ops)

    def counts(self) -> dict[OpKind, int]:
        out = dict.fromkeys(OpKind, 0)
        for op in self.ops:
            out[op.kind] += 1
        return out

    def replay(self, ocr: Sequence, gt: Sequence) -> list:
        """Rebuild the GT sequence from ``ocr`` by following the script.

        Matched items are taken from ``ocr``; substituted and deleted items
        are restored from ``gt``; inserted items are dropped.
        """
        out = []
        for op in self.ops:
            if op.kind is OpKind.MATCH:
                out.append(ocr[op.ocr_pos])
            elif op.kind is not OpKind.INSERT:
                out.append(gt[op.gt_pos])
        return out

    def __str__(self):
        return "".join(op.kind.value for op in self.ops)


class SubstringMatch(NamedTuple):
    error_count: int
    span: tuple[int, int]


def _dp_rows(a: Sequence, b: Sequence):
    n, m = len(a), len(b)
    if n * m <= _NUMPY_CELLS:
        prev = list(range(m + 1))
        rows = [prev]
        for i, ai in enumerate(a, 1):
            cur = [i]
            left = i
            for j, bj in enumerate(b):
                # min() is slow enough to matter here
                d = prev[j] if ai == bj else prev[j] + 1
                up = prev[j + 1] + 1
                if up < d:
                    d = up
                if left + 1 < d:
                    d = left + 1
                left = d
                cur.append(d)
            rows.append(cur)
            prev = cur
        return rows

    codes: dict[Hashable, int] = {}
    ac = np.array([codes.setdefault(x, len(codes)) for x in a], dtype=np.int64)
    bc = np.array([codes.setdefault(x, len(codes)) for x in b], dtype=np.int64)
    dist = np.empty((n + 1, m + 1), dtype=np.int64)
    idx = np.arange(m + 1, dtype=np.int64)
    dist[0] = idx
    best = np.empty(m + 1, dtype=np.int64)
    for i in range(1, n + 1):
        prev = dist[i - 1]
        best[0] = i
        np.minimum(prev[1:] + 1, prev[:-1] + (bc != ac[i - 1]), out=best[1:])
        # insertions chain left to right: d[j] = min_k<=j best[k] + (j - k)
        best -= idx
        np.minimum.accumulate(best, out=best)
        dist[i] = best + idx
    return dist


def levenshtein(gt: Sequence, ocr: Sequence) -> EditScript:
    """Minimum edit script turning ``ocr`` into ``gt``.

    The backtrace prefers Match, then Substitute, then Delete, then Insert,
    so traces are reproducible; the error count does not depend on it.
    """
    dist = _dp_rows(gt, ocr)
    i, j = len(gt), len(ocr)
    ops = []
    while i > 0 or j > 0:
        here = dist[i][j]
        if i and j:
            diag = dist[i - 1][j - 1]
            if gt[i - 1] == ocr[j - 1] and here == diag:
                ops.append(EditOp(OpKind.MATCH, i - 1, j - 1))
                i, j = i - 1, j - 1
                continue
            if here == diag + 1:
                ops.append(EditOp(OpKind.SUBSTITUTE, i - 1, j - 1))
                i, j = i - 1, j - 1
                continue
        if i and here == dist[i - 1][j] + 1:
            ops.append(EditOp(OpKind.DELETE, i - 1, None))
            i -= 1
        else:
            ops.append(EditOp(OpKind.INSERT, None, j - 1))
            j -= 1
    ops.reverse()
    return EditScript(tuple(ops))


def _bit_scores(needle: Sequence, haystack: Sequence, free_start: bool) -> Iterator[int]:
    """Yield the last DP row of ``needle`` against ``haystack``, column by column.

    Bit-parallel (Myers/Hyyrö) with Python ints as the bit vectors. With
    ``free_start`` the value at column j is the minimum distance between the
    needle and any substring ending at j; otherwise it is the distance to
    ``haystack[:j]``.
    """
    m = len(needle)
    full = (1 << m) - 1
    high = 1 << (m - 1)
    peq: dict = {}
    for k, item in enumerate(needle):
        peq[item] = peq.get(item, 0) | (1 << k)
    carry = 0 if free_start else 1
    pv, mv, score = full, 0, m
    for item in haystack:
        eq = peq.get(item, 0)
        xv = eq | mv
        xh = (((eq & pv) + pv) ^ pv) | eq
        ph = mv | (~(xh | pv) & full)
        mh = pv & xh
        if ph & high:
            score += 1
        elif mh & high:
            score -= 1
        ph = ((ph << 1) | carry) & full
        mh = (mh << 1) & full
        pv = mh | (~(xv | ph) & full)
        mv = ph & xv
        yield score


def substring_cost(needle: Sequence, haystack: Sequence) -> int:
    """Error count of :func:`substring_distance` without locating the span."""
    m = len(needle)
    if m == 0:
        return 0
    if isinstance(needle, str) and isinstance(haystack, str) and needle in haystack:
        return 0
    # same recurrence as _bit_scores, inlined: this is the matcher's hot loop
    full = (1 << m) - 1
    high = 1 << (m - 1)
    peq: dict = {}
    for k, item in enumerate(needle):
        peq[item] = peq.get(item, 0) | (1 << k)
    pv, mv, score = full, 0, m
    best = m
    for item in haystack:
        eq = peq.get(item, 0)
        xv = eq | mv
        xh = (((eq & pv) + pv) ^ pv) | eq
        ph = mv | (~(xh | pv) & full)
        mh = pv & xh
        if ph & high:
            score += 1
        elif mh & high:
            score -= 1
            if score < best:
                best = score
        ph = (ph << 1) & full
        pv = ((mh << 1) & full) | (~(xv | ph) & full)
        mv = ph & xv
    return best


def substring_distance(
    needle: Sequence, haystack: Sequence, longest: bool = False
) -> SubstringMatch:
    """Best approximate occurrence of ``needle`` inside ``haystack``.

    The error count is the minimum edit distance between the needle and any
    contiguous substring of the haystack (the empty one included). Among
    minimizing substrings the one with the smallest start, then the smallest
    length (the largest with ``longest``), is reported as a half-open span.
    """
    m, size = len(needle), len(haystack)
    if m == 0:
        return SubstringMatch(0, (0, 0))
    best = substring_cost(needle, haystack)

    # best distance over substrings starting at s, for s = size-1 .. 0
    from_start = list(_bit_scores(needle[::-1], haystack[::-1], True))
    start = size
    for k, score in enumerate(from_start):
        if score == best:
            start = size - 1 - k
    if best == m:
        start = 0

    end = start
    for stop, score in enumerate(_bit_scores(needle, haystack[start:], False), start=start + 1):
        if score == best:
            end = stop
            if not longest:
                break
    if best == m and not longest:
        end = start
    return SubstringMatch(best, (start, end))


def character_accuracy(gt: Sequence, ocr: Sequence) -> float:
    """(n - E) / n with E the Levenshtein error count; negative when E > n."""
    n = len(gt)
    if n == 0:
        raise UndefinedScoreError("character accuracy of an empty reference is undefined")
    return (n - levenshtein(gt, ocr).error_count) / n
