"""Levenshtein word alignment, WER, and WordF1 with fake as the positive class."""

from __future__ import annotations

from dataclasses import asdict, dataclass, fields
from typing import Iterable, Sequence

from .core import PflError, TaggedToken

MATCH = "match"
SUBSTITUTE = "substitute"
INSERT = "insert"
DELETE = "delete"


class UndefinedWERError(PflError):
    pass


@dataclass(frozen=True)
class AlignmentOp:
    kind: str
    ref_index: int | None = None
    hyp_index: int | None = None


def edit_table(ref: Sequence[str], hyp: Sequence[str]) -> list[list[int]]:
    """DP table of ``edits * big + indels`` with ``big = len(ref) + len(hyp) + 1``.

    Ordering by this key minimizes edits first, then insertions plus
    deletions, so the chosen path's counts do not depend on which side is
    the reference.
    """
    n, m = len(ref), len(hyp)
    big = n + m + 1
    gap = big + 1
    d = [[0] * (m + 1) for _ in range(n + 1)]
    for j in range(m + 1):
        d[0][j] = j * gap
    for i in range(1, n + 1):
        row, prev = d[i], d[i - 1]
        row[0] = i * gap
        r = ref[i - 1]
        for j in range(1, m + 1):
            best = prev[j - 1] + (big if r != hyp[j - 1] else 0)
            if prev[j] + gap < best:
                best = prev[j] + gap
            if row[j - 1] + gap < best:
                best = row[j - 1] + gap
            row[j] = best
    return d


def edit_distance(ref: Sequence[str], hyp: Sequence[str]) -> int:
    return edit_table(ref, hyp)[len(ref)][len(hyp)] // (len(ref) + len(hyp) + 1)


def align(ref: Sequence[str], hyp: Sequence[str]) -> list[AlignmentOp]:
    """Minimal unit-cost alignment of two word sequences.

    Among minimal-cost paths the one with fewest insertions+deletions is
    kept; remaining backtrace ties resolve as match > substitute > delete
    > insert, so the path is deterministic.
    """
    d = edit_table(ref, hyp)
    big = len(ref) + len(hyp) + 1
    gap = big + 1
    i, j = len(ref), len(hyp)
    ops = []
    while i > 0 or j > 0:
        cur = d[i][j]
        if i > 0 and j > 0 and ref[i - 1] == hyp[j - 1] and d[i - 1][j - 1] == cur:
            ops.append(AlignmentOp(MATCH, i - 1, j - 1))
            i, j = i - 1, j - 1
        elif i > 0 and j > 0 and d[i - 1][j - 1] + big == cur:
            ops.append(AlignmentOp(SUBSTITUTE, i - 1, j - 1))
            i, j = i - 1, j - 1
        elif i > 0 and d[i - 1][j] + gap == cur:
            ops.append(AlignmentOp(DELETE, i - 1, None))
            i -= 1
        else:
            ops.append(AlignmentOp(INSERT, None, j - 1))
            j -= 1
    ops.reverse()
    return ops


def alignment_cost(ops: Iterable[AlignmentOp]) -> int:
    return sum(op.kind != MATCH for op in ops)


@dataclass
class Counts:
    """Additive confusion and edit counts; pooled by summation."""

    tp: int = 0
    fp: int = 0
    fn: int = 0
    tn: int = 0
    n_match: int = 0
    n_sub: int = 0
    n_ins: int = 0
    n_del: int = 0
    n_ref: int = 0
    n_hyp: int = 0
    n_deleted_fake: int = 0  # ref fake words with no hyp partner, counted in fn
    n_inserted_fake: int = 0  # hyp fake tags on inserted words, excluded from F1

    def __add__(self, other: "Counts") -> "Counts":
        return Counts(*(getattr(self, f.name) + getattr(other, f.name) for f in fields(self)))

    def report(self) -> "ScoreReport":
        wer = (self.n_sub + self.n_ins + self.n_del) / self.n_ref if self.n_ref else None
        precision = self.tp / (self.tp + self.fp) if self.tp + self.fp else 0.0
        recall = self.tp / (self.tp + self.fn) if self.tp + self.fn else 0.0
        f1 = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
        return ScoreReport(
            wer=wer, word_f1=f1, precision=precision, recall=recall,
            n_scored_words=self.n_match + self.n_sub, **asdict(self),
        )


@dataclass(frozen=True)
class ScoreReport:
    wer: float | None  # None when the reference is empty
    word_f1: float
    precision: float
    recall: float
    tp: int
    fp: int
    fn: int
    tn: int
    n_match: int
    n_sub: int
    n_ins: int
    n_del: int
    n_ref: int
    n_hyp: int
    n_deleted_fake: int
    n_inserted_fake: int
    n_scored_words: int

    def to_dict(self) -> dict:
        return asdict(self)


def wer(ref: Sequence[str], hyp: Sequence[str]) -> float:
    if not ref:
        raise UndefinedWERError("WER is undefined for an empty reference")
    return alignment_cost(align(ref, hyp)) / len(ref)


def pair_counts(ref: Sequence[TaggedToken], hyp: Sequence[TaggedToken]) -> Counts:
    c = Counts(n_ref=len(ref), n_hyp=len(hyp))
    for op in align([t.word for t in ref], [t.word for t in hyp]):
        if op.kind == INSERT:
            c.n_ins += 1
            c.n_inserted_fake += hyp[op.hyp_index].is_fake
            continue
        r = ref[op.ref_index]
        if op.kind == DELETE:
            c.n_del += 1
            if r.is_fake:
                c.fn += 1
                c.n_deleted_fake += 1
            continue
        if op.kind == MATCH:
            c.n_match += 1
        else:
            c.n_sub += 1
        h = hyp[op.hyp_index]
        if r.is_fake and h.is_fake:
            c.tp += 1
        elif h.is_fake:
            c.fp += 1
        elif r.is_fake:
            c.fn += 1
        else:
            c.tn += 1
    return c


def word_f1(ref: Sequence[TaggedToken], hyp: Sequence[TaggedToken]) -> ScoreReport:
    return pair_counts(ref, hyp).report()


def corpus_score(
    pairs: Iterable[tuple[Sequence[TaggedToken], Sequence[TaggedToken]]],
) -> ScoreReport:
    """Micro-averaged score: counts are pooled first, ratios computed once."""
    total = None
    for ref, hyp in pairs:
        c = pair_counts(ref, hyp)
        total = c if total is None else total + c
    if total is None:
        raise PflError("cannot score an empty corpus")
    if total.n_ref == 0:
        raise UndefinedWERError("WER is undefined: every reference is empty")
    return total.report()
