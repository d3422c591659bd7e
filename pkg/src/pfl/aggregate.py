"""Frame posteriors -> per-word scores -> word-level fake decisions.

A frame ``t`` (0-based) is taken to sit at its center time
``(t + 0.5) / rate_hz``. A word collects every frame whose center falls
inside ``[start_s, end_s]``; words shorter than a frame fall back to the
single frame nearest their midpoint.
"""

from __future__ import annotations

import enum
import math
import statistics
from dataclasses import dataclass
from typing import Sequence

from .core import FrameScores, TaggedToken, ValidationError, WordSpan

DEFAULT_THRESHOLD = 0.5


class AggPolicy(str, enum.Enum):
    MEAN = "mean"
    MAX = "max"
    MEDIAN = "median"


@dataclass(frozen=True)
class WordScore:
    word: str
    q: float
    n_frames: int


def _center(t: int, rate_hz: float) -> float:
    return (t + 0.5) / rate_hz


def frames_in_span(span: WordSpan, rate_hz: float, n_frames: int) -> range:
    """Indices of frames whose centers lie in the span, clipped to ``[0, n_frames)``."""
    if not rate_hz > 0:
        raise ValidationError(f"rate_hz must be > 0, got {rate_hz!r}")
    if n_frames < 1:
        raise ValidationError("need at least one frame")
    s, e = span.start_s, span.end_s
    lo = math.ceil(s * rate_hz - 0.5)
    hi = math.floor(e * rate_hz - 0.5)
    # The closed forms above can be off by one ulp-induced step; settle the
    # edges with the exact center predicate.
    while _center(lo - 1, rate_hz) >= s:
        lo -= 1
    while _center(lo, rate_hz) < s:
        lo += 1
    while _center(hi + 1, rate_hz) <= e:
        hi += 1
    while hi >= lo and _center(hi, rate_hz) > e:
        hi -= 1
    lo, hi = max(lo, 0), min(hi, n_frames - 1)
    if lo <= hi:
        return range(lo, hi + 1)
    mid = 0.5 * (s + e)
    guess = math.floor(mid * rate_hz)
    cands = {min(max(t, 0), n_frames - 1) for t in (guess - 1, guess, guess + 1)}
    # equidistant centers resolve to the later frame
    t = min(cands, key=lambda c: (abs(_center(c, rate_hz) - mid), -c))
    return range(t, t + 1)


def _agg(values: Sequence[float], policy: AggPolicy) -> float:
    if policy is AggPolicy.MEAN:
        q = math.fsum(values) / len(values)
        return min(max(q, min(values)), max(values))
    if policy is AggPolicy.MAX:
        return max(values)
    return statistics.median(values)


def word_scores(
    frames: FrameScores,
    spans: Sequence[WordSpan],
    policy: AggPolicy | str = AggPolicy.MEAN,
) -> list[WordScore]:
    policy = AggPolicy(policy)
    p = frames.scores
    out = []
    for span in spans:
        idx = frames_in_span(span, frames.rate_hz, len(p))
        vals = p[idx.start:idx.stop]
        out.append(WordScore(span.word, _agg(vals, policy), len(vals)))
    return out


def decide(scores: Sequence[WordScore], threshold: float = DEFAULT_THRESHOLD) -> list[TaggedToken]:
    """Threshold word scores; a score equal to the threshold counts as fake."""
    if not (0.0 <= threshold <= 1.0):
        raise ValidationError(f"threshold {threshold!r} is outside [0, 1]")
    return [TaggedToken(ws.word, ws.q >= threshold) for ws in scores]


def localize(
    frames: FrameScores,
    spans: Sequence[WordSpan],
    policy: AggPolicy | str = AggPolicy.MEAN,
    threshold: float = DEFAULT_THRESHOLD,
) -> tuple[list[WordScore], list[TaggedToken]]:
    ws = word_scores(frames, spans, policy)
    return ws, decide(ws, threshold)
