"""Codec between tagged token sequences and ``word [fake]`` text."""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from typing import Sequence

from .core import FAKE_TAG, PflError, TaggedToken, normalize_word

LEADING_TAG = "leading_tag"
DUPLICATE_TAG = "duplicate_tag"


class EncodeError(PflError):
    pass


@dataclass(frozen=True)
class TagConfig:
    tag: str = FAKE_TAG
    case_insensitive_parse: bool = True

    def __post_init__(self):
        if not self.tag or any(c.isspace() for c in self.tag):
            raise PflError(f"tag must be non-empty without whitespace, got {self.tag!r}")

    def is_tag(self, tok: str) -> bool:
        if self.case_insensitive_parse:
            return tok.casefold() == self.tag.casefold()
        return tok == self.tag


@dataclass(frozen=True)
class DecodeWarning:
    kind: str
    position: int  # whitespace-token index in the input text
    token: str


def encode(tokens: Sequence[TaggedToken], cfg: TagConfig = TagConfig()) -> str:
    parts = []
    for tok in tokens:
        if tok.word == cfg.tag or cfg.is_tag(tok.word):
            raise EncodeError(f"token word {tok.word!r} collides with the tag {cfg.tag!r}")
        if not tok.word or any(c.isspace() for c in tok.word):
            raise EncodeError(f"token word {tok.word!r} is empty or contains whitespace")
        parts.append(tok.word)
        if tok.is_fake:
            parts.append(cfg.tag)
    return " ".join(parts)


def decode(text: str, cfg: TagConfig = TagConfig()) -> tuple[list[TaggedToken], list[DecodeWarning]]:
    """Parse tagged text leniently.

    Each tag marks the nearest preceding word as fake. Tags with no
    preceding word, and repeats after an already-tagged word, are dropped
    and reported. Tokens that normalize to nothing (bare punctuation) are
    skipped, so ``"terrible . [fake]"`` still tags ``terrible``.
    """
    words: list[str] = []
    fake: list[bool] = []
    warnings: list[DecodeWarning] = []
    for pos, raw in enumerate(text.split()):
        if cfg.is_tag(raw):
            if not words:
                warnings.append(DecodeWarning(LEADING_TAG, pos, raw))
            elif fake[-1]:
                warnings.append(DecodeWarning(DUPLICATE_TAG, pos, raw))
            else:
                fake[-1] = True
            continue
        w = normalize_word(raw)
        if w:
            words.append(w)
            fake.append(False)
    return [TaggedToken(w, f) for w, f in zip(words, fake)], warnings


def warning_counts(warnings: Sequence[DecodeWarning]) -> dict[str, int]:
    c = Counter(w.kind for w in warnings)
    return {LEADING_TAG: c[LEADING_TAG], DUPLICATE_TAG: c[DUPLICATE_TAG]}
