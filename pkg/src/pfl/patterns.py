"""Fake-word and fake-phoneme frequency tables, and a text-only lexical-prior
localizer built from word edit statistics."""

from __future__ import annotations

import json
import re
from collections import Counter
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Iterable, Iterator, Mapping, Sequence

from .core import Corpus, PflError, TaggedToken, normalize_word
from .tagcodec import TagConfig, decode

ARPABET = frozenset(
    "AA AE AH AO AW AY B CH D DH EH ER EY F G HH IH IY JH K L M N NG "
    "OW OY P R S SH T TH UH UW V W Y Z ZH".split()
)

GROUND_TRUTH = "ground-truth"
PREDICTED = "predicted"
LABEL_SOURCES = (GROUND_TRUTH, PREDICTED)

_VARIANT = re.compile(r"^(.*)\((\d+)\)$")

Lexicon = dict  # normalized word -> tuple of stress-free ARPABET symbols


class LexiconError(PflError):
    pass


def parse_lexicon(lines: Iterable[str], source: str = "<lexicon>") -> Lexicon:
    lex: Lexicon = {}
    for lineno, line in enumerate(lines, start=1):
        line = line.strip()
        if not line or line.startswith(";;;"):
            continue
        parts = line.split()
        if len(parts) < 2:
            raise LexiconError(f"{source}: line {lineno}: expected 'WORD  PH PH ...'")
        head = parts[0]
        m = _VARIANT.match(head)
        if m:
            head = m.group(1)
        phones = []
        for ph in parts[1:]:
            sym = ph.rstrip("012")
            if sym not in ARPABET:
                raise LexiconError(f"{source}: line {lineno}: unknown phoneme symbol {ph!r}")
            phones.append(sym)
        word = normalize_word(head)
        if word and word not in lex:
            lex[word] = tuple(phones)
    return lex


def load_lexicon(path: str | Path, encoding: str = "latin-1") -> Lexicon:
    """Read a CMUdict-style file; the first listed pronunciation wins."""
    with open(path, encoding=encoding) as fh:
        return parse_lexicon(fh, str(path))


def bundled_lexicon() -> Lexicon:
    text = resources.files("pfl").joinpath("data/mini_lexicon.txt").read_text(encoding="utf-8")
    return parse_lexicon(text.splitlines(), "mini_lexicon.txt")


def rank(counts: Mapping[str, int], k: int) -> list[tuple[str, int]]:
    """Top *k* by count, ties broken by the smaller key."""
    if k <= 0:
        return []
    return sorted(counts.items(), key=lambda kv: (-kv[1], kv[0]))[:k]


def labeled_tokens(corpus: Corpus, labels: str = GROUND_TRUTH,
                   tag_cfg: TagConfig = TagConfig()) -> Iterator[tuple[str, list[TaggedToken]]]:
    """Yield ``(utterance id, tokens)`` with labels from the chosen source.

    ``predicted`` labels come from each utterance's ``hyp_text``;
    utterances without one contribute nothing.
    """
    if labels not in LABEL_SOURCES:
        raise PflError(f"unknown label source {labels!r}; use one of {LABEL_SOURCES}")
    for u in corpus:
        if labels == GROUND_TRUTH:
            yield u.id, u.tokens()
        elif u.hyp_text is not None:
            yield u.id, decode(u.hyp_text, tag_cfg)[0]


def fake_word_counts(corpus: Corpus, labels: str = GROUND_TRUTH) -> Counter:
    c: Counter = Counter()
    for _, toks in labeled_tokens(corpus, labels):
        c.update(t.word for t in toks if t.is_fake)
    return c


def top_fake_words(corpus: Corpus, k: int = 10, labels: str = GROUND_TRUTH) -> list[tuple[str, int]]:
    return rank(fake_word_counts(corpus, labels), k)


def phoneme_counts(word_counts: Mapping[str, int], lexicon: Lexicon) -> tuple[Counter, Counter]:
    phones: Counter = Counter()
    oov: Counter = Counter()
    for w, n in word_counts.items():
        pron = lexicon.get(w)
        if pron is None:
            oov[w] += n
            continue
        for ph in pron:
            phones[ph] += n
    return phones, oov


def top_fake_phonemes(corpus: Corpus, lexicon: Lexicon, k: int = 10,
                      labels: str = GROUND_TRUTH) -> tuple[list[tuple[str, int]], list[tuple[str, int]]]:
    """Top-k phonemes over fake token occurrences, plus every OOV fake word.

    A phoneme repeated inside one pronunciation counts once per repeat.
    """
    phones, oov = phoneme_counts(fake_word_counts(corpus, labels), lexicon)
    return rank(phones, k), rank(oov, len(oov))


@dataclass(frozen=True)
class PatternReport:
    top_words: list[tuple[str, int]]
    top_phonemes: list[tuple[str, int]]
    oov_words: list[tuple[str, int]]
    k: int
    labels: str = GROUND_TRUTH
    n_fake_tokens: int = 0
    n_tokens: int = 0

    def to_dict(self) -> dict:
        return {
            "labels": self.labels,
            "k": self.k,
            "n_tokens": self.n_tokens,
            "n_fake_tokens": self.n_fake_tokens,
            "top_words": [[w, n] for w, n in self.top_words],
            "top_phonemes": [[p, n] for p, n in self.top_phonemes],
            "oov_words": [[w, n] for w, n in self.oov_words],
        }


def analyze(corpus: Corpus, lexicon: Lexicon, k: int = 10, labels: str = GROUND_TRUTH) -> PatternReport:
    words: Counter = Counter()
    n_tokens = 0
    for _, toks in labeled_tokens(corpus, labels):
        n_tokens += len(toks)
        words.update(t.word for t in toks if t.is_fake)
    phones, oov = phoneme_counts(words, lexicon)
    return PatternReport(
        top_words=rank(words, k),
        top_phonemes=rank(phones, k),
        oov_words=rank(oov, len(oov)),
        k=k,
        labels=labels,
        n_fake_tokens=sum(words.values()),
        n_tokens=n_tokens,
    )


# -- lexical prior -----------------------------------------------------------

@dataclass(frozen=True)
class WordPrior:
    counts: dict[str, int] = field(default_factory=dict)
    total_fake: int = 0
    total_words: int = 0

    def __post_init__(self):
        if sum(self.counts.values()) != self.total_fake or self.total_fake > self.total_words:
            raise PflError("inconsistent word prior counts")

    def to_dict(self) -> dict:
        return {
            "total_fake": self.total_fake,
            "total_words": self.total_words,
            "counts": dict(rank(self.counts, len(self.counts))),
        }

    @classmethod
    def from_dict(cls, obj: dict) -> "WordPrior":
        try:
            return cls({str(w): int(n) for w, n in obj["counts"].items()},
                       int(obj["total_fake"]), int(obj["total_words"]))
        except (KeyError, TypeError, ValueError, AttributeError) as exc:
            raise PflError(f"malformed prior: {exc}") from None


def fit_lexical_prior(train: Corpus) -> WordPrior:
    counts: Counter = Counter()
    total = 0
    for u in train:
        for rw in u.ref:
            total += 1
            if rw.is_fake:
                counts[rw.word] += 1
    if total == 0:
        raise PflError("training corpus has no labeled tokens")
    return WordPrior(dict(counts), sum(counts.values()), total)


def apply_lexical_prior(prior: WordPrior, transcript: Sequence[str], theta: int = 1) -> list[TaggedToken]:
    """Tag a word fake iff it was edited at least *theta* times in training."""
    if theta < 1:
        raise PflError(f"theta must be >= 1, got {theta}")
    return [TaggedToken(w, prior.counts.get(w, 0) >= theta) for w in transcript]


def save_prior(prior: WordPrior, path: str | Path, extra: dict | None = None) -> None:
    obj = dict(extra or {})
    obj.update(prior.to_dict())
    Path(path).write_text(json.dumps(obj, indent=2) + "\n", encoding="utf-8")


def load_prior(path: str | Path) -> WordPrior:
    try:
        obj = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise PflError(f"{path}: malformed JSON ({exc.msg})") from None
    return WordPrior.from_dict(obj)
