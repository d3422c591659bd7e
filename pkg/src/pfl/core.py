"""Domain types, word normalization and corpus file I/O."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Iterator, Sequence

FAKE_TAG = "[fake]"


class PflError(ValueError):
    """Base class for every input/validation error raised by the toolkit."""


class CorpusFormatError(PflError):
    pass


class ValidationError(PflError):
    pass


def normalize_word(raw: str) -> str:
    """Lowercase and strip non-alphanumeric characters from both ends.

    Internal apostrophes and hyphens survive, so ``"Don't,"`` becomes
    ``"don't"``. Punctuation-only input yields ``""``; callers drop such
    tokens.
    """
    s = raw.lower()
    i, j = 0, len(s)
    while i < j and not s[i].isalnum():
        i += 1
    while j > i and not s[j - 1].isalnum():
        j -= 1
    return s[i:j]


def _check_unit(value: float, what: str) -> None:
    if not (0.0 <= value <= 1.0):  # also rejects NaN
        raise ValidationError(f"{what} = {value!r} is outside [0, 1]")


@dataclass(frozen=True)
class WordSpan:
    word: str
    start_s: float
    end_s: float

    def __post_init__(self):
        if not self.word:
            raise ValidationError("word span has an empty word")
        if not (self.start_s >= 0.0):
            raise ValidationError(f"word {self.word!r}: start_s {self.start_s!r} < 0")
        if not (self.start_s <= self.end_s):
            raise ValidationError(
                f"word {self.word!r}: end_s {self.end_s!r} < start_s {self.start_s!r}"
            )


@dataclass(frozen=True)
class FrameScores:
    rate_hz: float
    scores: tuple[float, ...]

    def __post_init__(self):
        if not (self.rate_hz > 0.0) or math.isinf(self.rate_hz):
            raise ValidationError(f"invalid frame rate rate_hz={self.rate_hz!r}")
        if len(self.scores) == 0:
            raise ValidationError("frame score list is empty")
        object.__setattr__(self, "scores", tuple(float(p) for p in self.scores))
        for i, p in enumerate(self.scores):
            if not (0.0 <= p <= 1.0):
                raise ValidationError(f"frame score at index {i} = {p!r} is outside [0, 1]")

    def __len__(self) -> int:
        return len(self.scores)

    @property
    def duration_s(self) -> float:
        return len(self.scores) / self.rate_hz


@dataclass(frozen=True)
class TaggedToken:
    word: str
    is_fake: bool = False

    def __post_init__(self):
        if self.word == FAKE_TAG:
            raise ValidationError(f"token word may not be the literal tag {FAKE_TAG!r}")


@dataclass(frozen=True)
class RefWord:
    """A reference word: its time span plus the ground-truth label."""

    span: WordSpan
    is_fake: bool = False

    @property
    def word(self) -> str:
        return self.span.word

    def token(self) -> TaggedToken:
        return TaggedToken(self.span.word, self.is_fake)


@dataclass(frozen=True)
class Utterance:
    id: str
    ref: tuple[RefWord, ...] = ()
    hyp_text: str | None = None
    # A sidecar path (relative to the corpus file) or inline scores.
    frame_scores: str | FrameScores | None = None

    def __post_init__(self):
        if not self.id:
            raise ValidationError("utterance id is empty")
        object.__setattr__(self, "ref", tuple(self.ref))
        prev = None
        for rw in self.ref:
            if prev is not None:
                if rw.span.start_s < prev.span.start_s:
                    raise ValidationError(f"utterance {self.id!r}: spans not sorted by start_s")
                if rw.span.start_s < prev.span.end_s:
                    raise ValidationError(
                        f"utterance {self.id!r}: span of {rw.word!r} overlaps {prev.word!r}"
                    )
            prev = rw

    @property
    def words(self) -> list[str]:
        return [rw.word for rw in self.ref]

    @property
    def spans(self) -> list[WordSpan]:
        return [rw.span for rw in self.ref]

    def tokens(self) -> list[TaggedToken]:
        return [rw.token() for rw in self.ref]


@dataclass(frozen=True)
class Corpus:
    utterances: tuple[Utterance, ...] = ()
    meta: dict = field(default_factory=dict, compare=True, hash=False)

    def __post_init__(self):
        object.__setattr__(self, "utterances", tuple(self.utterances))
        seen = set()
        for u in self.utterances:
            if u.id in seen:
                raise ValidationError(f"duplicate utterance id {u.id!r}")
            seen.add(u.id)

    def __len__(self) -> int:
        return len(self.utterances)

    def __iter__(self) -> Iterator[Utterance]:
        return iter(self.utterances)

    def by_id(self) -> dict[str, Utterance]:
        return {u.id: u for u in self.utterances}


# -- JSONL (de)serialization -------------------------------------------------

def _parse_ref(uid: str, items) -> list[RefWord]:
    if not isinstance(items, list):
        raise ValidationError(f"utterance {uid!r}: 'ref' must be a list")
    out = []
    for k, item in enumerate(items):
        try:
            raw, s, e = item["w"], float(item["s"]), float(item["e"])
        except (KeyError, TypeError, ValueError) as exc:
            raise ValidationError(f"utterance {uid!r}: bad ref entry {k}: {exc}") from None
        word = normalize_word(str(raw))
        if not word:
            raise ValidationError(f"utterance {uid!r}: ref entry {k} ({raw!r}) is empty after normalization")
        try:
            span = WordSpan(word, s, e)
        except ValidationError as exc:
            raise ValidationError(f"utterance {uid!r}: {exc}") from None
        out.append(RefWord(span, bool(item.get("fake", False))))
    return out


def utterance_from_dict(obj: dict) -> Utterance:
    if not isinstance(obj, dict) or "id" not in obj:
        raise ValidationError("utterance record must be an object with an 'id'")
    uid = str(obj["id"])
    ref = _parse_ref(uid, obj.get("ref", []))
    hyp_text = obj.get("hyp_text")
    fs = obj.get("frame_scores")
    if isinstance(fs, list):
        if "rate_hz" not in obj:
            raise ValidationError(f"utterance {uid!r}: inline frame_scores need 'rate_hz'")
        try:
            fs = FrameScores(float(obj["rate_hz"]), tuple(fs))
        except (ValidationError, TypeError, ValueError) as exc:
            raise ValidationError(f"utterance {uid!r}: {exc}") from None
    elif fs is not None and not isinstance(fs, str):
        raise ValidationError(f"utterance {uid!r}: frame_scores must be a path or a list")
    return Utterance(uid, tuple(ref), hyp_text, fs)


def utterance_to_dict(u: Utterance) -> dict:
    obj: dict = {
        "id": u.id,
        "ref": [
            {"w": rw.word, "s": rw.span.start_s, "e": rw.span.end_s, "fake": rw.is_fake}
            for rw in u.ref
        ],
    }
    if u.hyp_text is not None:
        obj["hyp_text"] = u.hyp_text
    if isinstance(u.frame_scores, FrameScores):
        obj["frame_scores"] = list(u.frame_scores.scores)
        obj["rate_hz"] = u.frame_scores.rate_hz
    elif u.frame_scores is not None:
        obj["frame_scores"] = u.frame_scores
    return obj


def iter_jsonl(path: str | Path) -> Iterator[tuple[int, dict]]:
    """Yield ``(line_number, object)`` for each non-blank line."""
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise CorpusFormatError(f"{path}: line {lineno}: malformed JSON ({exc.msg})") from None
            if not isinstance(obj, dict):
                raise CorpusFormatError(f"{path}: line {lineno}: expected a JSON object")
            yield lineno, obj


def load_corpus(path: str | Path) -> Corpus:
    """Parse and validate a corpus JSONL file.

    An optional first line of the form ``{"meta": {...}}`` (no ``id``)
    carries provenance.
    """
    meta: dict = {}
    utts = []
    seen: set[str] = set()
    for lineno, obj in iter_jsonl(path):
        if "id" not in obj and "meta" in obj:
            if utts:
                raise CorpusFormatError(f"{path}: line {lineno}: meta header must precede utterances")
            meta = dict(obj["meta"])
            continue
        try:
            u = utterance_from_dict(obj)
        except ValidationError as exc:
            raise ValidationError(f"{path}: line {lineno}: {exc}") from None
        if u.id in seen:
            raise ValidationError(f"{path}: line {lineno}: duplicate utterance id {u.id!r}")
        seen.add(u.id)
        utts.append(u)
    return Corpus(tuple(utts), meta)


def dumps_line(obj) -> str:
    return json.dumps(obj, ensure_ascii=False, separators=(", ", ": "))


def write_jsonl(path: str | Path, records: Iterable[dict]) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for rec in records:
            fh.write(dumps_line(rec) + "\n")


def write_corpus(corpus: Corpus, path: str | Path) -> None:
    records: list[dict] = []
    if corpus.meta:
        records.append({"meta": corpus.meta})
    records.extend(utterance_to_dict(u) for u in corpus)
    write_jsonl(path, records)


# -- frame-score sidecars ----------------------------------------------------

def parse_frame_scores(text: str, source: str = "<string>") -> FrameScores:
    head, _, body = text.partition("\n")
    key, sep, value = head.strip().partition("=")
    if key.strip() != "rate_hz" or not sep:
        raise CorpusFormatError(f"{source}: first line must be 'rate_hz=<decimal>'")
    try:
        rate = float(value)
    except ValueError:
        raise CorpusFormatError(f"{source}: bad rate value {value.strip()!r}") from None
    if not (rate > 0.0) or math.isinf(rate):
        raise ValidationError(f"{source}: invalid frame rate rate_hz={rate!r}")
    scores = []
    for i, tok in enumerate(body.split()):
        try:
            p = float(tok)
        except ValueError:
            raise CorpusFormatError(f"{source}: score at index {i} is not a number: {tok!r}") from None
        if not (0.0 <= p <= 1.0):
            raise ValidationError(f"{source}: score at index {i} = {p!r} is outside [0, 1]")
        scores.append(p)
    if not scores:
        raise ValidationError(f"{source}: empty frame score list")
    return FrameScores(rate, tuple(scores))


def load_frame_scores(path: str | Path) -> FrameScores:
    return parse_frame_scores(Path(path).read_text(encoding="utf-8"), str(path))


def format_frame_scores(fs: FrameScores, per_line: int = 25) -> str:
    lines = [f"rate_hz={fs.rate_hz!r}"]
    vals = [repr(p) for p in fs.scores]
    for i in range(0, len(vals), per_line):
        lines.append(" ".join(vals[i:i + per_line]))
    return "\n".join(lines) + "\n"


def write_frame_scores(fs: FrameScores, path: str | Path) -> None:
    Path(path).write_text(format_frame_scores(fs), encoding="utf-8")


def resolve_frame_scores(u: Utterance, base_dir: str | Path | None = None) -> FrameScores | None:
    """Return the utterance's scores, reading the sidecar relative to *base_dir*."""
    if u.frame_scores is None or isinstance(u.frame_scores, FrameScores):
        return u.frame_scores
    p = Path(u.frame_scores)
    if not p.is_absolute() and base_dir is not None:
        p = Path(base_dir) / p
    if not p.exists():
        raise ValidationError(f"utterance {u.id!r}: frame score file not found: {p}")
    return load_frame_scores(p)


def tokens_from_words(words: Sequence[str]) -> list[TaggedToken]:
    return [TaggedToken(w, False) for w in words]
