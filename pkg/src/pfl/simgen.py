"""Seeded synthetic corpora: polarity-substitution edits, a simulated frame
detector and a simulated ASR.

Every random draw comes from an RNG seeded by a hash of the master seed,
a purpose label and the utterance id, so output does not depend on
generation order or on how work is split across processes.
"""

from __future__ import annotations

import configparser
import dataclasses
import hashlib
import math
import random
from bisect import bisect_right
from dataclasses import dataclass
from pathlib import Path

from .core import (
    Corpus,
    FrameScores,
    PflError,
    RefWord,
    Utterance,
    WordSpan,
    normalize_word,
)


class ConfigError(PflError):
    pass


FILLER_WORDS = (
    "the", "a", "to", "of", "and", "in", "it", "was", "is", "that",
    "we", "they", "you", "this", "on", "with", "for", "my", "our", "people",
    "time", "day", "work", "team", "think", "really", "just", "about", "know", "see",
    "said", "year", "thing", "new", "city", "music", "film", "game", "season", "family",
    "school", "morning", "show", "story", "home", "friends", "going", "little", "first", "back",
)

# Positive -> negative swaps: the dominant edit style of the reference datasets.
POLARITY_PAIRS = (
    ("good", "bad"), ("great", "terrible"), ("like", "dislike"), ("love", "hate"),
    ("interesting", "boring"), ("happy", "disappointed"), ("best", "worst"),
    ("easy", "difficult"), ("accepted", "rejected"), ("won", "lost"),
    ("remember", "ignore"), ("special", "ordinary"),
)

# Named-entity style swaps, disjoint from POLARITY_PAIRS and FILLER_WORDS.
ENTITY_PAIRS = (
    ("london", "paris"), ("monday", "friday"), ("john", "peter"), ("silver", "golden"),
    ("spring", "autumn"), ("blue", "green"), ("doctor", "lawyer"), ("river", "mountain"),
    ("north", "south"), ("coffee", "tea"),
)

PERFECT = math.inf
P_SUB = 0.7
P_DEL = 0.3
BETA_CONCENTRATION = 8.0


@dataclass(frozen=True)
class SimConfig:
    n_utterances: int = 100
    words_per_utt: tuple[int, int] = (6, 14)
    edit_rate: float = 0.3
    edit_vocab: tuple[tuple[str, str], ...] = POLARITY_PAIRS
    detector_quality: float = 2.0
    asr_wer: float = 0.0
    frame_rate_hz: float = 50.0
    word_dur_s: tuple[float, float] = (0.12, 0.6)
    seed: int = 0
    # When set, the detector ignores labels and emits this score everywhere.
    detector_constant: float | None = None
    filler_words: tuple[str, ...] = FILLER_WORDS

    def __post_init__(self):
        lo, hi = self.words_per_utt
        if self.n_utterances < 0 or lo < 1 or hi < lo:
            raise ConfigError(f"bad n_utterances/words_per_utt: {self.n_utterances}, {self.words_per_utt}")
        dlo, dhi = self.word_dur_s
        if not (0 < dlo <= dhi):
            raise ConfigError(f"bad word_dur_s range {self.word_dur_s}")
        for name in ("edit_rate", "asr_wer"):
            v = getattr(self, name)
            if not (0.0 <= v <= 1.0):
                raise ConfigError(f"{name} = {v!r} must be in [0, 1]")
        if self.detector_constant is not None and not (0.0 <= self.detector_constant <= 1.0):
            raise ConfigError(f"detector_constant = {self.detector_constant!r} must be in [0, 1]")
        if not (self.detector_quality >= 0):
            raise ConfigError(f"detector_quality must be >= 0, got {self.detector_quality!r}")
        if not (self.frame_rate_hz > 0) or math.isinf(self.frame_rate_hz):
            raise ConfigError(f"frame_rate_hz must be > 0, got {self.frame_rate_hz!r}")
        if self.edit_rate > 0 and not self.edit_vocab:
            raise ConfigError("edit_rate > 0 requires a non-empty edit_vocab")
        if not self.filler_words and not self.edit_vocab:
            raise ConfigError("base vocabulary is empty")
        for w in self.filler_words:
            if not w or w != normalize_word(w):
                raise ConfigError(f"filler word {w!r} is not normalized")
        sources = [s for s, _ in self.edit_vocab]
        if len(set(sources)) != len(sources):
            raise ConfigError("edit_vocab has a repeated source word")
        for s, r in self.edit_vocab:
            if not s or not r or s != normalize_word(s) or r != normalize_word(r) or s == r:
                raise ConfigError(f"bad edit pair {s!r}>{r!r}")
        # Frames must fit at least one per word.
        if math.floor(dhi * self.frame_rate_hz) < 1:
            raise ConfigError("word_dur_s upper bound is shorter than one frame")

    @property
    def base_vocab(self) -> tuple[str, ...]:
        """Words an utterance is drawn from: fillers plus edit sources."""
        extra = [s for s, _ in self.edit_vocab if s not in self.filler_words]
        return tuple(self.filler_words) + tuple(extra)

    def expected_fake_ratio(self) -> float:
        vocab = self.base_vocab
        sources = {s for s, _ in self.edit_vocab}
        return self.edit_rate * sum(w in sources for w in vocab) / len(vocab)

    def replace(self, **kw) -> "SimConfig":
        return dataclasses.replace(self, **kw)


# -- config file -------------------------------------------------------------

def _parse_range(text: str, conv):
    parts = [p for p in text.replace("..", ",").split(",") if p.strip()]
    if len(parts) == 1:
        v = conv(parts[0])
        return (v, v)
    if len(parts) != 2:
        raise ConfigError(f"bad range {text!r}; expected 'lo,hi'")
    return (conv(parts[0]), conv(parts[1]))


def _parse_vocab(text: str) -> tuple[tuple[str, str], ...]:
    pairs = []
    for item in text.split(","):
        item = item.strip()
        if not item:
            continue
        src, sep, dst = item.partition(">")
        if not sep:
            raise ConfigError(f"bad edit_vocab item {item!r}; expected 'source>replacement'")
        pairs.append((normalize_word(src), normalize_word(dst)))
    return tuple(pairs)


def _parse_words(text: str) -> tuple[str, ...]:
    t = text.strip().lower()
    if t == "default":
        return FILLER_WORDS
    if t == "none":
        return ()
    return tuple(w for w in (normalize_word(x) for x in text.split(",")) if w)


def _parse_quality(text: str) -> float:
    t = text.strip().lower()
    if t in ("inf", "perfect", "infinity"):
        return PERFECT
    return float(t)


_PARSERS = {
    "n_utterances": int,
    "words_per_utt": lambda s: _parse_range(s, int),
    "edit_rate": float,
    "edit_vocab": _parse_vocab,
    "detector_quality": _parse_quality,
    "asr_wer": float,
    "frame_rate_hz": float,
    "word_dur_s": lambda s: _parse_range(s, float),
    "seed": int,
    "detector_constant": lambda s: None if s.strip().lower() in ("", "none") else float(s),
    "filler_words": _parse_words,
}

NAMED_VOCABS = {"polarity": POLARITY_PAIRS, "entity": ENTITY_PAIRS}


def parse_config(text: str, source: str = "<string>") -> SimConfig:
    """Parse flat ``key = value`` text; ``#`` starts a comment.

    ``edit_vocab`` is a ``source>replacement`` comma list, or one of the
    names ``polarity`` / ``entity``.
    """
    cp = configparser.ConfigParser(inline_comment_prefixes=("#",), interpolation=None)
    try:
        cp.read_string("[sim]\n" + text, source=source)
    except configparser.Error as exc:
        raise ConfigError(f"{source}: {exc}") from None
    kwargs = {}
    for key, raw in cp["sim"].items():
        if key not in _PARSERS:
            raise ConfigError(f"{source}: unknown key {key!r}")
        if key == "edit_vocab" and raw.strip() in NAMED_VOCABS:
            kwargs[key] = NAMED_VOCABS[raw.strip()]
            continue
        try:
            kwargs[key] = _PARSERS[key](raw)
        except ValueError as exc:
            raise ConfigError(f"{source}: bad value for {key}: {exc}") from None
    return SimConfig(**kwargs)


def load_config(path: str | Path) -> SimConfig:
    return parse_config(Path(path).read_text(encoding="utf-8"), str(path))


def format_config(cfg: SimConfig) -> str:
    def fmt(key, v):
        if key == "edit_vocab":
            return ",".join(f"{s}>{r}" for s, r in v)
        if key == "filler_words":
            return ",".join(v) if v else "none"
        if isinstance(v, tuple):
            return f"{v[0]!r},{v[1]!r}"
        if v is None:
            return "none"
        if isinstance(v, float) and math.isinf(v):
            return "inf"
        return repr(v)
    return "".join(f"{f.name} = {fmt(f.name, getattr(cfg, f.name))}\n" for f in dataclasses.fields(cfg))


def config_to_dict(cfg: SimConfig) -> dict:
    d = dataclasses.asdict(cfg)
    d["edit_vocab"] = [f"{s}>{r}" for s, r in cfg.edit_vocab]
    d["words_per_utt"] = list(cfg.words_per_utt)
    d["word_dur_s"] = list(cfg.word_dur_s)
    d["filler_words"] = list(cfg.filler_words)
    if math.isinf(cfg.detector_quality):
        d["detector_quality"] = "inf"
    return d


# -- generation ----------------------------------------------------------------

def item_rng(seed: int, purpose: str, uid: str) -> random.Random:
    digest = hashlib.sha256(f"{seed}\x1f{purpose}\x1f{uid}".encode()).digest()
    return random.Random(int.from_bytes(digest[:16], "big"))


def utterance_id(i: int) -> str:
    return f"u{i:05d}"


def _ms(x: float) -> float:
    return round(x, 3)


def generate_utterance(cfg: SimConfig, uid: str) -> Utterance:
    rng = item_rng(cfg.seed, "corpus", uid)
    vocab = cfg.base_vocab
    edits = dict(cfg.edit_vocab)
    n = rng.randint(*cfg.words_per_utt)
    rate = cfg.frame_rate_hz
    # Durations are whole frames so word boundaries never fall on a frame center.
    fmin = max(1, math.ceil(cfg.word_dur_s[0] * rate))
    fmax = max(fmin, math.floor(cfg.word_dur_s[1] * rate))
    frame = 0
    ref = []
    for _ in range(n):
        w = rng.choice(vocab)
        hit = rng.random()
        fake = False
        if w in edits and hit < cfg.edit_rate:
            w, fake = edits[w], True
        k = rng.randint(fmin, fmax)
        span = WordSpan(w, _ms(frame / rate), _ms((frame + k) / rate))
        ref.append(RefWord(span, fake))
        frame += k
    return Utterance(uid, tuple(ref))


def generate_corpus(cfg: SimConfig) -> Corpus:
    utts = tuple(generate_utterance(cfg, utterance_id(i)) for i in range(cfg.n_utterances))
    return Corpus(utts, {"generator": "pfl.simgen", "seed": cfg.seed})


def _score_mean_offset(d: float) -> float:
    return 0.5 * math.tanh(d / 2.0)


def n_frames_for(u: Utterance, rate_hz: float) -> int:
    end = u.ref[-1].span.end_s if u.ref else 0.0
    return max(1, round(end * rate_hz))


def simulate_frames(u: Utterance, cfg: SimConfig) -> FrameScores:
    """Frame posteriors for one utterance given its reference labels.

    Real-word frames draw from Beta with mean ``0.5 - m``, fake-word
    frames from mean ``0.5 + m``, where ``m = tanh(d/2)/2`` grows with
    ``detector_quality`` d. ``d = inf`` emits the labels themselves.
    """
    rate = cfg.frame_rate_hz
    T = n_frames_for(u, rate)
    if cfg.detector_constant is not None:
        return FrameScores(rate, (cfg.detector_constant,) * T)
    starts = [rw.span.start_s for rw in u.ref]
    labels = []
    for t in range(T):
        c = (t + 0.5) / rate
        k = bisect_right(starts, c) - 1
        inside = k >= 0 and c <= u.ref[k].span.end_s
        labels.append(inside and u.ref[k].is_fake)
    if math.isinf(cfg.detector_quality):
        return FrameScores(rate, tuple(1.0 if f else 0.0 for f in labels))
    rng = item_rng(cfg.seed, "detector", u.id)
    m = _score_mean_offset(cfg.detector_quality)
    k = BETA_CONCENTRATION
    lo, hi = 0.5 - m, 0.5 + m
    scores = []
    for f in labels:
        mu = hi if f else lo
        if mu <= 0.0 or mu >= 1.0:
            scores.append(float(f))
            continue
        scores.append(rng.betavariate(mu * k, (1.0 - mu) * k))
    return FrameScores(rate, tuple(scores))


def simulate_detector(corpus: Corpus, cfg: SimConfig) -> dict[str, FrameScores]:
    return {u.id: simulate_frames(u, cfg) for u in corpus}


def simulate_asr_utterance(u: Utterance, cfg: SimConfig) -> Utterance:
    """Corrupt reference words: substitute with ``asr_wer*0.7``, delete
    with ``asr_wer*0.3``. Survivors keep their spans; labels are not
    carried over."""
    rng = item_rng(cfg.seed, "asr", u.id)
    vocab = cfg.base_vocab
    out = []
    for rw in u.ref:
        x = rng.random()
        if x < cfg.asr_wer * P_SUB:
            w = rng.choice(vocab)
            while w == rw.word and len(vocab) > 1:
                w = rng.choice(vocab)
            out.append(RefWord(WordSpan(w, rw.span.start_s, rw.span.end_s), False))
        elif x < cfg.asr_wer:
            continue
        else:
            out.append(RefWord(rw.span, False))
    return Utterance(u.id, tuple(out), None, u.frame_scores)


def simulate_asr(corpus: Corpus, cfg: SimConfig) -> Corpus:
    return Corpus(tuple(simulate_asr_utterance(u, cfg) for u in corpus),
                  {"generator": "pfl.simgen.asr", "seed": cfg.seed})
