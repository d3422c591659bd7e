"""Word-level fake-word localization toolkit for partially fake speech."""

__version__ = "0.1.0"

from .aggregate import AggPolicy, WordScore, decide, frames_in_span, localize, word_scores
from .core import (
    Corpus,
    CorpusFormatError,
    FrameScores,
    PflError,
    RefWord,
    TaggedToken,
    Utterance,
    ValidationError,
    WordSpan,
    load_corpus,
    load_frame_scores,
    normalize_word,
    write_corpus,
    write_frame_scores,
)
from .patterns import (
    PatternReport,
    WordPrior,
    analyze,
    apply_lexical_prior,
    fit_lexical_prior,
    load_lexicon,
    top_fake_phonemes,
    top_fake_words,
)
from .scorer import AlignmentOp, ScoreReport, align, corpus_score, wer, word_f1
from .simgen import SimConfig, generate_corpus, simulate_asr, simulate_detector
from .tagcodec import TagConfig, decode, encode
