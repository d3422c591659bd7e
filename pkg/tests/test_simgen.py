import math

import pytest

from pfl.aggregate import word_scores
from pfl.core import write_corpus
from pfl.scorer import corpus_score
from pfl.simgen import (
    ENTITY_PAIRS,
    POLARITY_PAIRS,
    ConfigError,
    SimConfig,
    format_config,
    generate_corpus,
    parse_config,
    simulate_asr,
    simulate_detector,
)


def n_fake(corpus):
    return sum(rw.is_fake for u in corpus for rw in u.ref)


def test_no_edits_no_fakes():
    assert n_fake(generate_corpus(SimConfig(n_utterances=200, edit_rate=0.0))) == 0


def test_full_edit_rate_all_fake():
    cfg = SimConfig(n_utterances=50, edit_rate=1.0, filler_words=())
    c = generate_corpus(cfg)
    assert all(rw.is_fake for u in c for rw in u.ref)
    assert {rw.word for u in c for rw in u.ref} <= {r for _, r in POLARITY_PAIRS}


def test_deterministic_bytes(tmp_path):
    cfg = SimConfig(n_utterances=40, seed=7)
    write_corpus(generate_corpus(cfg), tmp_path / "a.jsonl")
    write_corpus(generate_corpus(cfg), tmp_path / "b.jsonl")
    assert (tmp_path / "a.jsonl").read_bytes() == (tmp_path / "b.jsonl").read_bytes()
    write_corpus(generate_corpus(cfg.replace(seed=8)), tmp_path / "c.jsonl")
    assert (tmp_path / "a.jsonl").read_bytes() != (tmp_path / "c.jsonl").read_bytes()


def test_utterances_independent_of_corpus_size():
    small = generate_corpus(SimConfig(n_utterances=5, seed=3))
    big = generate_corpus(SimConfig(n_utterances=50, seed=3))
    assert big.utterances[:5] == small.utterances


def test_label_bookkeeping():
    cfg = SimConfig(n_utterances=300, seed=2)
    c = generate_corpus(cfg)
    replacements = {r for _, r in cfg.edit_vocab}
    # replacements only enter through edits; sources only survive unedited
    assert n_fake(c) == sum(rw.word in replacements for u in c for rw in u.ref)
    assert all(rw.is_fake == (rw.word in replacements) for u in c for rw in u.ref)


def test_fake_ratio_statistics():
    cfg = SimConfig(n_utterances=1500, words_per_utt=(8, 8), seed=5)
    c = generate_corpus(cfg)
    n = sum(len(u.ref) for u in c)
    assert n >= 10_000
    assert abs(n_fake(c) / n - cfg.expected_fake_ratio()) <= 0.02


def test_spans_contiguous_whole_frames():
    cfg = SimConfig(n_utterances=20, seed=1, frame_rate_hz=50.0)
    for u in generate_corpus(cfg):
        assert u.ref[0].span.start_s == 0.0
        for a, b in zip(u.ref, u.ref[1:]):
            assert a.span.end_s == b.span.start_s
        for rw in u.ref:
            frames = (rw.span.end_s - rw.span.start_s) * 50
            assert abs(frames - round(frames)) < 1e-6 and round(frames) >= 1


def test_perfect_detector_matches_labels():
    cfg = SimConfig(n_utterances=30, seed=1, detector_quality=math.inf)
    c = generate_corpus(cfg)
    frames = simulate_detector(c, cfg)
    for u in c:
        fs = frames[u.id]
        assert set(fs.scores) <= {0.0, 1.0}
        for rw, ws in zip(u.ref, word_scores(fs, u.spans)):
            assert ws.q == float(rw.is_fake)


def test_detector_separation():
    def means(d):
        cfg = SimConfig(n_utterances=200, seed=3, detector_quality=d)
        c = generate_corpus(cfg)
        fr = simulate_detector(c, cfg)
        real, fake = [], []
        for u in c:
            for rw, ws in zip(u.ref, word_scores(fr[u.id], u.spans)):
                (fake if rw.is_fake else real).append(ws.q)
        return sum(real) / len(real), sum(fake) / len(fake)

    r0, f0 = means(0.0)
    assert abs(r0 - 0.5) < 0.02 and abs(f0 - 0.5) < 0.02
    r1, f1 = means(1.0)
    r3, f3 = means(3.0)
    assert f1 - r1 > 0.3 and f3 - r3 > f1 - r1


def test_detector_deterministic():
    cfg = SimConfig(n_utterances=10, seed=4)
    c = generate_corpus(cfg)
    assert simulate_detector(c, cfg) == simulate_detector(c, cfg)


def test_constant_detector():
    cfg = SimConfig(n_utterances=10, detector_constant=0.0)
    fr = simulate_detector(generate_corpus(cfg), cfg)
    assert all(set(fs.scores) == {0.0} for fs in fr.values())


def test_asr_identity_at_zero():
    cfg = SimConfig(n_utterances=50, asr_wer=0.0)
    c = generate_corpus(cfg)
    hyp = simulate_asr(c, cfg)
    assert [u.words for u in hyp] == [u.words for u in c]
    assert corpus_score([(r.tokens(), h.tokens()) for r, h in zip(c, hyp)]).wer == 0.0


def test_asr_full_corruption():
    cfg = SimConfig(n_utterances=20, asr_wer=1.0)
    c = generate_corpus(cfg)
    hyp = simulate_asr(c, cfg)
    assert corpus_score([(r.tokens(), h.tokens()) for r, h in zip(c, hyp)]).wer > 0


def test_asr_wer_target():
    cfg = SimConfig(n_utterances=1000, words_per_utt=(10, 10), asr_wer=0.1, seed=12)
    c = generate_corpus(cfg)
    hyp = simulate_asr(c, cfg)
    r = corpus_score([(a.tokens(), b.tokens()) for a, b in zip(c, hyp)])
    assert r.n_ref == 10_000
    assert abs(r.wer - 0.1) <= 0.02


def test_config_roundtrip_and_errors():
    cfg = SimConfig(edit_vocab=ENTITY_PAIRS, detector_quality=math.inf, seed=3,
                    detector_constant=0.25, filler_words=("x", "y"))
    assert parse_config(format_config(cfg)) == cfg
    assert parse_config("edit_vocab = entity\nwords_per_utt = 3..5").words_per_utt == (3, 5)
    assert parse_config("detector_quality = perfect").detector_quality == math.inf
    with pytest.raises(ConfigError, match="unknown key"):
        parse_config("colour = red")
    with pytest.raises(ConfigError):
        parse_config("edit_rate = 0.5\nedit_vocab = ")
    with pytest.raises(ConfigError):
        parse_config("edit_rate = 1.5")
    with pytest.raises(ConfigError):
        parse_config("edit_vocab = good-bad")
