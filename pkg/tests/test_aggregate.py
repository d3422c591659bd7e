import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import brute_frames, brute_mean_scores
from pfl.aggregate import AggPolicy, WordScore, decide, frames_in_span, word_scores
from pfl.core import FrameScores, WordSpan


def test_frames_in_span_enumerated():
    # centers 0.01, 0.03, 0.05, 0.07, 0.09 s lie in [0, 0.1]; 0.11 does not
    assert set(frames_in_span(WordSpan("w", 0.0, 0.10), 50.0, 100)) == {0, 1, 2, 3, 4}
    assert set(brute_frames(WordSpan("w", 0.0, 0.10), 50.0, 100)) == {0, 1, 2, 3, 4}


def test_frames_in_span_zero_length_fallback():
    assert set(frames_in_span(WordSpan("w", 0.0, 0.0), 50.0, 100)) == {0}


def test_frames_in_span_past_end_clips():
    # 100 frames at 50 Hz cover 2 s; every center of the span is beyond them
    assert set(frames_in_span(WordSpan("w", 9.99, 10.50), 50.0, 100)) == {99}
    assert set(brute_frames(WordSpan("w", 9.99, 10.50), 50.0, 100)) == {99}


def test_frames_in_span_boundary_center_inclusive():
    # center of frame 2 is exactly 0.05 at 50 Hz
    assert 2 in frames_in_span(WordSpan("w", 0.05, 0.06), 50.0, 10)
    assert 2 in frames_in_span(WordSpan("w", 0.04, 0.05), 50.0, 10)


def test_word_scores_constant():
    fs = FrameScores(50.0, (0.5,) * 40)
    spans = [WordSpan("a", 0.0, 0.13), WordSpan("b", 0.13, 0.8)]
    for policy in AggPolicy:
        assert [ws.q for ws in word_scores(fs, spans, policy)] == [0.5, 0.5]


def test_word_scores_mean_max_median():
    # frames 1..3 (centers 0.03, 0.05, 0.07) hold 0.2, 0.4, 0.6
    fs = FrameScores(50.0, (0.0, 0.2, 0.4, 0.6, 1.0))
    span = [WordSpan("w", 0.02, 0.08)]
    assert word_scores(fs, span, "mean")[0].q == pytest.approx(0.4, abs=1e-15)
    assert word_scores(fs, span, "max")[0] == WordScore("w", 0.6, 3)
    assert word_scores(fs, span, "median")[0].q == 0.4


@pytest.mark.parametrize(
    "qs, tau, expected",
    [([0.9, 0.1], 0.5, [True, False]),
     ([0.5], 0.5, [True]),
     ([0.2, 0.99, 0.0], 1.0, [False, False, False])],
)
def test_decide(qs, tau, expected):
    scores = [WordScore(f"w{i}", q, 1) for i, q in enumerate(qs)]
    toks = decide(scores, tau)
    assert [t.is_fake for t in toks] == expected
    assert [t.word for t in toks] == [s.word for s in scores]


def test_decide_rejects_bad_threshold():
    with pytest.raises(ValueError):
        decide([], 1.5)


@st.composite
def frames_and_spans(draw):
    rate = draw(st.sampled_from([16.0, 25.0, 50.0, 100.0, 62.5]))
    n = draw(st.integers(1, 200))
    scores = draw(st.lists(st.floats(0, 1), min_size=n, max_size=n))
    cuts = sorted(draw(st.lists(st.floats(0, n / rate * 1.2), min_size=0, max_size=20)))
    spans = []
    for i in range(0, len(cuts) - 1, 2):
        spans.append(WordSpan(f"w{i}", cuts[i], cuts[i + 1]))
    return FrameScores(rate, tuple(scores)), spans


@settings(max_examples=300)
@given(frames_and_spans())
def test_mean_matches_brute_force(data):
    fs, spans = data
    got = [ws.q for ws in word_scores(fs, spans, "mean")]
    want = brute_mean_scores(fs.scores, fs.rate_hz, spans)
    assert got == pytest.approx(want, abs=1e-12, rel=0)
    for sp, ws in zip(spans, word_scores(fs, spans, "mean")):
        idx = brute_frames(sp, fs.rate_hz, len(fs))
        assert set(frames_in_span(sp, fs.rate_hz, len(fs))) == set(idx)
        vals = [fs.scores[t] for t in idx]
        assert min(vals) <= ws.q <= max(vals)
        assert ws.n_frames == len(idx)


@given(frames_and_spans(), st.sampled_from(list(AggPolicy)))
def test_score_within_frame_range(data, policy):
    fs, spans = data
    for sp, ws in zip(spans, word_scores(fs, spans, policy)):
        idx = frames_in_span(sp, fs.rate_hz, len(fs))
        vals = fs.scores[idx.start:idx.stop]
        assert min(vals) <= ws.q <= max(vals)


def test_mean_permutation_invariant():
    rng = random.Random(5)
    for _ in range(200):
        vals = [rng.random() for _ in range(rng.randint(1, 30))]
        span = WordSpan("w", 0.0, (len(vals) - 0.5) / 50.0)
        a = word_scores(FrameScores(50.0, tuple(vals)), [span])[0].q
        rng.shuffle(vals)
        b = word_scores(FrameScores(50.0, tuple(vals)), [span])[0].q
        assert a == pytest.approx(b, abs=1e-15)


@given(st.lists(st.floats(0, 1), max_size=30), st.floats(0, 1), st.floats(0, 1))
def test_threshold_monotone(qs, t1, t2):
    lo, hi = min(t1, t2), max(t1, t2)
    scores = [WordScore("w", q, 1) for q in qs]
    assert sum(t.is_fake for t in decide(scores, lo)) >= sum(t.is_fake for t in decide(scores, hi))
