"""``pfl`` command line entry point.

Exit codes: 0 success, 1 validation/input error, 2 usage error.
"""

from __future__ import annotations

import argparse
import datetime as _dt
import hashlib
import json
import sys
from concurrent.futures import ProcessPoolExecutor
from functools import partial
from importlib import resources
from pathlib import Path
from typing import Callable, Iterable, Sequence

from . import __version__
from .aggregate import DEFAULT_THRESHOLD, AggPolicy, localize
from .core import (
    Corpus,
    PflError,
    TaggedToken,
    Utterance,
    ValidationError,
    iter_jsonl,
    load_corpus,
    normalize_word,
    resolve_frame_scores,
    write_corpus,
    write_frame_scores,
    write_jsonl,
)
from .patterns import (
    GROUND_TRUTH,
    LABEL_SOURCES,
    PREDICTED,
    analyze,
    apply_lexical_prior,
    bundled_lexicon,
    fit_lexical_prior,
    load_lexicon,
    load_prior,
    save_prior,
)
from .scorer import INSERT, align, corpus_score, pair_counts
from .simgen import (
    SimConfig,
    config_to_dict,
    generate_utterance,
    load_config,
    simulate_asr_utterance,
    simulate_frames,
    utterance_id,
)
from .tagcodec import TagConfig, decode, encode, warning_counts

BUNDLED_LEXICON = "bundled:mini_lexicon"


# -- helpers -----------------------------------------------------------------

def _pmap(fn: Callable, items: Sequence, jobs: int) -> list:
    if jobs <= 1 or len(items) < 2:
        return [fn(x) for x in items]
    chunk = max(1, len(items) // (jobs * 4))
    with ProcessPoolExecutor(max_workers=jobs) as ex:
        return list(ex.map(fn, items, chunksize=chunk))


def file_digest(path: str | Path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for block in iter(lambda: fh.read(1 << 16), b""):
            h.update(block)
    return "sha256:" + h.hexdigest()


def _lexicon_digest(spec: str) -> str:
    if spec == BUNDLED_LEXICON:
        data = resources.files("pfl").joinpath("data/mini_lexicon.txt").read_bytes()
        return "sha256:" + hashlib.sha256(data).hexdigest()
    return file_digest(spec)


def run_manifest(subcommand: str, config: dict, inputs: dict[str, str],
                 seed: int | None, timestamp: bool) -> dict:
    m = {
        "tool": "pfl",
        "version": __version__,
        "subcommand": subcommand,
        "config": config,
        "inputs": inputs,
        "seed": seed,
    }
    if timestamp:
        m["timestamp"] = _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds")
    return m


def dump_report(obj: dict, path: str | Path) -> None:
    Path(path).write_text(json.dumps(obj, indent=2, ensure_ascii=False) + "\n", encoding="utf-8")


def _require_file(path: str | Path) -> Path:
    p = Path(path)
    if not p.is_file():
        raise ValidationError(f"input file not found: {p}")
    return p


def _tag_cfg(args) -> TagConfig:
    return TagConfig(args.tag, not getattr(args, "case_sensitive", False))


def tokens_from_json(items, where: str) -> list[TaggedToken]:
    if not isinstance(items, list):
        raise ValidationError(f"{where}: 'tokens' must be a list")
    toks = []
    for k, t in enumerate(items):
        if not isinstance(t, dict) or "w" not in t:
            raise ValidationError(f"{where}: token {k} needs a 'w' field")
        w = normalize_word(str(t["w"]))
        if w:
            toks.append(TaggedToken(w, bool(t.get("fake", False))))
    return toks


def load_hypotheses(path: str | Path, tag_cfg: TagConfig = TagConfig()) -> dict[str, tuple[list[TaggedToken], dict]]:
    """Read hypothesis lines keyed by id.

    A line supplies ``tokens`` (list of ``{"w", "fake"}``) or ``hyp_text``
    in the tag convention; ``tokens`` wins when both are present.
    """
    out: dict[str, tuple[list[TaggedToken], dict]] = {}
    for lineno, obj in iter_jsonl(path):
        if "id" not in obj:
            if "meta" in obj:
                continue
            raise ValidationError(f"{path}: line {lineno}: missing 'id'")
        uid = str(obj["id"])
        if uid in out:
            raise ValidationError(f"{path}: line {lineno}: duplicate id {uid!r}")
        if "tokens" in obj:
            toks = tokens_from_json(obj["tokens"], f"{path}: line {lineno}")
            out[uid] = (toks, warning_counts([]))
        elif obj.get("hyp_text") is not None:
            toks, warns = decode(str(obj["hyp_text"]), tag_cfg)
            out[uid] = (toks, warning_counts(warns))
        else:
            raise ValidationError(f"{path}: line {lineno}: need 'tokens' or 'hyp_text'")
    return out


# -- stage functions (shared by subcommands and the pipeline) ------------------

def _aggregate_one(u, base_dir, policy, threshold, tag_cfg):
    fs = resolve_frame_scores(u, base_dir)
    if fs is None:
        raise ValidationError(f"utterance {u.id!r} has no frame scores")
    ws, toks = localize(fs, u.spans, policy, threshold)
    return {
        "id": u.id,
        "tokens": [{"w": s.word, "q": s.q, "fake": t.is_fake} for s, t in zip(ws, toks)],
        "hyp_text": encode(toks, tag_cfg),
    }


def aggregate_corpus(corpus: Corpus, base_dir, policy: str, threshold: float,
                     jobs: int = 1, tag_cfg: TagConfig = TagConfig()) -> list[dict]:
    fn = partial(_aggregate_one, base_dir=base_dir, policy=AggPolicy(policy),
                 threshold=threshold, tag_cfg=tag_cfg)
    return _pmap(fn, list(corpus), jobs)


def score_files(ref_path, hyp_path, tag_cfg: TagConfig = TagConfig()) -> dict:
    ref = load_corpus(_require_file(ref_path))
    hyps = load_hypotheses(_require_file(hyp_path), tag_cfg)
    per_utt = []
    pairs = []
    missing = []
    for u in ref:
        if u.id in hyps:
            hyp_toks, warns = hyps[u.id]
        else:
            hyp_toks, warns = [], warning_counts([])
            missing.append(u.id)
        ref_toks = u.tokens()
        pairs.append((ref_toks, hyp_toks))
        rec = {"id": u.id}
        rec.update(pair_counts(ref_toks, hyp_toks).report().to_dict())
        rec["tag_warnings"] = warns
        per_utt.append(rec)
    if not pairs:
        raise ValidationError(f"{ref_path}: reference corpus is empty")
    ref_ids = {u.id for u in ref}
    summary = corpus_score(pairs).to_dict()
    summary["tag_warnings"] = {
        k: sum(r["tag_warnings"][k] for r in per_utt) for k in warning_counts([])
    }
    return {
        "summary": summary,
        "missing_hyp": missing,
        "unmatched_hyp": sorted(set(hyps) - ref_ids),
        "utterances": per_utt,
    }


def _lexicon(spec: str | None):
    if spec is None or spec == BUNDLED_LEXICON:
        return BUNDLED_LEXICON, bundled_lexicon()
    return spec, load_lexicon(_require_file(spec))


def _simulate_one(i: int, cfg: SimConfig):
    u = generate_utterance(cfg, utterance_id(i))
    fs = simulate_frames(u, cfg)
    sidecar = f"scores/{u.id}.txt"
    u = Utterance(u.id, u.ref, None, sidecar)
    asr = simulate_asr_utterance(u, cfg)
    return u, asr, fs


def simulate_to_dir(cfg: SimConfig, out_dir: str | Path, jobs: int = 1) -> dict:
    out = Path(out_dir)
    (out / "scores").mkdir(parents=True, exist_ok=True)
    results = _pmap(partial(_simulate_one, cfg=cfg), list(range(cfg.n_utterances)), jobs)
    meta = {"generator": "pfl.simulate", "seed": cfg.seed}
    corpus = Corpus(tuple(r[0] for r in results), meta)
    asr = Corpus(tuple(r[1] for r in results), dict(meta, view="asr"))
    for u, _, fs in results:
        write_frame_scores(fs, out / u.frame_scores)
    write_corpus(corpus, out / "corpus.jsonl")
    write_corpus(asr, out / "asr.jsonl")
    n_tok = sum(len(u.ref) for u in corpus)
    n_fake = sum(rw.is_fake for u in corpus for rw in u.ref)
    asr_counts = [pair_counts(u.tokens(), a.tokens()) for u, a in zip(corpus, asr)]
    n_err = sum(c.n_sub + c.n_ins + c.n_del for c in asr_counts)
    return {
        "config": config_to_dict(cfg),
        "n_utterances": len(corpus),
        "n_tokens": n_tok,
        "n_fake_tokens": n_fake,
        "fake_ratio": n_fake / n_tok if n_tok else 0.0,
        "expected_fake_ratio": cfg.expected_fake_ratio(),
        "asr_wer": n_err / n_tok if n_tok else None,
        "files": {"corpus": "corpus.jsonl", "asr": "asr.jsonl", "scores": "scores/"},
    }


def _resolve_sim_config(args) -> SimConfig:
    cfg = load_config(_require_file(args.config))
    if args.seed is not None:
        cfg = cfg.replace(seed=args.seed)
    return cfg


def _analyze_report(corpus, lexicon, k, labels, figures, stem) -> dict:
    rep = analyze(corpus, lexicon, k, labels)
    if figures:
        from .plotting import plot_pattern_report

        Path(figures).mkdir(parents=True, exist_ok=True)
        p = plot_pattern_report(rep, Path(figures) / f"{stem}_{labels}.png")
        print(f"figure: {p}", file=sys.stderr)
    return rep.to_dict()


def _labeled_scores(ref: Corpus, tagged: Iterable[dict]):
    """Pair each aligned hypothesis word score with its reference label."""
    by_id = {rec["id"]: rec for rec in tagged}
    real_q, fake_q = [], []
    for u in ref:
        toks = by_id.get(u.id, {"tokens": []})["tokens"]
        for op in align(u.words, [t["w"] for t in toks]):
            if op.kind == INSERT or op.hyp_index is None:
                continue
            (fake_q if u.ref[op.ref_index].is_fake else real_q).append(toks[op.hyp_index]["q"])
    return real_q, fake_q


# -- subcommands -------------------------------------------------------------

def cmd_aggregate(args) -> int:
    path = _require_file(args.corpus)
    corpus = load_corpus(path)
    recs = aggregate_corpus(corpus, path.parent, args.policy, args.threshold, args.jobs, _tag_cfg(args))
    write_jsonl(args.out, recs)
    return 0


def cmd_tag(args) -> int:
    cfg = _tag_cfg(args)
    src = _require_file(args.inp)
    if args.action == "encode":
        recs = []
        for lineno, obj in iter_jsonl(src):
            toks = tokens_from_json(obj.get("tokens", []), f"{src}: line {lineno}")
            recs.append({"id": obj.get("id"), "hyp_text": encode(toks, cfg)})
        write_jsonl(args.out, recs)
        return 0
    recs = []
    total = warning_counts([])
    with open(src, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            uid, text = str(lineno), line
            if line.lstrip().startswith("{"):
                try:
                    obj = json.loads(line)
                except json.JSONDecodeError as exc:
                    raise ValidationError(f"{src}: line {lineno}: malformed JSON ({exc.msg})") from None
                uid, text = str(obj.get("id", lineno)), str(obj.get("hyp_text", ""))
            toks, warns = decode(text, cfg)
            counts = warning_counts(warns)
            for k, v in counts.items():
                total[k] += v
            recs.append({"id": uid, "tokens": [{"w": t.word, "fake": t.is_fake} for t in toks],
                         "warnings": counts})
    write_jsonl(args.out, recs)
    print("tag warnings: " + ", ".join(f"{k}={v}" for k, v in total.items()), file=sys.stderr)
    return 0


def cmd_score(args) -> int:
    body = score_files(args.ref, args.hyp, _tag_cfg(args))
    manifest = run_manifest(
        "score", {"tag": args.tag, "case_sensitive": args.case_sensitive},
        {str(args.ref): file_digest(args.ref), str(args.hyp): file_digest(args.hyp)},
        None, not args.no_timestamp,
    )
    dump_report({"manifest": manifest, **body}, args.report)
    s = body["summary"]
    print(f"WER={s['wer']:.4f} WordF1={s['word_f1']:.4f} P={s['precision']:.4f} R={s['recall']:.4f}",
          file=sys.stderr)
    return 0


def cmd_analyze(args) -> int:
    path = _require_file(args.corpus)
    corpus = load_corpus(path)
    lex_name, lex = _lexicon(args.lexicon)
    body = _analyze_report(corpus, lex, args.top, args.labels, args.figures, Path(args.report).stem)
    manifest = run_manifest(
        "analyze", {"labels": args.labels, "top": args.top, "lexicon": lex_name},
        {str(path): file_digest(path), lex_name: _lexicon_digest(lex_name)},
        None, not args.no_timestamp,
    )
    dump_report({"manifest": manifest, **body}, args.report)
    return 0


def cmd_prior(args) -> int:
    if args.action == "fit":
        path = _require_file(args.train)
        prior = fit_lexical_prior(load_corpus(path))
        manifest = run_manifest("prior fit", {}, {str(path): file_digest(path)}, None,
                                not args.no_timestamp)
        save_prior(prior, args.out, {"manifest": manifest})
        return 0
    prior = load_prior(_require_file(args.prior))
    corpus = load_corpus(_require_file(args.corpus))
    cfg = _tag_cfg(args)
    recs = []
    for u in corpus:
        toks = apply_lexical_prior(prior, u.words, args.theta)
        recs.append({"id": u.id, "tokens": [{"w": t.word, "fake": t.is_fake} for t in toks],
                     "hyp_text": encode(toks, cfg)})
    write_jsonl(args.out, recs)
    return 0


def cmd_simulate(args) -> int:
    cfg = _resolve_sim_config(args)
    summary = simulate_to_dir(cfg, args.out_dir, args.jobs)
    manifest = run_manifest("simulate", config_to_dict(cfg),
                            {str(args.config): file_digest(args.config)}, cfg.seed,
                            not args.no_timestamp)
    dump_report({"manifest": manifest, **summary}, Path(args.out_dir) / "simulate.json")
    return 0


def run_pipeline(cfg: SimConfig, work: Path, policy: str, threshold: float, top: int,
                 lexicon_spec: str | None, jobs: int = 1, figures: str | None = None) -> dict:
    """simulate -> aggregate -> score -> analyze, writing the same files the
    individual subcommands would."""
    work.mkdir(parents=True, exist_ok=True)
    sim = simulate_to_dir(cfg, work, jobs)
    asr = load_corpus(work / "asr.jsonl")
    tagged = aggregate_corpus(asr, work, policy, threshold, jobs)
    write_jsonl(work / "tagged.jsonl", tagged)
    scored = score_files(work / "corpus.jsonl", work / "tagged.jsonl")
    lex_name, lex = _lexicon(lexicon_spec)
    ref = load_corpus(work / "corpus.jsonl")
    pred = load_corpus(work / "tagged.jsonl")
    analyses = {
        GROUND_TRUTH: _analyze_report(ref, lex, top, GROUND_TRUTH, figures, "patterns"),
        PREDICTED: _analyze_report(pred, lex, top, PREDICTED, figures, "patterns"),
    }
    if figures:
        from .plotting import plot_word_score_hist

        real_q, fake_q = _labeled_scores(ref, tagged)
        p = plot_word_score_hist(real_q, fake_q, threshold, Path(figures) / "word_scores.png")
        print(f"figure: {p}", file=sys.stderr)
    return {"lexicon": lex_name, "simulate": sim, "score": scored, "analyze": analyses}


def cmd_pipeline(args) -> int:
    cfg = _resolve_sim_config(args)
    report = Path(args.report)
    work = Path(args.work_dir) if args.work_dir else report.with_name(report.stem + "_work")
    body = run_pipeline(cfg, work, args.policy, args.threshold, args.top, args.lexicon,
                        args.jobs, args.figures)
    lex_name = body.pop("lexicon")
    manifest = run_manifest(
        "pipeline",
        {"sim": config_to_dict(cfg), "policy": args.policy, "threshold": args.threshold,
         "top": args.top, "lexicon": lex_name},
        {str(args.config): file_digest(args.config), lex_name: _lexicon_digest(lex_name)},
        cfg.seed, not args.no_timestamp,
    )
    dump_report({"manifest": manifest, **body}, report)
    s = body["score"]["summary"]
    print(f"WER={s['wer']:.4f} WordF1={s['word_f1']:.4f}", file=sys.stderr)
    return 0


# -- argument parsing --------------------------------------------------------

def _unit_float(text: str) -> float:
    v = float(text)
    if not 0.0 <= v <= 1.0:
        raise argparse.ArgumentTypeError(f"{text} is outside [0, 1]")
    return v


def _positive_int(text: str) -> int:
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError(f"{text} must be >= 1")
    return v


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="pfl", description="Word-level fake localization toolkit.")
    p.add_argument("--version", action="version", version=f"pfl {__version__}")
    sub = p.add_subparsers(dest="command", required=True, metavar="COMMAND")

    def add_tag(sp):
        sp.add_argument("--tag", default="[fake]", help="fake marker token (default: [fake])")
        sp.add_argument("--case-sensitive", action="store_true", help="match the tag case-sensitively")

    def add_ts(sp):
        sp.add_argument("--no-timestamp", action="store_true", help="omit the timestamp from the manifest")

    def add_jobs(sp):
        sp.add_argument("--jobs", type=_positive_int, default=1, help="worker processes")

    def add_agg(sp):
        sp.add_argument("--policy", choices=[x.value for x in AggPolicy], default="mean")
        sp.add_argument("--threshold", type=_unit_float, default=DEFAULT_THRESHOLD,
                        help="word is fake when its score >= threshold")

    sp = sub.add_parser("aggregate", help="frame scores + word spans -> tagged words")
    sp.add_argument("--corpus", required=True)
    sp.add_argument("--out", required=True)
    add_agg(sp)
    add_tag(sp)
    add_jobs(sp)
    sp.set_defaults(func=cmd_aggregate)

    sp = sub.add_parser("tag", help="encode/decode [fake]-tagged text")
    sp.add_argument("action", choices=["encode", "decode"])
    sp.add_argument("--in", dest="inp", required=True)
    sp.add_argument("--out", required=True)
    add_tag(sp)
    sp.set_defaults(func=cmd_tag)

    sp = sub.add_parser("score", help="WER and WordF1 of hypotheses against a reference corpus")
    sp.add_argument("--ref", required=True)
    sp.add_argument("--hyp", required=True)
    sp.add_argument("--report", required=True)
    add_tag(sp)
    add_ts(sp)
    sp.set_defaults(func=cmd_score)

    sp = sub.add_parser("analyze", help="top fake words and phonemes")
    sp.add_argument("--corpus", required=True)
    sp.add_argument("--labels", choices=LABEL_SOURCES, default=GROUND_TRUTH)
    sp.add_argument("--lexicon", default=None, help="CMUdict-style file (default: bundled mini lexicon)")
    sp.add_argument("--top", type=int, default=10)
    sp.add_argument("--report", required=True)
    sp.add_argument("--figures", default=None, help="directory for PNG bar charts")
    add_ts(sp)
    sp.set_defaults(func=cmd_analyze)

    sp = sub.add_parser("prior", help="fit/apply the lexical-prior localizer")
    psub = sp.add_subparsers(dest="action", required=True, metavar="ACTION")
    fit = psub.add_parser("fit")
    fit.add_argument("--train", required=True)
    fit.add_argument("--out", required=True)
    add_ts(fit)
    fit.set_defaults(func=cmd_prior)
    app = psub.add_parser("apply")
    app.add_argument("--prior", required=True)
    app.add_argument("--corpus", required=True)
    app.add_argument("--theta", type=_positive_int, default=1)
    app.add_argument("--out", required=True)
    add_tag(app)
    app.set_defaults(func=cmd_prior)

    sp = sub.add_parser("simulate", help="write a synthetic corpus, ASR view and frame scores")
    sp.add_argument("--config", required=True)
    sp.add_argument("--seed", type=int, default=None, help="overrides the config seed")
    sp.add_argument("--out-dir", required=True)
    add_jobs(sp)
    add_ts(sp)
    sp.set_defaults(func=cmd_simulate)

    sp = sub.add_parser("pipeline", help="simulate -> aggregate -> score -> analyze")
    sp.add_argument("--config", required=True)
    sp.add_argument("--seed", type=int, default=None)
    sp.add_argument("--report", required=True)
    sp.add_argument("--work-dir", default=None, help="default: <report stem>_work next to the report")
    sp.add_argument("--lexicon", default=None)
    sp.add_argument("--top", type=int, default=10)
    sp.add_argument("--figures", default=None, help="directory for PNG figures")
    add_agg(sp)
    add_jobs(sp)
    add_ts(sp)
    sp.set_defaults(func=cmd_pipeline)
    return p


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except (PflError, OSError) as exc:
        print(f"pfl: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
