"""Command-line entry point: ``voxlate <command> ...``.

Exit codes are 0 on success, 1 on a fatal error and 2 when some clips of an
``analyze`` run failed.
"""
import argparse
import csv
import json
import logging
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

from . import __version__
from .audio import load_manifest, load_wav, resolve
from .behavior import AnalysisConfig, analyze_session, cohort_summary
from .config import load_config
from .corpus import (build_dataset, corpus_stats, generate_synthetic, load_parallel, save_parallel,
                     split, subset_corpus)
from .errors import VoxlateError
from .evaluation import bleu_from_text, compare_models, evaluate_model
from .models import (TrainConfig, build_model, load_checkpoint, logits_to_text, make_source_ids,
                     save_checkpoint, spec_for_dataset, train, vocabularies_from_header)
from .sentiment import (FileTranscriptProvider, SentimentConfig, classify_sentiment, default_lexicon,
                        load_lexicon, polarity_scores)

log = logging.getLogger("voxlate")

EXIT_OK, EXIT_FATAL, EXIT_PARTIAL = 0, 1, 2


def _write_json(path, obj):
    Path(path).write_text(json.dumps(obj, ensure_ascii=False, indent=1, sort_keys=True) + "\n", encoding="utf-8")


def _write_csv(path, header, rows):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)


def _write_metadata(out_dir, cfg, command, extra=None):
    meta = {"command": command, "config_hash": cfg.hash(), "seed": cfg.seed,
            "version": __version__, "config": json.loads(cfg.to_json())}
    meta.update(extra or {})
    _write_json(Path(out_dir) / "run_metadata.json", meta)


def _sentiment_config(cfg):
    s = cfg.sentiment
    return SentimentConfig(alpha=s.alpha, caps_increment=s.caps_increment,
                           negation_scalar=s.negation_scalar, exclamation_increment=s.exclamation_increment)


def _lexicon(cfg):
    return load_lexicon(cfg.sentiment.lexicon) if cfg.sentiment.lexicon else default_lexicon()


# ---------------------------------------------------------------------------
# analyze


def cmd_analyze(args, cfg):
    try:
        records = load_manifest(args.manifest)
    except (VoxlateError, OSError) as exc:
        log.error("unusable manifest: %s", exc)
        return EXIT_FATAL
    if not records:
        log.error("manifest %s lists no clips", args.manifest)
        return EXIT_FATAL
    a = cfg.acoustics
    acfg = AnalysisConfig(a.trim_seconds, a.frame_size, a.hop, a.p_ref, _sentiment_config(cfg))
    lexicon = _lexicon(cfg)
    provider = FileTranscriptProvider(args.transcripts_dir)
    out = Path(args.out)
    (out / "clips").mkdir(parents=True, exist_ok=True)

    def run(record):
        try:
            clip = load_wav(resolve(record.audio_path, args.audio_dir))
            return analyze_session(record, clip, provider(record), acfg, lexicon), None
        except (VoxlateError, OSError) as exc:
            return None, f"{record.clip_id}: {exc}"

    ordered = sorted(records, key=lambda r: r.clip_id)
    with ThreadPoolExecutor(max_workers=max(1, args.jobs)) as pool:
        results = list(pool.map(run, ordered))
    analyses = [r for r, _ in results if r is not None]
    failures = [e for _, e in results if e is not None]

    for an in analyses:
        rec = an.as_dict()
        rec["frame_db"] = [float(v) for v in an.intensity.frame_db]
        _write_json(out / "clips" / f"{an.record.clip_id}.json", rec)
    summary = {"n_clips": len(records), "n_analyzed": len(analyses), "failures": failures}
    if analyses:
        by_gender = cohort_summary(analyses, "gender")
        by_sentence = cohort_summary(analyses, "sentence_id")
        _write_csv(out / "intensity.csv", ["clip_id", "gender", "sentence_id", "mean_db", "intensity_class"],
                   [[x.record.clip_id, x.record.speaker_gender, x.record.sentence_id or "",
                     repr(x.intensity.mean_db), x.intensity_class.name] for x in analyses])
        _write_csv(out / "sentiment_classes.csv", ["class", "count"],
                   [[c.name, n] for c, n in by_gender.per_class_counts.items()])
        _write_csv(out / "positive_vs_intensity.csv", ["clip_id", "pos_pct", "intensity_pct"],
                   [[cid, repr(p), repr(i)] for cid, p, i in by_gender.pairs])
        _write_csv(out / "group_means.csv", ["group_by", "group", "mean_db"],
                   [["gender", k, repr(v)] for k, v in by_gender.group_means.items()]
                   + [["sentence_id", k, repr(v)] for k, v in by_sentence.group_means.items()])
        summary.update({
            "pearson_r_positive": by_gender.pearson_r,
            "group_means_db": {"gender": by_gender.group_means,
                               "sentence_id": {str(k): v for k, v in by_sentence.group_means.items()}},
        })
    _write_json(out / "summary.json", summary)
    _write_metadata(out, cfg, "analyze")
    for f in failures:
        log.warning("failed: %s", f)
    if not analyses:
        return EXIT_FATAL
    return EXIT_PARTIAL if failures else EXIT_OK


# ---------------------------------------------------------------------------
# corpus


def cmd_corpus(args, cfg):
    if args.corpus_cmd == "synth":
        corpus = generate_synthetic(args.pairs, args.vocab_src, args.vocab_tgt, args.max_len, cfg.seed)
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        save_parallel(corpus, out / "src.txt", out / "tgt.txt")
        _write_metadata(out, cfg, "corpus synth", {"pairs": args.pairs})
        return EXIT_OK
    corpus = load_parallel(args.src, args.tgt)
    if args.corpus_cmd == "stats":
        stats, top_src, top_tgt = corpus_stats(corpus, args.top)
        print(json.dumps({"stats": stats.__dict__, "top_src": top_src, "top_tgt": top_tgt},
                         ensure_ascii=False, indent=1))
        return EXIT_OK
    c = cfg.corpus
    limits = (args.max_vocab_src or c.max_vocab_src, args.max_vocab_tgt or c.max_vocab_tgt, args.max_len or c.max_len)
    if None in limits:
        log.error("subset needs --max-vocab-src, --max-vocab-tgt and --max-len")
        return EXIT_FATAL
    sub = subset_corpus(corpus, *limits)
    if not len(sub):
        log.warning("no sentence pair satisfies the limits; writing empty files")
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    save_parallel(sub, out / "src.txt", out / "tgt.txt")
    _write_metadata(out, cfg, "corpus subset", {"kept": len(sub), "total": len(corpus)})
    return EXIT_OK


# ---------------------------------------------------------------------------
# nmt


def cmd_nmt(args, cfg):
    if args.nmt_cmd == "train":
        return _nmt_train(args, cfg)
    if args.nmt_cmd == "translate":
        model, header = load_checkpoint(args.checkpoint, with_header=True)
        src_vocab, tgt_vocab = vocabularies_from_header(header)
        if src_vocab is None or tgt_vocab is None:
            log.error("checkpoint %s carries no vocabularies", args.checkpoint)
            return EXIT_FATAL
        lines = [args.text] if args.text is not None else sys.stdin.read().splitlines()
        for line in lines:
            ids = make_source_ids(line, src_vocab, model.spec.seq_len)
            print(logits_to_text(model.predict(ids), tgt_vocab))
        return EXIT_OK
    return _nmt_evaluate(args, cfg)


def _nmt_train(args, cfg):
    corpus = load_parallel(args.src, args.tgt)
    dataset = build_dataset(corpus, pad_length=args.pad_length or cfg.corpus.pad_length)
    tr, va = split(dataset, cfg.corpus.split_ratio, seed=cfg.seed)
    t = cfg.train
    tc = TrainConfig(args.epochs or t.epochs, t.batch_size, t.lr, cfg.seed, t.shuffle)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    kinds = ["simple_gru", "embedded_gru"] if args.kind == "both" else [args.kind or cfg.model.kind]
    for kind in kinds:
        spec = spec_for_dataset(kind, dataset, cfg.model.hidden, cfg.model.embed_dim)
        model = build_model(spec, seed=cfg.seed)
        ckpt_dir = None
        if args.checkpoint_every_epoch:
            ckpt_dir = out / f"checkpoints_{kind}"
            ckpt_dir.mkdir(exist_ok=True)
        report = train(model, tr, tc, validation=va, checkpoint_dir=ckpt_dir,
                       log=lambda s, k=kind: log.info("%s epoch %d loss %.4f val_acc %.4f/%.4f", k, s.epoch,
                                                      s.train_loss, s.val_acc_padded, s.val_acc_masked))
        report.to_csv(out / f"train_report_{kind}.csv")
        save_checkpoint(model, out / f"{kind}.vbnn", seed=cfg.seed, epoch=tc.epochs,
                        source_vocab=dataset.source_vocab, target_vocab=dataset.target_vocab)
    _write_metadata(out, cfg, "nmt train", {"train_rows": len(tr), "validation_rows": len(va)})
    return EXIT_OK


def _nmt_evaluate(args, cfg):
    corpus = load_parallel(args.src, args.tgt)
    reports = []
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    for path in args.checkpoint:
        model, header = load_checkpoint(path, with_header=True)
        src_vocab, tgt_vocab = vocabularies_from_header(header)
        if src_vocab is None or tgt_vocab is None:
            log.error("checkpoint %s carries no vocabularies", path)
            return EXIT_FATAL
        testset = build_dataset(corpus, model.spec.seq_len, src_vocab, tgt_vocab, truncate=True)
        rep = evaluate_model(model, testset)
        name = Path(path).stem
        (out / f"eval_{name}.json").write_text(rep.to_json() + "\n", encoding="utf-8")
        (out / f"eval_{name}.csv").write_text(rep.to_csv(), encoding="utf-8")
        print(f"{name}: mean BLEU {rep.mean_bleu:.4f}, accuracy {rep.accuracy_padded:.4f} padded / "
              f"{rep.accuracy_masked:.4f} masked, {rep.empty_hypotheses} empty predictions")
        reports.append((name, rep))
    if len(reports) >= 2:
        table = compare_models(reports)
        (out / "comparison.csv").write_text(table.to_csv(), encoding="utf-8")
        (out / "comparison.txt").write_text(table.to_text() + "\n", encoding="utf-8")
    _write_metadata(out, cfg, "nmt evaluate")
    return EXIT_OK


# ---------------------------------------------------------------------------
# one-shot scoring


def cmd_sentiment(args, cfg):
    score = polarity_scores(args.text, _lexicon(cfg), _sentiment_config(cfg))
    out = score.as_dict()
    out["class"] = classify_sentiment(score.compound).name
    print(json.dumps(out))
    return EXIT_OK


def cmd_bleu(args, cfg):
    if not args.hyp.strip() or not all(r.strip() for r in args.ref):
        log.error("reference and hypothesis must be non-empty")
        return EXIT_FATAL
    print(json.dumps(bleu_from_text(args.ref, args.hyp).as_dict()))
    return EXIT_OK


# ---------------------------------------------------------------------------


def build_parser():
    p = argparse.ArgumentParser(prog="voxlate", description=__doc__.splitlines()[0])
    p.add_argument("--config", help="JSON run configuration")
    p.add_argument("--seed", type=int, help="overrides the config seed")
    p.add_argument("--jobs", type=int, default=1, help="worker threads for per-clip analysis")
    p.add_argument("--out", default="out", help="output directory")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    a = sub.add_parser("analyze", help="loudness and sentiment for every clip in a manifest")
    a.add_argument("manifest")
    a.add_argument("--audio-dir")
    a.add_argument("--transcripts-dir")

    c = sub.add_parser("corpus", help="parallel corpus utilities")
    csub = c.add_subparsers(dest="corpus_cmd", required=True)
    for name in ("stats", "subset"):
        sp = csub.add_parser(name)
        sp.add_argument("--src", required=True)
        sp.add_argument("--tgt", required=True)
        if name == "stats":
            sp.add_argument("--top", type=int, default=10)
        else:
            sp.add_argument("--max-vocab-src", type=int)
            sp.add_argument("--max-vocab-tgt", type=int)
            sp.add_argument("--max-len", type=int)
    sy = csub.add_parser("synth")
    sy.add_argument("--pairs", type=int, default=10000)
    sy.add_argument("--vocab-src", type=int, default=200)
    sy.add_argument("--vocab-tgt", type=int, default=350)
    sy.add_argument("--max-len", type=int, default=21)

    n = sub.add_parser("nmt", help="train, run and evaluate the translation models")
    nsub = n.add_subparsers(dest="nmt_cmd", required=True)
    tr = nsub.add_parser("train")
    tr.add_argument("--src", required=True)
    tr.add_argument("--tgt", required=True)
    tr.add_argument("--kind", choices=["simple_gru", "embedded_gru", "both"])
    tr.add_argument("--epochs", type=int)
    tr.add_argument("--pad-length", type=int)
    tr.add_argument("--checkpoint-every-epoch", action="store_true")
    tl = nsub.add_parser("translate")
    tl.add_argument("--checkpoint", required=True)
    tl.add_argument("--text", help="sentence to translate; reads stdin lines when omitted")
    ev = nsub.add_parser("evaluate")
    ev.add_argument("--checkpoint", required=True, action="append")
    ev.add_argument("--src", required=True)
    ev.add_argument("--tgt", required=True)

    s = sub.add_parser("sentiment", help="score one text")
    s.add_argument("text")
    b = sub.add_parser("bleu", help="sentence BLEU of one hypothesis")
    b.add_argument("--ref", required=True, action="append")
    b.add_argument("--hyp", required=True)
    return p


COMMANDS = {"analyze": cmd_analyze, "corpus": cmd_corpus, "nmt": cmd_nmt,
            "sentiment": cmd_sentiment, "bleu": cmd_bleu}


def main(argv=None):
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:
        # argparse exits 2 on usage errors; 2 is reserved for partial failures here
        return EXIT_OK if exc.code in (0, None) else EXIT_FATAL
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        cfg = load_config(args.config)
        if args.seed is not None:
            cfg.seed = args.seed
        return COMMANDS[args.command](args, cfg)
    except (VoxlateError, OSError) as exc:
        log.error("%s", exc)
        return EXIT_FATAL


if __name__ == "__main__":
    sys.exit(main())
