"""``treeaug`` command line.

Exit codes: 0 ok, 1 I/O error, 2 parse error, 3 validation error,
4 training failure.  Every error is a single stderr line of the form
``treeaug: E_<KIND>: <message>``.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys
import time

from . import __version__
from .augment import AugmentConfig, augment_dataset
from .conllu import ConlluParseError, ConlluValidationError, read_conllu, serialize_conllu
from .deptree import DEFAULT_LOI, DEFAULT_ROOT_PHRASE, LabelConfig, load_label_config
from .stats import CorrelationError, fit_line, pearson, read_pairs, treebank_stats

EXIT_OK, EXIT_IO, EXIT_PARSE, EXIT_VALIDATION, EXIT_TRAINING = 0, 1, 2, 3, 4

log = logging.getLogger("treeaug")


class CliError(Exception):
    def __init__(self, code: int, kind: str, message: str):
        self.code, self.kind = code, kind
        super().__init__(message)


def _bool(text: str) -> bool:
    v = text.strip().lower()
    if v in ("1", "true", "yes", "on"):
        return True
    if v in ("0", "false", "no", "off"):
        return False
    raise argparse.ArgumentTypeError(f"expected a boolean, got {text!r}")


def _u64(text: str) -> int:
    v = int(text)
    if not 0 <= v < 2**64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return v


def _csv(text: str) -> list[str]:
    return [x for x in text.replace(" ", "").split(",") if x]


def _floats(text: str) -> list[float]:
    return [float(x) for x in _csv(text)]


def _load(path, require_valid: bool = True):
    try:
        sents = read_conllu(path)
    except ConlluParseError as exc:
        raise CliError(EXIT_PARSE, "E_PARSE", f"{path}: {exc}") from None
    except OSError as exc:
        raise CliError(EXIT_IO, "E_IO", f"{path}: {exc.strerror or exc}") from None
    if require_valid:
        for i, s in enumerate(sents, start=1):
            if s.violations:
                where = f"line {s.line}" if s.line else f"sentence {i}"
                raise CliError(EXIT_VALIDATION, "E_VALIDATION",
                               f"{path}: {where}: {'; '.join(v.message for v in s.violations)}")
    return sents


def _write(path, text: str):
    try:
        with open(path, "w", encoding="utf-8", newline="\n") as f:
            f.write(text)
    except OSError as exc:
        raise CliError(EXIT_IO, "E_IO", f"{path}: {exc.strerror or exc}") from None


def _labels(args) -> LabelConfig:
    loi = args.loi
    rp = args.root_phrase
    if args.label_config:
        try:
            return load_label_config(args.label_config, loi=loi, root_phrase=rp)
        except (OSError, ValueError) as exc:
            raise CliError(EXIT_VALIDATION, "E_CONFIG", f"{args.label_config}: {exc}") from None
    return LabelConfig(loi=loi or DEFAULT_LOI, root_phrase=rp or DEFAULT_ROOT_PHRASE)


def _add_label_flags(p):
    p.add_argument("--loi", type=_csv, default=None, help="LOI base labels (default nsubj,obj,iobj,obl)")
    p.add_argument("--root-phrase", type=_csv, default=None,
                   help="root-phrase base labels (default fixed,flat,cop,compound)")
    p.add_argument("--label-config", help="file with 'loi = ...' / 'root_phrase = ...' lines")


def _add_tagger_flags(p):
    from .tagger import TaggerConfig

    d = TaggerConfig()
    g = p.add_argument_group("tagger hyperparameters")
    g.add_argument("--char-embed-dim", type=int, default=d.char_embed_dim)
    g.add_argument("--char-hidden-dim", type=int, default=d.char_hidden_dim)
    g.add_argument("--word-embed-dim", type=int, default=d.word_embed_dim)
    g.add_argument("--word-hidden-dim", type=int, default=d.word_hidden_dim)
    g.add_argument("--init-range", type=float, default=d.init_range)
    g.add_argument("--lr", type=float, default=d.lr_initial)
    g.add_argument("--dropout", type=float, default=d.dropout_rate)
    g.add_argument("--clip-norm", type=float, default=d.clip_norm)
    g.add_argument("--patience", type=int, default=d.early_stop_patience)
    g.add_argument("--max-epochs", type=int, default=d.max_epochs)
    g.add_argument("--tagger-seed", type=_u64, default=d.seed)
    g.add_argument("--unk-strategy", choices=("singleton", "none"), default=d.unk_strategy)
    g.add_argument("--dtype", choices=("float32", "float64"), default="float32",
                   help="float precision for training (default float32)")


def _tagger_config(args):
    from .tagger import TaggerConfig

    try:
        return TaggerConfig(
            char_embed_dim=args.char_embed_dim, char_hidden_dim=args.char_hidden_dim,
            word_embed_dim=args.word_embed_dim, word_hidden_dim=args.word_hidden_dim,
            init_range=args.init_range, lr_initial=args.lr, dropout_rate=args.dropout,
            clip_norm=args.clip_norm, early_stop_patience=args.patience, max_epochs=args.max_epochs,
            seed=args.tagger_seed, unk_strategy=args.unk_strategy, dtype=args.dtype,
        )
    except ValueError as exc:
        raise CliError(EXIT_VALIDATION, "E_CONFIG", str(exc)) from None


def cmd_augment(args) -> int:
    sents = _load(args.input)
    ops = ("crop", "rotate") if args.op == "both" else (args.op,)
    try:
        cfg = AugmentConfig(
            operations=ops, p=args.p, seed=args.seed, max_rotations_per_sentence=args.max_rot,
            labels=_labels(args), include_originals=args.include_originals, keep_punct=args.keep_punct,
        )
    except ValueError as exc:
        raise CliError(EXIT_VALIDATION, "E_CONFIG", str(exc)) from None
    workers = int(os.environ.get("TREEAUG_THREADS", "1") or 1)
    out = augment_dataset(sents, cfg, workers=workers)
    _write(args.output, serialize_conllu([a.sentence for a in out]))
    crops = sum(1 for a in out if a.provenance and a.provenance.operation == "crop")
    rots = sum(1 for a in out if a.provenance and a.provenance.operation == "rotate")
    inel = sum(1 for s in sents if s.augmentation_ineligible)
    print(f"sentences_in\t{len(sents)}\ncrops\t{crops}\nrotations\t{rots}\nineligible\t{inel}\n"
          f"sentences_out\t{len(out)}")
    return EXIT_OK


def cmd_stats(args) -> int:
    sents = _load(args.input, require_valid=False)
    st = treebank_stats(sents, _labels(args))
    hist = " ".join(f"{k}:{v}" for k, v in st.loi_histogram.items())
    rows = [
        ("tokens", st.tokens), ("sentences", st.sentences), ("invalid_sentences", st.invalid_sentences),
        ("ineligible_sentences", st.ineligible_sentences), ("loi_histogram", hist or "-"),
        ("verdict", st.verdict), ("bucket", st.bucket or "-"),
    ]
    if args.format == "tsv":
        print("\n".join(f"{k}\t{v}" for k, v in rows))
    else:
        width = max(len(k) for k, _ in rows)
        print("\n".join(f"{k:<{width}}  {v}" for k, v in rows))
    return EXIT_OK


def cmd_train(args) -> int:
    from .tagger import TrainingError, save_checkpoint, train, write_history

    cfg = _tagger_config(args)
    train_set = _load(args.train)
    dev = _load(args.dev)
    t0 = time.perf_counter()

    def progress(rec):
        log.info("epoch %d loss=%.4f dev_acc=%.4f lr=%g", rec.epoch, rec.train_loss, rec.dev_acc, rec.lr)

    try:
        model, history = train(train_set, dev, cfg, progress=progress)
    except TrainingError as exc:
        raise CliError(EXIT_TRAINING, "E_TRAINING", str(exc)) from None
    try:
        save_checkpoint(args.model, model)
    except OSError as exc:
        raise CliError(EXIT_IO, "E_IO", f"{args.model}: {exc.strerror or exc}") from None
    hist_path = args.history or f"{args.model}.history.tsv"
    write_history(hist_path, history)
    best = max((r.dev_acc for r in history), default=float("nan"))
    print(f"epochs\t{len(history)}\nbest_dev_acc\t{best:.4f}\nseconds\t{time.perf_counter() - t0:.1f}")
    return EXIT_OK


def cmd_eval(args) -> int:
    from .tagger import CheckpointError, evaluate, load_checkpoint

    try:
        model = load_checkpoint(args.model)
    except FileNotFoundError as exc:
        raise CliError(EXIT_IO, "E_IO", f"{args.model}: {exc.strerror}") from None
    except CheckpointError as exc:
        raise CliError(EXIT_PARSE, "E_CHECKPOINT", str(exc)) from None
    test = _load(args.test)
    if not test:
        raise CliError(EXIT_VALIDATION, "E_VALIDATION", f"{args.test}: empty test set")
    unknown = sorted({t.upos for s in test for t in s.tokens} - set(model.tag_vocab))
    if unknown:
        print(f"treeaug: warning: gold tags unknown to the model counted as errors: {','.join(unknown)}",
              file=sys.stderr)
    acc = evaluate(model, test, warn_unknown=False)
    print(f"{acc:.4f}")
    return EXIT_OK


def cmd_experiment(args) -> int:
    from .experiment import run_experiment

    cfg = _tagger_config(args)
    train_set = _load(args.train)
    if args.train_limit is not None:
        train_set = train_set[: args.train_limit]
    dev = _load(args.dev)
    test = _load(args.test)
    ops = ("crop", "rotate") if args.ops == ["both"] else tuple(args.ops)
    report = run_experiment(
        train_set, dev, test, ops=ops, ps=args.ps, tagger_config=cfg, aug_seed=args.seed,
        runs=args.runs, labels=_labels(args), keep_punct=args.keep_punct, max_rot=args.max_rot,
    )
    if not report.untouched:  # pragma: no cover - guarded by construction
        raise CliError(EXIT_VALIDATION, "E_INTEGRITY", "dev or test data changed during the experiment")
    tsv = report.to_tsv()
    if args.out:
        _write(args.out, tsv)
    print(tsv if args.format == "tsv" else report.to_table(), end="")
    if all(r.error for r in report.rows):
        raise CliError(EXIT_TRAINING, "E_TRAINING", "every setting failed")
    return EXIT_OK


def cmd_correlate(args) -> int:
    try:
        pairs = read_pairs(args.pairs)
    except OSError as exc:
        raise CliError(EXIT_IO, "E_IO", f"{args.pairs}: {exc.strerror or exc}") from None
    except ValueError as exc:
        raise CliError(EXIT_PARSE, "E_PARSE", f"{args.pairs}: {exc}") from None
    xs = [x for x, _ in pairs]
    ys = [y for _, y in pairs]
    try:
        r = pearson(xs, ys)
    except CorrelationError as exc:
        raise CliError(EXIT_VALIDATION, "E_CORRELATION", str(exc)) from None
    if args.out:
        slope, intercept = fit_line(xs, ys)
        lines = ["size\timprovement\tfit"]
        lines += [f"{x:g}\t{y:g}\t{slope * x + intercept:.6g}" for x, y in sorted(pairs)]
        lines.append(f"# pearson_r\t{r:.4f}")
        _write(args.out, "\n".join(lines) + "\n")
    print(f"{r:.4f}")
    return EXIT_OK


def cmd_synth(args) -> int:
    from .synthetic import write_bundled

    os.makedirs(args.directory, exist_ok=True)
    write_bundled(args.directory, seed=args.seed)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="treeaug", description="Dependency-tree crop/rotate augmentation toolkit.")
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    ap.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("augment", help="crop/rotate a CoNLL-U file")
    p.add_argument("input")
    p.add_argument("output")
    p.add_argument("--op", choices=("crop", "rotate", "both"), default="both")
    p.add_argument("--p", type=float, default=1.0, help="per-candidate keep probability")
    p.add_argument("--seed", type=_u64, default=0)
    p.add_argument("--max-rot", type=int, default=None, help="rotations sampled per sentence (default n)")
    p.add_argument("--keep-punct", action="store_true", help="keep root-attached punctuation in crops")
    p.add_argument("--include-originals", type=_bool, default=True)
    _add_label_flags(p)
    p.set_defaults(func=cmd_augment)

    p = sub.add_parser("stats", help="treebank size, LOI histogram and eligibility")
    p.add_argument("input")
    p.add_argument("--format", choices=("tsv", "table"), default="table")
    _add_label_flags(p)
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("train", help="train a tagger")
    p.add_argument("train")
    p.add_argument("dev")
    p.add_argument("-o", "--model", required=True, help="checkpoint path")
    p.add_argument("--history", help="history TSV path (default <model>.history.tsv)")
    _add_tagger_flags(p)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("eval", help="token accuracy of a checkpoint")
    p.add_argument("model")
    p.add_argument("test")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("experiment", help="org vs. crop/rotate grid")
    p.add_argument("train")
    p.add_argument("dev")
    p.add_argument("test")
    p.add_argument("--ops", type=_csv, default=["crop", "rotate"])
    p.add_argument("--ps", type=_floats, default=[0.3, 0.7, 1.0])
    p.add_argument("--seed", type=_u64, default=0, help="augmentation seed")
    p.add_argument("--runs", type=int, default=1)
    p.add_argument("--train-limit", type=int, default=None, help="use only the first N training sentences")
    p.add_argument("--max-rot", type=int, default=None)
    p.add_argument("--keep-punct", action="store_true")
    p.add_argument("--out", help="write the TSV report here")
    p.add_argument("--format", choices=("tsv", "table"), default="table")
    _add_label_flags(p)
    _add_tagger_flags(p)
    p.set_defaults(func=cmd_experiment)

    p = sub.add_parser("correlate", help="Pearson r of (size, improvement) pairs")
    p.add_argument("pairs")
    p.add_argument("--out", help="TSV with the pairs and a least-squares fit")
    p.set_defaults(func=cmd_correlate)

    p = sub.add_parser("synth", help="write the synthetic train/dev/test treebank")
    p.add_argument("directory")
    p.add_argument("--seed", type=int, default=2018)
    p.set_defaults(func=cmd_synth)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(name)s: %(message)s")
    try:
        return args.func(args)
    except CliError as exc:
        print(f"treeaug: {exc.kind}: {exc}", file=sys.stderr)
        return exc.code
    except ConlluValidationError as exc:
        print(f"treeaug: E_VALIDATION: {exc}", file=sys.stderr)
        return EXIT_VALIDATION


if __name__ == "__main__":
    sys.exit(main())
