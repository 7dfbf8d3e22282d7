"""Command-line interface.

Subcommands: stats, split, augment, run, compare, predict. Flag precedence
is flags > config file > built-in defaults. Diagnostics go to stderr; data
goes to stdout or to files under --out. Exit code 0 means success.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path
from typing import Optional

from . import classifier as clf
from . import features as feat
from .augment import AugmentConfig, augment_dataset, write_audit_log
from .config import ExperimentConfig, config_from_record, load_config
from .corpus import CorpusStats, dataset_stats, load_dataset, save_dataset, split
from .evaluation import (
    ExperimentError,
    build_providers,
    load_report,
    render_comparison,
    run_experiment,
)
from .lexicon import load_entities, load_synonyms
from .preprocess import default_stoplist, load_stoplist


class CliError(Exception):
    pass


def _load_cfg(args) -> Optional[ExperimentConfig]:
    if getattr(args, "config", None):
        return load_config(args.config)
    return None


def _dataset_path(args, cfg: Optional[ExperimentConfig]) -> str:
    if getattr(args, "dataset", None):
        return args.dataset
    if cfg is not None:
        return cfg.dataset
    raise CliError("no dataset given (positional argument or --config)")


def _pick(flag, cfg_value, default):
    if flag is not None:
        return flag
    if cfg_value is not None:
        return cfg_value
    return default


def render_stats(stats: CorpusStats) -> str:
    rows = [
        ("Number of sentiment targets", f"{stats.n_targets:,}"),
        ("Positive polarity targets", f"{stats.n_positive:,}"),
        ("Negative polarity targets", f"{stats.n_negative:,}"),
        ("Neutral polarity targets", f"{stats.n_neutral:,}"),
        ("Total number of tokens", f"{stats.n_tokens:,}"),
        ("Unique words", f"{stats.n_unique_words:,}"),
        ("Total number of comments", f"{stats.n_comments:,}"),
        ("Average words per comment", f"{stats.avg_words_per_comment:.2f}"),
        (
            "Text length",
            f"Avg: {stats.text_len_avg:.2f}, Max: {stats.text_len_max:,}, "
            f"Min: {stats.text_len_min:,}",
        ),
    ]
    width = max(len(name) for name, _ in rows)
    return "\n".join(f"{name:<{width}}  {value}" for name, value in rows)


def cmd_stats(args) -> int:
    cfg = _load_cfg(args)
    path = _dataset_path(args, cfg)
    stats = dataset_stats(load_dataset(path))
    print(render_stats(stats))
    return 0


def cmd_split(args) -> int:
    cfg = _load_cfg(args)
    path = _dataset_path(args, cfg)
    scfg = cfg.split if cfg else None
    ratio = _pick(args.ratio, scfg.ratio if scfg else None, 0.8)
    seed = _pick(args.seed, scfg.seed if scfg else None, 42)
    granularity = _pick(args.granularity, scfg.granularity if scfg else None, "target")
    if args.out is None:
        raise CliError("split needs --out DIR")
    train, test = split(load_dataset(path), ratio, seed, granularity)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    save_dataset(train, out / "train.jsonl")
    save_dataset(test, out / "test.jsonl")
    print(f"train: {len(train)} -> {out / 'train.jsonl'}", file=sys.stderr)
    print(f"test:  {len(test)} -> {out / 'test.jsonl'}", file=sys.stderr)
    return 0


def cmd_augment(args) -> int:
    cfg = _load_cfg(args)
    path = _dataset_path(args, cfg)
    acfg = cfg.augment if cfg else None
    synonyms_path = _pick(args.synonyms, acfg.synonyms_path if acfg else None, None)
    entities_path = _pick(args.entities, acfg.entities_path if acfg else None, None)
    if synonyms_path is None and entities_path is None:
        raise CliError("augment needs --synonyms and/or --entities")
    if args.out is None:
        raise CliError("augment needs --out DIR")
    if args.no_protect_aspect:
        protect = False
    else:
        protect = acfg.protect_aspect if acfg else True
    aug = AugmentConfig(
        synonym_rate=_pick(args.synonym_rate, acfg.synonym_rate if acfg else None, 0.1),
        entity_rate=_pick(args.entity_rate, acfg.entity_rate if acfg else None, 0.1),
        seed=_pick(args.seed, acfg.seed if acfg else None, 42),
        protect_aspect=protect,
        copies=_pick(args.copies, acfg.copies if acfg else None, 1),
    )
    lexicon = load_synonyms(synonyms_path) if synonyms_path else None
    entities = load_entities(entities_path) if entities_path else None
    dataset = load_dataset(path)
    augmented, audits = augment_dataset(dataset, lexicon, entities, aug)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    save_dataset(augmented, out / "augmented.jsonl")
    write_audit_log(audits, out / "audit.jsonl")
    n_reps = sum(len(a.replacements) for a in audits)
    print(
        f"augmented: {len(dataset)} -> {len(augmented)} instances, "
        f"{n_reps} replacements -> {out}",
        file=sys.stderr,
    )
    return 0


def cmd_run(args) -> int:
    if not args.config:
        raise CliError("run needs --config PATH")
    cfg = load_config(args.config)
    import dataclasses

    if args.seed is not None:
        cfg = dataclasses.replace(
            cfg,
            split=dataclasses.replace(cfg.split, seed=args.seed),
            augment=dataclasses.replace(cfg.augment, seed=args.seed),
        )
    if args.out is not None:
        cfg = dataclasses.replace(cfg, out=str(args.out))
    report = run_experiment(cfg)
    m = report.to_record()["metrics"]
    print(
        f"{cfg.name}: accuracy={m['accuracy']:.4f} "
        f"macro_f1={m['macro']['f1']:.4f} weighted_f1={m['weighted_f1']:.4f}"
    )
    if cfg.out:
        print(f"report -> {Path(cfg.out) / 'report.json'}", file=sys.stderr)
    return 0


def cmd_compare(args) -> int:
    reports = []
    for path in args.reports:
        rec = load_report(path)
        name = (rec.get("config") or {}).get("name") or Path(path).stem
        reports.append((name, rec))
    print(render_comparison(reports))
    return 0


def cmd_predict(args) -> int:
    model_dir = Path(args.model)
    model_file = model_dir / "model.json" if model_dir.is_dir() else model_dir
    bundle_dir = model_file.parent

    def stage(name, fn):
        try:
            return fn()
        except ExperimentError:
            raise
        except Exception as e:
            raise ExperimentError(name, e) from e

    model = stage("load-model", lambda: clf.load_model(model_file))
    vocab = stage(
        "load-model",
        lambda: feat.Vocabulary.from_record(
            json.loads((bundle_dir / "vocabulary.json").read_text(encoding="utf-8"))
        ),
    )
    cfg_rec = stage(
        "load-model",
        lambda: json.loads((bundle_dir / "config.json").read_text(encoding="utf-8")),
    )
    cfg = config_from_record(cfg_rec, base_dir=bundle_dir)
    dataset = stage("load-input", lambda: load_dataset(args.input, require_label=False))

    def do_features():
        stoplist = None
        if cfg.preprocess.use_stopwords:
            stoplist = (
                load_stoplist(cfg.preprocess.stopwords_path)
                if cfg.preprocess.stopwords_path
                else default_stoplist()
            )
        fc = feat.FeatureConfig(
            min_df=cfg.features.min_df,
            max_features=cfg.features.max_features,
            aspect_bag=cfg.features.aspect_bag,
            use_stemming=cfg.preprocess.stemming,
            use_stopwords=cfg.preprocess.use_stopwords,
        )
        providers = build_providers(cfg)
        return feat.build_matrix(dataset.instances, vocab, providers, fc, stoplist)

    x = stage("features", do_features)

    def do_predict():
        if isinstance(model, clf.DecisionTree):
            return clf.predict_batch(model, x)
        return clf.predict_nb_batch(model, x)

    labels = stage("predict", do_predict)
    lines = [
        json.dumps({"id": inst.id, "label": label.to_string()}, ensure_ascii=False)
        for inst, label in zip(dataset, labels)
    ]
    body = "\n".join(lines) + ("\n" if lines else "")
    if args.out:
        Path(args.out).write_text(body, encoding="utf-8")
        print(f"predictions -> {args.out}", file=sys.stderr)
    else:
        sys.stdout.write(body)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pabsa",
        description="Hybrid aspect-based sentiment analysis toolkit for Persian",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, dataset_positional=True):
        if dataset_positional:
            p.add_argument("dataset", nargs="?", help="dataset JSONL file")
        p.add_argument("--config", help="experiment config JSON")
        p.add_argument("--seed", type=int, default=None, help="random seed (default 42)")
        p.add_argument("--out", default=None, help="output directory")

    p = sub.add_parser("stats", help="print corpus statistics")
    common(p)
    p.set_defaults(fn=cmd_stats)

    p = sub.add_parser("split", help="write a deterministic train/test split")
    common(p)
    p.add_argument("--ratio", type=float, default=None, help="train ratio (default 0.8)")
    p.add_argument(
        "--granularity", choices=("target", "comment"), default=None,
        help="split unit (default target)",
    )
    p.set_defaults(fn=cmd_split)

    p = sub.add_parser("augment", help="write an augmented dataset plus audit log")
    common(p)
    p.add_argument("--synonyms", default=None, help="synonym TSV")
    p.add_argument("--entities", default=None, help="entity TSV")
    p.add_argument("--synonym-rate", type=float, default=None)
    p.add_argument("--entity-rate", type=float, default=None)
    p.add_argument("--copies", type=int, default=None)
    p.add_argument(
        "--no-protect-aspect", action="store_true",
        help="allow replacements inside the aspect span",
    )
    p.set_defaults(fn=cmd_augment)

    p = sub.add_parser("run", help="run a full experiment from a config file")
    common(p, dataset_positional=False)
    p.set_defaults(fn=cmd_run)

    p = sub.add_parser("compare", help="tabulate several experiment reports")
    p.add_argument("reports", nargs="+", help="report.json files")
    p.set_defaults(fn=cmd_compare)

    p = sub.add_parser("predict", help="label new instances with a trained model")
    p.add_argument("--model", required=True, help="run output dir or model.json")
    p.add_argument("--input", required=True, help="dataset JSONL (labels optional)")
    p.add_argument("--out", default=None, help="write predictions here instead of stdout")
    p.set_defaults(fn=cmd_predict)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except ExperimentError as e:
        print(f"pabsa {args.command}: {e}", file=sys.stderr)
        return 1
    except (CliError, OSError, ValueError, RuntimeError) as e:
        print(f"pabsa {args.command}: error: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
