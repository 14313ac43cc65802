"""Command-line interface: ``nmf-forge <command> [options]``."""

from __future__ import annotations

import argparse
import logging
import sys

from .corpus import CorpusError
from .pipeline import COMMANDS, PRESETS, RunConfig, load_config_file, render_text, run, write_report
from .synth import PlantedSpec, generate, write_synthetic


def _int_list(text: str) -> list[int]:
    try:
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a comma-separated list of integers, got {text!r}")


def _mapping(text: str) -> dict[int, int]:
    try:
        pairs = (item.split(":") for item in text.split(",") if item.strip())
        return {int(a): int(b) for a, b in pairs}
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected pairs like 0:0,1:0,2:1, got {text!r}")


def _run_options() -> argparse.ArgumentParser:
    # every default is None so that unset flags fall through to the config file and preset
    p = argparse.ArgumentParser(add_help=False, argument_default=None)
    io = p.add_argument_group("input/output")
    io.add_argument("--corpus", help="directory of UTF-8 .txt documents")
    io.add_argument("--labels", help="CSV with header doc_id,labels (';'-separated classes)")
    io.add_argument("--config", help="JSON config file; flags given on the command line win")
    io.add_argument("--preset", choices=sorted(PRESETS), help="parameter preset (default letters)")
    io.add_argument("--out", help="directory receiving report.json and report.txt")

    vec = p.add_argument_group("vectorizer")
    vec.add_argument("--min-df", type=float)
    vec.add_argument("--max-df", type=float)
    vec.add_argument("--max-features", type=int)
    vec.add_argument("--stopwords", help="stopword file replacing the bundled English list")
    vec.add_argument("--extra-stopwords", help="file of additional stopwords, e.g. names")
    vec.add_argument("--keywords", help="keyword file to highlight ('cip' for the bundled list)")
    vec.add_argument("--highlight-factor", type=float)
    vec.add_argument("--window", type=int, help="co-occurrence window on each side")
    vec.add_argument("--shift", type=float, help="SPPMI shift N")

    model = p.add_argument_group("model")
    model.add_argument("--rank", type=int)
    model.add_argument("--ranks", type=_int_list, help="comma-separated ranks for hierarchical runs")
    model.add_argument("--branching", type=int, help="sub-topics per node for hnmf-topdown")
    model.add_argument("--top-k", type=int, help="keywords reported per topic")
    model.add_argument("--lambda", dest="lam", type=float, help="label term weight")
    model.add_argument("--split", type=float, help="training fraction per trial")
    model.add_argument("--trials", type=int)
    model.add_argument("--seed", type=int, help="master seed (fallback: $NMF_FORGE_SEED, then 0)")
    model.add_argument("--max-iters", type=int)
    model.add_argument("--tol", type=float)
    return p


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="nmf-forge", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)
    shared = _run_options()
    for name in COMMANDS:
        sub.add_parser(name, parents=[shared], help=f"run {name}")

    synth = sub.add_parser("synth", help="write a synthetic planted-topic corpus")
    synth.add_argument("--out", required=True)
    synth.add_argument("--topics", type=int, default=4)
    synth.add_argument("--docs-per-topic", type=int, default=15)
    synth.add_argument("--words-per-doc", type=int, default=60)
    synth.add_argument("--vocab-per-topic", type=int, default=20)
    synth.add_argument("--noise", type=float, default=0.1)
    synth.add_argument("--hierarchy", type=_mapping, help="topic:super pairs, e.g. 0:0,1:0,2:1,3:1")
    synth.add_argument("--shared-rate", type=float, default=0.4)
    synth.add_argument("--seed", type=int, default=0)
    return parser


def config_from_args(args: argparse.Namespace) -> RunConfig:
    values = load_config_file(args.config) if args.config else {}
    values["command"] = args.command
    for name in RunConfig.field_names() - {"command"}:
        flag = getattr(args, name, None)
        if flag is not None:
            values[name] = flag
    return RunConfig(**values)


def _synth(args) -> int:
    spec = PlantedSpec(n_topics=args.topics, docs_per_topic=args.docs_per_topic,
                       words_per_doc=args.words_per_doc, vocab_per_topic=args.vocab_per_topic,
                       noise_rate=args.noise, hierarchy=args.hierarchy,
                       shared_rate=args.shared_rate, seed=args.seed)
    data = generate(spec)
    out = write_synthetic(args.out, data)
    print(f"wrote {len(data.corpus)} documents to {out / 'docs'}")
    return 0


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.command == "synth":
            return _synth(args)
        cfg = config_from_args(args)
        report = run(cfg)
        if cfg.out:
            write_report(report, cfg.out)
        sys.stdout.write(render_text(report))
    except (CorpusError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
