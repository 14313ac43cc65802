"""End-to-end runs: corpus directory in, topic or classification report out."""

from __future__ import annotations

import json
import os
from dataclasses import asdict, dataclass, fields
from pathlib import Path

import numpy as np

from .cooccurrence import count_cooccurrences, sppmi
from .corpus import load_corpus, load_labels
from .hierarchy import bottomup_hnmf, merge_map, topdown_hnmf
from .nmf import SolverOptions, assign_documents, nmf, topic_keywords
from .semantic import semantic_nmf
from .supervised import LabelMatrix, run_trials
from .text import (VectorizerParams, build_vocabulary, english_stopwords, highlight_keywords,
                   read_keyword_file, read_stopword_file, tfidf_matrix)

COMMANDS = ("nmf", "semantic", "hnmf-topdown", "hnmf-bottomup", "snmf", "ssnmf")
SEED_ENV = "NMF_FORGE_SEED"

# Vectorizer and rank settings per corpus kind and command.
PRESETS = {
    "letters": {
        "rank": 7,
        "ranks": {"hnmf-topdown": [7], "hnmf-bottomup": [7, 5, 3]},
        "vectorizer": {
            "nmf": {"min_df": 0.015, "max_df": 0.8, "max_features": None},
            "semantic": {"min_df": 0.01, "max_df": 0.8, "max_features": 500},
            "hnmf-topdown": {"min_df": 0.04, "max_df": 0.8, "max_features": None},
            "hnmf-bottomup": {"min_df": 0.04, "max_df": 0.8, "max_features": None},
            "snmf": {"min_df": 0.2, "max_df": 0.8, "max_features": None},
            "ssnmf": {"min_df": 0.2, "max_df": 0.8, "max_features": None},
        },
    },
    "aob": {
        "rank": 10,
        "ranks": {"hnmf-topdown": [10], "hnmf-bottomup": [10, 4, 2]},
        "vectorizer": {
            "nmf": {"min_df": 0.04, "max_df": 0.8, "max_features": None},
            "semantic": {"min_df": 0.0, "max_df": 1.0, "max_features": 700},
            "hnmf-topdown": {"min_df": 0.04, "max_df": 0.8, "max_features": None},
            "hnmf-bottomup": {"min_df": 0.04, "max_df": 0.8, "max_features": None},
            "snmf": {"min_df": 0.2, "max_df": 0.8, "max_features": None},
            "ssnmf": {"min_df": 0.2, "max_df": 0.8, "max_features": None},
        },
    },
}


@dataclass
class RunConfig:
    command: str
    corpus: str | None = None
    labels: str | None = None
    preset: str = "letters"
    rank: int | None = None
    ranks: list[int] | None = None
    branching: int = 3
    top_k: int = 10
    min_df: float | None = None
    max_df: float | None = None
    max_features: int | None = None
    stopwords: str | None = None
    extra_stopwords: str | None = None
    keywords: str | None = None
    highlight_factor: float = 1.5
    window: int = 5
    shift: float = 5.0
    lam: float = 1.0
    split: float = 0.75
    trials: int = 10
    seed: int | None = None
    max_iters: int = 500
    tol: float = 1e-5
    out: str | None = None

    def __post_init__(self):
        if self.command not in COMMANDS:
            raise ValueError(f"unknown command {self.command!r}")
        if self.preset not in PRESETS:
            raise ValueError(f"unknown preset {self.preset!r}; choose from {sorted(PRESETS)}")
        if not self.corpus:
            raise ValueError("--corpus is required")
        if self.command in ("snmf", "ssnmf") and not self.labels:
            raise ValueError(f"--labels is required for {self.command}")

    @classmethod
    def field_names(cls) -> set[str]:
        return {f.name for f in fields(cls)}

    def resolved(self) -> "RunConfig":
        """Fill every preset-dependent ``None`` so the echo fully pins the run."""
        preset = PRESETS[self.preset]
        vec = preset["vectorizer"][self.command]
        out = RunConfig(**asdict(self))
        if out.min_df is None:
            out.min_df = vec["min_df"]
        if out.max_df is None:
            out.max_df = vec["max_df"]
        if out.max_features is None:
            out.max_features = vec["max_features"]
        if out.rank is None:
            out.rank = preset["rank"]
        if out.ranks is None:
            if out.command == "hnmf-topdown":
                out.ranks = [out.rank, out.branching]
            elif out.command == "hnmf-bottomup":
                out.ranks = list(preset["ranks"]["hnmf-bottomup"])
        elif out.command == "hnmf-topdown" and len(out.ranks) == 1:
            out.ranks = [out.ranks[0], out.branching]
        if out.seed is None:
            out.seed = int(os.environ.get(SEED_ENV, 0))
        return out


def load_config_file(path) -> dict:
    data = json.loads(Path(path).read_text(encoding="utf-8"))
    if not isinstance(data, dict):
        raise ValueError(f"{path}: config must be a JSON object")
    data = {k.replace("-", "_"): v for k, v in data.items()}
    if "lambda" in data:
        data["lam"] = data.pop("lambda")
    unknown = set(data) - RunConfig.field_names()
    if unknown:
        raise ValueError(f"{path}: unknown config keys {sorted(unknown)}")
    return data


def _vectorize(cfg: RunConfig):
    corpus = load_corpus(cfg.corpus)
    stop = read_stopword_file(cfg.stopwords) if cfg.stopwords else english_stopwords()
    extra = read_stopword_file(cfg.extra_stopwords) if cfg.extra_stopwords else frozenset()
    params = VectorizerParams(max_df=cfg.max_df, min_df=cfg.min_df,
                              max_features=cfg.max_features, stopwords=stop,
                              extra_stopwords=extra)
    vocab = build_vocabulary(corpus, params)
    X = tfidf_matrix(corpus, vocab)
    if cfg.keywords:
        source = None if cfg.keywords == "cip" and not Path(cfg.keywords).exists() else cfg.keywords
        X = highlight_keywords(X, read_keyword_file(source), cfg.highlight_factor)
    return corpus, X


def _options(cfg: RunConfig, rank: int) -> SolverOptions:
    return SolverOptions(rank=rank, max_iters=cfg.max_iters, tol=cfg.tol, seed=cfg.seed)


def _topic_section(W, H, X, k):
    k = min(k, len(X.vocab))
    labels, unassigned = assign_documents(H, return_unassigned=True)
    return {
        "topics": [{"topic": i, "keywords": kw} for i, kw in enumerate(topic_keywords(W, X.vocab, k))],
        "assignments": {doc_id: int(t) for doc_id, t in zip(X.doc_ids, labels)},
        "unassigned": [doc_id for doc_id, u in zip(X.doc_ids, unassigned) if u],
    }


def run(cfg: RunConfig) -> dict:
    """Execute one configured pipeline and return its JSON-ready report."""
    cfg = cfg.resolved()
    corpus, X = _vectorize(cfg)
    report = {
        "command": cfg.command,
        # the output directory is left out so reports do not depend on where they are written
        "config": {k: v for k, v in asdict(cfg).items() if k != "out"},
        "n_documents": len(corpus),
        "vocab_size": len(X.vocab),
        "highlighted": list(X.highlighted),
    }
    terms, doc_ids = X.vocab.terms, X.doc_ids

    if cfg.command == "nmf":
        F = nmf(X.values, _options(cfg, cfg.rank))
        report.update(_topic_section(F.W, F.H, X, cfg.top_k))
        report.update(residual=F.objective, iterations=F.iterations_run,
                      factorization=F.to_dict(terms, doc_ids))
    elif cfg.command == "semantic":
        M = sppmi(count_cooccurrences(corpus, X.vocab, cfg.window), cfg.shift)
        F = semantic_nmf(X.values, M.values, _options(cfg, cfg.rank))
        report.update(_topic_section(F.W, F.H, X, cfg.top_k))
        report.update(residual=float(np.sum((X.values - F.W @ F.H) ** 2)),
                      objective=F.objective, iterations=F.iterations_run,
                      factorization=F.to_dict(terms, doc_ids))
    elif cfg.command == "hnmf-topdown":
        tree = topdown_hnmf(X.values, cfg.ranks, _options(cfg, cfg.ranks[0]))
        report["tree"] = tree.to_dict(terms, doc_ids, cfg.top_k)
        report["leaves"] = len(tree.leaves())
    elif cfg.command == "hnmf-bottomup":
        chain = bottomup_hnmf(X.values, cfg.ranks, _options(cfg, cfg.ranks[0]))
        report["chain"] = chain.to_dict(terms, doc_ids, cfg.top_k)
        report["merge_maps"] = [merge_map(chain, i).tolist() for i in range(len(chain))]
        report["residuals"] = list(chain.residuals)
        report["assignments"] = {doc_id: int(t) for doc_id, t in
                                 zip(doc_ids, assign_documents(chain.H))}
    else:
        labels = load_labels(cfg.labels, corpus)
        keep = [j for j, doc_id in enumerate(doc_ids) if labels.labels_of(doc_id)]
        if not keep:
            raise ValueError("no labeled documents")
        kept_ids = [doc_ids[j] for j in keep]
        Y = LabelMatrix.from_labelset(labels, kept_ids).Y
        result = run_trials(X.values[:, keep], Y, cfg.command, cfg.rank, cfg.lam, cfg.split,
                            cfg.trials, cfg.seed, _options(cfg, cfg.rank), labels.classes)
        report["n_labeled"] = len(keep)
        report.update(result)
    return report


def _columns(rows: list[list[str]], header: list[str]) -> list[str]:
    widths = [max(len(str(x)) for x in col) for col in zip(header, *rows)]
    fmt = "  ".join(f"{{:<{w}}}" for w in widths)
    lines = [fmt.format(*header), fmt.format(*("-" * w for w in widths))]
    lines += [fmt.format(*row).rstrip() for row in rows]
    return [line.rstrip() for line in lines]


def keyword_table(topic_lists: list[list[str]], prefix: str = "Topic") -> list[str]:
    """Keywords laid out one topic per column, one rank per row."""
    header = [f"{prefix} {i + 1}" for i in range(len(topic_lists))]
    depth = max(len(kw) for kw in topic_lists)
    rows = [[kw[i] if i < len(kw) else "" for kw in topic_lists] for i in range(depth)]
    return _columns(rows, header)


def _tree_outline(node: dict, lines: list[str]) -> None:
    for i, child in enumerate(node.get("children", [])):
        indent = "  " * node["level"]
        keywords = node.get("keywords", [[]] * len(node["children"]))[i]
        path = ".".join(str(p + 1) for p in child["path"])
        lines.append(f"{indent}{path} ({len(child['doc_indices'])} docs): {', '.join(keywords)}")
        _tree_outline(child, lines)


def render_text(report: dict) -> str:
    lines = [f"{report['command']}: {report['n_documents']} documents, "
             f"{report['vocab_size']} terms"]
    command = report["command"]
    if command in ("nmf", "semantic"):
        lines += keyword_table([t["keywords"] for t in report["topics"]])
        lines.append(f"residual: {report['residual']:.6g}")
    elif command == "hnmf-topdown":
        _tree_outline(report["tree"]["root"], lines)
        lines.append(f"leaves: {report['leaves']}")
    elif command == "hnmf-bottomup":
        for i, layer in enumerate(report["chain"]["layers"]):
            lines.append(f"layer {i} (rank {layer['rank']}), residual "
                         f"{report['residuals'][i]:.6g}")
            if i:
                lines.append("  merges: " + ", ".join(
                    f"{a + 1}->{b + 1}" for a, b in enumerate(report["merge_maps"][i])))
            lines += ["  " + line for line in keyword_table(layer["keywords"])]
    else:
        classes = report["classes"]
        lines.append(f"classes: {', '.join(map(str, classes))}")
        rows = [[str(t["seed"]), f"{t['las']:.4f}"] for t in report["trials"]]
        lines += _columns(rows, ["seed", "LAS"])
        lines.append(f"mean LAS: {report['mean_las']:.4f} +/- {report['std_las']:.4f}")
    return "\n".join(lines) + "\n"


def dump_json(report: dict) -> str:
    return json.dumps(report, indent=2, sort_keys=True) + "\n"


def write_report(report: dict, out_dir) -> list[Path]:
    """Write ``report.json`` and ``report.txt``; nothing is left behind on failure."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    targets = [(out / "report.json", dump_json(report)), (out / "report.txt", render_text(report))]
    written = []
    try:
        for path, text in targets:
            tmp = path.with_suffix(path.suffix + ".tmp")
            tmp.write_text(text, encoding="utf-8")
            tmp.replace(path)
            written.append(path)
    except BaseException:
        for path in written:
            path.unlink(missing_ok=True)
        for path, _ in targets:
            path.with_suffix(path.suffix + ".tmp").unlink(missing_ok=True)
        raise
    return written
