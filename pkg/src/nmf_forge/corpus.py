"""Loading plain-text corpora and their label annotations from disk."""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path
from types import MappingProxyType
from typing import Mapping


class CorpusError(ValueError):
    """Raised when a corpus or label file cannot be loaded."""


@dataclass(frozen=True)
class Corpus:
    """Documents ordered by ``doc_id``; each document is a ``(doc_id, text)`` pair."""

    documents: tuple[tuple[str, str], ...]
    source_path: str = ""

    def __post_init__(self):
        ids = [doc_id for doc_id, _ in self.documents]
        if any(not doc_id for doc_id in ids):
            raise CorpusError("doc_id must be non-empty")
        if len(set(ids)) != len(ids):
            raise CorpusError("doc_ids must be unique")
        ordered = tuple(sorted(self.documents, key=lambda item: item[0]))
        object.__setattr__(self, "documents", ordered)

    @classmethod
    def from_texts(cls, texts, doc_ids=None, source_path: str = "") -> "Corpus":
        texts = list(texts)
        if doc_ids is None:
            width = max(len(str(len(texts))), 1)
            doc_ids = [f"doc{i:0{width}d}" for i in range(len(texts))]
        return cls(tuple(zip(doc_ids, texts)), source_path)

    @property
    def doc_ids(self) -> list[str]:
        return [doc_id for doc_id, _ in self.documents]

    @property
    def texts(self) -> list[str]:
        return [text for _, text in self.documents]

    def __len__(self) -> int:
        return len(self.documents)

    def __iter__(self):
        return iter(self.documents)


@dataclass(frozen=True)
class LabelSet:
    """Class names plus the set of class indices attached to each document.

    Documents missing from ``assignments`` carry no labels.
    """

    classes: tuple[str, ...]
    assignments: Mapping[str, frozenset[int]] = field(default_factory=dict)

    def __post_init__(self):
        p = len(self.classes)
        frozen = {}
        for doc_id, labels in self.assignments.items():
            labels = frozenset(int(k) for k in labels)
            if any(k < 0 or k >= p for k in labels):
                raise CorpusError(f"label index out of range for document {doc_id!r}")
            frozen[doc_id] = labels
        object.__setattr__(self, "classes", tuple(self.classes))
        object.__setattr__(self, "assignments", MappingProxyType(frozen))

    def labels_of(self, doc_id: str) -> frozenset[int]:
        return self.assignments.get(doc_id, frozenset())


def load_corpus(path) -> Corpus:
    """Read every ``*.txt`` file in ``path`` as one UTF-8 document.

    The document id is the file name without extension. Other files are ignored.
    """
    root = Path(path)
    if not root.is_dir():
        raise CorpusError(f"corpus directory not found: {root}")
    documents = []
    for file in root.iterdir():
        if not file.is_file() or file.suffix != ".txt":
            continue
        try:
            text = file.read_text(encoding="utf-8")
        except UnicodeDecodeError as exc:
            raise CorpusError(f"file is not valid UTF-8: {file}") from exc
        documents.append((file.stem, text))
    if not documents:
        raise CorpusError(f"no documents in {root}")
    return Corpus(tuple(documents), str(root))


def load_labels(path, corpus: Corpus) -> LabelSet:
    """Parse a ``doc_id,labels`` CSV whose label cells are ``;``-separated class names."""
    path = Path(path)
    known = set(corpus.doc_ids)
    rows: dict[str, list[str]] = {}
    with path.open(encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or [f.strip() for f in reader.fieldnames] != ["doc_id", "labels"]:
            raise CorpusError(f"{path}: expected header 'doc_id,labels'")
        for row in reader:
            doc_id = (row.get("doc_id") or "").strip()
            if doc_id not in known:
                raise CorpusError(f"unknown doc_id {doc_id}")
            if doc_id in rows:
                raise CorpusError(f"duplicate doc_id {doc_id}")
            cell = row.get("labels") or ""
            rows[doc_id] = [name.strip() for name in cell.split(";") if name.strip()]
    classes = sorted({name for names in rows.values() for name in names})
    index = {name: k for k, name in enumerate(classes)}
    assignments = {doc_id: frozenset(index[name] for name in names)
                   for doc_id, names in rows.items()}
    return LabelSet(tuple(classes), assignments)


def write_labels(path, labels: LabelSet, doc_ids=None) -> None:
    """Write ``labels`` in the format read by :func:`load_labels`."""
    doc_ids = sorted(labels.assignments) if doc_ids is None else doc_ids
    with Path(path).open("w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["doc_id", "labels"])
        for doc_id in doc_ids:
            names = [labels.classes[k] for k in sorted(labels.labels_of(doc_id))]
            writer.writerow([doc_id, ";".join(names)])
