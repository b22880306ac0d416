"""Corpus loading, sentence segmentation, boilerplate filtering and labels.

The input format is UTF-8 JSON lines with keys doc_id, author_id, title,
body, created_at (RFC-3339) and flairs (array of strings).
"""

from __future__ import annotations

import json
import logging
import math
from collections import Counter
from dataclasses import dataclass, field
from datetime import datetime, timezone
from enum import Enum

log = logging.getLogger(__name__)


class CorpusError(Exception):
    """Fatal corpus-level problem (duplicate ids, empty selection, ...)."""


class DreamType(str, Enum):
    NIGHTMARE = "nightmare"
    RECURRING = "recurring"
    LUCID = "lucid"
    VIVID = "vivid"


# Keyword stems searched case-insensitively in title+body per label.
DREAM_TYPE_STEMS = {
    DreamType.NIGHTMARE: ("nightmar",),
    DreamType.RECURRING: ("recurring", "re-occurring"),
    DreamType.LUCID: ("lucid",),
    DreamType.VIVID: ("vivid",),
}

# Community flairs exist for nightmare and recurring only; matched
# case-insensitively.
DREAM_TYPE_FLAIRS = {
    DreamType.NIGHTMARE: ("nightmare",),
    DreamType.RECURRING: ("recurring dream",),
}


@dataclass(frozen=True)
class Document:
    doc_id: str
    author_id: str
    title: str
    body: str
    created_at: datetime
    flairs: frozenset[str] = field(default_factory=frozenset)

    @property
    def text(self) -> str:
        """Title and body concatenated; the unit all analyses operate on."""
        return f"{self.title}\n{self.body}".strip()


@dataclass(frozen=True)
class Sentence:
    doc_id: str
    index: int
    text: str

    @property
    def char_len(self) -> int:
        return len(self.text)

    @property
    def sentence_id(self) -> str:
        return f"{self.doc_id}:{self.index}"


@dataclass
class Corpus:
    documents: list[Document]
    rejected: list[dict]

    def __len__(self) -> int:
        return len(self.documents)

    def by_id(self) -> dict[str, Document]:
        return {d.doc_id: d for d in self.documents}


@dataclass
class CorpusStats:
    n_documents: int
    n_authors: int
    mean_sentences: float
    std_sentences: float
    mean_words: float
    std_words: float
    mean_characters: float
    std_characters: float
    median_sentences: float
    median_words: float
    median_characters: float


def _parse_created_at(raw: str) -> datetime:
    ts = datetime.fromisoformat(raw.replace("Z", "+00:00"))
    if ts.tzinfo is None:
        ts = ts.replace(tzinfo=timezone.utc)
    return ts.astimezone(timezone.utc)


def parse_record(obj: dict) -> Document:
    """Validate one raw record and build a Document. Raises ValueError."""
    for key in ("doc_id", "author_id", "title", "body", "created_at"):
        if key not in obj:
            raise ValueError(f"missing field {key!r}")
    flairs = obj.get("flairs", [])
    if not isinstance(flairs, list) or not all(isinstance(f, str) for f in flairs):
        raise ValueError("flairs must be an array of strings")
    doc = Document(
        doc_id=str(obj["doc_id"]),
        author_id=str(obj["author_id"]),
        title=str(obj["title"]),
        body=str(obj["body"]),
        created_at=_parse_created_at(str(obj["created_at"])),
        flairs=frozenset(flairs),
    )
    if not doc.text:
        raise ValueError("title+body empty after whitespace trim")
    return doc


def load_corpus(path) -> Corpus:
    """Load a JSONL corpus file.

    Malformed lines are collected (with line numbers) and the run continues;
    duplicate doc_ids are fatal. Documents come back sorted by created_at
    ascending (doc_id breaks ties deterministically).
    """
    documents: list[Document] = []
    rejected: list[dict] = []
    seen: dict[str, int] = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
                if not isinstance(obj, dict):
                    raise ValueError("record is not a JSON object")
                doc = parse_record(obj)
            except (json.JSONDecodeError, ValueError) as exc:
                rejected.append({"line": lineno, "error": str(exc), "raw": line.rstrip("\n")})
                continue
            if doc.doc_id in seen:
                raise CorpusError(
                    f"duplicate doc_id {doc.doc_id!r} at line {lineno} "
                    f"(first seen at line {seen[doc.doc_id]})"
                )
            seen[doc.doc_id] = lineno
            documents.append(doc)
    documents.sort(key=lambda d: (d.created_at, d.doc_id))
    if rejected:
        log.warning("rejected %d malformed records", len(rejected))
    return Corpus(documents=documents, rejected=rejected)


# --- Sentence segmentation ------------------------------------------------

_TERMINATORS = ".!?"

# Tokens that end with '.' as part of the word, not a sentence boundary.
_ABBREVIATIONS = frozenset(
    "mr mrs ms dr prof st jr sr vs etc e.g i.e eg ie cf al approx dept est "
    "fig no vol p pp a.m p.m".split()
)


def _is_abbreviation(text: str, dot_index: int) -> bool:
    start = dot_index
    while start > 0 and (text[start - 1].isalnum() or text[start - 1] == "."):
        start -= 1
    token = text[start:dot_index].lower().rstrip(".")
    return token in _ABBREVIATIONS or (len(token) == 1 and token.isalpha())


def split_sentences(text: str) -> list[str]:
    """Deterministic rule-based sentence split.

    Boundaries: runs of '.', '!', '?' followed by whitespace or end of
    string, and newline runs. A '.' between digits (times like "5.30") or
    after a known abbreviation never splits.
    """
    pieces: list[str] = []
    buf: list[str] = []
    i = 0
    n = len(text)
    while i < n:
        ch = text[i]
        if ch == "\n":
            pieces.append("".join(buf))
            buf = []
            while i < n and text[i] in "\r\n":
                i += 1
            continue
        if ch in _TERMINATORS:
            # consume the full terminator run ("...", "?!", ...)
            j = i
            while j < n and text[j] in _TERMINATORS:
                j += 1
            guarded = False
            if ch == "." and j - i == 1:
                if 0 < i < n - 1 and text[i - 1].isdigit() and text[i + 1].isdigit():
                    guarded = True
                elif _is_abbreviation(text, i):
                    guarded = True
            buf.append(text[i:j])
            i = j
            if guarded:
                continue
            if i >= n or text[i].isspace():
                pieces.append("".join(buf))
                buf = []
            continue
        buf.append(ch)
        i += 1
    if buf:
        pieces.append("".join(buf))
    return [p.strip() for p in pieces if p.strip()]


def segment(document: Document) -> list[Sentence]:
    """Split a document into sentences; whitespace-only documents yield []."""
    return [
        Sentence(doc_id=document.doc_id, index=i, text=t)
        for i, t in enumerate(split_sentences(document.text))
    ]


def segment_corpus(corpus: Corpus) -> list[Sentence]:
    out: list[Sentence] = []
    for doc in corpus.documents:
        out.extend(segment(doc))
    return out


# --- Boilerplate filtering ------------------------------------------------

def boilerplate_ranking(sentences: list[Sentence]) -> list[tuple[str, int]]:
    """Distinct sentence strings ranked by (frequency desc, length asc, lex asc)."""
    counts = Counter(s.text for s in sentences)
    return sorted(counts.items(), key=lambda kv: (-kv[1], len(kv[0]), kv[0]))


def filter_boilerplate(
    sentences: list[Sentence], n: int = 10000
) -> tuple[list[Sentence], list[tuple[str, int]]]:
    """Remove every occurrence of the top-n boilerplate sentence strings.

    Returns (retained sentences, removed (string, frequency) list for audit).
    """
    if n < 0:
        raise ValueError("n must be >= 0")
    if n == 0:
        return list(sentences), []
    ranking = boilerplate_ranking(sentences)
    if n > len(ranking):
        log.warning(
            "boilerplate n=%d exceeds %d distinct sentence strings; removing all",
            n, len(ranking),
        )
    removed = ranking[:n]
    removed_set = {text for text, _ in removed}
    retained = [s for s in sentences if s.text not in removed_set]
    return retained, removed


# --- Dream-type labels ----------------------------------------------------

def assign_dream_types(document: Document) -> set[DreamType]:
    """Labels from keyword stems in title+body or from community flairs."""
    labels: set[DreamType] = set()
    haystack = f"{document.title} {document.body}".lower()
    flairs = {f.lower() for f in document.flairs}
    for label, stems in DREAM_TYPE_STEMS.items():
        if any(stem in haystack for stem in stems):
            labels.add(label)
    for label, names in DREAM_TYPE_FLAIRS.items():
        if flairs & set(names):
            labels.add(label)
    return labels


# --- Corpus statistics ----------------------------------------------------

def _mean_std(values: list[float]) -> tuple[float, float]:
    n = len(values)
    mean = sum(values) / n
    var = sum((v - mean) ** 2 for v in values) / n
    return mean, math.sqrt(var)


def _median(values: list[float]) -> float:
    ordered = sorted(values)
    n = len(ordered)
    mid = n // 2
    if n % 2:
        return float(ordered[mid])
    return (ordered[mid - 1] + ordered[mid]) / 2


def corpus_stats(corpus: Corpus, label: DreamType | None = None) -> CorpusStats:
    """Per-document sentence/word/character statistics, optionally per label."""
    if not corpus.documents:
        raise CorpusError("corpus is empty")
    if label is None:
        docs = corpus.documents
    else:
        docs = [d for d in corpus.documents if label in assign_dream_types(d)]
        if not docs:
            raise CorpusError(f"no documents carry label {label.value!r}")
    n_sent = [float(len(segment(d))) for d in docs]
    n_words = [float(len(d.text.split())) for d in docs]
    n_chars = [float(len(d.text)) for d in docs]
    ms, ss = _mean_std(n_sent)
    mw, sw = _mean_std(n_words)
    mc, sc = _mean_std(n_chars)
    return CorpusStats(
        n_documents=len(docs),
        n_authors=len({d.author_id for d in docs}),
        mean_sentences=ms, std_sentences=ss,
        mean_words=mw, std_words=sw,
        mean_characters=mc, std_characters=sc,
        median_sentences=_median(n_sent),
        median_words=_median(n_words),
        median_characters=_median(n_chars),
    )
