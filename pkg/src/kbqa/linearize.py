"""KB linearization: triples -> sentences -> per-entity documents -> passages.

CVT nodes (nameless mediators of n-ary facts) are flattened: their incident
facts become one sentence group, attached to every named neighbor, with the
CVT id never rendered.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from typing import Iterable, Optional

from .kb import KbStore, Literal, Triple

DEFAULT_MAX_WORDS = 100

_REL_PUNCT = re.compile(r"[._/]+")
_SPACES = re.compile(r" +")


def clean_relation(relation: str) -> str:
    """Replace relation punctuation (dots, underscores, slashes) with spaces."""
    return _SPACES.sub(" ", _REL_PUNCT.sub(" ", relation)).strip()


def strip_domain(relation: str) -> str:
    """Drop the leading domain segment of a 3+-part dotted relation."""
    parts = relation.split(".")
    if len(parts) >= 3:
        return ".".join(parts[1:])
    return relation


@dataclass(frozen=True)
class Sentence:
    text: str
    source: Optional[Triple] = None


@dataclass
class Document:
    head_entity: str
    sentences: list

    @property
    def body(self) -> str:
        return " ".join(s.text for s in self.sentences)


@dataclass(frozen=True)
class Passage:
    passage_id: str
    title: str
    body: str

    @property
    def word_count(self) -> int:
        return len(self.body.split())


def linearize_triple(store: KbStore, triple: Triple) -> Sentence:
    """Render one named-head triple as "<head name> <relation words> <tail>."."""
    head_name = store.name_of(triple.head)
    tail = store.render(triple.tail)
    return Sentence(f"{head_name} {clean_relation(triple.relation)} {tail}.", triple)


def linearize_cvt(store: KbStore, cvt_id: str, strip_relation_domain: bool = True,
                  warnings: Optional[list] = None) -> list:
    """Sentences for every fact incident to a CVT node, without the node id.

    Facts appear in store load order. Facts connecting to another CVT are
    skipped with a warning; so are name/type bookkeeping relations.
    """
    sentences = []
    for triple in store.triples:
        if triple.relation in (store.name_relation, store.type_relation):
            continue
        if triple.head == cvt_id:
            endpoint = triple.tail
        elif not isinstance(triple.tail, Literal) and triple.tail == cvt_id:
            endpoint = triple.head
        else:
            continue
        if not isinstance(endpoint, Literal):
            ent = store.entities.get(endpoint)
            if ent is not None and ent.is_cvt:
                if warnings is not None:
                    warnings.append(f"skipping CVT-to-CVT fact at {cvt_id} -> {endpoint}")
                continue
        relation = strip_domain(triple.relation) if strip_relation_domain else triple.relation
        sentences.append(Sentence(f"{clean_relation(relation)} {store.render(endpoint)}.", triple))
    if not sentences and warnings is not None:
        warnings.append(f"CVT node {cvt_id} has no named neighbors")
    return sentences


def _adjacent_named(store: KbStore, cvt_id: str) -> set:
    """Named entities touching a CVT node from either direction."""
    named = set()
    for triple in store.triples:
        if triple.head == cvt_id and not isinstance(triple.tail, Literal):
            other = triple.tail
        elif not isinstance(triple.tail, Literal) and triple.tail == cvt_id:
            other = triple.head
        else:
            continue
        ent = store.entities.get(other)
        if ent is not None and not ent.is_cvt:
            named.add(other)
    return named


def build_documents(store: KbStore, strip_relation_domain: bool = True,
                    warnings: Optional[list] = None) -> Iterable[Document]:
    """One document per named entity with at least one fact or CVT group.

    Direct facts come first, sorted by (relation, tail); then CVT groups
    sorted by CVT id. Name triples are skipped (the name opens every
    sentence already).
    """
    cvt_ids = sorted(eid for eid, ent in store.entities.items() if ent.is_cvt)
    cvt_sentences = {
        cid: linearize_cvt(store, cid, strip_relation_domain, warnings) for cid in cvt_ids
    }
    attachments: dict[str, list] = {}
    for cid in cvt_ids:
        for eid in _adjacent_named(store, cid):
            attachments.setdefault(eid, []).append(cid)

    for eid in sorted(store.entities):
        ent = store.entities[eid]
        if ent.is_cvt:
            continue
        direct = [
            t for t in store.triples
            if t.head == eid and t.relation != store.name_relation
            and not (not isinstance(t.tail, Literal) and store.entities[t.tail].is_cvt)
        ]
        direct.sort(key=lambda t: (t.relation, t.tail_key()))
        sentences = [linearize_triple(store, t) for t in direct]
        for cid in sorted(attachments.get(eid, [])):
            sentences.extend(cvt_sentences[cid])
        if sentences:
            yield Document(eid, sentences)


def chunk_passages(doc: Document, title: str, max_words: int = DEFAULT_MAX_WORDS) -> list:
    """Split a document into non-overlapping passages of at most max_words words.

    Splits fall on sentence boundaries where possible; a single over-long
    sentence is hard-split on word boundaries.
    """
    if max_words < 1:
        raise ValueError("max_words must be >= 1")
    word_runs = []
    buf: list[str] = []
    for sentence in doc.sentences:
        words = sentence.text.split()
        if buf and len(buf) + len(words) > max_words:
            word_runs.append(buf)
            buf = []
        while len(words) > max_words:
            word_runs.append(words[:max_words])
            words = words[max_words:]
        buf.extend(words)
        if len(buf) == max_words:
            word_runs.append(buf)
            buf = []
    if buf:
        word_runs.append(buf)
    return [
        Passage(f"{doc.head_entity}#{i}", title, " ".join(run))
        for i, run in enumerate(word_runs)
    ]


def linearize_store(store: KbStore, max_words: int = DEFAULT_MAX_WORDS,
                    strip_relation_domain: bool = True,
                    warnings: Optional[list] = None) -> Iterable[Passage]:
    """Full linearization: every document of the store, chunked into passages."""
    for doc in build_documents(store, strip_relation_domain, warnings):
        title = store.name_of(doc.head_entity) or doc.head_entity
        yield from chunk_passages(doc, title, max_words)


def write_passages_jsonl(passages: Iterable[Passage], fh) -> int:
    """Write passages as JSON lines {"id", "title", "text"}; returns the count."""
    n = 0
    for p in passages:
        fh.write(json.dumps({"id": p.passage_id, "title": p.title, "text": p.body},
                            ensure_ascii=False) + "\n")
        n += 1
    return n


def read_passages_jsonl(fh) -> list:
    passages = []
    for line in fh:
        if not line.strip():
            continue
        rec = json.loads(line)
        passages.append(Passage(rec["id"], rec["title"], rec["text"]))
    return passages
