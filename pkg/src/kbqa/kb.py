"""In-memory RDF-style knowledge base: loading, name disambiguation, adjacency.

The store is built once from a line-oriented triple file and is immutable
afterwards, so concurrent reads need no locking.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from datetime import datetime
from typing import Iterable, Optional, Union

from .errors import DataError, NotFoundError, ParseError

_LINE_RE = re.compile(r"^(\S+)[ \t]+(\S+)[ \t]+(.+?)\s*\.\s*$")


@dataclass(frozen=True)
class Literal:
    raw: str
    kind: str  # "string" | "integer" | "float" | "datetime"

    def key(self):
        return ("lit", self.kind, self.raw)

    def comparable(self):
        """Value used for ordering; kind family + sortable payload."""
        if self.kind in ("integer", "float"):
            return ("numeric", float(self.raw))
        if self.kind == "datetime":
            return ("datetime", datetime.fromisoformat(self.raw))
        return ("string", self.raw)


Tail = Union[str, Literal]  # entity id or literal


@dataclass(frozen=True)
class Triple:
    head: str
    relation: str
    tail: Tail

    def tail_key(self):
        return self.tail.key() if isinstance(self.tail, Literal) else ("ent", self.tail)


@dataclass
class Entity:
    id: str
    canonical_name: Optional[str] = None
    aliases: list = field(default_factory=list)
    types: set = field(default_factory=set)
    assigned_name: Optional[str] = None

    @property
    def is_cvt(self):
        return self.canonical_name is None


def sniff_literal(raw: str) -> Literal:
    """Type a literal by syntax: integer, then float, then datetime, then string."""
    try:
        int(raw)
        return Literal(raw, "integer")
    except ValueError:
        pass
    try:
        float(raw)
        return Literal(raw, "float")
    except ValueError:
        pass
    try:
        datetime.fromisoformat(raw)
        return Literal(raw, "datetime")
    except ValueError:
        pass
    return Literal(raw, "string")


class KbStore:
    """Immutable triple store with forward/inverse adjacency and a name index."""

    def __init__(self, name_relation: str, type_relation: str):
        self.name_relation = name_relation
        self.type_relation = type_relation
        self.entities: dict[str, Entity] = {}
        self.triples: list[Triple] = []
        self.forward: dict[tuple, list] = {}   # (head, relation) -> [tail, ...]
        self.inverse: dict[tuple, list] = {}   # (tail_key, relation) -> [head, ...]
        self.by_relation: dict[str, list] = {}  # relation -> [(head, tail), ...]
        self.name_index: dict[str, str] = {}
        self.warnings: list[str] = []
        self._disambiguated = False
        self._seen = set()

    # -- construction -------------------------------------------------------

    def _entity(self, eid: str) -> Entity:
        ent = self.entities.get(eid)
        if ent is None:
            ent = Entity(eid)
            self.entities[eid] = ent
        return ent

    def _add_triple(self, head: str, relation: str, tail: Tail):
        triple = Triple(head, relation, tail)
        sig = (head, relation, triple.tail_key())
        if sig in self._seen:
            return
        self._seen.add(sig)
        self.triples.append(triple)
        self.forward.setdefault((head, relation), []).append(tail)
        self.inverse.setdefault((triple.tail_key(), relation), []).append(head)
        self.by_relation.setdefault(relation, []).append((head, tail))

    # -- queries ------------------------------------------------------------

    def entity(self, eid: str) -> Entity:
        try:
            return self.entities[eid]
        except KeyError:
            raise NotFoundError(f"unknown entity id: {eid!r}") from None

    def name_of(self, eid: str) -> Optional[str]:
        ent = self.entities.get(eid)
        return ent.assigned_name if ent else None

    def render(self, endpoint: Tail) -> str:
        """Human-readable form of a triple endpoint: assigned name, id, or raw literal."""
        if isinstance(endpoint, Literal):
            return endpoint.raw
        name = self.name_of(endpoint)
        return name if name is not None else endpoint

    def members_of_class(self, class_id: str) -> set:
        return {eid for eid, ent in self.entities.items() if class_id in ent.types}

    def neighbors(self, eid: str, direction: str = "forward") -> list:
        """All (relation, endpoint) pairs of eid, sorted for determinism."""
        self.entity(eid)
        out = []
        if direction == "forward":
            for (head, relation), tails in self.forward.items():
                if head == eid:
                    out.extend((relation, t) for t in tails)
        elif direction == "inverse":
            key = ("ent", eid)
            for (tail_key, relation), heads in self.inverse.items():
                if tail_key == key:
                    out.extend((relation, h) for h in heads)
        else:
            raise ValueError(f"bad direction: {direction!r}")
        out.sort(key=lambda p: (p[0], p[1].key() if isinstance(p[1], Literal) else ("ent", p[1])))
        return out

    def resolve_name(self, name: str) -> str:
        if not self._disambiguated:
            raise DataError("resolve_name requires a disambiguated store")
        try:
            return self.name_index[name]
        except KeyError:
            raise NotFoundError(f"unknown entity name: {name!r}") from None


def _parse_object(token: str) -> Tail:
    if len(token) >= 2 and token.startswith('"') and token.endswith('"'):
        return sniff_literal(token[1:-1])
    return token


def load_ntriples(lines: Iterable[str], name_relation: str, type_relation: str) -> KbStore:
    """Build a store from "subject predicate object ." records.

    The object is either an id token or a double-quoted literal. Triples using
    name_relation set canonical names; type_relation triples populate entity
    classes. Duplicates are dropped; conflicting names keep the first seen.
    """
    store = KbStore(name_relation, type_relation)
    for line_no, line in enumerate(lines, start=1):
        if isinstance(line, bytes):
            line = line.decode("utf-8")
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        m = _LINE_RE.match(line)
        if m is None:
            raise ParseError(f"malformed triple record: {line!r}", line_no=line_no)
        subject, predicate, obj_token = m.groups()
        obj = _parse_object(obj_token)
        subject_ent = store._entity(subject)

        if predicate == name_relation:
            name = obj.raw if isinstance(obj, Literal) else obj
            lit = obj if isinstance(obj, Literal) else Literal(name, "string")
            if subject_ent.canonical_name is None:
                subject_ent.canonical_name = name
            elif subject_ent.canonical_name != name:
                store.warnings.append(
                    f"line {line_no}: conflicting name {name!r} for {subject}; "
                    f"keeping {subject_ent.canonical_name!r}"
                )
            store._add_triple(subject, predicate, lit)
            continue

        if predicate == type_relation:
            class_id = obj.raw if isinstance(obj, Literal) else obj
            subject_ent.types.add(class_id)
            # class identifiers are not entities; keep the fact with a string tail
            store._add_triple(subject, predicate, Literal(class_id, "string"))
            continue

        if isinstance(obj, Literal):
            store._add_triple(subject, predicate, obj)
        else:
            store._entity(obj)
            store._add_triple(subject, predicate, obj)
    return store


def disambiguate_names(store: KbStore) -> KbStore:
    """Make entity names unique by suffixing " v1", " v2", ... within collision groups.

    Entities are processed in ascending id order; the first in a group keeps the
    bare name. A suffix that collides with a pre-existing distinct name is
    skipped (k keeps incrementing) with a warning.
    """
    groups: dict[str, list] = {}
    for eid in sorted(store.entities):
        ent = store.entities[eid]
        if ent.canonical_name is not None:
            groups.setdefault(ent.canonical_name, []).append(eid)

    occupied = {name for name, ids in groups.items() if len(ids) == 1}
    for name in sorted(groups):
        ids = groups[name]
        if len(ids) == 1:
            store.entities[ids[0]].assigned_name = name
            store.name_index[name] = ids[0]
            continue
        occupied.add(name)
        store.entities[ids[0]].assigned_name = name
        store.name_index[name] = ids[0]
        k = 1
        for eid in ids[1:]:
            candidate = f"{name} v{k}"
            while candidate in occupied:
                store.warnings.append(
                    f"suffix collision: {candidate!r} already taken; trying v{k + 1}"
                )
                k += 1
                candidate = f"{name} v{k}"
            occupied.add(candidate)
            store.entities[eid].assigned_name = candidate
            store.name_index[candidate] = eid
            k += 1
    store._disambiguated = True
    return store
