"""S-expression logical forms: parsing, name binding, and execution.

Reader output is untrusted text, so every failure mode (bad syntax, unknown
name, unknown relation, empty result) maps to an error instead of a crash;
the pipeline counts such candidates as non-executable.

Operators: JOIN, AND, R (reverse), ARGMIN, ARGMAX, COUNT and the comparatives
lt / le / gt / ge. Entity names appear bracketed, e.g. "[ Incentive Software ]".
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Union

from .errors import BindingError, NonExecutableError, NotFoundError, ParseError
from .kb import KbStore, Literal, sniff_literal

COMPARE_OPS = {"lt", "le", "gt", "ge"}


# -- AST ---------------------------------------------------------------------

@dataclass(frozen=True)
class EntityRef:
    name: Optional[str] = None
    entity_id: Optional[str] = None


@dataclass(frozen=True)
class ClassRef:
    class_id: str


@dataclass(frozen=True)
class LiteralRef:
    raw: str


@dataclass(frozen=True)
class Reverse:
    relation: str


@dataclass(frozen=True)
class Join:
    relation: Union[str, Reverse]
    inner: "Node"


@dataclass(frozen=True)
class And:
    left: "Node"
    right: "Node"


@dataclass(frozen=True)
class ArgMin:
    set_expr: "Node"
    relation: str


@dataclass(frozen=True)
class ArgMax:
    set_expr: "Node"
    relation: str


@dataclass(frozen=True)
class Count:
    set_expr: "Node"


@dataclass(frozen=True)
class Compare:
    op: str  # lt | le | gt | ge
    relation: str
    value: str


Node = Union[EntityRef, ClassRef, LiteralRef, Join, And, ArgMin, ArgMax, Count, Compare]


# -- parsing -----------------------------------------------------------------

def _tokenize(text: str) -> list:
    for ch in "()[]":
        text = text.replace(ch, f" {ch} ")
    return text.split()


class _Parser:
    def __init__(self, tokens):
        self.tokens = tokens
        self.pos = 0

    def peek(self):
        return self.tokens[self.pos] if self.pos < len(self.tokens) else None

    def next(self):
        tok = self.peek()
        if tok is None:
            raise ParseError("unexpected end of logical form")
        self.pos += 1
        return tok

    def expect(self, token):
        tok = self.next()
        if tok != token:
            raise ParseError(f"expected {token!r}, got {tok!r}")

    def atom(self) -> str:
        tok = self.next()
        if tok in "()[]":
            raise ParseError(f"expected atom, got {tok!r}")
        return tok

    def entity_name(self) -> EntityRef:
        # "[" already consumed; name = tokens up to the closing bracket
        parts = []
        while True:
            tok = self.next()
            if tok == "]":
                break
            if tok in "()[":
                raise ParseError(f"unexpected {tok!r} inside entity brackets")
            parts.append(tok)
        if not parts:
            raise ParseError("empty entity name brackets")
        return EntityRef(name=" ".join(parts))

    def relation_expr(self) -> Union[str, Reverse]:
        tok = self.next()
        if tok == "(":
            self.expect("R")
            relation = self.atom()
            self.expect(")")
            return Reverse(relation)
        if tok in ")[]":
            raise ParseError(f"expected relation, got {tok!r}")
        return tok

    def operand(self, class_position: bool = False) -> Node:
        """A set-valued operand. Bare tokens are classes in class positions
        (AND / ARGMIN / ARGMAX first argument), else entity ids or literals."""
        tok = self.next()
        if tok == "(":
            return self.compound()
        if tok == "[":
            return self.entity_name()
        if tok in ")]":
            raise ParseError(f"unexpected {tok!r}")
        if class_position:
            return ClassRef(tok)
        lit = sniff_literal(tok)
        if lit.kind != "string":
            return LiteralRef(tok)
        return EntityRef(entity_id=tok)

    def compound(self) -> Node:
        head = self.next()
        if head == "JOIN":
            relation = self.relation_expr()
            inner = self.operand()
            self.expect(")")
            return Join(relation, inner)
        if head == "AND":
            left = self.operand(class_position=True)
            right = self.operand()
            self.expect(")")
            return And(left, right)
        if head in ("ARGMIN", "ARGMAX"):
            set_expr = self.operand(class_position=True)
            relation = self.atom()
            self.expect(")")
            cls = ArgMin if head == "ARGMIN" else ArgMax
            return cls(set_expr, relation)
        if head == "COUNT":
            set_expr = self.operand()
            self.expect(")")
            return Count(set_expr)
        if head in COMPARE_OPS:
            relation = self.atom()
            value = self.atom()
            self.expect(")")
            return Compare(head, relation, value)
        raise ParseError(f"unknown operator: {head!r}")


def parse_lf(text: str) -> Node:
    parser = _Parser(_tokenize(text))
    tok = parser.next()
    if tok == "(":
        node = parser.compound()
    elif tok == "[":
        node = parser.entity_name()
    elif tok in ")]":
        raise ParseError(f"unexpected {tok!r}")
    else:
        node = EntityRef(entity_id=tok)
    if parser.peek() is not None:
        raise ParseError(f"trailing tokens after logical form: {parser.peek()!r}")
    return node


def render_lf(node: Node) -> str:
    if isinstance(node, EntityRef):
        return f"[ {node.name} ]" if node.name is not None else node.entity_id
    if isinstance(node, ClassRef):
        return node.class_id
    if isinstance(node, LiteralRef):
        return node.raw
    if isinstance(node, Reverse):
        return f"(R {node.relation})"
    if isinstance(node, Join):
        rel = render_lf(node.relation) if isinstance(node.relation, Reverse) else node.relation
        return f"(JOIN {rel} {render_lf(node.inner)})"
    if isinstance(node, And):
        return f"(AND {render_lf(node.left)} {render_lf(node.right)})"
    if isinstance(node, ArgMin):
        return f"(ARGMIN {render_lf(node.set_expr)} {node.relation})"
    if isinstance(node, ArgMax):
        return f"(ARGMAX {render_lf(node.set_expr)} {node.relation})"
    if isinstance(node, Count):
        return f"(COUNT {render_lf(node.set_expr)})"
    if isinstance(node, Compare):
        return f"({node.op} {node.relation} {node.value})"
    raise TypeError(f"not an AST node: {node!r}")


# -- binding -----------------------------------------------------------------

def bind_entities(node: Node, store: KbStore) -> Node:
    """Replace every named entity reference with its id via the name index."""
    if isinstance(node, EntityRef):
        if node.name is None:
            return node
        try:
            return EntityRef(entity_id=store.resolve_name(node.name))
        except NotFoundError as exc:
            raise BindingError(str(exc)) from exc
    if isinstance(node, Join):
        return Join(node.relation, bind_entities(node.inner, store))
    if isinstance(node, And):
        return And(bind_entities(node.left, store), bind_entities(node.right, store))
    if isinstance(node, ArgMin):
        return ArgMin(bind_entities(node.set_expr, store), node.relation)
    if isinstance(node, ArgMax):
        return ArgMax(bind_entities(node.set_expr, store), node.relation)
    if isinstance(node, Count):
        return Count(bind_entities(node.set_expr, store))
    return node


# -- execution ---------------------------------------------------------------
#
# Result sets hold entity ids (str) and Literal values. The executor walks the
# store's indexes; the test suite checks it against a full-enumeration
# interpreter on random stores.

def _check_relation(store: KbStore, relation: str):
    if relation not in store.by_relation:
        raise NonExecutableError("unknown-relation", f"relation not in KB: {relation}")


def _entity_values(store: KbStore, eid: str, relation: str) -> list:
    return [t for t in store.forward.get((eid, relation), ()) if isinstance(t, Literal)]


def _extreme(store: KbStore, members, relation: str, want_max: bool) -> set:
    best_key = None
    best: set = set()
    kind_seen = None
    for elem in sorted(members, key=_elem_key):
        if isinstance(elem, Literal):
            continue
        for lit in _entity_values(store, elem, relation):
            kind, payload = lit.comparable()
            if kind_seen is None:
                kind_seen = kind
            elif kind != kind_seen:
                raise NonExecutableError(
                    "type", f"mixed literal kinds under {relation}: {kind_seen} vs {kind}")
            if best_key is None or (payload > best_key if want_max else payload < best_key):
                best_key = payload
                best = {elem}
            elif payload == best_key:
                best.add(elem)
    return best


def _compare_holds(op: str, left, right) -> bool:
    if op == "lt":
        return left < right
    if op == "le":
        return left <= right
    if op == "gt":
        return left > right
    return left >= right


def _elem_key(elem):
    return elem.key() if isinstance(elem, Literal) else ("ent", elem)


def evaluate(node: Node, store: KbStore) -> set:
    """Evaluate a bound AST to a set of entity ids and literals."""
    if isinstance(node, EntityRef):
        if node.entity_id is None:
            raise NonExecutableError("bind", f"unbound entity name: {node.name!r}")
        if node.entity_id not in store.entities:
            raise NonExecutableError("bind", f"unknown entity id: {node.entity_id}")
        return {node.entity_id}
    if isinstance(node, LiteralRef):
        return {sniff_literal(node.raw)}
    if isinstance(node, ClassRef):
        return set(store.members_of_class(node.class_id))
    if isinstance(node, Join):
        if isinstance(node.relation, Reverse):
            relation = node.relation.relation
            _check_relation(store, relation)
            inner = evaluate(node.inner, store)
            out = set()
            for elem in inner:
                if isinstance(elem, Literal):
                    continue
                out.update(store.forward.get((elem, relation), ()))
            return out
        _check_relation(store, node.relation)
        inner = evaluate(node.inner, store)
        out = set()
        for elem in inner:
            out.update(store.inverse.get((_elem_key(elem), node.relation), ()))
        return out
    if isinstance(node, And):
        if isinstance(node.left, ClassRef):
            members = store.members_of_class(node.left.class_id)
            return {e for e in evaluate(node.right, store)
                    if not isinstance(e, Literal) and e in members}
        return evaluate(node.left, store) & evaluate(node.right, store)
    if isinstance(node, (ArgMin, ArgMax)):
        _check_relation(store, node.relation)
        members = evaluate(node.set_expr, store)
        return _extreme(store, members, node.relation, isinstance(node, ArgMax))
    if isinstance(node, Count):
        members = evaluate(node.set_expr, store)
        if not members:
            raise NonExecutableError("empty", "COUNT over an empty set")
        return {Literal(str(len(members)), "integer")}
    if isinstance(node, Compare):
        _check_relation(store, node.relation)
        target = sniff_literal(node.value)
        t_kind, t_payload = target.comparable()
        out = set()
        for head, tail in store.by_relation[node.relation]:
            if not isinstance(tail, Literal):
                continue
            kind, payload = tail.comparable()
            if kind != t_kind:
                continue
            if _compare_holds(node.op, payload, t_payload):
                out.add(head)
        return out
    raise TypeError(f"not an AST node: {node!r}")


def execute_lf(node: Node, store: KbStore) -> tuple:
    """Execute a bound logical form; answers rendered as names / raw literals.

    Returns a non-empty tuple of answer strings in deterministic order.
    Raises NonExecutableError (reason "empty") when the result set is empty.
    """
    result = evaluate(node, store)
    if not result:
        raise NonExecutableError("empty", "logical form produced no answers")
    rendered = sorted(
        lit.raw if isinstance(lit, Literal) else store.render(lit) for lit in result
    )
    # distinct elements can render identically (rare literal/name clash); keep set semantics
    return tuple(dict.fromkeys(rendered))


def execute_candidate(text: str, store: KbStore) -> tuple:
    """parse + bind + execute an untrusted candidate string."""
    try:
        ast = parse_lf(text)
    except ParseError as exc:
        raise NonExecutableError("parse", str(exc)) from exc
    try:
        bound = bind_entities(ast, store)
    except BindingError as exc:
        raise NonExecutableError("bind", str(exc)) from exc
    return execute_lf(bound, store)
