import random

import pytest

from kbqa.kb import disambiguate_names, load_ntriples
from kbqa.logical_form import (And, ArgMax, ArgMin, ClassRef, Compare, Count,
                               EntityRef, Join, LiteralRef, Reverse)

FREESCAPE_LINES = [
    'm.1 name "Freescape" .',
    'm.2 name "Incentive Software" .',
    "m.1 game_engine.developer m.2 .",
    'm.1 release_date "1987" .',
]

MARRIAGE_LINES = [
    'm.rn name "Richard Nixon" .',
    'm.pn name "Pat Nixon" .',
    'm.mi name "The Mission Inn Hotel & Spa" .',
    "m.02h98gq marriage.spouse m.rn .",
    "m.02h98gq marriage.spouse m.pn .",
    "m.02h98gq marriage.location_of_ceremony m.mi .",
]

# ids chosen so the worked logical form binds and executes on this store
LF_TOY_LINES = [
    'm.0d_qhv name "Incentive Software" .',
    'm.05b7fq name "Freescape" .',
    "m.05b7fq type cvg.computer_game_engine .",
    "m.05b7fq cvg.computer_game_engine.developer m.0d_qhv .",
]

LF_TOY_QUESTION = "what video game engine did incentive software develop?"
LF_TOY_LF = ("(AND cvg.computer_game_engine (JOIN cvg.computer_game_engine.developer"
             " [ Incentive Software ]))")


def make_store(lines, name_relation="name", type_relation="type", disambiguate=True):
    store = load_ntriples(lines, name_relation, type_relation)
    return disambiguate_names(store) if disambiguate else store


@pytest.fixture
def freescape_store():
    return make_store(FREESCAPE_LINES)


@pytest.fixture
def marriage_store():
    return make_store(MARRIAGE_LINES)


@pytest.fixture
def lf_toy_store():
    return make_store(LF_TOY_LINES)


# -- random generators -------------------------------------------------------

def random_store(rng: random.Random, n_entities=20, n_triples=60, n_relations=5,
                 n_classes=3, name_collision_rate=0.2):
    """A random disambiguated store built through the normal loading path."""
    relations = [f"dom{i}.type{i}.rel{i}" for i in range(n_relations)]
    classes = [f"dom.class{i}" for i in range(n_classes)]
    ids = [f"m.{i:03d}" for i in range(n_entities)]
    lines = []
    for i, eid in enumerate(ids):
        if rng.random() < name_collision_rate and i > 0:
            name = f"Name{rng.randrange(i)}"
        else:
            name = f"Name{i}"
        lines.append(f'{eid} name "{name}" .')
        if rng.random() < 0.6:
            lines.append(f"{eid} type {rng.choice(classes)} .")
    for _ in range(n_triples):
        head = rng.choice(ids)
        rel = rng.choice(relations)
        if rng.random() < 0.3:
            if rng.random() < 0.5:
                tail = f'"{rng.randrange(1900, 2030)}"'
            else:
                tail = f'"{rng.randrange(1950, 2030)}-0{rng.randrange(1, 10)}-1{rng.randrange(0, 10)}"'
            lines.append(f"{head} {rel} {tail} .")
        else:
            lines.append(f"{head} {rel} {rng.choice(ids)} .")
    store = make_store(lines)
    return store, relations, classes, ids


def random_ast(rng: random.Random, relations, classes, ids, depth):
    """A random bound AST of at most the given depth."""
    if depth <= 0:
        choice = rng.randrange(3)
        if choice == 0:
            return EntityRef(entity_id=rng.choice(ids))
        if choice == 1:
            return ClassRef(rng.choice(classes))
        return LiteralRef(str(rng.randrange(1900, 2030)))
    kind = rng.randrange(7)
    if kind == 0:
        rel = rng.choice(relations)
        rel_expr = Reverse(rel) if rng.random() < 0.3 else rel
        return Join(rel_expr, random_ast(rng, relations, classes, ids, depth - 1))
    if kind == 1:
        left = (ClassRef(rng.choice(classes)) if rng.random() < 0.5
                else random_ast(rng, relations, classes, ids, depth - 1))
        return And(left, random_ast(rng, relations, classes, ids, depth - 1))
    if kind == 2:
        return ArgMin(random_ast(rng, relations, classes, ids, depth - 1),
                      rng.choice(relations))
    if kind == 3:
        return ArgMax(random_ast(rng, relations, classes, ids, depth - 1),
                      rng.choice(relations))
    if kind == 4:
        return Count(random_ast(rng, relations, classes, ids, depth - 1))
    if kind == 5:
        return Compare(rng.choice(["lt", "le", "gt", "ge"]), rng.choice(relations),
                       str(rng.randrange(1900, 2030)))
    return random_ast(rng, relations, classes, ids, 0)
