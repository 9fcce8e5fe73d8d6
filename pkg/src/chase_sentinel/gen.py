"""Parameterized TGD generator for benchmark scenarios.

Rules draw predicates uniformly from a pool with a per-rule repetition cap.
Body atoms join in a chain; head atoms either chain (the last variable of
an atom is the first variable of the next) or stay pairwise
variable-disjoint, with fresh existential variables filling every head slot
not shared with the body.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from typing import List

from .model import Atom, Rule, RuleSet, Variable


class GenerationError(ValueError):
    pass


@dataclass(frozen=True)
class GenParams:
    count: int
    predicate_pool: int = 20
    arity: int = 4
    max_repeated_relations: int = 3
    body_atoms: int = 1
    head_atoms: int = 3
    head_shape: str = "chained"  # or 'discrete'
    seed: int = 0

    def __post_init__(self) -> None:
        positives = (
            self.predicate_pool,
            self.arity,
            self.max_repeated_relations,
            self.body_atoms,
            self.head_atoms,
        )
        if self.count < 0 or any(p < 1 for p in positives):
            raise GenerationError("all generator parameters must be positive")
        if self.head_shape not in ("chained", "discrete"):
            raise GenerationError("head_shape must be 'chained' or 'discrete'")


def _draw_predicates(rng: random.Random, params: GenParams) -> List[str]:
    """Predicate names for one rule (body atoms first), respecting the
    per-rule repetition cap."""
    need = params.body_atoms + params.head_atoms
    if need > params.predicate_pool * params.max_repeated_relations:
        raise GenerationError(
            "cannot place %d atoms with pool %d and at most %d repeats"
            % (need, params.predicate_pool, params.max_repeated_relations)
        )
    counts: dict = {}
    names = []
    for _ in range(need):
        while True:
            p = "p%d" % rng.randrange(params.predicate_pool)
            if counts.get(p, 0) < params.max_repeated_relations:
                counts[p] = counts.get(p, 0) + 1
                names.append(p)
                break
    return names


def _make_rule(rng: random.Random, params: GenParams, ordinal: int) -> Rule:
    if params.arity == 1 and params.head_shape == "chained" and params.head_atoms > 1:
        raise GenerationError("chained heads need arity >= 2")
    preds = _draw_predicates(rng, params)
    suffix = "_%d" % ordinal
    fresh = iter("V%d" % i for i in range(10_000))

    def var(name: str) -> Variable:
        return Variable(name + suffix)

    body: List[Atom] = []
    links = [var(next(fresh)) for _ in range(params.body_atoms + 1)]
    body_vars: List[Variable] = []
    for i in range(params.body_atoms):
        if params.arity == 1:
            args = (links[0],)
        else:
            mids = [var(next(fresh)) for _ in range(params.arity - 2)]
            args = tuple([links[i]] + mids + [links[i + 1]])
        for t in args:
            if t not in body_vars:
                body_vars.append(t)
        body.append(Atom(preds[i], args))

    head: List[Atom] = []
    ex_counter = iter("Z%d" % i for i in range(10_000))
    shared = body_vars[: max(0, params.arity - 1)]
    while len(shared) < params.arity - 1:
        shared.append(body_vars[len(shared) % len(body_vars)])
    prev_link = None
    for j in range(params.head_atoms):
        pred = preds[params.body_atoms + j]
        if j == 0:
            link = var(next(ex_counter))
            args = tuple(shared[: params.arity - 1] + [link]) if params.arity > 1 else (link,)
            prev_link = link
        elif params.head_shape == "chained":
            link = var(next(ex_counter))
            mids = [var(next(ex_counter)) for _ in range(params.arity - 2)]
            args = tuple([prev_link] + mids + [link])
            prev_link = link
        else:  # discrete: no shared variables at all
            args = tuple(var(next(ex_counter)) for _ in range(params.arity))
        head.append(Atom(pred, args))
    return Rule(id="g%d" % ordinal, body=tuple(body), head=tuple(head))


def generate(params: GenParams) -> RuleSet:
    """Deterministic under seed; structural post-conditions (arity, repeat
    cap, join shape) hold for every rule."""
    rng = random.Random(params.seed)
    rules = tuple(_make_rule(rng, params, i + 1) for i in range(params.count))
    return RuleSet(rules)
