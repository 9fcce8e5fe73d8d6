"""Homomorphism search from conjunctions into instances, plus triggers.

The search backtracks over instance atoms per body atom, most-constrained
atom first, candidates in instance insertion order.  Enumeration order is
deterministic, so analyses are reproducible run to run.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Iterator, Optional, Sequence

from .model import (
    Atom,
    Instance,
    Rule,
    SkolemTerm,
    Term,
    Variable,
    apply_atom,
)


class BudgetExceeded(Exception):
    def __init__(self, reason: str):
        super().__init__(reason)
        self.reason = reason


def match_term(pattern: Term, value: Term, binding: dict, trail: list) -> bool:
    """Match one pattern term against a ground term, extending `binding`.
    New bindings are recorded on `trail` for rollback."""
    if isinstance(pattern, Variable):
        bound = binding.get(pattern.name)
        if bound is None:
            binding[pattern.name] = value
            trail.append(pattern.name)
            return True
        return bound == value
    if isinstance(pattern, SkolemTerm):
        return (
            isinstance(value, SkolemTerm)
            and value.fn == pattern.fn
            and len(value.args) == len(pattern.args)
            and all(match_term(p, v, binding, trail) for p, v in zip(pattern.args, value.args))
        )
    return pattern == value


def match_atom(pattern: Atom, value: Atom, binding: dict) -> Optional[list]:
    """Extend `binding` so that pattern maps onto `value`; returns the trail
    of newly bound variables, or None (binding restored) on failure."""
    if pattern.pred != value.pred or len(pattern.args) != len(value.args):
        return None
    trail: list = []
    for p, v in zip(pattern.args, value.args):
        if not match_term(p, v, binding, trail):
            for name in trail:
                del binding[name]
            return None
    return trail


def _atom_vars(a: Atom) -> frozenset:
    out = set()

    def walk(t: Term) -> None:
        if isinstance(t, Variable):
            out.add(t.name)
        elif isinstance(t, SkolemTerm):
            for s in t.args:
                walk(s)

    for t in a.args:
        walk(t)
    return frozenset(out)


def order_atoms(conj: Sequence[Atom], inst: Instance) -> list:
    """Most-constrained-first: fewest candidate atoms, preferring atoms that
    share variables with ones already placed."""
    remaining = list(range(len(conj)))
    placed_vars: set = set()
    order = []
    while remaining:
        best = None
        best_key = None
        for idx in remaining:
            a = conj[idx]
            overlap = len(_atom_vars(a) & placed_vars)
            key = (-overlap, len(inst.by_pred(a.pred)), idx)
            if best_key is None or key < best_key:
                best, best_key = idx, key
        order.append(best)
        placed_vars |= _atom_vars(conj[best])
        remaining.remove(best)
    return order


def _candidates(inst: Instance, pred: str, derived_first: bool) -> Sequence[Atom]:
    atoms = inst.by_pred(pred)
    if not derived_first:
        return atoms
    derived = [a for a in atoms if inst.first_derived_at(a) > 0]
    database = [a for a in atoms if inst.first_derived_at(a) == 0]
    return derived + database


def find_homomorphisms(
    conj: Sequence[Atom],
    inst: Instance,
    derived_first: bool = False,
    probe: Optional[Callable[[], None]] = None,
    on_miss: Optional[Callable[[Atom, Atom], None]] = None,
) -> Iterator[dict]:
    """All substitutions h over vars(conj) with h(conj) contained in inst,
    each exactly once, in deterministic order.

    `probe` is charged once per candidate test; `on_miss` sees every
    (substituted pattern, candidate) pair that failed to match.
    """
    if not conj:
        yield {}
        return
    order = order_atoms(conj, inst)
    binding: dict = {}

    def search(depth: int) -> Iterator[dict]:
        if depth == len(order):
            yield dict(binding)
            return
        pattern = conj[order[depth]]
        for cand in _candidates(inst, pattern.pred, derived_first):
            if probe is not None:
                probe()
            trail = match_atom(pattern, cand, binding)
            if trail is None:
                if on_miss is not None:
                    on_miss(apply_atom(binding, pattern), cand)
                continue
            yield from search(depth + 1)
            for name in trail:
                del binding[name]

    yield from search(0)


@dataclass(frozen=True)
class Trigger:
    """Rule plus body homomorphism; `active` is tri-state (None = unknown).
    `triggering_steps` records when each matched body atom was derived."""

    rule: Rule
    h: tuple  # sorted (var, term) pairs
    active: Optional[bool]
    triggering_steps: frozenset

    def bindings(self) -> dict:
        return dict(self.h)


def freeze_bindings(h: dict) -> tuple:
    return tuple(sorted(h.items()))


def make_trigger(rule: Rule, h: dict, inst: Instance, active: Optional[bool] = None) -> Trigger:
    steps = frozenset(inst.first_derived_at(apply_atom(h, a)) for a in rule.body)
    return Trigger(rule=rule, h=freeze_bindings(h), active=active, triggering_steps=steps)


def is_active_trigger(
    rule: Rule,
    h: dict,
    inst: Instance,
    probe: Optional[Callable[[], None]] = None,
) -> bool:
    """True iff no extension of h over the existentials maps the head into
    the instance. Datalog rules: active iff some head atom is missing."""
    partial = [apply_atom(h, a) for a in rule.head]
    if rule.is_datalog:
        return any(a not in inst for a in partial)
    for _ext in find_homomorphisms(partial, inst, probe=probe):
        return False
    return True


def apply_trigger(rule: Rule, h: dict, inst: Instance, step: int) -> list:
    """Add h(sk(head)) at `step`; returns (added atoms, undo records)."""
    undos = []
    added = []
    for a in rule.skolem_head:
        ground = apply_atom(h, a)
        rec = inst.add(ground, step)
        if rec is not None:
            undos.append(rec)
            added.append(ground)
    return [added, undos]


def body_image(rule: Rule, h: dict) -> list:
    return [apply_atom(h, a) for a in rule.body]
