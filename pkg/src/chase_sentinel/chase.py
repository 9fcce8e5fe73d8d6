"""Chase execution: breadth-first skolem chase, path-driven runs, exhaustive
restricted-chase enumeration, and the Datalog-first admissibility filter.

All runs are budgeted; possibly-infinite chases come back with an explicit
BudgetExhausted outcome instead of a verdict.
"""

from __future__ import annotations

import time
from dataclasses import dataclass
from typing import Callable, Iterable, List, Optional, Sequence, Union

from .hom import (
    BudgetExceeded,
    apply_trigger,
    body_image,
    find_homomorphisms,
    freeze_bindings,
    is_active_trigger,
)
from .model import Atom, Instance, Rule, RuleSet, has_cyclic_nesting


@dataclass(frozen=True)
class Budget:
    """Resource limits; None means unlimited.

    max_height halts a run as soon as a term of that height appears, which
    is how callers probe "does the chase reach depth H".
    """

    max_steps: Optional[int] = None
    max_height: Optional[int] = None
    max_atoms: Optional[int] = None
    wall_clock_s: Optional[float] = None  # per run / per cycle check
    max_probes: Optional[int] = None
    max_renamings: Optional[int] = 200
    max_cycles: Optional[int] = 20000
    total_wall_clock_s: Optional[float] = None  # whole-analysis deadline


DEFAULT_BUDGET = Budget(
    max_steps=None,
    max_height=None,
    max_atoms=100_000,
    wall_clock_s=60.0,
    max_probes=1_000_000,
)


class Meter:
    """Mutable counters enforcing a Budget."""

    def __init__(self, budget: Optional[Budget]):
        self.budget = budget or Budget()
        self.steps = 0
        self.probes = 0
        self.renamings = 0
        self._deadline = (
            time.monotonic() + self.budget.wall_clock_s
            if self.budget.wall_clock_s is not None
            else None
        )

    def charge_probe(self) -> None:
        self.probes += 1
        b = self.budget
        if b.max_probes is not None and self.probes > b.max_probes:
            raise BudgetExceeded("probes")
        if self._deadline is not None and self.probes % 256 == 0:
            if time.monotonic() > self._deadline:
                raise BudgetExceeded("wall_clock")

    def out_of_time(self) -> bool:
        return self._deadline is not None and time.monotonic() > self._deadline

    def charge_step(self) -> Optional[str]:
        self.steps += 1
        b = self.budget
        if b.max_steps is not None and self.steps > b.max_steps:
            return "steps"
        if self.out_of_time():
            return "wall_clock"
        return None

    def check_instance(self, inst: Instance) -> Optional[str]:
        b = self.budget
        if b.max_atoms is not None and len(inst) > b.max_atoms:
            return "atoms"
        if b.max_height is not None and inst.ht() >= b.max_height:
            return "height"
        return None


@dataclass(frozen=True)
class Saturated:
    pass


@dataclass(frozen=True)
class BudgetExhausted:
    reason: str


@dataclass(frozen=True)
class CyclicTermFound:
    term: object


Outcome = Union[Saturated, BudgetExhausted, CyclicTermFound]


@dataclass(frozen=True)
class TraceStep:
    rule_id: str
    bindings: tuple  # sorted (var, term) pairs
    added: tuple  # atoms newly derived by this application


@dataclass
class ChaseTrace:
    initial: tuple  # database atoms
    steps: List[TraceStep]
    outcome: Outcome
    final: Optional[Instance] = None

    def rule_sequence(self) -> tuple:
        return tuple(s.rule_id for s in self.steps)

    def replay(self, rules: RuleSet) -> Instance:
        """Re-execute the trace, verifying every application; returns the
        reconstructed instance."""
        inst = Instance(self.initial, step=0)
        for i, step in enumerate(self.steps, start=1):
            rule = rules.by_id[step.rule_id]
            h = dict(step.bindings)
            for a in body_image(rule, h):
                if a not in inst:
                    raise AssertionError("replay: body atom %s missing at step %d" % (a, i))
            added, _ = apply_trigger(rule, h, inst, i)
            if tuple(added) != step.added:
                raise AssertionError(
                    "replay: step %d added %s, trace says %s" % (i, added, step.added)
                )
        return inst

    def to_json_lines(self) -> str:
        import json

        lines = []
        for i, s in enumerate(self.steps, start=1):
            lines.append(
                json.dumps(
                    {
                        "step": i,
                        "rule": s.rule_id,
                        "bindings": {v: str(t) for v, t in s.bindings},
                        "added": [str(a) for a in s.added],
                    },
                    sort_keys=True,
                )
            )
        tail = {"outcome": type(self.outcome).__name__}
        if isinstance(self.outcome, BudgetExhausted):
            tail["reason"] = self.outcome.reason
        if isinstance(self.outcome, CyclicTermFound):
            tail["term"] = str(self.outcome.term)
        lines.append(json.dumps(tail, sort_keys=True))
        return "".join(line + "\n" for line in lines)


def _cyclic_term_in(atoms: Iterable[Atom]):
    for a in atoms:
        for t in a.args:
            if has_cyclic_nesting(t):
                return t
    return None


def skolem_chase(
    database: Union[Instance, Iterable[Atom]],
    rules: RuleSet,
    budget: Optional[Budget] = None,
    detect_cyclic_terms: bool = False,
) -> ChaseTrace:
    """Breadth-first fixpoint: each round applies every not-yet-applied
    trigger found against the previous round's instance."""
    inst = database.copy() if isinstance(database, Instance) else Instance(database, step=0)
    meter = Meter(budget)
    trace = ChaseTrace(initial=inst.atoms(), steps=[], outcome=Saturated(), final=inst)
    applied: set = set()
    step = 0
    while True:
        reason = meter.check_instance(inst)
        if reason is not None:
            trace.outcome = BudgetExhausted(reason)
            return trace
        pending = []
        try:
            for rule in rules:
                for h in find_homomorphisms(rule.body, inst, probe=meter.charge_probe):
                    key = (rule.id, freeze_bindings(h))
                    if key not in applied:
                        pending.append((rule, h, key))
        except BudgetExceeded as e:
            trace.outcome = BudgetExhausted(e.reason)
            return trace
        if not pending:
            trace.outcome = Saturated()
            return trace
        for rule, h, key in pending:
            applied.add(key)
            step += 1
            reason = meter.charge_step()
            if reason is not None:
                trace.outcome = BudgetExhausted(reason)
                return trace
            added, _ = apply_trigger(rule, h, inst, step)
            trace.steps.append(TraceStep(rule.id, freeze_bindings(h), tuple(added)))
            if detect_cyclic_terms:
                t = _cyclic_term_in(added)
                if t is not None:
                    trace.outcome = CyclicTermFound(t)
                    return trace
            reason = meter.check_instance(inst)
            if reason is not None:
                trace.outcome = BudgetExhausted(reason)
                return trace


@dataclass(frozen=True)
class PathFailure:
    step: int
    reason: str  # 'NoTrigger' | 'NoActiveTrigger'


def run_path(
    database: Union[Instance, Iterable[Atom]],
    path: Sequence[Rule],
    mode: str = "restricted",
    chooser: Optional[Callable[[int, Rule, list], Optional[dict]]] = None,
    budget: Optional[Budget] = None,
) -> Union[ChaseTrace, PathFailure]:
    """Apply the rules of `path` in order. In restricted mode each step needs
    an active trigger. `chooser(step, rule, homs)` picks among candidate
    homomorphisms; default takes the first."""
    if mode not in ("skolem", "restricted"):
        raise ValueError("mode must be 'skolem' or 'restricted'")
    inst = database.copy() if isinstance(database, Instance) else Instance(database, step=0)
    meter = Meter(budget)
    trace = ChaseTrace(initial=inst.atoms(), steps=[], outcome=Saturated(), final=inst)
    for i, rule in enumerate(path, start=1):
        try:
            homs = list(find_homomorphisms(rule.body, inst, probe=meter.charge_probe))
        except BudgetExceeded as e:
            trace.outcome = BudgetExhausted(e.reason)
            return trace
        if not homs:
            return PathFailure(i, "NoTrigger")
        if mode == "restricted":
            homs = [h for h in homs if is_active_trigger(rule, h, inst)]
            if not homs:
                return PathFailure(i, "NoActiveTrigger")
        h = chooser(i, rule, homs) if chooser is not None else homs[0]
        if h is None:
            return PathFailure(i, "NoActiveTrigger" if mode == "restricted" else "NoTrigger")
        added, _ = apply_trigger(rule, h, inst, i)
        trace.steps.append(TraceStep(rule.id, freeze_bindings(h), tuple(added)))
    return trace


def active_triggers(
    rules: Iterable[Rule], inst: Instance, probe: Optional[Callable[[], None]] = None
) -> list:
    out = []
    for rule in rules:
        for h in find_homomorphisms(rule.body, inst, probe=probe):
            if is_active_trigger(rule, h, inst, probe=probe):
                out.append((rule, h))
    return out


def restricted_chase_exhaustive(
    database: Union[Instance, Iterable[Atom]],
    rules: RuleSet,
    budget: Optional[Budget] = None,
    max_traces: int = 10_000,
    datalog_first: bool = False,
) -> list:
    """Every restricted chase sequence (every active-trigger choice at every
    step) up to the step budget. Intended for small inputs only (documented
    guidance: <= 4 rules, <= 30 reachable atoms)."""
    base = database.copy() if isinstance(database, Instance) else Instance(database, step=0)
    initial_atoms = base.atoms()
    meter = Meter(budget)
    cap = meter.budget.max_steps
    traces: list = []
    steps: list = []

    def snapshot(outcome: Outcome) -> None:
        traces.append(
            ChaseTrace(initial=initial_atoms, steps=list(steps), outcome=outcome, final=None)
        )

    def explore(inst: Instance, depth: int) -> None:
        if len(traces) >= max_traces:
            return
        try:
            options = active_triggers(rules, inst, probe=meter.charge_probe)
        except BudgetExceeded as e:
            snapshot(BudgetExhausted(e.reason))
            return
        if datalog_first and any(r.is_datalog for r, _ in options):
            options = [(r, h) for r, h in options if r.is_datalog]
        if not options:
            snapshot(Saturated())
            return
        if cap is not None and depth >= cap:
            snapshot(BudgetExhausted("steps"))
            return
        for rule, h in options:
            if len(traces) >= max_traces:
                return
            added, undos = apply_trigger(rule, h, inst, depth + 1)
            steps.append(TraceStep(rule.id, freeze_bindings(h), tuple(added)))
            explore(inst, depth + 1)
            steps.pop()
            for rec in reversed(undos):
                inst.undo(rec)

    explore(base, 0)
    return traces


def longest_restricted_run(
    database: Union[Instance, Iterable[Atom]],
    rules: RuleSet,
    cap: int,
    datalog_first: bool = False,
) -> Optional[int]:
    """Length of the longest restricted chase sequence, exploring the state
    DAG with memoization; None when some sequence exceeds `cap` steps."""
    base = database.copy() if isinstance(database, Instance) else Instance(database, step=0)
    memo: dict = {}

    def longest(inst: Instance, depth: int) -> Optional[int]:
        key = inst.fingerprint()
        if key in memo:
            return memo[key]
        if depth > cap:
            return None
        options = active_triggers(rules, inst)
        if datalog_first and any(r.is_datalog for r, _ in options):
            options = [(r, h) for r, h in options if r.is_datalog]
        best = 0
        for rule, h in options:
            _, undos = apply_trigger(rule, h, inst, depth + 1)
            sub = longest(inst, depth + 1)
            for rec in reversed(undos):
                inst.undo(rec)
            if sub is None:
                return None
            best = max(best, 1 + sub)
            if depth + best > cap:
                return None
        memo[key] = best
        return best

    result = longest(base, 0)
    return result


def greedy_restricted(
    database: Union[Instance, Iterable[Atom]],
    rules: RuleSet,
    budget: Optional[Budget] = None,
    datalog_first: bool = False,
) -> ChaseTrace:
    """One restricted chase sequence, always firing the first active trigger
    in (rule order, homomorphism order); Datalog rules first when asked."""
    inst = database.copy() if isinstance(database, Instance) else Instance(database, step=0)
    meter = Meter(budget)
    trace = ChaseTrace(initial=inst.atoms(), steps=[], outcome=Saturated(), final=inst)
    step = 0
    while True:
        reason = meter.check_instance(inst)
        if reason is not None:
            trace.outcome = BudgetExhausted(reason)
            return trace
        try:
            options = active_triggers(rules, inst, probe=meter.charge_probe)
        except BudgetExceeded as e:
            trace.outcome = BudgetExhausted(e.reason)
            return trace
        if datalog_first and any(r.is_datalog for r, _ in options):
            options = [(r, h) for r, h in options if r.is_datalog]
        if not options:
            trace.outcome = Saturated()
            return trace
        step += 1
        reason = meter.charge_step()
        if reason is not None:
            trace.outcome = BudgetExhausted(reason)
            return trace
        rule, h = options[0]
        added, _ = apply_trigger(rule, h, inst, step)
        trace.steps.append(TraceStep(rule.id, freeze_bindings(h), tuple(added)))


def datalog_first_filter(path: Sequence[Rule], rule_set: Optional[RuleSet] = None) -> bool:
    """Admissibility of a path under the Datalog-first strategy.

    Every non-final generating occurrence must come after all Datalog rules
    of the set have been scheduled at least once; the final element of the
    path (the closing occurrence of a cycle) is exempt.  When `rule_set` is
    omitted the Datalog rules of the path itself are used.
    """
    if rule_set is not None:
        datalog = {r.id for r in rule_set.datalog_rules}
    else:
        datalog = {r.id for r in path if r.is_datalog}
    if not datalog:
        return True
    seen: set = set()
    for i, r in enumerate(path):
        is_final = i == len(path) - 1
        if not r.is_datalog and not is_final and not datalog <= seen:
            return False
        if r.is_datalog:
            seen.add(r.id)
    return True
