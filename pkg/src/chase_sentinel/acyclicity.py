"""Skolem-chase acyclicity tests (WA, JA, aGRD, MFA), strongly connected
components of the dependency graph, and cycle functions built from a test.

MFA is three-valued: a budget-truncated chase yields `unknown`, which cycle
functions treat as a failed condition (the sound direction).
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence

from . import critdb
from .chase import Budget, CyclicTermFound, Saturated, skolem_chase
from .deps import DependencyGraph, dependency_graph
from .model import Atom, Position, Rule, RuleSet, Variable


class Condition(enum.Enum):
    WA = "wa"
    JA = "ja"
    AGRD = "agrd"
    MFA = "mfa"


@dataclass(frozen=True)
class CheckResult:
    condition: Condition
    value: Optional[bool]  # None = unknown (budget)
    witness: object = None  # cycle of positions / variables / rules, or term


def _var_positions(atoms: Sequence[Atom], var: str) -> List[Position]:
    out = []
    for a in atoms:
        for slot, t in enumerate(a.args, start=1):
            if isinstance(t, Variable) and t.name == var:
                out.append(Position(a.pred, slot))
    return out


@dataclass(frozen=True)
class PositionGraph:
    nodes: tuple
    normal_edges: tuple
    special_edges: tuple


def position_graph(rs: RuleSet) -> PositionGraph:
    nodes = tuple(
        Position(p, i) for p, arity in rs.schema.items() for i in range(1, arity + 1)
    )
    normal: set = set()
    special: set = set()
    for r in rs:
        frontier_positions: list = []
        for x in r.frontier:
            bpos = _var_positions(r.body, x)
            hpos = _var_positions(r.head, x)
            frontier_positions.extend(bpos)
            for b in bpos:
                for h in hpos:
                    normal.add((b, h))
        for z in sorted(r.existentials):
            zpos = _var_positions(r.head, z)
            for b in frontier_positions:
                for h in zpos:
                    special.add((b, h))
    return PositionGraph(nodes, tuple(sorted(normal, key=str)), tuple(sorted(special, key=str)))


def _find_path(adjacency: Dict, start, goal) -> Optional[list]:
    """Deterministic DFS path start -> goal (possibly empty when equal)."""
    stack = [(start, [start])]
    seen = set()
    while stack:
        node, path = stack.pop()
        if node == goal:
            return path
        if node in seen:
            continue
        seen.add(node)
        for nxt in reversed(adjacency.get(node, ())):
            if nxt not in seen or nxt == goal:
                stack.append((nxt, path + [nxt]))
    return None


def is_wa(rs: RuleSet) -> CheckResult:
    """Weak acyclicity: no cycle of the position graph uses a special edge."""
    g = position_graph(rs)
    adjacency: Dict = {}
    for u, v in g.normal_edges + g.special_edges:
        adjacency.setdefault(u, []).append(v)
    for u in adjacency:
        adjacency[u].sort(key=str)
    for u, v in g.special_edges:
        path = _find_path(adjacency, v, u)
        if path is not None:
            return CheckResult(Condition.WA, False, witness=tuple([u] + path))
    return CheckResult(Condition.WA, True)


def joint_move_sets(rs: RuleSet) -> Dict[str, frozenset]:
    """Move(y) per existential variable: least fixpoint of head-position
    seeding plus frontier propagation over all rules."""
    moves: Dict[str, set] = {}
    for r in rs:
        for z in sorted(r.existentials):
            moves[z] = set(_var_positions(r.head, z))
    changed = True
    while changed:
        changed = False
        for move in moves.values():
            for r in rs:
                for x in r.frontier:
                    bpos = set(_var_positions(r.body, x))
                    if bpos and bpos <= move:
                        hpos = set(_var_positions(r.head, x))
                        if not hpos <= move:
                            move |= hpos
                            changed = True
    return {y: frozenset(m) for y, m in moves.items()}


def is_ja(rs: RuleSet) -> CheckResult:
    """Joint acyclicity: the existential-variable dependency graph built from
    the Move sets has no cycle."""
    moves = joint_move_sets(rs)
    owner: Dict[str, Rule] = {}
    for r in rs:
        for z in r.existentials:
            owner[z] = r
    adjacency: Dict[str, list] = {y: [] for y in moves}
    for y1 in moves:
        for y2, r2 in owner.items():
            for x in r2.frontier:
                bpos = set(_var_positions(r2.body, x))
                if _var_positions(r2.head, x) and bpos and bpos <= moves[y1]:
                    adjacency[y1].append(y2)
                    break
    for y in adjacency:
        adjacency[y] = sorted(set(adjacency[y]))
    for y in sorted(moves):
        for nxt in adjacency[y]:
            path = _find_path(adjacency, nxt, y)
            if path is not None:
                return CheckResult(Condition.JA, False, witness=tuple([y] + path))
    return CheckResult(Condition.JA, True)


def is_agrd(rs: RuleSet, graph: Optional[DependencyGraph] = None) -> CheckResult:
    """Acyclic graph of rule dependencies; self-loops count as cycles."""
    g = graph if graph is not None else dependency_graph(rs)
    adjacency: Dict[int, list] = {}
    for i, j in g.edges:
        adjacency.setdefault(i, []).append(j)
    for i in adjacency:
        adjacency[i].sort()
    for i in range(len(rs.rules)):
        for nxt in adjacency.get(i, ()):
            path = _find_path(adjacency, nxt, i)
            if path is not None:
                cycle = tuple(rs.rules[p].id for p in [i] + path)
                return CheckResult(Condition.AGRD, False, witness=cycle)
    return CheckResult(Condition.AGRD, True)


def is_mfa(rs: RuleSet, budget: Optional[Budget] = None) -> CheckResult:
    """Model-faithful acyclicity: the skolem chase of the critical database
    must saturate without producing a cyclic skolem term."""
    db = critdb.skolem_critical_db(rs)
    trace = skolem_chase(db, rs, budget=budget, detect_cyclic_terms=True)
    if isinstance(trace.outcome, Saturated):
        return CheckResult(Condition.MFA, True)
    if isinstance(trace.outcome, CyclicTermFound):
        return CheckResult(Condition.MFA, False, witness=trace.outcome.term)
    return CheckResult(Condition.MFA, None, witness=trace.outcome.reason)


_MFA_DEFAULT_BUDGET = Budget(max_steps=20_000, max_atoms=50_000, wall_clock_s=30.0)


def check_condition(
    condition: Condition, rs: RuleSet, budget: Optional[Budget] = None
) -> CheckResult:
    if condition is Condition.WA:
        return is_wa(rs)
    if condition is Condition.JA:
        return is_ja(rs)
    if condition is Condition.AGRD:
        return is_agrd(rs)
    if condition is Condition.MFA:
        return is_mfa(rs, budget=budget or _MFA_DEFAULT_BUDGET)
    raise ValueError("unknown condition %r" % condition)


def connected_components(graph: DependencyGraph) -> List[tuple]:
    """Strongly connected components of the dependency graph (the mutual
    reachability reading of connectivity), ordered by smallest rule index."""
    n = len(graph.rule_set.rules)
    adjacency: Dict[int, list] = {i: [] for i in range(n)}
    for i, j in graph.edges:
        adjacency[i].append(j)
    index_counter = [0]
    stack: list = []
    lowlink = [0] * n
    index = [-1] * n
    on_stack = [False] * n
    components: List[list] = []

    def strongconnect(v: int) -> None:
        work = [(v, 0)]
        while work:
            node, pi = work[-1]
            if pi == 0:
                index[node] = lowlink[node] = index_counter[0]
                index_counter[0] += 1
                stack.append(node)
                on_stack[node] = True
            recurse = False
            for k in range(pi, len(adjacency[node])):
                w = adjacency[node][k]
                if index[w] == -1:
                    work[-1] = (node, k + 1)
                    work.append((w, 0))
                    recurse = True
                    break
                if on_stack[w]:
                    lowlink[node] = min(lowlink[node], index[w])
            if recurse:
                continue
            if lowlink[node] == index[node]:
                comp = []
                while True:
                    w = stack.pop()
                    on_stack[w] = False
                    comp.append(w)
                    if w == node:
                        break
                components.append(sorted(comp))
            work.pop()
            if work:
                parent = work[-1][0]
                lowlink[parent] = min(lowlink[parent], lowlink[node])

    for v in range(n):
        if index[v] == -1:
            strongconnect(v)
    components.sort(key=lambda c: c[0])
    rules = graph.rule_set.rules
    return [tuple(rules[i] for i in comp) for comp in components]


class CycleFunction:
    """Maps (rule set, cycle) to True/False by checking the condition on the
    cycle's distinct rules; memoized per distinct rule subset."""

    def __init__(self, condition: Condition, budget: Optional[Budget] = None):
        self.condition = condition
        self.budget = budget
        self._memo: Dict[frozenset, Optional[bool]] = {}

    def check_rules(self, rules: Sequence[Rule]) -> Optional[bool]:
        key = frozenset(r.id for r in rules)
        if key not in self._memo:
            subset = RuleSet(tuple(dict.fromkeys(rules)))
            self._memo[key] = check_condition(self.condition, subset, self.budget).value
        return self._memo[key]

    def __call__(self, rs: RuleSet, cycle) -> bool:
        path = getattr(cycle, "path", cycle)
        value = self.check_rules(tuple(path))
        return bool(value)  # unknown counts as F


def cycle_function(condition: Condition, budget: Optional[Budget] = None) -> CycleFunction:
    return CycleFunction(condition, budget)
