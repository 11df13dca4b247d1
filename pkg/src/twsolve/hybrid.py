"""Hybrid nested solving: abstraction of the primal graph, DP over the
abstraction, sub-instances dispatched per boundary assignment, nested
refinement with a depth limit.

The abstraction greedily removes the highest-degree vertex (ties: smallest id)
until the retained subgraph decomposes within the width threshold. Removed
vertices group into connected components; each component's boundary (its
retained neighbors) is injected into one decomposition bag, so the DP row at
that host node determines the whole boundary assignment and the component's
interior count multiplies in exactly once. Results are exact on every path.
"""

from __future__ import annotations

import json
import shlex
import subprocess
import tempfile
import threading
import time
from dataclasses import dataclass, field
from pathlib import Path

from .errors import DepthExhaustedWithoutSubSolver, SubSolverFailure
from .model import CnfFormula, primal_graph
from .parsing import write_dimacs
from .treedecomp import decompose, make_nice, validate
from .dpsat import brute_force_count, brute_force_sat, dp_run, \
    shallowest_covering_nodes

INTERNAL_GUARD_VARS = 22  # 2^22 assignments


@dataclass
class SolverConfig:
    width_threshold: int = 10          # W: DP handles widths up to this
    max_depth: int = 2                 # D: nesting levels below the top
    sub_solver: str = "internal"       # or a command template with {file}
    seed: int = 0
    heuristic: str = "min-fill"
    boundary_budget: int = 4096        # memoized boundary assignments per component
    jobs: int = 1

    def __post_init__(self):
        if self.width_threshold < 1:
            raise ValueError("width threshold W must be >= 1")
        if self.max_depth < 0:
            raise ValueError("max nesting depth D must be >= 0")
        if self.jobs < 1:
            raise ValueError("jobs must be >= 1")


@dataclass
class SubSolverRequest:
    """A conditioned residual handed to a sub-solver."""

    formula: CnfFormula
    mode: str  # "decide" | "count"


@dataclass
class Component:
    vertices: tuple   # interior vertex ids, sorted
    boundary: tuple   # retained neighbor ids, sorted
    host: int         # node of the (augmented) decomposition holding boundary


@dataclass
class Abstraction:
    graph: object            # retained induced subgraph
    retained: tuple
    removed: tuple
    components: list
    td: object               # decomposition of the retained graph, augmented


@dataclass
class RunStats:
    widths_seen: list = field(default_factory=list)
    max_depth_seen: int = 0
    subsolver_calls: int = 0
    components_seen: int = 0
    wall_time_s: float = 0.0
    unsupported: tuple = ("projected-model-counting",)

    def to_json(self):
        return json.dumps({
            "widths_seen": self.widths_seen,
            "max_depth_seen": self.max_depth_seen,
            "subsolver_calls": self.subsolver_calls,
            "components_seen": self.components_seen,
            "wall_time_s": round(self.wall_time_s, 6),
            "unsupported": list(self.unsupported),
        }, sort_keys=True)


def build_abstraction(graph, width_threshold, heuristic="min-fill", seed=0):
    """Greedy max-degree removal until the retained part decomposes within W.

    Host nodes are chosen as the bag with the largest boundary share
    (ties: shallowest, then smallest id); boundaries are injected into their
    host bags with connectedness repaired along tree paths.
    """
    if width_threshold < 1:
        raise ValueError("width threshold W must be >= 1")
    retained = sorted(graph.vertices)
    while True:
        td = decompose(graph, heuristic=heuristic, seed=seed, vertices=retained)
        if td.width <= width_threshold:
            break
        sub = graph.induced(retained)
        victim = min(retained, key=lambda u: (-sub.degree(u), u))
        retained.remove(victim)

    retained_set = set(retained)
    removed = sorted(set(graph.vertices) - retained_set)
    components = []
    if removed:
        bags = dict(td.bags)
        for comp in graph.induced(removed).components():
            boundary = sorted({w for v in comp for w in graph.neighbors(v)
                               if w in retained_set})
            host = _choose_host(td, bags, boundary)
            _inject(td, bags, host, boundary)
            components.append(Component(tuple(comp), tuple(boundary), host))
        td = td.with_bags(bags)

    abstraction = Abstraction(
        graph=graph.induced(retained),
        retained=tuple(retained),
        removed=tuple(removed),
        components=components,
        td=td)
    if __debug__:
        assert validate(td, abstraction.graph).ok
        for comp in components:
            assert set(comp.boundary) <= td.bag(comp.host), \
                "boundary must sit inside its host bag"
    return abstraction


def _choose_host(td, bags, boundary):
    bset = set(boundary)
    return min(bags, key=lambda t: (-len(bags[t] & bset), td.depth(t), t))


def _inject(td, bags, host, boundary):
    adj = {t: set() for t in bags}
    for a, b in td.edges:
        adj[a].add(b)
        adj[b].add(a)
    for v in boundary:
        if v in bags[host]:
            continue
        # shortest tree path from host to any bag already holding v
        prev = {host: None}
        queue = [host]
        found = None
        i = 0
        while i < len(queue):
            t = queue[i]
            i += 1
            if v in bags[t]:
                found = t
                break
            for s in sorted(adj[t]):
                if s not in prev:
                    prev[s] = t
                    queue.append(s)
        assert found is not None
        t = prev[found]
        while t is not None:
            bags[t] = bags[t] | {v}
            t = prev[t]


# ----------------------------------------------------------------- solving

def hybrid_count(cnf, config, stats=None):
    """Exact model count of cnf via abstraction-based nested DP."""
    stats = stats if stats is not None else RunStats()
    start = time.time()
    result = _hybrid(cnf, config, depth=0, counting=True, stats=stats)
    stats.wall_time_s += time.time() - start
    return result


def hybrid_decide(cnf, config, stats=None):
    """Satisfiability via the same strategy with counts elided."""
    stats = stats if stats is not None else RunStats()
    start = time.time()
    result = _hybrid(cnf, config, depth=0, counting=False, stats=stats)
    stats.wall_time_s += time.time() - start
    return bool(result)


def _hybrid(cnf, config, depth, counting, stats):
    assert depth <= config.max_depth, "nesting exceeded the configured limit"
    stats.max_depth_seen = max(stats.max_depth_seen, depth)

    for clause in cnf.clauses:
        if not clause:
            return 0 if counting else False

    constrained = sorted(cnf.constrained_vars())
    free = cnf.num_vars - len(constrained)
    graph = primal_graph(cnf)

    td = decompose(graph, heuristic=config.heuristic, seed=config.seed,
                   vertices=constrained)
    stats.widths_seen.append(td.width)

    if td.width <= config.width_threshold:
        ntd = make_nice(td)
        base = dp_run(cnf, ntd, counting=counting)
        return _scale(base, free, counting)

    abstraction = build_abstraction(
        graph.induced(constrained), config.width_threshold,
        heuristic=config.heuristic, seed=config.seed)
    stats.components_seen += len(abstraction.components)

    interior_of = {}
    for ci, comp in enumerate(abstraction.components):
        for v in comp.vertices:
            interior_of[v] = ci

    retained_clauses = []
    comp_clauses = {ci: [] for ci in range(len(abstraction.components))}
    for clause in cnf.clauses:
        owners = {interior_of[abs(l)] for l in clause if abs(l) in interior_of}
        if not owners:
            retained_clauses.append(clause)
        else:
            assert len(owners) == 1, "clause spans two removed components"
            comp_clauses[owners.pop()].append(clause)

    ntd = make_nice(abstraction.td)
    hosts = shallowest_covering_nodes(
        ntd, [frozenset(c.boundary) for c in abstraction.components])
    solvers = []
    for ci, comp in enumerate(abstraction.components):
        solvers.append(_ComponentSolver(
            comp, comp_clauses[ci], config, depth, counting, stats))
    by_node = {}
    for node, solver in zip(hosts, solvers):
        by_node.setdefault(node, []).append(solver)

    if (config.jobs > 1 and config.sub_solver != "internal"
            and depth == config.max_depth):
        from concurrent.futures import ThreadPoolExecutor
        with ThreadPoolExecutor(max_workers=config.jobs) as executor:
            for solver in solvers:
                solver.prefetch(executor)

    retained_cnf = CnfFormula(num_vars=cnf.num_vars)
    retained_cnf.clauses = retained_clauses

    def weight(node, mask, bag):
        total = 1
        for solver in by_node.get(node, ()):
            value = solver.value_for(mask, bag)
            if counting:
                total *= value
                if not total:
                    return 0
            elif not value:
                return False
        return total if counting else True

    base = dp_run(retained_cnf, ntd, counting=counting,
                  weight_fn=weight if by_node else None)
    return _scale(base, free, counting)


def _scale(base, free_vars, counting):
    if counting:
        return base << free_vars if base else 0
    return bool(base)


class _ComponentSolver:
    """Counts (or decides) one removed component per boundary assignment."""

    def __init__(self, comp, clauses, config, depth, counting, stats):
        self.comp = comp
        self.clauses = clauses
        self.config = config
        self.depth = depth
        self.counting = counting
        self.stats = stats
        self.memo = {}
        self.positions = None

    def value_for(self, mask, bag):
        if self.positions is None:
            index = {u: i for i, u in enumerate(bag)}
            self.positions = [index[v] for v in self.comp.boundary]
        beta = 0
        for i, p in enumerate(self.positions):
            beta |= ((mask >> p) & 1) << i
        if beta in self.memo:
            return self.memo[beta]
        value = self._solve(beta)
        if len(self.memo) < self.config.boundary_budget:
            self.memo[beta] = value
        return value

    def _solve(self, beta):
        assignment = {v: bool((beta >> i) & 1)
                      for i, v in enumerate(self.comp.boundary)}
        residual = _condition(self.clauses, set(self.comp.vertices), assignment)
        if residual is None:
            return 0 if self.counting else False
        if not residual.clauses:
            return (1 << residual.num_vars) if self.counting else True
        if self.depth < self.config.max_depth:
            return _hybrid(residual, self.config, self.depth + 1,
                           self.counting, self.stats)
        return _sub_solve(SubSolverRequest(
            residual, "count" if self.counting else "decide"),
            self.config, self.stats)

    def prefetch(self, executor):
        """Evaluate all boundary assignments concurrently (external solvers)."""
        width = len(self.comp.boundary)
        if (1 << width) > self.config.boundary_budget:
            return
        futures = {beta: executor.submit(self._solve, beta)
                   for beta in range(1 << width)}
        for beta in sorted(futures):
            self.memo[beta] = futures[beta].result()


def _condition(clauses, interior, assignment):
    """Condition clauses on a boundary assignment and unit-propagate.

    Returns the residual formula over the unforced interior variables,
    renumbered densely (unconstrained ones kept as extra free variables),
    or None on conflict.
    """
    values = dict(assignment)
    work = [list(c) for c in clauses]
    while True:
        progress = False
        next_work = []
        for clause in work:
            open_lits = []
            satisfied = False
            for l in clause:
                v = abs(l)
                if v in values:
                    if values[v] == (l > 0):
                        satisfied = True
                        break
                else:
                    open_lits.append(l)
            if satisfied:
                continue
            if not open_lits:
                return None
            if len(open_lits) == 1:
                l = open_lits[0]
                values[abs(l)] = l > 0
                progress = True
            else:
                next_work.append(open_lits)
        work = next_work
        if not progress:
            break

    active = sorted({abs(l) for c in work for l in c})
    renumber = {v: i + 1 for i, v in enumerate(active)}
    residual = CnfFormula(num_vars=len(active))
    for clause in work:
        residual.add_clause([renumber[abs(l)] * (1 if l > 0 else -1)
                             for l in clause])
    # interior vars neither forced nor active are unconstrained
    residual.num_vars += sum(1 for v in interior
                             if v not in values and v not in renumber)
    return residual


def parse_subsolver_output(text, mode):
    """Accept both solver dialects: 's (UN)SATISFIABLE' and
    'c s exact arb int <count>'."""
    count = None
    decision = None
    for line in text.splitlines():
        line = line.strip()
        if line == "s SATISFIABLE":
            decision = True
        elif line == "s UNSATISFIABLE":
            decision = False
        elif line.startswith("c s exact arb int "):
            try:
                count = int(line.split()[-1])
            except ValueError:
                raise SubSolverFailure(f"bad count line {line!r}") from None
    if mode == "count":
        if count is not None:
            return count
        if decision is False:
            return 0
        raise SubSolverFailure("sub-solver printed no model count")
    if decision is not None:
        return decision
    if count is not None:
        return count > 0
    raise SubSolverFailure("sub-solver printed no result")


_STATS_LOCK = threading.Lock()


def _sub_solve(request, config, stats):
    with _STATS_LOCK:
        stats.subsolver_calls += 1
    if config.sub_solver == "internal":
        if request.formula.num_vars > INTERNAL_GUARD_VARS:
            raise DepthExhaustedWithoutSubSolver(
                f"residual has {request.formula.num_vars} variables; the "
                f"internal enumeration guard is {INTERNAL_GUARD_VARS}")
        if request.mode == "count":
            return brute_force_count(request.formula)
        return brute_force_sat(request.formula)
    return _external_solve(request, config.sub_solver)


def _external_solve(request, template):
    if "{file}" not in template:
        raise SubSolverFailure("sub-solver template lacks a {file} placeholder")
    with tempfile.NamedTemporaryFile(
            "w", suffix=".cnf", prefix="twsolve-sub-", delete=False) as handle:
        handle.write(write_dimacs(request.formula))
        path = handle.name
    try:
        argv = [arg.replace("{file}", path)
                for arg in shlex.split(template)]
        try:
            proc = subprocess.run(argv, capture_output=True, text=True,
                                  timeout=600)
        except (OSError, subprocess.TimeoutExpired) as exc:
            raise SubSolverFailure(f"sub-solver failed to run: {exc}") from exc
        if proc.returncode not in (0, 10, 20):
            raise SubSolverFailure(
                f"sub-solver exited with {proc.returncode}: "
                f"{proc.stderr.strip()[:200]}")
        return parse_subsolver_output(proc.stdout, request.mode)
    finally:
        Path(path).unlink(missing_ok=True)
