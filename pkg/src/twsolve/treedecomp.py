"""Tree decompositions: compute (min-fill / min-degree), validate, normalize, serialize.

Width is reported as max bag size minus one (PACE convention). All internal
bounds work with bag sizes to avoid the off-by-one.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field

from .errors import InvalidInputDecomposition, ParseError


class TreeDecomposition:
    """A rooted tree of bags over graph vertices.

    bags maps node id -> frozenset of vertex ids; edges are undirected pairs;
    num_vertices is the vertex count of the decomposed graph (for .td output).
    """

    def __init__(self, bags, edges, root, num_vertices):
        self.bags = {t: frozenset(b) for t, b in bags.items()}
        self.edges = [tuple(sorted(e)) for e in edges]
        self.root = root
        self.num_vertices = num_vertices
        self._parent, self._children, self._depth = self._orient()

    def _orient(self):
        adj = {t: [] for t in self.bags}
        for u, v in self.edges:
            adj[u].append(v)
            adj[v].append(u)
        parent = {self.root: None}
        children = {t: [] for t in self.bags}
        depth = {self.root: 0}
        queue = [self.root]
        i = 0
        while i < len(queue):
            t = queue[i]
            i += 1
            for s in sorted(adj[t]):
                if s not in parent:
                    parent[s] = t
                    children[t].append(s)
                    depth[s] = depth[t] + 1
                    queue.append(s)
        if len(parent) != len(self.bags):
            raise InvalidInputDecomposition("decomposition tree is not connected")
        if len(self.edges) != len(self.bags) - 1:
            raise InvalidInputDecomposition("decomposition tree has a cycle")
        return parent, children, depth

    @property
    def width(self):
        return max(len(b) for b in self.bags.values()) - 1

    @property
    def num_bags(self):
        return len(self.bags)

    def bag(self, t):
        return self.bags[t]

    def children(self, t):
        return self._children[t]

    def parent(self, t):
        return self._parent[t]

    def depth(self, t):
        return self._depth[t]

    def postorder(self):
        """Children before parents; deterministic (sorted child order)."""
        out = []
        stack = [self.root]
        while stack:
            t = stack.pop()
            out.append(t)
            stack.extend(self._children[t])
        out.reverse()
        return out

    def with_bags(self, bags):
        """Copy of this decomposition with replaced bags (same tree)."""
        return TreeDecomposition(bags, self.edges, self.root, self.num_vertices)


class NiceTreeDecomposition(TreeDecomposition):
    """Tree decomposition with per-node kinds: leaf / introduce / forget / join.

    Leaves and the root have empty bags; introduce/forget change the child bag
    by exactly one vertex; join nodes have two children with identical bags.
    """

    LEAF = "leaf"
    INTRODUCE = "introduce"
    FORGET = "forget"
    JOIN = "join"

    def __init__(self, bags, edges, root, num_vertices, kinds):
        super().__init__(bags, edges, root, num_vertices)
        self.kinds = dict(kinds)

    def kind(self, t):
        """Return (kind, vertex) where vertex is None for leaf/join nodes."""
        return self.kinds[t]


# ------------------------------------------------------------- construction

def decompose(graph, heuristic="min-fill", seed=0, vertices=None):
    """Tree decomposition from an elimination ordering.

    Bags are v plus v's neighbors at elimination time; a node's parent is the
    node of the earliest-eliminated remaining bag member. Ties in the
    heuristic break toward the smallest id; seed != 0 relabels vertices
    randomly first (diversification), seed 0 is fully deterministic.
    Disconnected graphs get one decomposition per component joined under a
    fresh empty root.
    """
    if heuristic not in ("min-fill", "min-degree"):
        raise ValueError(f"unknown heuristic {heuristic!r}")
    verts = sorted(graph.vertices if vertices is None else set(vertices))

    if seed:
        rng = random.Random(seed)
        shuffled = list(verts)
        rng.shuffle(shuffled)
        relabel = {v: i + 1 for i, v in enumerate(shuffled)}
        unlabel = {i + 1: v for i, v in enumerate(shuffled)}
    else:
        relabel = {v: v for v in verts}
        unlabel = relabel

    adj = {relabel[v]: set() for v in verts}
    vset = set(verts)
    for v in verts:
        for w in graph.neighbors(v):
            if w in vset:
                adj[relabel[v]].add(relabel[w])

    bags = {}
    edges = []
    roots = []
    next_id = 1
    for comp in _components(adj):
        comp_ids, comp_edges, comp_root = _eliminate(adj, comp, heuristic, next_id)
        for t, bag in comp_ids.items():
            bags[t] = frozenset(unlabel[v] for v in bag)
        edges.extend(comp_edges)
        roots.append(comp_root)
        next_id += len(comp_ids)

    if not roots:
        bags[1] = frozenset()
        return TreeDecomposition(bags, [], 1, len(verts))
    if len(roots) == 1:
        return TreeDecomposition(bags, edges, roots[0], len(verts))
    bags[next_id] = frozenset()
    edges.extend((r, next_id) for r in roots)
    return TreeDecomposition(bags, edges, next_id, len(verts))


def _components(adj):
    seen = set()
    comps = []
    for start in sorted(adj):
        if start in seen:
            continue
        comp = []
        stack = [start]
        seen.add(start)
        while stack:
            u = stack.pop()
            comp.append(u)
            for w in adj[u]:
                if w not in seen:
                    seen.add(w)
                    stack.append(w)
        comps.append(sorted(comp))
    return comps


def _fill_count(adj, v):
    ns = sorted(adj[v])
    missing = 0
    for i, x in enumerate(ns):
        ax = adj[x]
        for y in ns[i + 1:]:
            if y not in ax:
                missing += 1
    return missing


def _eliminate(adj, comp, heuristic, first_id):
    local = {v: set(adj[v]) for v in comp}
    remaining = sorted(comp)
    bags = {}
    position = {}
    order = []
    for step in range(len(comp)):
        if heuristic == "min-degree":
            v = min(remaining, key=lambda u: (len(local[u]), u))
        else:
            v = min(remaining, key=lambda u: (_fill_count(local, u), u))
        bag = frozenset({v} | local[v])
        node = first_id + step
        bags[node] = bag
        position[v] = step
        order.append(v)
        ns = sorted(local[v])
        for i, x in enumerate(ns):
            for y in ns[i + 1:]:
                local[x].add(y)
                local[y].add(x)
        for x in ns:
            local[x].discard(v)
        del local[v]
        remaining.remove(v)
    edges = []
    for step, v in enumerate(order):
        rest = bags[first_id + step] - {v}
        if rest:
            parent_vertex = min(rest, key=lambda u: position[u])
            edges.append((first_id + step, first_id + position[parent_vertex]))
    root = first_id + len(comp) - 1
    return bags, edges, root


# ---------------------------------------------------------------- validation

@dataclass
class ValidationReport:
    """Violations of the three tree-decomposition conditions, with witnesses."""

    uncovered_vertices: list = field(default_factory=list)
    uncovered_edges: list = field(default_factory=list)
    disconnected: list = field(default_factory=list)  # (vertex, node_a, node_b)

    @property
    def ok(self):
        return not (self.uncovered_vertices or self.uncovered_edges
                    or self.disconnected)

    def lines(self):
        out = []
        for v in self.uncovered_vertices:
            out.append(f"VertexUncovered({v})")
        for u, v in self.uncovered_edges:
            out.append(f"EdgeUncovered({{{u},{v}}})")
        for v, a, b in self.disconnected:
            out.append(f"ConnectednessViolation({v}: nodes {a} and {b})")
        return out


def validate(td, graph):
    """Check nodes-covered, edges-covered and connectedness; violations are data."""
    report = ValidationReport()
    occurrences = {}
    for t in sorted(td.bags):
        for v in td.bags[t]:
            occurrences.setdefault(v, []).append(t)

    for v in graph.vertices:
        if v not in occurrences:
            report.uncovered_vertices.append(v)

    bag_sets = [td.bags[t] for t in sorted(td.bags)]
    for u, v in graph.edges():
        if not any(u in b and v in b for b in bag_sets):
            report.uncovered_edges.append((u, v))

    adj = {t: set() for t in td.bags}
    for a, b in td.edges:
        adj[a].add(b)
        adj[b].add(a)
    for v in sorted(occurrences):
        nodes = occurrences[v]
        node_set = set(nodes)
        start = nodes[0]
        seen = {start}
        stack = [start]
        while stack:
            t = stack.pop()
            for s in adj[t]:
                if s in node_set and s not in seen:
                    seen.add(s)
                    stack.append(s)
        missing = node_set - seen
        if missing:
            report.disconnected.append((v, start, min(missing)))
    return report


# ------------------------------------------------------------ normalization

def make_nice(td, graph=None):
    """Normalize to a nice decomposition of the same width.

    Inserts forget/introduce chains along edges, binarizes joins, gives every
    leaf and the root an empty bag, and collapses equal adjacent bags. When a
    graph is supplied the input is fully validated first; structural checks
    (tree shape, vertex-occurrence connectedness) always run.
    Raises InvalidInputDecomposition if the input is broken.
    """
    if graph is not None:
        report = validate(td, graph)
        if not report.ok:
            raise InvalidInputDecomposition(
                "; ".join(report.lines()[:5]) or "invalid decomposition")
    else:
        trivial = _occurrence_graph_ok(td)
        if not trivial:
            raise InvalidInputDecomposition(
                "vertex occurrences are not connected in the tree")

    bags = {}
    kinds = {}
    edges = []
    counter = [0]

    def new_node(bag, kind, vertex=None):
        counter[0] += 1
        t = counter[0]
        bags[t] = frozenset(bag)
        kinds[t] = (kind, vertex)
        return t

    def chain(top_node, from_bag, to_bag):
        """Forget then introduce, one vertex per step, from from_bag to to_bag."""
        node, bag = top_node, set(from_bag)
        for v in sorted(from_bag - to_bag):
            bag.discard(v)
            nxt = new_node(bag, NiceTreeDecomposition.FORGET, v)
            edges.append((nxt, node))
            node = nxt
        for v in sorted(to_bag - from_bag):
            bag.add(v)
            nxt = new_node(bag, NiceTreeDecomposition.INTRODUCE, v)
            edges.append((nxt, node))
            node = nxt
        return node

    # post-order over the original tree, mapping each node to its nice top
    tops = {}
    for t in td.postorder():
        bag = td.bag(t)
        kids = td.children(t)
        if not kids:
            leaf = new_node(frozenset(), NiceTreeDecomposition.LEAF)
            tops[t] = chain(leaf, frozenset(), bag)
            continue
        arms = [chain(tops[c], td.bag(c), bag) for c in kids]
        node = arms[0]
        for arm in arms[1:]:
            join = new_node(bag, NiceTreeDecomposition.JOIN)
            edges.append((join, node))
            edges.append((join, arm))
            node = join
        tops[t] = node

    root = chain(tops[td.root], td.bag(td.root), frozenset())
    nice = NiceTreeDecomposition(bags, edges, root, td.num_vertices, kinds)
    assert nice.width == td.width
    return nice


def _occurrence_graph_ok(td):
    try:
        report = ValidationReport()
        occurrences = {}
        for t in sorted(td.bags):
            for v in td.bags[t]:
                occurrences.setdefault(v, []).append(t)
        adj = {t: set() for t in td.bags}
        for a, b in td.edges:
            adj[a].add(b)
            adj[b].add(a)
        for v, nodes in occurrences.items():
            node_set = set(nodes)
            seen = {nodes[0]}
            stack = [nodes[0]]
            while stack:
                t = stack.pop()
                for s in adj[t]:
                    if s in node_set and s not in seen:
                        seen.add(s)
                        stack.append(s)
            if node_set - seen:
                return False
        return True
    except KeyError:
        return False


# ----------------------------------------------------------------- PACE .td

def parse_td(data):
    """Parse a PACE 2017 .td file; root defaults to bag 1."""
    if isinstance(data, (bytes, bytearray)):
        data = data.decode("utf-8")
    header = None
    bags = {}
    edges = []
    for lineno, raw in enumerate(data.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("c"):
            continue
        parts = line.split()
        if parts[0] == "s":
            if header is not None:
                raise ParseError("duplicate solution line", lineno)
            if len(parts) != 5 or parts[1] != "td":
                raise ParseError(f"malformed solution line {line!r}", lineno)
            try:
                header = tuple(int(x) for x in parts[2:])
            except ValueError:
                raise ParseError(f"malformed solution line {line!r}", lineno) from None
            continue
        if header is None:
            raise ParseError("content before 's td' line", lineno)
        num_bags, max_bag, num_vertices = header
        if parts[0] == "b":
            try:
                bag_id = int(parts[1])
                vs = [int(x) for x in parts[2:]]
            except (ValueError, IndexError):
                raise ParseError(f"malformed bag line {line!r}", lineno) from None
            if not 1 <= bag_id <= num_bags:
                raise ParseError(f"bag id {bag_id} out of range 1..{num_bags}", lineno)
            if bag_id in bags:
                raise ParseError(f"duplicate bag {bag_id}", lineno)
            for v in vs:
                if not 1 <= v <= num_vertices:
                    raise ParseError(
                        f"bag vertex {v} out of range 1..{num_vertices}", lineno)
            bags[bag_id] = frozenset(vs)
        else:
            if len(parts) != 2:
                raise ParseError(f"malformed edge line {line!r}", lineno)
            try:
                a, b = int(parts[0]), int(parts[1])
            except ValueError:
                raise ParseError(f"malformed edge line {line!r}", lineno) from None
            if not (1 <= a <= num_bags and 1 <= b <= num_bags):
                raise ParseError(f"edge ({a},{b}) out of range", lineno)
            edges.append((a, b))
    if header is None:
        raise ParseError("missing 's td' line", None)
    num_bags, max_bag, num_vertices = header
    if len(bags) != num_bags:
        raise ParseError(
            f"solution line declares {num_bags} bags, found {len(bags)}", None)
    actual_max = max((len(b) for b in bags.values()), default=0)
    if actual_max != max_bag:
        raise ParseError(
            f"solution line declares max bag size {max_bag}, found {actual_max}", None)
    try:
        return TreeDecomposition(bags, edges, min(bags), num_vertices)
    except InvalidInputDecomposition as exc:
        raise ParseError(str(exc), None) from None


def write_td(td):
    ids = sorted(td.bags)
    max_bag = max((len(td.bags[t]) for t in ids), default=0)
    lines = [f"s td {len(ids)} {max_bag} {td.num_vertices}"]
    for t in ids:
        vs = " ".join(str(v) for v in sorted(td.bags[t]))
        lines.append(f"b {t}" + (f" {vs}" if vs else ""))
    for a, b in sorted(tuple(sorted(e)) for e in td.edges):
        lines.append(f"{a} {b}")
    return "\n".join(lines) + "\n"
