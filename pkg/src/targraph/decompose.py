"""Structural decomposition of transition graphs.

The pieces computed here describe how (and whether) the rest of the graph
funnels into the target vertex:

* strongly connected components and their acyclic condensation,
* the target core: every vertex with a path to the target, layered by
  shortest distance, with one chosen in-branching (``real`` arcs) and all
  remaining arcs from core vertices marked ``virtual``,
* the loop subgraph: self-loop vertices that absorb like the target does,
  together with the in-trees that drain into them,
* the residual: everything else, split into cycle clusters (non-degenerate
  strongly connected pieces) and acyclically ordered singleton vertices,
* for deterministic graphs, the classification of each weakly connected
  component as target tree / isolated loop / loop tree / cactus.
"""

from __future__ import annotations

import heapq
from collections import deque
from dataclasses import dataclass
from enum import Enum
from typing import Mapping, Optional

from .errors import InternalInconsistency, ModeViolation
from .model import Arc, GraphMode, TransitionGraph, VertexId


# ---------------------------------------------------------------------------
# Strongly connected components and condensation


@dataclass(frozen=True)
class SccPartition:
    """Partition of the vertices into maximal strongly connected components.

    Components are sorted by their lexicographically smallest member;
    ``index`` maps each vertex to the ordinal of its component.
    """

    components: tuple[frozenset[VertexId], ...]
    index: Mapping[VertexId, int]

    def component_of(self, v: VertexId) -> frozenset[VertexId]:
        return self.components[self.index[v]]


@dataclass(frozen=True)
class Condensation:
    """The acyclic digraph of SCC ordinals, with an acyclic ordering.

    ``order`` lists ordinals so that every arc goes from an earlier position
    to a later one; ties are broken by the smallest member vertex.
    """

    nodes: tuple[int, ...]
    arcs: tuple[tuple[int, int], ...]
    order: tuple[int, ...]


def _tarjan(vertices, successors) -> list[set[VertexId]]:
    """Iterative Tarjan; returns SCCs in reverse topological discovery order."""
    index: dict[VertexId, int] = {}
    lowlink: dict[VertexId, int] = {}
    on_stack: set[VertexId] = set()
    stack: list[VertexId] = []
    sccs: list[set[VertexId]] = []
    counter = 0

    for root in vertices:
        if root in index:
            continue
        work = [(root, iter(successors(root)))]
        index[root] = lowlink[root] = counter
        counter += 1
        stack.append(root)
        on_stack.add(root)
        while work:
            v, it = work[-1]
            advanced = False
            for w in it:
                if w not in index:
                    index[w] = lowlink[w] = counter
                    counter += 1
                    stack.append(w)
                    on_stack.add(w)
                    work.append((w, iter(successors(w))))
                    advanced = True
                    break
                if w in on_stack:
                    lowlink[v] = min(lowlink[v], index[w])
            if advanced:
                continue
            work.pop()
            if work:
                parent = work[-1][0]
                lowlink[parent] = min(lowlink[parent], lowlink[v])
            if lowlink[v] == index[v]:
                comp = set()
                while True:
                    w = stack.pop()
                    on_stack.discard(w)
                    comp.add(w)
                    if w == v:
                        break
                sccs.append(comp)
    return sccs


def strongly_connected_components(graph: TransitionGraph) -> SccPartition:
    """Compute the maximal strongly connected components of the graph.

    A vertex with no cycle through it forms a singleton component (a
    one-vertex digraph is strong); a bare self-loop is also a singleton.
    """
    raw = _tarjan(sorted(graph.vertices), graph.successors)
    components = tuple(sorted((frozenset(c) for c in raw), key=min))
    index = {v: i for i, comp in enumerate(components) for v in comp}
    return SccPartition(components, index)


def condensation(graph: TransitionGraph, scc: SccPartition) -> Condensation:
    """Contract each SCC to a node, drop parallel arcs, order acyclically."""
    index = scc.index
    arcs = set()
    for arc in graph.arcs:
        i, j = index[arc.source], index[arc.destination]
        if i != j:
            arcs.add((i, j))

    succ: dict[int, set[int]] = {i: set() for i in range(len(scc.components))}
    indeg = {i: 0 for i in range(len(scc.components))}
    for i, j in arcs:
        succ[i].add(j)
        indeg[j] += 1

    # Kahn's algorithm; heap keyed by smallest member vertex for determinism.
    ready = [(min(scc.components[i]), i) for i in indeg if indeg[i] == 0]
    heapq.heapify(ready)
    order: list[int] = []
    while ready:
        _, i = heapq.heappop(ready)
        order.append(i)
        for j in sorted(succ[i]):
            indeg[j] -= 1
            if indeg[j] == 0:
                heapq.heappush(ready, (min(scc.components[j]), j))
    if len(order) != len(scc.components):
        raise InternalInconsistency("condensation contains a directed cycle")
    return Condensation(tuple(range(len(scc.components))), tuple(sorted(arcs)), tuple(order))


# ---------------------------------------------------------------------------
# Target core


@dataclass(frozen=True)
class TargetCore:
    """The vertices that can reach the target, layered by shortest distance.

    ``real_arcs`` form an in-branching rooted at the target: one arc per
    non-target member, always stepping from layer k+1 to layer k (ties broken
    toward the lexicographically smallest parent).  Every other arc whose
    source lies in the core is ``virtual``, including arcs that leave the
    core altogether.
    """

    members: frozenset[VertexId]
    layer: Mapping[VertexId, int]
    real_arcs: frozenset[Arc]
    virtual_arcs: frozenset[Arc]

    def layer_delta(self, arc: Arc) -> Optional[int]:
        """Layer change of a virtual arc: destination layer minus source layer.

        Non-negative deltas make no progress toward the target and can close
        cycles.  ``None`` when the destination lies outside the core.
        """
        if arc.destination not in self.members:
            return None
        return self.layer[arc.destination] - self.layer[arc.source]


def backward_reachable(graph: TransitionGraph, root: VertexId) -> dict[VertexId, int]:
    """BFS over predecessors: vertex -> shortest path length to ``root``."""
    dist = {root: 0}
    queue = deque([root])
    while queue:
        v = queue.popleft()
        for u in graph.predecessors(v):
            if u not in dist:
                dist[u] = dist[v] + 1
                queue.append(u)
    return dist


def target_core(graph: TransitionGraph) -> TargetCore:
    """Layer the backward-reachable set of the target and mark real/virtual arcs."""
    layer = backward_reachable(graph, graph.target)
    members = frozenset(layer)
    real: set[Arc] = set()
    for v in sorted(members - {graph.target}):
        parent = min(w for w in graph.successors(v) if w in members and layer[w] == layer[v] - 1)
        real.add(graph.arc(v, parent))
    virtual = frozenset(a for v in members for a in graph.out_arcs(v) if a not in real)
    return TargetCore(members, layer, frozenset(real), virtual)


# ---------------------------------------------------------------------------
# Loop subgraph


@dataclass(frozen=True)
class LoopSubgraph:
    """Self-loop vertices outside the core that act as absorbing roots.

    A loop vertex with no other outgoing arc is *terminal* when anything else
    points at it and *isolated* when nothing does.  Each terminal root drags
    an in-tree behind it: the vertices outside the core whose every walk ends
    at that root.  Loop vertices that also have regular outgoing arcs behave
    like ordinary vertices and are left to the residual.
    """

    isolated_loops: frozenset[VertexId]
    terminal_loops: frozenset[VertexId]
    trees: Mapping[VertexId, frozenset[VertexId]]

    @property
    def members(self) -> frozenset[VertexId]:
        out = set(self.isolated_loops)
        for tree in self.trees.values():
            out |= tree
        return frozenset(out)


def _sure_attractor(graph: TransitionGraph, roots: frozenset[VertexId], universe: frozenset[VertexId]) -> set[VertexId]:
    """Least fixpoint of: v joins when it has successors and all of them joined.

    Members of the result reach ``roots`` along *every* walk.  ``universe``
    restricts which vertices may join (roots are always in).
    """
    inside = set(roots)
    pending: dict[VertexId, int] = {}
    queue = deque(roots)
    for v in universe - roots:
        pending[v] = len(set(graph.successors(v)))
    while queue:
        w = queue.popleft()
        for u in graph.predecessors(w):
            if u in pending:
                pending[u] -= 1
                if pending[u] == 0 and graph.out_degree(u) > 0:
                    del pending[u]
                    inside.add(u)
                    queue.append(u)
    return inside


def loop_subgraph(graph: TransitionGraph, core: TargetCore) -> LoopSubgraph:
    """Classify self-loop vertices outside the core and grow their in-trees."""
    isolated: set[VertexId] = set()
    terminal: set[VertexId] = set()
    for v in graph.vertices - core.members:
        if not graph.has_loop(v):
            continue
        if any(a.destination != v for a in graph.out_arcs(v)):
            continue  # has a regular outgoing arc: ordinary vertex
        if any(a.source != v for a in graph.in_arcs(v)):
            terminal.add(v)
        else:
            isolated.add(v)

    outside = graph.vertices - core.members
    trees = {
        root: frozenset(_sure_attractor(graph, frozenset({root}), outside))
        for root in terminal
    }
    return LoopSubgraph(frozenset(isolated), frozenset(terminal), trees)


# ---------------------------------------------------------------------------
# Residual decomposition


@dataclass(frozen=True)
class ResidualDecomposition:
    """What remains after removing the core and the loop subgraph.

    ``clusters`` are the non-degenerate SCCs of the residual-induced
    subgraph (every directed cycle of length >= 2 lies in exactly one of
    them); the other residual vertices are ``singletons``.  ``order`` lists
    all units (cluster sets and singleton sets) so that no residual arc goes
    from a later unit to an earlier one.  ``branch_arcs`` are the residual
    arcs leaving singleton vertices: the branches that feed the clusters.
    """

    residual: frozenset[VertexId]
    clusters: tuple[frozenset[VertexId], ...]
    singletons: tuple[VertexId, ...]
    order: tuple[frozenset[VertexId], ...]
    branch_arcs: frozenset[Arc]


def residual_decomposition(
    graph: TransitionGraph, core: TargetCore, loops: LoopSubgraph
) -> ResidualDecomposition:
    """Split the residual into cycle clusters and acyclically ordered singletons."""
    residual = graph.vertices - core.members - loops.members
    if residual & (core.members | loops.members):
        raise InternalInconsistency("residual overlaps the core or loop subgraph")

    def residual_successors(v: VertexId):
        return tuple(w for w in graph.successors(v) if w in residual)

    raw = _tarjan(sorted(residual), residual_successors)
    units = sorted((frozenset(c) for c in raw), key=min)
    clusters = tuple(u for u in units if len(u) >= 2)
    singleton_units = [u for u in units if len(u) == 1]
    singletons = tuple(sorted(v for (v,) in singleton_units))

    # Acyclic ordering of all units via Kahn on the unit condensation.
    unit_of = {v: u for u in units for v in u}
    succ: dict[frozenset, set[frozenset]] = {u: set() for u in units}
    indeg = {u: 0 for u in units}
    for v in residual:
        for w in residual_successors(v):
            a, b = unit_of[v], unit_of[w]
            if a is not b and b not in succ[a]:
                succ[a].add(b)
                indeg[b] += 1
    ready = [(min(u), u) for u in units if indeg[u] == 0]
    heapq.heapify(ready)
    order: list[frozenset] = []
    while ready:
        _, u = heapq.heappop(ready)
        order.append(u)
        for nxt in sorted(succ[u], key=min):
            indeg[nxt] -= 1
            if indeg[nxt] == 0:
                heapq.heappush(ready, (min(nxt), nxt))
    if len(order) != len(units):
        raise InternalInconsistency("residual condensation contains a directed cycle")

    branch_arcs = frozenset(
        a
        for v in singletons
        for a in graph.out_arcs(v)
        if a.destination in residual
    )
    return ResidualDecomposition(
        frozenset(residual), clusters, singletons, tuple(order), branch_arcs
    )


# ---------------------------------------------------------------------------
# Component classification (deterministic graphs)


class ComponentKind(Enum):
    TARGET_TREE = "TargetTree"
    ISOLATED_LOOP = "IsolatedLoop"
    LOOP_TREE = "LoopTree"
    CACTUS = "Cactus"
    GENERAL = "General"


@dataclass(frozen=True)
class ComponentClass:
    """One weakly connected component and its structural shape.

    ``detail`` carries the unique directed cycle for the non-target shapes:
    the self-loop vertex for loop components, the cycle (starting at its
    smallest vertex, following arc direction) for a cactus.
    """

    kind: ComponentKind
    vertices: frozenset[VertexId]
    detail: Optional[tuple[VertexId, ...]] = None


def weak_components(graph: TransitionGraph) -> tuple[frozenset[VertexId], ...]:
    """Connected components of the underlying undirected graph, sorted by
    smallest member."""
    neighbours: dict[VertexId, set[VertexId]] = {v: set() for v in graph.vertices}
    for arc in graph.arcs:
        neighbours[arc.source].add(arc.destination)
        neighbours[arc.destination].add(arc.source)
    seen: set[VertexId] = set()
    comps: list[frozenset[VertexId]] = []
    for start in sorted(graph.vertices):
        if start in seen:
            continue
        comp = {start}
        queue = deque([start])
        seen.add(start)
        while queue:
            v = queue.popleft()
            for w in neighbours[v]:
                if w not in seen:
                    seen.add(w)
                    comp.add(w)
                    queue.append(w)
        comps.append(frozenset(comp))
    return tuple(comps)


def _find_cycle(graph: TransitionGraph, start: VertexId) -> tuple[VertexId, ...]:
    """Follow the unique out-arcs from ``start`` until a vertex repeats; return
    the directed cycle rotated to begin at its smallest vertex."""
    seen_at: dict[VertexId, int] = {}
    path: list[VertexId] = []
    v = start
    while v not in seen_at:
        seen_at[v] = len(path)
        path.append(v)
        v = graph.successors(v)[0]
    cycle = path[seen_at[v]:]
    pivot = cycle.index(min(cycle))
    return tuple(cycle[pivot:] + cycle[:pivot])


def classify_components(graph: TransitionGraph) -> tuple[ComponentClass, ...]:
    """Classify each weak component of a deterministic graph.

    Exactly one component contains the target and is a tree in-branching to
    it; every other component drains into a single self-loop vertex (loop
    tree, degenerating to an isolated loop) or into one directed cycle with
    in-trees hanging off it (cactus).
    """
    if graph.mode is not GraphMode.DETERMINISTIC:
        raise ModeViolation(
            f"component classification needs a deterministic graph, got {graph.mode.value};"
            " use the full decomposition instead"
        )
    out: list[ComponentClass] = []
    for comp in weak_components(graph):
        if graph.target in comp:
            out.append(ComponentClass(ComponentKind.TARGET_TREE, comp))
            continue
        cycle = _find_cycle(graph, min(comp))
        if len(cycle) == 1:
            kind = ComponentKind.ISOLATED_LOOP if len(comp) == 1 else ComponentKind.LOOP_TREE
            out.append(ComponentClass(kind, comp, cycle))
        else:
            out.append(ComponentClass(ComponentKind.CACTUS, comp, cycle))
    return tuple(out)


# ---------------------------------------------------------------------------
# In-branching existence


@dataclass(frozen=True)
class InBranchingResult:
    """Whether the weak component of the target has a spanning in-branching.

    On success ``branching`` holds one witness arc set; on failure
    ``obstruction`` holds a terminal strong component other than the target's,
    from which the target cannot be reached.
    """

    ok: bool
    branching: Optional[frozenset[Arc]] = None
    obstruction: Optional[frozenset[VertexId]] = None


def in_branching_check(graph: TransitionGraph) -> InBranchingResult:
    """Test for an in-branching rooted at the target spanning its weak component."""
    component = next(c for c in weak_components(graph) if graph.target in c)
    reach = backward_reachable(graph, graph.target)
    if component <= set(reach):
        core = target_core(graph)
        witness = frozenset(a for a in core.real_arcs if a.source in component)
        return InBranchingResult(True, branching=witness)

    # Offender: a terminal SCC (no arcs leaving it) that is not the target's.
    def comp_successors(v: VertexId):
        return tuple(w for w in graph.successors(v) if w in component)

    sccs = sorted((frozenset(c) for c in _tarjan(sorted(component), comp_successors)), key=min)
    terminal = [
        s
        for s in sccs
        if graph.target not in s
        and all(w in s for v in s for w in comp_successors(v))
    ]
    return InBranchingResult(False, obstruction=terminal[0])


# ---------------------------------------------------------------------------
# Aggregate


@dataclass(frozen=True)
class Decomposition:
    """All structural pieces of one graph, computed together.

    ``components`` is present only for deterministic graphs.
    """

    core: TargetCore
    loops: LoopSubgraph
    residual: ResidualDecomposition
    components: Optional[tuple[ComponentClass, ...]] = None


def decompose(graph: TransitionGraph) -> Decomposition:
    """Run the full pipeline: core, loop subgraph, residual, classification."""
    core = target_core(graph)
    loops = loop_subgraph(graph, core)
    residual = residual_decomposition(graph, core, loops)
    components = (
        classify_components(graph) if graph.mode is GraphMode.DETERMINISTIC else None
    )
    return Decomposition(core, loops, residual, components)
