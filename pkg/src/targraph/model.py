"""Immutable transition-graph model.

A transition graph is a simple digraph (loops allowed, no parallel arcs)
with one distinguished target vertex of out-degree zero.  Arcs optionally
carry an action label and a probability weight; a fully weighted graph is
row-stochastic: the out-probabilities of every non-target vertex sum to 1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Mapping, Optional, Union

from .errors import (
    DanglingEndpoint,
    DuplicateArc,
    InvalidToken,
    InvalidWeight,
    MixedWeights,
    ModeViolation,
    RowNotNormalized,
    TargetHasOutgoing,
)

VertexId = str

#: Tolerance for |row sum - 1| on stochastic rows.
ROW_SUM_TOLERANCE = 1e-9

#: First tokens of graph-format lines; not usable as vertex ids.
RESERVED_TOKENS = frozenset({"graph", "target", "mode", "vertex"})


class GraphMode(Enum):
    DETERMINISTIC = "deterministic"
    MULTI = "multi"
    STOCHASTIC = "stochastic"


@dataclass(frozen=True)
class Arc:
    """One directed transition.  Identity is the (source, destination) pair."""

    source: VertexId
    destination: VertexId
    weight: Optional[float] = None
    action: Optional[str] = None

    @property
    def key(self) -> tuple[VertexId, VertexId]:
        return (self.source, self.destination)

    def is_loop(self) -> bool:
        return self.source == self.destination

    def __str__(self) -> str:
        parts = [self.source, "->", self.destination]
        if self.weight is not None:
            parts.append(f"p={self.weight!r}")
        if self.action is not None:
            parts.append(f"action={self.action}")
        return " ".join(parts)


@dataclass(frozen=True)
class StochasticRow:
    """Out-probability distribution of one vertex; support equals its successors."""

    vertex: VertexId
    entries: Mapping[VertexId, float]

    def total(self) -> float:
        return math.fsum(self.entries.values())

    def support(self) -> frozenset[VertexId]:
        return frozenset(self.entries)


def _check_token(token: str, role: str) -> str:
    if not token or any(ch.isspace() for ch in token):
        raise InvalidToken(f"{role} {token!r} must be a non-empty token without whitespace")
    if token in RESERVED_TOKENS:
        raise InvalidToken(f"{role} {token!r} is a reserved word of the graph text format")
    return token


@dataclass(frozen=True)
class TransitionGraph:
    """Validated, immutable transition graph.  Build via :func:`build_graph`."""

    vertices: frozenset[VertexId]
    target: VertexId
    arcs: tuple[Arc, ...]
    mode: GraphMode
    name: Optional[str] = None
    _out: dict = field(default=None, init=False, compare=False, repr=False)
    _in: dict = field(default=None, init=False, compare=False, repr=False)

    def __post_init__(self):
        out: dict[VertexId, list[Arc]] = {v: [] for v in self.vertices}
        inc: dict[VertexId, list[Arc]] = {v: [] for v in self.vertices}
        for arc in self.arcs:
            out[arc.source].append(arc)
            inc[arc.destination].append(arc)
        object.__setattr__(self, "_out", {v: tuple(a) for v, a in out.items()})
        object.__setattr__(self, "_in", {v: tuple(a) for v, a in inc.items()})

    # -- adjacency ---------------------------------------------------------

    def out_arcs(self, v: VertexId) -> tuple[Arc, ...]:
        return self._out[v]

    def in_arcs(self, v: VertexId) -> tuple[Arc, ...]:
        return self._in[v]

    def successors(self, v: VertexId) -> tuple[VertexId, ...]:
        return tuple(a.destination for a in self._out[v])

    def predecessors(self, v: VertexId) -> tuple[VertexId, ...]:
        return tuple(a.source for a in self._in[v])

    def out_degree(self, v: VertexId) -> int:
        return len(self._out[v])

    def arc(self, source: VertexId, destination: VertexId) -> Optional[Arc]:
        for a in self._out.get(source, ()):
            if a.destination == destination:
                return a
        return None

    def has_loop(self, v: VertexId) -> bool:
        return self.arc(v, v) is not None

    def stochastic_row(self, v: VertexId) -> StochasticRow:
        if self.mode is not GraphMode.STOCHASTIC:
            raise ModeViolation(f"graph mode is {self.mode.value}, not stochastic")
        return StochasticRow(v, {a.destination: a.weight for a in self._out[v]})

    def __repr__(self) -> str:
        label = f" {self.name!r}" if self.name else ""
        return (
            f"<TransitionGraph{label} mode={self.mode.value} "
            f"|V|={len(self.vertices)} |E|={len(self.arcs)} target={self.target}>"
        )


def build_graph(
    vertices: Iterable[VertexId],
    target: VertexId,
    arcs: Iterable[Arc],
    declared_mode: Optional[GraphMode] = None,
    name: Optional[str] = None,
) -> TransitionGraph:
    """Validate the parts and assemble an immutable :class:`TransitionGraph`.

    When ``declared_mode`` is omitted the mode is inferred: a fully weighted
    arc set is stochastic, out-degree exactly 1 at every non-target vertex is
    deterministic, anything else is multi.  A non-target vertex of out-degree
    0 (dead end) is accepted except under a declared deterministic mode; the
    validation module reports dead ends as defects.
    """
    vertex_set = frozenset(_check_token(v, "vertex") for v in vertices)
    _check_token(target, "target")
    if target not in vertex_set:
        raise DanglingEndpoint(f"target {target!r} is not a declared vertex")

    seen: set[tuple[VertexId, VertexId]] = set()
    arc_list: list[Arc] = []
    for arc in arcs:
        if arc.key in seen:
            raise DuplicateArc(f"duplicate arc {arc.source} -> {arc.destination}")
        seen.add(arc.key)
        if arc.source not in vertex_set or arc.destination not in vertex_set:
            raise DanglingEndpoint(f"arc {arc.source} -> {arc.destination} has an undeclared endpoint")
        if arc.source == target:
            raise TargetHasOutgoing(f"target {target!r} must have out-degree 0 (arc to {arc.destination!r})")
        if arc.weight is not None:
            w = arc.weight
            if not (isinstance(w, (int, float)) and math.isfinite(w)) or not 0.0 < w <= 1.0:
                raise InvalidWeight(f"arc {arc.source} -> {arc.destination} has weight {w!r} outside (0, 1]")
        if arc.action is not None:
            _check_token(arc.action, "action")
        arc_list.append(arc)
    arc_list.sort(key=lambda a: a.key)

    n_weighted = sum(1 for a in arc_list if a.weight is not None)
    fully_weighted = bool(arc_list) and n_weighted == len(arc_list)
    if 0 < n_weighted < len(arc_list):
        raise MixedWeights(f"{n_weighted} of {len(arc_list)} arcs carry weights; weights are all-or-nothing")

    out_degree: dict[VertexId, int] = {v: 0 for v in vertex_set}
    row_sum: dict[VertexId, list[float]] = {}
    for arc in arc_list:
        out_degree[arc.source] += 1
        if arc.weight is not None:
            row_sum.setdefault(arc.source, []).append(arc.weight)
    if fully_weighted:
        for v, weights in sorted(row_sum.items()):
            total = math.fsum(weights)
            if abs(total - 1.0) > ROW_SUM_TOLERANCE:
                raise RowNotNormalized(f"out-probabilities of {v!r} sum to {total!r}, not 1")

    non_target = vertex_set - {target}
    all_single = all(out_degree[v] == 1 for v in non_target)
    if declared_mode is None:
        if fully_weighted:
            mode = GraphMode.STOCHASTIC
        elif all_single:
            mode = GraphMode.DETERMINISTIC
        else:
            mode = GraphMode.MULTI
    else:
        mode = declared_mode
        if mode is GraphMode.DETERMINISTIC and not all_single:
            bad = min(v for v in non_target if out_degree[v] != 1)
            raise ModeViolation(
                f"deterministic mode requires out-degree 1, but {bad!r} has out-degree {out_degree[bad]}"
            )
        if mode is GraphMode.STOCHASTIC and arc_list and not fully_weighted:
            raise ModeViolation("stochastic mode requires a weight on every arc")

    return TransitionGraph(vertex_set, target, tuple(arc_list), mode, name)


@dataclass(frozen=True)
class AdjacencyView:
    """Bare arc-set view of a graph; GraphMode invariants are not enforced."""

    vertices: frozenset[VertexId]
    target: VertexId
    arcs: tuple[Arc, ...]

    def out_arcs(self, v: VertexId) -> tuple[Arc, ...]:
        return tuple(a for a in self.arcs if a.source == v)

    def successors(self, v: VertexId) -> tuple[VertexId, ...]:
        return tuple(a.destination for a in self.arcs if a.source == v)


def reverse(graph: Union[TransitionGraph, AdjacencyView]) -> AdjacencyView:
    """Flip every arc, carrying weights and actions along.

    The result is an adjacency view for backward traversals (e.g. walking
    toward the set of vertices that can reach the target); it need not be a
    valid transition graph, so no mode checks apply.  Involution on arc sets.
    """
    flipped = tuple(
        sorted(
            (Arc(a.destination, a.source, a.weight, a.action) for a in graph.arcs),
            key=lambda a: a.key,
        )
    )
    return AdjacencyView(graph.vertices, graph.target, flipped)


def graph_equal(a: TransitionGraph, b: TransitionGraph) -> bool:
    """Equality on the graph content: vertices, target, arcs (with weights and
    actions), and mode.  The display name is ignored."""
    return (
        a.vertices == b.vertices
        and a.target == b.target
        and a.arcs == b.arcs
        and a.mode == b.mode
    )
