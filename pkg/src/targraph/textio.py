"""Line-oriented text format for transition graphs.

::

    # comment
    graph <name>                 (optional)
    target <vertex>              (required, exactly once)
    mode deterministic|multi|stochastic   (optional)
    vertex <id>                  (declares an isolated vertex)
    <src> <dst> [p=<float>] [action=<token>]

Vertices are declared implicitly by appearing in an arc line or the target
line; explicit ``vertex`` lines are only needed for isolated vertices.
``serialize_text`` followed by ``parse_text`` reproduces an equal graph.
"""

from __future__ import annotations

from typing import Optional

from .errors import GraphSyntaxError
from .model import Arc, GraphMode, TransitionGraph, build_graph

_MODES = {m.value: m for m in GraphMode}


def _syntax(message: str, lineno: int, raw: str, token: Optional[str] = None) -> GraphSyntaxError:
    if token is not None:
        col = raw.find(token)
        if col >= 0:
            message = f"column {col + 1}: {message}"
    return GraphSyntaxError(message, line=lineno)


def parse_text(text: str) -> TransitionGraph:
    """Parse the format above and return a validated graph.

    Raises :class:`GraphSyntaxError` with the offending line number for format
    problems; semantic problems propagate from :func:`build_graph`.
    """
    name: Optional[str] = None
    target: Optional[str] = None
    mode: Optional[GraphMode] = None
    vertices: set[str] = set()
    arcs: list[Arc] = []

    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        tokens = line.split()
        head = tokens[0]
        if head == "graph":
            if len(tokens) != 2:
                raise _syntax("expected: graph <name>", lineno, raw)
            if name is not None:
                raise _syntax("duplicate graph line", lineno, raw)
            name = tokens[1]
        elif head == "target":
            if len(tokens) != 2:
                raise _syntax("expected: target <vertex>", lineno, raw)
            if target is not None:
                raise _syntax("multiple target lines; a graph has a single target", lineno, raw)
            target = tokens[1]
            vertices.add(target)
        elif head == "mode":
            if len(tokens) != 2 or tokens[1] not in _MODES:
                raise _syntax("expected: mode deterministic|multi|stochastic", lineno, raw)
            if mode is not None:
                raise _syntax("duplicate mode line", lineno, raw)
            mode = _MODES[tokens[1]]
        elif head == "vertex":
            if len(tokens) != 2:
                raise _syntax("expected: vertex <id>", lineno, raw)
            vertices.add(tokens[1])
        else:
            if len(tokens) < 2:
                raise _syntax("arc line needs a source and a destination", lineno, raw, head)
            src, dst = tokens[0], tokens[1]
            weight: Optional[float] = None
            action: Optional[str] = None
            for opt in tokens[2:]:
                key, eq, value = opt.partition("=")
                if not eq or not value:
                    raise _syntax(f"malformed option {opt!r}", lineno, raw, opt)
                if key == "p":
                    if weight is not None:
                        raise _syntax("duplicate p= option", lineno, raw, opt)
                    try:
                        weight = float(value)
                    except ValueError:
                        raise _syntax(f"bad probability {value!r}", lineno, raw, opt) from None
                elif key == "action":
                    if action is not None:
                        raise _syntax("duplicate action= option", lineno, raw, opt)
                    action = value
                else:
                    raise _syntax(f"unknown option {key!r}", lineno, raw, opt)
            vertices.update((src, dst))
            arcs.append(Arc(src, dst, weight, action))

    if target is None:
        raise GraphSyntaxError("missing required 'target <vertex>' line")
    return build_graph(vertices, target, arcs, declared_mode=mode, name=name)


def serialize_text(graph: TransitionGraph) -> str:
    """Render a graph in the text format; ``parse_text`` restores an equal graph.

    Lines are emitted in a fixed order (header, isolated vertices, arcs) and
    sorted lexicographically within each group, so output is deterministic.
    Weights use the shortest decimal that round-trips the exact double.
    """
    lines: list[str] = []
    if graph.name:
        lines.append(f"graph {graph.name}")
    lines.append(f"target {graph.target}")
    lines.append(f"mode {graph.mode.value}")
    touched = {graph.target}
    for arc in graph.arcs:
        touched.add(arc.source)
        touched.add(arc.destination)
    for v in sorted(graph.vertices - touched):
        lines.append(f"vertex {v}")
    for arc in graph.arcs:
        parts = [arc.source, arc.destination]
        if arc.weight is not None:
            parts.append(f"p={arc.weight!r}")
        if arc.action is not None:
            parts.append(f"action={arc.action}")
        lines.append(" ".join(parts))
    return "\n".join(lines) + "\n"
