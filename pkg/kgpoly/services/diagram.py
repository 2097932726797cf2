"""Diagrams of balanced-oriented knotted 4-valent graphs as combinatorial maps.

A node carries four edge labels in counterclockwise order starting at the
anchor dart of its kind. Each edge label occurs exactly twice in a diagram,
once on an outgoing dart (its tail) and once on an incoming dart (its head).
Node-free closed components are kept in a separate counter.
"""

import logging
from dataclasses import dataclass
from functools import cached_property
from typing import Dict, Iterable, List, Sequence, Tuple

import networkx as nx

logger = logging.getLogger(__name__)

POSITIVE = "X+"
NEGATIVE = "X-"
IIOO = "V="
IOIO = "Vx"
KINDS = (POSITIVE, NEGATIVE, IIOO, IOIO)
CROSSINGS = (POSITIVE, NEGATIVE)
VERTICES = (IIOO, IOIO)

IN = "in"
OUT = "out"

ROLES: Dict[str, Tuple[str, str, str, str]] = {
    POSITIVE: (IN, OUT, OUT, IN),
    NEGATIVE: (IN, IN, OUT, OUT),
    IIOO: (IN, IN, OUT, OUT),
    IOIO: (IN, OUT, IN, OUT),
}

# valid anchor rotations per kind; an IOIO vertex may start at either in-dart
ROTATIONS: Dict[str, Tuple[int, ...]] = {
    POSITIVE: (0,),
    NEGATIVE: (0,),
    IIOO: (0,),
    IOIO: (0, 2),
}

KIND_ALIASES = {"X+": POSITIVE, "X-": NEGATIVE, "X−": NEGATIVE, "V=": IIOO, "Vx": IOIO}
_KIND_CODES = {POSITIVE: 0, NEGATIVE: 1, IIOO: 2, IOIO: 3}

Dart = Tuple[int, int]


class DiagramError(ValueError):
    """Raised for malformed or invalid diagram input."""


@dataclass(frozen=True)
class Node:
    kind: str
    labels: Tuple[int, int, int, int]

    def role(self, position: int) -> str:
        return ROLES[self.kind][position % 4]

    def rotated(self, shift: int) -> "Node":
        shift %= 4
        return Node(self.kind, tuple(self.labels[shift:] + self.labels[:shift]))


@dataclass(frozen=True)
class Diagram:
    nodes: Tuple[Node, ...] = ()
    circles: int = 0

    @cached_property
    def edges(self) -> Dict[int, Tuple[Dart, Dart]]:
        """Edge label -> (tail dart, head dart)."""
        tails: Dict[int, Dart] = {}
        heads: Dict[int, Dart] = {}
        for i, node in enumerate(self.nodes):
            for p, label in enumerate(node.labels):
                table = tails if node.role(p) == OUT else heads
                table[label] = (i, p)
        return {label: (tails[label], heads[label]) for label in tails if label in heads}

    @cached_property
    def _partners(self) -> Dict[Dart, Dart]:
        partners: Dict[Dart, Dart] = {}
        for tail, head in self.edges.values():
            partners[tail] = head
            partners[head] = tail
        return partners

    def partner(self, dart: Dart) -> Dart:
        return self._partners[dart]

    def role(self, dart: Dart) -> str:
        return self.nodes[dart[0]].role(dart[1])

    def label(self, dart: Dart) -> int:
        return self.nodes[dart[0]].labels[dart[1]]

    def kind_count(self, *kinds: str) -> int:
        return sum(1 for node in self.nodes if node.kind in kinds)

    @property
    def size(self) -> int:
        return len(self.nodes)

    @property
    def max_label(self) -> int:
        return max((label for node in self.nodes for label in node.labels), default=0)


EMPTY = Diagram()
UNKNOT = Diagram((), 1)


def make_diagram(nodes: Iterable[Tuple[str, Sequence[int]]], circles: int = 0) -> Diagram:
    return Diagram(tuple(Node(kind, tuple(labels)) for kind, labels in nodes), circles)


def _normalize_node(kind: str, labels: Tuple[int, int, int, int]) -> Node:
    node = Node(kind, labels)
    if kind == IOIO and labels[2] < labels[0]:
        node = node.rotated(2)
    return node


def parse(text: str) -> Diagram:
    nodes: List[Node] = []
    circles = 0
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0]
        tokens = line.split()
        if not tokens:
            continue
        column = line.index(tokens[0]) + 1
        head = tokens[0]
        if head == "O":
            if len(tokens) != 1:
                raise DiagramError(f"line {line_no}, column {column}: 'O' takes no arguments")
            circles += 1
            continue
        kind = KIND_ALIASES.get(head)
        if kind is None:
            raise DiagramError(f"line {line_no}, column {column}: unknown node kind {head!r}")
        if len(tokens) != 5:
            raise DiagramError(
                f"line {line_no}, column {column}: {head} needs 4 edge labels, got {len(tokens) - 1}"
            )
        labels = []
        for token in tokens[1:]:
            if not (token.isascii() and token.isdigit()) or int(token) < 1:
                col = line.index(token, column) + 1
                raise DiagramError(f"line {line_no}, column {col}: edge label {token!r} is not a positive integer")
            labels.append(int(token))
        nodes.append(_normalize_node(kind, tuple(labels)))
    diagram = Diagram(tuple(nodes), circles)
    check_diagram(diagram)
    logger.debug("parsed diagram with %d nodes and %d circles", len(nodes), circles)
    return diagram


def check_diagram(d: Diagram) -> None:
    """Raise DiagramError unless labels, orientation and genus are consistent."""
    seen: Dict[int, List[str]] = {}
    for node in d.nodes:
        if node.kind not in ROLES:
            raise DiagramError(f"Unknown node kind {node.kind!r}")
        for p, label in enumerate(node.labels):
            seen.setdefault(label, []).append(node.role(p))
    for label, roles in sorted(seen.items()):
        if len(roles) != 2:
            raise DiagramError(f"Edge label {label} used {len(roles)} time(s), expected exactly 2")
        if roles[0] == roles[1]:
            raise DiagramError(f"Edge label {label} used twice in {roles[0]} role (orientation clash)")
    genus = genus_excess(d)
    if genus:
        raise DiagramError(f"Rotation system is not planar (V - E + F exceeds by {genus})")


def faces(d: Diagram) -> List[List[Dart]]:
    """Orbits of the face permutation: follow the edge, then turn to the next dart counterclockwise."""
    remaining = {(i, p) for i in range(len(d.nodes)) for p in range(4)}
    result: List[List[Dart]] = []
    for start in sorted(remaining):
        if start not in remaining:
            continue
        cycle = []
        dart = start
        while dart in remaining:
            remaining.discard(dart)
            cycle.append(dart)
            node, pos = d.partner(dart)
            dart = (node, (pos + 1) % 4)
        result.append(cycle)
    return result


def graph_of(d: Diagram) -> nx.MultiGraph:
    graph = nx.MultiGraph()
    graph.add_nodes_from(range(len(d.nodes)))
    for label, (tail, head) in d.edges.items():
        graph.add_edge(tail[0], head[0], key=label)
    return graph


def component_count(d: Diagram) -> int:
    if not d.nodes:
        return 0
    return nx.number_connected_components(graph_of(d))


def genus_excess(d: Diagram) -> int:
    """2C - (V - E + F); zero exactly when every component is planar."""
    v = len(d.nodes)
    e = len(d.edges)
    f = len(faces(d))
    return 2 * component_count(d) - (v - e + f)


def components(d: Diagram) -> List[Diagram]:
    """Split into connected components; circles are dropped."""
    if not d.nodes:
        return []
    parts = sorted(sorted(part) for part in nx.connected_components(graph_of(d)))
    return [Diagram(tuple(d.nodes[i] for i in part)) for part in parts]


def renumbered(d: Diagram) -> Diagram:
    """Relabel edges 1..E by first appearance; IOIO vertices start at the earlier in-dart."""
    mapping: Dict[int, int] = {}
    nodes: List[Node] = []
    for node in d.nodes:
        if node.kind == IOIO:
            def rank(shift: int) -> Tuple[int, int]:
                label = node.labels[shift]
                return (mapping.get(label, len(mapping) + 1 + label), label)

            node = node.rotated(min((0, 2), key=rank))
        labels = []
        for label in node.labels:
            if label not in mapping:
                mapping[label] = len(mapping) + 1
            labels.append(mapping[label])
        nodes.append(Node(node.kind, tuple(labels)))
    return Diagram(tuple(nodes), d.circles)


def serialize(d: Diagram) -> str:
    d = renumbered(d)
    lines = [f"{node.kind} {' '.join(str(label) for label in node.labels)}" for node in d.nodes]
    lines.extend("O" for _ in range(d.circles))
    return "".join(f"{line}\n" for line in lines)


def _rooted_code(d: Diagram, root: int, rotation: int) -> Tuple[int, ...]:
    order = {root: 0}
    rotations = {root: rotation}
    queue = [root]
    code: List[int] = []
    head = 0
    while head < len(queue):
        u = queue[head]
        head += 1
        code.append(_KIND_CODES[d.nodes[u].kind])
        for k in range(4):
            v, pv = d.partner((u, (rotations[u] + k) % 4))
            if v not in order:
                order[v] = len(order)
                rotations[v] = pv - pv % 2 if d.nodes[v].kind == IOIO else 0
                queue.append(v)
            code.append(order[v])
            code.append((pv - rotations[v]) % 4)
    return tuple(code)


def _component_code(d: Diagram, members: Iterable[int]) -> Tuple[int, ...]:
    return min(
        _rooted_code(d, root, rotation)
        for root in members
        for rotation in ROTATIONS[d.nodes[root].kind]
    )


def canonical_key(d: Diagram) -> bytes:
    """Relabeling-invariant key: minimal breadth-first code per component, sorted."""
    codes: List[Tuple[int, ...]] = []
    if d.nodes:
        for part in nx.connected_components(graph_of(d)):
            codes.append(_component_code(d, part))
    codes.sort()
    body = "|".join(",".join(str(x) for x in code) for code in codes)
    return f"{body}#O{d.circles}".encode("ascii")


def mirror_node(node: Node) -> Node:
    a, b, c, e = node.labels
    if node.kind == POSITIVE:
        return Node(NEGATIVE, (e, a, b, c))
    if node.kind == NEGATIVE:
        return Node(POSITIVE, (b, c, e, a))
    return node


def mirror(d: Diagram) -> Diagram:
    return Diagram(tuple(mirror_node(node) for node in d.nodes), d.circles)


def switch_crossing(d: Diagram, index: int) -> Diagram:
    nodes = list(d.nodes)
    if nodes[index].kind not in CROSSINGS:
        raise DiagramError(f"Node {index} is not a crossing")
    nodes[index] = mirror_node(nodes[index])
    return Diagram(tuple(nodes), d.circles)


def disjoint_union(a: Diagram, b: Diagram) -> Diagram:
    offset = a.max_label
    shifted = tuple(Node(node.kind, tuple(label + offset for label in node.labels)) for node in b.nodes)
    return Diagram(a.nodes + shifted, a.circles + b.circles)


def with_circles(d: Diagram, circles: int) -> Diagram:
    return Diagram(d.nodes, circles)
