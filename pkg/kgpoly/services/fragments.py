"""Local diagram fragments and the splice operation that glues them into a host.

A fragment is a small piece of diagram inside a disk: nodes, plain arcs
(`ARC tail head`) and optional free circles, with the edges that cross the
disk boundary listed in counterclockwise order on a `BOUNDARY` line.
Splicing removes a set of host nodes and wires the fragment into the hole.
"""

from dataclasses import dataclass
from pathlib import Path
from typing import Dict, Hashable, Iterable, List, Optional, Sequence, Set, Tuple

from kgpoly.services.diagram import (
    EMPTY,
    IN,
    OUT,
    Dart,
    Diagram,
    DiagramError,
    Node,
    KIND_ALIASES,
    ROTATIONS,
    check_diagram,
)

Label = Hashable


@dataclass(frozen=True)
class Fragment:
    boundary: Tuple[int, ...]
    nodes: Tuple[Node, ...] = ()
    arcs: Tuple[Tuple[int, int], ...] = ()
    circles: int = 0

    def boundary_roles(self) -> Tuple[str, ...]:
        """IN where a strand enters the disk, OUT where it leaves."""
        roles: Dict[int, str] = {}
        for node in self.nodes:
            for p, label in enumerate(node.labels):
                roles.setdefault(label, node.role(p))
        for tail, head in self.arcs:
            roles.setdefault(tail, IN)
            roles.setdefault(head, OUT)
        return tuple(roles[label] for label in self.boundary)

    def internal_labels(self) -> Set[int]:
        return {label for node in self.nodes for label in node.labels} - set(self.boundary)

    def relabeled(self, mapping: Dict[int, int]) -> "Fragment":
        def m(label: int) -> int:
            return mapping.get(label, label)

        return Fragment(
            tuple(m(label) for label in self.boundary),
            tuple(Node(node.kind, tuple(m(label) for label in node.labels)) for node in self.nodes),
            tuple((m(a), m(b)) for a, b in self.arcs),
            self.circles,
        )


def parse_fragment_lines(lines: Iterable[str], source: str = "<fragment>") -> Fragment:
    boundary: Optional[Tuple[int, ...]] = None
    nodes: List[Node] = []
    arcs: List[Tuple[int, int]] = []
    circles = 0
    for raw in lines:
        tokens = raw.split("#", 1)[0].split()
        if not tokens:
            continue
        head, args = tokens[0], tokens[1:]
        try:
            values = [int(token) for token in args]
        except ValueError:
            raise DiagramError(f"{source}: non-integer label in {raw.strip()!r}") from None
        if head == "BOUNDARY":
            boundary = tuple(values)
        elif head == "ARC":
            if len(values) != 2:
                raise DiagramError(f"{source}: ARC needs tail and head, got {raw.strip()!r}")
            arcs.append((values[0], values[1]))
        elif head == "O":
            circles += 1
        elif head in KIND_ALIASES:
            if len(values) != 4:
                raise DiagramError(f"{source}: node needs 4 labels, got {raw.strip()!r}")
            nodes.append(Node(KIND_ALIASES[head], tuple(values)))
        else:
            raise DiagramError(f"{source}: unknown line {raw.strip()!r}")
    if boundary is None:
        raise DiagramError(f"{source}: missing BOUNDARY line")
    fragment = Fragment(boundary, tuple(nodes), tuple(arcs), circles)
    check_fragment(fragment, source)
    return fragment


def check_fragment(fragment: Fragment, source: str = "<fragment>") -> None:
    uses: Dict[int, List[str]] = {}
    for node in fragment.nodes:
        for p, label in enumerate(node.labels):
            uses.setdefault(label, []).append(node.role(p))
    for tail, head in fragment.arcs:
        uses.setdefault(tail, []).append(IN)
        uses.setdefault(head, []).append(OUT)
    boundary = set(fragment.boundary)
    if len(boundary) != len(fragment.boundary):
        raise DiagramError(f"{source}: repeated boundary label")
    for label, roles in uses.items():
        expected = 1 if label in boundary else 2
        if len(roles) != expected:
            raise DiagramError(f"{source}: label {label} used {len(roles)} time(s), expected {expected}")
        if expected == 2 and roles[0] == roles[1]:
            raise DiagramError(f"{source}: label {label} used twice in {roles[0]} role")
    missing = boundary - set(uses)
    if missing:
        raise DiagramError(f"{source}: boundary labels {sorted(missing)} are not used")


def boundary_of(d: Diagram, removed: Set[int]) -> Tuple[Dict[Dart, int], Dict[int, Dart]]:
    """Host edges crossing the rim of `removed`, keyed by their own labels.

    Returns (feeds, lands): feeds maps a live tail dart to the label entering
    the hole, lands maps a label leaving the hole to its live head dart.
    """
    feeds: Dict[Dart, int] = {}
    lands: Dict[int, Dart] = {}
    for label, (tail, head) in d.edges.items():
        tail_gone = tail[0] in removed
        head_gone = head[0] in removed
        if head_gone and not tail_gone:
            feeds[tail] = label
        elif tail_gone and not head_gone:
            lands[label] = head
    return feeds, lands


def splice(
    d: Diagram,
    removed: Set[int],
    feeds: Dict[Dart, Label],
    lands: Dict[Label, Dart],
    nodes: Sequence[Node] = (),
    arcs: Sequence[Tuple[Label, Label]] = (),
    circles: int = 0,
    validate: bool = False,
) -> Diagram:
    """Replace the nodes in `removed` by `nodes` and `arcs`.

    Labels in `nodes`/`arcs` are local to the fragment. A strand reaching a
    label with no fragment continuation leaves through `lands`; a live tail
    dart listed in `feeds` enters the fragment on the given label. Closed arc
    chains become free circles.
    """
    live = [i for i in range(len(d.nodes)) if i not in removed]
    index = {old: new for new, old in enumerate(live)}
    base = len(live)

    in_slot: Dict[Label, Dart] = {}
    out_slot: Dict[Label, Dart] = {}
    for j, node in enumerate(nodes):
        for p, label in enumerate(node.labels):
            table = in_slot if node.role(p) == IN else out_slot
            if label in table:
                raise RuntimeError(f"Fragment label {label!r} used twice as {node.role(p)}")
            table[label] = (base + j, p)
    arc_from: Dict[Label, Label] = {}
    for tail, head in arcs:
        if tail in arc_from:
            raise RuntimeError(f"Fragment arc tail {tail!r} used twice")
        arc_from[tail] = head
    used: Set[Label] = set()

    def translate(dart: Dart) -> Dart:
        if dart[0] in removed:
            raise RuntimeError(f"Dart {dart} points into the removed region")
        return (index[dart[0]], dart[1])

    def forward(label: Label) -> Dart:
        for _ in range(len(arc_from) + 1):
            if label in in_slot:
                return in_slot[label]
            if label in arc_from:
                used.add(label)
                label = arc_from[label]
                continue
            if label in lands:
                return translate(lands[label])
            raise RuntimeError(f"Strand on {label!r} has nowhere to go")
        raise RuntimeError("Strand trapped in a closed arc chain")

    edges: List[Tuple[Dart, Dart]] = []
    for old in live:
        node = d.nodes[old]
        for p in range(4):
            if node.role(p) != OUT:
                continue
            dart = (old, p)
            head = forward(feeds[dart]) if dart in feeds else translate(d.partner(dart))
            edges.append(((index[old], p), head))
    for label, dart in out_slot.items():
        edges.append((dart, forward(label)))

    loops = 0
    for start in list(arc_from):
        if start in used:
            continue
        label = start
        while True:
            used.add(label)
            nxt = arc_from[label]
            if nxt == start:
                loops += 1
                break
            if nxt in arc_from and nxt not in used:
                label = nxt
                continue
            break

    all_nodes = [d.nodes[i] for i in live] + list(nodes)
    slots: List[List[int]] = [[0, 0, 0, 0] for _ in all_nodes]
    for k, (tail, head) in enumerate(edges, start=1):
        slots[tail[0]][tail[1]] = k
        slots[head[0]][head[1]] = k
    result = Diagram(
        tuple(Node(node.kind, tuple(slots[i])) for i, node in enumerate(all_nodes)),
        d.circles + circles + loops,
    )
    if validate:
        check_diagram(result)
    return result


def closure_pairs(fragment: Fragment) -> List[Tuple[int, int]]:
    """Non-crossing outside arcs joining each OUT boundary label to an IN one."""
    stack: List[Tuple[int, str]] = []
    pairs: List[Tuple[int, int]] = []
    for label, role in zip(fragment.boundary, fragment.boundary_roles()):
        if stack and stack[-1][1] != role:
            other, other_role = stack.pop()
            pairs.append((other, label) if other_role == OUT else (label, other))
        else:
            stack.append((label, role))
    if stack:
        raise DiagramError("Boundary roles are unbalanced; fragment cannot be closed")
    return pairs


def close_fragment(fragment: Fragment) -> Diagram:
    """Close the disk with the simplest planar orientation-respecting arcs."""
    mapping = {inner: outer for outer, inner in closure_pairs(fragment)}
    closed = fragment.relabeled(mapping)
    return splice(EMPTY, set(), {}, {}, closed.nodes, closed.arcs, closed.circles, validate=True)


def load_fragment(path: Path) -> Fragment:
    return parse_fragment_lines(path.read_text(encoding="utf-8").splitlines(), source=path.name)


Match = Tuple[Tuple[int, int], ...]


def _occurrences(pattern: Fragment) -> Dict[int, List[Tuple[int, int]]]:
    occ: Dict[int, List[Tuple[int, int]]] = {}
    for j, node in enumerate(pattern.nodes):
        for p, label in enumerate(node.labels):
            occ.setdefault(label, []).append((j, p))
    return occ


def _extend(d: Diagram, pattern: Fragment, occ: Dict[int, List[Tuple[int, int]]], anchor: Tuple[int, int]) -> Optional[Match]:
    assigned: Dict[int, Tuple[int, int]] = {0: anchor}
    used = {anchor[0]}
    queue = [0]
    while queue:
        j = queue.pop()
        host, rot = assigned[j]
        for p, label in enumerate(pattern.nodes[j].labels):
            spots = occ[label]
            if len(spots) != 2:
                continue
            j2, p2 = spots[1] if spots[0] == (j, p) else spots[0]
            v, pv = d.partner((host, (p + rot) % 4))
            if j2 in assigned:
                if assigned[j2] != (v, (pv - p2) % 4):
                    return None
                continue
            kind = pattern.nodes[j2].kind
            r2 = (pv - p2) % 4
            if v in used or d.nodes[v].kind != kind or r2 not in ROTATIONS[kind]:
                return None
            assigned[j2] = (v, r2)
            used.add(v)
            queue.append(j2)
    if len(assigned) != len(pattern.nodes):
        return None
    return tuple(assigned[j] for j in range(len(pattern.nodes)))


def find_matches(d: Diagram, pattern: Fragment) -> List[Match]:
    """Injective, rotation-respecting embeddings of a node pattern into `d`.

    Each match lists (host node, anchor rotation) per pattern node.
    """
    if not pattern.nodes:
        return []
    occ = _occurrences(pattern)
    first = pattern.nodes[0].kind
    found = set()
    for host, node in enumerate(d.nodes):
        if node.kind != first:
            continue
        for rot in ROTATIONS[first]:
            match = _extend(d, pattern, occ, (host, rot))
            if match is not None:
                found.add(match)
    return sorted(found)


def replace_match(d: Diagram, pattern: Fragment, match: Match, replacement: Fragment, validate: bool = False) -> Diagram:
    """Swap the matched copy of `pattern` for `replacement` (same boundary)."""
    removed = {host for host, _ in match}
    at: Dict[int, Dart] = {}
    roles: Dict[int, str] = {}
    boundary = set(pattern.boundary)
    for (host, rot), node in zip(match, pattern.nodes):
        for p, label in enumerate(node.labels):
            if label in boundary:
                at[label] = (host, (p + rot) % 4)
                roles[label] = node.role(p)
    owner = {dart: label for label, dart in at.items()}
    feeds: Dict[Dart, Label] = {}
    lands: Dict[Label, Dart] = {}
    rename: Dict[int, int] = {}
    for label, dart in at.items():
        other = d.partner(dart)
        if other[0] in removed:
            if roles[label] == OUT:
                rename[owner[other]] = label
        elif roles[label] == OUT:
            lands[label] = other
        else:
            feeds[other] = label
    rhs = replacement.relabeled(rename)
    return splice(d, removed, feeds, lands, rhs.nodes, rhs.arcs, rhs.circles, validate=validate)


def replace_arcs(
    d: Diagram,
    pattern: Fragment,
    labels: Sequence[int],
    replacement: Fragment,
    validate: bool = False,
    order: Optional[Sequence[int]] = None,
) -> Diagram:
    """Cut host edges `labels` and glue `replacement` in between.

    `labels[k]` carries pattern arc `order[k]` (arc k by default). Arcs that
    share a host edge lie along it in the order listed; the stretch of edge
    between two of them stays outside the disk.
    """
    arc_order = range(len(labels)) if order is None else order
    along: Dict[int, List[Tuple[int, int]]] = {}
    for edge, k in zip(labels, arc_order):
        along.setdefault(edge, []).append(pattern.arcs[k])
    feeds: Dict[Dart, Label] = {}
    lands: Dict[Label, Dart] = {}
    rename: Dict[int, int] = {}
    for edge, arcs in along.items():
        tail, head = d.edges[edge]
        feeds[tail] = arcs[0][0]
        for (_, leaving), (entering, _) in zip(arcs, arcs[1:]):
            rename[entering] = leaving
        lands[arcs[-1][1]] = head
    rhs = replacement.relabeled(rename)
    return splice(d, set(), feeds, lands, rhs.nodes, rhs.arcs, rhs.circles, validate=validate)
