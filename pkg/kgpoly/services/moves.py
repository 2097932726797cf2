"""Oriented Reidemeister-type moves for knotted 4-valent graphs with rigid vertices.

Every move is stored as a pair of fragments under resources/moves and can be
applied in either direction: LR replaces a copy of the left side by the right
side, RL does the opposite.
"""

import itertools
import logging
import random
import re
from dataclasses import dataclass
from functools import lru_cache
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

from kgpoly.services.diagram import (
    CROSSINGS,
    IIOO,
    Diagram,
    DiagramError,
    Node,
    canonical_key,
    faces,
    parse,
    switch_crossing,
)
from kgpoly.services.fragments import (
    Fragment,
    Match,
    close_fragment,
    find_matches,
    parse_fragment_lines,
    replace_arcs,
    replace_match,
)

logger = logging.getLogger(__name__)

BASE_DIR = Path(__file__).resolve().parent.parent
MOVES_DIR = BASE_DIR / "resources" / "moves"

LR = "LR"
RL = "RL"
DIRECTIONS = (LR, RL)

_ID_RE = re.compile(r"^(?:omega|Omega|O|Ω)?([1-5])([a-l])$")


class MoveError(RuntimeError):
    """A rewrite produced an invalid diagram."""


@dataclass(frozen=True, order=True)
class MoveId:
    family: int
    variant: str

    def __str__(self) -> str:
        return f"O{self.family}{self.variant}"


def move_id(text: str) -> MoveId:
    found = _ID_RE.match(text.strip())
    if not found:
        raise ValueError(f"Unknown move identifier: {text}")
    mid = MoveId(int(found.group(1)), found.group(2))
    if mid not in load_templates():
        raise ValueError(f"Unknown move identifier: {text}")
    return mid


@dataclass(frozen=True)
class MoveTemplate:
    id: MoveId
    lhs: Fragment
    rhs: Fragment

    def sides(self, direction: str) -> Tuple[Fragment, Fragment]:
        return (self.lhs, self.rhs) if direction == LR else (self.rhs, self.lhs)

    def growth(self, direction: str) -> int:
        pattern, replacement = self.sides(direction)
        return len(replacement.nodes) - len(pattern.nodes)


@dataclass(frozen=True, order=True)
class MoveSite:
    move: MoveId
    direction: str
    nodes: Match = ()
    edges: Tuple[int, ...] = ()
    arcs: Tuple[int, ...] = ()


def parse_move(text: str, mid: MoveId, source: str = "<move>") -> MoveTemplate:
    header: List[str] = []
    sections: Dict[str, List[str]] = {"LHS": [], "RHS": []}
    current = header
    for raw in text.splitlines():
        marker = raw.split("#", 1)[0].strip()
        if marker in sections:
            current = sections[marker]
            continue
        current.append(raw)
    lhs = parse_fragment_lines(header + sections["LHS"], source=f"{source}:LHS")
    rhs = parse_fragment_lines(header + sections["RHS"], source=f"{source}:RHS")
    if lhs.boundary_roles() != rhs.boundary_roles():
        raise DiagramError(f"{source}: left and right sides disagree on boundary orientation")
    return MoveTemplate(mid, lhs, rhs)


@lru_cache(maxsize=1)
def load_templates() -> Dict[MoveId, MoveTemplate]:
    templates: Dict[MoveId, MoveTemplate] = {}
    for path in sorted(MOVES_DIR.glob("omega*.kgdf")):
        mid = MoveId(int(path.stem[5]), path.stem[6])
        templates[mid] = parse_move(path.read_text(encoding="utf-8"), mid, source=path.name)
    logger.debug("loaded %d move templates", len(templates))
    return templates


def all_move_ids() -> List[MoveId]:
    return sorted(load_templates())


def template(mid: MoveId) -> MoveTemplate:
    return load_templates()[mid]


def generating_set() -> List[MoveId]:
    return [
        MoveId(1, "a"),
        MoveId(1, "b"),
        MoveId(2, "a"),
        MoveId(3, "a"),
        MoveId(4, "a"),
        MoveId(4, "e"),
        MoveId(5, "a"),
        MoveId(4, "j"),
        MoveId(4, "l"),
        MoveId(5, "g"),
    ]


def _rewrite(d: Diagram, tmpl: MoveTemplate, site: MoveSite, validate: bool) -> Diagram:
    pattern, replacement = tmpl.sides(site.direction)
    if pattern.nodes:
        return replace_match(d, pattern, site.nodes, replacement, validate=validate)
    return replace_arcs(d, pattern, site.edges, replacement, validate=validate, order=site.arcs or None)


def _arc_sites(d: Diagram, count: int) -> List[Tuple[Tuple[int, ...], Tuple[int, ...]]]:
    """(edges, arcs) placements of `count` pattern arcs on edges bounding one face.

    An edge may carry several arcs; they are listed in the order the edge
    passes them.
    """
    found = set()
    for face in faces(d):
        labels = sorted({d.label(dart) for dart in face})
        for chosen in itertools.product(labels, repeat=count):
            for perm in itertools.permutations(range(count)):
                entries = sorted(((chosen[k], k) for k in perm), key=lambda entry: entry[0])
                found.add((tuple(edge for edge, _ in entries), tuple(k for _, k in entries)))
    return sorted(found)


def enumerate_sites(d: Diagram, mid: MoveId, direction: str) -> List[MoveSite]:
    """All places where the chosen side of the move occurs, in a fixed order."""
    tmpl = template(mid)
    pattern, _ = tmpl.sides(direction)
    if pattern.nodes:
        candidates = [MoveSite(mid, direction, nodes=match) for match in find_matches(d, pattern)]
    else:
        candidates = [
            MoveSite(mid, direction, edges=edges, arcs=arcs)
            for edges, arcs in _arc_sites(d, len(pattern.arcs))
        ]
    sites = []
    for site in candidates:
        try:
            _rewrite(d, tmpl, site, validate=True)
        except DiagramError as exc:
            logger.debug("dropping %s %s site %s: %s", mid, direction, site, exc)
            continue
        except (RuntimeError, KeyError) as exc:
            raise MoveError(f"{mid} {direction} template could not be glued at {site}: {exc}") from exc
        sites.append(site)
    return sites


def apply_move(d: Diagram, site: MoveSite) -> Diagram:
    try:
        return _rewrite(d, template(site.move), site, validate=True)
    except (DiagramError, RuntimeError, KeyError) as exc:
        raise MoveError(f"{site.move} {site.direction} produced an invalid diagram: {exc}") from exc


def closed_side(mid: MoveId, side: str) -> Diagram:
    """Closed-up diagram of one side of a move ("lhs" or "rhs")."""
    tmpl = template(mid)
    return close_fragment(tmpl.lhs if side == "lhs" else tmpl.rhs)


LEMMA_SEQUENCES: Dict[MoveId, Tuple[MoveId, ...]] = {
    MoveId(4, "i"): (MoveId(2, "d"), MoveId(4, "j"), MoveId(2, "b")),
    MoveId(4, "k"): (MoveId(2, "d"), MoveId(4, "l"), MoveId(2, "a")),
    MoveId(5, "h"): (MoveId(1, "c"), MoveId(4, "j"), MoveId(5, "g"), MoveId(4, "k"), MoveId(1, "d")),
}


def realize_sequence(start: Diagram, target: Diagram, steps: Sequence[MoveId]) -> Optional[List[MoveSite]]:
    """Search for sites (either direction) of `steps`, in order, turning start into target."""
    goal = canonical_key(target)
    frontier: Dict[bytes, Tuple[Diagram, List[MoveSite]]] = {canonical_key(start): (start, [])}
    for mid in steps:
        nxt: Dict[bytes, Tuple[Diagram, List[MoveSite]]] = {}
        for diagram, path in frontier.values():
            for direction in DIRECTIONS:
                for site in enumerate_sites(diagram, mid, direction):
                    moved = apply_move(diagram, site)
                    nxt.setdefault(canonical_key(moved), (moved, path + [site]))
        frontier = nxt
        logger.debug("after %s: %d diagrams", mid, len(frontier))
    found = frontier.get(goal)
    return found[1] if found else None


@dataclass
class RandomConfig:
    max_nodes: int = 6
    vertex_fraction: float = 0.3
    steps: int = 12
    grow_rate: float = 0.5
    mutate_rate: float = 0.2


BASES = {
    "unknot": "O",
    "ioio": "Vx 1 1 2 2",
    "bigon": "V= 1 2 3 4\nV= 4 3 2 1",
}


def _seed_kink(rng: random.Random) -> Diagram:
    mid = rng.choice([m for m in all_move_ids() if m.family == 1])
    return closed_side(mid, "lhs")


def random_diagram(config: RandomConfig, seed: int) -> Diagram:
    """Seeded random diagram built by growing and shuffling a small base diagram."""
    rng = random.Random(seed)
    vertex_bases = [parse(BASES["ioio"]), parse(BASES["bigon"])]
    vertex_bases = [base for base in vertex_bases if base.size <= config.max_nodes]
    if vertex_bases and rng.random() < config.vertex_fraction:
        d = rng.choice(vertex_bases)
    else:
        d = parse(BASES["unknot"])
    moves = all_move_ids()
    for _ in range(config.steps):
        if not d.nodes:
            if d.circles and config.max_nodes >= 1:
                d = Diagram(_seed_kink(rng).nodes, d.circles - 1)
            continue
        if rng.random() < config.mutate_rate:
            d = _mutate(d, rng, config)
            continue
        grow = rng.random() < config.grow_rate
        options = []
        for mid in moves:
            tmpl = template(mid)
            for direction in DIRECTIONS:
                delta = tmpl.growth(direction)
                if (grow and delta <= 0) or (not grow and delta != 0):
                    continue
                if d.size + delta > config.max_nodes:
                    continue
                options.append((mid, direction))
        rng.shuffle(options)
        for mid, direction in options[:6]:
            sites = enumerate_sites(d, mid, direction)
            if sites:
                d = apply_move(d, rng.choice(sites))
                break
    return d


def _mutate(d: Diagram, rng: random.Random, config: RandomConfig) -> Diagram:
    """Switch a crossing, or with probability vertex_fraction turn it into an IIOO vertex."""
    crossings = [i for i, node in enumerate(d.nodes) if node.kind in CROSSINGS]
    if not crossings:
        return d
    index = rng.choice(crossings)
    if rng.random() < config.vertex_fraction:
        node = d.nodes[index]
        a, b, c, e = node.labels
        labels = (e, a, b, c) if node.kind == CROSSINGS[0] else (a, b, c, e)
        nodes = list(d.nodes)
        nodes[index] = Node(IIOO, labels)
        return Diagram(tuple(nodes), d.circles)
    return switch_crossing(d, index)
