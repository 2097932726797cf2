"""Evaluation of the polynomial P at a fixed n.

Crossings are expanded into states, IOIO vertices are smoothed, and the
remaining planar IIOO graphs are reduced with the circle, curl and bigon
rules. A graph with none of those is walked to one that has a curl or a
bigon by triangle migrations; each migration contributes correction terms
on graphs with fewer vertices.
"""

import logging
import random
from collections import deque
from dataclasses import dataclass, field
from functools import lru_cache
from pathlib import Path
from typing import Deque, Dict, List, Optional, Set, Tuple

from kgpoly.services.config import settings
from kgpoly.services.diagram import (
    CROSSINGS,
    IIOO,
    IOIO,
    POSITIVE,
    Diagram,
    DiagramError,
    Node,
    canonical_key,
    components,
)
from kgpoly.services.fragments import (
    Fragment,
    Match,
    boundary_of,
    find_matches,
    load_fragment,
    replace_match,
    splice,
)
from kgpoly.services.qpoly import ONE, LaurentPoly, monomial, quantum

logger = logging.getLogger(__name__)

BASE_DIR = Path(__file__).resolve().parent.parent
RELATIONS_DIR = BASE_DIR / "resources" / "relations"

CROSSING = "crossing"
SMOOTH = "ioio"
CURL = "curl"
PARALLEL = "parallel"
ANTIPARALLEL = "antiparallel"

# source, target, signed corrections, whether corrections carry [n-3]
MIGRATIONS: Dict[str, Tuple[str, str, Tuple[Tuple[int, str], ...], bool]] = {
    "R5->R7": ("R5", "R7", ((1, "R8"), (-1, "R6")), False),
    "R7->R5": ("R7", "R5", ((-1, "R8"), (1, "R6")), False),
    "R9->R11": ("R9", "R11", ((1, "R12"), (-1, "R10")), True),
    "R11->R9": ("R11", "R9", ((-1, "R12"), (1, "R10")), True),
}


@dataclass
class EvalContext:
    n: int
    memo: Optional[Dict[bytes, LaurentPoly]] = field(default_factory=dict)
    rng: Optional[random.Random] = None
    memo_cap: int = 0
    hits: int = 0
    misses: int = 0
    migrations: int = 0
    _quantum: Dict[int, LaurentPoly] = field(default_factory=dict, repr=False)

    def __post_init__(self) -> None:
        if self.n < 2:
            raise ValueError(f"n must be at least 2, got {self.n}")
        if self.memo_cap <= 0:
            self.memo_cap = settings.memo_cap

    @classmethod
    def randomized(cls, n: int, seed: int) -> "EvalContext":
        """Context that picks reduction sites at random and never caches."""
        return cls(n, memo=None, rng=random.Random(seed))

    def quantum(self, k: int) -> LaurentPoly:
        if k not in self._quantum:
            self._quantum[k] = quantum(k)
        return self._quantum[k]

    def remember(self, key: bytes, value: LaurentPoly) -> None:
        if self.memo is None or len(self.memo) >= self.memo_cap:
            return
        previous = self.memo.setdefault(key, value)
        if previous != value:
            raise RuntimeError(f"Memo conflict for key {key!r}: {previous} != {value}")


@dataclass(frozen=True)
class StateTerm:
    coeff: LaurentPoly
    graph: Diagram


@dataclass(frozen=True)
class MigrationStep:
    which: str
    site: Match
    source: Diagram
    target: Diagram
    corrections: Tuple[StateTerm, ...]


def _node(d: Diagram, index: int, *kinds: str) -> Node:
    if not 0 <= index < len(d.nodes):
        raise DiagramError(f"No node with index {index}")
    node = d.nodes[index]
    if node.kind not in kinds:
        raise DiagramError(f"Node {index} is {node.kind}, expected one of {', '.join(kinds)}")
    return node


def _replace(d: Diagram, removed: Set[int], nodes: Tuple[Node, ...] = (), arcs=()) -> Diagram:
    feeds, lands = boundary_of(d, removed)
    return splice(d, removed, feeds, lands, nodes=nodes, arcs=arcs)


def resolve_crossing(d: Diagram, index: int, ctx: EvalContext) -> Tuple[StateTerm, StateTerm]:
    """Skein expansion of one crossing: (smoothing term, vertex term)."""
    node = _node(d, index, *CROSSINGS)
    a, b, c, e = node.labels
    if node.kind == POSITIVE:
        arcs = ((a, b), (e, c))
        vertex = Node(IIOO, (e, a, b, c))
        smooth_coeff = monomial(1, ctx.n - 1)
        vertex_coeff = monomial(-1, ctx.n)
    else:
        arcs = ((a, e), (b, c))
        vertex = Node(IIOO, (a, b, c, e))
        smooth_coeff = monomial(1, 1 - ctx.n)
        vertex_coeff = monomial(-1, -ctx.n)
    return (
        StateTerm(smooth_coeff, _replace(d, {index}, arcs=arcs)),
        StateTerm(vertex_coeff, _replace(d, {index}, nodes=(vertex,))),
    )


def smooth_ioio(d: Diagram, index: int) -> Tuple[Diagram, Diagram]:
    a, b, c, e = _node(d, index, IOIO).labels
    return (
        _replace(d, {index}, arcs=((a, b), (c, e))),
        _replace(d, {index}, arcs=((a, e), (c, b))),
    )


def reduce_circle(d: Diagram, ctx: EvalContext) -> Tuple[LaurentPoly, Diagram]:
    return ctx.quantum(ctx.n) ** d.circles, Diagram(d.nodes, 0)


def find_curls(d: Diagram) -> List[int]:
    found = []
    for i, node in enumerate(d.nodes):
        if node.kind != IIOO:
            continue
        a, b, c, e = node.labels
        if b == c or a == e:
            found.append(i)
    return found


def reduce_curl(d: Diagram, index: int, ctx: EvalContext) -> Tuple[LaurentPoly, Diagram]:
    a, b, c, e = _node(d, index, IIOO).labels
    if b == c:
        arcs = ((a, e),)
    elif a == e:
        arcs = ((b, c),)
    else:
        raise DiagramError(f"Node {index} has no curl")
    return ctx.quantum(ctx.n - 1), _replace(d, {index}, arcs=arcs)


def _is_parallel(u: Node, v: Node) -> bool:
    return u.labels[2] == v.labels[1] and u.labels[3] == v.labels[0]


def _antiparallel_type(u: Node, v: Node) -> Optional[int]:
    """1 when the bigon sits on slots 1 and 2 of both vertices, 3 for slots 3 and 0."""
    if u.labels[2] == v.labels[1] and v.labels[2] == u.labels[1]:
        return 1
    if u.labels[3] == v.labels[0] and v.labels[3] == u.labels[0]:
        return 3
    return None


def find_parallel_bigons(d: Diagram) -> List[Tuple[int, int]]:
    """(u, v) pairs where both out-edges of u run into v."""
    vertices = [i for i, node in enumerate(d.nodes) if node.kind == IIOO]
    return [
        (u, v)
        for u in vertices
        for v in vertices
        if u != v and _is_parallel(d.nodes[u], d.nodes[v])
    ]


def find_antiparallel_bigons(d: Diagram) -> List[Tuple[int, int]]:
    vertices = [i for i, node in enumerate(d.nodes) if node.kind == IIOO]
    return [
        (u, v)
        for k, u in enumerate(vertices)
        for v in vertices[k + 1:]
        if _antiparallel_type(d.nodes[u], d.nodes[v]) is not None
    ]


def reduce_bigon_parallel(d: Diagram, pair: Tuple[int, int], ctx: EvalContext) -> Tuple[LaurentPoly, Diagram]:
    u_index, v_index = pair
    u = _node(d, u_index, IIOO)
    v = _node(d, v_index, IIOO)
    if u_index == v_index or not _is_parallel(u, v):
        raise DiagramError(f"Nodes {u_index} and {v_index} do not bound a parallel bigon")
    merged = Node(IIOO, (u.labels[0], u.labels[1], v.labels[2], v.labels[3]))
    return ctx.quantum(2), _replace(d, {u_index, v_index}, nodes=(merged,))


def reduce_bigon_antiparallel(
    d: Diagram, pair: Tuple[int, int], ctx: EvalContext
) -> Tuple[StateTerm, StateTerm]:
    """Split an oppositely oriented bigon into (strands across, strands turned back)."""
    u_index, v_index = pair
    u = _node(d, u_index, IIOO)
    v = _node(d, v_index, IIOO)
    kind = _antiparallel_type(u, v) if u_index != v_index else None
    if kind is None:
        raise DiagramError(f"Nodes {u_index} and {v_index} do not bound an antiparallel bigon")
    ext_in, ext_out = (0, 3) if kind == 1 else (1, 2)
    u_in, u_out = u.labels[ext_in], u.labels[ext_out]
    v_in, v_out = v.labels[ext_in], v.labels[ext_out]
    removed = {u_index, v_index}
    return (
        StateTerm(ONE, _replace(d, removed, arcs=((u_in, v_out), (v_in, u_out)))),
        StateTerm(ctx.quantum(ctx.n - 2), _replace(d, removed, arcs=((u_in, u_out), (v_in, v_out)))),
    )


@lru_cache(maxsize=1)
def load_relations() -> Dict[str, Fragment]:
    relations = {path.stem: load_fragment(path) for path in sorted(RELATIONS_DIR.glob("R*.kgdf"))}
    logger.debug("loaded relations %s", ", ".join(sorted(relations)))
    return relations


def migration_sites(g: Diagram, which: str) -> List[Match]:
    source = MIGRATIONS[which][0]
    return find_matches(g, load_relations()[source])


def apply_migration(g: Diagram, site: Match, which: str, ctx: EvalContext) -> Tuple[Diagram, List[StateTerm]]:
    """Rewrite one triangle; P(g) == P(migrated) + sum of the corrections."""
    if which not in MIGRATIONS:
        raise ValueError(f"Unknown migration {which!r}")
    source, target, corrections, scaled = MIGRATIONS[which]
    relations = load_relations()
    pattern = relations[source]
    try:
        migrated = replace_match(g, pattern, site, relations[target], validate=True)
    except (DiagramError, RuntimeError, KeyError) as exc:
        raise DiagramError(f"{which} does not match at {site}: {exc}") from exc
    scale = ctx.quantum(ctx.n - 3) if scaled else ONE
    terms = [
        StateTerm(scale * sign, replace_match(g, pattern, site, relations[name]))
        for sign, name in corrections
    ]
    return migrated, terms


def has_reduction(d: Diagram) -> bool:
    return bool(find_curls(d) or find_parallel_bigons(d) or find_antiparallel_bigons(d))


def find_bigon_path(g: Diagram, ctx: EvalContext) -> List[MigrationStep]:
    """Breadth-first search over triangle migrations until a curl or bigon appears."""
    if has_reduction(g):
        return []
    start = canonical_key(g)
    seen = {start}
    queue: Deque[Tuple[Diagram, List[MigrationStep]]] = deque([(g, [])])
    while queue:
        current, path = queue.popleft()
        moves = [(which, site) for which in MIGRATIONS for site in migration_sites(current, which)]
        if ctx.rng is not None:
            ctx.rng.shuffle(moves)
        for which, site in moves:
            try:
                migrated, corrections = apply_migration(current, site, which, ctx)
            except DiagramError as exc:
                logger.debug("skipping %s at %s: %s", which, site, exc)
                continue
            key = canonical_key(migrated)
            if key in seen:
                continue
            seen.add(key)
            if len(seen) > ctx.memo_cap:
                raise RuntimeError(f"Migration search exceeded KGD_MEMO_CAP={ctx.memo_cap} states")
            step = MigrationStep(which, site, current, migrated, tuple(corrections))
            if has_reduction(migrated):
                logger.debug("migration path of length %d after %d states", len(path) + 1, len(seen))
                return path + [step]
            queue.append((migrated, path + [step]))
    raise RuntimeError(f"No migration path to a curl or bigon from {len(g.nodes)}-vertex graph")


def reduction_sites(d: Diagram) -> List[Tuple[str, Tuple[int, ...]]]:
    """Every applicable local reduction, in priority order."""
    sites: List[Tuple[str, Tuple[int, ...]]] = []
    sites.extend((CROSSING, (i,)) for i, node in enumerate(d.nodes) if node.kind in CROSSINGS)
    sites.extend((SMOOTH, (i,)) for i, node in enumerate(d.nodes) if node.kind == IOIO)
    sites.extend((CURL, (i,)) for i in find_curls(d))
    sites.extend((PARALLEL, pair) for pair in find_parallel_bigons(d))
    sites.extend((ANTIPARALLEL, pair) for pair in find_antiparallel_bigons(d))
    return sites


def expand(d: Diagram, rule: str, site: Tuple[int, ...], ctx: EvalContext) -> List[StateTerm]:
    """One reduction step as a weighted list of smaller diagrams."""
    if rule == CROSSING:
        return list(resolve_crossing(d, site[0], ctx))
    if rule == SMOOTH:
        return [StateTerm(ONE, graph) for graph in smooth_ioio(d, site[0])]
    if rule == CURL:
        return [StateTerm(*reduce_curl(d, site[0], ctx))]
    if rule == PARALLEL:
        return [StateTerm(*reduce_bigon_parallel(d, (site[0], site[1]), ctx))]
    if rule == ANTIPARALLEL:
        return list(reduce_bigon_antiparallel(d, (site[0], site[1]), ctx))
    raise ValueError(f"Unknown reduction rule {rule!r}")


def _combine(terms: List[StateTerm], ctx: EvalContext) -> LaurentPoly:
    total = LaurentPoly()
    for term in terms:
        if term.coeff.is_zero():
            continue
        total = total + term.coeff * evaluate(term.graph, ctx)
    return total


def _evaluate_connected(d: Diagram, ctx: EvalContext) -> LaurentPoly:
    sites = reduction_sites(d)
    if sites:
        rule, site = ctx.rng.choice(sites) if ctx.rng is not None else sites[0]
        return _combine(expand(d, rule, site, ctx), ctx)
    path = find_bigon_path(d, ctx)
    ctx.migrations += len(path)
    corrections = [term for step in path for term in step.corrections]
    return evaluate(path[-1].target, ctx) + _combine(corrections, ctx)


def evaluate(d: Diagram, ctx: EvalContext) -> LaurentPoly:
    """P(d) at ctx.n."""
    factor, d = reduce_circle(d, ctx)
    if not d.nodes:
        return factor
    total = factor
    for part in components(d):
        key = canonical_key(part) if ctx.memo is not None else None
        if key is not None and key in ctx.memo:
            ctx.hits += 1
            value = ctx.memo[key]
        else:
            ctx.misses += 1
            value = _evaluate_connected(part, ctx)
            if key is not None:
                ctx.remember(key, value)
        total = total * value
    return total


def evaluate_at(d: Diagram, n: int) -> LaurentPoly:
    return evaluate(d, EvalContext(n))
