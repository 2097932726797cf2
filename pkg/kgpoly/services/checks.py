"""Verification suites run by `kgpoly check`.

Each suite draws seeded random diagrams (or fixed fixtures) and records one
ReportItem per diagram, plus one item per offending site when something
disagrees.
"""

import logging
import random
from pathlib import Path
from typing import Callable, Dict, List, Optional, Sequence

from kgpoly.services.diagram import (
    CROSSINGS,
    POSITIVE,
    Diagram,
    DiagramError,
    disjoint_union,
    mirror,
    parse,
    serialize,
    switch_crossing,
)
from kgpoly.services.evaluator import (
    MIGRATIONS,
    EvalContext,
    apply_migration,
    evaluate,
    has_reduction,
    migration_sites,
    resolve_crossing,
)
from kgpoly.services.moves import (
    DIRECTIONS,
    LEMMA_SEQUENCES,
    MoveId,
    RandomConfig,
    all_move_ids,
    apply_move,
    closed_side,
    enumerate_sites,
    random_diagram,
    realize_sequence,
)
from kgpoly.services.qpoly import Q, Q_INV, LaurentPoly, monomial, quantum
from kgpoly.services.report import ReportItem, RunReport

logger = logging.getLogger(__name__)

BASE_DIR = Path(__file__).resolve().parent.parent
FIXTURES_DIR = BASE_DIR / "resources" / "fixtures"

ORDERS_PER_DIAGRAM = 5
# every MIGRATION_EVERY-th suite diagram is a vertex graph with no curl or bigon to reduce
MIGRATION_EVERY = 10
MIGRATION_BASES = ("octahedron", "antiprism")


def load_fixture(name: str) -> Diagram:
    path = FIXTURES_DIR / f"{name}.kgd"
    return parse(path.read_text(encoding="utf-8"))


def fixture_names() -> List[str]:
    return sorted(path.stem for path in FIXTURES_DIR.glob("*.kgd") if path.stem != "nonplanar")


def migration_state(seed: int, steps: int = 4) -> Diagram:
    """A vertex graph that only triangle migrations can reduce.

    Starts from the octahedron or the square antiprism and takes up to `steps`
    random migrations that keep every curl and bigon away.
    """
    rng = random.Random(seed)
    d = load_fixture(rng.choice(MIGRATION_BASES))
    ctx = EvalContext(3)
    for _ in range(steps):
        options = [(which, site) for which in MIGRATIONS for site in migration_sites(d, which)]
        rng.shuffle(options)
        for which, site in options:
            try:
                migrated, _ = apply_migration(d, site, which, ctx)
            except DiagramError:
                continue
            if not has_reduction(migrated):
                d = migrated
                break
    return d


def _diagrams(seed: int, count: int, config: Optional[RandomConfig] = None) -> List[Diagram]:
    config = config or RandomConfig()
    return [
        migration_state(seed * 100_003 + i)
        if i % MIGRATION_EVERY == MIGRATION_EVERY - 1
        else random_diagram(config, seed * 100_003 + i)
        for i in range(count)
    ]


def _guarded(report: RunReport, name: str, d: Optional[Diagram], check: Callable[[], None]) -> None:
    """Run one item's check; an exception from the evaluator or a move becomes a failing item."""
    try:
        check()
    except RuntimeError as exc:
        logger.warning("%s: %s", name, exc)
        report.add(
            ReportItem(name=name, passed=False, diagram=d, n=report.n, detail=f"{type(exc).__name__}: {exc}")
        )


def _check_sites(report: RunReport, i: int, d: Diagram, ctx: EvalContext, selected: Sequence[MoveId]) -> None:
    before = evaluate(d, ctx)
    checked = 0
    bad = 0
    for mid in selected:
        for direction in DIRECTIONS:
            for site in enumerate_sites(d, mid, direction):
                moved = apply_move(d, site)
                after = evaluate(moved, ctx)
                checked += 1
                if after != before:
                    bad += 1
                    report.add(
                        ReportItem(
                            name=f"diagram {i}: {mid} {direction}",
                            passed=False,
                            diagram=moved,
                            n=report.n,
                            polynomial=after,
                            expected=before,
                            detail=f"site {site.nodes or site.edges} of\n{serialize(d)}",
                        )
                    )
    report.add(
        ReportItem(
            name=f"diagram {i}",
            passed=bad == 0,
            diagram=d,
            n=report.n,
            polynomial=before,
            detail=f"{checked} sites checked, {bad} failed",
        )
    )


def check_moves(report: RunReport, seed: int, count: int, moves: Optional[Sequence[MoveId]] = None) -> RunReport:
    """P is unchanged at every applicable site of every selected move."""
    ctx = EvalContext(report.n)
    selected = list(moves) if moves else all_move_ids()
    for i, d in enumerate(_diagrams(seed, count)):
        _guarded(report, f"diagram {i}", d, lambda: _check_sites(report, i, d, ctx, selected))
    return report


def skein_triple(d: Diagram, index: int, ctx: EvalContext):
    """(L+, L-, L0) for the crossing at `index`."""
    node = d.nodes[index]
    switched = switch_crossing(d, index)
    smoothing = resolve_crossing(d, index, ctx)[0].graph
    if node.kind == POSITIVE:
        return d, switched, smoothing
    return switched, d, smoothing


def _with_crossing(seed: int, index: int, config: RandomConfig) -> Diagram:
    for attempt in range(20):
        d = random_diagram(config, seed * 100_003 + index * 31 + attempt)
        if d.kind_count(*CROSSINGS):
            return d
    return disjoint_union(random_diagram(config, seed * 100_003 + index), load_fixture("kink_positive"))


def check_skein(report: RunReport, seed: int, count: int) -> RunReport:
    """q^n P(L-) - q^-n P(L+) == (q - q^-1) P(L0)."""
    n = report.n
    ctx = EvalContext(n)
    config = RandomConfig()
    rng = random.Random(seed)
    for i in range(count):
        d = _with_crossing(seed, i, config)
        index = rng.choice([k for k, node in enumerate(d.nodes) if node.kind in CROSSINGS])

        def triple() -> None:
            plus, minus, zero = skein_triple(d, index, ctx)
            lhs = evaluate(minus, ctx).shift(n) - evaluate(plus, ctx).shift(-n)
            rhs = (Q - Q_INV) * evaluate(zero, ctx)
            report.add(
                ReportItem(
                    name=f"triple {i}: crossing {index}",
                    passed=lhs == rhs,
                    diagram=d,
                    n=n,
                    polynomial=lhs,
                    expected=rhs,
                )
            )

        _guarded(report, f"triple {i}: crossing {index}", d, triple)
    return report


def check_lemmas(report: RunReport, seed: int = 0, count: int = 0) -> RunReport:
    """Each derived move is reproduced by its sequence of generating moves."""
    ctx = EvalContext(report.n)
    for target, steps in sorted(LEMMA_SEQUENCES.items()):
        start = closed_side(target, "lhs")
        goal = closed_side(target, "rhs")
        name = f"{target} via {', '.join(str(step) for step in steps)}"

        def derive() -> None:
            path = realize_sequence(start, goal, steps)
            same_value = evaluate(start, ctx) == evaluate(goal, ctx)
            report.add(
                ReportItem(
                    name=name,
                    passed=path is not None and same_value,
                    diagram=start,
                    n=report.n,
                    detail="realized" if path is not None else "no site sequence reaches the right-hand side",
                )
            )

        _guarded(report, name, start, derive)
    return report


def check_order(report: RunReport, seed: int, count: int) -> RunReport:
    """Randomized reduction orders agree with the memoized deterministic order."""
    n = report.n
    ctx = EvalContext(n)
    for i, d in enumerate(_diagrams(seed, count)):

        def compare() -> None:
            expected = evaluate(d, ctx)
            values = [
                evaluate(d, EvalContext.randomized(n, seed * 7919 + i * ORDERS_PER_DIAGRAM + k))
                for k in range(ORDERS_PER_DIAGRAM)
            ]
            wrong = [value for value in values if value != expected]
            report.add(
                ReportItem(
                    name=f"diagram {i}",
                    passed=not wrong,
                    diagram=d,
                    n=n,
                    polynomial=wrong[0] if wrong else expected,
                    expected=expected,
                )
            )

        _guarded(report, f"diagram {i}", d, compare)
    return report


def check_mirror(report: RunReport, seed: int, count: int) -> RunReport:
    ctx = EvalContext(report.n)
    for i, d in enumerate(_diagrams(seed, count)):

        def compare() -> None:
            value = evaluate(d, ctx)
            mirrored = evaluate(mirror(d), ctx)
            report.add(
                ReportItem(
                    name=f"diagram {i}",
                    passed=mirrored == value.bar(),
                    diagram=d,
                    n=report.n,
                    polynomial=mirrored,
                    expected=value.bar(),
                )
            )

        _guarded(report, f"diagram {i}", d, compare)
    return report


def hopf_oracle(n: int) -> LaurentPoly:
    """Positive Hopf link from the skein relation, starting at the two-component unlink and the unknot."""
    unknot = quantum(n)
    return (unknot * unknot).shift(2 * n) - ((Q - Q_INV) * unknot).shift(n)


def trefoil_oracle(n: int) -> LaurentPoly:
    """Positive trefoil: switching one crossing gives the unknot, smoothing it gives the Hopf link."""
    return quantum(n).shift(2 * n) - ((Q - Q_INV) * hopf_oracle(n)).shift(n)


def example_oracle(n: int) -> LaurentPoly:
    return (monomial(1, 1 - n) - quantum(2).shift(-n) + 1) * quantum(n - 1) * quantum(n)


KNOT_ORACLES: Dict[str, Callable[[int], LaurentPoly]] = {
    "unknot": quantum,
    "example": example_oracle,
    "hopf_positive": hopf_oracle,
    "hopf_negative": lambda n: hopf_oracle(n).bar(),
    "trefoil_positive": trefoil_oracle,
    "trefoil_negative": lambda n: trefoil_oracle(n).bar(),
}


def check_knots(report: RunReport, seed: int = 0, count: int = 0) -> RunReport:
    """Fixture diagrams against closed-form values."""
    ctx = EvalContext(report.n)
    for name, oracle in KNOT_ORACLES.items():
        d = load_fixture(name)

        def compare() -> None:
            value = evaluate(d, ctx)
            expected = oracle(report.n)
            report.add(
                ReportItem(name=name, passed=value == expected, diagram=d, n=report.n, polynomial=value, expected=expected)
            )

        _guarded(report, name, d, compare)
    return report


SUITES: Dict[str, Callable[..., RunReport]] = {
    "moves": check_moves,
    "skein": check_skein,
    "lemmas": check_lemmas,
    "order": check_order,
    "mirror": check_mirror,
    "knots": check_knots,
}


def run_check(
    kind: str,
    n: int,
    seed: int,
    count: int,
    moves: Optional[Sequence[MoveId]] = None,
    command: Optional[List[str]] = None,
) -> RunReport:
    if kind not in SUITES:
        raise ValueError(f"Unknown check {kind!r}; expected one of {', '.join(SUITES)}")
    report = RunReport(command=command or [], kind=kind, n=n, seed=seed, count=count)
    logger.info("running %s check: n=%d seed=%d count=%d", kind, n, seed, count)
    if kind == "moves":
        check_moves(report, seed, count, moves)
    else:
        SUITES[kind](report, seed, count)
    report.finish()
    logger.info("%s check: %d/%d passed", kind, len(report.items) - len(report.failures), len(report.items))
    return report
