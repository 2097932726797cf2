import os
import unittest
from unittest import mock


from kgpoly.services.checks import example_oracle, hopf_oracle, load_fixture, trefoil_oracle
from kgpoly.services.diagram import IIOO, DiagramError, canonical_key, mirror, parse, with_circles
from kgpoly.services.evaluator import (
    EvalContext,
    apply_migration,
    evaluate,
    find_antiparallel_bigons,
    find_bigon_path,
    find_curls,
    find_parallel_bigons,
    has_reduction,
    load_relations,
    migration_sites,
    reduce_bigon_antiparallel,
    reduce_bigon_parallel,
    reduce_circle,
    reduce_curl,
    resolve_crossing,
    smooth_ioio,
)
from kgpoly.services.moves import RandomConfig, random_diagram
from kgpoly.services.qpoly import ONE, LaurentPoly, monomial, quantum

ANTIPARALLEL = "V= 1 2 3 1\nV= 4 3 2 4\n"
# three vertices joined in a ring of parallel bigons
PARALLEL_RING = "V= 1 2 3 4\nV= 4 3 5 6\nV= 6 5 2 1\n"


class TestContext(unittest.TestCase):
    def test_n_must_be_at_least_two(self) -> None:
        with self.assertRaises(ValueError):
            EvalContext(1)

    def test_memo_cap_from_env(self) -> None:
        with mock.patch.dict(os.environ, {"KGD_MEMO_CAP": "17"}):
            self.assertEqual(EvalContext(2).memo_cap, 17)
        with mock.patch.dict(os.environ, {"KGD_MEMO_CAP": "lots"}):
            with self.assertRaises(RuntimeError):
                EvalContext(2)

    def test_default_memo_cap(self) -> None:
        with mock.patch.dict(os.environ, {}, clear=False):
            os.environ.pop("KGD_MEMO_CAP", None)
            self.assertEqual(EvalContext(3).memo_cap, 1_000_000)


class TestLocalRules(unittest.TestCase):
    def test_positive_crossing(self) -> None:
        ctx = EvalContext(3)
        smooth, vertex = resolve_crossing(load_fixture("kink_positive"), 0, ctx)
        self.assertEqual(smooth.coeff, monomial(1, 2))
        self.assertEqual(smooth.graph, parse("O\nO"))
        self.assertEqual(vertex.coeff, monomial(-1, 3))
        self.assertEqual(canonical_key(vertex.graph), canonical_key(load_fixture("curl_vertex")))

    def test_negative_crossing(self) -> None:
        ctx = EvalContext(4)
        smooth, vertex = resolve_crossing(load_fixture("kink_negative"), 0, ctx)
        self.assertEqual(smooth.coeff, monomial(1, -3))
        self.assertEqual(vertex.coeff, monomial(-1, -4))
        self.assertEqual(vertex.graph.nodes[0].kind, IIOO)

    def test_resolve_rejects_vertices(self) -> None:
        with self.assertRaises(DiagramError):
            resolve_crossing(load_fixture("curl_vertex"), 0, EvalContext(2))

    def test_smooth_ioio(self) -> None:
        first, second = smooth_ioio(load_fixture("ioio_closed"), 0)
        self.assertEqual(sorted([first.circles, second.circles]), [1, 2])
        self.assertEqual(first.size + second.size, 0)
        with self.assertRaises(DiagramError):
            smooth_ioio(load_fixture("curl_vertex"), 0)

    def test_reduce_circle(self) -> None:
        ctx = EvalContext(3)
        factor, rest = reduce_circle(parse("O\nO"), ctx)
        self.assertEqual(factor, quantum(3) * quantum(3))
        self.assertEqual(rest.circles, 0)

    def test_reduce_curl(self) -> None:
        ctx = EvalContext(4)
        d = load_fixture("curl_vertex")
        self.assertEqual(find_curls(d), [0])
        factor, rest = reduce_curl(d, 0, ctx)
        self.assertEqual(factor, quantum(3))
        self.assertEqual(rest, parse("O"))
        with self.assertRaises(DiagramError):
            reduce_curl(load_fixture("bigon"), 0, ctx)

    def test_reduce_parallel_bigon(self) -> None:
        ctx = EvalContext(3)
        d = load_fixture("bigon")
        self.assertEqual(find_parallel_bigons(d), [(0, 1), (1, 0)])
        factor, rest = reduce_bigon_parallel(d, (0, 1), ctx)
        self.assertEqual(factor, quantum(2))
        self.assertEqual(canonical_key(rest), canonical_key(load_fixture("curl_vertex")))

    def test_reduce_antiparallel_bigon(self) -> None:
        for n in (2, 3, 5):
            ctx = EvalContext(n)
            d = parse(ANTIPARALLEL)
            self.assertEqual(find_antiparallel_bigons(d), [(0, 1)])
            across, back = reduce_bigon_antiparallel(d, (0, 1), ctx)
            self.assertEqual(across.coeff, ONE)
            self.assertEqual(across.graph.circles, 1)
            self.assertEqual(back.coeff, quantum(n - 2))
            self.assertEqual(back.graph.circles, 2)
            by_bigon = quantum(n) + quantum(n - 2) * quantum(n) * quantum(n)
            self.assertEqual(by_bigon, evaluate(d, ctx))

    def test_parallel_bigons_are_not_antiparallel(self) -> None:
        d = parse(PARALLEL_RING)
        self.assertEqual(find_parallel_bigons(d), [(0, 1), (1, 2), (2, 0)])
        self.assertEqual(find_antiparallel_bigons(d), [])
        with self.assertRaises(DiagramError):
            reduce_bigon_antiparallel(d, (0, 1), EvalContext(3))
        # two vertices carry both kinds of bigon at once
        self.assertEqual(find_antiparallel_bigons(load_fixture("bigon")), [(0, 1)])


class TestClosedValues(unittest.TestCase):
    def test_unknot(self) -> None:
        for n in range(2, 7):
            self.assertEqual(evaluate(load_fixture("unknot"), EvalContext(n)), quantum(n))

    def test_unknot_at_three(self) -> None:
        self.assertEqual(str(evaluate(load_fixture("unknot"), EvalContext(3))), "q^-2 + 1 + q^2")

    def test_example(self) -> None:
        d = load_fixture("example")
        for n in range(2, 6):
            with self.subTest(n=n):
                self.assertEqual(evaluate(d, EvalContext(n)), example_oracle(n))
        self.assertEqual(evaluate(d, EvalContext(2)), LaurentPoly({-4: -1, -2: -1, -1: 1, 1: 1}))

    def test_small_graphs(self) -> None:
        for n in range(2, 6):
            ctx = EvalContext(n)
            qn = quantum(n)
            with self.subTest(n=n):
                self.assertEqual(evaluate(load_fixture("kink_positive"), ctx), qn)
                self.assertEqual(evaluate(load_fixture("kink_negative"), ctx), qn)
                self.assertEqual(evaluate(load_fixture("curl_vertex"), ctx), quantum(n - 1) * qn)
                self.assertEqual(evaluate(load_fixture("bigon"), ctx), quantum(2) * quantum(n - 1) * qn)
                self.assertEqual(evaluate(load_fixture("ioio_closed"), ctx), qn * qn + qn)

    def test_hopf_and_trefoil(self) -> None:
        for n in range(2, 6):
            ctx = EvalContext(n)
            with self.subTest(n=n):
                self.assertEqual(evaluate(load_fixture("hopf_positive"), ctx), hopf_oracle(n))
                self.assertEqual(evaluate(load_fixture("hopf_negative"), ctx), hopf_oracle(n).bar())
                self.assertEqual(evaluate(load_fixture("trefoil_positive"), ctx), trefoil_oracle(n))
                self.assertEqual(evaluate(load_fixture("trefoil_negative"), ctx), trefoil_oracle(n).bar())

    def test_extra_circle_multiplies_by_unknot(self) -> None:
        config = RandomConfig()
        for seed in range(30):
            d = random_diagram(config, seed)
            for n in (2, 3):
                ctx = EvalContext(n)
                self.assertEqual(evaluate(with_circles(d, d.circles + 1), ctx), quantum(n) * evaluate(d, ctx))

    def test_mirror_gives_bar(self) -> None:
        config = RandomConfig()
        for n in (2, 3):
            ctx = EvalContext(n)
            for seed in range(100):
                d = random_diagram(config, seed)
                with self.subTest(n=n, seed=seed):
                    self.assertEqual(evaluate(mirror(d), ctx), evaluate(d, ctx).bar())

    def test_memo_is_transparent(self) -> None:
        config = RandomConfig()
        for seed in range(30):
            d = random_diagram(config, seed)
            self.assertEqual(evaluate(d, EvalContext(3)), evaluate(d, EvalContext(3, memo=None)))


class TestMigration(unittest.TestCase):
    def test_relations_loaded(self) -> None:
        self.assertEqual(sorted(load_relations()), sorted(f"R{i}" for i in range(5, 13)))

    def test_octahedron_needs_migration(self) -> None:
        d = load_fixture("octahedron")
        self.assertFalse(has_reduction(d))
        self.assertTrue(migration_sites(d, "R5->R7"))

    def test_path_reaches_a_bigon(self) -> None:
        d = load_fixture("octahedron")
        ctx = EvalContext(4)
        path = find_bigon_path(d, ctx)
        self.assertTrue(path)
        self.assertTrue(has_reduction(path[-1].target))
        self.assertEqual(path[0].source, d)
        for step in path:
            self.assertEqual(step.target.size, d.size)
            for term in step.corrections:
                self.assertLess(term.graph.size, d.size)

    def test_graph_with_bigon_has_empty_path(self) -> None:
        self.assertEqual(find_bigon_path(load_fixture("bigon"), EvalContext(2)), [])

    def test_migration_corrections(self) -> None:
        d = load_fixture("octahedron")
        site = migration_sites(d, "R5->R7")[0]
        migrated, corrections = apply_migration(d, site, "R5->R7", EvalContext(3))
        self.assertEqual(migrated.size, 6)
        self.assertEqual([term.coeff for term in corrections], [ONE, -ONE])
        self.assertEqual([term.graph.size for term in corrections], [4, 4])
        with self.assertRaises(ValueError):
            apply_migration(d, site, "R1->R2", EvalContext(3))

    def test_migration_identity_on_octahedron(self) -> None:
        d = load_fixture("octahedron")
        for n in (2, 3, 4):
            ctx = EvalContext(n)
            for which in ("R5->R7", "R7->R5", "R9->R11", "R11->R9"):
                for site in migration_sites(d, which):
                    try:
                        migrated, corrections = apply_migration(d, site, which, ctx)
                    except DiagramError:
                        continue
                    total = evaluate(migrated, ctx)
                    for term in corrections:
                        total = total + term.coeff * evaluate(term.graph, ctx)
                    with self.subTest(n=n, which=which, site=site):
                        self.assertEqual(total, evaluate(d, ctx))

    def test_cyclic_triangle_migration(self) -> None:
        d = load_fixture("octahedron")
        sites = migration_sites(d, "R9->R11")
        self.assertTrue(sites)
        for n in (3, 4, 5):
            ctx = EvalContext(n)
            migrated, corrections = apply_migration(d, sites[0], "R9->R11", ctx)
            self.assertEqual(migrated.size, d.size)
            self.assertEqual([term.coeff for term in corrections], [quantum(n - 3), -quantum(n - 3)])
            total = evaluate(migrated, ctx)
            for term in corrections:
                total = total + term.coeff * evaluate(term.graph, ctx)
            with self.subTest(n=n):
                self.assertEqual(total, evaluate(d, ctx))
        back = migration_sites(migrated, "R11->R9")
        self.assertTrue(back)
        restored = [canonical_key(apply_migration(migrated, site, "R11->R9", ctx)[0]) for site in back]
        self.assertIn(canonical_key(d), restored)

    def test_antiprism_needs_migration(self) -> None:
        d = load_fixture("antiprism")
        self.assertFalse(has_reduction(d))
        ctx = EvalContext(2)
        value = evaluate(d, ctx)
        self.assertGreater(ctx.migrations, 0)
        self.assertEqual(value.bar(), value)
        for seed in range(3):
            self.assertEqual(evaluate(d, EvalContext.randomized(2, seed)), value)

    def test_search_cap(self) -> None:
        d = load_fixture("octahedron")
        with self.assertRaises(RuntimeError):
            find_bigon_path(d, EvalContext(2, memo_cap=1))

    def test_random_orders_agree(self) -> None:
        d = load_fixture("octahedron")
        for n in (2, 3):
            expected = evaluate(d, EvalContext(n))
            for seed in range(5):
                self.assertEqual(evaluate(d, EvalContext.randomized(n, seed)), expected)


if __name__ == "__main__":
    unittest.main()
