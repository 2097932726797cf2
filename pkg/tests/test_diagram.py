import random
import unittest


from kgpoly.services.checks import load_fixture
from kgpoly.services.diagram import (
    IOIO,
    NEGATIVE,
    POSITIVE,
    Diagram,
    DiagramError,
    Node,
    canonical_key,
    component_count,
    components,
    disjoint_union,
    faces,
    mirror,
    parse,
    serialize,
    switch_crossing,
)
from kgpoly.services.moves import RandomConfig, random_diagram

EXAMPLE = "V= 1 2 3 4\nX- 5 3 2 6\nVx 6 1 4 5\n"


def relabeled(d: Diagram, rng: random.Random) -> Diagram:
    """Same map under fresh edge labels, shuffled node order and a random IOIO anchor."""
    old = sorted({label for node in d.nodes for label in node.labels})
    mapping = dict(zip(old, rng.sample(range(1, 10 * len(old) + 10), len(old))))
    nodes = []
    for node in d.nodes:
        node = Node(node.kind, tuple(mapping[label] for label in node.labels))
        if node.kind == IOIO and rng.random() < 0.5:
            node = node.rotated(2)
        nodes.append(node)
    rng.shuffle(nodes)
    return Diagram(tuple(nodes), d.circles)


def sample_diagrams(count: int):
    config = RandomConfig()
    return [random_diagram(config, seed) for seed in range(count)]


class TestParse(unittest.TestCase):
    def test_parse_example(self) -> None:
        d = parse(EXAMPLE)
        self.assertEqual(d.size, 3)
        self.assertEqual(d.circles, 0)
        self.assertEqual(len(d.edges), 6)
        self.assertEqual(d.nodes[1].kind, NEGATIVE)

    def test_comments_blank_lines_and_circles(self) -> None:
        d = parse("# two circles\n\nO\nO  # second\n")
        self.assertEqual(d.size, 0)
        self.assertEqual(d.circles, 2)

    def test_unicode_minus_is_accepted(self) -> None:
        self.assertEqual(parse("X− 1 2 2 1").nodes[0].kind, NEGATIVE)

    def test_ioio_starts_at_smaller_in_label(self) -> None:
        d = parse("Vx 2 2 1 1")
        self.assertEqual(d.nodes[0].kind, IOIO)
        self.assertEqual(d.nodes[0].labels, (1, 1, 2, 2))

    def test_unknown_kind_reports_position(self) -> None:
        with self.assertRaises(DiagramError) as ctx:
            parse("V= 1 2 3 4\n  Y 4 3 2 1")
        self.assertIn("line 2, column 3", str(ctx.exception))

    def test_label_used_once(self) -> None:
        with self.assertRaises(DiagramError) as ctx:
            parse("V= 1 2 3 4\nV= 4 3 2 5")
        self.assertIn("Edge label 1", str(ctx.exception))

    def test_orientation_clash(self) -> None:
        with self.assertRaises(DiagramError) as ctx:
            parse("V= 1 1 2 2")
        self.assertIn("orientation", str(ctx.exception))

    def test_nonplanar_rotation_is_rejected(self) -> None:
        with self.assertRaises(DiagramError) as ctx:
            parse("X+ 1 2 1 2")
        self.assertIn("not planar", str(ctx.exception))

    def test_bad_label_token(self) -> None:
        with self.assertRaises(DiagramError):
            parse("V= 1 2 x 4")
        with self.assertRaises(DiagramError):
            parse("V= 1 2 3")

    def test_labels_are_positive_ascii_integers(self) -> None:
        with self.assertRaises(DiagramError) as ctx:
            parse("V= 0 1 1 0")
        self.assertIn("line 1, column 4", str(ctx.exception))
        for text in ("V= 1 2 \u00b2 4", "V= 1 2 \u0663 4"):
            with self.subTest(text=text), self.assertRaises(DiagramError) as ctx:
                parse(text)
            self.assertIn("line 1, column 8", str(ctx.exception))


class TestStructure(unittest.TestCase):
    def test_euler_characteristic(self) -> None:
        for name in ("example", "hopf_positive", "trefoil_positive", "octahedron", "antiprism", "bigon"):
            d = load_fixture(name)
            with self.subTest(name=name):
                self.assertEqual(d.size - len(d.edges) + len(faces(d)), 2)

    def test_octahedron_faces_are_triangles(self) -> None:
        d = load_fixture("octahedron")
        self.assertEqual(sorted(len(face) for face in faces(d)), [3] * 8)

    def test_disjoint_union(self) -> None:
        a = load_fixture("hopf_positive")
        b = load_fixture("example")
        union = disjoint_union(disjoint_union(a, b), load_fixture("unknot"))
        self.assertEqual(component_count(union), 2)
        self.assertEqual(union.circles, 1)
        parts = components(union)
        self.assertEqual(sorted(canonical_key(p) for p in parts), sorted([canonical_key(a), canonical_key(b)]))

    def test_disjoint_union_is_symmetric(self) -> None:
        diagrams = sample_diagrams(12) + [load_fixture("example"), load_fixture("unknot")]
        for a, b in zip(diagrams, diagrams[1:]):
            self.assertEqual(canonical_key(disjoint_union(a, b)), canonical_key(disjoint_union(b, a)))


class TestCanonicalKey(unittest.TestCase):
    def test_relabeling_and_node_order_do_not_matter(self) -> None:
        shuffled = parse("Vx 60 10 40 50\nV= 10 20 30 40\nX- 50 30 20 60\n")
        self.assertEqual(canonical_key(shuffled), canonical_key(parse(EXAMPLE)))

    def test_ioio_anchor_does_not_matter(self) -> None:
        a = parse("V= 1 2 3 4\nX- 5 3 2 6\nVx 4 5 6 1\n")
        self.assertEqual(canonical_key(a), canonical_key(parse(EXAMPLE)))

    def test_distinguishes_mirror_images(self) -> None:
        self.assertNotEqual(
            canonical_key(load_fixture("hopf_positive")),
            canonical_key(load_fixture("hopf_negative")),
        )
        self.assertNotEqual(canonical_key(load_fixture("unknot")), canonical_key(parse("O\nO")))

    def test_serialize_round_trip(self) -> None:
        for name in ("example", "trefoil_negative", "octahedron", "ioio_closed", "unknot"):
            d = load_fixture(name)
            with self.subTest(name=name):
                text = serialize(d)
                self.assertTrue(text.endswith("\n"))
                self.assertEqual(canonical_key(parse(text)), canonical_key(d))

    def test_random_relabeling_keeps_the_key(self) -> None:
        rng = random.Random(5)
        for i, d in enumerate(sample_diagrams(80)):
            with self.subTest(diagram=i):
                self.assertEqual(canonical_key(relabeled(d, rng)), canonical_key(d))

    def test_generated_diagrams_survive_serialize(self) -> None:
        for i, d in enumerate(sample_diagrams(80)):
            text = serialize(d)
            with self.subTest(diagram=i):
                self.assertEqual(canonical_key(parse(text)), canonical_key(d))
                self.assertEqual(serialize(parse(text)), text)
                self.assertEqual(canonical_key(mirror(mirror(d))), canonical_key(d))


class TestMirror(unittest.TestCase):
    def test_mirror_of_unknot(self) -> None:
        self.assertEqual(serialize(mirror(load_fixture("unknot"))), "O\n")

    def test_mirror_is_an_involution(self) -> None:
        d = parse(EXAMPLE)
        self.assertEqual(mirror(mirror(d)), d)

    def test_mirror_matches_fixtures(self) -> None:
        for name in ("hopf", "trefoil"):
            positive = load_fixture(f"{name}_positive")
            negative = load_fixture(f"{name}_negative")
            self.assertEqual(canonical_key(mirror(positive)), canonical_key(negative))

    def test_switch_crossing(self) -> None:
        d = load_fixture("kink_positive")
        switched = switch_crossing(d, 0)
        self.assertEqual(switched.nodes[0].kind, NEGATIVE)
        self.assertEqual(switch_crossing(switched, 0).nodes[0].kind, POSITIVE)
        with self.assertRaises(DiagramError):
            switch_crossing(load_fixture("curl_vertex"), 0)


if __name__ == "__main__":
    unittest.main()
