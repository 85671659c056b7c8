import random

from vplab.gen import random_formula, random_structure, relation_classes, relation_structures
from vplab.syntax import Language, check_well_formed, qrank


def test_relation_class_counts():
    # binary relations up to isomorphism on 1, 2, 3 points
    assert [len(relation_classes(n)) for n in (1, 2, 3)] == [2, 10, 104]
    assert len(relation_structures(3)) == 116
    assert len(relation_structures(2, up_to_iso=False)) == 2 + 16


def test_random_generators_respect_bounds():
    rng = random.Random(5)
    for _ in range(50):
        S = random_structure(rng, 4, constants=[])
        L = S.language
        phi = random_formula(rng, L, qrank=2)
        check_well_formed(phi, L)
        assert qrank(phi) <= 2
        assert 1 <= len(S.elements) <= 4
    assert Language.of().constants() == ()
