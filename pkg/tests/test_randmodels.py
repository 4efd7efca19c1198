from archsubst import reachable_graph
from archsubst.randmodels import FAULTS, random_paired_system


def test_generation_is_deterministic():
    a, b = random_paired_system(17), random_paired_system(17)
    assert (a.pre_text, a.post_text, a.subst_text) == (b.pre_text, b.post_text, b.subst_text)


def test_generated_systems_are_small_and_consistent():
    seen = set()
    for seed in range(30):
        g = random_paired_system(seed)
        ps = g.build()
        assert len(reachable_graph(ps.pre, 200).nodes) <= 200
        assert len(reachable_graph(ps.post, 200).nodes) <= 200
        seen.update(g.faults)
    assert seen <= set(FAULTS) and len(seen) >= 4
