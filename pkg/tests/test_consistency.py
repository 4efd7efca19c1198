import pytest
from hypothesis import given

from archsubst import check_consistency, is_consistent, load_model, parse_model
from archsubst.consistency import CONSTRAINT_IDS, DESCRIPTIONS

from catalogue_fixtures import CC_FIXTURES
from strategies import configurations


def has_parent_cycle(c):
    """Plain DFS with colours, independent of the SCC-based check."""
    children = {comp: sorted(c.children_of(comp)) for comp in c.components}
    colour = dict.fromkeys(c.components, 0)

    def visit(n):
        colour[n] = 1
        for m in children[n]:
            if colour[m] == 1 or (colour[m] == 0 and visit(m)):
                return True
        colour[n] = 2
        return False

    return any(colour[n] == 0 and visit(n) for n in sorted(c.components))


@pytest.mark.parametrize("model", ["http_pre.arch", "http_post.arch", "http_post_faulty.arch"])
def test_corpus_initial_configurations_are_consistent(corpus, model):
    report = check_consistency(load_model(corpus / model).initial)
    assert report.consistent, report.to_json()


@pytest.mark.parametrize("cid", CONSTRAINT_IDS)
def test_each_mutation_violates_exactly_its_constraint(cid):
    c = parse_model(CC_FIXTURES[cid], check=False).initial
    report = check_consistency(c)
    assert report.ids() == [cid]
    assert not is_consistent(c)


def test_witnesses_name_the_offending_elements():
    c = parse_model(CC_FIXTURES["CC7"], check=False).initial
    (v,) = check_consistency(c).violations
    assert [str(w) for w in v.witness] == ["A", "r"]
    c = parse_model(CC_FIXTURES["CC4"], check=False).initial
    (v,) = check_consistency(c).violations
    assert [str(w) for w in v.witness] == ["p", "r"]


def test_report_is_exhaustive_and_ordered():
    src = CC_FIXTURES["CC1"] + "component Z { provides z : I; requires q : I mandatory; state started; }\n"
    report = check_consistency(parse_model(src, check=False).initial)
    assert [v.id for v in report.violations] == ["CC1", "CC7"]
    assert report.to_json()["consistent"] is False


def test_namespace_is_applied_to_witnesses():
    c = parse_model(CC_FIXTURES["CC1"], check=False).initial
    (v,) = check_consistency(c, "post").violations
    assert str(v.witness[0]) == "post:B"


def test_every_constraint_is_described():
    assert set(DESCRIPTIONS) == set(CONSTRAINT_IDS)


def test_outer_interface_may_be_bound_and_delegation_target(corpus):
    # rh_cache is the target of a delegation and bound to ch_cache at the same time
    c = load_model(corpus / "http_post.arch").initial
    assert c.delegate["ra_cache"] == "rh_cache"
    assert c.binding["ch_cache"] == "rh_cache"
    assert check_consistency(c).consistent


@given(configurations())
def test_cc3_matches_dfs_cycle_detection(c):
    assert ("CC3" in check_consistency(c).ids()) == has_parent_cycle(c)


@given(configurations())
def test_short_circuit_agrees_with_full_report(c):
    assert is_consistent(c) == check_consistency(c).consistent


@given(configurations(consistent=True))
def test_restricted_generator_yields_consistent_configurations(c):
    assert check_consistency(c).consistent
