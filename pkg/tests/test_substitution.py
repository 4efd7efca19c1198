import pytest
from hypothesis import given
from hypothesis import strategies as st

from archsubst import SubstMap, check_subst, load_model, parse_model, parse_substitution, validate_subst_map
from archsubst.errors import PreconditionFailed, SubstMapError
from archsubst.substitution import CONSTRAINT_IDS, DESCRIPTIONS, subst_holds

from catalogue_fixtures import S_FIXTURES, S_POST, s_pair
from strategies import configurations


@pytest.fixture(scope="module")
def http():
    from conftest import CORPUS

    pre = load_model(CORPUS / "http_pre.arch")
    post = load_model(CORPUS / "http_post.arch")
    faulty = load_model(CORPUS / "http_post_faulty.arch")
    subst = parse_substitution((CORPUS / "http.subst").read_text(), pre, post)
    return pre, post, faulty, subst


def test_http_substitution_holds(http):
    pre, post, _, subst = http
    report = check_subst(post.initial, pre.initial, subst)
    assert report.holds and report.violations == ()
    assert dict(subst.mapping) == {"CacheHandler": "CacheHandler_R", "RequestHandler": "RequestHandler_R"}


def test_missing_substitute_reports_s5(http):
    pre, _, faulty, subst = http
    c_A = pre.apply(pre.apply(pre.initial, "RemoveCacheHandler"), "AddCacheHandler")
    c_R = faulty.apply(faulty.apply(faulty.initial, "RemoveCacheHandler"), "AddCacheHandler")
    report = check_subst(c_R, c_A, subst)
    s5 = [v for v in report.violations if v.id == "S5"]
    assert len(s5) == 1 and str(s5[0].witness[0]) == "pre:CacheHandler"
    # the vanished component takes its parameters, interfaces and binding with it
    assert report.ids() == ["S1", "S3", "S4", "S5"]


def test_base_pair_holds():
    assert check_subst(*s_pair(S_POST)).holds


@pytest.mark.parametrize("cid", CONSTRAINT_IDS)
def test_each_mutation_violates_exactly_its_constraint(cid):
    report = check_subst(*s_pair(S_FIXTURES[cid]))
    assert report.ids() == [cid], report.to_json()
    assert not subst_holds(*s_pair(S_FIXTURES[cid]))


def test_every_constraint_is_described():
    assert set(DESCRIPTIONS) == set(CONSTRAINT_IDS) and len(CONSTRAINT_IDS) == 12


def test_new_component_nested_in_substitute_is_allowed(http):
    # Logger is new, not a substitute, and sits inside RequestHandler_R
    _, post, _, _ = http
    assert post.initial.parents_of("Logger") == {"RequestHandler_R"}


def test_new_component_nested_only_in_new_component_is_rejected():
    post = S_POST + """
        component N1 { provides n1 : IN; child N2; state stopped; }
        component N2 { provides n2 : IN; state stopped; }
    """
    report = check_subst(*s_pair(post))
    assert report.ids() == ["S9"]
    assert sorted(str(v.witness[0]) for v in report.violations) == ["post:N1", "post:N2"]


def test_precondition_inconsistent_side():
    pre = parse_model("component A { provides a : I; }")
    bad = parse_model("component A { provides a : I; } component B { state stopped; }", check=False)
    with pytest.raises(PreconditionFailed) as err:
        check_subst(bad.initial, pre.initial, SubstMap())
    assert err.value.side == "post"


def test_map_validation():
    with pytest.raises(SubstMapError) as err:
        SubstMap({"A": "X", "B": "X"})
    assert err.value.invariant == "injectivity"
    with pytest.raises(SubstMapError):
        validate_subst_map(SubstMap({"Z": "X"}), {"A"}, {"X"})
    with pytest.raises(SubstMapError):
        validate_subst_map(SubstMap({"A": "Y"}), {"A"}, {"X"})
    with pytest.raises(SubstMapError):
        validate_subst_map(SubstMap({"A": "B"}), {"A", "B"}, {"B"})
    validate_subst_map(SubstMap({"A": "X"}), {"A"}, {"X"})


def test_range_overlapping_pre_components_is_rejected_by_check():
    pre = parse_model("component A { provides a : I; } component B { provides b : I; }")
    with pytest.raises(SubstMapError):
        check_subst(pre.initial, pre.initial, SubstMap({"A": "B"}))


@given(configurations(consistent=True))
def test_identity_substitution_holds(c):
    assert check_subst(c, c, SubstMap()).holds


@given(configurations(consistent=True), configurations(consistent=True))
def test_short_circuit_agrees_with_full_report(a, b):
    assert subst_holds(a, b, SubstMap()) == check_subst(a, b, SubstMap()).holds


@given(st.dictionaries(st.sampled_from("ABCDE"), st.sampled_from("VWXYZ"), max_size=5))
def test_maps_are_injective_or_rejected(pairs):
    if len(set(pairs.values())) == len(pairs):
        m = SubstMap(pairs)
        assert m.range == frozenset(pairs.values()) and len(m) == len(pairs)
    else:
        with pytest.raises(SubstMapError):
            SubstMap(pairs)
