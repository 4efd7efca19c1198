import logging

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from archsubst import (
    B4,
    PairedSystem,
    Random,
    Scripted,
    load_model,
    oracle_check,
    parse_model,
    parse_scenario,
    parse_substitution,
    reachable_graph,
    run_semi_algorithm,
)
from archsubst.errors import ScriptMismatch, SharedOpMismatch
from archsubst.randmodels import random_paired_system
from archsubst.simulation import cross_validate, divergent_nodes, structural_sweep

from catalogue_fixtures import ORACLE_FIXTURES
from conftest import CORPUS


def http_system(post="http_post.arch"):
    pre = load_model(CORPUS / "http_pre.arch")
    post = load_model(CORPUS / post)
    return PairedSystem(pre, post, parse_substitution((CORPUS / "http.subst").read_text(), pre, post))


def fixture_system(name):
    pre_text, post_text, map_text = ORACLE_FIXTURES[name]
    pre, post = parse_model(pre_text), parse_model(post_text)
    return PairedSystem(pre, post, parse_substitution(map_text, pre, post))


def brute_force_simulated(ps, bound=1000):
    """Direct reading of the simulation definition on explicit graphs.

    Divergence is the greatest set of states with a new-op successor inside
    the set; the relation is refined round by round from all admissible pairs.
    """
    g_r, g_a = reachable_graph(ps.post, bound), reachable_graph(ps.pre, bound)
    new_edges = [(s, t) for s, op, t in g_r.edges if ps.is_new(op)]
    div = set(range(len(g_r.nodes)))
    while True:
        nxt = {s for s, t in new_edges if t in div}
        if nxt == div:
            break
        div = nxt
    rel = set()
    for r, c_R in enumerate(g_r.nodes):
        for a, c_A in enumerate(g_a.nodes):
            if not ps.subst_report(c_R, c_A).holds:
                continue
            if g_r.is_terminal(r) and not g_a.is_terminal(a):
                continue
            if r in div:
                continue
            rel.add((r, a))
    a_succ = [dict(g_a.successors(a)) for a in range(len(g_a.nodes))]
    while True:
        keep = set()
        for r, a in rel:
            ok = True
            for op, r2 in g_r.successors(r):
                if ps.is_new(op):
                    ok = (r2, a) in rel
                else:
                    ok = op in a_succ[a] and (r2, a_succ[a][op]) in rel
                if not ok:
                    break
            if ok:
                keep.add((r, a))
        if keep == rel:
            break
        rel = keep
    return (0, 0) in rel


# --- HTTP scenarios -------------------------------------------------------


def test_fig6_stream():
    ps = http_system()
    script = parse_scenario((CORPUS / "fig6.scn").read_text())
    trace = run_semi_algorithm(ps, Scripted(script.ops), len(script.ops))
    trace.check()
    expected = [B4.BOT_P if op in ("AddLogger", "RemoveLogger") else B4.TOP_P for op in script.ops]
    assert trace.verdicts() == expected
    assert trace.final.kind == "budget_exhausted" and trace.final.last is B4.TOP_P


def test_faulty_scenario_ends_in_structural_bot():
    ps = http_system("http_post_faulty.arch")
    assert ps.mismatches == ["AddCacheHandler"]
    trace = run_semi_algorithm(ps, Scripted(["RemoveCacheHandler", "AddCacheHandler"]), 10)
    assert [s.verdict for s in trace.steps] == [B4.TOP_P, B4.TOP_P, B4.BOT]
    assert trace.final.kind == "bot" and trace.final.reason == "structural" and trace.final.step == 2
    assert any(v.id == "S5" and str(v.witness[0]) == "pre:CacheHandler" for v in trace.final.witness)


@pytest.mark.parametrize("seed", range(10))
def test_faulty_model_fails_for_random_seeds(seed):
    ps = http_system("http_post_faulty.arch")
    trace = run_semi_algorithm(ps, Random(seed), 500)
    assert trace.final.kind == "bot"


def test_faulty_model_oracle_and_sweep():
    ps = http_system("http_post_faulty.arch")
    result = oracle_check(ps, 1000)
    assert not result.simulated
    assert result.chain[-1]["clause"] == "structural"
    assert [e.get("op") for e in result.chain[:-1]] == ["RemoveCacheHandler", "AddCacheHandler"]
    sweep = structural_sweep(ps, 1000)
    assert sweep.path == ["RemoveCacheHandler", "AddCacheHandler"] and "S5" in sweep.report.ids()


def test_correct_http_pair_is_simulated():
    ps = http_system()
    result = oracle_check(ps, 1000)
    assert result.simulated and (result.states_pre, result.states_post) == (20, 40)
    assert brute_force_simulated(ps)


def test_strict_shared_rejects_faulty_model():
    pre = load_model(CORPUS / "http_pre.arch")
    post = load_model(CORPUS / "http_post_faulty.arch")
    subst = parse_substitution((CORPUS / "http.subst").read_text(), pre, post)
    with pytest.raises(SharedOpMismatch):
        PairedSystem(pre, post, subst, strict=True)


def test_mismatch_is_logged(caplog):
    with caplog.at_level(logging.WARNING, logger="archsubst"):
        logging.getLogger("archsubst").setLevel(logging.WARNING)
        http_system("http_post_faulty.arch")
    assert "AddCacheHandler" in caplog.text


def test_script_mismatch_propagates():
    with pytest.raises(ScriptMismatch):
        run_semi_algorithm(http_system(), Scripted(["AddCacheHandler"]), 5)


# --- oracle clauses ---------------------------------------------------------


@pytest.mark.parametrize("clause", ["structural", "strict", "stuttering", "divergence", "deadlock"])
def test_minimal_fixture_triggers_clause(clause):
    ps = fixture_system(clause)
    result = oracle_check(ps, 100)
    assert not result.simulated and result.clause == clause
    assert not brute_force_simulated(ps)


def test_identity_is_simulated():
    ps = fixture_system("identity")
    assert oracle_check(ps, 100).simulated and brute_force_simulated(ps)


def test_divergence_fixture_is_a_one_node_lasso():
    ps = fixture_system("divergence")
    g = reachable_graph(ps.post, 10)
    assert len(g.nodes) == 1 and g.edges == [(0, "Spin", 0)]
    assert divergent_nodes(g, ps.new_ops) == {0}
    assert oracle_check(ps, 10).witness == ["Spin"]


def test_semi_algorithm_outcomes_on_fixtures():
    finals = {name: run_semi_algorithm(fixture_system(name), Random(0), 20).final
              for name in ORACLE_FIXTURES}
    assert finals["identity"].kind == "budget_exhausted"
    assert (finals["structural"].kind, finals["structural"].reason) == ("bot", "structural")
    assert (finals["strict"].kind, finals["strict"].reason) == ("bot", "strict-simulation-broken")
    assert (finals["deadlock"].kind, finals["deadlock"].reason) == ("bot", "deadlock-introduced")
    # stuttering and divergence are invisible to a single run
    assert finals["divergence"].kind == "budget_exhausted"
    assert (finals["stuttering"].kind, finals["stuttering"].reason) == ("bot", "structural")


def test_top_p_when_both_levels_stop():
    pre = parse_model("component A { provides a : I; state started; }")
    ps = PairedSystem(pre, pre, parse_substitution("", pre, pre))
    trace = run_semi_algorithm(ps, Random(0), 5)
    assert trace.final.kind == "top_p" and trace.steps == []


def test_budget_zero_still_checks_initial_pair():
    trace = run_semi_algorithm(fixture_system("structural"), Random(0), 0)
    assert trace.final.kind == "bot"
    trace = run_semi_algorithm(fixture_system("identity"), Random(0), 0)
    assert trace.final.kind == "budget_exhausted" and trace.steps == []


# --- random systems ----------------------------------------------------------


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10_000))
def test_oracle_matches_brute_force(seed):
    ps = random_paired_system(seed).build()
    result = oracle_check(ps, 200)
    assert result.simulated == brute_force_simulated(ps, 200)
    assert oracle_check(ps, 200, scope="full").simulated == result.simulated


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10_000), st.integers(0, 1000))
def test_trace_grammar_and_soundness(system_seed, run_seed):
    ps = random_paired_system(system_seed).build()
    trace = run_semi_algorithm(ps, Random(run_seed), 40)
    trace.check()
    if trace.final.kind == "bot":
        assert not oracle_check(ps, 200).simulated


def test_cross_validate_report():
    ps = random_paired_system(3).build()
    report = cross_validate(ps, range(5), 30, 200)
    assert report.ok and len(report.runs) == 5
    assert set(report.to_json()) == {"simulated", "clause", "runs", "contradictions"}


def test_jsonl_is_stable():
    ps = http_system()
    a = run_semi_algorithm(ps, Random(11), 30).to_jsonl()
    b = run_semi_algorithm(http_system(), Random(11), 30).to_jsonl()
    assert a == b and a.count("\n") == 31
