import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from archsubst import fixpoint

needs_cython = pytest.mark.skipif("cython" not in fixpoint.BACKENDS, reason="compiled kernel not built")


@st.composite
def instances(draw):
    n_r = draw(st.integers(1, 7))
    n_a = draw(st.integers(1, 6))
    n_lbl = draw(st.integers(1, 4))
    is_new = [draw(st.booleans()) for _ in range(n_lbl)]
    r_edges = draw(st.lists(st.tuples(st.integers(0, n_r - 1), st.integers(0, n_lbl - 1),
                                      st.integers(0, n_r - 1)), max_size=20, unique=True))
    a_edges = []
    for a in range(n_a):
        for lbl in range(n_lbl):
            if draw(st.booleans()):
                a_edges.append((a, lbl, draw(st.integers(0, n_a - 1))))
    seed = draw(st.lists(st.sampled_from([fixpoint.KEPT] * 4 + [fixpoint.STRUCTURAL, fixpoint.UNEXPLORED]),
                         min_size=n_r * n_a, max_size=n_r * n_a))
    return n_r, n_a, r_edges, a_edges, is_new, np.array(seed, dtype=np.int8)


def naive(n_r, n_a, r_edges, a_edges, is_new, seed):
    """Round-based greatest fixpoint over explicit pair sets."""
    a_next = {(a, lbl): a2 for a, lbl, a2 in a_edges}
    rel = {(r, a) for r in range(n_r) for a in range(n_a) if seed[r * n_a + a] == fixpoint.KEPT}
    changed = True
    while changed:
        changed = False
        for r, a in sorted(rel):
            ok = True
            for s, lbl, r2 in r_edges:
                if s != r:
                    continue
                if is_new[lbl]:
                    ok = (r2, a) in rel
                else:
                    ok = (a, lbl) in a_next and (r2, a_next[a, lbl]) in rel
                if not ok:
                    break
            if not ok:
                rel.discard((r, a))
                changed = True
    return rel


@settings(max_examples=300)
@given(instances())
def test_python_kernel_matches_naive_fixpoint(inst):
    n_r, n_a = inst[0], inst[1]
    rel, reason, cause, removals = fixpoint.refine(*inst, backend="python")
    got = {(i // n_a, i % n_a) for i in np.flatnonzero(rel)}
    assert got == naive(*inst)
    assert removals == int(np.sum((inst[5] == fixpoint.KEPT) & (rel == 0)))


@needs_cython
@settings(max_examples=300)
@given(instances())
def test_backends_agree_exactly(inst):
    out_py = fixpoint.refine(*inst, backend="python")
    out_cy = fixpoint.refine(*inst, backend="cython")
    for x, y in zip(out_py[:3], out_cy[:3]):
        assert np.array_equal(x, y)
    assert out_py[3] == out_cy[3]


@given(instances())
def test_removed_pairs_carry_a_cause(inst):
    rel, reason, cause, _ = fixpoint.refine(*inst, backend="python")
    seeded = inst[5] == fixpoint.KEPT
    removed = seeded & (rel == 0)
    assert np.all(np.isin(reason[removed], [fixpoint.STRICT, fixpoint.STUTTERING]))
    assert np.all(cause[removed] >= 0)
    assert np.all(reason[~seeded] == inst[5][~seeded])


def test_nondeterministic_pre_graph_is_rejected():
    with pytest.raises(ValueError):
        fixpoint.refine(1, 2, [], [(0, 0, 1), (0, 0, 0)], [False], np.zeros(2, dtype=np.int8))


def test_backend_selection_respects_environment(monkeypatch):
    import importlib

    monkeypatch.setenv("ARCHSUBST_PURE_PYTHON", "1")
    mod = importlib.reload(fixpoint)
    try:
        assert mod.BACKEND == "python"
    finally:
        monkeypatch.delenv("ARCHSUBST_PURE_PYTHON")
        importlib.reload(fixpoint)
