"""Greatest-fixpoint refinement over integer-encoded transition graphs.

The hot loop lives in a Cython extension (``_fixpoint``) with a pure-Python
twin (``_fixpoint_py``).  The compiled kernel is used when it was built and
``ARCHSUBST_PURE_PYTHON`` is not set.

Layout: pairs ``(r, a)`` are flattened to ``r * n_a + a``.  ``seed`` holds one
reason code per pair; pairs seeded with :data:`KEPT` start in the relation.
"""

from __future__ import annotations

import os

import numpy as np

from . import _fixpoint_py

KEPT = 0
STRUCTURAL = 1
STRICT = 2
STUTTERING = 3
DIVERGENCE = 4
DEADLOCK = 5
UNEXPLORED = 6

REASON_NAMES = {
    STRUCTURAL: "structural",
    STRICT: "strict",
    STUTTERING: "stuttering",
    DIVERGENCE: "divergence",
    DEADLOCK: "deadlock",
    UNEXPLORED: "unexplored",
}

try:
    from . import _fixpoint as _fixpoint_ext
except ImportError:  # extension not built
    _fixpoint_ext = None

BACKENDS = {"python": _fixpoint_py.propagate}
if _fixpoint_ext is not None:
    BACKENDS["cython"] = _fixpoint_ext.propagate

if _fixpoint_ext is not None and not os.environ.get("ARCHSUBST_PURE_PYTHON"):
    BACKEND = "cython"
else:
    BACKEND = "python"


def _csr(n_slots: int, keys: np.ndarray, *columns: np.ndarray):
    order = np.argsort(keys, kind="stable")
    ptr = np.zeros(n_slots + 1, dtype=np.int32)
    np.add.at(ptr, keys + 1, 1)
    np.cumsum(ptr, out=ptr)
    return (ptr,) + tuple(np.ascontiguousarray(col[order], dtype=np.int32) for col in columns)


def refine(n_r: int, n_a: int, r_edges, a_edges, is_new, seed: np.ndarray, backend: str | None = None):
    """Shrink the seeded relation until strict and stuttering obligations hold.

    ``r_edges``/``a_edges`` are ``(src, label, dst)`` triples; the pre-level
    graph must be deterministic per label.  Returns ``(rel, reason, cause,
    removals)`` where ``cause`` is the label that forced each removal.
    """
    backend = backend or BACKEND
    kernel = BACKENDS[backend]
    n_lbl = max(len(is_new), 1)

    r_arr = np.asarray(r_edges, dtype=np.int32).reshape(-1, 3)
    a_arr = np.asarray(a_edges, dtype=np.int32).reshape(-1, 3)
    r_ptr, r_lbl, r_dst = _csr(n_r, r_arr[:, 0], r_arr[:, 1], r_arr[:, 2])
    rp_ptr, rp_src, rp_lbl = _csr(n_r, r_arr[:, 2], r_arr[:, 0], r_arr[:, 1])

    a_next = np.full(n_a * n_lbl, -1, dtype=np.int32)
    slots = a_arr[:, 0] * n_lbl + a_arr[:, 1]
    if len(np.unique(slots)) != len(slots):
        raise ValueError("pre-level graph is not deterministic per label")
    a_next[slots] = a_arr[:, 2]
    ap_ptr, ap_src = _csr(n_a * n_lbl, a_arr[:, 2] * n_lbl + a_arr[:, 1], a_arr[:, 0])

    seed = np.asarray(seed, dtype=np.int8)
    rel = np.ascontiguousarray(seed == KEPT, dtype=np.uint8)
    reason = np.ascontiguousarray(seed.copy())
    cause = np.full(n_r * n_a, -1, dtype=np.int32)
    new_flags = np.ascontiguousarray(np.asarray(is_new, dtype=np.uint8).reshape(-1))
    if new_flags.size == 0:
        new_flags = np.zeros(1, dtype=np.uint8)

    removals = kernel(n_r, n_a, rel, reason, cause, r_ptr, r_lbl, r_dst, rp_ptr, rp_src, rp_lbl,
                      a_next, ap_ptr, ap_src, n_lbl, new_flags)
    return rel, reason, cause, int(removals)
