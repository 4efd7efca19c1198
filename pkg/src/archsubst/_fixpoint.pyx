# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled worklist refinement of the simulation relation (see _fixpoint_py.py)."""

from libc.stdlib cimport free, malloc

cdef signed char STRICT = 2
cdef signed char STUTTERING = 3


def propagate(Py_ssize_t n_r, Py_ssize_t n_a,
              unsigned char[::1] rel, signed char[::1] reason, int[::1] cause,
              int[::1] r_ptr, int[::1] r_lbl, int[::1] r_dst,
              int[::1] rp_ptr, int[::1] rp_src, int[::1] rp_lbl,
              int[::1] a_next, int[::1] ap_ptr, int[::1] ap_src,
              Py_ssize_t n_lbl, unsigned char[::1] is_new):
    cdef Py_ssize_t total = n_r * n_a
    cdef Py_ssize_t *queue = <Py_ssize_t *> malloc((total + 1) * sizeof(Py_ssize_t))
    if queue == NULL:
        raise MemoryError()
    cdef Py_ssize_t head = 0, tail = 0, removals = 0
    cdef Py_ssize_t r, a, r2, a2, idx, cand, base, slot
    cdef int e, k, lbl, nxt
    try:
        for r in range(n_r):
            base = r * n_a
            for a in range(n_a):
                idx = base + a
                if not rel[idx]:
                    continue
                for e in range(r_ptr[r], r_ptr[r + 1]):
                    lbl = r_lbl[e]
                    r2 = r_dst[e]
                    if is_new[lbl]:
                        if not rel[r2 * n_a + a]:
                            rel[idx] = 0
                            reason[idx] = STUTTERING
                            cause[idx] = lbl
                            break
                    else:
                        nxt = a_next[a * n_lbl + lbl]
                        if nxt < 0 or not rel[r2 * n_a + nxt]:
                            rel[idx] = 0
                            reason[idx] = STRICT
                            cause[idx] = lbl
                            break
                if not rel[idx]:
                    queue[tail] = idx
                    tail += 1
                    removals += 1

        while head < tail:
            idx = queue[head]
            head += 1
            r2 = idx // n_a
            a2 = idx % n_a
            for e in range(rp_ptr[r2], rp_ptr[r2 + 1]):
                r = rp_src[e]
                lbl = rp_lbl[e]
                if is_new[lbl]:
                    cand = r * n_a + a2
                    if rel[cand]:
                        rel[cand] = 0
                        reason[cand] = STUTTERING
                        cause[cand] = lbl
                        queue[tail] = cand
                        tail += 1
                        removals += 1
                else:
                    slot = a2 * n_lbl + lbl
                    for k in range(ap_ptr[slot], ap_ptr[slot + 1]):
                        cand = r * n_a + ap_src[k]
                        if rel[cand]:
                            rel[cand] = 0
                            reason[cand] = STRICT
                            cause[cand] = lbl
                            queue[tail] = cand
                            tail += 1
                            removals += 1
    finally:
        free(queue)
    return removals
