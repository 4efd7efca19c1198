"""Pure-Python worklist refinement of the simulation relation.

Mirror of ``_fixpoint.pyx``; both take the same flattened integer arrays
(see :mod:`archsubst.fixpoint` for their layout) and must stay in lockstep.
"""

KEPT = 0
STRICT = 2
STUTTERING = 3


def propagate(n_r, n_a, rel, reason, cause,
              r_ptr, r_lbl, r_dst, rp_ptr, rp_src, rp_lbl,
              a_next, ap_ptr, ap_src, n_lbl, is_new):
    rel_l = rel.tolist()
    reason_l = reason.tolist()
    cause_l = cause.tolist()
    r_ptr, r_lbl, r_dst = r_ptr.tolist(), r_lbl.tolist(), r_dst.tolist()
    rp_ptr, rp_src, rp_lbl = rp_ptr.tolist(), rp_src.tolist(), rp_lbl.tolist()
    a_next, ap_ptr, ap_src = a_next.tolist(), ap_ptr.tolist(), ap_src.tolist()
    is_new = is_new.tolist()

    queue = []
    removals = 0
    for r in range(n_r):
        base = r * n_a
        for a in range(n_a):
            idx = base + a
            if not rel_l[idx]:
                continue
            for e in range(r_ptr[r], r_ptr[r + 1]):
                lbl = r_lbl[e]
                r2 = r_dst[e]
                if is_new[lbl]:
                    if not rel_l[r2 * n_a + a]:
                        rel_l[idx] = 0
                        reason_l[idx] = STUTTERING
                        cause_l[idx] = lbl
                        break
                else:
                    a2 = a_next[a * n_lbl + lbl]
                    if a2 < 0 or not rel_l[r2 * n_a + a2]:
                        rel_l[idx] = 0
                        reason_l[idx] = STRICT
                        cause_l[idx] = lbl
                        break
            if not rel_l[idx]:
                queue.append(idx)
                removals += 1

    head = 0
    while head < len(queue):
        idx = queue[head]
        head += 1
        r2, a2 = divmod(idx, n_a)
        for e in range(rp_ptr[r2], rp_ptr[r2 + 1]):
            r = rp_src[e]
            lbl = rp_lbl[e]
            if is_new[lbl]:
                cand = r * n_a + a2
                if rel_l[cand]:
                    rel_l[cand] = 0
                    reason_l[cand] = STUTTERING
                    cause_l[cand] = lbl
                    queue.append(cand)
                    removals += 1
            else:
                slot = a2 * n_lbl + lbl
                for k in range(ap_ptr[slot], ap_ptr[slot + 1]):
                    cand = r * n_a + ap_src[k]
                    if rel_l[cand]:
                        rel_l[cand] = 0
                        reason_l[cand] = STRICT
                        cause_l[cand] = lbl
                        queue.append(cand)
                        removals += 1

    rel[:] = rel_l
    reason[:] = reason_l
    cause[:] = cause_l
    return removals
