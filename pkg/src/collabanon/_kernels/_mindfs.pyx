# cython: language_level=3, boundscheck=False
"""Compiled minimum DFS code search; same contract as ``_mindfs_py``."""

from ._mindfs_py import StateBudgetExceeded, twin_classes


cdef object _canonical_visited(object visited, tuple rm_vertices, list classes):
    cdef list members, free
    cdef Py_ssize_t cnt, t
    cdef object one = 1
    for members in classes:
        free = [x for x in members if x not in rm_vertices]
        cnt = 0
        for x in free:
            if (visited >> x) & 1:
                cnt += 1
                visited = visited ^ (one << x)
        for t in range(cnt):
            visited = visited | (one << free[t])
    return visited


def min_dfs_code(labels, adj, Py_ssize_t max_states=200000):
    cdef Py_ssize_t n = len(labels)
    cdef Py_ssize_t u, w, e, i, j, k, r, r_idx, new_idx, m, pos, a, start, stop
    cdef long lu, lr, l0, l1
    cdef object one = 1
    cdef bint found, have_best

    if n == 0:
        return [], []

    # CSR adjacency with edge ids
    cdef list lab = [int(x) for x in labels]
    cdef list offs = [0] * (n + 1)
    cdef list tgt = []
    cdef list eids = []
    cdef dict eid = {}
    for u in range(n):
        for w in adj[u]:
            if u < w:
                key = (u, w)
            else:
                key = (w, u)
            e = eid.get(key, -1)
            if e < 0:
                e = len(eid)
                eid[key] = e
            tgt.append(w)
            eids.append(e)
        offs[u + 1] = len(tgt)
    m = len(eid)
    if m == 0:
        return [], [0]
    cdef list classes = twin_classes(lab, adj)

    have_best = False
    l0 = 0
    l1 = 0
    for u in range(n):
        lu = lab[u]
        start = offs[u]
        stop = offs[u + 1]
        for k in range(start, stop):
            w = tgt[k]
            if not have_best or lu < l0 or (lu == l0 and <long>lab[w] < l1):
                have_best = True
                l0 = lu
                l1 = lab[w]

    cdef list states = []
    cdef set seen = set()
    cdef tuple rmv
    cdef object used, visited, st, jj
    for u in range(n):
        if lab[u] != l0:
            continue
        for k in range(offs[u], offs[u + 1]):
            w = tgt[k]
            if lab[w] == l1:
                visited = (one << u) | (one << w)
                sig = (_canonical_visited(visited, (u, w), classes), u, w)
                if sig in seen:
                    continue
                seen.add(sig)
                states.append(((u, w), (0, 1), one << eids[k], visited))
    cdef list code = [(0, 1, l0, l1)]

    cdef tuple best_key, vmap, rm
    cdef list chosen, nxt
    cdef dict onpath

    for _ in range(1, m):
        best_key = None
        chosen = []
        for st in states:
            vmap, rm, used, visited = st
            r_idx = rm[len(rm) - 1]
            r = vmap[r_idx]
            lr = lab[r]
            onpath = {}
            for a in range(len(rm) - 1):
                onpath[vmap[rm[a]]] = rm[a]
            for k in range(offs[r], offs[r + 1]):
                e = eids[k]
                if (used >> e) & 1:
                    continue
                w = tgt[k]
                jj = onpath.get(w)
                if jj is None:
                    continue
                key = (r_idx, 1, jj, lr, lab[w])
                if best_key is None or key < best_key:
                    best_key = key
                    chosen = [(st, w, e)]
                elif key == best_key:
                    chosen.append((st, w, e))
            if best_key is not None and best_key[1] == 1:
                continue
            new_idx = len(vmap)
            for a in range(len(rm) - 1, -1, -1):
                i = rm[a]
                u = vmap[i]
                lu = lab[u]
                found = False
                for k in range(offs[u], offs[u + 1]):
                    w = tgt[k]
                    if (visited >> w) & 1:
                        continue
                    found = True
                    key = (new_idx, 0, -i, lu, lab[w])
                    if best_key is None or key < best_key:
                        best_key = key
                        chosen = [(st, w, eids[k])]
                    elif key == best_key:
                        chosen.append((st, w, eids[k]))
                if found:
                    break

        if best_key is None:
            raise ValueError("graph is not connected")
        seen = set()
        nxt = []
        if best_key[1] == 1:
            code.append((best_key[0], best_key[2], best_key[3], best_key[4]))
            for st, w, e in chosen:
                vmap, rm, used, visited = st
                rmv = tuple([vmap[x] for x in rm])
                sig = (_canonical_visited(visited, rmv, classes),) + rmv
                if sig in seen:
                    continue
                seen.add(sig)
                nxt.append((vmap, rm, used | (one << e), visited))
        else:
            j = best_key[0]
            i = -best_key[2]
            code.append((i, j, best_key[3], best_key[4]))
            for st, w, e in chosen:
                vmap, rm, used, visited = st
                pos = rm.index(i)
                rm2 = rm[: pos + 1] + (j,)
                vmap2 = vmap + (w,)
                used2 = used | (one << e)
                visited2 = visited | (one << w)
                rmv = tuple([vmap2[x] for x in rm2])
                sig = (_canonical_visited(visited2, rmv, classes),) + rmv
                if sig in seen:
                    continue
                seen.add(sig)
                nxt.append((vmap2, rm2, used2, visited2))
        if len(nxt) > max_states:
            raise StateBudgetExceeded(len(nxt))
        states = nxt

    vmap = states[0][0]
    if len(vmap) != n:
        raise ValueError("graph is not connected")
    return code, list(vmap)
