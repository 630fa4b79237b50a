"""Pure-Python minimum DFS code search.

Operates on integer-coded graphs: vertices ``0..n-1``, ``labels[v]`` an
integer rank, ``adj[v]`` the neighbor list. Codes are lists of
``(i, j, label_i, label_j)`` tuples in gSpan order.

Partial embeddings that share a code prefix are merged when their futures
coincide: off-path visited vertices are exhausted, so a state is fixed by its
visited set and rightmost path, and the visited set only matters up to
permutations inside classes of twin vertices.
"""


class StateBudgetExceeded(Exception):
    pass


def twin_classes(labels, adj):
    """Classes (size >= 2) of same-label vertices with equal open or closed neighborhoods."""
    n = len(labels)
    parent = list(range(n))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for closed in (False, True):
        seen = {}
        for v in range(n):
            ns = set(adj[v])
            if closed:
                ns.add(v)
            key = (labels[v], frozenset(ns))
            w = seen.setdefault(key, v)
            if w != v:
                parent[find(v)] = find(w)
    groups = {}
    for v in range(n):
        groups.setdefault(find(v), []).append(v)
    return [sorted(g) for g in groups.values() if len(g) > 1]


def _canonical_visited(visited, rm_vertices, classes):
    for members in classes:
        free = [x for x in members if x not in rm_vertices]
        cnt = 0
        for x in free:
            if (visited >> x) & 1:
                cnt += 1
                visited ^= 1 << x
        for x in free[:cnt]:
            visited |= 1 << x
    return visited


def min_dfs_code(labels, adj, max_states=200000):
    n = len(labels)
    if n == 0:
        return [], []
    nbrs = []
    eid = {}
    for u in range(n):
        row = []
        for w in adj[u]:
            key = (u, w) if u < w else (w, u)
            e = eid.get(key)
            if e is None:
                e = eid[key] = len(eid)
            row.append((w, e))
        nbrs.append(row)
    m = len(eid)
    if m == 0:
        return [], [0]
    classes = twin_classes(labels, adj)

    # first edge: smallest (label_from, label_to) over both orientations
    best = None
    for u in range(n):
        lu = labels[u]
        for w, _ in nbrs[u]:
            pair = (lu, labels[w])
            if best is None or pair < best:
                best = pair
    states = []
    seen = set()
    for u in range(n):
        if labels[u] != best[0]:
            continue
        for w, e in nbrs[u]:
            if labels[w] == best[1]:
                visited = (1 << u) | (1 << w)
                sig = (_canonical_visited(visited, (u, w), classes), u, w)
                if sig in seen:
                    continue
                seen.add(sig)
                states.append(((u, w), (0, 1), 1 << e, visited))
    code = [(0, 1, best[0], best[1])]

    for _ in range(1, m):
        best_key = None
        chosen = []
        for st in states:
            vmap, rm, used, visited = st
            r_idx = rm[-1]
            r = vmap[r_idx]
            lr = labels[r]
            # backward edges from the rightmost vertex to the rightmost path
            onpath = {}
            for i in rm[:-1]:
                onpath[vmap[i]] = i
            for w, e in nbrs[r]:
                if (used >> e) & 1:
                    continue
                j = onpath.get(w)
                if j is None:
                    continue
                key = (r_idx, 1, j, lr, labels[w])
                if best_key is None or key < best_key:
                    best_key = key
                    chosen = [(st, w, e)]
                elif key == best_key:
                    chosen.append((st, w, e))
            if best_key is not None and best_key[1] == 1:
                continue
            # forward edges from the deepest rightmost-path vertex that has any
            new_idx = len(vmap)
            for i in reversed(rm):
                u = vmap[i]
                lu = labels[u]
                found = False
                for w, e in nbrs[u]:
                    if (visited >> w) & 1:
                        continue
                    found = True
                    key = (new_idx, 0, -i, lu, labels[w])
                    if best_key is None or key < best_key:
                        best_key = key
                        chosen = [(st, w, e)]
                    elif key == best_key:
                        chosen.append((st, w, e))
                if found:
                    break

        if best_key is None:
            raise ValueError("graph is not connected")
        seen = set()
        nxt = []
        if best_key[1] == 1:
            i, j = best_key[0], best_key[2]
            code.append((i, j, best_key[3], best_key[4]))
            for (vmap, rm, used, visited), w, e in chosen:
                rmv = tuple(vmap[x] for x in rm)
                sig = (_canonical_visited(visited, rmv, classes),) + rmv
                if sig in seen:
                    continue
                seen.add(sig)
                nxt.append((vmap, rm, used | (1 << e), visited))
        else:
            j, i = best_key[0], -best_key[2]
            code.append((i, j, best_key[3], best_key[4]))
            for (vmap, rm, used, visited), w, e in chosen:
                pos = rm.index(i)
                rm2 = rm[: pos + 1] + (j,)
                vmap2 = vmap + (w,)
                visited2 = visited | (1 << w)
                rmv = tuple(vmap2[x] for x in rm2)
                sig = (_canonical_visited(visited2, rmv, classes),) + rmv
                if sig in seen:
                    continue
                seen.add(sig)
                nxt.append((vmap2, rm2, used | (1 << e), visited2))
        if len(nxt) > max_states:
            raise StateBudgetExceeded(len(nxt))
        states = nxt

    vmap = states[0][0]
    if len(vmap) != n:
        raise ValueError("graph is not connected")
    return code, list(vmap)
