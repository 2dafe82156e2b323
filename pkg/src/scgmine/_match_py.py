"""Pure-Python subgraph matching kernel.

Operates on integer-encoded graphs prepared by :mod:`scgmine.matching`. The
compiled twin in ``_match.pyx`` has the identical signature and search order,
so both return the same counts and exhaust the same budgets.
"""

BACKEND = "python"


def match(p_labels, p_adj, order, anchor, p_outdeg, p_indeg,
          h_labels, h_adj, h_outdeg, h_indeg, h_indptr, h_indices, h_order,
          limit, budget):
    """Count distinct host node sets onto which the pattern maps.

    ``p_adj``/``h_adj`` are flat row-major matrices of edge-label bitmasks.
    ``limit`` stops the search after that many images (0 = no limit);
    ``budget`` caps candidate assignments (0 = unlimited). Returns
    ``(count, exhausted)``.
    """
    pn = len(p_labels)
    hn = len(h_labels)
    if pn == 0:
        return 1, False
    if pn > hn:
        return 0, False

    mapping = [-1] * pn
    used = [False] * hn
    images = set()
    state = [0, False]  # expansions, exhausted

    def feasible(pu, hv, depth):
        if h_labels[hv] != p_labels[pu] or used[hv]:
            return False
        if h_outdeg[hv] < p_outdeg[pu] or h_indeg[hv] < p_indeg[pu]:
            return False
        m = p_adj[pu * pn + pu]
        if m and (h_adj[hv * hn + hv] & m) != m:
            return False
        for j in range(depth):
            pw = order[j]
            hw = mapping[pw]
            m = p_adj[pu * pn + pw]
            if m and (h_adj[hv * hn + hw] & m) != m:
                return False
            m = p_adj[pw * pn + pu]
            if m and (h_adj[hw * hn + hv] & m) != m:
                return False
        return True

    def search(depth):
        if depth == pn:
            images.add(tuple(sorted(mapping)))
            return limit and len(images) >= limit
        pu = order[depth]
        a = anchor[depth]
        if a >= 0:
            ha = mapping[a]
            candidates = h_indices[h_indptr[ha]:h_indptr[ha + 1]]
        else:
            candidates = h_order
        for hv in candidates:
            state[0] += 1
            if budget and state[0] > budget:
                state[1] = True
                return True
            if not feasible(pu, hv, depth):
                continue
            mapping[pu] = hv
            used[hv] = True
            stop = search(depth + 1)
            used[hv] = False
            mapping[pu] = -1
            if stop:
                return True
        return False

    search(0)
    return len(images), state[1]
