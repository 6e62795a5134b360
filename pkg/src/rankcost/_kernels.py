"""Compiled hot loops. All functions release the GIL so population members
can be evaluated from a thread pool.

Grids are flat row-major arrays; ``blocked`` is a uint8 mask where nonzero
cells cannot be entered.
"""

import numpy as np
from numba import njit

MODE_FULL = 0
MODE_RANKING_ONLY = 1
MODE_COST_ONLY = 2


@njit(cache=True, nogil=True, inline="always")
def _before(f1, g1, s1, f2, g2, s2):
    # lower f first, then larger g, then earlier insertion
    if f1 != f2:
        return f1 < f2
    if g1 != g2:
        return g1 > g2
    return s1 < s2


@njit(cache=True, nogil=True)
def make_workspace(m):
    """Scratch arrays for ``astar_ws``; reusable across searches on one grid."""
    cap = 4 * m + 1
    return (
        np.empty(m),                 # g
        np.empty(m, np.int64),       # parent
        np.zeros(m, np.int64),       # stamp: g/parent valid when == current stamp
        np.zeros(m, np.int64),       # closed stamp
        np.empty(cap),               # heap: f
        np.empty(cap),               # heap: g
        np.empty(cap, np.int64),     # heap: insertion sequence
        np.empty(cap, np.int64),     # heap: vertex
        np.zeros(1, np.int64),       # stamp counter
    )


@njit(cache=True, nogil=True)
def astar(width, height, blocked, cost, src, dst):
    """Return ``(path, accumulated_cost)``; ``path`` is empty when unreachable.

    Entering vertex ``v`` costs ``1 + cost[v]``; the heuristic is the
    Manhattan distance to ``dst``.
    """
    return astar_ws(width, height, blocked, cost, src, dst, make_workspace(width * height))


@njit(cache=True, nogil=True)
def astar_ws(width, height, blocked, cost, src, dst, ws):
    g, parent, stamp, closed, hf, hg, hs, hn, counter = ws
    counter[0] += 1
    cur = counter[0]
    cap = hf.shape[0]
    ex = dst % width
    ey = dst // width

    g[src] = 0.0
    stamp[src] = cur
    hf[0] = abs(src % width - ex) + abs(src // width - ey)
    hg[0] = 0.0
    hs[0] = 0
    hn[0] = src
    size = 1
    seq = 1

    found = False
    while size > 0:
        node = hn[0]
        gnode = hg[0]
        size -= 1
        if size > 0:
            # sift the last entry down from the root
            lf = hf[size]
            lg = hg[size]
            ls = hs[size]
            ln = hn[size]
            i = 0
            while True:
                c = 2 * i + 1
                if c >= size:
                    break
                if c + 1 < size and _before(hf[c + 1], hg[c + 1], hs[c + 1], hf[c], hg[c], hs[c]):
                    c += 1
                if _before(hf[c], hg[c], hs[c], lf, lg, ls):
                    hf[i] = hf[c]
                    hg[i] = hg[c]
                    hs[i] = hs[c]
                    hn[i] = hn[c]
                    i = c
                else:
                    break
            hf[i] = lf
            hg[i] = lg
            hs[i] = ls
            hn[i] = ln

        if closed[node] == cur:
            continue
        closed[node] = cur
        if node == dst:
            found = True
            break
        x = node % width
        y = node // width
        for d in range(4):
            if d == 0:
                if y == 0:
                    continue
                nb = node - width
            elif d == 1:
                if y == height - 1:
                    continue
                nb = node + width
            elif d == 2:
                if x == 0:
                    continue
                nb = node - 1
            else:
                if x == width - 1:
                    continue
                nb = node + 1
            if blocked[nb] != 0 or closed[nb] == cur:
                continue
            ng = gnode + 1.0 + cost[nb]
            if stamp[nb] != cur or ng < g[nb]:
                g[nb] = ng
                stamp[nb] = cur
                parent[nb] = node
                if size >= cap:
                    # unreachable: a vertex is pushed at most once per expanded neighbour
                    raise RuntimeError("heap capacity exceeded")
                nf = ng + (abs(nb % width - ex) + abs(nb // width - ey))
                # sift up
                i = size
                size += 1
                while i > 0:
                    p = (i - 1) // 2
                    if _before(nf, ng, seq, hf[p], hg[p], hs[p]):
                        hf[i] = hf[p]
                        hg[i] = hg[p]
                        hs[i] = hs[p]
                        hn[i] = hn[p]
                        i = p
                    else:
                        break
                hf[i] = nf
                hg[i] = ng
                hs[i] = seq
                hn[i] = nb
                seq += 1

    if not found:
        return np.empty(0, np.int64), np.inf
    n = 1
    v = dst
    while v != src:
        v = parent[v]
        n += 1
    path = np.empty(n, np.int64)
    v = dst
    for i in range(n - 1, -1, -1):
        path[i] = v
        v = parent[v]
    return path, g[dst]


@njit(cache=True, nogil=True)
def staged_fields(cost_maps, order):
    """``out[j]`` is the sum of the maps of nets at order positions ``>= j``.

    Summation runs from the last position backwards; ``out[k]`` is zero.
    """
    k = order.shape[0]
    m = cost_maps.shape[1]
    out = np.zeros((k + 1, m))
    for j in range(k - 1, -1, -1):
        src = cost_maps[order[j]]
        for v in range(m):
            out[j, v] = out[j + 1, v] + src[v]
    return out


@njit(cache=True, nogil=True)
def route_sequence(width, height, obstacle_mask, pins, order, staged, ws, stop_on_failure=False):
    """Route nets in ``order``; position ``j`` uses ``staged[j + 1]``.

    With ``stop_on_failure`` the nets after the first failure are left
    unrouted.

    Returns per-net edge lengths (-1 when unconnected) and the paths packed
    into one flat array with ``offsets[net]:offsets[net + 1]`` slices
    (indexed by net, not by order position).
    """
    k = order.shape[0]
    blocked = obstacle_mask.copy()
    for i in range(k):
        blocked[pins[i, 0]] = 1
        blocked[pins[i, 1]] = 1
    lengths = np.full(k, -1, np.int64)
    found_paths = []
    for j in range(k):
        net = order[j]
        a = pins[net, 0]
        b = pins[net, 1]
        blocked[a] = 0
        blocked[b] = 0
        path, _ = astar_ws(width, height, blocked, staged[j + 1], a, b, ws)
        blocked[a] = 1
        blocked[b] = 1
        if path.shape[0] > 0:
            for v in path:
                blocked[v] = 1
            lengths[net] = path.shape[0] - 1
        found_paths.append(path)
        if stop_on_failure and path.shape[0] == 0:
            for _ in range(j + 1, k):
                found_paths.append(np.empty(0, np.int64))
            break
    offsets = np.zeros(k + 1, np.int64)
    for net in range(k):
        offsets[net + 1] = offsets[net] + max(lengths[net] + 1, 0)
    flat = np.empty(offsets[k], np.int64)
    for j in range(k):
        net = order[j]
        path = found_paths[j]
        if path.shape[0] > 0:
            flat[offsets[net]:offsets[net + 1]] = path
    return lengths, flat, offsets


@njit(cache=True, nogil=True)
def evaluate_candidates(width, height, obstacle_mask, pins, candidates, mode,
                        stop_on_failure, out_connected, out_length, lo, hi):
    """Route candidate parameter rows ``lo:hi`` and record connected-net
    counts and total lengths (length is summed over connected nets only).

    ``stop_on_failure`` makes the connected count a lower bound for failed
    rows; use it only when any failure maps to the same reward.
    """
    k = pins.shape[0]
    m = width * height
    identity = np.arange(k)
    zeros = np.zeros((k + 1, m))
    ws = make_workspace(m)
    for r in range(lo, hi):
        row = candidates[r]
        if mode == MODE_COST_ONLY:
            order = identity
        else:
            order = np.argsort(-row[:k], kind="mergesort")
        if mode == MODE_RANKING_ONLY:
            staged = zeros
        else:
            off = k if mode == MODE_FULL else 0
            maps = np.maximum(row[off:off + k * m], 0.0).reshape((k, m))
            staged = staged_fields(maps, order)
        lengths, _, _ = route_sequence(width, height, obstacle_mask, pins, order, staged, ws, stop_on_failure)
        c = 0
        total = 0
        for i in range(k):
            if lengths[i] >= 0:
                c += 1
                total += lengths[i]
        out_connected[r] = c
        out_length[r] = total
