"""Pure-Python matching kernels.

Same interface as the compiled ``_fast`` extension; used when the extension
is unavailable or ``QECC_PURE_PYTHON=1`` is set.

The matcher is the primal-dual blossom method (Edmonds; Galil's O(n^3)
formulation) over integer weights.  Vertices are ``0..n-1``, non-trivial
blossoms ``n..2n-1``.  Edge ``k`` has endpoints ``2k`` and ``2k+1``.
"""

from __future__ import annotations

import numpy as np

IMPLEMENTATION = "python"


def max_weight_matching(nvertex, edges, maxcardinality=False):
    """Maximum-weight matching on integer-weighted ``edges`` ``(i, j, w)``.

    Returns ``mate`` with ``mate[v]`` the partner of ``v`` or ``-1``.
    """
    if not edges:
        return [-1] * nvertex
    nedge = len(edges)
    maxweight = max(0, max(w for _, _, w in edges))
    endpoint = [edges[p >> 1][p & 1] for p in range(2 * nedge)]
    neighbend = [[] for _ in range(nvertex)]
    for k, (i, j, _) in enumerate(edges):
        neighbend[i].append(2 * k + 1)
        neighbend[j].append(2 * k)

    mate = [-1] * nvertex
    label = [0] * (2 * nvertex)
    labelend = [-1] * (2 * nvertex)
    inblossom = list(range(nvertex))
    blossomparent = [-1] * (2 * nvertex)
    blossomchilds = [None] * (2 * nvertex)
    blossombase = list(range(nvertex)) + [-1] * nvertex
    blossomendps = [None] * (2 * nvertex)
    bestedge = [-1] * (2 * nvertex)
    blossombestedges = [None] * (2 * nvertex)
    unusedblossoms = list(range(nvertex, 2 * nvertex))
    dualvar = [maxweight] * nvertex + [0] * nvertex
    allowedge = [False] * nedge
    queue = []

    def slack(k):
        i, j, wt = edges[k]
        return dualvar[i] + dualvar[j] - 2 * wt

    def leaves(b):
        if b < nvertex:
            return [b]
        out = []
        stack = [b]
        while stack:
            t = stack.pop()
            if t < nvertex:
                out.append(t)
            else:
                stack.extend(reversed(blossomchilds[t]))
        return out

    def assign_label(w, t, p):
        while True:
            b = inblossom[w]
            label[w] = label[b] = t
            labelend[w] = labelend[b] = p
            bestedge[w] = bestedge[b] = -1
            if t == 1:
                queue.extend(leaves(b))
                return
            base = blossombase[b]
            w, t, p = endpoint[mate[base]], 1, mate[base] ^ 1

    def scan_blossom(v, w):
        path = []
        base = -1
        while v != -1 or w != -1:
            b = inblossom[v]
            if label[b] & 4:
                base = blossombase[b]
                break
            path.append(b)
            label[b] = 5
            if labelend[b] == -1:
                v = -1
            else:
                v = endpoint[labelend[b]]
                b = inblossom[v]
                v = endpoint[labelend[b]]
            if w != -1:
                v, w = w, v
        for b in path:
            label[b] = 1
        return base

    def add_blossom(base, k):
        v, w, _ = edges[k]
        bb = inblossom[base]
        bv = inblossom[v]
        bw = inblossom[w]
        b = unusedblossoms.pop()
        blossombase[b] = base
        blossomparent[b] = -1
        blossomparent[bb] = b
        path = []
        endps = []
        while bv != bb:
            blossomparent[bv] = b
            path.append(bv)
            endps.append(labelend[bv])
            v = endpoint[labelend[bv]]
            bv = inblossom[v]
        path.append(bb)
        path.reverse()
        endps.reverse()
        endps.append(2 * k)
        while bw != bb:
            blossomparent[bw] = b
            path.append(bw)
            endps.append(labelend[bw] ^ 1)
            w = endpoint[labelend[bw]]
            bw = inblossom[w]
        blossomchilds[b] = path
        blossomendps[b] = endps
        label[b] = 1
        labelend[b] = labelend[bb]
        dualvar[b] = 0
        for v in leaves(b):
            if label[inblossom[v]] == 2:
                queue.append(v)
            inblossom[v] = b
        bestedgeto = [-1] * (2 * nvertex)
        for bv in path:
            if blossombestedges[bv] is None:
                nblists = [[p >> 1 for p in neighbend[v]] for v in leaves(bv)]
            else:
                nblists = [blossombestedges[bv]]
            for nblist in nblists:
                for k2 in nblist:
                    i, j, _ = edges[k2]
                    if inblossom[j] == b:
                        i, j = j, i
                    bj = inblossom[j]
                    if (bj != b and label[bj] == 1
                            and (bestedgeto[bj] == -1 or slack(k2) < slack(bestedgeto[bj]))):
                        bestedgeto[bj] = k2
            blossombestedges[bv] = None
            bestedge[bv] = -1
        blossombestedges[b] = [k2 for k2 in bestedgeto if k2 != -1]
        best = -1
        for k2 in blossombestedges[b]:
            if best == -1 or slack(k2) < slack(best):
                best = k2
        bestedge[b] = best

    def expand_blossom(b, endstage):
        for s in blossomchilds[b]:
            blossomparent[s] = -1
            if s < nvertex:
                inblossom[s] = s
            elif endstage and dualvar[s] == 0:
                expand_blossom(s, endstage)
            else:
                for v in leaves(s):
                    inblossom[v] = s
        if not endstage and label[b] == 2:
            childs = blossomchilds[b]
            endps = blossomendps[b]
            entrychild = inblossom[endpoint[labelend[b] ^ 1]]
            j = childs.index(entrychild)
            if j & 1:
                j -= len(childs)
                jstep = 1
                endptrick = 0
            else:
                jstep = -1
                endptrick = 1
            p = labelend[b]
            while j != 0:
                label[endpoint[p ^ 1]] = 0
                label[endpoint[endps[j - endptrick] ^ endptrick ^ 1]] = 0
                assign_label(endpoint[p ^ 1], 2, p)
                allowedge[endps[j - endptrick] >> 1] = True
                j += jstep
                p = endps[j - endptrick] ^ endptrick
                allowedge[p >> 1] = True
                j += jstep
            bv = childs[j]
            label[endpoint[p ^ 1]] = label[bv] = 2
            labelend[endpoint[p ^ 1]] = labelend[bv] = p
            bestedge[bv] = -1
            j += jstep
            while childs[j] != entrychild:
                bv = childs[j]
                if label[bv] == 1:
                    j += jstep
                    continue
                found = -1
                for v in leaves(bv):
                    if label[v] != 0:
                        found = v
                        break
                if found != -1:
                    v = found
                    label[v] = 0
                    label[endpoint[mate[blossombase[bv]]]] = 0
                    assign_label(v, 2, labelend[v])
                j += jstep
        label[b] = labelend[b] = -1
        blossomchilds[b] = blossomendps[b] = None
        blossombase[b] = -1
        blossombestedges[b] = None
        bestedge[b] = -1
        unusedblossoms.append(b)

    def augment_blossom(b, v):
        t = v
        while blossomparent[t] != b:
            t = blossomparent[t]
        if t >= nvertex:
            augment_blossom(t, v)
        childs = blossomchilds[b]
        endps = blossomendps[b]
        i = j = childs.index(t)
        if i & 1:
            j -= len(childs)
            jstep = 1
            endptrick = 0
        else:
            jstep = -1
            endptrick = 1
        while j != 0:
            j += jstep
            t = childs[j]
            p = endps[j - endptrick] ^ endptrick
            if t >= nvertex:
                augment_blossom(t, endpoint[p])
            j += jstep
            t = childs[j]
            if t >= nvertex:
                augment_blossom(t, endpoint[p ^ 1])
            mate[endpoint[p]] = p ^ 1
            mate[endpoint[p ^ 1]] = p
        blossomchilds[b] = childs[i:] + childs[:i]
        blossomendps[b] = endps[i:] + endps[:i]
        blossombase[b] = blossombase[blossomchilds[b][0]]

    def augment_matching(k):
        v, w, _ = edges[k]
        for s, p in ((v, 2 * k + 1), (w, 2 * k)):
            while True:
                bs = inblossom[s]
                if bs >= nvertex:
                    augment_blossom(bs, s)
                mate[s] = p
                if labelend[bs] == -1:
                    break
                t = endpoint[labelend[bs]]
                bt = inblossom[t]
                s = endpoint[labelend[bt]]
                j = endpoint[labelend[bt] ^ 1]
                if bt >= nvertex:
                    augment_blossom(bt, j)
                mate[j] = labelend[bt]
                p = labelend[bt] ^ 1

    for _ in range(nvertex):
        label[:] = [0] * (2 * nvertex)
        bestedge[:] = [-1] * (2 * nvertex)
        blossombestedges[nvertex:] = [None] * nvertex
        allowedge[:] = [False] * nedge
        queue[:] = []
        for v in range(nvertex):
            if mate[v] == -1 and label[inblossom[v]] == 0:
                assign_label(v, 1, -1)
        augmented = False
        while True:
            while queue and not augmented:
                v = queue.pop()
                for p in neighbend[v]:
                    k = p >> 1
                    w = endpoint[p]
                    if inblossom[v] == inblossom[w]:
                        continue
                    kslack = 0
                    if not allowedge[k]:
                        kslack = slack(k)
                        if kslack <= 0:
                            allowedge[k] = True
                    if allowedge[k]:
                        if label[inblossom[w]] == 0:
                            assign_label(w, 2, p ^ 1)
                        elif label[inblossom[w]] == 1:
                            base = scan_blossom(v, w)
                            if base >= 0:
                                add_blossom(base, k)
                            else:
                                augment_matching(k)
                                augmented = True
                                break
                        elif label[w] == 0:
                            label[w] = 2
                            labelend[w] = p ^ 1
                    elif label[inblossom[w]] == 1:
                        b = inblossom[v]
                        if bestedge[b] == -1 or kslack < slack(bestedge[b]):
                            bestedge[b] = k
                    elif label[w] == 0:
                        if bestedge[w] == -1 or kslack < slack(bestedge[w]):
                            bestedge[w] = k
            if augmented:
                break

            deltatype = -1
            delta = deltaedge = deltablossom = 0
            if not maxcardinality:
                deltatype = 1
                delta = min(dualvar[:nvertex])
            for v in range(nvertex):
                if label[inblossom[v]] == 0 and bestedge[v] != -1:
                    d = slack(bestedge[v])
                    if deltatype == -1 or d < delta:
                        delta, deltatype, deltaedge = d, 2, bestedge[v]
            for b in range(2 * nvertex):
                if blossomparent[b] == -1 and label[b] == 1 and bestedge[b] != -1:
                    # S-to-S slack is even for integer weights
                    d = slack(bestedge[b]) // 2
                    if deltatype == -1 or d < delta:
                        delta, deltatype, deltaedge = d, 3, bestedge[b]
            for b in range(nvertex, 2 * nvertex):
                if (blossombase[b] >= 0 and blossomparent[b] == -1 and label[b] == 2
                        and (deltatype == -1 or dualvar[b] < delta)):
                    delta, deltatype, deltablossom = dualvar[b], 4, b
            if deltatype == -1:
                deltatype = 1
                delta = max(0, min(dualvar[:nvertex]))

            for v in range(nvertex):
                lab = label[inblossom[v]]
                if lab == 1:
                    dualvar[v] -= delta
                elif lab == 2:
                    dualvar[v] += delta
            for b in range(nvertex, 2 * nvertex):
                if blossombase[b] >= 0 and blossomparent[b] == -1:
                    if label[b] == 1:
                        dualvar[b] += delta
                    elif label[b] == 2:
                        dualvar[b] -= delta

            if deltatype == 1:
                break
            if deltatype == 2:
                allowedge[deltaedge] = True
                i, j, _ = edges[deltaedge]
                if label[inblossom[i]] == 0:
                    i, j = j, i
                queue.append(i)
            elif deltatype == 3:
                allowedge[deltaedge] = True
                i, j, _ = edges[deltaedge]
                queue.append(i)
            else:
                expand_blossom(deltablossom, False)

        if not augmented:
            break
        for b in range(nvertex, 2 * nvertex):
            if (blossomparent[b] == -1 and blossombase[b] >= 0
                    and label[b] == 1 and dualvar[b] == 0):
                expand_blossom(b, True)

    return [endpoint[m] if m >= 0 else -1 for m in mate]


def min_weight_perfect_matching(weights):
    """Minimum-weight perfect matching on a dense symmetric integer matrix.

    Negative entries mark absent edges.  Raises ``ValueError`` when no
    perfect matching exists.
    """
    W = np.asarray(weights, dtype=np.int64)
    n = W.shape[0]
    if n == 0:
        return np.zeros(0, dtype=np.int64)
    if n % 2:
        raise ValueError(f"perfect matching needs an even node count, got {n}")
    iu, ju = np.triu_indices(n, 1)
    w = W[iu, ju]
    present = w >= 0
    iu, ju, w = iu[present], ju[present], w[present]
    if w.size == 0:
        raise ValueError("graph has no perfect matching")
    top = int(w.max()) + 1
    edges = list(zip(iu.tolist(), ju.tolist(), (top - w).tolist()))
    mate = max_weight_matching(n, edges, maxcardinality=True)
    if any(m < 0 for m in mate):
        raise ValueError("graph has no perfect matching")
    return np.asarray(mate, dtype=np.int64)


def _defect_weights(dist, bdist, checks, times, time_weight, n_rounds):
    """Weights of the defect graph plus boundary nodes.

    Returns ``(W, kind)`` where ``kind`` is 0 for no boundary, 1 for one twin
    per defect (open spatial boundary) and 2 for a single time-boundary node.
    """
    m = len(checks)
    has_boundary = bdist[0] >= 0 if len(bdist) else False
    if has_boundary:
        size, kind = 2 * m, 1
    elif m % 2:
        if n_rounds <= 0:
            raise ValueError("odd number of defects on a code without boundary")
        size, kind = m + 1, 2
    else:
        size, kind = m, 0
    W = np.full((size, size), -1, dtype=np.int64)
    for a in range(m):
        for b in range(a + 1, m):
            w = dist[checks[a], checks[b]] + time_weight * abs(times[a] - times[b])
            W[a, b] = W[b, a] = w
    if kind == 1:
        for a in range(m):
            W[a, m + a] = W[m + a, a] = bdist[checks[a]]
            for b in range(a + 1, m):
                W[m + a, m + b] = W[m + b, m + a] = 0
    elif kind == 2:
        for a in range(m):
            W[a, m] = W[m, a] = time_weight * (n_rounds - 1 - times[a])
    return W, kind


def _decode_one(dist, bdist, path_ptr, path_idx, checks, times, time_weight, n_rounds, out):
    n_c = dist.shape[0]
    m = len(checks)
    if m == 0:
        return 0
    W, kind = _defect_weights(dist, bdist, checks, times, time_weight, n_rounds)
    mate = min_weight_perfect_matching(W)
    total = 0
    for a in range(m):
        b = int(mate[a])
        if b < m and b < a:
            continue
        total += int(W[a, b])
        if b < m:
            ca, cb = checks[a], checks[b]
            if ca == cb:
                continue
            key = ca * n_c + cb
        elif kind == 1:
            key = n_c * n_c + checks[a]
        else:
            continue
        for q in path_idx[path_ptr[key]:path_ptr[key + 1]]:
            out[q] ^= 1
    return total


def decode_batch(dist, bdist, path_ptr, path_idx, syndromes, n_qubits):
    """MWPM corrections for a ``(B, n_checks)`` batch of perfect syndromes."""
    syndromes = np.asarray(syndromes, dtype=np.uint8)
    out = np.zeros((syndromes.shape[0], n_qubits), dtype=np.uint8)
    weights = np.zeros(syndromes.shape[0], dtype=np.int64)
    for i in range(syndromes.shape[0]):
        checks = np.flatnonzero(syndromes[i]).tolist()
        weights[i] = _decode_one(dist, bdist, path_ptr, path_idx, checks,
                                 [0] * len(checks), 0, 0, out[i])
    return out, weights


def decode_spacetime_batch(dist, bdist, path_ptr, path_idx, events, n_qubits, time_weight):
    """MWPM corrections from ``(B, T, n_checks)`` detection events."""
    events = np.asarray(events, dtype=np.uint8)
    B, T, _ = events.shape
    out = np.zeros((B, n_qubits), dtype=np.uint8)
    weights = np.zeros(B, dtype=np.int64)
    for i in range(B):
        tt, cc = np.nonzero(events[i])
        weights[i] = _decode_one(dist, bdist, path_ptr, path_idx, cc.tolist(), tt.tolist(),
                                 time_weight, T, out[i])
    return out, weights
