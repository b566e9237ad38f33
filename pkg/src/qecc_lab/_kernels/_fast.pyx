# distutils: language = c++
# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled matching kernels (blossom matcher and batched MWPM decoding).

Line-for-line port of ``_pure``; both must return identical matchings.
"""

import numpy as np
cimport numpy as cnp
from libcpp.vector cimport vector

cnp.import_array()

IMPLEMENTATION = "cython"

ctypedef long long i64


cdef class _Matcher:
    cdef int nv, ne
    cdef vector[int] eu, ev
    cdef vector[i64] ew
    cdef vector[int] endpoint
    cdef vector[vector[int]] neighbend
    cdef vector[int] mate, label, labelend, inblossom, blossomparent, blossombase
    cdef vector[int] bestedge, unused, queue
    cdef vector[vector[int]] childs, endps, bbe
    cdef vector[char] bbe_valid, allowedge
    cdef vector[i64] dualvar

    cdef void setup(self, int nv, vector[int]& eu, vector[int]& ev, vector[i64]& ew):
        cdef int k
        cdef i64 maxweight = 0
        self.nv = nv
        self.ne = eu.size()
        self.eu = eu
        self.ev = ev
        self.ew = ew
        for k in range(self.ne):
            if ew[k] > maxweight:
                maxweight = ew[k]
        self.endpoint.resize(2 * self.ne)
        self.neighbend.resize(nv)
        for k in range(self.ne):
            self.endpoint[2 * k] = eu[k]
            self.endpoint[2 * k + 1] = ev[k]
            self.neighbend[eu[k]].push_back(2 * k + 1)
            self.neighbend[ev[k]].push_back(2 * k)
        self.mate.assign(nv, -1)
        self.label.assign(2 * nv, 0)
        self.labelend.assign(2 * nv, -1)
        self.inblossom.resize(nv)
        for k in range(nv):
            self.inblossom[k] = k
        self.blossomparent.assign(2 * nv, -1)
        self.childs.resize(2 * nv)
        self.endps.resize(2 * nv)
        self.bbe.resize(2 * nv)
        self.bbe_valid.assign(2 * nv, 0)
        self.blossombase.assign(2 * nv, -1)
        for k in range(nv):
            self.blossombase[k] = k
        self.bestedge.assign(2 * nv, -1)
        self.unused.clear()
        for k in range(nv, 2 * nv):
            self.unused.push_back(k)
        self.dualvar.assign(2 * nv, 0)
        for k in range(nv):
            self.dualvar[k] = maxweight
        self.allowedge.assign(self.ne, 0)

    cdef inline i64 slack(self, int k):
        return self.dualvar[self.eu[k]] + self.dualvar[self.ev[k]] - 2 * self.ew[k]

    cdef void leaves(self, int b, vector[int]& out):
        cdef size_t i
        if b < self.nv:
            out.push_back(b)
        else:
            for i in range(self.childs[b].size()):
                self.leaves(self.childs[b][i], out)

    cdef void assign_label(self, int w, int t, int p):
        cdef int b, base
        cdef vector[int] lv
        cdef size_t i
        while True:
            b = self.inblossom[w]
            self.label[w] = t
            self.label[b] = t
            self.labelend[w] = p
            self.labelend[b] = p
            self.bestedge[w] = -1
            self.bestedge[b] = -1
            if t == 1:
                self.leaves(b, lv)
                for i in range(lv.size()):
                    self.queue.push_back(lv[i])
                return
            base = self.blossombase[b]
            w = self.endpoint[self.mate[base]]
            p = self.mate[base] ^ 1
            t = 1

    cdef int scan_blossom(self, int v, int w):
        cdef vector[int] path
        cdef int base = -1, b, tmp
        cdef size_t i
        while v != -1 or w != -1:
            b = self.inblossom[v]
            if self.label[b] & 4:
                base = self.blossombase[b]
                break
            path.push_back(b)
            self.label[b] = 5
            if self.labelend[b] == -1:
                v = -1
            else:
                v = self.endpoint[self.labelend[b]]
                b = self.inblossom[v]
                v = self.endpoint[self.labelend[b]]
            if w != -1:
                tmp = v
                v = w
                w = tmp
        for i in range(path.size()):
            self.label[path[i]] = 1
        return base

    cdef void add_blossom(self, int base, int k):
        cdef int v = self.eu[k], w = self.ev[k]
        cdef int bb = self.inblossom[base]
        cdef int bv = self.inblossom[v]
        cdef int bw = self.inblossom[w]
        cdef int b = self.unused.back()
        cdef vector[int] path, eps, lv, nb, bestedgeto
        cdef size_t i, j, c, li
        cdef int k2, x, y, by, best
        self.unused.pop_back()
        self.blossombase[b] = base
        self.blossomparent[b] = -1
        self.blossomparent[bb] = b
        while bv != bb:
            self.blossomparent[bv] = b
            path.push_back(bv)
            eps.push_back(self.labelend[bv])
            v = self.endpoint[self.labelend[bv]]
            bv = self.inblossom[v]
        path.push_back(bb)
        _reverse(path)
        _reverse(eps)
        eps.push_back(2 * k)
        while bw != bb:
            self.blossomparent[bw] = b
            path.push_back(bw)
            eps.push_back(self.labelend[bw] ^ 1)
            w = self.endpoint[self.labelend[bw]]
            bw = self.inblossom[w]
        self.childs[b] = path
        self.endps[b] = eps
        self.label[b] = 1
        self.labelend[b] = self.labelend[bb]
        self.dualvar[b] = 0
        self.leaves(b, lv)
        for i in range(lv.size()):
            v = lv[i]
            if self.label[self.inblossom[v]] == 2:
                self.queue.push_back(v)
            self.inblossom[v] = b
        bestedgeto.assign(2 * self.nv, -1)
        for c in range(path.size()):
            bv = path[c]
            nb.clear()
            if not self.bbe_valid[bv]:
                lv.clear()
                self.leaves(bv, lv)
                for li in range(lv.size()):
                    for j in range(self.neighbend[lv[li]].size()):
                        nb.push_back(self.neighbend[lv[li]][j] >> 1)
            else:
                nb = self.bbe[bv]
            for j in range(nb.size()):
                k2 = nb[j]
                x = self.eu[k2]
                y = self.ev[k2]
                if self.inblossom[y] == b:
                    y = x
                by = self.inblossom[y]
                if (by != b and self.label[by] == 1
                        and (bestedgeto[by] == -1 or self.slack(k2) < self.slack(bestedgeto[by]))):
                    bestedgeto[by] = k2
            self.bbe_valid[bv] = 0
            self.bbe[bv].clear()
            self.bestedge[bv] = -1
        self.bbe[b].clear()
        for i in range(bestedgeto.size()):
            if bestedgeto[i] != -1:
                self.bbe[b].push_back(bestedgeto[i])
        self.bbe_valid[b] = 1
        best = -1
        for i in range(self.bbe[b].size()):
            k2 = self.bbe[b][i]
            if best == -1 or self.slack(k2) < self.slack(best):
                best = k2
        self.bestedge[b] = best

    cdef int child_index(self, int b, int t):
        cdef size_t i
        for i in range(self.childs[b].size()):
            if self.childs[b][i] == t:
                return <int>i
        return -1

    cdef void expand_blossom(self, int b, bint endstage):
        cdef size_t i
        cdef int s, v, entrychild, j, jstep, endptrick, p, bv, found, nch
        cdef vector[int] lv
        cdef vector[int] chs = self.childs[b]
        for i in range(chs.size()):
            s = chs[i]
            self.blossomparent[s] = -1
            if s < self.nv:
                self.inblossom[s] = s
            elif endstage and self.dualvar[s] == 0:
                self.expand_blossom(s, endstage)
            else:
                lv.clear()
                self.leaves(s, lv)
                for j in range(<int>lv.size()):
                    self.inblossom[lv[j]] = s
        if (not endstage) and self.label[b] == 2:
            nch = self.childs[b].size()
            entrychild = self.inblossom[self.endpoint[self.labelend[b] ^ 1]]
            j = self.child_index(b, entrychild)
            if j & 1:
                j -= nch
                jstep = 1
                endptrick = 0
            else:
                jstep = -1
                endptrick = 1
            p = self.labelend[b]
            while j != 0:
                self.label[self.endpoint[p ^ 1]] = 0
                self.label[self.endpoint[self.endps[b][_wrap(j - endptrick, nch)] ^ endptrick ^ 1]] = 0
                self.assign_label(self.endpoint[p ^ 1], 2, p)
                self.allowedge[self.endps[b][_wrap(j - endptrick, nch)] >> 1] = 1
                j += jstep
                p = self.endps[b][_wrap(j - endptrick, nch)] ^ endptrick
                self.allowedge[p >> 1] = 1
                j += jstep
            bv = self.childs[b][_wrap(j, nch)]
            self.label[self.endpoint[p ^ 1]] = 2
            self.label[bv] = 2
            self.labelend[self.endpoint[p ^ 1]] = p
            self.labelend[bv] = p
            self.bestedge[bv] = -1
            j += jstep
            while self.childs[b][_wrap(j, nch)] != entrychild:
                bv = self.childs[b][_wrap(j, nch)]
                if self.label[bv] == 1:
                    j += jstep
                    continue
                lv.clear()
                self.leaves(bv, lv)
                found = -1
                for i in range(lv.size()):
                    if self.label[lv[i]] != 0:
                        found = lv[i]
                        break
                if found != -1:
                    v = found
                    self.label[v] = 0
                    self.label[self.endpoint[self.mate[self.blossombase[bv]]]] = 0
                    self.assign_label(v, 2, self.labelend[v])
                j += jstep
        self.label[b] = -1
        self.labelend[b] = -1
        self.childs[b].clear()
        self.endps[b].clear()
        self.blossombase[b] = -1
        self.bbe[b].clear()
        self.bbe_valid[b] = 0
        self.bestedge[b] = -1
        self.unused.push_back(b)

    cdef void augment_blossom(self, int b, int v):
        cdef int t = v, i, j, jstep, endptrick, p, nch
        cdef vector[int] rc, re
        cdef size_t q
        while self.blossomparent[t] != b:
            t = self.blossomparent[t]
        if t >= self.nv:
            self.augment_blossom(t, v)
        nch = self.childs[b].size()
        i = self.child_index(b, t)
        j = i
        if i & 1:
            j -= nch
            jstep = 1
            endptrick = 0
        else:
            jstep = -1
            endptrick = 1
        while j != 0:
            j += jstep
            t = self.childs[b][_wrap(j, nch)]
            p = self.endps[b][_wrap(j - endptrick, nch)] ^ endptrick
            if t >= self.nv:
                self.augment_blossom(t, self.endpoint[p])
            j += jstep
            t = self.childs[b][_wrap(j, nch)]
            if t >= self.nv:
                self.augment_blossom(t, self.endpoint[p ^ 1])
            self.mate[self.endpoint[p]] = p ^ 1
            self.mate[self.endpoint[p ^ 1]] = p
        for q in range(nch):
            rc.push_back(self.childs[b][(i + q) % nch])
            re.push_back(self.endps[b][(i + q) % nch])
        self.childs[b] = rc
        self.endps[b] = re
        self.blossombase[b] = self.blossombase[self.childs[b][0]]

    cdef void augment_matching(self, int k):
        cdef int s, p, bs, t, bt, j, side
        for side in range(2):
            if side == 0:
                s = self.eu[k]
                p = 2 * k + 1
            else:
                s = self.ev[k]
                p = 2 * k
            while True:
                bs = self.inblossom[s]
                if bs >= self.nv:
                    self.augment_blossom(bs, s)
                self.mate[s] = p
                if self.labelend[bs] == -1:
                    break
                t = self.endpoint[self.labelend[bs]]
                bt = self.inblossom[t]
                s = self.endpoint[self.labelend[bt]]
                j = self.endpoint[self.labelend[bt] ^ 1]
                if bt >= self.nv:
                    self.augment_blossom(bt, j)
                self.mate[j] = self.labelend[bt]
                p = self.labelend[bt] ^ 1

    cdef void run(self, bint maxcardinality):
        cdef int nv = self.nv
        cdef int stage, v, w, k, p, b, base, i, j, deltatype, deltaedge, deltablossom, lab
        cdef size_t q
        cdef bint augmented
        cdef i64 kslack, delta, d, mindual
        if self.ne == 0:
            return
        for stage in range(nv):
            self.label.assign(2 * nv, 0)
            self.bestedge.assign(2 * nv, -1)
            for b in range(nv, 2 * nv):
                self.bbe[b].clear()
                self.bbe_valid[b] = 0
            self.allowedge.assign(self.ne, 0)
            self.queue.clear()
            for v in range(nv):
                if self.mate[v] == -1 and self.label[self.inblossom[v]] == 0:
                    self.assign_label(v, 1, -1)
            augmented = False
            while True:
                while self.queue.size() > 0 and not augmented:
                    v = self.queue.back()
                    self.queue.pop_back()
                    for q in range(self.neighbend[v].size()):
                        p = self.neighbend[v][q]
                        k = p >> 1
                        w = self.endpoint[p]
                        if self.inblossom[v] == self.inblossom[w]:
                            continue
                        kslack = 0
                        if not self.allowedge[k]:
                            kslack = self.slack(k)
                            if kslack <= 0:
                                self.allowedge[k] = 1
                        if self.allowedge[k]:
                            if self.label[self.inblossom[w]] == 0:
                                self.assign_label(w, 2, p ^ 1)
                            elif self.label[self.inblossom[w]] == 1:
                                base = self.scan_blossom(v, w)
                                if base >= 0:
                                    self.add_blossom(base, k)
                                else:
                                    self.augment_matching(k)
                                    augmented = True
                                    break
                            elif self.label[w] == 0:
                                self.label[w] = 2
                                self.labelend[w] = p ^ 1
                        elif self.label[self.inblossom[w]] == 1:
                            b = self.inblossom[v]
                            if self.bestedge[b] == -1 or kslack < self.slack(self.bestedge[b]):
                                self.bestedge[b] = k
                        elif self.label[w] == 0:
                            if self.bestedge[w] == -1 or kslack < self.slack(self.bestedge[w]):
                                self.bestedge[w] = k
                if augmented:
                    break

                deltatype = -1
                delta = 0
                deltaedge = 0
                deltablossom = 0
                mindual = self.dualvar[0]
                for v in range(1, nv):
                    if self.dualvar[v] < mindual:
                        mindual = self.dualvar[v]
                if not maxcardinality:
                    deltatype = 1
                    delta = mindual
                for v in range(nv):
                    if self.label[self.inblossom[v]] == 0 and self.bestedge[v] != -1:
                        d = self.slack(self.bestedge[v])
                        if deltatype == -1 or d < delta:
                            delta = d
                            deltatype = 2
                            deltaedge = self.bestedge[v]
                for b in range(2 * nv):
                    if self.blossomparent[b] == -1 and self.label[b] == 1 and self.bestedge[b] != -1:
                        d = self.slack(self.bestedge[b]) // 2
                        if deltatype == -1 or d < delta:
                            delta = d
                            deltatype = 3
                            deltaedge = self.bestedge[b]
                for b in range(nv, 2 * nv):
                    if (self.blossombase[b] >= 0 and self.blossomparent[b] == -1
                            and self.label[b] == 2
                            and (deltatype == -1 or self.dualvar[b] < delta)):
                        delta = self.dualvar[b]
                        deltatype = 4
                        deltablossom = b
                if deltatype == -1:
                    deltatype = 1
                    delta = mindual if mindual > 0 else 0

                for v in range(nv):
                    lab = self.label[self.inblossom[v]]
                    if lab == 1:
                        self.dualvar[v] -= delta
                    elif lab == 2:
                        self.dualvar[v] += delta
                for b in range(nv, 2 * nv):
                    if self.blossombase[b] >= 0 and self.blossomparent[b] == -1:
                        if self.label[b] == 1:
                            self.dualvar[b] += delta
                        elif self.label[b] == 2:
                            self.dualvar[b] -= delta

                if deltatype == 1:
                    break
                elif deltatype == 2:
                    self.allowedge[deltaedge] = 1
                    i = self.eu[deltaedge]
                    if self.label[self.inblossom[i]] == 0:
                        i = self.ev[deltaedge]
                    self.queue.push_back(i)
                elif deltatype == 3:
                    self.allowedge[deltaedge] = 1
                    self.queue.push_back(self.eu[deltaedge])
                else:
                    self.expand_blossom(deltablossom, False)

            if not augmented:
                break
            for b in range(nv, 2 * nv):
                if (self.blossomparent[b] == -1 and self.blossombase[b] >= 0
                        and self.label[b] == 1 and self.dualvar[b] == 0):
                    self.expand_blossom(b, True)

    cdef void result(self, vector[int]& out):
        cdef int v
        out.assign(self.nv, -1)
        for v in range(self.nv):
            if self.mate[v] >= 0:
                out[v] = self.endpoint[self.mate[v]]


cdef inline int _wrap(int j, int n):
    return j + n if j < 0 else j


cdef void _reverse(vector[int]& v):
    cdef size_t i = 0, j = v.size()
    cdef int tmp
    while i + 1 < j:
        j -= 1
        tmp = v[i]
        v[i] = v[j]
        v[j] = tmp
        i += 1


def max_weight_matching(int nvertex, edges, bint maxcardinality=False):
    cdef vector[int] eu, ev, out
    cdef vector[i64] ew
    for i, j, w in edges:
        eu.push_back(i)
        ev.push_back(j)
        ew.push_back(w)
    if eu.size() == 0:
        return [-1] * nvertex
    m = _Matcher()
    m.setup(nvertex, eu, ev, ew)
    m.run(maxcardinality)
    m.result(out)
    return [out[v] for v in range(nvertex)]


cdef bint _min_perfect(int n, vector[int]& eu, vector[int]& ev, vector[i64]& ew,
                       vector[int]& mate):
    """Min-weight perfect matching via max-cardinality max-weight on ``top - w``."""
    cdef size_t k
    cdef i64 top = 0
    cdef int v
    if n == 0:
        mate.clear()
        return True
    if eu.size() == 0:
        return False
    for k in range(ew.size()):
        if ew[k] > top:
            top = ew[k]
    top += 1
    cdef vector[i64] flipped = ew
    for k in range(ew.size()):
        flipped[k] = top - ew[k]
    m = _Matcher()
    m.setup(n, eu, ev, flipped)
    m.run(True)
    m.result(mate)
    for v in range(n):
        if mate[v] < 0:
            return False
    return True


def min_weight_perfect_matching(weights):
    W = np.asarray(weights, dtype=np.int64)
    cdef cnp.int64_t[:, :] Wv = W
    cdef int n = W.shape[0]
    cdef int a, b
    cdef vector[int] eu, ev, mate
    cdef vector[i64] ew
    if n == 0:
        return np.zeros(0, dtype=np.int64)
    if n % 2:
        raise ValueError(f"perfect matching needs an even node count, got {n}")
    for a in range(n):
        for b in range(a + 1, n):
            if Wv[a, b] >= 0:
                eu.push_back(a)
                ev.push_back(b)
                ew.push_back(Wv[a, b])
    if not _min_perfect(n, eu, ev, ew, mate):
        raise ValueError("graph has no perfect matching")
    return np.asarray([mate[a] for a in range(n)], dtype=np.int64)


cdef i64 _decode_one(cnp.int64_t[:, :] dist, cnp.int64_t[:] bdist,
                     cnp.int64_t[:] path_ptr, cnp.int64_t[:] path_idx,
                     vector[int]& checks, vector[int]& times,
                     i64 time_weight, int n_rounds, cnp.uint8_t[:] out) except -1:
    cdef int n_c = dist.shape[0]
    cdef int m = checks.size()
    cdef int a, b, size, kind, ca, cb
    cdef i64 w, total = 0, key, q
    cdef vector[int] eu, ev, mate
    cdef vector[i64] ew
    if m == 0:
        return 0
    if bdist.shape[0] > 0 and bdist[0] >= 0:
        kind = 1
        size = 2 * m
    elif m % 2:
        if n_rounds <= 0:
            raise ValueError("odd number of defects on a code without boundary")
        kind = 2
        size = m + 1
    else:
        kind = 0
        size = m
    # upper-triangular row-major order, matching the dense-matrix route
    for a in range(m):
        for b in range(a + 1, m):
            eu.push_back(a)
            ev.push_back(b)
            ew.push_back(dist[checks[a], checks[b]] + time_weight * abs(times[a] - times[b]))
        if kind == 1:
            eu.push_back(a)
            ev.push_back(m + a)
            ew.push_back(bdist[checks[a]])
        elif kind == 2:
            eu.push_back(a)
            ev.push_back(m)
            ew.push_back(time_weight * (n_rounds - 1 - times[a]))
    if kind == 1:
        for a in range(m):
            for b in range(a + 1, m):
                eu.push_back(m + a)
                ev.push_back(m + b)
                ew.push_back(0)
    if not _min_perfect(size, eu, ev, ew, mate):
        raise ValueError("defect graph has no perfect matching")
    for a in range(m):
        b = mate[a]
        if b < m and b < a:
            continue
        if b < m:
            ca = checks[a]
            cb = checks[b]
            total += dist[ca, cb] + time_weight * abs(times[a] - times[b])
            if ca == cb:
                continue
            key = ca * n_c + cb
        elif kind == 1:
            total += bdist[checks[a]]
            key = n_c * n_c + checks[a]
        else:
            total += time_weight * (n_rounds - 1 - times[a])
            continue
        for q in range(path_ptr[key], path_ptr[key + 1]):
            out[path_idx[q]] ^= 1
    return total


def decode_batch(dist, bdist, path_ptr, path_idx, syndromes, int n_qubits):
    cdef cnp.uint8_t[:, :] S = np.ascontiguousarray(syndromes, dtype=np.uint8)
    cdef int B = S.shape[0], n_c = S.shape[1], i, c
    out = np.zeros((B, n_qubits), dtype=np.uint8)
    weights = np.zeros(B, dtype=np.int64)
    cdef cnp.uint8_t[:, :] O = out
    cdef cnp.int64_t[:] Wt = weights
    cdef cnp.int64_t[:, :] D = np.ascontiguousarray(dist, dtype=np.int64)
    cdef cnp.int64_t[:] BD = np.ascontiguousarray(bdist, dtype=np.int64)
    cdef cnp.int64_t[:] PP = np.ascontiguousarray(path_ptr, dtype=np.int64)
    cdef cnp.int64_t[:] PI = np.ascontiguousarray(path_idx, dtype=np.int64)
    cdef vector[int] checks, times
    for i in range(B):
        checks.clear()
        times.clear()
        for c in range(n_c):
            if S[i, c]:
                checks.push_back(c)
                times.push_back(0)
        Wt[i] = _decode_one(D, BD, PP, PI, checks, times, 0, 0, O[i])
    return out, weights


def decode_spacetime_batch(dist, bdist, path_ptr, path_idx, events, int n_qubits,
                           i64 time_weight):
    cdef cnp.uint8_t[:, :, :] E = np.ascontiguousarray(events, dtype=np.uint8)
    cdef int B = E.shape[0], T = E.shape[1], n_c = E.shape[2], i, t, c
    out = np.zeros((B, n_qubits), dtype=np.uint8)
    weights = np.zeros(B, dtype=np.int64)
    cdef cnp.uint8_t[:, :] O = out
    cdef cnp.int64_t[:] Wt = weights
    cdef cnp.int64_t[:, :] D = np.ascontiguousarray(dist, dtype=np.int64)
    cdef cnp.int64_t[:] BD = np.ascontiguousarray(bdist, dtype=np.int64)
    cdef cnp.int64_t[:] PP = np.ascontiguousarray(path_ptr, dtype=np.int64)
    cdef cnp.int64_t[:] PI = np.ascontiguousarray(path_idx, dtype=np.int64)
    cdef vector[int] checks, times
    for i in range(B):
        checks.clear()
        times.clear()
        for t in range(T):
            for c in range(n_c):
                if E[i, t, c]:
                    checks.push_back(c)
                    times.push_back(t)
        Wt[i] = _decode_one(D, BD, PP, PI, checks, times, time_weight, T, O[i])
    return out, weights
