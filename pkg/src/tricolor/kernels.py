"""Array kernels for subsumption and unification of small TDAGs.

TDAGs are packed into a batch of padded arrays; node slots are numbered in
breadth-first order from the root, so slot 0 is the root and every other
node is discovered from a node in an earlier slot.

    tgt   int32[N, M, F]   target slot of the arc with feature f, or -1
    acol  int8[N, M, F]    color of that arc (0 green, 1 yellow, 2 red)
    ncol  int8[N, M]       node color
    lab   int32[N, M]      interned atom label, or -1
    nn    int32[N]         node count of each TDAG

Single comparisons go through the same kernels on a two-item batch, so the
code path checked by the exhaustive tests is the one the library uses.

Every kernel is written in the subset of Python that numba compiles.  With
``TRICOLOR_DISABLE_JIT=1`` (or numba missing) the identical functions run as
plain Python on numpy arrays.
"""

import os

import numpy as np

JIT_DISABLED = os.environ.get("TRICOLOR_DISABLE_JIT", "").strip().lower() in ("1", "true", "yes")

try:
    import numba
except ImportError:  # pragma: no cover
    numba = None

USING_JIT = numba is not None and not JIT_DISABLED

UNIFIED = 0
INDEFINITE = 1
LABEL_CLASH = 2
CYCLE = 3


def _jit(fn):
    if USING_JIT:
        return numba.njit(cache=True, nogil=True)(fn)
    return fn


def _subsumes_pair(tgt_a, acol_a, ncol_a, lab_a, a, na, tgt_b, acol_b, ncol_b, lab_b, b, h):
    # item a of the first batch against item b of the second; h: int32 scratch >= na
    nf = tgt_a.shape[2]
    for v in range(na):
        h[v] = -1
    h[0] = 0
    if ncol_a[a, 0] > ncol_b[b, 0]:
        return False
    if lab_a[a, 0] >= 0 and lab_a[a, 0] != lab_b[b, 0]:
        return False
    for v in range(na):
        hv = h[v]
        for f in range(nf):
            t = tgt_a[a, v, f]
            if t < 0:
                continue
            w = tgt_b[b, hv, f]
            if w < 0:
                return False
            if acol_a[a, v, f] > acol_b[b, hv, f]:
                return False
            if h[t] < 0:
                if ncol_a[a, t] > ncol_b[b, w]:
                    return False
                if lab_a[a, t] >= 0 and lab_a[a, t] != lab_b[b, w]:
                    return False
                h[t] = w
            elif h[t] != w:
                return False
    return True


subsumes_pair = _jit(_subsumes_pair)


def _subsumes_at(tgt, acol, ncol, lab, nn, a, b, h):
    return subsumes_pair(tgt, acol, ncol, lab, a, nn[a], tgt, acol, ncol, lab, b, h)


subsumes_at = _jit(_subsumes_at)


def _find(parent, x):
    root = x
    while parent[root] != root:
        root = parent[root]
    while parent[x] != root:
        nxt = parent[x]
        parent[x] = root
        x = nxt
    return root


_find = _jit(_find)


def make_workspace(max_nodes, nf):
    """Scratch arrays for :func:`unify_at` over two TDAGs of up to ``max_nodes`` each."""
    n = 2 * max_nodes
    return (
        np.empty(n, dtype=np.int32),          # 0 parent, then class representative
        np.empty((n, nf), dtype=np.int32),    # 1 class feature table
        np.empty((n, nf), dtype=np.int8),     # 2 class arc colors
        np.empty(n, dtype=np.int8),           # 3 class node color
        np.empty(n, dtype=np.int32),          # 4 class label
        np.empty(n, dtype=np.int32),          # 5 clashing label
        np.empty(n * nf + 1, dtype=np.int32),  # 6 pending pairs, left
        np.empty(n * nf + 1, dtype=np.int32),  # 7 pending pairs, right
        np.empty(n, dtype=np.int8),           # 8 dfs state
        np.empty(n, dtype=np.int32),          # 9 dfs node stack
        np.empty(n, dtype=np.int32),          # 10 dfs feature cursor
        np.empty(n, dtype=np.int32),          # 11 quotient slot of each class
    )


make_workspace = _jit(make_workspace)


def _unify_at(tgt, acol, ncol, lab, nn, a, b, ws):
    """Merge TDAGs ``a`` and ``b`` at their roots, writing classes into ``ws``.

    Slots ``0..na-1`` of the workspace hold a's nodes and ``na..na+nb-1``
    hold b's.  On return ``ws[0]`` maps every slot to its class
    representative (the smallest slot in the class) and the other tables are
    valid at representatives.  Returns a status code.
    """
    parent, ftab, fcol, mcol, mlab, clash = ws[0], ws[1], ws[2], ws[3], ws[4], ws[5]
    sx, sy, state, dnode, dfeat = ws[6], ws[7], ws[8], ws[9], ws[10]
    na = nn[a]
    nb = nn[b]
    nf = tgt.shape[2]
    n = na + nb
    for v in range(na):
        parent[v] = v
        mcol[v] = ncol[a, v]
        mlab[v] = lab[a, v]
        clash[v] = -1
        for f in range(nf):
            ftab[v, f] = tgt[a, v, f]
            fcol[v, f] = acol[a, v, f]
    for v in range(nb):
        s = na + v
        parent[s] = s
        mcol[s] = ncol[b, v]
        mlab[s] = lab[b, v]
        clash[s] = -1
        for f in range(nf):
            t = tgt[b, v, f]
            ftab[s, f] = t + na if t >= 0 else -1
            fcol[s, f] = acol[b, v, f]

    sx[0] = 0
    sy[0] = na
    top = 1
    while top > 0:
        top -= 1
        rx = _find(parent, sx[top])
        ry = _find(parent, sy[top])
        if rx == ry:
            continue
        if ry < rx:
            rx, ry = ry, rx
        parent[ry] = rx
        if mcol[ry] > mcol[rx]:
            mcol[rx] = mcol[ry]
        if mlab[rx] < 0:
            mlab[rx] = mlab[ry]
        elif mlab[ry] >= 0 and mlab[ry] != mlab[rx] and clash[rx] < 0:
            clash[rx] = mlab[ry]
        if clash[rx] < 0 and clash[ry] >= 0:
            clash[rx] = clash[ry]
        for f in range(nf):
            ty = ftab[ry, f]
            if ty < 0:
                continue
            tx = ftab[rx, f]
            if tx < 0:
                ftab[rx, f] = ty
                fcol[rx, f] = fcol[ry, f]
            else:
                if fcol[ry, f] > fcol[rx, f]:
                    fcol[rx, f] = fcol[ry, f]
                sx[top] = tx
                sy[top] = ty
                top += 1

    for v in range(n):
        parent[v] = _find(parent, v)

    status = UNIFIED
    for v in range(n):
        if parent[v] == v and clash[v] >= 0:
            if mcol[v] == 0:
                if status == UNIFIED:
                    status = INDEFINITE
            else:
                status = LABEL_CLASH
    if status == LABEL_CLASH:
        return status

    # cycle check on the quotient graph
    for v in range(n):
        state[v] = 0
    dnode[0] = 0
    dfeat[0] = 0
    state[0] = 1
    depth = 1
    while depth > 0:
        u = dnode[depth - 1]
        f = dfeat[depth - 1]
        if f >= nf:
            state[u] = 2
            depth -= 1
            continue
        dfeat[depth - 1] = f + 1
        t = ftab[u, f]
        if t < 0:
            continue
        t = parent[t]
        if state[t] == 1:
            return CYCLE
        if state[t] == 0:
            state[t] = 1
            dnode[depth] = t
            dfeat[depth] = 0
            depth += 1
    return status


unify_at = _jit(_unify_at)


def _subsumption_rows(tgt, acol, ncol, lab, nn, rows, out):
    """out[i, j] = subsumes(rows[i], j) for every j in the batch."""
    h = np.empty(tgt.shape[1], dtype=np.int32)
    for i in range(rows.shape[0]):
        for j in range(nn.shape[0]):
            out[i, j] = subsumes_at(tgt, acol, ncol, lab, nn, rows[i], j, h)


subsumption_rows = _jit(_subsumption_rows)


def _subsumption_bits(tgt, acol, ncol, lab, nn, out):
    """Whole relation as a bit matrix: bit j of row i is set iff i subsumes j."""
    h = np.empty(tgt.shape[1], dtype=np.int32)
    n = nn.shape[0]
    one = np.uint64(1)
    for i in range(n):
        for w in range(out.shape[1]):
            out[i, w] = 0
        for j in range(n):
            if subsumes_at(tgt, acol, ncol, lab, nn, i, j, h):
                out[i, j >> 6] |= one << np.uint64(j & 63)


subsumption_bits = _jit(_subsumption_bits)


def _quotient(ws, nf, qtgt, qacol, qncol, qlab, q):
    """Write the class graph left by :func:`unify_at` into item ``q`` of a batch.

    Classes are renumbered breadth-first from the root class with features
    in index order, which is the same canonical numbering ``encode`` uses.
    Returns the node count.
    """
    parent, ftab, fcol, mcol, mlab = ws[0], ws[1], ws[2], ws[3], ws[4]
    queue, slot = ws[9], ws[11]
    n = parent.shape[0]
    for v in range(n):
        slot[v] = -1
    slot[0] = 0
    queue[0] = 0
    head = 0
    tail = 1
    while head < tail:
        r = queue[head]
        head += 1
        for f in range(nf):
            t = ftab[r, f]
            if t >= 0:
                t = parent[t]
                if slot[t] < 0:
                    slot[t] = tail
                    queue[tail] = t
                    tail += 1
    m = qtgt.shape[1]
    for i in range(m):
        qncol[q, i] = 0
        qlab[q, i] = -1
        for f in range(nf):
            qtgt[q, i, f] = -1
            qacol[q, i, f] = 0
    for i in range(tail):
        r = queue[i]
        qncol[q, i] = mcol[r]
        qlab[q, i] = mlab[r]
        for f in range(nf):
            t = ftab[r, f]
            if t >= 0:
                qtgt[q, i, f] = slot[parent[t]]
                qacol[q, i, f] = fcol[r, f]
    return tail


quotient = _jit(_quotient)


def _shape_key(tgt, acol, ncol, lab, i, n, max_nodes, n_labels):
    """Injective integer key of item ``i``, or -1 if it exceeds the key's bounds.

    Mixed radix over node count, node colors, labels, arc targets and arc
    colors.  Callers must check that the radix product fits in 63 bits.
    """
    if n > max_nodes:
        return -1
    nf = tgt.shape[2]
    k = np.int64(n)
    for v in range(n):
        if lab[i, v] >= n_labels:
            return -1
        k = k * 3 + ncol[i, v]
        k = k * (n_labels + 1) + lab[i, v] + 1
        for f in range(nf):
            k = k * (max_nodes + 1) + tgt[i, v, f] + 1
            k = k * 3 + acol[i, v, f]
    return k


shape_key = _jit(_shape_key)


def _batch_keys(tgt, acol, ncol, lab, nn, max_nodes, n_labels, out):
    for i in range(nn.shape[0]):
        out[i] = shape_key(tgt, acol, ncol, lab, i, nn[i], max_nodes, n_labels)


batch_keys = _jit(_batch_keys)


def _colors_well_formed(tgt, acol, ncol, i, n, seen, queue):
    """Conditions W1 to W5 for item ``i`` (W6 holds by construction)."""
    nf = tgt.shape[2]
    if ncol[i, 0] != 2:
        return False
    for v in range(n):
        for f in range(nf):
            t = tgt[i, v, f]
            if t >= 0 and acol[i, v, f] > 0:
                if ncol[i, v] < acol[i, v, f] or ncol[i, t] < acol[i, v, f]:
                    return False
    for level in range(1, 3):
        for v in range(n):
            seen[v] = 0
        seen[0] = 1
        queue[0] = 0
        head = 0
        tail = 1
        while head < tail:
            v = queue[head]
            head += 1
            for f in range(nf):
                t = tgt[i, v, f]
                if t >= 0 and seen[t] == 0 and acol[i, v, f] >= level and ncol[i, t] >= level:
                    seen[t] = 1
                    queue[tail] = t
                    tail += 1
        for v in range(n):
            if ncol[i, v] == level and seen[v] == 0:
                return False
    return True


colors_well_formed = _jit(_colors_well_formed)


def _bit(rows, i, j):
    return (rows[i, j >> 6] >> np.uint64(j & 63)) & np.uint64(1) != 0


_bit = _jit(_bit)


def _bits_to_lists(rows, n, indptr, indices):
    """CSR form of a bit relation: ``indices[indptr[i]:indptr[i+1]]`` lists row i."""
    k = 0
    indptr[0] = 0
    for i in range(n):
        for j in range(n):
            if _bit(rows, i, j):
                indices[k] = j
                k += 1
        indptr[i + 1] = k


bits_to_lists = _jit(_bits_to_lists)


# failure codes reported by check_joins
JOIN_OK = 0
JOIN_NOT_UPPER = 1
JOIN_NOT_LEAST = 2
JOIN_MISSED_BOUND = 3
JOIN_ILL_FORMED = 4
JOIN_COMPARABLE_MISMATCH = 5


def _check_joins(tgt, acol, ncol, lab, nn, keys, key_pos, rows, indptr, indices,
                 max_nodes, n_labels, a_lo, a_hi, counts, first_fail):
    """Check unification as least upper bound for pairs a <= b with a in [a_lo, a_hi).

    ``keys`` is sorted with ``key_pos`` giving the batch item of each key;
    ``rows`` is the subsumption bit matrix of the batch and ``indptr``/
    ``indices`` its CSR form (upper bounds of each item).  ``counts`` gains
    the status tally (4 slots) followed by the number of failed pairs; the
    first failure is written to ``first_fail`` as (a, b, code).
    """
    n_items = nn.shape[0]
    m = tgt.shape[1]
    nf = tgt.shape[2]
    ws = make_workspace(m, nf)
    qm = 2 * m
    qtgt = np.empty((1, qm, nf), dtype=tgt.dtype)
    qacol = np.empty((1, qm, nf), dtype=acol.dtype)
    qncol = np.empty((1, qm), dtype=ncol.dtype)
    qlab = np.empty((1, qm), dtype=lab.dtype)
    h = np.empty(qm, dtype=np.int32)
    seen = np.empty(qm, dtype=np.int8)
    queue = np.empty(qm, dtype=np.int32)
    for a in range(a_lo, a_hi):
        for b in range(a, n_items):
            st = unify_at(tgt, acol, ncol, lab, nn, a, b, ws)
            counts[st] += 1
            ab = _bit(rows, a, b)
            ba = _bit(rows, b, a)
            # iterate over the shorter upper-bound list, probe the other row
            x, y = a, b
            if indptr[b + 1] - indptr[b] < indptr[a + 1] - indptr[a]:
                x, y = b, a
            code = JOIN_OK
            if st != UNIFIED:
                if ab or ba:
                    code = JOIN_MISSED_BOUND
                else:
                    for k in range(indptr[x], indptr[x + 1]):
                        if _bit(rows, y, indices[k]):
                            code = JOIN_MISSED_BOUND
                            break
            else:
                qn = quotient(ws, nf, qtgt, qacol, qncol, qlab, 0)
                key = shape_key(qtgt, qacol, qncol, qlab, 0, qn, max_nodes, n_labels)
                iu = -1
                if key >= 0:
                    p = np.searchsorted(keys, key)
                    if p < keys.shape[0] and keys[p] == key:
                        iu = key_pos[p]
                if iu >= 0:
                    if not (_bit(rows, a, iu) and _bit(rows, b, iu)):
                        code = JOIN_NOT_UPPER
                    elif ab and iu != b or ba and iu != a:
                        code = JOIN_COMPARABLE_MISMATCH
                    elif not (ab or ba):
                        for k in range(indptr[x], indptr[x + 1]):
                            v = indices[k]
                            if _bit(rows, y, v) and not _bit(rows, iu, v):
                                code = JOIN_NOT_LEAST
                                break
                else:
                    if not colors_well_formed(qtgt, qacol, qncol, 0, qn, seen, queue):
                        code = JOIN_ILL_FORMED
                    elif not (subsumes_pair(tgt, acol, ncol, lab, a, nn[a], qtgt, qacol, qncol, qlab, 0, h)
                              and subsumes_pair(tgt, acol, ncol, lab, b, nn[b], qtgt, qacol, qncol, qlab, 0, h)):
                        code = JOIN_NOT_UPPER
                    elif ab or ba:
                        code = JOIN_COMPARABLE_MISMATCH
                    else:
                        for k in range(indptr[x], indptr[x + 1]):
                            v = indices[k]
                            if _bit(rows, y, v) and not subsumes_pair(
                                    qtgt, qacol, qncol, qlab, 0, qn, tgt, acol, ncol, lab, v, h):
                                code = JOIN_NOT_LEAST
                                break
            if code != JOIN_OK:
                if counts[4] == 0:
                    first_fail[0] = a
                    first_fail[1] = b
                    first_fail[2] = code
                counts[4] += 1


check_joins = _jit(_check_joins)


def _order_law_violations(rows, n, indptr, indices, out):
    """Tally reflexivity, antisymmetry and transitivity failures of a bit relation.

    ``out`` receives (non-reflexive items, mutual pairs i < j, broken
    transitive pairs i -> j where row j is not contained in row i).
    """
    w = rows.shape[1]
    for i in range(n):
        if not _bit(rows, i, i):
            out[0] += 1
        for k in range(indptr[i], indptr[i + 1]):
            j = indices[k]
            if j > i and _bit(rows, j, i):
                out[1] += 1
            if j != i:
                for q in range(w):
                    if rows[j, q] & ~rows[i, q]:
                        out[2] += 1
                        break


order_law_violations = _jit(_order_law_violations)


# -- constraint partition over interned bitsets ----------------------------

def _partition_masks(s, vt, t, out):
    """C0, C-, C+, Cnew masks for one (source, target) pair.

    ``s`` and ``t`` are the constraint bitsets, ``vt`` the target's
    violation set (atom bindings it contradicts).
    """
    for q in range(s.shape[0]):
        out[0, q] = s[q] & t[q]
        out[1, q] = s[q] & ~t[q] & vt[q]
        out[2, q] = s[q] & ~t[q] & ~vt[q]
        out[3, q] = t[q] & ~s[q]


partition_masks = _jit(_partition_masks)

VERDICT_FULL = 0
VERDICT_UNDER = 1
VERDICT_OVER = 2
VERDICT_INCONSISTENT = 3
VERDICT_MIXED = 4


def _verdict_code(minus, plus, new):
    if minus:
        return VERDICT_INCONSISTENT
    if plus and new:
        return VERDICT_MIXED
    if plus:
        return VERDICT_UNDER
    if new:
        return VERDICT_OVER
    return VERDICT_FULL


verdict_code = _jit(_verdict_code)


def _partition_laws(S, V, src_lo, src_hi, verdicts, failures, first_fail):
    """Check the partition laws for every ordered pair with source in [src_lo, src_hi).

    ``verdicts`` gains a tally per verdict code.  ``failures`` gains
    (overlap, union, target-reconstruction, self-classification) counts;
    the first failing pair is written to ``first_fail`` as (s, t, law).
    """
    n = S.shape[0]
    w = S.shape[1]
    for i in range(src_lo, src_hi):
        for j in range(n):
            minus = False
            plus = False
            new = False
            law = -1
            for q in range(w):
                s = S[i, q]
                t = S[j, q]
                vt = V[j, q]
                c0 = s & t
                cm = s & ~t & vt
                cp = s & ~t & ~vt
                cn = t & ~s
                minus |= cm != 0
                plus |= cp != 0
                new |= cn != 0
                if (c0 & cm) | (c0 & cp) | (cm & cp):
                    law = 0
                elif (c0 | cm | cp) != s:
                    law = 1
                elif (c0 | cn) != t:
                    law = 2
            code = verdict_code(minus, plus, new)
            verdicts[code] += 1
            if i == j and code != VERDICT_FULL and law < 0:
                law = 3
            if law >= 0:
                if first_fail[0] < 0:
                    first_fail[0] = i
                    first_fail[1] = j
                    first_fail[2] = law
                failures[law] += 1


partition_laws = _jit(_partition_laws)
