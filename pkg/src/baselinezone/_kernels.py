"""Compiled inner loops of the convex-polygon optimizer.

Conventions shared by every kernel here:

* candidate vertices are sorted lexicographically by ``(x, y)``, so comparing
  candidate indices compares positions in that order;
* "between ``a`` and ``c``" means strictly between in lexicographic order, which
  is the x-order after an infinitesimal shear and removes vertical special cases;
* ``below[a, c]`` / ``on[a, c]`` hold the weight (and count) of sample points
  between ``a`` and ``c`` that lie strictly right of / exactly on the directed
  line ``a -> c``.

From those four tables the weight of any closed triangle of candidates is O(1).
"""

import numpy as np
from numba import njit

KIND_EMPTY = 0
KIND_POINT = 1
KIND_SEGMENT = 2
KIND_POLYGON = 3


@njit(cache=True)
def _cross(ax, ay, bx, by, cx, cy):
    return (bx - ax) * (cy - ay) - (by - ay) * (cx - ax)


@njit(cache=True)
def pair_tables_generic(px, py, w, cand, eps):
    """Below/on tables by direct counting; ``px, py, w`` are all points in lex order."""
    V = cand.shape[0]
    bw = np.zeros((V, V))
    ow = np.zeros((V, V))
    bc = np.zeros((V, V), dtype=np.int64)
    oc = np.zeros((V, V), dtype=np.int64)
    ops = 0
    for a in range(V):
        ia = cand[a]
        ax, ay = px[ia], py[ia]
        for c in range(a + 1, V):
            ic = cand[c]
            cx, cy = px[ic], py[ic]
            sbw = 0.0
            sow = 0.0
            sbc = 0
            soc = 0
            for q in range(ia + 1, ic):
                o = _cross(ax, ay, cx, cy, px[q], py[q])
                if o < -eps:
                    sbw += w[q]
                    sbc += 1
                elif o <= eps:
                    sow += w[q]
                    soc += 1
            ops += ic - ia
            bw[a, c] = sbw
            bc[a, c] = sbc
            ow[a, c] = sow
            oc[a, c] = soc
    return bw, bc, ow, oc, ops


@njit(cache=True)
def pair_tables_lattice(ck, cl, gw, gc):
    """Same tables for points on an integer grid, via column prefix sums.

    ``ck, cl`` are candidate grid indices in lex order; ``gw, gc`` are the
    ``m x m`` weight and count grids (zero where there is no sample point).
    """
    m = gw.shape[0]
    pw = np.zeros((m, m + 1))
    pc = np.zeros((m, m + 1), dtype=np.int64)
    for u in range(m):
        for l in range(m):
            pw[u, l + 1] = pw[u, l] + gw[u, l]
            pc[u, l + 1] = pc[u, l] + gc[u, l]
    V = ck.shape[0]
    bw = np.zeros((V, V))
    ow = np.zeros((V, V))
    bc = np.zeros((V, V), dtype=np.int64)
    oc = np.zeros((V, V), dtype=np.int64)
    ops = 0
    for a in range(V):
        ka, la = ck[a], cl[a]
        for c in range(a + 1, V):
            kc, lc = ck[c], cl[c]
            if ka == kc:
                ow[a, c] = pw[ka, lc] - pw[ka, la + 1]
                oc[a, c] = pc[ka, lc] - pc[ka, la + 1]
                continue
            dk = kc - ka
            dl = lc - la
            # column kc: points under c are right of a -> c
            sbw = pw[kc, lc]
            sbc = pc[kc, lc]
            sow = 0.0
            soc = 0
            for u in range(ka + 1, kc):
                t = dl * (u - ka)
                top = la - ((-t) // dk) - 1  # largest row strictly below the line
                if top >= 0:
                    if top > m - 1:
                        top = m - 1
                    sbw += pw[u, top + 1]
                    sbc += pc[u, top + 1]
                if t % dk == 0:
                    row = la + t // dk
                    if 0 <= row < m:
                        sow += gw[u, row]
                        soc += gc[u, row]
            ops += dk
            bw[a, c] = sbw
            bc[a, c] = sbc
            ow[a, c] = sow
            oc[a, c] = soc
    return bw, bc, ow, oc, ops


@njit(cache=True)
def pack_tables(bw, bc, ow, oc):
    V = bw.shape[0]
    tab = np.empty((V, V, 4))
    for a in range(V):
        for c in range(V):
            tab[a, c, 0] = bw[a, c]
            tab[a, c, 1] = ow[a, c]
            tab[a, c, 2] = bc[a, c]
            tab[a, c, 3] = oc[a, c]
    return tab


@njit(cache=True)
def closed_triangle(p1, p2, p3, px, py, w, cnt, tab, eps):
    """Weight and count of sample points in the closed triangle of candidates.

    Requires ``p1 < p2 < p3`` (lex order); ``tab`` comes from :func:`pack_tables`.
    """
    o = _cross(px[p1], py[p1], px[p3], py[p3], px[p2], py[p2])
    if o > eps:  # p2 above the long edge
        t12 = tab[p1, p2]
        t23 = tab[p2, p3]
        t13 = tab[p1, p3]
        val = t12[0] + t23[0] - t13[0] + t12[1] + t23[1] + w[p1] + w[p2] + w[p3]
        c = t12[2] + t23[2] - t13[2] + t12[3] + t23[3] + cnt[p1] + cnt[p2] + cnt[p3]
    elif o < -eps:  # p2 below the long edge
        t12 = tab[p1, p2]
        t23 = tab[p2, p3]
        t13 = tab[p1, p3]
        val = t13[0] - t12[0] - t23[0] + t13[1] + w[p1] + w[p3]
        c = t13[2] - t12[2] - t23[2] + t13[3] + cnt[p1] + cnt[p3]
    else:  # degenerate: the closed segment p1 p3
        t13 = tab[p1, p3]
        val = w[p1] + t13[1] + w[p3]
        c = cnt[p1] + t13[3] + cnt[p3]
    return val, c


@njit(cache=True)
def _better(v1, c1, v2, c2, tol):
    if v1 < v2 - tol:
        return True
    if v1 <= v2 + tol and c1 < c2:
        return True
    return False


@njit(cache=True)
def _fan_order(b, px, py, eps):
    """Candidates after ``b`` sorted counterclockwise around it, nearest first on a ray."""
    V = px.shape[0]
    r = V - b - 1
    ang = np.empty(r)
    for t in range(r):
        q = b + 1 + t
        ang[t] = np.arctan2(py[q] - py[b], px[q] - px[b])
    order = np.argsort(ang, kind="mergesort")
    fan = np.empty(r, dtype=np.int64)
    for t in range(r):
        fan[t] = b + 1 + order[t]
    # regroup exact rays and order each ray by distance
    gs = 0
    for t in range(1, r + 1):
        split = t == r
        if not split:
            g0 = fan[gs]
            q = fan[t]
            o = _cross(px[b], py[b], px[g0], py[g0], px[q], py[q])
            split = o > eps or o < -eps
        if split:
            if t - gs > 1:
                seg = fan[gs:t].copy()
                d = np.empty(t - gs)
                for u in range(t - gs):
                    dx = px[seg[u]] - px[b]
                    dy = py[seg[u]] - py[b]
                    d[u] = dx * dx + dy * dy
                so = np.argsort(d, kind="mergesort")
                for u in range(t - gs):
                    fan[gs + u] = seg[so[u]]
            gs = t
    return fan


@njit(cache=True)
def _angular_rows(px, py):
    """For each candidate, the others sorted by direction angle as seen from it."""
    V = px.shape[0]
    rows = np.empty((V, max(V - 1, 1)), dtype=np.int64)
    angs = np.empty((V, max(V - 1, 1)))
    a = np.empty(max(V - 1, 1))
    idx = np.empty(max(V - 1, 1), dtype=np.int64)
    for j in range(V):
        t = 0
        for c in range(V):
            if c != j:
                a[t] = np.arctan2(py[c] - py[j], px[c] - px[j])
                idx[t] = c
                t += 1
        o = np.argsort(a[: V - 1], kind="mergesort")
        for t in range(V - 1):
            rows[j, t] = idx[o[t]]
            angs[j, t] = a[o[t]]
    return rows, angs


@njit(cache=True)
def _rotation_start(angs_row, n, theta, tol):
    while theta > np.pi:
        theta -= 2.0 * np.pi
    while theta <= -np.pi:
        theta += 2.0 * np.pi
    s = np.searchsorted(angs_row[:n], theta - tol)
    if theta - tol <= -np.pi:
        # the window wraps below -pi: begin with the tail of the row
        s2 = np.searchsorted(angs_row[:n], theta - tol + 2.0 * np.pi)
        return s2 % n if n > 0 else 0
    return s % n if n > 0 else 0


@njit(cache=True)
def fan_dp(px, py, w, cnt, tab, eps, tol, base_only):
    """Minimum-weight closed convex polygon with vertices among the candidates.

    ``px, py, w, cnt`` describe the candidates (lex order); ``w``/``cnt`` are the
    weight and multiplicity of the sample point at each candidate (``cnt`` as
    float so it shares arithmetic with the packed tables).  Returns
    ``(value, count, kind, base, chain, ops)`` where ``chain`` lists the
    polygon's candidate indices counterclockwise starting at ``base``.

    With ``base_only >= 0`` only polygons whose leftmost vertex is that
    candidate are considered and the empty set is not a candidate.

    For a fixed middle vertex ``j`` both the incoming edges ``i -> j`` and the
    outgoing edges ``j -> k`` point into the half-plane left of ``base -> j``,
    so the turn test at ``j`` is monotone in angle and a two-pointer sweep over
    both angular orders finds every admissible minimum in linear time.
    """
    V = px.shape[0]
    best_val = 0.0 if base_only < 0 else np.inf
    best_cnt = 0
    best_kind = KIND_EMPTY
    best_base = -1
    best_chain = np.empty(0, dtype=np.int64)
    ops = 0
    ang_tol = 1e-9

    rows, angs = _angular_rows(px, py)
    nrow = V - 1

    M = np.empty((V, V))
    MC = np.empty((V, V))
    back = np.empty((V, V), dtype=np.int64)
    s1w = np.empty(V)
    s1c = np.empty(V)
    pos = np.empty(V, dtype=np.int64)
    in_pos = np.empty(V, dtype=np.int64)
    out_pos = np.empty(V, dtype=np.int64)

    for b in range(V):
        if base_only >= 0 and b != base_only:
            continue
        bx, by = px[b], py[b]
        # the single point {b}
        bv = w[b]
        bcnt = cnt[b]
        bkind = KIND_POINT
        bj = -1
        bk = -1
        r = V - b - 1
        fan = np.empty(0, dtype=np.int64)
        if r > 0:
            fan = _fan_order(b, px, py, eps)
            for c in range(V):
                pos[c] = -1
            pos[b] = -2
            for t in range(r):
                pos[fan[t]] = t
            for j in range(r):
                f = fan[j]
                s1w[j] = w[b] + tab[b, f, 1] + w[f]
                s1c[j] = cnt[b] + tab[b, f, 3] + cnt[f]
                if _better(s1w[j], s1c[j], bv, bcnt, tol):
                    bv = s1w[j]
                    bcnt = s1c[j]
                    bkind = KIND_SEGMENT
                    bj = j
            for j in range(r - 1):
                fj = fan[j]
                theta = np.arctan2(py[fj] - by, px[fj] - bx)
                # one sweep counterclockwise from direction base -> j: outgoing
                # edges fill the first half turn, reversed incoming edges the
                # second; -1 stands for the base as the previous vertex
                nin = 0
                nout = 0
                st = _rotation_start(angs[fj], nrow, theta, ang_tol)
                row = rows[fj]
                for u in range(st, nrow):
                    c = row[u]
                    pc_ = pos[c]
                    if pc_ > j:
                        out_pos[nout] = pc_
                        nout += 1
                    elif pc_ == -2:
                        in_pos[nin] = -1
                        nin += 1
                    elif pc_ >= 0 and pc_ < j:
                        in_pos[nin] = pc_
                        nin += 1
                for u in range(st):
                    c = row[u]
                    pc_ = pos[c]
                    if pc_ > j:
                        out_pos[nout] = pc_
                        nout += 1
                    elif pc_ == -2:
                        in_pos[nin] = -1
                        nin += 1
                    elif pc_ >= 0 and pc_ < j:
                        in_pos[nin] = pc_
                        nin += 1
                ops += nrow + nin + nout
                ptr = 0
                cur_v = np.inf
                cur_c = 0
                cur_id = -2
                for t in range(nout):
                    k = out_pos[t]
                    fk = fan[k]
                    dox = px[fk] - px[fj]
                    doy = py[fk] - py[fj]
                    while ptr < nin:
                        ii = in_pos[ptr]
                        if ii < 0:
                            dix = px[fj] - bx
                            diy = py[fj] - by
                            iv = s1w[j]
                            ic = s1c[j]
                        else:
                            fi = fan[ii]
                            dix = px[fj] - px[fi]
                            diy = py[fj] - py[fi]
                            iv = M[ii, j]
                            ic = MC[ii, j]
                        if dix * doy - diy * dox < -eps:
                            break
                        if cur_id == -2 or _better(iv, ic, cur_v, cur_c, tol):
                            cur_v = iv
                            cur_c = ic
                            cur_id = ii
                        ptr += 1
                    # the base is always admissible, so cur_id is set here
                    if fj < fk:
                        tv, tc = closed_triangle(b, fj, fk, px, py, w, cnt, tab, eps)
                    else:
                        tv, tc = closed_triangle(b, fk, fj, px, py, w, cnt, tab, eps)
                    val = cur_v + tv - s1w[j]
                    c2 = cur_c + tc - s1c[j]
                    M[j, k] = val
                    MC[j, k] = c2
                    back[j, k] = cur_id
                    if _better(val, c2, bv, bcnt, tol):
                        bv = val
                        bcnt = c2
                        bkind = KIND_POLYGON
                        bj = j
                        bk = k
        if best_base < 0 and base_only >= 0 or _better(bv, bcnt, best_val, best_cnt, tol):
            best_val = bv
            best_cnt = bcnt
            best_kind = bkind
            best_base = b
            if bkind == KIND_POINT:
                best_chain = np.array([b], dtype=np.int64)
            elif bkind == KIND_SEGMENT:
                best_chain = np.array([b, fan[bj]], dtype=np.int64)
            else:
                rev = [fan[bk], fan[bj]]
                i = back[bj, bk]
                cj = bj
                while i != -1:
                    rev.append(fan[i])
                    nxt = back[i, cj]
                    cj = i
                    i = nxt
                rev.append(b)
                best_chain = np.empty(len(rev), dtype=np.int64)
                for t in range(len(rev)):
                    best_chain[t] = rev[len(rev) - 1 - t]
    return best_val, best_cnt, best_kind, best_base, best_chain, ops
