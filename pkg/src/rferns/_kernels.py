"""Compiled inner loops.

Every kernel processes a contiguous range of ferns (or objects) and writes
into preallocated per-fern (or per-object) slots, so results never depend
on how ranges are distributed over threads.  Floating-point reductions
across ferns happen afterwards, serially, in fern-index order.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor

import numpy as np
from numba import njit

from ._random import (
    TAG_REGULAR,
    TAG_SHADOW,
    TAG_TRUNK,
    bag_counts,
    child,
    fern_seed,
    next_below,
    next_u64,
    pair_seed,
    shuffle_inplace,
)

SHADOW_OOB_SHUFFLED = 0
SHADOW_OOB_ORIGINAL = 1
TIE_RTOL = 1e-10


def run_chunks(fn, n_items: int, workers: int) -> None:
    """Call ``fn(start, stop)`` over a partition of ``range(n_items)``."""
    if n_items == 0:
        return
    if workers <= 1:
        fn(0, n_items)
        return
    n_chunks = min(n_items, workers * 4)
    bounds = np.linspace(0, n_items, n_chunks + 1).astype(np.int64)
    with ThreadPoolExecutor(max_workers=workers) as ex:
        futures = [ex.submit(fn, int(a), int(b)) for a, b in zip(bounds[:-1], bounds[1:]) if b > a]
        for f in futures:
            f.result()


@njit(cache=True, nogil=True)
def draw_trunk_into(state, X, is_cat, n_levels, depth, attrs, thr, masks):
    n, m = X.shape
    for i in range(depth):
        state, a = next_below(state, m)
        attrs[i] = a
        if is_cat[a]:
            state, bits = next_u64(state)
            nl = n_levels[a]
            if nl < 64:
                bits &= (np.uint64(1) << np.uint64(nl)) - np.uint64(1)
            masks[i] = bits
            thr[i] = 0.0
        else:
            state, u = next_below(state, n)
            state, v = next_below(state, n)
            thr[i] = 0.5 * X[u, a] + 0.5 * X[v, a]
            masks[i] = np.uint64(0)
    return state


@njit(cache=True, nogil=True)
def criterion_passes(x, cat, thr, mask):
    if cat:
        return ((mask >> np.uint64(np.int64(x))) & np.uint64(1)) == np.uint64(1)
    return x >= thr


@njit(cache=True, nogil=True)
def leaf_of_row(row, is_cat, attrs, thr, masks, depth):
    leaf = 0
    for i in range(depth):
        a = attrs[i]
        if criterion_passes(row[a], is_cat[a], thr[i], masks[i]):
            leaf |= 1 << i
    return leaf


@njit(cache=True, nogil=True)
def leaves_into(X, is_cat, attrs, thr, masks, depth, out):
    for obj in range(X.shape[0]):
        out[obj] = leaf_of_row(X[obj], is_cat, attrs, thr, masks, depth)


@njit(cache=True, nogil=True)
def leaf_score(n_ly, n_l, n_y, n_classes, n_bag):
    # Integer products stay exact in float64, so balanced empty leaves give log(1) == 0.
    num = (1.0 + n_ly) * (n_classes + n_bag)
    den = (n_classes + n_l) * (1.0 + n_y)
    return np.log(num / den)


@njit(cache=True, nogil=True)
def count_leaves(leaves, counts, y, cnt, nl):
    for i in range(leaves.shape[0]):
        c = counts[i]
        if c > 0:
            cnt[leaves[i], y[i]] += c
            nl[leaves[i]] += c


@njit(cache=True, nogil=True)
def clear_counts(leaves, counts, cnt, nl):
    for i in range(leaves.shape[0]):
        if counts[i] > 0:
            cnt[leaves[i], :] = 0
            nl[leaves[i]] = 0


@njit(cache=True, nogil=True)
def table_from_counts(cnt, nl, ny, n_bag, out):
    n_classes = cnt.shape[1]
    for leaf in range(cnt.shape[0]):
        for c in range(n_classes):
            out[leaf, c] = leaf_score(cnt[leaf, c], nl[leaf], ny[c], n_classes, n_bag)


@njit(cache=True, nogil=True)
def fit_table(leaves, counts, y, n_classes, depth):
    n_leaves = 1 << depth
    cnt = np.zeros((n_leaves, n_classes), dtype=np.int64)
    nl = np.zeros(n_leaves, dtype=np.int64)
    ny = np.zeros(n_classes, dtype=np.int64)
    count_leaves(leaves, counts, y, cnt, nl)
    for i in range(leaves.shape[0]):
        ny[y[i]] += counts[i]
    out = np.empty((n_leaves, n_classes))
    table_from_counts(cnt, nl, ny, counts.sum(), out)
    return out


@njit(cache=True, nogil=True)
def train_range(
    k0, k1, master, X, y, is_cat, n_levels, n_classes, depth,
    attrs, thr, masks, tables, seeds,
):
    n = X.shape[0]
    leaves = np.empty(n, dtype=np.int64)
    for k in range(k0, k1):
        fs = fern_seed(master, k)
        seeds[k] = fs
        counts = bag_counts(fs, n)
        draw_trunk_into(child(fs, TAG_TRUNK), X, is_cat, n_levels, depth, attrs[k], thr[k], masks[k])
        leaves_into(X, is_cat, attrs[k], thr[k], masks[k], depth, leaves)
        tables[k] = fit_table(leaves, counts, y, n_classes, depth)


@njit(cache=True, nogil=True)
def term_score(use_table, tab, cnt, nl, ny, lf, c, n_bag):
    if use_table:
        return tab[lf, c]
    return leaf_score(cnt[lf, c], nl[lf], ny[c], cnt.shape[1], n_bag)


@njit(cache=True, nogil=True)
def count_bag(bag_idx, bag_cnt, n_in, leaves, y, cnt, nl):
    for b in range(n_in):
        i = bag_idx[b]
        cnt[leaves[i], y[i]] += bag_cnt[b]
        nl[leaves[i]] += bag_cnt[b]


@njit(cache=True, nogil=True)
def clear_bag(bag_idx, n_in, leaves, cnt, nl):
    if n_in > cnt.size:
        cnt[:, :] = 0
        nl[:] = 0
    else:
        for b in range(n_in):
            lf = leaves[bag_idx[b]]
            cnt[lf, :] = 0
            nl[lf] = 0


@njit(cache=True, nogil=True)
def importance_range(
    k0, k1, master, X, y, is_cat, n_levels, n_classes, depth,
    plan, do_shadow, shadow_oob_mode, store_tables,
    attrs, thr, masks, tables, seeds, oob_size,
    st_attr, st_reg, st_shd,
):
    n = X.shape[0]
    n_leaves = 1 << depth
    n_cells = n_leaves * n_classes
    leaves = np.empty(n, dtype=np.int64)
    sleaves = np.empty(n, dtype=np.int64)
    cnt = np.zeros((n_leaves, n_classes), dtype=np.int64)
    nl = np.zeros(n_leaves, dtype=np.int64)
    scnt = np.zeros((n_leaves, n_classes), dtype=np.int64)
    snl = np.zeros(n_leaves, dtype=np.int64)
    tab = np.empty((n_leaves, n_classes))
    stab = np.empty((n_leaves, n_classes))
    ny = np.zeros(n_classes, dtype=np.int64)
    oob = np.empty(n, dtype=np.int64)
    bag_idx = np.empty(n, dtype=np.int64)
    bag_cnt = np.empty(n, dtype=np.int64)
    perm = np.empty(n, dtype=np.int64)
    for k in range(k0, k1):
        fs = fern_seed(master, k)
        seeds[k] = fs
        counts = bag_counts(fs, n)
        draw_trunk_into(child(fs, TAG_TRUNK), X, is_cat, n_levels, depth, attrs[k], thr[k], masks[k])
        leaves_into(X, is_cat, attrs[k], thr[k], masks[k], depth, leaves)

        ny[:] = 0
        m = 0
        n_in = 0
        for i in range(n):
            ny[y[i]] += counts[i]
            if counts[i] == 0:
                oob[m] = i
                m += 1
            else:
                bag_idx[n_in] = i
                bag_cnt[n_in] = counts[i]
                n_in += 1
        oob_size[k] = m
        count_bag(bag_idx, bag_cnt, n_in, leaves, y, cnt, nl)
        if store_tables:
            table_from_counts(cnt, nl, ny, n, tables[k])
        for j in range(depth):
            st_attr[k, j] = -1

        if m > 0:
            # Fill a whole table only when lookups outnumber its cells; both
            # routes evaluate the same leaf_score expression.
            use_tab = m * (depth + 1) > n_cells
            if use_tab:
                table_from_counts(cnt, nl, ny, n, tab)
            use_stab = 2 * m > n_cells
            base = 0.0
            for p in range(m):
                o = oob[p]
                base += term_score(use_tab, tab, cnt, nl, ny, leaves[o], y[o], n)

            n_done = 0
            for i in range(depth):
                a = attrs[k, i]
                seen = False
                for i2 in range(i):
                    if attrs[k, i2] == a:
                        seen = True
                if seen:
                    continue
                amask = 0
                for i2 in range(depth):
                    if attrs[k, i2] == a:
                        amask |= 1 << i2
                keep = ~amask

                # Regular term: a's values permuted within the OOB set.
                for p in range(m):
                    perm[p] = p
                shuffle_inplace(pair_seed(fs, TAG_REGULAR, a), perm[:m])
                permuted = 0.0
                for p in range(m):
                    o = oob[p]
                    lf = (leaves[o] & keep) | (leaves[oob[perm[p]]] & amask)
                    permuted += term_score(use_tab, tab, cnt, nl, ny, lf, y[o], n)
                st_attr[k, n_done] = a
                st_reg[k, n_done] = (base - permuted) / m

                if do_shadow:
                    # Implicit shadow: a's column replaced by its global permutation,
                    # scores refit on the same bag multiset.
                    sig = plan[a]
                    for o in range(n):
                        sleaves[o] = (leaves[o] & keep) | (leaves[sig[o]] & amask)
                    count_bag(bag_idx, bag_cnt, n_in, sleaves, y, scnt, snl)
                    if use_stab:
                        table_from_counts(scnt, snl, ny, n, stab)
                    first = 0.0
                    for p in range(m):
                        o = oob[p]
                        lf = sleaves[o] if shadow_oob_mode == 0 else leaves[o]
                        first += term_score(use_stab, stab, scnt, snl, ny, lf, y[o], n)
                    for p in range(m):
                        perm[p] = p
                    shuffle_inplace(pair_seed(fs, TAG_SHADOW, a), perm[:m])
                    second = 0.0
                    for p in range(m):
                        o = oob[p]
                        src = oob[perm[p]]
                        donor = sleaves[src] if shadow_oob_mode == 0 else leaves[src]
                        lf = (leaves[o] & keep) | (donor & amask)
                        second += term_score(use_stab, stab, scnt, snl, ny, lf, y[o], n)
                    st_shd[k, n_done] = (first - second) / m
                    clear_bag(bag_idx, n_in, sleaves, scnt, snl)
                n_done += 1
        clear_bag(bag_idx, n_in, leaves, cnt, nl)


@njit(cache=True, nogil=True)
def reduce_importance(st_attr, st_reg, st_shd, oob_size, n_attrs):
    total_reg = np.zeros(n_attrs)
    total_shd = np.zeros(n_attrs)
    scans = np.zeros(n_attrs, dtype=np.int64)
    for k in range(st_attr.shape[0]):
        if oob_size[k] == 0:
            continue
        for j in range(st_attr.shape[1]):
            a = st_attr[k, j]
            if a < 0:
                break
            total_reg[a] += st_reg[k, j]
            total_shd[a] += st_shd[k, j]
            scans[a] += 1
    for a in range(n_attrs):
        if scans[a] > 0:
            total_reg[a] /= scans[a]
            total_shd[a] /= scans[a]
    return total_reg, total_shd, scans


@njit(cache=True, nogil=True)
def usage_counts(attrs, n_attrs):
    usage = np.zeros(n_attrs, dtype=np.int64)
    depth = attrs.shape[1]
    for k in range(attrs.shape[0]):
        for i in range(depth):
            first = True
            for i2 in range(i):
                if attrs[k, i2] == attrs[k, i]:
                    first = False
            if first:
                usage[attrs[k, i]] += 1
    return usage


@njit(cache=True, nogil=True)
def tie_argmax(scores):
    # Sums of different logarithms that are equal in exact arithmetic can
    # disagree in the last bits; treat those as ties and take the lowest class.
    top = scores[0]
    for c in range(1, scores.shape[0]):
        if scores[c] > top:
            top = scores[c]
    tol = TIE_RTOL * (1.0 + abs(top))
    for c in range(scores.shape[0]):
        if scores[c] >= top - tol:
            return c
    return 0


@njit(cache=True, nogil=True)
def predict_range(i0, i1, X, is_cat, attrs, thr, masks, tables, depth, out_scores, out_class):
    n_classes = tables.shape[2]
    for obj in range(i0, i1):
        for c in range(n_classes):
            out_scores[obj, c] = 0.0
        for k in range(attrs.shape[0]):
            lf = leaf_of_row(X[obj], is_cat, attrs[k], thr[k], masks[k], depth)
            for c in range(n_classes):
                out_scores[obj, c] += tables[k, lf, c]
        out_class[obj] = tie_argmax(out_scores[obj])


@njit(cache=True, nogil=True)
def oob_leaves_range(k0, k1, seeds, X, is_cat, attrs, thr, masks, depth, leaves, in_bag):
    n = X.shape[0]
    for k in range(k0, k1):
        counts = bag_counts(seeds[k], n)
        for i in range(n):
            in_bag[k, i] = counts[i] > 0
            leaves[k, i] = leaf_of_row(X[i], is_cat, attrs[k], thr[k], masks[k], depth)


@njit(cache=True, nogil=True)
def oob_vote_range(i0, i1, leaves, in_bag, tables, y, out_class, n_oob):
    n_classes = tables.shape[2]
    acc = np.zeros(n_classes)
    for i in range(i0, i1):
        acc[:] = 0.0
        cnt = 0
        for k in range(leaves.shape[0]):
            if in_bag[k, i]:
                continue
            cnt += 1
            for c in range(n_classes):
                acc[c] += tables[k, leaves[k, i], c]
        n_oob[i] = cnt
        out_class[i] = tie_argmax(acc)
