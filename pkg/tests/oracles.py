"""Straight-from-the-formulas reference implementations for the tests.

Nothing here imports the package: the seed tree, bootstrap, trunk drawing,
leaf scores and both importances are rewritten in plain Python so they can
be checked against the compiled kernels.
"""

from __future__ import annotations

import math

MASK = (1 << 64) - 1
GAMMA = 0x9E3779B97F4A7C15
SALT = 0xD1B54A32D192ED03

TAG_FERNS, TAG_BAG, TAG_TRUNK, TAG_REGULAR, TAG_SHADOW, TAG_PLAN = 1, 2, 3, 4, 5, 6


def mix64(z):
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK
    return z ^ (z >> 31)


def child(seed, i):
    return mix64((mix64(seed ^ SALT) + GAMMA * (i + 1)) & MASK)


class Stream:
    def __init__(self, seed):
        self.state = seed & MASK

    def u64(self):
        self.state = (self.state + GAMMA) & MASK
        return mix64(self.state)

    def below(self, n):
        return int(((self.u64() >> 11) / 2.0**53) * n)

    def shuffle(self, xs):
        xs = list(xs)
        for i in range(len(xs) - 1, 0, -1):
            j = self.below(i + 1)
            xs[i], xs[j] = xs[j], xs[i]
        return xs


def fern_seed(master, k):
    return child(child(master & MASK, TAG_FERNS), k)


def bag(seed, n):
    s = Stream(child(seed, TAG_BAG))
    counts = [0] * n
    for _ in range(n):
        counts[s.below(n)] += 1
    return counts


def trunk(seed, rows, is_cat, n_levels, depth):
    """List of (attr, threshold or None, mask or None)."""
    s = Stream(seed)
    n, m = len(rows), len(rows[0])
    out = []
    for _ in range(depth):
        a = s.below(m)
        if is_cat[a]:
            bits = s.u64()
            if n_levels[a] < 64:
                bits &= (1 << n_levels[a]) - 1
            out.append((a, None, bits))
        else:
            u, v = s.below(n), s.below(n)
            out.append((a, 0.5 * rows[u][a] + 0.5 * rows[v][a], None))
    return out


def plan_perm(master, a, n):
    return Stream(child(child(master & MASK, TAG_PLAN), a)).shuffle(range(n))


def pair_perm(master, k, tag, a, m):
    return Stream(child(child(fern_seed(master, k), tag), a)).shuffle(range(m))


def leaf(crit, row):
    t = 0
    for i, (a, thr, mask) in enumerate(crit):
        ok = (mask >> int(row[a])) & 1 if mask is not None else row[a] >= thr
        if ok:
            t += 2**i
    return t


def score_table(crit, counts, rows, y, n_classes):
    """F[l][c] = log[(1 + #(L∩Y_c)) / (C + #L) * (C + #B) / (1 + #Y_c)]."""
    n_leaves = 2 ** len(crit)
    in_leaf = [[0] * n_classes for _ in range(n_leaves)]
    for i, c in enumerate(counts):
        in_leaf[leaf(crit, rows[i])][y[i]] += c
    per_class = [sum(c for c, yy in zip(counts, y) if yy == cls) for cls in range(n_classes)]
    size = sum(counts)
    return [
        [
            math.log((1 + in_leaf[t][cls]) / (n_classes + sum(in_leaf[t]))
                     * (n_classes + size) / (1 + per_class[cls]))
            for cls in range(n_classes)
        ]
        for t in range(n_leaves)
    ]


def predict(crits, tables, row, tie_rtol=1e-10):
    """Lowest class whose summed score is within a relative ``tie_rtol`` of the maximum.

    The tolerance absorbs last-bit differences between two evaluations of
    the same logarithm when several classes tie exactly.
    """
    n_classes = len(tables[0][0])
    tot = [sum(tab[leaf(c, row)][cls] for c, tab in zip(crits, tables)) for cls in range(n_classes)]
    top = max(tot)
    return min(cls for cls in range(n_classes) if tot[cls] >= top - tie_rtol * (1 + abs(top)))


def permuted_drop(crit, table, rows, y, oob, attr, perm):
    """(1/#OOB) * [sum F_y(xi) - sum F_y(xi with attr permuted by perm within OOB)]."""
    plain = sum(table[leaf(crit, rows[o])][y[o]] for o in oob)
    shuffled = 0.0
    for p, o in enumerate(oob):
        row = list(rows[o])
        row[attr] = rows[oob[perm[p]]][attr]
        shuffled += table[leaf(crit, row)][y[o]]
    return (plain - shuffled) / len(oob)


def regular_importance(master, rows, y, n_classes, crits, n_attrs):
    """Returns (I, scans): mean OOB score drop under within-OOB permutation."""
    total = [0.0] * n_attrs
    scans = [0] * n_attrs
    for k, crit in enumerate(crits):
        counts = bag(fern_seed(master, k), len(rows))
        oob = [i for i, c in enumerate(counts) if c == 0]
        if not oob:
            continue
        table = score_table(crit, counts, rows, y, n_classes)
        for a in sorted({c[0] for c in crit}):
            perm = pair_perm(master, k, TAG_REGULAR, a, len(oob))
            total[a] += permuted_drop(crit, table, rows, y, oob, a, perm)
            scans[a] += 1
    return [t / s if s else 0.0 for t, s in zip(total, scans)], scans


def explicit_shadow_importance(master, rows, y, n_classes, crits, n_attrs, oob_values="shuffled"):
    """Shadow importance via an explicitly materialized extra column.

    For each attribute the shadow column is appended to every row, the
    trunk's tests on the attribute are pointed at it, and the regular
    importance of that column is computed with the shadow permutation.
    With ``oob_values="original"`` OOB rows carry the unshuffled values in
    the extra column.
    """
    n = len(rows)
    total = [0.0] * n_attrs
    scans = [0] * n_attrs
    for k, crit in enumerate(crits):
        counts = bag(fern_seed(master, k), n)
        oob = [i for i, c in enumerate(counts) if c == 0]
        if not oob:
            continue
        for a in sorted({c[0] for c in crit}):
            sigma = plan_perm(master, a, n)
            extra = n_attrs
            aug = []
            for i, r in enumerate(rows):
                v = rows[sigma[i]][a]
                if oob_values == "original" and counts[i] == 0:
                    v = r[a]
                aug.append(list(r) + [v])
            crit2 = [(extra if c[0] == a else c[0], c[1], c[2]) for c in crit]
            table = score_table(crit2, counts, aug, y, n_classes)
            perm = pair_perm(master, k, TAG_SHADOW, a, len(oob))
            total[a] += permuted_drop(crit2, table, aug, y, oob, extra, perm)
            scans[a] += 1
    return [t / s if s else 0.0 for t, s in zip(total, scans)], scans
