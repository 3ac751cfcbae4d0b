"""Viterbi chart fill over integer-coded grammars.

Two interchangeable backends fill the same arrays: a numba-compiled loop
nest and a vectorized numpy version. Set ``FORMALPARSE_DISABLE_NUMBA=1``
to force the numpy path (it is also used when numba is missing).

Chart arrays are indexed ``[start, end, label]`` with ``end`` exclusive.
``base_*`` hold the best binary/lexical item per label, ``fin_*`` the best
item after one application of the unary closure. Among candidates within
``TIE_EPS`` of a cell maximum the smallest tie key wins:
binary items use ``(end - 1 - split) * n_rules + rule``, lexical items the
rule index, and closure candidates rank after the base item in order of
their bottom label.
"""
from __future__ import annotations

import os

import numpy as np

TIE_EPS = 1e-12
NEG_INF = -np.inf

try:  # pragma: no cover - exercised implicitly
    from numba import njit

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover
    HAVE_NUMBA = False


def numba_enabled() -> bool:
    return HAVE_NUMBA and os.environ.get("FORMALPARSE_DISABLE_NUMBA", "") not in ("1", "true", "yes")


def _alloc(n: int, n_labels: int):
    base_score = np.full((n, n + 1, n_labels), NEG_INF)
    base_key = np.full((n, n + 1, n_labels), -1, dtype=np.int64)
    fin_score = np.full((n, n + 1, n_labels), NEG_INF)
    fin_src = np.full((n, n + 1, n_labels), -1, dtype=np.int64)
    return base_score, base_key, fin_score, fin_src


def _fill_numpy(n, n_labels, lex_start, lex_label, lex_lp, lex_rule,
                bin_lhs, bin_left, bin_right, bin_lp, lhs_seg_start, lhs_seg_label,
                cl_top, cl_bottom, cl_lp):
    base_score, base_key, fin_score, fin_src = _alloc(n, n_labels)
    n_rules_total = np.int64(max(1, len(bin_lp)))
    has_bin = len(bin_lp) > 0

    def close(i, j):
        b = base_score[i, j]
        fin_score[i, j] = b
        fin_src[i, j] = -1
        if len(cl_top) == 0:
            return
        cand = cl_lp + b[cl_bottom]
        best = b.copy()
        np.maximum.at(best, cl_top, cand)
        ok = np.isfinite(cand) & (cand >= best[cl_top] - TIE_EPS)
        base_ok = np.isfinite(b) & (b >= best - TIE_EPS)
        done = base_ok.copy()
        for e in np.nonzero(ok)[0]:
            top = cl_top[e]
            if not done[top]:
                done[top] = True
                fin_score[i, j, top] = cand[e]
                fin_src[i, j, top] = e

    for i in range(n):
        for k in range(lex_start[i], lex_start[i + 1]):
            x = lex_label[k]
            if lex_lp[k] > base_score[i, i + 1, x]:
                base_score[i, i + 1, x] = lex_lp[k]
                base_key[i, i + 1, x] = lex_rule[k]
        close(i, i + 1)

    if not has_bin:
        return base_score, base_key, fin_score, fin_src

    for length in range(2, n + 1):
        for i in range(0, n - length + 1):
            j = i + length
            splits = np.arange(j - 1, i, -1)  # descending, rank = position
            left = fin_score[i, splits][:, bin_left]
            right = fin_score[splits, j][:, bin_right]
            scores = bin_lp[None, :] + left
            scores = scores + right
            per_rule_best = scores.max(axis=0)
            seg_best = np.maximum.reduceat(per_rule_best, lhs_seg_start)
            thresh = np.repeat(seg_best, np.diff(np.append(lhs_seg_start, len(bin_lp))))
            mask = np.isfinite(scores) & (scores >= thresh[None, :] - TIE_EPS)
            if not mask.any():
                close(i, j)
                continue
            ranks = np.arange(len(splits), dtype=np.int64)[:, None]
            keys = ranks * n_rules_total + np.arange(len(bin_lp), dtype=np.int64)[None, :]
            big = np.iinfo(np.int64).max
            keys = np.where(mask, keys, big)
            per_rule_key = keys.min(axis=0)
            seg_key = np.minimum.reduceat(per_rule_key, lhs_seg_start)
            found = seg_key != big
            labels = lhs_seg_label[found]
            sk = seg_key[found]
            r = sk % n_rules_total
            rank = sk // n_rules_total
            base_score[i, j, labels] = scores[rank, r]
            base_key[i, j, labels] = sk
            close(i, j)
    return base_score, base_key, fin_score, fin_src


if HAVE_NUMBA:

    @njit(cache=True)
    def _fill_numba(n, n_labels, lex_start, lex_label, lex_lp, lex_rule,
                    bin_lhs, bin_left, bin_right, bin_lp, left_start, left_rules,
                    cl_top, cl_bottom, cl_lp):  # pragma: no cover - compiled
        base_score = np.full((n, n + 1, n_labels), NEG_INF)
        base_key = np.full((n, n + 1, n_labels), -1, dtype=np.int64)
        fin_score = np.full((n, n + 1, n_labels), NEG_INF)
        fin_src = np.full((n, n + 1, n_labels), -1, dtype=np.int64)
        n_rules = max(1, bin_lp.shape[0])
        big = np.iinfo(np.int64).max
        best = np.empty(n_labels)
        bkey = np.empty(n_labels, dtype=np.int64)
        n_cl = cl_top.shape[0]

        for i in range(n):
            for k in range(lex_start[i], lex_start[i + 1]):
                x = lex_label[k]
                if lex_lp[k] > base_score[i, i + 1, x]:
                    base_score[i, i + 1, x] = lex_lp[k]
                    base_key[i, i + 1, x] = lex_rule[k]

        for length in range(1, n + 1):
            for i in range(0, n - length + 1):
                j = i + length
                if length > 1:
                    for x in range(n_labels):
                        best[x] = NEG_INF
                        bkey[x] = big
                    # pass 1: maxima
                    for k in range(j - 1, i, -1):
                        for lab in range(n_labels):
                            ls = fin_score[i, k, lab]
                            if ls == NEG_INF:
                                continue
                            for q in range(left_start[lab], left_start[lab + 1]):
                                r = left_rules[q]
                                rs = fin_score[k, j, bin_right[r]]
                                if rs == NEG_INF:
                                    continue
                                s = bin_lp[r] + ls + rs
                                if s > best[bin_lhs[r]]:
                                    best[bin_lhs[r]] = s
                    # pass 2: smallest tie key within tolerance
                    for k in range(j - 1, i, -1):
                        rank = j - 1 - k
                        for lab in range(n_labels):
                            ls = fin_score[i, k, lab]
                            if ls == NEG_INF:
                                continue
                            for q in range(left_start[lab], left_start[lab + 1]):
                                r = left_rules[q]
                                rs = fin_score[k, j, bin_right[r]]
                                if rs == NEG_INF:
                                    continue
                                s = bin_lp[r] + ls + rs
                                x = bin_lhs[r]
                                if s >= best[x] - TIE_EPS:
                                    key = rank * n_rules + r
                                    if key < bkey[x]:
                                        bkey[x] = key
                                        base_score[i, j, x] = s
                                        base_key[i, j, x] = key
                # unary closure, applied once
                for x in range(n_labels):
                    fin_score[i, j, x] = base_score[i, j, x]
                    fin_src[i, j, x] = -1
                    best[x] = base_score[i, j, x]
                for e in range(n_cl):
                    bs = base_score[i, j, cl_bottom[e]]
                    if bs == NEG_INF:
                        continue
                    c = cl_lp[e] + bs
                    if c > best[cl_top[e]]:
                        best[cl_top[e]] = c
                for x in range(n_labels):
                    bkey[x] = 0 if (base_score[i, j, x] != NEG_INF
                                    and base_score[i, j, x] >= best[x] - TIE_EPS) else -1
                for e in range(n_cl):
                    x = cl_top[e]
                    if bkey[x] == 0:
                        continue
                    bs = base_score[i, j, cl_bottom[e]]
                    if bs == NEG_INF:
                        continue
                    c = cl_lp[e] + bs
                    if c >= best[x] - TIE_EPS:
                        bkey[x] = 0
                        fin_score[i, j, x] = c
                        fin_src[i, j, x] = e
        return base_score, base_key, fin_score, fin_src


def fill_chart(cg, lex_start, lex_label, lex_lp, lex_rule, n: int, backend: str | None = None):
    """Run the Viterbi fill for one sentence; ``cg`` is a compiled grammar."""
    if backend is None:
        backend = "numba" if numba_enabled() else "numpy"
    if backend == "numba":
        if not HAVE_NUMBA:
            raise RuntimeError("numba backend requested but numba is not importable")
        return _fill_numba(n, cg.n_labels, lex_start, lex_label, lex_lp, lex_rule,
                           cg.bin_lhs, cg.bin_left, cg.bin_right, cg.bin_lp,
                           cg.left_start, cg.left_rules, cg.cl_top, cg.cl_bottom, cg.cl_lp)
    return _fill_numpy(n, cg.n_labels, lex_start, lex_label, lex_lp, lex_rule,
                       cg.bin_lhs, cg.bin_left, cg.bin_right, cg.bin_lp,
                       cg.lhs_seg_start, cg.lhs_seg_label, cg.cl_top, cg.cl_bottom, cg.cl_lp)
