"""Compare the numba and numpy Viterbi chart kernels on a synthetic grammar.

    python benchmarks/bench_cyk.py [--lengths 10 20 40 80] [--reps 5]
"""
import argparse
import math
import random
import statistics
import time

from formalparse import _kernels
from formalparse.chart import cyk_kbest, cyk_viterbi
from formalparse.experiment import AmbiguationSpec, ambiguate
from formalparse.pcfg import binarize_tree, induce
from formalparse.synth import make_world, synthetic_treebank


def sample(grammar, label, rng, budget):
    out, stack = [], [label]
    while stack:
        sym = stack.pop()
        if grammar.is_terminal(sym):
            out.append(sym)
            if len(out) > budget:
                return None
            continue
        rules = grammar.by_lhs[sym]
        r = rng.choices(rules, weights=[math.exp(x.logprob) for x in rules])[0]
        stack.extend(reversed(r.rhs))
    return out


def sentence(grammar, roots, n, rng):
    while True:
        toks = sample(grammar, rng.choice(roots), rng, n)
        if toks is not None and len(toks) == n:
            return toks


def timed(fn, reps):
    ts = []
    for _ in range(reps):
        t0 = time.perf_counter()
        fn()
        ts.append(time.perf_counter() - t0)
    return statistics.median(ts)


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--lengths", type=int, nargs="+", default=[10, 20, 40, 80, 160])
    ap.add_argument("--reps", type=int, default=5)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    world = make_world(n_types=8, n_unary=40, n_binary=40, n_leaves=4, seed=args.seed)
    corpus = synthetic_treebank(world, 500, max_size=20, seed=args.seed)
    spec = AmbiguationSpec(world.cast_set, world.merge_map)
    trees = [ambiguate(e, spec, world.sig).tree for e in corpus]
    g = induce([binarize_tree(t) for t in trees])
    roots = sorted({t.label for t in trees})
    rng = random.Random(args.seed)
    print(f"grammar: {len(g.rules)} rules, {len(g.nonterminals)} nonterminals; "
          f"numba available: {_kernels.HAVE_NUMBA}")

    t0 = time.perf_counter()
    cyk_viterbi(g, sentence(g, roots, 5, rng), backend="numba")
    print(f"numba first call (compile): {time.perf_counter() - t0:.2f}s\n")

    print(f"{'n':>5} {'numba ms':>10} {'numpy ms':>10} {'speedup':>8} {'kbest ms':>10}")
    for n in args.lengths:
        s = sentence(g, roots, n, rng)
        a = cyk_viterbi(g, s, backend="numba")
        b = cyk_viterbi(g, s, backend="numpy")
        assert a.trees == b.trees, "backends disagree"
        tn = timed(lambda: cyk_viterbi(g, s, backend="numba"), args.reps)
        tp = timed(lambda: cyk_viterbi(g, s, backend="numpy"), args.reps)
        tk = timed(lambda: cyk_kbest(g, s, 1), max(1, args.reps // 2))
        print(f"{n:>5} {tn * 1e3:>10.2f} {tp * 1e3:>10.2f} {tp / tn:>7.1f}x {tk * 1e3:>10.2f}")


if __name__ == "__main__":
    main()
