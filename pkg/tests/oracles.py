"""Independent reference implementations used only by the tests."""

from fractions import Fraction


def naive_present(tokens, patterns):
    for t in tokens:
        for p in patterns:
            if p.endswith("*") and t.startswith(p[:-1]):
                return True
            if t == p:
                return True
    return False


def brute_force_accommodation(turns, patterns, responder):
    """turns: list of (speaker, tokens). Enumerates (trigger, reply) pairs."""
    pairs = [(turns[i - 1][1], turns[i][1]) for i in range(1, len(turns)) if turns[i][0] == responder]
    n = len(pairs)
    hits = sum(naive_present(r, patterns) for _, r in pairs)
    trig = [r for t, r in pairs if naive_present(t, patterns)]
    both = sum(naive_present(r, patterns) for r in trig)
    baseline = hits / n if n else None
    conditional = both / len(trig) if trig else None
    acc = conditional - baseline if conditional is not None else None
    return baseline, conditional, acc, n, len(trig)


def _gini_sum(counts):
    tot = sum(counts)
    if tot == 0:
        return Fraction(0)
    return tot - sum(Fraction(c * c, tot) for c in counts)


def naive_cart(X, y, rows=None):
    """Exact-arithmetic Gini CART over all features, grown to purity.

    Ties: lowest feature, then lowest threshold. Returns a nested tuple
    ("leaf", cls) or ("split", feature, threshold, left, right).
    """
    if rows is None:
        rows = list(range(len(y)))
    counts = [sum(1 for r in rows if y[r] == k) for k in (0, 1)]
    if min(counts) == 0:
        return ("leaf", 0 if counts[0] >= counts[1] else 1)
    parent = _gini_sum(counts)
    best = None
    for f in range(len(X[0])):
        values = sorted({X[r][f] for r in rows})
        for a, b in zip(values, values[1:]):
            thr = (a + b) / 2
            left = [r for r in rows if X[r][f] <= thr]
            right = [r for r in rows if X[r][f] > thr]
            lc = [sum(1 for r in left if y[r] == k) for k in (0, 1)]
            rc = [sum(1 for r in right if y[r] == k) for k in (0, 1)]
            gain = parent - _gini_sum(lc) - _gini_sum(rc)
            if best is None or gain > best[0]:
                best = (gain, f, thr, left, right)
    if best is None:
        return ("leaf", 0 if counts[0] >= counts[1] else 1)
    _, f, thr, left, right = best
    return ("split", f, thr, naive_cart(X, y, left), naive_cart(X, y, right))


def cart_predict(node, x):
    while node[0] == "split":
        node = node[3] if x[node[1]] <= node[2] else node[4]
    return node[1]
