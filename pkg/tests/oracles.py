"""Independent reference implementations used to check the package.

Everything here is deliberately naive: plain Python loops and the math
module, no shared code with the implementations under test.
"""

from __future__ import annotations

import itertools
import math


def walk_trial(fixations):
    """Literal step-through of one trial.

    `fixations` is a list of ``(word, aoi_order, duration)`` in viewing
    order. Returns ``{(word, aoi_order): (sfd, ffd, gd, rpd)}``.
    """
    out = {}
    for target in dict.fromkeys((w, o) for w, o, _ in fixations):
        total_hits = sum(1 for w, o, _ in fixations if (w, o) == target)
        start = next(i for i, (w, o, _) in enumerate(fixations) if (w, o) == target)
        ffd = fixations[start][2]

        gd = 0.0
        i = start
        while i < len(fixations) and (fixations[i][0], fixations[i][1]) == target:
            gd += fixations[i][2]
            i += 1

        rpd = 0.0
        i = start
        while i < len(fixations):
            if fixations[i][1] > target[1]:
                break
            rpd += fixations[i][2]
            i += 1

        sfd = ffd if total_hits == 1 else None
        out[target] = (sfd, ffd, gd, rpd)
    return out


def brute_force_snd(vectors: dict, sigma_ddof: int = 0):
    """Threshold, neighborhoods and ARC from every pair, with plain floats.

    Returns ``(tau, neighborhoods, arc)`` where `arc` maps words with a
    non-empty neighborhood to their mean cosine similarity.
    """
    words = sorted(vectors)

    def dist(a, b):
        return math.sqrt(math.fsum((x - y) ** 2 for x, y in zip(a, b)))

    def cos(a, b):
        dot = math.fsum(x * y for x, y in zip(a, b))
        na = math.sqrt(math.fsum(x * x for x in a))
        nb = math.sqrt(math.fsum(y * y for y in b))
        return dot / (na * nb)

    ds = [dist(vectors[a], vectors[b]) for a, b in itertools.combinations(words, 2)]
    mu = math.fsum(ds) / len(ds)
    var = math.fsum((d - mu) ** 2 for d in ds) / (len(ds) - sigma_ddof)
    tau = mu - 1.5 * math.sqrt(var)
    hoods = {w: {y for y in words if y != w and dist(vectors[w], vectors[y]) <= tau} for w in words}
    arc = {
        w: math.fsum(cos(vectors[w], vectors[y]) for y in hood) / len(hood)
        for w, hood in hoods.items() if hood
    }
    return tau, hoods, arc


def exact_permutation_p(s1, s2, alternative="g1_greater"):
    """Exact p-value by enumerating every split of the pooled sample."""
    pooled = list(s1) + list(s2)
    n1 = len(s1)
    observed = sum(s1) / n1 - sum(s2) / len(s2)
    hits = total = 0
    for idx in itertools.combinations(range(len(pooled)), n1):
        chosen = set(idx)
        g1 = [pooled[i] for i in idx]
        g2 = [pooled[i] for i in range(len(pooled)) if i not in chosen]
        t = sum(g1) / len(g1) - sum(g2) / len(g2)
        total += 1
        if alternative == "g1_greater":
            hits += t >= observed - 1e-9
        elif alternative == "g2_greater":
            hits += t <= observed + 1e-9
        else:
            hits += abs(t) >= abs(observed) - 1e-9
    return hits / total


def pair_counting_auc(scores, labels):
    """Fraction of (positive, negative) pairs ordered correctly, ties count half."""
    pos = [s for s, y in zip(scores, labels) if y == 1]
    neg = [s for s, y in zip(scores, labels) if y == 0]
    won = 0.0
    for p in pos:
        for n in neg:
            won += 1.0 if p > n else 0.5 if p == n else 0.0
    return won / (len(pos) * len(neg))


def naive_bh(p_values):
    """BH adjustment straight from the definition: min over all p_j >= p_i of p_j*m/rank_j."""
    m = len(p_values)
    out = []
    for p in p_values:
        best = min(
            q * m / sum(1 for r in p_values if r <= q)
            for q in p_values if q >= p
        )
        out.append(min(1.0, best))
    return out


def type7_quantile(values, q):
    """Linear-interpolation sample quantile, computed by hand."""
    xs = sorted(values)
    h = (len(xs) - 1) * q
    lo = math.floor(h)
    hi = min(lo + 1, len(xs) - 1)
    return xs[lo] + (h - lo) * (xs[hi] - xs[lo])


def hedges_g_by_hand(s1, s2):
    n1, n2 = len(s1), len(s2)
    m1, m2 = sum(s1) / n1, sum(s2) / n2
    v1 = sum((x - m1) ** 2 for x in s1) / (n1 - 1) if n1 > 1 else 0.0
    v2 = sum((x - m2) ** 2 for x in s2) / (n2 - 1) if n2 > 1 else 0.0
    pooled = math.sqrt(((n1 - 1) * v1 + (n2 - 1) * v2) / (n1 + n2 - 2))
    return abs((1 - 3 / (4 * (n1 + n2) - 9)) * (m1 - m2) / pooled)
