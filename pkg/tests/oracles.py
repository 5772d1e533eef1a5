"""Straight-line reference implementations used to check the package.

Nothing here imports the code under test except the plain data records.
"""

import math
import re
from collections import defaultdict

DEGENERATE = 1e9
EPS = 1e-6

_TOK = re.compile(r"\w+(?:'\w+)*|[^\w\s]")


# -- n-gram model -------------------------------------------------------------

class NgramOracle:
    """Dict-and-loop re-derivation of the toy model's predictive distribution."""

    def __init__(self, corpus, order, alpha):
        self.order, self.alpha = order, alpha
        docs = [_TOK.findall(t) for t in corpus]
        docs = [d for d in docs if d]
        words = sorted({w for d in docs for w in d})
        self.vocab = words + ["<s>", "</s>", "<unk>"]
        self.V = len(self.vocab)
        self._memo, self._unseen = {}, {}
        self.counts = {k: defaultdict(lambda: defaultdict(int)) for k in range(1, order + 1)}
        for d in docs:
            seq = ["<s>"] * (order - 1) + d + ["</s>"]
            for i in range(order - 1, len(seq)):
                for k in range(1, order + 1):
                    ctx = tuple(seq[i - k + 1:i])
                    self.counts[k][ctx][seq[i]] += 1

    def prob(self, w, ctx, k=None):
        if k is None:
            k = self.order
        ctx = tuple(ctx[len(ctx) - (k - 1):]) if k > 1 else ()
        key = (w, ctx, k)
        if key not in self._memo:
            self._memo[key] = self._prob(w, ctx, k)
        return self._memo[key]

    def _unseen_mass(self, table, ctx, k):
        key = (ctx, k)
        if key not in self._unseen:
            self._unseen[key] = sum(self.prob(u, ctx, k) for u in self.vocab if u not in table)
        return self._unseen[key]

    def _prob(self, w, ctx, k):
        if k == 0:
            return 1.0 / self.V
        table = self.counts[k].get(ctx)
        if not table:
            return self.prob(w, ctx, k - 1)
        C = sum(table.values())
        z = C + self.alpha * self.V
        if w in table:
            return (table[w] + self.alpha) / z
        left = self.alpha * (self.V - len(table)) / z
        return left * self.prob(w, ctx, k - 1) / self._unseen_mass(table, ctx, k - 1)

    def distribution(self, history):
        padded = ["<s>"] * (self.order - 1) + [w if w in self.vocab else "<unk>" for w in history]
        ctx = padded[len(padded) - (self.order - 1):] if self.order > 1 else []
        return {w: self.prob(w, ctx) for w in self.vocab}

    def score(self, text):
        words = _TOK.findall(text)
        out = []
        for i, w in enumerate(words):
            dist = self.distribution(words[:i])
            obs = w if w in self.vocab else "<unk>"
            p = dist[obs]
            rank = 1 + sum(1 for q in dist.values() if q > p * (1 + 1e-12))
            entropy = -sum(q * math.log(q) for q in dist.values() if q > 0)
            out.append((math.log(p), rank, entropy))
        return out


# -- detectors ----------------------------------------------------------------

def log_p(logps, ranks, ents):
    return sum(logps) / len(logps)


def rank(logps, ranks, ents):
    return -sum(ranks) / len(ranks)


def log_rank(logps, ranks, ents):
    return -sum(math.log(r) for r in ranks) / len(ranks)


def entropy(logps, ranks, ents):
    return sum(ents) / len(ents)


def lrr(logps, ranks, ents):
    den = sum(math.log(r) for r in ranks)
    if den < EPS:
        return DEGENERATE
    return -sum(logps) / den


def detect_gpt(orig, perturbed):
    m = sum(orig[0]) / len(orig[0])
    pm = [sum(p[0]) / len(p[0]) for p in perturbed]
    return m - sum(pm) / len(pm)


def npr(orig, perturbed):
    base = sum(math.log(r) for r in orig[1]) / len(orig[1])
    if base < EPS:
        return DEGENERATE
    pl = [sum(math.log(r) for r in p[1]) / len(p[1]) for p in perturbed]
    return (sum(pl) / len(pl)) / base


# -- AUROC ------------------------------------------------------------------

def auroc(machine, human):
    total = 0.0
    for a in machine:
        for b in human:
            if a > b:
                total += 1
            elif a == b:
                total += 0.5
    return total / (len(machine) * len(human))
