"""Seeded synthetic prose for desk-scale experiments.

Documents come from a small probabilistic grammar with Zipf-weighted word
choices and per-document topics. The grammar has long-range structure (topic
words, recurring characters, clause templates) that a trigram model only
approximates, so held-out documents play the role of human-written text.
"""

from __future__ import annotations

from importlib import resources

import numpy as np

NAMES = [
    "Anna", "Tom", "Maria", "Jack", "Lucy", "Peter", "Sara", "David", "Emma", "Leo",
    "Clara", "Sam", "Nora", "Paul", "Rosa", "Ben", "Ida", "Hugo", "Mia", "Oscar",
]
PEOPLE = [
    "farmer", "teacher", "king", "girl", "boy", "doctor", "sailor", "baker", "soldier", "child",
    "mother", "father", "woman", "man", "stranger", "merchant", "priest", "guard", "hunter", "student",
]
THINGS = [
    "house", "river", "road", "door", "book", "letter", "horse", "dog", "tree", "boat",
    "garden", "field", "window", "bridge", "village", "market", "school", "church", "forest", "hill",
    "table", "fire", "lamp", "box", "ship", "wall", "gate", "stone", "song", "story",
    "map", "key", "coat", "bird", "cart", "bread", "well", "tower", "island", "mountain",
    "farm", "city", "street", "room", "bell", "rope", "knife", "cup", "chair", "clock",
]
ADJS = [
    "old", "small", "big", "dark", "quiet", "cold", "warm", "green", "long", "strange",
    "red", "white", "black", "young", "tired", "happy", "empty", "heavy", "bright", "broken",
    "little", "great", "deep", "narrow", "wet", "dry", "gentle", "simple", "golden", "hidden",
]
VT = [
    "found", "opened", "carried", "saw", "painted", "built", "watched", "followed", "lost", "cleaned",
    "crossed", "visited", "closed", "fixed", "sold", "bought", "pulled", "pushed", "moved", "held",
    "covered", "filled", "left", "climbed", "counted", "touched", "read", "wrote", "heard", "kept",
]
VI = [
    "waited", "laughed", "slept", "walked", "listened", "smiled", "stopped", "worked", "sang", "cried",
    "ran", "rested", "returned", "stayed", "danced", "paused", "shouted", "prayed", "hurried", "woke",
]
VBASE = [
    "find", "open", "carry", "see", "paint", "build", "watch", "follow", "clean", "cross",
    "visit", "fix", "sell", "buy", "move", "hold", "cover", "fill", "climb", "read",
]
ADVS = [
    "slowly", "quickly", "again", "quietly", "alone", "together", "early", "late", "often", "softly",
    "outside", "there", "today", "carefully", "happily", "suddenly", "gladly", "twice", "once", "away",
]
PREPS = ["near", "behind", "under", "across", "beside", "inside", "over", "through", "along", "toward", "by", "past"]
TIMES = [
    "In the morning", "That night", "Later", "After a while", "One day", "At noon", "In the evening",
    "Before dawn", "The next day", "Soon", "At last", "Every winter", "That summer", "Once again",
]
DETS = ["the", "a", "the", "his", "her", "their", "that", "one", "every", "the"]
PRONOUNS = ["she", "he", "they"]


def _zipf(n: int, s: float = 0.9) -> np.ndarray:
    w = 1.0 / np.arange(1, n + 1) ** s
    return w / w.sum()


class _Grammar:
    def __init__(self, rng: np.random.Generator):
        self.rng = rng

    def pick(self, items, weights=None):
        if weights is None:
            weights = _zipf(len(items))
        return items[int(self.rng.choice(len(items), p=weights))]

    def topic(self):
        rng = self.rng
        idx = rng.permutation(len(THINGS))[:8]
        self.things = [THINGS[i] for i in idx]
        self.cast = [NAMES[i] for i in rng.permutation(len(NAMES))[:2]]
        self.role = PEOPLE[int(rng.integers(len(PEOPLE)))]
        self.mood = [ADJS[i] for i in rng.permutation(len(ADJS))[:6]]

    def thing(self):
        if self.rng.random() < 0.7:
            return self.pick(self.things)
        return self.pick(THINGS)

    def adj(self):
        if self.rng.random() < 0.6:
            return self.pick(self.mood)
        return self.pick(ADJS)

    def np_(self):
        det = self.pick(DETS, None)
        if self.rng.random() < 0.45:
            return f"{det} {self.adj()} {self.thing()}"
        return f"{det} {self.thing()}"

    def pp(self):
        return f"{self.pick(PREPS)} {self.np_()}"

    def subj(self, start=True):
        r = self.rng.random()
        if r < 0.45:
            return self.pick(self.cast)
        if r < 0.7:
            word = self.pick(PRONOUNS)
            return word.capitalize() if start else word
        article = "The" if start else "the"
        if self.rng.random() < 0.4:
            return f"{article} {self.adj()} {self.role}"
        return f"{article} {self.role}"

    def sentence(self) -> str:
        r = int(self.rng.integers(9))
        if r == 0:
            s = f"{self.pick(TIMES)}, {self.subj(False)} {self.pick(VT)} {self.np_()} {self.pp()}"
        elif r == 1:
            s = f"{self.subj()} {self.pick(VI)} {self.pick(ADVS)}"
        elif r == 2:
            s = f"{self.subj()} {self.pick(VT)} {self.np_()} and {self.pick(VT)} {self.np_()}"
        elif r == 3:
            s = f"{self.subj()} said that {self.np_()} was {self.adj()}"
        elif r == 4:
            s = f"The {self.adj()} {self.thing()} {self.pick(VI)} {self.pp()}"
        elif r == 5:
            s = f"{self.subj()} {self.pick(VT)} {self.np_()} because {self.subj(False)} {self.pick(VI)} {self.pick(ADVS)}"
        elif r == 6:
            s = f"There was {self.np_()} {self.pp()}"
        elif r == 7:
            s = f"{self.subj()} wanted to {self.pick(VBASE)} {self.np_()} {self.pp()}"
        else:
            s = f"{self.subj()} {self.pick(VI)} {self.pp()}, but {self.subj(False)} {self.pick(VI)} {self.pick(ADVS)}"
        s = s[0].upper() + s[1:]
        return s + "."

    def document(self, n_sentences: int) -> str:
        self.topic()
        return " ".join(self.sentence() for _ in range(n_sentences))


def synthetic_documents(n: int, seed: int = 0, min_sentences: int = 12, max_sentences: int = 18) -> list[str]:
    rng = np.random.default_rng(seed)
    g = _Grammar(rng)
    return [g.document(int(rng.integers(min_sentences, max_sentences + 1))) for _ in range(n)]


def synthetic_sentences(n: int, seed: int = 0) -> list[str]:
    rng = np.random.default_rng(seed)
    g = _Grammar(rng)
    g.topic()
    return [g.sentence() for _ in range(n)]


def fixture_sentences() -> list[str]:
    """The frozen 50-sentence fixture corpus shipped with the package."""
    text = resources.files("detectllm.data").joinpath("sentences50.txt").read_text(encoding="utf-8")
    return [line.strip() for line in text.splitlines() if line.strip()]


def toy_corpus_split(n_train: int = 800, n_human: int = 300, seed: int = 0) -> tuple[list[str], list[str]]:
    """Disjoint training documents and held-out "human" documents."""
    train = synthetic_documents(n_train, seed=seed)
    human = synthetic_documents(n_human, seed=seed + 1_000_003)
    return train, human
