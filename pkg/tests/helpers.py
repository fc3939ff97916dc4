"""Shared constructions for the test suite.

Oracles here are deliberately independent of the library code paths they
check: brute-force counts over balls, direct deep-vertex evaluation for end
images, exhaustive enumeration of constrained local data.
"""

from itertools import permutations
from random import Random

from building_forge.group import LocalGroup
from building_forge.tree import (
    ROOT,
    Portrait,
    TablePortrait,
    TreeVertex,
    ball_words,
    parallel_transport,
)


def make_c3() -> LocalGroup:
    return LocalGroup(3, [(1, 2, 0)])


def make_s3() -> LocalGroup:
    return LocalGroup(3, [(1, 0, 2), (0, 2, 1)])


def make_trivial(degree: int = 3) -> LocalGroup:
    return LocalGroup(degree, [])


def make_s4() -> LocalGroup:
    return LocalGroup(4, [(1, 0, 2, 3), (1, 2, 3, 0)])


def random_k_portrait(rng: Random, degree: int, depth: int = 3) -> TablePortrait:
    """A random base-vertex stabilizer, legal by construction."""
    all_perms = list(permutations(range(degree)))
    table = {(): rng.choice(all_perms)}

    def fill(w, parent_sigma):
        if len(w) >= depth:
            return
        for c in range(degree):
            if w and c == w[-1]:
                continue
            child = w + (c,)
            if rng.random() < 0.6:
                forced = parent_sigma[c]
                choices = [p for p in all_perms if p[c] == forced]
                sigma = rng.choice(choices)
                table[child] = sigma
                fill(child, sigma)

    fill((), table[()])
    return TablePortrait(ROOT, table, degree)


def random_hyperbolic(rng: Random, degree: int = 3) -> tuple[Portrait, int]:
    """(portrait, translation length); mixes plain, conjugated, shifted."""
    n = rng.randint(2, 4)
    word = [rng.randrange(degree)]
    while len(word) < n:
        c = rng.randrange(degree)
        if c != word[-1]:
            word.append(c)
    if word[0] == word[-1]:
        word.append(next(c for c in range(degree) if c not in (word[-1], word[0])))
    t = parallel_transport(tuple(word), degree)
    style = rng.randrange(3)
    if style == 0:
        return t, len(word)
    if style == 1:
        k = random_k_portrait(rng, degree, depth=2)
        return k * t * k.inverse(), len(word)
    h = parallel_transport(tuple(word[:1]) if word[0] != word[-1] else (word[-1],), degree)
    return h * t * h.inverse(), len(word)


def brute_min_displacement(g: Portrait, radius: int) -> tuple[int, TreeVertex]:
    """Independent oracle: scan the whole ball for the smallest displacement."""
    best = None
    for w in ball_words(g.degree, radius):
        v = TreeVertex(w)
        d = g.displacement(v)
        if best is None or d < best[0]:
            best = (d, v)
    return best
