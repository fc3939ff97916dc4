"""The (q+1)-regular tree with a legal edge coloring.

Vertices are non-backtracking words over the colors {0, ..., q}, rooted at a
fixed base vertex (the empty word).  The edge between a word w and its
extension w + (c,) carries color c; consequently the q+1 edges at any vertex
carry distinct colors, which is exactly a legal coloring.

Ends are eventually periodic infinite words, kept in a normal form (shortest
prefix, primitive period).  An apartment is the bi-infinite geodesic spanned
by two distinct ends.

Automorphisms are *portraits*: the image of the base vertex together with a
local color permutation at every vertex.  Local permutations are finitely
described (an exception table plus a deterministic extension rule) and obey
the legality cocycle: the permutations at the two endpoints of an edge agree
on that edge's color, so the image edge has one well-defined color.  Beyond
their finite description portraits behave like a finite-state machine along
any ray, which is what makes exact end images and axis ends computable: a
walk records a Markov token per vertex, and once the token repeats at the
same phase of the (eventually periodic) input ray, the emitted image letters
provably cycle.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import lcm
from typing import Callable, Iterator, Sequence

from .perms import Perm, compose, identity, invert, transposition


class InsufficientRadius(RuntimeError):
    """A search radius too small to certify a verdict (never a wrong answer)."""


class NotInStabilizer(ValueError):
    """The automorphism does not fix the required end."""


class NotTranslatedSegment(ValueError):
    """The segment/image pair is not in the translated-segment configuration."""


class RepellingFixedEnd(ValueError):
    """Iteration requested at the repelling fixed end."""


class BudgetExhausted(RuntimeError):
    """A pigeonhole walk ran out of budget before finding a repeat."""


class NotHyperbolic(ValueError):
    """A hyperbolic automorphism was required."""


Word = tuple[int, ...]

_END_WALK_CAP = 20000
_AXIS_ITER_CAP = 4096


# ---------------------------------------------------------------------------
# words


def is_nonbacktracking(word: Sequence[int]) -> bool:
    return all(a != b for a, b in zip(word, word[1:]))


def reduce_word(a: Word, b: Word) -> Word:
    """Concatenate two words as paths, cancelling backtracks at the seam."""
    out = list(a)
    for c in b:
        if out and out[-1] == c:
            out.pop()
        else:
            out.append(c)
    return tuple(out)


def lcp_len(a: Sequence[int], b: Sequence[int]) -> int:
    n = 0
    for x, y in zip(a, b):
        if x != y:
            break
        n += 1
    return n


def word_distance(a: Word, b: Word) -> int:
    k = lcp_len(a, b)
    return len(a) + len(b) - 2 * k


def neighbor_word(w: Word, c: int) -> Word:
    return w[:-1] if w and w[-1] == c else w + (c,)


def sphere_words(degree: int, n: int) -> Iterator[Word]:
    """Non-backtracking words of length n over {0, ..., degree-1}, lex order."""

    def extend(w: Word) -> Iterator[Word]:
        if len(w) == n:
            yield w
            return
        for c in range(degree):
            if not w or c != w[-1]:
                yield from extend(w + (c,))

    yield from extend(())


def ball_words(degree: int, radius: int) -> Iterator[Word]:
    for n in range(radius + 1):
        yield from sphere_words(degree, n)


@dataclass(frozen=True)
class TreeVertex:
    """A vertex: a non-backtracking color word from the base vertex."""

    word: Word = ()

    def __post_init__(self):
        w = tuple(int(c) for c in self.word)
        if any(c < 0 for c in w):
            raise ValueError("colors are non-negative integers")
        if not is_nonbacktracking(w):
            raise ValueError(f"backtracking word {w}")
        object.__setattr__(self, "word", w)

    def __len__(self) -> int:
        return len(self.word)

    @property
    def parent(self) -> "TreeVertex":
        if not self.word:
            raise ValueError("the base vertex has no parent")
        return TreeVertex(self.word[:-1])

    def neighbor(self, c: int) -> "TreeVertex":
        return TreeVertex(neighbor_word(self.word, c))

    def distance(self, other: "TreeVertex") -> int:
        return word_distance(self.word, other.word)

    def __repr__(self) -> str:
        return f"TreeVertex({' '.join(map(str, self.word))})"


ROOT = TreeVertex(())


def geodesic(a: TreeVertex, b: TreeVertex) -> list[TreeVertex]:
    """The vertex path from a to b."""
    k = lcp_len(a.word, b.word)
    down = [TreeVertex(a.word[:i]) for i in range(len(a.word), k, -1)]
    up = [TreeVertex(b.word[:i]) for i in range(k, len(b.word) + 1)]
    return down + up


# ---------------------------------------------------------------------------
# ends and apartments


def _primitive(period: Word) -> Word:
    n = len(period)
    for d in range(1, n + 1):
        if n % d == 0 and period == period[:d] * (n // d):
            return period[:d]
    return period


@dataclass(frozen=True)
class TreeEnd:
    """An end: prefix + periodic tail, normalized.

    Normal form: the period is primitive and the prefix is shortest (letters
    shared with the periodic tail are absorbed into it by rotation).  Two
    descriptors denote the same end iff their normal forms are equal.
    """

    prefix: Word
    period: Word

    def __post_init__(self):
        pre = tuple(int(c) for c in self.prefix)
        per = _primitive(tuple(int(c) for c in self.period))
        if not per:
            raise ValueError("period must be nonempty")
        while pre and pre[-1] == per[-1]:
            pre = pre[:-1]
            per = per[-1:] + per[:-1]
        word = pre + per + per[:1]
        if not is_nonbacktracking(word) or (len(per) == 1):
            raise ValueError(f"not a non-backtracking end: prefix={pre} period={per}")
        object.__setattr__(self, "prefix", pre)
        object.__setattr__(self, "period", per)

    def letter(self, k: int) -> int:
        if k < len(self.prefix):
            return self.prefix[k]
        return self.period[(k - len(self.prefix)) % len(self.period)]

    def word_prefix(self, n: int) -> Word:
        return tuple(self.letter(k) for k in range(n))

    def vertex_at(self, n: int) -> TreeVertex:
        if n < 0:
            raise ValueError("rays are indexed by non-negative depth")
        return TreeVertex(self.word_prefix(n))

    def agreement_depth(self, other: "TreeEnd", cap: int = 10000) -> int:
        """Length of the common prefix of the two infinite words (< cap)."""
        if self == other:
            raise ValueError("equal ends agree to infinite depth")
        for k in range(cap):
            if self.letter(k) != other.letter(k):
                return k
        raise RuntimeError("ends agree beyond cap but are not equal")

    def __repr__(self) -> str:
        pre = " ".join(map(str, self.prefix))
        per = " ".join(map(str, self.period))
        return f"TreeEnd({pre} | {per})"


@dataclass(frozen=True)
class TreeApartment:
    """The bi-infinite geodesic spanned by two distinct ends.

    Integer coordinates along the line: 0 at the branch vertex (the point
    where the two rays from the base vertex separate), increasing toward
    end_plus.
    """

    end_minus: TreeEnd
    end_plus: TreeEnd

    def __post_init__(self):
        bound = (
            len(self.end_minus.prefix)
            + len(self.end_plus.prefix)
            + lcm(len(self.end_minus.period), len(self.end_plus.period))
            + 1
        )
        depth = None
        for k in range(bound):
            if self.end_minus.letter(k) != self.end_plus.letter(k):
                depth = k
                break
        if depth is None:
            raise ValueError("the two ends of an apartment must be distinct")
        object.__setattr__(self, "_branch", depth)

    @property
    def branch_depth(self) -> int:
        return self._branch  # type: ignore[attr-defined]

    def vertex_at(self, t: int) -> TreeVertex:
        if t >= 0:
            return self.end_plus.vertex_at(self.branch_depth + t)
        return self.end_minus.vertex_at(self.branch_depth - t)

    def project(self, v: TreeVertex) -> tuple[int, int]:
        """(coordinate of the projection of v onto the line, d(v, line))."""
        L = self.branch_depth
        w = v.word
        mp = lcp_len(w, self.end_plus.word_prefix(len(w)))
        mm = lcp_len(w, self.end_minus.word_prefix(len(w)))
        if mp > L:
            return mp - L, len(w) - mp
        if mm > L:
            return -(mm - L), len(w) - mm
        return 0, len(w) + L - 2 * min(mp, L)

    def coordinate_of(self, v: TreeVertex) -> int | None:
        coord, dist = self.project(v)
        return coord if dist == 0 else None

    def __contains__(self, v: TreeVertex) -> bool:
        return self.coordinate_of(v) is not None


def standard_apartment(c_minus: int = 1, c_plus: int = 0) -> TreeApartment:
    """The line through the base vertex alternating between two colors."""
    if c_minus == c_plus:
        raise ValueError("need two distinct colors")
    plus = TreeEnd((), (c_plus, c_minus))
    minus = TreeEnd((), (c_minus, c_plus))
    return TreeApartment(minus, plus)


@dataclass(frozen=True)
class ConeNeighborhood:
    """Basic neighborhood of an end: agreement with its ray to depth r."""

    ray_target: TreeEnd
    r: int

    def __post_init__(self):
        if self.r < 1:
            raise ValueError("cone neighborhoods need depth r >= 1")

    def contains_end(self, xi: TreeEnd) -> bool:
        return xi.word_prefix(self.r) == self.ray_target.word_prefix(self.r)

    def contains_vertex(self, v: TreeVertex) -> bool:
        return len(v.word) > self.r and v.word[: self.r] == self.ray_target.word_prefix(
            self.r
        )


# ---------------------------------------------------------------------------
# portraits

EXTEND_SPARSE = "sparse"
EXTEND_CONSTANT = "constant"


def _extend_sparse(degree: int, sigma_parent: Perm, c: int) -> Perm:
    forced = sigma_parent[c]
    if forced == c:
        return identity(degree)
    return transposition(degree, c, forced)


def _extend_constant(degree: int, sigma_parent: Perm, c: int) -> Perm:
    return sigma_parent


_EXTENSIONS: dict[str, Callable[[int, Perm, int], Perm]] = {
    EXTEND_SPARSE: _extend_sparse,
    EXTEND_CONSTANT: _extend_constant,
}


class Portrait:
    """Base class: a lazily evaluated automorphism of the colored tree.

    Subclasses provide local permutations ``sigma(v)``, vertex images, and a
    Markov walk-state protocol used for exact end images:

    * ``walk_state(v)`` returns a hashable token or None.  A non-None token
      promises that for any child w = v + (c,), both ``sigma(w)`` and
      ``walk_state(w)`` are functions of (token, c), realized by
      ``step_state``/``state_sigma``.
    * ``step_state(token, c)`` evolves the token down one edge (None when
      the promise cannot be kept from the token alone).
    * ``state_sigma(token)`` recovers the local permutation at the token's
      vertex.

    Instances are immutable apart from internal memo caches, whose fills are
    idempotent; values may be shared between threads.
    """

    degree: int
    base_image: TreeVertex

    # -- interface ---------------------------------------------------------
    def sigma(self, v: TreeVertex) -> Perm:
        raise NotImplementedError

    def image(self, v: TreeVertex) -> TreeVertex:
        raise NotImplementedError

    def walk_state(self, v: TreeVertex):
        raise NotImplementedError

    def step_state(self, state, c: int):
        raise NotImplementedError

    def state_sigma(self, state) -> Perm:
        raise NotImplementedError

    # -- algebra -----------------------------------------------------------
    def compose(self, other: "Portrait") -> "Portrait":
        return ComposedPortrait(self, other)

    def __mul__(self, other: "Portrait") -> "Portrait":
        return self.compose(other)

    def inverse(self) -> "Portrait":
        return InversePortrait(self)

    def power(self, n: int) -> "Portrait":
        if n < 1:
            raise ValueError("power expects n >= 1")
        out: Portrait = self
        for _ in range(n - 1):
            out = out.compose(self)
        return out

    # -- derived geometry ----------------------------------------------------
    def fixes_vertex(self, v: TreeVertex) -> bool:
        return self.image(v) == v

    def displacement(self, v: TreeVertex) -> int:
        return self.image(v).distance(v)

    def image_of_end(self, end: TreeEnd, _abort_if_not: TreeEnd | None = None):
        """Exact image of an eventually periodic end, in normal form.

        Walks the ray to ``end`` pushing vertices through the portrait.  The
        image path is a geodesic ray, so after an initial rootward dip it
        extends by one letter per step; when the walk's Markov token repeats
        at the same phase of the period (with the token chain verified step
        by step), the emitted letters provably cycle and the image end can
        be read off.

        With ``_abort_if_not`` set, returns None as soon as the image is
        certain to differ from the given end.
        """
        pre_len = len(end.prefix)
        per_len = len(end.period)
        v = ROOT
        u: Word = self.base_image.word
        emitted: list[int] = []
        seen: dict = {}
        predicted = None
        extended_once = False
        cap = _END_WALK_CAP + 40 * (pre_len + per_len + len(u))
        for k in range(cap):
            c = end.letter(k)
            sig = self.sigma(v)
            e = sig[c]
            if u and u[-1] == e:
                # image path still dipping toward the root
                u = u[:-1]
                seen.clear()
                predicted = None
            else:
                u = u + (e,)
                emitted.append(e)
                extended_once = True
                if _abort_if_not is not None and _abort_if_not.letter(len(u) - 1) != e:
                    return None
            state = self.walk_state(v)
            if state is None or k < pre_len or not extended_once:
                seen.clear()
                predicted = None
            else:
                if predicted is not None and predicted != state:
                    seen.clear()
                phase = (k - pre_len) % per_len
                key = (phase, state, u[-1] if u else -1)
                hit = seen.get(key)
                if hit is not None:
                    _, emit_count, snapshot = hit
                    period = tuple(emitted[emit_count:])
                    if period:
                        return TreeEnd(snapshot, period)
                seen[key] = (k, len(emitted), u)
                predicted = self.step_state(state, c)
                if predicted is None:
                    # the token chain broke: evolution from here is not a
                    # function of the token, so earlier records prove nothing
                    seen.clear()
            v = v.neighbor(c)
        raise RuntimeError(
            "end image did not stabilize; the portrait is probably not an automorphism"
        )

    def fixes_end(self, end: TreeEnd) -> bool:
        return self.image_of_end(end, _abort_if_not=end) == end


class TablePortrait(Portrait):
    """A portrait given by a base image and a finite exception table.

    ``table`` maps vertex words to local permutations.  Beyond the table the
    portrait extends deterministically by one of two Markov rules:

    * ``sparse``: the identity wherever the legality cocycle permits, else
      the transposition swapping the incoming color with its forced image;
    * ``constant``: copy the parent's permutation (always cocycle-legal;
      keeps all local permutations inside any group containing the table's).
    """

    def __init__(
        self,
        base_image: TreeVertex,
        table: dict | None = None,
        degree: int = 3,
        extension: str = EXTEND_SPARSE,
        strict: bool = True,
    ):
        if degree < 3:
            raise ValueError("thickness requires degree q+1 >= 3")
        self.degree = degree
        self.base_image = base_image
        self.extension = extension
        self._extend = _EXTENSIONS[extension]
        tbl: dict[Word, Perm] = {}
        for key, perm in (table or {}).items():
            w = key.word if isinstance(key, TreeVertex) else tuple(key)
            p = tuple(perm)
            if sorted(p) != list(range(degree)):
                raise ValueError(f"table entry at {w} is not a degree-{degree} permutation")
            tbl[w] = p
        self._table = tbl
        self._table_depth = max((len(w) for w in tbl), default=-1)
        if any(c >= degree for c in base_image.word):
            raise ValueError("base image uses colors outside the degree")
        self._sig_memo: dict[Word, Perm] = {}
        self._img_memo: dict[Word, Word] = {ROOT.word: base_image.word}
        if strict:
            self._check_table_cocycle()

    def _check_table_cocycle(self):
        for w in sorted(self._table, key=len):
            if not w:
                continue
            c = w[-1]
            sp = self.sigma(TreeVertex(w[:-1]))
            if self._table[w][c] != sp[c]:
                raise ValueError(f"legality cocycle violated at table vertex {w}")

    def sigma(self, v: TreeVertex) -> Perm:
        w = v.word
        memo = self._sig_memo
        got = memo.get(w)
        if got is not None:
            return got
        # find the deepest memoized/rooted ancestor, then extend downward
        i = len(w)
        while i > 0 and w[:i] not in memo and w[:i] not in self._table:
            i -= 1
        if w[:i] in memo:
            sig = memo[w[:i]]
        elif w[:i] in self._table:
            sig = self._table[w[:i]]
        else:
            sig = self._table.get((), identity(self.degree))
            memo[()] = sig
        for j in range(i, len(w)):
            prefix = w[: j + 1]
            sig = self._table.get(prefix) or self._extend(self.degree, sig, w[j])
            memo[prefix] = sig
        memo[w] = sig
        return sig

    def image(self, v: TreeVertex) -> TreeVertex:
        w = v.word
        memo = self._img_memo
        got = memo.get(w)
        if got is not None:
            return TreeVertex(got)
        i = len(w)
        while i > 0 and w[:i] not in memo:
            i -= 1
        z = memo[w[:i]]
        for j in range(i, len(w)):
            e = self.sigma(TreeVertex(w[:j]))[w[j]]
            z = neighbor_word(z, e)
            memo[w[: j + 1]] = z
        return TreeVertex(z)

    def walk_state(self, v: TreeVertex):
        if len(v.word) < self._table_depth:
            return None
        return ("T", self.sigma(v))

    def step_state(self, state, c: int):
        return ("T", self._extend(self.degree, state[1], c))

    def state_sigma(self, state) -> Perm:
        return state[1]


class ComposedPortrait(Portrait):
    """outer o inner (apply inner first)."""

    def __init__(self, outer: Portrait, inner: Portrait):
        if outer.degree != inner.degree:
            raise ValueError("composed portraits must share a degree")
        self.degree = outer.degree
        self.outer = outer
        self.inner = inner
        self.base_image = outer.image(inner.base_image)

    def sigma(self, v: TreeVertex) -> Perm:
        return compose(self.outer.sigma(self.inner.image(v)), self.inner.sigma(v))

    def image(self, v: TreeVertex) -> TreeVertex:
        return self.outer.image(self.inner.image(v))

    def walk_state(self, v: TreeVertex):
        sh = self.inner.walk_state(v)
        if sh is None:
            return None
        hv = self.inner.image(v)
        sg = self.outer.walk_state(hv)
        if sg is None:
            return None
        last = hv.word[-1] if hv.word else -1
        return ("C", sh, sg, last)

    def step_state(self, state, c: int):
        _, sh, sg, last = state
        e = self.inner.state_sigma(sh)[c]
        if e == last:
            return None
        sh2 = self.inner.step_state(sh, c)
        sg2 = self.outer.step_state(sg, e)
        if sh2 is None or sg2 is None:
            return None
        return ("C", sh2, sg2, e)

    def state_sigma(self, state) -> Perm:
        _, sh, sg, _ = state
        return compose(self.outer.state_sigma(sg), self.inner.state_sigma(sh))


class InversePortrait(Portrait):
    def __init__(self, inner: Portrait):
        self.degree = inner.degree
        self.inner = inner
        self._img_memo: dict[Word, Word] = {}
        self.base_image = self.image(ROOT)

    def image(self, v: TreeVertex) -> TreeVertex:
        """Preimage of v under the inner portrait, by a guided walk.

        Maintains a cursor y with inner(y) tracking the path from the base
        vertex to v; each step picks the unique neighbor of y whose image
        moves one edge along that path.
        """
        got = self._img_memo.get(v.word)
        if got is not None:
            return TreeVertex(got)
        y = ROOT
        u = self.inner.base_image  # = inner(y)
        # descend to the root of the image side first
        while u != ROOT:
            c = invert(self.inner.sigma(y))[u.word[-1]]
            y = y.neighbor(c)
            u = u.parent
        for j in range(len(v.word)):
            c = invert(self.inner.sigma(y))[v.word[j]]
            y = y.neighbor(c)
        self._img_memo[v.word] = y.word
        return y

    def sigma(self, v: TreeVertex) -> Perm:
        return invert(self.inner.sigma(self.image(v)))

    def walk_state(self, v: TreeVertex):
        z = self.image(v)
        s = self.inner.walk_state(z)
        if s is None:
            return None
        return ("I", s, z.word[-1] if z.word else -1)

    def step_state(self, state, c: int):
        _, s, last = state
        e = invert(self.inner.state_sigma(s))[c]
        if e == last:
            return None
        s2 = self.inner.step_state(s, e)
        if s2 is None:
            return None
        return ("I", s2, e)

    def state_sigma(self, state) -> Perm:
        return invert(self.inner.state_sigma(state[1]))


def parallel_transport(word: Sequence[int], degree: int) -> TablePortrait:
    """The color-preserving automorphism sending the base vertex to ``word``.

    All local permutations are the identity; it lies in every universal
    group.  It is hyperbolic iff the word's first and last letters differ,
    in which case it translates its axis by len(word).
    """
    return TablePortrait(TreeVertex(tuple(word)), {}, degree, EXTEND_SPARSE)


def constant_portrait(base_image: TreeVertex, sigma: Perm, degree: int) -> TablePortrait:
    """A portrait applying the same local permutation at every vertex."""
    return TablePortrait(base_image, {(): sigma}, degree, EXTEND_CONSTANT)


def identity_portrait(degree: int) -> TablePortrait:
    return parallel_transport((), degree)


def transport_between(src: TreeVertex, dst: TreeVertex, degree: int) -> TablePortrait:
    """The color-preserving automorphism with src -> dst."""
    w = reduce_word(dst.word, tuple(reversed(src.word)))
    return parallel_transport(w, degree)


# ---------------------------------------------------------------------------
# isometry classification


@dataclass(frozen=True)
class IsometryClass:
    kind: str  # "elliptic" | "inversion" | "hyperbolic"
    length: int = 0
    fixed_vertex: TreeVertex | None = None
    fixed_edge: tuple[TreeVertex, TreeVertex] | None = None
    axis: TreeApartment | None = None
    axis_vertex: TreeVertex | None = None

    @property
    def is_hyperbolic(self) -> bool:
        return self.kind == "hyperbolic"


def _descend_to_min_displacement(g: Portrait, cap: int) -> TreeVertex:
    # displacement is convex on the tree, so steepest descent finds the
    # global minimum; every strict step reduces the distance to the min set
    v = ROOT
    dv = g.displacement(v)
    while dv > 0:
        improved = None
        for c in range(g.degree):
            u = v.neighbor(c)
            if len(u.word) > cap:
                raise InsufficientRadius("min-displacement descent left the search ball")
            du = g.displacement(u)
            if du < dv:
                improved = (u, du)
                break
        if improved is None:
            break
        v, dv = improved
    return v


def _attracting_end(g: Portrait, start: TreeVertex) -> TreeEnd:
    """lim g^n(start) for hyperbolic g with start on (or near) the axis."""
    v = start
    for _ in range(64):
        w = g.image(v)
        if len(w.word) > len(v.word) and w.word[: len(v.word)] == v.word:
            break
        v = w
    else:
        raise RuntimeError("axis iteration never started extending")
    seen: dict = {}
    predicted = None
    u = v
    for _ in range(_AXIS_ITER_CAP):
        u2 = g.image(u)
        uw, u2w = u.word, u2.word
        if not (len(u2w) > len(uw) and u2w[: len(uw)] == uw):
            raise RuntimeError("axis iteration stopped extending")
        chunk = u2w[len(uw):]
        state = g.walk_state(u)
        if state is None:
            seen.clear()
            predicted = None
        else:
            if predicted is not None and predicted != state:
                seen.clear()
            key = (state, chunk)
            snapshot = seen.get(key)
            if snapshot is not None:
                return TreeEnd(snapshot, uw[len(snapshot):])
            seen[key] = uw
            s = state
            for c in chunk:
                s = g.step_state(s, c)
                if s is None:
                    break
            predicted = s
            if s is None:
                seen.clear()
        u = u2
    raise RuntimeError("axis end did not stabilize")


def classify_isometry(g: Portrait, search_radius: int) -> IsometryClass:
    """Elliptic / inversion / hyperbolic, with certificates.

    Finds the global minimum m of the displacement function by convex
    descent from the base vertex.  m = 0 certifies a fixed vertex; m = 1
    with g(g(v)) = v certifies an inverted edge; otherwise translation along
    [v, g(v)] is certified by d(v, g^2(v)) = 2m, and the translation length
    is cross-checked against max(0, d(x0, g x0) - 2 d(x0, axis)).
    """
    d0 = g.displacement(ROOT)
    if search_radius < d0 + 2:
        raise InsufficientRadius(
            f"search radius {search_radius} below displacement bound {d0 + 2}"
        )
    v = _descend_to_min_displacement(g, search_radius)
    m = g.displacement(v)
    if m == 0:
        return IsometryClass(kind="elliptic", length=0, fixed_vertex=v)
    gv = g.image(v)
    ggv = g.image(gv)
    if m == 1 and ggv == v:
        return IsometryClass(kind="inversion", length=0, fixed_edge=(v, gv))
    if v.distance(ggv) != 2 * m:
        raise InsufficientRadius("could not certify a translation axis in the ball")
    expected = max(0, d0 - 2 * len(v.word))
    if expected != m:
        raise RuntimeError(
            "translation length cross-check failed; portrait is not an automorphism"
        )
    plus = _attracting_end(g, v)
    minus = _attracting_end(g.inverse(), v)
    return IsometryClass(
        kind="hyperbolic",
        length=m,
        axis=TreeApartment(minus, plus),
        axis_vertex=v,
    )


def default_search_radius(g: Portrait) -> int:
    return g.displacement(ROOT) + 4


def is_strongly_regular(g: Portrait, search_radius: int) -> bool:
    """On a tree: strongly regular = hyperbolic.

    The two ends of the axis are chambers of the boundary, automatically
    opposite and interior (chambers of a rank-one boundary are points).
    """
    return classify_isometry(g, search_radius).is_hyperbolic


def hyperbolic_from_segment(
    h: Portrait, seg: Sequence[TreeVertex], image_seg: Sequence[TreeVertex]
) -> IsometryClass:
    """Certify h hyperbolic from a forward-translated segment.

    Requires image_seg = h(seg) pointwise, with image_seg overlapping seg in
    at least one edge and extending it forward; then h translates a line
    containing seg and image_seg by d(seg[0], image_seg[0]), with no global
    displacement search.
    """
    seg = list(seg)
    image_seg = list(image_seg)
    if len(seg) != len(image_seg) or len(seg) < 3:
        raise NotTranslatedSegment("need equal-length segments of >= 3 vertices")
    for v, w in zip(seg, image_seg):
        if h.image(v) != w:
            raise NotTranslatedSegment("image segment is not the pointwise image")
    k = seg[0].distance(image_seg[0])
    if k < 1:
        raise NotTranslatedSegment("zero shift")
    if len(seg) - k < 2:
        raise NotTranslatedSegment("overlap shorter than one edge")
    for i in range(len(seg) - k):
        if image_seg[i] != seg[i + k]:
            raise NotTranslatedSegment("image does not overlap the segment forward")
    union = seg + image_seg[len(seg) - k:]
    for a, b in zip(union, union[1:]):
        if a.distance(b) != 1:
            raise NotTranslatedSegment("segment is not a path")
    for a, b in zip(union, union[2:]):
        if a == b:
            raise NotTranslatedSegment("path backtracks")
    plus = _attracting_end(h, seg[0])
    minus = _attracting_end(h.inverse(), seg[0])
    return IsometryClass(
        kind="hyperbolic",
        length=k,
        axis=TreeApartment(minus, plus),
        axis_vertex=seg[0],
    )


# ---------------------------------------------------------------------------
# retraction from an end, Busemann homomorphism


def retraction(a: TreeApartment, c: TreeEnd, x: TreeVertex) -> int:
    """Retraction onto the apartment based at one of its ends.

    The ray [x, c) merges into the line at the projection p of x; the image
    is the point of the line at distance d(x, p) from p on the far side from
    c.  Restricted to the line this is the identity; the result is reported
    in the line's integer coordinates.
    """
    if c == a.end_plus:
        toward_plus = True
    elif c == a.end_minus:
        toward_plus = False
    else:
        raise ValueError("the retraction end must be an end of the apartment")
    coord, dist = a.project(x)
    return coord - dist if toward_plus else coord + dist


def _certify_fixes_end(g: Portrait, c: TreeEnd):
    if not g.fixes_end(c):
        raise NotInStabilizer("the portrait does not fix the end")


def busemann_beta(a: TreeApartment, c: TreeEnd, g: Portrait) -> int:
    """Translation part of an end-stabilizing automorphism along the line.

    beta_c(g) = retraction(a, c, g(v)) - retraction(a, c, v) for v deep
    enough toward c; independent of v (evaluated at two depths).  Sign
    convention: positive toward c.
    """
    _certify_fixes_end(g, c)
    toward_plus = c == a.end_plus
    depth = len(g.base_image.word) + a.branch_depth + 8
    for attempt in range(2):
        t = depth if toward_plus else -depth
        step = 1 if toward_plus else -1
        vals = []
        for tt in (t, t + step):
            v = a.vertex_at(tt)
            vals.append(retraction(a, c, g.image(v)) - retraction(a, c, v))
        if vals[0] == vals[1]:
            raw = vals[0]
            return raw if toward_plus else -raw
        depth *= 2
    raise RuntimeError("Busemann value did not stabilize at two depths")


def _opposite_ray_end(c: TreeEnd, degree: int) -> TreeEnd:
    first = c.letter(0)
    a = min(x for x in range(degree) if x != first)
    b = min(x for x in range(degree) if x != a)
    return TreeEnd((), (a, b))


def in_Gc0(g: Portrait, c: TreeEnd, search_radius: int) -> bool:
    """Membership in the point-fixing part of the end stabilizer.

    True iff g fixes c and some vertex on the ray [base, c) within the
    searched radius; equivalently the Busemann value vanishes and a fixed
    vertex certifies it.
    """
    _certify_fixes_end(g, c)
    a = TreeApartment(_opposite_ray_end(c, g.degree), c)
    if busemann_beta(a, c, g) != 0:
        return False
    for k in range(search_radius + 1):
        v = c.vertex_at(k)
        if g.image(v) == v:
            return True
    raise InsufficientRadius(
        "vanishing Busemann value but no fixed vertex within the searched radius"
    )


# ---------------------------------------------------------------------------
# dynamics at infinity


def iterate_on_end(a: Portrait, xi: TreeEnd, n: int) -> TreeEnd:
    """a^n(xi) for hyperbolic a; exact, in normal form.

    The repelling axis end is rejected (it is fixed, and every other end
    converges to the attracting one).
    """
    if n < 1:
        raise ValueError("n must be positive")
    cls = classify_isometry(a, default_search_radius(a))
    if not cls.is_hyperbolic:
        raise NotHyperbolic("iteration at infinity needs a hyperbolic automorphism")
    if xi == cls.axis.end_minus:
        raise RepellingFixedEnd("xi is the repelling fixed end")
    out = xi
    for _ in range(n):
        out = a.image_of_end(out)
    return out


def segment_through_apartment(
    a: Portrait, x0: TreeVertex, x: TreeVertex, n: int
) -> int:
    """Length of the geodesic [x0, a^n(x)] intersected with the axis of a."""
    cls = classify_isometry(a, default_search_radius(a))
    if not cls.is_hyperbolic:
        raise NotHyperbolic("the automorphism must be hyperbolic")
    w = x
    for _ in range(n):
        w = a.image(w)
    c0, _ = cls.axis.project(x0)
    c1, _ = cls.axis.project(w)
    return abs(c1 - c0)


def pigeonhole_find_hyperbolic(
    line,
    labels: Callable[[TreeVertex], object],
    transporter: Callable[[TreeVertex, TreeVertex], Portrait | None],
    budget: int,
) -> Portrait:
    """Find a hyperbolic element by label repetition along a line or ray.

    Walks the marked vertices line.vertex_at(0), vertex_at(1), ...; when two
    positions s < t carry equal labels, asks the transporter for a group
    element matching their neighborhoods and certifies it hyperbolic via the
    translated-segment criterion (translation length = t - s).  Transporter
    failures and uncertifiable candidates are skipped, not fatal.
    """
    seen: dict = {}
    for t in range(budget + 1):
        v = line.vertex_at(t)
        lbl = labels(v)
        for s in seen.get(lbl, ()):
            g = transporter(line.vertex_at(s), v)
            if g is None:
                continue
            seg = [line.vertex_at(i) for i in range(s, t + 2)]
            imgs = [g.image(u) for u in seg]
            try:
                hyperbolic_from_segment(g, seg, imgs)
            except NotTranslatedSegment:
                continue
            return g
        seen.setdefault(lbl, []).append(t)
    raise BudgetExhausted(
        f"no certified repeat within budget {budget} ({len(seen)} distinct labels)"
    )
