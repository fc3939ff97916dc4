"""Retraction, Busemann values, stabilizer kernels, dynamics at infinity."""

from itertools import permutations
from random import Random

import pytest

from helpers import random_hyperbolic
from building_forge.group import enumerate_ends
from building_forge.tree import (
    ROOT,
    BudgetExhausted,
    NotInStabilizer,
    RepellingFixedEnd,
    TablePortrait,
    TreeApartment,
    TreeEnd,
    TreeVertex,
    ball_words,
    busemann_beta,
    classify_isometry,
    constant_portrait,
    default_search_radius,
    identity_portrait,
    in_Gc0,
    iterate_on_end,
    parallel_transport,
    pigeonhole_find_hyperbolic,
    retraction,
    segment_through_apartment,
    standard_apartment,
    transport_between,
)

A = standard_apartment()
C_PLUS = A.end_plus


def ray_fixing_portrait(rng: Random, degree: int = 3, depth: int = 6) -> TablePortrait:
    """A random automorphism fixing the ray toward the plus end pointwise.

    Local permutations along the ray fix both ray colors; off-ray subtrees
    get random twists that respect the cocycle.  Such elements fix the plus
    end and lie in the point-fixing part of its stabilizer.
    """
    all_perms = list(permutations(range(degree)))
    table = {}
    for k in range(depth):
        v = C_PLUS.vertex_at(k).word
        pin_in = v[-1] if v else None
        pin_out = C_PLUS.letter(k)
        cands = [
            p
            for p in all_perms
            if p[pin_out] == pin_out and (pin_in is None or p[pin_in] == pin_in)
        ]
        table[v] = rng.choice(cands)
    return TablePortrait(ROOT, table, degree)


class TestRetraction:
    def test_identity_on_the_line(self):
        for t in range(-8, 9):
            assert retraction(A, C_PLUS, A.vertex_at(t)) == t
            assert retraction(A, A.end_minus, A.vertex_at(t)) == t

    def test_off_line_example(self):
        # attaches at coordinate 0 at distance 2, pushed away from the end
        x = TreeVertex((2, 0))
        assert retraction(A, C_PLUS, x) == -2
        assert retraction(A, A.end_minus, x) == 2

    def test_needs_end_of_the_apartment(self):
        with pytest.raises(ValueError):
            retraction(A, TreeEnd((), (0, 2)), ROOT)

    def test_one_lipschitz_sampled(self):
        rng = Random(5)
        words = [w for w in ball_words(3, 6)]
        for _ in range(200):
            x = TreeVertex(rng.choice(words))
            y = TreeVertex(rng.choice(words))
            rx, ry = retraction(A, C_PLUS, x), retraction(A, C_PLUS, y)
            assert abs(rx - ry) <= x.distance(y)

    def test_isometry_on_apartments_through_the_end(self):
        # an apartment sharing the plus end, branching at coordinate 2
        b = TreeApartment(TreeEnd((0, 1, 2), (0, 2)), C_PLUS)
        pairs = [(s, t) for s in range(-4, 5) for t in range(-4, 5)]
        for s, t in pairs:
            x, y = b.vertex_at(s), b.vertex_at(t)
            assert abs(retraction(A, C_PLUS, x) - retraction(A, C_PLUS, y)) == x.distance(y)
        # surjective onto a coordinate window
        images = {retraction(A, C_PLUS, b.vertex_at(t)) for t in range(-6, 7)}
        assert len(images) == 13


class TestBusemann:
    def test_translation_values(self):
        g = parallel_transport((0, 1), 3)
        assert busemann_beta(A, C_PLUS, g) == 2
        assert busemann_beta(A, A.end_minus, g) == -2

    def test_kernel_elements(self):
        rng = Random(31)
        for _ in range(5):
            e = ray_fixing_portrait(rng)
            assert busemann_beta(A, C_PLUS, e) == 0

    def test_not_in_stabilizer(self):
        g = parallel_transport((0, 2), 3)  # axis (02)-line, moves the (01)-end
        with pytest.raises(NotInStabilizer):
            busemann_beta(A, C_PLUS, g)

    def test_additive_on_sampled_stabilizer_pairs(self):
        rng = Random(37)
        t = parallel_transport((0, 1), 3)
        pool = [identity_portrait(3), t, t.inverse(), t * t]
        pool += [ray_fixing_portrait(rng) for _ in range(4)]
        for _ in range(50):
            g = rng.choice(pool)
            h = rng.choice(pool)
            assert busemann_beta(A, C_PLUS, g * h) == busemann_beta(
                A, C_PLUS, g
            ) + busemann_beta(A, C_PLUS, h)


class TestPointFixingPart:
    def test_identity_and_translation(self):
        assert in_Gc0(identity_portrait(3), C_PLUS, 4)
        assert not in_Gc0(parallel_transport((0, 1), 3), C_PLUS, 8)

    def test_kernel_iff_beta_zero_with_certificate(self):
        rng = Random(41)
        t = parallel_transport((0, 1), 3)
        for _ in range(10):
            e = ray_fixing_portrait(rng)
            assert in_Gc0(e, C_PLUS, 8)
            assert not in_Gc0(t * e, C_PLUS, 10)

    def test_closed_under_products(self):
        rng = Random(43)
        for _ in range(6):
            g = ray_fixing_portrait(rng)
            h = ray_fixing_portrait(rng)
            assert in_Gc0(g * h, C_PLUS, 10)


class TestIterateOnEnd:
    def test_attracting_end_fixed(self):
        g = parallel_transport((0, 1), 3)
        for n in (1, 3):
            assert iterate_on_end(g, TreeEnd((), (0, 1)), n) == TreeEnd((), (0, 1))

    def test_repelling_end_rejected(self):
        g = parallel_transport((0, 1), 3)
        with pytest.raises(RepellingFixedEnd):
            iterate_on_end(g, TreeEnd((), (1, 0)), 1)

    def test_agreement_depth_growth(self):
        rng = Random(47)
        for _ in range(6):
            g, ell = random_hyperbolic(rng, 3)
            cls = classify_isometry(g, default_search_radius(g))
            eta_plus, eta_minus = cls.axis.end_plus, cls.axis.end_minus
            xi = TreeEnd((), (0, 2))
            if xi in (eta_plus, eta_minus):
                xi = TreeEnd((2, 1), (2, 0))
            if xi in (eta_plus, eta_minus):
                continue
            depths = []
            current = xi
            for n in range(1, 9):
                current = g.image_of_end(current)
                depths.append(current.agreement_depth(eta_plus))
            assert all(a <= b for a, b in zip(depths, depths[1:]))
            deltas = [b - a for a, b in zip(depths, depths[1:])]
            assert deltas[-1] == deltas[-2] == ell

    def test_fixed_end_set_is_the_axis_boundary(self):
        g = parallel_transport((0, 1), 3)
        fixed = [
            xi
            for xi in enumerate_ends(3, max_prefix=6, max_period=3)
            if g.fixes_end(xi)
        ]
        assert sorted(fixed, key=repr) == sorted(
            [TreeEnd((), (0, 1)), TreeEnd((), (1, 0))], key=repr
        )


class TestSegmentThroughApartment:
    def test_on_axis_points(self):
        g = parallel_transport((0, 1), 3)
        x0 = ROOT
        x = TreeVertex((0, 1))  # on the axis at coordinate +2
        for n in range(1, 5):
            assert segment_through_apartment(g, x0, x, n) == 2 * n + 2

    def test_adjacent_off_axis(self):
        g = parallel_transport((0, 1), 3)
        assert segment_through_apartment(g, TreeVertex((2,)), TreeVertex((2, 0)), 0) == 0

    def test_monotone_growth(self):
        rng = Random(53)
        g = parallel_transport((0, 1), 3)
        for _ in range(5):
            words = [w for w in ball_words(3, 4)]
            x0 = TreeVertex(rng.choice(words))
            x = TreeVertex(rng.choice(words))
            vals = [segment_through_apartment(g, x0, x, n) for n in range(13)]
            tail = vals[4:]
            assert all(a <= b for a, b in zip(tail, tail[1:]))


class TestPigeonhole:
    def line_with_unit_translation(self):
        # the (0,1,2)-periodic line admits a step-one translation: constant
        # local 3-cycle with base image (0,)
        line = TreeApartment(TreeEnd((), (2, 1, 0)), TreeEnd((), (0, 1, 2)))
        step = constant_portrait(TreeVertex((0,)), (1, 2, 0), 3)
        return line, step

    def test_constant_labels_give_step_size(self):
        line, step = self.line_with_unit_translation()

        def transporter(u, v):
            gap = line.coordinate_of(v) - line.coordinate_of(u)
            return step.power(gap)

        g = pigeonhole_find_hyperbolic(line, lambda v: 0, transporter, budget=4)
        assert classify_isometry(g, default_search_radius(g)).length == 1

    def test_periodic_labels_give_multiples(self):
        line, step = self.line_with_unit_translation()

        def transporter(u, v):
            gap = line.coordinate_of(v) - line.coordinate_of(u)
            return step.power(gap)

        labels = lambda v: line.coordinate_of(v) % 3
        g = pigeonhole_find_hyperbolic(line, labels, transporter, budget=8)
        assert classify_isometry(g, default_search_radius(g)).length % 3 == 0

    def test_budget_exhausted_on_injective_labels(self):
        line, step = self.line_with_unit_translation()
        with pytest.raises(BudgetExhausted):
            pigeonhole_find_hyperbolic(
                line, lambda v: v.word, lambda u, v: None, budget=5
            )

    def test_works_on_rays(self):
        ray = TreeEnd((), (0, 1))

        def transporter(u, v):
            return transport_between(u, v, 3)

        labels = lambda v: len(v.word) % 2
        g = pigeonhole_find_hyperbolic(ray, labels, transporter, budget=6)
        assert classify_isometry(g, default_search_radius(g)).length == 2
