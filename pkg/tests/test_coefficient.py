"""Multimatrix algebra trace, product and adjoint contracts."""

import random
from fractions import Fraction

import pytest

from folnerdim.coefficient import (
    MultiMatrixAlgebra,
    ShapeMismatchError,
    mm_adjoint,
    mm_inner,
    mm_mult,
    mm_trace,
    multimatrix_from_triples,
)
from folnerdim.scalars import EXACT, GaussianRational as QI


def random_element(algebra, rng):
    blocks = []
    for n in algebra.block_sizes:
        blocks.append(
            [
                [
                    QI(Fraction(rng.randint(-3, 3), rng.randint(1, 4)),
                       Fraction(rng.randint(-3, 3), rng.randint(1, 4)))
                    for _ in range(n)
                ]
                for _ in range(n)
            ]
        )
    return algebra.element(blocks)


M2 = MultiMatrixAlgebra((2,), (Fraction(1, 2),))
C2 = MultiMatrixAlgebra((1, 1), (Fraction(1, 2), Fraction(1, 2)))
MIXED = MultiMatrixAlgebra((2, 1), (Fraction(1, 3), Fraction(1, 3)))


class TestConstruction:
    def test_normalization_enforced(self):
        with pytest.raises(ValueError, match="normalization"):
            MultiMatrixAlgebra((2,), (Fraction(1),))

    def test_degenerate_rejected(self):
        with pytest.raises(ValueError):
            MultiMatrixAlgebra((), ())
        with pytest.raises(ValueError):
            MultiMatrixAlgebra((0, 1), (Fraction(1, 2), Fraction(1, 2)))
        with pytest.raises(ValueError):
            MultiMatrixAlgebra((1,), (Fraction(-1),))

    def test_from_triples(self):
        alg = multimatrix_from_triples([(2, 1, 4), (1, 1, 2)])
        assert alg.block_sizes == (2, 1)
        assert alg.block_weights == (Fraction(1, 4), Fraction(1, 2))

    def test_shape_mismatch(self):
        with pytest.raises(ShapeMismatchError):
            M2.element([[[1]]])


class TestTrace:
    def test_normalized_identity(self):
        for alg in (M2, C2, MIXED):
            assert mm_trace(alg, alg.identity()) == QI(1)

    def test_scalar_case(self):
        scalar = MultiMatrixAlgebra((1,), (Fraction(1),))
        assert mm_trace(scalar, scalar.identity()) == QI(1)

    def test_m2_half_projection(self):
        a = M2.element([[[1, 0], [0, 0]]])
        assert mm_trace(M2, a) == QI(Fraction(1, 2))

    def test_two_point_space(self):
        a = C2.diagonal([1, 0])
        assert mm_trace(C2, a) == QI(Fraction(1, 2))

    def test_trace_property(self):
        rng = random.Random(41)
        for alg in (M2, C2, MIXED):
            for _ in range(5):
                a, b = random_element(alg, rng), random_element(alg, rng)
                assert mm_trace(alg, mm_mult(alg, a, b)) == mm_trace(alg, mm_mult(alg, b, a))

    def test_faithful(self):
        rng = random.Random(43)
        for _ in range(5):
            a = random_element(MIXED, rng)
            norm = mm_trace(MIXED, mm_mult(MIXED, mm_adjoint(MIXED, a), a))
            assert norm.im == 0 and norm.re >= 0
            if not a.is_zero():
                assert norm.re > 0

    def test_cauchy_schwarz(self):
        rng = random.Random(47)
        for _ in range(5):
            a, b = random_element(M2, rng), random_element(M2, rng)
            lhs = mm_inner(M2, a, b).abs2()
            rhs = mm_inner(M2, a, a).re * mm_inner(M2, b, b).re
            assert lhs <= rhs


class TestProductAdjoint:
    def test_unit_law(self):
        rng = random.Random(53)
        a = random_element(MIXED, rng)
        assert mm_mult(MIXED, MIXED.identity(), a) == a
        assert mm_mult(MIXED, a, MIXED.identity()) == a

    def test_matrix_units(self):
        e12 = M2.element([[[0, 1], [0, 0]]])
        e21 = M2.element([[[0, 0], [1, 0]]])
        e11 = M2.element([[[1, 0], [0, 0]]])
        assert mm_mult(M2, e12, e21) == e11

    def test_adjoint_antimultiplicative(self):
        rng = random.Random(59)
        a, b = random_element(M2, rng), random_element(M2, rng)
        lhs = mm_adjoint(M2, mm_mult(M2, a, b))
        rhs = mm_mult(M2, mm_adjoint(M2, b), mm_adjoint(M2, a))
        assert lhs == rhs

    def test_associative(self):
        rng = random.Random(61)
        a, b, c = (random_element(MIXED, rng) for _ in range(3))
        assert mm_mult(MIXED, mm_mult(MIXED, a, b), c) == mm_mult(MIXED, a, mm_mult(MIXED, b, c))
