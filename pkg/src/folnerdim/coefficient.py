"""Multimatrix coefficient algebras with a normalized faithful trace.

A ``MultiMatrixAlgebra`` is a direct sum of full matrix blocks
``M_{n_1} + ... + M_{n_r}`` carrying the trace

    tau(a) = sum_i w_i * Tr(a_i)          (per-block traces unnormalized)

with positive rational weights normalized so that ``sum_i w_i * n_i = 1``.
Block weights are always exact rationals; only the matrix entries follow the
chosen scalar backend.
"""

from fractions import Fraction

from . import scalars
from .scalars import EXACT, FLOAT, check_backend, coerce_scalar, conj, parse_rational


class ShapeMismatchError(ValueError):
    """An element's blocks do not match the owning algebra."""


class MultiMatrixAlgebra:
    def __init__(self, block_sizes, block_weights):
        sizes = tuple(int(n) for n in block_sizes)
        weights = tuple(parse_rational(w) for w in block_weights)
        if not sizes:
            raise ValueError("a multimatrix algebra needs at least one block")
        if len(sizes) != len(weights):
            raise ValueError("block_sizes and block_weights must have equal length")
        if any(n < 1 for n in sizes):
            raise ValueError(f"block sizes must be >= 1, got {sizes}")
        if any(w <= 0 for w in weights):
            raise ValueError(f"block weights must be > 0, got {weights}")
        total = sum(w * n for w, n in zip(weights, sizes))
        if total != 1:
            raise ValueError(f"trace normalization violated: sum w_i n_i = {total} != 1")
        self.block_sizes = sizes
        self.block_weights = weights

    @property
    def num_blocks(self):
        return len(self.block_sizes)

    def __eq__(self, other):
        return (
            isinstance(other, MultiMatrixAlgebra)
            and self.block_sizes == other.block_sizes
            and self.block_weights == other.block_weights
        )

    def __repr__(self):
        blocks = ", ".join(
            f"M_{n}(w={w})" for n, w in zip(self.block_sizes, self.block_weights)
        )
        return f"MultiMatrixAlgebra({blocks})"

    # -- element constructors -------------------------------------------------

    def element(self, blocks, backend=EXACT):
        return CoefficientElement(self, blocks, backend)

    def identity(self, backend=EXACT):
        one = scalars.one(backend)
        zero = scalars.zero(backend)
        blocks = [
            [[one if i == j else zero for j in range(n)] for i in range(n)]
            for n in self.block_sizes
        ]
        return CoefficientElement(self, blocks, backend)

    def zero(self, backend=EXACT):
        z = scalars.zero(backend)
        blocks = [[[z] * n for _ in range(n)] for n in self.block_sizes]
        return CoefficientElement(self, blocks, backend)

    def diagonal(self, values, backend=EXACT):
        """Element with the given scalar on the diagonal of each 1x1 block.

        Only valid when every block has size 1 (the abelian case used for
        function algebras on finite probability spaces).
        """
        if any(n != 1 for n in self.block_sizes):
            raise ShapeMismatchError("diagonal() requires all blocks of size 1")
        if len(values) != self.num_blocks:
            raise ShapeMismatchError(
                f"expected {self.num_blocks} diagonal values, got {len(values)}"
            )
        return CoefficientElement(self, [[[v]] for v in values], backend)


class CoefficientElement:
    """An element of a multimatrix algebra, stored blockwise."""

    def __init__(self, algebra, blocks, backend=EXACT):
        check_backend(backend)
        if len(blocks) != algebra.num_blocks:
            raise ShapeMismatchError(
                f"expected {algebra.num_blocks} blocks, got {len(blocks)}"
            )
        fixed = []
        for n, block in zip(algebra.block_sizes, blocks):
            if len(block) != n or any(len(row) != n for row in block):
                raise ShapeMismatchError(f"block must be {n}x{n}")
            fixed.append(tuple(tuple(coerce_scalar(x, backend) for x in row) for row in block))
        self.algebra = algebra
        self.blocks = tuple(fixed)
        self.backend = backend

    def _check_mate(self, other):
        if self.algebra != other.algebra or self.backend != other.backend:
            raise ShapeMismatchError("elements belong to different algebras/backends")

    def __add__(self, other):
        self._check_mate(other)
        return CoefficientElement(
            self.algebra,
            [
                [[a + b for a, b in zip(ra, rb)] for ra, rb in zip(ba, bb)]
                for ba, bb in zip(self.blocks, other.blocks)
            ],
            self.backend,
        )

    def __sub__(self, other):
        self._check_mate(other)
        return CoefficientElement(
            self.algebra,
            [
                [[a - b for a, b in zip(ra, rb)] for ra, rb in zip(ba, bb)]
                for ba, bb in zip(self.blocks, other.blocks)
            ],
            self.backend,
        )

    def scale(self, scalar):
        s = coerce_scalar(scalar, self.backend)
        return CoefficientElement(
            self.algebra,
            [[[s * a for a in row] for row in block] for block in self.blocks],
            self.backend,
        )

    def __neg__(self):
        return self.scale(-1)

    def __eq__(self, other):
        if not isinstance(other, CoefficientElement):
            return NotImplemented
        return (
            self.algebra == other.algebra
            and self.backend == other.backend
            and self.blocks == other.blocks
        )

    def is_zero(self, tol=0.0):
        return all(
            scalars.is_zero(a, tol) for block in self.blocks for row in block for a in row
        )

    def __repr__(self):
        return f"CoefficientElement({self.blocks!r})"


def mm_trace(algebra, a):
    """tau(a) = sum_i w_i * Tr(block_i)."""
    if a.algebra != algebra:
        raise ShapeMismatchError("element does not belong to this algebra")
    total = scalars.zero(a.backend)
    for w, n, block in zip(algebra.block_weights, algebra.block_sizes, a.blocks):
        diag = block[0][0]
        for i in range(1, n):
            diag = diag + block[i][i]
        total = total + coerce_scalar(w, a.backend) * diag
    return total


def mm_mult(algebra, a, b):
    """Blockwise matrix product."""
    if a.algebra != algebra or b.algebra != algebra:
        raise ShapeMismatchError("element does not belong to this algebra")
    a._check_mate(b)
    out = []
    for n, ba, bb in zip(algebra.block_sizes, a.blocks, b.blocks):
        block = []
        for i in range(n):
            row = []
            for j in range(n):
                acc = scalars.zero(a.backend)
                for k in range(n):
                    acc = acc + ba[i][k] * bb[k][j]
                row.append(acc)
            block.append(row)
        out.append(block)
    return CoefficientElement(algebra, out, a.backend)


def mm_adjoint(algebra, a):
    """Blockwise conjugate transpose."""
    if a.algebra != algebra:
        raise ShapeMismatchError("element does not belong to this algebra")
    out = []
    for n, block in zip(algebra.block_sizes, a.blocks):
        out.append([[conj(block[j][i]) for j in range(n)] for i in range(n)])
    return CoefficientElement(algebra, out, a.backend)


def mm_inner(algebra, a, b):
    """tau(a^* b), the tracial inner product on the algebra."""
    return mm_trace(algebra, mm_mult(algebra, mm_adjoint(algebra, a), b))


SCALAR_ALGEBRA = MultiMatrixAlgebra((1,), (Fraction(1),))


def multimatrix_from_triples(triples):
    """Build an algebra from (block_size, weight_numerator, weight_denominator) triples.

    This is the on-disk description used by config files.
    """
    sizes = []
    weights = []
    for t in triples:
        if len(t) != 3:
            raise ValueError(f"expected (size, num, den) triple, got {t!r}")
        size, num, den = t
        sizes.append(int(size))
        weights.append(Fraction(int(num), int(den)))
    return MultiMatrixAlgebra(sizes, weights)
