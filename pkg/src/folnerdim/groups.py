"""Discrete group presentations with computable word arithmetic and balls.

Each group exposes hashable, sortable words together with ``mul``, ``inv``
and an ``identity``.  ``ball(n)`` returns the n-th member of the group's
window filtration, sorted canonically; these are the candidate index sets P
from which almost-invariant subsets are carved by the boundary rule.
"""

import itertools


class GroupError(ValueError):
    pass


class Group:
    name = "group"
    is_finite = False

    @property
    def identity(self):
        raise NotImplementedError

    def mul(self, a, b):
        raise NotImplementedError

    def inv(self, a):
        raise NotImplementedError

    def ball(self, n):
        raise NotImplementedError

    def elements(self):
        raise GroupError(f"{self.name} is not finite")

    def __repr__(self):
        return self.name


class IntegerLattice(Group):
    """Z^d with boxes [-n, n]^d as windows."""

    def __init__(self, d):
        if d < 1:
            raise GroupError("lattice rank must be >= 1")
        self.d = d
        self.name = "Z" if d == 1 else f"Z^{d}"

    @property
    def identity(self):
        return (0,) * self.d

    def mul(self, a, b):
        return tuple(x + y for x, y in zip(a, b))

    def inv(self, a):
        return tuple(-x for x in a)

    def ball(self, n):
        if n < 1:
            raise GroupError("window index must be >= 1")
        rng = range(-n, n + 1)
        return sorted(itertools.product(rng, repeat=self.d))

    def generators(self):
        gens = []
        for i in range(self.d):
            e = [0] * self.d
            e[i] = 1
            gens.append(tuple(e))
        return gens


class FiniteTableGroup(Group):
    """A finite group given by its multiplication table.

    Elements are the indices 0..m-1; table[a][b] is the product ab.
    The table is validated fully (closure, associativity, identity, inverses).
    """

    is_finite = True

    def __init__(self, table, name=None):
        m = len(table)
        if m == 0:
            raise GroupError("empty multiplication table")
        tbl = tuple(tuple(int(x) for x in row) for row in table)
        for row in tbl:
            if len(row) != m or any(not (0 <= x < m) for x in row):
                raise GroupError("multiplication table is not closed")
        ident = None
        for e in range(m):
            if all(tbl[e][x] == x and tbl[x][e] == x for x in range(m)):
                ident = e
                break
        if ident is None:
            raise GroupError("multiplication table has no identity")
        inverse = [None] * m
        for a in range(m):
            for b in range(m):
                if tbl[a][b] == ident and tbl[b][a] == ident:
                    inverse[a] = b
                    break
            if inverse[a] is None:
                raise GroupError(f"element {a} has no inverse")
        for a in range(m):
            for b in range(m):
                for c in range(m):
                    if tbl[tbl[a][b]][c] != tbl[a][tbl[b][c]]:
                        raise GroupError(f"associativity fails at ({a},{b},{c})")
        self.table = tbl
        self._identity = ident
        self._inverse = tuple(inverse)
        self.order = m
        self.name = name or f"finite({m})"

    @property
    def identity(self):
        return self._identity

    def mul(self, a, b):
        return self.table[a][b]

    def inv(self, a):
        return self._inverse[a]

    def ball(self, n):
        if n < 1:
            raise GroupError("window index must be >= 1")
        return list(range(self.order))

    def elements(self):
        return list(range(self.order))


def cyclic_group(m):
    table = [[(a + b) % m for b in range(m)] for a in range(m)]
    return FiniteTableGroup(table, name=f"Z/{m}")


def dihedral_group(m):
    """Dihedral group of order 2m: elements (r, s) -> index s*m + r."""
    if m < 1:
        raise GroupError("dihedral parameter must be >= 1")

    def compose(a, b):
        ra, sa = a % m, a // m
        rb, sb = b % m, b // m
        # (r^ra s^sa)(r^rb s^sb): s r = r^{-1} s
        r = (ra + (rb if sa == 0 else -rb)) % m
        s = (sa + sb) % 2
        return s * m + r

    table = [[compose(a, b) for b in range(2 * m)] for a in range(2 * m)]
    return FiniteTableGroup(table, name=f"D_{m}")


def symmetric_group(n):
    if n > 5:
        raise GroupError("symmetric_group supports n <= 5")
    perms = sorted(itertools.permutations(range(n)))
    index = {p: i for i, p in enumerate(perms)}

    def compose(a, b):
        pa, pb = perms[a], perms[b]
        return index[tuple(pa[pb[i]] for i in range(n))]

    table = [[compose(a, b) for b in range(len(perms))] for a in range(len(perms))]
    return FiniteTableGroup(table, name=f"S_{n}")


class HeisenbergGroup(Group):
    """Discrete Heisenberg group: words (a, b, c) standing for the upper
    triangular matrix with a, b above the diagonal and c in the corner.

    (a,b,c)(a',b',c') = (a+a', b+b', c+c'+a*b').  Windows are boxes with
    |a|, |b| <= n and |c| <= n^2; the quadratic height matches the growth of
    commutators of box elements.
    """

    name = "heisenberg"

    @property
    def identity(self):
        return (0, 0, 0)

    def mul(self, x, y):
        return (x[0] + y[0], x[1] + y[1], x[2] + y[2] + x[0] * y[1])

    def inv(self, x):
        return (-x[0], -x[1], x[0] * x[1] - x[2])

    def ball(self, n):
        if n < 1:
            raise GroupError("window index must be >= 1")
        out = []
        for a in range(-n, n + 1):
            for b in range(-n, n + 1):
                for c in range(-n * n, n * n + 1):
                    out.append((a, b, c))
        return out

    def generators(self):
        return [(1, 0, 0), (0, 1, 0)]


class LamplighterGroup(Group):
    """Wreath product (Z/2) wr Z.

    Words are (lamps, pos): ``lamps`` is a sorted tuple of lit positions and
    ``pos`` the cursor.  (f,t)(g,s) = (f xor shift_t(g), t+s).  Windows hold
    configurations lit inside [-n, n] with the cursor in [-n, n].
    """

    name = "lamplighter"

    @property
    def identity(self):
        return ((), 0)

    def mul(self, x, y):
        lamps_x, t = x
        lamps_y, s = y
        shifted = {l + t for l in lamps_y}
        return (tuple(sorted(set(lamps_x) ^ shifted)), t + s)

    def inv(self, x):
        lamps, t = x
        return (tuple(sorted(l - t for l in lamps)), -t)

    def ball(self, n):
        if n < 1:
            raise GroupError("window index must be >= 1")
        positions = list(range(-n, n + 1))
        out = []
        for r in range(len(positions) + 1):
            for lamps in itertools.combinations(positions, r):
                for pos in positions:
                    out.append((lamps, pos))
        return sorted(out)

    def generators(self):
        return [((), 1), ((0,), 0)]  # cursor shift and lamp toggle


class ProductGroup(Group):
    """Finite direct product; words are tuples of factor words."""

    def __init__(self, factors):
        if not factors:
            raise GroupError("product of zero groups")
        self.factors = tuple(factors)
        self.is_finite = all(f.is_finite for f in factors)
        self.name = " x ".join(f.name for f in factors)

    @property
    def identity(self):
        return tuple(f.identity for f in self.factors)

    def mul(self, a, b):
        return tuple(f.mul(x, y) for f, x, y in zip(self.factors, a, b))

    def inv(self, a):
        return tuple(f.inv(x) for f, x in zip(self.factors, a))

    def ball(self, n):
        parts = [f.ball(n) for f in self.factors]
        return sorted(itertools.product(*parts))

    def elements(self):
        parts = [f.elements() for f in self.factors]
        return sorted(itertools.product(*parts))


def boundary(group, support, window):
    """The support-boundary of a window: elements pushed outside by support.

    boundary = { g in window : exists s in support with s*g not in window }.
    """
    inside = set(window)
    out = []
    for g in window:
        if any(group.mul(s, g) not in inside for s in support):
            out.append(g)
    return out


def shrink_by_boundary(group, support, window):
    """window minus its support-boundary; every support translate of the
    result stays inside the window."""
    inside = set(window)
    return [g for g in window if all(group.mul(s, g) in inside for s in support)]
