"""Independent ground-truth computations for validating the engine.

* Fourier oracle on Z^d: a convolution operator matrix diagonalizes into a
  matrix of Laurent polynomials (its symbol); trace moments become torus
  integrals evaluated by trapezoid quadrature with enough points to be exact
  for trigonometric polynomials, and kernel dimensions become the average
  corank of the symbol over the torus.
* Finite groups: the left regular representation turns an operator matrix
  into an honest k|G| x k|G| matrix whose exact nullity, divided by |G|,
  is the kernel dimension.

These paths share only low-level elimination primitives with the engine;
matrix assembly and the measurement formulas are independent.
"""

import itertools
from fractions import Fraction

import numpy as np

from . import linalg
from .linalg import DEFAULT_SVD_RTOL
from .scalars import EXACT, GaussianRational, as_complex


class SymbolMatrix:
    """A k x k matrix of Laurent polynomials in d torus variables.

    Entries map exponent tuples to complex coefficients: entry (a, b) is
    sum_g coeff * z^g, the Fourier transform of the (a, b) operator entry.
    """

    def __init__(self, k, d, entries):
        self.k = k
        self.d = d
        fixed = [[dict() for _ in range(k)] for _ in range(k)]
        for a in range(k):
            for b in range(k):
                for g, c in entries[a][b].items():
                    g = tuple(int(x) for x in g)
                    if len(g) != d:
                        raise ValueError(f"exponent {g} has rank != {d}")
                    c = complex(c)
                    if c != 0:
                        fixed[a][b][g] = c
        self.entries = fixed

    @classmethod
    def from_operator(cls, op):
        """Symbol of an operator over an integer lattice group model."""
        model = op.model
        if model.variant != "group" or not hasattr(model.group, "d"):
            raise ValueError("symbols exist only over integer lattice models")
        d = model.group.d
        entries = [
            [
                {g: as_complex(c) for g, c in op.entries[a][b].coeffs.items()}
                for b in range(op.k)
            ]
            for a in range(op.k)
        ]
        return cls(op.k, d, entries)

    def degree(self, axis):
        deg = 0
        for row in self.entries:
            for poly in row:
                for g in poly:
                    deg = max(deg, abs(g[axis]))
        return deg

    def is_self_adjoint(self):
        """Check sym(theta)^* = sym(theta) symbolically: conj(c[a][b][g]) = c[b][a][-g]."""
        for a in range(self.k):
            for b in range(self.k):
                for g, c in self.entries[a][b].items():
                    mirror = self.entries[b][a].get(tuple(-x for x in g), 0j)
                    if abs(c.conjugate() - mirror) > 1e-12:
                        return False
        return True

    def evaluate_grid(self, points_per_axis, offset=0.0):
        """Evaluate the symbol on the product grid theta_j = (j + offset)/N.

        Returns an array of shape grid_shape + (k, k).
        """
        axes = [
            (np.arange(n) + offset) / n if n > 0 else np.zeros(0)
            for n in points_per_axis
        ]
        shape = tuple(points_per_axis)
        out = np.zeros(shape + (self.k, self.k), dtype=complex)
        for a in range(self.k):
            for b in range(self.k):
                for g, c in self.entries[a][b].items():
                    phase = np.ones(shape, dtype=complex)
                    for axis, e in enumerate(g):
                        if e:
                            ax_phase = np.exp(2j * np.pi * e * axes[axis])
                            broadcast = [1] * len(shape)
                            broadcast[axis] = shape[axis]
                            phase = phase * ax_phase.reshape(broadcast)
                    out[..., a, b] += c * phase
        return out


def torus_moment_oracle(sym: SymbolMatrix, m):
    """integral over the torus of Tr(sym(theta)^m).

    Trapezoid quadrature with degree*m + 1 points per axis integrates every
    frequency appearing in sym^m exactly, so the only error is floating
    round-off.  m = 0 returns k.
    """
    if not sym.is_self_adjoint():
        raise ValueError("moment oracle requires a self-adjoint symbol")
    if m == 0:
        return float(sym.k)
    points = [sym.degree(axis) * m + 1 for axis in range(sym.d)]
    grid = sym.evaluate_grid(points)
    power = grid
    for _ in range(m - 1):
        power = power @ grid
    traces = np.trace(power, axis1=-2, axis2=-1)
    return float(np.real(np.mean(traces)))


def torus_kernel_oracle(sym: SymbolMatrix, grid_cap=512, rtol=DEFAULT_SVD_RTOL):
    """integral over the torus of (k - rank sym(theta)): the kernel dimension.

    For k = 1 the answer is analytic (a nonzero trigonometric polynomial
    vanishes on a null set).  For k > 1 the corank is averaged on a midpoint
    grid; midpoints dodge the rational rank-drop points of the shipped
    examples, but in general this is a measure estimate, not a certificate.
    """
    if sym.k == 1:
        nonzero = any(sym.entries[0][0].values())
        return 0.0 if nonzero else 1.0
    per_axis = min(grid_cap, max(8, int(round((grid_cap**2) ** (1.0 / sym.d)))))
    per_axis = min(per_axis, grid_cap)
    points = [per_axis] * sym.d
    grid = sym.evaluate_grid(points, offset=0.5)
    flat = grid.reshape(-1, sym.k, sym.k)
    sv = np.linalg.svd(flat, compute_uv=False)
    cutoff = rtol * sv[:, 0] * sym.k
    ranks = np.sum(sv > cutoff[:, None], axis=1)
    return float(np.mean(sym.k - ranks))


def finite_group_oracle(group, op):
    """Exact kernel dimension of an operator matrix over a finite group.

    The operator becomes a k|G| x k|G| matrix through the left regular
    representation, assembled directly from permutation matrices; the
    dimension is the exact nullity divided by |G|.
    """
    if not group.is_finite:
        raise ValueError("the regular-representation oracle needs a finite group")
    if op.model.backend != EXACT:
        raise ValueError("the finite-group oracle is exact-backend only")
    elements = list(group.elements())
    order = len(elements)
    index = {g: i for i, g in enumerate(elements)}
    k = op.k
    n = k * order
    entries = {}
    for a in range(k):
        for b in range(k):
            for g, c in op.entries[a][b].coeffs.items():
                # left multiplication by g: basis vector h -> g*h
                for h_idx, h in enumerate(elements):
                    r = a * order + index[group.mul(g, h)]
                    col = b * order + h_idx
                    cur = entries.get((r, col))
                    entries[(r, col)] = c if cur is None else cur + c
    entries = {rc: v for rc, v in entries.items() if v}
    if not entries:
        return Fraction(k)
    rows = [[GaussianRational(0)] * n for _ in range(n)]
    for (r, c), v in entries.items():
        rows[r][c] = v
    rank, _ = linalg.exact_nullspace(rows, n)
    return Fraction(n - rank, order)
