"""Windowed modules, their dimensions, closure projections and trace states.

A ``WindowModule`` coordinatizes the span of a finite basis-index window P
(amplified k-fold) over the model's coefficient algebra N.  Coordinates are
taken in the canonical tau-orthogonal basis; each coordinate carries a sector
of the right N-action and every endomorphism trace is the sector-weighted
diagonal sum

    Tr_N(T) = sum_coords weight(sector(coord)) * T[coord, coord],

which reproduces the endomorphism trace of the corresponding normal module.
For N = C all weights are 1 and this is the plain matrix trace.

The submodule calculus (closure projections, relative dimensions, sums and
intersections) decomposes over sectors, where it reduces to ordinary complex
linear algebra, exact or floating according to the model's backend.
"""

from fractions import Fraction

import numpy as np

from . import linalg, scalars
from .coefficient import mm_trace
from .linalg import DEFAULT_SVD_RTOL
from .models import AlgebraElement, FolnerWindow
from .scalars import EXACT, as_complex


class EquivarianceError(ValueError):
    """An operator failed to commute with the right coefficient action."""


class WindowModule:
    """Coordinates for span(P)^k with cached sector data and dimensions."""

    def __init__(self, model, labels, k=1, level=None):
        labels = tuple(labels)
        if not labels:
            raise ValueError("zero-dimensional window modules are rejected")
        if k < 1:
            raise ValueError("amplification degree must be >= 1")
        self.model = model
        self.labels = labels
        self.k = k
        self.level = level
        self._view = _LabelWindow(labels, level)
        refined = []
        for lab in labels:
            refined.extend(model.refine(lab))
        self.refined = tuple(refined)
        self.coords = tuple((slot, rl) for slot in range(k) for rl in refined)
        self.index = {c: i for i, c in enumerate(self.coords)}
        self.sector_ids = tuple(model.sector_of(rl) for slot in range(k) for rl in refined)
        self.sector_positions = {}
        for pos, sec in enumerate(self.sector_ids):
            self.sector_positions.setdefault(sec, []).append(pos)
        self.dim_base = sum(
            (model.sector_weight(model.sector_of(rl)) for rl in refined), Fraction(0)
        )
        self.dim_total = k * self.dim_base

    def coord_weight(self, pos):
        return self.model.sector_weight(self.sector_ids[pos])

    # -- vectors ---------------------------------------------------------------

    def as_vector(self, value):
        """Normalize an element or a k-tuple of elements into a k-tuple."""
        if isinstance(value, AlgebraElement):
            if self.k != 1:
                raise ValueError(f"expected a {self.k}-tuple of elements")
            return (value,)
        vec = tuple(value)
        if len(vec) != self.k:
            raise ValueError(f"expected {self.k} slots, got {len(vec)}")
        return vec

    def vector_coords(self, value):
        """Coordinates of a vector; returns (dict pos -> scalar, leftover)."""
        vec = self.as_vector(value)
        out = {}
        leftover = []
        for slot, el in enumerate(vec):
            coords, left = self.model.coords_of(el, self._window_for_coords())
            leftover.extend((slot, l) for l in left)
            for rl, val in coords.items():
                out[self.index[(slot, rl)]] = val
        return out, leftover

    def _window_for_coords(self):
        return self._view

    def coords_to_vector(self, coord_map):
        """Rebuild a k-tuple of elements from a {position: scalar} map."""
        slots = [self.model.zero() for _ in range(self.k)]
        for pos, val in coord_map.items():
            slot, rl = self.coords[pos]
            slots[slot] = slots[slot] + val * self.model.basis_element(rl, self._window_for_coords())
        return tuple(slots)

    def basis_vector(self, pos):
        slot, rl = self.coords[pos]
        el = self.model.basis_element(rl, self._window_for_coords())
        return tuple(
            el if s == slot else self.model.zero() for s in range(self.k)
        )

    @classmethod
    def from_window(cls, window: FolnerWindow, k=1, side="outer"):
        labels = window.outer if side == "outer" else window.inner
        return cls(window.model, labels, k, level=window.level)


class _LabelWindow:
    def __init__(self, labels, level):
        self.outer = labels
        self.outer_set = frozenset(labels)
        self.level = level


class SubmoduleGens:
    """A finite generating set of an N-submodule of a window module."""

    def __init__(self, module: WindowModule, vectors):
        self.module = module
        fixed = []
        for vec in vectors:
            v = module.as_vector(vec)
            _, leftover = module.vector_coords(v)
            if leftover:
                raise ValueError(
                    f"generator supported outside the window at {leftover[:3]}"
                )
            fixed.append(v)
        self.vectors = tuple(fixed)

    def _mate(self, other):
        if self.module is not other.module:
            raise ValueError("submodules live in different ambient modules")

    def sector_columns(self):
        """Per-sector coordinate columns of the generators.

        Returns {sector: list of columns}; each column is indexed by the
        sector's positions.  Zero columns are dropped.
        """
        module = self.module
        out = {sec: [] for sec in module.sector_positions}
        for vec in self.vectors:
            coords, _ = module.vector_coords(vec)
            for sec, positions in module.sector_positions.items():
                col = [coords.get(pos) for pos in positions]
                if any(c is not None for c in col):
                    zero = scalars.zero(module.model.backend)
                    out[sec].append([zero if c is None else c for c in col])
        return out


def n_inner(model, x, y):
    """The N-valued inner product sum_slots E(x_slot^* y_slot)."""
    xv = x if isinstance(x, tuple) else (x,)
    yv = y if isinstance(y, tuple) else (y,)
    if len(xv) != len(yv):
        raise ValueError(f"slot count mismatch: {len(xv)} vs {len(yv)}")
    total = None
    for a, b in zip(xv, yv):
        term = model.expectation(a.adjoint() * b)
        total = term if total is None else total + term
    return total


def _sector_rank(columns, npos, backend, rtol):
    if not columns:
        return 0
    if backend == EXACT:
        return linalg.exact_rank(columns)  # rank(A^T) = rank(A)
    mat = np.array(columns, dtype=complex)  # rows = columns of the span
    return linalg.float_rank_nullity(mat, rtol).rank


def relative_dimension(gens: SubmoduleGens, rtol=DEFAULT_SVD_RTOL):
    """Dimension of the generated submodule relative to the window.

    Equals Tr_N of the closure projection divided by the dimension of the
    (unamplified) window module; computed per sector from column ranks.
    """
    module = gens.module
    backend = module.model.backend
    total = Fraction(0) if backend == EXACT else 0.0
    for sec, cols in gens.sector_columns().items():
        rank = _sector_rank(cols, len(module.sector_positions[sec]), backend, rtol)
        w = module.model.sector_weight(sec)
        total = total + (w if backend == EXACT else float(w)) * rank
    return total / (module.dim_base if backend == EXACT else float(module.dim_base))


def closure_projection(gens: SubmoduleGens, rtol=DEFAULT_SVD_RTOL):
    """Matrix of the orthogonal projection onto the submodule closure.

    Assembled blockwise over sectors in the module's canonical coordinates;
    exact backend returns nested lists of Gaussian rationals, floating
    backend a complex numpy array.
    """
    module = gens.module
    n = len(module.coords)
    backend = module.model.backend
    cols_by_sector = gens.sector_columns()
    if backend == EXACT:
        proj = [[scalars.QI_ZERO] * n for _ in range(n)]
        for sec, positions in module.sector_positions.items():
            cols = cols_by_sector.get(sec, [])
            if not cols:
                continue
            block = linalg.exact_projection(cols, len(positions))
            for a, pa in enumerate(positions):
                row = proj[pa]
                for b, pb in enumerate(positions):
                    row[pb] = block[a][b]
        return proj
    proj = np.zeros((n, n), dtype=complex)
    for sec, positions in module.sector_positions.items():
        cols = cols_by_sector.get(sec, [])
        if not cols:
            continue
        block = linalg.float_projection(cols, len(positions), rtol)
        proj[np.ix_(positions, positions)] = block
    return proj


def weighted_matrix_trace(module: WindowModule, matrix):
    """Tr_N of an endomorphism given as a matrix in module coordinates."""
    backend = module.model.backend
    if backend == EXACT:
        total = scalars.QI_ZERO
        for pos in range(len(module.coords)):
            w = module.coord_weight(pos)
            total = total + scalars.GaussianRational(w) * matrix[pos][pos]
        return total
    total = 0j
    for pos in range(len(module.coords)):
        total += float(module.coord_weight(pos)) * complex(matrix[pos][pos])
    return total


def tr_n(module: WindowModule, op, basis=None):
    """Endomorphism trace Tr_N.

    ``op`` maps a module vector (k-tuple of elements; a bare element for
    k = 1) to another.  With the default basis the trace is the weighted
    diagonal of the coordinate matrix; when the coefficient algebra has more
    than one sector the image of each basis vector is checked to stay in its
    sector, and a violation names the offending generator.  Passing ``basis``
    (a list of module vectors forming an N-module basis) computes the same
    number as sum_i tau(<u_i, op(u_i)>_N) instead.
    """
    model = module.model
    if basis is not None:
        total = None
        for u in basis:
            uv = module.as_vector(u)
            image = module.as_vector(_apply(op, uv, module))
            val = mm_trace(model.coefficients, n_inner(model, uv, image))
            total = val if total is None else total + val
        return total
    multi_sector = model.num_sectors() > 1
    backend = model.backend
    total = scalars.zero(backend)
    for pos in range(len(module.coords)):
        vec = module.basis_vector(pos)
        image = module.as_vector(_apply(op, vec, module))
        coords, leftover = module.vector_coords(image)
        if leftover:
            raise ValueError(
                f"operator image leaves the window at {leftover[:3]}; "
                "not an endomorphism of the module"
            )
        if multi_sector:
            sec = module.sector_ids[pos]
            for ipos in coords:
                if module.sector_ids[ipos] != sec and not scalars.is_zero(
                    coords[ipos], 1e-12
                ):
                    raise EquivarianceError(
                        f"operator does not commute with the right coefficient "
                        f"action: basis vector {module.coords[pos]} maps across "
                        f"sectors to {module.coords[ipos]}"
                    )
        diag = coords.get(pos)
        if diag is not None:
            total = total + scalars.coerce_scalar(module.coord_weight(pos), backend) * diag
    return total


def _apply(op, vec, module):
    if callable(op) and not isinstance(op, AlgebraElement):
        out = op(vec[0] if module.k == 1 else vec)
    else:
        if module.k != 1:
            raise ValueError("an algebra element acts only on k = 1 modules")
        out = op * vec[0]
    return out


def phi_state(module: WindowModule, op):
    """The compressed trace state: Tr_N(P T P restricted) / dim_N.

    ``op`` is an algebra element (acting by left multiplication) or any
    callable on window elements; its image is truncated back to the window,
    so only the diagonal coordinates enter.
    """
    if module.k != 1:
        raise ValueError("the trace state is defined on unamplified windows")
    model = module.model
    backend = model.backend
    total = scalars.zero(backend)
    for pos in range(len(module.coords)):
        _, rl = module.coords[pos]
        el = model.basis_element(rl, module._window_for_coords())
        image = op * el if isinstance(op, AlgebraElement) else op(el)
        coords, _ = model.coords_of(image, module._window_for_coords())
        diag = coords.get(rl)
        if diag is not None:
            total = total + scalars.coerce_scalar(module.coord_weight(pos), backend) * diag
    if backend == EXACT:
        return total / scalars.GaussianRational(module.dim_base)
    return total / float(module.dim_base)


def intersect(gens1: SubmoduleGens, gens2: SubmoduleGens, rtol=DEFAULT_SVD_RTOL):
    """Generators of the intersection of two submodules (sector by sector)."""
    gens1._mate(gens2)
    module = gens1.module
    backend = module.model.backend
    cols1 = gens1.sector_columns()
    cols2 = gens2.sector_columns()
    vectors = []
    for sec, positions in module.sector_positions.items():
        a, b = cols1.get(sec, []), cols2.get(sec, [])
        if not a or not b:
            continue
        if backend == EXACT:
            meet = linalg.intersect_spans_exact(a, b, len(positions))
        else:
            meet = linalg.intersect_spans_float(a, b, len(positions), rtol)
        for col in meet:
            coord_map = {
                positions[i]: col[i]
                for i in range(len(positions))
                if not scalars.is_zero(col[i], 1e-13)
            }
            if coord_map:
                vectors.append(module.coords_to_vector(coord_map))
    return SubmoduleGens(module, vectors)


def span_sum(gens1: SubmoduleGens, gens2: SubmoduleGens):
    """Generators of the sum of two submodules."""
    gens1._mate(gens2)
    return SubmoduleGens(gens1.module, list(gens1.vectors) + list(gens2.vectors))
