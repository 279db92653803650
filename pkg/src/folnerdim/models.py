"""Concrete tracial algebras with finitely supported elements and windows.

Four model variants are shipped:

* ``GroupAlgebraModel`` -- the group algebra of an amenable discrete group,
  basis unitaries indexed by group words, coefficients in C.
* ``TwistedTorusModel`` -- the rotation algebra at angle theta: basis
  ``b_(p,q)`` standing for ``u^p v^q`` with ``u v = exp(2 pi i theta) v u``.
  Products pick up the cocycle ``exp(-2 pi i theta * q * p')`` which is the
  unique bilinear phase realizing that commutation relation in this ordering.
* ``CrossedProductModel`` -- functions on a finite probability space twisted
  by a measure-preserving group action; coefficients are per-atom values.
* ``UHFModel`` -- an increasing tower of matrix algebras under unital
  block-diagonal embeddings.

Every model provides Folner windows: a pair ``(P, S)`` of finite basis-index
sets with ``S`` obtained from ``P`` by removing the support boundary, so that
every operator supported in the given set maps span(S) into span(P).

Windowed computations run in the canonical basis of span(P).  For each model
this basis is tau-orthogonal with constant norm inside each sector of the
right coefficient action, so orthogonal projections and matrix compressions
in these coordinates agree with the ones in orthonormal coordinates while
staying exact on the exact backend.
"""

import cmath
import math
from fractions import Fraction

from . import scalars
from .coefficient import SCALAR_ALGEBRA, MultiMatrixAlgebra
from .groups import Group, shrink_by_boundary
from .scalars import EXACT, FLOAT, check_backend, coerce_scalar, conj


class ModelError(ValueError):
    pass


class WindowError(ValueError):
    """A window cannot accommodate the requested operator support."""

    def __init__(self, message, min_n=None):
        if min_n is not None:
            message = f"{message} (smallest admissible window index: {min_n})"
        super().__init__(message)
        self.min_n = min_n


class FolnerWindow:
    """A pair of nested finite basis-index sets (P, S) over one model."""

    def __init__(self, model, outer, inner, n, level=None):
        outer = tuple(outer)
        inner = tuple(inner)
        self.outer_set = frozenset(outer)
        if not set(inner) <= self.outer_set:
            raise WindowError("inner index set must be contained in the outer one")
        self.model = model
        self.outer = outer
        self.inner = inner
        self.n = n
        self.level = level

    def __repr__(self):
        return f"FolnerWindow(n={self.n}, |P|={len(self.outer)}, |S|={len(self.inner)})"


class AlgebraElement:
    """A finitely supported element of a model, in normal form.

    ``coeffs`` maps basis indices to payloads: a scalar for group/twisted and
    UHF models, a tuple of per-atom scalars for crossed products.  Zero
    payloads are pruned so supports stay canonical.
    """

    __slots__ = ("model", "coeffs", "level")

    def __init__(self, model, coeffs, level=None):
        self.model = model
        self.coeffs = coeffs
        self.level = level

    @property
    def support(self):
        return set(self.coeffs)

    def _mate(self, other):
        if self.model is not other.model:
            raise ModelError("elements belong to different models")

    def __add__(self, other):
        if not isinstance(other, AlgebraElement):
            return NotImplemented
        self._mate(other)
        return self.model._add(self, other)

    def __sub__(self, other):
        if not isinstance(other, AlgebraElement):
            return NotImplemented
        self._mate(other)
        return self.model._add(self, self.model._scale(other, -1))

    def __neg__(self):
        return self.model._scale(self, -1)

    def __mul__(self, other):
        if isinstance(other, AlgebraElement):
            self._mate(other)
            return self.model._mul(self, other)
        return self.model._scale(self, other)

    def __rmul__(self, other):
        return self.model._scale(self, other)

    def adjoint(self):
        return self.model._adjoint(self)

    def trace(self):
        return self.model.trace(self)

    def expect(self):
        return self.model.expectation(self)

    def __pow__(self, m):
        if m < 0:
            raise ValueError("only nonnegative powers")
        out = self.model.one()
        for _ in range(m):
            out = out * self
        return out

    def __eq__(self, other):
        if not isinstance(other, AlgebraElement):
            return NotImplemented
        if self.model is not other.model:
            return False
        return self.model._equal(self, other)

    def __repr__(self):
        items = ", ".join(f"{k}: {v}" for k, v in list(self.coeffs.items())[:4])
        more = "..." if len(self.coeffs) > 4 else ""
        return f"AlgebraElement({{{items}{more}}})"


class AlgebraModel:
    """Common machinery for the four model variants."""

    variant = "abstract"

    def __init__(self, backend):
        self.backend = check_backend(backend)
        self.coefficients = SCALAR_ALGEBRA

    # -- element constructors ------------------------------------------------

    def element(self, coeffs, level=None):
        fixed = {}
        for idx, val in coeffs.items():
            payload = self._coerce_payload(val)
            if not self._payload_is_zero(payload):
                fixed[self._fix_index(idx)] = payload
        return AlgebraElement(self, fixed, level)

    def zero(self):
        return AlgebraElement(self, {})

    def one(self):
        raise NotImplementedError

    def basis_vector(self, idx, coeff=1):
        return self.element({idx: coeff})

    def _coerce_payload(self, val):
        return coerce_scalar(val, self.backend)

    def _payload_is_zero(self, payload):
        return scalars.is_zero(payload)

    def _fix_index(self, idx):
        return idx

    # -- generic arithmetic on dict payloads ----------------------------------

    def _add(self, x, y):
        out = dict(x.coeffs)
        for idx, val in y.coeffs.items():
            cur = out.get(idx)
            new = val if cur is None else cur + val
            if self._payload_is_zero(new):
                out.pop(idx, None)
            else:
                out[idx] = new
        return AlgebraElement(self, out, x.level)

    def _scale(self, x, s):
        s = coerce_scalar(s, self.backend)
        if scalars.is_zero(s):
            return AlgebraElement(self, {}, x.level)
        return AlgebraElement(
            self, {idx: self._payload_scale(val, s) for idx, val in x.coeffs.items()}, x.level
        )

    def _payload_scale(self, payload, s):
        return payload * s

    def _equal(self, x, y):
        return x.coeffs == y.coeffs

    def _mul(self, x, y):
        raise NotImplementedError

    def _adjoint(self, x):
        raise NotImplementedError

    def trace(self, x):
        raise NotImplementedError

    def expectation(self, x):
        """Trace-preserving conditional expectation onto the coefficients."""
        raise NotImplementedError

    # -- window machinery ------------------------------------------------------

    def window_support(self, elements):
        """Symmetrized union of supports, the index set windows must absorb."""
        raise NotImplementedError

    def folner_window(self, support, n):
        raise NotImplementedError

    def refine(self, label):
        """Expand a basis index into the canonical coordinate labels."""
        return (label,)

    def num_sectors(self):
        return 1

    def sector_of(self, refined):
        return 0

    def sector_weight(self, sector):
        """Per-coordinate weight of the endomorphism trace in this sector."""
        return Fraction(1)

    def basis_element(self, refined, window):
        raise NotImplementedError

    def coords_of(self, x, window):
        """Coordinates of x in the window's canonical basis.

        Returns ``(coords, leftover)`` where coords maps refined labels inside
        the window to scalars and leftover lists the basis indices of x that
        fall outside the window.
        """
        raise NotImplementedError


def _min_n_hint(group, support, n):
    for trial in range(n + 1, n + 9):
        outer = group.ball(trial)
        if shrink_by_boundary(group, support, outer):
            return trial
    return None


# ---------------------------------------------------------------------------
# group algebras
# ---------------------------------------------------------------------------

class GroupAlgebraModel(AlgebraModel):
    variant = "group"

    def __init__(self, group: Group, backend=EXACT):
        super().__init__(backend)
        self.group = group

    def one(self):
        return self.element({self.group.identity: 1})

    def _mul(self, x, y):
        out = {}
        mul = self.group.mul
        for g, a in x.coeffs.items():
            for h, b in y.coeffs.items():
                idx = mul(g, h)
                cur = out.get(idx)
                new = a * b if cur is None else cur + a * b
                out[idx] = new
        return AlgebraElement(self, {k: v for k, v in out.items() if not scalars.is_zero(v)})

    def _adjoint(self, x):
        inv = self.group.inv
        return AlgebraElement(self, {inv(g): conj(a) for g, a in x.coeffs.items()})

    def trace(self, x):
        return x.coeffs.get(self.group.identity, scalars.zero(self.backend))

    def expectation(self, x):
        return SCALAR_ALGEBRA.element([[[self.trace(x)]]], self.backend)

    def window_support(self, elements):
        supp = set()
        for el in elements:
            supp |= el.support
        supp |= {self.group.inv(g) for g in supp}
        supp.discard(self.group.identity)
        return supp

    def folner_window(self, support, n):
        outer = self.group.ball(n)
        inner = shrink_by_boundary(self.group, support, outer)
        if not inner:
            raise WindowError(
                f"window n={n} too small for support of size {len(support)}",
                min_n=_min_n_hint(self.group, support, n),
            )
        return FolnerWindow(self, outer, inner, n)

    def basis_element(self, refined, window):
        return self.element({refined: 1})

    def coords_of(self, x, window):
        inside = window.outer_set
        coords = {}
        leftover = []
        for g, a in x.coeffs.items():
            if g in inside:
                coords[g] = a
            else:
                leftover.append(g)
        return coords, leftover


# ---------------------------------------------------------------------------
# rotation algebras
# ---------------------------------------------------------------------------

class TwistedTorusModel(AlgebraModel):
    """Rotation algebra at angle theta, floating backend only."""

    variant = "twisted"

    def __init__(self, theta, backend=FLOAT):
        if backend != FLOAT:
            raise ModelError("the rotation algebra requires the floating backend")
        super().__init__(backend)
        theta = float(theta)
        if not 0.0 < theta < 1.0:
            raise ModelError("theta must lie in (0, 1)")
        self.theta = theta

    def cocycle(self, x, y):
        """Phase of b_x b_y; chosen so that u v = exp(2 pi i theta) v u."""
        return cmath.exp(-2j * math.pi * self.theta * x[1] * y[0])

    def one(self):
        return self.element({(0, 0): 1})

    def _fix_index(self, idx):
        p, q = idx
        return (int(p), int(q))

    def _mul(self, x, y):
        out = {}
        for a_idx, a in x.coeffs.items():
            for b_idx, b in y.coeffs.items():
                idx = (a_idx[0] + b_idx[0], a_idx[1] + b_idx[1])
                term = a * b * self.cocycle(a_idx, b_idx)
                cur = out.get(idx)
                out[idx] = term if cur is None else cur + term
        return AlgebraElement(self, {k: v for k, v in out.items() if v != 0})

    def _adjoint(self, x):
        out = {}
        for (p, q), a in x.coeffs.items():
            # (z b_(p,q))^* = conj(z) * phase * b_(-p,-q) with b^* b = 1
            phase = cmath.exp(-2j * math.pi * self.theta * p * q)
            out[(-p, -q)] = conj(a) * phase
        return AlgebraElement(self, out)

    def trace(self, x):
        return x.coeffs.get((0, 0), 0j)

    def expectation(self, x):
        return SCALAR_ALGEBRA.element([[[self.trace(x)]]], self.backend)

    def window_support(self, elements):
        supp = set()
        for el in elements:
            supp |= el.support
        supp |= {(-p, -q) for (p, q) in supp}
        supp.discard((0, 0))
        return supp

    def support_radius(self, support):
        return max((abs(p) + abs(q) for (p, q) in support), default=1) or 1

    def folner_window(self, support, n):
        if n < 1:
            raise WindowError("window index must be >= 1", min_n=1)
        m0 = self.support_radius(support)
        outer = self._l1_ball(n * m0)
        inner = self._l1_ball((n - 1) * m0)
        return FolnerWindow(self, outer, inner, n)

    @staticmethod
    def _l1_ball(r):
        out = []
        for p in range(-r, r + 1):
            rem = r - abs(p)
            for q in range(-rem, rem + 1):
                out.append((p, q))
        return sorted(out)

    def basis_element(self, refined, window):
        return self.element({refined: 1})

    coords_of = GroupAlgebraModel.coords_of


# ---------------------------------------------------------------------------
# crossed products
# ---------------------------------------------------------------------------

class CrossedProductModel(AlgebraModel):
    """Functions on a finite probability space twisted by a group action.

    ``atom_weights`` are the (exact, positive, normalized) atom masses;
    ``action(word) -> tuple`` returns the permutation ``pi`` with
    ``pi[j] = index of word . x_j``.  The action must preserve the weights;
    this is checked for every permutation the model ever evaluates.
    """

    variant = "crossed"

    def __init__(self, group: Group, atom_weights, action, backend=EXACT):
        super().__init__(backend)
        weights = tuple(Fraction(w) for w in atom_weights)
        if not weights or any(w <= 0 for w in weights):
            raise ModelError("atom weights must be positive")
        if sum(weights) != 1:
            raise ModelError(f"atom weights must sum to 1, got {sum(weights)}")
        self.group = group
        self.atom_weights = weights
        self.num_atoms = len(weights)
        self._action = action
        self._perm_cache = {}
        self._inv_perm_cache = {}
        self.coefficients = MultiMatrixAlgebra((1,) * self.num_atoms, weights)

    # -- the action ------------------------------------------------------------

    def perm(self, word):
        cached = self._perm_cache.get(word)
        if cached is not None:
            return cached
        pi = tuple(self._action(word))
        if sorted(pi) != list(range(self.num_atoms)):
            raise ModelError(f"action of {word!r} is not a permutation: {pi}")
        for j, img in enumerate(pi):
            if self.atom_weights[img] != self.atom_weights[j]:
                raise ModelError(f"action of {word!r} does not preserve the weights")
        self._perm_cache[word] = pi
        return pi

    def inv_perm(self, word):
        cached = self._inv_perm_cache.get(word)
        if cached is not None:
            return cached
        pi = self.perm(word)
        inv = [0] * self.num_atoms
        for j, img in enumerate(pi):
            inv[img] = j
        inv = tuple(inv)
        self._inv_perm_cache[word] = inv
        return inv

    def act(self, word, values):
        """alpha_word applied to a per-atom payload."""
        pi = self.perm(word)
        out = [None] * self.num_atoms
        for j, v in enumerate(values):
            out[pi[j]] = v
        return tuple(out)

    # -- payloads ----------------------------------------------------------------

    def _coerce_payload(self, val):
        if isinstance(val, (list, tuple)):
            if len(val) != self.num_atoms:
                raise ModelError(
                    f"crossed coefficients need {self.num_atoms} atom values, got {len(val)}"
                )
            return tuple(coerce_scalar(v, self.backend) for v in val)
        s = coerce_scalar(val, self.backend)
        return (s,) * self.num_atoms

    def _payload_is_zero(self, payload):
        return all(scalars.is_zero(v) for v in payload)

    def _payload_scale(self, payload, s):
        return tuple(v * s for v in payload)

    def one(self):
        return self.element({self.group.identity: 1})

    def function_element(self, values):
        """The function sum_j values[j] 1_{x_j} sitting over the identity."""
        return self.element({self.group.identity: tuple(values)})

    def unitary(self, word):
        return self.element({word: 1})

    def _mul(self, x, y):
        out = {}
        mul = self.group.mul
        for g, a in x.coeffs.items():
            for h, b in y.coeffs.items():
                idx = mul(g, h)
                moved = self.act(g, b)
                term = tuple(av * bv for av, bv in zip(a, moved))
                cur = out.get(idx)
                out[idx] = term if cur is None else tuple(c + t for c, t in zip(cur, term))
        return AlgebraElement(
            self, {k: v for k, v in out.items() if not self._payload_is_zero(v)}
        )

    def _adjoint(self, x):
        inv = self.group.inv
        out = {}
        for g, a in x.coeffs.items():
            gi = inv(g)
            out[gi] = self.act(gi, tuple(conj(v) for v in a))
        return AlgebraElement(self, out)

    def trace(self, x):
        a = x.coeffs.get(self.group.identity)
        if a is None:
            return scalars.zero(self.backend)
        total = scalars.zero(self.backend)
        for w, v in zip(self.atom_weights, a):
            total = total + coerce_scalar(w, self.backend) * v
        return total

    def expectation(self, x):
        a = x.coeffs.get(
            self.group.identity, (scalars.zero(self.backend),) * self.num_atoms
        )
        return self.coefficients.diagonal(list(a), self.backend)

    # -- windows -----------------------------------------------------------------

    def window_support(self, elements):
        supp = set()
        for el in elements:
            supp |= el.support
        supp |= {self.group.inv(g) for g in supp}
        supp.discard(self.group.identity)
        return supp

    def folner_window(self, support, n):
        outer = self.group.ball(n)
        inner = shrink_by_boundary(self.group, support, outer)
        if not inner:
            raise WindowError(
                f"window n={n} too small for support of size {len(support)}",
                min_n=_min_n_hint(self.group, support, n),
            )
        return FolnerWindow(self, outer, inner, n)

    def refine(self, label):
        return tuple((label, i) for i in range(self.num_atoms))

    def num_sectors(self):
        return self.num_atoms

    def sector_of(self, refined):
        word, atom = refined
        return self.inv_perm(word)[atom]

    def sector_weight(self, sector):
        return self.atom_weights[sector]

    def basis_element(self, refined, window):
        word, atom = refined
        z = scalars.zero(self.backend)
        o = scalars.one(self.backend)
        payload = tuple(o if i == atom else z for i in range(self.num_atoms))
        return self.element({word: payload})

    def coords_of(self, x, window):
        inside = window.outer_set
        coords = {}
        leftover = []
        for g, payload in x.coeffs.items():
            if g not in inside:
                leftover.append(g)
                continue
            for i, v in enumerate(payload):
                if not scalars.is_zero(v):
                    coords[(g, i)] = v
        return coords, leftover


def rotation_action(num_atoms):
    """The shift action of Z or Z/m on atoms arranged in a cycle."""

    def act(word):
        t = word if isinstance(word, int) else word[0]
        return tuple((j + t) % num_atoms for j in range(num_atoms))

    return act


def trivial_action(num_atoms):
    def act(word):
        return tuple(range(num_atoms))

    return act


# ---------------------------------------------------------------------------
# UHF towers
# ---------------------------------------------------------------------------

class UHFModel(AlgebraModel):
    """Increasing tower M_{k(1)} -> M_{k(2)} -> ... of matrix algebras.

    The embedding at each step is block diagonal: a matrix repeats
    ``k(n+1)/k(n)`` times down the diagonal, which is unital and
    trace-compatible.  Elements carry the level they were written at; mixed
    arithmetic embeds both operands to the larger level first.
    """

    variant = "uhf"

    def __init__(self, sizes, backend=EXACT):
        super().__init__(backend)
        sizes = tuple(int(k) for k in sizes)
        if not sizes or sizes[0] < 1:
            raise ModelError("the tower needs at least one level of size >= 1")
        for a, b in zip(sizes, sizes[1:]):
            if b % a != 0 or b < a:
                raise ModelError(f"matrix sizes must divide upward, got {a} then {b}")
        self.sizes = sizes

    def size(self, level):
        if not 1 <= level <= len(self.sizes):
            raise ModelError(f"level {level} outside tower of height {len(self.sizes)}")
        return self.sizes[level - 1]

    def matrix_element(self, level, entries):
        """Element at a level from a {(i, j): value} dict."""
        k = self.size(level)
        fixed = {}
        for (i, j), v in entries.items():
            if not (0 <= i < k and 0 <= j < k):
                raise ModelError(f"entry ({i},{j}) outside a {k}x{k} matrix")
            s = coerce_scalar(v, self.backend)
            if not scalars.is_zero(s):
                fixed[(i, j)] = s
        return AlgebraElement(self, fixed, level)

    def one(self, level=1):
        o = scalars.one(self.backend)
        return self.matrix_element(level, {(i, i): o for i in range(self.size(level))})

    def embed(self, x, level):
        if x.level == level:
            return x
        if x.level > level:
            raise ModelError(f"cannot embed level {x.level} down to level {level}")
        k_from = self.size(x.level)
        k_to = self.size(level)
        copies = k_to // k_from
        out = {}
        for (i, j), v in x.coeffs.items():
            for t in range(copies):
                out[(i + t * k_from, j + t * k_from)] = v
        return AlgebraElement(self, out, level)

    def _common(self, x, y):
        level = max(x.level, y.level)
        return self.embed(x, level), self.embed(y, level), level

    def _add(self, x, y):
        a, b, level = self._common(x, y)
        out = dict(a.coeffs)
        for idx, val in b.coeffs.items():
            cur = out.get(idx)
            new = val if cur is None else cur + val
            if scalars.is_zero(new):
                out.pop(idx, None)
            else:
                out[idx] = new
        return AlgebraElement(self, out, level)

    def _mul(self, x, y):
        a, b, level = self._common(x, y)
        rows = {}
        for (i, j), v in b.coeffs.items():
            rows.setdefault(i, []).append((j, v))
        out = {}
        for (i, k), av in a.coeffs.items():
            for j, bv in rows.get(k, ()):
                idx = (i, j)
                term = av * bv
                cur = out.get(idx)
                out[idx] = term if cur is None else cur + term
        return AlgebraElement(
            self, {k2: v for k2, v in out.items() if not scalars.is_zero(v)}, level
        )

    def _adjoint(self, x):
        return AlgebraElement(
            self, {(j, i): conj(v) for (i, j), v in x.coeffs.items()}, x.level
        )

    def _equal(self, x, y):
        a, b, _ = self._common(x, y)
        return a.coeffs == b.coeffs

    def trace(self, x):
        k = self.size(x.level)
        total = scalars.zero(self.backend)
        for (i, j), v in x.coeffs.items():
            if i == j:
                total = total + v
        inv_k = coerce_scalar(Fraction(1, k), self.backend)
        return total * inv_k

    def expectation(self, x):
        return SCALAR_ALGEBRA.element([[[self.trace(x)]]], self.backend)

    # -- windows -------------------------------------------------------------------

    def window_support(self, elements):
        return {el.level for el in elements}

    def folner_window(self, support, n):
        base = max(support) if support else 1
        level = base + n
        if level > len(self.sizes):
            raise WindowError(
                f"window level {level} exceeds the tower height {len(self.sizes)}"
            )
        k = self.size(level)
        labels = [(i, j) for i in range(k) for j in range(k)]
        return FolnerWindow(self, labels, labels, n, level=level)

    def basis_element(self, refined, window):
        return self.matrix_element(window.level, {refined: 1})

    def coords_of(self, x, window):
        if x.level > window.level:
            return {}, [f"level {x.level}"]
        emb = self.embed(x, window.level)
        return dict(emb.coeffs), []

    def element(self, coeffs, level=None):
        if level is None:
            raise ModelError("UHF elements need an explicit level")
        return self.matrix_element(level, coeffs)

    def zero(self, level=1):
        return AlgebraElement(self, {}, level)


def approx_equal(x, y, tol=1e-10):
    """Floating comparison of two elements of one model."""
    if x.model is not y.model:
        return False
    if x.model.variant == "uhf":
        x, y, _ = x.model._common(x, y)
    diff = x - y
    for payload in diff.coeffs.values():
        vals = payload if isinstance(payload, tuple) else (payload,)
        for v in vals:
            if abs(scalars.as_complex(v)) > tol:
                return False
    return True
