"""Window compression, kernel-dimension estimation and spectral summaries.

The central algorithm: an operator matrix T (entries in a model's dense
algebra) is restricted to a map span(S)^k -> span(P)^k over a Folner window
(P, S).  Because supports are finite and S was shrunk by the support
boundary, the rectangular compressed matrix represents left multiplication
*exactly*; no truncation error enters at this stage.  Kernel and range of
the compression, measured by the relative dimension over the window, satisfy
the rank-nullity identity

    kernel_dim + range_dim = k * dim(S) / dim(P)

exactly, and the kernel dimensions converge to the von Neumann dimension of
ker(T) as the windows grow.  The engine reports the raw sequence; no
convergence rate is claimed.  An optional Richardson-style extrapolation is
provided but is a labeled heuristic.

Square (P -> P) truncations are used only where they belong: the compressed
trace state, spectral moments and eigenvalue densities.
"""

import json
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from . import linalg, scalars
from .dimension import WindowModule, phi_state
from .linalg import DEFAULT_SVD_RTOL
from .models import AlgebraElement, FolnerWindow, WindowError, approx_equal
from .scalars import EXACT, FLOAT, as_complex


class EquivariantOperator:
    """A k x k matrix of algebra elements acting by left multiplication."""

    def __init__(self, entries):
        rows = [list(r) for r in entries]
        k = len(rows)
        if k == 0 or any(len(r) != k for r in rows):
            raise ValueError("operator entries must form a square matrix")
        model = rows[0][0].model
        for r in rows:
            for el in r:
                if el.model is not model:
                    raise ValueError("all entries must share one model")
        self.entries = tuple(tuple(r) for r in rows)
        self.k = k
        self.model = model

    @classmethod
    def from_element(cls, el):
        return cls([[el]])

    def all_entries(self):
        for row in self.entries:
            yield from row

    def adjoint(self):
        k = self.k
        return EquivariantOperator(
            [[self.entries[j][i].adjoint() for j in range(k)] for i in range(k)]
        )

    def __matmul__(self, other):
        if self.model is not other.model or self.k != other.k:
            raise ValueError("operator shapes/models do not match")
        k = self.k
        out = []
        for i in range(k):
            row = []
            for j in range(k):
                acc = self.model.zero()
                for l in range(k):
                    acc = acc + self.entries[i][l] * other.entries[l][j]
                row.append(acc)
            out.append(row)
        return EquivariantOperator(out)

    def support(self):
        return self.model.window_support(list(self.all_entries()))

    def window(self, n):
        return self.model.folner_window(self.support(), n)


class CompressedOperator:
    """The rectangular matrix of T: span(S)^k -> span(P)^k.

    ``entries`` is a sparse {(row, col): scalar} dict in the canonical
    coordinates of the source and target window modules; bookkeeping maps
    positions back to (slot, basis label).
    """

    def __init__(self, window, k, row_module, col_module, entries):
        self.window = window
        self.k = k
        self.row_module = row_module
        self.col_module = col_module
        self.entries = entries

    @property
    def shape(self):
        return (len(self.row_module.coords), len(self.col_module.coords))

    def sector_blocks(self):
        """Split the sparse matrix along sectors of the coefficient action.

        Yields (sector, local_entries, (nrows, ncols), row_positions,
        col_positions).  Left multiplication commutes with the right
        coefficient action, so no entry may cross sectors.
        """
        row_local = {}
        for sec, positions in self.row_module.sector_positions.items():
            for loc, pos in enumerate(positions):
                row_local[pos] = (sec, loc)
        col_local = {}
        for sec, positions in self.col_module.sector_positions.items():
            for loc, pos in enumerate(positions):
                col_local[pos] = (sec, loc)
        per_sector = {sec: {} for sec in self.col_module.sector_positions}
        for (r, c), v in self.entries.items():
            rsec, rloc = row_local[r]
            csec, cloc = col_local[c]
            if rsec != csec:
                raise AssertionError(
                    "compressed operator crosses coefficient sectors; "
                    "the operator is not left-equivariant"
                )
            per_sector[csec][(rloc, cloc)] = v
        for sec in sorted(per_sector):
            rows = self.row_module.sector_positions.get(sec, [])
            cols = self.col_module.sector_positions[sec]
            yield sec, per_sector[sec], (len(rows), len(cols)), rows, cols

    def to_dense_float(self):
        mat = np.zeros(self.shape, dtype=complex)
        for (r, c), v in self.entries.items():
            mat[r, c] = as_complex(v)
        return mat


def compress(op: EquivariantOperator, window: FolnerWindow):
    """Exact rectangular compression of the operator to the window."""
    if window.model is not op.model:
        raise ValueError("window belongs to a different model")
    model = op.model
    k = op.k
    row_module = WindowModule.from_window(window, k, side="outer")
    col_module = WindowModule.from_window(window, k, side="inner")
    entries = {}
    view = row_module._window_for_coords()
    for rl in col_module.refined:
        base = model.basis_element(rl, view)
        for b in range(k):
            ci = col_module.index[(b, rl)]
            for a in range(k):
                t = op.entries[a][b]
                if not t.coeffs:
                    continue
                image = t * base
                coords, leftover = model.coords_of(image, view)
                if leftover:
                    raise WindowError(
                        f"window too small: entry ({a},{b}) maps column index "
                        f"{rl!r} outside the window (first escape: {leftover[0]!r})"
                    )
                for out_rl, val in coords.items():
                    ri = row_module.index[(a, out_rl)]
                    cur = entries.get((ri, ci))
                    new = val if cur is None else cur + val
                    if scalars.is_zero(new):
                        entries.pop((ri, ci), None)
                    else:
                        entries[(ri, ci)] = new
    return CompressedOperator(window, k, row_module, col_module, entries)


@dataclass
class KernelDims:
    kernel_dim: Fraction
    range_dim: Fraction
    dim_outer: Fraction
    dim_inner: Fraction
    ratio: Fraction
    method: str
    sv_gaps: dict = field(default_factory=dict)


def kernel_range_dims(op: EquivariantOperator, window: FolnerWindow,
                      rtol=DEFAULT_SVD_RTOL):
    """Relative dimensions of kernel and range of the compressed operator.

    On the exact backend both values are exact rationals and the identity
    kernel + range = k * dim(S)/dim(P) holds on the nose; the floating
    backend decides ranks by SVD and reports the singular value gap at the
    cutoff for each sector.
    """
    comp = compress(op, window)
    backend = op.model.backend
    kernel = Fraction(0)
    rng = Fraction(0)
    methods = set()
    sv_gaps = {}
    for sec, local, (nrows, ncols), _, _ in comp.sector_blocks():
        if ncols == 0:
            continue
        if backend == EXACT:
            res = linalg.sparse_rank_nullity_exact(local, (nrows, ncols))
        else:
            mat = np.zeros((nrows, ncols), dtype=complex)
            for (r, c), v in local.items():
                mat[r, c] = as_complex(v)
            res = linalg.float_rank_nullity(mat, rtol)
            sv_gaps[sec] = res.sv_gap
        w = op.model.sector_weight(sec)
        kernel += w * res.nullity
        rng += w * res.rank
        methods.add(res.method)
    dim_outer = comp.row_module.dim_base
    dim_inner = comp.col_module.dim_base
    return KernelDims(
        kernel_dim=kernel / dim_outer,
        range_dim=rng / dim_outer,
        dim_outer=dim_outer,
        dim_inner=dim_inner,
        ratio=dim_inner / dim_outer,
        method="+".join(sorted(methods)) if methods else "empty",
        sv_gaps=sv_gaps,
    )


def default_probes(op: EquivariantOperator, cap=12):
    """Probe set for the trace-state check: entries, adjoints, products, 1."""
    probes = [op.model.one()]
    entries = [e for e in op.all_entries() if e.coeffs]
    for e in entries:
        probes.append(e)
        probes.append(e.adjoint())
    for x in entries:
        for y in entries:
            if len(probes) >= cap:
                return probes
            probes.append(x * y)
    return probes[:cap]


def phi_deviation(model, window, probes, rtol=DEFAULT_SVD_RTOL):
    """max over probes of |phi_P(T) - tau(T)| (0.0 for an empty probe set)."""
    if not probes:
        return 0.0
    module = WindowModule.from_window(window, k=1, side="outer")
    worst = 0.0
    for t in probes:
        dev = abs(as_complex(phi_state(module, t)) - as_complex(t.trace()))
        worst = max(worst, dev)
    return worst


@dataclass
class WindowRow:
    n: int
    dim_outer: Fraction
    dim_inner: Fraction
    ratio: Fraction
    kernel_dim: Fraction
    range_dim: Fraction
    phi_dev: float
    seconds: float
    method: str = ""
    sv_gaps: dict = field(default_factory=dict)


@dataclass
class DimensionReport:
    rows: list
    backend: str
    rtol: float
    extrapolated: float | None = None

    @property
    def estimate(self):
        return self.rows[-1].kernel_dim if self.rows else None

    CSV_HEADER = "n,dim_P,dim_S,ratio,a_n,b_n,phi_dev,seconds"

    def _fmt(self, value):
        if self.backend == EXACT:
            return str(value)
        return f"{float(value):.12g}"

    def csv_text(self):
        lines = [self.CSV_HEADER]
        for r in self.rows:
            lines.append(
                ",".join(
                    [
                        str(r.n),
                        self._fmt(r.dim_outer),
                        self._fmt(r.dim_inner),
                        self._fmt(r.ratio),
                        self._fmt(r.kernel_dim),
                        self._fmt(r.range_dim),
                        f"{r.phi_dev:.12g}",
                        f"{r.seconds:.3f}",
                    ]
                )
            )
        return "\n".join(lines) + "\n"

    def to_json_dict(self):
        rows = []
        for r in self.rows:
            rows.append(
                {
                    "n": r.n,
                    "dim_P": self._fmt(r.dim_outer),
                    "dim_S": self._fmt(r.dim_inner),
                    "ratio": self._fmt(r.ratio),
                    "a_n": self._fmt(r.kernel_dim),
                    "b_n": self._fmt(r.range_dim),
                    "phi_dev": float(r.phi_dev),
                    "seconds": round(r.seconds, 3),
                    "method": r.method,
                }
            )
        out = {
            "backend": self.backend,
            "svd_rtol": self.rtol,
            "rows": rows,
            "estimate": self._fmt(self.estimate) if self.rows else None,
        }
        if self.extrapolated is not None:
            out["extrapolated_heuristic"] = self.extrapolated
        return out

    def json_text(self):
        return json.dumps(self.to_json_dict(), indent=2, sort_keys=True) + "\n"


def estimate_vn_kernel_dim(op: EquivariantOperator, schedule, probes=None,
                           jobs=1, rtol=DEFAULT_SVD_RTOL, extrapolate=False):
    """Kernel-dimension estimates along a window schedule.

    Emits one row per window and takes the final value as the estimate;
    the whole sequence is reported because no convergence rate is available.
    """
    schedule = list(schedule)
    if not schedule:
        raise ValueError("empty window schedule")
    if any(b <= a for a, b in zip(schedule, schedule[1:])):
        raise ValueError("window schedule must be strictly increasing")
    model = op.model
    support = op.support()
    if probes is None:
        probes = default_probes(op)

    def run(n):
        start = time.perf_counter()
        window = model.folner_window(support, n)
        dims = kernel_range_dims(op, window, rtol)
        dev = phi_deviation(model, window, probes, rtol)
        elapsed = time.perf_counter() - start
        return WindowRow(
            n=n,
            dim_outer=dims.dim_outer,
            dim_inner=dims.dim_inner,
            ratio=dims.ratio,
            kernel_dim=dims.kernel_dim,
            range_dim=dims.range_dim,
            phi_dev=dev,
            seconds=elapsed,
            method=dims.method,
            sv_gaps=dims.sv_gaps,
        )

    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            rows = list(pool.map(run, schedule))
    else:
        rows = [run(n) for n in schedule]
    report = DimensionReport(rows=rows, backend=model.backend, rtol=rtol)
    if extrapolate and len(rows) >= 2:
        report.extrapolated = richardson_extrapolate(
            [r.n for r in rows], [float(r.kernel_dim) for r in rows]
        )
    return report


def richardson_extrapolate(ns, values):
    """First-order 1/n extrapolation from the last two windows.

    Heuristic only: the window convergence carries no proven rate.
    """
    n1, n2 = ns[-2], ns[-1]
    v1, v2 = values[-2], values[-1]
    return (n2 * v2 - n1 * v1) / (n2 - n1)


# ---------------------------------------------------------------------------
# certificates
# ---------------------------------------------------------------------------

@dataclass
class CertificateResult:
    passed: bool
    containment_ok: bool
    ratio: Fraction
    ratio_ok: bool
    phi_dev: float
    phi_ok: bool
    violations: list
    dim_outer: Fraction
    dim_inner: Fraction
    first_escape: tuple | None = None


def _check_containment(model, ops, window):
    """Index-level check that every op maps span(S) into span(P)."""
    if model.variant == "uhf":
        for i, t in enumerate(ops):
            if t.level > window.level:
                return (i, f"level {t.level}", f"window level {window.level}")
        return None
    inside = set(window.outer)
    if model.variant == "twisted":
        def mul(s, g):
            return (s[0] + g[0], s[1] + g[1])
    else:
        mul = model.group.mul
    supports = [sorted(t.support) for t in ops]
    for g in window.inner:
        for i, supp in enumerate(supports):
            for s in supp:
                if mul(s, g) not in inside:
                    return (i, s, g)
    return None


def verify_folner_certificate(model, ops, window, eps, probes=None,
                              rtol=DEFAULT_SVD_RTOL):
    """Check the window against the strong-Folner clauses for the given ops.

    (a) every op maps span(S) into span(P);
    (b) dim(S)/dim(P) > 1 - eps (exact rational comparison);
    (c) max over probes of |phi_P(T) - tau(T)| < eps.

    Clause (c) is a finite surrogate: the predual distance between the
    compressed state and the trace is not computable from finite data, but
    for all shipped models the state matches the trace exactly, so honest
    probes measure implementation error rather than model error.  Failure is
    reported as a value, never an exception.
    """
    if not ops:
        raise ValueError("certificate needs a nonempty operator set")
    if probes is None:
        probes = list(ops)
    violations = []
    escape = _check_containment(model, ops, window)
    containment_ok = escape is None
    if not containment_ok:
        violations.append(
            f"containment: op {escape[0]} pushes {escape[2]!r} outside via {escape[1]!r}"
        )
    dim_outer = _window_dim(model, window.outer)
    dim_inner = _window_dim(model, window.inner)
    ratio = dim_inner / dim_outer
    eps_frac = Fraction(eps) if not isinstance(eps, float) else Fraction(*eps.as_integer_ratio())
    ratio_ok = ratio > 1 - eps_frac
    if not ratio_ok:
        violations.append(f"dimension ratio {ratio} <= 1 - eps")
    dev = phi_deviation(model, window, probes, rtol)
    phi_ok = dev < float(eps)
    if not phi_ok:
        violations.append(f"trace-state deviation {dev:.3e} >= eps")
    return CertificateResult(
        passed=containment_ok and ratio_ok and phi_ok,
        containment_ok=containment_ok,
        ratio=ratio,
        ratio_ok=ratio_ok,
        phi_dev=dev,
        phi_ok=phi_ok,
        violations=violations,
        dim_outer=dim_outer,
        dim_inner=dim_inner,
        first_escape=escape,
    )


def _window_dim(model, labels):
    total = Fraction(0)
    for lab in labels:
        for rl in model.refine(lab):
            total += model.sector_weight(model.sector_of(rl))
    return total


# ---------------------------------------------------------------------------
# spectral summaries
# ---------------------------------------------------------------------------

def _require_self_adjoint(x):
    if x.model.backend == EXACT:
        if x.adjoint() != x:
            raise ValueError("operator is not self-adjoint")
    elif not approx_equal(x.adjoint(), x, tol=1e-12):
        raise ValueError("operator is not self-adjoint")


def square_compression(x, window):
    """Float matrix of the square truncation P x P in window coordinates.

    Image coefficients outside the window are dropped (that is the point of
    a square truncation); used for moments and densities, where the
    two-window rectangular structure is not required.
    """
    model = x.model
    module = WindowModule.from_window(window, k=1, side="outer")
    view = module._window_for_coords()
    n = len(module.coords)
    mat = np.zeros((n, n), dtype=complex)
    for ci, (_, rl) in enumerate(module.coords):
        image = x * model.basis_element(rl, view)
        coords, _ = model.coords_of(image, view)
        for out_rl, val in coords.items():
            mat[module.index[(0, out_rl)], ci] = as_complex(val)
    return mat, module


@dataclass
class MomentResult:
    exact: list
    compressed: list


def spectral_moments(x, window, m_max):
    """Trace moments tau(x^m), exact by convolution and compressed in the window.

    The exact sequence is backend-exact (repeated algebra products); the
    compressed sequence is evaluated in floating point and converges to the
    exact one as the window grows.
    """
    if m_max < 1:
        raise ValueError("m_max must be >= 1")
    _require_self_adjoint(x)
    exact = []
    cur = x
    for _ in range(m_max):
        exact.append(cur.trace())
        cur = cur * x
    mat, module = square_compression(x, window)
    weights = np.array([float(module.coord_weight(p)) for p in range(mat.shape[0])])
    compressed = []
    power = mat.copy()
    for _ in range(m_max):
        compressed.append(float(np.real(np.sum(weights * np.diag(power)))) / float(module.dim_base))
        power = power @ mat
    return MomentResult(exact=exact, compressed=compressed)


@dataclass
class DensityResult:
    bin_edges: np.ndarray
    masses: np.ndarray
    eigenvalues: np.ndarray
    weights: np.ndarray

    def moment(self, m):
        """m-th moment of the underlying eigenvalue measure."""
        return float(np.sum(self.weights * self.eigenvalues**m))

    def histogram_moment(self, m):
        mids = 0.5 * (self.bin_edges[:-1] + self.bin_edges[1:])
        return float(np.sum(self.masses * mids**m))


def spectral_density(x, window, bins=64, value_range=None):
    """Eigenvalue histogram of the square compression, weighted to mass one.

    Eigenvalues are computed per sector of the coefficient action (each
    sector block is Hermitian); the eigenvalue at position i carries mass
    sector_weight / dim(P), so the masses always total one.
    """
    _require_self_adjoint(x)
    mat, module = square_compression(x, window)
    eigs = []
    wts = []
    dim = float(module.dim_base)
    for sec, positions in sorted(module.sector_positions.items()):
        block = mat[np.ix_(positions, positions)]
        herm_err = np.linalg.norm(block - block.conj().T)
        scale = max(np.linalg.norm(block), 1.0)
        if herm_err > 1e-9 * scale:
            raise ValueError("square compression is not Hermitian")
        vals = np.linalg.eigvalsh(0.5 * (block + block.conj().T))
        eigs.append(vals)
        wts.append(np.full(len(vals), float(module.model.sector_weight(sec)) / dim))
    eigenvalues = np.concatenate(eigs)
    weights = np.concatenate(wts)
    masses, edges = np.histogram(
        eigenvalues, bins=bins, range=value_range, weights=weights
    )
    return DensityResult(
        bin_edges=edges, masses=masses, eigenvalues=eigenvalues, weights=weights
    )
