"""Rank, nullspace and projection machinery over both scalar backends.

Exact matrices are lists of lists of GaussianRational; sparse matrices are
``{(row, col): scalar}`` dicts.  Floating matrices are numpy complex arrays.

Ranks over the exact backend are always *certified*:

* small or basis-producing problems run dense Gaussian elimination over the
  Gaussian rationals;
* large problems run eliminations modulo word-sized primes.  A prime rank r
  is a rigorous lower bound for the rational rank, so ``nullity <= cols - r``.
  The matching lower bound on the nullity comes from lifting the mod-p kernel
  basis to exact rationals (Wang reconstruction, CRT across primes when
  needed) and verifying ``A v = 0`` exactly.  Only when both bounds meet is
  the answer returned; otherwise more primes are tried and, as a last resort,
  the dense exact elimination runs.

Floating ranks use SVD with the cutoff ``rtol * s_max * max(shape)``; the
singular values bracketing the cutoff are reported so borderline decisions
stay visible.
"""

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .scalars import EXACT, FLOAT, GaussianRational, QI_ONE, QI_ZERO, check_backend

DEFAULT_SVD_RTOL = 1e-10

# dense exact elimination is preferred up to this many rows/columns
SMALL_EXACT_LIMIT = 64

_MAX_PRIMES = 100

# prime counts at which a rational lift of the modular kernel is attempted;
# dense random kernels need many primes, structured kernels succeed at once
_LIFT_SCHEDULE = frozenset([1, 2, 3, 4, 6, 8, 12, 16, 24, 32, 44, 60, 80, 100])


class NumericalBackendError(RuntimeError):
    """Raised when neither the modular nor the dense exact path can finish."""


# ---------------------------------------------------------------------------
# dense exact elimination
# ---------------------------------------------------------------------------

def exact_rref(rows):
    """Reduced row echelon form over Gaussian rationals.

    Mutates and returns ``rows`` together with ``(rank, pivot_cols)``.
    """
    if not rows:
        return rows, 0, []
    ncols = len(rows[0])
    piv_r = 0
    pivot_cols = []
    for j in range(ncols):
        pivot = None
        for i in range(piv_r, len(rows)):
            if rows[i][j]:
                pivot = i
                break
        if pivot is None:
            continue
        if pivot != piv_r:
            rows[piv_r], rows[pivot] = rows[pivot], rows[piv_r]
        pv = rows[piv_r][j]
        if pv != QI_ONE:
            inv = QI_ONE / pv
            rows[piv_r] = [x * inv for x in rows[piv_r]]
        prow = rows[piv_r]
        for i in range(len(rows)):
            if i == piv_r:
                continue
            f = rows[i][j]
            if f:
                rows[i] = [a - f * b for a, b in zip(rows[i], prow)]
        pivot_cols.append(j)
        piv_r += 1
        if piv_r == len(rows):
            break
    return rows, piv_r, pivot_cols


def exact_rank(rows):
    work = [list(r) for r in rows]
    _, rank, _ = exact_rref(work)
    return rank


def exact_nullspace(rows, ncols):
    """Kernel basis (as column vectors) of an exact matrix."""
    work = [list(r) for r in rows]
    _, rank, pivot_cols = exact_rref(work)
    pivset = set(pivot_cols)
    basis = []
    for f in range(ncols):
        if f in pivset:
            continue
        v = [QI_ZERO] * ncols
        v[f] = QI_ONE
        for r, c in enumerate(pivot_cols):
            if work[r][f]:
                v[c] = -work[r][f]
        basis.append(v)
    return rank, basis


def exact_matmul(a, b):
    n, m = len(a), len(b[0])
    inner = len(b)
    out = [[QI_ZERO] * m for _ in range(n)]
    for i in range(n):
        ai = a[i]
        row = out[i]
        for k in range(inner):
            aik = ai[k]
            if not aik:
                continue
            bk = b[k]
            for j in range(m):
                if bk[j]:
                    row[j] = row[j] + aik * bk[j]
    return out


def exact_conj_transpose(a):
    return [[a[i][j].conjugate() for i in range(len(a))] for j in range(len(a[0]))]


def exact_identity(n):
    return [[QI_ONE if i == j else QI_ZERO for j in range(n)] for i in range(n)]


def exact_inverse(a):
    n = len(a)
    work = [list(row) + list(ident_row) for row, ident_row in zip(a, exact_identity(n))]
    _, rank, _ = exact_rref(work)
    if rank != n:
        raise ZeroDivisionError("singular exact matrix")
    return [row[n:] for row in work]


def independent_columns(columns):
    """Maximal linearly independent subset of the given exact column vectors."""
    if not columns:
        return []
    kept = []
    kept_rows = []  # running echelon of kept columns (as rows)
    for col in columns:
        trial = [list(r) for r in kept_rows] + [list(col)]
        _, rank, _ = exact_rref(trial)
        if rank > len(kept_rows):
            kept.append(col)
            kept_rows = [r for r in trial[:rank]]
    return kept


def exact_projection(columns, n):
    """Orthogonal projection (standard inner product) onto the span of columns.

    Returns an n x n exact matrix P with P^2 = P and P^* = P.
    """
    cols = independent_columns(columns)
    if not cols:
        return [[QI_ZERO] * n for _ in range(n)]
    a = [[cols[j][i] for j in range(len(cols))] for i in range(n)]  # n x r
    ah = exact_conj_transpose(a)                                    # r x n
    gram = exact_matmul(ah, a)                                      # r x r
    ginv = exact_inverse(gram)
    return exact_matmul(exact_matmul(a, ginv), ah)


# ---------------------------------------------------------------------------
# modular elimination (numpy, sparse-guided)
# ---------------------------------------------------------------------------

def _is_probable_prime(n):
    if n < 2:
        return False
    for q in (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37):
        if n % q == 0:
            return n == q
    d, s = n - 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1
    for a in (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37):
        x = pow(a, d, n)
        if x in (1, n - 1):
            continue
        for _ in range(s - 1):
            x = (x * x) % n
            if x == n - 1:
                break
        else:
            return False
    return True


_prime_cache = []


def word_primes():
    """Yield distinct primes just below 2^31 (safe for int64 elimination)."""
    for p in _prime_cache:
        yield p
    candidate = (_prime_cache[-1] - 2) if _prime_cache else (2**31 - 1)
    while candidate > 2**30:
        if _is_probable_prime(candidate):
            _prime_cache.append(candidate)
            yield candidate
        candidate -= 2


def _mod_eliminate(a, p, want_kernel):
    """Row reduce int64 matrix ``a`` (entries in [0, p)) in place, mod p.

    Returns (rank, pivot_cols, kernel) where kernel is a (ncols, nullity)
    int64 array of mod-p kernel vectors, or None when not requested.
    Row updates touch only rows with a nonzero in the pivot column and only
    the column extent of the pivot row, which keeps banded/sparse inputs fast.
    """
    rows, cols = a.shape
    piv_r = 0
    pivot_cols = []
    for j in range(cols):
        if piv_r == rows:
            break
        col = a[piv_r:, j]
        nz = np.nonzero(col)[0]
        if nz.size == 0:
            continue
        r0 = piv_r + int(nz[0])
        if r0 != piv_r:
            a[[piv_r, r0]] = a[[r0, piv_r]]
        prow = a[piv_r]
        nzc = np.nonzero(prow[j:])[0]
        jmax = j + int(nzc[-1]) + 1
        inv = pow(int(prow[j]), p - 2, p)
        if nz.size > 1:
            rest = piv_r + 1 + np.nonzero(a[piv_r + 1:, j])[0]
            f = (a[rest, j] * inv) % p
            a[rest, j:jmax] = (a[rest, j:jmax] - f[:, None] * prow[j:jmax]) % p
        pivot_cols.append(j)
        piv_r += 1
    rank = piv_r
    if not want_kernel:
        return rank, pivot_cols, None
    # normalize pivots to 1 and clear above (reduced echelon form)
    for idx in range(rank - 1, -1, -1):
        j = pivot_cols[idx]
        inv = pow(int(a[idx, j]), p - 2, p)
        a[idx, j:] = (a[idx, j:] * inv) % p
        nzc = np.nonzero(a[idx, j:])[0]
        jmax = j + int(nzc[-1]) + 1
        above = np.nonzero(a[:idx, j])[0]
        if above.size:
            f = a[above, j].copy()
            a[above, j:jmax] = (a[above, j:jmax] - f[:, None] * a[idx, j:jmax]) % p
    pivset = set(pivot_cols)
    free_cols = [c for c in range(cols) if c not in pivset]
    kernel = np.zeros((cols, len(free_cols)), dtype=np.int64)
    for kidx, f in enumerate(free_cols):
        kernel[f, kidx] = 1
        for r, c in enumerate(pivot_cols):
            kernel[c, kidx] = (-int(a[r, f])) % p
    return rank, pivot_cols, kernel


def rational_reconstruct(a, m):
    """Wang reconstruction of x = n/d from x = a mod m; None when impossible."""
    a %= m
    if a == 0:
        return Fraction(0)
    bound = math.isqrt(m // 2)
    r0, r1 = m, a
    s0, s1 = 0, 1
    while r1 > bound:
        q = r0 // r1
        r0, r1 = r1, r0 - q * r1
        s0, s1 = s1, s0 - q * s1
    if s1 == 0 or abs(s1) > bound:
        return None
    num, den = (r1, s1) if s1 > 0 else (-r1, -s1)
    if math.gcd(num if num >= 0 else -num, den) != 1:
        # Fraction would silently reduce; reduce explicitly and re-verify below
        g = math.gcd(abs(num), den)
        num //= g
        den //= g
    if (num - a * den) % m != 0:
        return None
    return Fraction(num, den)


# ---------------------------------------------------------------------------
# certified sparse rank / nullity over the exact backend
# ---------------------------------------------------------------------------

@dataclass
class RankResult:
    rank: int
    nullity: int
    method: str
    sv_gap: tuple | None = None


def _realify_and_scale(entries, shape):
    """Turn a sparse Gaussian-rational matrix into a sparse integer matrix.

    Complex entries are realified by the doubling (A + iB) -> [[A, -B], [B, A]]
    which exactly doubles rank and nullity.  Rows are then scaled by the lcm
    of their denominators (kernel and rank are unchanged by row scaling).
    Returns (int_entries, int_shape, doubled_flag).
    """
    rows, cols = shape
    has_imag = any(v.im for v in entries.values())
    if has_imag:
        frac_entries = {}
        for (r, c), v in entries.items():
            if v.re:
                frac_entries[(r, c)] = frac_entries.get((r, c), Fraction(0)) + v.re
                frac_entries[(r + rows, c + cols)] = v.re
            if v.im:
                frac_entries[(r, c + cols)] = -v.im
                frac_entries[(r + rows, c)] = v.im
        int_shape = (2 * rows, 2 * cols)
    else:
        frac_entries = {(rc): v.re for rc, v in entries.items() if v.re}
        int_shape = (rows, cols)
    row_lcm = {}
    for (r, _), v in frac_entries.items():
        d = v.denominator
        if d != 1:
            row_lcm[r] = math.lcm(row_lcm.get(r, 1), d)
    int_entries = {}
    for (r, c), v in frac_entries.items():
        scale = row_lcm.get(r, 1)
        int_entries[(r, c)] = int(v * scale)
    return int_entries, int_shape, has_imag


def _verify_kernel_vectors(int_entries, shape, vectors):
    """Exact check that each candidate column vector lies in the kernel."""
    cols_of = {}
    for (r, c), v in int_entries.items():
        cols_of.setdefault(c, []).append((r, v))
    for vec in vectors:
        acc = {}
        for c, x in enumerate(vec):
            if not x:
                continue
            for r, v in cols_of.get(c, ()):
                acc[r] = acc.get(r, Fraction(0)) + x * v
        if any(acc.values()):
            return False
    return True


def _sparse_to_dense_exact(entries, shape):
    rows = [[QI_ZERO] * shape[1] for _ in range(shape[0])]
    for (r, c), v in entries.items():
        rows[r][c] = v
    return rows


def sparse_rank_nullity_exact(entries, shape, small_limit=SMALL_EXACT_LIMIT):
    """Certified rank and nullity of a sparse Gaussian-rational matrix."""
    rows, cols = shape
    if cols == 0 or not entries:
        return RankResult(0, cols, "exact")
    if max(rows, cols) <= small_limit:
        rank, basis = exact_nullspace(_sparse_to_dense_exact(entries, shape), cols)
        return RankResult(rank, cols - rank, "exact")

    int_entries, int_shape, doubled = _realify_and_scale(entries, shape)
    if not int_entries:
        return RankResult(0, cols, "exact")
    groups = {}  # (rank, pivot tuple) -> [residue matrix (lists of int), modulus]
    best_rank = -1
    best_key = None
    prime_iter = word_primes()
    for count in range(1, _MAX_PRIMES + 1):
        p = next(prime_iter)
        a = np.zeros(int_shape, dtype=np.int64)
        for (r, c), v in int_entries.items():
            a[r, c] = v % p
        rank_p, pivots, kernel_p = _mod_eliminate(a, p, want_kernel=True)
        key = (rank_p, tuple(pivots))
        if rank_p > best_rank:
            best_rank, best_key = rank_p, key
        nullity_cand = int_shape[1] - best_rank
        if nullity_cand == 0:
            result_rank = best_rank // 2 if doubled else best_rank
            return RankResult(result_rank, 0, "modular")
        if key in groups:
            residues, modulus = groups[key]
            _crt_update(residues, modulus, kernel_p.tolist(), p)
            groups[key][1] = modulus * p
        else:
            groups[key] = [kernel_p.tolist(), p]
        if key != best_key or count not in _LIFT_SCHEDULE:
            continue
        residues, modulus = groups[best_key]
        lifted = _lift_kernel(residues, modulus)
        if lifted is not None and _verify_kernel_vectors(int_entries, int_shape, lifted):
            if doubled:
                if best_rank % 2:
                    break  # inconsistent; fall through to dense elimination
                return RankResult(best_rank // 2, nullity_cand // 2, "modular")
            return RankResult(best_rank, nullity_cand, "modular")
    # last resort: dense exact elimination (can be slow, always correct)
    rank, basis = exact_nullspace(_sparse_to_dense_exact(entries, shape), cols)
    return RankResult(rank, cols - rank, "exact")


def _crt_update(residues, modulus, new_residues, p):
    """In place CRT merge of a new prime's kernel residues (nested lists)."""
    inv = pow(modulus % p, p - 2, p)
    for i, row in enumerate(residues):
        new_row = new_residues[i]
        for j, r1 in enumerate(row):
            t = ((new_row[j] - r1) * inv) % p
            row[j] = r1 + modulus * t


def _lift_kernel(residues, modulus):
    """Entrywise rational reconstruction of the CRT-combined kernel.

    Exits on the first failing entry; the caller retries with more primes.
    """
    if not residues:
        return []
    nvecs = len(residues[0])
    vectors = [[] for _ in range(nvecs)]
    for row in residues:
        for j in range(nvecs):
            x = rational_reconstruct(row[j] % modulus, modulus)
            if x is None:
                return None
            vectors[j].append(x)
    return vectors


# ---------------------------------------------------------------------------
# floating point ranks
# ---------------------------------------------------------------------------

def float_rank_nullity(a, rtol=DEFAULT_SVD_RTOL):
    """SVD rank of a complex matrix with the configurable relative cutoff."""
    rows, cols = a.shape
    if cols == 0 or rows == 0 or not a.any():
        return RankResult(0, cols, "svd", sv_gap=None)
    sv = np.linalg.svd(a, compute_uv=False)
    cutoff = rtol * sv[0] * max(rows, cols)
    rank = int(np.count_nonzero(sv > cutoff))
    last_kept = float(sv[rank - 1]) if rank > 0 else None
    first_dropped = float(sv[rank]) if rank < len(sv) else None
    return RankResult(rank, cols - rank, "svd", sv_gap=(last_kept, first_dropped))


def float_nullspace(a, rtol=DEFAULT_SVD_RTOL):
    """Orthonormal kernel basis (columns) of a complex matrix."""
    rows, cols = a.shape
    if cols == 0:
        return np.zeros((0, 0), dtype=complex)
    if rows == 0 or not a.any():
        return np.eye(cols, dtype=complex)
    u, sv, vh = np.linalg.svd(a, full_matrices=True)
    cutoff = rtol * sv[0] * max(rows, cols) if sv.size else 0.0
    rank = int(np.count_nonzero(sv > cutoff))
    return vh[rank:].conj().T


def float_projection(columns, n, rtol=DEFAULT_SVD_RTOL):
    """Orthogonal projection onto the span of float column vectors."""
    if not len(columns):
        return np.zeros((n, n), dtype=complex)
    a = np.array(columns, dtype=complex).T  # n x m
    q = _orthonormal_range(a, rtol)
    return q @ q.conj().T


def _orthonormal_range(a, rtol):
    u, sv, _ = np.linalg.svd(a, full_matrices=False)
    if not sv.size:
        return u[:, :0]
    cutoff = rtol * sv[0] * max(a.shape)
    rank = int(np.count_nonzero(sv > cutoff))
    return u[:, :rank]


# ---------------------------------------------------------------------------
# span intersections (used for submodule arithmetic)
# ---------------------------------------------------------------------------

def intersect_spans_exact(a_cols, b_cols, n):
    """Basis of (span a_cols) intersect (span b_cols); exact backend."""
    if not a_cols or not b_cols:
        return []
    m_a, m_b = len(a_cols), len(b_cols)
    stacked = [[QI_ZERO] * (m_a + m_b) for _ in range(n)]
    for j, col in enumerate(a_cols):
        for i in range(n):
            stacked[i][j] = col[i]
    for j, col in enumerate(b_cols):
        for i in range(n):
            stacked[i][m_a + j] = col[i]
    _, basis = exact_nullspace(stacked, m_a + m_b)
    out = []
    for vec in basis:
        w = [QI_ZERO] * n
        for j in range(m_a):
            if vec[j]:
                for i in range(n):
                    w[i] = w[i] + a_cols[j][i] * vec[j]
        if any(w):
            out.append(w)
    return independent_columns(out)


def intersect_spans_float(a_cols, b_cols, n, rtol=DEFAULT_SVD_RTOL):
    if not len(a_cols) or not len(b_cols):
        return []
    a = np.array(a_cols, dtype=complex).T
    b = np.array(b_cols, dtype=complex).T
    stacked = np.hstack([a, b])
    kern = float_nullspace(stacked, rtol)
    if kern.shape[1] == 0:
        return []
    w = a @ kern[: a.shape[1], :]
    q = _orthonormal_range(w, rtol)
    return [q[:, j] for j in range(q.shape[1])]
