"""Folner-window approximation of von Neumann dimensions in tracial algebras.

The package builds explicit almost-invariant windows in concrete tracial
algebras (group algebras, rotation algebras, crossed products, matrix
towers), compresses operators to them, and estimates von Neumann dimensions
of operator kernels by the window limit, cross-checked against independent
exact oracles.
"""

from .coefficient import (
    CoefficientElement,
    MultiMatrixAlgebra,
    ShapeMismatchError,
    mm_adjoint,
    mm_inner,
    mm_mult,
    mm_trace,
    multimatrix_from_triples,
)
from .dimension import (
    EquivarianceError,
    SubmoduleGens,
    WindowModule,
    closure_projection,
    intersect,
    n_inner,
    phi_state,
    relative_dimension,
    span_sum,
    tr_n,
)
from .engine import (
    CompressedOperator,
    DimensionReport,
    EquivariantOperator,
    KernelDims,
    compress,
    default_probes,
    estimate_vn_kernel_dim,
    kernel_range_dims,
    richardson_extrapolate,
    spectral_density,
    spectral_moments,
    square_compression,
    verify_folner_certificate,
)
from .groups import (
    FiniteTableGroup,
    HeisenbergGroup,
    IntegerLattice,
    LamplighterGroup,
    ProductGroup,
    cyclic_group,
    dihedral_group,
    symmetric_group,
)
from .models import (
    AlgebraElement,
    CrossedProductModel,
    FolnerWindow,
    GroupAlgebraModel,
    ModelError,
    TwistedTorusModel,
    UHFModel,
    WindowError,
    approx_equal,
    rotation_action,
    trivial_action,
)
from .oracles import (
    SymbolMatrix,
    finite_group_oracle,
    torus_kernel_oracle,
    torus_moment_oracle,
)
from .scalars import EXACT, FLOAT, GaussianRational

__version__ = "0.1.0"
