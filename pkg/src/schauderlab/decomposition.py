"""Finite projection families and the subspaces they carve out.

A family is a list of N x N blocks P_0 ... P_{K-1} acting on a model
space.  A valid family is idempotent blockwise, mutually annihilating,
and complete (the blocks sum to the identity); validation measures the
defect of each property in spectral norm instead of assuming it.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import SingularMatrixError
from .kernel import InversionResult, invert_with_condition, spectral_norm
from .orlicz import NormSpec, vector_norm

RANK_REL_THRESHOLD = 1e-10


@dataclass(frozen=True)
class ModelSpace:
    dim: int
    norm: NormSpec
    scalars: str = "real"

    def __post_init__(self) -> None:
        if self.dim < 1:
            raise ValueError("dim must be >= 1")
        if self.scalars not in ("real", "complex"):
            raise ValueError(f"scalars must be 'real' or 'complex', got {self.scalars!r}")

    @property
    def dtype(self) -> type:
        return complex if self.scalars == "complex" else float


class ProjectionFamily:
    """Ordered blocks of one candidate decomposition.

    Construction checks only structure (square blocks of the right size,
    finite entries, no zero block); the algebraic identities are checked
    by validate_family so that defective families can still be built and
    inspected.
    """

    def __init__(self, blocks: Sequence[np.ndarray], space: ModelSpace):
        if len(blocks) == 0:
            raise ValueError("a family needs at least one block")
        n = space.dim
        prepared = []
        for i, raw in enumerate(blocks):
            b = np.array(raw, dtype=space.dtype)
            if b.shape != (n, n):
                raise ValueError(f"block {i} has shape {b.shape}, expected {(n, n)}")
            if not np.all(np.isfinite(b.view(float) if b.dtype == complex else b)):
                raise ValueError(f"block {i} has non-finite entries")
            if not np.any(b != 0):
                raise ValueError(f"block {i} is identically zero")
            b.setflags(write=False)
            prepared.append(b)
        self.blocks = tuple(prepared)
        self.space = space
        self._sum: np.ndarray | None = None

    @property
    def block_count(self) -> int:
        return len(self.blocks)

    @property
    def dim(self) -> int:
        return self.space.dim

    def block_sum(self) -> np.ndarray:
        if self._sum is None:
            self._sum = sum(self.blocks[1:], start=self.blocks[0].copy())
        return self._sum

    def default_tolerance(self) -> float:
        return 1e-10 * self.space.dim

    def apply(self, index: int, x: np.ndarray) -> np.ndarray:
        return self.blocks[index] @ x


class Subspace:
    """Column span of a full-column-rank basis matrix."""

    def __init__(self, basis: np.ndarray, space: ModelSpace):
        b = np.array(basis, dtype=space.dtype)
        if b.ndim != 2 or b.shape[0] != space.dim or b.shape[1] < 1:
            raise ValueError(f"basis must be {space.dim} x r with r >= 1, got {b.shape}")
        u, s, _ = np.linalg.svd(b, full_matrices=False)
        if s[0] == 0 or s[-1] <= RANK_REL_THRESHOLD * s[0]:
            raise ValueError("basis columns are numerically dependent")
        b.setflags(write=False)
        self.basis = b
        self.space = space
        self._ortho = u[:, : b.shape[1]]
        self._ortho.setflags(write=False)

    @property
    def dim(self) -> int:
        return self.basis.shape[1]

    @property
    def orthonormal_basis(self) -> np.ndarray:
        return self._ortho


@dataclass(frozen=True)
class FamilyReport:
    idempotency_defect: float
    cross_defect: float
    completeness_defect: float
    ranks: tuple[int, ...]
    tolerance: float
    completeness_required: bool
    ok: bool


@dataclass(frozen=True)
class ExpansionResult:
    components: tuple[np.ndarray, ...]
    defect: float


def make_coordinate_family(space: ModelSpace, block_sizes: Sequence[int]) -> ProjectionFamily:
    """Diagonal 0/1 projections onto consecutive index ranges."""
    sizes = [int(s) for s in block_sizes]
    if any(s < 1 for s in sizes):
        raise ValueError("block sizes must be positive")
    if sum(sizes) != space.dim:
        raise ValueError(f"block sizes sum to {sum(sizes)}, expected {space.dim}")
    blocks = []
    start = 0
    for s in sizes:
        d = np.zeros(space.dim)
        d[start : start + s] = 1.0
        blocks.append(np.diag(d).astype(space.dtype))
        start += s
    return ProjectionFamily(blocks, space)


def validate_family(
    family: ProjectionFamily,
    tolerance: float | None = None,
    *,
    require_completeness: bool = True,
) -> FamilyReport:
    """Measure how far the family is from a true decomposition.

    All defects are spectral norms.  ``require_completeness=False``
    relaxes the verdict for families meant to span only part of the
    space; the completeness defect is still reported.
    """
    tol = family.default_tolerance() if tolerance is None else float(tolerance)
    blocks = family.blocks
    idem = max(spectral_norm(b @ b - b) for b in blocks)
    cross = 0.0
    for i, bi in enumerate(blocks):
        for j, bj in enumerate(blocks):
            if i != j:
                cross = max(cross, spectral_norm(bi @ bj))
    complete = spectral_norm(family.block_sum() - np.eye(family.dim))
    ranks = []
    for b in blocks:
        s = np.linalg.svd(b, compute_uv=False)
        ranks.append(int(np.sum(s > RANK_REL_THRESHOLD * s[0])))
    ok = idem <= tol and cross <= tol and (complete <= tol or not require_completeness)
    return FamilyReport(
        idempotency_defect=idem,
        cross_defect=cross,
        completeness_defect=complete,
        ranks=tuple(ranks),
        tolerance=tol,
        completeness_required=require_completeness,
        ok=ok,
    )


def expand(x: np.ndarray, family: ProjectionFamily) -> ExpansionResult:
    """Blockwise components of a vector and the reconstruction defect."""
    v = np.asarray(x, dtype=family.space.dtype)
    if v.shape != (family.dim,):
        raise ValueError(f"vector has shape {v.shape}, expected ({family.dim},)")
    comps = tuple(b @ v for b in family.blocks)
    defect = vector_norm(sum(comps) - v, family.space.norm)
    return ExpansionResult(components=comps, defect=float(defect))


def transport_family(s_matrix: np.ndarray, family: ProjectionFamily) -> ProjectionFamily:
    """Conjugated family S P S^{-1} for invertible S."""
    s = np.asarray(s_matrix, dtype=family.space.dtype)
    if s.shape != (family.dim, family.dim):
        raise ValueError("transport matrix has the wrong shape")
    inv: InversionResult = invert_with_condition(s)
    if inv.singular:
        raise SingularMatrixError(
            f"transport matrix is singular or too ill-conditioned (cond={inv.condition:.3e})"
        )
    blocks = [s @ b @ inv.inverse for b in family.blocks]
    return ProjectionFamily(blocks, family.space)


def range_subspace(block: np.ndarray, space: ModelSpace) -> Subspace:
    """Orthonormal basis of a projection's range.

    The rank from the factorization is cross-checked against the trace;
    a disagreement beyond 0.1 means the input is not close to a
    projection and is rejected.
    """
    p = np.asarray(block, dtype=space.dtype)
    if p.shape != (space.dim, space.dim):
        raise ValueError("block has the wrong shape")
    u, s, _ = np.linalg.svd(p)
    if s[0] == 0:
        raise ValueError("zero matrix has no range basis")
    rank = int(np.sum(s > RANK_REL_THRESHOLD * s[0]))
    trace_rank = float(np.trace(p).real)
    if abs(trace_rank - rank) > 0.1:
        raise ValueError(
            f"trace {trace_rank:.6f} disagrees with factorization rank {rank}; not a projection"
        )
    return Subspace(u[:, :rank], space)


def selfadjoint_defect(family: ProjectionFamily) -> float:
    """Largest deviation of a block from its own conjugate transpose."""
    return max(spectral_norm(b - b.conj().T) for b in family.blocks)


def family_rank(block: np.ndarray) -> int:
    s = np.linalg.svd(np.asarray(block), compute_uv=False)
    if s[0] == 0:
        return 0
    return int(np.sum(s > RANK_REL_THRESHOLD * s[0]))
