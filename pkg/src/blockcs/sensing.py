"""Sensing matrices: random ensembles, engineered well-conditioned instances,
and the explicit square operator that sits exactly at the recovery threshold.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .blocks import BlockSignal, BlockStructure
from .seeding import generator

__all__ = [
    "SensingMatrix",
    "SharpnessInstance",
    "gaussian_matrix",
    "spread_kernel_matrix",
    "sharpness_instance",
    "apply",
]


@dataclass(frozen=True)
class SensingMatrix:
    """Dense M x N real matrix whose columns are partitioned by a block structure."""

    entries: np.ndarray
    structure: BlockStructure

    def __post_init__(self):
        arr = np.array(self.entries, dtype=float)
        if arr.ndim != 2:
            raise ValueError(f"expected a 2-D matrix, got shape {arr.shape}")
        if arr.shape[0] < 1:
            raise ValueError("a sensing matrix needs at least one row")
        if arr.shape[1] != self.structure.total_dim:
            raise ValueError(
                f"matrix has {arr.shape[1]} columns but structure dimension is "
                f"{self.structure.total_dim}"
            )
        arr.flags.writeable = False
        object.__setattr__(self, "entries", arr)

    @property
    def num_rows(self) -> int:
        return self.entries.shape[0]

    @property
    def num_cols(self) -> int:
        return self.entries.shape[1]

    def column_block(self, i: int) -> np.ndarray:
        """The M x d_i column-block of block `i`."""
        return self.entries[:, self.structure.block_slice(i)]


def apply(phi: SensingMatrix, x: BlockSignal) -> np.ndarray:
    """Matrix-vector product Phi x.

    Raises
    ------
    ValueError
        If the signal's structure does not match the matrix's.
    """
    if x.structure != phi.structure:
        raise ValueError("signal structure does not match sensing matrix structure")
    return phi.entries @ x.coeffs


def gaussian_matrix(m: int, structure: BlockStructure, seed: int) -> SensingMatrix:
    """Random matrix with independent N(0, 1/M) entries.

    The normalization makes column norms concentrate around 1.  Identical
    (m, structure, seed) yields a bit-identical matrix.
    """
    m = int(m)
    if m < 1:
        raise ValueError(f"number of rows must be >= 1, got {m}")
    rng = generator(seed)
    entries = rng.standard_normal((m, structure.total_dim)) / np.sqrt(m)
    return SensingMatrix(entries, structure)


def _support_eig_range(entries: np.ndarray, structure: BlockStructure, s: int):
    """Extremal eigenvalues of Gram submatrices over all block supports of size s."""
    l = structure.num_blocks
    lo, hi = np.inf, -np.inf
    for sup in itertools.combinations(range(l), s):
        cols = structure.block_indices(sup)
        sub = entries[:, cols]
        w = np.linalg.eigvalsh(sub.T @ sub)
        lo = min(lo, w[0])
        hi = max(hi, w[-1])
    return lo, hi


def spread_kernel_matrix(
    m: int,
    structure: BlockStructure,
    seed: int,
    balance_order: int = 2,
    flatten_iters: int = 100,
) -> SensingMatrix:
    """Underdetermined matrix engineered for a small block restricted-isometry
    constant at the given order.

    Construction: draw an (N - m)-dimensional kernel subspace, iteratively
    flatten its row energies so no small group of coordinates captures much
    kernel mass, take Phi as an orthonormal basis of the orthogonal
    complement, and rescale so the extremal restricted eigenvalues at
    `balance_order` straddle 1 symmetrically.  The result is random but far
    better conditioned on block supports than a plain Gaussian ensemble;
    instances should still be certified exactly before use.
    """
    m = int(m)
    n = structure.total_dim
    if not 1 <= m < n:
        raise ValueError(f"need 1 <= m < {n} for an underdetermined matrix, got m={m}")
    rng = generator(seed)
    k = n - m
    V = rng.standard_normal((n, k))
    target = np.sqrt(k / n)
    for _ in range(flatten_iters):
        V, _ = np.linalg.qr(V)
        row_norms = np.linalg.norm(V, axis=1, keepdims=True)
        V = V * (target / np.maximum(row_norms, 1e-300)) ** 0.9
    V, _ = np.linalg.qr(V)
    proj = np.eye(n) - V @ V.T
    w, U = np.linalg.eigh(proj)
    basis = U[:, w > 0.5]  # orthonormal basis of the complement, n x m
    entries = basis.T
    lo, hi = _support_eig_range(entries, structure, int(balance_order))
    c = 2.0 / (hi + lo)
    return SensingMatrix(np.sqrt(c) * entries, structure)


@dataclass(frozen=True)
class SharpnessInstance:
    """Square operator at the exact recovery threshold, with witness signals.

    `phi` annihilates the unit direction `x1`; `x0` and `x_hat` are distinct
    block s-sparse signals with identical measurements and identical mixed
    l2/l1 norm s*sqrt(d), so neither can be singled out by mixed-norm
    minimization.
    """

    phi: SensingMatrix
    x1: BlockSignal
    x0: BlockSignal
    x_hat: BlockSignal
    t: float
    s: int
    d: int
    l: int


def sharpness_instance(t: float, s: int, d: int, l: int) -> SharpnessInstance:
    """Build the threshold-attaining instance for parameters (t, s, d, l).

    All `l` blocks have uniform length `d`; the first 2s blocks carry the
    construction.  For integer t*s >= 2 the block restricted-isometry
    constant of `phi` at order t*s equals t/(4-t) exactly.

    Raises
    ------
    ValueError
        If t is outside (0, 4/3), s < 1, d < 1, or l <= 2s.
    """
    t = float(t)
    s, d, l = int(s), int(d), int(l)
    if not 0.0 < t < 4.0 / 3.0:
        raise ValueError(f"t must lie in (0, 4/3), got {t}")
    if s < 1 or d < 1:
        raise ValueError(f"need s >= 1 and d >= 1, got s={s}, d={d}")
    if l <= 2 * s:
        raise ValueError(f"need 2s < l, got s={s}, l={l}")
    structure = BlockStructure.uniform(d, l)
    n = structure.total_dim

    x1 = np.zeros(n)
    x1[: 2 * s * d] = 1.0 / np.sqrt(2 * s * d)
    scale = 1.0 / np.sqrt(1.0 - t / 4.0)
    entries = scale * (np.eye(n) - np.outer(x1, x1))

    x0 = np.zeros(n)
    x0[: s * d] = 1.0
    x_hat = np.zeros(n)
    x_hat[s * d : 2 * s * d] = -1.0

    return SharpnessInstance(
        phi=SensingMatrix(entries, structure),
        x1=BlockSignal(x1, structure),
        x0=BlockSignal(x0, structure),
        x_hat=BlockSignal(x_hat, structure),
        t=t,
        s=s,
        d=d,
        l=l,
    )
