"""Ground-truth references: brute-force block-sparse recovery by support
enumeration, the sorted tail power-sum inequality, and the cone-constraint
diagnostic used to audit solver runs.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .blocks import BlockSignal, best_block_approx, mixed_norm_2_1
from .ric import EnumerationCapError, DEFAULT_ENUMERATION_CAP
from .sensing import SensingMatrix

__all__ = [
    "OracleSolution",
    "NoSparseFitError",
    "HypothesisNotMetError",
    "TailPowerReport",
    "ConeCheckReport",
    "brute_force_l20",
    "tail_power_check",
    "cone_constraint_check",
]

DEFAULT_RESIDUAL_TOL = 1e-8
_SVD_CUTOFF = 1e-10  # relative singular-value cutoff for restricted least squares


class NoSparseFitError(RuntimeError):
    """No block support within the sparsity budget fits the observation."""

    def __init__(self, message: str, best_residual: float):
        super().__init__(message)
        self.best_residual = best_residual


@dataclass(frozen=True)
class OracleSolution:
    """Sparsest block-supported least-squares fit found by enumeration."""

    estimate: BlockSignal
    support: tuple[int, ...]
    sparsity: int
    residual: float
    supports_searched: int


def brute_force_l20(
    phi: SensingMatrix,
    b,
    s_max: int,
    residual_tol: float = DEFAULT_RESIDUAL_TOL,
    cap: int = DEFAULT_ENUMERATION_CAP,
) -> OracleSolution:
    """Exhaustive search for the sparsest block vector fitting the observation.

    For k = 0, 1, ..., s_max enumerates every block support of size k,
    solves the support-restricted least-squares problem (minimum-norm on
    rank-deficient submatrices), and returns the first k admitting residual
    <= residual_tol.  Among equal-residual supports of that k the
    lexicographically smallest wins.

    Raises
    ------
    EnumerationCapError
        If the total number of supports up to s_max exceeds `cap`.
    NoSparseFitError
        If no support within s_max fits; carries the best residual seen.
    """
    structure = phi.structure
    l = structure.num_blocks
    s_max = int(s_max)
    if not 0 <= s_max <= l:
        raise ValueError(f"s_max={s_max} outside [0, {l}]")
    total = sum(math.comb(l, k) for k in range(s_max + 1))
    if total > cap:
        raise EnumerationCapError(
            f"sum of C({l}, k) for k <= {s_max} is {total}, exceeding the cap {cap}",
            total,
        )
    b = np.asarray(b, dtype=float)
    if b.shape != (phi.num_rows,):
        raise ValueError(f"observation shape {b.shape} does not match matrix rows {phi.num_rows}")

    searched = 0
    best_overall = np.inf
    for k in range(s_max + 1):
        best_res = np.inf
        best_sup: tuple[int, ...] | None = None
        best_coeffs = None
        for sup in itertools.combinations(range(l), k):
            searched += 1
            if k == 0:
                res = float(np.linalg.norm(b))
                coef = np.array([])
            else:
                cols = structure.block_indices(sup)
                sub = phi.entries[:, cols]
                coef, *_ = np.linalg.lstsq(sub, b, rcond=_SVD_CUTOFF)
                res = float(np.linalg.norm(sub @ coef - b))
            if res < best_res:  # lexicographic order makes ties keep the first support
                best_res = res
                best_sup = sup
                best_coeffs = coef
        best_overall = min(best_overall, best_res)
        if best_res <= residual_tol:
            x = np.zeros(structure.total_dim)
            if k > 0:
                x[structure.block_indices(best_sup)] = best_coeffs
            return OracleSolution(
                estimate=BlockSignal(x, structure),
                support=best_sup,
                sparsity=k,
                residual=best_res,
                supports_searched=searched,
            )
    raise NoSparseFitError(
        f"no block support of size <= {s_max} fits within residual_tol={residual_tol:g} "
        f"(best residual {best_overall:.3e})",
        best_overall,
    )


class HypothesisNotMetError(ValueError):
    """The inequality's hypothesis fails, so no verdict is possible."""


@dataclass(frozen=True)
class TailPowerReport:
    """Both sides of the tail power-sum inequality, plus the verdict.

    For a nonincreasing nonnegative sequence with head sum + psi dominating
    the tail sum, the tail's alpha-power sum is bounded by
    s * ((head alpha-power mean)^(1/alpha) + psi/s)^alpha.  With psi = 0 the
    right side reduces to the head's alpha-power sum.
    """

    lhs: float
    rhs: float
    alpha: float
    psi: float
    s: int
    holds: bool


def tail_power_check(a, s: int, alpha: float, psi: float = 0.0) -> TailPowerReport:
    """Evaluate the tail power-sum inequality on a sorted sequence.

    Raises
    ------
    ValueError
        If the sequence is not nonincreasing and nonnegative, or the
        parameters are out of range.
    HypothesisNotMetError
        If sum(head) + psi < sum(tail).
    """
    a = np.asarray(a, dtype=float)
    if a.ndim != 1 or a.size == 0:
        raise ValueError("expected a nonempty 1-D sequence")
    if np.any(a < 0):
        raise ValueError("sequence entries must be nonnegative")
    if np.any(np.diff(a) > 0):
        raise ValueError("sequence must be sorted nonincreasing")
    s = int(s)
    if not 1 <= s <= a.size:
        raise ValueError(f"s={s} outside [1, {a.size}]")
    alpha = float(alpha)
    if alpha < 1.0:
        raise ValueError(f"alpha must be >= 1, got {alpha}")
    psi = float(psi)
    if psi < 0.0:
        raise ValueError(f"psi must be nonnegative, got {psi}")

    head, tail = a[:s], a[s:]
    if head.sum() + psi < tail.sum() - 1e-12 * max(1.0, a.sum()):
        raise HypothesisNotMetError(
            f"hypothesis sum(head) + psi >= sum(tail) fails: "
            f"{head.sum():g} + {psi:g} < {tail.sum():g}"
        )
    lhs = float(np.sum(tail**alpha))
    head_pow = float(np.sum(head**alpha))
    rhs = float(s * ((head_pow / s) ** (1.0 / alpha) + psi / s) ** alpha)
    holds = lhs <= rhs + 1e-12 * max(abs(lhs), abs(rhs), 1.0)
    return TailPowerReport(lhs=lhs, rhs=rhs, alpha=alpha, psi=psi, s=s, holds=holds)


@dataclass(frozen=True)
class ConeCheckReport:
    """Sides of the cone constraint on a recovery error vector.

    For the error h of a converged mixed-norm minimizer against a feasible
    truth x, the tail of h is controlled by its head plus twice the truth's
    tail:  lhs = ||h_tail||_{2,I},  rhs = ||h_head||_{2,I} + 2*||x_tail||_{2,I},
    slack = rhs - lhs.
    """

    lhs: float
    rhs: float
    slack: float


def cone_constraint_check(h: BlockSignal, x: BlockSignal, s: int) -> ConeCheckReport:
    """Evaluate the cone constraint for error `h` against truth `x` at order `s`."""
    if h.structure != x.structure:
        raise ValueError("h and x must share a block structure")
    h_split = best_block_approx(h, s)
    x_split = best_block_approx(x, s)
    lhs = mixed_norm_2_1(h_split.tail)
    rhs = mixed_norm_2_1(h_split.head) + 2.0 * mixed_norm_2_1(x_split.tail)
    return ConeCheckReport(lhs=lhs, rhs=rhs, slack=rhs - lhs)
