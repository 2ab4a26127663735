"""Exact block restricted-isometry constants and the sharp recovery condition.

The constant of order s is computed by enumerating every block support of
size s and taking extremal eigenvalues of the corresponding Gram submatrix;
this is exact but exponential, so enumeration is capped.  The condition
checker and the two error-bound evaluators implement the recovery guarantee
delta < t/(4-t) for 0 < t < 4/3, t*s >= 2, together with its noisy-recovery
error estimates.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .sensing import SensingMatrix

__all__ = [
    "RicCertificate",
    "ConditionReport",
    "BoundReport",
    "EnumerationCapError",
    "exact_block_ric",
    "condition_threshold",
    "check_condition",
    "error_bound_tight",
    "error_bound_loose",
    "ric_scaling_bound",
]

DEFAULT_ENUMERATION_CAP = 10**6


class EnumerationCapError(RuntimeError):
    """Raised when a support enumeration would exceed the configured cap."""

    def __init__(self, message: str, num_supports: int):
        super().__init__(message)
        self.num_supports = num_supports


@dataclass(frozen=True)
class RicCertificate:
    """Exact block restricted-isometry constant with its witnesses.

    `delta` is the largest deviation of a restricted Gram eigenvalue from 1;
    `worst_support` attains it.  `min_eig` / `max_eig` are the extremal
    eigenvalues over all enumerated supports.
    """

    order_s: int
    delta: float
    worst_support: tuple[int, ...]
    min_eig: float
    max_eig: float
    supports_enumerated: int


def exact_block_ric(
    phi: SensingMatrix, s: int, cap: int = DEFAULT_ENUMERATION_CAP
) -> RicCertificate:
    """Exact block restricted-isometry constant of order `s` by full enumeration.

    Enumerates all C(l, s) block supports in lexicographic order and, for
    each, the extremal eigenvalues of the symmetric Gram submatrix of the
    selected columns.  Deterministic; ties on the worst support resolve to
    the lexicographically first.

    Raises
    ------
    ValueError
        If `s` is outside [1, l].
    EnumerationCapError
        If C(l, s) exceeds `cap`.
    """
    structure = phi.structure
    l = structure.num_blocks
    s = int(s)
    if not 1 <= s <= l:
        raise ValueError(f"order s={s} outside [1, {l}]")
    num_supports = math.comb(l, s)
    if num_supports > cap:
        raise EnumerationCapError(
            f"C({l}, {s}) = {num_supports} block supports exceeds the enumeration cap {cap}",
            num_supports,
        )
    entries = phi.entries
    block_cols = [structure.block_indices([i]) for i in range(l)]

    delta = -np.inf
    worst: tuple[int, ...] = ()
    min_eig, max_eig = np.inf, -np.inf
    for sup in itertools.combinations(range(l), s):
        cols = np.concatenate([block_cols[i] for i in sup])
        sub = entries[:, cols]
        w = np.linalg.eigvalsh(sub.T @ sub)
        lo, hi = w[0], w[-1]
        min_eig = min(min_eig, lo)
        max_eig = max(max_eig, hi)
        deviation = max(hi - 1.0, 1.0 - lo)
        if deviation > delta:
            delta = deviation
            worst = sup
    return RicCertificate(
        order_s=s,
        delta=float(delta),
        worst_support=worst,
        min_eig=float(min_eig),
        max_eig=float(max_eig),
        supports_enumerated=num_supports,
    )


@dataclass(frozen=True)
class ConditionReport:
    """Outcome of the recovery-condition check.

    `threshold` is t/(4-t) when t is admissible, else None.
    `effective_order` is the integer order floor(t*s) at which the constant
    is measured when t*s is not an integer.  `reason` is None when the
    condition holds, else one of "t_out_of_range", "ts_below_two",
    "delta_not_below_threshold".
    """

    ok: bool
    t: float
    s: int
    delta: float
    threshold: float | None
    effective_order: int
    reason: str | None


def condition_threshold(t: float) -> float:
    """The recovery threshold t/(4-t) for admissible t in (0, 4/3)."""
    t = float(t)
    if not 0.0 < t < 4.0 / 3.0:
        raise ValueError(f"t must lie in (0, 4/3), got {t}")
    return t / (4.0 - t)


def _effective_order(t: float, s: int) -> int:
    ts = t * s
    nearest = round(ts)
    if abs(ts - nearest) < 1e-9:
        return int(nearest)
    return int(math.floor(ts))


def check_condition(delta: float, t: float, s: int) -> ConditionReport:
    """Check the sharp recovery condition delta < t/(4-t).

    Valid parameters require 0 < t < 4/3 and t*s >= 2.  Invalid input yields
    ok=False with a reason code rather than an exception.
    """
    t = float(t)
    s = int(s)
    delta = float(delta)
    if not 0.0 < t < 4.0 / 3.0:
        return ConditionReport(False, t, s, delta, None, _effective_order(t, s), "t_out_of_range")
    threshold = t / (4.0 - t)
    eff = _effective_order(t, s)
    if t * s < 2.0 - 1e-12:
        return ConditionReport(False, t, s, delta, threshold, eff, "ts_below_two")
    if not delta < threshold:
        return ConditionReport(False, t, s, delta, threshold, eff, "delta_not_below_threshold")
    return ConditionReport(True, t, s, delta, threshold, eff, None)


@dataclass(frozen=True)
class BoundReport:
    """Evaluated recovery-error bound: bound = noise_coeff*rho + tail_coeff*tail_norm."""

    t: float
    s: int
    delta: float
    rho: float
    tail_norm: float
    t_tilde: float
    denom: float
    noise_coeff: float
    tail_coeff: float
    bound: float
    variant: str


def _bound_ingredients(t: float, s: int, delta: float, rho: float, tail_norm: float):
    report = check_condition(delta, t, s)
    if not report.ok:
        raise ValueError(
            f"error bound requires the recovery condition to hold ({report.reason}: "
            f"t={t}, s={s}, delta={delta})"
        )
    if rho < 0 or tail_norm < 0:
        raise ValueError("rho and tail_norm must be nonnegative")
    t = float(t)
    delta = float(delta)
    t_tilde = max(math.sqrt(t), t)
    denom = t + (t - 4.0) * delta
    noise_coeff = 2.0 * math.sqrt(2.0) * math.sqrt(1.0 + delta) * t_tilde / denom
    return t, delta, t_tilde, denom, noise_coeff


def error_bound_tight(t: float, s: int, delta: float, rho: float, tail_norm: float) -> BoundReport:
    """Sharper of the two recovery-error bounds.

    For a solution of the noise-ball program with noise radius `rho` and
    best-s-term tail `tail_norm`, the l2 recovery error is at most
    noise_coeff*rho + tail_coeff*tail_norm with

        noise_coeff = 2*sqrt(2)*sqrt(1+delta)*max(sqrt(t), t) / denom
        tail_coeff  = (1/2)*sqrt(2/s)*((8*delta + 4*sqrt(denom*delta))/denom + 1)

    where denom = t + (t-4)*delta > 0 under the recovery condition.
    """
    t, delta, t_tilde, denom, noise_coeff = _bound_ingredients(t, s, delta, rho, tail_norm)
    tail_coeff = (
        0.5
        * math.sqrt(2.0 / s)
        * ((8.0 * delta + 4.0 * math.sqrt(denom * delta)) / denom + 1.0)
    )
    bound = noise_coeff * rho + tail_coeff * tail_norm
    return BoundReport(t, int(s), delta, float(rho), float(tail_norm), t_tilde, denom,
                       noise_coeff, tail_coeff, bound, "tight")


def error_bound_loose(t: float, s: int, delta: float, rho: float, tail_norm: float) -> BoundReport:
    """Alternative error bound with the same noise coefficient but

        tail_coeff = sqrt(2/s)*((4*delta + 2*sqrt(denom*delta))/denom + sqrt(2))

    which always dominates the tight variant's tail coefficient.
    """
    t, delta, t_tilde, denom, noise_coeff = _bound_ingredients(t, s, delta, rho, tail_norm)
    tail_coeff = math.sqrt(2.0 / s) * (
        (4.0 * delta + 2.0 * math.sqrt(denom * delta)) / denom + math.sqrt(2.0)
    )
    bound = noise_coeff * rho + tail_coeff * tail_norm
    return BoundReport(t, int(s), delta, float(rho), float(tail_norm), t_tilde, denom,
                       noise_coeff, tail_coeff, bound, "loose")


def ric_scaling_bound(delta_s: float, kappa: float) -> float:
    """Upper bound (2*kappa - 1)*delta_s on the constant at order kappa*s.

    Raises
    ------
    ValueError
        If kappa < 2 or delta_s < 0.
    """
    kappa = float(kappa)
    delta_s = float(delta_s)
    if kappa < 2.0:
        raise ValueError(f"kappa must be >= 2, got {kappa}")
    if delta_s < 0.0:
        raise ValueError(f"delta_s must be nonnegative, got {delta_s}")
    return (2.0 * kappa - 1.0) * delta_s
