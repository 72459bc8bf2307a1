"""Evaluators for the variable part of the explicit normal-approximation
bounds: the contraction bound for a finite chaos sum, the two-term phi
functional for first-plus-second chaos, the covariance-sum bounds for
stationary even-Hermite sums and power variations, the predicted fGn rate
regimes, and the cross-sum ratio diagnostic.

Universal constants in these bounds are not derivable, so every report
carries a configurable constant_multiplier (default 1) and downstream
checks compare rates and ratios, never absolute levels.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from .chaos import ChaosSum, SecondChaosSpectrum, kappa4_I2
from .errors import NumericalError, ValidationError
from .kernels import (DenseKernel, RankOneSumKernel, contract, inner, norm,
                      rank_one_contraction_norm, rank_one_mixed_inner)
from .stationary import CovarianceFunction

__all__ = [
    "BoundReport",
    "RatePrediction",
    "MIXED_INNER_TOL",
    "chaos_sum_bound",
    "phi",
    "breuer_major_bound",
    "power_variation_bound",
    "fgn_rate",
    "nz_ratio_diagnostic",
]

# Mixed inner products are provably nonnegative (they equal a squared
# contraction norm); float noise above this magnitude is treated as data
# corruption rather than silently absolute-valued.
MIXED_INNER_TOL = 1e-10


@dataclass
class BoundReport:
    """Decomposed bound value: labeled terms, normalizer, unknown constant.

    total = constant_multiplier * sum(terms) / normalization.  For the
    chaos-sum bound the normalization is E[F^2]; for the covariance-sum
    bounds it is variance * sqrt(n) (the bracket terms are reported raw).
    """

    terms: dict[str, float]
    normalization: float
    constant_multiplier: float = 1.0

    def __post_init__(self):
        for label, value in self.terms.items():
            if value < 0.0:
                raise ValidationError(f"bound term {label!r} is negative: {value}")
        if not self.normalization > 0.0:
            raise ValidationError(
                f"normalization must be positive, got {self.normalization}")

    @property
    def total(self) -> float:
        return float(self.constant_multiplier * sum(self.terms.values())
                     / self.normalization)

    def to_json(self) -> dict:
        return {
            "terms": {k: float(v) for k, v in self.terms.items()},
            "normalization": float(self.normalization),
            "constant_multiplier": float(self.constant_multiplier),
            "total": float(self.total),
        }

    @classmethod
    def from_json(cls, data: dict) -> "BoundReport":
        report = cls(terms={k: float(v) for k, v in data["terms"].items()},
                     normalization=float(data["normalization"]),
                     constant_multiplier=float(data.get("constant_multiplier", 1.0)))
        return report

    def to_json_string(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True)


@dataclass(frozen=True)
class RatePrediction:
    """Predicted distance decay d(n) ~ n**exponent * log(n)**log_power."""

    exponent: float
    log_power: float = 0.0


def checked_sqrt_inner(value: float, context: str = "mixed inner product") -> float:
    """sqrt of a theoretically nonnegative inner product.

    Values in (-MIXED_INNER_TOL, 0) are floating-point noise and clamp to 0;
    anything lower indicates corrupted inputs and raises.
    """
    if value < -MIXED_INNER_TOL:
        raise NumericalError(
            f"{context} is negative beyond tolerance: {value:.6g}")
    return math.sqrt(max(value, 0.0))


def _as_rank_one(kernel) -> RankOneSumKernel | None:
    """Rank-one-sum view of a kernel, if one is available cheaply."""
    if isinstance(kernel, RankOneSumKernel):
        return kernel
    if kernel.order == 1:
        return RankOneSumKernel(order=1, coeffs=np.array([1.0]),
                                vectors=kernel.values[None, :])
    if kernel.order == 2:
        spec = SecondChaosSpectrum.from_kernel(kernel)
        return RankOneSumKernel(order=2, coeffs=spec.eigenvalues,
                                vectors=spec.eigenvectors.T)
    return None


def _self_contraction_norm(kernel, r: int) -> float:
    if isinstance(kernel, RankOneSumKernel):
        return rank_one_contraction_norm(kernel, r)
    out = contract(kernel, kernel, r)
    return norm(out)


def _mixed_inner(fp, fq) -> float:
    """<f_p (x) f_p, f_q (x)_{q-p} f_q> across representations."""
    rp, rq = _as_rank_one(fp), _as_rank_one(fq)
    if rp is not None and rq is not None:
        return rank_one_mixed_inner(rp, rq)
    dp = fp if isinstance(fp, DenseKernel) else fp.densify()
    dq = fq if isinstance(fq, DenseKernel) else fq.densify()
    left = contract(dp, dp, 0)
    right = contract(dq, dq, dq.order - dp.order)
    return inner(left, right)


def chaos_sum_bound(F: ChaosSum, constant_multiplier: float = 1.0) -> BoundReport:
    """Variable part of the total-variation bound for F / sqrt(E[F^2]).

    max_contraction_norm: largest ||f_p (x)_r f_p|| over present orders
    p >= 2 and 1 <= r <= p-1.  mixed_inner: for genuine sums (d < N), the
    largest sqrt<f_p (x) f_p, f_q (x)_{q-p} f_q> over present pairs p < q;
    zero for a single chaos.  Normalization is E[F^2].
    """
    from .chaos import second_moment

    term1 = 0.0
    for p, kernel in F.kernels.items():
        if p < 2:
            continue
        for r in range(1, p):
            term1 = max(term1, _self_contraction_norm(kernel, r))

    term2 = 0.0
    if F.delta_dn:
        orders = F.orders
        for i, p in enumerate(orders):
            for q in orders[i + 1:]:
                value = _mixed_inner(F.kernels[p], F.kernels[q])
                term2 = max(term2, checked_sqrt_inner(
                    value, f"mixed inner product (orders {p}, {q})"))

    return BoundReport(
        terms={"max_contraction_norm": term1, "mixed_inner": term2},
        normalization=second_moment(F),
        constant_multiplier=constant_multiplier,
    )


def phi(f1, f2) -> float:
    """Two-term functional for F = I_1(f1) + I_2(f2):

    sqrt|kappa_4(I_2(f2))| + sqrt<f1 (x) f1, f2 (x)_1 f2>.
    """
    if f1.order != 1 or f2.order != 2:
        raise ValidationError(
            f"phi expects orders (1, 2), got ({f1.order}, {f2.order})")
    if f1.dim != f2.dim:
        raise ValidationError(f"dimension mismatch: {f1.dim} vs {f2.dim}")
    mixed = _mixed_inner(f1, f2)
    return math.sqrt(abs(kappa4_I2(f2))) + checked_sqrt_inner(mixed)


def _abs_lags(rho: CovarianceFunction, n: int) -> np.ndarray:
    return np.abs(rho.lag_array(n))


def breuer_major_bound(rho: CovarianceFunction, n: int, d: int, m: int,
                       variance: float,
                       constant_multiplier: float = 1.0) -> BoundReport:
    """Covariance-sum bound for a standardized even-Hermite partial sum
    with Hermite rank 2d.

    covariance_43: (sum_{|k|<n} |rho(k)|^(4/3))^(3/2), two-sided by the
    symmetry rho(k) = rho(-k).  rank_cross: (sum_{k<n} |rho|^(2d)) *
    (sum_{k<n} |rho|^2)^(1/2), one-sided.  Normalization is
    variance * sqrt(n) where variance is E[F_n^2] of the sqrt(n)-scaled sum.
    """
    if n < 1:
        raise ValidationError(f"need n >= 1, got {n}")
    if not 1 <= d <= m:
        raise ValidationError(f"need 1 <= d <= m, got d={d}, m={m}")
    if not variance > 0.0:
        raise ValidationError(f"variance must be positive, got {variance}")
    a = _abs_lags(rho, n)
    two_sided_43 = a[0] ** (4.0 / 3.0) + 2.0 * (a[1:] ** (4.0 / 3.0)).sum()
    term1 = two_sided_43 ** 1.5
    term2 = float((a ** (2 * d)).sum()) * math.sqrt(float((a ** 2).sum()))
    return BoundReport(
        terms={"covariance_43": float(term1), "rank_cross": float(term2)},
        normalization=variance * math.sqrt(n),
        constant_multiplier=constant_multiplier,
    )


def power_variation_bound(rho: CovarianceFunction, n: int, q: int,
                          variance: float,
                          constant_multiplier: float = 1.0) -> BoundReport:
    """Covariance-sum bound for the standardized power variation.

    The even monomial has Hermite rank 2, so this is breuer_major_bound with
    d = 1 except that the second bracket closes to (sum_{k<n} |rho|^2)^(3/2).
    variance is E[(sqrt(n) (Q - E Q))^2] = n * Var(Q_{q,n}).
    """
    if q % 2 != 0 or q < 2:
        raise ValidationError(f"power must be even and >= 2, got {q}")
    if n < 1:
        raise ValidationError(f"need n >= 1, got {n}")
    if not variance > 0.0:
        raise ValidationError(f"variance must be positive, got {variance}")
    a = _abs_lags(rho, n)
    two_sided_43 = a[0] ** (4.0 / 3.0) + 2.0 * (a[1:] ** (4.0 / 3.0)).sum()
    term1 = two_sided_43 ** 1.5
    term2 = float((a ** 2).sum()) ** 1.5
    return BoundReport(
        terms={"covariance_43": float(term1), "covariance_sq": float(term2)},
        normalization=variance * math.sqrt(n),
        constant_multiplier=constant_multiplier,
    )


def fgn_rate(H: float, q: int) -> RatePrediction:
    """Predicted Kolmogorov-distance decay for fGn power variations.

    Three regimes in the Hurst parameter: n**(-1/2) for H < 5/8, an extra
    log^(3/2) factor exactly at H = 5/8, and n**(4H-3) for 5/8 < H < 3/4.
    Above 3/4 the statistic leaves the normal regime entirely.
    """
    if q % 2 != 0 or q < 2:
        raise ValidationError(f"power must be even and >= 2, got {q}")
    if not 0.0 < H < 0.75:
        raise ValidationError(
            f"rate prediction requires 0 < H < 3/4, got H={H}")
    if H < 0.625:
        return RatePrediction(exponent=-0.5, log_power=0.0)
    if H == 0.625:
        return RatePrediction(exponent=-0.5, log_power=1.5)
    return RatePrediction(exponent=4.0 * H - 3.0, log_power=0.0)


def nz_ratio_diagnostic(rho: CovarianceFunction, n: int, M: int,
                        signs) -> float:
    """Ratio LHS/RHS of the covariance cross-sum inequality

        sum_{|k_j|<=n} |rho(k . v)| prod_j |rho(k_j)|
            <= C (sum_{|k|<=n} |rho(k)|^(1+1/M))^M

    for a sign vector v.  A diagnostic for the unknown constant C, not a
    pass/fail check.  Cost grows as n**M, so only M in {2, 3} is supported.
    """
    if M not in (2, 3):
        raise ValidationError(f"M must be 2 or 3, got {M}")
    v = np.asarray(signs, dtype=int)
    if v.shape != (M,) or not np.all(np.abs(v) == 1):
        raise ValidationError(f"signs must be a vector of {M} entries +-1")
    # |rho| at lags 0..M*n covers every |k . v|
    table = np.abs(np.array([rho(k) for k in range(M * n + 1)]))
    w = table[np.abs(np.arange(-n, n + 1))]
    ks = np.arange(-n, n + 1)
    if M == 2:
        dot = np.abs(v[0] * ks[:, None] + v[1] * ks[None, :])
        lhs = float((w[:, None] * w[None, :] * table[dot]).sum())
    else:
        lhs = 0.0
        base = v[0] * ks[:, None] + v[1] * ks[None, :]
        ww = w[:, None] * w[None, :]
        for i3, k3 in enumerate(ks):
            dot = np.abs(base + v[2] * k3)
            lhs += float(w[i3] * (ww * table[dot]).sum())
    rhs = float((w ** (1.0 + 1.0 / M)).sum()) ** M
    return lhs / rhs
