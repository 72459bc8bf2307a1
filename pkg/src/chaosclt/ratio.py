"""A concrete self-normalized ratio family with computable limit theory.

The numerator mixes a second-chaos term V with variance sigma1^2, an
independent first-chaos term F with variance sigma2^2, and vanishing
perturbations; the denominator recenters the same second-chaos term around
its mean rho * sqrt(lambda).  The family is built so that every term of the
Kolmogorov bound is available in closed form:

    m = ceil(lambda) equal eigenvalues sigma1 / sqrt(2m) for V, an
    orthogonal (optionally overlapping) direction for F, and dedicated
    orthogonal directions for the perturbations S and U.

Requiring sigma1 < rho * sqrt(2) keeps the denominator almost surely
positive: the infimum of V is -sigma1 * sqrt(m/2) > -rho * sqrt(lambda).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .bounds import BoundReport
from .errors import ValidationError
from .kernels import DenseKernel, RankOneSumKernel
from .streams import block_normals, run_blocks

__all__ = [
    "Perturbations",
    "RatioFamily",
    "RatioSample",
    "make_synthetic_family",
    "sample_ratio",
    "sample_ratio_batch",
    "ratio_bound",
]

# Above this eigenvalue count the family's kernels are not materialized;
# bound terms come from the analytic spectrum instead.
MATERIALIZE_GUARD = 512


@dataclass(frozen=True)
class Perturbations:
    """Vanishing-term configuration.

    s_norm, u_norm: L2 norms of the first-chaos perturbations S and U (each
    living on its own basis direction); mu: the deterministic offset;
    eg_epsilon: relative drift of E[G] away from rho * sqrt(lambda);
    f_overlap: fraction of F's direction rotated into V's range, breaking
    the default orthogonality.
    """

    s_norm: float = 0.0
    u_norm: float = 0.0
    mu: float = 0.0
    eg_epsilon: float = 0.0
    f_overlap: float = 0.0

    def __post_init__(self):
        if self.s_norm < 0.0 or self.u_norm < 0.0:
            raise ValidationError("perturbation norms must be nonnegative")
        if not 0.0 <= self.f_overlap < 1.0:
            raise ValidationError(
                f"f_overlap must lie in [0, 1), got {self.f_overlap}")


@dataclass(frozen=True)
class RatioFamily:
    """One member of the synthetic family at a fixed lambda.

    Basis layout (dim = m + 3): directions 0..m-1 carry V's eigenvectors,
    m carries F (minus any overlap with direction 0), m+1 carries S and
    m+2 carries U.
    """

    lam: float
    rho_const: float
    sigma1: float
    sigma2: float
    perturbations: Perturbations = field(default_factory=Perturbations)

    def __post_init__(self):
        if not self.lam > 0.0:
            raise ValidationError(f"lambda must be positive, got {self.lam}")
        if not self.rho_const > 0.0 or not self.sigma1 > 0.0:
            raise ValidationError("rho and sigma1 must be positive")
        if self.sigma2 < 0.0:
            raise ValidationError("sigma2 must be nonnegative")
        if not self.sigma1 < self.rho_const * math.sqrt(2.0):
            raise ValidationError(
                f"positivity of the denominator requires sigma1 < rho*sqrt(2); "
                f"got sigma1={self.sigma1}, rho={self.rho_const} (the second-chaos "
                f"infimum -sigma1*sqrt(m/2) must exceed -rho*sqrt(lambda))")

    @property
    def m(self) -> int:
        return int(math.ceil(self.lam))

    @property
    def dim(self) -> int:
        return self.m + 3

    @property
    def g_eigenvalue(self) -> float:
        """The m-fold eigenvalue of V's kernel."""
        return self.sigma1 / math.sqrt(2.0 * self.m)

    @property
    def mean_g(self) -> float:
        return self.rho_const * math.sqrt(self.lam) * (1.0 + self.perturbations.eg_epsilon)

    @property
    def sigma_sq(self) -> float:
        """Variance of the limiting normal: sigma1^2 + sigma2^2."""
        return self.sigma1 ** 2 + self.sigma2 ** 2

    def f_vector(self) -> np.ndarray:
        ov = self.perturbations.f_overlap
        f = np.zeros(self.dim)
        f[self.m] = self.sigma2 * math.sqrt(1.0 - ov * ov)
        f[0] = self.sigma2 * ov
        return f

    def g_kernel(self) -> RankOneSumKernel:
        """V's kernel, materialized; guarded because it costs m * dim floats."""
        if self.m > MATERIALIZE_GUARD:
            raise ValidationError(
                f"family with m={self.m} eigenvalues is too large to "
                f"materialize; bound terms use the analytic spectrum")
        vectors = np.zeros((self.m, self.dim))
        vectors[np.arange(self.m), np.arange(self.m)] = 1.0
        return RankOneSumKernel(order=2,
                                coeffs=np.full(self.m, self.g_eigenvalue),
                                vectors=vectors)

    def f_kernel(self) -> DenseKernel:
        return DenseKernel.from_vector(self.f_vector())

    # exact moments (closed form; criterion-level exactness matters here)

    def f_second_moment(self) -> float:
        return self.sigma2 ** 2

    def g_centered_second_moment(self) -> float:
        """E[(G - E G)^2] = 2||g||^2 + ||S||^2 / lambda = sigma1^2 + s^2/lam."""
        return self.sigma1 ** 2 + self.perturbations.s_norm ** 2 / self.lam


@dataclass(frozen=True)
class RatioSample:
    """value = Q at one Gaussian vector; rejected marks a nonpositive
    denominator (excluded from distance estimation, never silently)."""

    value: float
    rejected: bool


def make_synthetic_family(rho_const: float, sigma1: float, sigma2: float,
                          lam: float,
                          perturbations: Perturbations | None = None) -> RatioFamily:
    return RatioFamily(lam=lam, rho_const=rho_const, sigma1=sigma1,
                       sigma2=sigma2,
                       perturbations=perturbations or Perturbations())


def _ratio_from_z(fam: RatioFamily, Z: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """(values, rejected) for each row of Z."""
    m = fam.m
    pert = fam.perturbations
    sqrt_lam = math.sqrt(fam.lam)
    a = fam.g_eigenvalue
    V = a * ((Z[:, :m] ** 2).sum(axis=1) - m)
    ov = pert.f_overlap
    F = fam.sigma2 * (math.sqrt(1.0 - ov * ov) * Z[:, m] + ov * Z[:, 0])
    S = pert.s_norm * Z[:, m + 1]
    U = pert.u_norm * Z[:, m + 2]
    centered_g = V + S / sqrt_lam
    numerator = centered_g + F + (U + pert.mu) / sqrt_lam
    denominator = (fam.mean_g + centered_g) / (fam.rho_const * sqrt_lam)
    rejected = denominator <= 0.0
    with np.errstate(divide="ignore", invalid="ignore"):
        values = np.where(rejected, np.nan, numerator / denominator)
    return values, rejected


def sample_ratio(fam: RatioFamily, z: np.ndarray) -> RatioSample:
    """Evaluate the ratio at one Gaussian vector spanning the family."""
    z = np.asarray(z, dtype=float)
    if z.shape != (fam.dim,):
        raise ValidationError(f"expected a vector of length {fam.dim}, got {z.shape}")
    values, rejected = _ratio_from_z(fam, z[None, :])
    return RatioSample(value=float(values[0]), rejected=bool(rejected[0]))


def sample_ratio_batch(fam: RatioFamily, M: int, seed: int, threads: int = 1,
                       stream: int = 0) -> tuple[np.ndarray, np.ndarray]:
    """(values, rejected) over M replicas; deterministic in (seed, stream)."""
    if M < 1:
        raise ValidationError(f"replica count must be >= 1, got {M}")
    values = np.empty(M)
    rejected = np.empty(M, dtype=bool)

    def worker(block, start, count):
        Z = block_normals(seed, stream, block, count, fam.dim)
        values[start:start + count], rejected[start:start + count] = \
            _ratio_from_z(fam, Z)

    run_blocks(M, worker, threads=threads)
    return values, rejected


def ratio_bound(fam: RatioFamily, constant_multiplier: float = 1.0) -> BoundReport:
    """Five-term Kolmogorov bound for the ratio against N(0, sigma^2).

    Terms: phi(V + F) from the analytic spectrum (kappa_4 of V is
    48 m a^4, the mixed inner product is a^2 <f, e_0>^2); the scaled mean
    drift lambda^(1/4) |eps|; the two exact second-moment gaps; and the
    vanishing remainder (||S|| + ||U|| + |mu|) / sqrt(lambda).
    """
    pert = fam.perturbations
    a = fam.g_eigenvalue
    kappa4 = 48.0 * fam.m * a ** 4
    mixed = a ** 2 * (fam.sigma2 * pert.f_overlap) ** 2
    phi_term = math.sqrt(kappa4) + math.sqrt(mixed)
    mean_drift = fam.lam ** 0.25 * abs(pert.eg_epsilon)
    f_gap = abs(fam.f_second_moment() - fam.sigma2 ** 2)
    g_gap = abs(fam.g_centered_second_moment() - fam.sigma1 ** 2)
    remainder = (pert.s_norm + pert.u_norm + abs(pert.mu)) / math.sqrt(fam.lam)
    return BoundReport(
        terms={
            "phi": phi_term,
            "mean_drift": mean_drift,
            "f_second_moment_gap": f_gap,
            "g_second_moment_gap": g_gap,
            "remainder": remainder,
        },
        normalization=1.0,
        constant_multiplier=constant_multiplier,
    )
