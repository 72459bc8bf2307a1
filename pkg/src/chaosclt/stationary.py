"""Stationary centered Gaussian sequences: covariance models, exact path
sampling, and the even-Hermite partial-sum statistics built from them.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.linalg import toeplitz

from .errors import NumericalError, ValidationError
from .hermite import hermite, hermite_monomial_coeffs
from .streams import block_normals, run_blocks

__all__ = [
    "CovarianceFunction",
    "PathMatrix",
    "HermiteEvenCoeffs",
    "PathSampler",
    "fgn_covariance",
    "sample_paths",
    "power_variation",
    "power_variation_mean",
    "breuer_major_statistic",
    "exact_variance_power_variation",
    "hermite_monomial_coeffs",
]

# Eigenvalues of the circulant embedding (and of the dense fallback) in
# [-EIG_CLAMP, 0) are treated as floating-point zeros.
EIG_CLAMP = 1e-10


def fgn_covariance(H: float, k: int) -> float:
    """Covariance of fractional Gaussian noise at integer lag k.

    rho(k) = (|k+1|^(2H) + |k-1|^(2H) - 2|k|^(2H)) / 2, symmetric in k,
    with rho(0) = 1.
    """
    if not 0.0 < H < 1.0:
        raise ValidationError(f"Hurst parameter must lie in (0, 1), got {H}")
    a = abs(float(k))
    h2 = 2.0 * H
    return 0.5 * ((a + 1.0) ** h2 + abs(a - 1.0) ** h2 - 2.0 * a ** h2)


@dataclass(frozen=True)
class CovarianceFunction:
    """A stationary covariance lag -> rho(lag).

    The evaluator must be even in the lag; rho0 caches rho(0) and must be
    positive.
    """

    evaluator: Callable[[int], float]
    rho0: float

    def __post_init__(self):
        if not self.rho0 > 0.0:
            raise ValidationError(f"rho(0) must be positive, got {self.rho0}")

    def __call__(self, k: int) -> float:
        return float(self.evaluator(int(k)))

    def lag_array(self, n_lags: int) -> np.ndarray:
        """rho evaluated at lags 0..n_lags-1."""
        return np.array([self(k) for k in range(n_lags)])

    @classmethod
    def fgn(cls, H: float) -> "CovarianceFunction":
        if not 0.0 < H < 1.0:
            raise ValidationError(f"Hurst parameter must lie in (0, 1), got {H}")
        return cls(evaluator=lambda k: fgn_covariance(H, k), rho0=1.0)

    @classmethod
    def iid(cls, variance: float = 1.0) -> "CovarianceFunction":
        return cls(evaluator=lambda k: variance if k == 0 else 0.0,
                   rho0=variance)


@dataclass(frozen=True)
class PathMatrix:
    """M independent replicas of (Z_0, ..., Z_{n-1}), one per row."""

    values: np.ndarray

    def __post_init__(self):
        if self.values.ndim != 2 or min(self.values.shape) < 1:
            raise ValidationError("PathMatrix requires a nonempty 2-d array")

    @property
    def replicas(self) -> int:
        return self.values.shape[0]

    @property
    def length(self) -> int:
        return self.values.shape[1]


@dataclass(frozen=True)
class HermiteEvenCoeffs:
    """Coefficients lambda_{2k}, k = d..m, of an even-Hermite expansion g.

    Arbitrary coefficients are accepted.  The covariance-sum bound for the
    partial sums is stated under the normalization lambda_{2m} = rho0**m
    (the monomial case satisfies it after scaling); nothing here enforces
    that, callers opting out own the interpretation of the bound.
    """

    d: int
    m: int
    lambdas: np.ndarray
    rho0: float = 1.0

    def __post_init__(self):
        if not 1 <= self.d <= self.m:
            raise ValidationError(f"need 1 <= d <= m, got d={self.d}, m={self.m}")
        lam = np.asarray(self.lambdas, dtype=float)
        if lam.shape != (self.m - self.d + 1,):
            raise ValidationError(
                f"expected {self.m - self.d + 1} coefficients, got {lam.shape}")
        if not self.rho0 > 0.0:
            raise ValidationError("rho0 must be positive")
        object.__setattr__(self, "lambdas", lam)

    def orders(self) -> range:
        """The even orders 2d, 2d+2, ..., 2m."""
        return range(2 * self.d, 2 * self.m + 1, 2)


class PathSampler:
    """Exact sampler for a stationary Gaussian vector of length n.

    Embeds the covariance in a circulant of size 2n diagonalized by the FFT;
    eigenvalues in [-EIG_CLAMP, 0) are clamped to zero, anything lower falls
    back to a dense eigendecomposition of the n x n covariance matrix.  If
    that also has an eigenvalue below -EIG_CLAMP the covariance is not
    positive semidefinite and a NumericalError reports the offender.
    """

    def __init__(self, rho: CovarianceFunction, n: int):
        if n < 1:
            raise ValidationError(f"path length must be >= 1, got {n}")
        self.n = n
        self.rho = rho
        lags = rho.lag_array(n + 1)
        # circulant first row: rho(0..n), then the mirrored lags n-1..1
        circ = np.concatenate([lags, lags[-2:0:-1]])
        lam = np.fft.rfft(circ).real
        if lam.min() >= -EIG_CLAMP:
            self._mode = "circulant"
            self._sqrt_lam = np.sqrt(np.clip(lam, 0.0, None))
            self._m = 2 * n
        else:
            self._mode = "dense"
            cov = toeplitz(lags[:n])
            eigvals, eigvecs = np.linalg.eigh(cov)
            if eigvals.min() < -EIG_CLAMP:
                raise NumericalError(
                    "covariance is not positive semidefinite: eigenvalue "
                    f"{eigvals.min():.6g} below -{EIG_CLAMP:g}")
            self._chol = eigvecs * np.sqrt(np.clip(eigvals, 0.0, None))

    @property
    def mode(self) -> str:
        return self._mode

    @property
    def normals_per_replica(self) -> int:
        return 2 * self.n if self._mode == "circulant" else self.n

    def transform(self, w: np.ndarray) -> np.ndarray:
        """Apply the sampler's linear map to white-noise rows w.

        w has shape (count, normals_per_replica); the output rows follow
        the target covariance exactly when the rows of w are iid standard
        normal.
        """
        if self._mode == "dense":
            return w @ self._chol.T
        n, m = self.n, self._m
        # Hermitian half-spectrum: independent real weights at frequencies 0
        # and n, complex weights of unit variance in between.
        h = np.empty((w.shape[0], n + 1), dtype=complex)
        h[:, 0] = w[:, 0] * self._sqrt_lam[0]
        h[:, n] = w[:, 1] * self._sqrt_lam[n]
        if n > 1:
            mid = (w[:, 2:n + 1] + 1j * w[:, n + 1:2 * n]) / math.sqrt(2.0)
            h[:, 1:n] = mid * self._sqrt_lam[1:n]
        x = np.fft.irfft(h, m, axis=1) * math.sqrt(m)
        return x[:, :n]

    def sample_block(self, seed: int, stream: int, block: int,
                     count: int) -> np.ndarray:
        """(count, n) matrix of replicas block*BLOCK_SIZE .. +count-1."""
        w = block_normals(seed, stream, block, count, self.normals_per_replica)
        return self.transform(w)


def sample_paths(rho: CovarianceFunction, n: int, M: int, seed: int,
                 threads: int = 1, stream: int = 0) -> PathMatrix:
    """M independent exact samples of (Z_0..Z_{n-1}), deterministic in seed.

    Output is bit-identical for any thread count: replica r always reads a
    fixed row of block r // BLOCK_SIZE of the (seed, stream) Philox stream.
    """
    if M < 1:
        raise ValidationError(f"replica count must be >= 1, got {M}")
    sampler = PathSampler(rho, n)
    out = np.empty((M, n))

    def worker(block, start, count):
        out[start:start + count] = sampler.sample_block(seed, stream, block, count)

    run_blocks(M, worker, threads=threads)
    return PathMatrix(values=out)


def _check_even_order(q: int) -> None:
    if q % 2 != 0 or q < 2:
        raise ValidationError(f"power must be even and >= 2, got {q}")


def power_variation(path: np.ndarray, q: int) -> float:
    """Empirical q-th moment (1/n) sum_i path_i**q for even q >= 2."""
    _check_even_order(q)
    path = np.asarray(path, dtype=float)
    if path.size == 0:
        raise ValidationError("path must be nonempty")
    return float(np.mean(path ** q))


def power_variation_mean(rho0: float, q: int) -> float:
    """E[Z**q] for Z ~ N(0, rho0): rho0^(q/2) (q-1)!!."""
    _check_even_order(q)
    return rho0 ** (q // 2) * float(hermite_monomial_coeffs(q)[0])


def breuer_major_statistic(path: np.ndarray, coeffs: HermiteEvenCoeffs) -> float:
    """(1/sqrt(n)) sum_i sum_k lambda_{2k} H_{2k}(path_i / sqrt(rho0))."""
    path = np.asarray(path, dtype=float)
    if path.size == 0:
        raise ValidationError("path must be nonempty")
    x = path / math.sqrt(coeffs.rho0)
    total = 0.0
    for lam, order in zip(coeffs.lambdas, coeffs.orders()):
        total += float(lam) * float(hermite(order, x).sum())
    return total / math.sqrt(path.size)


def _toeplitz_pair_counts(n: int) -> np.ndarray:
    """Number of (i, j) pairs in [0,n)^2 with |i - j| = d, d = 0..n-1."""
    counts = 2.0 * (n - np.arange(n))
    counts[0] = n
    return counts


def exact_variance_power_variation(rho: CovarianceFunction, q: int, n: int) -> float:
    """Var((1/n) sum Z_i**q) from the even-Hermite expansion of x**q.

    Orthogonality across Hermite orders reduces the variance to
    (rho0^q / n^2) sum_{i,j} sum_{k>=1} c_{q,2k}^2 (2k)! (rho(i-j)/rho0)^{2k};
    the double sum collapses over Toeplitz diagonals.
    """
    _check_even_order(q)
    if n < 1:
        raise ValidationError(f"path length must be >= 1, got {n}")
    coeffs = hermite_monomial_coeffs(q)
    corr = rho.lag_array(n) / rho.rho0
    counts = _toeplitz_pair_counts(n)
    total = 0.0
    for k in range(1, q // 2 + 1):
        total += float(coeffs[k]) ** 2 * math.factorial(2 * k) * float(
            (counts * corr ** (2 * k)).sum())
    return rho.rho0 ** q * total / n ** 2
