"""Finite chaos sums: exact sampling on explicit Gaussian vectors, exact
second moments through the isometry, and second-chaos cumulants.

A chaos element of order p with kernel h, evaluated on a standard Gaussian
vector z, is computed from the identity "order-p element of a unit rank-one
kernel = H_p of the projection":

    I_p(v^(tensor p))(z) = ||v||**p * H_p(<v, z> / ||v||).

Dense kernels are sampled only at orders 1 (linear form) and 2 (spectral
decomposition); every higher order must use the rank-one-sum representation,
which by linearity covers all structured kernels used here.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import UnsupportedRepresentationError, ValidationError
from .hermite import hermite
from .kernels import (DenseKernel, RankOneSumKernel, inner, is_symmetric,
                      rank_one_contraction_norm, rank_one_norm_squared)
from .streams import block_normals, run_blocks

__all__ = [
    "ChaosSum",
    "SecondChaosSpectrum",
    "hermite",
    "sample",
    "sample_batch",
    "second_moment",
    "kappa3_I2",
    "kappa4_I2",
    "kappa4_I2_contraction",
]

Kernel = DenseKernel | RankOneSumKernel


@dataclass(frozen=True)
class SecondChaosSpectrum:
    """Eigendecomposition of an order-2 kernel; eigenvectors in columns.

    All eigenvalues are kept, including numerically tiny ones: they change
    nothing and thresholding would silently bias cumulants.
    """

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    @classmethod
    def from_kernel(cls, g: DenseKernel) -> "SecondChaosSpectrum":
        _require_symmetric_order2(g)
        w, u = np.linalg.eigh(g.values)
        return cls(eigenvalues=w, eigenvectors=u)

    def reconstruct(self) -> np.ndarray:
        return (self.eigenvectors * self.eigenvalues) @ self.eigenvectors.T


def _require_symmetric_order2(g: DenseKernel) -> None:
    if g.order != 2:
        raise ValidationError(f"expected an order-2 kernel, got order {g.order}")
    if not is_symmetric(g):
        raise ValidationError("order-2 kernel is not symmetric")


class ChaosSum:
    """F = sum over orders p of the chaos element with kernel f_p.

    Kernels are indexed by order; dense representations are accepted only at
    orders 1 and 2.  d and N are the smallest and largest present orders.
    """

    def __init__(self, kernels: dict[int, Kernel]):
        if not kernels:
            raise ValidationError("a chaos sum needs at least one kernel")
        dims = set()
        for order, kernel in kernels.items():
            if order != kernel.order:
                raise ValidationError(
                    f"kernel at key {order} has order {kernel.order}")
            if isinstance(kernel, DenseKernel):
                if order > 2:
                    raise UnsupportedRepresentationError(
                        f"dense kernels are supported only at orders 1 and 2; "
                        f"use a rank-one sum for order {order}")
                if order == 2 and not is_symmetric(kernel):
                    raise ValidationError("dense order-2 kernel is not symmetric")
            dims.add(kernel.dim)
        if len(dims) != 1:
            raise ValidationError(f"kernels disagree on dimension: {sorted(dims)}")
        self.kernels = dict(sorted(kernels.items()))
        self.dim = dims.pop()
        self._spectra: dict[int, SecondChaosSpectrum] = {}

    @property
    def orders(self) -> list[int]:
        return list(self.kernels)

    @property
    def d(self) -> int:
        return self.orders[0]

    @property
    def N(self) -> int:
        return self.orders[-1]

    @property
    def delta_dn(self) -> int:
        """0 for a single chaos, 1 for a genuine sum."""
        return 0 if self.d == self.N else 1

    def spectrum(self, order: int) -> SecondChaosSpectrum:
        if order not in self._spectra:
            kernel = self.kernels[order]
            if not isinstance(kernel, DenseKernel):
                raise ValidationError("spectrum is cached for dense kernels only")
            self._spectra[order] = SecondChaosSpectrum.from_kernel(kernel)
        return self._spectra[order]


def _eval_block(F: ChaosSum, Z: np.ndarray) -> np.ndarray:
    """Evaluate F on each row of Z (rows are independent Gaussian vectors)."""
    out = np.zeros(Z.shape[0])
    for order, kernel in F.kernels.items():
        if isinstance(kernel, DenseKernel):
            if order == 1:
                out += Z @ kernel.values
            elif order == 2:
                sd = F.spectrum(2)
                proj = Z @ sd.eigenvectors
                out += (proj ** 2 - 1.0) @ sd.eigenvalues
            else:
                raise UnsupportedRepresentationError(
                    f"cannot sample a dense kernel of order {order}")
        else:
            norms = np.linalg.norm(kernel.vectors, axis=1)
            live = norms > 0.0
            if not live.any():
                continue
            nrm = norms[live]
            proj = (Z @ kernel.vectors[live].T) / nrm
            weights = kernel.coeffs[live] * nrm ** order
            out += hermite(order, proj) @ weights
    return out


def sample(F: ChaosSum, z: np.ndarray) -> float:
    """One exact sample of F at the standard Gaussian vector z."""
    z = np.asarray(z, dtype=float)
    if z.shape != (F.dim,):
        raise ValidationError(f"expected a vector of length {F.dim}, got {z.shape}")
    return float(_eval_block(F, z[None, :])[0])


def sample_batch(F: ChaosSum, M: int, seed: int, threads: int = 1,
                 stream: int = 0) -> np.ndarray:
    """M independent samples; deterministic in (seed, stream), thread-safe."""
    if M < 1:
        raise ValidationError(f"replica count must be >= 1, got {M}")
    out = np.empty(M)

    def worker(block, start, count):
        Z = block_normals(seed, stream, block, count, F.dim)
        out[start:start + count] = _eval_block(F, Z)

    run_blocks(M, worker, threads=threads)
    return out


def _kernel_norm_squared(kernel: Kernel) -> float:
    if isinstance(kernel, DenseKernel):
        return inner(kernel, kernel)
    return rank_one_norm_squared(kernel)


def second_moment(F: ChaosSum) -> float:
    """E[F**2] = sum_p p! ||f_p||**2 (isometry; orders are orthogonal)."""
    return sum(math.factorial(p) * _kernel_norm_squared(k)
               for p, k in F.kernels.items())


def _eigenvalue_power_sums(g: Kernel) -> tuple[float, float]:
    """(sum lambda^3, sum lambda^4) of an order-2 kernel.

    For a rank-one sum the nonzero spectrum of sum_i a_i v_i v_i^T equals
    the spectrum of diag(a) G, so power sums reduce to traces of its powers
    in the (terms x terms) space.
    """
    if isinstance(g, DenseKernel):
        w = SecondChaosSpectrum.from_kernel(g).eigenvalues
        return float((w ** 3).sum()), float((w ** 4).sum())
    if g.order != 2:
        raise ValidationError(f"expected an order-2 kernel, got order {g.order}")
    P = g.coeffs[:, None] * g.gram
    P2 = P @ P
    tr3 = float(np.sum(P2 * P.T))
    tr4 = float(np.sum(P2 * P2.T))
    return tr3, tr4


def kappa3_I2(g: Kernel) -> float:
    """Third cumulant of the order-2 element with kernel g: 8 sum lambda^3."""
    tr3, _ = _eigenvalue_power_sums(g)
    return 8.0 * tr3


def kappa4_I2(g: Kernel) -> float:
    """Fourth cumulant of the order-2 element with kernel g: 48 sum lambda^4."""
    _, tr4 = _eigenvalue_power_sums(g)
    return 48.0 * tr4


def kappa4_I2_contraction(g: Kernel) -> float:
    """|kappa_4| via contractions: 16 (||g (x)_1 g||^2 + 2 ||g (x~)_1 g||^2).

    Must agree with kappa4_I2; kept as an independent route because the
    bound evaluators consume the contraction form.
    """
    if isinstance(g, DenseKernel):
        _require_symmetric_order2(g)
        c = g.values @ g.values
        c_sym = 0.5 * (c + c.T)
        return 16.0 * (float(np.vdot(c, c)) + 2.0 * float(np.vdot(c_sym, c_sym)))
    if g.order != 2:
        raise ValidationError(f"expected an order-2 kernel, got order {g.order}")
    # the 1-contraction of a symmetric matrix with itself is symmetric, so
    # the symmetrized norm coincides with the raw one
    c2 = rank_one_contraction_norm(g, 1) ** 2
    return 16.0 * 3.0 * c2
