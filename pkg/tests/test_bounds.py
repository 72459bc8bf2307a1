import json
import math

import numpy as np
import pytest

from chaosclt.bounds import (BoundReport, MIXED_INNER_TOL, RatePrediction,
                             breuer_major_bound, chaos_sum_bound,
                             checked_sqrt_inner, fgn_rate,
                             nz_ratio_diagnostic, phi, power_variation_bound)
from chaosclt.chaos import ChaosSum
from chaosclt.errors import NumericalError, ValidationError
from chaosclt.kernels import (DenseKernel, RankOneSumKernel, contract, inner,
                              norm, rank_one_contraction_norm,
                              rank_one_norm_squared)
from chaosclt.stationary import CovarianceFunction


def basis(dim, i):
    v = np.zeros(dim)
    v[i] = 1.0
    return v


def eigenvalue_sum_kernel(m, dense=False):
    """sum_{i=1..m} e_i (x) e_i inside dimension m."""
    if dense:
        return DenseKernel(np.eye(m))
    return RankOneSumKernel(order=2, coeffs=np.ones(m), vectors=np.eye(m))


def random_chaos_sum(rng, dim):
    kernels = {}
    if rng.random() < 0.8:
        kernels[1] = DenseKernel(rng.normal(size=dim))
    if rng.random() < 0.8:
        a = rng.normal(size=(dim, dim))
        kernels[2] = DenseKernel((a + a.T) / 2.0)
    if rng.random() < 0.7 or not kernels:
        order = int(rng.integers(3, 5))
        kernels[order] = RankOneSumKernel(
            order=order, coeffs=rng.uniform(-1, 1, size=3),
            vectors=rng.uniform(-1, 1, size=(3, dim)))
    return ChaosSum(kernels)


class TestChaosSumBound:
    @pytest.mark.parametrize("m", [1, 2, 4, 8])
    @pytest.mark.parametrize("dense", [False, True])
    def test_equal_eigenvalue_second_chaos(self, m, dense):
        # ||f (x)_1 f|| = sqrt(m), E[F^2] = 2m, so the total at C=1 is
        # sqrt(m) / (2m); dense and rank-one routes must agree
        F = ChaosSum({2: eigenvalue_sum_kernel(m, dense=dense)})
        report = chaos_sum_bound(F)
        assert report.terms["mixed_inner"] == 0.0
        assert report.terms["max_contraction_norm"] == pytest.approx(
            math.sqrt(m), rel=1e-12)
        assert report.normalization == pytest.approx(2.0 * m, rel=1e-12)
        assert report.total == pytest.approx(math.sqrt(m) / (2.0 * m),
                                             rel=1e-12)

    def test_single_chaos_has_no_mixed_term(self):
        rng = np.random.default_rng(0)
        k = RankOneSumKernel(order=3, coeffs=rng.normal(size=2),
                             vectors=rng.normal(size=(2, 3)))
        report = chaos_sum_bound(ChaosSum({3: k}))
        assert report.terms["mixed_inner"] == 0.0

    def test_orthogonal_first_and_second_chaos(self):
        F = ChaosSum({1: DenseKernel(basis(2, 0)),
                      2: DenseKernel(np.outer(basis(2, 1), basis(2, 1)))})
        report = chaos_sum_bound(F)
        assert report.terms["mixed_inner"] == pytest.approx(0.0, abs=1e-12)
        assert report.terms["max_contraction_norm"] == pytest.approx(1.0,
                                                                     rel=1e-12)
        assert report.normalization == pytest.approx(3.0)

    def test_pure_first_chaos_bound_vanishes(self):
        report = chaos_sum_bound(ChaosSum({1: DenseKernel(basis(3, 1))}))
        assert report.total == 0.0

    def test_mixed_term_matches_dense_oracle(self):
        rng = np.random.default_rng(1)
        for _ in range(10):
            F = random_chaos_sum(rng, 3)
            if not F.delta_dn:
                continue
            report = chaos_sum_bound(F)
            best = 0.0
            orders = F.orders
            for i, p in enumerate(orders):
                for q in orders[i + 1:]:
                    fp, fq = F.kernels[p], F.kernels[q]
                    dp = fp if isinstance(fp, DenseKernel) else fp.densify()
                    dq = fq if isinstance(fq, DenseKernel) else fq.densify()
                    val = inner(contract(dp, dp, 0), contract(dq, dq, q - p))
                    best = max(best, math.sqrt(max(val, 0.0)))
            assert report.terms["mixed_inner"] == pytest.approx(best, abs=1e-9)

    def test_sharper_than_factorized_bound(self):
        # the mixed term never exceeds max ||f_p|| * max sqrt||f_q (x)_r f_q||
        rng = np.random.default_rng(2)
        for _ in range(20):
            F = random_chaos_sum(rng, 3)
            if not F.delta_dn:
                continue
            report = chaos_sum_bound(F)
            max_norm = 0.0
            max_contr = 0.0
            for p, k in F.kernels.items():
                if isinstance(k, DenseKernel):
                    nsq = inner(k, k)
                else:
                    nsq = rank_one_norm_squared(k)
                max_norm = max(max_norm, math.sqrt(max(nsq, 0.0)))
                if p >= 2:
                    for r in range(1, p):
                        if isinstance(k, DenseKernel):
                            c = norm(contract(k, k, r))
                        else:
                            c = rank_one_contraction_norm(k, r)
                        max_contr = max(max_contr, math.sqrt(c))
            assert report.terms["mixed_inner"] <= max_norm * max_contr + 1e-10

    def test_invariant_under_orthogonal_rotation(self):
        rng = np.random.default_rng(3)
        dim = 4
        qmat, _ = np.linalg.qr(rng.normal(size=(dim, dim)))
        f1 = rng.normal(size=dim)
        a = rng.normal(size=(dim, dim))
        f2 = (a + a.T) / 2.0
        k3 = RankOneSumKernel(order=3, coeffs=rng.normal(size=2),
                              vectors=rng.normal(size=(2, dim)))
        F = ChaosSum({1: DenseKernel(f1), 2: DenseKernel(f2), 3: k3})
        rotated = ChaosSum({
            1: DenseKernel(qmat @ f1),
            2: DenseKernel(qmat @ f2 @ qmat.T),
            3: RankOneSumKernel(order=3, coeffs=k3.coeffs,
                                vectors=k3.vectors @ qmat.T),
        })
        r0 = chaos_sum_bound(F)
        r1 = chaos_sum_bound(rotated)
        for key in r0.terms:
            assert r1.terms[key] == pytest.approx(r0.terms[key], abs=1e-9)
        assert r1.normalization == pytest.approx(r0.normalization, rel=1e-9)

    def test_scaling_acts_quadratically_per_term(self):
        rng = np.random.default_rng(4)
        c = 1.7
        for _ in range(10):
            F = random_chaos_sum(rng, 3)
            scaled = {}
            for p, k in F.kernels.items():
                if isinstance(k, DenseKernel):
                    scaled[p] = DenseKernel(c * k.values)
                else:
                    scaled[p] = RankOneSumKernel(order=k.order,
                                                 coeffs=c * k.coeffs,
                                                 vectors=k.vectors)
            r0 = chaos_sum_bound(F)
            r1 = chaos_sum_bound(ChaosSum(scaled))
            for key in r0.terms:
                assert r1.terms[key] == pytest.approx(c * c * r0.terms[key],
                                                      rel=1e-9, abs=1e-9)
            assert r1.normalization == pytest.approx(c * c * r0.normalization,
                                                     rel=1e-12)

    def test_single_chaos_scale_invariant_total(self):
        k = eigenvalue_sum_kernel(3)
        F = ChaosSum({2: k})
        scaled = ChaosSum({2: RankOneSumKernel(order=2, coeffs=5.0 * k.coeffs,
                                               vectors=k.vectors)})
        assert chaos_sum_bound(scaled).total == pytest.approx(
            chaos_sum_bound(F).total, rel=1e-12)

    def test_constant_multiplier_scales_total(self):
        F = ChaosSum({2: eigenvalue_sum_kernel(2)})
        assert chaos_sum_bound(F, constant_multiplier=3.0).total == \
            pytest.approx(3.0 * chaos_sum_bound(F).total, rel=1e-12)


class TestCheckedSqrtInner:
    def test_clamps_float_noise(self):
        assert checked_sqrt_inner(-5e-11) == 0.0
        assert checked_sqrt_inner(0.25) == 0.5

    def test_raises_beyond_tolerance(self):
        with pytest.raises(NumericalError):
            checked_sqrt_inner(-2 * MIXED_INNER_TOL)


class TestPhi:
    def test_orthogonal_pair(self):
        f1 = DenseKernel(basis(2, 0))
        f2 = DenseKernel(np.outer(basis(2, 1), basis(2, 1)))
        assert phi(f1, f2) == pytest.approx(math.sqrt(48.0), rel=1e-12)

    def test_zero_second_kernel(self):
        f1 = DenseKernel(basis(2, 0))
        f2 = DenseKernel(np.zeros((2, 2)))
        assert phi(f1, f2) == 0.0

    def test_aligned_pair(self):
        v = np.array([0.6, 0.8])
        f1 = DenseKernel(v)
        f2 = DenseKernel(np.outer(v, v))
        assert phi(f1, f2) == pytest.approx(math.sqrt(48.0) + 1.0, rel=1e-12)

    def test_rank_one_inputs_accepted(self):
        v = np.array([1.0, 0.0])
        f1 = RankOneSumKernel(order=1, coeffs=np.array([1.0]),
                              vectors=v[None, :])
        f2 = RankOneSumKernel(order=2, coeffs=np.array([1.0]),
                              vectors=v[None, :])
        assert phi(f1, f2) == pytest.approx(math.sqrt(48.0) + 1.0, rel=1e-12)

    def test_order_validation(self):
        with pytest.raises(ValidationError):
            phi(DenseKernel(np.eye(2)), DenseKernel(np.eye(2)))


class TestBreuerMajorBound:
    def test_iid_terms_are_unit(self):
        cov = CovarianceFunction.iid()
        for n in (1, 5, 100):
            report = breuer_major_bound(cov, n, d=1, m=2, variance=2.0)
            assert report.terms["covariance_43"] == pytest.approx(1.0)
            assert report.terms["rank_cross"] == pytest.approx(1.0)
            assert report.total == pytest.approx(2.0 / (2.0 * math.sqrt(n)))

    def test_single_point_reduces_to_lag_zero(self):
        cov = CovarianceFunction.fgn(0.7)
        report = breuer_major_bound(cov, 1, d=1, m=1, variance=3.0)
        assert report.total == pytest.approx(2.0 / 3.0)

    def test_independent_summation_oracle(self):
        H, n, d = 0.7, 1024, 1
        cov = CovarianceFunction.fgn(H)
        report = breuer_major_bound(cov, n, d=d, m=2, variance=1.0)
        # second implementation: plain loops, no vectorization
        s43 = 0.0
        for k in range(-(n - 1), n):
            s43 += abs(cov(k)) ** (4.0 / 3.0)
        s2d = sum(abs(cov(k)) ** (2 * d) for k in range(n))
        s2 = sum(abs(cov(k)) ** 2 for k in range(n))
        expected_total = (s43 ** 1.5 + s2d * math.sqrt(s2)) / math.sqrt(n)
        assert report.total == pytest.approx(expected_total, abs=1e-12,
                                             rel=1e-12)

    def test_argument_validation(self):
        cov = CovarianceFunction.iid()
        with pytest.raises(ValidationError):
            breuer_major_bound(cov, 0, 1, 1, 1.0)
        with pytest.raises(ValidationError):
            breuer_major_bound(cov, 4, 2, 1, 1.0)
        with pytest.raises(ValidationError):
            breuer_major_bound(cov, 4, 1, 1, 0.0)


class TestPowerVariationBound:
    def test_iid_total(self):
        cov = CovarianceFunction.iid()
        report = power_variation_bound(cov, 16, q=2, variance=2.0)
        assert report.total == pytest.approx(2.0 / (2.0 * 4.0))

    def test_coincides_with_rank_one_bound_when_sums_match(self):
        # iid: sum |rho|^2 = sum |rho|^(2d) at d = 1, so the two bounds agree
        cov = CovarianceFunction.fgn(0.5)
        for n in (1, 7, 64):
            a = power_variation_bound(cov, n, q=2, variance=1.3)
            b = breuer_major_bound(cov, n, d=1, m=1, variance=1.3)
            assert a.total == pytest.approx(b.total, abs=1e-12)

    def test_h07_slope_matches_rate_prediction(self):
        # slope of the exact bound itself (fixed normalization) across the
        # grid 2^8..2^14 sits within 0.02 of 4H - 3
        from chaosclt.distances import rate_fit
        H = 0.7
        cov = CovarianceFunction.fgn(H)
        pts = []
        for k in range(8, 15):
            n = 2 ** k
            pts.append((n, power_variation_bound(cov, n, q=2,
                                                 variance=1.0).total))
        fit = rate_fit(pts)
        assert abs(fit.slope - (4 * H - 3)) <= 0.02

    def test_rejects_odd_power(self):
        with pytest.raises(ValidationError):
            power_variation_bound(CovarianceFunction.iid(), 4, q=3,
                                  variance=1.0)


class TestFgnRate:
    def test_three_regimes(self):
        assert fgn_rate(0.3, 2) == RatePrediction(exponent=-0.5, log_power=0.0)
        assert fgn_rate(0.625, 2) == RatePrediction(exponent=-0.5,
                                                    log_power=1.5)
        assert fgn_rate(0.7, 2) == RatePrediction(
            exponent=pytest.approx(-0.2), log_power=0.0)

    def test_exponent_always_negative(self):
        for H in np.linspace(0.05, 0.74, 30):
            assert fgn_rate(float(H), 2).exponent < 0.0

    @pytest.mark.parametrize("H", [0.75, 0.9, 0.0, -0.1])
    def test_out_of_regime(self, H):
        with pytest.raises(ValidationError):
            fgn_rate(H, 2)


class TestNzDiagnostic:
    def test_iid_ratio_is_one(self):
        cov = CovarianceFunction.iid()
        for signs in ([1, 1], [1, -1], [-1, 1]):
            assert nz_ratio_diagnostic(cov, 10, 2, signs) == pytest.approx(1.0)

    def test_fgn_ratio_finite_positive(self):
        cov = CovarianceFunction.fgn(0.7)
        ratio = nz_ratio_diagnostic(cov, 256, 2, [1, -1])
        assert 0.0 < ratio < math.inf

    def test_sign_flip_invariance(self):
        cov = CovarianceFunction.fgn(0.7)
        a = nz_ratio_diagnostic(cov, 64, 2, [1, -1])
        b = nz_ratio_diagnostic(cov, 64, 2, [-1, 1])
        assert a == pytest.approx(b, rel=1e-12)
        c = nz_ratio_diagnostic(cov, 16, 3, [1, -1, 1])
        d = nz_ratio_diagnostic(cov, 16, 3, [-1, 1, -1])
        assert c == pytest.approx(d, rel=1e-12)

    def test_three_fold_brute_force(self):
        cov = CovarianceFunction.fgn(0.6)
        n, signs = 4, [1, -1, 1]
        lhs = 0.0
        for k1 in range(-n, n + 1):
            for k2 in range(-n, n + 1):
                for k3 in range(-n, n + 1):
                    dot = signs[0] * k1 + signs[1] * k2 + signs[2] * k3
                    lhs += abs(cov(dot)) * abs(cov(k1)) * abs(cov(k2)) * abs(cov(k3))
        rhs = sum(abs(cov(k)) ** (4.0 / 3.0)
                  for k in range(-n, n + 1)) ** 3
        assert nz_ratio_diagnostic(cov, n, 3, signs) == pytest.approx(
            lhs / rhs, rel=1e-12)

    def test_m_validation(self):
        cov = CovarianceFunction.iid()
        with pytest.raises(ValidationError):
            nz_ratio_diagnostic(cov, 8, 4, [1, 1, 1, 1])
        with pytest.raises(ValidationError):
            nz_ratio_diagnostic(cov, 8, 2, [1, 2])


class TestBoundReport:
    def test_total_formula(self):
        report = BoundReport(terms={"a": 1.0, "b": 2.0}, normalization=4.0,
                             constant_multiplier=2.0)
        assert report.total == pytest.approx(1.5)

    def test_rejects_negative_terms(self):
        with pytest.raises(ValidationError):
            BoundReport(terms={"a": -0.1}, normalization=1.0)
        with pytest.raises(ValidationError):
            BoundReport(terms={"a": 0.1}, normalization=0.0)

    def test_json_round_trip(self):
        report = BoundReport(terms={"a": 0.25, "b": 1.5}, normalization=3.0,
                             constant_multiplier=1.5)
        data = json.loads(report.to_json_string())
        back = BoundReport.from_json(data)
        assert back.terms == report.terms
        assert back.normalization == report.normalization
        assert back.constant_multiplier == report.constant_multiplier
        assert data["total"] == pytest.approx(report.total)
