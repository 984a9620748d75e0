import numpy as np
import pytest

from modepuma import (
    AngleSet,
    EstimatorConfig,
    Scenario,
    SignalWeight,
    ValidationError,
    match_angles,
    mode_two_step,
    modex,
    puma_iterative,
    quadratic_form_matrix,
    sample_covariance,
    signal_weight,
    simulate_snapshots,
    subspace_decomposition,
    true_covariance,
    v_mode,
)
from modepuma.bench import _random_instance, noise_power_for_snr, trial_seed
from modepuma.estimators import _conjugate_symmetric_basis


def noiseless_decomp(m, angles):
    r = len(angles)
    sc = Scenario(
        m=m, r=r, angles=AngleSet(angles), source_cov=np.eye(r),
        noise_power=0.0, n_snapshots=1, seed=0,
    )
    cov = true_covariance(sc)
    decomp = subspace_decomposition(cov, r)
    return cov, decomp, signal_weight(decomp)


def noisy_pipeline(m, r, angles, snr_db, T, seed):
    sc = Scenario(
        m=m, r=r, angles=AngleSet(angles), source_cov=np.eye(r),
        noise_power=noise_power_for_snr(np.eye(r), r, snr_db),
        n_snapshots=T, seed=seed,
    )
    cov = sample_covariance(simulate_snapshots(sc))
    decomp = subspace_decomposition(cov, r)
    return cov, decomp, signal_weight(decomp)


class TestQuadraticFormMatrix:
    def test_matches_vmode_at_omega_point(self):
        rng = np.random.default_rng(1)
        for _ in range(20):
            m, r, c, decomp, weight = _random_instance(rng, max_m=8, max_r=3)
            from modepuma import toeplitz_annihilator

            T = toeplitz_annihilator(c, m).entries
            gram = T @ T.conj().T
            if np.linalg.cond(gram) > 1e10:
                continue
            omega = np.linalg.inv(gram)
            Q = quadratic_form_matrix(decomp, weight, omega, r)
            lhs = float(np.real(c.conj() @ Q @ c))
            rhs = v_mode(c, decomp, weight).value
            assert abs(lhs - rhs) <= 1e-12 * max(1.0, rhs)

    def test_orthonormal_shift_columns(self):
        from modepuma import SubspaceDecomposition

        m, q = 5, 2
        decomp = SubspaceDecomposition(
            u_signal=np.eye(m, 1, dtype=complex),
            lambdas=np.array([1.0]),
            sigma2=0.0,
            all_eigenvalues=np.zeros(m),
        )
        Q = quadratic_form_matrix(
            decomp, SignalWeight(g=np.array([1.0])), np.eye(m - q), q
        )
        # only the c_0 column of the shift map touches e_1
        expected = np.zeros((q + 1, q + 1))
        expected[0, 0] = 1.0
        assert np.allclose(Q, expected)

    def test_hermitian_psd(self):
        rng = np.random.default_rng(2)
        for _ in range(20):
            m, r, c, decomp, weight = _random_instance(rng, max_m=9, max_r=3)
            q = int(rng.integers(1, m - r + 1)) if m - r >= 1 else 1
            q = min(q + r - 1, m - 1)
            omega = np.eye(m - q)
            Q = quadratic_form_matrix(decomp, weight, omega, q)
            assert np.linalg.norm(Q - Q.conj().T) <= 1e-12
            w = np.linalg.eigvalsh(Q)
            assert w[0] >= -1e-10 * max(w[-1], 1.0)


class TestConjugateSymmetricBasis:
    @pytest.mark.parametrize("n", [2, 3, 4, 5, 7])
    def test_spans_conjugate_symmetric_vectors(self, n):
        J = _conjugate_symmetric_basis(n)
        assert J.shape == (n, n)
        rho = np.random.default_rng(n).standard_normal(n)
        c = J @ rho
        assert np.max(np.abs(c - np.conj(c[::-1]))) <= 1e-14


class TestModeTwoStep:
    def test_noiseless_exact_recovery(self):
        truth = [-0.4, 0.7]
        _, decomp, weight = noiseless_decomp(6, truth)
        res = mode_two_step(decomp, weight, 2)
        assert np.max(np.abs(res.angles - truth)) <= 1e-6
        assert res.converged

    def test_unique_annihilator_single_source(self):
        _, decomp, weight = noiseless_decomp(2, [0.0])
        res = mode_two_step(decomp, weight, 1)
        c = res.coefs / res.coefs[0]
        assert np.allclose(c, [1, -1], atol=1e-10)
        assert np.allclose(res.angles, [0.0], atol=1e-10)

    def test_conjugate_symmetric_coefficients(self):
        _, decomp, weight = noisy_pipeline(6, 2, [-0.4, 0.7], 10.0, 200, seed=3)
        res = mode_two_step(decomp, weight, 2)
        c = res.coefs
        assert np.max(np.abs(c - np.conj(c[::-1]))) <= 1e-10

    def test_monte_carlo_near_optimality(self):
        truth = np.array([-0.4, 0.7])
        wins = 0
        rmses = []
        for trial in range(200):
            cov, decomp, weight = noisy_pipeline(
                6, 2, truth, 10.0, 200, seed=trial_seed(77, 0, 0, trial)
            )
            res = mode_two_step(decomp, weight, 2)
            _, rmse = match_angles(res.angles, truth)
            rmses.append(rmse)
            from modepuma import coefs_from_angles

            at_truth = v_mode(coefs_from_angles(truth), decomp, weight).value
            if res.criterion_value <= at_truth + 1e-8:
                wins += 1
        assert wins >= 0.95 * 200
        assert np.sqrt(np.mean(np.square(rmses))) <= 0.05

    def test_optimality_certificate(self):
        _, decomp, weight = noisy_pipeline(6, 2, [-0.4, 0.7], 10.0, 200, seed=5)
        res = mode_two_step(decomp, weight, 2)
        rng = np.random.default_rng(6)
        c_hat = res.coefs
        J = _conjugate_symmetric_basis(c_hat.size)
        for _ in range(50):
            delta = rng.standard_normal(c_hat.size) + 1j * rng.standard_normal(c_hat.size)
            delta *= 1e-3 * np.linalg.norm(c_hat) / np.linalg.norm(delta)
            # project the perturbed point back onto the constraint set
            rho, *_ = np.linalg.lstsq(J, c_hat + delta, rcond=None)
            c_pert = J @ np.real(rho)
            c_pert /= np.linalg.norm(c_pert)
            assert v_mode(c_pert, decomp, weight).value >= res.criterion_value - 1e-8


class TestPumaIterative:
    def test_noiseless_exact_recovery(self):
        truth = [-0.4, 0.7]
        _, decomp, weight = noiseless_decomp(6, truth)
        res = puma_iterative(decomp, weight, 2)
        assert np.max(np.abs(res.angles - truth)) <= 1e-6

    def test_final_criterion_reproducible(self):
        _, decomp, weight = noisy_pipeline(6, 2, [-0.4, 0.7], 10.0, 200, seed=8)
        res = puma_iterative(decomp, weight, 2)
        again = v_mode(res.coefs, decomp, weight).value
        assert abs(res.criterion_value - again) <= 1e-10 * max(1.0, again)

    def test_criterion_history_non_increasing(self):
        for seed in range(10):
            _, decomp, weight = noisy_pipeline(6, 2, [-0.4, 0.7], 5.0, 100, seed=seed)
            res = puma_iterative(decomp, weight, 2)
            h = res.criterion_history
            for a, b in zip(h, h[1:]):
                if b > a * (1 + 1e-12):
                    break  # divergence guard region
                assert b <= a * (1 + 1e-12)

    def test_matches_mode_rmse(self):
        truth = np.array([-0.4, 0.7])
        rm, rp = [], []
        for trial in range(200):
            cov, decomp, weight = noisy_pipeline(
                6, 2, truth, 10.0, 200, seed=trial_seed(99, 0, 0, trial)
            )
            _, a = match_angles(mode_two_step(decomp, weight, 2).angles, truth)
            _, b = match_angles(puma_iterative(decomp, weight, 2).angles, truth)
            rm.append(a**2)
            rp.append(b**2)
        rmse_mode = np.sqrt(np.mean(rm))
        rmse_puma = np.sqrt(np.mean(rp))
        assert abs(rmse_puma - rmse_mode) <= 0.10 * rmse_mode

    def test_gauge_independence_vs_mode(self):
        _, decomp, weight = noiseless_decomp(6, [-0.4, 0.7])
        a = mode_two_step(decomp, weight, 2).angles
        b = puma_iterative(decomp, weight, 2).angles
        assert np.max(np.abs(a - b)) <= 1e-6


class TestModex:
    def test_p_zero_reduces_to_base(self):
        cov, decomp, weight = noiseless_decomp(6, [-0.4, 0.7])
        base = mode_two_step(decomp, weight, 2)
        res = modex(cov, decomp, weight, 2, EstimatorConfig(method="MODEX", p_extra=0))
        assert np.allclose(res.angles, base.angles, atol=1e-10)
        assert len(res.candidate_log) == 1

    def test_noiseless_recovery_with_extras(self):
        truth = [-0.9, 0.3]
        cov, decomp, weight = noiseless_decomp(8, truth)
        res = modex(cov, decomp, weight, 2, EstimatorConfig(method="MODEX", p_extra=2))
        candidates = np.sort(
            np.unique(np.concatenate([list(s) for s, _ in res.candidate_log]))
        )
        assert min(abs(candidates - truth[0])) <= 1e-6
        assert min(abs(candidates - truth[1])) <= 1e-6
        assert np.max(np.abs(res.angles - truth)) <= 1e-6

    def test_exhaustive_subset_log(self):
        cov, decomp, weight = noisy_pipeline(6, 2, [-0.4, 0.7], 10.0, 100, seed=4)
        res = modex(cov, decomp, weight, 2, EstimatorConfig(method="MODEX", p_extra=2))
        from math import comb

        # pooled candidates: 2 from the plain fit, 4 from the extended fit
        assert len(res.candidate_log) == comb(6, 2)
        assert res.criterion_value == min(v for _, v in res.candidate_log)

    def test_p_bound_enforced(self):
        cov, decomp, weight = noiseless_decomp(6, [-0.4, 0.7])
        with pytest.raises(ValidationError):
            modex(cov, decomp, weight, 2, EstimatorConfig(method="MODEX", p_extra=4))

    def test_enhanced_variant_noiseless(self):
        truth = [-0.9, 0.3]
        cov, decomp, weight = noiseless_decomp(8, truth)
        cfg = EstimatorConfig(method="MODEX", p_extra=2, modex_base="PUMA")
        res = modex(cov, decomp, weight, 2, cfg)
        assert np.max(np.abs(res.angles - truth)) <= 1e-6


class TestMatchAngles:
    def test_identical(self):
        _, rmse = match_angles([0.1, 0.5], [0.1, 0.5])
        assert rmse == 0.0

    def test_wrap_around(self):
        err, _ = match_angles([np.pi - 0.01], [-np.pi + 0.01])
        assert abs(abs(err[0]) - 0.02) <= 1e-12

    def test_permutation_invariance(self):
        _, rmse = match_angles([0.5, -0.2, 1.1], [1.1, 0.5, -0.2])
        assert rmse == 0.0

    def test_length_mismatch(self):
        with pytest.raises(ValidationError):
            match_angles([0.1], [0.1, 0.2])


class TestEstimatorConfig:
    def test_p_extra_requires_modex(self):
        with pytest.raises(ValidationError):
            EstimatorConfig(method="MODE", p_extra=1)

    def test_unknown_method(self):
        with pytest.raises(ValidationError):
            EstimatorConfig(method="MUSIC")
