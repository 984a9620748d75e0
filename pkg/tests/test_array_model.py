import numpy as np
import pytest

from modepuma import (
    AngleSet,
    CoefVector,
    DimensionError,
    ValidationError,
    angles_from_coefs,
    coefs_from_angles,
    projector_from_annihilator,
    projector_from_steering,
    steering_matrix,
    toeplitz_annihilator,
)
from modepuma.bench import random_angle_set


class TestAngleSet:
    def test_sorted_distinct_required(self):
        with pytest.raises(ValidationError):
            AngleSet([0.5, 0.5])
        with pytest.raises(ValidationError):
            AngleSet([0.7, 0.2])
        with pytest.raises(ValidationError):
            AngleSet([-np.pi])  # open at -pi

    def test_pi_allowed(self):
        assert AngleSet([np.pi]).angles == (np.pi,)


class TestCoefVector:
    def test_c0_nonzero(self):
        with pytest.raises(ValidationError):
            CoefVector([0, 1])

    def test_degree(self):
        assert CoefVector([1, 0, -1]).degree == 2


class TestSteeringMatrix:
    def test_zero_angle(self):
        A = steering_matrix([0.0], 3).entries
        assert np.allclose(A[:, 0], [1, 1, 1])

    def test_pi_angle(self):
        A = steering_matrix([np.pi], 2).entries
        assert np.allclose(A[:, 0], [1, -1])

    def test_quarter_angles(self):
        A = steering_matrix([-np.pi / 2, np.pi / 2], 4).entries
        assert np.allclose(A[:, 1], [1, 1j, -1, -1j])
        assert np.allclose(A[:, 0], [1, -1j, -1, 1j])

    def test_dimension_error(self):
        with pytest.raises(DimensionError):
            steering_matrix([0.1, 0.2], 2)


class TestCoefAngleConversion:
    def test_single_root_at_one(self):
        assert np.allclose(coefs_from_angles([0.0]).as_array(), [1, -1])

    def test_single_root_at_j(self):
        assert np.allclose(coefs_from_angles([np.pi / 2]).as_array(), [1, 1j])

    def test_difference_of_squares(self):
        # (1 - z)(1 + z) = 1 - z^2
        assert np.allclose(coefs_from_angles([0.0, np.pi]).as_array(), [1, 0, -1])

    def test_roots_back_to_angles(self):
        assert np.allclose(angles_from_coefs([1, -1]), [0.0])
        assert np.allclose(angles_from_coefs([1, 0, -1]), [0.0, np.pi])

    def test_degenerate_degree(self):
        with pytest.raises(ValidationError):
            angles_from_coefs([1, 1, 0])

    def test_round_trip(self):
        rng = np.random.default_rng(11)
        for _ in range(100):
            r = int(rng.integers(1, 5))
            phi = random_angle_set(rng, r)
            back = angles_from_coefs(coefs_from_angles(phi))
            assert np.max(np.abs(back - phi.as_array())) <= 1e-9


class TestAnnihilator:
    def test_explicit_layout(self):
        T = toeplitz_annihilator([1, -1], 3).entries
        assert np.allclose(T, [[1, -1, 0], [0, 1, -1]])

    def test_single_row(self):
        T = toeplitz_annihilator([1, -1], 2).entries
        assert np.allclose(T, [[1, -1]])

    def test_dimension_error(self):
        with pytest.raises(DimensionError):
            toeplitz_annihilator([1, 0, -1], 2)

    def test_annihilates_steering(self):
        rng = np.random.default_rng(5)
        for _ in range(100):
            phi = random_angle_set(rng, 3)
            T = toeplitz_annihilator(coefs_from_angles(phi), 8).entries
            A = steering_matrix(phi, 8).entries
            assert np.max(np.abs(T @ A)) <= 1e-12


class TestProjectors:
    def test_rank_one_from_annihilator(self):
        P = projector_from_annihilator(toeplitz_annihilator([1, -1], 2))
        assert np.allclose(P, 0.5 * np.array([[1, -1], [-1, 1]]))

    def test_rank_one_complement_from_steering(self):
        P = projector_from_steering(steering_matrix([0.0], 2))
        assert np.allclose(P, 0.5 * np.array([[1, -1], [-1, 1]]))

    def test_steering_complement_annihilates(self):
        rng = np.random.default_rng(2)
        for _ in range(20):
            phi = random_angle_set(rng, 2)
            A = steering_matrix(phi, 6)
            assert np.max(np.abs(projector_from_steering(A) @ A.entries)) <= 1e-12

    @pytest.mark.parametrize("m,r", [(4, 1), (6, 2), (10, 4)])
    def test_identity_between_projectors(self, m, r):
        rng = np.random.default_rng(m * 10 + r)
        for _ in range(25):
            phi = random_angle_set(rng, r)
            p_a = projector_from_steering(steering_matrix(phi, m))
            p_t = projector_from_annihilator(
                toeplitz_annihilator(coefs_from_angles(phi), m)
            )
            assert np.linalg.norm(p_a - p_t) <= 1e-10

    def test_hermitian_idempotent_trace(self):
        rng = np.random.default_rng(8)
        for _ in range(20):
            c = rng.standard_normal(4) + 1j * rng.standard_normal(4)
            P = projector_from_annihilator(toeplitz_annihilator(c, 7))
            assert np.linalg.norm(P - P.conj().T) <= 1e-12
            assert np.max(np.abs(P @ P - P)) <= 1e-12
            assert abs(np.trace(P).real - (7 - 3)) <= 1e-12

    def test_scale_invariance(self):
        rng = np.random.default_rng(9)
        c = rng.standard_normal(3) + 1j * rng.standard_normal(3)
        P1 = projector_from_annihilator(toeplitz_annihilator(c, 6))
        alpha = 0.3 - 2.1j
        P2 = projector_from_annihilator(toeplitz_annihilator(alpha * c, 6))
        assert np.max(np.abs(P1 - P2)) <= 1e-12
