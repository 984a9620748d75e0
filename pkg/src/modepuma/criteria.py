"""
Subspace-fitting criterion functions.

Three criteria over annihilator coefficients c (or angles phi):

* V_ML(phi)  = tr{ P_A_perp R_hat }
* V_ML(c)    = tr{ (T T*)^-1 T R_hat T* }
* V_MODE(c)  = tr{ (T T*)^-1 T U G U* T* }
* V_PUMA(c)  = e* W e  with  e = vec(T U),  W = G kron (T T*)^-1

V_PUMA is deliberately evaluated through the explicit Kronecker form, as
an independent code path from the trace form, so that the identity
V_PUMA = V_MODE can be certified numerically rather than assumed.
"""

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .array_model import (
    COND_LIMIT,
    projector_from_steering,
    steering_matrix,
    toeplitz_annihilator,
)
from .errors import DimensionError, SingularityError


@dataclass(frozen=True)
class CriterionValue:
    value: float
    residual_diagnostics: dict | None = None


def vec(matrix):
    """Column-stacking vectorization."""
    return np.asarray(matrix).reshape(-1, order="F")


def kron(A, B):
    """Kronecker product (thin wrapper, kept for a uniform namespace)."""
    return np.kron(np.asarray(A), np.asarray(B))


def _coef_array(coefs):
    c = coefs.as_array() if hasattr(coefs, "as_array") else np.asarray(coefs, dtype=complex)
    return c


def _gram_cho(T):
    """Cholesky factor of T T*, with a conditioning guard."""
    gram = T @ T.conj().T
    gram = 0.5 * (gram + gram.conj().T)
    w = np.linalg.eigvalsh(gram)
    if w[0] <= 0 or w[-1] / w[0] > COND_LIMIT:
        raise SingularityError("T T* is numerically singular")
    return scipy.linalg.cho_factor(gram, lower=True), gram


def v_ml_angles(angles, cov):
    """tr{ P_A_perp R_hat } evaluated at a set of candidate angles."""
    R = cov.matrix if hasattr(cov, "matrix") else np.asarray(cov)
    A = steering_matrix(angles, R.shape[0])
    proj = projector_from_steering(A)
    return CriterionValue(value=float(np.real(np.trace(proj @ R))))


def v_ml_coefs(coefs, cov):
    """tr{ (T T*)^-1 T R_hat T* } in the coefficient parameterization."""
    R = cov.matrix if hasattr(cov, "matrix") else np.asarray(cov)
    c = _coef_array(coefs)
    T = toeplitz_annihilator(c, R.shape[0]).entries
    cho, gram = _gram_cho(T)
    inner = T @ R @ T.conj().T
    val = float(np.real(np.trace(scipy.linalg.cho_solve(cho, inner))))
    return CriterionValue(
        value=val,
        residual_diagnostics={"gram_cond": _cond_from_gram(gram)},
    )


def _cond_from_gram(gram):
    w = np.linalg.eigvalsh(gram)
    return float(w[-1] / w[0])


def v_mode(coefs, decomp, weight):
    """tr{ (T T*)^-1 T U G U* T* }, the weighted signal-subspace fit."""
    c = _coef_array(coefs)
    U = decomp.u_signal
    g = np.asarray(weight.g, dtype=float)
    T = toeplitz_annihilator(c, U.shape[0]).entries
    cho, gram = _gram_cho(T)
    TU = T @ U
    inner = (TU * g) @ TU.conj().T
    val = float(np.real(np.trace(scipy.linalg.cho_solve(cho, inner))))
    return CriterionValue(
        value=val,
        residual_diagnostics={"gram_cond": _cond_from_gram(gram)},
    )


def v_puma(coefs, decomp, weight, _fault_scale=1.0):
    """e* W e with e = vec(T U) and W = G kron (T T*)^-1, built explicitly.

    This path intentionally materializes the Kronecker weighting matrix
    instead of delegating to :func:`v_mode`; the agreement of the two
    routes is the property under test elsewhere.  ``_fault_scale`` exists
    only for detector self-tests (it perturbs G in this path alone).
    """
    c = _coef_array(coefs)
    U = decomp.u_signal
    g = np.asarray(weight.g, dtype=float) * _fault_scale
    T = toeplitz_annihilator(c, U.shape[0]).entries
    gram = T @ T.conj().T
    gram = 0.5 * (gram + gram.conj().T)
    w = np.linalg.eigvalsh(gram)
    if w[0] <= 0 or w[-1] / w[0] > COND_LIMIT:
        raise SingularityError("T T* is numerically singular")
    W = np.kron(np.diag(g), np.linalg.inv(gram))
    e = vec(T @ U)
    val = float(np.real(e.conj() @ W @ e))
    return CriterionValue(
        value=val,
        residual_diagnostics={"gram_cond": float(w[-1] / w[0])},
    )


def vec_matrix_identity_residual(X, Y, Z):
    """| vec(XYZ) - (Z^T kron X) vec(Y) | for conformable X, Y, Z."""
    X, Y, Z = np.asarray(X), np.asarray(Y), np.asarray(Z)
    if X.shape[1] != Y.shape[0] or Y.shape[1] != Z.shape[0]:
        raise DimensionError("X, Y, Z are not conformable")
    lhs = vec(X @ Y @ Z)
    rhs = kron(Z.T, X) @ vec(Y)
    return float(np.max(np.abs(lhs - rhs)))


def trace_vec_identity_residual(X, Y):
    """| tr{X* Y} - vec(X)* vec(Y) | for same-shaped X, Y."""
    X, Y = np.asarray(X), np.asarray(Y)
    if X.shape != Y.shape:
        raise DimensionError("X and Y must have the same shape")
    lhs = np.trace(X.conj().T @ Y)
    rhs = vec(X).conj() @ vec(Y)
    return float(abs(lhs - rhs))
