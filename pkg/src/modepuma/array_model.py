"""
Uniform linear array geometry and algebra.

Steering matrices, the banded Toeplitz annihilator built from polynomial
coefficients, conversion between direction angles and polynomial
coefficients, and the two equivalent orthogonal projectors.

Angles are electrical angles phi in (-pi, pi]; no wavelength or element
spacing enters anywhere.
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionError, SingularityError, ValidationError

# Condition-number ceiling beyond which Gram matrices are treated as singular.
COND_LIMIT = 1e12


@dataclass(frozen=True)
class AngleSet:
    """Ordered set of distinct direction-of-arrival angles in radians.

    Angles must lie in (-pi, pi] and be strictly ascending.
    """

    angles: tuple

    def __init__(self, angles):
        arr = np.atleast_1d(np.asarray(angles, dtype=float))
        if arr.ndim != 1 or arr.size < 1:
            raise ValidationError("AngleSet needs at least one angle")
        if np.any(arr <= -np.pi) or np.any(arr > np.pi):
            raise ValidationError("angles must lie in (-pi, pi]")
        if np.any(np.diff(arr) <= 0):
            raise ValidationError("angles must be strictly ascending and distinct")
        object.__setattr__(self, "angles", tuple(arr.tolist()))

    @property
    def r(self):
        return len(self.angles)

    def as_array(self):
        return np.asarray(self.angles, dtype=float)


@dataclass(frozen=True)
class CoefVector:
    """Complex polynomial coefficients c_0 ... c_q, constant term first.

    The coefficients parameterize the annihilating polynomial
    c_0 + c_1 z + ... + c_q z^q; c_0 must be nonzero.
    """

    coefs: tuple

    def __init__(self, coefs):
        arr = np.atleast_1d(np.asarray(coefs, dtype=complex))
        if arr.ndim != 1 or arr.size < 2:
            raise ValidationError("CoefVector needs degree >= 1 (length >= 2)")
        if not np.all(np.isfinite(arr.view(float))):
            raise ValidationError("coefficients must be finite")
        if arr[0] == 0:
            raise ValidationError("leading coefficient c_0 must be nonzero")
        object.__setattr__(self, "coefs", tuple(arr.tolist()))

    @property
    def degree(self):
        return len(self.coefs) - 1

    def as_array(self):
        return np.asarray(self.coefs, dtype=complex)


@dataclass(frozen=True)
class SteeringMatrix:
    """Vandermonde array response matrix, m sensors by r sources."""

    entries: np.ndarray
    angles: AngleSet = field(compare=False)

    @property
    def m(self):
        return self.entries.shape[0]

    @property
    def r(self):
        return self.entries.shape[1]


@dataclass(frozen=True)
class Annihilator:
    """Banded Toeplitz matrix T with T @ steering_matrix = 0.

    Shape (m - q) x m where q is the polynomial degree; row i carries the
    coefficients c_0 ... c_q starting at column i.
    """

    entries: np.ndarray
    source: CoefVector = field(compare=False)

    @property
    def m(self):
        return self.entries.shape[1]

    @property
    def q(self):
        return self.source.degree


def steering_matrix(angles, m):
    """Vandermonde steering matrix with generator exp(j*phi_i) per column.

    Parameters
    ----------
    angles : AngleSet
    m : int
        Sensor count; must exceed the number of angles.
    """
    if not isinstance(angles, AngleSet):
        angles = AngleSet(angles)
    if m <= angles.r:
        raise DimensionError(f"need m > r, got m={m}, r={angles.r}")
    phi = angles.as_array()
    entries = np.exp(1j * np.outer(np.arange(m), phi))
    return SteeringMatrix(entries=entries, angles=angles)


def coefs_from_angles(angles):
    """Expand prod_k (1 - exp(-j*phi_k) z) into coefficients with c_0 = 1.

    The resulting polynomial has roots exactly {exp(j*phi_k)}.
    """
    if not isinstance(angles, AngleSet):
        angles = AngleSet(angles)
    c = np.array([1.0 + 0.0j])
    for phi in angles.angles:
        c = np.convolve(c, [1.0, -np.exp(-1j * phi)])
    return CoefVector(c)


def angles_from_coefs(coefs):
    """Roots of the coefficient polynomial, projected to the unit circle.

    Returns the arguments of the q roots of c_0 + c_1 z + ... + c_q z^q,
    sorted ascending in (-pi, pi].  Requires c_q != 0 so the degree does
    not collapse.
    """
    if not isinstance(coefs, CoefVector):
        coefs = CoefVector(coefs)
    c = coefs.as_array()
    if c[-1] == 0:
        raise ValidationError("trailing coefficient c_q is zero; degree collapsed")
    # np.roots builds the companion matrix of the monic polynomial.
    roots = np.roots(c[::-1])
    if not np.all(np.isfinite(roots.view(float))):
        raise ValidationError("root finding produced non-finite roots")
    phi = np.angle(roots)
    phi[phi <= -np.pi] = np.pi
    return np.sort(phi)


def toeplitz_annihilator(coefs, m):
    """(m-q) x m banded Toeplitz annihilator built from the coefficients."""
    if not isinstance(coefs, CoefVector):
        coefs = CoefVector(coefs)
    q = coefs.degree
    if m <= q:
        raise DimensionError(f"need m > q, got m={m}, q={q}")
    c = coefs.as_array()
    entries = np.zeros((m - q, m), dtype=complex)
    for i in range(m - q):
        entries[i, i : i + q + 1] = c
    return Annihilator(entries=entries, source=coefs)


def _check_conditioning(gram, what):
    w = np.linalg.eigvalsh(gram)
    if w[-1] <= 0 or w[0] <= 0 or w[-1] / w[0] > COND_LIMIT:
        raise SingularityError(f"{what} is numerically singular")


def projector_from_annihilator(T):
    """Orthogonal projector T* (T T*)^-1 T onto the row space of T."""
    Tm = T.entries if isinstance(T, Annihilator) else np.asarray(T, dtype=complex)
    gram = Tm @ Tm.conj().T
    gram = 0.5 * (gram + gram.conj().T)
    _check_conditioning(gram, "T T*")
    proj = Tm.conj().T @ np.linalg.solve(gram, Tm)
    return 0.5 * (proj + proj.conj().T)


def projector_from_steering(A):
    """Orthogonal projector I - A (A* A)^-1 A* onto the complement of R(A)."""
    Am = A.entries if isinstance(A, SteeringMatrix) else np.asarray(A, dtype=complex)
    gram = Am.conj().T @ Am
    gram = 0.5 * (gram + gram.conj().T)
    _check_conditioning(gram, "A* A")
    m = Am.shape[0]
    proj = np.eye(m, dtype=complex) - Am @ np.linalg.solve(gram, Am.conj().T)
    return 0.5 * (proj + proj.conj().T)
