"""
Minimizers of the weighted subspace-fitting criterion.

* ``mode_two_step`` — closed-form eigenvector solve under a
  conjugate-symmetric, unit-norm coefficient constraint, reweighted once
  (classic two-step scheme).
* ``puma_iterative`` — iteratively reweighted linear solves under the
  c_0 = 1 gauge; both minimize the same criterion.
* ``modex`` — solves at degree r + p, then picks the best r of the r + p
  candidate directions by the ML criterion over all subsets.
"""

import itertools
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .array_model import angles_from_coefs, toeplitz_annihilator
from .criteria import v_ml_angles, v_mode
from .errors import SingularityError, ValidationError

_METHODS = ("MODE", "PUMA", "MODEX")


@dataclass(frozen=True)
class EstimatorConfig:
    method: str = "MODE"
    p_extra: int = 0
    max_iterations: int = 20
    relative_tolerance: float = 1e-10
    mode_extra_reweights: int = 0
    modex_base: str = "MODE"  # base solver for the extra-coefficient search

    def __post_init__(self):
        if self.method not in _METHODS:
            raise ValidationError(f"method must be one of {_METHODS}")
        if self.p_extra < 0:
            raise ValidationError("p_extra must be >= 0")
        if self.p_extra > 0 and self.method != "MODEX":
            raise ValidationError("p_extra is only meaningful for MODEX")
        if self.modex_base not in ("MODE", "PUMA"):
            raise ValidationError("modex_base must be MODE or PUMA")
        if self.max_iterations < 1 or self.relative_tolerance <= 0:
            raise ValidationError("bad iteration controls")


@dataclass(frozen=True)
class EstimationResult:
    angles: np.ndarray
    coefs: np.ndarray
    criterion_value: float
    iterations_used: int
    converged: bool
    candidate_log: list | None = field(default=None, compare=False)
    criterion_history: list | None = field(default=None, compare=False)


def quadratic_form_matrix(decomp, weight, omega, q):
    """Hermitian PSD matrix Q with c* Q c = tr{ Omega T U G U* T* }.

    The map c -> vec(T U) is linear: vec(T U) = Phi c with
    Phi[l*(m-q) + i, k] = U[i + k, l].  Then Q = Phi* (G kron Omega) Phi,
    accumulated column-block by column-block.
    """
    U = decomp.u_signal
    g = np.asarray(weight.g, dtype=float)
    m, r = U.shape
    if not (0 < q < m):
        raise ValidationError(f"need 0 < q < m, got q={q}, m={m}")
    omega = np.asarray(omega, dtype=complex)
    if omega.shape != (m - q, m - q):
        raise ValidationError("omega must be (m-q) x (m-q)")
    Q = np.zeros((q + 1, q + 1), dtype=complex)
    for l in range(r):
        # Hankel slice: Phi_l[i, k] = U[i + k, l]
        Phi_l = scipy.linalg.hankel(U[: m - q, l], U[m - q - 1 :, l])
        Q += g[l] * (Phi_l.conj().T @ omega @ Phi_l)
    return 0.5 * (Q + Q.conj().T)


def _gauge_fixed_solve(Q):
    """Solve Q[1:,1:] tail = -Q[1:,0]; minimum-norm fallback when singular."""
    Q11 = Q[1:, 1:]
    rhs = -Q[1:, 0]
    w = np.linalg.eigvalsh(Q11)
    if w[0] > 0 and w[-1] / w[0] <= 1e12:
        try:
            return scipy.linalg.solve(Q11, rhs, assume_a="her")
        except (scipy.linalg.LinAlgError, ValueError) as exc:
            raise SingularityError(f"gauge-fixed solve failed: {exc}") from exc
    tail, *_ = np.linalg.lstsq(Q11, rhs, rcond=None)
    return tail


def _conjugate_symmetric_basis(n):
    """Columns J_k with c = J @ rho conjugate-symmetric for real rho."""
    cols = []
    half = n // 2
    eye = np.eye(n, dtype=complex)
    for k in range(half):
        cols.append(eye[:, k] + eye[:, n - 1 - k])
        cols.append(1j * (eye[:, k] - eye[:, n - 1 - k]))
    if n % 2:
        cols.append(eye[:, half])
    return np.column_stack(cols)


def _omega_from_coefs(c, m):
    """(T T*)^-1 for the current coefficients, regularized near singularity."""
    T = toeplitz_annihilator(c, m).entries
    gram = T @ T.conj().T
    gram = 0.5 * (gram + gram.conj().T)
    w = np.linalg.eigvalsh(gram)
    ok = w[0] > 0 and w[-1] / w[0] <= 1e12
    if not ok:
        eps = 1e-12 * np.trace(gram).real / gram.shape[0]
        gram = gram + eps * np.eye(gram.shape[0])
        w = np.linalg.eigvalsh(gram)
        if w[0] <= 0:
            raise SingularityError("T T* singular even after regularization")
    return np.linalg.inv(gram), ok


def _mode_solve(decomp, weight, q, n_reweights):
    """Eigenvector minimization of c* Q c over conjugate-symmetric unit c."""
    m = decomp.m
    J = _conjugate_symmetric_basis(q + 1)
    D = np.real(J.conj().T @ J)  # diagonal metric of the real parameterization
    omega = np.eye(m - q, dtype=complex)
    converged = True
    c = None
    for step in range(1 + n_reweights):
        Q = quadratic_form_matrix(decomp, weight, omega, q)
        M = np.real(J.conj().T @ Q @ J)
        M = 0.5 * (M + M.T)
        vals, vecs = scipy.linalg.eigh(M, D)
        rho = vecs[:, 0]
        c = J @ rho
        c = c / np.linalg.norm(c)
        if step < n_reweights:
            try:
                omega, ok = _omega_from_coefs(c, m)
            except SingularityError:
                converged = False
                break
            converged = converged and ok
    return c, 1 + n_reweights, converged


def _as_coef_estimate(c, m, decomp, weight, iterations, converged, history=None):
    angles = angles_from_coefs(_safe_full_degree(c))
    return EstimationResult(
        angles=angles,
        coefs=np.asarray(c, dtype=complex),
        criterion_value=v_mode(c, decomp, weight).value,
        iterations_used=iterations,
        converged=converged,
        criterion_history=history,
    )


def _safe_full_degree(c):
    # Guard against exact zeros at the ends (angles_from_coefs requires
    # c_0 != 0 and c_q != 0); a vanishing endpoint is nudged off zero.
    c = np.asarray(c, dtype=complex).copy()
    floor = 1e-14 * np.max(np.abs(c))
    if abs(c[0]) < floor:
        c[0] = floor
    if abs(c[-1]) < floor:
        c[-1] = floor
    return c


def mode_two_step(decomp, weight, r, config=None):
    """Classic two-step solve: Omega = I, then Omega = (T T*)^-1 at step 1's c."""
    config = config or EstimatorConfig(method="MODE")
    _check_degree(decomp, r)
    c, iters, converged = _mode_solve(
        decomp, weight, r, 1 + config.mode_extra_reweights
    )
    return _as_coef_estimate(c, decomp.m, decomp, weight, iters, converged)


def puma_iterative(decomp, weight, r, config=None):
    """Iteratively reweighted minimization under the c_0 = 1 gauge.

    Each iteration fixes c_0 = 1 and solves the trailing q x q Hermitian
    block of the quadratic form for c_1 ... c_q, then refreshes the
    weighting Omega = (T T*)^-1.  Stops on relative criterion change or
    when the criterion increases twice in a row (returns the best
    iterate, flagged not converged).
    """
    config = config or EstimatorConfig(method="PUMA")
    q = r
    _check_degree(decomp, q)
    m = decomp.m
    omega = np.eye(m - q, dtype=complex)
    best_c, best_val = None, np.inf
    prev_val = np.inf
    rises = 0
    converged = False
    iters = 0
    history = []
    for iters in range(1, config.max_iterations + 1):
        Q = quadratic_form_matrix(decomp, weight, omega, q)
        tail = _gauge_fixed_solve(Q)
        c = np.concatenate(([1.0 + 0.0j], tail))
        try:
            val = v_mode(c, decomp, weight).value
        except SingularityError:
            if best_c is None:
                raise
            break
        history.append(val)
        if val < best_val:
            best_c, best_val = c, val
        if val > prev_val * (1 + 1e-12):
            rises += 1
            if rises >= 2:
                break
        else:
            rises = 0
        # Floor the denominator so a criterion at numerical zero counts
        # as converged instead of chasing round-off.
        if np.isfinite(prev_val) and abs(prev_val - val) <= config.relative_tolerance * max(
            1e-15, abs(prev_val)
        ):
            converged = True
            break
        prev_val = val
        try:
            omega, _ = _omega_from_coefs(c, m)
        except SingularityError:
            break
    return _as_coef_estimate(best_c, m, decomp, weight, iters, converged, history=history)


def _check_degree(decomp, q):
    if not (0 < q < decomp.m):
        raise ValidationError(f"need 0 < q < m, got q={q}, m={decomp.m}")


def modex(cov, decomp, weight, r, config):
    """Extra-coefficient estimation with ML subset selection.

    Runs the base solver twice, at degree r and at degree q = r + p_extra,
    pools the r + (r + p) candidate angles from both roots sets, scores
    every r-subset with the ML criterion on the sample covariance, and
    returns the minimizing subset.  Pooling keeps the plain estimate in
    the running, so the selection can only match or improve on it;
    the extended roots supply the alternatives that matter when a
    subspace swap corrupts the plain fit.  Subsets with near-coincident
    candidates score +inf.
    """
    p = config.p_extra
    if p >= decomp.m - r:
        raise ValidationError(
            f"p_extra must satisfy p < m - r, got p={p}, m={decomp.m}, r={r}"
        )
    q = r + p

    def solve(degree):
        if config.modex_base == "PUMA":
            return _puma_at_degree(decomp, weight, degree, config)
        return _mode_solve(decomp, weight, degree, 1 + config.mode_extra_reweights)

    c_base, iters, converged = solve(r)
    candidates = angles_from_coefs(_safe_full_degree(c_base))
    c = c_base
    if p > 0:
        c, extra_iters, extra_conv = solve(q)
        iters += extra_iters
        converged = converged and extra_conv
        candidates = np.sort(
            np.concatenate([candidates, angles_from_coefs(_safe_full_degree(c))])
        )
    log = []
    best_subset, best_val = None, np.inf
    for subset in itertools.combinations(range(len(candidates)), r):
        phi = candidates[list(subset)]
        # Near-coincident candidates score +inf (rank-deficient steering).
        if np.any(np.diff(phi) < 1e-12):
            val = float("inf")
        else:
            try:
                val = v_ml_angles(phi, cov).value
            except SingularityError:
                val = float("inf")
        log.append((tuple(phi.tolist()), val))
        if not np.isfinite(val):
            continue
        if val < best_val:
            best_subset, best_val = phi, val
    if best_subset is None:
        raise SingularityError("no valid candidate subset (all rank-deficient)")
    return EstimationResult(
        angles=best_subset,
        coefs=np.asarray(c, dtype=complex),
        criterion_value=best_val,
        iterations_used=iters,
        converged=converged,
        candidate_log=log,
    )


def _puma_at_degree(decomp, weight, q, config):
    """PUMA-style reweighted solve at an arbitrary degree (Enhanced variant)."""
    m = decomp.m
    _check_degree(decomp, q)
    omega = np.eye(m - q, dtype=complex)
    c = None
    prev_val = np.inf
    converged = False
    iters = 0
    for iters in range(1, config.max_iterations + 1):
        Q = quadratic_form_matrix(decomp, weight, omega, q)
        tail = _gauge_fixed_solve(Q)
        c = np.concatenate(([1.0 + 0.0j], tail))
        try:
            val = v_mode(c, decomp, weight).value
        except SingularityError:
            break
        if np.isfinite(prev_val) and abs(prev_val - val) <= config.relative_tolerance * max(
            1e-15, abs(prev_val)
        ):
            converged = True
            break
        prev_val = val
        try:
            omega, _ = _omega_from_coefs(c, m)
        except SingularityError:
            break
    return c, iters, converged


def estimate(cov, decomp, weight, r, config):
    """Dispatch on config.method; MODEX additionally needs the covariance."""
    if config.method == "MODE":
        return mode_two_step(decomp, weight, r, config)
    if config.method == "PUMA":
        return puma_iterative(decomp, weight, r, config)
    return modex(cov, decomp, weight, r, config)


def match_angles(estimate_angles, truth_angles):
    """Wrap-aware index-wise pairing of two equally sized angle sets.

    Both sets are sorted ascending; the per-pair error is the principal
    value of (estimate - truth) in (-pi, pi].  Returns (errors, rmse).
    """
    est = np.sort(np.atleast_1d(np.asarray(estimate_angles, dtype=float)))
    tru = np.sort(np.atleast_1d(np.asarray(truth_angles, dtype=float)))
    if est.shape != tru.shape:
        raise ValidationError("angle sets must have equal length")
    d = est - tru
    err = np.mod(d + np.pi, 2 * np.pi) - np.pi
    err[err == -np.pi] = np.pi
    rmse = float(np.sqrt(np.mean(err**2)))
    return err, rmse
