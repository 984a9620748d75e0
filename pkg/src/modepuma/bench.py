"""
Monte Carlo sweeps and numerical property verification.

The sweep runner drives the full pipeline (simulate -> covariance ->
eigendecomposition -> estimate -> angle matching) over a grid of SNR and
snapshot-count cells, writing one CSV row per trial plus one aggregate
row per cell.  Trial seeds derive deterministically from the base seed
and are shared across methods within a cell, so method comparisons are
paired.

SNR convention: SNR_dB = 10 log10( tr(P) / (r sigma^2) ), i.e. average
per-source power over noise power.
"""

import concurrent.futures
import itertools
import time
from dataclasses import dataclass, replace

import numpy as np

from .array_model import (
    AngleSet,
    coefs_from_angles,
    projector_from_annihilator,
    projector_from_steering,
    steering_matrix,
    toeplitz_annihilator,
)
from .criteria import (
    trace_vec_identity_residual,
    v_ml_coefs,
    v_mode,
    v_puma,
    vec_matrix_identity_residual,
)
from .errors import NumericalError, SingularityError, ValidationError
from .estimators import EstimatorConfig, estimate, match_angles
from .sample_stats import (
    Scenario,
    SignalWeight,
    SubspaceDecomposition,
    sample_covariance,
    signal_weight,
    simulate_snapshots,
    subspace_decomposition,
)

CSV_COLUMNS = (
    "method",
    "m",
    "r",
    "snr_db",
    "n_snapshots",
    "trial_index",
    "rmse_rad",
    "criterion_value",
    "converged",
    "success",
    "wall_time_ms",
)

DEFAULT_SUCCESS_THRESHOLD = 0.1


@dataclass(frozen=True)
class SweepSpec:
    base: Scenario
    snr_db_list: tuple
    snapshots_list: tuple
    methods: tuple  # EstimatorConfig instances
    n_trials: int
    base_seed: int

    def __post_init__(self):
        if not self.snr_db_list or not self.snapshots_list or not self.methods:
            raise ValidationError("sweep lists must be non-empty")
        if self.n_trials < 1:
            raise ValidationError("need n_trials >= 1")


def noise_power_for_snr(source_cov, r, snr_db):
    """sigma^2 = tr(P) / (r * 10^(SNR/10))."""
    total = float(np.real(np.trace(np.asarray(source_cov))))
    return total / (r * 10.0 ** (snr_db / 10.0))


def trial_seed(base_seed, snr_index, snapshots_index, trial_index):
    """Per-trial scenario seed, independent of the estimation method."""
    ss = np.random.SeedSequence([int(base_seed), snr_index, snapshots_index, trial_index])
    return int(ss.generate_state(1, dtype=np.uint64)[0])


def method_label(config):
    if config.method == "MODEX":
        tag = "modex" if config.modex_base == "MODE" else "epuma"
        return f"{tag}:{config.p_extra}"
    return config.method.lower()


def _run_trial(args):
    scenario, config, threshold, timing = args
    t0 = time.perf_counter()
    snaps = simulate_snapshots(scenario)
    cov = sample_covariance(snaps)
    decomp = subspace_decomposition(cov, scenario.r)
    weight = signal_weight(decomp)
    try:
        result = estimate(cov, decomp, weight, scenario.r, config)
        errors, rmse = match_angles(result.angles, scenario.angles.as_array())
        success = bool(np.all(np.abs(errors) <= threshold))
        row = (rmse, result.criterion_value, result.converged, success)
    except (SingularityError, NumericalError, ValidationError):
        row = (float("nan"), float("nan"), False, False)
    wall_ms = (time.perf_counter() - t0) * 1e3
    return row + ((wall_ms if timing else None),)


def run_sweep(sweep, success_threshold=DEFAULT_SUCCESS_THRESHOLD, jobs=1, timing=False):
    """Execute the full sweep; returns a list of CSV rows (tuples of str).

    Rows are ordered by (snr, snapshot count, method, trial); each cell is
    followed by one aggregate row with trial_index = -1 carrying the cell
    RMSE, mean criterion value, convergence rate, and success rate.
    """
    base = sweep.base
    cells = list(
        itertools.product(
            enumerate(sweep.snr_db_list),
            enumerate(sweep.snapshots_list),
            sweep.methods,
        )
    )
    tasks = []
    for (si, snr), (ti, T), config in cells:
        sigma2 = noise_power_for_snr(base.source_cov, base.r, snr)
        for trial in range(sweep.n_trials):
            scenario = replace(
                base,
                noise_power=sigma2,
                n_snapshots=T,
                seed=trial_seed(sweep.base_seed, si, ti, trial),
            )
            tasks.append((scenario, config, success_threshold, timing))

    if jobs > 1:
        with concurrent.futures.ProcessPoolExecutor(max_workers=jobs) as pool:
            outcomes = list(pool.map(_run_trial, tasks, chunksize=8))
    else:
        outcomes = [_run_trial(t) for t in tasks]

    rows = []
    idx = 0
    for (si, snr), (ti, T), config in cells:
        label = method_label(config)
        cell = outcomes[idx : idx + sweep.n_trials]
        idx += sweep.n_trials
        for trial, (rmse, crit, conv, succ, wall) in enumerate(cell):
            rows.append(
                (
                    label,
                    str(base.m),
                    str(base.r),
                    _fmt(snr),
                    str(T),
                    str(trial),
                    _fmt(rmse),
                    _fmt(crit),
                    str(int(conv)),
                    str(int(succ)),
                    "" if wall is None else f"{wall:.3f}",
                )
            )
        rmses = np.array([c[0] for c in cell])
        crits = np.array([c[1] for c in cell])
        finite = np.isfinite(rmses)
        cell_rmse = float(np.sqrt(np.mean(rmses[finite] ** 2))) if finite.any() else float("nan")
        cell_crit = float(np.mean(crits[np.isfinite(crits)])) if np.isfinite(crits).any() else float("nan")
        rows.append(
            (
                label,
                str(base.m),
                str(base.r),
                _fmt(snr),
                str(T),
                "-1",
                _fmt(cell_rmse),
                _fmt(cell_crit),
                _fmt(np.mean([c[2] for c in cell])),
                _fmt(np.mean([c[3] for c in cell])),
                "",
            )
        )
    return rows


def _fmt(x):
    # repr of a float is the shortest exact round-trip form, so aggregate
    # rows can be recomputed exactly from the per-trial rows.
    return repr(float(x))


def write_csv(path, rows, sweep, success_threshold):
    """Write sweep rows with a deterministic metadata header."""
    base = sweep.base
    with open(path, "w") as fh:
        fh.write("# snr_db = 10*log10(tr(P)/(r*sigma^2)); aggregate rows have trial_index=-1\n")
        fh.write(
            f"# m={base.m} r={base.r} n_trials={sweep.n_trials} "
            f"base_seed={sweep.base_seed} success_threshold={success_threshold}\n"
        )
        fh.write(",".join(CSV_COLUMNS) + "\n")
        for row in rows:
            fh.write(",".join(row) + "\n")


# ---------------------------------------------------------------------------
# Sweep configuration file: "key = value" lines, '#' comments.
# ---------------------------------------------------------------------------

_KNOWN_KEYS = {
    "m",
    "r",
    "angles",
    "source_cov",
    "noise_power",
    "n_snapshots",
    "seed",
    "snr_db_list",
    "snapshots_list",
    "methods",
    "n_trials",
    "base_seed",
}


def parse_method_token(token):
    """mode | puma | modex:<p> | epuma:<p>  ->  EstimatorConfig."""
    token = token.strip().lower()
    if token == "mode":
        return EstimatorConfig(method="MODE")
    if token == "puma":
        return EstimatorConfig(method="PUMA")
    for tag, base in (("modex", "MODE"), ("epuma", "PUMA")):
        if token.startswith(tag + ":"):
            try:
                p = int(token.split(":", 1)[1])
            except ValueError:
                raise ValidationError(f"bad method token {token!r}")
            return EstimatorConfig(method="MODEX", p_extra=p, modex_base=base)
    raise ValidationError(f"unknown method {token!r}")


def parse_sweep_config(path):
    """Parse a sweep config file into a SweepSpec."""
    raw = {}
    with open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValidationError(f"{path}:{lineno}: expected 'key = value'")
            key, value = (part.strip() for part in line.split("=", 1))
            if key not in _KNOWN_KEYS:
                raise ValidationError(f"{path}:{lineno}: unknown key {key!r}")
            if key in raw:
                raise ValidationError(f"{path}:{lineno}: duplicate key {key!r}")
            raw[key] = value
    missing = _KNOWN_KEYS - {"source_cov", "noise_power", "seed"} - set(raw)
    if missing:
        raise ValidationError(f"{path}: missing keys: {sorted(missing)}")

    floats = lambda s: tuple(float(v) for v in s.split(","))
    ints = lambda s: tuple(int(v) for v in s.split(","))
    r = int(raw["r"])
    cov_text = raw.get("source_cov", "identity").strip().lower()
    if cov_text == "identity":
        P = np.eye(r, dtype=complex)
    else:
        diag = floats(cov_text)
        if len(diag) != r:
            raise ValidationError(f"{path}: source_cov needs {r} diagonal entries")
        P = np.diag(np.asarray(diag, dtype=complex))
    base = Scenario(
        m=int(raw["m"]),
        r=r,
        angles=AngleSet(floats(raw["angles"])),
        source_cov=P,
        noise_power=float(raw.get("noise_power", 1.0)),
        n_snapshots=int(raw["n_snapshots"]),
        seed=int(raw.get("seed", 0)),
    )
    return SweepSpec(
        base=base,
        snr_db_list=floats(raw["snr_db_list"]),
        snapshots_list=ints(raw["snapshots_list"]),
        methods=tuple(parse_method_token(t) for t in raw["methods"].split(",")),
        n_trials=int(raw["n_trials"]),
        base_seed=int(raw["base_seed"]),
    )


# ---------------------------------------------------------------------------
# Property verification suites.
# ---------------------------------------------------------------------------

@dataclass
class PropertyReport:
    name: str
    max_deviation: float
    tolerance: float

    @property
    def ok(self):
        return self.max_deviation <= self.tolerance


def random_angle_set(rng, r, min_separation=0.05):
    """Uniform random AngleSet with a circular minimum separation."""
    while True:
        phi = np.sort(rng.uniform(-np.pi + 1e-9, np.pi, size=r))
        gaps = np.diff(phi)
        wrap = 2 * np.pi - (phi[-1] - phi[0]) if r > 1 else np.inf
        if r == 1 or (np.all(gaps >= min_separation) and wrap >= min_separation):
            return AngleSet(phi)


def _random_instance(rng, max_m=12, max_r=4):
    m = int(rng.integers(3, max_m + 1))
    r = int(rng.integers(1, min(max_r, m - 1) + 1))
    Z = rng.standard_normal((m, r)) + 1j * rng.standard_normal((m, r))
    U, _ = np.linalg.qr(Z)
    g = rng.uniform(0.1, 5.0, size=r)
    c = rng.standard_normal(r + 1) + 1j * rng.standard_normal(r + 1)
    while abs(c[0]) < 1e-3:
        c[0] = rng.standard_normal() + 1j * rng.standard_normal()
    decomp = SubspaceDecomposition(
        u_signal=U, lambdas=np.sort(g)[::-1] + 1.0, sigma2=0.5,
        all_eigenvalues=np.full(m, 0.5),
    )
    return m, r, c, decomp, SignalWeight(g=g)


def verify_properties(n_instances=1000, seed=0, max_m=12, max_r=4, fault_scale=1.0):
    """Run all numerical property suites; returns a list of PropertyReport."""
    rng = np.random.default_rng(seed)
    dev_equiv = 0.0
    dev_gauge = 0.0
    for _ in range(n_instances):
        m, r, c, decomp, weight = _random_instance(rng, max_m, max_r)
        try:
            vm = v_mode(c, decomp, weight).value
            vp = v_puma(c, decomp, weight, _fault_scale=fault_scale).value
        except SingularityError:
            continue
        dev_equiv = max(dev_equiv, abs(vp - vm) / max(1.0, vm))
        alpha = (rng.standard_normal() + 1j * rng.standard_normal()) or 1.0
        vm2 = v_mode(alpha * c, decomp, weight).value
        vp2 = v_puma(alpha * c, decomp, weight, _fault_scale=fault_scale).value
        cov = np.eye(m)
        vl = v_ml_coefs(c, cov).value
        vl2 = v_ml_coefs(alpha * c, cov).value
        dev_gauge = max(
            dev_gauge,
            abs(vm2 - vm) / max(1.0, abs(vm)),
            abs(vp2 - vp) / max(1.0, abs(vp)),
            abs(vl2 - vl) / max(1.0, abs(vl)),
        )

    dev_proj = 0.0
    dev_annih = 0.0
    for _ in range(n_instances):
        m = int(rng.integers(3, max_m + 1))
        r = int(rng.integers(1, min(max_r, m - 1) + 1))
        phi = random_angle_set(rng, r)
        A = steering_matrix(phi, m)
        c = coefs_from_angles(phi)
        T = toeplitz_annihilator(c, m)
        dev_annih = max(dev_annih, float(np.max(np.abs(T.entries @ A.entries))))
        diff = projector_from_steering(A) - projector_from_annihilator(T)
        dev_proj = max(dev_proj, float(np.linalg.norm(diff)))

    dev_vec = 0.0
    dev_trace = 0.0
    for _ in range(n_instances):
        dims = rng.integers(2, 6, size=4)
        X = rng.standard_normal((dims[0], dims[1])) + 1j * rng.standard_normal((dims[0], dims[1]))
        Y = rng.standard_normal((dims[1], dims[2])) + 1j * rng.standard_normal((dims[1], dims[2]))
        Z = rng.standard_normal((dims[2], dims[3])) + 1j * rng.standard_normal((dims[2], dims[3]))
        dev_vec = max(dev_vec, vec_matrix_identity_residual(X, Y, Z))
        P = rng.standard_normal((dims[0], dims[1])) + 1j * rng.standard_normal((dims[0], dims[1]))
        Q = rng.standard_normal((dims[0], dims[1])) + 1j * rng.standard_normal((dims[0], dims[1]))
        dev_trace = max(dev_trace, trace_vec_identity_residual(P, Q))

    return [
        PropertyReport("criterion_equivalence", dev_equiv, 1e-10),
        PropertyReport("projector_identity", dev_proj, 1e-10),
        PropertyReport("annihilation", dev_annih, 1e-12),
        PropertyReport("gauge_invariance", dev_gauge, 1e-10),
        PropertyReport("vec_of_product", dev_vec, 1e-12),
        PropertyReport("trace_as_inner_product", dev_trace, 1e-12),
    ]
