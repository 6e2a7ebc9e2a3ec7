"""Experiment runners: seeded replicates, aggregation, and verdicts.

Each runner consumes an ExperimentConfig, spins independent replicates
(one RNG substream per (arm, replicate), so scheduling cannot change any
number), aggregates counts/heights, applies its acceptance rules, and
returns an ExperimentReport ready for deterministic serialization.

Statistical acceptance uses 3 combined standard errors for mean
comparisons and p > 0.01 for two-sample Kolmogorov-Smirnov tests; the
underlying identities are exact in expectation, so these thresholds only
absorb desk-scale Monte Carlo noise.
"""

import math
from concurrent.futures import ThreadPoolExecutor

import numpy as np
from scipy.stats import ks_2samp

from . import __version__
from .backends import backend_name
from .config import ConfigError, ExperimentConfig
from .covariance import make_covariance, spectral_moments
from .critical import SearchConfig, count_mu, find_critical_points, match_catalogs, morse_sum
from .diffeo import make_diffeomorphism, transform_field
from .domain import Box, MappedBox, Torus
from .field import realization_to_text, sample_field
from .kacrice import estimate_height_dist, expected_count_density
from .reporting import (
    ExperimentReport,
    catalog_rows,
    mean_se,
    predicate_check,
    surface_catalog_rows,
    tolerance_check,
)
from .rng import substream
from .surface import (
    Ellipsoid,
    SurfaceSearchConfig,
    ellipsoid_field,
    find_surface_critical_points,
    sphere_field,
    surface_mesh_text,
    verify_surface_correspondence,
)

RICE_RATE_1D = math.sqrt(3.0) / math.pi  # total critical-point rate, sq-exp l=1


# -- config helpers -----------------------------------------------------------


def _model_from(config):
    kind = config.get_str("model", "covariance", "squared-exponential")
    ell = config.get_float("model", "length_scale", 1.0)
    dim = config.get_int("model", "dimension", 2)
    try:
        model = make_covariance(kind, ell, dim)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    waves = config.get_int("model", "waves", 2048)
    if waves < 1:
        raise ConfigError("model waves must be >= 1")
    return model, waves


def _domain_from(config, dim):
    kind = config.get_str("domain", "kind", "torus")
    if kind == "torus":
        period = config.get_floats("domain", "period", [8.0] * dim)
        if len(period) == 1:
            period = period * dim
        if len(period) != dim:
            raise ConfigError("domain period length must match dimension")
        try:
            return Torus(np.array(period))
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
    if kind == "box":
        lower = config.get_floats("domain", "lower", [0.0] * dim)
        upper = config.get_floats("domain", "upper", [8.0] * dim)
        if len(lower) != dim or len(upper) != dim:
            raise ConfigError("domain corners must match dimension")
        sides = np.array(upper) - np.array(lower)
        margin = config.get_float("domain", "margin", 0.02 * float(np.min(sides)))
        try:
            return Box(np.array(lower), np.array(upper), margin=margin)
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
    raise ConfigError(f"unsupported domain kind {kind!r}")


def _map_from(config, dim, required=False):
    if "map" not in config.sections:
        if required:
            raise ConfigError("this experiment needs a [map] section")
        return make_diffeomorphism("identity", dimension=dim)
    kind = config.get_str("map", "kind")
    try:
        if kind == "identity":
            return make_diffeomorphism("identity", dimension=dim)
        if kind == "linear":
            matrix = config.get_matrix("map", "matrix")
            return make_diffeomorphism("linear", matrix=np.array(matrix))
        if kind == "sine-warp":
            amplitude = config.get_floats("map", "amplitude")
            frequency = config.get_matrix("map", "frequency")
            phase = config.get_floats("map", "phase", [0.0] * len(frequency))
            direction = config.get_matrix("map", "direction", None)
            return make_diffeomorphism(
                "sine-warp",
                amplitude=amplitude,
                frequency=frequency,
                phase=phase,
                direction=None if direction is None else np.array(direction),
            )
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    raise ConfigError(f"unsupported map kind {kind!r}")


def _search_config_from(config):
    kwargs = {}
    if config.has("search", "resolution"):
        kwargs["resolution"] = tuple(int(x) for x in config.get_floats("search", "resolution"))
    if config.has("search", "seeds_per_wavelength"):
        kwargs["seeds_per_wavelength"] = config.get_float("search", "seeds_per_wavelength")
    if config.has("search", "refine_check"):
        kwargs["refine_check"] = config.get_bool("search", "refine_check")
    if config.has("search", "max_iterations"):
        kwargs["max_iterations"] = config.get_int("search", "max_iterations")
    return SearchConfig(**kwargs)


def _u_grid_from(config, default=(0.0,)):
    grid = config.get_floats("thresholds", "u_grid", list(default))
    return [float("-inf")] + [u for u in grid]


def _base_report(config, kind, mode="shared"):
    return ExperimentReport(
        kind=kind,
        seed=config.get_int("experiment", "seed", 0),
        config_hash=config.config_hash(),
        version=__version__,
        backend=backend_name(),
        mode=mode,
        replicates=config.get_int("experiment", "replicates", 1),
    )


def _run_replicates(fn, count, threads):
    if threads <= 1:
        return [fn(r) for r in range(count)]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, range(count)))


def _ratio_mean_se(numers, denoms):
    """Ratio-of-means estimator with a replicate-level delta-method error."""
    n = np.asarray(numers, dtype=float)
    d = np.asarray(denoms, dtype=float)
    if d.size == 0 or d.mean() == 0:
        return float("nan"), float("nan")
    r = n.mean() / d.mean()
    if d.size < 2:
        return float(r), 0.0
    resid = n - r * d
    se = float(np.sqrt(np.var(resid, ddof=1) / d.size) / d.mean())
    return float(r), se


def _reject_or_none(catalog, closed_expected=None):
    """Rejection reason for ensemble statistics, or None if usable."""
    if not catalog.refinement_stable:
        return "refinement-unstable"
    if closed_expected is not None and morse_sum(catalog) != closed_expected:
        return f"morse-sum={morse_sum(catalog)}:expected={closed_expected}"
    return None


# -- verify-diffeo ------------------------------------------------------------


def run_verify_diffeo(config, threads=1):
    """Per-replicate critical-point bijection between X = Z o f and Z.

    shared mode: the same realization underlies both catalogs, so counts
    must agree exactly (via the bijection).  independent mode additionally
    compares mean counts of X against an independently seeded Z arm within
    3 combined standard errors per (index, threshold).
    """
    model, waves = _model_from(config)
    diffeo = _map_from(config, model.dimension)
    domain = _domain_from(config, model.dimension)
    mode = config.get_str("experiment", "mode", "shared")
    if mode not in ("shared", "independent"):
        raise ConfigError(f"unsupported mode {mode!r}")
    if isinstance(domain, Torus) and diffeo.kind != "identity":
        raise ConfigError("verify-diffeo on a torus requires the identity map")
    reps = config.get_int("experiment", "replicates", 1)
    seed = config.get_int("experiment", "seed", 0)
    search = _search_config_from(config)
    u_grid = _u_grid_from(config)
    report = _base_report(config, "verify-diffeo", mode)

    image_domain = domain if diffeo.kind == "identity" else MappedBox(domain, diffeo)
    torus_expected = 0 if isinstance(domain, Torus) else None

    def one(r):
        rng = substream(seed, 0, r)
        z = sample_field(model, waves, rng)
        x = transform_field(z, diffeo)
        cat_x = find_critical_points(x, domain, search)
        cat_z = find_critical_points(z, image_domain, search)
        reason = _reject_or_none(cat_x, torus_expected) or _reject_or_none(cat_z, torus_expected)
        match = match_catalogs(cat_x, cat_z, diffeo)
        return r, cat_x, cat_z, match, reason

    results = _run_replicates(one, reps, threads)

    indep_counts = {}
    if mode == "independent":
        def one_indep(r):
            rng = substream(seed, 1, r)
            z = sample_field(model, waves, rng)
            cat = find_critical_points(z, image_domain, search)
            return r, cat, _reject_or_none(cat, torus_expected)

        indep_counts = {r: (cat, reason) for r, cat, reason in _run_replicates(one_indep, reps, threads)}

    n_match = 0
    accepted = 0
    worst = ""
    counts = {(u, i): [] for u in u_grid for i in range(model.dimension + 1)}
    counts_z = {(u, i): [] for u in u_grid for i in range(model.dimension + 1)}
    for r, cat_x, cat_z, match, reason in results:
        if reason is not None:
            report.rejected.append((r, reason))
            continue
        accepted += 1
        if match.passed:
            n_match += 1
        elif not worst:
            worst = f"replicate {r}: {match.summary()}"
        for u in u_grid:
            for i in range(model.dimension + 1):
                cx = count_mu(cat_x, u, i)
                cz = count_mu(cat_z, u, i)
                counts[(u, i)].append(cx)
                counts_z[(u, i)].append(cz)
                report.counts_rows.append({"replicate": r, "arm": "x", "u": float(u), "index": i, "count": cx})
                report.counts_rows.append({"replicate": r, "arm": "z", "u": float(u), "index": i, "count": cz})
        report.catalog_rows.setdefault("x", []).extend(catalog_rows(r, cat_x))
        report.catalog_rows.setdefault("z", []).extend(catalog_rows(r, cat_z))

    report.checks.append(predicate_check(
        "bijection-pass-rate", n_match == accepted and accepted > 0,
        value=n_match / max(accepted, 1), detail=worst or f"{n_match}/{accepted} bijections"))
    reject_frac = len(report.rejected) / max(reps, 1)
    report.checks.append(predicate_check(
        "reject-fraction<=0.1", reject_frac <= 0.10, value=reject_frac))

    max_diff = 0
    for key in counts:
        diffs = [abs(a - b) for a, b in zip(counts[key], counts_z[key])]
        if diffs:
            max_diff = max(max_diff, max(diffs))
    report.checks.append(predicate_check(
        "per-replicate-count-equality", max_diff == 0, value=float(max_diff),
        detail="counts via the bijection must agree exactly"))

    if mode == "independent":
        for u in u_grid:
            for i in range(model.dimension + 1):
                vals_z = []
                for r, (cat, reason) in indep_counts.items():
                    if reason is None:
                        vals_z.append(count_mu(cat, u, i))
                mx, sx = mean_se(counts[(u, i)])
                mz, sz = mean_se(vals_z)
                tol = 3.0 * math.hypot(sx, sz)
                report.checks.append(tolerance_check(
                    f"mean-count:u={u:g}:i={i}", mx, mz, tol,
                    detail="X arm vs independent Z arm"))

    agg = {}
    for (u, i), vals in counts.items():
        m, s = mean_se(vals)
        agg[f"mean-count-x:u={u:g}:i={i}"] = {"mean": m, "se": s}
    report.aggregates = agg
    return report


# -- verify-aniso -------------------------------------------------------------


def run_verify_aniso(config, threads=1):
    """Count scaling under X(t) = Z(A t): mean counts vs |det A| times iso.

    Optionally cross-checks both arms against the matrix-oracle density
    prediction ([oracle] check = true; needs a large waves count to make
    the realization law effectively Gaussian).
    """
    model, waves = _model_from(config)
    diffeo = _map_from(config, model.dimension, required=True)
    if diffeo.kind != "linear":
        raise ConfigError("verify-aniso needs a linear [map]")
    matrix = diffeo.matrix
    det = abs(float(np.linalg.det(matrix)))
    domain = _domain_from(config, model.dimension)
    if isinstance(domain, Torus):
        raise ConfigError("verify-aniso counts use box domains (margins excluded)")
    reps = config.get_int("experiment", "replicates", 1)
    seed = config.get_int("experiment", "seed", 0)
    search = _search_config_from(config)
    u_grid = _u_grid_from(config)
    oracle_check = config.get_bool("oracle", "check", False)
    oracle_n = config.get_int("oracle", "samples", 400_000)
    report = _base_report(config, "verify-aniso", config.get_str("experiment", "mode", "independent"))

    def one_x(r):
        rng = substream(seed, 0, r)
        z = sample_field(model, waves, rng)
        x = transform_field(z, diffeo)
        cat = find_critical_points(x, domain, search)
        return r, cat, _reject_or_none(cat)

    def one_z(r):
        rng = substream(seed, 1, r)
        z = sample_field(model, waves, rng)
        cat = find_critical_points(z, domain, search)
        return r, cat, _reject_or_none(cat)

    res_x = _run_replicates(one_x, reps, threads)
    res_z = _run_replicates(one_z, reps, threads)

    counts_x = {(u, i): [] for u in u_grid for i in range(model.dimension + 1)}
    counts_z = {(u, i): [] for u in u_grid for i in range(model.dimension + 1)}
    totals_x, totals_z = [], []
    for arm, results, counts, totals in (("aniso", res_x, counts_x, totals_x),
                                         ("iso", res_z, counts_z, totals_z)):
        for r, cat, reason in results:
            if reason is not None:
                report.rejected.append((r, f"{arm}:{reason}"))
                continue
            totals.append(len(cat))
            for u in u_grid:
                for i in range(model.dimension + 1):
                    c = count_mu(cat, u, i)
                    counts[(u, i)].append(c)
                    report.counts_rows.append(
                        {"replicate": r, "arm": arm, "u": float(u), "index": i, "count": c})

    reject_frac = len(report.rejected) / max(2 * reps, 1)
    report.checks.append(predicate_check(
        "reject-fraction<=0.1", reject_frac <= 0.10, value=reject_frac))

    ratio, se_ratio = _ratio_mean_se(totals_x, totals_z)
    report.checks.append(tolerance_check(
        "total-count-ratio", ratio, det, 3.0 * se_ratio,
        detail=f"mean X total / mean Z total vs |det A| = {det:g}"))

    for u in u_grid:
        for i in range(model.dimension + 1):
            mx, sx = mean_se(counts_x[(u, i)])
            mz, sz = mean_se(counts_z[(u, i)])
            tol = 3.0 * math.hypot(sx, det * sz)
            report.checks.append(tolerance_check(
                f"scaled-count:u={u:g}:i={i}", mx, det * mz, tol,
                detail="mean X count vs |det A| * mean Z count"))

    agg = {"det": det, "ratio": ratio, "ratio_se": se_ratio}
    if oracle_check:
        moments = spectral_moments(model)
        vol = domain.interior_volume()
        stream = 0
        for u in u_grid:
            for i in range(model.dimension + 1):
                dens = expected_count_density(moments, u, i, oracle_n, substream(seed, 2, stream))
                stream += 1
                mx, sx = mean_se(counts_x[(u, i)])
                mz, sz = mean_se(counts_z[(u, i)])
                pred_x = det * vol * dens.value
                pred_z = vol * dens.value
                report.checks.append(tolerance_check(
                    f"oracle-aniso:u={u:g}:i={i}", mx, pred_x,
                    3.0 * math.hypot(sx, det * vol * dens.std_error)))
                report.checks.append(tolerance_check(
                    f"oracle-iso:u={u:g}:i={i}", mz, pred_z,
                    3.0 * math.hypot(sz, vol * dens.std_error)))
    report.aggregates = agg
    return report


# -- height-dist --------------------------------------------------------------


def _aniso_arm_setup(model, waves, diffeo, domain):
    """Domain and base-sampling period for the X = Z(A t) arm."""
    matrix = diffeo.matrix
    if isinstance(domain, Torus):
        diag = np.diag(matrix)
        if not np.allclose(matrix, np.diag(diag)):
            raise ConfigError("torus domains in height-dist require a diagonal matrix")
        x_period = domain.period / np.abs(diag)
        return Torus(x_period), domain.period.copy()
    return domain, None


def run_height_dist(config, threads=1):
    """Height-distribution equality between anisotropic and isotropic arms.

    Pools critical heights per Morse index from (a) X = Z(A t) replicates
    and (b) isotropic Z replicates; passes when each index class passes a
    two-sample KS test at p > 0.01.  Optional extras: a split-domain
    location-independence KS on the iso arm, and pointwise comparison of
    survival fractions against the matrix oracle ([oracle] check = true).
    """
    model, waves = _model_from(config)
    diffeo = _map_from(config, model.dimension, required=True)
    if diffeo.kind != "linear":
        raise ConfigError("height-dist needs a linear [map]")
    domain = _domain_from(config, model.dimension)
    reps = config.get_int("experiment", "replicates", 1)
    seed = config.get_int("experiment", "seed", 0)
    search = _search_config_from(config)
    u_grid = [u for u in _u_grid_from(config, (-1.0, 0.0, 1.0)) if np.isfinite(u)]
    min_class = config.get_int("height", "min_class_points", 100)
    split_check = config.get_bool("height", "split_check", True)
    oracle_check = config.get_bool("oracle", "check", False)
    oracle_n = config.get_int("oracle", "samples", 200_000)
    report = _base_report(config, "height-dist", config.get_str("experiment", "mode", "independent"))

    x_domain, base_period = _aniso_arm_setup(model, waves, diffeo, domain)
    torus_expected = 0 if isinstance(domain, Torus) else None
    ndim = model.dimension

    def one_x(r):
        rng = substream(seed, 0, r)
        z = sample_field(model, waves, rng, torus_period=base_period)
        x = transform_field(z, diffeo)
        cat = find_critical_points(x, x_domain, search)
        return r, cat, _reject_or_none(cat, torus_expected)

    def one_z(r):
        rng = substream(seed, 1, r)
        period = domain.period if isinstance(domain, Torus) else None
        z = sample_field(model, waves, rng, torus_period=period)
        cat = find_critical_points(z, domain, search)
        return r, cat, _reject_or_none(cat, torus_expected)

    res_x = _run_replicates(one_x, reps, threads)
    res_z = _run_replicates(one_z, reps, threads)

    pooled = {"aniso": {i: [] for i in range(ndim + 1)}, "iso": {i: [] for i in range(ndim + 1)}}
    # per-replicate (count above u, class count) pairs for survival curves
    survival = {arm: {(i, u): ([], []) for i in range(ndim + 1) for u in u_grid}
                for arm in ("aniso", "iso")}
    halves = {i: ([], []) for i in range(ndim + 1)}  # iso arm, low/high half heights

    for arm, results in (("aniso", res_x), ("iso", res_z)):
        for r, cat, reason in results:
            if reason is not None:
                report.rejected.append((r, f"{arm}:{reason}"))
                continue
            heights = cat.heights()
            indices = cat.indices()
            for i in range(ndim + 1):
                cls = heights[indices == i]
                pooled[arm][i].extend(cls.tolist())
                for u in u_grid:
                    num, den = survival[arm][(i, u)]
                    num.append(int(np.sum(cls > u)))
                    den.append(len(cls))
            for h, i in zip(heights, indices):
                report.heights_rows.append(
                    {"replicate": r, "arm": arm, "index": int(i), "height": float(h)})
            if arm == "iso" and split_check:
                locs = cat.locations()
                if isinstance(domain, Torus):
                    mid = 0.5 * domain.period[0]
                else:
                    mid = 0.5 * (domain.lower[0] + domain.upper[0])
                low = locs[:, 0] < mid
                for i in range(ndim + 1):
                    lo, hi = halves[i]
                    lo.extend(heights[low & (indices == i)].tolist())
                    hi.extend(heights[~low & (indices == i)].tolist())

    reject_frac = len(report.rejected) / max(2 * reps, 1)
    report.checks.append(predicate_check(
        "reject-fraction<=0.1", reject_frac <= 0.10, value=reject_frac))

    excluded = []
    for i in range(ndim + 1):
        a, b = pooled["aniso"][i], pooled["iso"][i]
        if len(a) < min_class or len(b) < min_class:
            excluded.append({"index": i, "aniso": len(a), "iso": len(b)})
            continue
        stat, pval = ks_2samp(a, b)
        report.checks.append(predicate_check(
            f"ks-aniso-vs-iso:i={i}", pval > 0.01, value=pval,
            detail=f"n={len(a)}/{len(b)}, KS stat {stat:.4f}"))

    if split_check:
        for i in range(ndim + 1):
            lo, hi = halves[i]
            if len(lo) < min_class or len(hi) < min_class:
                continue
            stat, pval = ks_2samp(lo, hi)
            report.checks.append(predicate_check(
                f"ks-split-domain:i={i}", pval > 0.01, value=pval,
                detail=f"n={len(lo)}/{len(hi)}, KS stat {stat:.4f}"))

    agg = {"excluded_classes": excluded}
    for arm in ("aniso", "iso"):
        for i in range(ndim + 1):
            for u in u_grid:
                num, den = survival[arm][(i, u)]
                frac, se = _ratio_mean_se(num, den)
                agg[f"survival:{arm}:i={i}:u={u:g}"] = {"fraction": frac, "se": se}

    if oracle_check:
        moments = spectral_moments(model)
        for i in range(ndim + 1):
            est = estimate_height_dist(moments, i, u_grid, oracle_n, substream(seed, 3, i))
            for arm in ("aniso", "iso"):
                if len(pooled[arm][i]) < min_class:
                    continue
                for j, u in enumerate(u_grid):
                    num, den = survival[arm][(i, u)]
                    frac, se = _ratio_mean_se(num, den)
                    tol = 3.0 * math.hypot(se, est.std_error[j])
                    report.checks.append(tolerance_check(
                        f"oracle-survival:{arm}:i={i}:u={u:g}", frac, est.estimate[j], tol))
    report.aggregates = agg
    return report


# -- oracle-compare -----------------------------------------------------------


def run_oracle_compare(config, threads=1):
    """Field-based count densities vs the Kac-Rice matrix oracle."""
    model, waves = _model_from(config)
    domain = _domain_from(config, model.dimension)
    reps = config.get_int("experiment", "replicates", 1)
    seed = config.get_int("experiment", "seed", 0)
    search = _search_config_from(config)
    u_grid = _u_grid_from(config, (0.0, 1.0))
    oracle_n = config.get_int("oracle", "samples", 1_000_000)
    report = _base_report(config, "oracle-compare", "independent")
    torus_expected = 0 if isinstance(domain, Torus) else None
    ndim = model.dimension
    vol = domain.interior_volume()

    def one(r):
        rng = substream(seed, 0, r)
        period = domain.period if isinstance(domain, Torus) else None
        z = sample_field(model, waves, rng, torus_period=period)
        cat = find_critical_points(z, domain, search)
        return r, cat, _reject_or_none(cat, torus_expected)

    results = _run_replicates(one, reps, threads)

    counts = {(u, i): [] for u in u_grid for i in list(range(ndim + 1)) + [None]}
    for r, cat, reason in results:
        if reason is not None:
            report.rejected.append((r, reason))
            continue
        for u in u_grid:
            total = 0
            for i in range(ndim + 1):
                c = count_mu(cat, u, i)
                counts[(u, i)].append(c)
                total += c
                report.counts_rows.append(
                    {"replicate": r, "arm": "field", "u": float(u), "index": i, "count": c})
            counts[(u, None)].append(total)

    reject_frac = len(report.rejected) / max(reps, 1)
    report.checks.append(predicate_check(
        "reject-fraction<=0.1", reject_frac <= 0.10, value=reject_frac))

    moments = spectral_moments(model)
    agg = {}
    stream = 0
    for u in u_grid:
        for i in list(range(ndim + 1)) + [None]:
            label = "total" if i is None else str(i)
            m, s = mean_se(counts[(u, i)])
            dens_field = m / vol
            se_field = s / vol
            oracle = expected_count_density(moments, u, i, oracle_n, substream(seed, 1, stream))
            stream += 1
            tol = 3.0 * math.hypot(se_field, oracle.std_error)
            report.checks.append(tolerance_check(
                f"density:u={u:g}:i={label}", dens_field, oracle.value, tol,
                detail=f"field {dens_field:.5g} vs oracle {oracle.value:.5g}"))
            agg[f"density:u={u:g}:i={label}"] = {
                "field": dens_field, "field_se": se_field,
                "oracle": oracle.value, "oracle_se": oracle.std_error,
            }

    if ndim == 1 and model.kind == "squared-exponential" and abs(model.length_scale - 1.0) < 1e-12:
        m, s = mean_se(counts[(float("-inf"), None)])
        report.checks.append(tolerance_check(
            "rice-rate-1d", m / vol, RICE_RATE_1D, 3.0 * s / vol,
            detail="total rate vs sqrt(3)/pi"))
    report.aggregates = agg
    return report


# -- manifold -----------------------------------------------------------------


def run_manifold(config, threads=1):
    """Sphere/ellipsoid correspondence: bijection, equal indices and heights,
    and the exact Morse-sum invariant (= 2) on every accepted catalog."""
    model, waves = _model_from(config)
    if model.dimension != 3:
        raise ConfigError("manifold experiments need a 3-d model")
    semi_axes = config.get_floats("manifold", "semi_axes", [2.0, 1.0, 0.5])
    try:
        ellipsoid = Ellipsoid(semi_axes=np.array(semi_axes))
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    reps = config.get_int("experiment", "replicates", 1)
    seed = config.get_int("experiment", "seed", 0)
    scfg = SurfaceSearchConfig(
        seeds_per_face=config.get_int("manifold", "seeds_per_face", 40),
        refine_check=config.get_bool("search", "refine_check", True),
    )
    export_mesh = config.get_bool("manifold", "export_mesh", False)
    report = _base_report(config, "manifold", "shared")

    def one(r):
        rng = substream(seed, 0, r)
        z3 = sample_field(model, waves, rng)
        sph = sphere_field(z3)
        ell = ellipsoid_field(sph, ellipsoid)
        cat_s = find_surface_critical_points(sph, scfg)
        cat_e = find_surface_critical_points(ell, scfg)
        reason = None
        if not cat_s.refinement_stable:
            reason = "sphere:refinement-unstable"
        elif not cat_e.refinement_stable:
            reason = "ellipsoid:refinement-unstable"
        match = verify_surface_correspondence(cat_e, cat_s, ellipsoid.to_sphere)
        return r, cat_s, cat_e, match, reason

    results = _run_replicates(one, reps, threads)

    accepted = 0
    n_match = 0
    morse_ok = 0
    worst = ""
    for r, cat_s, cat_e, match, reason in results:
        if reason is not None:
            report.rejected.append((r, reason))
            continue
        accepted += 1
        if match.passed:
            n_match += 1
        elif not worst:
            worst = f"replicate {r}: {match.summary()}"
        if morse_sum(cat_s) == 2 and morse_sum(cat_e) == 2:
            morse_ok += 1
        report.catalog_rows.setdefault("sphere", []).extend(surface_catalog_rows(r, cat_s))
        report.catalog_rows.setdefault("ellipsoid", []).extend(surface_catalog_rows(r, cat_e))
        for p in cat_s.points:
            report.heights_rows.append(
                {"replicate": r, "arm": "sphere", "index": int(p.index), "height": float(p.height)})
        for p in cat_e.points:
            report.heights_rows.append(
                {"replicate": r, "arm": "ellipsoid", "index": int(p.index), "height": float(p.height)})

    if export_mesh:
        sph = sphere_field(sample_field(model, waves, substream(seed, 0, 0)))
        report.extra_files["sphere_mesh.txt"] = surface_mesh_text(sph)

    report.checks.append(predicate_check(
        "correspondence-pass-rate", n_match == accepted and accepted > 0,
        value=n_match / max(accepted, 1), detail=worst))
    report.checks.append(predicate_check(
        "morse-sum-equals-2", morse_ok == accepted and accepted > 0,
        value=morse_ok / max(accepted, 1)))
    reject_frac = len(report.rejected) / max(reps, 1)
    report.checks.append(predicate_check(
        "reject-fraction<=0.1", reject_frac <= 0.10, value=reject_frac))
    report.aggregates = {"accepted": accepted}
    return report


# -- simulate -----------------------------------------------------------------


def run_simulate(config, threads=1):
    """Sample fields, catalog them, and export catalogs plus realizations."""
    model, waves = _model_from(config)
    domain = _domain_from(config, model.dimension)
    reps = config.get_int("experiment", "replicates", 1)
    seed = config.get_int("experiment", "seed", 0)
    search = _search_config_from(config)
    report = _base_report(config, "simulate", "shared")
    torus_expected = 0 if isinstance(domain, Torus) else None

    def one(r):
        rng = substream(seed, 0, r)
        period = domain.period if isinstance(domain, Torus) else None
        z = sample_field(model, waves, rng, torus_period=period)
        cat = find_critical_points(z, domain, search)
        return r, z, cat, _reject_or_none(cat, torus_expected)

    results = _run_replicates(one, reps, threads)
    for r, z, cat, reason in results:
        if reason is not None:
            report.rejected.append((r, reason))
        report.catalog_rows.setdefault("field", []).extend(catalog_rows(r, cat))
        for u in (float("-inf"),):
            for i in range(model.dimension + 1):
                report.counts_rows.append(
                    {"replicate": r, "arm": "field", "u": float(u), "index": i,
                     "count": count_mu(cat, u, i)})
        report.extra_files[f"realization_{r:04d}.txt"] = realization_to_text(z)

    report.checks.append(predicate_check(
        "reject-fraction<=0.1", len(report.rejected) / max(reps, 1) <= 0.10,
        value=len(report.rejected) / max(reps, 1)))
    report.aggregates = {"replicates": reps}
    return report


RUNNERS = {
    "verify-diffeo": run_verify_diffeo,
    "verify-aniso": run_verify_aniso,
    "height-dist": run_height_dist,
    "oracle-compare": run_oracle_compare,
    "manifold": run_manifold,
    "simulate": run_simulate,
}
