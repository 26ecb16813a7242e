//! Machine-checkable property suites over the module invariants. Each suite
//! returns one report per property with the measured worst-case deviation;
//! the CLI serializes them as JSON lines.

use crate::classify::{classify, symmetry_images, Classification, VERIFY_BUDGET};
use crate::cycles::{detect_cycle, multiplier_chain, multiplier_product_formula, refine_cycle};
use crate::kernel::{eval_f, tract_of, ExtendedValue};
use crate::render::{render_parameter_plane, Region};
use crate::shell::{
    boundary_height, find_bud, h, period_one_boundary_point, quadruplet, s, s_fixed_point,
    trace_internal_ray, trace_unit_h_boundary, Half,
};
use crate::solve::{
    capture_center, fixed_point_solution, forward_residual, newton_param, pole_value, poles,
    prepole_parameters_order1, virtual_center, ComponentCode,
};
use num_complex::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

pub const SUITES: [&str; 9] = [
    "symmetry",
    "axes",
    "multiplier",
    "period1",
    "rays",
    "quadruplets",
    "buds",
    "boundary",
    "solve-residuals",
];

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PropertyReport {
    pub suite: String,
    pub property: String,
    pub samples: usize,
    pub worst_deviation: f64,
    pub pass: bool,
    pub seed: u64,
}

fn report(
    suite: &str,
    property: &str,
    samples: usize,
    worst: f64,
    threshold: f64,
    seed: u64,
) -> PropertyReport {
    PropertyReport {
        suite: suite.to_string(),
        property: property.to_string(),
        samples,
        worst_deviation: worst,
        pass: worst < threshold,
        seed,
    }
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Run one named suite. Unknown names return None.
pub fn run_suite(suite: &str, samples: usize, seed: u64) -> Option<Vec<PropertyReport>> {
    Some(match suite {
        "symmetry" => symmetry_suite(samples, seed),
        "axes" => axes_suite(samples, seed),
        "multiplier" => multiplier_suite(samples, seed),
        "period1" => period1_suite(samples, seed),
        "rays" => rays_suite(samples, seed),
        "quadruplets" => quadruplets_suite(samples, seed),
        "buds" => buds_suite(samples, seed),
        "boundary" => boundary_suite(samples, seed),
        "solve-residuals" => solve_residuals_suite(samples, seed),
        _ => return None,
    })
}

pub fn run_all(samples: usize, seed: u64) -> Vec<PropertyReport> {
    SUITES
        .iter()
        .flat_map(|s| run_suite(s, samples, seed).unwrap())
        .collect()
}

// ---------------------------------------------------------------------------

/// Verdicts, depths, periods and multiplier moduli are constant on each
/// symmetry orbit; chain-rule and sine-product multipliers agree.
pub fn symmetry_suite(samples: usize, seed: u64) -> Vec<PropertyReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut verdict_mismatches = 0usize;
    let mut modulus_spread: f64 = 0.0;
    let mut cross_formula: f64 = 0.0;
    let mut cycles_seen = 0usize;
    for _ in 0..samples {
        let lam = c(rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0));
        if lam.norm() < 1e-2 {
            continue;
        }
        let orbit = symmetry_images(lam);
        let base = classify(lam, VERIFY_BUDGET);
        for member in &orbit.members {
            let v = classify(*member, VERIFY_BUDGET);
            match (&base, &v) {
                (
                    Classification::Shell {
                        period: p0,
                        multiplier: m0,
                    },
                    Classification::Shell {
                        period: p1,
                        multiplier: m1,
                    },
                ) => {
                    if p0 != p1 {
                        verdict_mismatches += 1;
                    }
                    modulus_spread = modulus_spread.max((m0.norm() - m1.norm()).abs());
                }
                (a, b) if a == b => {}
                _ => verdict_mismatches += 1,
            }
        }
        if base.is_shell() {
            if let Ok(Some(cycle)) = detect_cycle(lam, VERIFY_BUDGET) {
                cycles_seen += 1;
                if let (Ok(chain), Ok(product)) = (
                    multiplier_chain(lam, &cycle),
                    multiplier_product_formula(&cycle),
                ) {
                    cross_formula = cross_formula
                        .max((chain - product).norm() / (1.0 + chain.norm()));
                }
            }
        }
    }
    vec![
        report(
            "symmetry",
            "orbit-verdicts-identical",
            samples,
            verdict_mismatches as f64,
            0.5,
            seed,
        ),
        report(
            "symmetry",
            "multiplier-modulus-spread",
            samples,
            modulus_spread,
            1e-9,
            seed,
        ),
        report(
            "symmetry",
            "cross-formula-relative",
            cycles_seen,
            cross_formula,
            1e-8,
            seed,
        ),
    ]
}

/// No shell verdicts on the axes; small axis parameters capture at depth 0
/// with orbits bounded by |λ|.
pub fn axes_suite(samples: usize, seed: u64) -> Vec<PropertyReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut shells = 0usize;
    for _ in 0..samples {
        let m: f64 = rng.gen_range(-10.0f64..10.0);
        if m.abs() < 1e-3 {
            continue;
        }
        let lam = if rng.gen_bool(0.5) { c(m, 0.0) } else { c(0.0, m) };
        if classify(lam, VERIFY_BUDGET).is_shell() {
            shells += 1;
        }
    }

    let capture_samples = 200.min(samples.max(1));
    let mut bad_depth = 0usize;
    let mut bound_excess: f64 = 0.0;
    for _ in 0..capture_samples {
        let m: f64 = rng.gen_range(1e-3..0.886227);
        let sign: f64 = if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
        let lam = if rng.gen_bool(0.5) {
            c(sign * m, 0.0)
        } else {
            c(0.0, sign * m)
        };
        match classify(lam, VERIFY_BUDGET) {
            Classification::CaptureDepth(0) => {}
            _ => bad_depth += 1,
        }
        // the orbit of λi never leaves the disk of radius |λ|
        let mut z = lam * Complex64::i();
        for _ in 0..200 {
            match eval_f(lam, z) {
                ExtendedValue::Finite(next) => z = next,
                ExtendedValue::Infinity => {
                    bound_excess = f64::INFINITY;
                    break;
                }
            }
            bound_excess = bound_excess.max(z.norm() / lam.norm() - 1.0);
        }
    }
    vec![
        report("axes", "no-shell-on-axes", samples, shells as f64, 0.5, seed),
        report(
            "axes",
            "capture-depth-zero-below-threshold",
            capture_samples,
            bad_depth as f64,
            0.5,
            seed,
        ),
        report(
            "axes",
            "orbit-bounded-by-lambda",
            capture_samples,
            bound_excess.max(0.0),
            1e-12,
            seed,
        ),
    ]
}

/// Chain-rule vs sine-product multiplier on a spread of detected cycles.
pub fn multiplier_suite(samples: usize, seed: u64) -> Vec<PropertyReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    let mut found = 0usize;
    let mut tries = 0usize;
    while found < samples && tries < samples * 40 {
        tries += 1;
        // mix window samples with period-one parametrization samples
        let lam = if tries.is_multiple_of(2) {
            c(rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0))
        } else {
            let u = c(rng.gen_range(-3.0..3.0), -rng.gen_range(2.3..8.0));
            match s(u, 1) {
                Ok(v) => v,
                Err(_) => continue,
            }
        };
        if lam.norm() < 1e-2 {
            continue;
        }
        if let Ok(Some(cycle)) = detect_cycle(lam, VERIFY_BUDGET) {
            if cycle.contains_zero() {
                continue;
            }
            found += 1;
            if let (Ok(chain), Ok(product)) = (
                multiplier_chain(lam, &cycle),
                multiplier_product_formula(&cycle),
            ) {
                worst = worst.max((chain - product).norm() / (1.0 + chain.norm()));
            }
        }
    }
    vec![report(
        "multiplier",
        "cross-formula-relative",
        found,
        worst,
        1e-8,
        seed,
    )]
}

/// λ = S(u) classifies Shell(1, ρ) with ρ = H(u) for admissible u.
pub fn period1_suite(samples: usize, seed: u64) -> Vec<PropertyReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    let mut failures = 0usize;
    let mut used = 0usize;
    while used < samples {
        let x = rng.gen_range(-3.0..3.0);
        let y = rng.gen_range(2.2..9.0);
        let sign = if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
        let u = c(x, sign * y);
        let hv = match h(u) {
            Ok(v) => v,
            Err(_) => continue,
        };
        if hv.norm() >= 0.98 {
            continue;
        }
        used += 1;
        let lam = s(u, 1).unwrap();
        match classify(lam, VERIFY_BUDGET) {
            Classification::Shell { period: 1, multiplier } => {
                worst = worst.max((multiplier - hv).norm());
            }
            _ => failures += 1,
        }
    }
    vec![
        report("period1", "classifies-shell-period-one", samples, failures as f64, 0.5, seed),
        report("period1", "multiplier-matches-h", samples, worst, 1e-8, seed),
    ]
}

/// Internal-ray invariants on a period-two bud, traced toward the virtual
/// center: corrector exactness, strict decrease of r, the cycle point near
/// the asymptotic value, and the endpoint distance to the pre-pole set.
pub fn rays_suite(_samples: usize, seed: u64) -> Vec<PropertyReport> {
    let mut out = Vec::new();
    let seed_bud = period_one_boundary_point(0.5)
        .ok()
        .and_then(|b| find_bud(b.lambda, 2, 1, 1, 0.2));
    let Some(bud) = seed_bud else {
        out.push(report("rays", "period2-bud-seed-found", 1, 1.0, 0.5, seed));
        return out;
    };
    out.push(report("rays", "period2-bud-seed-found", 1, 0.0, 0.5, seed));
    let alpha = match classify(bud, VERIFY_BUDGET) {
        Classification::Shell { multiplier, .. } => multiplier.arg() / (2.0 * PI),
        _ => 0.0,
    };
    let alpha = alpha.rem_euclid(1.0);
    match trace_internal_ray(bud, alpha, 1e-6, 4000) {
        Ok(ray) => {
            let mut mult_dev: f64 = 0.0;
            let mut monotone = true;
            let mut prev = f64::INFINITY;
            for pt in &ray {
                let m = Complex64::from_polar(pt.r, 2.0 * PI * pt.alpha);
                mult_dev = mult_dev.max((pt.cycle.multiplier - m).norm());
                if pt.r >= prev {
                    monotone = false;
                }
                prev = pt.r;
            }
            out.push(report("rays", "multiplier-exactness", ray.len(), mult_dev, 1e-9, seed));
            out.push(report(
                "rays",
                "r-strictly-decreasing",
                ray.len(),
                if monotone { 0.0 } else { 1.0 },
                0.5,
                seed,
            ));
            let last = ray.last().unwrap();
            // cycle roles: the small point tends to λi, the big one to ∞
            let (big, small) = {
                let a = last.cycle.points[0];
                let b = last.cycle.points[1 % last.cycle.points.len()];
                if a.norm() > b.norm() {
                    (a, b)
                } else {
                    (b, a)
                }
            };
            // the preferred asymptotic value (±λi share one forward orbit)
            let av = last.lambda * Complex64::i();
            out.push(report(
                "rays",
                "small-cycle-point-near-asymptotic-value",
                ray.len(),
                (small - av).norm().min((small + av).norm()),
                1e-3,
                seed,
            ));
            let pole_dist = poles(24)
                .iter()
                .map(|p| (*p - small).norm())
                .fold(f64::INFINITY, f64::min);
            out.push(report(
                "rays",
                "small-point-approaches-pole-lattice",
                ray.len(),
                pole_dist,
                0.5,
                seed,
            ));
            out.push(report("rays", "big-point-grows", ray.len(), 1.0 / big.norm(), 0.5, seed));
            let vc_dist = prepole_parameters_order1(24)
                .iter()
                .map(|p| (last.lambda - p).norm())
                .fold(f64::INFINITY, f64::min);
            out.push(report(
                "rays",
                "endpoint-near-virtual-center",
                ray.len(),
                vc_dist,
                1e-3,
                seed,
            ));
        }
        Err(e) => {
            let _ = e;
            out.push(report("rays", "ray-traced-to-r-stop", 1, 1.0, 0.5, seed));
        }
    }
    out
}

/// Period-two quadruplets around the first real and imaginary pre-pole
/// parameters, plus their rotation consistency.
pub fn quadruplets_suite(_samples: usize, seed: u64) -> Vec<PropertyReport> {
    let mut out = Vec::new();
    let centers = [c(0.0, pole_value(0)), c(pole_value(0), 0.0)];
    let mut missing = 0usize;
    for star in centers {
        let reps = quadruplet(star, 2, 0.02);
        missing += 4 - reps.len();
    }
    out.push(report(
        "quadruplets",
        "four-tracts-at-radius-0.02",
        2,
        missing as f64,
        0.5,
        seed,
    ));
    // rotation: λ ↦ iλ sends tract q to q−1 (mod 4) around the rotated center
    let reps = quadruplet(c(0.0, pole_value(0)), 2, 0.02);
    let mut rot_mismatch = 0usize;
    for (tract, lam) in &reps {
        let rotated = Complex64::i() * lam;
        if !classify(rotated, VERIFY_BUDGET).is_shell() {
            rot_mismatch += 1;
            continue;
        }
        let mut z = rotated * Complex64::i();
        if let ExtendedValue::Finite(next) = eval_f(rotated, z) {
            z = next;
        }
        match tract_of(z, crate::shell::TRACT_THRESHOLD) {
            Some(t) => {
                let expected = ((tract.quadrant as i32 - 2).rem_euclid(4) + 1) as u8;
                if t.quadrant != expected {
                    rot_mismatch += 1;
                }
            }
            None => rot_mismatch += 1,
        }
    }
    out.push(report(
        "quadruplets",
        "rotation-consistency",
        reps.len(),
        rot_mismatch as f64,
        0.5,
        seed,
    ));
    out
}

/// Bud components at rational internal arguments of the period-one boundary.
pub fn buds_suite(_samples: usize, seed: u64) -> Vec<PropertyReport> {
    let mut out = Vec::new();
    let half = period_one_boundary_point(0.5)
        .ok()
        .and_then(|b| find_bud(b.lambda, 2, 1, 1, 0.2));
    out.push(report(
        "buds",
        "doubling-bud-at-argument-1/2",
        1,
        if half.is_some() { 0.0 } else { 1.0 },
        0.5,
        seed,
    ));
    let third = period_one_boundary_point(1.0 / 3.0)
        .ok()
        .and_then(|b| find_bud(b.lambda, 3, 1, 1, 0.2));
    out.push(report(
        "buds",
        "tripling-bud-at-argument-1/3",
        1,
        if third.is_some() { 0.0 } else { 1.0 },
        0.5,
        seed,
    ));
    // no bud opens at the virtual-center cusp direction
    let cusp_dir = s(c(0.0, -boundary_height(0.0, Half::Upper).unwrap_or(2.1773)), 1)
        .map(|lam| find_bud(lam, 2, 1, 1, 0.02))
        .unwrap_or(None);
    out.push(report(
        "buds",
        "no-bud-at-cusp",
        1,
        if cusp_dir.is_none() { 0.0 } else { 1.0 },
        0.5,
        seed,
    ));
    out
}

/// Boundary-curve properties: the stated exponential asymptote, the
/// diagonal approach of the mapped boundary, neutrality of the multiplier
/// on the curve, and the (report-only) period-two bounding box.
pub fn boundary_suite(_samples: usize, seed: u64) -> Vec<PropertyReport> {
    let mut out = Vec::new();

    let mut asym_dev: f64 = 0.0;
    match trace_unit_h_boundary(3.0, 6.0, 31, Half::Upper) {
        Ok(samples) => {
            for s in &samples {
                asym_dev = asym_dev.max((s.u.im / (2.0 * s.u.re).exp() - 1.0).abs());
            }
            out.push(report("boundary", "asymptote-y-over-e2x", samples.len(), asym_dev, 0.05, seed));
        }
        Err(_) => out.push(report("boundary", "asymptote-y-over-e2x", 0, f64::INFINITY, 0.05, seed)),
    }

    match trace_unit_h_boundary(-4.0, 4.0, 81, Half::Lower) {
        Ok(samples) => {
            let diagonals = [PI / 4.0, 3.0 * PI / 4.0, -PI / 4.0, -3.0 * PI / 4.0];
            let closest = samples
                .iter()
                .map(|s| {
                    diagonals
                        .iter()
                        .map(|d| (s.lambda.arg() - d).abs())
                        .fold(f64::INFINITY, f64::min)
                })
                .fold(f64::INFINITY, f64::min);
            out.push(report("boundary", "mapped-boundary-touches-diagonal", samples.len(), closest, 1e-6, seed));

            let mut neutral_dev: f64 = 0.0;
            for sample in samples.iter().step_by(8) {
                let z = s_fixed_point(sample.u, 1);
                if let Ok(cycle) = refine_cycle(sample.lambda, &[z], 1) {
                    neutral_dev = neutral_dev.max((cycle.multiplier.norm() - 1.0).abs());
                } else {
                    neutral_dev = f64::INFINITY;
                }
            }
            out.push(report("boundary", "boundary-multiplier-neutral", 11, neutral_dev, 1e-4, seed));
        }
        Err(_) => {
            out.push(report("boundary", "mapped-boundary-touches-diagonal", 0, f64::INFINITY, 1e-6, seed));
            out.push(report("boundary", "boundary-multiplier-neutral", 0, f64::INFINITY, 1e-4, seed));
        }
    }

    // report-only: bounding radius of period-two parameters seen in a coarse scan
    let raster = render_parameter_plane(
        Region::new(c(0.0, 0.0), 7.0, 7.0),
        96,
        96,
        2000,
    );
    let mut max_norm: f64 = 0.0;
    let mut count = 0usize;
    for i in 0..96 {
        for j in 0..96 {
            if let Classification::Shell { period: 2, .. } = raster.get(i, j) {
                max_norm = max_norm.max(raster.lambda_at(i, j).norm());
                count += 1;
            }
        }
    }
    let mut bbox = report("boundary", "period2-bounding-radius(report-only)", count, max_norm, f64::INFINITY, seed);
    bbox.pass = true;
    out.push(bbox);
    out
}

/// Residual checks for the structural solvers and the coded accumulation
/// sequences.
pub fn solve_residuals_suite(_samples: usize, seed: u64) -> Vec<PropertyReport> {
    let mut out = Vec::new();

    let mut center_dev: f64 = 0.0;
    for k in 1..=5 {
        match capture_center(&ComponentCode::pre_zero(k, &[])) {
            Ok(r) => {
                center_dev = center_dev.max((r.root - c((k as f64 * PI).sqrt(), 0.0)).norm())
            }
            Err(_) => center_dev = f64::INFINITY,
        }
    }
    out.push(report("solve-residuals", "order1-centers", 5, center_dev, 1e-10, seed));

    let mut pole_dev: f64 = 0.0;
    for j in 0..=5 {
        let target = pole_value(j);
        let seed_lam = c(0.0, target * 1.02);
        match newton_param(1, ExtendedValue::Infinity, seed_lam, 1e-12) {
            Ok(r) => pole_dev = pole_dev.max((r.root - c(0.0, target)).norm()),
            Err(_) => pole_dev = f64::INFINITY,
        }
    }
    out.push(report("solve-residuals", "poles-via-reciprocal-newton", 6, pole_dev, 1e-10, seed));

    let mut fp_res: f64 = 0.0;
    for j in [2i32, 4, 7] {
        let pk = PI.sqrt();
        match fixed_point_solution(c(1.0, 0.5), pk, j, 300) {
            Ok(lam) => fp_res = fp_res.max(forward_residual(lam, 1, c(pk, 0.0))),
            Err(_) => fp_res = f64::INFINITY,
        }
    }
    out.push(report("solve-residuals", "fixed-point-iteration-residual", 3, fp_res, 1e-6, seed));

    // order-2 pre-zero accumulation toward the pole skeleton
    let mut prev = f64::INFINITY;
    let mut monotone_ok = true;
    for j in [3i32, 5, 7, 9, 11] {
        let code = ComponentCode::pre_zero(1, &[j]);
        match capture_center(&code) {
            Ok(r) => {
                let d = (r.root - c(pole_value(j as usize), 0.0)).norm();
                if d >= prev {
                    monotone_ok = false;
                }
                prev = d;
            }
            Err(_) => monotone_ok = false,
        }
    }
    out.push(report(
        "solve-residuals",
        "prezero-accumulation-monotone",
        5,
        if monotone_ok { 0.0 } else { 1.0 },
        0.5,
        seed,
    ));

    // order-2 virtual centers: monotone approach and distance at k = 10
    let mut roots = Vec::new();
    let mut solved = true;
    for k in 1..=10 {
        match virtual_center(&ComponentCode::pre_pole(k, &[2]), 3) {
            Ok(r) => roots.push(r.root),
            Err(_) => solved = false,
        }
    }
    if solved {
        let anchors = prepole_parameters_order1(12);
        let limit = anchors
            .iter()
            .copied()
            .min_by(|a, b| {
                (roots[9] - a)
                    .norm()
                    .partial_cmp(&(roots[9] - b).norm())
                    .unwrap()
            })
            .unwrap();
        let mut prev = f64::INFINITY;
        let mut monotone = true;
        for r in &roots {
            let d = (r - limit).norm();
            if d >= prev {
                monotone = false;
            }
            prev = d;
        }
        out.push(report(
            "solve-residuals",
            "virtual-center-accumulation-monotone",
            10,
            if monotone { 0.0 } else { 1.0 },
            0.5,
            seed,
        ));
        out.push(report(
            "solve-residuals",
            "virtual-center-distance-at-k10",
            10,
            prev,
            1e-2,
            seed,
        ));
    } else {
        out.push(report("solve-residuals", "virtual-center-accumulation-monotone", 10, 1.0, 0.5, seed));
        out.push(report("solve-residuals", "virtual-center-distance-at-k10", 10, f64::INFINITY, 1e-2, seed));
    }

    // every solver root verifies its defining equation by forward evaluation
    let mut fwd: f64 = 0.0;
    if let Ok(r) = capture_center(&ComponentCode::pre_zero(2, &[])) {
        fwd = fwd.max(forward_residual(r.root, 1, c(0.0, 0.0)));
    }
    if let Ok(r) = virtual_center(&ComponentCode::pre_pole(1, &[2]), 3) {
        fwd = fwd.max(forward_residual(r.root, 1, c(pole_value(0), 0.0)));
    }
    out.push(report("solve-residuals", "roots-verify-forward", 2, fwd, 1e-9, seed));

    // repelling fixed point with multiplier π on the real axis
    let l = (PI / 4.0).sqrt();
    let dev = match refine_cycle(c(l, 0.0), &[c(l, 0.0)], 1) {
        Ok(cycle) => (cycle.multiplier - c(PI, 0.0)).norm(),
        Err(_) => f64::INFINITY,
    };
    out.push(report("solve-residuals", "repelling-fixed-point-multiplier-pi", 1, dev, 1e-10, seed));

    out
}
