//! Geometry of the shell components: the period-one parametrization
//! λ = S(u) with multiplier H(u) = 2u/sin u at u = 2z², the unit-multiplier
//! boundary curve, internal rays by predictor–corrector continuation, bud
//! search at rational internal arguments and quadruplet probing around
//! virtual centers.

use crate::classify::{classify, Classification, DEFAULT_BUDGET};
use crate::cycles::{self, Cycle};
use crate::kernel::{self, div_by_sin, eval_df, eval_f, ExtendedValue, Tract};
use num_complex::Complex64;
use std::f64::consts::PI;
use thiserror::Error;

/// |Im z²| threshold for tract bucketing around virtual centers.
pub const TRACT_THRESHOLD: f64 = 5.0;
/// Geometric ratio for ray continuation steps in r.
const RAY_STEP_RATIO: f64 = 0.8;

#[derive(Debug, Error, PartialEq)]
pub enum ShellError {
    #[error("sin u vanishes away from the removable point u = 0")]
    SineVanishes,
    #[error("tan(u/2) vanishes; S(u) undefined")]
    TangentVanishes,
    #[error("no sign change of |H|−1 in the search window at x = {x}")]
    BracketFailed { x: f64 },
    #[error("continuation stalled at r = {r}")]
    ContinuationStalled { r: f64 },
    #[error("the continued cycle changed period")]
    LostCycle,
    #[error("the seed parameter does not classify as a shell parameter")]
    SeedNotShell,
    #[error("internal argument must lie in (0, 1)")]
    BadArgument,
}

/// Point on an internal ray: multiplier of `cycle` equals r·e^{2πiα}.
#[derive(Debug, Clone)]
pub struct RayPoint {
    pub lambda: Complex64,
    pub cycle: Cycle,
    pub r: f64,
    pub alpha: f64,
}

/// Sample of the period-one boundary: u on |H(u)| = 1 and λ = S(u).
#[derive(Debug, Clone, Copy)]
pub struct BoundarySample {
    /// Diagonal-ray parameter |λ|²; λ = √(it) holds on the diagonal anchor.
    pub t: f64,
    pub u: Complex64,
    pub lambda: Complex64,
}

/// Which half of the u-plane to trace.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Half {
    Upper,
    Lower,
}

/// H(u) = 2u / sin u, the period-one multiplier at the fixed point with
/// u = 2z². The removable value at u = 0 is 2.
pub fn h(u: Complex64) -> Result<Complex64, ShellError> {
    if u.norm() < 1e-4 {
        // 2u/sin u = 2·(1 + u²/6 + 7u⁴/360 + …)
        let u2 = u * u;
        return Ok(2.0 * (Complex64::new(1.0, 0.0) + u2 / 6.0));
    }
    div_by_sin(2.0 * u, u).ok_or(ShellError::SineVanishes)
}

/// S(u) = ±√u / (√2·tan(u/2)): the parameter whose fixed point is ±√(u/2).
pub fn s(u: Complex64, branch: i8) -> Result<Complex64, ShellError> {
    if u.norm_sqr() == 0.0 {
        return Err(ShellError::TangentVanishes);
    }
    let t = kernel::ctan(u / 2.0);
    if t.norm_sqr() == 0.0 {
        return Err(ShellError::TangentVanishes);
    }
    let root = u.sqrt() / (std::f64::consts::SQRT_2 * t);
    Ok(if branch < 0 { -root } else { root })
}

/// The fixed point paired with S(u, branch).
pub fn s_fixed_point(u: Complex64, branch: i8) -> Complex64 {
    let z = (u / 2.0).sqrt();
    if branch < 0 {
        -z
    } else {
        z
    }
}

fn h_mod_excess(x: f64, y: f64) -> f64 {
    match h(Complex64::new(x, y)) {
        Ok(v) => v.norm() - 1.0,
        Err(_) => f64::INFINITY,
    }
}

/// Solve |H(x+iy)| = 1 for y in the requested half-plane by bisection.
pub fn boundary_height(x: f64, half: Half) -> Result<f64, ShellError> {
    // |H| > 1 near the real axis, < 1 far out in either half-plane
    let (mut lo, mut hi) = (1e-9, 60.0);
    if h_mod_excess(x, lo) <= 0.0 || h_mod_excess(x, hi) >= 0.0 {
        return Err(ShellError::BracketFailed { x });
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if h_mod_excess(x, mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let y = 0.5 * (lo + hi);
    Ok(match half {
        Half::Upper => y,
        Half::Lower => -y,
    })
}

/// Trace the |H(u)| = 1 branch over [x_min, x_max] and map it through S.
pub fn trace_unit_h_boundary(
    x_min: f64,
    x_max: f64,
    steps: usize,
    half: Half,
) -> Result<Vec<BoundarySample>, ShellError> {
    assert!(steps >= 2, "need at least two samples");
    let mut out = Vec::with_capacity(steps);
    for k in 0..steps {
        let x = x_min + (x_max - x_min) * k as f64 / (steps - 1) as f64;
        let y = boundary_height(x, half)?;
        let u = Complex64::new(x, y);
        let lambda = s(u, 1)?;
        if let Some(last) = out.last() {
            let last: &BoundarySample = last;
            if (last.u - u).norm() < 1e-14 {
                continue;
            }
        }
        out.push(BoundarySample {
            t: lambda.norm_sqr(),
            u,
            lambda,
        });
    }
    Ok(out)
}

/// The principal boundary point of Ω₁ at internal argument α ∈ (0, 1).
///
/// Along the lower |H| = 1 branch the phase of H runs monotonically from +π
/// to −π over one strip; bisection in x inverts it. Returns the boundary
/// sample mapped into the first-quadrant component.
pub fn period_one_boundary_point(alpha: f64) -> Result<BoundarySample, ShellError> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(ShellError::BadArgument);
    }
    let phase_at = |x: f64| -> Result<f64, ShellError> {
        let y = boundary_height(x, Half::Lower)?;
        Ok(h(Complex64::new(x, y))?.arg())
    };
    // the strip boundary: phase wraps through ±π near |x| ≈ 4.074
    let mut lo = 4.0;
    let mut hi = 4.15;
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if phase_at(mid)? < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let x_half = 0.5 * (lo + hi);
    let theta = {
        let t = 2.0 * PI * alpha;
        if t > PI {
            t - 2.0 * PI
        } else {
            t
        }
    };
    let x_target = if (theta - PI).abs() < 1e-12 || (theta + PI).abs() < 1e-12 {
        x_half
    } else {
        // phase decreases from +π at −x_half to −π at +x_half
        let (mut lo, mut hi) = (-x_half * (1.0 - 1e-9), x_half * (1.0 - 1e-9));
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if phase_at(mid)? > theta {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    };
    let y = boundary_height(x_target, Half::Lower)?;
    let u = Complex64::new(x_target, y);
    let lambda = s(u, 1)?;
    Ok(BoundarySample {
        t: lambda.norm_sqr(),
        u,
        lambda,
    })
}

/// f^p(z) and the chain-rule multiplier along those p steps.
fn cycle_step(
    lambda: Complex64,
    z: Complex64,
    p: usize,
) -> Option<(Complex64, Complex64)> {
    let mut w = z;
    let mut d = Complex64::new(1.0, 0.0);
    for _ in 0..p {
        d *= eval_df(lambda, w).ok()?;
        match eval_f(lambda, w) {
            ExtendedValue::Finite(next) => w = next,
            ExtendedValue::Infinity => return None,
        }
    }
    Some((w, d))
}

/// Newton corrector for the coupled system
/// { f_λ^p(z) − z = 0, multiplier(λ, z) − m = 0 } in the unknowns (λ, z).
fn correct_ray_point(
    lambda0: Complex64,
    z0: Complex64,
    p: usize,
    m: Complex64,
) -> Option<(Complex64, Complex64)> {
    let mut lam = lambda0;
    let mut z = z0;
    for _ in 0..40 {
        let (fp, mult) = cycle_step(lam, z, p)?;
        let f1 = fp - z;
        let f2 = mult - m;
        if f1.norm() < 1e-11 * (1.0 + z.norm()) && f2.norm() < 1e-11 * (1.0 + m.norm()) {
            return Some((lam, z));
        }
        let hl = 1e-7 * (1.0 + lam.norm());
        let hz = 1e-7 * (1.0 + z.norm());
        let (ap, bp) = cycle_step(lam + hl, z, p)?;
        let (am, bm) = cycle_step(lam - hl, z, p)?;
        let d1_dl = (ap - am) / (2.0 * hl);
        let d2_dl = (bp - bm) / (2.0 * hl);
        let (cp, dp) = cycle_step(lam, z + hz, p)?;
        let (cm, dm) = cycle_step(lam, z - hz, p)?;
        let d1_dz = (cp - cm) / (2.0 * hz) - Complex64::new(1.0, 0.0);
        let d2_dz = (dp - dm) / (2.0 * hz);
        let det = d1_dl * d2_dz - d1_dz * d2_dl;
        if det.norm_sqr() == 0.0 {
            return None;
        }
        let dlam = (f1 * d2_dz - f2 * d1_dz) / det;
        let dz = (d1_dl * f2 - d2_dl * f1) / det;
        if !dlam.is_finite() || !dz.is_finite() {
            return None;
        }
        lam -= dlam;
        z -= dz;
    }
    None
}

fn ray_point_at(
    lambda: Complex64,
    z: Complex64,
    p: usize,
    r: f64,
    alpha: f64,
) -> Result<RayPoint, ShellError> {
    let approx: Vec<Complex64> = std::iter::once(z).collect();
    let mut seed = approx;
    seed.resize(p, z);
    let cycle = match cycles::refine_cycle(lambda, &seed, p) {
        Ok(c) => c,
        Err(cycles::CyclesError::NotMinimalPeriod { .. }) => return Err(ShellError::LostCycle),
        Err(_) => return Err(ShellError::LostCycle),
    };
    Ok(RayPoint {
        lambda,
        cycle,
        r,
        alpha,
    })
}

/// Follow the internal ray R(α) from a shell seed inward to r_stop.
///
/// Continuation is geometric in r (ratio 0.8), with the log-step halved on
/// corrector failure. The returned r values are strictly decreasing and the
/// last point approximates the virtual center.
pub fn trace_internal_ray(
    lambda_seed: Complex64,
    alpha: f64,
    r_stop: f64,
    step_count: usize,
) -> Result<Vec<RayPoint>, ShellError> {
    assert!(r_stop > 0.0 && r_stop < 1.0);
    let (p, _rho) = match classify(lambda_seed, DEFAULT_BUDGET) {
        Classification::Shell { period, multiplier } => (period, multiplier),
        _ => return Err(ShellError::SeedNotShell),
    };
    let cycle = cycles::detect_cycle(lambda_seed, DEFAULT_BUDGET)
        .ok()
        .flatten()
        .ok_or(ShellError::SeedNotShell)?;

    let mut lam = lambda_seed;
    let mut z = cycle.points[0];
    let mut r = cycle.multiplier.norm();
    let target_phase = Complex64::from_polar(1.0, 2.0 * PI * alpha);

    // phase-correct the seed onto the ray before stepping inward
    let (l2, z2) =
        correct_ray_point(lam, z, p, r * target_phase).ok_or(ShellError::LostCycle)?;
    lam = l2;
    z = z2;

    let mut out = Vec::new();
    out.push(ray_point_at(lam, z, p, r, alpha)?);

    let mut ratio = RAY_STEP_RATIO;
    let mut steps = 0usize;
    while r > r_stop {
        if steps >= step_count {
            return Err(ShellError::ContinuationStalled { r });
        }
        let r_next = (r * ratio).max(r_stop);
        match correct_ray_point(lam, z, p, r_next * target_phase) {
            Some((l2, z2)) => {
                lam = l2;
                z = z2;
                r = r_next;
                out.push(ray_point_at(lam, z, p, r, alpha)?);
                ratio = RAY_STEP_RATIO;
            }
            None => {
                // halve the step in log r
                ratio = ratio.sqrt();
                if 1.0 - ratio < 1e-12 {
                    return Err(ShellError::ContinuationStalled { r });
                }
            }
        }
        steps += 1;
    }
    Ok(out)
}

/// Search the disk around a boundary point of a period-n component for a
/// parameter whose attracting cycle has period n·p.
///
/// Buds are tangent at one point, so coverage is directional: 64 directions
/// at 8 radii, small radii first.
pub fn find_bud(
    lambda_boundary: Complex64,
    p: usize,
    q: usize,
    n: usize,
    search_radius: f64,
) -> Option<Complex64> {
    debug_assert!(p >= 2 && gcd(q, p) == 1);
    let target = n * p;
    for ring in 1..=8u32 {
        let radius = search_radius * ring as f64 / 8.0;
        for dir in 0..64u32 {
            let theta = 2.0 * PI * dir as f64 / 64.0;
            let lam = lambda_boundary + Complex64::from_polar(radius, theta);
            if let Classification::Shell { period, .. } = classify(lam, DEFAULT_BUDGET) {
                if period == target {
                    return Some(lam);
                }
            }
        }
    }
    None
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Probe a circle around a virtual center and bucket period-p shell hits by
/// the asymptotic tract containing f_λ^{p−1}(λi). One representative per
/// tract found, ordered by quadrant.
pub fn quadruplet(
    lambda_star: Complex64,
    p: usize,
    probe_radius: f64,
) -> Vec<(Tract, Complex64)> {
    let mut found: [Option<Complex64>; 4] = [None; 4];
    let probes = 256u32;
    for k in 0..probes {
        let theta = 2.0 * PI * k as f64 / probes as f64;
        let lam = lambda_star + Complex64::from_polar(probe_radius, theta);
        match classify(lam, DEFAULT_BUDGET) {
            Classification::Shell { period, .. } if period == p => {
                let mut z = lam * Complex64::i();
                let mut ok = true;
                for _ in 0..p - 1 {
                    match eval_f(lam, z) {
                        ExtendedValue::Finite(next) => z = next,
                        ExtendedValue::Infinity => {
                            ok = false;
                            break;
                        }
                    }
                }
                if !ok {
                    continue;
                }
                if let Some(tract) = kernel::tract_of(z, TRACT_THRESHOLD) {
                    let slot = &mut found[(tract.quadrant - 1) as usize];
                    if slot.is_none() {
                        *slot = Some(lam);
                    }
                }
            }
            _ => {}
        }
    }
    found
        .iter()
        .enumerate()
        .filter_map(|(i, slot)| {
            slot.map(|lam| {
                (
                    Tract {
                        quadrant: (i + 1) as u8,
                        threshold: TRACT_THRESHOLD,
                    },
                    lam,
                )
            })
        })
        .collect()
}
