//! Evaluation of the family f_λ(z) = λ·tan z² and guarded orbit iteration.
//!
//! Everything here is a pure function of its arguments. The trig kernels are
//! built from explicitly odd/even real pieces so that the exact symmetries of
//! the family survive in floating point: f_λ(-z) = f_λ(z) bitwise,
//! f_λ̄(z̄) = conj f_λ(z) bitwise and f_{iλ}(-iz) = -i·f_λ(z) bitwise. The
//! symmetry suites rely on orbits of related parameters agreeing step by step.

use num_complex::Complex64;
use thiserror::Error;

/// Relative tolerance deciding that z² sits on the pole lattice (k+1/2)π.
pub const POLE_TOL: f64 = 1e-12;
/// |tan z²| beyond this is treated as the point at infinity.
pub const OVERFLOW_LIMIT: f64 = 1e15;
/// Revisit tolerance for cycle-candidate detection.
pub const CYCLE_TOL: f64 = 1e-9;
/// Ring buffer length for cycle-candidate detection; bounds detectable periods.
pub const RING_LEN: usize = 64;

#[derive(Debug, Error, PartialEq)]
pub enum KernelError {
    #[error("sec² overflows: z² within pole tolerance of the lattice")]
    PoleProximity,
    #[error("w/λ within tolerance of ±i, the arctangent branch points")]
    BranchPointHit,
}

/// A value on the Riemann sphere: finite, or the point at infinity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ExtendedValue {
    Finite(Complex64),
    Infinity,
}

impl ExtendedValue {
    pub fn finite(self) -> Option<Complex64> {
        match self {
            ExtendedValue::Finite(v) => Some(v),
            ExtendedValue::Infinity => None,
        }
    }

    pub fn is_infinity(self) -> bool {
        matches!(self, ExtendedValue::Infinity)
    }
}

/// One of the four asymptotic tracts, labelled by the quadrant of z.
///
/// Membership requires the strict quadrant sign pattern together with
/// |Im z²| > threshold; the sign of Im z² is forced by the quadrant
/// (positive in quadrants 1 and 3, negative in 2 and 4), so along a tract
/// z² runs to infinity in one half-plane and tan z² saturates at ±i.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tract {
    pub quadrant: u8,
    pub threshold: f64,
}

/// Fate of a guarded orbit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum OrbitOutcome {
    /// First iterate inside the trap disk around 0.
    TrapEntry { step: usize },
    /// The iterate at `step` is within pole tolerance of a pole (next value ∞).
    PoleHit { step: usize },
    /// A revisit within CYCLE_TOL was seen; `period` is the smallest lag.
    CycleCandidate {
        step: usize,
        period: usize,
        point: Complex64,
    },
    /// |z| exceeded the escape radius. Diagnostic only: ∞ is not attracting.
    Escaped { step: usize },
    /// Budget exhausted without a verdict.
    Exhausted,
}

// ---------------------------------------------------------------------------
// symmetric elementary kernels
// ---------------------------------------------------------------------------

/// sin(t) as an exactly odd function of t.
#[inline]
fn sin_odd(t: f64) -> f64 {
    let s = t.abs().sin();
    if t.is_sign_negative() {
        -s
    } else {
        s
    }
}

/// cos(t) as an exactly even function of t.
#[inline]
fn cos_even(t: f64) -> f64 {
    t.abs().cos()
}

/// sinh(t) as an exactly odd function of t.
#[inline]
fn sinh_odd(t: f64) -> f64 {
    let s = t.abs().sinh();
    if t.is_sign_negative() {
        -s
    } else {
        s
    }
}

/// Complex tangent, odd in both components, stable for large |Im w|.
///
/// tan(x+iy) = (sin x cos x + i sinh y cosh y) / (cos²x + sinh²y); the
/// denominator has no cancellation, so real poles stay finite until the
/// overflow guard. For 2|y| > 44 the asymptotic form ±i + 2e^{∓2iw}-size
/// corrections is used so sinh cannot overflow.
pub fn ctan(w: Complex64) -> Complex64 {
    let (x, y) = (w.re, w.im);
    let ay2 = 2.0 * y.abs();
    if ay2 > 44.0 {
        let e = (-ay2).exp();
        let re = 2.0 * sin_odd(2.0 * x) * e;
        let im_mag = 1.0 - 2.0 * cos_even(2.0 * x) * e;
        let im = if y.is_sign_negative() { -im_mag } else { im_mag };
        return Complex64::new(re, im);
    }
    let (sx, cx) = (sin_odd(x), cos_even(x));
    let (shy, chy) = (sinh_odd(y), y.abs().cosh());
    let d = cx * cx + shy * shy;
    Complex64::new(sx * cx / d, shy * chy / d)
}

/// Complex sine from odd/even pieces; no overflow guard (callers scale).
fn csin(w: Complex64) -> Complex64 {
    let (x, y) = (w.re, w.im);
    Complex64::new(sin_odd(x) * y.abs().cosh(), cos_even(x) * sinh_odd(y))
}

/// a / sin(w), scaled so that huge |Im w| underflows to 0 instead of NaN.
pub fn div_by_sin(a: Complex64, w: Complex64) -> Option<Complex64> {
    let (x, y) = (w.re, w.im);
    if y.abs() > 22.0 {
        // sin(x+iy) ≈ (e^|y|/2)(sin x + i sign(y) cos x)
        let unit = Complex64::new(
            sin_odd(x),
            if y.is_sign_negative() {
                -cos_even(x)
            } else {
                cos_even(x)
            },
        );
        let scale = 2.0 * (-y.abs()).exp();
        return Some(a * scale / unit);
    }
    let s = csin(w);
    if s.norm_sqr() == 0.0 {
        return None;
    }
    Some(a / s)
}

/// sec²(w) = 1/cos²(w), stable for large |Im w| where it decays like 4e^{-2|Im w|}.
fn csec2(w: Complex64) -> Option<Complex64> {
    let (x, y) = (w.re, w.im);
    if y.abs() > 22.0 {
        let m = 4.0 * (-2.0 * y.abs()).exp();
        let im_mag = sin_odd(2.0 * x) * m;
        let im = if y.is_sign_negative() { -im_mag } else { im_mag };
        return Some(Complex64::new(m * cos_even(2.0 * x), im));
    }
    let c = Complex64::new(cos_even(x) * y.abs().cosh(), -sin_odd(x) * sinh_odd(y));
    let c2 = c * c;
    if c2.norm_sqr() == 0.0 {
        return None;
    }
    Some(Complex64::new(1.0, 0.0) / c2)
}

/// Distance of w to the nearest pole (k+1/2)π of tan, as |w - pole|.
fn pole_distance(w: Complex64) -> f64 {
    let k = (w.re / std::f64::consts::PI - 0.5).round();
    let pole = (k + 0.5) * std::f64::consts::PI;
    Complex64::new(w.re - pole, w.im).norm()
}

/// z² sits on the pole lattice within the relative tolerance.
pub fn is_pole_square(w: Complex64) -> bool {
    pole_distance(w) < POLE_TOL * (1.0 + w.norm())
}

// ---------------------------------------------------------------------------
// the family
// ---------------------------------------------------------------------------

/// f_λ(z) = λ·tan z². Total: pole-lattice hits and overflow map to Infinity.
///
/// Evenness is exact because z enters only through z².
pub fn eval_f(lambda: Complex64, z: Complex64) -> ExtendedValue {
    let w = z * z;
    if !w.re.is_finite() || !w.im.is_finite() {
        return ExtendedValue::Infinity;
    }
    if is_pole_square(w) {
        return ExtendedValue::Infinity;
    }
    let t = ctan(w);
    if t.norm_sqr() > OVERFLOW_LIMIT * OVERFLOW_LIMIT {
        return ExtendedValue::Infinity;
    }
    ExtendedValue::Finite(lambda * t)
}

/// f_λ'(z) = 2λz·sec² z².
pub fn eval_df(lambda: Complex64, z: Complex64) -> Result<Complex64, KernelError> {
    let w = z * z;
    if is_pole_square(w) {
        return Err(KernelError::PoleProximity);
    }
    let s = csec2(w).ok_or(KernelError::PoleProximity)?;
    let d = 2.0 * lambda * z * s;
    if !d.re.is_finite() || !d.im.is_finite() {
        return Err(KernelError::PoleProximity);
    }
    Ok(d)
}

/// The branch-(n, sign) inverse of f_λ: sign·√(Arctan(w/λ) + nπ),
/// principal arctangent and principal square root.
pub fn inverse_branch(
    lambda: Complex64,
    w: Complex64,
    n: i32,
    sign: i8,
) -> Result<Complex64, KernelError> {
    let zeta = w / lambda;
    if (zeta - Complex64::i()).norm() < 1e-12 || (zeta + Complex64::i()).norm() < 1e-12 {
        return Err(KernelError::BranchPointHit);
    }
    let a = zeta.atan() + Complex64::new(n as f64 * std::f64::consts::PI, 0.0);
    let root = a.sqrt();
    Ok(if sign < 0 { -root } else { root })
}

/// The asymptotic tract containing z, if any: strict quadrant signs and
/// |Im z²| > r.
pub fn tract_of(z: Complex64, r: f64) -> Option<Tract> {
    debug_assert!(r > 0.0);
    if z.re == 0.0 || z.im == 0.0 {
        return None;
    }
    let im_sq = 2.0 * z.re * z.im; // Im z²
    if im_sq.abs() <= r {
        return None;
    }
    let quadrant = match (z.re > 0.0, z.im > 0.0) {
        (true, true) => 1,
        (false, true) => 2,
        (false, false) => 3,
        (true, false) => 4,
    };
    Some(Tract {
        quadrant,
        threshold: r,
    })
}

/// Iterate f_λ from z0 with trap, pole, escape and revisit guards.
///
/// Deterministic; the checks on the current iterate run in the order
/// trap → revisit → escape, then the map is applied.
pub fn orbit(
    lambda: Complex64,
    z0: Complex64,
    budget: usize,
    trap_radius: f64,
    escape_radius: f64,
) -> OrbitOutcome {
    orbit_impl(lambda, z0, budget, trap_radius, escape_radius, None)
}

/// Like `orbit`, also returning the visited iterates (z0 first).
pub fn orbit_trace(
    lambda: Complex64,
    z0: Complex64,
    budget: usize,
    trap_radius: f64,
    escape_radius: f64,
) -> (OrbitOutcome, Vec<Complex64>) {
    let mut trace = Vec::new();
    let out = orbit_impl(lambda, z0, budget, trap_radius, escape_radius, Some(&mut trace));
    (out, trace)
}

fn orbit_impl(
    lambda: Complex64,
    z0: Complex64,
    budget: usize,
    trap_radius: f64,
    escape_radius: f64,
    mut trace: Option<&mut Vec<Complex64>>,
) -> OrbitOutcome {
    let trap_sq = trap_radius * trap_radius;
    let escape_sq = escape_radius * escape_radius;
    let mut ring: [Complex64; RING_LEN] = [Complex64::new(f64::INFINITY, 0.0); RING_LEN];
    let mut z = z0;
    for step in 0..budget {
        if let Some(t) = trace.as_deref_mut() {
            t.push(z);
        }
        let nz = z.norm_sqr();
        if nz < trap_sq {
            return OrbitOutcome::TrapEntry { step };
        }
        // newest-first scan so the smallest revisit lag wins
        let filled = step.min(RING_LEN);
        for back in 1..=filled {
            let idx = (step - back) % RING_LEN;
            if (z - ring[idx]).norm_sqr() < CYCLE_TOL * CYCLE_TOL {
                return OrbitOutcome::CycleCandidate {
                    step,
                    period: back,
                    point: z,
                };
            }
        }
        if nz > escape_sq {
            return OrbitOutcome::Escaped { step };
        }
        if step >= 1 {
            // the start point is excluded: a revisit of z0 implies a revisit
            // of z1 one step later, and iterates from step 1 on are exactly
            // mirrored across the parameter symmetries
            ring[step % RING_LEN] = z;
        }
        match eval_f(lambda, z) {
            ExtendedValue::Infinity => return OrbitOutcome::PoleHit { step },
            ExtendedValue::Finite(next) => z = next,
        }
    }
    OrbitOutcome::Exhausted
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn f_fixes_origin() {
        let v = eval_f(c(1.0, 1.0), c(0.0, 0.0)).finite().unwrap();
        assert_eq!(v, c(0.0, 0.0));
    }

    #[test]
    fn f_hits_pole_at_sqrt_half_pi() {
        let z = c((PI / 2.0).sqrt(), 0.0);
        assert!(eval_f(c(1.0, 0.0), z).is_infinity());
        // poles are λ-independent
        assert!(eval_f(c(2.0, 1.0), z).is_infinity());
    }

    #[test]
    fn f_maps_center_asymptotic_value_to_zero() {
        // λ = √π: f_λ(λi) = -λ·tan λ² = -√π·tan π ≈ 0
        let lam = c(PI.sqrt(), 0.0);
        let v = eval_f(lam, lam * Complex64::i()).finite().unwrap();
        assert!(v.norm() < 1e-12, "got {v}");
    }

    #[test]
    fn df_at_origin_is_zero() {
        assert_eq!(eval_df(c(0.3, 2.0), c(0.0, 0.0)).unwrap(), c(0.0, 0.0));
    }

    #[test]
    fn df_at_real_fixed_point_is_pi() {
        // λ = z = √(π/4): 2λz·sec²(π/4) = 2·(π/4)·2 = π
        let l = (PI / 4.0).sqrt();
        let d = eval_df(c(l, 0.0), c(l, 0.0)).unwrap();
        assert!((d - c(PI, 0.0)).norm() < 1e-12, "got {d}");
    }

    #[test]
    fn df_matches_finite_difference() {
        let lam = c(1.0, 0.0);
        let z = c(0.3, 0.0);
        let h = 1e-6;
        let fp = eval_f(lam, z + c(h, 0.0)).finite().unwrap();
        let fm = eval_f(lam, z - c(h, 0.0)).finite().unwrap();
        let fd = (fp - fm) / (2.0 * h);
        let d = eval_df(lam, z).unwrap();
        assert!((d - fd).norm() / d.norm() < 1e-6, "d={d} fd={fd}");
    }

    #[test]
    fn inverse_branch_principal_preimages_of_zero() {
        let z0 = inverse_branch(c(1.0, 0.0), c(0.0, 0.0), 0, 1).unwrap();
        assert_eq!(z0, c(0.0, 0.0));
        let z1 = inverse_branch(c(1.0, 0.0), c(0.0, 0.0), 1, 1).unwrap();
        assert!((z1 - c(PI.sqrt(), 0.0)).norm() < 1e-12, "got {z1}");
    }

    #[test]
    fn inverse_branch_round_trip_at_shell_fixed_point() {
        let lam = c(0.9567774122052524, 0.9567774122052524);
        let w = c(0.8660254037844386, -0.8660254037844386);
        let mut best = f64::INFINITY;
        for n in -2..=2 {
            for sign in [1i8, -1] {
                if let Ok(z) = inverse_branch(lam, w, n, sign) {
                    if let Some(v) = eval_f(lam, z).finite() {
                        best = best.min((v - w).norm());
                    }
                }
            }
        }
        assert!(best < 1e-10 * (1.0 + w.norm()), "best residual {best}");
    }

    #[test]
    fn inverse_branch_rejects_branch_point() {
        let err = inverse_branch(c(1.0, 0.0), Complex64::i(), 0, 1);
        assert_eq!(err, Err(KernelError::BranchPointHit));
    }

    #[test]
    fn tract_examples() {
        assert_eq!(
            tract_of(c(1.0, 10.0), 10.0),
            Some(Tract { quadrant: 1, threshold: 10.0 })
        );
        assert_eq!(tract_of(c(5.0, 0.0), 1.0), None);
        assert_eq!(
            tract_of(c(-1.0, -10.0), 10.0),
            Some(Tract { quadrant: 3, threshold: 10.0 })
        );
        // quadrants 2 and 4 carry Im z² < -r
        assert_eq!(
            tract_of(c(-1.0, 10.0), 10.0),
            Some(Tract { quadrant: 2, threshold: 10.0 })
        );
    }

    #[test]
    fn orbit_traps_for_small_real_lambda() {
        let out = orbit(c(0.5, 0.0), c(0.0, 0.5), 200, 0.5, 1e8);
        assert!(matches!(out, OrbitOutcome::TrapEntry { .. }), "{out:?}");
    }

    #[test]
    fn orbit_pole_hit_at_step_zero() {
        let out = orbit(c(1.0, 0.0), c((PI / 2.0).sqrt(), 0.0), 10, 0.25, 1e8);
        assert_eq!(out, OrbitOutcome::PoleHit { step: 0 });
    }

    #[test]
    fn orbit_finds_period_one_candidate_in_shell() {
        let lam = c(0.95679, 0.95679);
        let out = orbit(lam, lam * Complex64::i(), 500, 0.25, 1e8);
        match out {
            OrbitOutcome::CycleCandidate { period, point, .. } => {
                assert_eq!(period, 1);
                assert!((point - c(0.86603, -0.86603)).norm() < 1e-3, "{point}");
            }
            other => panic!("expected cycle candidate, got {other:?}"),
        }
    }

    #[test]
    fn conjugation_orbit_identity() {
        // f_λ̄^k(iλ̄) = conj f_λ^k(iλ), exactly, while both stay finite
        let mut rng = 0x9e3779b97f4a7c15u64;
        let mut next = || {
            rng = rng.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            (rng >> 11) as f64 / (1u64 << 53) as f64 * 4.0 - 2.0
        };
        for _ in 0..50 {
            let lam = c(next(), next());
            if lam.norm() < 1e-3 {
                continue;
            }
            let lamc = lam.conj();
            let mut a = lam * Complex64::i();
            let mut b = lamc * Complex64::i();
            for k in 0..100 {
                let (fa, fb) = (eval_f(lam, a), eval_f(lamc, b));
                match (fa, fb) {
                    (ExtendedValue::Finite(x), ExtendedValue::Finite(y)) => {
                        assert!(
                            (x.conj() - y).norm() <= 1e-8 * (k + 1) as f64,
                            "k={k} lam={lam} x={x} y={y}"
                        );
                        a = x;
                        b = y;
                    }
                    _ => break,
                }
            }
        }
    }

    #[test]
    fn rotation_orbit_identity() {
        // f_{iλ}^k(-i z0) = -i·f_λ^k(z0), exactly
        let lam = c(1.3, -0.7);
        let ilam = lam * Complex64::i();
        let z0 = c(0.4, 0.9);
        let mut a = z0;
        let mut b = -Complex64::i() * z0;
        for k in 0..100 {
            match (eval_f(lam, a), eval_f(ilam, b)) {
                (ExtendedValue::Finite(x), ExtendedValue::Finite(y)) => {
                    assert!(
                        (y + Complex64::i() * x).norm() <= 1e-8 * (k + 1) as f64,
                        "k={k}"
                    );
                    a = x;
                    b = y;
                }
                _ => break,
            }
        }
    }

    #[test]
    fn trap_is_forward_invariant() {
        // once inside r0 = min(0.5, 1/(4|λ|)) the orbit stays for 50 steps
        let mut state = 1u64;
        let mut next = || {
            state = state.wrapping_mul(2862933555777941757).wrapping_add(3037000493);
            (state >> 11) as f64 / (1u64 << 53) as f64
        };
        for _ in 0..100 {
            let lam = c(next() * 6.0 - 3.0, next() * 6.0 - 3.0);
            if lam.norm() < 1e-3 {
                continue;
            }
            let r0 = crate::classify::zero_trap_radius(lam);
            let theta = next() * std::f64::consts::TAU;
            let mut z = Complex64::from_polar(0.9 * r0, theta);
            for _ in 0..50 {
                z = eval_f(lam, z).finite().expect("no poles inside the trap");
                assert!(z.norm() < r0, "escaped the trap: λ={lam} z={z}");
            }
        }
    }

    proptest! {
        #[test]
        fn evenness_is_exact(re in -3.0f64..3.0, im in -3.0f64..3.0,
                             lre in -2.0f64..2.0, lim in -2.0f64..2.0) {
            let z = c(re, im);
            let lam = c(lre, lim);
            prop_assume!(lam.norm() > 1e-6);
            let a = eval_f(lam, z);
            let b = eval_f(lam, -z);
            prop_assert_eq!(a, b);
        }

        #[test]
        fn derivative_matches_finite_difference(re in -2.0f64..2.0, im in -2.0f64..2.0,
                                                lre in -2.0f64..2.0, lim in -2.0f64..2.0) {
            let z = c(re, im);
            let lam = c(lre, lim);
            prop_assume!(lam.norm() > 1e-3);
            prop_assume!(!is_pole_square(z * z));
            if let Ok(d) = eval_df(lam, z) {
                // skip badly conditioned spots near the pole lattice
                prop_assume!(d.norm() < 1e3);
                let h = 1e-6 * (1.0 + z.norm());
                let fp = eval_f(lam, z + c(h, 0.0)).finite();
                let fm = eval_f(lam, z - c(h, 0.0)).finite();
                if let (Some(fp), Some(fm)) = (fp, fm) {
                    let fd = (fp - fm) / (2.0 * h);
                    prop_assert!((d - fd).norm() <= 1e-5 * (1.0 + d.norm()),
                                 "d={d} fd={fd}");
                }
            }
        }

        #[test]
        fn inverse_branch_is_right_inverse(wre in -4.0f64..4.0, wim in -4.0f64..4.0,
                                           n in -3i32..4, sign in prop::bool::ANY) {
            let lam = c(1.1, -0.4);
            let w = c(wre, wim);
            prop_assume!((w / lam - Complex64::i()).norm() > 1e-3);
            prop_assume!((w / lam + Complex64::i()).norm() > 1e-3);
            let z = inverse_branch(lam, w, n, if sign { 1 } else { -1 }).unwrap();
            if let Some(v) = eval_f(lam, z).finite() {
                prop_assert!((v - w).norm() < 1e-10 * (1.0 + w.norm()),
                             "residual {}", (v - w).norm());
            }
        }
    }
}
