//! Per-parameter verdicts: does the free singular orbit land in the basin of
//! 0 (capture, with a depth) or converge to a non-zero attracting cycle
//! (shell, with period and multiplier)?

use crate::cycles::{self, Stability};
use crate::kernel::{orbit, OrbitOutcome};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// Default iteration budget for classification.
pub const DEFAULT_BUDGET: usize = 5000;
/// Larger budget for the verification suites.
pub const VERIFY_BUDGET: usize = 20000;
/// Escape radius; escape is diagnostic only since ∞ is not attracting.
pub const ESCAPE_RADIUS: f64 = 1e8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum UnresolvedReason {
    PoleHit,
    Escaped,
    BudgetExhausted,
    RefinementFailed,
    NotAttracting,
    CycleThroughZero,
    Origin,
}

/// The per-parameter verdict.
#[derive(Debug, Clone, PartialEq)]
pub enum Classification {
    /// Orbit of λi enters the certified basin disk at `depth` and never leaves.
    CaptureDepth(usize),
    /// Attracting (not superattracting) cycle of the given period; |ρ| < 1.
    Shell { period: usize, multiplier: Complex64 },
    Unresolved(UnresolvedReason),
}

impl Classification {
    pub fn is_shell(&self) -> bool {
        matches!(self, Classification::Shell { .. })
    }
    pub fn is_capture(&self) -> bool {
        matches!(self, Classification::CaptureDepth(_))
    }
}

/// The eight parameters {±λ, ±iλ, ±conj λ, ±i·conj λ}, deduplicated when λ
/// sits on a symmetry axis.
#[derive(Debug, Clone, PartialEq)]
pub struct SymmetryOrbit {
    pub members: Vec<Complex64>,
}

/// r₀ = min(1/2, 1/(4|λ|)). On |z| ≤ r₀ we have |z²| ≤ 1/4, so
/// |tan z²| ≤ 1.1|z²| and |f_λ(z)| ≤ 1.1|λ| r₀ |z| ≤ 0.275|z|: the disk is
/// forward invariant and f contracts it toward 0.
pub fn zero_trap_radius(lambda: Complex64) -> f64 {
    debug_assert!(lambda.norm_sqr() > 0.0);
    (0.25 / lambda.norm()).min(0.5)
}

/// The largest disk |z| ≤ r certified inside the immediate basin of 0.
///
/// tan has nonnegative Taylor coefficients, so |tan w| ≤ tan |w| for
/// |w| < π/2. If |λ|·tan(r²) ≤ (1−η)·r with r² < π/2, the disk |z| ≤ r is
/// forward invariant, f_λ^n → 0 on it, and being connected through 0 it lies
/// in the immediate basin. |λ|·tan(r²)/r is strictly increasing in r, so the
/// certificate holds below the unique crossing; bisection finds it. The
/// result depends on |λ| alone, which keeps verdicts symmetry-invariant.
pub fn certified_trap_radius(lambda: Complex64) -> f64 {
    const ETA: f64 = 1e-9;
    let al = lambda.norm();
    let limit = std::f64::consts::FRAC_PI_2.sqrt() * (1.0 - 1e-12);
    let excess = |r: f64| al * (r * r).tan() - (1.0 - ETA) * r;
    if excess(limit) <= 0.0 {
        return limit;
    }
    let (mut lo, mut hi) = (0.0f64, limit);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if excess(mid) <= 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo.max(zero_trap_radius(lambda))
}

/// Classify λ from the orbit of the asymptotic value λi.
pub fn classify(lambda: Complex64, budget: usize) -> Classification {
    classify_with(lambda, budget, ESCAPE_RADIUS)
}

pub fn classify_with(lambda: Complex64, budget: usize, escape_radius: f64) -> Classification {
    if lambda.norm_sqr() == 0.0 {
        return Classification::Unresolved(UnresolvedReason::Origin);
    }
    let trap = certified_trap_radius(lambda);
    match orbit(lambda, lambda * Complex64::i(), budget, trap, escape_radius) {
        OrbitOutcome::TrapEntry { step } => Classification::CaptureDepth(step),
        OrbitOutcome::PoleHit { .. } => Classification::Unresolved(UnresolvedReason::PoleHit),
        OrbitOutcome::Escaped { .. } => Classification::Unresolved(UnresolvedReason::Escaped),
        OrbitOutcome::Exhausted => Classification::Unresolved(UnresolvedReason::BudgetExhausted),
        OrbitOutcome::CycleCandidate { period, point, .. } => {
            let mut p = period;
            loop {
                let approx: Vec<Complex64> = std::iter::repeat_n(point, p).collect();
                match cycles::refine_cycle(lambda, &approx, p) {
                    Ok(cycle) => {
                        if cycle.contains_zero() {
                            return Classification::Unresolved(UnresolvedReason::CycleThroughZero);
                        }
                        return match cycle.stability {
                            Stability::Attracting => Classification::Shell {
                                period: cycle.period,
                                multiplier: cycle.multiplier,
                            },
                            _ => Classification::Unresolved(UnresolvedReason::NotAttracting),
                        };
                    }
                    Err(cycles::CyclesError::NotMinimalPeriod { divisor, .. }) => p = divisor,
                    Err(_) => {
                        return Classification::Unresolved(UnresolvedReason::RefinementFailed)
                    }
                }
            }
        }
    }
}

/// The symmetry orbit of λ under negation, rotation by i and conjugation.
pub fn symmetry_images(lambda: Complex64) -> SymmetryOrbit {
    let i = Complex64::i();
    let candidates = [
        lambda,
        -lambda,
        i * lambda,
        -(i * lambda),
        lambda.conj(),
        -lambda.conj(),
        i * lambda.conj(),
        -(i * lambda.conj()),
    ];
    let mut members: Vec<Complex64> = Vec::with_capacity(8);
    for c in candidates {
        if !members.contains(&c) {
            members.push(c);
        }
    }
    SymmetryOrbit { members }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn trap_radius_examples() {
        assert_eq!(zero_trap_radius(c(1.0, 0.0)), 0.25);
        assert_eq!(zero_trap_radius(c(0.1, 0.0)), 0.5);
    }

    #[test]
    fn certified_radius_dominates_and_certifies() {
        for al in [0.05, 0.3, 0.7, 0.886, 1.2, 1.7725, 3.0, 10.0] {
            let lam = c(al, 0.0);
            let r = certified_trap_radius(lam);
            assert!(r >= zero_trap_radius(lam));
            assert!(r * r < PI / 2.0);
            assert!(al * (r * r).tan() <= r, "certificate broken at |λ|={al}");
        }
    }

    #[test]
    fn small_real_lambda_captures_quickly() {
        match classify(c(0.5, 0.0), DEFAULT_BUDGET) {
            Classification::CaptureDepth(d) => assert!(d <= 5, "depth {d}"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn axis_capture_has_depth_zero_below_quarter_pi_root() {
        for t in 1..200 {
            let m = t as f64 / 200.0 * 0.886;
            for lam in [c(m, 0.0), c(0.0, m), c(-m, 0.0), c(0.0, -m)] {
                match classify(lam, DEFAULT_BUDGET) {
                    Classification::CaptureDepth(0) => {}
                    other => panic!("λ={lam}: {other:?}"),
                }
            }
        }
    }

    #[test]
    fn shell_example_period_one() {
        let lam = c(0.9567774122052524, 0.9567774122052524);
        match classify(lam, DEFAULT_BUDGET) {
            Classification::Shell { period, multiplier } => {
                assert_eq!(period, 1);
                assert!((multiplier.norm() - 0.5989294180129363).abs() < 1e-8);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn center_sqrt_pi_captures_fast() {
        // f_λ(λi) lands on 0 after one step
        match classify(c(PI.sqrt(), 0.0), DEFAULT_BUDGET) {
            Classification::CaptureDepth(d) => assert!(d <= 2, "depth {d}"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn symmetry_images_counts() {
        assert_eq!(symmetry_images(c(1.0, 2.0)).members.len(), 8);
        // the diagonal is itself a mirror line: i·conj(1+i) = 1+i
        assert_eq!(symmetry_images(c(1.0, 1.0)).members.len(), 4);
        let axis = symmetry_images(c(1.0, 0.0));
        assert_eq!(axis.members.len(), 4);
        for m in [c(1.0, 0.0), c(-1.0, 0.0), c(0.0, 1.0), c(0.0, -1.0)] {
            assert!(axis.members.contains(&m));
        }
    }

    #[test]
    fn symmetry_orbit_classifies_identically() {
        let lam = c(1.0, 1.0);
        let base = classify(lam, DEFAULT_BUDGET);
        for m in symmetry_images(lam).members {
            let v = classify(m, DEFAULT_BUDGET);
            match (&base, &v) {
                (
                    Classification::Shell { period: p0, multiplier: m0 },
                    Classification::Shell { period: p1, multiplier: m1 },
                ) => {
                    assert_eq!(p0, p1);
                    assert!((m0.norm() - m1.norm()).abs() < 1e-9);
                }
                (a, b) => assert_eq!(a, b),
            }
        }
    }

    #[test]
    fn capture_depth_matches_exact_center_order() {
        // at the centers f_λ^n(λi) = 0 exactly; trap entry happens at step n
        for (k, n) in [(1u32, 1usize), (2, 1), (3, 1)] {
            let lam = c((k as f64 * PI).sqrt(), 0.0);
            match classify(lam, DEFAULT_BUDGET) {
                Classification::CaptureDepth(d) => {
                    assert!(d >= n && d <= n + 30, "k={k}: depth {d} vs order {n}")
                }
                other => panic!("{other:?}"),
            }
        }
    }
}
