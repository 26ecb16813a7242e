//! Detection and Newton refinement of periodic cycles, with the multiplier
//! computed two independent ways: the chain rule along the cycle and the
//! λ-free sine-product form 2^p·∏ 2·z_i·z_{i-1} / sin(2·z_{i-1}²).

use crate::kernel::{self, div_by_sin, eval_df, eval_f, ExtendedValue, OrbitOutcome};
use num_complex::Complex64;
use thiserror::Error;

/// Residual target for Newton refinement of f^p(z) = z.
pub const REFINE_TOL: f64 = 1e-12;
/// Half-width of the neutral band around |ρ| = 1.
pub const NEUTRAL_BAND: f64 = 1e-9;
const MAX_NEWTON_STEPS: usize = 50;

#[derive(Debug, Error, PartialEq)]
pub enum CyclesError {
    #[error("Newton refinement diverged from the candidate")]
    RefinementDiverged,
    #[error("period {found} is not minimal; divisor {divisor} verifies")]
    NotMinimalPeriod { found: usize, divisor: usize },
    #[error("a cycle point hit the pole lattice")]
    PoleProximity,
    #[error("the multiplier product formula needs a cycle without 0")]
    ZeroInCycle,
    #[error("sin(2z²) vanishes on a cycle point")]
    SineVanishes,
}

impl From<kernel::KernelError> for CyclesError {
    fn from(_: kernel::KernelError) -> Self {
        CyclesError::PoleProximity
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stability {
    Superattracting,
    Attracting,
    Neutral,
    Repelling,
}

/// A refined periodic cycle: points in orbit order, minimal period, multiplier.
#[derive(Debug, Clone)]
pub struct Cycle {
    pub points: Vec<Complex64>,
    pub period: usize,
    pub multiplier: Complex64,
    pub stability: Stability,
}

impl Cycle {
    /// A cycle through 0 is the superattracting one; its multiplier is exactly 0.
    pub fn contains_zero(&self) -> bool {
        self.points.iter().any(|z| z.norm_sqr() < 1e-24)
    }
}

fn stability_of(multiplier: Complex64, contains_zero: bool) -> Stability {
    if contains_zero {
        return Stability::Superattracting;
    }
    let m = multiplier.norm();
    if m < 1.0 - NEUTRAL_BAND {
        Stability::Attracting
    } else if m <= 1.0 + NEUTRAL_BAND {
        Stability::Neutral
    } else {
        Stability::Repelling
    }
}

/// f^p(z) and (f^p)'(z) by forward accumulation of the chain rule.
fn iterate_with_derivative(
    lambda: Complex64,
    z: Complex64,
    p: usize,
) -> Result<(Complex64, Complex64), CyclesError> {
    let mut w = z;
    let mut d = Complex64::new(1.0, 0.0);
    for _ in 0..p {
        d *= eval_df(lambda, w)?;
        match eval_f(lambda, w) {
            ExtendedValue::Finite(next) => w = next,
            ExtendedValue::Infinity => return Err(CyclesError::PoleProximity),
        }
    }
    Ok((w, d))
}

/// Newton on F(z) = f_λ^p(z) − z from approx[0]; rebuilds the cycle by
/// forward iteration and rejects non-minimal periods.
pub fn refine_cycle(
    lambda: Complex64,
    approx: &[Complex64],
    p: usize,
) -> Result<Cycle, CyclesError> {
    assert_eq!(approx.len(), p, "approx must carry one point per period slot");
    // Newton to the tolerance gate, then polish to the rounding floor: long
    // cycles grazing poles make the multiplier very sensitive to the
    // remaining z error. The best iterate seen is kept.
    let mut z = approx[0];
    let mut best_z = z;
    let mut best_rn = f64::INFINITY;
    let mut polish_left = 2usize;
    for _ in 0..MAX_NEWTON_STEPS {
        let (fp, dp) = iterate_with_derivative(lambda, z, p)?;
        let residual = fp - z;
        let rn = residual.norm();
        if rn < best_rn {
            best_rn = rn;
            best_z = z;
        }
        if rn < REFINE_TOL * (1.0 + z.norm()) {
            if polish_left == 0 || rn == 0.0 {
                break;
            }
            polish_left -= 1;
        }
        let denom = dp - Complex64::new(1.0, 0.0);
        if denom.norm_sqr() == 0.0 {
            break;
        }
        let step = residual / denom;
        if !step.re.is_finite() || !step.im.is_finite() {
            break;
        }
        z -= step;
    }
    let z = best_z;
    if best_rn >= REFINE_TOL * (1.0 + z.norm()) {
        return Err(CyclesError::RefinementDiverged);
    }

    // minimality: no proper divisor period may verify
    for q in 1..p {
        if p.is_multiple_of(q) {
            if let Ok((fq, _)) = iterate_with_derivative(lambda, z, q) {
                if (fq - z).norm() < 1e-9 * (1.0 + z.norm()) {
                    return Err(CyclesError::NotMinimalPeriod {
                        found: p,
                        divisor: q,
                    });
                }
            }
        }
    }

    let mut points = Vec::with_capacity(p);
    points.push(z);
    for _ in 1..p {
        match eval_f(lambda, *points.last().unwrap()) {
            ExtendedValue::Finite(next) => points.push(next),
            ExtendedValue::Infinity => return Err(CyclesError::PoleProximity),
        }
    }
    let contains_zero = points.iter().any(|q| q.norm_sqr() < 1e-24);
    let multiplier = if contains_zero {
        Complex64::new(0.0, 0.0)
    } else {
        let mut m = Complex64::new(1.0, 0.0);
        for q in &points {
            m *= eval_df(lambda, *q)?;
        }
        m
    };
    Ok(Cycle {
        stability: stability_of(multiplier, contains_zero),
        points,
        period: p,
        multiplier,
    })
}

/// Iterate the asymptotic value λi; refine any revisit into a cycle.
///
/// Returns Ok(None) when the orbit traps at 0, hits a pole, escapes or
/// exhausts the budget.
pub fn detect_cycle(lambda: Complex64, budget: usize) -> Result<Option<Cycle>, CyclesError> {
    let trap = crate::classify::zero_trap_radius(lambda);
    let out = kernel::orbit(lambda, lambda * Complex64::i(), budget, trap, 1e8);
    let (mut period, point) = match out {
        OrbitOutcome::CycleCandidate { period, point, .. } => (period, point),
        _ => return Ok(None),
    };
    // orbit sampling can alias a multiple of the true period
    loop {
        let approx: Vec<Complex64> = std::iter::repeat_n(point, period).collect();
        match refine_cycle(lambda, &approx, period) {
            Ok(cycle) => return Ok(Some(cycle)),
            Err(CyclesError::NotMinimalPeriod { divisor, .. }) => period = divisor,
            Err(e) => return Err(e),
        }
    }
}

/// Multiplier as the chain-rule product ∏ f'(z_i) over the cycle.
pub fn multiplier_chain(lambda: Complex64, cycle: &Cycle) -> Result<Complex64, CyclesError> {
    let mut m = Complex64::new(1.0, 0.0);
    for z in &cycle.points {
        m *= eval_df(lambda, *z)?;
    }
    Ok(m)
}

/// λ-free multiplier: 2^p·∏_{i=1}^{p} (2 z_i z_{i-1}) / sin(2 z_{i-1}²),
/// indices mod p. Requires a cycle avoiding 0 with sin(2z²) ≠ 0.
pub fn multiplier_product_formula(cycle: &Cycle) -> Result<Complex64, CyclesError> {
    if cycle.contains_zero() {
        return Err(CyclesError::ZeroInCycle);
    }
    let p = cycle.period;
    let mut m = Complex64::new(1.0, 0.0);
    for i in 0..p {
        let prev = cycle.points[i];
        let next = cycle.points[(i + 1) % p];
        let factor =
            div_by_sin(4.0 * next * prev, 2.0 * prev * prev).ok_or(CyclesError::SineVanishes)?;
        m *= factor;
    }
    Ok(m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    const SHELL_LAMBDA: Complex64 = Complex64::new(0.9567774122052524, 0.9567774122052524);

    #[test]
    fn detects_period_one_shell_cycle() {
        let cycle = detect_cycle(SHELL_LAMBDA, 2000).unwrap().unwrap();
        assert_eq!(cycle.period, 1);
        assert!((cycle.points[0] - c(0.8660254037844386, -0.8660254037844386)).norm() < 1e-9);
        // |ρ| = H(-3i) = 6/sinh 3
        assert!((cycle.multiplier.norm() - 6.0 / 3.0f64.sinh()).abs() < 1e-9);
        assert_eq!(cycle.stability, Stability::Attracting);
    }

    #[test]
    fn no_cycle_when_orbit_traps() {
        assert!(detect_cycle(c(0.5, 0.0), 2000).unwrap().is_none());
        // superattracting landing: λ = √π maps λi onto 0 in one step
        assert!(detect_cycle(c(PI.sqrt(), 0.0), 2000).unwrap().is_none());
    }

    #[test]
    fn refine_keeps_superattracting_fixed_point() {
        let cycle = refine_cycle(c(1.7, -0.4), &[c(0.0, 0.0)], 1).unwrap();
        assert_eq!(cycle.points, vec![c(0.0, 0.0)]);
        assert_eq!(cycle.multiplier, c(0.0, 0.0));
        assert_eq!(cycle.stability, Stability::Superattracting);
    }

    #[test]
    fn refine_repelling_real_fixed_point_multiplier_pi() {
        let l = (PI / 4.0).sqrt();
        let cycle = refine_cycle(c(l, 0.0), &[c(0.8862269, 0.0)], 1).unwrap();
        assert!((cycle.multiplier - c(PI, 0.0)).norm() < 1e-10, "{}", cycle.multiplier);
        assert_eq!(cycle.stability, Stability::Repelling);
    }

    #[test]
    fn product_formula_matches_h_at_period_one() {
        let cycle = detect_cycle(SHELL_LAMBDA, 2000).unwrap().unwrap();
        let by_product = multiplier_product_formula(&cycle).unwrap();
        // 4z²/sin(2z²) at z = 0.86603(1-i) is 2u/sin u with u = -3i
        assert!((by_product.norm() - 0.5989294180129363).abs() < 1e-7);
        let by_chain = multiplier_chain(SHELL_LAMBDA, &cycle).unwrap();
        assert!((by_chain - by_product).norm() <= 1e-8 * (1.0 + by_chain.norm()));
    }

    #[test]
    fn product_formula_rejects_zero_cycle() {
        let cycle = refine_cycle(c(1.0, 0.5), &[c(0.0, 0.0)], 1).unwrap();
        assert_eq!(
            multiplier_product_formula(&cycle),
            Err(CyclesError::ZeroInCycle)
        );
    }

    #[test]
    fn rotated_parameters_carry_rotated_cycles() {
        // cycles of ±iλ are ∓i·{z}; multipliers agree exactly
        let base = detect_cycle(SHELL_LAMBDA, 2000).unwrap().unwrap();
        for (factor, point_factor) in [
            (Complex64::new(-1.0, 0.0), Complex64::new(-1.0, 0.0)),
            (Complex64::i(), -Complex64::i()),
            (-Complex64::i(), Complex64::i()),
        ] {
            let lam2 = factor * SHELL_LAMBDA;
            let seed: Vec<Complex64> = base.points.iter().map(|z| point_factor * z).collect();
            let cycle2 = refine_cycle(lam2, &seed, base.period).unwrap();
            let closure = eval_f(lam2, cycle2.points[base.period - 1])
                .finite()
                .unwrap();
            assert!((closure - cycle2.points[0]).norm() < 1e-10);
            assert!((cycle2.multiplier.norm() - base.multiplier.norm()).abs() < 1e-9);
            // the transformed cycle reproduces the multiplier itself
            assert!((cycle2.multiplier - base.multiplier).norm() < 1e-9);
        }
    }

    #[test]
    fn conjugate_parameter_carries_conjugate_cycle() {
        let base = detect_cycle(SHELL_LAMBDA, 2000).unwrap().unwrap();
        let conj = detect_cycle(SHELL_LAMBDA.conj(), 2000).unwrap().unwrap();
        assert_eq!(conj.period, base.period);
        assert!((conj.multiplier - base.multiplier.conj()).norm() < 1e-9);
        assert!((conj.points[0] - base.points[0].conj()).norm() < 1e-9);
    }

    #[test]
    fn reported_period_is_minimal() {
        // seed refinement with a doubled period; the divisor must be reported
        let base = detect_cycle(SHELL_LAMBDA, 2000).unwrap().unwrap();
        let seed = vec![base.points[0]; 2];
        match refine_cycle(SHELL_LAMBDA, &seed, 2) {
            Err(CyclesError::NotMinimalPeriod { divisor: 1, .. }) => {}
            other => panic!("expected NotMinimalPeriod, got {other:?}"),
        }
    }
}
